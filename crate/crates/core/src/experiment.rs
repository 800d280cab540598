//! Experiment runner: one input, one or two filters, an optional switch, and
//! any subset of the engines, with measured transition metrics.
//!
//! All sample indices in the metrics refer to the *aligned* output, i.e. the
//! streamed output with each engine's [`output_delay`] removed, so that index
//! `n` lines up with sample `n` of the direct convolution.
//!
//! [`output_delay`]: crate::StreamingProcessor::output_delay

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::adapter::FrameAdapter;
use crate::audio::{AudioBuffer, ImpulseResponse};
use crate::engine::TvolapEngine;
use crate::error::{Error, Result};
use crate::processor::{Algorithm, StreamingProcessor};
use crate::reference::{
    BlockConvolver, CrossfadeConfig, CrossfadeShape, TimeDomainConvolver, WolaConvolver,
};
use crate::signals::{gen_ones, gen_pink, gen_sine, BinauralSurrogate, PHASE_FLIP_FREQUENCY};
use crate::wav::{read_wav, write_wav, WavFormat};

/// Optional override for the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TVOLAP_OUT_DIR";

pub const DEFAULT_OUTPUT_DIR: &str = "tvolap-out";

/// Host buffer size used to feed the frame adapter when none is given.
pub const DEFAULT_HOST_CHUNK: usize = 512;

/// `$TVOLAP_OUT_DIR` if set, otherwise `./tvolap-out`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Ones,
    Sine { freq: f64 },
    Pink { seed: u64 },
    Wav(PathBuf),
    Buffer(AudioBuffer),
}

impl InputSource {
    /// Generated sources produce `len` samples at `sample_rate`; WAV and
    /// buffer sources keep their own length and rate.
    pub fn resolve(&self, len: usize, sample_rate: u32) -> Result<AudioBuffer> {
        match self {
            InputSource::Ones => gen_ones(len, sample_rate),
            InputSource::Sine { freq } => gen_sine(*freq, len, sample_rate),
            InputSource::Pink { seed } => gen_pink(*seed, len, sample_rate),
            InputSource::Wav(path) => read_wav(path),
            InputSource::Buffer(b) => Ok(b.clone()),
        }
    }
}

/// Accepts `ones`, `sine`, `sine:<Hz>`, `pink`, `pink:<seed>`, or a WAV path.
impl FromStr for InputSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = split_arg(s);
        let bad = || Error::InvalidConfiguration(format!("cannot parse input source '{s}'"));
        Ok(match (head, arg) {
            ("ones", None) => InputSource::Ones,
            ("sine", None) => InputSource::Sine {
                freq: PHASE_FLIP_FREQUENCY,
            },
            ("sine", Some(f)) => InputSource::Sine {
                freq: f.parse().map_err(|_| bad())?,
            },
            ("pink", None) => InputSource::Pink { seed: 1 },
            ("pink", Some(seed)) => InputSource::Pink {
                seed: seed.parse().map_err(|_| bad())?,
            },
            ("wav", Some(path)) => InputSource::Wav(path.into()),
            _ => InputSource::Wav(s.into()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterSource {
    /// Scaled unit impulse, zero-padded to the experiment's IR length.
    Delta { gain: f64 },
    Hrir { azimuth_deg: f64 },
    Brir { azimuth_deg: f64 },
    Wav(PathBuf),
    Response(ImpulseResponse),
}

impl FilterSource {
    pub fn resolve(&self, len: usize, sample_rate: u32, seed: u64) -> Result<ImpulseResponse> {
        match self {
            FilterSource::Delta { gain } => ImpulseResponse::delta(*gain, len, 1, sample_rate),
            FilterSource::Hrir { azimuth_deg } => {
                BinauralSurrogate::hrir(*azimuth_deg, len, sample_rate, seed).build()
            }
            FilterSource::Brir { azimuth_deg } => {
                BinauralSurrogate::brir(*azimuth_deg, len, sample_rate, seed).build()
            }
            FilterSource::Wav(path) => read_wav(path)?.try_into(),
            FilterSource::Response(ir) => Ok(ir.clone()),
        }
    }
}

/// Accepts `+delta`, `-delta`, `delta:<gain>`, `hrir:<deg>`, `brir:<deg>`, or a WAV path.
impl FromStr for FilterSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = split_arg(s);
        let bad = || Error::InvalidConfiguration(format!("cannot parse filter source '{s}'"));
        let number = |a: Option<&str>| -> Result<f64> { a.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        Ok(match head {
            "delta" | "+delta" if arg.is_none() => FilterSource::Delta { gain: 1.0 },
            "-delta" if arg.is_none() => FilterSource::Delta { gain: -1.0 },
            "delta" => FilterSource::Delta { gain: number(arg)? },
            "hrir" => FilterSource::Hrir {
                azimuth_deg: number(arg)?,
            },
            "brir" => FilterSource::Brir {
                azimuth_deg: number(arg)?,
            },
            "wav" if arg.is_some() => FilterSource::Wav(arg.unwrap_or_default().into()),
            _ => FilterSource::Wav(s.into()),
        })
    }
}

fn split_arg(s: &str) -> (&str, Option<&str>) {
    match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithms: Vec<Algorithm>,
    pub input: InputSource,
    /// Length in samples of generated inputs.
    pub duration: usize,
    pub filter_a: FilterSource,
    /// Target of the switch; `None` runs time-invariant filtering with `filter_a`.
    pub filter_b: Option<FilterSource>,
    pub switch_time_ms: f64,
    /// TVOLAP window length `2L`.
    pub block: usize,
    /// Length of synthetic filters.
    pub ir_len: usize,
    /// Rate of generated inputs and synthetic filters.
    pub sample_rate: u32,
    /// CF-TDC fade; defaults to a Hann fade over `L` samples.
    pub crossfade: Option<CrossfadeConfig>,
    /// Also run TVOLAP against hop-aligned CF-TDC and measure the difference.
    pub compare: bool,
    pub host_chunk: Option<usize>,
    /// Seed of the surrogate noise tails (filter B uses `seed + 1`).
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            algorithms: vec![Algorithm::Tvolap],
            input: InputSource::Ones,
            duration: 8192,
            filter_a: FilterSource::Delta { gain: 1.0 },
            filter_b: Some(FilterSource::Delta { gain: -1.0 }),
            switch_time_ms: 50.0,
            block: 512,
            ir_len: 2048,
            sample_rate: 48000,
            crossfade: None,
            compare: false,
            host_chunk: None,
            seed: 1,
        }
    }
}

/// Per-engine measurements. Transition fields are empty without a switch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchMetrics {
    pub algorithm: Algorithm,
    pub channels: usize,
    pub hop: usize,
    pub ir_len: usize,
    pub audio_latency: usize,
    pub output_delay: usize,
    pub switching_latency: usize,
    /// Requested switch time in input samples.
    pub switch_requested_sample: Option<usize>,
    /// Input sample at which the engine actually applied the new filter.
    pub switch_applied_sample: Option<usize>,
    /// Aligned output index where the engine starts mixing in the new filter.
    pub transition_start: Option<usize>,
    /// First aligned index that differs from the run with filter A only.
    pub first_deviation: Option<usize>,
    /// One past the last aligned index that differs from the run with filter B only.
    pub transition_end: Option<usize>,
    pub transition_width: Option<usize>,
    pub max_step_at_switch: Option<f64>,
    /// Largest sample-to-sample step of the time-invariant runs in steady state.
    pub max_steady_step: f64,
}

/// TVOLAP against a CF-TDC run whose fade is aligned to the TVOLAP exchange.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonMetrics {
    pub fade_shape: CrossfadeShape,
    pub fade_duration: usize,
    /// Input sample at which the CF-TDC fade begins.
    pub crossfade_trigger_sample: usize,
    pub window_start: usize,
    pub window_len: usize,
    /// Largest absolute difference anywhere in the output.
    pub diff_max: f64,
    /// Difference RMS inside the window.
    pub diff_rms: f64,
    /// CF-TDC output RMS inside the window.
    pub output_rms: f64,
    pub diff_rms_db: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: SwitchMetrics,
    /// Aligned output, `input + ir_len - 1` samples long.
    pub output: AudioBuffer,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub runs: Vec<RunOutput>,
    pub comparisons: Vec<ComparisonMetrics>,
    /// TVOLAP minus Hann-faded CF-TDC, when comparing.
    pub difference: Option<AudioBuffer>,
}

impl ExperimentResult {
    pub fn run(&self, algorithm: Algorithm) -> Option<&RunOutput> {
        self.runs.iter().find(|r| r.metrics.algorithm == algorithm)
    }

    pub fn metrics(&self) -> Vec<SwitchMetrics> {
        self.runs.iter().map(|r| r.metrics.clone()).collect()
    }

    /// Writes `<algo>.wav`, `transition-<algo>.csv`, `metrics.{csv,json}` and,
    /// when comparing, `comparison.{csv,json}` and `difference.wav`.
    /// Returns the written paths.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for run in &self.runs {
            let slug = run.metrics.algorithm.slug();
            let path = dir.join(format!("{slug}.wav"));
            write_wav(&path, &float32_safe(&run.output)?, WavFormat::Float32)?;
            written.push(path);
            if let (Some(start), Some(end)) = (run.metrics.transition_start, run.metrics.transition_end) {
                let path = dir.join(format!("transition-{slug}.csv"));
                write_transition_csv(&path, &run.output, start, end.max(start), run.metrics.hop)?;
                written.push(path);
            }
        }
        let metrics = self.metrics();
        written.push(write_csv_rows(&dir.join("metrics.csv"), &metrics)?);
        written.push(write_json(&dir.join("metrics.json"), &metrics)?);
        if !self.comparisons.is_empty() {
            written.push(write_csv_rows(&dir.join("comparison.csv"), &self.comparisons)?);
            written.push(write_json(&dir.join("comparison.json"), &self.comparisons)?);
        }
        if let Some(diff) = &self.difference {
            let path = dir.join("difference.wav");
            write_wav(&path, &float32_safe(diff)?, WavFormat::Float32)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn float32_safe(buf: &AudioBuffer) -> Result<AudioBuffer> {
    if buf.channels().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("output contains non-finite samples".into()));
    }
    Ok(buf.clone())
}

fn write_transition_csv(path: &Path, y: &AudioBuffer, start: usize, end: usize, hop: usize) -> Result<()> {
    let pad = hop.max(16);
    let lo = start.saturating_sub(pad);
    let hi = (end + pad).min(y.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["sample".to_string()];
    header.extend((0..y.channel_count()).map(|c| format!("ch{c}")));
    w.write_record(&header)?;
    for n in lo..hi {
        let mut row = vec![n.to_string()];
        row.extend(y.channels().iter().map(|c| c[n].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(path.to_path_buf())
}

/// Everything resolved from a spec that the individual runs share.
struct Prepared {
    input: Vec<Vec<f64>>,
    sample_rate: u32,
    ir_len: usize,
    filter_a: ImpulseResponse,
    filter_b: Option<ImpulseResponse>,
    hop: usize,
    crossfade: CrossfadeConfig,
    switch_sample: Option<usize>,
    chunk: usize,
}

impl Prepared {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        if spec.block < 4 || spec.block % 2 != 0 {
            return Err(Error::InvalidSize(format!(
                "block size {} must be an even number >= 4",
                spec.block
            )));
        }
        let hop = spec.block / 2;
        let input = spec.input.resolve(spec.duration, spec.sample_rate)?;
        let sample_rate = input.sample_rate();
        let filter_a = spec.filter_a.resolve(spec.ir_len, sample_rate, spec.seed)?;
        let filter_b = spec
            .filter_b
            .as_ref()
            .map(|f| f.resolve(spec.ir_len, sample_rate, spec.seed + 1))
            .transpose()?;
        for (name, ir) in [("filter A", Some(&filter_a)), ("filter B", filter_b.as_ref())] {
            if let Some(ir) = ir {
                if ir.sample_rate() != sample_rate {
                    return Err(Error::SampleRateMismatch {
                        what: name.into(),
                        found: ir.sample_rate(),
                        expected: sample_rate,
                    });
                }
            }
        }
        let channels = [
            input.channel_count(),
            filter_a.channel_count(),
            filter_b.as_ref().map_or(1, ImpulseResponse::channel_count),
        ]
        .into_iter()
        .max()
        .unwrap_or(1);
        let ir_len = filter_a.len().max(filter_b.as_ref().map_or(0, ImpulseResponse::len));
        let fit = |ir: ImpulseResponse| widen_ir(&ir, channels).map(|ir| ir.padded_to(ir_len));
        let filter_a = fit(filter_a)?;
        let filter_b = filter_b.map(fit).transpose()?;
        let input = if input.channel_count() == channels {
            input
        } else if input.channel_count() == 1 {
            input.fan_out(channels)?
        } else {
            return Err(Error::InvalidInput(format!(
                "{}-channel input cannot drive {channels}-channel filters",
                input.channel_count()
            )));
        };
        let switch_sample = match filter_b {
            Some(_) => {
                let duration_ms = input.len() as f64 * 1000.0 / sample_rate as f64;
                let t = spec.switch_time_ms;
                if !t.is_finite() || t < 0.0 || t >= duration_ms {
                    return Err(Error::SwitchOutOfRange {
                        time_ms: t,
                        duration_ms,
                    });
                }
                Some((t * sample_rate as f64 / 1000.0).round() as usize)
            }
            None => None,
        };
        let crossfade = match spec.crossfade {
            Some(c) => c,
            None => CrossfadeConfig::hann(hop)?,
        };
        let chunk = spec.host_chunk.unwrap_or(DEFAULT_HOST_CHUNK);
        if chunk == 0 {
            return Err(Error::InvalidSize("host chunk must be positive".into()));
        }
        Ok(Self {
            input: input.into_channels(),
            sample_rate,
            ir_len,
            filter_a,
            filter_b,
            hop,
            crossfade,
            switch_sample,
            chunk,
        })
    }

    fn input_len(&self) -> usize {
        self.input[0].len()
    }

    fn output_len(&self) -> usize {
        self.input_len() + self.ir_len - 1
    }

    /// Block schemes need a power-of-two IR; pad up to one.
    fn fitted(&self, algorithm: Algorithm, ir: &ImpulseResponse) -> ImpulseResponse {
        match algorithm {
            Algorithm::Ola | Algorithm::Ols | Algorithm::Wola => {
                ir.padded_to(self.ir_len.next_power_of_two().max(4))
            }
            _ => ir.clone(),
        }
    }

    fn build(
        &self,
        algorithm: Algorithm,
        ir: &ImpulseResponse,
        fade: Option<CrossfadeConfig>,
    ) -> Result<Box<dyn StreamingProcessor>> {
        let ir = self.fitted(algorithm, ir);
        Ok(match algorithm {
            Algorithm::Tdc => Box::new(TimeDomainConvolver::new(&ir, 1, None)?),
            Algorithm::CfTdc => Box::new(TimeDomainConvolver::new(
                &ir,
                1,
                Some(fade.unwrap_or(self.crossfade)),
            )?),
            Algorithm::Ola => Box::new(BlockConvolver::overlap_add(&ir)?),
            Algorithm::Ols => Box::new(BlockConvolver::overlap_save(&ir)?),
            Algorithm::Wola => Box::new(WolaConvolver::new(&ir)?),
            Algorithm::Tvolap => Box::new(TvolapEngine::from_impulse_response(&ir, self.hop)?),
        })
    }

    /// Streams the input through `proc`, applying `switch` before the given
    /// hop, and returns the aligned output.
    fn stream(
        &self,
        proc: Box<dyn StreamingProcessor>,
        switch: Option<(u64, &ImpulseResponse)>,
    ) -> Result<Vec<Vec<f64>>> {
        let hop = proc.hop();
        let delay = proc.output_delay();
        let out_len = self.output_len();
        let total = (out_len + delay).div_ceil(hop) * hop;
        let algorithm = proc.algorithm();
        let mut adapter = FrameAdapter::new(proc);
        if let Some((h, ir)) = switch {
            adapter.schedule_filter(h, self.fitted(algorithm, ir))?;
        }
        let mut pos = 0;
        let mut chunk: Vec<Vec<f64>> = vec![Vec::with_capacity(self.chunk); self.input.len()];
        while pos < total {
            let end = (pos + self.chunk).min(total);
            for (dst, src) in chunk.iter_mut().zip(&self.input) {
                dst.clear();
                dst.extend_from_slice(&src[pos.min(src.len())..end.min(src.len())]);
                dst.resize(end - pos, 0.0);
            }
            adapter.push(&chunk)?;
            pos = end;
        }
        Ok(adapter
            .pull_all()
            .into_iter()
            .map(|mut c| {
                c.drain(..delay);
                c.truncate(out_len);
                c
            })
            .collect())
    }

    /// Time-invariant run with `ir`, aligned.
    fn reference(&self, algorithm: Algorithm, ir: &ImpulseResponse) -> Result<Vec<Vec<f64>>> {
        self.stream(self.build(algorithm, ir, None)?, None)
    }
}

/// Copies a mono response onto `channels` lanes.
fn widen_ir(ir: &ImpulseResponse, channels: usize) -> Result<ImpulseResponse> {
    match ir.channel_count() {
        c if c == channels => Ok(ir.clone()),
        1 => ImpulseResponse::new(vec![ir.channel(0).to_vec(); channels], ir.sample_rate()),
        c => Err(Error::IncompatibleFilter(format!(
            "{c}-channel filter in a {channels}-channel experiment"
        ))),
    }
}

fn max_step(y: &[Vec<f64>], range: std::ops::Range<usize>) -> f64 {
    y.iter()
        .flat_map(|c| {
            let r = range.start.max(1)..range.end.min(c.len());
            r.map(move |n| (c[n] - c[n - 1]).abs())
        })
        .fold(0.0, f64::max)
}

fn peak(y: &[Vec<f64>]) -> f64 {
    y.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn deviates(a: &[Vec<f64>], b: &[Vec<f64>], n: usize, tol: f64) -> bool {
    a.iter().zip(b).any(|(x, y)| (x[n] - y[n]).abs() > tol)
}

fn rms(y: &[Vec<f64>], range: std::ops::Range<usize>) -> f64 {
    let count = (range.len() * y.len()).max(1) as f64;
    (y.iter().map(|c| c[range.clone()].iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / count).sqrt()
}

/// Relative tolerance below which two runs count as identical.
const MATCH_TOLERANCE: f64 = 1e-9;

fn run_one(prep: &Prepared, algorithm: Algorithm) -> Result<RunOutput> {
    let proc = prep.build(algorithm, &prep.filter_a, None)?;
    let (hop, delay) = (proc.hop(), proc.output_delay());
    let mut metrics = SwitchMetrics {
        algorithm,
        channels: proc.channel_count(),
        hop,
        ir_len: prep.fitted(algorithm, &prep.filter_a).len(),
        audio_latency: proc.latency(),
        output_delay: delay,
        switching_latency: proc.switching_latency(),
        switch_requested_sample: None,
        switch_applied_sample: None,
        transition_start: None,
        first_deviation: None,
        transition_end: None,
        transition_width: None,
        max_step_at_switch: None,
        max_steady_step: 0.0,
    };
    let steady = prep.ir_len.min(prep.input_len())..prep.input_len();
    let steady = if steady.is_empty() { 0..prep.output_len() } else { steady };

    let (Some(requested), Some(filter_b)) = (prep.switch_sample, prep.filter_b.as_ref()) else {
        let out = prep.stream(proc, None)?;
        metrics.max_steady_step = max_step(&out, steady);
        return Ok(RunOutput {
            metrics,
            output: AudioBuffer::new(out, prep.sample_rate)?,
        });
    };

    let h = (requested as f64 / hop as f64).round() as u64;
    let applied = h as usize * hop;
    let out = prep.stream(proc, Some((h, filter_b)))?;
    let ref_a = prep.reference(algorithm, &prep.filter_a)?;
    let ref_b = prep.reference(algorithm, filter_b)?;
    let tol = MATCH_TOLERANCE * peak(&ref_a).max(peak(&ref_b)).max(1.0);

    let start = applied.saturating_sub(delay);
    let len = out[0].len();
    let first = (0..len).find(|&n| deviates(&out, &ref_a, n, tol));
    let end = (0..len).rev().find(|&n| deviates(&out, &ref_b, n, tol)).map_or(0, |n| n + 1);
    let width = end.saturating_sub(start);

    metrics.switch_requested_sample = Some(requested);
    metrics.switch_applied_sample = Some(applied);
    metrics.transition_start = Some(start);
    metrics.first_deviation = first;
    metrics.transition_end = Some(end.max(start));
    metrics.transition_width = Some(width);
    metrics.max_step_at_switch = Some(max_step(&out, start..start + width.max(1) + 1));
    metrics.max_steady_step = max_step(&ref_a, steady.clone()).max(max_step(&ref_b, steady));
    Ok(RunOutput {
        metrics,
        output: AudioBuffer::new(out, prep.sample_rate)?,
    })
}

fn compare(prep: &Prepared) -> Result<(Vec<ComparisonMetrics>, AudioBuffer)> {
    let (Some(requested), Some(filter_b)) = (prep.switch_sample, prep.filter_b.as_ref()) else {
        return Err(Error::InvalidConfiguration("compare mode needs a second filter".into()));
    };
    let hop = prep.hop;
    let h = (requested as f64 / hop as f64).round() as usize;
    if h == 0 {
        return Err(Error::InvalidConfiguration(format!(
            "switch at {requested} samples lands on the first hop; compare needs at least one hop of history"
        )));
    }
    let tvolap = prep.stream(prep.build(Algorithm::Tvolap, &prep.filter_a, None)?, Some((h as u64, filter_b)))?;
    // TVOLAP mixes old and new over aligned samples [hL - L, hL); the fade gain
    // for sample t of a CF-TDC fade is indexed from t + 1, so it starts one later.
    let window_start = h * hop - hop;
    let trigger = window_start + 1;
    let window = window_start..(window_start + hop).min(prep.output_len());
    let duration = prep.crossfade.duration();
    let mut comparisons = Vec::new();
    let mut difference = None;
    for shape in [CrossfadeShape::HannComplementary, CrossfadeShape::Linear] {
        let fade = CrossfadeConfig::new(duration, shape)?;
        let cf = prep.stream(prep.build(Algorithm::CfTdc, &prep.filter_a, Some(fade))?, Some((trigger as u64, filter_b)))?;
        let diff: Vec<Vec<f64>> = tvolap
            .iter()
            .zip(&cf)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        let diff_rms = rms(&diff, window.clone());
        let output_rms = rms(&cf, window.clone());
        comparisons.push(ComparisonMetrics {
            fade_shape: shape,
            fade_duration: duration,
            crossfade_trigger_sample: trigger,
            window_start,
            window_len: window.len(),
            diff_max: peak(&diff),
            diff_rms,
            output_rms,
            diff_rms_db: 20.0 * (diff_rms / output_rms).log10(),
        });
        if shape == CrossfadeShape::HannComplementary {
            difference = Some(AudioBuffer::new(diff, prep.sample_rate)?);
        }
    }
    Ok((comparisons, difference.expect("hann comparison ran")))
}

/// Runs every requested engine (and the comparison, if asked) in memory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    if spec.algorithms.is_empty() && !spec.compare {
        return Err(Error::InvalidConfiguration("no algorithm selected".into()));
    }
    let prep = Prepared::new(spec)?;
    let runs = spec
        .algorithms
        .iter()
        .map(|&a| run_one(&prep, a))
        .collect::<Result<Vec<_>>>()?;
    let (comparisons, difference) = if spec.compare {
        let (c, d) = compare(&prep)?;
        (c, Some(d))
    } else {
        (Vec::new(), None)
    };
    Ok(ExperimentResult {
        runs,
        comparisons,
        difference,
    })
}
