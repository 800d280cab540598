//! Command-line front end. Usage errors exit with 2, runtime errors with 1,
//! and either prints one diagnostic line to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audio::AudioBuffer;
use crate::cost::{self, CostReport, SwitchingLatency};
use crate::error::{Error, Result};
use crate::experiment::{
    default_output_dir, run_experiment, ExperimentSpec, FilterSource, InputSource,
};
use crate::processor::Algorithm;
use crate::reference::{CrossfadeConfig, CrossfadeShape};
use crate::wav::{write_wav, WavFormat};

#[derive(Debug, Parser)]
#[command(name = "tvolap", version, about = "Time-variant partitioned convolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the analytic operation count and latencies.
    Cost(CostArgs),
    /// Write a generated test signal or surrogate impulse response to WAV.
    Signal(SignalArgs),
    /// Filter an input with one impulse response (no switching).
    Process(ProcessArgs),
    /// Run a single filter exchange and measure the transition.
    Switch(SwitchArgs),
    /// Compare TVOLAP against crossfaded time-domain convolution.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleFormat {
    Float32,
    Pcm16,
    Pcm24,
}

impl From<SampleFormat> for WavFormat {
    fn from(f: SampleFormat) -> Self {
        match f {
            SampleFormat::Float32 => WavFormat::Float32,
            SampleFormat::Pcm16 => WavFormat::Pcm16,
            SampleFormat::Pcm24 => WavFormat::Pcm24,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FadeShape {
    Hann,
    Linear,
}

#[derive(Debug, Args)]
struct CostArgs {
    /// Comma-separated schemes (tdc, cf-tdc, ola, wola, tvolap); all by default.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long, default_value_t = 2048)]
    ir_len: usize,
    /// TVOLAP block size 2L; the other schemes always use N_IR. Defaults to min(512, N_IR).
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, default_value_t = 48000.0)]
    fs: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Print a reference table (N_IR 2048 or 512) next to the published figures.
    #[arg(long, conflicts_with_all = ["algo", "ir_len", "block", "fs"])]
    table: Option<usize>,
}

#[derive(Debug, Args)]
struct SignalArgs {
    /// ones, sine[:Hz], pink[:seed], delta[:gain], -delta, hrir:<deg> or brir:<deg>
    #[arg(allow_hyphen_values = true)]
    kind: String,
    #[arg(long, default_value_t = 48000)]
    samples: usize,
    #[arg(long, default_value_t = 48000)]
    fs: u32,
    /// Seed for surrogate noise tails.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "float32")]
    sample_format: SampleFormat,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// ones, sine[:Hz], pink[:seed] or a WAV path.
    #[arg(long, default_value = "ones")]
    input: String,
    /// Length of generated inputs in samples.
    #[arg(long, default_value_t = 8192)]
    samples: usize,
    /// Rate of generated inputs and filters.
    #[arg(long, default_value_t = 48000)]
    fs: u32,
    /// TVOLAP block size 2L.
    #[arg(long, default_value_t = 512)]
    block: usize,
    /// Length of synthetic filters.
    #[arg(long, default_value_t = 2048)]
    ir_len: usize,
    /// Host buffer size fed to the frame adapter.
    #[arg(long)]
    chunk: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory (default: $TVOLAP_OUT_DIR or ./tvolap-out).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[arg(long, value_delimiter = ',', default_value = "tvolap")]
    algo: Vec<Algorithm>,
    /// Filter: WAV path or delta[:gain], -delta, hrir:<deg>, brir:<deg>.
    #[arg(long, allow_hyphen_values = true)]
    ir: String,
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Debug, Args)]
struct SwitchArgs {
    #[arg(long, value_delimiter = ',', default_value = "tvolap")]
    algo: Vec<Algorithm>,
    #[arg(long, allow_hyphen_values = true, default_value = "+delta")]
    ir_a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-delta")]
    ir_b: String,
    /// Requested switch time; applied at the nearest hop boundary.
    #[arg(long, default_value_t = 50.0)]
    switch_ms: f64,
    /// CF-TDC fade length in samples (default L).
    #[arg(long)]
    fade: Option<usize>,
    #[arg(long, value_enum, default_value = "hann")]
    fade_shape: FadeShape,
    #[command(flatten)]
    source: SourceArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "hrir:0")]
    ir_a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "hrir:90")]
    ir_b: String,
    #[arg(long, default_value_t = 50.0)]
    switch_ms: f64,
    /// CF-TDC fade length in samples (default L).
    #[arg(long)]
    fade: Option<usize>,
    #[command(flatten)]
    source: SourceArgs,
}

/// Failure classes that map to distinct exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = writeln!(err, "tvolap: missing subcommand (try --help)");
                return 2;
            }
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let _ = writeln!(err, "tvolap: {}", line.trim_start_matches("error: "));
            return 2;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "tvolap: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "tvolap: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::Cost(a) => cost_cmd(a, out),
        Command::Signal(a) => signal_cmd(a, out),
        Command::Process(a) => {
            let filter = parse_filter(&a.ir)?;
            let spec = spec_from(&a.source, a.algo, filter, None, 0.0)?;
            experiment_cmd(&spec, &a.source, out)
        }
        Command::Switch(a) => {
            let (fa, fb) = (parse_filter(&a.ir_a)?, parse_filter(&a.ir_b)?);
            let mut spec = spec_from(&a.source, a.algo, fa, Some(fb), a.switch_ms)?;
            let shape = match a.fade_shape {
                FadeShape::Hann => CrossfadeShape::HannComplementary,
                FadeShape::Linear => CrossfadeShape::Linear,
            };
            spec.crossfade = Some(CrossfadeConfig::new(a.fade.unwrap_or(a.source.block / 2), shape)?);
            experiment_cmd(&spec, &a.source, out)
        }
        Command::Compare(a) => {
            let (fa, fb) = (parse_filter(&a.ir_a)?, parse_filter(&a.ir_b)?);
            let mut spec = spec_from(&a.source, vec![Algorithm::Tvolap], fa, Some(fb), a.switch_ms)?;
            spec.compare = true;
            if let Some(d) = a.fade {
                spec.crossfade = Some(CrossfadeConfig::hann(d)?);
            }
            experiment_cmd(&spec, &a.source, out)
        }
    }
}

fn parse_filter(s: &str) -> std::result::Result<FilterSource, Failure> {
    let f: FilterSource = s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    if let FilterSource::Wav(p) = &f {
        if !p.is_file() {
            return Err(Failure::Usage(format!("filter file '{}' not found", p.display())));
        }
    }
    Ok(f)
}

fn spec_from(
    src: &SourceArgs,
    algorithms: Vec<Algorithm>,
    filter_a: FilterSource,
    filter_b: Option<FilterSource>,
    switch_time_ms: f64,
) -> std::result::Result<ExperimentSpec, Failure> {
    let input: InputSource = src.input.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    if let InputSource::Wav(p) = &input {
        if !p.is_file() {
            return Err(Failure::Usage(format!("input file '{}' not found", p.display())));
        }
    }
    Ok(ExperimentSpec {
        algorithms,
        input,
        duration: src.samples,
        filter_a,
        filter_b,
        switch_time_ms,
        block: src.block,
        ir_len: src.ir_len,
        sample_rate: src.fs,
        crossfade: None,
        compare: false,
        host_chunk: src.chunk,
        seed: src.seed,
    })
}

fn experiment_cmd(spec: &ExperimentSpec, src: &SourceArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let result = run_experiment(spec)?;
    let dir = src.out_dir.clone().unwrap_or_else(default_output_dir);
    let written = result.write_outputs(&dir)?;
    let mut w = csv::Writer::from_writer(&mut *out);
    if result.comparisons.is_empty() {
        for m in result.metrics() {
            w.serialize(m).map_err(Error::from)?;
        }
    } else {
        for c in &result.comparisons {
            w.serialize(c).map_err(Error::from)?;
        }
    }
    w.flush().map_err(Error::from)?;
    drop(w);
    for p in written {
        writeln!(out, "# wrote {}", p.display()).map_err(Error::from)?;
    }
    Ok(())
}

fn signal_cmd(a: SignalArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let buf: AudioBuffer = match a.kind.parse::<InputSource>() {
        Ok(InputSource::Wav(_)) | Err(_) => {
            let filter: FilterSource = a
                .kind
                .parse()
                .map_err(|e: Error| Failure::Usage(e.to_string()))?;
            if matches!(filter, FilterSource::Wav(_)) {
                return Err(Failure::Usage(format!("unknown signal kind '{}'", a.kind)));
            }
            filter.resolve(a.samples, a.fs, a.seed)?.into()
        }
        Ok(input) => input.resolve(a.samples, a.fs)?,
    };
    write_wav(&a.out, &buf, a.sample_format.into())?;
    writeln!(
        out,
        "# wrote {} ({} ch, {} samples, {} Hz)",
        a.out.display(),
        buf.channel_count(),
        buf.len(),
        buf.sample_rate()
    )
    .map_err(Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct TableLine<'a> {
    #[serde(flatten)]
    report: &'a CostReport,
    published_mflops: f64,
    published_audio_latency: usize,
    published_switching_latency: SwitchingLatency,
    relative_deviation: f64,
}

fn cost_cmd(a: CostArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    if let Some(n) = a.table {
        let rows = cost::published_table(n)?;
        let lines: Vec<TableLine> = rows
            .iter()
            .map(|r| TableLine {
                report: &r.report,
                published_mflops: r.published_mflops,
                published_audio_latency: r.published_audio_latency,
                published_switching_latency: r.published_switching_latency,
                relative_deviation: r.relative_deviation(),
            })
            .collect();
        return match a.format {
            // flattened structs cannot go through the csv serializer
            Format::Csv => {
                writeln!(out, "algorithm,mflops,published_mflops,relative_deviation,audio_latency,published_audio_latency,switching_latency,published_switching_latency")
                    .map_err(Error::from)?;
                for l in &lines {
                    writeln!(
                        out,
                        "{},{},{},{:.6},{},{},{},{}",
                        l.report.algorithm,
                        l.report.mflops,
                        l.published_mflops,
                        l.relative_deviation,
                        l.report.audio_latency,
                        l.published_audio_latency,
                        latency_text(l.report.switching_latency),
                        latency_text(l.published_switching_latency)
                    )
                    .map_err(Error::from)?;
                }
                Ok(())
            }
            Format::Json => {
                let text = serde_json::to_string_pretty(&lines).map_err(Error::from)?;
                writeln!(out, "{text}").map_err(Error::from)?;
                Ok(())
            }
        };
    }
    let algos = if a.algo.is_empty() {
        vec![Algorithm::Tdc, Algorithm::CfTdc, Algorithm::Ola, Algorithm::Wola, Algorithm::Tvolap]
    } else {
        a.algo
    };
    let tvolap_block = a.block.unwrap_or(a.ir_len.min(512));
    let reports = algos
        .into_iter()
        .map(|alg| {
            let block = if alg == Algorithm::Tvolap { tvolap_block } else { a.ir_len };
            cost::cost(alg, a.ir_len, a.fs, block)
        })
        .collect::<Result<Vec<_>>>()?;
    match a.format {
        Format::Csv => cost::write_csv(&reports, &mut *out)?,
        Format::Json => writeln!(out, "{}", cost::to_json(&reports)?).map_err(Error::from)?,
    }
    Ok(())
}

fn latency_text(l: SwitchingLatency) -> String {
    match l {
        SwitchingLatency::Samples(n) => n.to_string(),
        SwitchingLatency::FadeDependent => "crossfade-dependent".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("tvolap").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn cost_prints_tvolap_row() {
        let (code, out, _) = call(&["cost", "--algo", "tvolap", "--ir-len", "2048", "--block", "512", "--fs", "48000"]);
        assert_eq!(code, 0);
        let row = out.lines().nth(1).unwrap();
        assert!(row.starts_with("TVOLAP,2048,512,48000.0,304.0,14.592,512,256,"), "{row}");
    }

    #[test]
    fn cost_json_and_table() {
        let (code, out, _) = call(&["cost", "--algo", "ola", "--format", "json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[0]["mflops"], 6.96);
        let (code, out, _) = call(&["cost", "--table", "512"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
    }

    #[test]
    fn usage_errors_exit_two_with_one_line() {
        let (code, _, err) = call(&["cost", "--bogus"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
        let (code, _, err) = call(&[]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
        let (code, _, err) = call(&["process", "--ir", "/no/such/file.wav"]);
        assert_eq!(code, 2);
        assert!(err.contains("not found"), "{err}");
    }

    #[test]
    fn runtime_errors_exit_one() {
        let (code, _, err) = call(&["cost", "--algo", "ols"]);
        assert_eq!(code, 1);
        assert_eq!(err.lines().count(), 1);
    }
}
