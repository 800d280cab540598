//! Comparison convolvers: direct time-domain convolution (with optional
//! output crossfade), overlap-add, overlap-save and weighted overlap-add.

use num_complex::Complex64;
use serde::Serialize;

use crate::audio::{AudioBuffer, ImpulseResponse};
use crate::error::{Error, Result};
use crate::partition::periodic_hann;
use crate::processor::{check_frame, Algorithm, StreamingProcessor};
use crate::spectral::{RealFft, MIN_TRANSFORM_LENGTH};

/// Full linear convolution `y(n) = sum_i x(i) h(n - i)`, per lane.
///
/// A mono signal is fanned out across a multichannel response and a mono
/// response is applied to every signal channel.
pub fn direct_convolve(x: &AudioBuffer, h: &ImpulseResponse) -> Result<AudioBuffer> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot convolve an empty signal".into()));
    }
    let lanes = match (x.channel_count(), h.channel_count()) {
        (a, b) if a == b => a,
        (1, b) => b,
        (a, 1) => a,
        (a, b) => {
            return Err(Error::InvalidInput(format!(
                "{a}-channel signal against {b}-channel impulse response"
            )))
        }
    };
    let channels = (0..lanes)
        .map(|c| {
            let xs = x.channel(c.min(x.channel_count() - 1));
            let hs = h.channel(c.min(h.channel_count() - 1));
            convolve_lane(xs, hs)
        })
        .collect();
    AudioBuffer::new(channels, x.sample_rate())
}

pub(crate) fn convolve_lane(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, &xv) in x.iter().enumerate() {
        if xv == 0.0 {
            continue;
        }
        for (acc, &hv) in y[i..].iter_mut().zip(h) {
            *acc += xv * hv;
        }
    }
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossfadeShape {
    /// Raised-cosine gains, the shape of a Hann window's falling half.
    #[default]
    HannComplementary,
    Linear,
}

/// Crossfade used by [`TimeDomainConvolver`] on a filter switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossfadeConfig {
    duration: usize,
    shape: CrossfadeShape,
}

impl CrossfadeConfig {
    pub fn new(duration: usize, shape: CrossfadeShape) -> Result<Self> {
        if duration == 0 {
            return Err(Error::InvalidConfiguration(
                "crossfade duration must be at least one sample".into(),
            ));
        }
        Ok(Self { duration, shape })
    }

    pub fn hann(duration: usize) -> Result<Self> {
        Self::new(duration, CrossfadeShape::HannComplementary)
    }

    pub fn duration(&self) -> usize {
        self.duration
    }

    pub fn shape(&self) -> CrossfadeShape {
        self.shape
    }

    /// `(g_old, g_new)` for the `t`-th sample after the switch.
    ///
    /// The last faded sample (`t = duration - 1`) is already fully new, so a
    /// one-sample fade is a hard switch.
    pub fn gains(&self, t: usize) -> (f64, f64) {
        if t + 1 >= self.duration {
            return (0.0, 1.0);
        }
        let phase = (t + 1) as f64 / self.duration as f64;
        let new = match self.shape {
            CrossfadeShape::HannComplementary => 0.5 * (1.0 - (std::f64::consts::PI * phase).cos()),
            CrossfadeShape::Linear => phase,
        };
        (1.0 - new, new)
    }
}

#[derive(Debug, Clone)]
struct Fade {
    target: Vec<Vec<f64>>,
    config: CrossfadeConfig,
    position: usize,
}

/// Direct time-domain convolution with zero latency.
///
/// Without a crossfade config a filter change is a hard switch (TDC); with
/// one, a second convolution runs in parallel for the fade duration and the
/// two outputs are blended (CF-TDC).
#[derive(Debug, Clone)]
pub struct TimeDomainConvolver {
    hop: usize,
    ir_len: usize,
    filter: Vec<Vec<f64>>,
    crossfade: Option<CrossfadeConfig>,
    fade: Option<Fade>,
    // per channel: the last ir_len - 1 inputs followed by the current hop
    buffers: Vec<Vec<f64>>,
}

impl TimeDomainConvolver {
    pub fn new(ir: &ImpulseResponse, hop: usize, crossfade: Option<CrossfadeConfig>) -> Result<Self> {
        if hop == 0 {
            return Err(Error::InvalidSize("hop size must be positive".into()));
        }
        let ir_len = ir.len();
        Ok(Self {
            hop,
            ir_len,
            filter: ir.channels().to_vec(),
            crossfade,
            fade: None,
            buffers: vec![vec![0.0; ir_len - 1 + hop]; ir.channel_count()],
        })
    }

    pub fn crossfade(&self) -> Option<CrossfadeConfig> {
        self.crossfade
    }

    pub fn is_fading(&self) -> bool {
        self.fade.is_some()
    }

    fn fitted(&self, ir: &ImpulseResponse) -> Result<Vec<Vec<f64>>> {
        if ir.channel_count() != self.filter.len() {
            return Err(Error::IncompatibleFilter(format!(
                "{} channels, convolver has {}",
                ir.channel_count(),
                self.filter.len()
            )));
        }
        if ir.len() > self.ir_len {
            return Err(Error::IncompatibleFilter(format!(
                "impulse response of {} samples exceeds the history of {}",
                ir.len(),
                self.ir_len
            )));
        }
        Ok(ir.padded_to(self.ir_len).channels().to_vec())
    }

    /// Starts a crossfade to `ir`, beginning with the next processed sample.
    pub fn switch(&mut self, ir: &ImpulseResponse, config: CrossfadeConfig) -> Result<()> {
        if let Some(f) = &self.fade {
            return Err(Error::SwitchInProgress {
                remaining: f.config.duration - f.position,
            });
        }
        let target = self.fitted(ir)?;
        self.fade = Some(Fade {
            target,
            config,
            position: 0,
        });
        Ok(())
    }
}

fn dot_reversed(history: &[f64], end: usize, h: &[f64]) -> f64 {
    // sum_i h[i] * history[end - i]
    let window = &history[end + 1 - h.len()..=end];
    window.iter().rev().zip(h).map(|(x, c)| x * c).sum()
}

impl StreamingProcessor for TimeDomainConvolver {
    fn algorithm(&self) -> Algorithm {
        if self.crossfade.is_some() {
            Algorithm::CfTdc
        } else {
            Algorithm::Tdc
        }
    }

    fn channel_count(&self) -> usize {
        self.filter.len()
    }

    fn hop(&self) -> usize {
        self.hop
    }

    fn latency(&self) -> usize {
        0
    }

    fn output_delay(&self) -> usize {
        0
    }

    /// The fade duration (0 for a hard switch).
    fn switching_latency(&self) -> usize {
        self.crossfade.map_or(0, |c| c.duration)
    }

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_frame(input, self.filter.len(), self.hop)?;
        let past = self.ir_len - 1;
        let start_position = self.fade.as_ref().map(|f| f.position);
        let mut out = Vec::with_capacity(input.len());
        for (c, x) in input.iter().enumerate() {
            let buf = &mut self.buffers[c];
            buf[past..].copy_from_slice(x);
            let mut y = vec![0.0; self.hop];
            for (n, yv) in y.iter_mut().enumerate() {
                let old = dot_reversed(buf, past + n, &self.filter[c]);
                *yv = match (&self.fade, start_position) {
                    (Some(fade), Some(p0)) => {
                        let (g_old, g_new) = fade.config.gains(p0 + n);
                        if g_old == 0.0 {
                            dot_reversed(buf, past + n, &fade.target[c])
                        } else {
                            g_old * old + g_new * dot_reversed(buf, past + n, &fade.target[c])
                        }
                    }
                    _ => old,
                };
            }
            buf.copy_within(self.hop.., 0);
            out.push(y);
        }
        if let Some(fade) = &mut self.fade {
            fade.position += self.hop;
            if fade.position >= fade.config.duration {
                let done = self.fade.take().expect("fade present");
                self.filter = done.target;
            }
        }
        Ok(out)
    }

    /// Hard switch for TDC; default crossfade for CF-TDC.
    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()> {
        match self.crossfade {
            Some(config) => self.switch(ir, config),
            None => {
                self.filter = self.fitted(ir)?;
                Ok(())
            }
        }
    }

    fn reset(&mut self) {
        for b in &mut self.buffers {
            b.fill(0.0);
        }
        if let Some(f) = self.fade.take() {
            self.filter = f.target;
        }
    }
}

fn block_fft_for(ir_len: usize) -> Result<RealFft> {
    let n = 2 * ir_len;
    if n < MIN_TRANSFORM_LENGTH || !n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "block size {ir_len} needs a power-of-two transform of {n} samples"
        )));
    }
    RealFft::new(n)
}

fn filter_spectra(fft: &RealFft, ir: &ImpulseResponse, ir_len: usize) -> Result<Vec<Vec<Complex64>>> {
    if ir.len() != ir_len {
        return Err(Error::IncompatibleFilter(format!(
            "filter of {} samples, block size is {ir_len}",
            ir.len()
        )));
    }
    let mut block = vec![0.0; fft.len()];
    ir.channels()
        .iter()
        .map(|h| {
            block.fill(0.0);
            block[..ir_len].copy_from_slice(h);
            Ok(fft.forward(&block)?.into_bins())
        })
        .collect()
}

fn check_channels(current: usize, ir: &ImpulseResponse) -> Result<()> {
    if ir.channel_count() != current {
        return Err(Error::IncompatibleFilter(format!(
            "{} channels, convolver has {current}",
            ir.channel_count()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockMode {
    Add,
    Save,
}

/// Unpartitioned block convolver with block size `N_IR` and a `2 N_IR` transform.
///
/// Overlap-add keeps the second half of each inverse block and adds it to the
/// next block's head; a new filter only affects blocks processed after the
/// change, so the carried remainder still holds the old response for one block.
/// Overlap-save transforms a sliding `2 N_IR` input window and keeps the
/// alias-free second half, giving an immediate hard switch.
#[derive(Debug, Clone)]
pub struct BlockConvolver {
    mode: BlockMode,
    ir_len: usize,
    fft: RealFft,
    spectra: Vec<Vec<Complex64>>,
    // OLA: remainder per channel. OLS: previous input block per channel.
    state: Vec<Vec<f64>>,
    block: Vec<f64>,
    bins: Vec<Complex64>,
    time: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl BlockConvolver {
    pub fn overlap_add(ir: &ImpulseResponse) -> Result<Self> {
        Self::new(ir, BlockMode::Add)
    }

    pub fn overlap_save(ir: &ImpulseResponse) -> Result<Self> {
        Self::new(ir, BlockMode::Save)
    }

    fn new(ir: &ImpulseResponse, mode: BlockMode) -> Result<Self> {
        let ir_len = ir.len();
        let fft = block_fft_for(ir_len)?;
        let spectra = filter_spectra(&fft, ir, ir_len)?;
        Ok(Self {
            mode,
            ir_len,
            state: vec![vec![0.0; ir_len]; ir.channel_count()],
            block: vec![0.0; 2 * ir_len],
            bins: vec![Complex64::new(0.0, 0.0); ir_len + 1],
            time: vec![0.0; 2 * ir_len],
            scratch: vec![Complex64::new(0.0, 0.0); ir_len],
            spectra,
            fft,
        })
    }
}

impl StreamingProcessor for BlockConvolver {
    fn algorithm(&self) -> Algorithm {
        match self.mode {
            BlockMode::Add => Algorithm::Ola,
            BlockMode::Save => Algorithm::Ols,
        }
    }

    fn channel_count(&self) -> usize {
        self.spectra.len()
    }

    fn hop(&self) -> usize {
        self.ir_len
    }

    fn latency(&self) -> usize {
        self.ir_len
    }

    fn output_delay(&self) -> usize {
        0
    }

    fn switching_latency(&self) -> usize {
        0
    }

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_frame(input, self.spectra.len(), self.ir_len)?;
        let n = self.ir_len;
        let mut out = Vec::with_capacity(input.len());
        for (c, x) in input.iter().enumerate() {
            match self.mode {
                BlockMode::Add => {
                    self.block[..n].copy_from_slice(x);
                    self.block[n..].fill(0.0);
                }
                BlockMode::Save => {
                    self.block[..n].copy_from_slice(&self.state[c]);
                    self.block[n..].copy_from_slice(x);
                }
            }
            self.fft.forward_into(&self.block, &mut self.bins, &mut self.scratch);
            for (b, h) in self.bins.iter_mut().zip(&self.spectra[c]) {
                *b *= h;
            }
            self.fft.inverse_into(&self.bins, &mut self.time, &mut self.scratch);
            let y = match self.mode {
                BlockMode::Add => {
                    let y: Vec<f64> = self.time[..n]
                        .iter()
                        .zip(&self.state[c])
                        .map(|(a, b)| a + b)
                        .collect();
                    self.state[c].copy_from_slice(&self.time[n..]);
                    y
                }
                BlockMode::Save => {
                    self.state[c].copy_from_slice(x);
                    self.time[n..].to_vec()
                }
            };
            out.push(y);
        }
        Ok(out)
    }

    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()> {
        check_channels(self.spectra.len(), ir)?;
        self.spectra = filter_spectra(&self.fft, ir, self.ir_len)?;
        Ok(())
    }

    fn reset(&mut self) {
        for s in &mut self.state {
            s.fill(0.0);
        }
    }
}

/// Weighted overlap-add: block size `N_IR`, hop `N_IR / 2`, square-root Hann
/// analysis and synthesis windows, `2 N_IR` transform.
///
/// The synthesis window covers the first `N_IR` samples of each inverse
/// block; the remaining `N_IR` (the convolution tail) is overlap-added
/// unwindowed. Filtering is exact only for an identity response.
#[derive(Debug, Clone)]
pub struct WolaConvolver {
    ir_len: usize,
    hop: usize,
    fft: RealFft,
    spectra: Vec<Vec<Complex64>>,
    sqrt_window: Vec<f64>,
    history: Vec<Vec<f64>>,
    accumulators: Vec<Vec<f64>>,
    block: Vec<f64>,
    bins: Vec<Complex64>,
    time: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl WolaConvolver {
    pub fn new(ir: &ImpulseResponse) -> Result<Self> {
        let ir_len = ir.len();
        let fft = block_fft_for(ir_len)?;
        let spectra = filter_spectra(&fft, ir, ir_len)?;
        let hop = ir_len / 2;
        let channels = ir.channel_count();
        Ok(Self {
            ir_len,
            hop,
            sqrt_window: periodic_hann(ir_len).into_iter().map(f64::sqrt).collect(),
            history: vec![vec![0.0; hop]; channels],
            accumulators: vec![vec![0.0; 2 * ir_len]; channels],
            block: vec![0.0; 2 * ir_len],
            bins: vec![Complex64::new(0.0, 0.0); ir_len + 1],
            time: vec![0.0; 2 * ir_len],
            scratch: vec![Complex64::new(0.0, 0.0); ir_len],
            spectra,
            fft,
        })
    }
}

impl StreamingProcessor for WolaConvolver {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Wola
    }

    fn channel_count(&self) -> usize {
        self.spectra.len()
    }

    fn hop(&self) -> usize {
        self.hop
    }

    fn latency(&self) -> usize {
        self.ir_len
    }

    fn output_delay(&self) -> usize {
        self.hop
    }

    fn switching_latency(&self) -> usize {
        self.hop
    }

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_frame(input, self.spectra.len(), self.hop)?;
        let (n, hop) = (self.ir_len, self.hop);
        let mut out = Vec::with_capacity(input.len());
        for (c, x) in input.iter().enumerate() {
            for i in 0..hop {
                self.block[i] = self.history[c][i] * self.sqrt_window[i];
                self.block[hop + i] = x[i] * self.sqrt_window[hop + i];
            }
            self.block[n..].fill(0.0);
            self.fft.forward_into(&self.block, &mut self.bins, &mut self.scratch);
            for (b, h) in self.bins.iter_mut().zip(&self.spectra[c]) {
                *b *= h;
            }
            self.fft.inverse_into(&self.bins, &mut self.time, &mut self.scratch);
            let acc = &mut self.accumulators[c];
            for i in 0..n {
                acc[i] += self.time[i] * self.sqrt_window[i];
                acc[n + i] += self.time[n + i];
            }
            out.push(acc[..hop].iter().map(|v| 0.5 * v).collect());
            acc.copy_within(hop.., 0);
            let len = acc.len();
            acc[len - hop..].fill(0.0);
            self.history[c].copy_from_slice(x);
        }
        Ok(out)
    }

    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()> {
        check_channels(self.spectra.len(), ir)?;
        self.spectra = filter_spectra(&self.fft, ir, self.ir_len)?;
        Ok(())
    }

    fn reset(&mut self) {
        for h in &mut self.history {
            h.fill(0.0);
        }
        for a in &mut self.accumulators {
            a.fill(0.0);
        }
    }
}
