//! Streaming time-variant overlap-add in partitions.
//!
//! Every call consumes one hop of `L` samples per channel:
//!
//! 1. the last `2L` input samples are weighted with a periodic Hann window,
//!    zero-padded to `4L` and transformed; the spectrum enters a delay line;
//! 2. the output spectrum is `Y(k) = sum_m H(k, m) X(k, l - 2m)`, i.e. only
//!    every second stored input spectrum meets a partition;
//! 3. `Y` is inverse transformed into a `4L` intermediate block;
//! 4. its left half is added to the right half of the intermediate block
//!    produced two hops earlier, giving a `2L` output block;
//! 5. consecutive output blocks overlap-add at hop `L` and the first `L`
//!    samples are emitted, scaled by the set's normalization gain.
//!
//! Step 4 pairs blocks two hops apart. Block `l` starts `L` samples after
//! block `l - 1`, so the right half of block `l - 1` would land `L` samples
//! early; at a distance of two hops the halves line up and each output
//! sample is the plain overlap-add of four consecutive intermediate blocks.
//!
//! A filter exchange swaps every partition at once, between two hops. Stored
//! input spectra are kept, so recent input is re-filtered by the new
//! response and the old response fades out along the Hann window over `L`
//! samples.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::audio::ImpulseResponse;
use crate::error::{Error, Result};
use crate::partition::{hann_window, partition_with_count, FilterPartitionSet};
use crate::processor::{check_frame, Algorithm, StreamingProcessor};
use crate::spectral::{mac_in_place, RealFft};

/// Running operation counters, used to check the per-hop work is constant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub hops: u64,
    pub forward_transforms: u64,
    pub spectral_macs: u64,
    pub inverse_transforms: u64,
}

impl OpCounts {
    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        OpCounts {
            hops: self.hops - earlier.hops,
            forward_transforms: self.forward_transforms - earlier.forward_transforms,
            spectral_macs: self.spectral_macs - earlier.spectral_macs,
            inverse_transforms: self.inverse_transforms - earlier.inverse_transforms,
        }
    }
}

/// Handle for staging a replacement filter from another thread.
///
/// The engine picks the staged set up at the start of its next hop.
#[derive(Debug, Clone)]
pub struct FilterExchanger {
    slot: Arc<Mutex<Option<Arc<FilterPartitionSet>>>>,
    reference: Arc<FilterPartitionSet>,
}

impl FilterExchanger {
    pub fn stage(&self, filter: Arc<FilterPartitionSet>) -> Result<()> {
        check_compatible(&self.reference, &filter)?;
        *self.slot.lock().unwrap_or_else(|p| p.into_inner()) = Some(filter);
        Ok(())
    }
}

fn check_compatible(current: &FilterPartitionSet, new: &FilterPartitionSet) -> Result<()> {
    if !current.is_compatible_with(new) {
        return Err(Error::IncompatibleFilter(format!(
            "engine runs L={}, M={}, {} channels; replacement has L={}, M={}, {} channels",
            current.hop(),
            current.partition_count(),
            current.channel_count(),
            new.hop(),
            new.partition_count(),
            new.channel_count()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct Lane {
    history: Vec<f64>,
    delay_line: Vec<Vec<Complex64>>,
    newest: usize,
    // right halves of the last two intermediate blocks, indexed by block parity
    tails: [Vec<f64>; 2],
    carry: Vec<f64>,
}

impl Lane {
    fn new(hop: usize, depth: usize) -> Self {
        Self {
            history: vec![0.0; hop],
            delay_line: vec![vec![Complex64::new(0.0, 0.0); 2 * hop + 1]; depth],
            newest: 0,
            tails: [vec![0.0; 2 * hop], vec![0.0; 2 * hop]],
            carry: vec![0.0; hop],
        }
    }

    fn clear(&mut self) {
        self.history.fill(0.0);
        for frame in &mut self.delay_line {
            frame.fill(Complex64::new(0.0, 0.0));
        }
        self.newest = 0;
        for t in &mut self.tails {
            t.fill(0.0);
        }
        self.carry.fill(0.0);
    }
}

/// Streaming TVOLAP convolver with atomic filter exchange.
#[derive(Debug)]
pub struct TvolapEngine {
    hop: usize,
    filter: Arc<FilterPartitionSet>,
    pending: Option<Arc<FilterPartitionSet>>,
    exchange_slot: Arc<Mutex<Option<Arc<FilterPartitionSet>>>>,
    fft: RealFft,
    window: Vec<f64>,
    lanes: Vec<Lane>,
    block_index: u64,
    counts: OpCounts,
    block: Vec<f64>,
    spectrum: Vec<Complex64>,
    intermediate: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl TvolapEngine {
    pub fn new(filter: Arc<FilterPartitionSet>) -> Result<Self> {
        let hop = filter.hop();
        let depth = 2 * filter.partition_count() - 1;
        let fft = RealFft::new(4 * hop)?;
        let lanes = (0..filter.channel_count())
            .map(|_| Lane::new(hop, depth))
            .collect();
        Ok(Self {
            hop,
            pending: None,
            exchange_slot: Arc::new(Mutex::new(None)),
            window: hann_window(hop)?,
            lanes,
            block_index: 0,
            counts: OpCounts::default(),
            block: vec![0.0; 4 * hop],
            spectrum: vec![Complex64::new(0.0, 0.0); 2 * hop + 1],
            intermediate: vec![0.0; 4 * hop],
            scratch: vec![Complex64::new(0.0, 0.0); 2 * hop],
            fft,
            filter,
        })
    }

    /// Partitions `ir` at hop `hop` and builds an engine around it.
    pub fn from_impulse_response(ir: &ImpulseResponse, hop: usize) -> Result<Self> {
        let count = ir.len().div_ceil(2 * hop.max(1));
        Self::new(Arc::new(partition_with_count(ir, hop, count)?))
    }

    pub fn partition_count(&self) -> usize {
        self.filter.partition_count()
    }

    pub fn filter(&self) -> &Arc<FilterPartitionSet> {
        &self.filter
    }

    /// Number of spectra held per channel (`2M - 1`).
    pub fn delay_line_depth(&self) -> usize {
        self.lanes[0].delay_line.len()
    }

    pub fn block_index(&self) -> u64 {
        self.block_index
    }

    pub fn op_counts(&self) -> OpCounts {
        self.counts
    }

    /// Stages `filter`; it replaces every partition before the next hop's
    /// spectral multiplication.
    pub fn exchange_filter(&mut self, filter: Arc<FilterPartitionSet>) -> Result<()> {
        check_compatible(&self.filter, &filter)?;
        self.pending = Some(filter);
        Ok(())
    }

    pub fn exchanger(&self) -> FilterExchanger {
        FilterExchanger {
            slot: Arc::clone(&self.exchange_slot),
            reference: Arc::clone(&self.filter),
        }
    }

    /// Processes one hop, writing `L` samples per channel into `output`.
    pub fn process_into(&mut self, input: &[Vec<f64>], output: &mut [Vec<f64>]) -> Result<()> {
        check_frame(input, self.lanes.len(), self.hop)?;
        if output.len() != self.lanes.len() {
            return Err(Error::InvalidInput(format!(
                "output has {} channels, engine has {}",
                output.len(),
                self.lanes.len()
            )));
        }
        if let Ok(mut slot) = self.exchange_slot.try_lock() {
            if let Some(staged) = slot.take() {
                self.pending = Some(staged);
            }
        }
        if let Some(next) = self.pending.take() {
            self.filter = next;
        }

        let hop = self.hop;
        let depth = self.lanes[0].delay_line.len();
        let parity = (self.block_index % 2) as usize;
        let gain = self.filter.normalization_gain();
        for (c, (lane, x)) in self.lanes.iter_mut().zip(input).enumerate() {
            for n in 0..hop {
                self.block[n] = lane.history[n] * self.window[n];
                self.block[hop + n] = x[n] * self.window[hop + n];
            }
            lane.newest = (lane.newest + 1) % depth;
            self.fft
                .forward_into(&self.block, &mut lane.delay_line[lane.newest], &mut self.scratch);
            self.counts.forward_transforms += 1;

            self.spectrum.fill(Complex64::new(0.0, 0.0));
            for (m, part) in self.filter.channel_partitions(c).iter().enumerate() {
                let idx = (lane.newest + depth - 2 * m) % depth;
                mac_in_place(&mut self.spectrum, &lane.delay_line[idx], part.bins());
                self.counts.spectral_macs += 1;
            }

            self.fft
                .inverse_into(&self.spectrum, &mut self.intermediate, &mut self.scratch);
            self.counts.inverse_transforms += 1;

            let (left, right) = self.intermediate.split_at(2 * hop);
            let tail = &mut lane.tails[parity];
            let out = &mut output[c];
            out.resize(hop, 0.0);
            for n in 0..hop {
                out[n] = gain * (left[n] + tail[n] + lane.carry[n]);
                lane.carry[n] = left[hop + n] + tail[hop + n];
            }
            tail.copy_from_slice(right);
            lane.history.copy_from_slice(x);
        }
        self.block_index += 1;
        self.counts.hops += 1;
        Ok(())
    }
}

impl StreamingProcessor for TvolapEngine {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Tvolap
    }

    fn channel_count(&self) -> usize {
        self.lanes.len()
    }

    fn hop(&self) -> usize {
        self.hop
    }

    /// Block size `2L`.
    fn latency(&self) -> usize {
        2 * self.hop
    }

    fn output_delay(&self) -> usize {
        self.hop
    }

    /// `L = N_IR / 2M`.
    fn switching_latency(&self) -> usize {
        self.hop
    }

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![vec![0.0; self.hop]; self.lanes.len()];
        self.process_into(input, &mut out)?;
        Ok(out)
    }

    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()> {
        let set = partition_with_count(ir, self.hop, self.partition_count())?;
        self.exchange_filter(Arc::new(set))
    }

    fn reset(&mut self) {
        for lane in &mut self.lanes {
            lane.clear();
        }
        self.pending = None;
        self.block_index = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::partition;
    use crate::processor::run_stream;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn brute_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len() + h.len() - 1];
        for (i, xv) in x.iter().enumerate() {
            for (j, hv) in h.iter().enumerate() {
                y[i + j] += xv * hv;
            }
        }
        y
    }

    fn engine_for(ir: Vec<f64>, hop: usize) -> TvolapEngine {
        let ir = ImpulseResponse::new(vec![ir], 48000).unwrap();
        TvolapEngine::from_impulse_response(&ir, hop).unwrap()
    }

    #[test]
    fn create_reports_geometry() {
        let e = engine_for(vec![1.0], 256);
        assert_eq!(e.partition_count(), 1);
        assert_eq!(e.latency(), 512);
        assert_eq!(e.switching_latency(), 256);
        let e = engine_for(random(1, 2048), 256);
        assert_eq!(e.partition_count(), 4);
        assert_eq!(e.delay_line_depth(), 7);
    }

    #[test]
    fn zeros_in_zeros_out() {
        let mut e = engine_for(random(2, 512), 64);
        for _ in 0..5 {
            let y = e.process(&[vec![0.0; 64]]).unwrap();
            assert!(y[0].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identity_filter_is_delayed_passthrough() {
        let hop = 32;
        let mut e = engine_for(vec![1.0], hop);
        let x = random(3, 20 * hop);
        let y = run_stream(&mut e, &[x.clone()]).unwrap();
        for n in hop..x.len() {
            assert!((y[0][n] - x[n - hop]).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_brute_force_convolution() {
        for (hop, ir_len) in [(16, 32), (16, 64), (16, 128), (32, 100)] {
            let h = random(ir_len as u64, ir_len);
            let x = random(99, 4 * ir_len + 3 * hop);
            let mut e = engine_for(h.clone(), hop);
            let y = run_stream(&mut e, &[x.clone()]).unwrap();
            let reference = brute_convolve(&x, &h);
            for n in hop..y[0].len() {
                assert!(
                    (y[0][n] - reference[n - hop]).abs() < 1e-9,
                    "hop {hop} ir {ir_len} n {n}"
                );
            }
        }
    }

    #[test]
    fn frame_errors() {
        let mut e = engine_for(vec![1.0], 16);
        assert!(matches!(e.process(&[vec![0.0; 15]]), Err(Error::InvalidSize(_))));
        assert!(matches!(
            e.process(&[vec![0.0; 16], vec![0.0; 16]]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn incompatible_exchange_is_rejected() {
        let mut e = engine_for(random(4, 128), 16);
        let other = ImpulseResponse::new(vec![random(5, 200)], 48000).unwrap();
        assert!(matches!(e.set_filter(&other), Err(Error::IncompatibleFilter(_))));
        let stereo = ImpulseResponse::delta(1.0, 128, 2, 48000).unwrap();
        let set = Arc::new(partition(&stereo, 16).unwrap());
        assert!(matches!(e.exchange_filter(set), Err(Error::IncompatibleFilter(_))));
        // shorter responses are padded up to the running partition count
        let short = ImpulseResponse::new(vec![random(6, 40)], 48000).unwrap();
        assert!(e.set_filter(&short).is_ok());
    }

    #[test]
    fn identical_exchange_is_bit_exact() {
        let h = random(7, 256);
        let x = random(8, 40 * 32);
        let mut a = engine_for(h.clone(), 32);
        let mut b = engine_for(h, 32);
        let same = Arc::clone(a.filter());
        for (i, frame) in x.chunks(32).enumerate() {
            if i == 10 {
                b.exchange_filter(Arc::clone(&same)).unwrap();
            }
            let frame = [frame.to_vec()];
            assert_eq!(a.process(&frame).unwrap(), b.process(&frame).unwrap());
        }
    }

    #[test]
    fn polarity_flip_follows_hann_half() {
        let hop = 256;
        let plus = ImpulseResponse::delta(1.0, 2048, 1, 48000).unwrap();
        let minus = plus.scaled(-1.0);
        let mut e = TvolapEngine::from_impulse_response(&plus, hop).unwrap();
        assert_eq!(e.partition_count(), 4);
        let w = hann_window(hop).unwrap();
        let ones = [vec![1.0; hop]];
        let switch_hop = 10;
        for h in 0..switch_hop + 4 {
            if h == switch_hop {
                e.set_filter(&minus).unwrap();
            }
            let y = e.process(&ones).unwrap();
            for (u, v) in y[0].iter().enumerate() {
                let expect = match h {
                    h if h < 2 => continue,
                    h if h < switch_hop => 1.0,
                    h if h == switch_hop => w[u + hop] / 2.0 - w[u] / 2.0,
                    _ => -1.0,
                };
                assert!((v - expect).abs() < 1e-9, "hop {h} u {u}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn per_hop_work_is_constant_across_exchange() {
        let h = random(9, 512);
        let mut e = engine_for(h.clone(), 64);
        let other = ImpulseResponse::new(vec![random(10, 512)], 48000).unwrap();
        let frame = [random(11, 64)];
        for i in 0..12 {
            if i == 5 {
                e.set_filter(&other).unwrap();
            }
            let before = e.op_counts();
            e.process(&frame).unwrap();
            let d = e.op_counts().since(&before);
            assert_eq!((d.forward_transforms, d.spectral_macs, d.inverse_transforms), (1, 4, 1));
        }
    }

    #[test]
    fn reset_clears_state() {
        let mut e = engine_for(random(12, 256), 32);
        e.process(&[random(13, 32)]).unwrap();
        e.reset();
        let y = e.process(&[vec![0.0; 32]]).unwrap();
        assert!(y[0].iter().all(|&v| v == 0.0));
        assert_eq!(e.block_index(), 1);
    }

    #[test]
    fn exchanger_stages_from_another_thread() {
        let plus = ImpulseResponse::delta(1.0, 64, 1, 48000).unwrap();
        let mut e = TvolapEngine::from_impulse_response(&plus, 32).unwrap();
        let handle = e.exchanger();
        let minus = Arc::new(partition(&plus.scaled(-1.0), 32).unwrap());
        std::thread::spawn(move || handle.stage(minus).unwrap())
            .join()
            .unwrap();
        let ones = [vec![1.0; 32]];
        for _ in 0..4 {
            e.process(&ones).unwrap();
        }
        assert!(e.process(&ones).unwrap()[0].iter().all(|v| (v + 1.0).abs() < 1e-12));
    }

    #[test]
    fn multichannel_lanes_are_independent() {
        let hop = 16;
        let (h0, h1) = (random(14, 64), random(15, 64));
        let ir = ImpulseResponse::new(vec![h0.clone(), h1.clone()], 48000).unwrap();
        let mut e = TvolapEngine::from_impulse_response(&ir, hop).unwrap();
        let x = random(16, 30 * hop);
        let y = run_stream(&mut e, &[x.clone(), x.clone()]).unwrap();
        for (lane, h) in [h0, h1].iter().enumerate() {
            let r = brute_convolve(&x, h);
            for n in hop..y[lane].len() {
                assert!((y[lane][n] - r[n - hop]).abs() < 1e-9);
            }
        }
    }
}
