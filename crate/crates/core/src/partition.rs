//! Analysis window and frequency-domain impulse response partitions.

use crate::audio::ImpulseResponse;
use crate::error::{Error, Result};
use crate::spectral::{RealFft, SpectrumFrame};

/// Output gain that undoes the sum of two overlapping periodic Hann windows.
pub const HANN_OVERLAP_GAIN: f64 = 0.5;

/// Periodic Hann window `1 - cos(2 pi n / 2L)` of length `2L`, peaking at 2.
pub fn hann_window(hop: usize) -> Result<Vec<f64>> {
    if hop < 2 {
        return Err(Error::InvalidSize(format!("hop size {hop} must be >= 2")));
    }
    Ok(periodic_hann(2 * hop))
}

/// Periodic Hann of arbitrary length with peak value 2 (so hop-`len/2` shifts sum to 2).
pub(crate) fn periodic_hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 1.0 - (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
        .collect()
}

/// Per-channel transfer-function partitions of one impulse response.
///
/// Partition `m` of channel `c` is the spectrum of IR samples `[2mL, 2mL + 2L)`
/// zero-padded to `4L`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPartitionSet {
    hop: usize,
    partitions: Vec<Vec<SpectrumFrame>>,
    source_length: usize,
    normalization_gain: f64,
    sample_rate: u32,
}

impl FilterPartitionSet {
    pub fn channel_count(&self) -> usize {
        self.partitions.len()
    }

    /// Hop size `L`.
    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Number of partitions `M`.
    pub fn partition_count(&self) -> usize {
        self.partitions[0].len()
    }

    pub fn transform_length(&self) -> usize {
        4 * self.hop
    }

    /// Length of the impulse response before padding.
    pub fn source_length(&self) -> usize {
        self.source_length
    }

    pub fn normalization_gain(&self) -> f64 {
        self.normalization_gain
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn partition(&self, channel: usize, m: usize) -> &SpectrumFrame {
        &self.partitions[channel][m]
    }

    pub fn channel_partitions(&self, channel: usize) -> &[SpectrumFrame] {
        &self.partitions[channel]
    }

    /// True when `other` can replace `self` inside a running engine.
    pub fn is_compatible_with(&self, other: &FilterPartitionSet) -> bool {
        self.hop == other.hop
            && self.partition_count() == other.partition_count()
            && self.channel_count() == other.channel_count()
    }
}

/// Splits `ir` into `ceil(N_IR / 2L)` partitions and transforms each one.
pub fn partition(ir: &ImpulseResponse, hop: usize) -> Result<FilterPartitionSet> {
    let count = ir.len().div_ceil(2 * hop.max(1));
    partition_with_count(ir, hop, count)
}

/// Like [`partition`], but pads with all-zero partitions up to `count`.
pub fn partition_with_count(
    ir: &ImpulseResponse,
    hop: usize,
    count: usize,
) -> Result<FilterPartitionSet> {
    let width = 2 * hop;
    if hop < 2 || !(4 * hop).is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "hop size {hop} gives transform length {}, not a power of two >= 8",
            4 * hop
        )));
    }
    let needed = ir.len().div_ceil(width);
    if count < needed {
        return Err(Error::IncompatibleFilter(format!(
            "impulse response of {} samples needs {needed} partitions, {count} requested",
            ir.len()
        )));
    }
    let fft = RealFft::new(4 * hop)?;
    let mut block = vec![0.0; 4 * hop];
    let mut partitions = Vec::with_capacity(ir.channel_count());
    for samples in ir.channels() {
        let mut lane = Vec::with_capacity(count);
        for m in 0..count {
            block.fill(0.0);
            let start = (m * width).min(samples.len());
            let end = ((m + 1) * width).min(samples.len());
            block[..end - start].copy_from_slice(&samples[start..end]);
            lane.push(fft.forward(&block)?);
        }
        partitions.push(lane);
    }
    Ok(FilterPartitionSet {
        hop,
        partitions,
        source_length: ir.len(),
        normalization_gain: HANN_OVERLAP_GAIN,
        sample_rate: ir.sample_rate(),
    })
}

/// Inverts [`partition`]: the IR zero-padded to `M * 2L` samples.
pub fn reassemble(set: &FilterPartitionSet) -> Result<ImpulseResponse> {
    let fft = RealFft::new(set.transform_length())?;
    let width = 2 * set.hop;
    let mut channels = Vec::with_capacity(set.channel_count());
    for lane in &set.partitions {
        let mut samples = Vec::with_capacity(lane.len() * width);
        for frame in lane {
            let block = fft.inverse(frame)?;
            samples.extend_from_slice(&block[..width]);
        }
        channels.push(samples);
    }
    ImpulseResponse::new(channels, set.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_ir(seed: u64, len: usize, channels: usize) -> ImpulseResponse {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..channels)
            .map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        ImpulseResponse::new(data, 48000).unwrap()
    }

    #[test]
    fn hann_values() {
        let w = hann_window(256).unwrap();
        assert_eq!(w.len(), 512);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[256], 2.0);
        for n in 0..256 {
            assert!((w[n] + w[n + 256] - 2.0).abs() < 1e-15);
        }
        assert!(matches!(hann_window(1), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn hann_cola_over_many_shifts() {
        let hop = 64;
        let w = hann_window(hop).unwrap();
        let mut sum = vec![0.0; 10 * hop];
        for shift in (0..8 * hop).step_by(hop) {
            for (i, v) in w.iter().enumerate() {
                sum[shift + i] += v;
            }
        }
        for v in &sum[2 * hop..8 * hop] {
            assert!((v - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partition(&random_ir(1, 2048, 1), 256).unwrap().partition_count(), 4);
        let four_channel = partition(&random_ir(2, 3 * 128, 4), 64).unwrap();
        assert_eq!(four_channel.partition_count(), 3);
        assert_eq!(four_channel.channel_count(), 4);
        assert_eq!(partition(&random_ir(3, 1000, 1), 256).unwrap().partition_count(), 2);
    }

    #[test]
    fn unit_impulse_partition_is_flat() {
        let ir = ImpulseResponse::delta(1.0, 1, 1, 48000).unwrap();
        let set = partition(&ir, 256).unwrap();
        assert_eq!(set.partition_count(), 1);
        assert_eq!(set.transform_length(), 1024);
        for b in set.partition(0, 0).bins() {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        let back = reassemble(&set).unwrap();
        assert_eq!(back.len(), 512);
        assert!((back.channel(0)[0] - 1.0).abs() < 1e-12);
        assert!(back.channel(0)[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_hop() {
        let ir = random_ir(4, 16, 1);
        assert!(matches!(partition(&ir, 3), Err(Error::InvalidSize(_))));
        assert!(matches!(partition(&ir, 1), Err(Error::InvalidSize(_))));
        assert!(matches!(
            partition_with_count(&ir, 2, 1),
            Err(Error::IncompatibleFilter(_))
        ));
    }

    #[test]
    fn reassemble_roundtrip() {
        let ir = random_ir(5, 2048, 2);
        let back = reassemble(&partition(&ir, 256).unwrap()).unwrap();
        for c in 0..2 {
            for (a, b) in back.channel(c).iter().zip(ir.channel(c)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reassemble_pads_tail() {
        let ir = random_ir(6, 1000, 1);
        let back = reassemble(&partition(&ir, 256).unwrap()).unwrap();
        assert_eq!(back.len(), 1024);
        assert!(back.channel(0)[1000..].iter().all(|v| v.abs() < 1e-12));
        for (a, b) in back.channel(0).iter().zip(ir.channel(0)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partitions_are_linear() {
        let (a, b) = (0.7, -1.3);
        let ir1 = random_ir(7, 700, 1);
        let ir2 = random_ir(8, 700, 1);
        let mix: Vec<f64> = ir1
            .channel(0)
            .iter()
            .zip(ir2.channel(0))
            .map(|(x, y)| a * x + b * y)
            .collect();
        let mix = ImpulseResponse::new(vec![mix], 48000).unwrap();
        let (p1, p2, pm) = (
            partition(&ir1, 128).unwrap(),
            partition(&ir2, 128).unwrap(),
            partition(&mix, 128).unwrap(),
        );
        for m in 0..pm.partition_count() {
            for k in 0..=256 {
                let expect = p1.partition(0, m).bins()[k] * a + p2.partition(0, m).bins()[k] * b;
                assert!((pm.partition(0, m).bins()[k] - expect).norm() < 1e-12);
            }
        }
    }
}
