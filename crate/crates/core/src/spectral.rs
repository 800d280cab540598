//! Radix-2 real-input Fourier transforms and spectral multiply-accumulate.
//!
//! A length-`N` real transform is computed as a length-`N/2` complex
//! decimation-in-time FFT over the even/odd interleaved samples, followed by
//! a split step that separates the two half-length spectra. Only the
//! `N/2 + 1` non-redundant bins are kept.
//!
//! Sign convention: forward is `X(k) = sum x(n) e^{-j 2 pi n k / N}`
//! (unscaled); the inverse carries the `1/N` factor.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest transform length accepted by the kernel.
pub const MIN_TRANSFORM_LENGTH: usize = 8;

/// Non-redundant half spectrum of a real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFrame {
    bins: Vec<Complex64>,
    transform_length: usize,
}

impl SpectrumFrame {
    /// All-zero spectrum for a transform of `transform_length` samples.
    pub fn zeros(transform_length: usize) -> Result<Self> {
        check_length(transform_length)?;
        Ok(Self {
            bins: vec![Complex64::new(0.0, 0.0); transform_length / 2 + 1],
            transform_length,
        })
    }

    /// Wraps externally computed bins, enforcing the half-spectrum invariants.
    pub fn from_bins(bins: Vec<Complex64>, transform_length: usize) -> Result<Self> {
        check_length(transform_length)?;
        if bins.len() != transform_length / 2 + 1 {
            return Err(Error::InvalidSize(format!(
                "{} bins for transform length {} (expected {})",
                bins.len(),
                transform_length,
                transform_length / 2 + 1
            )));
        }
        let frame = Self {
            bins,
            transform_length,
        };
        frame.check_real_edges()?;
        Ok(frame)
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn transform_length(&self) -> usize {
        self.transform_length
    }

    pub fn into_bins(self) -> Vec<Complex64> {
        self.bins
    }

    fn check_real_edges(&self) -> Result<()> {
        let dc = self.bins[0];
        let nyquist = self.bins[self.bins.len() - 1];
        if dc.im != 0.0 || nyquist.im != 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "DC/Nyquist bins must be real, got im {} / {}",
                dc.im, nyquist.im
            )));
        }
        Ok(())
    }
}

fn check_length(n: usize) -> Result<()> {
    if n < MIN_TRANSFORM_LENGTH || !n.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "transform length {n} must be a power of two >= {MIN_TRANSFORM_LENGTH}"
        )));
    }
    Ok(())
}

/// Precomputed tables for a real transform of one fixed length.
///
/// Immutable after construction, so one instance can be shared between threads.
#[derive(Debug, Clone)]
pub struct RealFft {
    len: usize,
    // exp(-j 2 pi k / (len/2)), k < len/4: twiddles of the half-length complex FFT
    half_twiddles: Vec<Complex64>,
    // exp(-j 2 pi k / len), k <= len/2: split-step twiddles
    split_twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl RealFft {
    pub fn new(len: usize) -> Result<Self> {
        check_length(len)?;
        let half = len / 2;
        let half_twiddles = (0..half / 2).map(|k| unit_root(k, half)).collect();
        let split_twiddles = (0..=half).map(|k| unit_root(k, len)).collect();
        let bits = half.trailing_zeros();
        let bit_reverse = (0..half)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        Ok(Self {
            len,
            half_twiddles,
            split_twiddles,
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bin_count(&self) -> usize {
        self.len / 2 + 1
    }

    pub fn forward(&self, block: &[f64]) -> Result<SpectrumFrame> {
        if block.len() != self.len {
            return Err(Error::InvalidSize(format!(
                "block of {} samples for a length-{} transform",
                block.len(),
                self.len
            )));
        }
        let mut bins = vec![Complex64::new(0.0, 0.0); self.bin_count()];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.len / 2];
        self.forward_into(block, &mut bins, &mut scratch);
        Ok(SpectrumFrame {
            bins,
            transform_length: self.len,
        })
    }

    pub fn inverse(&self, spectrum: &SpectrumFrame) -> Result<Vec<f64>> {
        if spectrum.transform_length != self.len {
            return Err(Error::InvalidSize(format!(
                "spectrum of transform length {} for a length-{} transform",
                spectrum.transform_length, self.len
            )));
        }
        spectrum.check_real_edges()?;
        let mut out = vec![0.0; self.len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.len / 2];
        self.inverse_into(&spectrum.bins, &mut out, &mut scratch);
        Ok(out)
    }

    /// Forward transform into caller-owned buffers. `bins` needs `len/2 + 1`
    /// entries and `scratch` needs `len/2`.
    pub(crate) fn forward_into(
        &self,
        block: &[f64],
        bins: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let half = self.len / 2;
        debug_assert_eq!(block.len(), self.len);
        debug_assert_eq!(bins.len(), half + 1);
        for (i, &r) in self.bit_reverse.iter().enumerate() {
            scratch[r] = Complex64::new(block[2 * i], block[2 * i + 1]);
        }
        self.butterflies(scratch);

        let z0 = scratch[0];
        bins[0] = Complex64::new(z0.re + z0.im, 0.0);
        bins[half] = Complex64::new(z0.re - z0.im, 0.0);
        for k in 1..half {
            let a = scratch[k];
            let b = scratch[half - k].conj();
            let even = (a + b) * 0.5;
            let odd = (a - b) * Complex64::new(0.0, -0.5);
            bins[k] = even + self.split_twiddles[k] * odd;
        }
    }

    /// Inverse transform (with `1/len` scaling) into caller-owned buffers.
    /// The imaginary parts of the DC and Nyquist bins are ignored.
    pub(crate) fn inverse_into(&self, bins: &[Complex64], out: &mut [f64], scratch: &mut [Complex64]) {
        let half = self.len / 2;
        debug_assert_eq!(bins.len(), half + 1);
        debug_assert_eq!(out.len(), self.len);
        for k in 0..half {
            let a = bins[k];
            let b = bins[half - k].conj();
            let even = (a + b) * 0.5;
            let odd = (a - b) * 0.5 * self.split_twiddles[k].conj();
            // inverse FFT via conjugation: z = conj(FFT(conj(Z))) / half
            let z = even + Complex64::new(-odd.im, odd.re);
            scratch[self.bit_reverse[k]] = z.conj();
        }
        self.butterflies(scratch);
        let scale = 1.0 / half as f64;
        for (i, z) in scratch.iter().enumerate() {
            out[2 * i] = z.re * scale;
            out[2 * i + 1] = -z.im * scale;
        }
    }

    // In-place iterative radix-2 DIT butterflies on bit-reversed input.
    fn butterflies(&self, data: &mut [Complex64]) {
        let n = data.len();
        let mut size = 2;
        while size <= n {
            let halfsize = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..halfsize {
                    let w = self.half_twiddles[j * stride];
                    let t = data[start + j + halfsize] * w;
                    let u = data[start + j];
                    data[start + j] = u + t;
                    data[start + j + halfsize] = u - t;
                }
            }
            size *= 2;
        }
    }
}

fn unit_root(k: usize, n: usize) -> Complex64 {
    let phase = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
    Complex64::new(phase.cos(), phase.sin())
}

/// Forward real transform of a power-of-two block (length >= 8).
pub fn forward_real(block: &[f64]) -> Result<SpectrumFrame> {
    RealFft::new(block.len())?.forward(block)
}

/// Inverse real transform including the `1/N` scaling.
pub fn inverse_real(spectrum: &SpectrumFrame) -> Result<Vec<f64>> {
    RealFft::new(spectrum.transform_length)?.inverse(spectrum)
}

/// Returns `acc + a * b`, bin by bin.
pub fn mac(acc: &SpectrumFrame, a: &SpectrumFrame, b: &SpectrumFrame) -> Result<SpectrumFrame> {
    if acc.transform_length != a.transform_length || a.transform_length != b.transform_length {
        return Err(Error::InvalidSize(format!(
            "mismatched transform lengths {} / {} / {}",
            acc.transform_length, a.transform_length, b.transform_length
        )));
    }
    let mut out = acc.clone();
    mac_in_place(&mut out.bins, &a.bins, &b.bins);
    Ok(out)
}

#[inline]
pub(crate) fn mac_in_place(acc: &mut [Complex64], a: &[Complex64], b: &[Complex64]) {
    for ((y, &x), &h) in acc.iter_mut().zip(a).zip(b) {
        *y += x * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (i, &v)| {
                    let phase = -2.0 * std::f64::consts::PI * ((i * k) % n) as f64 / n as f64;
                    acc + Complex64::new(phase.cos(), phase.sin()) * v
                })
            })
            .collect()
    }

    fn random_block(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = forward_real(&x).unwrap();
        assert_eq!(s.bins().len(), 5);
        for b in s.bins() {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dc_only_input() {
        let s = forward_real(&[1.0; 8]).unwrap();
        assert!((s.bins()[0].re - 8.0).abs() < 1e-15);
        for b in &s.bins()[1..] {
            assert!(b.norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(forward_real(&[1.0; 4]), Err(Error::InvalidSize(_))));
        assert!(matches!(forward_real(&[1.0; 12]), Err(Error::InvalidSize(_))));
        assert!(matches!(forward_real(&[]), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_block(&mut rng, 64);
        let fast = forward_real(&x).unwrap();
        for (a, b) in fast.bins().iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn roundtrip_impulse_and_zeros() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let back = inverse_real(&forward_real(&x).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-15);
        }
        let zero = inverse_real(&SpectrumFrame::zeros(16).unwrap()).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn roundtrip_random_256() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_block(&mut rng, 256);
        let back = inverse_real(&forward_real(&x).unwrap()).unwrap();
        let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn inverse_rejects_complex_edges() {
        let mut bins = vec![Complex64::new(0.0, 0.0); 5];
        bins[4] = Complex64::new(1.0, 0.5);
        assert!(matches!(
            SpectrumFrame::from_bins(bins.clone(), 8),
            Err(Error::InvalidSpectrum(_))
        ));
        let frame = SpectrumFrame { bins, transform_length: 8 };
        assert!(matches!(inverse_real(&frame), Err(Error::InvalidSpectrum(_))));
    }

    #[test]
    fn mac_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = forward_real(&random_block(&mut rng, 32)).unwrap();
        let zero = SpectrumFrame::zeros(32).unwrap();
        let ones = SpectrumFrame::from_bins(vec![Complex64::new(1.0, 0.0); 17], 32).unwrap();
        assert_eq!(mac(&zero, &ones, &s).unwrap(), s);
        let other = forward_real(&random_block(&mut rng, 32)).unwrap();
        assert_eq!(mac(&s, &zero, &other).unwrap(), s);
    }

    #[test]
    fn mac_matches_scalar_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let [acc, a, b] = [0, 1, 2].map(|_| forward_real(&random_block(&mut rng, 64)).unwrap());
        let out = mac(&acc, &a, &b).unwrap();
        for k in 0..33 {
            let (p, q, r) = (acc.bins()[k], a.bins()[k], b.bins()[k]);
            let re = p.re + (q.re * r.re - q.im * r.im);
            let im = p.im + (q.re * r.im + q.im * r.re);
            assert_eq!(out.bins()[k], Complex64::new(re, im));
        }
    }

    #[test]
    fn mac_rejects_mismatch() {
        let a = SpectrumFrame::zeros(16).unwrap();
        let b = SpectrumFrame::zeros(32).unwrap();
        assert!(matches!(mac(&a, &a, &b), Err(Error::InvalidSize(_))));
    }

    proptest! {
        #[test]
        fn roundtrip_all_sizes(exp in 3u32..=13, seed in any::<u64>()) {
            let n = 1usize << exp;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_block(&mut rng, n);
            let back = inverse_real(&forward_real(&x).unwrap()).unwrap();
            let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-12, "n={} err={}", n, err);
        }

        #[test]
        fn forward_is_linear(exp in 3u32..=10, seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let n = 1usize << exp;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_block(&mut rng, n);
            let y = random_block(&mut rng, n);
            let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
            let (fx, fy, fm) = (forward_real(&x).unwrap(), forward_real(&y).unwrap(), forward_real(&mix).unwrap());
            for k in 0..=n / 2 {
                let expect = fx.bins()[k] * alpha + fy.bins()[k] * beta;
                prop_assert!((fm.bins()[k] - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn convolution_theorem(exp in 3u32..=7, seed in any::<u64>()) {
            let n = 1usize << exp;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_block(&mut rng, n);
            let h = random_block(&mut rng, n);
            let zero = SpectrumFrame::zeros(n).unwrap();
            let y = inverse_real(&mac(&zero, &forward_real(&x).unwrap(), &forward_real(&h).unwrap()).unwrap()).unwrap();
            for i in 0..n {
                let direct: f64 = (0..n).map(|j| x[j] * h[(i + n - j) % n]).sum();
                prop_assert!((y[i] - direct).abs() < 1e-10);
            }
        }
    }
}
