//! Deterministic test signals and synthetic binaural impulse responses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::{AudioBuffer, ImpulseResponse};
use crate::error::{Error, Result};

pub fn gen_ones(n: usize, sample_rate: u32) -> Result<AudioBuffer> {
    check_len(n)?;
    AudioBuffer::mono(vec![1.0; n], sample_rate)
}

/// `sin(2 pi f n / f_s)`, starting at phase zero.
pub fn gen_sine(freq: f64, n: usize, sample_rate: u32) -> Result<AudioBuffer> {
    check_len(n)?;
    if !(freq > 0.0) || freq >= sample_rate as f64 / 2.0 {
        return Err(Error::InvalidFrequency { freq, sample_rate });
    }
    let step = 2.0 * std::f64::consts::PI * freq / sample_rate as f64;
    AudioBuffer::mono((0..n).map(|i| (step * i as f64).sin()).collect(), sample_rate)
}

/// Pole/zero pairs of the pink-noise shaping cascade. Each section is
/// `(1 - z q^-1) / (1 - p q^-1)`.
///
/// Three first-order sections spaced about 1.5 decades apart give a
/// -3 dB/octave tilt; over 40 Hz - 10 kHz at 48 kHz the fitted slope is
/// within 0.1 dB/octave of -3 and the ripple around the fit stays below 0.5 dB.
pub const PINK_SECTIONS: [(f64, f64); 3] = [
    (0.995_727_54, 0.984_436_04),
    (0.947_906_49, 0.833_923_34),
    (0.535_675_05, 0.075_683_59),
];

/// Output scale applied after the cascade; the result has an RMS near 0.085.
pub const PINK_GAIN: f64 = 0.085;

/// Pink noise: seeded uniform white noise in [-1, 1) shaped by [`PINK_SECTIONS`].
pub fn gen_pink(seed: u64, n: usize, sample_rate: u32) -> Result<AudioBuffer> {
    check_len(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = [(0.0f64, 0.0f64); 3];
    let samples = (0..n)
        .map(|_| {
            let mut v: f64 = rng.random_range(-1.0..1.0);
            for ((pole, zero), (x1, y1)) in PINK_SECTIONS.iter().zip(state.iter_mut()) {
                let y = v - zero * *x1 + pole * *y1;
                *x1 = v;
                *y1 = y;
                v = y;
            }
            v * PINK_GAIN
        })
        .collect();
    AudioBuffer::mono(samples, sample_rate)
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("signal length must be at least one sample".into()));
    }
    Ok(())
}

/// Frequency whose half wavelength equals the surrogate head's full
/// interaural delay, so a lateral source flips the interaural phase there.
pub const PHASE_FLIP_FREQUENCY: f64 = 750.0;

/// Parameters of a synthetic two-ear impulse response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinauralSurrogate {
    /// Source direction in degrees; positive is to the right.
    pub azimuth_deg: f64,
    pub length: usize,
    pub sample_rate: u32,
    /// Decay time of the diffuse tail (-60 dB). Zero disables the tail.
    pub rt60_s: f64,
    /// Tail start level relative to the direct sound.
    pub tail_level: f64,
    pub seed: u64,
}

impl BinauralSurrogate {
    /// Short anechoic-style response.
    pub fn hrir(azimuth_deg: f64, length: usize, sample_rate: u32, seed: u64) -> Self {
        Self {
            azimuth_deg,
            length,
            sample_rate,
            rt60_s: 0.004,
            tail_level: 0.2,
            seed,
        }
    }

    /// Room-like response with a long exponential tail.
    pub fn brir(azimuth_deg: f64, length: usize, sample_rate: u32, seed: u64) -> Self {
        Self {
            azimuth_deg,
            length,
            sample_rate,
            rt60_s: 0.65,
            tail_level: 0.05,
            seed,
        }
    }

    /// Channel 0 is the left ear, channel 1 the right.
    ///
    /// Each ear gets a direct impulse at a base delay plus the interaural
    /// delay `round(f_s / (2 * 750 Hz) * |sin az|)` on the far side, a far-ear
    /// attenuation of `6 dB * |sin az|`, and an exponentially decaying noise
    /// tail that is independent per ear.
    pub fn build(&self) -> Result<ImpulseResponse> {
        let base_delay = 8usize;
        let max_itd = self.sample_rate as f64 / (2.0 * PHASE_FLIP_FREQUENCY);
        let lateral = self.azimuth_deg.to_radians().sin();
        let itd = (max_itd * lateral.abs()).round() as usize;
        if self.length <= base_delay + itd {
            return Err(Error::InvalidInput(format!(
                "surrogate length {} is shorter than its {} sample direct-path delay",
                self.length,
                base_delay + itd + 1
            )));
        }
        let far_gain = 10f64.powf(-6.0 * lateral.abs() / 20.0);
        let (left, right) = if lateral >= 0.0 {
            ((base_delay + itd, far_gain), (base_delay, 1.0))
        } else {
            ((base_delay, 1.0), (base_delay + itd, far_gain))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let decay = if self.rt60_s > 0.0 {
            (-6.9078 / (self.rt60_s * self.sample_rate as f64)).exp()
        } else {
            0.0
        };
        let channels = [left, right]
            .iter()
            .map(|&(delay, gain)| {
                let mut h = vec![0.0; self.length];
                h[delay] = gain;
                let mut env = self.tail_level * gain;
                for v in h.iter_mut().skip(delay + 1) {
                    env *= decay;
                    *v += env * rng.random_range(-1.0..1.0);
                }
                h
            })
            .collect();
        ImpulseResponse::new(channels, self.sample_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RealFft;

    #[test]
    fn ones() {
        assert_eq!(gen_ones(4, 48000).unwrap().channel(0), &[1.0; 4]);
        assert!(gen_ones(0, 48000).is_err());
    }

    #[test]
    fn sine_has_750_upcrossings_per_second() {
        let s = gen_sine(750.0, 48000, 48000).unwrap();
        let x = s.channel(0);
        // one second holds whole periods, so count cyclically
        let crossings = (0..x.len())
            .filter(|&n| {
                let prev = x[(n + x.len() - 1) % x.len()];
                prev < 0.0 && x[n] >= 0.0
            })
            .count();
        assert_eq!(crossings, 750);
    }

    #[test]
    fn sine_rejects_aliasing() {
        assert!(matches!(
            gen_sine(24000.0, 10, 48000),
            Err(Error::InvalidFrequency { .. })
        ));
        assert!(gen_sine(-5.0, 10, 48000).is_err());
    }

    #[test]
    fn pink_is_deterministic() {
        assert_eq!(gen_pink(1, 1000, 48000).unwrap(), gen_pink(1, 1000, 48000).unwrap());
        assert_ne!(gen_pink(1, 1000, 48000).unwrap(), gen_pink(2, 1000, 48000).unwrap());
    }

    #[test]
    fn pink_slope_is_minus_three_db_per_octave() {
        let n = 1 << 16;
        let fs = 48000;
        let fft = RealFft::new(n).unwrap();
        let mut psd = vec![0.0; n / 2 + 1];
        let realizations = 64;
        for seed in 0..realizations {
            let x = gen_pink(seed, n, fs).unwrap();
            let spec = fft.forward(x.channel(0)).unwrap();
            for (p, b) in psd.iter_mut().zip(spec.bins()) {
                *p += b.norm_sqr();
            }
        }
        let bin_hz = fs as f64 / n as f64;
        // octave bands 40-80, 80-160, ..., 5120-10240 Hz
        let points: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let lo = 40.0 * 2f64.powi(k);
                let hi = 2.0 * lo;
                let bins: Vec<f64> = (0..psd.len())
                    .filter(|&i| {
                        let f = i as f64 * bin_hz;
                        f >= lo && f < hi
                    })
                    .map(|i| psd[i])
                    .collect();
                let density = bins.iter().sum::<f64>() / bins.len() as f64;
                ((lo * hi).sqrt().log2(), 10.0 * density.log10())
            })
            .collect();
        let mean_x = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
        let mean_y = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
        let slope = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum::<f64>()
            / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
        assert!((slope + 3.0).abs() <= 0.75, "slope {slope} dB/octave");
    }

    #[test]
    fn surrogate_geometry() {
        let front = BinauralSurrogate::hrir(0.0, 256, 48000, 1).build().unwrap();
        assert_eq!(front.channel(0)[8], 1.0);
        assert_eq!(front.channel(1)[8], 1.0);
        let side = BinauralSurrogate::hrir(90.0, 256, 48000, 1).build().unwrap();
        assert_eq!(side.channel(1)[8], 1.0);
        assert!((side.channel(0)[40] - 10f64.powf(-0.3)).abs() < 1e-12);
        assert!(side.channel(0)[..40].iter().all(|&v| v == 0.0));
        assert!(BinauralSurrogate::hrir(90.0, 30, 48000, 1).build().is_err());
    }
}
