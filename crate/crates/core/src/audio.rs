//! Planar multichannel sample containers.

use crate::error::{Error, Result};

/// Multichannel 64-bit float signal with a sample rate. Channels are planar.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidInput("buffer needs at least one channel".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidInput("channels have unequal lengths".into()));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn silence(channels: usize, len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![vec![0.0; len]; channels.max(1)], sample_rate)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Copies channel 0 into `count` identical lanes.
    pub fn fan_out(&self, count: usize) -> Result<Self> {
        if self.channels.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "fan-out needs a mono source, got {} channels",
                self.channels.len()
            )));
        }
        Self::new(vec![self.channels[0].clone(); count], self.sample_rate)
    }

    /// Appends `n` zeros to every channel.
    pub fn pad_zeros(&mut self, n: usize) {
        for c in &mut self.channels {
            c.resize(c.len() + n, 0.0);
        }
    }
}

/// Time-domain impulse response with one or more channels of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl ImpulseResponse {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidInput("impulse response has no channels".into()));
        }
        let len = channels[0].len();
        if len == 0 {
            return Err(Error::InvalidInput("impulse response is empty".into()));
        }
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidInput(
                "impulse response channels have unequal lengths".into(),
            ));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    /// Unit impulse scaled by `gain`, zero-padded to `len` samples, on `channels` lanes.
    pub fn delta(gain: f64, len: usize, channels: usize, sample_rate: u32) -> Result<Self> {
        let mut lane = vec![0.0; len.max(1)];
        lane[0] = gain;
        Self::new(vec![lane; channels.max(1)], sample_rate)
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// Zero-pads (never truncates) every channel to at least `len` samples.
    pub fn padded_to(&self, len: usize) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mut c = c.clone();
                if c.len() < len {
                    c.resize(len, 0.0);
                }
                c
            })
            .collect();
        Self {
            channels,
            sample_rate: self.sample_rate,
        }
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|v| v * gain).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

impl TryFrom<AudioBuffer> for ImpulseResponse {
    type Error = Error;

    fn try_from(buf: AudioBuffer) -> Result<Self> {
        let sample_rate = buf.sample_rate;
        Self::new(buf.channels, sample_rate)
    }
}

impl From<ImpulseResponse> for AudioBuffer {
    fn from(ir: ImpulseResponse) -> Self {
        Self {
            channels: ir.channels,
            sample_rate: ir.sample_rate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(AudioBuffer::new(vec![vec![0.0; 3], vec![0.0; 2]], 48000).is_err());
        assert!(AudioBuffer::new(vec![], 48000).is_err());
        assert!(AudioBuffer::new(vec![vec![0.0]], 0).is_err());
        assert!(ImpulseResponse::new(vec![vec![]], 48000).is_err());
    }

    #[test]
    fn fan_out_duplicates() {
        let b = AudioBuffer::mono(vec![1.0, 2.0], 48000).unwrap().fan_out(3).unwrap();
        assert_eq!(b.channel_count(), 3);
        assert_eq!(b.channel(2), &[1.0, 2.0]);
    }

    #[test]
    fn padding_keeps_longer_ir() {
        let ir = ImpulseResponse::delta(-1.0, 4, 2, 48000).unwrap();
        assert_eq!(ir.padded_to(8).len(), 8);
        assert_eq!(ir.padded_to(2).len(), 4);
        assert_eq!(ir.channel(1)[0], -1.0);
    }
}
