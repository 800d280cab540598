//! Common interface of every streaming convolution engine.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::ImpulseResponse;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "TDC")]
    Tdc,
    #[serde(rename = "CF-TDC")]
    CfTdc,
    #[serde(rename = "OLA")]
    Ola,
    #[serde(rename = "OLS")]
    Ols,
    #[serde(rename = "WOLA")]
    Wola,
    #[serde(rename = "TVOLAP")]
    Tvolap,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Tdc,
        Algorithm::CfTdc,
        Algorithm::Ola,
        Algorithm::Ols,
        Algorithm::Wola,
        Algorithm::Tvolap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Tdc => "TDC",
            Algorithm::CfTdc => "CF-TDC",
            Algorithm::Ola => "OLA",
            Algorithm::Ols => "OLS",
            Algorithm::Wola => "WOLA",
            Algorithm::Tvolap => "TVOLAP",
        }
    }

    /// Lowercase identifier used for file names and CLI flags.
    pub fn slug(self) -> &'static str {
        match self {
            Algorithm::Tdc => "tdc",
            Algorithm::CfTdc => "cf-tdc",
            Algorithm::Ola => "ola",
            Algorithm::Ols => "ols",
            Algorithm::Wola => "wola",
            Algorithm::Tvolap => "tvolap",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.slug() == key || (key == "cftdc" && *a == Algorithm::CfTdc))
            .ok_or_else(|| Error::InvalidConfiguration(format!("unknown algorithm '{s}'")))
    }
}

/// A block convolver fed with exactly [`hop`](Self::hop) samples per channel per call.
///
/// Two delays are reported. [`latency`](Self::latency) is the audio latency in
/// the usual table sense (input buffering plus algorithmic delay).
/// [`output_delay`](Self::output_delay) is the part visible in the streamed
/// output: sample `n` of the concatenated output corresponds to sample
/// `n - output_delay()` of the direct convolution.
pub trait StreamingProcessor: Send {
    fn algorithm(&self) -> Algorithm;

    fn channel_count(&self) -> usize;

    fn hop(&self) -> usize;

    fn latency(&self) -> usize;

    fn output_delay(&self) -> usize;

    /// Samples from a filter change until the output fully reflects it.
    fn switching_latency(&self) -> usize;

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;

    /// Replaces the filter; takes effect at the next block boundary.
    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()>;

    fn reset(&mut self);
}

impl<P: StreamingProcessor + ?Sized> StreamingProcessor for Box<P> {
    fn algorithm(&self) -> Algorithm {
        (**self).algorithm()
    }

    fn channel_count(&self) -> usize {
        (**self).channel_count()
    }

    fn hop(&self) -> usize {
        (**self).hop()
    }

    fn latency(&self) -> usize {
        (**self).latency()
    }

    fn output_delay(&self) -> usize {
        (**self).output_delay()
    }

    fn switching_latency(&self) -> usize {
        (**self).switching_latency()
    }

    fn process(&mut self, input: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        (**self).process(input)
    }

    fn set_filter(&mut self, ir: &ImpulseResponse) -> Result<()> {
        (**self).set_filter(ir)
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}

pub(crate) fn check_frame(input: &[Vec<f64>], channels: usize, hop: usize) -> Result<()> {
    if input.len() != channels {
        return Err(Error::InvalidInput(format!(
            "expected {channels} channels, got {}",
            input.len()
        )));
    }
    if let Some(bad) = input.iter().find(|c| c.len() != hop) {
        return Err(Error::InvalidSize(format!(
            "frame of {} samples, hop size is {hop}",
            bad.len()
        )));
    }
    Ok(())
}

/// Runs `input` through `proc` hop by hop, zero-padding the final frame.
/// Returns the concatenated output (a whole number of hops).
pub fn run_stream<P: StreamingProcessor + ?Sized>(
    proc: &mut P,
    input: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let hop = proc.hop();
    let channels = proc.channel_count();
    if input.len() != channels {
        return Err(Error::InvalidInput(format!(
            "expected {channels} channels, got {}",
            input.len()
        )));
    }
    let len = input.first().map_or(0, Vec::len);
    let hops = len.div_ceil(hop);
    let mut out = vec![Vec::with_capacity(hops * hop); channels];
    let mut frame = vec![vec![0.0; hop]; channels];
    for h in 0..hops {
        let start = h * hop;
        let end = (start + hop).min(len);
        for (dst, src) in frame.iter_mut().zip(input) {
            dst.fill(0.0);
            dst[..end - start].copy_from_slice(&src[start..end]);
        }
        for (acc, y) in out.iter_mut().zip(proc.process(&frame)?) {
            acc.extend_from_slice(&y);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        assert_eq!("TVOLAP".parse::<Algorithm>().unwrap(), Algorithm::Tvolap);
        assert_eq!("cf_tdc".parse::<Algorithm>().unwrap(), Algorithm::CfTdc);
        assert_eq!("cftdc".parse::<Algorithm>().unwrap(), Algorithm::CfTdc);
        assert!("pola".parse::<Algorithm>().is_err());
        for a in Algorithm::ALL {
            assert_eq!(a.slug().parse::<Algorithm>().unwrap(), a);
        }
    }

    #[test]
    fn frame_checks() {
        assert!(matches!(
            check_frame(&[vec![0.0; 4]], 2, 4),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            check_frame(&[vec![0.0; 3]], 1, 4),
            Err(Error::InvalidSize(_))
        ));
        assert!(check_frame(&[vec![0.0; 4]], 1, 4).is_ok());
    }
}
