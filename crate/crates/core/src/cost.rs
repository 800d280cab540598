//! Analytic arithmetic-operation and latency model for the convolution schemes.
//!
//! Per-sample operation counts:
//!
//! | scheme  | ops per sample                    | audio lat. | switching lat. |
//! |---------|-----------------------------------|------------|----------------|
//! | TDC     | `2 N_IR`                          | 0          | fade length    |
//! | OLA     | `2 F(N_IR) + 7`                   | `N_IR`     | 0              |
//! | WOLA    | `2 (2 F(N_IR) + 7 + 3)`           | `N_IR`     | `N_IR / 2`     |
//! | TVOLAP  | `4 F(2L) + 16 M + 4`              | `2L`       | `L`            |
//!
//! with `F(N) = 5 log2(N) + 14`, the cost of a length-`2N` radix-2 real
//! transform spread over `N` samples (`N/2 log2 N` butterflies of 4 multiplies
//! and 6 adds, plus `4N` multiplies and `10N` adds of split overhead).

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::processor::Algorithm;

/// Operations for the crossfade gains: two multiplies and one add per sample.
pub const CROSSFADE_OPS_PER_SAMPLE: f64 = 3.0;

/// Per-sample cost of the WOLA synthesis window and its extra overlap-add.
pub const WOLA_SYNTHESIS_OPS_PER_SAMPLE: f64 = 2.0;

pub const WOLA_NOTE: &str = "published WOLA figures disagree: 2*(OLA+3) gives 296 ops/sample at \
N_IR=2048 (14.208 MFLOPS) while the table prints 14.064 (293 = 2*OLA+3); this model uses 2*(OLA+3), \
which matches the N_IR=512 table cell exactly";

pub const TVOLAP_SINGLE_PARTITION_NOTE: &str = "published single-partition TVOLAP figure (12.192 \
MFLOPS at N_IR=512) equals WOLA minus its synthesis window (254 ops/sample); the canonical formula \
4*F(2L)+16M+4 gives 256";

/// Cost of a length-`2N` real transform amortized over `N` samples.
pub fn fft_ops_per_sample(block: usize) -> Result<f64> {
    if block < 8 || !block.is_power_of_two() {
        return Err(Error::InvalidSize(format!(
            "block size {block} must be a power of two >= 8"
        )));
    }
    Ok(5.0 * block.trailing_zeros() as f64 + 14.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchingLatency {
    Samples(usize),
    /// Set by the chosen crossfade time.
    FadeDependent,
}

impl Serialize for SwitchingLatency {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SwitchingLatency::Samples(n) => s.serialize_u64(*n as u64),
            SwitchingLatency::FadeDependent => s.serialize_str("crossfade-dependent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub algorithm: Algorithm,
    #[serde(rename = "N_IR")]
    pub ir_len: usize,
    pub block: usize,
    #[serde(rename = "f_s")]
    pub sample_rate: f64,
    pub ops_per_sample: f64,
    pub mflops: f64,
    pub audio_latency: usize,
    pub switching_latency: SwitchingLatency,
    /// Additional load while a crossfade runs: the duplicated convolution
    /// stream plus the gain operations.
    pub extra_switch_mflops: Option<f64>,
    pub note: Option<String>,
}

/// Evaluates the model for one configuration.
///
/// `block` is `N_IR` for TDC/OLA/WOLA and `2L` for TVOLAP.
pub fn cost(algorithm: Algorithm, ir_len: usize, sample_rate: f64, block: usize) -> Result<CostReport> {
    if ir_len == 0 || block == 0 || !(sample_rate > 0.0) {
        return Err(Error::InvalidConfiguration(
            "impulse response length, block size and sample rate must be positive".into(),
        ));
    }
    let require_full_block = || {
        if block != ir_len {
            return Err(Error::InvalidConfiguration(format!(
                "{algorithm} uses a block size equal to N_IR ({ir_len}), got {block}"
            )));
        }
        Ok(())
    };
    let mflops = |ops: f64| ops * sample_rate / 1e6;
    let mut note = None;
    let (ops, audio_latency, switching_latency, extra) = match algorithm {
        Algorithm::Tdc | Algorithm::CfTdc => {
            require_full_block()?;
            let ops = 2.0 * ir_len as f64;
            if algorithm == Algorithm::CfTdc {
                (
                    ops,
                    0,
                    SwitchingLatency::FadeDependent,
                    Some(mflops(ops + CROSSFADE_OPS_PER_SAMPLE)),
                )
            } else {
                (ops, 0, SwitchingLatency::Samples(0), None)
            }
        }
        Algorithm::Ola => {
            require_full_block()?;
            let ops = 2.0 * fft_ops_per_sample(ir_len)? + 7.0;
            (ops, ir_len, SwitchingLatency::Samples(0), None)
        }
        Algorithm::Wola => {
            require_full_block()?;
            let ola = 2.0 * fft_ops_per_sample(ir_len)? + 7.0;
            note = Some(WOLA_NOTE.to_string());
            (
                2.0 * (ola + 3.0),
                ir_len,
                SwitchingLatency::Samples(ir_len / 2),
                None,
            )
        }
        Algorithm::Tvolap => {
            if block % 2 != 0 || block < 8 || !block.is_power_of_two() {
                return Err(Error::InvalidConfiguration(format!(
                    "TVOLAP block size 2L={block} must be a power of two >= 8"
                )));
            }
            let partitions = ir_len.div_ceil(block);
            if partitions == 1 {
                note = Some(TVOLAP_SINGLE_PARTITION_NOTE.to_string());
            }
            let ops = 4.0 * fft_ops_per_sample(block)? + 16.0 * partitions as f64 + 4.0;
            (ops, block, SwitchingLatency::Samples(block / 2), None)
        }
        Algorithm::Ols => {
            return Err(Error::InvalidConfiguration(
                "no operation-count model for OLS".into(),
            ))
        }
    };
    Ok(CostReport {
        algorithm,
        ir_len,
        block,
        sample_rate,
        ops_per_sample: ops,
        mflops: mflops(ops),
        audio_latency,
        switching_latency,
        extra_switch_mflops: extra,
        note,
    })
}

/// One row of a published cost table next to the model's value.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub report: CostReport,
    pub published_mflops: f64,
    pub published_audio_latency: usize,
    pub published_switching_latency: SwitchingLatency,
}

impl TableRow {
    pub fn relative_deviation(&self) -> f64 {
        (self.report.mflops - self.published_mflops).abs() / self.published_mflops
    }
}

/// Rows of the reference tables (48 kHz, TVOLAP block 512) for `N_IR` 2048 or 512.
pub fn published_table(ir_len: usize) -> Result<Vec<TableRow>> {
    use SwitchingLatency::{FadeDependent, Samples};
    let published: [(Algorithm, f64, usize, SwitchingLatency); 4] = match ir_len {
        2048 => [
            (Algorithm::CfTdc, 196.608, 0, FadeDependent),
            (Algorithm::Ola, 6.96, 2048, Samples(0)),
            (Algorithm::Wola, 14.064, 2048, Samples(1024)),
            (Algorithm::Tvolap, 14.592, 512, Samples(256)),
        ],
        512 => [
            (Algorithm::CfTdc, 49.152, 0, FadeDependent),
            (Algorithm::Ola, 6.0, 512, Samples(0)),
            (Algorithm::Wola, 12.288, 512, Samples(256)),
            (Algorithm::Tvolap, 12.192, 512, Samples(256)),
        ],
        other => {
            return Err(Error::InvalidConfiguration(format!(
                "no published table for N_IR={other}"
            )))
        }
    };
    published
        .into_iter()
        .map(|(algorithm, mflops, audio, switching)| {
            let block = if algorithm == Algorithm::Tvolap { 512 } else { ir_len };
            Ok(TableRow {
                report: cost(algorithm, ir_len, 48_000.0, block)?,
                published_mflops: mflops,
                published_audio_latency: audio,
                published_switching_latency: switching,
            })
        })
        .collect()
}

/// Writes reports as CSV with a header row.
pub fn write_csv<W: Write>(reports: &[CostReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_json(reports: &[CostReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}
