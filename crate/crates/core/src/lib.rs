//! Streaming partitioned fast convolution with artifact-free filter switching.
//!
//! The core is [`TvolapEngine`]: Hann-windowed input blocks at 50% overlap,
//! non-overlapping impulse response partitions, a stride-2 spectral
//! multiply-accumulate and a two-step overlap-add. Swapping all partitions at
//! a block boundary crossfades old and new response over one hop with
//! constant per-hop work.
//!
//! Around it sit reference convolvers ([`reference`]), an analytic cost model
//! ([`cost`]), test signals, WAV I/O and an experiment runner.

pub mod adapter;
pub mod audio;
pub mod cli;
pub mod cost;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod partition;
pub mod processor;
pub mod reference;
pub mod signals;
pub mod spectral;
pub mod wav;

pub use adapter::FrameAdapter;
pub use audio::{AudioBuffer, ImpulseResponse};
pub use engine::{FilterExchanger, OpCounts, TvolapEngine};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentResult, ExperimentSpec, FilterSource, InputSource};
pub use partition::{hann_window, partition, reassemble, FilterPartitionSet};
pub use processor::{run_stream, Algorithm, StreamingProcessor};
pub use reference::{
    direct_convolve, BlockConvolver, CrossfadeConfig, CrossfadeShape, TimeDomainConvolver,
    WolaConvolver,
};
pub use spectral::{forward_real, inverse_real, mac, RealFft, SpectrumFrame};
