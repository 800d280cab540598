//! Polarity flip of a delta filter under a sequence of ones, for every engine.
//! Prints the measured transition of each scheme and a few TVOLAP samples.

use tvolap::experiment::{run_experiment, ExperimentSpec, FilterSource, InputSource};
use tvolap::Algorithm;

fn main() -> tvolap::Result<()> {
    let spec = ExperimentSpec {
        algorithms: vec![Algorithm::Ola, Algorithm::Ols, Algorithm::Wola, Algorithm::Tvolap, Algorithm::CfTdc],
        input: InputSource::Ones,
        duration: 16384,
        filter_a: FilterSource::Delta { gain: 1.0 },
        filter_b: Some(FilterSource::Delta { gain: -1.0 }),
        switch_time_ms: 8192.0 / 48.0,
        block: 512,
        ir_len: 2048,
        ..ExperimentSpec::default()
    };
    let result = run_experiment(&spec)?;
    println!("{:<7} {:>6} {:>10} {:>8}", "algo", "start", "width", "latency");
    for run in &result.runs {
        let m = &run.metrics;
        println!(
            "{:<7} {:>6} {:>10} {:>8}",
            m.algorithm.label(),
            m.transition_start.unwrap_or(0),
            m.transition_width.unwrap_or(0),
            m.switching_latency
        );
    }
    let tv = result.run(Algorithm::Tvolap).expect("requested");
    let start = tv.metrics.transition_start.unwrap_or(0);
    for u in (0..=256).step_by(32) {
        println!("  TVOLAP y[start+{u:>3}] = {:+.4}", tv.output.channel(0)[start + u]);
    }
    Ok(())
}
