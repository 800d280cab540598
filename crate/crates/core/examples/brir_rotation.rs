//! Listener rotating in 45 degree steps inside a synthetic room: two-channel
//! BRIRs of 32768 samples at 44.1 kHz, a new response every N_IR samples.

use std::time::Instant;

use tvolap::signals::{gen_pink, BinauralSurrogate};
use tvolap::{FrameAdapter, StreamingProcessor, TvolapEngine};

fn main() -> tvolap::Result<()> {
    let (fs, n_ir, hop) = (44100, 32768, 512);
    let steps = 8;
    let brirs = (0..steps)
        .map(|k| BinauralSurrogate::brir(-45.0 * k as f64, n_ir, fs, k as u64).build())
        .collect::<tvolap::Result<Vec<_>>>()?;

    let engine = TvolapEngine::from_impulse_response(&brirs[0], hop)?;
    println!(
        "L={hop}, M={}, audio latency {}, switching latency {}",
        engine.partition_count(),
        engine.latency(),
        engine.switching_latency()
    );
    let mut adapter = FrameAdapter::with_prefill(engine);
    let hops_per_step = (n_ir / hop) as u64;
    for (k, brir) in brirs.iter().enumerate().skip(1) {
        adapter.schedule_filter(k as u64 * hops_per_step, brir.clone())?;
    }

    let x = gen_pink(3, steps * n_ir, fs)?.fan_out(2)?;
    let started = Instant::now();
    let mut peak: f64 = 0.0;
    for pos in (0..x.len()).step_by(1000) {
        let end = (pos + 1000).min(x.len());
        let chunk: Vec<Vec<f64>> = x.channels().iter().map(|c| c[pos..end].to_vec()).collect();
        for ch in adapter.process(&chunk)? {
            peak = ch.iter().fold(peak, |m, v| m.max(v.abs()));
        }
    }
    let audio = x.len() as f64 / fs as f64;
    let wall = started.elapsed().as_secs_f64();
    println!("{audio:.1}s of audio in {wall:.2}s ({:.0}x real time), peak {peak:.3}", audio / wall);
    Ok(())
}
