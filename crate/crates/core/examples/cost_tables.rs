//! Analytic operation counts next to the published reference figures.

use tvolap::cost::{cost, published_table};
use tvolap::Algorithm;

fn main() -> tvolap::Result<()> {
    for n in [2048, 512] {
        println!("N_IR = {n}, 48 kHz");
        for row in published_table(n)? {
            let r = &row.report;
            println!(
                "  {:<7} {:>8.3} MFLOPS (published {:>8.3}, {:+.2}%)  audio {:>5}  {}",
                r.algorithm.label(),
                r.mflops,
                row.published_mflops,
                100.0 * (r.mflops - row.published_mflops) / row.published_mflops,
                r.audio_latency,
                if r.note.is_some() { "[flagged]" } else { "" }
            );
        }
    }
    let tdc = cost(Algorithm::Tdc, 2048, 48000.0, 2048)?.mflops;
    println!("block size sweep for N_IR = 2048 (TDC {tdc:.1} MFLOPS):");
    for block in [128, 256, 512, 1024, 2048, 4096] {
        let r = cost(Algorithm::Tvolap, 2048, 48000.0, block)?;
        println!("  2L = {block:>4}: {:>7.3} MFLOPS, {:>5.1}x cheaper than TDC", r.mflops, tdc / r.mflops);
    }
    Ok(())
}
