//! Splitting an impulse response into transformed partitions and back.

use tvolap::{hann_window, partition, reassemble, ImpulseResponse};

fn main() -> tvolap::Result<()> {
    let hop = 256;
    let h: Vec<f64> = (0..2048).map(|n| (-(n as f64) / 300.0).exp() * ((n % 7) as f64 - 3.0)).collect();
    let ir = ImpulseResponse::new(vec![h.clone()], 48000)?;

    let set = partition(&ir, hop)?;
    println!(
        "N_IR={} L={hop}: M={} partitions of {} bins (transform {})",
        ir.len(),
        set.partition_count(),
        set.partition(0, 0).bins().len(),
        set.transform_length()
    );

    let back = reassemble(&set)?;
    let err = back.channel(0).iter().zip(&h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("reassembled max error {err:.1e}");

    // consecutive windows overlap by half and sum to 2, hence the 0.5 output gain
    let w = hann_window(hop)?;
    let sum = w[10] + w[10 + hop];
    println!("w[n] + w[n+L] = {sum}, normalization gain {}", set.normalization_gain());
    Ok(())
}
