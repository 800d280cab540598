//! Real FFT round trip and the convolution theorem on a small block.

use tvolap::{forward_real, inverse_real, mac, RealFft, SpectrumFrame};

fn main() -> tvolap::Result<()> {
    let x = [1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let h = [0.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

    let spectrum = forward_real(&x)?;
    println!("{} bins for a {}-point transform", spectrum.bins().len(), spectrum.transform_length());
    let back = inverse_real(&spectrum)?;
    let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip max error {err:.1e}");

    // zero padding makes the circular product equal the linear convolution
    let acc = SpectrumFrame::zeros(8)?;
    let y = inverse_real(&mac(&acc, &forward_real(&x)?, &forward_real(&h)?)?)?;
    println!("x * h = {:?}", &y[..4].iter().map(|v| (v * 1e12).round() / 1e12).collect::<Vec<_>>());

    let big = RealFft::new(4096)?;
    println!("reusable plan: {} samples -> {} bins", big.len(), big.bin_count());
    Ok(())
}
