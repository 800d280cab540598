//! Streaming TVOLAP fed with irregular host buffers, checked against direct convolution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvolap::signals::gen_pink;
use tvolap::{direct_convolve, FrameAdapter, ImpulseResponse, StreamingProcessor, TvolapEngine};

fn main() -> tvolap::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h: Vec<f64> = (0..1024).map(|_| rng.random_range(-0.1..0.1)).collect();
    let ir = ImpulseResponse::new(vec![h], 48000)?;
    let x = gen_pink(1, 20000, 48000)?;

    let engine = TvolapEngine::from_impulse_response(&ir, 128)?;
    let delay = engine.output_delay();
    let mut adapter = FrameAdapter::new(engine);
    let mut y = Vec::new();
    let mut pos = 0;
    while pos < x.len() {
        let n = rng.random_range(1..700).min(x.len() - pos);
        adapter.push(&[x.channel(0)[pos..pos + n].to_vec()])?;
        y.extend(adapter.pull_all().remove(0));
        pos += n;
    }

    let expect = direct_convolve(&x, &ir)?;
    let compared = y.len() - delay;
    let err = y[delay..]
        .iter()
        .zip(expect.channel(0))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("{} hops, output delay {delay}, max error over {compared} samples: {err:.2e}", adapter.hops_done());
    Ok(())
}
