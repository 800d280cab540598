//! Staging a new filter from a control thread while the audio loop runs.

use std::sync::Arc;
use std::thread;

use tvolap::{partition, ImpulseResponse, StreamingProcessor, TvolapEngine};

fn main() -> tvolap::Result<()> {
    let hop = 64;
    let a = ImpulseResponse::delta(1.0, 512, 2, 48000)?;
    let b = ImpulseResponse::delta(-1.0, 512, 2, 48000)?;
    let mut engine = TvolapEngine::from_impulse_response(&a, hop)?;
    let exchanger = engine.exchanger();

    let replacement = Arc::new(partition(&b, hop)?);
    let control = thread::spawn(move || exchanger.stage(replacement));
    control.join().expect("control thread panicked")?;

    // the staged set takes over at the next hop boundary and fades in across it
    let before = engine.op_counts();
    let y = engine.process(&[vec![1.0; hop], vec![1.0; hop]])?;
    let y2 = engine.process(&[vec![1.0; hop], vec![1.0; hop]])?;
    println!("first hop after staging ends at {:+.3}, next hop {:+.3}", y[0][hop - 1], y2[0][hop - 1]);
    println!("work for those hops: {:?}", engine.op_counts().since(&before));
    Ok(())
}
