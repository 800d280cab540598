//! FIFO that lets a host feed arbitrary chunk sizes into a hop-framed processor.

use std::collections::VecDeque;

use crate::audio::ImpulseResponse;
use crate::error::{Error, Result};
use crate::processor::StreamingProcessor;

pub struct FrameAdapter<P> {
    processor: P,
    input: Vec<Vec<f64>>,
    output: Vec<VecDeque<f64>>,
    hops_done: u64,
    scheduled: VecDeque<(u64, ImpulseResponse)>,
}

impl<P: StreamingProcessor> FrameAdapter<P> {
    pub fn new(processor: P) -> Self {
        let channels = processor.channel_count();
        let hop = processor.hop();
        Self {
            processor,
            input: vec![Vec::with_capacity(hop); channels],
            output: vec![VecDeque::new(); channels],
            hops_done: 0,
            scheduled: VecDeque::new(),
        }
    }

    /// Like [`new`](Self::new), with `hop` zeros queued on the output so that
    /// [`process`](Self::process) can always return as many samples as it got.
    pub fn with_prefill(processor: P) -> Self {
        let mut a = Self::new(processor);
        let hop = a.processor.hop();
        for q in &mut a.output {
            q.extend(std::iter::repeat_n(0.0, hop));
        }
        a
    }

    pub fn processor(&self) -> &P {
        &self.processor
    }

    pub fn processor_mut(&mut self) -> &mut P {
        &mut self.processor
    }

    pub fn into_processor(self) -> P {
        self.processor
    }

    /// Hops handed to the processor so far.
    pub fn hops_done(&self) -> u64 {
        self.hops_done
    }

    /// Applies `ir` right before hop number `hop_index` is processed.
    pub fn schedule_filter(&mut self, hop_index: u64, ir: ImpulseResponse) -> Result<()> {
        if hop_index < self.hops_done {
            return Err(Error::InvalidConfiguration(format!(
                "hop {hop_index} already processed ({} done)",
                self.hops_done
            )));
        }
        let pos = self
            .scheduled
            .iter()
            .position(|(h, _)| *h > hop_index)
            .unwrap_or(self.scheduled.len());
        self.scheduled.insert(pos, (hop_index, ir));
        Ok(())
    }

    /// Queues `chunk` and runs every complete hop.
    pub fn push(&mut self, chunk: &[Vec<f64>]) -> Result<()> {
        if chunk.len() != self.input.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} channels, got {}",
                self.input.len(),
                chunk.len()
            )));
        }
        let len = chunk[0].len();
        if chunk.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidInput("chunk channels have unequal lengths".into()));
        }
        let hop = self.processor.hop();
        let mut pos = 0;
        while pos < len {
            let take = (hop - self.input[0].len()).min(len - pos);
            for (buf, src) in self.input.iter_mut().zip(chunk) {
                buf.extend_from_slice(&src[pos..pos + take]);
            }
            pos += take;
            if self.input[0].len() == hop {
                while self.scheduled.front().is_some_and(|(h, _)| *h == self.hops_done) {
                    let (_, ir) = self.scheduled.pop_front().expect("front checked");
                    self.processor.set_filter(&ir)?;
                }
                let y = self.processor.process(&self.input)?;
                for (q, ch) in self.output.iter_mut().zip(y) {
                    q.extend(ch);
                }
                for buf in &mut self.input {
                    buf.clear();
                }
                self.hops_done += 1;
            }
        }
        Ok(())
    }

    pub fn available(&self) -> usize {
        self.output[0].len()
    }

    /// Removes up to `n` queued output samples per channel.
    pub fn pull(&mut self, n: usize) -> Vec<Vec<f64>> {
        let n = n.min(self.available());
        self.output.iter_mut().map(|q| q.drain(..n).collect()).collect()
    }

    pub fn pull_all(&mut self) -> Vec<Vec<f64>> {
        self.pull(self.available())
    }

    /// Pushes `chunk` and returns exactly as many samples as it contained.
    pub fn process(&mut self, chunk: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.push(chunk)?;
        let n = chunk.first().map_or(0, Vec::len);
        if self.available() < n {
            return Err(Error::InvalidConfiguration(format!(
                "only {} of {n} output samples ready; build the adapter with_prefill",
                self.available()
            )));
        }
        Ok(self.pull(n))
    }
}
