//! Event clock: a min-queue of pending `(time, good)` updates.
//!
//! Random streams are derived from the scenario seed with ChaCha8: good `j`
//! draws its update times from stream `2j` and its staleness samples from
//! stream `2j + 1`, so adding goods or switching models never perturbs the
//! draws of another good.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::config::TimingModel;

pub(crate) fn timing_stream(seed: u64, good: usize) -> ChaCha8Rng {
    stream(seed, 2 * good as u64)
}

pub(crate) fn staleness_stream(seed: u64, good: usize) -> ChaCha8Rng {
    stream(seed, 2 * good as u64 + 1)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    time: f64,
    good: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    // reversed so that BinaryHeap pops the earliest time, lowest good first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.good.cmp(&self.good))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) struct Clock {
    model: TimingModel,
    queue: BinaryHeap<Pending>,
    rngs: Vec<ChaCha8Rng>,
    /// Round-robin: number of periods already used per good.
    ticks: Vec<u64>,
    script: Vec<VecDeque<f64>>,
    /// Poisson gaps that were cut to one time unit.
    pub capped_gaps: usize,
}

impl Clock {
    pub fn new(model: &TimingModel, goods: usize, seed: u64) -> Self {
        let mut clock = Clock {
            model: model.clone(),
            queue: BinaryHeap::new(),
            rngs: (0..goods).map(|j| timing_stream(seed, j)).collect(),
            ticks: vec![0; goods],
            script: vec![VecDeque::new(); goods],
            capped_gaps: 0,
        };
        if let TimingModel::Scripted { events } = model {
            let mut sorted = events.clone();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (t, g) in sorted {
                clock.script[g].push_back(t);
            }
        }
        for good in 0..goods {
            if let Some(time) = clock.next_after(good, 0.0) {
                clock.queue.push(Pending { time, good });
            }
        }
        clock
    }

    /// Earliest pending update.
    pub fn pop(&mut self) -> Option<(f64, usize)> {
        self.queue.pop().map(|p| (p.time, p.good))
    }

    /// Queues the update that follows the one just made to `good` at `now`.
    pub fn reschedule(&mut self, good: usize, now: f64) {
        if let Some(time) = self.next_after(good, now) {
            self.queue.push(Pending { time, good });
        }
    }

    fn next_after(&mut self, good: usize, now: f64) -> Option<f64> {
        match &self.model {
            TimingModel::RoundRobin { period, offsets } => {
                let offset = offsets[good];
                if self.ticks[good] == 0 && offset == 0.0 {
                    self.ticks[good] = 1;
                }
                let t = offset + self.ticks[good] as f64 * period;
                self.ticks[good] += 1;
                Some(t)
            }
            TimingModel::PoissonClipped { rates } => {
                let exp = Exp::new(rates[good]).expect("validated rate");
                let mut gap: f64 = exp.sample(&mut self.rngs[good]);
                if gap > 1.0 {
                    gap = 1.0;
                    self.capped_gaps += 1;
                }
                let t = now + gap;
                Some(if t > now { t } else { now.next_up() })
            }
            TimingModel::JitteredFixed { period, jitter } => {
                let rng = &mut self.rngs[good];
                let gap = if now == 0.0 && self.ticks[good] == 0 {
                    self.ticks[good] = 1;
                    (1.0 - rng.random::<f64>()) * period
                } else {
                    period + jitter * (2.0 * rng.random::<f64>() - 1.0)
                };
                Some(now + gap)
            }
            TimingModel::Scripted { .. } => self.script[good].pop_front(),
        }
    }
}
