//! Duplicate-occupancy measures over sets of planned trajectories.
//! Buildings never enter these sums.

use crate::grid::BlockIndex;
use crate::occupancy::TimeInterval;
use crate::search::Trajectory4D;
use std::collections::{BTreeMap, HashMap, HashSet};

/// Sample indices `n ≥ 0` with `n·dt ∈ [start, end)`.
pub fn sample_range(iv: TimeInterval, dt: f64) -> std::ops::Range<i64> {
    let at = |n: i64| n as f64 * dt;
    let first_at_or_after = |t: f64| -> i64 {
        if t == f64::INFINITY {
            return i64::MAX;
        }
        let mut n = (t / dt).ceil().max(0.0) as i64;
        while n > 0 && at(n - 1) >= t {
            n -= 1;
        }
        while at(n) < t {
            n += 1;
        }
        n
    };
    let lo = first_at_or_after(iv.start.max(0.0));
    let hi = first_at_or_after(iv.end);
    lo..hi.max(lo)
}

/// Accumulates duplicate-occupancy block-seconds as trajectories are added.
///
/// A sample `(block, n·dt)` counts once when at least two distinct
/// trajectories hold `block` at `n·dt`.
#[derive(Debug, Clone)]
pub struct DuplicateCounter {
    dt: f64,
    coverage: HashMap<(BlockIndex, i64), u32>,
    duplicated_samples: u64,
}

impl DuplicateCounter {
    pub fn new(dt: f64) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "sampling step must be positive");
        Self {
            dt,
            coverage: HashMap::new(),
            duplicated_samples: 0,
        }
    }

    pub fn add(&mut self, traj: &Trajectory4D) {
        let mut own: HashSet<(BlockIndex, i64)> = HashSet::new();
        for v in &traj.visits {
            for n in sample_range(v.interval(), self.dt) {
                own.insert((v.block, n));
            }
        }
        for key in own {
            let c = self.coverage.entry(key).or_insert(0);
            *c += 1;
            if *c == 2 {
                self.duplicated_samples += 1;
            }
        }
    }

    /// Block-seconds so far.
    pub fn total(&self) -> f64 {
        self.duplicated_samples as f64 * self.dt
    }
}

/// `dt · |{(b, t) : t ∈ {0, dt, 2dt, …}, ≥ 2 trajectories hold b at t}|`.
pub fn duplicate_occupancy_time(trajectories: &[Trajectory4D], dt: f64) -> f64 {
    let mut counter = DuplicateCounter::new(dt);
    for t in trajectories {
        counter.add(t);
    }
    counter.total()
}

/// Number of visit pairs from distinct trajectories that share a block
/// over a positive-measure time span.
pub fn conflict_event_count(trajectories: &[Trajectory4D]) -> usize {
    let mut per_block: BTreeMap<BlockIndex, Vec<(TimeInterval, usize)>> = BTreeMap::new();
    for (n, t) in trajectories.iter().enumerate() {
        for v in &t.visits {
            per_block
                .entry(v.block)
                .or_default()
                .push((v.interval(), n));
        }
    }
    let mut events = 0;
    for list in per_block.values_mut() {
        list.sort_by(|a, b| a.0.start.total_cmp(&b.0.start));
        for (x, &(iv, owner)) in list.iter().enumerate() {
            for &(other, other_owner) in &list[x + 1..] {
                if other.start >= iv.end {
                    break;
                }
                if owner != other_owner && iv.overlaps(&other) {
                    events += 1;
                }
            }
        }
    }
    events
}
