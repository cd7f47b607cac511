use crate::grid::{BlockIndex, BlockSet, GridSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Half-open time interval `[start, end)` in seconds. `end` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn new(start: f64, end: f64) -> Result<Self, LedgerError> {
        if start.is_nan() || end.is_nan() || end < start || start == f64::INFINITY {
            return Err(LedgerError::InvalidInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// `[start, ∞)`
    pub fn from(start: f64) -> Self {
        Self {
            start,
            end: f64::INFINITY,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two intervals share a set of positive measure.
    /// Touching endpoints do not overlap.
    #[inline]
    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        self.start.max(other.start) < self.end.min(other.end)
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Holder of a reservation. Owner 0 is reserved for buildings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Owner(pub u64);

impl Owner {
    pub const BUILDING: Owner = Owner(0);

    pub fn is_building(self) -> bool {
        self == Self::BUILDING
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_building() {
            f.write_str("building")
        } else {
            write!(f, "flight {}", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reservation {
    pub interval: TimeInterval,
    pub owner: Owner,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("block {block}: {requested} conflicts with {} held by {}", blocking.interval, blocking.owner)]
    Conflict {
        block: BlockIndex,
        requested: TimeInterval,
        blocking: Reservation,
    },
    #[error("invalid interval [{start}, {end})")]
    InvalidInterval { start: f64, end: f64 },
    #[error("block {0} lies outside the grid")]
    OutOfBounds(BlockIndex),
}

/// Per-block sorted, pairwise-disjoint interval reservations.
///
/// Writes are expected from a single planner at a time; reads are `&self`.
#[derive(Debug, Clone)]
pub struct OccupancyLedger {
    grid: GridSpec,
    blocks: Vec<Vec<Reservation>>,
}

impl OccupancyLedger {
    pub fn new(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            blocks: vec![Vec::new(); grid.len()],
        }
    }

    /// Ledger with every block in `buildings` held by owner 0 over `[0, ∞)`.
    pub fn with_buildings(grid: &GridSpec, buildings: &BlockSet) -> Self {
        let mut ledger = Self::new(grid);
        for b in buildings.iter(grid) {
            let idx = grid.linear(b);
            ledger.blocks[idx].push(Reservation {
                interval: TimeInterval::from(0.0),
                owner: Owner::BUILDING,
            });
        }
        ledger
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn slot(&self, b: BlockIndex) -> &[Reservation] {
        &self.blocks[self.grid.linear(b)]
    }

    pub fn reservations(&self, b: BlockIndex) -> &[Reservation] {
        self.slot(b)
    }

    /// First stored reservation overlapping `iv` with positive measure.
    pub fn first_conflict(&self, b: BlockIndex, iv: TimeInterval) -> Option<&Reservation> {
        if iv.is_empty() {
            return None;
        }
        let rs = self.slot(b);
        let idx = rs.partition_point(|r| r.interval.end <= iv.start);
        rs.get(idx).filter(|r| r.interval.overlaps(&iv))
    }

    #[inline]
    pub fn is_free(&self, b: BlockIndex, iv: TimeInterval) -> bool {
        self.first_conflict(b, iv).is_none()
    }

    /// Reservation covering instant `t`, if any.
    pub fn occupant_at(&self, b: BlockIndex, t: f64) -> Option<&Reservation> {
        let rs = self.slot(b);
        let idx = rs.partition_point(|r| r.interval.end <= t);
        rs.get(idx).filter(|r| r.interval.contains(t))
    }

    pub fn is_building(&self, b: BlockIndex) -> bool {
        self.slot(b).iter().any(|r| r.owner.is_building())
    }

    pub fn reserve(
        &mut self,
        b: BlockIndex,
        iv: TimeInterval,
        owner: Owner,
    ) -> Result<(), LedgerError> {
        if !self.grid.contains(b) {
            return Err(LedgerError::OutOfBounds(b));
        }
        if let Some(blocking) = self.first_conflict(b, iv) {
            return Err(LedgerError::Conflict {
                block: b,
                requested: iv,
                blocking: *blocking,
            });
        }
        if iv.is_empty() {
            return Ok(());
        }
        let idx = self.grid.linear(b);
        let rs = &mut self.blocks[idx];
        let at = rs.partition_point(|r| r.interval.start < iv.start);
        rs.insert(
            at,
            Reservation {
                interval: iv,
                owner,
            },
        );
        Ok(())
    }

    /// Reserves every `(block, interval)` pair or none of them.
    pub fn reserve_all(
        &mut self,
        items: &[(BlockIndex, TimeInterval)],
        owner: Owner,
    ) -> Result<(), LedgerError> {
        for (n, &(b, iv)) in items.iter().enumerate() {
            if !self.grid.contains(b) {
                return Err(LedgerError::OutOfBounds(b));
            }
            if let Some(blocking) = self.first_conflict(b, iv) {
                return Err(LedgerError::Conflict {
                    block: b,
                    requested: iv,
                    blocking: *blocking,
                });
            }
            // the batch itself must be internally disjoint too
            if let Some(&(_, other)) = items[..n]
                .iter()
                .find(|(ob, oiv)| *ob == b && oiv.overlaps(&iv))
            {
                return Err(LedgerError::Conflict {
                    block: b,
                    requested: iv,
                    blocking: Reservation {
                        interval: other,
                        owner,
                    },
                });
            }
        }
        for &(b, iv) in items {
            self.reserve(b, iv, owner).expect("pre-checked reservation");
        }
        Ok(())
    }

    /// Smallest `t' ≥ t` such that `[t', t' + duration)` is free in `b`;
    /// `+∞` when no such time exists. `duration` may itself be `+∞`.
    pub fn earliest_free_after(&self, b: BlockIndex, t: f64, duration: f64) -> f64 {
        let rs = self.slot(b);
        let mut candidate = t;
        let mut idx = rs.partition_point(|r| r.interval.end <= candidate);
        while let Some(r) = rs.get(idx) {
            if r.interval.start >= candidate + duration {
                break;
            }
            candidate = candidate.max(r.interval.end);
            if candidate == f64::INFINITY {
                return candidate;
            }
            idx += 1;
        }
        candidate
    }

    /// Full scan: every block's intervals sorted by start and pairwise disjoint.
    pub fn check_disjoint(&self) -> bool {
        self.blocks.iter().all(|rs| {
            rs.windows(2).all(|w| {
                w[0].interval.start <= w[1].interval.start
                    && w[0].interval.end <= w[1].interval.start
            })
        })
    }

    pub fn reservation_count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Debug export: `"i,j,k" → [[start, end, owner], …]` for non-empty blocks.
    /// An unbounded end serializes as `null`.
    pub fn export(&self) -> BTreeMap<String, Vec<(f64, Option<f64>, u64)>> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, rs)| !rs.is_empty())
            .map(|(n, rs)| {
                let b = self.grid.from_linear(n);
                let entries = rs
                    .iter()
                    .map(|r| {
                        let end = r.interval.end.is_finite().then_some(r.interval.end);
                        (r.interval.start, end, r.owner.0)
                    })
                    .collect();
                (format!("{},{},{}", b.i, b.j, b.k), entries)
            })
            .collect()
    }
}
