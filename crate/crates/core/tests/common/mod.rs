//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use airmatrix_core::batch::{
    generate_scenario, BuildingSource, Environment, FlightPlan, ScenarioConfig, REFERENCE_COVERAGE,
};
use airmatrix_core::grid::{BlockIndex, BlockSet, GridSpec, LinkKind};
use airmatrix_core::search::{GoalHold, TimeTable, Trajectory4D};
use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;

/// 100 × 100 × 3 city with reference building coverage and fleet.
pub fn reference_scenario(
    seed: u64,
    count: usize,
    window: f64,
) -> (ScenarioConfig, Environment, Vec<FlightPlan>) {
    let grid = GridSpec::with_defaults(100, 100).unwrap();
    let mut cfg = ScenarioConfig::new(seed, count, window, grid);
    cfg.buildings = BuildingSource::Synthetic {
        coverage: REFERENCE_COVERAGE.to_vec(),
    };
    let env = cfg.environment(Path::new(".")).unwrap();
    let plans = generate_scenario(&cfg, &env).unwrap();
    (cfg, env, plans)
}

fn kind_of(di: i32, dj: i32, dk: i32) -> LinkKind {
    match (di.abs() + dj.abs(), dk.abs()) {
        (1, 0) => LinkKind::AxisH,
        (2, 0) => LinkKind::DiagH,
        (0, 1) => LinkKind::Vert,
        (1, 1) => LinkKind::FaceDiag,
        (2, 1) => LinkKind::CornerDiag,
        other => unreachable!("{other:?}"),
    }
}

pub fn kind_index(kind: LinkKind) -> usize {
    LinkKind::ALL.iter().position(|k| *k == kind).unwrap()
}

/// Cost as a fixed-order sum over link-kind counts, so equal multisets of
/// links give bit-identical totals regardless of path order.
pub fn canonical_cost(counts: &[u32; 5], tt: &TimeTable) -> f64 {
    LinkKind::ALL
        .iter()
        .zip(counts)
        .map(|(k, &c)| c as f64 * tt.link(*k))
        .sum()
}

pub fn path_counts(path: &[BlockIndex]) -> [u32; 5] {
    let mut counts = [0u32; 5];
    for w in path.windows(2) {
        let d = |a: u32, b: u32| b as i32 - a as i32;
        let kind = kind_of(d(w[0].i, w[1].i), d(w[0].j, w[1].j), d(w[0].k, w[1].k));
        counts[kind_index(kind)] += 1;
    }
    counts
}

/// Plain Dijkstra over a dense `(i, j, k)` array. Returns the optimal
/// distance and the link counts of one optimal path.
pub fn dijkstra(
    dims: (u32, u32, u32),
    blocked: &dyn Fn(u32, u32, u32) -> bool,
    tt: &TimeTable,
    s: (u32, u32, u32),
    t: (u32, u32, u32),
) -> Option<(f64, [u32; 5])> {
    let (ni, nj, nk) = dims;
    let idx = |i: u32, j: u32, k: u32| ((k * nj + j) * ni + i) as usize;
    let n = (ni * nj * nk) as usize;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev: Vec<Option<(u32, u32, u32)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[idx(s.0, s.1, s.2)] = 0.0;
    heap.push(Reverse((OrdF(0.0), s)));
    while let Some(Reverse((OrdF(d), (i, j, k)))) = heap.pop() {
        if d > dist[idx(i, j, k)] {
            continue;
        }
        if (i, j, k) == t {
            break;
        }
        for dk in -1i32..=1 {
            for dj in -1i32..=1 {
                for di in -1i32..=1 {
                    if (di, dj, dk) == (0, 0, 0) {
                        continue;
                    }
                    let (a, b, c) = (i as i32 + di, j as i32 + dj, k as i32 + dk);
                    if a < 0 || b < 0 || c < 0 || a >= ni as i32 || b >= nj as i32 || c >= nk as i32
                    {
                        continue;
                    }
                    let (a, b, c) = (a as u32, b as u32, c as u32);
                    if blocked(a, b, c) {
                        continue;
                    }
                    let nd = d + tt.link(kind_of(di, dj, dk));
                    if nd < dist[idx(a, b, c)] {
                        dist[idx(a, b, c)] = nd;
                        prev[idx(a, b, c)] = Some((i, j, k));
                        heap.push(Reverse((OrdF(nd), (a, b, c))));
                    }
                }
            }
        }
    }
    let d = dist[idx(t.0, t.1, t.2)];
    if !d.is_finite() {
        return None;
    }
    let mut path = vec![BlockIndex::new(t.0, t.1, t.2)];
    let mut cur = t;
    while let Some(p) = prev[idx(cur.0, cur.1, cur.2)] {
        path.push(BlockIndex::new(p.0, p.1, p.2));
        cur = p;
    }
    path.reverse();
    Some((d, path_counts(&path)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF(pub f64);
impl Eq for OrdF {}
impl PartialOrd for OrdF {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Pairwise check that no two distinct flights share a block over a
/// positive-length span, and that no flight enters a building block. Goal
/// blocks are treated as held according to `hold` after arrival.
pub fn disjointness_violations(
    trajs: &[Trajectory4D],
    grid: &GridSpec,
    buildings: &BlockSet,
    hold: GoalHold,
) -> usize {
    let mut per_block: BTreeMap<BlockIndex, Vec<(f64, f64, u64)>> = BTreeMap::new();
    let mut violations = 0;
    for t in trajs {
        let last = t.visits.len() - 1;
        for (n, v) in t.visits.iter().enumerate() {
            if buildings.contains(grid, v.block) {
                violations += 1;
            }
            let end = if n == last {
                match hold {
                    GoalHold::Indefinite => f64::INFINITY,
                    GoalHold::Release(d) => v.t_exit - v.hover + d,
                }
            } else {
                v.t_exit
            };
            per_block
                .entry(v.block)
                .or_default()
                .push((v.t_enter, end, t.id));
        }
    }
    for list in per_block.values() {
        for (x, a) in list.iter().enumerate() {
            for b in &list[x + 1..] {
                if a.2 != b.2 && a.0.max(b.0) < a.1.min(b.1) {
                    violations += 1;
                }
            }
        }
    }
    violations
}

/// Crossing-number membership test.
pub fn inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut c = false;
    let n = poly.len();
    for e in 0..n {
        let (a, b) = (poly[e], poly[(e + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                c = !c;
            }
        }
    }
    c
}

/// Area of `poly ∩ [x0, x1] × [y0, y1]` by clipping against each side.
pub fn clipped_area(poly: &[[f64; 2]], x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    let mut pts = poly.to_vec();
    let planes: [(usize, f64, bool); 4] =
        [(0, x0, true), (0, x1, false), (1, y0, true), (1, y1, false)];
    for (axis, v, keep_above) in planes {
        let keep = |p: &[f64; 2]| {
            if keep_above {
                p[axis] >= v
            } else {
                p[axis] <= v
            }
        };
        let mut out = Vec::new();
        for e in 0..pts.len() {
            let (a, b) = (pts[e], pts[(e + 1) % pts.len()]);
            let (ka, kb) = (keep(&a), keep(&b));
            if ka {
                out.push(a);
            }
            if ka != kb {
                let s = (v - a[axis]) / (b[axis] - a[axis]);
                out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
            }
        }
        pts = out;
        if pts.is_empty() {
            return 0.0;
        }
    }
    let mut area = 0.0;
    for e in 0..pts.len() {
        let (a, b) = (pts[e], pts[(e + 1) % pts.len()]);
        area += a[0] * b[1] - b[0] * a[1];
    }
    (area / 2.0).abs()
}

/// Reservation state on a 0.1 s lattice: slot `n` covers `[n/10, (n+1)/10)`.
pub struct SlotScanner {
    pub horizon: usize,
    slots: Vec<Vec<bool>>,
    building: Vec<bool>,
}

impl SlotScanner {
    pub fn new(blocks: usize, horizon: usize) -> Self {
        Self {
            horizon,
            slots: vec![vec![false; horizon]; blocks],
            building: vec![false; blocks],
        }
    }

    pub fn set_building(&mut self, b: usize) {
        self.building[b] = true;
        self.slots[b].iter_mut().for_each(|s| *s = true);
    }

    pub fn is_free(&self, b: usize, s: usize, e: usize) -> bool {
        (s..e).all(|n| !self.slots[b][n])
    }

    pub fn reserve(&mut self, b: usize, s: usize, e: usize) -> bool {
        if !self.is_free(b, s, e) {
            return false;
        }
        (s..e).for_each(|n| self.slots[b][n] = true);
        true
    }

    /// Earliest start slot at or after `t` whose window `[t', t' + d)` is
    /// free, or None. The window end is the `f64` sum of the two times, as
    /// the ledger receives them. Slots past the horizon are free.
    pub fn earliest(&self, b: usize, t: usize, d: usize) -> Option<usize> {
        if self.building[b] {
            return None;
        }
        let tenth = |n: usize| n as f64 / 10.0;
        (t..=self.horizon).find(|&s| {
            let end = tenth(s) + tenth(d);
            let last = (s..).find(|&m| tenth(m) >= end).unwrap();
            (s..last.min(self.horizon)).all(|n| !self.slots[b][n])
        })
    }
}
