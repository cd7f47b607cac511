use super::heuristic::{heuristic_3d, TimeTable};
use super::trajectory::{BlockVisit, Trajectory4D};
use crate::grid::{BlockIndex, BlockSet, GridSpec};
use crate::occupancy::{LedgerError, OccupancyLedger, Owner, Reservation, TimeInterval};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no path from {start} to {goal}")]
    NoPathFound { start: BlockIndex, goal: BlockIndex },
    #[error("endpoint {0} is occupied by a building")]
    BlockedEndpoint(BlockIndex),
    #[error("start block {block} is held by {} at departure", blocking.owner)]
    DepartureConflict {
        block: BlockIndex,
        blocking: Reservation,
    },
    #[error("blocks {from} and {to} are not neighbours")]
    NotAdjacent { from: BlockIndex, to: BlockIndex },
    #[error("block {0} lies outside the grid")]
    OutOfBounds(BlockIndex),
    #[error("{hovers} hover values for a path of {blocks} blocks")]
    HoverMismatch { blocks: usize, hovers: usize },
}

/// How long the destination block stays held once the aircraft arrives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GoalHold {
    /// `[t_enter, ∞)`: the aircraft has landed there.
    #[default]
    Indefinite,
    /// Released this many seconds after reaching the block centre.
    Release(f64),
}

impl GoalHold {
    pub fn window(self, t_enter: f64, t_center: f64) -> TimeInterval {
        match self {
            GoalHold::Indefinite => TimeInterval::from(t_enter),
            GoalHold::Release(d) => TimeInterval {
                start: t_enter,
                end: t_center + d,
            },
        }
    }

    fn min_duration(self) -> f64 {
        match self {
            GoalHold::Indefinite => f64::INFINITY,
            GoalHold::Release(d) => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfaOptions {
    /// Longest single hover the planner may insert, seconds.
    pub hover_threshold: f64,
    pub goal_hold: GoalHold,
}

pub const DEFAULT_HOVER_THRESHOLD: f64 = 60.0;

impl Default for CfaOptions {
    fn default() -> Self {
        Self {
            hover_threshold: DEFAULT_HOVER_THRESHOLD,
            goal_hold: GoalHold::Indefinite,
        }
    }
}

/// Leaving a block centre at `t_center` after `hover` seconds along a link
/// of duration `link_time`: returns the handoff time into the next block
/// (link midpoint) and the arrival time at its centre.
#[inline]
pub fn advance(t_center: f64, hover: f64, link_time: f64) -> (f64, f64) {
    let half = 0.5 * link_time;
    let t_enter = t_center + hover + half;
    (t_enter, t_enter + half)
}

/// Turns a block path plus per-block hovers into timed visits. Each block
/// is held for half its incoming link, its hover, and half its outgoing link.
pub fn annotate_times(
    grid: &GridSpec,
    tt: &TimeTable,
    path: &[BlockIndex],
    hover: &[f64],
    t_dep: f64,
) -> Result<Vec<BlockVisit>, SearchError> {
    if hover.len() != path.len() {
        return Err(SearchError::HoverMismatch {
            blocks: path.len(),
            hovers: hover.len(),
        });
    }
    if let Some(&b) = path.iter().find(|b| !grid.contains(**b)) {
        return Err(SearchError::OutOfBounds(b));
    }
    let mut visits = Vec::with_capacity(path.len());
    let (mut t_enter, mut t_center) = (t_dep, t_dep);
    for (a, &block) in path.iter().enumerate() {
        let t_exit = match path.get(a + 1) {
            Some(&next) => {
                let link = grid
                    .link_between(block, next)
                    .ok_or(SearchError::NotAdjacent {
                        from: block,
                        to: next,
                    })?;
                let (exit, next_center) = advance(t_center, hover[a], tt.link(link.kind));
                t_center = next_center;
                exit
            }
            None => t_center + hover[a],
        };
        visits.push(BlockVisit {
            block,
            t_enter,
            t_exit,
            hover: hover[a],
        });
        t_enter = t_exit;
    }
    Ok(visits)
}

/// Reserves every visit of `traj` under its flight id, all or nothing.
/// The final visit is held according to `goal_hold`.
pub fn reserve_trajectory(
    ledger: &mut OccupancyLedger,
    traj: &Trajectory4D,
    goal_hold: GoalHold,
) -> Result<(), LedgerError> {
    let last = traj.visits.len().saturating_sub(1);
    let items: Vec<_> = traj
        .visits
        .iter()
        .enumerate()
        .map(|(a, v)| {
            let iv = if a == last {
                goal_hold.window(v.t_enter, v.t_exit - v.hover)
            } else {
                v.interval()
            };
            (v.block, iv)
        })
        .collect();
    ledger.reserve_all(&items, Owner(traj.id))
}

/// Decides whether a move may be taken and how long to hover first.
trait Admission {
    fn admit(
        &self,
        from: BlockIndex,
        t_center: f64,
        to: BlockIndex,
        link_time: f64,
        to_is_goal: bool,
    ) -> Option<f64>;
}

struct StaticObstacles<'a> {
    grid: &'a GridSpec,
    blocked: &'a BlockSet,
}

impl Admission for StaticObstacles<'_> {
    fn admit(&self, _: BlockIndex, _: f64, to: BlockIndex, _: f64, _: bool) -> Option<f64> {
        (!self.blocked.contains(self.grid, to)).then_some(0.0)
    }
}

struct LedgerAdmission<'a> {
    ledger: &'a OccupancyLedger,
    opts: CfaOptions,
}

impl LedgerAdmission<'_> {
    fn arrival_window(&self, t_enter: f64, t_center: f64, is_goal: bool) -> TimeInterval {
        if is_goal {
            self.opts.goal_hold.window(t_enter, t_center)
        } else {
            TimeInterval {
                start: t_enter,
                end: t_center,
            }
        }
    }
}

impl Admission for LedgerAdmission<'_> {
    fn admit(
        &self,
        from: BlockIndex,
        t_center: f64,
        to: BlockIndex,
        link_time: f64,
        to_is_goal: bool,
    ) -> Option<f64> {
        let ledger = self.ledger;
        let (enter0, center0) = advance(t_center, 0.0, link_time);
        // hovering only lengthens the stay at `from`
        if !ledger.is_free(
            from,
            TimeInterval {
                start: t_center,
                end: enter0,
            },
        ) {
            return None;
        }
        let window0 = self.arrival_window(enter0, center0, to_is_goal);
        if ledger.is_free(to, window0) {
            return Some(0.0);
        }
        let t_free = ledger.earliest_free_after(to, enter0, window0.len());
        if !t_free.is_finite() {
            return None;
        }
        let mut hover = t_free - enter0;
        let (mut enter, mut center) = advance(t_center, hover, link_time);
        for _ in 0..4 {
            if enter >= t_free {
                break;
            }
            let bumped = hover + (t_free - enter);
            hover = if bumped > hover {
                bumped
            } else {
                hover.next_up()
            };
            (enter, center) = advance(t_center, hover, link_time);
        }
        if hover > self.opts.hover_threshold {
            return None;
        }
        let stay = TimeInterval {
            start: t_center,
            end: enter,
        };
        if !ledger.is_free(from, stay)
            || !ledger.is_free(to, self.arrival_window(enter, center, to_is_goal))
        {
            return None;
        }
        Some(hover)
    }
}

#[derive(Debug)]
struct OpenEntry {
    f: f64,
    h: f64,
    key: (u32, u32, u32),
    seq: u64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // reversed: BinaryHeap pops the smallest (F, H, (k, j, i), insertion)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

const UNSEEN: u8 = 0;
const OPEN: u8 = 1;
const CLOSED: u8 = 2;
const NO_PARENT: u32 = u32::MAX;

/// Best-first search over blocks with a closed list: a block is expanded at
/// most once. Returns the block path and the hover taken at each block.
fn best_first(
    grid: &GridSpec,
    tt: &TimeTable,
    start: BlockIndex,
    goal: BlockIndex,
    t_dep: f64,
    admission: &impl Admission,
) -> Option<(Vec<BlockIndex>, Vec<f64>)> {
    let n = grid.len();
    let mut g = vec![f64::INFINITY; n];
    let mut state = vec![UNSEEN; n];
    let mut parent = vec![NO_PARENT; n];
    let mut hover_before = vec![0.0f64; n];
    let mut t_center = vec![0.0f64; n];
    let mut seq = vec![0u64; n];
    let mut counter = 0u64;
    let mut open = BinaryHeap::new();

    let heuristic = |b: BlockIndex| {
        let (dx, dy, dz) = b.abs_delta(goal);
        heuristic_3d(dx, dy, dz, tt)
    };

    let s = grid.linear(start);
    let goal_idx = grid.linear(goal);
    g[s] = 0.0;
    t_center[s] = t_dep;
    state[s] = OPEN;
    let h0 = heuristic(start);
    open.push(OpenEntry {
        f: h0,
        h: h0,
        key: start.layer_major_key(),
        seq: 0,
        node: s,
    });

    while let Some(entry) = open.pop() {
        let u = entry.node;
        if state[u] == CLOSED || entry.seq != seq[u] {
            continue;
        }
        state[u] = CLOSED;
        if u == goal_idx {
            let mut path = vec![goal];
            let mut hovers = vec![0.0];
            let mut cur = u;
            while parent[cur] != NO_PARENT {
                let hover = hover_before[cur];
                cur = parent[cur] as usize;
                path.push(grid.from_linear(cur));
                hovers.push(hover);
            }
            path.reverse();
            hovers.reverse();
            return Some((path, hovers));
        }
        let ub = grid.from_linear(u);
        for (nb, link) in grid.neighbors(ub) {
            let v = grid.linear(nb);
            if state[v] == CLOSED {
                continue;
            }
            let tau = tt.link(link.kind);
            let Some(hover) = admission.admit(ub, t_center[u], nb, tau, v == goal_idx) else {
                continue;
            };
            let g_new = g[u] + hover + tau;
            if state[v] == OPEN && g_new >= g[v] {
                continue;
            }
            counter += 1;
            g[v] = g_new;
            state[v] = OPEN;
            parent[v] = u as u32;
            hover_before[v] = hover;
            t_center[v] = advance(t_center[u], hover, tau).1;
            seq[v] = counter;
            let h = heuristic(nb);
            open.push(OpenEntry {
                f: g_new + h,
                h,
                key: nb.layer_major_key(),
                seq: counter,
                node: v,
            });
        }
    }
    None
}

/// Minimum-flight-time block path around static obstacles.
pub fn astar(
    grid: &GridSpec,
    obstacles: &BlockSet,
    start: BlockIndex,
    goal: BlockIndex,
    tt: &TimeTable,
) -> Result<Vec<BlockIndex>, SearchError> {
    for b in [start, goal] {
        if !grid.contains(b) {
            return Err(SearchError::OutOfBounds(b));
        }
        if obstacles.contains(grid, b) {
            return Err(SearchError::BlockedEndpoint(b));
        }
    }
    let admission = StaticObstacles {
        grid,
        blocked: obstacles,
    };
    best_first(grid, tt, start, goal, 0.0, &admission)
        .map(|(path, _)| path)
        .ok_or(SearchError::NoPathFound { start, goal })
}

/// Conflict-free search against the ledger. When the next block is held,
/// the planner hovers at the current block for the shortest wait that frees
/// it, provided the wait stays under the threshold and the current block is
/// itself free for the longer stay; otherwise that move is dropped and the
/// search routes elsewhere.
pub fn cfa_star(
    grid: &GridSpec,
    ledger: &OccupancyLedger,
    start: BlockIndex,
    goal: BlockIndex,
    tt: &TimeTable,
    t_dep: f64,
    opts: CfaOptions,
) -> Result<Vec<BlockVisit>, SearchError> {
    for b in [start, goal] {
        if !grid.contains(b) {
            return Err(SearchError::OutOfBounds(b));
        }
    }
    if let Some(blocking) = ledger.occupant_at(start, t_dep) {
        return Err(SearchError::DepartureConflict {
            block: start,
            blocking: *blocking,
        });
    }
    let probe = opts.goal_hold.min_duration();
    if probe > 0.0 && ledger.earliest_free_after(goal, t_dep, probe) == f64::INFINITY {
        return Err(SearchError::NoPathFound { start, goal });
    }
    if start == goal {
        let window = opts.goal_hold.window(t_dep, t_dep);
        if let Some(blocking) = ledger.first_conflict(start, window) {
            return Err(SearchError::DepartureConflict {
                block: start,
                blocking: *blocking,
            });
        }
    }
    let admission = LedgerAdmission { ledger, opts };
    let (path, hovers) = best_first(grid, tt, start, goal, t_dep, &admission)
        .ok_or(SearchError::NoPathFound { start, goal })?;
    annotate_times(grid, tt, &path, &hovers, t_dep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::performance::AircraftPerformance;
    use crate::search::Planner;

    fn unit_table() -> TimeTable {
        TimeTable {
            t_x00: 1.0,
            t_0y0: 1.0,
            t_00z: 3.0,
            t_xy0: 2f64.sqrt(),
            t_x0z: 3.2,
            t_0yz: 3.2,
            t_xyz: 3.3,
        }
    }

    fn phantom(grid: &GridSpec) -> TimeTable {
        let p4 = AircraftPerformance::calibrate("DJI Phantom 4", 1.375, 3.0, 20.0).unwrap();
        TimeTable::new(&p4, grid, 1.0).unwrap()
    }

    fn b(i: u32, j: u32, k: u32) -> BlockIndex {
        BlockIndex::new(i, j, k)
    }

    #[test]
    fn annotate_collinear() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 3, 1, 1).unwrap();
        let tt = unit_table();
        let path = [b(0, 0, 0), b(1, 0, 0), b(2, 0, 0)];
        let v = annotate_times(&g, &tt, &path, &[0.0; 3], 0.0).unwrap();
        let enters: Vec<_> = v.iter().map(|v| v.t_enter).collect();
        let exits: Vec<_> = v.iter().map(|v| v.t_exit).collect();
        let costs: Vec<_> = v.iter().map(|v| v.duration()).collect();
        assert_eq!(costs, vec![0.5, 1.0, 0.5]);
        assert_eq!(enters, vec![0.0, 0.5, 1.5]);
        assert_eq!(exits, vec![0.5, 1.5, 2.0]);

        let v = annotate_times(&g, &tt, &path, &[0.0, 2.0, 0.0], 0.0).unwrap();
        assert_eq!(
            v.iter().map(|v| v.t_enter).collect::<Vec<_>>(),
            vec![0.0, 0.5, 3.5]
        );
        assert_eq!(v[1].duration(), 3.0);

        let single = annotate_times(&g, &tt, &[b(1, 0, 0)], &[4.0], 10.0).unwrap();
        assert_eq!(single[0].duration(), 4.0);

        assert!(matches!(
            annotate_times(&g, &tt, &[b(0, 0, 0), b(2, 0, 0)], &[0.0, 0.0], 0.0),
            Err(SearchError::NotAdjacent { .. })
        ));
        assert!(matches!(
            annotate_times(&g, &tt, &path, &[0.0], 0.0),
            Err(SearchError::HoverMismatch { .. })
        ));
    }

    #[test]
    fn astar_trivial_and_blocked() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 5, 5, 1).unwrap();
        let tt = phantom(&g);
        let free = BlockSet::new(&g);
        assert_eq!(
            astar(&g, &free, b(2, 2, 0), b(2, 2, 0), &tt).unwrap(),
            vec![b(2, 2, 0)]
        );
        let mut walls = BlockSet::new(&g);
        walls.insert(&g, b(4, 4, 0));
        assert_eq!(
            astar(&g, &walls, b(0, 0, 0), b(4, 4, 0), &tt),
            Err(SearchError::BlockedEndpoint(b(4, 4, 0)))
        );
        // enclose the goal
        let mut ring = BlockSet::new(&g);
        for (i, j) in [(3, 3), (3, 4), (4, 3)] {
            ring.insert(&g, b(i, j, 0));
        }
        assert_eq!(
            astar(&g, &ring, b(0, 0, 0), b(4, 4, 0), &tt),
            Err(SearchError::NoPathFound {
                start: b(0, 0, 0),
                goal: b(4, 4, 0)
            })
        );
    }

    #[test]
    fn cfa_matches_astar_on_empty_ledger() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 8, 6, 3).unwrap();
        let tt = phantom(&g);
        let free = BlockSet::new(&g);
        let ledger = OccupancyLedger::new(&g);
        let (s, t) = (b(0, 1, 0), b(7, 4, 2));
        let path = astar(&g, &free, s, t, &tt).unwrap();
        let visits = cfa_star(&g, &ledger, s, t, &tt, 12.0, CfaOptions::default()).unwrap();
        assert_eq!(visits.iter().map(|v| v.block).collect::<Vec<_>>(), path);
        let a = annotate_times(&g, &tt, &path, &vec![0.0; path.len()], 12.0).unwrap();
        assert_eq!(a, visits);
    }

    #[test]
    fn waits_behind_a_crossing_reservation() {
        // column i = 1 is walled off except (1,0), which is busy until 3.5 s
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 4, 4, 1).unwrap();
        let tt = unit_table();
        let mut ledger = OccupancyLedger::new(&g);
        for j in 1..4 {
            ledger
                .reserve(
                    b(1, j, 0),
                    TimeInterval::new(0.0, 1000.0).unwrap(),
                    Owner(9),
                )
                .unwrap();
        }
        ledger
            .reserve(b(1, 0, 0), TimeInterval::new(0.0, 3.5).unwrap(), Owner(8))
            .unwrap();
        let visits = cfa_star(
            &g,
            &ledger,
            b(0, 0, 0),
            b(3, 0, 0),
            &tt,
            0.0,
            CfaOptions::default(),
        )
        .unwrap();
        assert_eq!(
            visits.iter().map(|v| v.block).collect::<Vec<_>>(),
            vec![b(0, 0, 0), b(1, 0, 0), b(2, 0, 0), b(3, 0, 0)]
        );
        assert_eq!(visits[0].hover, 3.0);
        assert_eq!(visits[1].t_enter, 3.5);
        let traj = Trajectory4D::new(1, "x", 0.0, visits, Planner::Cfastar);
        assert_eq!(traj.flight_time, 6.0);
        reserve_trajectory(&mut ledger, &traj, GoalHold::Indefinite).unwrap();
        assert!(ledger.check_disjoint());
        assert!(reserve_trajectory(&mut ledger, &traj, GoalHold::Indefinite).is_err());
    }

    #[test]
    fn hover_threshold_forces_failure() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 3, 1, 1).unwrap();
        let tt = unit_table();
        let mut ledger = OccupancyLedger::new(&g);
        ledger
            .reserve(b(1, 0, 0), TimeInterval::new(0.0, 100.0).unwrap(), Owner(5))
            .unwrap();
        let opts = CfaOptions::default();
        assert!(matches!(
            cfa_star(&g, &ledger, b(0, 0, 0), b(2, 0, 0), &tt, 0.0, opts),
            Err(SearchError::NoPathFound { .. })
        ));
        let patient = CfaOptions {
            hover_threshold: 200.0,
            ..opts
        };
        let visits = cfa_star(&g, &ledger, b(0, 0, 0), b(2, 0, 0), &tt, 0.0, patient).unwrap();
        assert_eq!(visits[0].hover, 99.5);
    }

    #[test]
    fn secondary_conflict_at_parent_blocks_hover() {
        // waiting at the start would run into another reservation there
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 3, 1, 1).unwrap();
        let tt = unit_table();
        let mut ledger = OccupancyLedger::new(&g);
        ledger
            .reserve(b(1, 0, 0), TimeInterval::new(0.0, 5.0).unwrap(), Owner(5))
            .unwrap();
        ledger
            .reserve(b(0, 0, 0), TimeInterval::new(2.0, 3.0).unwrap(), Owner(6))
            .unwrap();
        assert!(matches!(
            cfa_star(
                &g,
                &ledger,
                b(0, 0, 0),
                b(2, 0, 0),
                &tt,
                0.0,
                CfaOptions::default()
            ),
            Err(SearchError::NoPathFound { .. })
        ));
    }

    #[test]
    fn departure_and_goal_checks() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 3, 3, 1).unwrap();
        let tt = unit_table();
        let mut buildings = BlockSet::new(&g);
        buildings.insert(&g, b(2, 2, 0));
        let mut ledger = OccupancyLedger::with_buildings(&g, &buildings);
        assert!(matches!(
            cfa_star(
                &g,
                &ledger,
                b(0, 0, 0),
                b(2, 2, 0),
                &tt,
                0.0,
                CfaOptions::default()
            ),
            Err(SearchError::NoPathFound { .. })
        ));
        ledger
            .reserve(b(0, 0, 0), TimeInterval::new(0.0, 10.0).unwrap(), Owner(3))
            .unwrap();
        match cfa_star(
            &g,
            &ledger,
            b(0, 0, 0),
            b(1, 1, 0),
            &tt,
            5.0,
            CfaOptions::default(),
        ) {
            Err(SearchError::DepartureConflict { blocking, .. }) => {
                assert_eq!(blocking.owner, Owner(3))
            }
            other => panic!("{other:?}"),
        }
        // free once the earlier holder leaves
        assert!(cfa_star(
            &g,
            &ledger,
            b(0, 0, 0),
            b(1, 1, 0),
            &tt,
            10.0,
            CfaOptions::default()
        )
        .is_ok());
        // landing block already taken by a landed aircraft
        ledger
            .reserve(b(0, 2, 0), TimeInterval::from(50.0), Owner(4))
            .unwrap();
        assert!(matches!(
            cfa_star(
                &g,
                &ledger,
                b(1, 0, 0),
                b(0, 2, 0),
                &tt,
                0.0,
                CfaOptions::default()
            ),
            Err(SearchError::NoPathFound { .. })
        ));
        let release = CfaOptions {
            goal_hold: GoalHold::Release(1.0),
            ..CfaOptions::default()
        };
        assert!(cfa_star(&g, &ledger, b(1, 0, 0), b(0, 2, 0), &tt, 0.0, release).is_ok());
    }

    #[test]
    fn start_equals_goal() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 2, 2, 1).unwrap();
        let tt = unit_table();
        let mut ledger = OccupancyLedger::new(&g);
        let v = cfa_star(
            &g,
            &ledger,
            b(1, 1, 0),
            b(1, 1, 0),
            &tt,
            3.0,
            CfaOptions::default(),
        )
        .unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].t_enter, v[0].t_exit), (3.0, 3.0));
        ledger
            .reserve(b(1, 1, 0), TimeInterval::new(10.0, 11.0).unwrap(), Owner(2))
            .unwrap();
        assert!(matches!(
            cfa_star(
                &g,
                &ledger,
                b(1, 1, 0),
                b(1, 1, 0),
                &tt,
                3.0,
                CfaOptions::default()
            ),
            Err(SearchError::DepartureConflict { .. })
        ));
    }

    #[test]
    fn crossing_astar_paths_conflict_on_reserve() {
        let g = GridSpec::new([0.0; 3], 20.0, 40.0, 5, 5, 1).unwrap();
        let tt = unit_table();
        let free = BlockSet::new(&g);
        let p1 = astar(&g, &free, b(0, 2, 0), b(4, 2, 0), &tt).unwrap();
        let p2 = astar(&g, &free, b(2, 0, 0), b(2, 4, 0), &tt).unwrap();
        let t1 = Trajectory4D::new(
            1,
            "x",
            0.0,
            annotate_times(&g, &tt, &p1, &[0.0; 5], 0.0).unwrap(),
            Planner::Astar,
        );
        let t2 = Trajectory4D::new(
            2,
            "x",
            0.0,
            annotate_times(&g, &tt, &p2, &[0.0; 5], 0.0).unwrap(),
            Planner::Astar,
        );
        let mut ledger = OccupancyLedger::new(&g);
        reserve_trajectory(&mut ledger, &t1, GoalHold::Indefinite).unwrap();
        match reserve_trajectory(&mut ledger, &t2, GoalHold::Indefinite) {
            Err(LedgerError::Conflict {
                block, blocking, ..
            }) => {
                assert_eq!(block, b(2, 2, 0));
                assert_eq!(blocking.owner, Owner(1));
            }
            other => panic!("{other:?}"),
        }
    }
}
