//! First-come-first-served batch planning, the A* baseline run, and seeded
//! scenario generation.

use crate::grid::{BlockIndex, BlockSet, GridError, GridSpec};
use crate::occupancy::{
    rasterize_buildings, BuildingFootprint, LedgerError, OccupancyLedger, RasterError,
};
use crate::performance::{check_scale, AircraftSpec, Fleet, FleetLoadError, PerformanceError};
use crate::search::{
    annotate_times, astar, cfa_star, reserve_trajectory, CfaOptions, GoalHold, Planner,
    SearchError, TimeTable, Trajectory4D, DEFAULT_HOVER_THRESHOLD,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

pub const DEFAULT_SCALE: f64 = 0.6;
pub const DEFAULT_DT: f64 = 1.0;

/// Per-layer building coverage of the reference city: 3925, 1286 and 189
/// occupied blocks out of 10 000 on layers 0, 1 and 2.
pub const REFERENCE_COVERAGE: [f64; 3] = [0.3925, 0.1286, 0.0189];

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("scenario needs at least two non-building blocks")]
    InfeasibleScenario,
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("invalid flight plan {id}: {reason}")]
    InvalidPlan { id: u64, reason: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Performance(#[from] PerformanceError),
    #[error(transparent)]
    Fleet(#[from] FleetLoadError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn read_file(path: &Path) -> Result<String, BatchError> {
    std::fs::read_to_string(path).map_err(|source| BatchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One requested flight. Points are in metres; `t_dep` in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "FlightRow", into = "FlightRow")]
pub struct FlightPlan {
    pub id: u64,
    pub origin: [f64; 3],
    pub destination: [f64; 3],
    pub t_dep: f64,
    pub aircraft: String,
}

/// Flat file layout: `id,ox,oy,oz,dx,dy,dz,t_dep,aircraft`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FlightRow {
    id: u64,
    ox: f64,
    oy: f64,
    oz: f64,
    dx: f64,
    dy: f64,
    dz: f64,
    t_dep: f64,
    aircraft: String,
}

impl From<FlightRow> for FlightPlan {
    fn from(r: FlightRow) -> Self {
        Self {
            id: r.id,
            origin: [r.ox, r.oy, r.oz],
            destination: [r.dx, r.dy, r.dz],
            t_dep: r.t_dep,
            aircraft: r.aircraft,
        }
    }
}

impl From<FlightPlan> for FlightRow {
    fn from(p: FlightPlan) -> Self {
        let ([ox, oy, oz], [dx, dy, dz]) = (p.origin, p.destination);
        Self {
            id: p.id,
            ox,
            oy,
            oz,
            dx,
            dy,
            dz,
            t_dep: p.t_dep,
            aircraft: p.aircraft,
        }
    }
}

fn check_plans(plans: &[FlightPlan]) -> Result<(), BatchError> {
    let mut seen = std::collections::HashSet::new();
    for p in plans {
        let bad = |reason: &str| BatchError::InvalidPlan {
            id: p.id,
            reason: reason.to_string(),
        };
        if p.id == 0 {
            return Err(bad("ids start at 1"));
        }
        if !seen.insert(p.id) {
            return Err(bad("duplicate id"));
        }
        if !(p.t_dep.is_finite() && p.t_dep >= 0.0) {
            return Err(bad("departure time must be finite and non-negative"));
        }
        if p.origin
            .iter()
            .chain(&p.destination)
            .any(|c| !c.is_finite())
        {
            return Err(bad("non-finite coordinate"));
        }
    }
    Ok(())
}

pub fn read_plans_csv(reader: impl Read) -> Result<Vec<FlightPlan>, BatchError> {
    let plans = csv::Reader::from_reader(reader)
        .deserialize::<FlightRow>()
        .map(|r| r.map(FlightPlan::from))
        .collect::<Result<Vec<_>, _>>()?;
    check_plans(&plans)?;
    Ok(plans)
}

pub fn write_plans_csv(writer: impl Write, plans: &[FlightPlan]) -> Result<(), BatchError> {
    let mut w = csv::Writer::from_writer(writer);
    if plans.is_empty() {
        w.write_record([
            "id", "ox", "oy", "oz", "dx", "dy", "dz", "t_dep", "aircraft",
        ])?;
    }
    for p in plans {
        w.serialize(FlightRow::from(p.clone()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_plans_json(text: &str) -> Result<Vec<FlightPlan>, BatchError> {
    let plans: Vec<FlightPlan> = serde_json::from_str(text)?;
    check_plans(&plans)?;
    Ok(plans)
}

/// Reads a plan file, choosing the format by extension (`.json` or CSV).
pub fn load_plans(path: &Path) -> Result<Vec<FlightPlan>, BatchError> {
    let text = read_file(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        read_plans_json(&text)
    } else {
        read_plans_csv(text.as_bytes())
    }
}

/// Fleet given either as a path to a JSON file or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FleetSource {
    Path(PathBuf),
    Inline(BTreeMap<String, AircraftSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BuildingSource {
    #[default]
    None,
    /// JSON list of footprints.
    File {
        path: PathBuf,
    },
    Inline {
        footprints: Vec<BuildingFootprint>,
    },
    /// Random cell-aligned buildings matching a per-layer coverage target.
    Synthetic {
        #[serde(default = "reference_coverage")]
        coverage: Vec<f64>,
    },
}

fn reference_coverage() -> Vec<f64> {
    REFERENCE_COVERAGE.to_vec()
}

fn default_scale() -> f64 {
    DEFAULT_SCALE
}

fn default_hover_threshold() -> f64 {
    DEFAULT_HOVER_THRESHOLD
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// Everything needed to reproduce one batch run from a single seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub count: usize,
    /// Departure window, seconds.
    pub window: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_hover_threshold")]
    pub hover_threshold: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub goal_hold: GoalHold,
    /// Longest a flight may wait on the ground for its start block; 0 disables.
    #[serde(default)]
    pub max_ground_hold: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub fleet: Option<FleetSource>,
    #[serde(default)]
    pub buildings: BuildingSource,
    /// Plan file used instead of generating flights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plans: Option<PathBuf>,
}

impl ScenarioConfig {
    /// A generated scenario on `grid` with the reference fleet and defaults.
    pub fn new(seed: u64, count: usize, window: f64, grid: GridSpec) -> Self {
        Self {
            seed,
            count,
            window,
            scale: DEFAULT_SCALE,
            hover_threshold: DEFAULT_HOVER_THRESHOLD,
            dt: DEFAULT_DT,
            goal_hold: GoalHold::default(),
            max_ground_hold: 0.0,
            grid,
            fleet: None,
            buildings: BuildingSource::None,
            plans: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BatchError> {
        let bad = |m: &str| Err(BatchError::InvalidConfig(m.to_string()));
        if !(self.window.is_finite() && self.window > 0.0) {
            return bad("window must be positive");
        }
        check_scale(self.scale)?;
        if self.hover_threshold.is_nan() || self.hover_threshold < 0.0 {
            return bad("hover threshold must be non-negative");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self.max_ground_hold.is_nan() || self.max_ground_hold < 0.0 {
            return bad("ground hold must be non-negative");
        }
        if let GoalHold::Release(d) = self.goal_hold {
            if !(d.is_finite() && d >= 0.0) {
                return bad("goal release delay must be finite and non-negative");
            }
        }
        if let BuildingSource::Synthetic { coverage } = &self.buildings {
            if coverage.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return bad("coverage fractions must lie in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn cfa_options(&self) -> CfaOptions {
        CfaOptions {
            hover_threshold: self.hover_threshold,
            goal_hold: self.goal_hold,
        }
    }

    /// Loads fleet and buildings. Relative paths resolve against `base`.
    pub fn environment(&self, base: &Path) -> Result<Environment, BatchError> {
        self.validate()?;
        let fleet = match &self.fleet {
            None => Fleet::reference(),
            Some(FleetSource::Inline(specs)) => Fleet::from_specs(specs.clone())?,
            Some(FleetSource::Path(p)) => Fleet::from_json(&read_file(&base.join(p))?)?,
        };
        let footprints = match &self.buildings {
            BuildingSource::None => Vec::new(),
            BuildingSource::File { path } => serde_json::from_str(&read_file(&base.join(path))?)?,
            BuildingSource::Inline { footprints } => footprints.clone(),
            BuildingSource::Synthetic { coverage } => {
                synthetic_buildings(&self.grid, coverage, self.seed)
            }
        };
        let buildings = rasterize_buildings(&footprints, &self.grid)?;
        Environment::new(
            self.grid.clone(),
            fleet,
            buildings,
            self.scale,
            self.cfa_options(),
        )
        .map(|env| env.with_ground_hold(self.max_ground_hold))
    }
}

/// Static world shared by every flight of a batch.
#[derive(Debug, Clone)]
pub struct Environment {
    pub grid: GridSpec,
    pub fleet: Fleet,
    pub buildings: BlockSet,
    pub scale: f64,
    pub options: CfaOptions,
    pub max_ground_hold: f64,
    tables: BTreeMap<String, TimeTable>,
}

impl Environment {
    pub fn new(
        grid: GridSpec,
        fleet: Fleet,
        buildings: BlockSet,
        scale: f64,
        options: CfaOptions,
    ) -> Result<Self, BatchError> {
        let scale = check_scale(scale)?;
        let tables = fleet
            .iter()
            .map(|a| Ok((a.name.clone(), TimeTable::new(a, &grid, scale)?)))
            .collect::<Result<_, PerformanceError>>()?;
        Ok(Self {
            grid,
            fleet,
            buildings,
            scale,
            options,
            max_ground_hold: 0.0,
            tables,
        })
    }

    pub fn with_ground_hold(mut self, seconds: f64) -> Self {
        self.max_ground_hold = seconds;
        self
    }

    pub fn table(&self, aircraft: &str) -> Option<&TimeTable> {
        self.tables.get(aircraft)
    }

    /// Fresh ledger holding only the buildings.
    pub fn ledger(&self) -> OccupancyLedger {
        OccupancyLedger::with_buildings(&self.grid, &self.buildings)
    }

    fn resolve(
        &self,
        plan: &FlightPlan,
    ) -> Result<(BlockIndex, BlockIndex, &TimeTable), FlightError> {
        let table = self
            .table(&plan.aircraft)
            .ok_or_else(|| FlightError::UnknownAircraft(plan.aircraft.clone()))?;
        let start = self
            .grid
            .block_of_point(plan.origin)
            .map_err(FlightError::Grid)?;
        let goal = self
            .grid
            .block_of_point(plan.destination)
            .map_err(FlightError::Grid)?;
        for b in [start, goal] {
            if self.buildings.contains(&self.grid, b) {
                return Err(FlightError::Search(SearchError::BlockedEndpoint(b)));
            }
        }
        Ok((start, goal, table))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlightError {
    #[error(transparent)]
    Search(SearchError),
    #[error("unknown aircraft {0:?}")]
    UnknownAircraft(String),
    #[error(transparent)]
    Grid(GridError),
    #[error(transparent)]
    Reserve(LedgerError),
}

impl FlightError {
    /// Short machine-readable label.
    pub fn kind(&self) -> &'static str {
        match self {
            FlightError::Search(SearchError::NoPathFound { .. }) => "no_path_found",
            FlightError::Search(SearchError::BlockedEndpoint(_)) => "blocked_endpoint",
            FlightError::Search(SearchError::DepartureConflict { .. }) => "departure_conflict",
            FlightError::Search(_) => "search_error",
            FlightError::UnknownAircraft(_) => "unknown_aircraft",
            FlightError::Grid(_) => "out_of_bounds",
            FlightError::Reserve(_) => "reservation_conflict",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlightFailure {
    pub id: u64,
    pub error: FlightError,
}

impl fmt::Display for FlightFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flight {}: {}", self.id, self.error)
    }
}

/// Planned trajectories in input order, skipped flights, and wall-clock
/// planning time per input plan.
#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    pub trajectories: Vec<Trajectory4D>,
    pub failures: Vec<FlightFailure>,
    pub timings: Vec<(u64, Duration)>,
}

/// Plans each flight in list order against everything reserved before it.
/// Failed flights are recorded and skipped.
pub fn plan_fcfs(plans: &[FlightPlan], env: &Environment) -> BatchOutcome {
    let mut ledger = env.ledger();
    let mut out = BatchOutcome::default();
    for plan in plans {
        let started = Instant::now();
        let result = plan_one_cfa(plan, env, &mut ledger);
        out.timings.push((plan.id, started.elapsed()));
        match result {
            Ok(t) => out.trajectories.push(t),
            Err(error) => out.failures.push(FlightFailure { id: plan.id, error }),
        }
    }
    out
}

fn plan_one_cfa(
    plan: &FlightPlan,
    env: &Environment,
    ledger: &mut OccupancyLedger,
) -> Result<Trajectory4D, FlightError> {
    let (start, goal, table) = env.resolve(plan)?;
    let mut t_dep = plan.t_dep;
    if env.max_ground_hold > 0.0 {
        while let Some(r) = ledger.occupant_at(start, t_dep) {
            if r.interval.end - plan.t_dep > env.max_ground_hold {
                break;
            }
            t_dep = r.interval.end;
        }
    }
    let visits = cfa_star(&env.grid, ledger, start, goal, table, t_dep, env.options)
        .map_err(FlightError::Search)?;
    let traj = Trajectory4D::new(
        plan.id,
        plan.aircraft.clone(),
        t_dep,
        visits,
        Planner::Cfastar,
    );
    reserve_trajectory(ledger, &traj, env.options.goal_hold).map_err(FlightError::Reserve)?;
    Ok(traj)
}

fn plan_one_astar(plan: &FlightPlan, env: &Environment) -> Result<Trajectory4D, FlightError> {
    let (start, goal, table) = env.resolve(plan)?;
    let path = astar(&env.grid, &env.buildings, start, goal, table).map_err(FlightError::Search)?;
    let visits = annotate_times(&env.grid, table, &path, &vec![0.0; path.len()], plan.t_dep)
        .map_err(FlightError::Search)?;
    Ok(Trajectory4D::new(
        plan.id,
        plan.aircraft.clone(),
        plan.t_dep,
        visits,
        Planner::Astar,
    ))
}

/// Plans every flight independently around buildings only. Runs on `jobs`
/// threads (0 = all cores); output order follows the input.
pub fn plan_baseline(plans: &[FlightPlan], env: &Environment, jobs: usize) -> BatchOutcome {
    let run = |p: &FlightPlan| {
        let started = Instant::now();
        let r = plan_one_astar(p, env);
        (p.id, r, started.elapsed())
    };
    let results: Vec<_> = if jobs == 1 {
        plans.iter().map(run).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| plans.par_iter().map(run).collect()),
            Err(_) => plans.iter().map(run).collect(),
        }
    };
    let mut out = BatchOutcome::default();
    for (id, r, elapsed) in results {
        out.timings.push((id, elapsed));
        match r {
            Ok(t) => out.trajectories.push(t),
            Err(error) => out.failures.push(FlightFailure { id, error }),
        }
    }
    out
}

/// Seeded flight list: origin/destination block centres drawn uniformly
/// from non-building blocks with O ≠ D, `t_dep` uniform over the window,
/// aircraft uniform over the fleet. Sorted by departure time, ids 1..=N.
///
/// Each flight consumes the same draws regardless of `window`, so changing
/// only the window rescales departures of otherwise identical plans.
pub fn generate_scenario(
    cfg: &ScenarioConfig,
    env: &Environment,
) -> Result<Vec<FlightPlan>, BatchError> {
    cfg.validate()?;
    if cfg.count == 0 {
        return Ok(Vec::new());
    }
    let grid = &env.grid;
    let free: Vec<BlockIndex> = grid
        .blocks()
        .filter(|b| !env.buildings.contains(grid, *b))
        .collect();
    if free.len() < 2 {
        return Err(BatchError::InfeasibleScenario);
    }
    let names: Vec<&str> = env.fleet.names().collect();
    if names.is_empty() {
        return Err(BatchError::InvalidConfig("fleet is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut plans: Vec<FlightPlan> = (0..cfg.count)
        .map(|_| {
            let o = rng.gen_range(0..free.len());
            let mut d = rng.gen_range(0..free.len() - 1);
            if d >= o {
                d += 1;
            }
            let aircraft = names[rng.gen_range(0..names.len())];
            let u: f64 = rng.gen();
            FlightPlan {
                id: 0,
                origin: grid.center(free[o]),
                destination: grid.center(free[d]),
                t_dep: u * cfg.window,
                aircraft: aircraft.to_string(),
            }
        })
        .collect();
    plans.sort_by(|a, b| a.t_dep.total_cmp(&b.t_dep));
    for (n, p) in plans.iter_mut().enumerate() {
        p.id = n as u64 + 1;
    }
    Ok(plans)
}

/// Cell-aligned rectangular buildings of 1 to 4 cells per side, placed at
/// random until every layer reaches its coverage target. Each new building
/// rises to the highest layer still short of its target, so upper layers
/// fill first and lower layers are topped up afterwards.
pub fn synthetic_buildings(grid: &GridSpec, coverage: &[f64], seed: u64) -> Vec<BuildingFootprint> {
    let (ni, nj, nk) = grid.dims();
    let cells = (ni * nj) as usize;
    let targets: Vec<usize> = (0..nk as usize)
        .map(|k| (coverage.get(k).copied().unwrap_or(0.0) * cells as f64).round() as usize)
        .collect();
    let mut column = vec![0u32; cells];
    let mut counts = vec![0usize; nk as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let [ox, oy, oz] = grid.origin();
    let (a, h) = (grid.side(), grid.height());
    let mut out = Vec::new();
    // bounded so unreachable targets cannot loop forever
    for _ in 0..cells * 8 {
        let Some(top) = (0..nk as usize).rev().find(|&k| counts[k] < targets[k]) else {
            break;
        };
        let tier = top as u32 + 1;
        let (w, d) = (
            rng.gen_range(1..=4u32).min(ni),
            rng.gen_range(1..=4u32).min(nj),
        );
        let (i0, j0) = (rng.gen_range(0..=ni - w), rng.gen_range(0..=nj - d));
        let mut raised = false;
        for j in j0..j0 + d {
            for i in i0..i0 + w {
                let c = (j * ni + i) as usize;
                if column[c] < tier {
                    for k in column[c]..tier {
                        counts[k as usize] += 1;
                    }
                    column[c] = tier;
                    raised = true;
                }
            }
        }
        if raised {
            let (x0, y0) = (ox + i0 as f64 * a, oy + j0 as f64 * a);
            let (x1, y1) = (x0 + w as f64 * a, y0 + d as f64 * a);
            out.push(BuildingFootprint {
                polygon: vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]],
                height: (oz + (tier as f64 - 0.5) * h).max(f64::MIN_POSITIVE),
            });
        }
    }
    out
}
