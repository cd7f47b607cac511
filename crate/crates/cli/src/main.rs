mod manifest;

use airmatrix_core::batch::{
    generate_scenario, load_plans, write_plans_csv, BatchOutcome, BuildingSource, Environment,
    FlightPlan, ScenarioConfig, REFERENCE_COVERAGE,
};
use airmatrix_core::grid::GridSpec;
use airmatrix_core::performance::{Fleet, GRAVITY};
use airmatrix_core::reporting::{
    compare, conflict_curve, delay_report, density_sweep, heatmap, heatmap_layer_json,
    write_conflict_curve_csv, write_delays_csv, write_sweep_csv,
};
use airmatrix_core::search::{annotate_times, astar, cfa_star, Planner, Trajectory4D};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use manifest::Manifest;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "airmatrix",
    version,
    about = "Conflict-free 4D flight planning over a block grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded flight-plan list.
    Gen {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output file (.csv or .json); standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print drag coefficient, power limit and per-link speeds of each aircraft.
    Calibrate {
        /// Fleet JSON; the reference fleet when omitted.
        #[arg(long)]
        fleet: Option<PathBuf>,
        #[arg(long, default_value_t = 0.6)]
        scale: f64,
        /// Block side, metres.
        #[arg(long, default_value_t = 20.0)]
        side: f64,
        /// Layer height, metres.
        #[arg(long, default_value_t = 40.0)]
        height: f64,
        /// Emit JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// Plan one flight around buildings.
    Plan {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Take-off point `x,y,z` in metres.
        #[arg(long, value_parser = parse_point)]
        from: [f64; 3],
        /// Landing point `x,y,z` in metres.
        #[arg(long, value_parser = parse_point)]
        to: [f64; 3],
        #[arg(long, default_value_t = 0.0)]
        t_dep: f64,
        #[arg(long)]
        aircraft: Option<String>,
        #[arg(long, value_enum, default_value_t = PlannerArg::Cfastar)]
        planner: PlannerArg,
    },
    /// Plan a batch with both planners and write every report.
    Batch {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Plan file to use instead of generating flights.
        #[arg(long)]
        plans: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-flight wall-clock planning times (not digested).
        #[arg(long)]
        timings: bool,
    },
    /// Re-run the scenario over several departure windows.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated windows in seconds.
        #[arg(long, value_delimiter = ',', default_value = "180,240,300,420,600")]
        windows: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-layer utilization from a trajectory file.
    Heatmap {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long, value_enum, default_value_t = PlannerArg::Cfastar)]
        planner: PlannerArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Delay and conflict summary of a trajectory file holding both planners.
    Compare {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        /// Directory for delays.csv and conflict_curve.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, clap::ValueEnum)]
enum PlannerArg {
    Astar,
    Cfastar,
}

impl From<PlannerArg> for Planner {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Astar => Planner::Astar,
            PlannerArg::Cfastar => Planner::Cfastar,
        }
    }
}

/// Scenario file plus overriding flags. Without a file the base is a
/// 100 × 100 × 3 grid with synthetic buildings and the reference fleet.
#[derive(Args, Clone)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<usize>,
    /// Departure window, seconds.
    #[arg(long)]
    window: Option<f64>,
    /// Fraction of maximum speed flown, in (0, 1].
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    hover_threshold: Option<f64>,
    /// Sampling step of the duplicate-occupancy metric, seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Baseline planning threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

struct LoadedScenario {
    cfg: ScenarioConfig,
    base_dir: PathBuf,
    /// Files read, for the manifest.
    inputs: Vec<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<LoadedScenario> {
        let (mut cfg, base_dir, mut inputs) = match &self.scenario {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let cfg: ScenarioConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, dir, vec![path.clone()])
            }
            None => {
                let mut cfg =
                    ScenarioConfig::new(42, 300, 300.0, GridSpec::with_defaults(100, 100)?);
                cfg.buildings = BuildingSource::Synthetic {
                    coverage: REFERENCE_COVERAGE.to_vec(),
                };
                (cfg, PathBuf::new(), Vec::new())
            }
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.count {
            cfg.count = v;
        }
        if let Some(v) = self.window {
            cfg.window = v;
        }
        if let Some(v) = self.scale {
            cfg.scale = v;
        }
        if let Some(v) = self.hover_threshold {
            cfg.hover_threshold = v;
        }
        if let Some(v) = self.dt {
            cfg.dt = v;
        }
        cfg.validate()?;
        if let Some(airmatrix_core::batch::FleetSource::Path(p)) = &cfg.fleet {
            inputs.push(base_dir.join(p));
        }
        if let BuildingSource::File { path } = &cfg.buildings {
            inputs.push(base_dir.join(path));
        }
        Ok(LoadedScenario {
            cfg,
            base_dir,
            inputs,
        })
    }
}

impl LoadedScenario {
    fn environment(&self) -> Result<Environment> {
        Ok(self.cfg.environment(&self.base_dir)?)
    }

    /// Plans from `explicit`, else the config's plan file, else generated.
    fn plans(&mut self, env: &Environment, explicit: Option<&Path>) -> Result<Vec<FlightPlan>> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| self.cfg.plans.as_ref().map(|p| self.base_dir.join(p)));
        match path {
            Some(p) => {
                let plans = load_plans(&p)?;
                self.inputs.push(p);
                Ok(plans)
            }
            None => Ok(generate_scenario(&self.cfg, env)?),
        }
    }
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| "expected x,y,z".to_string())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn jsonl(trajs: &[&Trajectory4D]) -> Vec<u8> {
    let mut out = Vec::new();
    for t in trajs {
        out.extend_from_slice(t.to_json_line().as_bytes());
        out.push(b'\n');
    }
    out
}

fn read_trajectories(path: &Path) -> Result<Vec<Trajectory4D>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), n + 1))
        })
        .collect()
}

fn failures_csv(outcomes: &[(Planner, &BatchOutcome)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "planner", "kind", "message"])?;
    for (planner, out) in outcomes {
        for f in &out.failures {
            w.write_record([
                f.id.to_string(),
                planner.to_string(),
                f.error.kind().to_string(),
                f.error.to_string(),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

fn timings_csv(outcomes: &[(Planner, &BatchOutcome)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "planner", "seconds"])?;
    for (planner, out) in outcomes {
        for (id, d) in &out.timings {
            w.write_record([
                id.to_string(),
                planner.to_string(),
                d.as_secs_f64().to_string(),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

fn cmd_gen(args: &ScenarioArgs, out: Option<&Path>) -> Result<ExitCode> {
    let scenario = args.load()?;
    let env = scenario.environment()?;
    let plans = generate_scenario(&scenario.cfg, &env)?;
    match out {
        Some(path)
            if path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("json")) =>
        {
            write_file(path, serde_json::to_string_pretty(&plans)?.as_bytes())?
        }
        Some(path) => {
            let mut buf = Vec::new();
            write_plans_csv(&mut buf, &plans)?;
            write_file(path, &buf)?;
        }
        None => write_plans_csv(std::io::stdout().lock(), &plans)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_calibrate(
    fleet: Option<&Path>,
    scale: f64,
    side: f64,
    height: f64,
    json: bool,
) -> Result<ExitCode> {
    let fleet = match fleet {
        Some(p) => Fleet::from_json(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => Fleet::reference(),
    };
    let grid = GridSpec::new([0.0; 3], side, height, 1, 1, 1)?;
    let mut report = Vec::new();
    for a in fleet.iter() {
        let links = a
            .link_speeds(&grid, scale)?
            .into_iter()
            .map(|(link, speed)| {
                serde_json::json!({
                    "kind": link.kind,
                    "sign": link.sign,
                    "length_m": link.length,
                    "elevation_deg": link.elevation.to_degrees(),
                    "speed_mps": speed,
                    "time_s": link.length / speed,
                })
            })
            .collect::<Vec<_>>();
        report.push(serde_json::json!({
            "aircraft": a.name,
            "mass_kg": a.mass,
            "v_mv": a.v_mv,
            "v_mh": a.v_mh,
            "e": a.drag,
            "p_max_w": a.p_max,
            "gravity": GRAVITY,
            "scale": scale,
            "links": links,
        }));
    }
    let mut stdout = std::io::stdout().lock();
    if json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    for a in &report {
        writeln!(
            stdout,
            "{}  e={:.7}  P_max={:.3} W  (m={} kg, v_mv={} m/s, v_mh={} m/s, scale={})",
            a["aircraft"].as_str().unwrap_or_default(),
            a["e"].as_f64().unwrap_or_default(),
            a["p_max_w"].as_f64().unwrap_or_default(),
            a["mass_kg"],
            a["v_mv"],
            a["v_mh"],
            scale
        )?;
        for l in a["links"].as_array().into_iter().flatten() {
            writeln!(
                stdout,
                "  {:<12} {:<5} len {:>7.3} m  elev {:>7.3} deg  speed {:>7.4} m/s  time {:>7.4} s",
                l["kind"].as_str().unwrap_or_default(),
                l["sign"].as_str().unwrap_or_default(),
                l["length_m"].as_f64().unwrap_or_default(),
                l["elevation_deg"].as_f64().unwrap_or_default(),
                l["speed_mps"].as_f64().unwrap_or_default(),
                l["time_s"].as_f64().unwrap_or_default()
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_plan(
    args: &ScenarioArgs,
    from: [f64; 3],
    to: [f64; 3],
    t_dep: f64,
    aircraft: Option<&str>,
    planner: PlannerArg,
) -> Result<ExitCode> {
    let scenario = args.load()?;
    let env = scenario.environment()?;
    let name = match aircraft {
        Some(n) => n.to_string(),
        None => env
            .fleet
            .names()
            .next()
            .map(str::to_string)
            .unwrap_or_default(),
    };
    let Some(tt) = env.table(&name) else {
        bail!("unknown aircraft {name:?}");
    };
    if !(t_dep.is_finite() && t_dep >= 0.0) {
        bail!("departure time must be finite and non-negative");
    }
    let start = env.grid.block_of_point(from)?;
    let goal = env.grid.block_of_point(to)?;
    let result = match planner {
        PlannerArg::Astar => astar(&env.grid, &env.buildings, start, goal, tt)
            .and_then(|p| annotate_times(&env.grid, tt, &p, &vec![0.0; p.len()], t_dep)),
        PlannerArg::Cfastar => cfa_star(
            &env.grid,
            &env.ledger(),
            start,
            goal,
            tt,
            t_dep,
            env.options,
        ),
    };
    match result {
        Ok(visits) => {
            let traj = Trajectory4D::new(1, name, t_dep, visits, planner.into());
            println!("{}", traj.to_json_line());
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("flight failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_batch(
    args: &ScenarioArgs,
    plans_path: Option<&Path>,
    out: &Path,
    timings: bool,
) -> Result<ExitCode> {
    let mut scenario = args.load()?;
    let env = scenario.environment()?;
    let plans = scenario.plans(&env, plans_path)?;
    let cmp = compare(&plans, &env, scenario.cfg.dt, args.jobs);
    create_dir(out)?;

    let mut manifest = Manifest::new(&scenario.cfg);
    for input in &scenario.inputs {
        manifest.add_input(input)?;
    }
    let both: Vec<&Trajectory4D> = cmp
        .baseline
        .trajectories
        .iter()
        .chain(&cmp.cfa.trajectories)
        .collect();
    let mut artifacts: Vec<(String, Vec<u8>)> = vec![("trajectories.jsonl".into(), jsonl(&both))];
    let mut buf = Vec::new();
    write_plans_csv(&mut buf, &plans)?;
    artifacts.push(("plans.csv".into(), buf));
    let mut buf = Vec::new();
    write_delays_csv(&mut buf, &cmp.delays)?;
    artifacts.push(("delays.csv".into(), buf));
    let mut buf = Vec::new();
    write_conflict_curve_csv(&mut buf, &cmp.baseline_curve)?;
    artifacts.push(("conflict_curve.csv".into(), buf));
    let map = heatmap(&cmp.cfa.trajectories, &env.grid);
    for k in 0..map.layers.len() {
        artifacts.push((
            format!("heatmap_{k}.json"),
            heatmap_layer_json(&map, k).into_bytes(),
        ));
    }
    let outcomes = [
        (Planner::Astar, &cmp.baseline),
        (Planner::Cfastar, &cmp.cfa),
    ];
    artifacts.push(("failures.csv".into(), failures_csv(&outcomes)?));
    let summary = serde_json::json!({
        "flights": plans.len(),
        "baseline_planned": cmp.baseline.trajectories.len(),
        "cfa_planned": cmp.cfa.trajectories.len(),
        "baseline_duplicate_block_seconds": cmp.baseline_curve.last().copied().unwrap_or(0.0),
        "baseline_conflict_events": cmp.baseline_conflict_events,
        "cfa_duplicate_block_seconds": cmp.cfa_curve.last().copied().unwrap_or(0.0),
        "total_delay_s": cmp.delays.total_delay,
        "max_flight_time_s": cmp.delays.max_flight_time,
    });
    artifacts.push(("summary.json".into(), serde_json::to_vec_pretty(&summary)?));

    for (name, bytes) in &artifacts {
        write_file(&out.join(name), bytes)?;
        manifest.add_artifact(name, bytes);
    }
    if timings {
        write_file(&out.join("timings.csv"), &timings_csv(&outcomes)?)?;
    }
    write_file(&out.join("manifest.json"), &manifest.to_bytes()?)?;

    eprintln!(
        "{} flights: baseline {} planned, {:.3} block-s duplicate occupancy; CFA* {} planned, total delay {:.3} s",
        plans.len(),
        cmp.baseline.trajectories.len(),
        cmp.baseline_curve.last().copied().unwrap_or(0.0),
        cmp.cfa.trajectories.len(),
        cmp.delays.total_delay
    );
    for (_, o) in &outcomes {
        for f in &o.failures {
            eprintln!("{f}");
        }
    }
    let failed = !cmp.baseline.failures.is_empty() || !cmp.cfa.failures.is_empty();
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_sweep(args: &ScenarioArgs, windows: &[f64], out: Option<&Path>) -> Result<ExitCode> {
    let scenario = args.load()?;
    let env = scenario.environment()?;
    if windows.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        bail!("windows must be positive");
    }
    let rows = density_sweep(windows, &scenario.cfg, &env, args.jobs)?;
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &rows)?;
            write_file(p, &buf)?;
        }
        None => write_sweep_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_heatmap(
    args: &ScenarioArgs,
    trajectories: &Path,
    planner: PlannerArg,
    out: &Path,
) -> Result<ExitCode> {
    let scenario = args.load()?;
    let grid = &scenario.cfg.grid;
    let wanted: Planner = planner.into();
    let trajs: Vec<Trajectory4D> = read_trajectories(trajectories)?
        .into_iter()
        .filter(|t| t.planner == wanted)
        .collect();
    if let Some(t) = trajs.iter().find(|t| !t.is_well_formed(grid)) {
        bail!("trajectory {} does not fit the scenario grid", t.id);
    }
    let map = heatmap(&trajs, grid);
    create_dir(out)?;
    for k in 0..map.layers.len() {
        write_file(
            &out.join(format!("heatmap_{k}.json")),
            heatmap_layer_json(&map, k).as_bytes(),
        )?;
        println!(
            "layer {k}: {:.2} block-seconds ({:.1}%)",
            map.layer_total(k),
            100.0 * map.layer_share(k)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(trajectories: &Path, dt: f64, out: Option<&Path>) -> Result<ExitCode> {
    if !(dt.is_finite() && dt > 0.0) {
        bail!("dt must be positive");
    }
    let all = read_trajectories(trajectories)?;
    let (baseline, cfa): (Vec<_>, Vec<_>) =
        all.into_iter().partition(|t| t.planner == Planner::Astar);
    let ok: std::collections::HashSet<u64> = cfa.iter().map(|t| t.id).collect();
    let base_ok: std::collections::HashSet<u64> = baseline.iter().map(|t| t.id).collect();
    let common_base: Vec<_> = baseline
        .iter()
        .filter(|t| ok.contains(&t.id))
        .cloned()
        .collect();
    let common_cfa: Vec<_> = cfa
        .iter()
        .filter(|t| base_ok.contains(&t.id))
        .cloned()
        .collect();
    let report = delay_report(&common_base, &common_cfa)?;
    let base_curve = conflict_curve(&baseline, dt);
    let cfa_curve = conflict_curve(&cfa, dt);
    println!("flights compared: {}", report.flights.len());
    println!("total delay: {:.3} s", report.total_delay);
    println!("max flight time: {:.3} s", report.max_flight_time);
    println!(
        "baseline duplicate occupancy: {:.3} block-s",
        base_curve.last().copied().unwrap_or(0.0)
    );
    println!(
        "baseline conflict events: {}",
        airmatrix_core::occupancy::conflict_event_count(&baseline)
    );
    println!(
        "CFA* duplicate occupancy: {:.3} block-s",
        cfa_curve.last().copied().unwrap_or(0.0)
    );
    if let Some(dir) = out {
        create_dir(dir)?;
        let mut buf = Vec::new();
        write_delays_csv(&mut buf, &report)?;
        write_file(&dir.join("delays.csv"), &buf)?;
        let mut buf = Vec::new();
        write_conflict_curve_csv(&mut buf, &base_curve)?;
        write_file(&dir.join("conflict_curve.csv"), &buf)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Gen { scenario, out } => cmd_gen(scenario, out.as_deref()),
        Command::Calibrate {
            fleet,
            scale,
            side,
            height,
            json,
        } => cmd_calibrate(fleet.as_deref(), *scale, *side, *height, *json),
        Command::Plan {
            scenario,
            from,
            to,
            t_dep,
            aircraft,
            planner,
        } => cmd_plan(scenario, *from, *to, *t_dep, aircraft.as_deref(), *planner),
        Command::Batch {
            scenario,
            plans,
            out,
            timings,
        } => cmd_batch(scenario, plans.as_deref(), out, *timings),
        Command::Sweep {
            scenario,
            windows,
            out,
        } => cmd_sweep(scenario, windows, out.as_deref()),
        Command::Heatmap {
            scenario,
            trajectories,
            planner,
            out,
        } => cmd_heatmap(scenario, trajectories, *planner, out),
        Command::Compare {
            trajectories,
            dt,
            out,
        } => cmd_compare(trajectories, *dt, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
