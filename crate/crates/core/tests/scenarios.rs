mod common;

use airmatrix_core::batch::{
    generate_scenario, plan_baseline, plan_fcfs, Environment, FlightPlan, ScenarioConfig,
};
use airmatrix_core::grid::{BlockSet, GridSpec};
use airmatrix_core::occupancy::{duplicate_occupancy_time, rasterize_buildings};
use airmatrix_core::performance::Fleet;
use airmatrix_core::reporting::{compare, conflict_curve, density_sweep, heatmap, spearman};
use airmatrix_core::search::CfaOptions;
use common::*;
use std::path::Path;

#[test]
fn crossing_pair_conflicts_only_in_baseline() {
    let g = GridSpec::with_defaults(9, 9).unwrap();
    let env = Environment::new(
        g.clone(),
        Fleet::reference(),
        BlockSet::new(&g),
        0.6,
        CfaOptions::default(),
    )
    .unwrap();
    let plan = |id, o: [f64; 3], d: [f64; 3]| FlightPlan {
        id,
        origin: o,
        destination: d,
        t_dep: 0.0,
        aircraft: "DJI Phantom 4".into(),
    };
    let plans = [
        plan(1, [10.0, 90.0, 20.0], [170.0, 90.0, 20.0]),
        plan(2, [90.0, 10.0, 20.0], [90.0, 170.0, 20.0]),
    ];
    let base = plan_baseline(&plans, &env, 1);
    assert!(duplicate_occupancy_time(&base.trajectories, 1.0) > 0.0);
    let cfa = plan_fcfs(&plans, &env);
    assert!(cfa.failures.is_empty());
    assert_eq!(duplicate_occupancy_time(&cfa.trajectories, 0.1), 0.0);
    for (b, c) in base.trajectories.iter().zip(&cfa.trajectories) {
        assert!(c.flight_time >= b.flight_time - 1e-9);
    }
}

#[test]
fn reporting_invariants_on_a_full_scenario() {
    let (cfg, env, plans) = reference_scenario(11, 300, 300.0);
    let cmp = compare(&plans, &env, cfg.dt, 0);

    assert!(conflict_curve(&cmp.cfa.trajectories, cfg.dt)
        .iter()
        .all(|v| *v == 0.0));
    let curve = &cmp.baseline_curve;
    assert!(curve.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(
        *curve.last().unwrap(),
        duplicate_occupancy_time(&cmp.baseline.trajectories, cfg.dt)
    );

    let map = heatmap(&cmp.cfa.trajectories, &env.grid);
    let flown: f64 = cmp.cfa.trajectories.iter().map(|t| t.flight_time).sum();
    assert!(((map.total() - flown) / flown).abs() <= 1e-6);
    assert!(map.layers.iter().flatten().flatten().all(|v| *v >= 0.0));
    for b in env.buildings.iter(&env.grid) {
        assert_eq!(map.layers[b.k as usize][b.i as usize][b.j as usize], 0.0);
    }

    let d = &cmp.delays;
    let mut running = 0.0;
    for (f, acc) in d.flights.iter().zip(&d.accumulated) {
        running += f.delay_s;
        assert_eq!(running, *acc);
        assert!(f.delay_s >= 0.0);
    }
    assert_eq!(running, d.total_delay);

    let index: Vec<f64> = (0..d.flights.len()).map(|n| n as f64).collect();
    let delays: Vec<f64> = d.flights.iter().map(|f| f.delay_s).collect();
    assert!(spearman(&index, &delays) > 0.0);
}

#[test]
fn prefix_property_on_small_scenarios() {
    for seed in 0..3 {
        let g = GridSpec::with_defaults(12, 12).unwrap();
        let cfg = ScenarioConfig::new(seed, 20, 30.0, g);
        let env = cfg.environment(Path::new(".")).unwrap();
        let plans = generate_scenario(&cfg, &env).unwrap();
        let full = plan_fcfs(&plans, &env);
        for n in [1, 10, 20] {
            let part = plan_fcfs(&plans[..n], &env);
            let expected: Vec<String> = full
                .trajectories
                .iter()
                .filter(|t| t.id <= plans[n - 1].id)
                .map(|t| t.to_json_line())
                .collect();
            let got: Vec<String> = part.trajectories.iter().map(|t| t.to_json_line()).collect();
            assert_eq!(got, expected);
        }
    }
}

#[test]
fn sweep_rows_are_deterministic() {
    let (cfg, env, _) = reference_scenario(4, 60, 300.0);
    let one = density_sweep(&[300.0], &cfg, &env, 1).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].flights_per_min, 12.0);
    let twice = density_sweep(&[300.0, 300.0], &cfg, &env, 2).unwrap();
    assert_eq!(twice[0], twice[1]);
    assert_eq!(twice[0], one[0]);
    assert!(density_sweep(&[], &cfg, &env, 1).is_err());
}

#[test]
fn dense_windows_conflict_more() {
    let (cfg, env, _) = reference_scenario(9, 300, 300.0);
    let rows = density_sweep(&[180.0, 600.0], &cfg, &env, 0).unwrap();
    assert!(rows[0].conflicts >= rows[1].conflicts);
}

/// Aircraft that climb slowly relative to cruise keep lower.
#[test]
fn top_layer_share_falls_with_speed_ratio() {
    let (cfg, env, plans) = reference_scenario(21, 300, 300.0);
    let share = |name: &str| {
        let spec = Fleet::reference().specs()[name];
        let fleet = Fleet::single(name, spec).unwrap();
        let single = Environment::new(
            env.grid.clone(),
            fleet,
            env.buildings.clone(),
            cfg.scale,
            cfg.cfa_options(),
        )
        .unwrap();
        let plans: Vec<FlightPlan> = plans
            .iter()
            .map(|p| FlightPlan {
                aircraft: name.into(),
                ..p.clone()
            })
            .collect();
        let out = plan_fcfs(&plans, &single);
        heatmap(&out.trajectories, &env.grid).layer_share(2)
    };
    let self_built = share("Self-Built Drone");
    let mavic = share("DJI Mavic Air");
    let phantom = share("DJI Phantom 4");
    assert!(
        self_built > mavic && mavic > phantom,
        "{self_built} {mavic} {phantom}"
    );
}

#[test]
fn synthetic_city_matches_reference_coverage() {
    let (_, env, plans) = reference_scenario(5, 300, 300.0);
    let counts: Vec<usize> = (0..3)
        .map(|k| env.buildings.count_on_layer(&env.grid, k))
        .collect();
    for (got, want) in counts.iter().zip([3925, 1286, 189]) {
        assert!(*got >= want && *got <= want + 16, "{counts:?}");
    }
    for p in &plans {
        for point in [p.origin, p.destination] {
            assert!(!env
                .buildings
                .contains(&env.grid, env.grid.block_of_point(point).unwrap()));
        }
    }
    assert_eq!(rasterize_buildings(&[], &env.grid).unwrap().len(), 0);
}
