use super::*;
use crate::grid::{BoundaryKind, FieldSet, GridSpec};
use crate::scenarios::{gen_channel_flood, gen_dam_break, gen_five_drops, gen_inlet_flood, gen_vortex, ScenarioConfig};
use crate::timestep::cfl_dt;

/// Runs `steps` steps of `cfg` with `exec` from the scenario's initial state.
fn advance(cfg: &ScenarioConfig, exec: ExecutorKind, steps: u64) -> FieldSet {
    let mut fs = cfg.initial_state().unwrap();
    let mut solver = Solver::new(&fs, exec, cfg.policy, cfg.physics, cfg.boundaries).unwrap();
    let mut out = fs.clone();
    let mut dt = cfl_dt(&fs, &cfg.policy, &cfg.physics).unwrap();
    for n in 0..steps {
        let stats = solver.step_into(&fs, &mut out, dt, n).unwrap();
        std::mem::swap(&mut fs, &mut out);
        dt = stats.dt_next;
    }
    fs
}

fn all_executors() -> Vec<ExecutorKind> {
    vec![
        ExecutorKind::Tiled { tile: 16 },
        ExecutorKind::Tiled { tile: 8 },
        ExecutorKind::Tiled { tile: 5 },
        ExecutorKind::Decomposed { workers: 2, inner: InnerKind::Naive },
        ExecutorKind::Decomposed { workers: 3, inner: InnerKind::Naive },
        ExecutorKind::Decomposed { workers: 4, inner: InnerKind::Tiled { tile: 8 } },
    ]
}

#[test]
fn still_water_is_a_fixed_point_for_every_executor() {
    let spec = GridSpec::new(20, 17, 1.0, 1.0).unwrap();
    let fs = FieldSet::still_water(spec, 1.0);
    let mut execs = all_executors();
    execs.push(ExecutorKind::Naive);
    for exec in execs {
        let r = step(&fs, exec, &StabilityPolicy::default(), &PhysicsParams::default(), &Boundaries::reflective(), 0.25, 0)
            .unwrap();
        assert_eq!(r.state.t, 0.25);
        let mut expect = fs.clone();
        expect.t = 0.25;
        assert!(r.state.bit_eq(&expect), "{exec}");
        assert_eq!(r.dt_used, 0.25);
    }
}

#[test]
fn every_scenario_is_executor_independent() {
    let scenarios = [
        gen_five_drops(41, false).unwrap(),
        gen_inlet_flood(37).unwrap(),
        gen_channel_flood(37).unwrap(),
        gen_vortex(40).unwrap(),
        {
            let mut c = gen_dam_break(64, 1.0, 0.5).unwrap();
            c.grid.ny = 16;
            c
        },
    ];
    for cfg in &scenarios {
        let reference = advance(cfg, ExecutorKind::Naive, 60);
        for exec in all_executors() {
            let got = advance(cfg, exec, 60);
            assert!(got.bit_eq(&reference), "{} with {exec}", cfg.name);
        }
    }
}

#[test]
fn naive_and_tiled_agree_over_100_steps() {
    let cfg = gen_five_drops(65, false).unwrap();
    let a = advance(&cfg, ExecutorKind::Naive, 100);
    let b = advance(&cfg, ExecutorKind::tiled(), 100);
    assert!(a.bit_eq(&b));
}

#[test]
fn decomposed_four_matches_naive_on_128_five_drops() {
    let cfg = gen_five_drops(128, false).unwrap();
    let a = advance(&cfg, ExecutorKind::Naive, 200);
    let b = advance(&cfg, ExecutorKind::decomposed(4), 200);
    assert!(a.bit_eq(&b));
}

#[test]
fn shrunk_halo_is_detected() {
    let cfg = gen_five_drops(41, false).unwrap();
    let reference = advance(&cfg, ExecutorKind::Naive, 20);
    for exec in [ExecutorKind::Tiled { tile: 8 }, ExecutorKind::decomposed(4)] {
        let mut fs = cfg.initial_state().unwrap();
        let mut solver = Solver::new(&fs, exec, cfg.policy, cfg.physics, cfg.boundaries).unwrap().with_committed_halo(1);
        let mut dt = cfl_dt(&fs, &cfg.policy, &cfg.physics).unwrap();
        for n in 0..20 {
            let r = solver.step(&fs, dt, n).unwrap();
            fs = r.state;
            dt = r.dt_next;
        }
        assert!(!fs.bit_eq(&reference), "{exec} with a 1-cell halo should differ");
    }
}

#[test]
fn halo_exchange_is_counted() {
    let spec = GridSpec::new(128, 128, 1.0, 1.0).unwrap();
    let fs = FieldSet::still_water(spec, 1.0);
    let mut solver = Solver::new(
        &fs,
        ExecutorKind::decomposed(2),
        StabilityPolicy::default(),
        PhysicsParams::default(),
        Boundaries::reflective(),
    )
    .unwrap();
    let mut out = fs.clone();
    let stats = solver.step_into(&fs, &mut out, 0.1, 0).unwrap();
    assert_eq!(stats.exchanged_values, 1536);
    assert_eq!(stats.redundant_predictor_rows, 2);
    let names: Vec<_> = solver.kernel_times().entries().iter().map(|(n, _)| *n).collect();
    assert!(names.contains(&"halo_exchange"));
}

#[test]
fn naive_times_every_planned_kernel() {
    let fs = FieldSet::still_water(GridSpec::new(8, 8, 1.0, 1.0).unwrap(), 1.0);
    let mut solver =
        Solver::new(&fs, ExecutorKind::Naive, StabilityPolicy::default(), PhysicsParams::default(), Boundaries::reflective())
            .unwrap();
    solver.step(&fs, 0.1, 0).unwrap();
    let names: Vec<_> = solver.kernel_times().entries().iter().map(|(n, _)| *n).collect();
    let planned: Vec<_> = solver.plan().kernels().iter().map(|k| k.name()).collect();
    assert_eq!(names, planned);
}

/// A pool with one nearly dry cell between strongly diverging neighbours.
fn draining_state() -> FieldSet {
    let spec = GridSpec::new(24, 20, 1.0, 1.0).unwrap();
    let mut fs = FieldSet::still_water(spec, 1.0);
    let k = 9 * 24 + 13;
    fs.h[k] = 0.01;
    fs.qx[k + 1] = 1.5;
    fs.qx[k - 1] = -1.5;
    fs.qy[k + 24] = 1.5;
    fs.qy[k - 24] = -1.5;
    fs
}

#[test]
fn instability_reports_the_same_cell_for_every_executor() {
    let fs = draining_state();
    let pol = StabilityPolicy::default();
    let p = PhysicsParams::default();
    let dt = 0.1;
    let mut execs = all_executors();
    execs.push(ExecutorKind::Naive);
    let mut seen = Vec::new();
    for exec in execs {
        for step_index in [0, 1] {
            let err = step(&fs, exec, &pol, &p, &Boundaries::reflective(), dt, step_index).unwrap_err();
            match &err {
                StepError::Instability { i, j, t, .. } => {
                    assert_eq!(*t, dt);
                    seen.push((step_index, *i, *j, err.to_string()));
                }
                other => panic!("{other:?}"),
            }
        }
    }
    for s in &seen {
        let first = seen.iter().find(|f| f.0 == s.0).unwrap();
        assert_eq!(s, first);
    }
}

#[test]
fn failed_step_leaves_the_committed_state_intact() {
    let fs = draining_state();
    let before = fs.clone();
    let mut solver =
        Solver::new(&fs, ExecutorKind::Naive, StabilityPolicy::default(), PhysicsParams::default(), Boundaries::reflective())
            .unwrap();
    let mut out = fs.clone();
    assert!(solver.step_into(&fs, &mut out, 0.1, 0).is_err());
    assert!(fs.bit_eq(&before));
}

#[test]
fn collapse_is_reported() {
    let fs = FieldSet::still_water(GridSpec::new(8, 8, 1.0, 1.0).unwrap(), 1.0);
    let pol = StabilityPolicy { dt_min: 1.0, ..StabilityPolicy::default() };
    let err = step(&fs, ExecutorKind::Naive, &pol, &PhysicsParams::default(), &Boundaries::reflective(), 0.1, 0)
        .unwrap_err();
    assert!(matches!(err, StepError::StepCollapse { dt_min, .. } if dt_min == 1.0), "{err:?}");
}

#[test]
fn bad_configurations_are_rejected() {
    let fs = FieldSet::still_water(GridSpec::new(10, 10, 1.0, 1.0).unwrap(), 1.0);
    let mk = |e| Solver::new(&fs, e, StabilityPolicy::default(), PhysicsParams::default(), Boundaries::reflective());
    assert!(matches!(mk(ExecutorKind::Tiled { tile: 3 }), Err(StepError::Config(_))));
    assert!(matches!(mk(ExecutorKind::decomposed(4)), Err(StepError::Config(_))));
    assert!(matches!(mk(ExecutorKind::decomposed(0)), Err(StepError::Config(_))));
    assert!(mk(ExecutorKind::decomposed(2)).is_ok());
}

#[test]
fn executor_kinds_parse_and_print() {
    for s in ["naive", "tiled:16", "tiled:8", "decomposed:4", "decomposed:2:tiled:8"] {
        assert_eq!(ExecutorKind::parse(s).unwrap().to_string(), s);
    }
    assert_eq!(ExecutorKind::parse("tiled").unwrap(), ExecutorKind::Tiled { tile: 16 });
    assert!(ExecutorKind::parse("gpu").is_err());
    assert!(ExecutorKind::parse("decomposed:x").is_err());
}

#[test]
fn zero_end_time_takes_no_steps() {
    let cfg = ScenarioConfig { t_end: 0.0, ..gen_five_drops(33, false).unwrap() };
    let out = run(&cfg).unwrap();
    assert_eq!(out.report.steps, 0);
    assert!(out.state.bit_eq(&cfg.initial_state().unwrap()));
}

#[test]
fn still_water_run_lands_on_t_end() {
    let cfg = ScenarioConfig { t_end: 100.0, ..ScenarioConfig::default() };
    let out = run(&cfg).unwrap();
    let dt = 0.9 * (1.0 / 9.81f64.sqrt());
    assert_eq!(out.report.steps, (100.0 / dt).ceil() as u64);
    assert_eq!(out.state.t, 100.0);
    let mut expect = cfg.initial_state().unwrap();
    expect.t = 100.0;
    assert!(out.state.bit_eq(&expect));
}

#[test]
fn run_reports_match_across_executors() {
    let base = ScenarioConfig { t_end: 10.0, ..gen_five_drops(65, false).unwrap() };
    let reference = run(&base).unwrap();
    for exec in [ExecutorKind::tiled(), ExecutorKind::decomposed(4)] {
        let out = run(&ScenarioConfig { executor: exec, ..base.clone() }).unwrap();
        assert_eq!(out.report.physical_summary(), reference.report.physical_summary(), "{exec}");
        assert!(out.state.bit_eq(&reference.state));
    }
    let text = reference.report.to_string();
    assert!(text.contains("steps: ") && text.contains("kernel_time_s.predictor: "), "{text}");
}

#[test]
fn resume_from_checkpoint_is_exact() {
    let cfg = ScenarioConfig { t_end: 12.0, ..gen_five_drops(41, false).unwrap() };
    let whole = run(&cfg).unwrap();
    let mut first = Simulation::new(&cfg).unwrap();
    first.advance(17).unwrap();
    let ck = first.checkpoint();
    let rest = Simulation::resume(&cfg, ck).unwrap().finish().unwrap();
    assert!(rest.state.bit_eq(&whole.state));
    assert_eq!(rest.report.steps + 17, whole.report.steps);
}

#[test]
fn snapshots_follow_the_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        t_end: 5.0,
        snapshot_every: 1.0,
        output_dir: Some(dir.path().to_path_buf()),
        ..gen_five_drops(33, false).unwrap()
    };
    let out = run(&cfg).unwrap();
    // One snapshot per whole second before t_end, then the final state.
    assert_eq!(out.report.snapshots.len(), 5);
    for p in &out.report.snapshots {
        let snap = crate::io::read_snapshot(&mut std::fs::File::open(p).unwrap()).unwrap();
        assert!(snap.state.h.iter().all(|h| h.is_finite()));
    }
    let last = out.report.snapshots.last().unwrap();
    assert!(last.to_string_lossy().ends_with("five_drops_final.sws"));
}

#[test]
fn inflow_volume_matches_the_prescribed_discharge() {
    let cfg = ScenarioConfig { t_end: 50.0, ..gen_inlet_flood(41).unwrap() };
    let out = run(&cfg).unwrap();
    let BoundaryKind::InflowDischarge { q_n, .. } = cfg.boundaries.west else { panic!() };
    let expect = q_n * 41.0 * 50.0;
    let grown = out.report.final_volume - out.report.initial_volume;
    assert!((grown - expect).abs() / expect < 1e-9, "{grown} vs {expect}");
    assert!((out.report.boundary_inflow - expect).abs() < 1e-9 * expect);
}
