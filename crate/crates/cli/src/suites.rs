//! Validation suites. Each check prints its measured value next to the
//! threshold it is held to.

use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swe_core::executor::{run, Checkpoint, ExecutorKind, InnerKind, RunError, Simulation, Solver, StepError};
use swe_core::grid::{Boundaries, BoundaryKind, FieldSet, GridSpec};
use swe_core::io::{read_snapshot, snapshot_bytes, write_snapshot};
use swe_core::oracle::{conservation_report, relative_l2, sample_profile, solve_stoker, VolumeSample};
use swe_core::scenarios::{gen_dam_break, gen_five_drops, gen_inlet_flood, generate, InitialCondition, ScenarioConfig};
use swe_core::scheme::PhysicsParams;
use swe_core::timestep::{cfl_dt, compute_dt_with_workers, StabilityPolicy};

use crate::bench::{bench_sizes, BenchRow};
use crate::error::{run_kind, ErrorKind};

pub const SUITES: [&str; 9] = [
    "equivalence",
    "dt_determinism",
    "still_water",
    "conservation",
    "dam_break",
    "stability_guard",
    "checkpoint",
    "scaling",
    "datasets",
];

/// Frozen regression bound for closed-box volume drift. The measured drift
/// is at the level of summation rounding, about 1e-14.
pub const DRIFT_REGRESSION_BOUND: f64 = 1e-12;
pub const DRIFT_TARGET: f64 = 1e-8;
pub const DAM_BREAK_L2_MAX: f64 = 0.03;
pub const PLATEAU_MAX: f64 = 0.02;
pub const SCALING_RANGE: (f64, f64) = (3.2, 4.8);

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: String,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: impl Into<String>, threshold: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), measured: measured.into(), threshold: threshold.into(), pass }
    }

    fn at_most(name: &str, value: f64, max: f64) -> Self {
        Self::new(name, format!("{value:.3e}"), format!("<= {max:e}"), value <= max)
    }

    fn runtime(elapsed: Duration, budget_s: f64) -> Self {
        let s = elapsed.as_secs_f64();
        Self::new("runtime", format!("{s:.2} s"), format!("< {budget_s} s"), s < budget_s)
    }

    /// A value reported for information only.
    fn info(name: &str, measured: impl Into<String>) -> Self {
        Self::new(name, measured, "reported", true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{mark} {}/{}: measured {} (threshold {})", self.suite, c.name, c.measured, c.threshold)?;
        }
        Ok(())
    }
}

/// Runs one suite. A suite that cannot run at all reports a single failed check.
pub fn run_suite(name: &str) -> Option<SuiteReport> {
    let suite = *SUITES.iter().find(|s| **s == name)?;
    let started = Instant::now();
    let result = match suite {
        "equivalence" => equivalence(None),
        "dt_determinism" => dt_determinism(),
        "still_water" => still_water(),
        "conservation" => conservation(),
        "dam_break" => dam_break(),
        "stability_guard" => stability_guard(),
        "checkpoint" => checkpoint(),
        "scaling" => scaling(),
        "datasets" => datasets(),
        _ => unreachable!(),
    };
    let mut checks = result.unwrap_or_else(|e| vec![Check::new("setup", format!("{e:#}"), "runs", false)]);
    if let Some(budget) = runtime_budget_s(suite) {
        checks.push(Check::runtime(started.elapsed(), budget));
    }
    Some(SuiteReport { suite, checks })
}

fn runtime_budget_s(suite: &str) -> Option<f64> {
    match suite {
        "equivalence" | "checkpoint" => Some(60.0),
        "dam_break" => Some(30.0),
        "scaling" => Some(120.0),
        _ => None,
    }
}

/// Runs `steps` steps with the solver directly, optionally with a
/// deliberately wrong committed halo.
fn solver_steps(cfg: &ScenarioConfig, exec: ExecutorKind, steps: u64, halo: Option<usize>) -> Result<FieldSet, StepError> {
    let mut fs = cfg.initial_state().map_err(|e| StepError::Config(e.to_string()))?;
    let mut solver = Solver::new(&fs, exec, cfg.policy, cfg.physics, cfg.boundaries)?;
    if let Some(h) = halo {
        solver = solver.with_committed_halo(h);
    }
    let mut out = fs.clone();
    let mut dt = cfl_dt(&fs, &cfg.policy, &cfg.physics)?;
    for n in 0..steps {
        let stats = solver.step_into(&fs, &mut out, dt, n)?;
        std::mem::swap(&mut fs, &mut out);
        dt = stats.dt_next;
    }
    Ok(fs)
}

pub const EQUIVALENCE_EXECUTORS: [ExecutorKind; 5] = [
    ExecutorKind::Tiled { tile: 16 },
    ExecutorKind::Tiled { tile: 8 },
    ExecutorKind::Decomposed { workers: 2, inner: InnerKind::Naive },
    ExecutorKind::Decomposed { workers: 4, inner: InnerKind::Naive },
    ExecutorKind::Decomposed { workers: 8, inner: InnerKind::Naive },
];

fn first_difference(a: &[u8], b: &[u8]) -> Option<usize> {
    if a.len() != b.len() {
        return Some(a.len().min(b.len()));
    }
    a.iter().zip(b).position(|(x, y)| x != y)
}

/// Five Drops 128², 200 steps: SWS1 bytes of every executor against naive.
/// `halo` overrides the committed halo of the non-naive executors.
pub fn equivalence(halo: Option<usize>) -> Result<Vec<Check>> {
    let cfg = gen_five_drops(128, false)?;
    let g = cfg.physics.g;
    let reference = snapshot_bytes(&solver_steps(&cfg, ExecutorKind::Naive, 200, None)?, g);
    let mut checks = Vec::new();
    for exec in EQUIVALENCE_EXECUTORS {
        let bytes = snapshot_bytes(&solver_steps(&cfg, exec, 200, halo)?, g);
        let measured = match first_difference(&bytes, &reference) {
            None => "identical".to_string(),
            Some(at) => format!("differs from byte {at}"),
        };
        checks.push(Check::new(format!("naive_vs_{exec}"), measured.clone(), "bit-identical", measured == "identical"));
    }
    Ok(checks)
}

/// Still or perturbed random states of random size, reproducible from `seed`.
pub fn random_states(count: usize, seed: u64) -> Vec<FieldSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|n| {
            let spec = GridSpec::new(rng.gen_range(8..70), rng.gen_range(8..70), rng.gen_range(0.5..2.0), 1.0).unwrap();
            let mut fs = FieldSet::still_water(spec, rng.gen_range(0.1..5.0));
            if n % 2 == 1 {
                for k in 0..spec.cells() {
                    fs.h[k] *= 1.0 + rng.gen_range(-0.5..0.5);
                    fs.qx[k] = fs.h[k] * rng.gen_range(-2.0..2.0);
                    fs.qy[k] = fs.h[k] * rng.gen_range(-2.0..2.0);
                }
            }
            fs
        })
        .collect()
}

fn dt_determinism() -> Result<Vec<Check>> {
    let pol = StabilityPolicy::default();
    let p = PhysicsParams::default();
    let states = random_states(50, 0x5eed);
    let mut agree = 0;
    for fs in &states {
        let reference = compute_dt_with_workers(fs, &pol, &p, f64::INFINITY, 1)?;
        let mut same = true;
        for workers in [2, 4, 8] {
            same &= compute_dt_with_workers(fs, &pol, &p, f64::INFINITY, workers)?.to_bits() == reference.to_bits();
        }
        agree += same as usize;
    }
    Ok(vec![Check::new(
        "workers_1_2_4_8",
        format!("{agree}/{} states bit-identical", states.len()),
        "all states",
        agree == states.len(),
    )])
}

fn fields_bit_equal(a: &FieldSet, b: &FieldSet) -> bool {
    let same = |x: &[f64], y: &[f64]| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
    same(&a.h, &b.h) && same(&a.qx, &b.qx) && same(&a.qy, &b.qy) && same(&a.z, &b.z)
}

fn still_water() -> Result<Vec<Check>> {
    let cfg = ScenarioConfig {
        name: "still_water".into(),
        grid: GridSpec::new(64, 64, 1.0, 1.0)?,
        t_end: 1e9,
        initial: InitialCondition::FlatPool { depth: 1.0 },
        ..ScenarioConfig::default()
    };
    let initial = cfg.initial_state()?;
    let mut checks = Vec::new();
    for exec in [ExecutorKind::Naive, ExecutorKind::tiled(), ExecutorKind::decomposed(4)] {
        let mut sim = Simulation::new(&ScenarioConfig { executor: exec, ..cfg.clone() })?;
        let mut first_change = None;
        for n in 0..1000u64 {
            sim.step_once()?;
            if first_change.is_none() && !fields_bit_equal(sim.state(), &initial) {
                first_change = Some(n);
            }
        }
        let measured = match first_change {
            None => "1000/1000 steps unchanged".to_string(),
            Some(n) => format!("changed at step {n}"),
        };
        checks.push(Check::new(format!("fixed_point_{exec}"), measured, "every state bit-equal", first_change.is_none()));
    }
    Ok(checks)
}

/// Largest relative volume drift over `steps` steps, counting nominal inflow.
fn volume_drift(cfg: &ScenarioConfig, steps: u64) -> Result<f64> {
    let mut sim = Simulation::new(cfg)?;
    let (_, ly) = cfg.grid.extent();
    let inflow_rate: f64 = match cfg.boundaries.west {
        BoundaryKind::InflowDischarge { q_n, .. } => q_n * ly,
        _ => 0.0,
    };
    let mut samples = vec![VolumeSample { volume: sim.state().total_volume(), net_inflow: 0.0 }];
    for _ in 0..steps {
        if !sim.step_once()? {
            bail!("{} reached t_end before {steps} steps", cfg.name);
        }
        let s = sim.state();
        samples.push(VolumeSample { volume: s.total_volume(), net_inflow: inflow_rate * s.t });
    }
    Ok(conservation_report(&samples))
}

fn conservation() -> Result<Vec<Check>> {
    let mut closed = gen_five_drops(65, false)?;
    closed.physics.nu_art = 0.0;
    closed.boundaries = Boundaries::reflective();
    let drift = volume_drift(&closed, 500)?;
    let mut inlet = gen_inlet_flood(65)?;
    inlet.physics.nu_art = 0.0;
    let inlet_drift = volume_drift(&inlet, 500)?;
    Ok(vec![
        Check::at_most("closed_box_drift", drift, DRIFT_TARGET),
        Check::at_most("closed_box_regression", drift, DRIFT_REGRESSION_BOUND),
        Check::at_most("inlet_drift_net_of_inflow", inlet_drift, DRIFT_TARGET),
    ])
}

/// Compares the final dam-break depth along the first row with the exact
/// solution. Returns `(relative L2, plateau error)`.
pub fn dam_break_errors(cells: usize) -> Result<(f64, f64)> {
    let cfg = gen_dam_break(cells, 1.0, 0.5)?;
    let InitialCondition::DamBreak1D { split_x, h_left, h_right } = cfg.initial else {
        bail!("dam-break generator returned another initial condition");
    };
    let out = run(&cfg)?;
    let fs = &out.state;
    let t = fs.t;
    let sol = solve_stoker(h_left, h_right, cfg.physics.g)?;
    let nx = fs.spec.nx;
    let xs: Vec<f64> = (0..nx).map(|i| (i as f64 + 0.5) * fs.spec.dx - split_x).collect();
    let exact: Vec<f64> = xs.iter().map(|&x| sample_profile(&sol, x, t).0).collect();
    let l2 = relative_l2(&fs.h[..nx], &exact);
    // Middle half of the star region, away from the smeared tail and shock.
    let (lo, hi) = (sol.tail_speed() * t, sol.shock_speed * t);
    let margin = 0.25 * (hi - lo);
    let plateau: Vec<f64> =
        (0..nx).filter(|&i| xs[i] > lo + margin && xs[i] < hi - margin).map(|i| fs.h[i]).collect();
    if plateau.is_empty() {
        bail!("star region has no cells at t={t}");
    }
    let mean = plateau.iter().sum::<f64>() / plateau.len() as f64;
    Ok((l2, (mean - sol.h_star).abs() / sol.h_star))
}

fn dam_break() -> Result<Vec<Check>> {
    let (l2, plateau) = dam_break_errors(400)?;
    Ok(vec![Check::at_most("relative_l2_depth", l2, DAM_BREAK_L2_MAX), Check::at_most("plateau_vs_h_star", plateau, PLATEAU_MAX)])
}

/// Thin pool with a strong radial outflow from a shallow centre. The centre
/// drains below `h_min` after a handful of committed steps.
pub fn draining_pool(n: usize) -> FieldSet {
    let spec = GridSpec::new(n, n, 1.0, 1.0).unwrap();
    let (depth, dip, u0, r) = (0.3, 0.5, 4.0, 4.0);
    let c = n as f64 / 2.0;
    let mut fs = FieldSet::still_water(spec, depth);
    for k in 0..spec.cells() {
        let (i, j) = spec.cell_coords(k);
        let (x, y) = (i as f64 + 0.5 - c, j as f64 + 0.5 - c);
        let e = (-(x * x + y * y) / (r * r)).exp();
        let h = depth * (1.0 - dip * e);
        fs.h[k] = h;
        fs.qx[k] = u0 * h * x / r * e;
        fs.qy[k] = u0 * h * y / r * e;
    }
    fs
}

/// Writes the draining pool as an initial snapshot under `dir` and returns a
/// scenario that starts from it and snapshots every half second into `dir/out`.
pub fn draining_scenario(dir: &Path) -> Result<ScenarioConfig> {
    let fs = draining_pool(41);
    let path = dir.join("drain_initial.sws");
    let mut file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_snapshot(&fs, 9.81, &mut file)?;
    Ok(ScenarioConfig {
        name: "drain".into(),
        grid: fs.spec,
        policy: StabilityPolicy { cfl: 0.5, h_min: 0.01, ..StabilityPolicy::default() },
        t_end: 50.0,
        snapshot_every: 0.5,
        initial: InitialCondition::Snapshot { path },
        output_dir: Some(dir.join("out")),
        ..ScenarioConfig::default()
    })
}

/// Reads every `.sws` file in `dir`; returns how many there were and how
/// many contain a non-finite value.
pub fn scan_snapshots(dir: &Path) -> Result<(usize, usize)> {
    let (mut total, mut bad) = (0, 0);
    if !dir.exists() {
        return Ok((0, 0));
    }
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "sws") {
            let snap = read_snapshot(&mut std::fs::File::open(&path)?)?;
            let s = &snap.state;
            total += 1;
            bad += !s.h.iter().chain(&s.qx).chain(&s.qy).chain(&s.z).all(|v| v.is_finite()) as usize;
        }
    }
    Ok((total, bad))
}

fn stability_guard() -> Result<Vec<Check>> {
    let dir = tempfile::tempdir()?;
    let cfg = draining_scenario(dir.path())?;
    let err = match run(&cfg) {
        Ok(out) => bail!("draining scenario finished at t={} without tripping the guard", out.state.t),
        Err(e) => e,
    };
    let located = matches!(&err, RunError::Step { source: StepError::Instability { .. }, .. });
    let kind = run_kind(&err);
    let (written, with_nan) = scan_snapshots(&dir.path().join("out"))?;
    Ok(vec![
        Check::new("error_names_cell_and_time", err.to_string(), "instability with cell and t", located),
        Check::new("exit_code", kind.exit_code().to_string(), "3", kind == ErrorKind::Instability),
        Check::new("snapshots_before_failure", written.to_string(), ">= 1", written >= 1),
        Check::new("snapshots_with_nan", with_nan.to_string(), "0", with_nan == 0),
    ])
}

/// Runs `cfg` once straight through and once split after `split` steps with
/// the checkpoint passed through an SWS1 file. Returns whether the final
/// snapshots and step counts agree.
pub fn split_run_matches(cfg: &ScenarioConfig, split: u64, dir: &Path) -> Result<bool> {
    let whole = run(cfg)?;
    let mut first = Simulation::new(cfg)?;
    if first.advance(split)? != split {
        bail!("{} finished before step {split}", cfg.name);
    }
    let path = dir.join(format!("{}_split.sws", cfg.name));
    first.write_checkpoint(&path)?;
    let snap = read_snapshot(&mut std::fs::File::open(&path)?)?;
    let (Some(dt_next), Some(step_index)) = (snap.dt_next, snap.step_index) else {
        bail!("checkpoint file lacks dt_next or step_index");
    };
    let resumed = Simulation::resume(cfg, Checkpoint { state: snap.state, dt_next, step_index })?.finish()?;
    let g = cfg.physics.g;
    Ok(snapshot_bytes(&whole.state, g) == snapshot_bytes(&resumed.state, g)
        && whole.report.steps == split + resumed.report.steps)
}

fn checkpoint() -> Result<Vec<Check>> {
    let dir = tempfile::tempdir()?;
    let mut cases = Vec::new();
    let mut drops = gen_five_drops(65, false)?;
    drops.t_end = 20.0;
    cases.push((drops.clone(), 57));
    cases.push((ScenarioConfig { executor: ExecutorKind::decomposed(4), ..drops }, 90));
    let mut inlet = gen_inlet_flood(65)?;
    inlet.t_end = 20.0;
    cases.push((ScenarioConfig { executor: ExecutorKind::tiled(), ..inlet }, 33));
    let mut checks = Vec::new();
    for (cfg, split) in cases {
        let ok = split_run_matches(&cfg, split, dir.path())?;
        let measured = if ok { "identical" } else { "differs" };
        checks.push(Check::new(format!("{}_{}_split_at_{split}", cfg.name, cfg.executor), measured, "bit-identical", ok));
    }
    Ok(checks)
}

fn scaling() -> Result<Vec<Check>> {
    let rows = |exec| -> Result<Vec<BenchRow>> {
        Ok(bench_sizes(&[256, 512], exec, 50, 5)?.into_iter().map(|(r, _)| r).collect())
    };
    let naive = rows(ExecutorKind::Naive)?;
    let tiled = rows(ExecutorKind::tiled())?;
    let ratio = naive[1].median_step_s / naive[0].median_step_s;
    let (lo, hi) = SCALING_RANGE;
    let mut checks = vec![Check::new(
        "naive_512_over_256_step_time",
        format!("{ratio:.3}"),
        format!("in [{lo}, {hi}]"),
        (lo..=hi).contains(&ratio),
    )];
    for (t, n) in tiled.iter().zip(&naive) {
        let rel = t.cells_per_s / n.cells_per_s;
        checks.push(Check::info(&format!("tiled_over_naive_throughput_{}", t.size), format!("{rel:.3}")));
    }
    Ok(checks)
}

/// Dataset name, cell count and end time of each standard benchmark.
pub const DATASETS: [(&str, usize, f64); 5] = [
    ("five_drops", 40401, 100.0),
    ("inlet_flood", 40401, 1000.0),
    ("five_drops_big", 1_048_576, 100.0),
    ("channel_flood", 1_048_576, 1000.0),
    ("vortex", 1_048_576, 1000.0),
];

fn datasets() -> Result<Vec<Check>> {
    DATASETS
        .iter()
        .map(|&(name, cells, t_end)| {
            let cfg = generate(name, None)?;
            let got = (cfg.grid.cells(), cfg.t_end);
            Ok(Check::new(
                name,
                format!("{} cells, t_end {} s", got.0, got.1),
                format!("{cells} cells, t_end {t_end} s"),
                got == (cells, t_end),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_none() {
        assert!(run_suite("nope").is_none());
    }

    #[test]
    fn datasets_suite_passes() {
        let r = run_suite("datasets").unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn shrunk_halo_fails_equivalence() {
        let checks = equivalence(Some(1)).unwrap();
        assert!(checks.iter().all(|c| !c.pass), "{checks:?}");
    }

    #[test]
    fn random_states_are_reproducible() {
        let a = random_states(4, 9);
        let b = random_states(4, 9);
        assert!(a.iter().zip(&b).all(|(x, y)| x.bit_eq(y)));
        assert!(a[1].qx.iter().any(|&q| q != 0.0));
        assert!(a[0].qx.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn report_lines_carry_measured_and_threshold() {
        let r = SuiteReport { suite: "x", checks: vec![Check::at_most("drift", 2e-14, 1e-8)] };
        assert_eq!(r.to_string(), "PASS x/drift: measured 2.000e-14 (threshold <= 1e-8)\n");
    }
}
