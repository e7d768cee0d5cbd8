//! Per-step timing of executors on Five Drops grids.

use std::fmt::Write as _;
use std::time::Instant;

use swe_core::executor::{ExecutorKind, RunError, Simulation};
use swe_core::grid::FieldSet;
use swe_core::scenarios::gen_five_drops;

/// Far enough away that a bench never reaches the end time.
const BENCH_T_END: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub executor: ExecutorKind,
    pub steps: u64,
    pub reps: usize,
    pub median_step_s: f64,
    pub cells_per_s: f64,
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Times `steps` steps of Five Drops at every size after one untimed warm-up
/// step, `reps` times. Within a repetition the sizes take turns step by step,
/// so load changes on the machine hit all sizes alike. A row's time is the
/// median over repetitions of that repetition's median step time. Also
/// returns the final state of the last repetition of each size.
pub fn bench_sizes(
    sizes: &[usize],
    executor: ExecutorKind,
    steps: u64,
    reps: usize,
) -> Result<Vec<(BenchRow, FieldSet)>, RunError> {
    let reps = reps.max(1);
    let mut cfgs = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let mut cfg = gen_five_drops(size, false)?;
        cfg.executor = executor;
        cfg.t_end = BENCH_T_END;
        cfgs.push(cfg);
    }
    let mut rep_medians = vec![Vec::with_capacity(reps); sizes.len()];
    let mut last = Vec::new();
    for _ in 0..reps {
        let mut sims = cfgs.iter().map(Simulation::new).collect::<Result<Vec<_>, _>>()?;
        for sim in &mut sims {
            sim.advance(1)?;
        }
        let mut samples = vec![Vec::with_capacity(steps as usize); sizes.len()];
        for _ in 0..steps {
            for (sim, out) in sims.iter_mut().zip(samples.iter_mut()) {
                let start = Instant::now();
                sim.step_once()?;
                out.push(start.elapsed().as_secs_f64());
            }
        }
        for (m, s) in rep_medians.iter_mut().zip(samples.iter_mut()) {
            m.push(if s.is_empty() { 0.0 } else { median(s) });
        }
        last = sims.into_iter().map(|s| s.state().clone()).collect();
    }
    Ok(sizes
        .iter()
        .zip(rep_medians.iter_mut())
        .zip(last)
        .map(|((&size, m), state)| {
            let median_step_s = median(m);
            let row = BenchRow {
                size,
                executor,
                steps,
                reps,
                median_step_s,
                cells_per_s: (size * size) as f64 / median_step_s,
            };
            (row, state)
        })
        .collect())
}

pub const CSV_HEADER: &str = "size,executor,steps,reps,median_seconds_per_step,cells_per_second";

pub fn csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{:.9e},{:.6e}", r.size, r.executor, r.steps, r.reps, r.median_step_s, r.cells_per_s);
    }
    s
}

pub fn table(rows: &[BenchRow]) -> String {
    let mut s = format!("{:>6}  {:<24} {:>16} {:>14}\n", "size", "executor", "median s/step", "cells/s");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6}  {:<24} {:>16.6e} {:>14.4e}",
            r.size,
            r.executor.to_string(),
            r.median_step_s,
            r.cells_per_s
        );
    }
    s
}
