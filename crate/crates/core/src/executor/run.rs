//! Whole-run driver: repeated steps from `t = 0` to `t_end`, snapshots at a
//! fixed cadence, and a run report.

use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::{Diagnostic, ExecutorKind, Solver, Stage, StepError};
use crate::grid::{BoundaryKind, Edge, FieldSet};
use crate::io::{write_checkpoint, SnapshotError};
use crate::scenarios::{ScenarioConfig, ScenarioError};
use crate::timestep::{cfl_dt, stability_guard};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("step {step}: {source}")]
    Step { step: u64, source: StepError },
    #[error("writing {}: {source}", path.display())]
    Io { path: PathBuf, source: SnapshotError },
}

/// A committed state plus what is needed to continue the run bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: FieldSet,
    /// Step size proposed by the last committed step, before end-time clamping.
    pub dt_next: f64,
    /// Index of the next step to run.
    pub step_index: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub executor: String,
    pub cells: usize,
    pub steps: u64,
    pub t_final: f64,
    pub wall_time: Duration,
    pub kernel_times: Vec<(&'static str, Duration)>,
    pub snapshots: Vec<PathBuf>,
    /// Committed values copied into worker halos, summed over all steps.
    pub exchanged_values: u64,
    /// Redundant predictor rows per step (decomposed only).
    pub redundant_predictor_rows_per_step: usize,
    /// Volume that entered through inflow edges at the nominal discharge, m^3.
    pub boundary_inflow: f64,
    pub initial_volume: f64,
    pub final_volume: f64,
    /// Each distinct warning once.
    pub warnings: Vec<String>,
}

impl RunReport {
    /// The parts of the report that must not depend on the executor.
    pub fn physical_summary(&self) -> (u64, u64, usize, u64, u64, Vec<String>) {
        (
            self.steps,
            self.t_final.to_bits(),
            self.snapshots.len(),
            self.initial_volume.to_bits(),
            self.final_volume.to_bits(),
            self.warnings.clone(),
        )
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.scenario)?;
        writeln!(f, "executor: {}", self.executor)?;
        writeln!(f, "cells: {}", self.cells)?;
        writeln!(f, "steps: {}", self.steps)?;
        writeln!(f, "t_final: {}", self.t_final)?;
        writeln!(f, "wall_time_s: {:.6}", self.wall_time.as_secs_f64())?;
        for (name, d) in &self.kernel_times {
            writeln!(f, "kernel_time_s.{name}: {:.6}", d.as_secs_f64())?;
        }
        writeln!(f, "snapshots_written: {}", self.snapshots.len())?;
        writeln!(f, "halo_values_exchanged: {}", self.exchanged_values)?;
        writeln!(f, "redundant_predictor_rows_per_step: {}", self.redundant_predictor_rows_per_step)?;
        writeln!(f, "initial_volume_m3: {:.17e}", self.initial_volume)?;
        writeln!(f, "final_volume_m3: {:.17e}", self.final_volume)?;
        writeln!(f, "boundary_inflow_m3: {:.17e}", self.boundary_inflow)?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: FieldSet,
    pub report: RunReport,
}

/// Stepping state of one run. Owns the double buffer: a step writes into
/// the spare state and only a successful step swaps it in.
pub struct Simulation {
    cfg: ScenarioConfig,
    solver: Solver,
    state: FieldSet,
    spare: FieldSet,
    dt_next: f64,
    step_index: u64,
    next_snapshot: f64,
    snapshot_index: usize,
    inflow_rate: f64,
    report: RunReport,
    started: Instant,
}

impl Simulation {
    /// Prepares a run from the scenario's initial condition.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let state = cfg.initial.build(cfg.grid)?;
        cfg.boundaries.validate(&state, cfg.policy.h_min).map_err(ScenarioError::from)?;
        if let Err(g) = stability_guard(&state, &cfg.policy) {
            return Err(RunError::Step {
                step: 0,
                source: StepError::Instability {
                    stage: Stage::Guard,
                    i: g.i,
                    j: g.j,
                    t: g.t,
                    h: g.h,
                    qx: g.qx,
                    qy: g.qy,
                    detail: " (initial state)".into(),
                },
            });
        }
        let dt_next = cfl_dt(&state, &cfg.policy, &cfg.physics).map_err(|e| RunError::Step { step: 0, source: e.into() })?;
        Self::build(cfg, state, dt_next, 0)
    }

    /// Continues a run from a checkpoint taken at a committed step.
    pub fn resume(cfg: &ScenarioConfig, ck: Checkpoint) -> Result<Self, RunError> {
        cfg.validate()?;
        if ck.state.spec != cfg.grid {
            return Err(ScenarioError::DimensionMismatch {
                nx: cfg.grid.nx,
                ny: cfg.grid.ny,
                got_nx: ck.state.spec.nx,
                got_ny: ck.state.spec.ny,
            }
            .into());
        }
        Self::build(cfg, ck.state, ck.dt_next, ck.step_index)
    }

    fn build(cfg: &ScenarioConfig, state: FieldSet, dt_next: f64, step_index: u64) -> Result<Self, RunError> {
        let solver = Solver::new(&state, cfg.executor, cfg.policy, cfg.physics, cfg.boundaries)
            .map_err(|e| RunError::Step { step: step_index, source: e })?;
        let inflow_rate = Edge::ALL
            .iter()
            .map(|&e| match cfg.boundaries.get(e) {
                BoundaryKind::InflowDischarge { q_n, .. } => {
                    let (lx, ly) = cfg.grid.extent();
                    q_n * if e.is_x_normal() { ly } else { lx }
                }
                _ => 0.0,
            })
            .sum();
        let report = RunReport {
            scenario: cfg.name.clone(),
            executor: cfg.executor.to_string(),
            cells: cfg.grid.cells(),
            t_final: state.t,
            initial_volume: state.total_volume(),
            final_volume: state.total_volume(),
            ..RunReport::default()
        };
        let next_snapshot = if cfg.snapshot_every > 0.0 {
            ((state.t / cfg.snapshot_every).floor() + 1.0) * cfg.snapshot_every
        } else {
            f64::INFINITY
        };
        Ok(Self {
            cfg: cfg.clone(),
            solver,
            spare: state.clone(),
            state,
            dt_next,
            step_index,
            next_snapshot,
            snapshot_index: 0,
            inflow_rate,
            report,
            started: Instant::now(),
        })
    }

    pub fn state(&self) -> &FieldSet {
        &self.state
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn is_finished(&self) -> bool {
        self.state.t >= self.cfg.t_end
    }

    pub fn executor(&self) -> ExecutorKind {
        self.solver.executor()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint { state: self.state.clone(), dt_next: self.dt_next, step_index: self.step_index }
    }

    /// Writes the current state as a checkpoint-capable SWS1 file.
    pub fn write_checkpoint(&self, path: &Path) -> Result<usize, RunError> {
        let io_err = |source: SnapshotError| RunError::Io { path: path.to_path_buf(), source };
        let file = File::create(path).map_err(|e| io_err(e.into()))?;
        let mut w = BufWriter::new(file);
        let n = write_checkpoint(&self.state, self.cfg.physics.g, self.dt_next, self.step_index, &mut w).map_err(io_err)?;
        std::io::Write::flush(&mut w).map_err(|e| io_err(e.into()))?;
        Ok(n)
    }

    /// Runs one step. Returns `false` once `t_end` has been reached.
    pub fn step_once(&mut self) -> Result<bool, RunError> {
        let t_end = self.cfg.t_end;
        if self.state.t >= t_end {
            return Ok(false);
        }
        let remaining = t_end - self.state.t;
        let last = self.dt_next >= remaining;
        let dt = if last { remaining } else { self.dt_next };
        let stats = self
            .solver
            .step_into(&self.state, &mut self.spare, dt, self.step_index)
            .map_err(|source| RunError::Step { step: self.step_index, source })?;
        if last {
            self.spare.t = t_end;
        }
        std::mem::swap(&mut self.state, &mut self.spare);
        self.step_index += 1;
        self.dt_next = stats.dt_next;
        self.report.steps += 1;
        self.report.exchanged_values += stats.exchanged_values as u64;
        self.report.redundant_predictor_rows_per_step = stats.redundant_predictor_rows;
        self.report.boundary_inflow += self.inflow_rate * dt;
        for d in stats.diagnostics {
            let text = match d {
                Diagnostic::FixedElevationClamped => "fixed-elevation ghost depth clamped to h_min".to_string(),
            };
            if !self.report.warnings.contains(&text) {
                log::warn!("{text} (t={})", self.state.t);
                self.report.warnings.push(text);
            }
        }
        if self.state.t >= self.next_snapshot && self.state.t < t_end {
            self.write_numbered_snapshot()?;
            let every = self.cfg.snapshot_every;
            self.next_snapshot = ((self.state.t / every).floor() + 1.0) * every;
        }
        Ok(true)
    }

    /// Runs at most `max_steps` steps; returns how many ran.
    pub fn advance(&mut self, max_steps: u64) -> Result<u64, RunError> {
        let mut n = 0;
        while n < max_steps && self.step_once()? {
            n += 1;
        }
        Ok(n)
    }

    fn write_numbered_snapshot(&mut self) -> Result<(), RunError> {
        if let Some(dir) = self.cfg.output_dir.clone() {
            self.snapshot_index += 1;
            let path = dir.join(format!("{}_{:06}.sws", self.cfg.name, self.snapshot_index));
            self.write_snapshot_file(path)?;
        }
        Ok(())
    }

    fn write_snapshot_file(&mut self, path: PathBuf) -> Result<(), RunError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| RunError::Io { path: path.clone(), source: e.into() })?;
        }
        self.write_checkpoint(&path)?;
        log::info!("wrote {} (t={})", path.display(), self.state.t);
        self.report.snapshots.push(path);
        Ok(())
    }

    /// Runs to `t_end`, writes the final snapshot if an output directory is
    /// configured, and returns the final state with the report.
    pub fn finish(mut self) -> Result<RunOutcome, RunError> {
        while self.step_once()? {}
        if let Some(dir) = self.cfg.output_dir.clone() {
            let path = dir.join(format!("{}_final.sws", self.cfg.name));
            self.write_snapshot_file(path)?;
        }
        self.report.t_final = self.state.t;
        self.report.final_volume = self.state.total_volume();
        self.report.wall_time = self.started.elapsed();
        self.report.kernel_times = self.solver.kernel_times().entries().to_vec();
        Ok(RunOutcome { state: self.state, report: self.report })
    }
}

/// Runs a scenario from its initial condition to `t_end`.
pub fn run(scenario: &ScenarioConfig) -> Result<RunOutcome, RunError> {
    Simulation::new(scenario)?.finish()
}
