//! Variable time-step selection and the stability guard.
//!
//! The step size is a global min-reduction over per-cell CFL limits. `min` is
//! exact and order-insensitive for finite values, so any split of the grid
//! across workers yields the same `dt`.

use std::fmt;

use crate::grid::{FieldSet, GridSpec};
use crate::scheme::{wave_speed, CellVec, PhysicsParams};

/// CFL number and step-size / depth guards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityPolicy {
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub h_min: f64,
}

impl Default for StabilityPolicy {
    fn default() -> Self {
        Self { cfl: 0.9, dt_max: f64::INFINITY, dt_min: 1e-9, h_min: 1e-6 }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("cfl must lie in (0, 1], got {0}")]
    Cfl(f64),
    #[error("dt_min must be > 0, got {0}")]
    DtMin(f64),
    #[error("dt_max ({dt_max}) must be >= dt_min ({dt_min})")]
    DtMax { dt_max: f64, dt_min: f64 },
    #[error("h_min must be > 0, got {0}")]
    HMin(f64),
}

impl StabilityPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(PolicyError::Cfl(self.cfl));
        }
        if !(self.dt_min > 0.0 && self.dt_min.is_finite()) {
            return Err(PolicyError::DtMin(self.dt_min));
        }
        if !(self.dt_max >= self.dt_min) {
            return Err(PolicyError::DtMax { dt_max: self.dt_max, dt_min: self.dt_min });
        }
        if !(self.h_min > 0.0 && self.h_min.is_finite()) {
            return Err(PolicyError::HMin(self.h_min));
        }
        Ok(())
    }
}

/// First offending cell found by the stability guard.
#[derive(Debug, Clone, PartialEq)]
pub struct GuardFailure {
    pub i: usize,
    pub j: usize,
    pub h: f64,
    pub qx: f64,
    pub qy: f64,
    pub t: f64,
}

impl fmt::Display for GuardFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cell ({}, {}) at t={}: h={}, qx={}, qy={}",
            self.i, self.j, self.t, self.h, self.qx, self.qy
        )
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum TimestepError {
    #[error("step collapse at t={t}: dt={dt} below dt_min={dt_min}")]
    StepCollapse { dt: f64, dt_min: f64, t: f64 },
    #[error("non-finite wave speed at cell ({i}, {j}), t={t}")]
    NonFiniteSpeed { i: usize, j: usize, t: f64 },
}

#[inline]
pub(crate) fn cell_is_legal(c: CellVec, h_min: f64) -> bool {
    c.is_finite() && c.h >= h_min
}

/// Row-major first offender among `rows` of the field, or `None`.
pub(crate) fn guard_rows(fs: &FieldSet, rows: std::ops::Range<usize>, h_min: f64) -> Option<usize> {
    let nx = fs.spec.nx;
    (rows.start * nx..rows.end * nx).find(|&k| !cell_is_legal(fs.cell(k), h_min))
}

/// Passes iff every cell is finite with `h >= h_min`.
pub fn stability_guard(fs: &FieldSet, pol: &StabilityPolicy) -> Result<(), GuardFailure> {
    match guard_rows(fs, 0..fs.spec.ny, pol.h_min) {
        None => Ok(()),
        Some(k) => Err(failure_at(fs, k)),
    }
}

pub(crate) fn failure_at(fs: &FieldSet, k: usize) -> GuardFailure {
    let (i, j) = fs.spec.cell_coords(k);
    GuardFailure { i, j, h: fs.h[k], qx: fs.qx[k], qy: fs.qy[k], t: fs.t }
}

/// Largest stable step for one cell, `min(dx / sx, dy / sy)`, before the CFL factor.
#[inline]
pub(crate) fn cell_dt_limit(c: CellVec, spec: &GridSpec, p: &PhysicsParams, h_min: f64) -> Option<f64> {
    let (sx, sy) = wave_speed(c, p, h_min).ok()?;
    let lim = (spec.dx / sx).min(spec.dy / sy);
    lim.is_finite().then_some(lim)
}

/// Minimum CFL limit over a contiguous block of flat indices.
/// `Err(k)` names the first cell whose speed is not finite.
pub(crate) fn min_dt_limit(
    fs: &FieldSet,
    cells: std::ops::Range<usize>,
    p: &PhysicsParams,
    h_min: f64,
) -> Result<f64, usize> {
    let mut best = f64::INFINITY;
    for k in cells {
        match cell_dt_limit(fs.cell(k), &fs.spec, p, h_min) {
            Some(lim) => best = best.min(lim),
            None => return Err(k),
        }
    }
    Ok(best)
}

/// Turns a reduced CFL limit into the next step size (before end-time clamping).
pub(crate) fn dt_from_limit(limit: f64, pol: &StabilityPolicy, t: f64) -> Result<f64, TimestepError> {
    let dt = (pol.cfl * limit).min(pol.dt_max);
    if dt < pol.dt_min {
        return Err(TimestepError::StepCollapse { dt, dt_min: pol.dt_min, t });
    }
    Ok(dt)
}

/// CFL step size for `fs`, not clamped to an end time.
pub fn cfl_dt(fs: &FieldSet, pol: &StabilityPolicy, p: &PhysicsParams) -> Result<f64, TimestepError> {
    compute_dt_unclamped(fs, pol, p, 1)
}

/// Next step size: `min(cfl * min_cells(min(dx/sx, dy/sy)), dt_max, t_end - t)`.
///
/// `dt_min` is checked before the end-time clamp, so a short final step does
/// not count as a collapse.
pub fn compute_dt(fs: &FieldSet, pol: &StabilityPolicy, p: &PhysicsParams, t_end: f64) -> Result<f64, TimestepError> {
    compute_dt_with_workers(fs, pol, p, t_end, 1)
}

/// Same as [`compute_dt`], with the reduction split across `workers` threads.
pub fn compute_dt_with_workers(
    fs: &FieldSet,
    pol: &StabilityPolicy,
    p: &PhysicsParams,
    t_end: f64,
    workers: usize,
) -> Result<f64, TimestepError> {
    let dt = compute_dt_unclamped(fs, pol, p, workers)?;
    Ok(dt.min(t_end - fs.t))
}

fn compute_dt_unclamped(
    fs: &FieldSet,
    pol: &StabilityPolicy,
    p: &PhysicsParams,
    workers: usize,
) -> Result<f64, TimestepError> {
    let n = fs.spec.cells();
    let workers = workers.clamp(1, n.max(1));
    let chunk = n.div_ceil(workers);
    let partials: Vec<Result<f64, usize>> = if workers == 1 {
        vec![min_dt_limit(fs, 0..n, p, pol.h_min)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = (w * chunk).min(n);
                    let hi = ((w + 1) * chunk).min(n);
                    s.spawn(move || min_dt_limit(fs, lo..hi, p, pol.h_min))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("dt worker panicked")).collect()
        })
    };
    let mut limit = f64::INFINITY;
    // Partials are in row-major order, so the first Err is the first bad cell.
    for part in partials {
        match part {
            Ok(v) => limit = limit.min(v),
            Err(k) => {
                let (i, j) = fs.spec.cell_coords(k);
                return Err(TimestepError::NonFiniteSpeed { i, j, t: fs.t });
            }
        }
    }
    dt_from_limit(limit, pol, fs.t)
}
