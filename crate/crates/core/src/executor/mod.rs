//! Time-step orchestration.
//!
//! A step runs the kernels of a [`StepPlan`] with a barrier between each.
//! Three strategies execute the same plan and commit bit-identical states:
//!
//! * `Naive` runs each kernel over the whole (ghost-padded) grid.
//! * `Tiled` fuses the kernels per square tile, staging committed state with
//!   a two-cell halo and recomputing predictor values in a one-cell ring that
//!   overlaps neighbouring tiles.
//! * `Decomposed` splits the grid into horizontal bands, gives each worker
//!   copies of the two committed rows on either side, and lets every worker
//!   finish the step without further communication.
//!
//! Equivalence holds because every cell update goes through the same pure
//! functions in [`crate::scheme`] with the same inputs, and all cross-worker
//! reductions are either `min` or a first-in-row-major-order selection.

mod block;
mod decomposed;
mod naive;
pub mod plan;
mod run;
mod tiled;

use std::fmt;
use std::time::Duration;

pub use decomposed::{exchange_halo_rows, partition_scanlines, Band, HaloExchange};
pub use plan::{Kernel, StepPlan};
pub use run::{run, Checkpoint, RunError, RunOutcome, RunReport, Simulation};
pub use tiled::{tile_halo_extent, TileGeometry};

use crate::grid::{ghost_value, prescribed_mass_flux, BedSlopes, Boundaries, Edge, FieldSet, GridSpec};
use crate::scheme::{
    corrector_cell_bc, diffusion, BedSlope, CellVec, FaceFlux, PhysicsParams, SchemeError, StageContext,
    SweepDirection,
};
use crate::timestep::{dt_from_limit, StabilityPolicy, TimestepError};

/// Committed-state halo a tile or band needs: one cell for the corrector's
/// upwind `U*` neighbour plus one more for that neighbour's predictor.
#[cfg(not(feature = "shrunk-halo"))]
pub const COMMITTED_HALO: usize = 2;
#[cfg(feature = "shrunk-halo")]
pub const COMMITTED_HALO: usize = 1;

/// Width of the predictor ring recomputed around each tile or band.
pub const PREDICTOR_HALO: usize = 1;

pub const DEFAULT_TILE: usize = 16;
pub const MIN_TILE: usize = 4;

/// Execution strategy used inside each decomposed worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerKind {
    Naive,
    Tiled { tile: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ExecutorKind {
    #[default]
    Naive,
    Tiled { tile: usize },
    Decomposed { workers: usize, inner: InnerKind },
}

impl ExecutorKind {
    pub fn tiled() -> Self {
        ExecutorKind::Tiled { tile: DEFAULT_TILE }
    }

    pub fn decomposed(workers: usize) -> Self {
        ExecutorKind::Decomposed { workers, inner: InnerKind::Naive }
    }

    pub fn validate(&self, spec: &GridSpec) -> Result<(), StepError> {
        let check_tile = |tile: usize| {
            tiled::tile_halo_extent(tile).map(|_| ()).map_err(StepError::Config)
        };
        match *self {
            ExecutorKind::Naive => Ok(()),
            ExecutorKind::Tiled { tile } => check_tile(tile),
            ExecutorKind::Decomposed { workers, inner } => {
                if let InnerKind::Tiled { tile } = inner {
                    check_tile(tile)?;
                }
                decomposed::validate_bands(spec.ny, workers).map(|_| ()).map_err(StepError::Config)
            }
        }
    }

    /// Parses `naive`, `tiled`, `tiled:T`, `decomposed:N`, `decomposed:N:tiled[:T]`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str, what: &str| {
            p.parse::<usize>().map_err(|_| format!("bad {what} `{p}` in executor `{s}`"))
        };
        let parse_inner = |rest: &[&str]| -> Result<InnerKind, String> {
            match rest {
                [] | ["naive"] => Ok(InnerKind::Naive),
                ["tiled"] => Ok(InnerKind::Tiled { tile: DEFAULT_TILE }),
                ["tiled", t] => Ok(InnerKind::Tiled { tile: num(t, "tile size")? }),
                _ => Err(format!("bad inner executor in `{s}`")),
            }
        };
        match parts.as_slice() {
            ["naive"] => Ok(ExecutorKind::Naive),
            ["tiled"] => Ok(ExecutorKind::tiled()),
            ["tiled", t] => Ok(ExecutorKind::Tiled { tile: num(t, "tile size")? }),
            ["decomposed", n, rest @ ..] => Ok(ExecutorKind::Decomposed {
                workers: num(n, "worker count")?,
                inner: parse_inner(rest)?,
            }),
            _ => Err(format!("unknown executor `{s}` (expected naive, tiled[:T] or decomposed:N)")),
        }
    }
}

impl fmt::Display for ExecutorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ExecutorKind::Naive => write!(f, "naive"),
            ExecutorKind::Tiled { tile } => write!(f, "tiled:{tile}"),
            ExecutorKind::Decomposed { workers, inner: InnerKind::Naive } => write!(f, "decomposed:{workers}"),
            ExecutorKind::Decomposed { workers, inner: InnerKind::Tiled { tile } } => {
                write!(f, "decomposed:{workers}:tiled:{tile}")
            }
        }
    }
}

/// Phase in which a step failed. Ordered by kernel position so that the
/// reported failure does not depend on how the grid was split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Predictor,
    Corrector,
    Guard,
    WaveSpeed,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Predictor => "predictor",
            Stage::Corrector => "corrector",
            Stage::Guard => "stability guard",
            Stage::WaveSpeed => "wave-speed reduction",
        })
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StepError {
    #[error("instability ({stage}) at cell ({i}, {j}), t={t}: h={h}, qx={qx}, qy={qy}{detail}")]
    Instability {
        stage: Stage,
        i: usize,
        j: usize,
        t: f64,
        h: f64,
        qx: f64,
        qy: f64,
        detail: String,
    },
    #[error("step collapse at t={t}: dt={dt} below dt_min={dt_min}")]
    StepCollapse { dt: f64, dt_min: f64, t: f64 },
    #[error("executor configuration: {0}")]
    Config(String),
}

impl From<TimestepError> for StepError {
    fn from(e: TimestepError) -> Self {
        match e {
            TimestepError::StepCollapse { dt, dt_min, t } => StepError::StepCollapse { dt, dt_min, t },
            TimestepError::NonFiniteSpeed { i, j, t } => StepError::Instability {
                stage: Stage::WaveSpeed,
                i,
                j,
                t,
                h: f64::NAN,
                qx: f64::NAN,
                qy: f64::NAN,
                detail: String::new(),
            },
        }
    }
}

/// Failure inside a kernel, located by flat cell index.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Fault {
    pub stage: Stage,
    pub k: usize,
    pub detail: Option<SchemeError>,
}

impl Fault {
    fn key(&self) -> (Stage, usize) {
        (self.stage, self.k)
    }
}

pub(crate) fn earliest(a: Option<Fault>, b: Option<Fault>) -> Option<Fault> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.key() < a.key() { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Per-block (or per-grid) statistics reduced across workers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockStats {
    pub clamped: bool,
    pub dt_limit: f64,
}

impl BlockStats {
    pub fn identity() -> Self {
        Self { clamped: false, dt_limit: f64::INFINITY }
    }
    pub fn merge(self, o: BlockStats) -> Self {
        Self { clamped: self.clamped || o.clamped, dt_limit: self.dt_limit.min(o.dt_limit) }
    }
}

pub(crate) fn reduce_results(
    results: impl IntoIterator<Item = Result<BlockStats, Fault>>,
) -> Result<BlockStats, Fault> {
    let mut stats = BlockStats::identity();
    let mut fault = None;
    for r in results {
        match r {
            Ok(s) => stats = stats.merge(s),
            Err(f) => fault = earliest(fault, Some(f)),
        }
    }
    match fault {
        Some(f) => Err(f),
        None => Ok(stats),
    }
}

/// Read-only window onto full-width rows `[row0, row0 + rows)` of a state.
#[derive(Clone, Copy)]
pub(crate) struct StateView<'a> {
    pub nx: usize,
    pub row0: usize,
    pub h: &'a [f64],
    pub qx: &'a [f64],
    pub qy: &'a [f64],
}

impl<'a> StateView<'a> {
    pub fn full(fs: &'a FieldSet) -> Self {
        Self { nx: fs.spec.nx, row0: 0, h: &fs.h, qx: &fs.qx, qy: &fs.qy }
    }

    pub fn rows(&self) -> std::ops::Range<usize> {
        self.row0..self.row0 + self.h.len() / self.nx
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> CellVec {
        debug_assert!(self.rows().contains(&j), "row {j} outside view {:?}", self.rows());
        let k = (j - self.row0) * self.nx + i;
        CellVec::new(self.h[k], self.qx[k], self.qy[k])
    }
}

/// Everything that stays fixed across the cells of one step.
pub(crate) struct StepInputs<'a> {
    pub spec: GridSpec,
    pub z: &'a [f64],
    pub slopes: &'a BedSlopes,
    pub bounds: &'a Boundaries,
    pub ctx: StageContext,
    pub dir: SweepDirection,
    /// Prescribed boundary mass flux per edge: west, east, south, north.
    pub faces: [Option<f64>; 4],
}

impl<'a> StepInputs<'a> {
    pub fn new(
        spec: GridSpec,
        z: &'a [f64],
        slopes: &'a BedSlopes,
        bounds: &'a Boundaries,
        ctx: StageContext,
        dir: SweepDirection,
    ) -> Self {
        let faces = [Edge::West, Edge::East, Edge::South, Edge::North].map(|e| prescribed_mass_flux(e, bounds.get(e)));
        Self { spec, z, slopes, bounds, ctx, dir, faces }
    }

    /// Face fluxes for the predictor at `(i, j)`: the faces towards its
    /// downwind stencil neighbours.
    #[inline]
    pub fn predictor_faces(&self, i: usize, j: usize) -> FaceFlux {
        let [w, e, s, n] = self.faces;
        match self.dir {
            SweepDirection::Forward => FaceFlux {
                x: if i + 1 == self.spec.nx { e } else { None },
                y: if j + 1 == self.spec.ny { n } else { None },
            },
            SweepDirection::Backward => FaceFlux {
                x: if i == 0 { w } else { None },
                y: if j == 0 { s } else { None },
            },
        }
    }

    /// Face fluxes for the corrector at `(i, j)`, which differences the other way.
    #[inline]
    pub fn corrector_faces(&self, i: usize, j: usize) -> FaceFlux {
        let [w, e, s, n] = self.faces;
        match self.dir {
            SweepDirection::Forward => FaceFlux {
                x: if i == 0 { w } else { None },
                y: if j == 0 { s } else { None },
            },
            SweepDirection::Backward => FaceFlux {
                x: if i + 1 == self.spec.nx { e } else { None },
                y: if j + 1 == self.spec.ny { n } else { None },
            },
        }
    }

    #[inline]
    pub fn slope(&self, k: usize) -> BedSlope {
        BedSlope { dzdx: self.slopes.dzdx[k], dzdy: self.slopes.dzdy[k] }
    }

    /// Ghost across `edge` from the interior cell at flat index `k`.
    #[inline]
    pub fn ghost(&self, edge: Edge, interior: CellVec, k: usize) -> (CellVec, bool) {
        ghost_value(edge, self.bounds.get(edge), interior, self.z[k], self.ctx.h_min)
    }

    /// Corrector plus the optional artificial-diffusion term. Shared by every
    /// executor so the arithmetic is identical.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub fn finish_cell(
        &self,
        k: usize,
        old: CellVec,
        star: CellVec,
        star_x: CellVec,
        star_y: CellVec,
        ring: [CellVec; 4],
    ) -> Result<CellVec, SchemeError> {
        let (i, j) = (k % self.spec.nx, k / self.spec.nx);
        let faces = self.corrector_faces(i, j);
        let next = corrector_cell_bc(&self.ctx, old, star, star_x, star_y, self.slope(k), self.dir, faces)?;
        let nu = self.ctx.physics.nu_art;
        if nu == 0.0 {
            return Ok(next);
        }
        let [e, w, n, s] = ring;
        let out = next + diffusion(old, e, w, n, s, nu);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(SchemeError::NonFinite { h: out.h, qx: out.qx, qy: out.qy })
        }
    }
}

/// Accumulated wall time per kernel (or fused pass) name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KernelTimes {
    entries: Vec<(&'static str, Duration)>,
}

impl KernelTimes {
    pub fn add(&mut self, name: &'static str, d: Duration) {
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some((_, acc)) => *acc += d,
            None => self.entries.push((name, d)),
        }
    }

    pub fn entries(&self) -> &[(&'static str, Duration)] {
        &self.entries
    }

    pub fn total(&self) -> Duration {
        self.entries.iter().map(|(_, d)| *d).sum()
    }
}

/// Warnings raised during a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// A fixed-elevation ghost fell below `h_min` and was clamped.
    FixedElevationClamped,
}

/// Bookkeeping from one committed step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepStats {
    pub dt_used: f64,
    pub dt_next: f64,
    pub diagnostics: Vec<Diagnostic>,
    /// Committed values copied into worker halos (decomposed only).
    pub exchanged_values: usize,
    /// Predictor rows computed by a worker for cells it does not own.
    pub redundant_predictor_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: FieldSet,
    pub dt_used: f64,
    pub dt_next: f64,
    pub diagnostics: Vec<Diagnostic>,
}

pub(crate) enum Scratch {
    Naive(naive::NaiveScratch),
    Tiled,
    Decomposed(decomposed::DecomposedScratch),
}

/// Owns the per-run constants (bed slopes, boundary setup) and scratch
/// buffers for one executor.
pub struct Solver {
    spec: GridSpec,
    z: Vec<f64>,
    slopes: BedSlopes,
    executor: ExecutorKind,
    policy: StabilityPolicy,
    physics: PhysicsParams,
    bounds: Boundaries,
    plan: StepPlan,
    scratch: Scratch,
    times: KernelTimes,
    halo: usize,
}

impl Solver {
    pub fn new(
        fs: &FieldSet,
        executor: ExecutorKind,
        policy: StabilityPolicy,
        physics: PhysicsParams,
        bounds: Boundaries,
    ) -> Result<Self, StepError> {
        fs.spec.validate().map_err(|e| StepError::Config(e.to_string()))?;
        policy.validate().map_err(|e| StepError::Config(e.to_string()))?;
        physics.validate().map_err(|e| StepError::Config(e.to_string()))?;
        bounds.validate(fs, policy.h_min).map_err(|e| StepError::Config(e.to_string()))?;
        executor.validate(&fs.spec)?;
        let scratch = match executor {
            ExecutorKind::Naive => Scratch::Naive(naive::NaiveScratch::default()),
            ExecutorKind::Tiled { .. } => Scratch::Tiled,
            ExecutorKind::Decomposed { .. } => Scratch::Decomposed(decomposed::DecomposedScratch::default()),
        };
        Ok(Self {
            spec: fs.spec,
            z: fs.z.clone(),
            slopes: BedSlopes::from_bed(&fs.spec, &fs.z),
            executor,
            policy,
            physics,
            bounds,
            plan: StepPlan::standard(),
            scratch,
            times: KernelTimes::default(),
            halo: COMMITTED_HALO,
        })
    }

    pub fn executor(&self) -> ExecutorKind {
        self.executor
    }

    pub fn plan(&self) -> &StepPlan {
        &self.plan
    }

    pub fn kernel_times(&self) -> &KernelTimes {
        &self.times
    }

    /// Overrides the committed halo staged by tiles and bands. Anything below
    /// [`COMMITTED_HALO`] is wrong on purpose and exists so the equivalence
    /// tests can show they detect it.
    #[doc(hidden)]
    pub fn with_committed_halo(mut self, halo: usize) -> Self {
        self.halo = halo.clamp(1, COMMITTED_HALO.max(2));
        self
    }

    /// Advances `fs` by `dt` into `out`. `out` must share `fs`'s grid and bed;
    /// its previous contents are overwritten. On error `fs` is untouched and
    /// `out` holds no meaningful state.
    pub fn step_into(
        &mut self,
        fs: &FieldSet,
        out: &mut FieldSet,
        dt: f64,
        step_index: u64,
    ) -> Result<StepStats, StepError> {
        if fs.spec != self.spec {
            return Err(StepError::Config("state grid differs from solver grid".into()));
        }
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(StepError::Config(format!("dt must be finite and >= 0, got {dt}")));
        }
        if out.spec != fs.spec || out.h.len() != fs.h.len() {
            *out = fs.clone();
        }
        debug_assert!(out.z == fs.z);
        let ctx = StageContext { dt, dx: self.spec.dx, dy: self.spec.dy, h_min: self.policy.h_min, physics: self.physics };
        let inputs =
            StepInputs::new(self.spec, &self.z, &self.slopes, &self.bounds, ctx, SweepDirection::for_step(step_index));
        let t_new = fs.t + dt;
        let mut stats = StepStats { dt_used: dt, ..Default::default() };
        let result = match (&self.executor, &mut self.scratch) {
            (ExecutorKind::Naive, Scratch::Naive(s)) => {
                naive::step_naive(&inputs, &self.plan, fs, out, s, &mut self.times)
            }
            (ExecutorKind::Tiled { tile }, Scratch::Tiled) => {
                tiled::step_tiled(&inputs, StateView::full(fs), *tile, self.halo, out, &mut self.times)
            }
            (ExecutorKind::Decomposed { workers, inner }, Scratch::Decomposed(s)) => {
                let r = decomposed::step_decomposed(&inputs, fs, *workers, *inner, self.halo, s, out, &mut self.times);
                stats.exchanged_values = s.last_exchange.values;
                stats.redundant_predictor_rows = s.last_exchange.redundant_predictor_rows;
                r
            }
            _ => unreachable!("scratch matches executor"),
        };
        let block = result.map_err(|f| fault_to_error(f, fs, out, t_new))?;
        out.t = t_new;
        stats.dt_next = dt_from_limit(block.dt_limit, &self.policy, t_new)?;
        if block.clamped {
            stats.diagnostics.push(Diagnostic::FixedElevationClamped);
        }
        Ok(stats)
    }

    pub fn step(&mut self, fs: &FieldSet, dt: f64, step_index: u64) -> Result<StepResult, StepError> {
        let mut out = fs.clone();
        let stats = self.step_into(fs, &mut out, dt, step_index)?;
        Ok(StepResult { state: out, dt_used: stats.dt_used, dt_next: stats.dt_next, diagnostics: stats.diagnostics })
    }
}

fn fault_to_error(f: Fault, fs: &FieldSet, out: &FieldSet, t: f64) -> StepError {
    let (i, j) = fs.spec.cell_coords(f.k);
    let src = match f.stage {
        Stage::Predictor | Stage::Corrector => fs,
        Stage::Guard | Stage::WaveSpeed => out,
    };
    let c = src.cell(f.k);
    StepError::Instability {
        stage: f.stage,
        i,
        j,
        t,
        h: c.h,
        qx: c.qx,
        qy: c.qy,
        detail: f.detail.map(|d| format!(" ({d})")).unwrap_or_default(),
    }
}

/// One step with a freshly built [`Solver`].
pub fn step(
    fs: &FieldSet,
    exec: ExecutorKind,
    pol: &StabilityPolicy,
    p: &PhysicsParams,
    bounds: &Boundaries,
    dt: f64,
    step_index: u64,
) -> Result<StepResult, StepError> {
    let mut solver = Solver::new(fs, exec, *pol, *p, *bounds)?;
    solver.step(fs, dt, step_index)
}

#[cfg(test)]
mod tests;
