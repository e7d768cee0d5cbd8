//! Scenario configurations and the generators for the standard datasets.
//!
//! The datasets are reconstructions: only their names, cell counts and end
//! times are fixed. Shapes and parameters are chosen here and documented on
//! each generator.

use std::path::PathBuf;

use crate::executor::ExecutorKind;
use crate::grid::{Boundaries, BoundaryKind, FieldSet, GridError, GridSpec};
use crate::io::{read_snapshot, SnapshotError};
use crate::scheme::PhysicsParams;
use crate::timestep::{stability_guard, StabilityPolicy};

/// Smallest side accepted by the dataset generators.
pub const MIN_GENERATOR_SIDE: usize = 33;

/// Side length of the standard Five Drops and Inlet Flood grids.
pub const STANDARD_SIDE: usize = 201;
/// Side length of the large datasets.
pub const BIG_SIDE: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("grid side {n} below minimum {MIN_GENERATOR_SIDE}")]
    TooSmall { n: usize },
    #[error("{0}")]
    Grid(#[from] GridError),
    #[error("initial snapshot: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("initial snapshot is {got_nx}x{got_ny} but the grid is {nx}x{ny}")]
    DimensionMismatch { nx: usize, ny: usize, got_nx: usize, got_ny: usize },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// One Gaussian surface bump `amplitude * exp(-(r / radius)^2)`, in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drop {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    FlatPool { depth: f64 },
    /// Gaussian bumps on the free surface of a flat pool.
    Drops { depth: f64, drops: Vec<Drop> },
    /// Bed falling eastward at `slope`, water `depth` above it everywhere.
    ChannelSlope { slope: f64, depth: f64 },
    /// Swirl with tangential speed `peak_speed * (r/R) * exp((1 - (r/R)^2) / 2)`,
    /// which peaks at `r = R = core_radius`.
    VortexField { cx: f64, cy: f64, peak_speed: f64, core_radius: f64, depth: f64 },
    /// Still water at `h_left` for `x < split_x` and `h_right` beyond.
    DamBreak1D { split_x: f64, h_left: f64, h_right: f64 },
    /// State loaded from an SWS1 file; its time is reset to zero.
    Snapshot { path: PathBuf },
}

impl InitialCondition {
    /// Builds the initial state on `grid` with the time set to 0.
    pub fn build(&self, grid: GridSpec) -> Result<FieldSet, ScenarioError> {
        grid.validate()?;
        let centre = |idx: usize| {
            let (i, j) = grid.cell_coords(idx);
            ((i as f64 + 0.5) * grid.dx, (j as f64 + 0.5) * grid.dy)
        };
        let mut fs = FieldSet::still_water(grid, 0.0);
        match self {
            InitialCondition::FlatPool { depth } => fs.h.fill(*depth),
            InitialCondition::Drops { depth, drops } => {
                let mut parts = Vec::with_capacity(drops.len());
                for k in 0..grid.cells() {
                    let (x, y) = centre(k);
                    parts.clear();
                    parts.extend(drops.iter().map(|d| {
                        let (ex, ey) = ((x - d.cx) / d.radius, (y - d.cy) / d.radius);
                        d.amplitude * (-(ex * ex + ey * ey)).exp()
                    }));
                    // Summing in sorted order makes the result independent of
                    // drop order, so mirrored cells get bit-identical depths.
                    parts.sort_by(f64::total_cmp);
                    fs.h[k] = depth + parts.iter().sum::<f64>();
                }
            }
            InitialCondition::ChannelSlope { slope, depth } => {
                let (lx, _) = grid.extent();
                for k in 0..grid.cells() {
                    let (x, _) = centre(k);
                    fs.z[k] = slope * (lx - x);
                }
                fs.h.fill(*depth);
            }
            InitialCondition::VortexField { cx, cy, peak_speed, core_radius, depth } => {
                fs.h.fill(*depth);
                for k in 0..grid.cells() {
                    let (x, y) = centre(k);
                    let (rx, ry) = ((x - cx) / core_radius, (y - cy) / core_radius);
                    let s = peak_speed * (0.5 * (1.0 - (rx * rx + ry * ry))).exp();
                    // Tangential direction (-ry, rx) scaled by r/R gives (r/R) * unit tangent.
                    fs.qx[k] = -depth * s * ry;
                    fs.qy[k] = depth * s * rx;
                }
            }
            InitialCondition::DamBreak1D { split_x, h_left, h_right } => {
                for k in 0..grid.cells() {
                    let (x, _) = centre(k);
                    fs.h[k] = if x < *split_x { *h_left } else { *h_right };
                }
            }
            InitialCondition::Snapshot { path } => {
                let mut loaded = read_snapshot(&mut std::fs::File::open(path).map_err(SnapshotError::from)?)?.state;
                if loaded.spec.nx != grid.nx || loaded.spec.ny != grid.ny {
                    return Err(ScenarioError::DimensionMismatch {
                        nx: grid.nx,
                        ny: grid.ny,
                        got_nx: loaded.spec.nx,
                        got_ny: loaded.spec.ny,
                    });
                }
                loaded.t = 0.0;
                return Ok(loaded);
            }
        }
        Ok(fs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridSpec,
    pub physics: PhysicsParams,
    pub policy: StabilityPolicy,
    pub executor: ExecutorKind,
    pub boundaries: Boundaries,
    /// End time, s.
    pub t_end: f64,
    /// Snapshot cadence, s. Zero writes only the final state.
    pub snapshot_every: f64,
    pub initial: InitialCondition,
    /// Where snapshots go. `None` writes nothing.
    pub output_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            grid: GridSpec { nx: 64, ny: 64, dx: 1.0, dy: 1.0 },
            physics: PhysicsParams::default(),
            policy: StabilityPolicy::default(),
            executor: ExecutorKind::Naive,
            boundaries: Boundaries::reflective(),
            t_end: 10.0,
            snapshot_every: 0.0,
            initial: InitialCondition::FlatPool { depth: 1.0 },
            output_dir: None,
        }
    }
}

impl ScenarioConfig {
    /// Checks every parameter group without building the initial state.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.grid.validate()?;
        self.physics.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.policy.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        self.executor.validate(&self.grid).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ScenarioError::Invalid(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.snapshot_every >= 0.0 && self.snapshot_every.is_finite()) {
            return Err(ScenarioError::Invalid(format!(
                "snapshot_every must be finite and >= 0, got {}",
                self.snapshot_every
            )));
        }
        Ok(())
    }

    /// Builds the initial state and checks it against the policy and boundaries.
    pub fn initial_state(&self) -> Result<FieldSet, ScenarioError> {
        self.validate()?;
        let fs = self.initial.build(self.grid)?;
        self.boundaries.validate(&fs, self.policy.h_min)?;
        stability_guard(&fs, &self.policy).map_err(|e| ScenarioError::Invalid(format!("initial state: {e}")))?;
        Ok(fs)
    }
}

fn square(n: usize) -> Result<GridSpec, ScenarioError> {
    if n < MIN_GENERATOR_SIDE {
        return Err(ScenarioError::TooSmall { n });
    }
    Ok(GridSpec::new(n, n, 1.0, 1.0)?)
}

/// Policy shared by the 2D datasets. The unsplit MacCormack update is only
/// stable for a Courant number somewhat below the 1D bound.
fn dataset_policy() -> StabilityPolicy {
    StabilityPolicy { cfl: DATASET_CFL, ..StabilityPolicy::default() }
}

/// Courant number used by the generated 2D datasets.
pub const DATASET_CFL: f64 = 0.5;

/// Five Gaussian drops on a 1 m pool in a closed box: one at the centre and
/// four at `(±n/4, ±n/4)` cells from it, each 0.3 m high with radius `n/20` cells.
/// `big` only changes the name; pass `n = BIG_SIDE` for the large dataset.
pub fn gen_five_drops(n: usize, big: bool) -> Result<ScenarioConfig, ScenarioError> {
    let grid = square(n)?;
    let (lx, ly) = grid.extent();
    let (cx, cy) = (lx / 2.0, ly / 2.0);
    let off = (n / 4) as f64 * grid.dx;
    let radius = n as f64 / 20.0 * grid.dx;
    let amplitude = 0.3;
    let mut drops = vec![Drop { cx, cy, radius, amplitude }];
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
        drops.push(Drop { cx: cx + sx * off, cy: cy + sy * off, radius, amplitude });
    }
    Ok(ScenarioConfig {
        name: if big { "five_drops_big" } else { "five_drops" }.into(),
        grid,
        policy: dataset_policy(),
        boundaries: Boundaries::reflective(),
        t_end: 100.0,
        initial: InitialCondition::Drops { depth: 1.0, drops },
        ..ScenarioConfig::default()
    })
}

/// Default inflow discharge per unit width for [`gen_inlet_flood`], m^2/s.
pub const INLET_DISCHARGE: f64 = 0.05;

/// Flat 1 m pool fed through the west edge at [`INLET_DISCHARGE`]; other edges closed.
pub fn gen_inlet_flood(n: usize) -> Result<ScenarioConfig, ScenarioError> {
    gen_inlet_flood_with(n, INLET_DISCHARGE)
}

pub fn gen_inlet_flood_with(n: usize, q_n: f64) -> Result<ScenarioConfig, ScenarioError> {
    let grid = square(n)?;
    let mut boundaries = Boundaries::reflective();
    boundaries.west = BoundaryKind::InflowDischarge { q_n, h_in: 1.0 };
    Ok(ScenarioConfig {
        name: "inlet_flood".into(),
        grid,
        policy: dataset_policy(),
        boundaries,
        t_end: 1000.0,
        initial: InitialCondition::FlatPool { depth: 1.0 },
        ..ScenarioConfig::default()
    })
}

/// Discharge per unit width of uniform flow at `depth` under Manning friction.
pub fn manning_uniform_discharge(depth: f64, slope: f64, manning_n: f64) -> f64 {
    depth.powf(5.0 / 3.0) * slope.sqrt() / manning_n
}

/// Sloping channel with Manning friction: uniform-flow discharge enters at
/// the west edge, the east edge holds the water surface 1 m above the bed,
/// north and south are walls.
pub fn gen_channel_flood(n: usize) -> Result<ScenarioConfig, ScenarioError> {
    gen_channel_flood_with(n, 0.001, 0.03)
}

pub fn gen_channel_flood_with(n: usize, slope: f64, manning_n: f64) -> Result<ScenarioConfig, ScenarioError> {
    let grid = square(n)?;
    let depth = 1.0;
    let q_n = if slope > 0.0 && manning_n > 0.0 { manning_uniform_discharge(depth, slope, manning_n) } else { 0.0 };
    // Bed elevation of the easternmost cell centre.
    let z_east = slope * 0.5 * grid.dx;
    let mut boundaries = Boundaries::reflective();
    boundaries.west = BoundaryKind::InflowDischarge { q_n, h_in: depth };
    boundaries.east = BoundaryKind::FixedElevation { eta_out: z_east + depth };
    Ok(ScenarioConfig {
        name: "channel_flood".into(),
        grid,
        physics: PhysicsParams { manning_n, ..PhysicsParams::default() },
        policy: dataset_policy(),
        boundaries,
        t_end: 1000.0,
        initial: InitialCondition::ChannelSlope { slope, depth },
        ..ScenarioConfig::default()
    })
}

/// A single 1 m/s vortex of core radius `n/10` cells at the centre of a
/// 10 m deep closed pool.
pub fn gen_vortex(n: usize) -> Result<ScenarioConfig, ScenarioError> {
    gen_vortex_with(n, 1.0)
}

pub fn gen_vortex_with(n: usize, peak_speed: f64) -> Result<ScenarioConfig, ScenarioError> {
    let grid = square(n)?;
    let (lx, ly) = grid.extent();
    Ok(ScenarioConfig {
        name: "vortex".into(),
        grid,
        policy: dataset_policy(),
        boundaries: Boundaries::reflective(),
        t_end: 1000.0,
        initial: InitialCondition::VortexField {
            cx: lx / 2.0,
            cy: ly / 2.0,
            peak_speed,
            core_radius: n as f64 / 10.0 * grid.dx,
            depth: 10.0,
        },
        ..ScenarioConfig::default()
    })
}

/// Rows across the dam-break channel. Four rows let every executor split it.
pub const DAM_BREAK_ROWS: usize = 4;

/// Artificial diffusion used by the dam-break validation scenario.
pub const DAM_BREAK_NU: f64 = 0.02;


/// Wet-bed dam break along x: `n` cells of 1 m, dam in the middle, all
/// edges transmissive. Ends when the left-going rarefaction head has
/// covered a quarter of the channel.
pub fn gen_dam_break(n: usize, h_l: f64, h_r: f64) -> Result<ScenarioConfig, ScenarioError> {
    if n < 8 {
        return Err(ScenarioError::TooSmall { n });
    }
    let grid = GridSpec::new(n, DAM_BREAK_ROWS, 1.0, 1.0)?;
    let physics = PhysicsParams { nu_art: DAM_BREAK_NU, ..PhysicsParams::default() };
    let (lx, _) = grid.extent();
    let t_end = lx / (4.0 * (physics.g * h_l.max(h_r)).sqrt());
    Ok(ScenarioConfig {
        name: "dam_break".into(),
        grid,
        physics,
        boundaries: Boundaries::uniform(BoundaryKind::Transmissive),
        t_end,
        initial: InitialCondition::DamBreak1D { split_x: lx / 2.0, h_left: h_l, h_right: h_r },
        ..ScenarioConfig::default()
    })
}

/// Generator lookup by name with the standard side length as default.
pub fn generate(name: &str, n: Option<usize>) -> Result<ScenarioConfig, ScenarioError> {
    match name {
        "five_drops" => gen_five_drops(n.unwrap_or(STANDARD_SIDE), false),
        "five_drops_big" => gen_five_drops(n.unwrap_or(BIG_SIDE), true),
        "inlet_flood" => gen_inlet_flood(n.unwrap_or(STANDARD_SIDE)),
        "channel_flood" => gen_channel_flood(n.unwrap_or(BIG_SIDE)),
        "vortex" => gen_vortex(n.unwrap_or(BIG_SIDE)),
        "dam_break" => gen_dam_break(n.unwrap_or(400), 1.0, 0.5),
        other => Err(ScenarioError::Invalid(format!(
            "unknown scenario `{other}` (expected one of {})",
            GENERATORS.join(", ")
        ))),
    }
}

pub const GENERATORS: [&str; 6] = ["five_drops", "five_drops_big", "inlet_flood", "channel_flood", "vortex", "dam_break"];
