//! Structured-grid data model.
//!
//! All per-cell fields are stored row-major with `x` fastest
//! (`index = j * nx + i`). Naive, tiled and decomposed executors address
//! the same memory image, which is what makes bitwise comparison between
//! them meaningful.

use std::fmt;

use crate::scheme::CellVec;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 3x3 cells, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("cell spacing must be positive and finite, got dx={dx}, dy={dy}")]
    BadSpacing { dx: f64, dy: f64 },
    #[error("cell ({i}, {j}) outside {nx}x{ny} grid")]
    OutOfBounds { i: usize, j: usize, nx: usize, ny: usize },
    #[error("field `{field}` has {got} entries, grid needs {want}")]
    FieldLength { field: &'static str, got: usize, want: usize },
    #[error("invalid boundary on {edge} edge: {reason}")]
    BadBoundary { edge: Edge, reason: String },
}

/// Grid dimensions and cell spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self, GridError> {
        let spec = Self { nx, ny, dx, dy };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.nx < 3 || self.ny < 3 {
            return Err(GridError::TooSmall { nx: self.nx, ny: self.ny });
        }
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.dx) || !ok(self.dy) {
            return Err(GridError::BadSpacing { dx: self.dx, dy: self.dy });
        }
        Ok(())
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_index(&self, i: usize, j: usize) -> Result<usize, GridError> {
        if i >= self.nx || j >= self.ny {
            return Err(GridError::OutOfBounds { i, j, nx: self.nx, ny: self.ny });
        }
        Ok(j * self.nx + i)
    }

    /// Inverse of [`GridSpec::cell_index`].
    #[inline]
    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    /// Physical extent of the domain, `(nx * dx, ny * dy)`.
    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dy)
    }
}

/// One of the four domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    North,
    South,
    East,
    West,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::North, Edge::South, Edge::East, Edge::West];

    pub fn name(self) -> &'static str {
        match self {
            Edge::North => "north",
            Edge::South => "south",
            Edge::East => "east",
            Edge::West => "west",
        }
    }

    /// True for the edges whose outward normal lies along `x`.
    pub fn is_x_normal(self) -> bool {
        matches!(self, Edge::East | Edge::West)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Boundary treatment for one edge.
///
/// `InflowDischarge::q_n > 0` always means flow into the domain; the ghost
/// construction maps it to the right axis sign per edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    ReflectiveWall,
    Transmissive,
    InflowDischarge { q_n: f64, h_in: f64 },
    FixedElevation { eta_out: f64 },
}

/// Per-edge boundary assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundaries {
    pub north: BoundaryKind,
    pub south: BoundaryKind,
    pub east: BoundaryKind,
    pub west: BoundaryKind,
}

impl Boundaries {
    pub fn uniform(kind: BoundaryKind) -> Self {
        Self { north: kind, south: kind, east: kind, west: kind }
    }

    pub fn reflective() -> Self {
        Self::uniform(BoundaryKind::ReflectiveWall)
    }

    pub fn get(&self, edge: Edge) -> BoundaryKind {
        match edge {
            Edge::North => self.north,
            Edge::South => self.south,
            Edge::East => self.east,
            Edge::West => self.west,
        }
    }

    pub fn set(&mut self, edge: Edge, kind: BoundaryKind) {
        match edge {
            Edge::North => self.north = kind,
            Edge::South => self.south = kind,
            Edge::East => self.east = kind,
            Edge::West => self.west = kind,
        }
    }

    /// Checks the per-edge invariants against the bed along each edge.
    pub fn validate(&self, fs: &FieldSet, h_min: f64) -> Result<(), GridError> {
        for edge in Edge::ALL {
            match self.get(edge) {
                BoundaryKind::InflowDischarge { q_n, h_in } => {
                    if !q_n.is_finite() {
                        return Err(GridError::BadBoundary {
                            edge,
                            reason: format!("inflow discharge {q_n} is not finite"),
                        });
                    }
                    if !(h_in >= h_min) {
                        return Err(GridError::BadBoundary {
                            edge,
                            reason: format!("inflow depth {h_in} below h_min {h_min}"),
                        });
                    }
                }
                BoundaryKind::FixedElevation { eta_out } => {
                    let zmax = fs.edge_cells(edge).map(|k| fs.z[k]).fold(f64::MIN, f64::max);
                    if !(eta_out >= zmax + h_min) {
                        return Err(GridError::BadBoundary {
                            edge,
                            reason: format!(
                                "fixed elevation {eta_out} below bed {zmax} plus h_min {h_min}"
                            ),
                        });
                    }
                }
                BoundaryKind::ReflectiveWall | BoundaryKind::Transmissive => {}
            }
        }
        Ok(())
    }
}

impl Default for Boundaries {
    fn default() -> Self {
        Self::reflective()
    }
}

/// Mass flux through `edge` fixed by its boundary kind, signed along the
/// edge's axis: zero for a wall, the inflow discharge for an inlet, `None`
/// for open edges whose flux follows the flow.
#[inline]
pub fn prescribed_mass_flux(edge: Edge, boundary: BoundaryKind) -> Option<f64> {
    match boundary {
        BoundaryKind::ReflectiveWall => Some(0.0),
        BoundaryKind::InflowDischarge { q_n, .. } => Some(match edge {
            Edge::West | Edge::South => q_n,
            Edge::East | Edge::North => -q_n,
        }),
        BoundaryKind::Transmissive | BoundaryKind::FixedElevation { .. } => None,
    }
}

/// Ghost state for the cell just outside `edge`, built from the adjacent
/// interior cell. The flag is set when a fixed elevation had to be clamped
/// up to `h_min`.
#[inline]
pub fn ghost_value(
    edge: Edge,
    boundary: BoundaryKind,
    interior: CellVec,
    z_interior: f64,
    h_min: f64,
) -> (CellVec, bool) {
    match boundary {
        BoundaryKind::ReflectiveWall => {
            let ghost = if edge.is_x_normal() {
                CellVec::new(interior.h, -interior.qx, interior.qy)
            } else {
                CellVec::new(interior.h, interior.qx, -interior.qy)
            };
            (ghost, false)
        }
        BoundaryKind::Transmissive => (interior, false),
        BoundaryKind::InflowDischarge { q_n, h_in } => {
            let ghost = match edge {
                Edge::West => CellVec::new(h_in, q_n, 0.0),
                Edge::East => CellVec::new(h_in, -q_n, 0.0),
                Edge::South => CellVec::new(h_in, 0.0, q_n),
                Edge::North => CellVec::new(h_in, 0.0, -q_n),
            };
            (ghost, false)
        }
        BoundaryKind::FixedElevation { eta_out } => {
            let depth = eta_out - z_interior;
            let clamped = !(depth >= h_min);
            let h = if clamped { h_min } else { depth };
            (CellVec::new(h, interior.qx, interior.qy), clamped)
        }
    }
}

/// Simulation state: bathymetry plus conservative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    pub spec: GridSpec,
    /// Bed elevation, m.
    pub z: Vec<f64>,
    /// Water depth, m.
    pub h: Vec<f64>,
    /// x-momentum `h * u`, m^2/s.
    pub qx: Vec<f64>,
    /// y-momentum `h * v`, m^2/s.
    pub qy: Vec<f64>,
    /// Simulation time, s.
    pub t: f64,
}

impl FieldSet {
    /// Flat bed, uniform depth, water at rest.
    pub fn still_water(spec: GridSpec, depth: f64) -> Self {
        let n = spec.cells();
        Self {
            spec,
            z: vec![0.0; n],
            h: vec![depth; n],
            qx: vec![0.0; n],
            qy: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn from_parts(
        spec: GridSpec,
        z: Vec<f64>,
        h: Vec<f64>,
        qx: Vec<f64>,
        qy: Vec<f64>,
        t: f64,
    ) -> Result<Self, GridError> {
        spec.validate()?;
        let want = spec.cells();
        for (field, len) in [("z", z.len()), ("h", h.len()), ("qx", qx.len()), ("qy", qy.len())] {
            if len != want {
                return Err(GridError::FieldLength { field, got: len, want });
            }
        }
        Ok(Self { spec, z, h, qx, qy, t })
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> CellVec {
        CellVec::new(self.h[idx], self.qx[idx], self.qy[idx])
    }

    #[inline]
    pub fn set_cell(&mut self, idx: usize, c: CellVec) {
        self.h[idx] = c.h;
        self.qx[idx] = c.qx;
        self.qy[idx] = c.qy;
    }

    /// Water-surface elevation `z + h` at a flat index.
    pub fn surface_elevation(&self, idx: usize) -> Result<f64, GridError> {
        if idx >= self.spec.cells() {
            let (i, j) = self.spec.cell_coords(idx);
            return Err(GridError::OutOfBounds { i, j, nx: self.spec.nx, ny: self.spec.ny });
        }
        Ok(self.z[idx] + self.h[idx])
    }

    /// `dx * dy * sum(h)`, summed serially in row-major order.
    pub fn total_volume(&self) -> f64 {
        let mut sum = 0.0;
        for &h in &self.h {
            sum += h;
        }
        sum * self.spec.dx * self.spec.dy
    }

    /// Flat indices of the interior cells adjacent to `edge`.
    pub fn edge_cells(&self, edge: Edge) -> Box<dyn Iterator<Item = usize> + '_> {
        let GridSpec { nx, ny, .. } = self.spec;
        match edge {
            Edge::West => Box::new((0..ny).map(move |j| j * nx)),
            Edge::East => Box::new((0..ny).map(move |j| j * nx + nx - 1)),
            Edge::South => Box::new(0..nx),
            Edge::North => Box::new((0..nx).map(move |i| (ny - 1) * nx + i)),
        }
    }

    /// Bitwise equality of every field and the time stamp.
    pub fn bit_eq(&self, other: &FieldSet) -> bool {
        let same = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.spec == other.spec
            && self.t.to_bits() == other.t.to_bits()
            && same(&self.z, &other.z)
            && same(&self.h, &other.h)
            && same(&self.qx, &other.qx)
            && same(&self.qy, &other.qy)
    }
}

/// Bed slopes per cell, precomputed once from the bathymetry.
///
/// Central differences in the interior, one-sided at the domain edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BedSlopes {
    pub dzdx: Vec<f64>,
    pub dzdy: Vec<f64>,
}

impl BedSlopes {
    pub fn from_bed(spec: &GridSpec, z: &[f64]) -> Self {
        let GridSpec { nx, ny, dx, dy } = *spec;
        let mut dzdx = vec![0.0; nx * ny];
        let mut dzdy = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                dzdx[k] = if i == 0 {
                    (z[k + 1] - z[k]) / dx
                } else if i == nx - 1 {
                    (z[k] - z[k - 1]) / dx
                } else {
                    (z[k + 1] - z[k - 1]) / (2.0 * dx)
                };
                dzdy[k] = if j == 0 {
                    (z[k + nx] - z[k]) / dy
                } else if j == ny - 1 {
                    (z[k] - z[k - nx]) / dy
                } else {
                    (z[k + nx] - z[k - nx]) / (2.0 * dy)
                };
            }
        }
        Self { dzdx, dzdy }
    }
}
