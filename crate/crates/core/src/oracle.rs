//! Reference computations for validation: the wet-bed dam-break solution,
//! volume accounting and mirror-symmetry checks.
//!
//! Nothing here calls into the scheme or the executors.

use std::fmt::Write as _;

use crate::grid::FieldSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("dam break needs h_l >= h_r > 0 and g > 0, got h_l={h_l}, h_r={h_r}, g={g}")]
    BadInput { h_l: f64, h_r: f64, g: f64 },
    #[error("bisection did not converge in {0} iterations")]
    NoConvergence(usize),
}

/// Star state of the wet-bed dam break: a rarefaction into the deep side
/// and a shock into the shallow side, still water on both sides initially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamBreakSolution {
    pub h_l: f64,
    pub h_r: f64,
    pub g: f64,
    pub h_star: f64,
    pub u_star: f64,
    pub shock_speed: f64,
}

const MAX_ITERATIONS: usize = 200;
const REL_TOL: f64 = 1e-12;

/// Velocity behind a shock moving into still water of depth `h_r` with depth `h` behind it.
fn shock_velocity(h: f64, h_r: f64, g: f64) -> f64 {
    (h - h_r) * (0.5 * g * (h + h_r) / (h * h_r)).sqrt()
}

/// Velocity at the tail of a left rarefaction from still water `h_l` down to depth `h`.
fn rarefaction_velocity(h: f64, h_l: f64, g: f64) -> f64 {
    2.0 * ((g * h_l).sqrt() - (g * h).sqrt())
}

impl DamBreakSolution {
    /// Residual of the star-state compatibility equation at depth `h`.
    pub fn residual(&self, h: f64) -> f64 {
        rarefaction_velocity(h, self.h_l, self.g) - shock_velocity(h, self.h_r, self.g)
    }

    /// Speed of the rarefaction head (moves into the deep side).
    pub fn head_speed(&self) -> f64 {
        -(self.g * self.h_l).sqrt()
    }

    /// Speed of the rarefaction tail.
    pub fn tail_speed(&self) -> f64 {
        self.u_star - (self.g * self.h_star).sqrt()
    }
}

/// Solves for the star state by bisection on `(h_r, h_l)`.
pub fn solve_stoker(h_l: f64, h_r: f64, g: f64) -> Result<DamBreakSolution, OracleError> {
    if !(h_r > 0.0 && h_l >= h_r && g > 0.0 && h_l.is_finite() && g.is_finite()) {
        return Err(OracleError::BadInput { h_l, h_r, g });
    }
    let mut sol = DamBreakSolution { h_l, h_r, g, h_star: h_r, u_star: 0.0, shock_speed: (g * h_r).sqrt() };
    if h_l == h_r {
        return Ok(sol);
    }
    let (mut lo, mut hi) = (h_r, h_l);
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if sol.residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_TOL * hi {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::NoConvergence(MAX_ITERATIONS));
    }
    let h_star = 0.5 * (lo + hi);
    sol.h_star = h_star;
    sol.u_star = shock_velocity(h_star, h_r, g);
    // Mass balance across the shock with still water ahead of it.
    sol.shock_speed = h_star * sol.u_star / (h_star - h_r);
    Ok(sol)
}

/// Depth and velocity at `x` metres from the dam, `t > 0` seconds after release.
pub fn sample_profile(sol: &DamBreakSolution, x: f64, t: f64) -> (f64, f64) {
    let xi = x / t;
    let c_l = (sol.g * sol.h_l).sqrt();
    if xi <= sol.head_speed() {
        (sol.h_l, 0.0)
    } else if xi <= sol.tail_speed() {
        let c = (2.0 * c_l - xi) / 3.0;
        (c * c / sol.g, 2.0 * (c_l + xi) / 3.0)
    } else if xi < sol.shock_speed {
        (sol.h_star, sol.u_star)
    } else {
        (sol.h_r, 0.0)
    }
}

/// `x,h,u` rows of the exact profile, for plotting.
pub fn profile_csv(sol: &DamBreakSolution, xs: &[f64], t: f64) -> String {
    let mut s = String::from("x,h,u\n");
    for &x in xs {
        let (h, u) = sample_profile(sol, x, t);
        let _ = writeln!(s, "{x:.16e},{h:.16e},{u:.16e}");
    }
    s
}

/// Relative L2 distance `|a - b| / |b|`.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Total water volume at one instant and the net volume that has crossed
/// the boundaries into the domain since the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeSample {
    pub volume: f64,
    pub net_inflow: f64,
}

/// Largest `|V(t) - V(0) - inflow(t)| / V(0)` over the samples; the first
/// sample is the reference.
pub fn conservation_report(samples: &[VolumeSample]) -> f64 {
    let Some(first) = samples.first() else { return 0.0 };
    samples
        .iter()
        .map(|s| ((s.volume - first.volume) - (s.net_inflow - first.net_inflow)).abs() / first.volume)
        .fold(0.0, f64::max)
}

/// Mirror used by [`symmetry_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `i -> nx - 1 - i`; x-momentum changes sign.
    MirrorX,
    /// `j -> ny - 1 - j`; y-momentum changes sign.
    MirrorY,
    /// `(i, j) -> (j, i)`; the momenta swap. Needs a square grid.
    Transpose,
}

/// Largest mismatch between each cell and its mirror image:
/// `|h - h'|`, and the momenta compared after the mirror's sign flip or swap.
pub fn symmetry_error(fs: &FieldSet, axis: Axis) -> f64 {
    let (nx, ny) = (fs.spec.nx, fs.spec.ny);
    if axis == Axis::Transpose {
        assert_eq!(nx, ny, "transpose symmetry needs a square grid");
    }
    let mut worst = 0.0f64;
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let (m, qx_m, qy_m) = match axis {
                Axis::MirrorX => {
                    let m = j * nx + (nx - 1 - i);
                    (m, -fs.qx[m], fs.qy[m])
                }
                Axis::MirrorY => {
                    let m = (ny - 1 - j) * nx + i;
                    (m, fs.qx[m], -fs.qy[m])
                }
                Axis::Transpose => {
                    let m = i * nx + j;
                    (m, fs.qy[m], fs.qx[m])
                }
            };
            worst = worst
                .max((fs.h[k] - fs.h[m]).abs())
                .max((fs.qx[k] - qx_m).abs())
                .max((fs.qy[k] - qy_m).abs());
        }
    }
    worst
}
