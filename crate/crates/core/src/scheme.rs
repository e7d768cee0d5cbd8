//! Per-cell numerics for the conservative 2D shallow-water equations.
//!
//! The state is `U = (h, hu, hv)` with fluxes
//! `F(U) = (hu, hu^2/h + g h^2/2, hu hv/h)` and
//! `G(U) = (hv, hu hv/h, hv^2/h + g h^2/2)`.
//! One MacCormack step is a one-sided predictor followed by a corrector that
//! differences in the opposite direction.
//!
//! Every function here is pure. Sums that mix the `x` and `y` directions are
//! grouped as `(x_term + y_term)` so that transposing the problem (swapping the
//! axes and `qx <-> qy`) gives bit-identical results.

use std::ops::{Add, Mul, Neg, Sub};

/// Conservative per-cell triple `(h, qx, qy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellVec {
    pub h: f64,
    pub qx: f64,
    pub qy: f64,
}

impl CellVec {
    #[inline]
    pub const fn new(h: f64, qx: f64, qy: f64) -> Self {
        Self { h, qx, qy }
    }

    pub const NAN: CellVec = CellVec::new(f64::NAN, f64::NAN, f64::NAN);

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.h.is_finite() && self.qx.is_finite() && self.qy.is_finite()
    }

    /// Swap the axes: `(h, qx, qy) -> (h, qy, qx)`.
    #[inline]
    pub fn transposed(self) -> Self {
        Self::new(self.h, self.qy, self.qx)
    }

    pub fn bit_eq(&self, other: &CellVec) -> bool {
        self.h.to_bits() == other.h.to_bits()
            && self.qx.to_bits() == other.qx.to_bits()
            && self.qy.to_bits() == other.qy.to_bits()
    }
}

impl Add for CellVec {
    type Output = CellVec;
    #[inline]
    fn add(self, o: CellVec) -> CellVec {
        CellVec::new(self.h + o.h, self.qx + o.qx, self.qy + o.qy)
    }
}

impl Sub for CellVec {
    type Output = CellVec;
    #[inline]
    fn sub(self, o: CellVec) -> CellVec {
        CellVec::new(self.h - o.h, self.qx - o.qx, self.qy - o.qy)
    }
}

impl Mul<CellVec> for f64 {
    type Output = CellVec;
    #[inline]
    fn mul(self, v: CellVec) -> CellVec {
        CellVec::new(self * v.h, self * v.qx, self * v.qy)
    }
}

impl Neg for CellVec {
    type Output = CellVec;
    #[inline]
    fn neg(self) -> CellVec {
        CellVec::new(-self.h, -self.qx, -self.qy)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("depth {h} below h_min {h_min}")]
    DepthBelowMinimum { h: f64, h_min: f64 },
    #[error("non-finite result ({h}, {qx}, {qy})")]
    NonFinite { h: f64, qx: f64, qy: f64 },
    #[error("invalid physics parameter: {0}")]
    BadParameter(String),
}

/// Physical constants used by every equation in the scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
    /// Manning roughness, s/m^(1/3). Zero disables friction.
    pub manning_n: f64,
    /// Artificial-diffusion coefficient in `[0, 0.5)`. Zero disables smoothing.
    pub nu_art: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { g: 9.81, manning_n: 0.0, nu_art: 0.0 }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(SchemeError::BadParameter(format!("g must be > 0, got {}", self.g)));
        }
        if !(self.manning_n >= 0.0 && self.manning_n.is_finite()) {
            return Err(SchemeError::BadParameter(format!(
                "manning_n must be >= 0, got {}",
                self.manning_n
            )));
        }
        if !(self.nu_art >= 0.0 && self.nu_art < 0.5) {
            return Err(SchemeError::BadParameter(format!(
                "nu_art must lie in [0, 0.5), got {}",
                self.nu_art
            )));
        }
        Ok(())
    }
}

/// Which one-sided difference the predictor uses. The corrector always uses
/// the opposite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Forward,
    Backward,
}

impl SweepDirection {
    /// Even steps predict forward, odd steps predict backward.
    pub fn for_step(step_index: u64) -> Self {
        if step_index.is_multiple_of(2) {
            SweepDirection::Forward
        } else {
            SweepDirection::Backward
        }
    }
}

/// Everything a stage update needs besides the neighbouring states.
#[derive(Debug, Clone, Copy)]
pub struct StageContext {
    pub dt: f64,
    pub dx: f64,
    pub dy: f64,
    pub h_min: f64,
    pub physics: PhysicsParams,
}

/// Bed slope at one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BedSlope {
    pub dzdx: f64,
    pub dzdy: f64,
}

#[inline]
fn check_depth(u: CellVec, h_min: f64) -> Result<(), SchemeError> {
    // Written so NaN depths also fail.
    if u.h >= h_min {
        Ok(())
    } else {
        Err(SchemeError::DepthBelowMinimum { h: u.h, h_min })
    }
}

#[inline]
pub fn flux_x(u: CellVec, p: &PhysicsParams, h_min: f64) -> Result<CellVec, SchemeError> {
    check_depth(u, h_min)?;
    Ok(CellVec::new(
        u.qx,
        u.qx * u.qx / u.h + 0.5 * p.g * u.h * u.h,
        u.qx * u.qy / u.h,
    ))
}

#[inline]
pub fn flux_y(u: CellVec, p: &PhysicsParams, h_min: f64) -> Result<CellVec, SchemeError> {
    check_depth(u, h_min)?;
    Ok(CellVec::new(
        u.qy,
        u.qx * u.qy / u.h,
        u.qy * u.qy / u.h + 0.5 * p.g * u.h * u.h,
    ))
}

/// Bed-slope and Manning-friction source terms. Mass has no source.
#[inline]
pub fn source(u: CellVec, slope: BedSlope, p: &PhysicsParams, h_min: f64) -> Result<CellVec, SchemeError> {
    check_depth(u, h_min)?;
    let gh = p.g * u.h;
    let mut sx = -(gh * slope.dzdx);
    let mut sy = -(gh * slope.dzdy);
    if p.manning_n > 0.0 {
        let (vx, vy) = (u.qx / u.h, u.qy / u.h);
        let speed = (vx * vx + vy * vy).sqrt();
        let k = p.g * p.manning_n * p.manning_n * speed / u.h.powf(4.0 / 3.0);
        sx -= k * u.qx;
        sy -= k * u.qy;
    }
    Ok(CellVec::new(0.0, sx, sy))
}

#[inline]
fn finite(u: CellVec) -> Result<CellVec, SchemeError> {
    if u.is_finite() {
        Ok(u)
    } else {
        Err(SchemeError::NonFinite { h: u.h, qx: u.qx, qy: u.qy })
    }
}

/// Prescribed mass flux through the faces a cell shares with its x and y
/// stencil neighbours, set where that neighbour is a ghost across a wall or
/// an inflow edge. Values are signed along the axis, m^2/s.
///
/// A MacCormack face flux is the mean of a committed flux on one side and a
/// predicted flux on the other. Overriding the ghost's mass flux so that this
/// mean equals the prescribed value makes the boundary exactly conservative.
/// Momentum fluxes still come from the ghost state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FaceFlux {
    pub x: Option<f64>,
    pub y: Option<f64>,
}

impl FaceFlux {
    pub const NONE: FaceFlux = FaceFlux { x: None, y: None };

    #[inline]
    fn is_none(&self) -> bool {
        self.x.is_none() && self.y.is_none()
    }
}

/// One MacCormack stage: `base - (ax + ay) + dt_s * s` with the differences
/// scaled by `dt_f / dx` and `dt_f / dy`.
#[inline]
#[allow(clippy::too_many_arguments)]
fn stage(
    ctx: &StageContext,
    base: CellVec,
    fc: CellVec,
    gc: CellVec,
    fn_: CellVec,
    gn: CellVec,
    s: CellVec,
    forward_diff: bool,
    dt_f: f64,
    dt_s: f64,
) -> CellVec {
    let (dfx, dgy) = if forward_diff { (fn_ - fc, gn - gc) } else { (fc - fn_, gc - gn) };
    let ax = (dt_f / ctx.dx) * dfx;
    let ay = (dt_f / ctx.dy) * dgy;
    base - (ax + ay) + dt_s * s
}

/// Predictor `U*` for one cell.
///
/// `nbr_x`/`nbr_y` are the east/north neighbours for a forward sweep and the
/// west/south neighbours for a backward sweep.
#[inline]
pub fn predictor_cell(
    ctx: &StageContext,
    centre: CellVec,
    nbr_x: CellVec,
    nbr_y: CellVec,
    slope: BedSlope,
    dir: SweepDirection,
) -> Result<CellVec, SchemeError> {
    predictor_cell_bc(ctx, centre, nbr_x, nbr_y, slope, dir, FaceFlux::NONE)
}

/// [`predictor_cell`] with prescribed boundary face fluxes.
#[inline]
pub fn predictor_cell_bc(
    ctx: &StageContext,
    centre: CellVec,
    nbr_x: CellVec,
    nbr_y: CellVec,
    slope: BedSlope,
    dir: SweepDirection,
    faces: FaceFlux,
) -> Result<CellVec, SchemeError> {
    let p = &ctx.physics;
    let fc = flux_x(centre, p, ctx.h_min)?;
    let gc = flux_y(centre, p, ctx.h_min)?;
    let mut fn_ = flux_x(nbr_x, p, ctx.h_min)?;
    let mut gn = flux_y(nbr_y, p, ctx.h_min)?;
    let s = source(centre, slope, p, ctx.h_min)?;
    let forward = dir == SweepDirection::Forward;
    let mut out = stage(ctx, centre, fc, gc, fn_, gn, s, forward, ctx.dt, ctx.dt);
    if !faces.is_none() {
        // The predicted momenta do not depend on the ghost's mass flux, so
        // they can fix it: face flux = (ghost flux + predicted flux) / 2.
        if let Some(m) = faces.x {
            fn_.h = 2.0 * m - out.qx;
        }
        if let Some(m) = faces.y {
            gn.h = 2.0 * m - out.qy;
        }
        out.h = stage(ctx, centre, fc, gc, fn_, gn, s, forward, ctx.dt, ctx.dt).h;
    }
    finite(out)
}

/// Corrector `U^{n+1}` for one cell.
///
/// `dir` is the predictor's direction; `star_x`/`star_y` are the predicted
/// states on the opposite side (west/south after a forward predictor).
#[inline]
pub fn corrector_cell(
    ctx: &StageContext,
    old: CellVec,
    star: CellVec,
    star_x: CellVec,
    star_y: CellVec,
    slope: BedSlope,
    dir: SweepDirection,
) -> Result<CellVec, SchemeError> {
    corrector_cell_bc(ctx, old, star, star_x, star_y, slope, dir, FaceFlux::NONE)
}

/// [`corrector_cell`] with prescribed boundary face fluxes.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn corrector_cell_bc(
    ctx: &StageContext,
    old: CellVec,
    star: CellVec,
    star_x: CellVec,
    star_y: CellVec,
    slope: BedSlope,
    dir: SweepDirection,
    faces: FaceFlux,
) -> Result<CellVec, SchemeError> {
    let p = &ctx.physics;
    let fc = flux_x(star, p, ctx.h_min)?;
    let gc = flux_y(star, p, ctx.h_min)?;
    let mut fn_ = flux_x(star_x, p, ctx.h_min)?;
    let mut gn = flux_y(star_y, p, ctx.h_min)?;
    // Face flux = (committed flux + ghost predicted flux) / 2.
    if let Some(m) = faces.x {
        fn_.h = 2.0 * m - old.qx;
    }
    if let Some(m) = faces.y {
        gn.h = 2.0 * m - old.qy;
    }
    let s = source(star, slope, p, ctx.h_min)?;
    let forward = dir == SweepDirection::Forward;
    let out = stage(ctx, 0.5 * (old + star), fc, gc, fn_, gn, s, !forward, 0.5 * ctx.dt, 0.5 * ctx.dt);
    finite(out)
}

/// `nu_art` times the 5-point Laplacian of the neighbourhood.
#[inline]
pub fn diffusion(centre: CellVec, east: CellVec, west: CellVec, north: CellVec, south: CellVec, nu_art: f64) -> CellVec {
    let ring = (east + west) + (north + south);
    nu_art * (ring - 4.0 * centre)
}

/// Artificial-diffusion pass `U + nu_art * (sum(neighbours) - 4 U)`.
#[inline]
pub fn smooth_cell(centre: CellVec, east: CellVec, west: CellVec, north: CellVec, south: CellVec, nu_art: f64) -> CellVec {
    if nu_art == 0.0 {
        return centre;
    }
    centre + diffusion(centre, east, west, north, south, nu_art)
}

/// Characteristic speeds `(|u| + c, |v| + c)` with `c = sqrt(g h)`.
#[inline]
pub fn wave_speed(u: CellVec, p: &PhysicsParams, h_min: f64) -> Result<(f64, f64), SchemeError> {
    check_depth(u, h_min)?;
    let c = (p.g * u.h).sqrt();
    let sx = (u.qx / u.h).abs() + c;
    let sy = (u.qy / u.h).abs() + c;
    if sx.is_finite() && sy.is_finite() {
        Ok((sx, sy))
    } else {
        Err(SchemeError::NonFinite { h: u.h, qx: u.qx, qy: u.qy })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const H_MIN: f64 = 1e-6;

    fn p() -> PhysicsParams {
        PhysicsParams::default()
    }

    fn ctx(dt: f64) -> StageContext {
        StageContext { dt, dx: 1.0, dy: 1.0, h_min: H_MIN, physics: p() }
    }

    #[test]
    fn flux_examples() {
        let f = flux_x(CellVec::new(2.0, 2.0, 0.0), &p(), H_MIN).unwrap();
        assert_relative_eq!(f.h, 2.0);
        assert_relative_eq!(f.qx, 21.62, epsilon = 1e-12);
        assert_eq!(f.qy, 0.0);
        let f = flux_x(CellVec::new(1.0, 0.0, 0.0), &p(), H_MIN).unwrap();
        assert_eq!(f, CellVec::new(0.0, 4.905, 0.0));
        let f = flux_x(CellVec::new(1.0, 0.0, 3.0), &p(), H_MIN).unwrap();
        assert_eq!(f, CellVec::new(0.0, 4.905, 0.0));

        let g = flux_y(CellVec::new(2.0, 0.0, 2.0), &p(), H_MIN).unwrap();
        assert_relative_eq!(g.qy, 21.62, epsilon = 1e-12);
        assert_eq!((g.h, g.qx), (2.0, 0.0));
        let g = flux_y(CellVec::new(1.0, 0.0, 0.0), &p(), H_MIN).unwrap();
        assert_eq!(g, CellVec::new(0.0, 0.0, 4.905));
    }

    #[test]
    fn flux_rejects_thin_and_nan_depth() {
        for h in [0.0, -0.01, 1e-7, f64::NAN] {
            let u = CellVec::new(h, 0.0, 0.0);
            assert!(flux_x(u, &p(), H_MIN).is_err());
            assert!(flux_y(u, &p(), H_MIN).is_err());
            assert!(source(u, BedSlope::default(), &p(), H_MIN).is_err());
            assert!(wave_speed(u, &p(), H_MIN).is_err());
        }
    }

    #[test]
    fn source_examples() {
        let flat = BedSlope::default();
        let s = source(CellVec::new(1.3, 0.4, -0.2), flat, &p(), H_MIN).unwrap();
        assert_eq!((s.h, s.qx, s.qy), (0.0, 0.0, 0.0));
        let s = source(CellVec::new(1.0, 0.0, 0.0), BedSlope { dzdx: 0.01, dzdy: 0.0 }, &p(), H_MIN).unwrap();
        assert_relative_eq!(s.qx, -0.0981, epsilon = 1e-15);
        assert_eq!(s.qy, 0.0);
        let rough = PhysicsParams { manning_n: 0.03, ..p() };
        let s = source(CellVec::new(1.0, 0.0, 0.0), flat, &rough, H_MIN).unwrap();
        assert_eq!((s.qx, s.qy), (0.0, 0.0));
    }

    #[test]
    fn manning_friction_matches_hand_value() {
        let rough = PhysicsParams { manning_n: 0.03, ..p() };
        let u = CellVec::new(2.0, 1.2, 1.6);
        let s = source(u, BedSlope::default(), &rough, H_MIN).unwrap();
        // |V| = |(0.6, 0.8)| = 1, h^(4/3) = 2^(4/3)
        let k = 9.81 * 0.0009 / 2f64.powf(4.0 / 3.0);
        assert_relative_eq!(s.qx, -k * 1.2, max_relative = 1e-14);
        assert_relative_eq!(s.qy, -k * 1.6, max_relative = 1e-14);
    }

    #[test]
    fn wave_speed_examples() {
        let (sx, sy) = wave_speed(CellVec::new(1.0, 0.0, 0.0), &p(), H_MIN).unwrap();
        assert_relative_eq!(sx, 3.132092, epsilon = 1e-6);
        assert_eq!(sx, sy);
        let (sx, _) = wave_speed(CellVec::new(1.0, 1.0, 0.0), &p(), H_MIN).unwrap();
        assert_eq!(sx, 1.0 + 9.81f64.sqrt());
        let (a, _) = wave_speed(CellVec::new(1.0, 0.5, 0.0), &p(), H_MIN).unwrap();
        let (b, _) = wave_speed(CellVec::new(4.0, 2.0, 0.0), &p(), H_MIN).unwrap();
        assert_relative_eq!(b - 0.5, 2.0 * (a - 0.5), max_relative = 1e-15);
    }

    #[test]
    fn smooth_examples() {
        let c = CellVec::new(1.0, 0.1, 0.2);
        let n = CellVec::new(2.0, 0.3, -0.1);
        assert!(smooth_cell(c, n, n, n, n, 0.0).bit_eq(&c));
        assert!(smooth_cell(c, c, c, c, c, 0.3).bit_eq(&c));
        let two = CellVec::new(2.0, 0.0, 0.0);
        let s = smooth_cell(CellVec::new(1.0, 0.0, 0.0), two, two, two, two, 0.1);
        assert_relative_eq!(s.h, 1.4, epsilon = 1e-15);
    }

    #[test]
    fn smooth_change_equals_scaled_laplacian() {
        let c = CellVec::new(1.0, 0.0, 0.0);
        let e = CellVec::new(1.5, 0.0, 0.0);
        let w = CellVec::new(0.5, 0.0, 0.0);
        let n = CellVec::new(2.0, 0.0, 0.0);
        let s = CellVec::new(1.25, 0.0, 0.0);
        let out = smooth_cell(c, e, w, n, s, 0.2);
        let lap = 1.5 + 0.5 + 2.0 + 1.25 - 4.0;
        assert_relative_eq!(out.h - c.h, 0.2 * lap, epsilon = 1e-15);
    }

    #[test]
    fn uniform_state_is_fixed_point() {
        let u = CellVec::new(1.7, 0.3, -0.4);
        for dir in [SweepDirection::Forward, SweepDirection::Backward] {
            for dt in [0.0, 0.01, 0.3, 5.0] {
                let star = predictor_cell(&ctx(dt), u, u, u, BedSlope::default(), dir).unwrap();
                assert!(star.bit_eq(&u), "predictor moved uniform state: {star:?}");
                let next = corrector_cell(&ctx(dt), u, star, star, star, BedSlope::default(), dir).unwrap();
                assert!(next.bit_eq(&u), "corrector moved uniform state: {next:?}");
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let u = CellVec::new(1.0, 0.2, 0.1);
        let e = CellVec::new(1.3, -0.2, 0.4);
        let nb = CellVec::new(0.8, 0.0, 0.3);
        let slope = BedSlope { dzdx: 0.01, dzdy: -0.02 };
        let star = predictor_cell(&ctx(0.0), u, e, nb, slope, SweepDirection::Forward).unwrap();
        assert!(star.bit_eq(&u));
        let next = corrector_cell(&ctx(0.0), u, star, e, nb, slope, SweepDirection::Forward).unwrap();
        assert!(next.bit_eq(&u));
    }

    #[test]
    fn corrector_of_uniform_prediction_averages() {
        let old = CellVec::new(1.0, 0.2, 0.0);
        let star = CellVec::new(1.2, 0.4, 0.2);
        let next = corrector_cell(&ctx(0.1), old, star, star, star, BedSlope::default(), SweepDirection::Forward).unwrap();
        assert!(next.bit_eq(&(0.5 * (old + star))));
    }

    // Plain scalar re-evaluation of the predictor/corrector formulas: no
    // CellVec arithmetic and no shared flux code.
    fn scalar_flux_x(h: f64, qx: f64, qy: f64, g: f64) -> [f64; 3] {
        [qx, qx * qx / h + g * h * h / 2.0, qx * qy / h]
    }
    fn scalar_flux_y(h: f64, qx: f64, qy: f64, g: f64) -> [f64; 3] {
        [qy, qx * qy / h, qy * qy / h + g * h * h / 2.0]
    }

    #[test]
    fn perturbed_neighbour_matches_scalar_oracle() {
        let g = 9.81;
        let (dt, dx, dy) = (0.1, 1.0, 1.0);
        let me = [1.0, 0.0, 0.0];
        let east = [1.1, 0.0, 0.0];
        let north = [1.0, 0.0, 0.0];
        let fe = scalar_flux_x(east[0], east[1], east[2], g);
        let fm = scalar_flux_x(me[0], me[1], me[2], g);
        let gn = scalar_flux_y(north[0], north[1], north[2], g);
        let gm = scalar_flux_y(me[0], me[1], me[2], g);
        let mut star = [0.0; 3];
        for k in 0..3 {
            star[k] = me[k] - dt / dx * (fe[k] - fm[k]) - dt / dy * (gn[k] - gm[k]);
        }
        // hand value: qx* = -0.1 * 0.5 * 9.81 * (1.21 - 1)
        assert_relative_eq!(star[1], -0.103005, epsilon = 1e-12);

        let c = ctx(dt);
        let got = predictor_cell(
            &c,
            CellVec::new(me[0], me[1], me[2]),
            CellVec::new(east[0], east[1], east[2]),
            CellVec::new(north[0], north[1], north[2]),
            BedSlope::default(),
            SweepDirection::Forward,
        )
        .unwrap();
        assert_relative_eq!(got.h, star[0], epsilon = 1e-14);
        assert_relative_eq!(got.qx, star[1], epsilon = 1e-14);
        assert_relative_eq!(got.qy, star[2], epsilon = 1e-14);

        // Corrector at the east cell: backward differences against this cell's U*.
        let star_east = [1.1, 0.05, 0.0];
        let star_me = star;
        let f_se = scalar_flux_x(star_east[0], star_east[1], star_east[2], g);
        let f_sm = scalar_flux_x(star_me[0], star_me[1], star_me[2], g);
        let south_star = [1.1, 0.05, 0.0];
        let g_se = scalar_flux_y(star_east[0], star_east[1], star_east[2], g);
        let g_ss = scalar_flux_y(south_star[0], south_star[1], south_star[2], g);
        let mut next = [0.0; 3];
        for k in 0..3 {
            next[k] = 0.5 * (east[k] + star_east[k])
                - dt / (2.0 * dx) * (f_se[k] - f_sm[k])
                - dt / (2.0 * dy) * (g_se[k] - g_ss[k]);
        }
        let v = |a: [f64; 3]| CellVec::new(a[0], a[1], a[2]);
        let got = corrector_cell(&c, v(east), v(star_east), v(star_me), v(south_star), BedSlope::default(), SweepDirection::Forward)
            .unwrap();
        assert_relative_eq!(got.h, next[0], epsilon = 1e-14);
        assert_relative_eq!(got.qx, next[1], epsilon = 1e-14);
        assert_relative_eq!(got.qy, next[2], epsilon = 1e-14);
    }

    #[test]
    fn predictor_reports_non_finite() {
        let c = StageContext { dt: f64::INFINITY, ..ctx(0.1) };
        let u = CellVec::new(1.0, 0.0, 0.0);
        let e = CellVec::new(1.1, 0.0, 0.0);
        let err = predictor_cell(&c, u, e, u, BedSlope::default(), SweepDirection::Forward).unwrap_err();
        assert!(matches!(err, SchemeError::NonFinite { .. }));
    }

    #[test]
    fn physics_validation() {
        assert!(p().validate().is_ok());
        assert!(PhysicsParams { g: 0.0, ..p() }.validate().is_err());
        assert!(PhysicsParams { manning_n: -0.1, ..p() }.validate().is_err());
        assert!(PhysicsParams { nu_art: 0.5, ..p() }.validate().is_err());
    }

    fn cell() -> impl Strategy<Value = CellVec> {
        (0.1f64..5.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(h, qx, qy)| CellVec::new(h, qx, qy))
    }

    proptest! {
        #[test]
        fn flux_swap_symmetry(u in cell()) {
            let fy = flux_y(u, &p(), H_MIN).unwrap();
            let fx = flux_x(u.transposed(), &p(), H_MIN).unwrap();
            prop_assert!(fy.bit_eq(&fx.transposed()));
        }

        #[test]
        fn still_water_flux_is_hydrostatic(h in 0.01f64..10.0) {
            let f = flux_x(CellVec::new(h, 0.0, 0.0), &p(), H_MIN).unwrap();
            prop_assert_eq!(f.qx.to_bits(), (0.5 * 9.81 * h * h).to_bits());
        }

        #[test]
        fn stages_are_transpose_symmetric(
            u in cell(), a in cell(), b in cell(), sa in cell(), sb in cell(),
            dzdx in -0.01f64..0.01, dzdy in -0.01f64..0.01, fwd in any::<bool>(),
        ) {
            let dir = if fwd { SweepDirection::Forward } else { SweepDirection::Backward };
            let c = StageContext { dt: 0.01, dx: 1.5, dy: 0.75, h_min: H_MIN,
                                   physics: PhysicsParams { manning_n: 0.02, ..p() } };
            let ct = StageContext { dx: c.dy, dy: c.dx, ..c };
            let slope = BedSlope { dzdx, dzdy };
            let slope_t = BedSlope { dzdx: dzdy, dzdy: dzdx };
            let star = predictor_cell(&c, u, a, b, slope, dir).unwrap();
            let star_t = predictor_cell(&ct, u.transposed(), b.transposed(), a.transposed(), slope_t, dir).unwrap();
            prop_assert!(star.transposed().bit_eq(&star_t));
            let next = corrector_cell(&c, u, star, sa, sb, slope, dir).unwrap();
            let next_t = corrector_cell(&ct, u.transposed(), star_t, sb.transposed(), sa.transposed(), slope_t, dir).unwrap();
            prop_assert!(next.transposed().bit_eq(&next_t));
        }

        #[test]
        fn stages_are_pure(u in cell(), a in cell(), b in cell(), fwd in any::<bool>()) {
            let dir = if fwd { SweepDirection::Forward } else { SweepDirection::Backward };
            let x = predictor_cell(&ctx(0.05), u, a, b, BedSlope::default(), dir).unwrap();
            let y = predictor_cell(&ctx(0.05), u, a, b, BedSlope::default(), dir).unwrap();
            prop_assert!(x.bit_eq(&y));
        }

        #[test]
        fn uniform_fixed_point_any_dt(u in cell(), dt in 0.0f64..10.0, fwd in any::<bool>()) {
            let dir = if fwd { SweepDirection::Forward } else { SweepDirection::Backward };
            let star = predictor_cell(&ctx(dt), u, u, u, BedSlope::default(), dir).unwrap();
            let next = corrector_cell(&ctx(dt), u, star, star, star, BedSlope::default(), dir).unwrap();
            prop_assert!(next.bit_eq(&u));
        }
    }
}
