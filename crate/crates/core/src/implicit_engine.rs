//! Implicit solutions `lhs(x, t, u) = G(arg(x, t, u))` built from pairs of
//! characteristic invariants, and the hodograph formula for `t(x, u)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{pressure_at, Forcing, FunctionHandle, ModelError, PressureSpec};
use crate::numeric::{bisect, grid, integrate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImplicitError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no root in the scanned range")]
    NoRoot,
    #[error("the implicit function is not finite at u = {u}")]
    NonFinite { u: f64 },
    #[error("characteristic turning point between 0 and x = {x} for u = {u}")]
    TurningPoint { x: f64, u: f64 },
    #[error("hodograph time is undefined for vanishing u")]
    ZeroVelocity,
    #[error("invariant pair fails its residual check ({residual:e})")]
    PairResidual { residual: f64 },
    #[error("quadrature did not reach tolerance ({err:e})")]
    Quadrature { err: f64 },
    #[error("need at least two scan points")]
    ScanTooSmall,
}

pub const DEFAULT_SCAN: usize = 4096;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const MAX_PANELS: usize = 1 << 14;

/// Values and partial derivatives `(φ, φ_t, φ_x, φ_u)` of an invariant.
type Partials = [f64; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitRelation {
    pub pressure: PressureSpec,
    #[serde(rename = "G")]
    pub g: FunctionHandle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRoot {
    pub u: f64,
    /// Position in ascending order among the roots at this `(x, t)`.
    pub branch: usize,
}

pub fn make_relation(pressure: &PressureSpec, g: FunctionHandle) -> Result<ImplicitRelation, ImplicitError> {
    pressure.validate()?;
    g.validate()?;
    if matches!(pressure.variant, Forcing::PolyX { .. }) {
        return Err(ModelError::UnsupportedVariant("no invariant pair for polynomial g; use the hodograph").into());
    }
    let rel = ImplicitRelation { pressure: pressure.clone(), g };
    let residual = rel.pair_residual_on_grid();
    if !(residual <= 1e-8) {
        return Err(ImplicitError::PairResidual { residual });
    }
    Ok(rel)
}

impl ImplicitRelation {
    /// `[lhs, arg]` with their partial derivatives.
    pub fn pair(&self, x: f64, t: f64, u: f64) -> [Partials; 2] {
        match &self.pressure.variant {
            Forcing::None => [[x + u * t, u, 1.0, t], [u, 0.0, 0.0, 1.0]],
            Forcing::Constant { k } => [
                [x + u * t - 0.5 * k * t * t, u - k * t, 1.0, t],
                [u - k * t, -k, 0.0, 1.0],
            ],
            Forcing::LinearInX { k } => {
                let (s, c) = (k * t).sin_cos();
                [
                    [k * x * c + u * s, -k * k * x * s + u * k * c, k * c, s],
                    [k * x * s - u * c, k * k * x * c + u * k * s, k * s, -c],
                ]
            }
            Forcing::TimeOnly { .. } => {
                let (k1, k2) = self.pressure.time_integrals(t).expect("time-only");
                let kt = self.pressure.g(x, t);
                [
                    [x + u * t - k2, u - kt * t, 1.0, t],
                    [u - k1, -kt, 0.0, 1.0],
                ]
            }
            Forcing::PolyX { .. } => unreachable!("rejected by make_relation"),
        }
    }

    /// Largest `|φ_t − uφ_x + gφ_u|` of both pair members over a 10×10×3 sample.
    pub fn pair_residual_on_grid(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in grid(-2.0, 2.0, 10) {
            for t in grid(-1.0, 1.0, 10) {
                for u in [-1.3, 0.4, 2.2] {
                    for p in self.pair(x, t, u) {
                        let r = p[1] - u * p[2] + self.pressure.g(x, t) * p[3];
                        worst = worst.max(r.abs());
                    }
                }
            }
        }
        worst
    }

    /// `lhs − G(arg)`.
    pub fn residual(&self, x: f64, t: f64, u: f64) -> Result<f64, ModelError> {
        let [lhs, arg] = self.pair(x, t, u);
        Ok(lhs[0] - self.g.eval(arg[0])?)
    }

    /// `∂u/∂x` and `∂u/∂t` of the implicit solution through `(x, t, u)`.
    pub fn gradient(&self, x: f64, t: f64, u: f64) -> Result<(f64, f64), ModelError> {
        let [lhs, arg] = self.pair(x, t, u);
        let dg = self.g.derivs(arg[0])?[1];
        let hu = lhs[3] - dg * arg[3];
        let hx = lhs[2] - dg * arg[2];
        let ht = lhs[1] - dg * arg[1];
        Ok((-hx / hu, -ht / hu))
    }
}

/// Every root of the relation in `u_range`, ascending and labelled by position.
pub fn solve_u(
    rel: &ImplicitRelation,
    x: f64,
    t: f64,
    u_range: (f64, f64),
    n_scan: usize,
) -> Result<Vec<BranchRoot>, ImplicitError> {
    if n_scan < 2 {
        return Err(ImplicitError::ScanTooSmall);
    }
    let (lo, hi) = u_range;
    let mut samples = Vec::with_capacity(n_scan);
    for u in grid(lo, hi, n_scan) {
        let r = rel.residual(x, t, u).map_err(|_| ImplicitError::NonFinite { u })?;
        if !r.is_finite() {
            return Err(ImplicitError::NonFinite { u });
        }
        samples.push((u, r));
    }
    let f = |u: f64| rel.residual(x, t, u).unwrap_or(f64::NAN);
    let mut roots = Vec::new();
    for (i, &(u, r)) in samples.iter().enumerate() {
        if r == 0.0 {
            roots.push(u);
            continue;
        }
        if i > 0 {
            let (a, ra) = samples[i - 1];
            if ra != 0.0 && (ra < 0.0) != (r < 0.0) {
                roots.push(bisect(&f, a, u, ra, 1e-15));
            }
        }
    }
    if roots.is_empty() {
        return Err(ImplicitError::NoRoot);
    }
    Ok(roots
        .into_iter()
        .enumerate()
        .map(|(branch, u)| BranchRoot { u, branch })
        .collect())
}

/// `u·√(1 + 2(p(x) − p(0))/u²)`, the boundary-function argument of the hodograph.
pub fn hodograph_argument(pressure: &PressureSpec, x: f64, u: f64) -> Result<f64, ImplicitError> {
    let dp = pressure_at(pressure, x)? - pressure.p0;
    let r = 1.0 + 2.0 * dp / (u * u);
    if !(r > 0.0) {
        return Err(ImplicitError::TurningPoint { x, u });
    }
    Ok(u * r.sqrt())
}

/// `t(x, u) = F(u√(1 + 2(p(x)−p(0))/u²)) − (1/u)∫₀ˣ dz/√(1 + 2(p(x)−p(z))/u²)`.
pub fn hodograph_time(
    f: &FunctionHandle,
    pressure: &PressureSpec,
    x: f64,
    u: f64,
    tol: f64,
) -> Result<f64, ImplicitError> {
    if u.abs() < 1e-12 {
        return Err(ImplicitError::ZeroVelocity);
    }
    let px = pressure_at(pressure, x)?;
    let u2 = u * u;
    let radicand = |z: f64| 1.0 + 2.0 * (px - pressure_at(pressure, z).unwrap_or(f64::NAN)) / u2;
    for z in grid(0.0, x, 65) {
        if !(radicand(z) > 0.0) {
            return Err(ImplicitError::TurningPoint { x, u });
        }
    }
    let boundary = f.eval(hodograph_argument(pressure, x, u)?)?;
    if x == 0.0 {
        return Ok(boundary);
    }
    let bad = std::cell::Cell::new(false);
    let q = integrate(
        |z| {
            let r = radicand(z);
            if r > 0.0 {
                1.0 / r.sqrt()
            } else {
                bad.set(true);
                0.0
            }
        },
        0.0,
        x,
        tol,
        MAX_PANELS,
    );
    if bad.get() {
        return Err(ImplicitError::TurningPoint { x, u });
    }
    if !q.converged {
        return Err(ImplicitError::Quadrature { err: q.err });
    }
    Ok(boundary - q.value / u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodographRoots {
    pub roots: Vec<f64>,
    /// Some scanned `u` hit a turning point or `u = 0` and were skipped.
    pub truncated: bool,
}

pub fn invert_hodograph(
    f: &FunctionHandle,
    pressure: &PressureSpec,
    x: f64,
    t: f64,
    u_range: (f64, f64),
) -> Result<HodographRoots, ImplicitError> {
    invert_hodograph_with(f, pressure, x, t, u_range, DEFAULT_SCAN, DEFAULT_QUAD_TOL)
}

/// As [`invert_hodograph`] with an explicit scan size and quadrature tolerance.
pub fn invert_hodograph_with(
    f: &FunctionHandle,
    pressure: &PressureSpec,
    x: f64,
    t: f64,
    u_range: (f64, f64),
    n_scan: usize,
    tol: f64,
) -> Result<HodographRoots, ImplicitError> {
    if n_scan < 2 {
        return Err(ImplicitError::ScanTooSmall);
    }
    let tol = tol.min(1e-12);
    let h = |u: f64| match hodograph_time(f, pressure, x, u, tol) {
        Ok(v) => v - t,
        Err(_) => f64::NAN,
    };
    let mut truncated = false;
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for u in grid(u_range.0, u_range.1, n_scan) {
        let hu = match hodograph_time(f, pressure, x, u, tol) {
            Ok(v) => v - t,
            Err(ImplicitError::TurningPoint { .. } | ImplicitError::ZeroVelocity) => {
                truncated = true;
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if hu == 0.0 {
            roots.push(u);
        } else if let Some((a, ha)) = prev {
            if ha != 0.0 && (ha < 0.0) != (hu < 0.0) {
                let r = bisect(&h, a, u, ha, 1e-15);
                // a sign change through the pole at u = 0 is not a root
                let scale = 1.0 + t.abs();
                if h(r).abs() <= 1e-6 * scale {
                    roots.push(r);
                }
            }
        }
        prev = Some((u, hu));
    }
    if roots.is_empty() {
        return Err(ImplicitError::NoRoot);
    }
    Ok(HodographRoots { roots, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambertw::Branch;
    use crate::series_engine::{build_series, eval_series, lambert_front};
    use crate::model::Profile;
    use std::f64::consts::FRAC_PI_4;

    fn log_form() -> FunctionHandle {
        FunctionHandle::LogForm { l: 1.0, a: 1.0 }
    }

    #[test]
    fn relations_for_known_pairs() {
        for p in [
            PressureSpec::none(),
            PressureSpec::constant(1.3),
            PressureSpec::linear_in_x(0.8),
            PressureSpec::time_only(vec![0.5, -0.2, 0.1]),
        ] {
            let rel = make_relation(&p, FunctionHandle::Zero).unwrap();
            assert!(rel.pair_residual_on_grid() < 1e-12);
        }
        assert!(make_relation(&PressureSpec::poly_x(vec![0.0, 1.0]), FunctionHandle::Zero).is_err());
        let rel = make_relation(&PressureSpec::linear_in_x(2.0), FunctionHandle::Zero).unwrap();
        let (k, x, t, u) = (2.0f64, 0.3, 0.2, -0.7);
        assert!((rel.residual(x, t, u).unwrap() - (k * x * (k * t).cos() + u * (k * t).sin())).abs() < 1e-15);
    }

    #[test]
    fn solved_relations_satisfy_the_pde() {
        let h = 1e-5;
        for p in [
            PressureSpec::none(),
            PressureSpec::constant(1.3),
            PressureSpec::linear_in_x(0.8),
            PressureSpec::time_only(vec![0.5, -0.2]),
        ] {
            let g = FunctionHandle::Polynomial { coeffs: vec![0.1, -0.5] };
            let rel = make_relation(&p, g).unwrap();
            let u = |x: f64, t: f64| solve_u(&rel, x, t, (-20.0, 20.0), 512).unwrap()[0].u;
            for (x, t) in [(0.3, 0.2), (-0.5, 0.4), (1.0, 0.1)] {
                let u0 = u(x, t);
                let (ux, ut) = rel.gradient(x, t, u0).unwrap();
                let r = ut - u0 * ux - p.g(x, t);
                assert!(r.abs() < 1e-10, "{p:?}: {r}");
                let fd_t = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
                let fd_x = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
                assert!((fd_x - ux).abs() < 1e-6 * (1.0 + ux.abs()));
                assert!((fd_t - ut).abs() < 1e-6 * (1.0 + ut.abs()));
            }
        }
    }

    #[test]
    fn solve_examples() {
        let rel = make_relation(&PressureSpec::none(), FunctionHandle::Zero).unwrap();
        let r = solve_u(&rel, 2.0, 1.0, (-10.0, 10.0), 1000).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].u + 2.0).abs() < 1e-12);

        let rel = make_relation(&PressureSpec::none(), log_form()).unwrap();
        let r = solve_u(&rel, -1.0, 0.2, (1e-6, 10.0), DEFAULT_SCAN).unwrap();
        let w0 = lambert_front(1.0, 1.0, &PressureSpec::none(), -1.0, 0.2, Branch::Principal).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].u - w0).abs() < 1e-12);

        // past the break: both Lambert branches appear
        let r = solve_u(&rel, -0.5, 0.5, (1e-6, 40.0), DEFAULT_SCAN).unwrap();
        assert_eq!(r.len(), 2);
        let none = PressureSpec::none();
        let w0 = lambert_front(1.0, 1.0, &none, -0.5, 0.5, Branch::Principal).unwrap();
        let w1 = lambert_front(1.0, 1.0, &none, -0.5, 0.5, Branch::Lower).unwrap();
        assert!((r[0].u - w0).abs() < 1e-11 && (r[1].u - w1).abs() < 1e-11 * w1);
        assert_eq!((r[0].branch, r[1].branch), (0, 1));

        assert_eq!(solve_u(&rel, 0.0, 0.5, (1e-6, 40.0), 512), Err(ImplicitError::NoRoot));
        assert!(matches!(solve_u(&rel, 0.0, 0.5, (-1.0, 1.0), 512), Err(ImplicitError::NonFinite { .. })));
    }

    #[test]
    fn hodograph_examples() {
        let none = PressureSpec::none();
        assert!((hodograph_time(&FunctionHandle::Zero, &none, 1.5, -0.5, 1e-10).unwrap() - 3.0).abs() < 1e-13);
        let f = FunctionHandle::Polynomial { coeffs: vec![0.2, 0.3, 0.1] };
        let p = PressureSpec::linear_in_x(1.0);
        assert_eq!(hodograph_time(&f, &p, 0.0, 1.7, 1e-10).unwrap(), f.eval(1.7).unwrap());
        assert_eq!(hodograph_time(&f, &p, 1.0, 0.0, 1e-10), Err(ImplicitError::ZeroVelocity));
        // a repulsive gradient turns slow characteristics around
        let q = PressureSpec::poly_x(vec![0.0, -1.0]);
        assert!(matches!(hodograph_time(&f, &q, 2.0, 0.5, 1e-10), Err(ImplicitError::TurningPoint { .. })));
    }

    #[test]
    fn hodograph_linear_gradient_closed_form() {
        for k in [0.5, 1.0, 2.0] {
            let p = PressureSpec::linear_in_x(k);
            for (x, u) in [(0.5, 1.0), (-1.2, 0.7), (2.0, -0.4), (1.0, 3.0)] {
                let t = hodograph_time(&FunctionHandle::Zero, &p, x, u, 1e-12).unwrap();
                let closed = -(k * x / u).atan() / k;
                assert!((t - closed).abs() < 1e-10, "k={k} x={x} u={u}");
                if u > 0.0 {
                    let alt = -(k * x / (u * u + k * k * x * x).sqrt()).asin() / k;
                    assert!((t - alt).abs() < 1e-10);
                }
                assert!((k * x * (k * t).cos() + u * (k * t).sin()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn riemann_argument_identity() {
        let p = PressureSpec::poly_x(vec![0.3, -0.2, 0.5]).with_p0(0.7);
        for (x, u) in [(0.4, 1.2), (-0.8, 2.0), (1.1, -1.5)] {
            let arg = hodograph_argument(&p, x, u).unwrap();
            let inv = 0.5 * u * u + pressure_at(&p, x).unwrap();
            let alt = u.signum() * (2.0 * inv - 2.0 * p.p0).sqrt();
            assert!((arg - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_examples() {
        let none = PressureSpec::none();
        let r = invert_hodograph(&FunctionHandle::Zero, &none, 2.0, 1.0, (-5.0, 5.0)).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] + 2.0).abs() < 1e-10);

        let p = PressureSpec::linear_in_x(1.0);
        let r = invert_hodograph(&FunctionHandle::Zero, &p, 1.0, FRAC_PI_4, (-5.0, 5.0)).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] + 1.0).abs() < 1e-10);

        // segment boundary data F(u) = (u − α)/(βu)
        let (alpha, beta) = (0.5, 1.5);
        let f = FunctionHandle::Rational { num: vec![-alpha, 1.0], den: vec![0.0, beta] };
        let ts = build_series(&Profile::segment(alpha, beta), &none, 0.4, 80).unwrap();
        let r = invert_hodograph(&f, &none, 0.4, 0.3, (0.05, 10.0)).unwrap();
        assert!((r.roots[0] - eval_series(&ts, 0.3).u).abs() < 1e-9);
    }

    #[test]
    fn solve_and_invert_agree() {
        for p in [PressureSpec::none(), PressureSpec::linear_in_x(0.9)] {
            let rel = make_relation(&p, FunctionHandle::Zero).unwrap();
            for (x, t) in [(0.7, 0.4), (-1.1, 0.6), (0.3, -0.5)] {
                let a = solve_u(&rel, x, t, (-6.0, 6.0), 2048).unwrap();
                let b = invert_hodograph(&FunctionHandle::Zero, &p, x, t, (-6.0, 6.0)).unwrap();
                assert_eq!(a.len(), b.roots.len());
                assert!((a[0].u - b.roots[0]).abs() < 1e-9);
            }
        }
    }
}
