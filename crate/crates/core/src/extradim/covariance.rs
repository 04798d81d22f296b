use serde::{Deserialize, Serialize};

use super::{ExtraError, Result};
use crate::lambertw::Branch;
use crate::model::PressureSpec;
use crate::numeric::grid;
use crate::series_engine::lambert_front;

/// Closed-form solutions and the covariance wrappers built on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum SolutionHandle {
    Zero,
    /// `(α + βx)/(1 − βt)`
    Segment { alpha: f64, beta: f64 },
    /// `−x/t`
    Similarity,
    /// Principal-branch exponential front.
    LambertFront { a: f64, l: f64 },
    /// `u(x + ½kt², t) + kt`
    ConstMap { k: f64, inner: Box<SolutionHandle> },
    /// `(1/cos kt)·u(x/cos kt, tan(kt)/k) + kx·tan kt`
    LinearMap { k: f64, inner: Box<SolutionHandle> },
}

impl SolutionHandle {
    /// `u(x, t)`, `None` outside the domain of definition.
    pub fn eval(&self, x: f64, t: f64) -> Option<f64> {
        let v = match self {
            SolutionHandle::Zero => 0.0,
            SolutionHandle::Segment { alpha, beta } => {
                let d = 1.0 - beta * t;
                if d == 0.0 {
                    return None;
                }
                (alpha + beta * x) / d
            }
            SolutionHandle::Similarity => {
                if t == 0.0 {
                    return None;
                }
                -x / t
            }
            SolutionHandle::LambertFront { a, l } => {
                lambert_front(*a, *l, &PressureSpec::none(), x, t, Branch::Principal).ok()?
            }
            SolutionHandle::ConstMap { k, inner } => inner.eval(x + 0.5 * k * t * t, t)? + k * t,
            SolutionHandle::LinearMap { k, inner } => {
                if *k == 0.0 {
                    return inner.eval(x, t);
                }
                let c = (k * t).cos();
                if (k * t).abs() >= std::f64::consts::FRAC_PI_2 || c.abs() < 1e-12 {
                    return None;
                }
                inner.eval(x / c, (k * t).tan() / k)? / c + k * x * (k * t).tan()
            }
        };
        v.is_finite().then_some(v)
    }

    /// The forcing this handle solves.
    pub fn pressure(&self) -> PressureSpec {
        match self {
            SolutionHandle::ConstMap { k, .. } => PressureSpec::constant(*k),
            SolutionHandle::LinearMap { k, .. } => PressureSpec::linear_in_x(*k),
            _ => PressureSpec::none(),
        }
    }
}

/// Fourth-order central difference.
fn d4(f: impl Fn(f64) -> Option<f64>, z: f64, h: f64) -> Option<f64> {
    let (a, b, c, d) = (f(z - 2.0 * h)?, f(z - h)?, f(z + h)?, f(z + 2.0 * h)?);
    Some((a - 8.0 * b + 8.0 * c - d) / (12.0 * h))
}

/// Max of `|u_t − u u_x − g|` by finite differences over the points where
/// the handle and its stencil are defined (`0` if there are none).
pub fn pde_residual(u: &SolutionHandle, points: &[(f64, f64)]) -> f64 {
    residual_with(u, points, false)
}

/// As [`pde_residual`], each point divided by `1 + |u_t| + |u u_x|`.
pub fn relative_pde_residual(u: &SolutionHandle, points: &[(f64, f64)]) -> f64 {
    residual_with(u, points, true)
}

fn residual_with(u: &SolutionHandle, points: &[(f64, f64)], relative: bool) -> f64 {
    let p = u.pressure();
    let mut worst: f64 = 0.0;
    for &(x, t) in points {
        let ht = 1e-3 * t.abs().min(1.0);
        let hx = 1e-3 * t.abs().min(1.0).max(1e-2);
        let r = (|| {
            let v = u.eval(x, t)?;
            let ut = d4(|s| u.eval(x, s), t, ht)?;
            let ux = d4(|s| u.eval(s, t), x, hx)?;
            let r = (ut - v * ux - p.g(x, t)).abs();
            Some(if relative { r / (1.0 + ut.abs() + (v * ux).abs()) } else { r })
        })();
        if let Some(r) = r {
            worst = worst.max(r);
        }
    }
    worst
}

fn check_grid() -> Vec<(f64, f64)> {
    let mut pts = Vec::new();
    for x in grid(-1.0, 1.0, 10) {
        for t in grid(0.05, 0.5, 10) {
            pts.push((x, t));
        }
    }
    pts
}

fn check_undriven(u: &SolutionHandle) -> Result<()> {
    if u.pressure() != PressureSpec::none() {
        return Err(ExtraError::Residual { residual: f64::INFINITY });
    }
    let residual = relative_pde_residual(u, &check_grid());
    if residual > 1e-6 {
        return Err(ExtraError::Residual { residual });
    }
    Ok(())
}

/// `(x, t) ↦ u(x + ½kt², t) + kt`, a solution for `g = k`.
pub fn covariance_const(u: &SolutionHandle, k: f64) -> Result<SolutionHandle> {
    check_undriven(u)?;
    Ok(SolutionHandle::ConstMap { k, inner: Box::new(u.clone()) })
}

/// `(x, t) ↦ (1/cos kt)·u(x/cos kt, tan(kt)/k) + kx·tan kt`, a solution for
/// `g = k²x` on `|kt| < π/2`.
pub fn covariance_linear(u: &SolutionHandle, k: f64) -> Result<SolutionHandle> {
    check_undriven(u)?;
    Ok(SolutionHandle::LinearMap { k, inner: Box::new(u.clone()) })
}

/// Built-in closed forms for the `v`-factor check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ClosedForm {
    /// `kx·tan kt`
    KxTan { k: f64 },
    /// `−kx·cot kt`
    NegKxCot { k: f64 },
    /// `−1/cos kt`
    NegSec { k: f64 },
    /// `1/sin kt`
    Csc { k: f64 },
    Constant { c: f64 },
    /// `α + βx`
    Linear { alpha: f64, beta: f64 },
}

impl ClosedForm {
    /// `(f, f_t, f_x)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64, f64)> {
        let pole = |v: f64| {
            if v.abs() < 1e-8 {
                Err(ExtraError::PoleOnGrid { x, t })
            } else {
                Ok(v)
            }
        };
        Ok(match *self {
            ClosedForm::KxTan { k } => {
                let c = pole((k * t).cos())?;
                let tan = (k * t).tan();
                (k * x * tan, k * k * x / (c * c), k * tan)
            }
            ClosedForm::NegKxCot { k } => {
                let s = pole((k * t).sin())?;
                let cot = (k * t).cos() / s;
                (-k * x * cot, k * k * x / (s * s), -k * cot)
            }
            ClosedForm::NegSec { k } => {
                let c = pole((k * t).cos())?;
                (-1.0 / c, -k * (k * t).tan() / c, 0.0)
            }
            ClosedForm::Csc { k } => {
                let s = pole((k * t).sin())?;
                (1.0 / s, -k * (k * t).cos() / (s * s), 0.0)
            }
            ClosedForm::Constant { c } => (c, 0.0, 0.0),
            ClosedForm::Linear { alpha, beta } => (alpha + beta * x, 0.0, beta),
        })
    }
}

/// Max of `|v_t − ∂x(u v)|` over the grid from analytic derivatives.
pub fn verify_v_factor(u: &ClosedForm, v: &ClosedForm, points: &[(f64, f64)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &(x, t) in points {
        let (uu, _, ux) = u.eval(x, t)?;
        let (vv, vt, vx) = v.eval(x, t)?;
        worst = worst.max((vt - ux * vv - uu * vx).abs());
    }
    Ok(worst)
}

/// The same check with fourth-order finite differences.
pub fn v_factor_residual_fd(u: &ClosedForm, v: &ClosedForm, points: &[(f64, f64)]) -> Result<f64> {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for &(x, t) in points {
        u.eval(x, t)?;
        v.eval(x, t)?;
        let val = |f: &ClosedForm, x: f64, t: f64| f.eval(x, t).ok().map(|r| r.0);
        let vt = d4(|s| val(v, x, s), t, h).ok_or(ExtraError::PoleOnGrid { x, t })?;
        let flux = d4(|s| Some(val(u, s, t)? * val(v, s, t)?), x, h).ok_or(ExtraError::PoleOnGrid { x, t })?;
        worst = worst.max((vt - flux).abs());
    }
    Ok(worst)
}
