//! Potentials `φ(x, t)` with `u = φ_t/φ_x` and the Bateman-like equation
//! `φ_x²φ_tt − 2φ_xφ_tφ_xt + φ_t²φ_xx = φ_x³ g`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FunctionHandle, ModelError, PressureSpec};
use crate::numeric::scan_roots;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BatemanError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("phi_x vanishes")]
    ZeroGradient,
    #[error("both phi_x and phi_t vanish at ({x}, {t})")]
    Degenerate { x: f64, t: f64 },
    #[error("no root of the defining relation in the range")]
    NoRoot,
    #[error("both multipliers of the defining relation vanish at ({x}, {t})")]
    DegenerateCoefficients { x: f64, t: f64 },
}

type Result<T> = std::result::Result<T, BatemanError>;

const EPS: f64 = 1e-30;
const SCAN: usize = 4096;

/// `u = φ_t/φ_x`.
pub fn u_from_phi(phi_t: f64, phi_x: f64) -> Result<f64> {
    if phi_x == 0.0 {
        return Err(BatemanError::ZeroGradient);
    }
    Ok(phi_t / phi_x)
}

/// Value and derivatives up to second order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivs2 {
    pub phi: f64,
    pub x: f64,
    pub t: f64,
    pub xx: f64,
    pub xt: f64,
    pub tt: f64,
}

impl Derivs2 {
    pub fn u(&self) -> Result<f64> {
        u_from_phi(self.t, self.x)
    }
}

/// A potential that can be sampled; analytic derivatives are optional.
pub trait ScalarField {
    fn value(&self, x: f64, t: f64) -> Option<f64>;
    fn derivs(&self, _x: f64, _t: f64) -> Option<Derivs2> {
        None
    }
}

/// A fixed set of derivatives, as obtained at an implicit root.
impl ScalarField for Derivs2 {
    fn value(&self, _: f64, _: f64) -> Option<f64> {
        Some(self.phi)
    }
    fn derivs(&self, _: f64, _: f64) -> Option<Derivs2> {
        Some(*self)
    }
}

/// Closed-form potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ClosedPhi {
    /// `(x + ½kt²)²/(2t²)`
    Square { k: f64 },
    /// `(x + ½kt²)/(√2 t)`
    Root { k: f64 },
    /// `φ = x`
    Identity,
}

impl ScalarField for ClosedPhi {
    fn value(&self, x: f64, t: f64) -> Option<f64> {
        self.derivs(x, t).map(|d| d.phi)
    }

    fn derivs(&self, x: f64, t: f64) -> Option<Derivs2> {
        Some(match *self {
            ClosedPhi::Identity => Derivs2 { phi: x, x: 1.0, t: 0.0, xx: 0.0, xt: 0.0, tt: 0.0 },
            ClosedPhi::Square { k } => {
                if t == 0.0 {
                    return None;
                }
                let p = x + 0.5 * k * t * t;
                let (t2, t3) = (t * t, t * t * t);
                Derivs2 {
                    phi: p * p / (2.0 * t2),
                    x: p / t2,
                    t: p * k / t - p * p / t3,
                    xx: 1.0 / t2,
                    xt: k / t - 2.0 * p / t3,
                    tt: k * k - 3.0 * p * k / t2 + 3.0 * p * p / (t2 * t2),
                }
            }
            ClosedPhi::Root { k } => {
                if t == 0.0 {
                    return None;
                }
                let p = x + 0.5 * k * t * t;
                let r = std::f64::consts::FRAC_1_SQRT_2;
                Derivs2 {
                    phi: r * p / t,
                    x: r / t,
                    t: r * (k - p / (t * t)),
                    xx: 0.0,
                    xt: -r / (t * t),
                    tt: r * (-k / t + 2.0 * p / (t * t * t)),
                }
            }
        })
    }
}

/// `|LHS − RHS| / (|φ_x|³ + |φ_t|³ + ε)`; analytic derivatives when the
/// field has them, otherwise central differences with step `h`
/// (`h ≤ 0` selects `1e−5·max(1, |x|, |t|)`).
pub fn bateman_residual(phi: &dyn ScalarField, g_value: f64, x: f64, t: f64, h: f64) -> Result<f64> {
    let d = match phi.derivs(x, t) {
        Some(d) => d,
        None => fd_derivs(phi, x, t, h).ok_or(BatemanError::Degenerate { x, t })?,
    };
    let scale = 1e-12 * (1.0 + d.phi.abs());
    if d.x.abs() < scale && d.t.abs() < scale {
        return Err(BatemanError::Degenerate { x, t });
    }
    let lhs = d.x * d.x * d.tt - 2.0 * d.x * d.t * d.xt + d.t * d.t * d.xx;
    let rhs = d.x.powi(3) * g_value;
    Ok((lhs - rhs).abs() / (d.x.abs().powi(3) + d.t.abs().powi(3) + EPS))
}

fn fd_derivs(phi: &dyn ScalarField, x: f64, t: f64, h: f64) -> Option<Derivs2> {
    let h = if h > 0.0 { h } else { 1e-5 * x.abs().max(t.abs()).max(1.0) };
    let f = |dx: f64, dt: f64| phi.value(x + dx * h, t + dt * h);
    let c = f(0.0, 0.0)?;
    let (xp, xm, tp, tm) = (f(1.0, 0.0)?, f(-1.0, 0.0)?, f(0.0, 1.0)?, f(0.0, -1.0)?);
    let (pp, pm, mp, mm) = (f(1.0, 1.0)?, f(1.0, -1.0)?, f(-1.0, 1.0)?, f(-1.0, -1.0)?);
    Some(Derivs2 {
        phi: c,
        x: (xp - xm) / (2.0 * h),
        t: (tp - tm) / (2.0 * h),
        xx: (xp - 2.0 * c + xm) / (h * h),
        tt: (tp - 2.0 * c + tm) / (h * h),
        xt: (pp - pm - mp + mm) / (4.0 * h * h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum PhiVariant {
    /// `k = 0`: `x F(φ) + t G(φ) = c`
    Classic,
    /// `(x + ½kt²) F(φ) + t G(φ) = c`
    ConstGrad { k: f64 },
    /// `(sin kt/x) F(φ) + (cos kt/x) G(φ) = c`
    LinGrad { k: f64 },
}

/// Implicit potential `P(x,t) F(φ) + Q(x,t) G(φ) = c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSolution {
    #[serde(rename = "F")]
    pub f: FunctionHandle,
    #[serde(rename = "G")]
    pub g: FunctionHandle,
    pub c: f64,
    pub variant: PhiVariant,
}

/// A multiplier with its partial derivatives `[v, x, t, xx, xt, tt]`.
type Mult = [f64; 6];

impl PhiSolution {
    pub fn new(f: FunctionHandle, g: FunctionHandle, c: f64, variant: PhiVariant) -> Self {
        Self { f, g, c, variant }
    }

    /// The driver whose Euler–Monge flow `u = φ_t/φ_x` solves.
    pub fn pressure(&self) -> PressureSpec {
        match self.variant {
            PhiVariant::Classic => PressureSpec::none(),
            PhiVariant::ConstGrad { k } => PressureSpec::constant(k),
            PhiVariant::LinGrad { k } => PressureSpec::linear_in_x(k),
        }
    }

    fn multipliers(&self, x: f64, t: f64) -> (Mult, Mult) {
        match self.variant {
            PhiVariant::Classic => ([x, 1.0, 0.0, 0.0, 0.0, 0.0], [t, 0.0, 1.0, 0.0, 0.0, 0.0]),
            PhiVariant::ConstGrad { k } => (
                [x + 0.5 * k * t * t, 1.0, k * t, 0.0, 0.0, k],
                [t, 0.0, 1.0, 0.0, 0.0, 0.0],
            ),
            PhiVariant::LinGrad { k } => {
                let (s, c) = (k * t).sin_cos();
                let (x2, x3) = (x * x, x * x * x);
                (
                    [s / x, -s / x2, k * c / x, 2.0 * s / x3, -k * c / x2, -k * k * s / x],
                    [c / x, -c / x2, -k * s / x, 2.0 * c / x3, k * s / x2, -k * k * c / x],
                )
            }
        }
    }

    /// `P F(φ) + Q G(φ) − c`.
    pub fn relation(&self, x: f64, t: f64, phi: f64) -> Result<f64> {
        let (p, q) = self.multipliers(x, t);
        Ok(p[0] * self.f.eval(phi)? + q[0] * self.g.eval(phi)? - self.c)
    }

    /// Derivatives of the root `φ` by implicit differentiation.
    pub fn derivs_at_root(&self, x: f64, t: f64, phi: f64) -> Result<Derivs2> {
        let (p, q) = self.multipliers(x, t);
        let [f0, f1, f2] = self.f.derivs(phi)?;
        let [g0, g1, g2] = self.g.derivs(phi)?;
        let h = |i: usize| p[i] * f0 + q[i] * g0;
        let hp = |i: usize| p[i] * f1 + q[i] * g1;
        let h_phi = hp(0);
        let h_pp = p[0] * f2 + q[0] * g2;
        if h_phi == 0.0 {
            return Err(BatemanError::Degenerate { x, t });
        }
        let px = -h(1) / h_phi;
        let pt = -h(2) / h_phi;
        let xx = -(h(3) + 2.0 * hp(1) * px + h_pp * px * px) / h_phi;
        let xt = -(h(4) + hp(1) * pt + hp(2) * px + h_pp * px * pt) / h_phi;
        let tt = -(h(5) + 2.0 * hp(2) * pt + h_pp * pt * pt) / h_phi;
        Ok(Derivs2 { phi, x: px, t: pt, xx, xt, tt })
    }
}

/// All roots `φ` of the defining relation in `phi_range`.
pub fn solve_phi(sol: &PhiSolution, x: f64, t: f64, (lo, hi): (f64, f64)) -> Result<Vec<f64>> {
    sol.f.validate()?;
    sol.g.validate()?;
    if let PhiVariant::LinGrad { .. } = sol.variant {
        if x == 0.0 {
            return Err(BatemanError::DegenerateCoefficients { x, t });
        }
    }
    let (p, q) = sol.multipliers(x, t);
    if p[0].abs() < 1e-300 && q[0].abs() < 1e-300 {
        return Err(BatemanError::DegenerateCoefficients { x, t });
    }
    let f = |phi: f64| sol.relation(x, t, phi).unwrap_or(f64::NAN);
    let roots = scan_roots(f, lo, hi, SCAN, 1e-15);
    if roots.is_empty() {
        return Err(BatemanError::NoRoot);
    }
    Ok(roots)
}

/// The root of `sol` continued from the one nearest `near`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitPhi {
    pub sol: PhiSolution,
    pub range: (f64, f64),
    pub near: f64,
}

impl ImplicitPhi {
    fn root(&self, x: f64, t: f64) -> Option<f64> {
        let roots = solve_phi(&self.sol, x, t, self.range).ok()?;
        roots
            .into_iter()
            .min_by(|a, b| (a - self.near).abs().total_cmp(&(b - self.near).abs()))
    }
}

impl ScalarField for ImplicitPhi {
    fn value(&self, x: f64, t: f64) -> Option<f64> {
        self.root(x, t)
    }

    fn derivs(&self, x: f64, t: f64) -> Option<Derivs2> {
        self.sol.derivs_at_root(x, t, self.root(x, t)?).ok()
    }
}
