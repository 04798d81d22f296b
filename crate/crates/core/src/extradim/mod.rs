//! Dimension-doubled linear formulation.
//!
//! A velocity `u(x, t)` is carried as the bivariate field
//! `𝕌(x, t, a) = (e^{a(u − u_p)} − 1)/a`, truncated to a [`BiJet`]. The
//! nonlinear transport equation becomes linear in `𝕌`, and for the free,
//! constant-gradient and linear-gradient drivers its propagator is applied
//! exactly on the truncation.

mod bijet;
mod covariance;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{profile_jet, Forcing, Jet, ModelError, PressureSpec, Profile};
use crate::series_engine::{build_series_with_jet_order, SeriesError};

pub use bijet::BiJet;
pub use covariance::{
    covariance_const, covariance_linear, pde_residual, relative_pde_residual, v_factor_residual_fd, verify_v_factor,
    ClosedForm, SolutionHandle,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtraError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("orders (nx = {nx}, na = {na}) cannot carry the requested expansion")]
    Order { nx: usize, na: usize },
    #[error("cos kt vanishes at t = {t}")]
    Pole { t: f64 },
    #[error("input solution fails its own equation (residual {residual:e})")]
    Residual { residual: f64 },
    #[error("generator {0} does not commute with the linear equation of this driver")]
    NotCommuting(&'static str),
    #[error("pole of a closed form at (x, t) = ({x}, {t})")]
    PoleOnGrid { x: f64, t: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

type Result<T> = std::result::Result<T, ExtraError>;

/// Particular solution subtracted before lifting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Particular {
    Zero,
    /// `u_p = kt`
    ConstGradShift { k: f64 },
    /// `u_p = kx·tan kt`
    LinGradTan { k: f64 },
}

/// Propagator used to move the stored `t = 0` field in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum KernelSpec {
    /// `exp(t A)`
    Free,
    /// shift by `½kt²`, then `exp(t A)`
    ConstGrad { k: f64 },
    /// `exp(α A) exp(β B) exp(γ C)` with the coefficients of [`KernelSpec::factors`]
    LinGrad { k: f64 },
    /// Re-lift of the time series (general `g`); no closed kernel.
    Series,
    /// No evolution: the stored field is taken as time independent.
    Static,
}

impl KernelSpec {
    /// `(α, β, γ)` of the product form, for the kernels that have one.
    pub fn factors(&self, t: f64) -> Option<(f64, f64, f64)> {
        match *self {
            KernelSpec::Free => Some((t, 0.0, 0.0)),
            KernelSpec::LinGrad { k } if k == 0.0 => Some((t, 0.0, 0.0)),
            KernelSpec::LinGrad { k } => {
                let ls = -(k * t).cos().ln();
                Some(((2.0 * k * t).sin() / (2.0 * k), 2.0 * ls, ls))
            }
            _ => None,
        }
    }
}

/// Generators of solution families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Generator {
    T,
    X,
    A,
    /// `x∂x − a∂a`
    Boost,
    /// `G(∂a) = Σ cₙ ∂aⁿ`
    PolyA { coeffs: Vec<f64> },
}

impl Generator {
    fn name(&self) -> &'static str {
        match self {
            Generator::T => "d/dt",
            Generator::X => "d/dx",
            Generator::A => "d/da",
            Generator::Boost => "boost",
            Generator::PolyA { .. } => "G(d/da)",
        }
    }

    /// How many orders in `(x, a)` the generator reads beyond its output.
    fn reach(&self) -> (usize, usize) {
        match self {
            Generator::T => (1, 1),
            Generator::X | Generator::Boost => (1, 0),
            Generator::A => (0, 1),
            Generator::PolyA { coeffs } => (0, coeffs.len().saturating_sub(1)),
        }
    }
}

/// Product of generators; the last entry acts first.
pub type OperatorWord = Vec<Generator>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledField {
    /// State at time `t`.
    pub bijet: BiJet,
    pub t: f64,
    pub particular: Particular,
    pub kernel: KernelSpec,
    /// Lifted data at `t = 0`.
    pub origin: BiJet,
    pub pressure: PressureSpec,
    /// Non-empty for family members, which are held in unsubtracted form.
    #[serde(default)]
    pub word: OperatorWord,
}

/// `A = ∂²/∂x∂a`
pub fn apply_a(b: &BiJet) -> BiJet {
    b.dx().da()
}

/// `B = a∂a`
pub fn apply_b(b: &BiJet) -> BiJet {
    b.da().mul_a()
}

/// `C = 1 + x∂x − a∂a`
pub fn apply_c(b: &BiJet) -> BiJet {
    b.add(&b.dx().mul_x()).sub(&apply_b(b))
}

/// `exp(αA) exp(βB) exp(γC)` applied factor by factor.
pub fn apply_factors(b: &BiJet, (alpha, beta, gamma): (f64, f64, f64)) -> BiJet {
    let s = gamma.exp();
    let c = b
        .shift_x((s - 1.0) * b.x0)
        .scale_args(s, 1.0 / s)
        .scale(s);
    c.scale_args(1.0, beta.exp()).exp_mixed(alpha)
}

fn zero_jet(x0: f64, n: usize) -> Jet {
    Jet::constant(x0, 0.0, n)
}

fn particular_for(pressure: &PressureSpec) -> (Particular, KernelSpec) {
    match pressure.variant {
        Forcing::None => (Particular::Zero, KernelSpec::Free),
        Forcing::Constant { k } => (Particular::ConstGradShift { k }, KernelSpec::ConstGrad { k }),
        Forcing::LinearInX { k } => (Particular::LinGradTan { k }, KernelSpec::LinGrad { k }),
        Forcing::TimeOnly { .. } | Forcing::PolyX { .. } => (Particular::Zero, KernelSpec::Series),
    }
}

/// Layers `w^{j+1}/(j+1)!` of `(e^{aw} − 1)/a`.
fn lift_jet(w: &Jet, na: usize) -> BiJet {
    let mut layers = Vec::with_capacity(na + 1);
    let mut pow = w.clone();
    let mut fact = 1.0;
    for j in 0..=na {
        fact *= (j + 1) as f64;
        layers.push(pow.scale(1.0 / fact));
        pow = &pow * w;
    }
    BiJet::from_layers(w.x0, w.order(), &layers)
}

/// Lifts `u(x, 0)` at `x0` with orders `(nx, na)`; requires `1 ≤ na ≤ nx`.
pub fn lift(
    profile: &Profile,
    pressure: &PressureSpec,
    x0: f64,
    (nx, na): (usize, usize),
) -> Result<DoubledField> {
    if na == 0 || na > nx {
        return Err(ExtraError::Order { nx, na });
    }
    profile.validate()?;
    pressure.validate()?;
    let u0 = profile_jet(profile, x0, nx)?;
    let (particular, kernel) = particular_for(pressure);
    // every particular solution used here vanishes at t = 0
    let b = lift_jet(&u0, na);
    Ok(DoubledField {
        bijet: b.clone(),
        t: 0.0,
        particular,
        kernel,
        origin: b,
        pressure: pressure.clone(),
        word: Vec::new(),
    })
}

/// Wraps an arbitrary bijet as a time-independent field.
pub fn static_field(b: BiJet) -> DoubledField {
    DoubledField {
        bijet: b.clone(),
        t: 0.0,
        particular: Particular::Zero,
        kernel: KernelSpec::Static,
        origin: b,
        pressure: PressureSpec::none(),
        word: Vec::new(),
    }
}

fn check_pole(k: f64, t: f64) -> Result<()> {
    if (k * t).cos().abs() < 1e-12 || (k * t).abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(ExtraError::Pole { t });
    }
    Ok(())
}

fn kernel_free(origin: &BiJet, t: f64) -> BiJet {
    origin.exp_mixed(t)
}

fn kernel_const(origin: &BiJet, k: f64, t: f64) -> BiJet {
    origin.shift_x(0.5 * k * t * t).exp_mixed(t)
}

fn kernel_lin(origin: &BiJet, k: f64, t: f64) -> Result<BiJet> {
    if k == 0.0 {
        return Ok(kernel_free(origin, t));
    }
    check_pole(k, t)?;
    let s = 1.0 / (k * t).cos();
    let tau = (2.0 * k * t).sin() / (2.0 * k);
    Ok(origin
        .shift_x(origin.x0 * (s - 1.0))
        .scale_args(s, s)
        .scale(s)
        .exp_mixed(tau))
}

/// Sums the time series of the a⁰ layer and lifts the result.
fn kernel_series(origin: &BiJet, pressure: &PressureSpec, t: f64) -> Result<BiJet> {
    let nx = origin.nx;
    let order = nx / 2;
    let profile = Profile::RawJet { jet: origin.layer(0) };
    let ts = build_series_with_jet_order(&profile, pressure, origin.x0, order, nx)?;
    let keep = nx - order;
    let mut u = zero_jet(origin.x0, keep);
    for c in ts.coeffs.iter().rev() {
        u = &u.scale(t) + &c.truncate(keep);
    }
    Ok(lift_jet(&u, origin.na.min(keep)))
}

fn with_state(f: &DoubledField, kernel: KernelSpec, particular: Particular, pressure: PressureSpec, b: BiJet, t: f64) -> DoubledField {
    DoubledField {
        bijet: b,
        t,
        particular,
        kernel,
        origin: f.origin.clone(),
        pressure,
        word: Vec::new(),
    }
}

/// `exp(t ∂²/∂x∂a)` applied to the stored `t = 0` field.
pub fn evolve_free(f: &DoubledField, t: f64) -> DoubledField {
    let b = kernel_free(&f.origin, t);
    with_state(f, KernelSpec::Free, Particular::Zero, PressureSpec::none(), b, t)
}

/// Constant gradient `g = k`: shift by `½kt²`, then free evolution.
pub fn evolve_const_grad(f: &DoubledField, k: f64, t: f64) -> DoubledField {
    let b = kernel_const(&f.origin, k, t);
    with_state(
        f,
        KernelSpec::ConstGrad { k },
        Particular::ConstGradShift { k },
        PressureSpec::constant(k),
        b,
        t,
    )
}

/// Linear gradient `g = k²x`, valid for `|kt| < π/2`.
pub fn evolve_lin_grad(f: &DoubledField, k: f64, t: f64) -> Result<DoubledField> {
    let b = kernel_lin(&f.origin, k, t)?;
    Ok(with_state(
        f,
        KernelSpec::LinGrad { k },
        Particular::LinGradTan { k },
        PressureSpec::linear_in_x(k),
        b,
        t,
    ))
}

/// Moves `f` to time `t` with its own kernel (family words are re-applied).
pub fn evolve(f: &DoubledField, t: f64) -> Result<DoubledField> {
    let mut out = f.clone();
    out.bijet = state_at(f, t)?;
    out.t = t;
    Ok(out)
}

/// Subtracted-form state from the kernel.
fn kernel_state(f: &DoubledField, t: f64) -> Result<BiJet> {
    Ok(match f.kernel {
        KernelSpec::Free => kernel_free(&f.origin, t),
        KernelSpec::ConstGrad { k } => kernel_const(&f.origin, k, t),
        KernelSpec::LinGrad { k } => kernel_lin(&f.origin, k, t)?,
        KernelSpec::Series => kernel_series(&f.origin, &f.pressure, t)?,
        KernelSpec::Static => f.origin.clone(),
    })
}

fn particular_jet(p: Particular, x0: f64, n: usize, t: f64) -> Option<Jet> {
    match p {
        Particular::Zero => None,
        Particular::ConstGradShift { k } => Some(Jet::constant(x0, k * t, n)),
        Particular::LinGradTan { k } => Some(Jet::variable(x0, n).scale(k * (k * t).tan())),
    }
}

/// `(e^{a u} − 1)/a` from the subtracted field: `(e^{a u_p} − 1)/a + e^{a u_p}·𝕌`.
fn unsubtract(b: &BiJet, p: Particular, t: f64) -> BiJet {
    let Some(up) = particular_jet(p, b.x0, b.nx, t) else {
        return b.clone();
    };
    let mut e_layers = Vec::with_capacity(b.na + 1);
    let mut pow = Jet::constant(b.x0, 1.0, b.nx);
    let mut fact = 1.0;
    for j in 0..=b.na {
        if j > 0 {
            fact *= j as f64;
            pow = &pow * &up;
        }
        e_layers.push(pow.scale(1.0 / fact));
    }
    let e = BiJet::from_layers(b.x0, b.nx, &e_layers);
    lift_jet(&up, b.na).add(&e.mul(b))
}

/// `g` at time `t` as an a-independent bijet.
fn g_bijet(pressure: &PressureSpec, x0: f64, nx: usize, na: usize, t: f64) -> Result<BiJet> {
    let g = match &pressure.variant {
        Forcing::TimeOnly { .. } => Jet::constant(x0, pressure.g(x0, t), nx),
        _ => pressure.g_jet(x0, nx)?,
    };
    let mut layers = vec![g];
    layers.extend((0..na).map(|_| zero_jet(x0, nx)));
    Ok(BiJet::from_layers(x0, nx, &layers))
}

/// `(D + a·g) w`
fn linear_operator(w: &BiJet, g: &BiJet) -> BiJet {
    apply_a(w).add(&w.mul(&g.mul_a()))
}

fn commutes(gen: &Generator, pressure: &PressureSpec) -> bool {
    let v = &pressure.variant;
    match gen {
        Generator::T => !matches!(v, Forcing::TimeOnly { .. }),
        Generator::X => matches!(v, Forcing::None | Forcing::Constant { .. } | Forcing::TimeOnly { .. }),
        Generator::A | Generator::PolyA { .. } => matches!(v, Forcing::None),
        Generator::Boost => matches!(v, Forcing::None | Forcing::LinearInX { .. }),
    }
}

fn apply_generator(gen: &Generator, w: &BiJet, g: &BiJet, source: &BiJet) -> (BiJet, BiJet) {
    let lin = |b: &BiJet| match gen {
        Generator::T => unreachable!(),
        Generator::X => b.dx(),
        Generator::A => b.da(),
        Generator::Boost => b.dx().mul_x().sub(&apply_b(b)),
        Generator::PolyA { coeffs } => {
            let mut acc = BiJet::zeros(b.x0, b.nx, b.na);
            let mut d = b.clone();
            for c in coeffs {
                acc = acc.add(&d.scale(*c));
                d = d.da();
            }
            acc
        }
    };
    match gen {
        Generator::T => (
            linear_operator(w, g).add(source),
            BiJet::zeros(w.x0, w.nx, w.na),
        ),
        _ => (lin(w), lin(source)),
    }
}

/// Unsubtracted state and its inhomogeneous source at time `t`.
fn family_state(f: &DoubledField, t: f64) -> Result<(BiJet, BiJet)> {
    let sub = kernel_state(f, t)?;
    let mut w = unsubtract(&sub, f.particular, t);
    let g = g_bijet(&f.pressure, w.x0, w.nx, w.na, t)?;
    let mut source = g.clone();
    for gen in f.word.iter().rev() {
        (w, source) = apply_generator(gen, &w, &g, &source);
    }
    Ok((w, source))
}

fn state_at(f: &DoubledField, t: f64) -> Result<BiJet> {
    if f.word.is_empty() {
        kernel_state(f, t)
    } else {
        Ok(family_state(f, t)?.0)
    }
}

/// `u(x, t)` as an x-jet: the a⁰ layer plus `u_p` where one was subtracted.
pub fn extract_u(f: &DoubledField) -> Jet {
    let w = f.bijet.layer(0);
    if !f.word.is_empty() {
        return w;
    }
    match particular_jet(f.particular, w.x0, w.order(), f.t) {
        Some(up) => &w + &up,
        None => w,
    }
}

/// Lift at `x`, evolve to `t` and read off `u(x, t)`, with `nx = na = order`.
pub fn solve_point(profile: &Profile, pressure: &PressureSpec, x: f64, t: f64, order: usize) -> Result<f64> {
    let f = lift(profile, pressure, x, (order, order))?;
    Ok(extract_u(&evolve(&f, t)?).value())
}

/// Taylor coefficients in `t` of `u(x0, t)` for `n ≤ min(nx, na)`,
/// obtained from the kernels by exact jet arithmetic in `t`.
pub fn time_coefficients(f: &DoubledField, n: usize) -> Result<Vec<f64>> {
    let c = &f.origin;
    if n > c.nx.min(c.na) {
        return Err(ExtraError::Order { nx: c.nx, na: c.na });
    }
    if !f.word.is_empty() {
        return Err(ExtraError::Unsupported("time coefficients of family members"));
    }
    let tj = Jet::variable(0.0, n);
    let one = Jet::constant(0.0, 1.0, n);
    let zero = zero_jet(0.0, n);
    let (y, tau, factor, up) = match f.kernel {
        KernelSpec::Free => (zero.clone(), tj, one.clone(), zero.clone()),
        KernelSpec::LinGrad { k } if k == 0.0 => (zero.clone(), tj, one.clone(), zero.clone()),
        KernelSpec::ConstGrad { k } => ((&tj * &tj).scale(0.5 * k), tj.clone(), one.clone(), tj.scale(k)),
        KernelSpec::LinGrad { k } => {
            let (mut sin, mut cos) = (zero.clone(), zero.clone());
            let mut term = 1.0;
            for m in 0..=n {
                let v = match m % 4 {
                    0 => (0.0, term),
                    1 => (term, 0.0),
                    2 => (0.0, -term),
                    _ => (-term, 0.0),
                };
                sin.coeffs_mut()[m] = v.0;
                cos.coeffs_mut()[m] = v.1;
                term *= k / (m + 1) as f64;
            }
            let sec = cos.recip();
            let tan = &sin * &sec;
            (sec.add_scalar(-1.0).scale(c.x0), tan.scale(1.0 / k), sec, tan.scale(k * c.x0))
        }
        KernelSpec::Series | KernelSpec::Static => {
            return Err(ExtraError::Unsupported("time coefficients need a closed kernel"))
        }
    };
    let mut sum = zero.clone();
    let mut ypow = one;
    for i in 0..=n {
        if i > 0 {
            ypow = &ypow * &y;
        }
        if ypow.coeffs().iter().all(|v| *v == 0.0) {
            break;
        }
        let top = (c.nx - i).min(c.na).min(n);
        let mut w = vec![1.0; top + 1];
        for m in 1..=top {
            w[m] = w[m - 1] * (i + m) as f64;
        }
        let mut acc = Jet::constant(0.0, w[top] * c.get(i + top, top), n);
        for m in (0..top).rev() {
            acc = (&acc * &tau).add_scalar(w[m] * c.get(i + m, m));
        }
        sum = &sum + &(&ypow * &acc);
    }
    let u = &up + &(&factor * &sum);
    Ok(u.coeffs().to_vec())
}

/// Max over the coefficients unaffected by truncation of `∂tW − (D + a g)W − S`, with
/// `W` the unsubtracted field, `S` its inhomogeneous source for `pressure`
/// and `∂t` the fourth-order central difference of kernel evolutions at
/// `t ± dt`, `t ± 2dt`.
pub fn diffusion_residual(f: &DoubledField, pressure: &PressureSpec, dt: f64) -> Result<f64> {
    pressure.validate()?;
    let t = f.t;
    let at = |s: f64| family_state(f, s).map(|p| p.0);
    let d1 = at(t + dt)?.sub(&at(t - dt)?);
    let d2 = at(t + 2.0 * dt)?.sub(&at(t - 2.0 * dt)?);
    let (w, _) = family_state(f, t)?;
    let g = g_bijet(pressure, w.x0, w.nx, w.na, t)?;
    let mut source = g.clone();
    for gen in f.word.iter().rev() {
        source = match gen {
            Generator::T => BiJet::zeros(w.x0, w.nx, w.na),
            _ => apply_generator(gen, &source, &g, &source).1,
        };
    }
    let dwdt = d1.scale(8.0).sub(&d2).scale(1.0 / (12.0 * dt));
    let r = dwdt.sub(&linear_operator(&w, &g)).sub(&source);
    let (mx, ma) = f.word.iter().fold((1, 1), |(mx, ma), gen| {
        let (dx, da) = gen.reach();
        (mx + dx, ma + da)
    });
    if mx > w.nx || ma > w.na {
        return Err(ExtraError::Order { nx: w.nx, na: w.na });
    }
    Ok(r.max_abs_low(w.nx - mx, w.na - ma))
}

/// Applies a word of commuting generators; the result is held in
/// unsubtracted form and keeps evolving with the kernel of `f`.
pub fn solution_family(f: &DoubledField, word: &[Generator]) -> Result<DoubledField> {
    if matches!(f.kernel, KernelSpec::Static) {
        return Err(ExtraError::Unsupported("family of a static field"));
    }
    for gen in word {
        if !commutes(gen, &f.pressure) {
            return Err(ExtraError::NotCommuting(gen.name()));
        }
    }
    let mut out = f.clone();
    out.word = word.iter().cloned().chain(f.word.iter().cloned()).collect();
    out.bijet = family_state(&out, f.t)?.0;
    Ok(out)
}

#[cfg(test)]
mod tests;
