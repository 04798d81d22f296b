//! Time power series `u(x, t) = Σ tⁿ uₙ(x)` built from the recurrence
//! `(n+1)u_{n+1} = ½∂ₓ Σ uⱼ u_{n−j}` (plus the forcing at the first step),
//! together with the closed forms it is checked against.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lambertw::{lambert_w, lambert_w_series, Branch, LambertError};
use crate::numeric::bisect;
use crate::model::{poly, profile_jet, Forcing, Jet, ModelError, PressureSpec, Profile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lambert(#[from] LambertError),
    #[error("jet order {have} is below the required {need}")]
    Order { need: usize, have: usize },
    #[error("need at least {need} nonzero coefficients, found {found}")]
    InsufficientData { need: usize, found: usize },
    #[error("the profile never steepens forward in time")]
    NoBreak,
    #[error("cos kt vanishes at t = {t}")]
    Pole { t: f64 },
    #[error("time must be positive, got {t}")]
    NonPositiveTime { t: f64 },
}

/// Ratios used by the radius extrapolation.
const RATIO_WINDOW: usize = 8;
const MIN_COEFFS: usize = 12;

/// `u₀ … u_N`, each a jet at `x0`; `u_n` has order `jet_order − n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub x0: f64,
    pub coeffs: Vec<Jet>,
    pub pressure: PressureSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEval {
    pub u: f64,
    /// Magnitude of the last retained term.
    pub err_est: f64,
    /// Set when the last two terms do not decrease.
    pub diverging: bool,
}

impl TimeSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `uₙ(x0)` for every retained `n`.
    pub fn time_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(Jet::value).collect()
    }

    /// Partial sum at an arbitrary `x` near the expansion point.
    pub fn eval_at(&self, x: f64, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.eval(x))
    }
}

/// Builds the series with the default jet order `2·order`.
pub fn build_series(
    profile: &Profile,
    pressure: &PressureSpec,
    x0: f64,
    order: usize,
) -> Result<TimeSeries, SeriesError> {
    build_series_with_jet_order(profile, pressure, x0, order, 2 * order)
}

pub fn build_series_with_jet_order(
    profile: &Profile,
    pressure: &PressureSpec,
    x0: f64,
    order: usize,
    jet_order: usize,
) -> Result<TimeSeries, SeriesError> {
    if jet_order < 2 * order {
        return Err(SeriesError::Order {
            need: 2 * order,
            have: jet_order,
        });
    }
    profile.validate()?;
    pressure.validate()?;
    let u0 = profile_jet(profile, x0, jet_order)?;
    let (g_jet, k_t) = match &pressure.variant {
        Forcing::TimeOnly { k_coeffs } => (None, k_coeffs.clone()),
        _ => (Some(pressure.g_jet(x0, jet_order)?), Vec::new()),
    };

    let mut coeffs = vec![u0];
    for n in 0..order {
        // ½ Σ_{j=0}^{n} u_j u_{n-j}, using the symmetry of the sum
        let mut half_sum: Option<Jet> = None;
        for j in 0..=n / 2 {
            let mut term = &coeffs[j] * &coeffs[n - j];
            if 2 * j == n {
                term = term.scale(0.5);
            }
            half_sum = Some(match half_sum {
                None => term,
                Some(s) => &s + &term,
            });
        }
        let mut next = half_sum.expect("n ≥ 0").derivative();
        if n == 0 {
            if let Some(g) = &g_jet {
                next = &next + g;
            }
        }
        if let Some(k) = k_t.get(n) {
            next = next.add_scalar(*k);
        }
        coeffs.push(next.scale(1.0 / (n + 1) as f64));
    }
    Ok(TimeSeries {
        x0,
        coeffs,
        pressure: pressure.clone(),
    })
}

pub fn eval_series(ts: &TimeSeries, t: f64) -> SeriesEval {
    let values = ts.time_coeffs();
    let u = values.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let n = values.len() - 1;
    let last = (values[n] * t.powi(n as i32)).abs();
    let diverging = if n >= 1 {
        let prev = (values[n - 1] * t.powi(n as i32 - 1)).abs();
        prev > 0.0 && last > 0.0 && last >= prev
    } else {
        false
    };
    SeriesEval {
        u,
        err_est: last,
        diverging,
    }
}

/// Radius of convergence of the time series at `x0`, from a least-squares fit
/// `rₙ = c₀ + c₁/n` to the last ratios `|aₙ/aₙ₋₁|`. Falls back to the
/// slope coefficients when the values vanish identically.
pub fn break_time_ratio(ts: &TimeSeries) -> Result<f64, SeriesError> {
    let values = ts.time_coeffs();
    match radius_from(&values) {
        Err(SeriesError::InsufficientData { .. }) => {
            let slopes: Vec<f64> = ts.coeffs.iter().map(|j| j.coeff(1)).collect();
            radius_from(&slopes).map_err(|_| SeriesError::InsufficientData {
                need: MIN_COEFFS,
                found: values.iter().filter(|v| **v != 0.0).count(),
            })
        }
        r => r,
    }
}

fn radius_from(a: &[f64]) -> Result<f64, SeriesError> {
    let found = a.iter().filter(|v| **v != 0.0).count();
    if found < MIN_COEFFS {
        return Err(SeriesError::InsufficientData {
            need: MIN_COEFFS,
            found,
        });
    }
    let ratios: Vec<(f64, f64)> = (1..a.len())
        .filter(|&n| a[n] != 0.0 && a[n - 1] != 0.0)
        .map(|n| (1.0 / n as f64, (a[n] / a[n - 1]).abs()))
        .collect();
    if ratios.len() < RATIO_WINDOW {
        return Err(SeriesError::InsufficientData {
            need: MIN_COEFFS,
            found,
        });
    }
    let window = &ratios[ratios.len() - RATIO_WINDOW..];
    let m = window.len() as f64;
    let sx: f64 = window.iter().map(|p| p.0).sum();
    let sy: f64 = window.iter().map(|p| p.1).sum();
    let sxx: f64 = window.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = window.iter().map(|p| p.0 * p.1).sum();
    let c1 = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let c0 = (sy - c1 * sx) / m;
    let scale = window.iter().map(|p| p.1).fold(0.0, f64::max);
    if c0.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / c0.abs())
}

/// Closed-form break time at `x` for segment and exponential data.
pub fn break_time_closed(
    profile: &Profile,
    pressure: &PressureSpec,
    x: f64,
) -> Result<f64, SeriesError> {
    match (profile, &pressure.variant) {
        (Profile::LinearSegment { beta, .. }, variant) => {
            if *beta <= 0.0 {
                return Err(SeriesError::NoBreak);
            }
            match variant {
                Forcing::None | Forcing::Constant { .. } => Ok(1.0 / beta),
                Forcing::LinearInX { k } if *k != 0.0 => {
                    let k = k.abs();
                    Ok((k / beta).atan() / k)
                }
                Forcing::LinearInX { .. } => Ok(1.0 / beta),
                _ => Err(ModelError::UnsupportedVariant("closed break time for this forcing").into()),
            }
        }
        (Profile::Exponential { a, l }, variant) => {
            let (a, l) = (*a, *l);
            if a / l <= 0.0 {
                return Err(SeriesError::NoBreak);
            }
            let free = (l / a) * (-1.0 - x / l).exp();
            match variant {
                Forcing::None => Ok(free),
                Forcing::Constant { k } if *k == 0.0 => Ok(free),
                Forcing::Constant { k } => {
                    let k = *k;
                    let c = l / (a * std::f64::consts::E);
                    let f = |t: f64| t - c * (-(x + 0.5 * k * t * t) / l).exp();
                    first_crossing(f, 0.0, 64.0 * free.max(1.0))
                }
                Forcing::LinearInX { k } if *k == 0.0 => Ok(free),
                Forcing::LinearInX { k } => {
                    let k = k.abs();
                    let c = l * k / (a * std::f64::consts::E);
                    let f = |t: f64| {
                        let kt = k * t;
                        kt.tan() - c * (-x / (l * kt.cos())).exp()
                    };
                    let t_pole = std::f64::consts::FRAC_PI_2 / k;
                    first_crossing(f, 0.0, t_pole * (1.0 - 1e-12))
                }
                _ => Err(ModelError::UnsupportedVariant("closed break time for this forcing").into()),
            }
        }
        _ => Err(ModelError::UnsupportedVariant("closed break time needs segment or exponential data").into()),
    }
}

/// First sign change of `f` on `(lo, hi]` from a uniform scan, refined by bisection.
fn first_crossing(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64, SeriesError> {
    const STEPS: usize = 4096;
    let h = (hi - lo) / STEPS as f64;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=STEPS {
        let b = lo + h * i as f64;
        let fb = f(b);
        if fa == 0.0 {
            return Ok(a);
        }
        if fa.signum() != fb.signum() && fb.is_finite() {
            return Ok(bisect(&f, a, b, fa, 1e-15));
        }
        a = b;
        fa = fb;
    }
    Err(SeriesError::NoBreak)
}

/// `W(z)/z`, finite at `z = 0` on the principal branch.
fn w_over_z(branch: Branch, z: f64) -> Result<f64, LambertError> {
    if z == 0.0 && branch == Branch::Principal {
        return Ok(1.0);
    }
    Ok(lambert_w(branch, z)? / z)
}

/// Exponential-data front `u(x, t)` on the chosen Lambert branch.
pub fn lambert_front(
    a: f64,
    l: f64,
    pressure: &PressureSpec,
    x: f64,
    t: f64,
    branch: Branch,
) -> Result<f64, SeriesError> {
    match &pressure.variant {
        Forcing::None => {
            let e = (x / l).exp();
            let z = -(a * t / l) * e;
            Ok(a * e * w_over_z(branch, z)?)
        }
        Forcing::Constant { k } => {
            let e = ((x + 0.5 * k * t * t) / l).exp();
            let z = -(a * t / l) * e;
            Ok(k * t + a * e * w_over_z(branch, z)?)
        }
        Forcing::LinearInX { k } if *k == 0.0 => {
            lambert_front(a, l, &PressureSpec::none(), x, t, branch)
        }
        Forcing::LinearInX { k } => {
            let kt = k * t;
            let c = kt.cos();
            if c.abs() < 1e-15 {
                return Err(SeriesError::Pole { t });
            }
            let tan = kt.tan();
            let e = (x / (l * c)).exp();
            let z = -(a * tan / (l * k)) * e;
            Ok(k * x * tan + (a / c) * e * w_over_z(branch, z)?)
        }
        _ => Err(ModelError::UnsupportedVariant("Lambert front for this forcing").into()),
    }
}

/// Lambert argument of the undriven exponential front.
pub fn lambert_argument(a: f64, l: f64, x: f64, t: f64) -> f64 {
    -(a * t / l) * (x / l).exp()
}

/// Partial sum `Σ_{n<N} tⁿ (n+1)^{n−1}/n! · A^{n+1} L^{−n} e^{(n+1)x/L}` of the
/// undriven exponential front.
pub fn lambert_front_series(a: f64, l: f64, x: f64, t: f64, n_terms: usize) -> f64 {
    if t == 0.0 {
        return a * (x / l).exp();
    }
    let z = lambert_argument(a, l, x, t);
    -(l / t) * lambert_w_series(z, n_terms)
}

/// Position of the vertical face of the undriven exponential front.
pub fn front_face_position(a: f64, l: f64, t: f64) -> Result<f64, SeriesError> {
    if !(t > 0.0) {
        return Err(SeriesError::NonPositiveTime { t });
    }
    Ok(l * ((l / a).ln() - 1.0 - t.ln()))
}

/// The evolved linear segment `α + βx` under the given forcing.
pub fn segment_solution(
    alpha: f64,
    beta: f64,
    pressure: &PressureSpec,
    x: f64,
    t: f64,
) -> Result<f64, SeriesError> {
    match &pressure.variant {
        Forcing::None => Ok((alpha + beta * x) / (1.0 - beta * t)),
        Forcing::Constant { k } => Ok(k * t + (alpha + beta * (x + 0.5 * k * t * t)) / (1.0 - beta * t)),
        Forcing::LinearInX { k } if *k == 0.0 => Ok((alpha + beta * x) / (1.0 - beta * t)),
        Forcing::LinearInX { k } => {
            let kt = k * t;
            let (s, c) = kt.sin_cos();
            if c.abs() < 1e-15 {
                return Err(SeriesError::Pole { t });
            }
            Ok(k * x * kt.tan() + (alpha + beta * x / c) / (c - beta / k * s))
        }
        Forcing::TimeOnly { .. } => {
            let (k1, k2) = pressure.time_integrals(t).expect("time-only");
            // x + ut − K₂ = x₀, u − K₁ = α + βx₀
            Ok(k1 + (alpha + beta * (x + k1 * t - k2)) / (1.0 - beta * t))
        }
        Forcing::PolyX { g_coeffs } if poly::eval(g_coeffs, 0.0) == 0.0 && g_coeffs.len() <= 1 => {
            Ok((alpha + beta * x) / (1.0 - beta * t))
        }
        Forcing::PolyX { .. } => {
            Err(ModelError::UnsupportedVariant("closed segment solution for polynomial g").into())
        }
    }
}
