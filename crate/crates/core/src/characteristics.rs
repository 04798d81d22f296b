//! Characteristics of `u_t = u·u_x + g`: `dx/dτ = −u`, `du/dτ = g(x, τ)`.
//!
//! The wave therefore moves to the left. The conservation form
//! `∂_t u = ∂_x(u²/2)` gives a shock speed `ds/dt = −(u_left + u_right)/2`,
//! the mirror image of the usual textbook sign.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{pressure_at, Forcing, ModelError, PressureSpec, Profile};
use crate::numeric::bisect;

pub const DEFAULT_RK4_STEPS: usize = 1024;
pub const DEFAULT_SEEDS: usize = 2048;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the front is single-valued")]
    NotMultivalued,
    #[error("the front has {0} overturned regions; only one is supported")]
    MultipleFolds(usize),
    #[error("the overturned region is not closed by a forward branch within the seeds")]
    OpenFold,
    #[error("seeds must be strictly increasing")]
    UnsortedSeeds,
}

/// `(x, u)` at time `t` on the characteristic through `(x0, u0)` at `t = 0`.
pub fn trace(x0: f64, u0: f64, pressure: &PressureSpec, t: f64) -> (f64, f64) {
    trace_with(x0, u0, pressure, t, DEFAULT_RK4_STEPS)
}

/// As [`trace`], with the RK4 step count used for polynomial `g`.
pub fn trace_with(x0: f64, u0: f64, pressure: &PressureSpec, t: f64, steps: usize) -> (f64, f64) {
    match &pressure.variant {
        Forcing::None => (x0 - u0 * t, u0),
        Forcing::Constant { k } => (x0 - u0 * t - 0.5 * k * t * t, u0 + k * t),
        Forcing::LinearInX { k } if *k == 0.0 => (x0 - u0 * t, u0),
        Forcing::LinearInX { k } => {
            // rotation of (x, u/k) by −kt
            let (s, c) = (k * t).sin_cos();
            (x0 * c - u0 / k * s, k * x0 * s + u0 * c)
        }
        Forcing::TimeOnly { .. } => {
            let (k1, k2) = pressure.time_integrals(t).expect("time-only");
            (x0 - u0 * t - (t * k1 - k2), u0 + k1)
        }
        Forcing::PolyX { .. } => trace_rk4(x0, u0, pressure, t, steps),
    }
}

/// Classical RK4 with `steps` fixed steps, for any forcing.
pub fn trace_rk4(x0: f64, u0: f64, pressure: &PressureSpec, t: f64, steps: usize) -> (f64, f64) {
    let path = trace_path(x0, u0, pressure, t, steps);
    let last = path[path.len() - 1];
    (last.1, last.2)
}

/// Every RK4 step `(τ, x, u)` from `τ = 0` to `τ = t`.
pub fn trace_path(x0: f64, u0: f64, pressure: &PressureSpec, t: f64, steps: usize) -> Vec<(f64, f64, f64)> {
    let steps = steps.max(1);
    let h = t / steps as f64;
    let rhs = |tau: f64, x: f64, u: f64| (-u, pressure.g(x, tau));
    let (mut x, mut u) = (x0, u0);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, x, u));
    for i in 0..steps {
        let tau = h * i as f64;
        let (a1, b1) = rhs(tau, x, u);
        let (a2, b2) = rhs(tau + 0.5 * h, x + 0.5 * h * a1, u + 0.5 * h * b1);
        let (a3, b3) = rhs(tau + 0.5 * h, x + 0.5 * h * a2, u + 0.5 * h * b2);
        let (a4, b4) = rhs(tau + h, x + h * a3, u + h * b3);
        x += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        u += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.push((if i + 1 == steps { t } else { tau + h }, x, u));
    }
    out
}

/// `½u² + p(x)`, constant along characteristics of time-independent forcing.
pub fn riemann_invariant(x: f64, u: f64, pressure: &PressureSpec) -> Result<f64, CharError> {
    Ok(0.5 * u * u + pressure_at(pressure, x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub seed: f64,
    pub x: f64,
    pub u: f64,
    /// Index of the monotone run of `x(seed)` this sample belongs to.
    pub branch: usize,
}

/// A point where `∂x/∂x0` changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub seed: f64,
    pub x: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontCurve {
    pub t: f64,
    pub samples: Vec<FrontSample>,
    pub multivalued: bool,
    pub break_detected: bool,
    pub folds: Vec<Fold>,
    pub profile: Profile,
    pub pressure: PressureSpec,
    pub rk4_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockFit {
    pub position: f64,
    pub u_left: f64,
    pub u_right: f64,
    /// Value on the overturned middle branch at the shock.
    pub u_middle: f64,
    pub area_residual: f64,
}

/// `n` uniform seeds on `[lo, hi]`.
pub fn uniform_seeds(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::numeric::grid(lo, hi, n.max(2)).collect()
}

pub fn evolve_front(profile: &Profile, pressure: &PressureSpec, t: f64, seeds: &[f64]) -> Result<FrontCurve, CharError> {
    evolve_front_with(profile, pressure, t, seeds, DEFAULT_RK4_STEPS)
}

pub fn evolve_front_with(
    profile: &Profile,
    pressure: &PressureSpec,
    t: f64,
    seeds: &[f64],
    rk4_steps: usize,
) -> Result<FrontCurve, CharError> {
    profile.validate()?;
    pressure.validate()?;
    if seeds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CharError::UnsortedSeeds);
    }
    let mut samples: Vec<FrontSample> = seeds
        .iter()
        .map(|&s| {
            let (x, u) = trace_with(s, profile.value(s), pressure, t, rk4_steps);
            FrontSample { seed: s, x, u, branch: 0 }
        })
        .collect();

    let mut branch = 0;
    let mut dir = 0.0f64;
    let mut turning = Vec::new();
    for i in 1..samples.len() {
        let dx = samples[i].x - samples[i - 1].x;
        let d = if dx > 0.0 {
            1.0
        } else if dx < 0.0 {
            -1.0
        } else {
            0.0
        };
        if d != 0.0 {
            if dir != 0.0 && d != dir {
                branch += 1;
                turning.push(i - 1);
            }
            dir = d;
        }
        samples[i].branch = branch;
    }
    let mut front = FrontCurve {
        t,
        samples,
        multivalued: branch > 0,
        break_detected: branch > 0,
        folds: Vec::new(),
        profile: profile.clone(),
        pressure: pressure.clone(),
        rk4_steps,
    };
    front.folds = turning.into_iter().map(|i| front.refine_fold(i)).collect();
    Ok(front)
}

impl FrontCurve {
    fn map(&self, seed: f64) -> (f64, f64) {
        trace_with(seed, self.profile.value(seed), &self.pressure, self.t, self.rk4_steps)
    }

    /// Extremum of `x(seed)` between the neighbours of sample `i`.
    fn refine_fold(&self, i: usize) -> Fold {
        let lo = self.samples[i.saturating_sub(1)].seed;
        let hi = self.samples[(i + 1).min(self.samples.len() - 1)].seed;
        // a fold sitting on a profile kink has no smooth extremum
        if let Some(k) = self.profile.kinks().into_iter().find(|k| *k >= lo && *k <= hi) {
            let (x, u) = self.map(k);
            return Fold { seed: k, x, u };
        }
        let eps = 1e-7 * (hi - lo).max(1e-300);
        let slope = |s: f64| self.map(s + eps).0 - self.map(s - eps).0;
        let (sa, sb) = (slope(lo + eps), slope(hi - eps));
        let seed = if (sa < 0.0) != (sb < 0.0) {
            bisect(&slope, lo + eps, hi - eps, sa, 1e-13)
        } else {
            self.samples[i].seed
        };
        let (x, u) = self.map(seed);
        Fold { seed, x, u }
    }

    /// Index ranges `[start, end]` of the monotone runs.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = 0;
        for i in 1..self.samples.len() {
            if self.samples[i].branch != self.samples[i - 1].branch {
                runs.push((start, i - 1));
                start = i - 1;
            }
        }
        runs.push((start, self.samples.len() - 1));
        runs
    }

    /// Exact `(u, branch)` at `x` on every run that covers it, by bisection on the seed.
    pub fn values_at(&self, x: f64) -> Vec<(f64, usize)> {
        let mut out = Vec::new();
        for (b, (start, end)) in self.runs().into_iter().enumerate() {
            if let Some(seed) = self.seed_on_run(start, end, x) {
                out.push((self.map(seed).1, b));
            }
        }
        out
    }

    fn seed_on_run(&self, start: usize, end: usize, x: f64) -> Option<f64> {
        let s = &self.samples;
        for i in start..end {
            let (xa, xb) = (s[i].x, s[i + 1].x);
            if (xa - x) * (xb - x) <= 0.0 && xa != xb {
                let f = |seed: f64| self.map(seed).0 - x;
                let fa = xa - x;
                if fa == 0.0 {
                    return Some(s[i].seed);
                }
                return Some(bisect(&f, s[i].seed, s[i + 1].seed, fa, 1e-15));
            }
        }
        None
    }

    /// Writes `seed,x,u,branch` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,x,u,branch\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{}", s.seed, s.x, s.u, s.branch);
        }
        out
    }
}

/// Exact `u(x, t)` values by inverting the characteristic map over `seed_range`.
pub fn solve_at(
    profile: &Profile,
    pressure: &PressureSpec,
    x: f64,
    t: f64,
    seed_range: (f64, f64),
) -> Result<Vec<(f64, usize)>, CharError> {
    let seeds = uniform_seeds(seed_range.0, seed_range.1, DEFAULT_SEEDS);
    Ok(evolve_front(profile, pressure, t, &seeds)?.values_at(x))
}

/// `∫ u dx` along the sampled curve (trapezoidal, following the seed order).
pub fn bump_area(front: &FrontCurve) -> f64 {
    front
        .samples
        .windows(2)
        .map(|w| 0.5 * (w[0].u + w[1].u) * (w[1].x - w[0].x))
        .sum()
}

/// `∫ u dx` of the single-valued profile obtained by cutting the fold at the shock.
pub fn shocked_area(front: &FrontCurve, fit: &ShockFit) -> f64 {
    let runs = front.runs();
    let (r0, r2) = (runs[0], runs[2]);
    let s = &front.samples;
    let left = partial_area(s, r0.0, r0.1, f64::NEG_INFINITY, fit.position);
    let right = partial_area(s, r2.0, r2.1, fit.position, f64::INFINITY);
    left + right
}

/// Trapezoidal `∫ u dx` over the part of a monotone run with `lo ≤ x ≤ hi`.
fn partial_area(s: &[FrontSample], start: usize, end: usize, lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for i in start..end {
        let (a, b) = (&s[i], &s[i + 1]);
        let (xa, xb) = (a.x.clamp(lo, hi), b.x.clamp(lo, hi));
        if xa == xb {
            continue;
        }
        let lerp = |x: f64| a.u + (b.u - a.u) * (x - a.x) / (b.x - a.x);
        total += 0.5 * (lerp(xa) + lerp(xb)) * (xb - xa);
    }
    total
}

/// Curve integral `∫ u dx` from the chord crossing on the first run, over the
/// whole overturned run, to the crossing on the last run. It vanishes when
/// the two lobes cut off by the vertical chord at `pos` have equal area.
fn lobe_area(front: &FrontCurve, runs: &[(usize, usize)], pos: f64) -> f64 {
    let s = &front.samples;
    let (r0, r1, r2) = (runs[0], runs[1], runs[2]);
    let middle: f64 = s[r1.0..=r1.1]
        .windows(2)
        .map(|w| 0.5 * (w[0].u + w[1].u) * (w[1].x - w[0].x))
        .sum();
    partial_area(s, r0.0, r0.1, pos, f64::INFINITY) + middle + partial_area(s, r2.0, r2.1, f64::NEG_INFINITY, pos)
}

/// Places a single shock so that the lobes on either side of it have equal area.
pub fn equal_area_shock(front: &FrontCurve) -> Result<ShockFit, CharError> {
    if !front.multivalued {
        return Err(CharError::NotMultivalued);
    }
    let runs = front.runs();
    let s = &front.samples;
    let decreasing: Vec<bool> = runs.iter().map(|&(a, b)| s[b].x < s[a].x).collect();
    let n_dec = decreasing.iter().filter(|d| **d).count();
    if n_dec > 1 {
        return Err(CharError::MultipleFolds(n_dec));
    }
    if runs.len() != 3 || decreasing != [false, true, false] {
        return Err(CharError::OpenFold);
    }
    let x_hi = s[runs[0].1].x;
    let x_lo = s[runs[1].1].x;
    if s[runs[0].0].x > x_lo || s[runs[2].1].x < x_hi {
        return Err(CharError::OpenFold);
    }
    let area = |pos: f64| lobe_area(front, &runs, pos);
    let (fa, fb) = (area(x_lo), area(x_hi));
    let position = if fa == 0.0 {
        x_lo
    } else if fb == 0.0 || (fa < 0.0) == (fb < 0.0) {
        if fa.abs() < fb.abs() { x_lo } else { x_hi }
    } else {
        bisect(&area, x_lo, x_hi, fa, 1e-14)
    };
    let value_on = |r: (usize, usize)| {
        front
            .seed_on_run(r.0, r.1, position)
            .map(|seed| front.map(seed).1)
            .unwrap_or(f64::NAN)
    };
    Ok(ShockFit {
        position,
        u_left: value_on(runs[0]),
        u_right: value_on(runs[2]),
        u_middle: value_on(runs[1]),
        area_residual: area(position),
    })
}
