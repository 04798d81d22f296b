//! Free-particle point-split densities `ρ(x,t,a) = ψ̄(x−a,t)ψ(x+a,t)` and the
//! continuity law `∂tρ = iκ ∂x∂a ρ`.
//!
//! Both families have `log ψ` quadratic in `x`, so `ρ = e^Ψ` with `Ψ` a
//! quadratic polynomial in `(x, a)`; every derivative is a polynomial
//! multiple of `ρ` and is computed exactly.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("tensor order {0} exceeds 4")]
    OrderTooHigh(usize),
    #[error("invalid wave spec: {0}")]
    InvalidSpec(&'static str),
}

type Result<T> = std::result::Result<T, QuantumError>;

pub const MAX_TENSOR_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum WaveVariant {
    PlaneWave { p: f64 },
    GaussianPacket { sigma: f64, p0: f64, x_c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSpec {
    pub variant: WaveVariant,
    /// `κ = 1/2m`
    pub kappa: f64,
}

impl WaveSpec {
    pub fn plane(p: f64, kappa: f64) -> Self {
        Self { variant: WaveVariant::PlaneWave { p }, kappa }
    }

    pub fn gaussian(sigma: f64, p0: f64, x_c: f64, kappa: f64) -> Self {
        Self { variant: WaveVariant::GaussianPacket { sigma, p0, x_c }, kappa }
    }

    pub fn validate(&self) -> Result<()> {
        if let WaveVariant::GaussianPacket { sigma, .. } = self.variant {
            if !(sigma > 0.0) {
                return Err(QuantumError::InvalidSpec("sigma must be positive"));
            }
        }
        if !self.kappa.is_finite() {
            return Err(QuantumError::InvalidSpec("kappa must be finite"));
        }
        Ok(())
    }

    fn centre(&self) -> f64 {
        match self.variant {
            WaveVariant::PlaneWave { .. } => 0.0,
            WaveVariant::GaussianPacket { x_c, .. } => x_c,
        }
    }

    /// `log ψ = α y² + β y + γ` with `y = x − x_c`: `([α, β, γ], [α̇, β̇, γ̇])`.
    fn log_coeffs(&self, t: f64) -> ([C; 3], [C; 3]) {
        let i = C::i();
        let kappa = self.kappa;
        match self.variant {
            WaveVariant::PlaneWave { p } => (
                [C::new(0.0, 0.0), i * p, -i * kappa * p * p * t],
                [C::new(0.0, 0.0), C::new(0.0, 0.0), -i * kappa * p * p],
            ),
            WaveVariant::GaussianPacket { sigma, p0, .. } => {
                let s = C::new(sigma * sigma, kappa * t);
                let sd = i * kappa;
                let v = 2.0 * kappa * p0;
                let ln_a = -0.25 * (2.0 * std::f64::consts::PI * sigma * sigma).ln() + sigma.ln();
                let alpha = -0.25 / s;
                let beta = v * t / (2.0 * s) + i * p0;
                let gamma = ln_a - 0.5 * s.ln() - v * v * t * t / (4.0 * s) - i * kappa * p0 * p0 * t;
                let alpha_d = sd / (4.0 * s * s);
                let beta_d = v / (2.0 * s) - v * t * sd / (2.0 * s * s);
                let gamma_d = -sd / (2.0 * s) - v * v * t / (2.0 * s) + v * v * t * t * sd / (4.0 * s * s)
                    - i * kappa * p0 * p0;
                ([alpha, beta, gamma], [alpha_d, beta_d, gamma_d])
            }
        }
    }
}

/// Closed-form `ψ(x, t)`.
pub fn psi(spec: &WaveSpec, x: f64, t: f64) -> C {
    let ([a, b, g], _) = spec.log_coeffs(t);
    let y = x - spec.centre();
    (a * y * y + b * y + g).exp()
}

/// `∂tψ − iκ∂x²ψ` from the closed form.
pub fn schrodinger_residual(spec: &WaveSpec, x: f64, t: f64) -> f64 {
    let ([a, b, _], [ad, bd, gd]) = spec.log_coeffs(t);
    let y = x - spec.centre();
    let lt = ad * y * y + bd * y + gd;
    let lx = 2.0 * a * y + b;
    let lxx = 2.0 * a;
    ((lt - C::i() * spec.kappa * (lxx + lx * lx)) * psi(spec, x, t)).norm()
}

/// Complex polynomial `Σ c_ij x^i a^j`.
#[derive(Debug, Clone, PartialEq)]
struct CPoly {
    c: Vec<Vec<C>>,
}

const DEG: usize = 2 * MAX_TENSOR_ORDER + 4;

impl CPoly {
    fn zero() -> Self {
        Self { c: vec![vec![C::new(0.0, 0.0); DEG + 1]; DEG + 1] }
    }

    fn from_terms(terms: &[(usize, usize, C)]) -> Self {
        let mut p = Self::zero();
        for &(i, j, v) in terms {
            p.c[i][j] += v;
        }
        p
    }

    fn map2(&self, o: &Self, f: impl Fn(C, C) -> C) -> Self {
        let mut p = Self::zero();
        for i in 0..=DEG {
            for j in 0..=DEG {
                p.c[i][j] = f(self.c[i][j], o.c[i][j]);
            }
        }
        p
    }

    fn add(&self, o: &Self) -> Self {
        self.map2(o, |a, b| a + b)
    }

    fn sub(&self, o: &Self) -> Self {
        self.map2(o, |a, b| a - b)
    }

    fn scale(&self, s: C) -> Self {
        self.map2(self, |a, _| a * s)
    }

    fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero();
        for i in 0..=DEG {
            for j in 0..=DEG {
                let a = self.c[i][j];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..=DEG - i {
                    for l in 0..=DEG - j {
                        p.c[i + k][j + l] += a * o.c[k][l];
                    }
                }
            }
        }
        p
    }

    fn dx(&self) -> Self {
        let mut p = Self::zero();
        for i in 1..=DEG {
            for j in 0..=DEG {
                p.c[i - 1][j] = self.c[i][j] * i as f64;
            }
        }
        p
    }

    fn da(&self) -> Self {
        let mut p = Self::zero();
        for i in 0..=DEG {
            for j in 1..=DEG {
                p.c[i][j - 1] = self.c[i][j] * j as f64;
            }
        }
        p
    }

    /// `x∂x − a∂a`
    fn boost(&self) -> Self {
        let mut p = Self::zero();
        for i in 0..=DEG {
            for j in 0..=DEG {
                p.c[i][j] = self.c[i][j] * (i as f64 - j as f64);
            }
        }
        p
    }

    fn eval(&self, x: f64, a: f64) -> C {
        let mut acc = C::new(0.0, 0.0);
        for i in (0..=DEG).rev() {
            let mut row = C::new(0.0, 0.0);
            for j in (0..=DEG).rev() {
                row = row * a + self.c[i][j];
            }
            acc = acc * x + row;
        }
        acc
    }
}

/// `Ψ = log ρ` and `∂tΨ` as polynomials in `(x, a)`.
fn log_density(spec: &WaveSpec, t: f64) -> (CPoly, CPoly) {
    let (k, kd) = spec.log_coeffs(t);
    let xc = spec.centre();
    let one = C::new(1.0, 0.0);
    // y∓ = x − x_c ∓ a
    let ym = CPoly::from_terms(&[(1, 0, one), (0, 1, -one), (0, 0, C::new(-xc, 0.0))]);
    let yp = CPoly::from_terms(&[(1, 0, one), (0, 1, one), (0, 0, C::new(-xc, 0.0))]);
    let build = |c: [C; 3]| {
        let quad = |y: &CPoly, c: [C; 3]| {
            y.mul(y).scale(c[0]).add(&y.scale(c[1])).add(&CPoly::from_terms(&[(0, 0, c[2])]))
        };
        quad(&ym, [c[0].conj(), c[1].conj(), c[2].conj()]).add(&quad(&yp, c))
    };
    (build(k), build(kd))
}

/// `P(x, a)·ρ` together with the time derivative of `P`.
#[derive(Debug, Clone)]
struct Prefactored {
    p: CPoly,
    pd: CPoly,
}

/// Evaluates `(value, |∂t − iκ_check ∂x∂a| of the field)` for `P·e^Ψ`.
fn value_and_residual(
    f: &Prefactored,
    psi_: &CPoly,
    psi_d: &CPoly,
    kappa_check: f64,
    x: f64,
    a: f64,
) -> (C, f64) {
    let rho = psi_.eval(x, a).exp();
    let (px, pa) = (psi_.dx(), psi_.da());
    let p = &f.p;
    let dt = f.pd.add(&p.mul(psi_d));
    let dxa = p
        .dx()
        .da()
        .add(&p.dx().mul(&pa))
        .add(&p.da().mul(&px))
        .add(&p.mul(&px.da().add(&px.mul(&pa))));
    let r = dt.sub(&dxa.scale(C::i() * kappa_check));
    (p.eval(x, a) * rho, (r.eval(x, a) * rho).norm())
}

fn tensor_field(psi_: &CPoly, psi_d: &CPoly, order: usize) -> Prefactored {
    let mut f = Prefactored {
        p: CPoly::from_terms(&[(0, 0, C::new(1.0, 0.0))]),
        pd: CPoly::zero(),
    };
    let (pa, pad) = (psi_.da(), psi_d.da());
    for _ in 0..order {
        f = Prefactored {
            p: f.p.da().add(&f.p.mul(&pa)),
            pd: f.pd.da().add(&pad.mul(&f.p)).add(&pa.mul(&f.pd)),
        };
    }
    f
}

/// `ρ(x, t, a) = ψ̄(x − a, t) ψ(x + a, t)`.
pub fn split_density(spec: &WaveSpec, x: f64, t: f64, a: f64) -> C {
    psi(spec, x - a, t).conj() * psi(spec, x + a, t)
}

/// `|∂tρ − iκ ∂x∂a ρ|` from analytic derivatives.
pub fn continuity_residual(spec: &WaveSpec, x: f64, t: f64, a: f64) -> f64 {
    continuity_residual_with_kappa(spec, spec.kappa, x, t, a)
}

/// The continuity residual with the operator's `κ` overridden.
pub fn continuity_residual_with_kappa(spec: &WaveSpec, kappa_check: f64, x: f64, t: f64, a: f64) -> f64 {
    let (psi_, psi_d) = log_density(spec, t);
    let f = tensor_field(&psi_, &psi_d, 0);
    value_and_residual(&f, &psi_, &psi_d, kappa_check, x, a).1
}

/// `J = iκ ∂aρ`.
pub fn current(spec: &WaveSpec, x: f64, t: f64, a: f64) -> C {
    C::i() * spec.kappa * conserved_tensor(spec, 1, x, t, a).expect("order 1")
}

/// `∂a^m ρ` for `m ≤ 4`.
pub fn conserved_tensor(spec: &WaveSpec, order: usize, x: f64, t: f64, a: f64) -> Result<C> {
    Ok(tensor_with_residual(spec, order, x, t, a)?.0)
}

/// `(∂a^m ρ, its continuity residual)`.
pub fn tensor_with_residual(spec: &WaveSpec, order: usize, x: f64, t: f64, a: f64) -> Result<(C, f64)> {
    if order > MAX_TENSOR_ORDER {
        return Err(QuantumError::OrderTooHigh(order));
    }
    let (psi_, psi_d) = log_density(spec, t);
    let f = tensor_field(&psi_, &psi_d, order);
    Ok(value_and_residual(&f, &psi_, &psi_d, spec.kappa, x, a))
}

/// `(x∂x − a∂a)ρ` and its continuity residual.
pub fn boosted_density(spec: &WaveSpec, x: f64, t: f64, a: f64) -> (C, f64) {
    let (psi_, psi_d) = log_density(spec, t);
    let f = Prefactored {
        p: psi_.boost(),
        pd: psi_d.boost(),
    };
    value_and_residual(&f, &psi_, &psi_d, spec.kappa, x, a)
}
