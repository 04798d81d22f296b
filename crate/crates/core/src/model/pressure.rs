use serde::{Deserialize, Serialize};

use super::{poly, Jet, ModelError};

/// The driving term `g` in `u_t = u·u_x + g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Forcing {
    None,
    /// `g = k`.
    Constant { k: f64 },
    /// `g = k²·x`.
    LinearInX { k: f64 },
    /// `g = k(t)`, a polynomial in `t`.
    TimeOnly { k_coeffs: Vec<f64> },
    /// `g = g(x)`, a polynomial in `x`.
    PolyX { g_coeffs: Vec<f64> },
}

/// Forcing plus the reference pressure `p(0)`.
///
/// For every `x`-dependent variant `p(x) = p0 + ∫₀ˣ g(z) dz` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureSpec {
    #[serde(flatten)]
    pub variant: Forcing,
    #[serde(default)]
    pub p0: f64,
}

impl Default for PressureSpec {
    fn default() -> Self {
        Self::none()
    }
}

impl PressureSpec {
    pub fn new(variant: Forcing) -> Self {
        Self { variant, p0: 0.0 }
    }

    pub fn none() -> Self {
        Self::new(Forcing::None)
    }

    pub fn constant(k: f64) -> Self {
        Self::new(Forcing::Constant { k })
    }

    pub fn linear_in_x(k: f64) -> Self {
        Self::new(Forcing::LinearInX { k })
    }

    pub fn poly_x(g_coeffs: Vec<f64>) -> Self {
        Self::new(Forcing::PolyX { g_coeffs })
    }

    pub fn time_only(k_coeffs: Vec<f64>) -> Self {
        Self::new(Forcing::TimeOnly { k_coeffs })
    }

    pub fn with_p0(mut self, p0: f64) -> Self {
        self.p0 = p0;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        let ok = self.p0.is_finite()
            && match &self.variant {
                Forcing::None => true,
                Forcing::Constant { k } | Forcing::LinearInX { k } => k.is_finite(),
                Forcing::TimeOnly { k_coeffs } => finite(k_coeffs),
                Forcing::PolyX { g_coeffs } => finite(g_coeffs),
            };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidPressure("non-finite coefficient".into()))
        }
    }

    /// `g` as a polynomial in `x`, for every time-independent variant.
    pub fn g_polynomial(&self) -> Option<Vec<f64>> {
        match &self.variant {
            Forcing::None => Some(Vec::new()),
            Forcing::Constant { k } => Some(vec![*k]),
            Forcing::LinearInX { k } => Some(vec![0.0, k * k]),
            Forcing::PolyX { g_coeffs } => Some(g_coeffs.clone()),
            Forcing::TimeOnly { .. } => None,
        }
    }

    pub fn is_time_only(&self) -> bool {
        matches!(self.variant, Forcing::TimeOnly { .. })
    }

    /// `g(x, t)`.
    pub fn g(&self, x: f64, t: f64) -> f64 {
        match &self.variant {
            Forcing::None => 0.0,
            Forcing::Constant { k } => *k,
            Forcing::LinearInX { k } => k * k * x,
            Forcing::TimeOnly { k_coeffs } => poly::eval(k_coeffs, t),
            Forcing::PolyX { g_coeffs } => poly::eval(g_coeffs, x),
        }
    }

    /// `∂g/∂x`.
    pub fn g_prime(&self, x: f64) -> f64 {
        match &self.variant {
            Forcing::LinearInX { k } => k * k,
            Forcing::PolyX { g_coeffs } => poly::eval(&poly::derivative(g_coeffs), x),
            _ => 0.0,
        }
    }

    /// Jet of the time-independent `g` at `x0`.
    pub fn g_jet(&self, x0: f64, order: usize) -> Result<Jet, ModelError> {
        let g = self
            .g_polynomial()
            .ok_or(ModelError::UnsupportedVariant("TimeOnly has no g(x) jet"))?;
        Ok(Jet::from_polynomial(x0, &g, order))
    }

    /// Taylor coefficients in `t` of the driving term at fixed `x`.
    pub fn g_time_coeffs(&self, x: f64) -> Vec<f64> {
        match &self.variant {
            Forcing::TimeOnly { k_coeffs } => k_coeffs.clone(),
            _ => vec![self.g(x, 0.0)],
        }
    }

    /// `K₁(t) = ∫₀ᵗ k(τ) dτ` and `K₂(t) = ∫₀ᵗ k(τ) τ dτ` for the time-only driver.
    pub fn time_integrals(&self, t: f64) -> Option<(f64, f64)> {
        match &self.variant {
            Forcing::TimeOnly { k_coeffs } => {
                let k1 = poly::eval(&poly::integral(k_coeffs, 0.0), t);
                let tk = poly::mul(k_coeffs, &[0.0, 1.0]);
                let k2 = poly::eval(&poly::integral(&tk, 0.0), t);
                Some((k1, k2))
            }
            _ => None,
        }
    }

    /// The same forcing with `g → −g`.
    pub fn negated(&self) -> Self {
        let variant = match &self.variant {
            Forcing::None => Forcing::None,
            Forcing::Constant { k } => Forcing::Constant { k: -k },
            Forcing::LinearInX { k } => Forcing::PolyX {
                g_coeffs: vec![0.0, -k * k],
            },
            Forcing::TimeOnly { k_coeffs } => Forcing::TimeOnly {
                k_coeffs: k_coeffs.iter().map(|c| -c).collect(),
            },
            Forcing::PolyX { g_coeffs } => Forcing::PolyX {
                g_coeffs: g_coeffs.iter().map(|c| -c).collect(),
            },
        };
        Self {
            variant,
            p0: -self.p0,
        }
    }
}

/// `p(x) = p0 + ∫₀ˣ g(z) dz`, exact for the polynomial variants.
pub fn pressure_at(spec: &PressureSpec, x: f64) -> Result<f64, ModelError> {
    let g = spec
        .g_polynomial()
        .ok_or(ModelError::UnsupportedVariant("pressure of a time-only driver"))?;
    Ok(poly::eval(&poly::integral(&g, spec.p0), x))
}
