use serde::{Deserialize, Serialize};

use super::{poly, ModelError};

/// An arbitrary differentiable function of one variable, as it appears in the
/// implicit solution families (`x + ut = G(u)`, the hodograph boundary value
/// `F`, the Bateman pair `F(φ)`, `G(φ)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FunctionHandle {
    Zero,
    /// `Σ cᵢ uⁱ`.
    Polynomial { coeffs: Vec<f64> },
    /// `num(u) / den(u)`.
    Rational { num: Vec<f64>, den: Vec<f64> },
    /// `L·ln(u/A)`, defined where `u/A > 0`.
    LogForm {
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "A")]
        a: f64,
    },
    /// Piecewise-linear interpolation of samples with strictly increasing abscissae.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl FunctionHandle {
    pub fn identity() -> Self {
        Self::Polynomial {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, u: f64) -> Result<f64, ModelError> {
        Ok(self.derivs(u)?[0])
    }

    /// `[f(u), f′(u), f″(u)]`.
    pub fn derivs(&self, u: f64) -> Result<[f64; 3], ModelError> {
        let out = match self {
            Self::Zero => [0.0; 3],
            Self::Polynomial { coeffs } => {
                let d1 = poly::derivative(coeffs);
                let d2 = poly::derivative(&d1);
                [poly::eval(coeffs, u), poly::eval(&d1, u), poly::eval(&d2, u)]
            }
            Self::Rational { num, den } => {
                let (n0, n1, n2) = triple(num, u);
                let (d0, d1, d2) = triple(den, u);
                if d0 == 0.0 {
                    return Err(ModelError::OutOfDomain { u });
                }
                let f = n0 / d0;
                let f1 = (n1 - f * d1) / d0;
                let f2 = (n2 - 2.0 * f1 * d1 - f * d2) / d0;
                [f, f1, f2]
            }
            Self::LogForm { l, a } => {
                let r = u / a;
                if !(r > 0.0) {
                    return Err(ModelError::OutOfDomain { u });
                }
                [l * r.ln(), l / u, -l / (u * u)]
            }
            Self::Tabulated { samples } => {
                let i = samples
                    .windows(2)
                    .position(|w| u >= w[0].0 && u <= w[1].0)
                    .ok_or(ModelError::OutOfDomain { u })?;
                let (x0, y0) = samples[i];
                let (x1, y1) = samples[i + 1];
                let slope = (y1 - y0) / (x1 - x0);
                [y0 + slope * (u - x0), slope, 0.0]
            }
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(ModelError::OutOfDomain { u })
        }
    }

    /// `f ∘ h` for a polynomial `h`; defined for the polynomial handles.
    pub fn compose_polynomial(&self, h: &[f64]) -> Option<Self> {
        match self {
            Self::Zero => Some(Self::Zero),
            Self::Polynomial { coeffs } => Some(Self::Polynomial {
                coeffs: poly::compose(coeffs, h),
            }),
            Self::Rational { num, den } => Some(Self::Rational {
                num: poly::compose(num, h),
                den: poly::compose(den, h),
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Self::LogForm { l, a } if *l == 0.0 || *a == 0.0 => {
                Err(ModelError::InvalidFunction("LogForm needs nonzero L and A".into()))
            }
            Self::Rational { den, .. } if den.iter().all(|c| *c == 0.0) => {
                Err(ModelError::InvalidFunction("zero denominator".into()))
            }
            Self::Tabulated { samples } => {
                if samples.len() < 2 || samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    Err(ModelError::InvalidFunction(
                        "tabulated samples need increasing abscissae".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn triple(c: &[f64], u: f64) -> (f64, f64, f64) {
    let d1 = poly::derivative(c);
    let d2 = poly::derivative(&d1);
    (poly::eval(c, u), poly::eval(&d1, u), poly::eval(&d2, u))
}
