use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::poly;

/// Truncated Taylor expansion `Σ cᵢ (x − x0)ⁱ`, `i = 0..=order`.
///
/// All arithmetic is exact in the ring of polynomials truncated at the
/// smaller operand order. Differentiation lowers the order by one; nothing
/// ever silently pads a jet back up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub x0: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn new(x0: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { x0, coeffs }
    }

    pub fn constant(x0: f64, c: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = c;
        Self { x0, coeffs }
    }

    /// The identity function `x` expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(x0, x0, order);
        if order >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    /// A polynomial given in powers of `x` (not `x − x0`), re-expanded at `x0`.
    pub fn from_polynomial(x0: f64, coeffs: &[f64], order: usize) -> Self {
        let mut c = poly::shift(coeffs, x0);
        c.resize(order + 1, 0.0);
        Self { x0, coeffs: c }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = (order + 1).min(self.coeffs.len());
        Self {
            x0: self.x0,
            coeffs: self.coeffs[..n].to_vec(),
        }
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        poly::eval(&self.coeffs, x - self.x0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            x0: self.x0,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `d/dx`; the result has order one lower (order 0 stays order 0 with value 0).
    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(self.x0, 0.0, 0);
        }
        Self {
            x0: self.x0,
            coeffs: poly::derivative(&self.coeffs),
        }
    }

    /// Antiderivative with value `c0` at `x0`; order grows by one.
    pub fn integrate(&self, c0: f64) -> Self {
        Self {
            x0: self.x0,
            coeffs: poly::integral(&self.coeffs, c0),
        }
    }

    /// Re-expands the truncated polynomial about `x_new` (exact for the polynomial).
    pub fn recenter(&self, x_new: f64) -> Self {
        Self {
            x0: x_new,
            coeffs: poly::shift(&self.coeffs, x_new - self.x0),
        }
    }

    /// Coefficients of `h ↦ f(x0 + s·h)`, expanded again at `x0`.
    pub fn scale_argument(&self, s: f64) -> Self {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let v = c * p;
                p *= s;
                v
            })
            .collect();
        Self { x0: self.x0, coeffs }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(self.x0, 1.0, self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `1/f`, requires a nonzero value at the expansion point.
    pub fn recip(&self) -> Self {
        let a0 = self.coeffs[0];
        assert!(a0 != 0.0, "reciprocal of a jet vanishing at its centre");
        let n = self.coeffs.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / a0;
        for k in 1..n {
            let s: f64 = (1..=k).map(|i| self.coeffs[i] * r[k - i]).sum();
            r[k] = -s / a0;
        }
        Self {
            x0: self.x0,
            coeffs: r,
        }
    }

    pub fn div(&self, other: &Jet) -> Self {
        self * &other.recip()
    }

    /// Index of the last nonzero coefficient (`None` for the zero jet).
    fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != 0.0)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.x0, rhs.x0, "jets expanded at different points");
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            x0: self.x0,
            coeffs: (0..n).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.x0, rhs.x0, "jets expanded at different points");
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet {
            x0: self.x0,
            coeffs: (0..n).map(|i| self.coeffs[i] - rhs.coeffs[i]).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.x0, rhs.x0, "jets expanded at different points");
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![0.0; n];
        let (Some(da), Some(db)) = (self.degree(), rhs.degree()) else {
            return Jet {
                x0: self.x0,
                coeffs: out,
            };
        };
        for i in 0..=da.min(n - 1) {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..=db.min(n - 1 - i) {
                out[i + j] += a * rhs.coeffs[j];
            }
        }
        Jet {
            x0: self.x0,
            coeffs: out,
        }
    }
}
