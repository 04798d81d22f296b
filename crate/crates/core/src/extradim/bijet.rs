use serde::{Deserialize, Serialize};

use crate::model::{poly, Jet};

/// Truncated expansion `Σ c_ij (x − x0)^i a^j`, `i ≤ nx`, `j ≤ na`.
///
/// Serialized row-major: `coeffs[i][j]` multiplies `(x − x0)^i a^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiJet {
    pub x0: f64,
    pub nx: usize,
    pub na: usize,
    pub coeffs: Vec<Vec<f64>>,
}

impl BiJet {
    pub fn zeros(x0: f64, nx: usize, na: usize) -> Self {
        Self {
            x0,
            nx,
            na,
            coeffs: vec![vec![0.0; na + 1]; nx + 1],
        }
    }

    pub fn monomial(x0: f64, nx: usize, na: usize, i: usize, j: usize) -> Self {
        let mut b = Self::zeros(x0, nx, na);
        b.coeffs[i][j] = 1.0;
        b
    }

    /// Stacks x-jets as the `a⁰, a¹, …` layers.
    pub fn from_layers(x0: f64, nx: usize, layers: &[Jet]) -> Self {
        let na = layers.len() - 1;
        let mut b = Self::zeros(x0, nx, na);
        for (j, layer) in layers.iter().enumerate() {
            for i in 0..=nx {
                b.coeffs[i][j] = layer.coeff(i);
            }
        }
        b
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    /// The coefficient of `a^j` as an x-jet.
    pub fn layer(&self, j: usize) -> Jet {
        Jet::new(self.x0, (0..=self.nx).map(|i| self.coeffs[i][j]).collect())
    }

    fn from_fn(&self, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(self.x0, self.nx, self.na);
        for i in 0..=self.nx {
            for j in 0..=self.na {
                out.coeffs[i][j] = f(i, j);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.from_fn(|i, j| s * self.coeffs[i][j])
    }

    pub fn add(&self, other: &Self) -> Self {
        self.from_fn(|i, j| self.coeffs[i][j] + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.from_fn(|i, j| self.coeffs[i][j] - other.get(i, j))
    }

    /// Largest `|c_ij|` over `i ≤ max_i`, `j ≤ max_j`.
    pub fn max_abs_low(&self, max_i: usize, max_j: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=max_i.min(self.nx) {
            for j in 0..=max_j.min(self.na) {
                m = m.max(self.coeffs[i][j].abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_low(self.nx, self.na)
    }

    pub fn dx(&self) -> Self {
        self.from_fn(|i, j| (i + 1) as f64 * self.get(i + 1, j))
    }

    pub fn da(&self) -> Self {
        self.from_fn(|i, j| (j + 1) as f64 * self.get(i, j + 1))
    }

    /// Multiplication by `x = x0 + (x − x0)`.
    pub fn mul_x(&self) -> Self {
        self.from_fn(|i, j| self.x0 * self.coeffs[i][j] + if i > 0 { self.coeffs[i - 1][j] } else { 0.0 })
    }

    pub fn mul_a(&self) -> Self {
        self.from_fn(|i, j| if j > 0 { self.coeffs[i][j - 1] } else { 0.0 })
    }

    /// Multiplication by an x-jet (truncated at `nx`).
    pub fn mul_jet(&self, g: &Jet) -> Self {
        self.from_fn(|i, j| (0..=i).map(|m| g.coeff(m) * self.coeffs[i - m][j]).sum())
    }

    /// Truncated product, kept at the orders of `self`.
    pub fn mul(&self, other: &Self) -> Self {
        self.from_fn(|i, j| {
            let mut s = 0.0;
            for p in 0..=i {
                for q in 0..=j {
                    s += self.coeffs[p][q] * other.get(i - p, j - q);
                }
            }
            s
        })
    }

    /// `f(x + d, a)` re-expanded at the same point, exact on the truncation.
    pub fn shift_x(&self, d: f64) -> Self {
        let mut out = self.clone();
        for j in 0..=self.na {
            let col: Vec<f64> = (0..=self.nx).map(|i| self.coeffs[i][j]).collect();
            let shifted = poly::shift(&col, d);
            for i in 0..=self.nx {
                out.coeffs[i][j] = shifted.get(i).copied().unwrap_or(0.0);
            }
        }
        out
    }

    /// `f(x0 + s·h, r·a)` in powers of `h` and `a`.
    pub fn scale_args(&self, s: f64, r: f64) -> Self {
        let sp: Vec<f64> = (0..=self.nx).map(|i| s.powi(i as i32)).collect();
        let rp: Vec<f64> = (0..=self.na).map(|j| r.powi(j as i32)).collect();
        self.from_fn(|i, j| self.coeffs[i][j] * sp[i] * rp[j])
    }

    /// `exp(τ ∂²/∂x∂a)`: `c′_ij = Σ_m τ^m/m! · (i+m)!/i! · (j+m)!/j! · c_{i+m, j+m}`.
    pub fn exp_mixed(&self, tau: f64) -> Self {
        if tau == 0.0 {
            return self.clone();
        }
        self.from_fn(|i, j| {
            let mut w = 1.0;
            let mut sum = self.coeffs[i][j];
            let top = (self.nx - i).min(self.na - j);
            for m in 1..=top {
                w *= tau / m as f64 * (i + m) as f64 * (j + m) as f64;
                sum += w * self.coeffs[i + m][j + m];
            }
            sum
        })
    }
}
