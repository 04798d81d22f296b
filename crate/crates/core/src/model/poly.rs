//! Dense polynomials in ascending-power coefficient form.

/// Horner evaluation of `Σ cᵢ xⁱ`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

/// Antiderivative with the given constant term.
pub fn integral(coeffs: &[f64], constant: f64) -> Vec<f64> {
    std::iter::once(constant)
        .chain(coeffs.iter().enumerate().map(|(i, c)| c / (i + 1) as f64))
        .collect()
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Coefficients of `outer(inner(x))`.
pub fn compose(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for c in outer.iter().rev() {
        out = mul(&out, inner);
        out = add(&out, &[*c]);
    }
    out
}

/// Taylor coefficients of the polynomial about `x0`, i.e. `p(x0 + h)` in `h`.
pub fn shift(coeffs: &[f64], x0: f64) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    let n = c.len();
    // repeated synthetic division
    for k in 0..n {
        for j in (k..n - 1).rev() {
            c[j] += x0 * c[j + 1];
        }
    }
    c
}
