//! Real Lambert W function on the principal (`W₀`) and lower (`W₋₁`) branches.
//!
//! `W(z)` solves `w·eʷ = z`. Both real branches meet at the branch point
//! `z = −1/e`, where `W = −1`. Small arguments on the principal branch use the
//! alternating power series; the branch-point neighbourhood uses the expansion
//! in `p = √(2(1 + e·z))`; everything else is polished by Halley iteration.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `1/e` split into a leading double and its rounding remainder so that
/// `z + 1/e` can be formed without cancellation near the branch point.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

/// Arguments this far below `−1/e` are treated as the branch point itself.
const BRANCH_SLACK: f64 = 4.0 * f64::EPSILON;

/// Series radius used by [`lambert_w`] for the principal branch.
pub const SERIES_RADIUS: f64 = 0.2 / E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `W₀`, defined on `[−1/e, ∞)`, values `≥ −1`.
    Principal,
    /// `W₋₁`, defined on `[−1/e, 0)`, values `≤ −1`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LambertError {
    #[error("argument {z} is outside the domain of the {branch:?} branch")]
    Domain { branch: Branch, z: f64 },
    #[error("Halley iteration did not converge for z = {z}")]
    NoConvergence { z: f64 },
}

/// `1 + e·z`, computed with a split `1/e` so it is accurate to a few ulps of
/// `z + 1/e` even when `z` sits right at the branch point.
fn branch_distance(z: f64) -> f64 {
    E * ((z + INV_E_HI) + INV_E_LO)
}

fn check_domain(branch: Branch, z: f64) -> Result<f64, LambertError> {
    if !z.is_finite() && !(branch == Branch::Principal && z == f64::INFINITY) {
        return Err(LambertError::Domain { branch, z });
    }
    let q = branch_distance(z);
    if q < -BRANCH_SLACK {
        return Err(LambertError::Domain { branch, z });
    }
    if branch == Branch::Lower && z >= 0.0 {
        return Err(LambertError::Domain { branch, z });
    }
    Ok(q.max(0.0))
}

/// Evaluates `W(z)` on the requested branch.
pub fn lambert_w(branch: Branch, z: f64) -> Result<f64, LambertError> {
    let q = check_domain(branch, z)?;
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if q == 0.0 {
        return Ok(-1.0);
    }
    let p = (2.0 * q).sqrt();
    if p < 1e-3 {
        return Ok(branch_point_series(branch, p));
    }
    if branch == Branch::Principal && z.abs() <= SERIES_RADIUS {
        return Ok(lambert_w_series(z, 40));
    }
    halley(branch, z, initial_guess(branch, z, p))
}

/// Pure Halley iteration from the branch-specific initial guess, without the
/// series shortcut. Used as an independent route to cross-check the series.
pub fn lambert_w_halley(branch: Branch, z: f64) -> Result<f64, LambertError> {
    let q = check_domain(branch, z)?;
    if q == 0.0 {
        return Ok(-1.0);
    }
    if branch == Branch::Principal && z == 0.0 {
        return Ok(0.0);
    }
    let p = (2.0 * q).sqrt();
    halley(branch, z, initial_guess(branch, z, p))
}

/// Partial sum `−Σ_{n=1}^{N} n^{n−1}(−z)ⁿ/n!` of the principal-branch series.
///
/// Converges to `W₀(z)` for `|z| < 1/e`; outside that disc the partial sums
/// are returned as-is.
pub fn lambert_w_series(z: f64, n_terms: usize) -> f64 {
    if z == 0.0 || n_terms == 0 {
        return 0.0;
    }
    // t_n = n^{n-1}/n! (-z)^n, t_{n+1}/t_n = (1 + 1/n)^{n-1} (-z)
    let mut term = -z;
    let mut sum = term;
    for n in 1..n_terms {
        let nf = n as f64;
        let growth = ((nf - 1.0) * (1.0 / nf).ln_1p()).exp();
        term *= growth * (-z);
        sum += term;
        if term == 0.0 {
            break;
        }
    }
    -sum
}

/// `W = −1 + p − p²/3 + 11p³/72 − …` with `p → −p` on the lower branch.
fn branch_point_series(branch: Branch, p: f64) -> f64 {
    const C: [f64; 8] = [
        -1.0,
        1.0,
        -1.0 / 3.0,
        11.0 / 72.0,
        -43.0 / 540.0,
        769.0 / 17280.0,
        -221.0 / 8505.0,
        680_863.0 / 43_545_600.0,
    ];
    let p = match branch {
        Branch::Principal => p,
        Branch::Lower => -p,
    };
    C.iter().rev().fold(0.0, |acc, c| acc * p + c)
}

fn initial_guess(branch: Branch, z: f64, p: f64) -> f64 {
    match branch {
        Branch::Principal => {
            if z < -0.25 {
                branch_point_series(branch, p)
            } else if z < 3.0 {
                // Winitzki's rational-log approximation
                let l = z.ln_1p();
                l * (1.0 - (1.0 + l).ln() / (2.0 + l))
            } else {
                let l1 = z.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        Branch::Lower => {
            if z < -0.25 {
                branch_point_series(branch, p)
            } else {
                let l1 = (-z).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    }
}

fn halley(branch: Branch, z: f64, mut w: f64) -> Result<f64, LambertError> {
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if f == 0.0 || wp1 == 0.0 {
            return Ok(w);
        }
        // near the branch point the step stalls at ~ε/p, so accept a residual at rounding level
        if f.abs() <= 2.0 * f64::EPSILON * z.abs() {
            return Ok(w);
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let mut next = w - step;
        // keep the iterate on its own side of the branch point
        match branch {
            Branch::Principal if next < -1.0 => next = 0.5 * (w - 1.0),
            Branch::Lower if next > -1.0 => next = 0.5 * (w - 1.0),
            _ => {}
        }
        if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            return Ok(next);
        }
        w = next;
    }
    Err(LambertError::NoConvergence { z })
}
