use serde::{Deserialize, Serialize};

use super::{Jet, ModelError};

/// One piece `A·e^{x/L}` of a piecewise-exponential profile, valid up to `end`
/// (the last piece has no end). The first piece starts at `−∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpSegment {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub end: Option<f64>,
}

impl ExpSegment {
    fn value(&self, x: f64) -> f64 {
        self.a * (x / self.l).exp()
    }
}

/// Initial data `u(x, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Profile {
    /// `α + βx`.
    LinearSegment { alpha: f64, beta: f64 },
    /// `A·e^{x/L}`.
    Exponential {
        #[serde(rename = "A")]
        a: f64,
        #[serde(rename = "L")]
        l: f64,
    },
    /// Continuous polygon through `(x, u)` nodes, constant beyond the end nodes.
    PiecewiseLinear { nodes: Vec<(f64, f64)> },
    PiecewiseExponential { segments: Vec<ExpSegment> },
    RawJet { jet: Jet },
}

impl Profile {
    pub fn zero() -> Self {
        Self::LinearSegment {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn segment(alpha: f64, beta: f64) -> Self {
        Self::LinearSegment { alpha, beta }
    }

    pub fn exponential(a: f64, l: f64) -> Self {
        Self::Exponential { a, l }
    }

    /// Triangular bump of height `h` on `[x_left, x_right]` peaking at `x_peak`.
    pub fn triangle(x_left: f64, x_peak: f64, x_right: f64, h: f64) -> Self {
        Self::PiecewiseLinear {
            nodes: vec![(x_left, 0.0), (x_peak, h), (x_right, 0.0)],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidProfile(m.to_string()));
        match self {
            Self::LinearSegment { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite()) {
                    return bad("non-finite segment coefficients");
                }
            }
            Self::Exponential { a, l } => {
                if !(a.is_finite() && l.is_finite()) || *l == 0.0 {
                    return bad("exponential profile needs finite A and nonzero L");
                }
            }
            Self::PiecewiseLinear { nodes } => {
                if nodes.is_empty() {
                    return bad("piecewise-linear profile without nodes");
                }
                if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return bad("node abscissae must be strictly increasing");
                }
                if nodes.iter().any(|(x, u)| !(x.is_finite() && u.is_finite())) {
                    return bad("non-finite node");
                }
            }
            Self::PiecewiseExponential { segments } => {
                if segments.is_empty() {
                    return bad("piecewise-exponential profile without segments");
                }
                if segments.iter().any(|s| s.l == 0.0 || !s.a.is_finite()) {
                    return bad("segment with zero L");
                }
                let (last, init) = segments.split_last().expect("non-empty");
                if last.end.is_some() {
                    return bad("the last segment must be unbounded");
                }
                let mut prev_end = f64::NEG_INFINITY;
                for (i, s) in init.iter().enumerate() {
                    let Some(end) = s.end else {
                        return bad("only the last segment may be unbounded");
                    };
                    if end <= prev_end {
                        return bad("segment ends must increase");
                    }
                    prev_end = end;
                    let (l, r) = (s.value(end), segments[i + 1].value(end));
                    if (l - r).abs() > 1e-12 * l.abs().max(r.abs()).max(1.0) {
                        return bad("piecewise-exponential profile is discontinuous");
                    }
                }
            }
            Self::RawJet { jet } => {
                if jet.coeffs().iter().any(|c| !c.is_finite()) {
                    return bad("non-finite jet coefficient");
                }
            }
        }
        Ok(())
    }

    /// Abscissae where the profile is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::PiecewiseLinear { nodes } => nodes.iter().map(|n| n.0).collect(),
            Self::PiecewiseExponential { segments } => {
                segments.iter().filter_map(|s| s.end).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn is_smooth_at(&self, x: f64) -> bool {
        !self
            .kinks()
            .iter()
            .any(|k| (x - k).abs() <= 1e-12 * k.abs().max(1.0))
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::LinearSegment { alpha, beta } => alpha + beta * x,
            Self::Exponential { a, l } => a * (x / l).exp(),
            Self::PiecewiseLinear { nodes } => {
                let first = nodes[0];
                let last = nodes[nodes.len() - 1];
                if x <= first.0 {
                    return first.1;
                }
                if x >= last.0 {
                    return last.1;
                }
                let i = nodes.partition_point(|n| n.0 <= x) - 1;
                let (x0, u0) = nodes[i];
                let (x1, u1) = nodes[i + 1];
                u0 + (u1 - u0) * (x - x0) / (x1 - x0)
            }
            Self::PiecewiseExponential { segments } => segment_at(segments, x).value(x),
            Self::RawJet { jet } => jet.eval(x),
        }
    }

    /// `du/dx`; at a kink the right-hand derivative.
    pub fn slope(&self, x: f64) -> f64 {
        match self {
            Self::LinearSegment { beta, .. } => *beta,
            Self::Exponential { a, l } => a / l * (x / l).exp(),
            Self::PiecewiseLinear { nodes } => {
                if x < nodes[0].0 || x >= nodes[nodes.len() - 1].0 {
                    return 0.0;
                }
                let i = nodes.partition_point(|n| n.0 <= x) - 1;
                (nodes[i + 1].1 - nodes[i].1) / (nodes[i + 1].0 - nodes[i].0)
            }
            Self::PiecewiseExponential { segments } => {
                let s = segment_at(segments, x);
                s.value(x) / s.l
            }
            Self::RawJet { jet } => jet.derivative().eval(x),
        }
    }
}

fn segment_at(segments: &[ExpSegment], x: f64) -> &ExpSegment {
    segments
        .iter()
        .find(|s| s.end.map_or(true, |e| x < e))
        .unwrap_or(&segments[segments.len() - 1])
}

/// Taylor coefficients of the profile at `x0` up to `order`.
pub fn profile_jet(profile: &Profile, x0: f64, order: usize) -> Result<Jet, ModelError> {
    if !profile.is_smooth_at(x0) {
        return Err(ModelError::Kink { x: x0 });
    }
    let exp_jet = |a: f64, l: f64| {
        let mut c = Vec::with_capacity(order + 1);
        let mut term = a * (x0 / l).exp();
        for n in 0..=order {
            c.push(term);
            term /= (n + 1) as f64 * l;
        }
        Jet::new(x0, c)
    };
    Ok(match profile {
        Profile::LinearSegment { alpha, beta } => {
            Jet::from_polynomial(x0, &[*alpha, *beta], order)
        }
        Profile::Exponential { a, l } => exp_jet(*a, *l),
        Profile::PiecewiseLinear { .. } => {
            let mut c = vec![0.0; order + 1];
            c[0] = profile.value(x0);
            if order >= 1 {
                c[1] = profile.slope(x0);
            }
            Jet::new(x0, c)
        }
        Profile::PiecewiseExponential { segments } => {
            let s = segment_at(segments, x0);
            exp_jet(s.a, s.l)
        }
        Profile::RawJet { jet } => {
            let shifted = if jet.x0 == x0 { jet.clone() } else { jet.recenter(x0) };
            let mut c = shifted.coeffs().to_vec();
            c.resize(order + 1, 0.0);
            Jet::new(x0, c)
        }
    })
}
