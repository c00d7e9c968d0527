//! Power-series checks: truncated Green series with tail bounds, ratio estimates of `R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::richardson;

/// `R` of `ε δ_e + (1−ε) μ` given `R` of `μ`.
pub fn lazy_radius(r: f64, eps: f64) -> f64 {
    1.0 / (eps + (1.0 - eps) / r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSeries {
    /// `Σ_{n≤N} P^n(x,y) r^n`.
    pub partial: f64,
    /// Twice the geometric continuation of the last nonzero terms.
    pub tail_bound: f64,
    pub terms: usize,
    /// Ratio of the geometric continuation.
    pub ratio: f64,
}

impl DirectSeries {
    /// Whether `value` lies in `[partial, partial + tail]` up to relative slack `rel`.
    pub fn brackets(&self, value: f64, rel: f64) -> bool {
        value >= self.partial * (1.0 - rel) && value <= (self.partial + self.tail_bound) * (1.0 + rel)
    }
}

/// Step between consecutive nonzero terms near the end (2 for bipartite walks).
fn step_of(terms: &[f64]) -> usize {
    let n = terms.len();
    if n >= 3 && terms[n - 1] != 0.0 && terms[n - 2] != 0.0 {
        1
    } else {
        2
    }
}

/// Truncated series from `coeffs[n] = P^n(x,y)` at `r`.
pub fn direct_series_green(coeffs: &[f64], r: f64) -> Result<DirectSeries> {
    if coeffs.len() < 4 {
        return Err(Error::InvalidInput("at least four series terms are needed".into()));
    }
    let terms: Vec<f64> = coeffs.iter().enumerate().map(|(n, p)| p * r.powi(n as i32)).collect();
    let partial = terms.iter().sum();
    let last = terms.iter().rposition(|&a| a != 0.0).unwrap_or(0);
    let step = step_of(&terms[..=last]);
    if last < step || terms[last - step] == 0.0 {
        return Err(Error::InvalidInput("too few nonzero series terms for a tail estimate".into()));
    }
    let ratio = (terms[last] / terms[last - step]).powf(1.0 / step as f64);
    let tail_bound = if ratio < 1.0 { 2.0 * terms[last] * ratio / (1.0 - ratio) } else { f64::INFINITY };
    Ok(DirectSeries { partial, tail_bound, terms: coeffs.len(), ratio })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GerlEstimate {
    pub r: f64,
    pub error: f64,
    /// `(n, R_n)` before extrapolation.
    pub ratios: Vec<(usize, f64)>,
    pub step: usize,
}

/// `R` from return probabilities `p[n]`, assuming `p_n ~ C R^{-n} n^{-exponent}`.
///
/// `R_n = (p_n/p_{n+s})^{1/s} (n/(n+s))^{exponent/s}`, then extrapolated in `1/n`.
pub fn gerl_r_estimate(returns: &[f64], exponent: f64) -> Result<GerlEstimate> {
    let step = step_of(returns);
    let mut ratios = Vec::new();
    for n in (1..returns.len()).rev().step_by(step).skip(1) {
        let (a, b) = (returns[n], returns[n + step]);
        if a > 0.0 && b > 0.0 {
            let s = step as f64;
            ratios.push((n, (a / b).powf(1.0 / s) * (n as f64 / (n as f64 + s)).powf(exponent / s)));
        }
    }
    ratios.reverse();
    if ratios.len() < 3 {
        return Err(Error::InvalidInput("too few return probabilities for a ratio estimate".into()));
    }
    let h: Vec<f64> = ratios.iter().map(|(n, _)| 1.0 / *n as f64).collect();
    let v: Vec<f64> = ratios.iter().map(|(_, x)| *x).collect();
    let ex = richardson(&h, &v, 2);
    Ok(GerlEstimate { r: ex.limit, error: ex.error, ratios, step })
}
