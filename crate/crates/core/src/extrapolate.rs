//! Polynomial extrapolation to zero and least-squares line fits.

use serde::{Deserialize, Serialize};

/// Result of extrapolating `v(h)` to `h = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// `|last two extrapolants|`.
    pub error: f64,
    pub order: usize,
}

/// Neville extrapolation using the last `order + 1` samples; the error compares orders `order` and `order − 1`.
pub fn richardson(h: &[f64], v: &[f64], order: usize) -> Extrapolation {
    assert_eq!(h.len(), v.len());
    assert!(!h.is_empty());
    let order = order.min(h.len() - 1);
    let at = |ord: usize| -> f64 {
        let hs = &h[h.len() - ord - 1..];
        let mut p: Vec<f64> = v[v.len() - ord - 1..].to_vec();
        for m in 1..=ord {
            for i in 0..=ord - m {
                p[i] = (hs[i + m] * p[i] - hs[i] * p[i + 1]) / (hs[i + m] - hs[i]);
            }
        }
        p[0]
    };
    let limit = at(order);
    let error = if order == 0 {
        if h.len() >= 2 {
            (v[v.len() - 1] - v[v.len() - 2]).abs()
        } else {
            f64::INFINITY
        }
    } else {
        (limit - at(order - 1)).abs()
    };
    Extrapolation { limit, error, order }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
}

/// Ordinary least squares for `y ≈ intercept + slope·x`.
pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_se = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    Some(LineFit { slope, intercept, r2, rms: (sse / nf).sqrt(), slope_se })
}

/// Least squares for `y ≈ Σ_j c_j f_j(x)` via normal equations; returns coefficients.
pub fn linear_least_squares(rows: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = rows.first()?.len();
    let a = nalgebra::DMatrix::from_fn(rows.len(), m, |i, j| rows[i][j]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let h: Vec<f64> = (1..=5).map(|k| 1.0 / k as f64).collect();
        let v: Vec<f64> = h.iter().map(|x| 2.0 + 3.0 * x - x * x).collect();
        let e = richardson(&h, &v, 3);
        assert!((e.limit - 2.0).abs() < 1e-12);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|a| 1.0 - 0.5 * a).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.r2 - 1.0).abs() < 1e-14);
        let c = linear_least_squares(&x.iter().map(|&a| vec![1.0, a]).collect::<Vec<_>>(), &y).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12);
    }
}
