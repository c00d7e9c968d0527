//! Truncated power series `Σ_n p_n(g) t^n` from exact lattice convolution powers.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::measures::LatticeMeasure;

/// Points with `|g|_∞ ≤ window` whose coefficients are kept.
pub const DEFAULT_WINDOW: i32 = 8;

#[derive(Clone, Debug)]
pub struct LatticeSeries {
    window: i32,
    n_max: usize,
    /// `p_n(g)` for `n = 0..=n_max`, per stored point.
    coeffs: FxHashMap<Vec<i32>, Vec<f64>>,
}

impl LatticeSeries {
    /// Streams powers `0..=n_max`, keeping coefficients inside the window; fails once a power
    /// has more than `cap` support points.
    pub fn new(measure: &LatticeMeasure, n_max: usize, window: i32, cap: usize) -> Result<Self> {
        let d = measure.rank();
        let mut coeffs: FxHashMap<Vec<i32>, Vec<f64>> = FxHashMap::default();
        let mut cur: FxHashMap<Vec<i32>, f64> = FxHashMap::default();
        cur.insert(vec![0; d], 1.0);
        for n in 0..=n_max {
            if n > 0 {
                let mut next: FxHashMap<Vec<i32>, f64> = FxHashMap::default();
                next.reserve(cur.len() * 2);
                for (x, p) in &cur {
                    for (v, w) in measure.atoms() {
                        let y: Vec<i32> = x.iter().zip(v).map(|(a, b)| a + b).collect();
                        *next.entry(y).or_insert(0.0) += p * w;
                    }
                }
                if next.len() > cap {
                    return Err(Error::BudgetExceeded(format!("lattice power {n} has {} points", next.len())));
                }
                cur = next;
            }
            for (x, p) in &cur {
                if x.iter().all(|c| c.abs() <= window) {
                    coeffs.entry(x.clone()).or_insert_with(|| vec![0.0; n_max + 1])[n] = *p;
                }
            }
        }
        Ok(Self { window, n_max, coeffs })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `p_n(g)`, or `None` outside the stored window.
    pub fn probability(&self, n: usize, g: &[i32]) -> Option<f64> {
        if g.iter().any(|c| c.abs() > self.window) {
            return None;
        }
        Some(self.coeffs.get(g).map_or(0.0, |c| c[n]))
    }

    /// `G^{(m)}(g|t)` truncated at `n_max`, with the bound `Σ_{n>N} n!/(n−m)! t^{n−m}` on the rest.
    pub fn derivative(&self, g: &[i32], t: f64, m: usize) -> Result<(f64, f64)> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("series route needs 0 ≤ t < 1, got {t}")));
        }
        if g.iter().any(|c| c.abs() > self.window) {
            return Err(Error::BudgetExceeded(format!("{g:?} lies outside the stored series window {}", self.window)));
        }
        let falling = |n: usize| (0..m).map(|i| (n - i) as f64).product::<f64>();
        let mut value = 0.0;
        for n in m..=self.n_max() {
            value += falling(n) * t.powi((n - m) as i32) * self.probability(n, g).unwrap_or(0.0);
        }
        let mut tail = 0.0;
        let mut n = self.n_max() + 1;
        loop {
            let term = falling(n) * t.powi((n - m) as i32);
            tail += term;
            if term < 1e-18 * tail.max(1e-300) || n > self.n_max() + 10_000_000 {
                break;
            }
            n += 1;
        }
        Ok((value, tail))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_returns() {
        let s = LatticeSeries::new(&LatticeMeasure::srw(1), 20, 4, 1000).unwrap();
        assert!((s.probability(4, &[0]).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(s.probability(5, &[0]), Some(0.0));
        assert_eq!(s.probability(5, &[5]), None);
        assert!(s.derivative(&[5], 0.5, 0).is_err());
    }
}
