//! Green functions `G_i(g|t) = Σ_n μ_i^{*n}(g) t^n` of the lattice factors and the maps `Φ_i`, `Ψ_i`.
//!
//! Every factor here is a symmetric walk on `Z^d`, so its radius of convergence is `R_i = 1`.

mod gauss;
mod laplace;
mod series;
mod torus;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use gauss::gauss_legendre;
pub use laplace::Laplace;
pub use series::LatticeSeries;
pub use torus::TorusQuadrature;

use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_ORDER};
use crate::measures::LatticeMeasure;
use crate::roots;

/// Below this `t` the exact short series is used.
const SMALL_T: f64 = 1e-5;
const SMALL_SERIES_TERMS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GreenMode {
    /// Laplace route when the measure is axis-separable, torus quadrature otherwise.
    Auto,
    Laplace,
    Quadrature { nodes: usize },
    Series { n_max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

enum Engine {
    Laplace(Laplace),
    /// Grid at `M` and at `M/2`; the error estimate is their difference.
    Quadrature(TorusQuadrature, TorusQuadrature),
    Series(LatticeSeries),
}

/// Default per-axis torus nodes: 64 for `d ≤ 3`, 32 above.
pub fn default_nodes(dim: usize) -> usize {
    if dim <= 3 {
        64
    } else {
        32
    }
}

pub struct FactorGreen {
    measure: LatticeMeasure,
    engine: Engine,
    small: OnceLock<LatticeSeries>,
}

impl std::fmt::Debug for FactorGreen {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorGreen").field("rank", &self.measure.rank()).field("mode", &self.mode_name()).finish()
    }
}

impl FactorGreen {
    pub fn new(measure: LatticeMeasure, mode: GreenMode) -> Result<Self> {
        let engine = match mode {
            GreenMode::Auto if measure.is_axis_separable() => Engine::Laplace(Laplace::new(&measure)?),
            GreenMode::Auto => Self::quadrature(&measure, default_nodes(measure.rank()))?,
            GreenMode::Laplace => Engine::Laplace(Laplace::new(&measure)?),
            GreenMode::Quadrature { nodes } => Self::quadrature(&measure, nodes)?,
            GreenMode::Series { n_max } => Engine::Series(LatticeSeries::new(&measure, n_max, series::DEFAULT_WINDOW, 20_000_000)?),
        };
        Ok(Self { measure, engine, small: OnceLock::new() })
    }

    fn quadrature(measure: &LatticeMeasure, nodes: usize) -> Result<Engine> {
        if nodes < 4 || nodes % 4 != 0 {
            return Err(Error::InvalidInput(format!("torus nodes per axis must be a multiple of 4, got {nodes}")));
        }
        Ok(Engine::Quadrature(TorusQuadrature::new(measure, nodes)?, TorusQuadrature::new(measure, nodes / 2)?))
    }

    pub fn mode_name(&self) -> &'static str {
        match self.engine {
            Engine::Laplace(_) => "laplace",
            Engine::Quadrature(..) => "quadrature",
            Engine::Series(_) => "series",
        }
    }

    pub fn measure(&self) -> &LatticeMeasure {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.measure.rank()
    }

    /// Largest derivative order finite at `t = 1` (`2(m+1) < d`), if any.
    pub fn max_finite_order_at_one(&self) -> Option<usize> {
        (0..=MAX_ORDER).rev().find(|&m| 2 * (m + 1) < self.dim())
    }

    fn small_series(&self) -> &LatticeSeries {
        self.small.get_or_init(|| {
            LatticeSeries::new(&self.measure, SMALL_SERIES_TERMS, SMALL_SERIES_TERMS as i32, usize::MAX).expect("short series has no budget")
        })
    }

    pub fn green(&self, g: &[i32], t: f64) -> Result<Estimate> {
        self.derivative(g, t, 0)
    }

    /// `G^{(m)}(g|t)` for `0 ≤ t ≤ 1`.
    pub fn derivative(&self, g: &[i32], t: f64, m: usize) -> Result<Estimate> {
        if g.len() != self.dim() {
            return Err(Error::InvalidInput(format!("vector {g:?} is not in Z^{}", self.dim())));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("t must lie in [0, 1], got {t}")));
        }
        if t == 1.0 && self.dim() <= 2 {
            return Err(Error::Divergent(format!("G(·|1) diverges for a recurrent walk on Z^{}", self.dim())));
        }
        if t == 1.0 && 2 * (m + 1) >= self.dim() {
            return Err(Error::Divergent(format!("G^({m})(·|1) diverges on Z^{} (needs 2(m+1) < d)", self.dim())));
        }
        if t < SMALL_T && !matches!(self.engine, Engine::Series(_)) {
            // points outside the short series window fall through to the main engine
            if let Ok((value, error)) = self.small_series().derivative(g, t, m) {
                return Ok(Estimate { value, error });
            }
        }
        let (value, error) = match &self.engine {
            Engine::Laplace(l) => l.derivative(g, t, m)?,
            Engine::Quadrature(fine, coarse) => {
                let v = fine.derivative(g, t, m)?;
                (v, (v - coarse.derivative(g, t, m)?).abs())
            }
            Engine::Series(s) => s.derivative(g, t, m)?,
        };
        Ok(Estimate { value, error })
    }

    /// Taylor jet `[G, G′, G″/2, G‴/6]` in `t`, truncated at `order`.
    pub fn jet(&self, g: &[i32], t: f64, order: usize) -> Result<Jet> {
        let mut c = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for m in 0..=order {
            if m > 0 {
                fact *= m as f64;
            }
            c.push(self.derivative(g, t, m)?.value / fact);
        }
        Ok(Jet::new(&c))
    }

    /// `θ_i = G_i(0|1)`, infinite for recurrent factors.
    pub fn theta(&self) -> Result<f64> {
        if self.dim() <= 2 {
            return Ok(f64::INFINITY);
        }
        Ok(self.green(&vec![0; self.dim()], 1.0)?.value)
    }

    /// `τ` with `τ G_i(0|τ) = σ`, for `0 ≤ σ ≤ θ_i`.
    pub fn tau(&self, sigma: f64) -> Result<f64> {
        let zero = vec![0; self.dim()];
        if sigma < 0.0 {
            return Err(Error::InvalidInput(format!("σ must be nonnegative, got {sigma}")));
        }
        if sigma == 0.0 {
            return Ok(0.0);
        }
        let theta = self.theta()?;
        if sigma > theta * (1.0 + 1e-13) {
            return Err(Error::InvalidInput(format!("σ = {sigma} exceeds θ = {theta}")));
        }
        if sigma >= theta {
            return Ok(1.0);
        }
        // tG(t) ≥ t, and tG(t) ≤ t/(1−t) for any walk, so the root lies in [σ/(1+σ), min(σ,1)]
        let lo = sigma / (1.0 + sigma);
        let hi = sigma.min(1.0);
        if hi <= lo {
            return Ok(lo);
        }
        let x0 = 0.5 * (lo + hi);
        let f = |t: f64| -> Result<(f64, f64)> {
            let gv = self.derivative(&zero, t, 0)?.value;
            let gp = if t < 1.0 || self.dim() >= 5 { self.derivative(&zero, t, 1)?.value } else { f64::INFINITY };
            Ok((t * gv - sigma, gv + t * gp))
        };
        roots::newton_increasing(f, lo, hi, x0, 1e-15)
    }

    /// `Φ_i(σ) = G_i(0|τ(σ))`.
    pub fn phi(&self, sigma: f64) -> Result<f64> {
        if sigma == 0.0 {
            return Ok(1.0);
        }
        let t = self.tau(sigma)?;
        Ok(self.green(&vec![0; self.dim()], t)?.value)
    }

    /// `Ψ_i(σ) = G² / (G + τG′)` at `τ(σ)`; zero at `σ = θ_i` when `G′(1)` diverges.
    pub fn psi(&self, sigma: f64) -> Result<f64> {
        if sigma == 0.0 {
            return Ok(1.0);
        }
        let t = self.tau(sigma)?;
        let zero = vec![0; self.dim()];
        let g = self.green(&zero, t)?.value;
        if t == 1.0 && self.dim() <= 4 {
            return Ok(0.0);
        }
        let gp = self.derivative(&zero, t, 1)?.value;
        Ok(g * g / (g + t * gp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn srw(d: usize) -> FactorGreen {
        FactorGreen::new(LatticeMeasure::srw(d), GreenMode::Auto).unwrap()
    }

    #[test]
    fn z_closed_forms() {
        let z = srw(1);
        assert_relative_eq!(z.green(&[0], 0.5).unwrap().value, 1.0 / 0.75f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(z.derivative(&[0], 0.5, 1).unwrap().value, 0.5 * 0.75f64.powf(-1.5), max_relative = 1e-12);
        for &t in &[1e-6f64, 0.1, 0.9, 0.999, 0.999999] {
            let exact = 1.0 / (1.0 - t * t).sqrt();
            assert_relative_eq!(z.green(&[0], t).unwrap().value, exact, max_relative = 1e-11);
            let g2 = ((1.0 - (1.0 - t * t).sqrt()) / t).powi(2) * exact;
            assert_relative_eq!(z.green(&[2], t).unwrap().value, g2, max_relative = 1e-10);
        }
        assert_eq!(z.green(&[0], 0.0).unwrap().value, 1.0);
        assert_eq!(z.green(&[3], 0.0).unwrap().value, 0.0);
        assert!(matches!(z.green(&[0], 1.0), Err(Error::Divergent(_))));
        assert!(z.green(&[0], 1.5).is_err());
    }

    #[test]
    fn lattice_oracles_at_one() {
        let z3 = srw(3);
        assert_relative_eq!(z3.green(&[0, 0, 0], 1.0).unwrap().value, 1.516_386_059_151_978, max_relative = 1e-11);
        assert_relative_eq!(z3.green(&[1, 0, 0], 1.0).unwrap().value, 0.516_386_059_151_978, max_relative = 1e-10);
        assert_relative_eq!(z3.green(&[1, 1, 2], 0.9).unwrap().value, 0.026_166_081_133_391_65, max_relative = 1e-10);
        let z5 = srw(5);
        assert_relative_eq!(z5.green(&[0; 5], 1.0).unwrap().value, 1.156_308_124_840_231, max_relative = 1e-11);
        assert_relative_eq!(z5.derivative(&[0; 5], 1.0, 1).unwrap().value, 0.778_633_315_542_12, max_relative = 1e-10);
        assert_relative_eq!(
            z5.derivative(&[1, 0, 0, 0, 0], 1.0, 1).unwrap().value,
            0.622_325_190_701_888_8,
            max_relative = 1e-10
        );
        assert!(matches!(z5.derivative(&[0; 5], 1.0, 2), Err(Error::Divergent(_))));
        let z2 = srw(2);
        assert_relative_eq!(z2.green(&[1, 0], 0.99).unwrap().value, 1.148_361_879_910_208_5, max_relative = 1e-11);
    }

    #[test]
    fn continuity_at_one() {
        let z5 = srw(5);
        let a = z5.derivative(&[0; 5], 1.0, 1).unwrap().value;
        let b = z5.derivative(&[0; 5], 1.0 - 1e-10, 1).unwrap().value;
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }

    #[test]
    fn phi_psi_closed_forms() {
        let z = srw(1);
        let s3 = 3f64.sqrt();
        assert_relative_eq!(z.tau(s3).unwrap(), s3 / 2.0, max_relative = 1e-13);
        assert_relative_eq!(z.phi(s3).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(z.phi(0.75).unwrap(), 1.25, max_relative = 1e-12);
        assert_relative_eq!(z.psi(s3).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(z.phi(1e-9).unwrap(), 1.0, max_relative = 1e-8);
        assert_eq!(z.theta().unwrap(), f64::INFINITY);
        let z3 = srw(3);
        assert_eq!(z3.psi(z3.theta().unwrap()).unwrap(), 0.0);
        assert!(z3.phi(2.0).is_err());
    }

    #[test]
    fn quadrature_matches_laplace() {
        let m = LatticeMeasure::srw(3);
        let lap = FactorGreen::new(m.clone(), GreenMode::Laplace).unwrap();
        let quad = FactorGreen::new(m, GreenMode::Quadrature { nodes: 32 }).unwrap();
        for g in [[0, 0, 0], [1, 0, 0], [1, 1, 0]] {
            let a = lap.green(&g, 0.7).unwrap().value;
            let b = quad.green(&g, 0.7).unwrap().value;
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn watson_by_quadrature_refinement() {
        let m = LatticeMeasure::srw(3);
        let coarse = FactorGreen::new(m.clone(), GreenMode::Quadrature { nodes: 32 }).unwrap();
        let fine = FactorGreen::new(m, GreenMode::Quadrature { nodes: 64 }).unwrap();
        let a = coarse.green(&[0, 0, 0], 1.0).unwrap().value;
        let b = fine.green(&[0, 0, 0], 1.0).unwrap().value;
        assert!((b - 1.516_386_059).abs() < 5e-5, "fine {b}");
        assert!((a - b).abs() < 5e-4, "coarse {a} fine {b}");
    }

    #[test]
    fn series_agrees_below_one() {
        let m = LatticeMeasure::srw(2);
        let lap = FactorGreen::new(m.clone(), GreenMode::Laplace).unwrap();
        let ser = FactorGreen::new(m, GreenMode::Series { n_max: 200 }).unwrap();
        for g in [[0, 0], [1, 0], [2, 1]] {
            for t in [0.3, 0.6, 0.9] {
                let a = lap.derivative(&g, t, 1).unwrap();
                let b = ser.derivative(&g, t, 1).unwrap();
                assert!((a.value - b.value).abs() <= b.error + 1e-10, "{g:?} {t}: {a:?} {b:?}");
            }
        }
    }
}
