//! Green calculus of adapted walks on free products: `Φ`, `Ψ`, the spectral radius `R`,
//! the curves `ζ_i`, factorised Green functions and the spectral classifier.

mod snapshot;
mod sums;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use snapshot::{Snapshot, Variable};
pub use sums::{direct_series_green, gerl_r_estimate, lazy_radius, DirectSeries, GerlEstimate};

use crate::error::{Error, Result};
use crate::factor_green::{FactorGreen, GreenMode};
use crate::group::FreeProductSpec;
use crate::measures::{AdaptedMeasure, LatticeMeasure};
use crate::roots;

/// `|ζ_i(R) − R_i| ≤ DEGENERACY_TOL · R_i` counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Sign tolerance for `Ψ(θ̄)` and `Ψ(θ)`.
pub const PSI_TOL: f64 = 1e-9;

/// Location of the singularity of `G(e,e|·)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootData {
    /// Spectral radius inverse `R`.
    pub r: f64,
    /// `θ = R·G(e,e|R)`.
    pub theta: f64,
    pub green_ee: f64,
    pub theta_bar: f64,
    /// `Ψ(θ̄)`, or its limit `−(k−1)` when `θ̄ = ∞`.
    pub psi_at_theta_bar: f64,
    /// `θ` is an interior root of `Ψ`.
    pub interior_root: bool,
}

/// A free-product walk with its factor evaluators.
pub struct FreeProductWalk {
    spec: FreeProductSpec,
    measure: AdaptedMeasure,
    factors: Vec<FactorGreen>,
    thetas: Vec<f64>,
    root: OnceLock<RootData>,
}

impl std::fmt::Debug for FreeProductWalk {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FreeProductWalk").field("spec", &self.spec).field("weights", &self.measure.weights()).finish()
    }
}

impl FreeProductWalk {
    pub fn new(spec: FreeProductSpec, measure: AdaptedMeasure, mode: GreenMode) -> Result<Self> {
        let factors = measure
            .factors()
            .iter()
            .map(|m| FactorGreen::new(m.clone(), mode))
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(spec, measure, factors)
    }

    /// Reuses evaluators, e.g. across a sweep of weights.
    pub fn from_factors(spec: FreeProductSpec, measure: AdaptedMeasure, factors: Vec<FactorGreen>) -> Result<Self> {
        if factors.len() != spec.num_factors() {
            return Err(Error::InvalidInput("one evaluator per factor is required".into()));
        }
        let thetas = factors.iter().map(|f| f.theta()).collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, measure, factors, thetas, root: OnceLock::new() })
    }

    /// Simple random walks on `Z^{r_1} * ... ` with weights `α`.
    pub fn srw(ranks: &[usize], weights: &[f64]) -> Result<Self> {
        let spec = FreeProductSpec::from_ranks(ranks)?;
        let measure = AdaptedMeasure::srw(&spec, weights.to_vec())?;
        Self::new(spec, measure, GreenMode::Auto)
    }

    pub fn spec(&self) -> &FreeProductSpec {
        &self.spec
    }

    pub fn measure(&self) -> &AdaptedMeasure {
        &self.measure
    }

    pub fn factor(&self, i: usize) -> &FactorGreen {
        &self.factors[i]
    }

    pub fn into_factors(self) -> Vec<FactorGreen> {
        self.factors
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.measure.weights()[i]
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// `θ_i = G_i(0|1)`.
    pub fn theta_factor(&self, i: usize) -> f64 {
        self.thetas[i]
    }

    /// `θ̄ = min_i θ_i/α_i`.
    pub fn theta_bar(&self) -> f64 {
        (0..self.num_factors()).map(|i| self.thetas[i] / self.alpha(i)).fold(f64::INFINITY, f64::min)
    }

    fn check_u(&self, u: f64) -> Result<()> {
        if !(u >= 0.0) || u > self.theta_bar() * (1.0 + 1e-13) {
            return Err(Error::InvalidInput(format!("u = {u} outside [0, θ̄ = {}]", self.theta_bar())));
        }
        Ok(())
    }

    /// `σ_i = α_i u`, clamped onto `θ_i` against rounding.
    fn sigma(&self, i: usize, u: f64) -> f64 {
        (self.alpha(i) * u).min(self.thetas[i])
    }

    /// `Φ(u) = Σ_i Φ_i(α_i u) − (k−1)`.
    pub fn phi(&self, u: f64) -> Result<f64> {
        self.check_u(u)?;
        let mut s = -(self.num_factors() as f64 - 1.0);
        for (i, f) in self.factors.iter().enumerate() {
            s += f.phi(self.sigma(i, u))?;
        }
        Ok(s)
    }

    /// `Ψ(u) = Σ_i Ψ_i(α_i u) − (k−1)`.
    pub fn psi(&self, u: f64) -> Result<f64> {
        self.check_u(u)?;
        let mut s = -(self.num_factors() as f64 - 1.0);
        for (i, f) in self.factors.iter().enumerate() {
            s += f.psi(self.sigma(i, u))?;
        }
        Ok(s)
    }

    /// `R`, `θ` and `G(e,e|R)`; cached.
    pub fn compute_r(&self) -> Result<&RootData> {
        if let Some(r) = self.root.get() {
            return Ok(r);
        }
        let data = self.locate_root()?;
        Ok(self.root.get_or_init(|| data))
    }

    fn locate_root(&self) -> Result<RootData> {
        let theta_bar = self.theta_bar();
        let (theta, psi_bar, interior) = if theta_bar.is_finite() {
            let psi_bar = self.psi(theta_bar)?;
            if psi_bar <= 0.0 {
                let th = roots::bisect(|u| self.psi(u), 0.0, theta_bar, 1e-15 * theta_bar)?;
                (th, psi_bar, true)
            } else {
                (theta_bar, psi_bar, false)
            }
        } else {
            let mut hi = 1.0;
            while self.psi(hi)? > 0.0 {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(Error::RootFinding("Ψ stays positive on [0, 1e12]".into()));
                }
            }
            let th = roots::bisect(|u| self.psi(u), 0.0, hi, 1e-15 * hi)?;
            (th, -(self.num_factors() as f64 - 1.0), true)
        };
        let green_ee = self.phi(theta)?;
        Ok(RootData { r: theta / green_ee, theta, green_ee, theta_bar, psi_at_theta_bar: psi_bar, interior_root: interior })
    }

    pub fn radius(&self) -> Result<f64> {
        Ok(self.compute_r()?.r)
    }

    /// `u(r) = r G(e,e|r)`, inverse of the increasing map `u ↦ u/Φ(u)` on `[0, θ]`.
    pub fn u_of_r(&self, r: f64) -> Result<f64> {
        let root = self.compute_r()?;
        if !(r >= 0.0) || r > root.r * (1.0 + 1e-14) {
            return Err(Error::InvalidInput(format!("r = {r} outside [0, R = {}]", root.r)));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        if r >= root.r {
            return Ok(root.theta);
        }
        let f = |u: f64| -> Result<(f64, f64)> {
            let phi = self.phi(u)?;
            let psi = self.psi(u)?;
            Ok((u / phi - r, psi / (phi * phi)))
        };
        // u ≥ r since Φ ≥ 1
        roots::newton_increasing(f, r, root.theta, 0.5 * (r + root.theta).min(r * 1.5), 1e-15)
    }

    /// `ζ_i(r)`: the root of `ζ G_i(0|ζ) = α_i r G(e,e|r)`.
    pub fn zeta(&self, i: usize, r: f64) -> Result<f64> {
        let u = self.u_of_r(r)?;
        self.factors[i].tau(self.sigma(i, u))
    }

    /// Values and `r`-jets of Green functions at `r`; `order ≥ 1` needs `r < R`.
    pub fn at(&self, r: f64, order: usize) -> Result<Snapshot<'_>> {
        Snapshot::at_r(self, r, order)
    }

    /// Jets in the variable `u = rG(e,e|r)` at `u`.
    pub fn at_u(&self, u: f64, order: usize) -> Result<Snapshot<'_>> {
        Snapshot::at_u(self, u, order)
    }

    pub fn spectral_report(&self) -> Result<SpectralReport> {
        let root = self.compute_r()?.clone();
        let k = self.num_factors();
        let mut zeta_at_r = Vec::with_capacity(k);
        let mut degenerate = Vec::with_capacity(k);
        let mut zeta_residual: f64 = 0.0;
        for i in 0..k {
            let z = self.factors[i].tau(self.sigma(i, root.theta))?;
            if z < 1.0 {
                let g = self.factors[i].green(&vec![0; self.factors[i].dim()], z)?.value;
                zeta_residual = zeta_residual.max((z * g - self.alpha(i) * root.theta).abs());
            }
            degenerate.push((z - 1.0).abs() <= DEGENERACY_TOL);
            zeta_at_r.push(z);
        }
        let any_degenerate = degenerate.iter().any(|&d| d);
        let psi_bar = root.psi_at_theta_bar;
        let non_degenerate_by_psi = psi_bar < -PSI_TOL;
        let mut status = Classification::Ok;
        if psi_bar.abs() <= PSI_TOL {
            status = Classification::Borderline;
        }
        if non_degenerate_by_psi == any_degenerate && status == Classification::Ok {
            status = Classification::Inconsistent;
        }
        let psi_at_theta = if root.interior_root { self.psi(root.theta)? } else { psi_bar };
        let convergent = psi_at_theta > PSI_TOL;
        let degeneracy_rank =
            (0..k).filter(|&i| degenerate[i]).map(|i| self.factors[i].dim()).min();
        let derivative_order = match degeneracy_rank {
            Some(d) if convergent => d.div_ceil(2) - 1,
            _ => 1,
        };
        let self_consistency = (root.green_ee - self.phi(root.r * root.green_ee)?).abs();
        Ok(SpectralReport {
            r: root.r,
            theta: root.theta,
            green_ee: root.green_ee,
            theta_bar: root.theta_bar,
            psi_at_theta_bar: psi_bar,
            zeta_at_r,
            r_factors: vec![1.0; k],
            degenerate,
            convergent,
            degeneracy_rank,
            derivative_order,
            status,
            diagnostics: ReportDiagnostics {
                degeneracy_tol: DEGENERACY_TOL,
                psi_tol: PSI_TOL,
                psi_at_theta,
                zeta_equation_residual: zeta_residual,
                phi_self_consistency: self_consistency,
                factor_modes: self.factors.iter().map(|f| f.mode_name().to_string()).collect(),
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Ok,
    /// `Ψ(θ̄)` within tolerance of zero.
    Borderline,
    /// The `Ψ(θ̄)` sign and the `ζ_i(R)` comparison disagree.
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub degeneracy_tol: f64,
    pub psi_tol: f64,
    pub psi_at_theta: f64,
    /// `max_i |ζ_i G_i(0|ζ_i) − α_i θ|` over non-degenerate factors.
    pub zeta_equation_residual: f64,
    /// `|G(e,e|R) − Φ(R G(e,e|R))|`.
    pub phi_self_consistency: f64,
    pub factor_modes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub r: f64,
    pub theta: f64,
    pub green_ee: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub theta_bar: f64,
    pub psi_at_theta_bar: f64,
    pub zeta_at_r: Vec<f64>,
    pub r_factors: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub convergent: bool,
    pub degeneracy_rank: Option<usize>,
    pub derivative_order: usize,
    pub status: Classification,
    pub diagnostics: ReportDiagnostics,
}

impl SpectralReport {
    pub fn non_degenerate(&self) -> bool {
        self.degenerate.iter().all(|d| !d)
    }
}

/// `Σ_k k · rank(Γ_k/Γ_{k+1})`.
pub fn homogeneous_dimension(ranks: &[(usize, usize)]) -> usize {
    ranks.iter().map(|(k, r)| k * r).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub alpha1: f64,
    pub psi_at_theta_bar: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub points: Vec<AlphaPoint>,
    /// `α₁` minimising `Ψ(θ̄)` on the grid.
    pub best_alpha1: f64,
    pub non_degenerate_achieved: bool,
    /// Adjacent grid values with a sign change of `Ψ(θ̄)`.
    pub sign_change: Option<(f64, f64)>,
}

/// Sweeps `α = (α₁, 1−α₁)` for a two-factor product and tracks `Ψ(θ̄)`.
pub fn tune_alpha(factors: &[LatticeMeasure], grid: &[f64], mode: GreenMode) -> Result<AlphaScan> {
    if factors.len() != 2 {
        return Err(Error::InvalidInput("weight tuning is implemented for two factors".into()));
    }
    let ranks: Vec<usize> = factors.iter().map(|m| m.rank()).collect();
    let spec = FreeProductSpec::from_ranks(&ranks)?;
    let mut evaluators = factors.iter().map(|m| FactorGreen::new(m.clone(), mode)).collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for &a in grid {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidInput(format!("α₁ = {a} must lie in (0,1)")));
        }
        let measure = AdaptedMeasure::new(&spec, vec![a, 1.0 - a], factors.to_vec())?;
        let walk = FreeProductWalk::from_factors(spec.clone(), measure, evaluators)?;
        let tb = walk.theta_bar();
        let psi = if tb.is_finite() { walk.psi(tb)? } else { -1.0 };
        points.push(AlphaPoint { alpha1: a, psi_at_theta_bar: psi });
        evaluators = walk.into_factors();
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("empty α grid".into()));
    }
    let best = points.iter().min_by(|a, b| a.psi_at_theta_bar.total_cmp(&b.psi_at_theta_bar)).unwrap();
    let sign_change = points
        .windows(2)
        .find(|w| (w[0].psi_at_theta_bar < 0.0) != (w[1].psi_at_theta_bar < 0.0))
        .map(|w| (w[0].alpha1, w[1].alpha1));
    Ok(AlphaScan {
        best_alpha1: best.alpha1,
        non_degenerate_achieved: best.psi_at_theta_bar < -PSI_TOL,
        sign_change,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn f2() -> FreeProductWalk {
        FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn free_group_closed_forms() {
        let w = f2();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(w.psi(2.0 * s3).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.phi(2.0 * s3).unwrap(), 3.0, max_relative = 1e-12);
        let root = w.compute_r().unwrap();
        assert_relative_eq!(root.r, 2.0 / s3, max_relative = 1e-12);
        assert_relative_eq!(root.green_ee, 3.0, max_relative = 1e-10);
        assert_relative_eq!(root.theta, 2.0 * s3, max_relative = 1e-10);
        assert_relative_eq!(w.zeta(0, root.r).unwrap(), s3 / 2.0, max_relative = 1e-10);
        // G(e,e|1) = 3/2 on the 4-regular tree
        assert_relative_eq!(w.phi(w.u_of_r(1.0).unwrap()).unwrap(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn classifier_on_free_group() {
        let rep = f2().spectral_report().unwrap();
        assert!(rep.non_degenerate());
        assert_eq!(rep.derivative_order, 1);
        assert_eq!(rep.status, Classification::Ok);
        assert!(rep.theta_bar.is_infinite());
    }

    #[test]
    fn z5_z_two_regimes() {
        let small = FreeProductWalk::srw(&[5, 1], &[0.1, 0.9]).unwrap().spectral_report().unwrap();
        assert!(small.non_degenerate());
        assert_eq!(small.status, Classification::Ok);
        let large = FreeProductWalk::srw(&[5, 1], &[0.6, 0.4]).unwrap().spectral_report().unwrap();
        assert_eq!(large.degenerate, vec![true, false]);
        assert!(large.convergent);
        assert_eq!(large.degeneracy_rank, Some(5));
        assert_eq!(large.derivative_order, 2);
        assert_eq!(large.status, Classification::Ok);
    }

    #[test]
    fn homogeneous_dimensions() {
        assert_eq!(homogeneous_dimension(&[(1, 3)]), 3);
        assert_eq!(homogeneous_dimension(&[(1, 2), (2, 1)]), 4);
        assert_eq!(homogeneous_dimension(&[(1, 3), (2, 1)]), 5);
    }

    #[test]
    fn phi_self_consistency_on_grid() {
        let w = FreeProductWalk::srw(&[3, 1], &[0.5, 0.5]).unwrap();
        let big_r = w.radius().unwrap();
        for f in [0.2, 0.5, 0.9, 0.999, 1.0] {
            let r = f * big_r;
            let u = w.u_of_r(r).unwrap();
            let g = w.phi(u).unwrap();
            assert_relative_eq!(g, w.phi(r * g).unwrap(), max_relative = 1e-8);
        }
    }
}
