//! Tensor midpoint quadrature of `(2π)^{-d}∫ cos(k·g) μ̂^m m!/(1−tμ̂)^{m+1} dk`.
//!
//! At `t = 1` the singular part near `k = 0` is removed with the model
//! `1/a + b/a² − (k·g)²/(2a)`, `a = ½kᵀΣk`, `b = Σ μ(v)(k·v)⁴/24`, damped by a radial
//! cutoff; the model's integral is added back in closed form.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measures::LatticeMeasure;
use crate::par;

pub struct TorusQuadrature {
    dim: usize,
    nodes_per_axis: usize,
    /// `μ̂` on the grid, row-major over axes.
    mu_hat: Vec<f64>,
    atoms: Vec<(Vec<i32>, f64)>,
    /// `Σ^{-1/2}` and `det Σ`.
    whiten: DMatrix<f64>,
    det_sigma: f64,
    /// Radius of the cutoff in whitened coordinates.
    rho_c: f64,
}

impl std::fmt::Debug for TorusQuadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusQuadrature").field("dim", &self.dim).field("nodes", &self.nodes_per_axis).finish()
    }
}

/// Area of the unit sphere in `R^d`.
fn sphere_area(d: usize) -> f64 {
    // S_{d-1} = 2π^{d/2}/Γ(d/2), with Γ at half-integers done by recursion
    let half = d as f64 / 2.0;
    let gamma_half = if d % 2 == 0 {
        (1..d / 2).map(|k| k as f64).product::<f64>()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut a = 0.5;
        while a < half - 1e-12 {
            g *= a;
            a += 1.0;
        }
        g
    };
    2.0 * std::f64::consts::PI.powf(half) / gamma_half
}

/// `(1 − s²)^4` on `s < 1`.
fn cutoff(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

/// `∫_0^{ρc} cutoff(ρ/ρc) ρ^p dρ`.
fn radial_moment(p: i32, rho_c: f64) -> f64 {
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    (0..=4)
        .map(|i| binom[i] * (-1f64).powi(i as i32) / (2.0 * i as f64 + p as f64 + 1.0))
        .sum::<f64>()
        * rho_c.powi(p + 1)
}

impl TorusQuadrature {
    pub fn new(measure: &LatticeMeasure, nodes_per_axis: usize) -> Result<Self> {
        let d = measure.rank();
        let total = nodes_per_axis
            .checked_pow(d as u32)
            .filter(|&n| n <= 200_000_000)
            .ok_or_else(|| Error::BudgetExceeded(format!("{nodes_per_axis}^{d} torus nodes")))?;
        let h = std::f64::consts::TAU / nodes_per_axis as f64;
        let axis: Vec<f64> = (0..nodes_per_axis).map(|j| -std::f64::consts::PI + (j as f64 + 0.5) * h).collect();
        let idx: Vec<usize> = (0..total).collect();
        let mu_hat = par::map(&idx, |&i| {
            let k = Self::point(&axis, d, i);
            measure.char_function(&k)
        });
        let cov = DMatrix::from_row_slice(d, d, &measure.covariance());
        let eig = cov.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.min();
        if !(lmin > 0.0) {
            return Err(Error::InvalidInput("degenerate covariance".into()));
        }
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eig.eigenvectors.transpose();
        Ok(Self {
            dim: d,
            nodes_per_axis,
            mu_hat,
            atoms: measure.atoms().to_vec(),
            whiten: inv_sqrt,
            det_sigma: cov.determinant(),
            rho_c: 0.9 * std::f64::consts::PI * lmin.sqrt(),
        })
    }

    fn point(axis: &[f64], d: usize, mut i: usize) -> Vec<f64> {
        let m = axis.len();
        let mut k = vec![0.0; d];
        for j in (0..d).rev() {
            k[j] = axis[i % m];
            i /= m;
        }
        k
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    fn axis(&self) -> Vec<f64> {
        let h = std::f64::consts::TAU / self.nodes_per_axis as f64;
        (0..self.nodes_per_axis).map(|j| -std::f64::consts::PI + (j as f64 + 0.5) * h).collect()
    }

    /// `G^{(m)}(g|t)` for `0 ≤ t < 1`, or `m = 0`, `t = 1`, `d ≥ 3`.
    pub fn derivative(&self, g: &[i32], t: f64, m: usize) -> Result<f64> {
        if t >= 1.0 {
            if m > 0 {
                return Err(Error::Refused("torus quadrature handles derivatives at t=1 only via the Laplace route".into()));
            }
            if self.dim <= 2 {
                return Err(Error::Divergent(format!("G(·|1) diverges in dimension {}", self.dim)));
            }
            return Ok(self.at_one(g));
        }
        let axis = self.axis();
        let d = self.dim;
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        let n = self.mu_hat.len();
        let sum = par::chunked_sum(n, |i| {
            let k = Self::point(&axis, d, i);
            let phase: f64 = k.iter().zip(g).map(|(a, &b)| a * b as f64).sum();
            let mh = self.mu_hat[i];
            phase.cos() * mh.powi(m as i32) / (1.0 - t * mh).powi(m as i32 + 1)
        });
        Ok(fact * sum / n as f64)
    }

    fn at_one(&self, g: &[i32]) -> f64 {
        let axis = self.axis();
        let d = self.dim;
        let n = self.mu_hat.len();
        let gw = &self.whiten * DVector::from_iterator(d, g.iter().map(|&c| c as f64));
        let sum = par::chunked_sum(n, |i| {
            let kv = Self::point(&axis, d, i);
            let phase: f64 = kv.iter().zip(g).map(|(a, &b)| a * b as f64).sum();
            let f = phase.cos() / (1.0 - self.mu_hat[i]);
            f - self.model(&kv, g)
        });
        let mean = sum / n as f64;
        // closed-form integral of the damped model, in whitened coordinates u = Σ^{1/2}k
        let s = sphere_area(d);
        let quartic: f64 = self
            .atoms
            .iter()
            .map(|(v, w)| {
                let wv = &self.whiten * DVector::from_iterator(d, v.iter().map(|&c| c as f64));
                w * wv.norm_squared().powi(2)
            })
            .sum::<f64>()
            / (2.0 * d as f64 * (d as f64 + 2.0));
        let rc = self.rho_c;
        let inv_a = 2.0 * radial_moment(d as i32 - 3, rc);
        let b_term = quartic * radial_moment(d as i32 - 1, rc);
        let g_term = gw.norm_squared() / d as f64 * radial_moment(d as i32 - 1, rc);
        let model_integral =
            s * (inv_a + b_term - g_term) / (std::f64::consts::TAU.powi(d as i32) * self.det_sigma.sqrt());
        mean + model_integral
    }

    fn model(&self, k: &[f64], g: &[i32]) -> f64 {
        // ρ² = kᵀΣk = 2a
        let mut a = 0.0;
        let mut b = 0.0;
        for (v, w) in &self.atoms {
            let kvv: f64 = v.iter().zip(k).map(|(&c, &x)| c as f64 * x).sum();
            a += w * kvv * kvv / 2.0;
            b += w * kvv.powi(4) / 24.0;
        }
        let rho = (2.0 * a).sqrt();
        let chi = cutoff(rho / self.rho_c);
        if chi == 0.0 {
            return 0.0;
        }
        let kg: f64 = k.iter().zip(g).map(|(x, &c)| x * c as f64).sum();
        chi * (1.0 / a + b / (a * a) - kg * kg / (2.0 * a))
    }
}
