//! Green functions of axis-separable lattice walks as one-dimensional Laplace integrals.
//!
//! With `μ̂(k) = c0 + Σ_j ψ_j(k_j)` and `L^{(m)}(g,x) = (2π)^{-d}∫ cos(k·g) μ̂^m e^{x(μ̂−1)} dk`,
//!
//! `G^{(m)}(g|t) = t^{-m-1} ∫_0^∞ x^m e^{-x(1−t)/t} L^{(m)}(g,x) dx`.
//!
//! `L^{(m)}` factors over axes into one-dimensional kernels
//! `λ^{(q)}(n,x) = (1/2π)∫ cos(nk) ψ(k)^q e^{x(ψ(k)−ψ(0))} dk`, evaluated by the trapezoid rule
//! for moderate `x` and by a Gaussian moment expansion for large `x`.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;

use super::gauss::gauss_legendre;
use crate::error::{Error, Result};
use crate::measures::LatticeMeasure;
use crate::par;

/// Terms kept in the large-`x` expansion.
const ASYM_TERMS: usize = 7;
const PANEL_RATIO: f64 = 1.25;
const X_LO: f64 = 1e-7;
const X_HI: f64 = 1e18;
/// At `t = 1` nodes stop here and the analytic tail takes over.
const X_TAIL: f64 = 1e8;

/// One axis of a separable measure: atoms `(m, w)` with `m ≠ 0`, both signs listed.
#[derive(Clone, Debug, PartialEq)]
struct Axis {
    atoms: Vec<(i32, f64)>,
    sigma2: f64,
    mmax: i32,
}

impl Axis {
    fn psi(&self, k: f64) -> f64 {
        self.atoms.iter().map(|&(m, w)| w * (m as f64 * k).cos()).sum()
    }

    fn psi0(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum()
    }

    fn switch_point(&self, n: i64, q: usize) -> f64 {
        let spread = (n.unsigned_abs() as f64 + q as f64 * self.mmax as f64).max(1.0);
        (2000.0f64).max(200.0 * spread * spread) * (self.mmax as f64).powi(2) / self.sigma2
    }

    fn trapezoid_nodes(&self, n: i64, q: usize, x: f64) -> usize {
        let shift = n.unsigned_abs() as f64 + (q as i32 * self.mmax) as f64;
        let raw = shift + 32.0 * self.mmax as f64 + 10.0 * (x * self.sigma2).sqrt() + 16.0;
        (raw as usize).next_multiple_of(8).max(64)
    }

    fn lambda_trapezoid(&self, n: i64, q: usize, x: f64) -> f64 {
        let big_n = self.trapezoid_nodes(n, q, x);
        let psi0 = self.psi0();
        let h = std::f64::consts::TAU / big_n as f64;
        // the integrand is even in k: fold onto [0, π]
        let half = big_n / 2;
        let mut acc = 0.0;
        for j in 0..=half {
            let k = j as f64 * h;
            let p = self.psi(k);
            let f = (n as f64 * k).cos() * p.powi(q as i32) * (x * (p - psi0)).exp();
            acc += if j == 0 || j == half { f } else { 2.0 * f };
        }
        acc / big_n as f64
    }

    /// Coefficients `C_p` with `λ ≈ (2πxσ²)^{-1/2} Σ_p C_p x^{-p}`.
    fn asymptotic(&self, n: i64, q: usize) -> Vec<f64> {
        let deg = 2 * ASYM_TERMS;
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        // coefficients in K = k²
        let cos_n: Vec<f64> =
            (0..=deg).map(|b| (-1f64).powi(b as i32) * (n as f64).powi(2 * b as i32) / fact(2 * b)).collect();
        let psi: Vec<f64> = (0..=deg)
            .map(|b| {
                self.atoms.iter().map(|&(m, w)| w * (m as f64).powi(2 * b as i32)).sum::<f64>() * (-1f64).powi(b as i32)
                    / fact(2 * b)
            })
            .collect();
        let mul = |a: &[f64], b: &[f64]| {
            let mut c = vec![0.0; deg + 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate().take(deg + 1 - i) {
                    c[i + j] += x * y;
                }
            }
            c
        };
        let mut a_poly = cos_n;
        for _ in 0..q {
            a_poly = mul(&a_poly, &psi);
        }
        let mut r = psi.clone();
        r[0] = 0.0;
        r[1] += self.sigma2 / 2.0;
        let dfact = |b: usize| (1..=b).map(|i| (2 * i - 1) as f64).product::<f64>();
        let mut c = vec![0.0; ASYM_TERMS];
        let mut ra = vec![0.0; deg + 1];
        ra[0] = 1.0;
        for a in 0..ASYM_TERMS {
            let term = mul(&a_poly, &ra);
            for (p, cp) in c.iter_mut().enumerate().skip(a) {
                let b = a + p;
                if b <= deg {
                    *cp += term[b] / fact(a) * dfact(b) / self.sigma2.powi(b as i32);
                }
            }
            ra = mul(&ra, &r);
        }
        c
    }
}

fn series_value(c: &[f64], sigma2: f64, x: f64) -> f64 {
    let mut s = 0.0;
    let mut xp = 1.0;
    for &cp in c {
        s += cp * xp;
        xp /= x;
    }
    s / (std::f64::consts::TAU * x * sigma2).sqrt()
}

struct XGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Nodes below `x_tail`.
    tail_index: usize,
    x_tail: f64,
}

impl XGrid {
    fn new() -> Self {
        let (gx, gw) = gauss_legendre(16);
        let mut bounds = vec![0.0, X_LO];
        while *bounds.last().unwrap() < X_HI {
            let b = bounds.last().unwrap() * PANEL_RATIO;
            bounds.push(b);
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut x_tail = f64::NAN;
        let mut tail_index = 0;
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            if x_tail.is_nan() && a >= X_TAIL {
                x_tail = a;
                tail_index = nodes.len();
            }
            for (xi, wi) in gx.iter().zip(&gw) {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * xi);
                weights.push(0.5 * (b - a) * wi);
            }
        }
        Self { nodes, weights, tail_index, x_tail }
    }
}

type LambdaKey = (usize, i64, usize);

/// Laplace-route evaluator for one separable lattice measure.
pub struct Laplace {
    dim: usize,
    c0: f64,
    axes: Vec<Axis>,
    /// Axis → index of the first identical axis.
    class: Vec<usize>,
    grid: XGrid,
    lambdas: RwLock<FxHashMap<LambdaKey, Arc<Vec<f64>>>>,
    kernels: RwLock<FxHashMap<(Vec<i32>, usize), Arc<Vec<f64>>>>,
    tails: RwLock<FxHashMap<(Vec<i32>, usize), Arc<Vec<f64>>>>,
}

impl std::fmt::Debug for Laplace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Laplace").field("dim", &self.dim).field("c0", &self.c0).finish_non_exhaustive()
    }
}

impl Laplace {
    pub fn new(measure: &LatticeMeasure) -> Result<Self> {
        if !measure.is_axis_separable() {
            return Err(Error::InvalidInput("Laplace route needs atoms along coordinate axes".into()));
        }
        let dim = measure.rank();
        let mut per_axis: Vec<BTreeMap<i32, f64>> = vec![BTreeMap::new(); dim];
        let mut c0 = 0.0;
        for (v, w) in measure.atoms() {
            match v.iter().position(|&c| c != 0) {
                Some(j) => *per_axis[j].entry(v[j]).or_insert(0.0) += w,
                None => c0 += w,
            }
        }
        let axes: Vec<Axis> = per_axis
            .into_iter()
            .map(|atoms| {
                let atoms: Vec<(i32, f64)> = atoms.into_iter().collect();
                let sigma2 = atoms.iter().map(|&(m, w)| w * (m as f64).powi(2)).sum();
                let mmax = atoms.iter().map(|&(m, _)| m.abs()).max().unwrap_or(1);
                Axis { atoms, sigma2, mmax }
            })
            .collect();
        let class = (0..dim).map(|j| (0..=j).find(|&i| axes[i] == axes[j]).unwrap()).collect();
        Ok(Self {
            dim,
            c0,
            axes,
            class,
            grid: XGrid::new(),
            lambdas: RwLock::default(),
            kernels: RwLock::default(),
            tails: RwLock::default(),
        })
    }

    fn lambda(&self, axis: usize, n: i64, q: usize) -> Arc<Vec<f64>> {
        let key = (self.class[axis], n.abs(), q);
        if let Some(v) = self.lambdas.read().unwrap().get(&key) {
            return v.clone();
        }
        let ax = &self.axes[key.0];
        let switch = ax.switch_point(key.1, q);
        let coeffs = ax.asymptotic(key.1, q);
        let values = par::map(&self.grid.nodes, |&x| {
            if x < switch {
                ax.lambda_trapezoid(key.1, q, x)
            } else {
                series_value(&coeffs, ax.sigma2, x)
            }
        });
        let arc = Arc::new(values);
        self.lambdas.write().unwrap().insert(key, arc.clone());
        arc
    }

    /// Compositions `(q_0, q_1..q_d)` of `m` with their multinomial weights times `c0^{q_0}`.
    fn compositions(&self, m: usize) -> Vec<(f64, Vec<usize>)> {
        fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if slots == 1 {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for q in 0..=left {
                cur.push(q);
                rec(left - q, slots - 1, cur, out);
                cur.pop();
            }
        }
        let mut all = Vec::new();
        rec(m, self.dim + 1, &mut Vec::new(), &mut all);
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        all.into_iter()
            .filter_map(|qs| {
                let q0 = qs[0];
                if q0 > 0 && self.c0 == 0.0 {
                    return None;
                }
                let mult = fact(m) / qs.iter().map(|&q| fact(q)).product::<f64>();
                Some((mult * self.c0.powi(q0 as i32), qs[1..].to_vec()))
            })
            .collect()
    }

    fn kernel(&self, g: &[i32], m: usize) -> Arc<Vec<f64>> {
        let key = (g.to_vec(), m);
        if let Some(v) = self.kernels.read().unwrap().get(&key) {
            return v.clone();
        }
        let mut acc = vec![0.0; self.grid.nodes.len()];
        for (coef, qs) in self.compositions(m) {
            let mut prod = vec![coef; acc.len()];
            for (j, &q) in qs.iter().enumerate() {
                let lam = self.lambda(j, g[j] as i64, q);
                prod.iter_mut().zip(lam.iter()).for_each(|(p, l)| *p *= l);
            }
            acc.iter_mut().zip(&prod).for_each(|(a, p)| *a += p);
        }
        let arc = Arc::new(acc);
        self.kernels.write().unwrap().insert(key, arc.clone());
        arc
    }

    /// Coefficients `D_p` of `L^{(m)}(g,x) ≈ x^{-d/2} Σ_p D_p x^{-p}` for large `x`.
    fn tail_series(&self, g: &[i32], m: usize) -> Arc<Vec<f64>> {
        let key = (g.to_vec(), m);
        if let Some(v) = self.tails.read().unwrap().get(&key) {
            return v.clone();
        }
        let mut total = vec![0.0; ASYM_TERMS];
        for (coef, qs) in self.compositions(m) {
            let mut prod = vec![0.0; ASYM_TERMS];
            prod[0] = coef;
            for (j, &q) in qs.iter().enumerate() {
                let ax = &self.axes[self.class[j]];
                let c = ax.asymptotic(g[j] as i64, q);
                let scale = 1.0 / (std::f64::consts::TAU * ax.sigma2).sqrt();
                let mut next = vec![0.0; ASYM_TERMS];
                for (a, pa) in prod.iter().enumerate() {
                    for (b, cb) in c.iter().enumerate().take(ASYM_TERMS - a) {
                        next[a + b] += pa * cb * scale;
                    }
                }
                prod = next;
            }
            total.iter_mut().zip(&prod).for_each(|(t, p)| *t += p);
        }
        let arc = Arc::new(total);
        self.tails.write().unwrap().insert(key, arc.clone());
        arc
    }

    /// Largest `m` with `G^{(m)}(·|1)` finite, if any.
    pub fn max_finite_order_at_one(&self) -> Option<usize> {
        (0..=3).rev().find(|&m| 2 * (m + 1) < self.dim)
    }

    /// `G^{(m)}(g|t)` for `0 < t ≤ 1`, with an error estimate.
    pub fn derivative(&self, g: &[i32], t: f64, m: usize) -> Result<(f64, f64)> {
        let gap = 1.0 - t;
        let finite_at_one = 2 * (m + 1) < self.dim;
        if gap <= 1e-14 && finite_at_one {
            return Ok(self.at_one(g, m));
        }
        if gap <= 0.0 {
            return Err(Error::Divergent(format!(
                "G^({m}) at t=1 diverges in dimension {} (needs 2(m+1) < d)",
                self.dim
            )));
        }
        let l = self.kernel(g, m);
        let s = gap / t;
        let grid = &self.grid;
        let mut acc = 0.0;
        for ((x, w), li) in grid.nodes.iter().zip(&grid.weights).zip(l.iter()) {
            let e = x * s;
            if e > 745.0 {
                break;
            }
            acc += w * x.powi(m as i32) * (-e).exp() * li;
        }
        let value = acc / t.powi(m as i32 + 1);
        Ok((value, 1e-12 * value.abs() + 1e-300))
    }

    fn at_one(&self, g: &[i32], m: usize) -> (f64, f64) {
        let l = self.kernel(g, m);
        let grid = &self.grid;
        let mut acc = 0.0;
        for i in 0..grid.tail_index {
            acc += grid.weights[i] * grid.nodes[i].powi(m as i32) * l[i];
        }
        let d = self.tail_series(g, m);
        let half_d = self.dim as f64 / 2.0;
        let mut tail = 0.0;
        let mut last = 0.0;
        for (p, dp) in d.iter().enumerate() {
            let e = m as f64 - half_d - p as f64 + 1.0;
            last = dp * grid.x_tail.powf(e) / -e;
            tail += last;
        }
        let value = acc + tail;
        (value, last.abs() + 1e-12 * value.abs())
    }
}
