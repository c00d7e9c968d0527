//! Factorised Green functions `G(e,z) = Φ(u) Π_j G_{i_j}(s_j|ζ)/G_{i_j}(0|ζ)` at a fixed
//! point, carried as Taylor jets in `u` or in `r`.

use std::sync::RwLock;

use rustc_hash::FxHashMap;

use super::FreeProductWalk;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::jet::{Jet, MAX_ORDER};
use crate::par;

/// Variable of the jets held by a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    U,
    R,
}

pub struct Snapshot<'a> {
    walk: &'a FreeProductWalk,
    variable: Variable,
    order: usize,
    u: f64,
    r: f64,
    /// `ζ_i` as jets in `u`.
    zeta: Vec<Jet>,
    /// `G_i(0|ζ_i(u))` as jets in `u`.
    diag: Vec<Jet>,
    phi: Jet,
    /// `u` as a jet in `r`, for `Variable::R`.
    u_of_r: Option<Jet>,
    ratios: RwLock<FxHashMap<(usize, Vec<i32>), Jet>>,
}

impl<'a> Snapshot<'a> {
    pub(super) fn at_u(walk: &'a FreeProductWalk, u: f64, order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::InvalidInput(format!("jet order {order} exceeds {MAX_ORDER}")));
        }
        let theta = walk.compute_r()?.theta;
        if !(u >= 0.0) || u > theta * (1.0 + 1e-14) {
            return Err(Error::InvalidInput(format!("u = {u} outside [0, θ = {theta}]")));
        }
        let k = walk.num_factors();
        let mut zeta = Vec::with_capacity(k);
        let mut diag = Vec::with_capacity(k);
        for i in 0..k {
            let f = walk.factor(i);
            let sigma = walk.sigma(i, u);
            let z0 = f.tau(sigma)?;
            let zero = vec![0; f.dim()];
            let j = f.jet(&zero, z0, order)?;
            let zj = if order == 0 {
                Jet::constant(z0, 0)
            } else {
                // σ(t) = t G_i(0|t), reverted and composed with σ = α_i u
                let sigma_t = Jet::variable(z0, order) * j;
                let mut inner = Jet::constant(sigma, order);
                inner.c[1] = walk.alpha(i);
                sigma_t.revert(z0).compose(&inner)
            };
            diag.push(j.compose(&zj));
            zeta.push(zj);
        }
        let mut phi = Jet::constant(-(k as f64 - 1.0), order);
        for d in &diag {
            phi = phi + *d;
        }
        let r = u / phi.value();
        Ok(Self {
            walk,
            variable: Variable::U,
            order,
            u,
            r,
            zeta,
            diag,
            phi,
            u_of_r: None,
            ratios: RwLock::new(FxHashMap::default()),
        })
    }

    pub(super) fn at_r(walk: &'a FreeProductWalk, r: f64, order: usize) -> Result<Self> {
        let big_r = walk.radius()?;
        if order >= 1 && r >= big_r {
            return Err(Error::InvalidInput(format!("derivatives in r need r < R = {big_r}, got {r}")));
        }
        let u = walk.u_of_r(r)?;
        let mut snap = Self::at_u(walk, u, order)?;
        snap.variable = Variable::R;
        snap.r = r;
        if order >= 1 {
            let r_of_u = Jet::variable(u, order).div(&snap.phi);
            snap.u_of_r = Some(r_of_u.revert(u));
        } else {
            snap.u_of_r = Some(Jet::constant(u, 0));
        }
        Ok(snap)
    }

    pub fn walk(&self) -> &FreeProductWalk {
        self.walk
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `ζ_i` at the snapshot point.
    pub fn zeta(&self, i: usize) -> f64 {
        self.zeta[i].value()
    }

    fn in_variable(&self, j: Jet) -> Jet {
        match &self.u_of_r {
            Some(ur) => j.compose(ur),
            None => j,
        }
    }

    /// `G_i(v|ζ_i)/G_i(0|ζ_i)` as a jet in `u`.
    fn ratio(&self, factor: usize, v: &[i32]) -> Result<Jet> {
        let key = (factor, v.to_vec());
        if let Some(j) = self.ratios.read().unwrap().get(&key) {
            return Ok(*j);
        }
        let f = self.walk.factor(factor);
        let z = &self.zeta[factor];
        let jv = f.jet(v, z.value(), self.order)?.compose(z);
        let out = jv.div(&self.diag[factor]);
        self.ratios.write().unwrap().insert(key, out);
        Ok(out)
    }

    /// Jet of `G(e,z)` in `u`.
    fn green_from_identity_u(&self, z: &GroupElement) -> Result<Jet> {
        let mut g = self.phi;
        for s in z.syllables() {
            g = g * self.ratio(s.factor, &s.vector)?;
        }
        Ok(g)
    }

    /// `G(x,y) = G(e, x^{-1}y)` as a jet in the snapshot variable.
    pub fn green(&self, x: &GroupElement, y: &GroupElement) -> Result<Jet> {
        Ok(self.in_variable(self.green_from_identity_u(&x.left_divide(y))?))
    }

    pub fn green_value(&self, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        Ok(self.green(x, y)?.value())
    }

    /// `K(x,y) = G(x,y)/G(e,y)`.
    pub fn martin_kernel(&self, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        let e = GroupElement::identity();
        Ok(self.green_value(x, y)? / self.green_value(&e, y)?)
    }

    /// `F_k(x,y|r)`: `F_1 = d/dr(rG)`, `F_k = d/dr(r² F_{k−1})`, for `k ≤ order`.
    pub fn f_k(&self, k: usize, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        if self.variable != Variable::R {
            return Err(Error::InvalidInput("F_k needs a snapshot in r".into()));
        }
        if k == 0 || k > self.order {
            return Err(Error::InvalidInput(format!("F_{k} needs 1 ≤ k ≤ jet order {}", self.order)));
        }
        let g = self.green(x, y)?;
        let rv = Jet::variable(self.r, self.order);
        let mut f = (rv * g).derivative();
        for _ in 1..k {
            let rv = Jet::variable(self.r, f.order);
            f = (rv * rv * f).derivative();
        }
        Ok(f.value())
    }

    /// `∂^k_u G(x,y)` for a snapshot in `u`.
    pub fn u_derivative(&self, k: usize, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        if self.variable != Variable::U || k > self.order {
            return Err(Error::InvalidInput(format!("u-derivative {k} needs a u-snapshot of order ≥ {k}")));
        }
        Ok(self.green(x, y)?.derivative_value(k))
    }

    /// `Σ_{x_1..x_s ∈ B} G(x,x_1)G(x_1,x_2)···G(x_s,y)` over a finite set `B`.
    pub fn iterated_sum(&self, s: usize, x: &GroupElement, y: &GroupElement, ball: &[GroupElement]) -> Result<f64> {
        if s == 0 {
            return self.green_value(x, y);
        }
        // v(z) = Σ G(z, x_2)···G(x_s, y), built from the right
        let mut v: Vec<f64> = par::map(ball, |z| self.green_value(z, y)).into_iter().collect::<Result<_>>()?;
        for _ in 1..s {
            let prev = &v;
            v = par::map(ball, |z| -> Result<f64> {
                let mut acc = 0.0;
                for (w, pv) in ball.iter().zip(prev) {
                    acc += self.green_value(z, w)? * pv;
                }
                Ok(acc)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        }
        let left: Vec<f64> = par::map(ball, |z| self.green_value(x, z)).into_iter().collect::<Result<_>>()?;
        Ok(left.iter().zip(&v).map(|(a, b)| a * b).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::super::FreeProductWalk;
    use crate::group::{enumerate_ball, GroupElement, Metric};
    use approx::assert_relative_eq;

    fn el(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    #[test]
    fn free_group_green_is_geometric() {
        // G(e,z|R) = 3 · 3^{-|z|/2} on the 4-regular tree
        let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
        let snap = w.at(w.radius().unwrap(), 0).unwrap();
        let e = GroupElement::identity();
        for (z, n) in [("f1:(1)", 1), ("f1:(2)", 2), ("f1:(1).f2:(-1)", 2), ("f2:(3).f1:(-1).f2:(1)", 5)] {
            let g = snap.green_value(&e, &el(z)).unwrap();
            assert_relative_eq!(g, 3.0 * 3f64.powf(-(n as f64) / 2.0), max_relative = 1e-9);
        }
    }

    #[test]
    fn green_is_symmetric_and_invariant() {
        let w = FreeProductWalk::srw(&[3, 1], &[0.4, 0.6]).unwrap();
        let snap = w.at(0.9 * w.radius().unwrap(), 0).unwrap();
        let x = el("f1:(1,0,-1).f2:(2)");
        let y = el("f2:(-1).f1:(0,1,0)");
        let g = el("f1:(2,1,0).f2:(1)");
        let a = snap.green_value(&x, &y).unwrap();
        assert_relative_eq!(a, snap.green_value(&y, &x).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(a, snap.green_value(&g.multiply(&x), &g.multiply(&y)).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn r_jets_match_finite_differences() {
        let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
        let r = 0.8 * w.radius().unwrap();
        let e = GroupElement::identity();
        let y = el("f1:(1).f2:(1)");
        let snap = w.at(r, 2).unwrap();
        let jet = snap.green(&e, &y).unwrap();
        let h = 1e-4;
        let gp = w.at(r + h, 0).unwrap().green_value(&e, &y).unwrap();
        let gm = w.at(r - h, 0).unwrap().green_value(&e, &y).unwrap();
        assert_relative_eq!(jet.derivative_value(1), (gp - gm) / (2.0 * h), max_relative = 1e-6);
        assert_relative_eq!(jet.derivative_value(2), (gp - 2.0 * jet.value() + gm) / (h * h), max_relative = 1e-4);
    }

    #[test]
    fn first_iterated_sum_matches_f1() {
        let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap();
        let r = 0.5 * w.radius().unwrap();
        let e = GroupElement::identity();
        let snap = w.at(r, 1).unwrap();
        let ball = enumerate_ball(w.spec(), 9, Metric::Word, 1 << 20).unwrap();
        let sum = snap.iterated_sum(1, &e, &e, &ball).unwrap();
        assert_relative_eq!(sum, snap.f_k(1, &e, &e).unwrap(), max_relative = 1e-6);
    }
}
