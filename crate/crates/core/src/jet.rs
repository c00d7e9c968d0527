//! Truncated Taylor series `Σ_{k≤order} c_k h^k` with `order ≤ 3`.

use std::ops::{Add, Mul, Sub};

pub const MAX_ORDER: usize = 3;

/// `c[k] = f^{(k)}(x0)/k!`; coefficients above `order` are meaningless and kept at zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [f64; MAX_ORDER + 1],
    pub order: usize,
}

impl Jet {
    pub fn new(coeffs: &[f64]) -> Self {
        assert!(!coeffs.is_empty() && coeffs.len() <= MAX_ORDER + 1);
        let mut c = [0.0; MAX_ORDER + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Self { c, order: coeffs.len() - 1 }
    }

    pub fn constant(a: f64, order: usize) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = a;
        Self { c, order }
    }

    /// The identity map `x0 + h`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^{(k)}(x0)`.
    pub fn derivative_value(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative {k} beyond jet order {}", self.order);
        self.c[k] * (1..=k).product::<usize>() as f64
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut c = [0.0; MAX_ORDER + 1];
        c[..=order].copy_from_slice(&self.c[..=order]);
        Self { c, order }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add_const(&self, a: f64) -> Self {
        let mut out = *self;
        out.c[0] += a;
        out
    }

    pub fn div(&self, b: &Jet) -> Self {
        let order = self.order.min(b.order);
        let mut q = [0.0; MAX_ORDER + 1];
        for k in 0..=order {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= b.c[j] * q[k - j];
            }
            q[k] = s / b.c[0];
        }
        Self { c: q, order }
    }

    /// `self ∘ inner`, where `self` is expanded at `inner.value()`.
    pub fn compose(&self, inner: &Jet) -> Self {
        let order = self.order.min(inner.order);
        let mut delta = inner.truncate(order);
        delta.c[0] = 0.0;
        let mut out = Self::constant(self.c[0], order);
        let mut pow = Self::constant(1.0, order);
        for k in 1..=order {
            pow = pow * delta;
            out = out + pow.scale(self.c[k]);
        }
        out
    }

    /// Jet of the inverse function at `self.value()`, with constant term `x0`.
    pub fn revert(&self, x0: f64) -> Self {
        let a1 = self.c[1];
        assert!(self.order >= 1 && a1 != 0.0, "cannot revert a jet with zero slope");
        let (a2, a3) = (self.c[2], self.c[3]);
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = x0;
        c[1] = 1.0 / a1;
        if self.order >= 2 {
            c[2] = -a2 / a1.powi(3);
        }
        if self.order >= 3 {
            c[3] = (2.0 * a2 * a2 - a1 * a3) / a1.powi(5);
        }
        Self { c, order: self.order }
    }

    /// `d/dh`, one order lower.
    pub fn derivative(&self) -> Self {
        assert!(self.order >= 1);
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..self.order {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Self { c, order: self.order - 1 }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, b: Jet) -> Jet {
        let order = self.order.min(b.order);
        let mut c = [0.0; MAX_ORDER + 1];
        for k in 0..=order {
            c[k] = self.c[k] + b.c[k];
        }
        Jet { c, order }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, b: Jet) -> Jet {
        self + b.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, b: Jet) -> Jet {
        let order = self.order.min(b.order);
        let mut c = [0.0; MAX_ORDER + 1];
        for i in 0..=order {
            for j in 0..=order - i {
                c[i + j] += self.c[i] * b.c[j];
            }
        }
        Jet { c, order }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_jet(x: f64) -> Jet {
        let e = x.exp();
        Jet::new(&[e, e, e / 2.0, e / 6.0])
    }

    #[test]
    fn composition_matches_chain_rule() {
        // exp(sin x) at x = 0.3
        let x = 0.3f64;
        let s = Jet::new(&[x.sin(), x.cos(), -x.sin() / 2.0, -x.cos() / 6.0]);
        let f = exp_jet(x.sin()).compose(&s);
        let g = |t: f64| t.sin().exp();
        let h = 1e-3;
        assert_relative_eq!(f.value(), g(x), epsilon = 1e-15);
        assert_relative_eq!(f.derivative_value(1), (g(x + h) - g(x - h)) / (2.0 * h), epsilon = 1e-6);
        assert_relative_eq!(f.derivative_value(2), (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h), epsilon = 1e-5);
    }

    #[test]
    fn reversion_inverts() {
        let x = 0.7f64;
        let f = exp_jet(x);
        let inv = f.revert(x);
        // log y at y = e^x
        let y = x.exp();
        assert_relative_eq!(inv.c[1], 1.0 / y, epsilon = 1e-14);
        assert_relative_eq!(inv.c[2], -1.0 / (2.0 * y * y), epsilon = 1e-14);
        assert_relative_eq!(inv.c[3], 1.0 / (3.0 * y * y * y), epsilon = 1e-14);
        let id = f.compose(&inv);
        assert_relative_eq!(id.c[1], 1.0, epsilon = 1e-14);
        assert!(id.c[2].abs() < 1e-14 && id.c[3].abs() < 1e-14);
    }

    #[test]
    fn division_and_derivative() {
        let a = Jet::new(&[1.0, 2.0, 3.0, 4.0]);
        let b = Jet::new(&[2.0, -1.0, 0.5, 0.0]);
        let q = a.div(&b);
        let back = q * b;
        for k in 0..4 {
            assert_relative_eq!(back.c[k], a.c[k], epsilon = 1e-14);
        }
        let d = a.derivative();
        assert_eq!(d.order, 2);
        assert_eq!(&d.c[..3], &[2.0, 6.0, 12.0]);
    }

    #[test]
    fn orders_propagate() {
        let a = Jet::new(&[1.0, 1.0]);
        let b = Jet::new(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!((a * b).order, 1);
        assert_eq!(b.compose(&a).order, 1);
    }
}
