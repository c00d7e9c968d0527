//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisection on a sign change of `f` in `[lo, hi]` until the bracket is below `tol`.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootFinding(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton's method for an increasing `f` (value and slope) safeguarded by the bracket `[lo, hi]`.
///
/// Solves `f(x) = 0` assuming `f(lo) < 0 < f(hi)` (endpoints are not evaluated).
pub fn newton_increasing<F: FnMut(f64) -> Result<(f64, f64)>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut x = x0.clamp(lo, hi);
    if x <= lo || x >= hi {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let (v, dv) = f(x)?;
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if dv > 0.0 { x - v / dv } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= rel_tol * x.abs().max(1e-300) || hi - lo <= rel_tol * hi.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::RootFinding(format!("Newton did not converge; bracket [{lo:.17e}, {hi:.17e}]")))
}
