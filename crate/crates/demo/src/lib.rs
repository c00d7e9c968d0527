//! Browser bindings: a Ψ(θ̄) weight sweep, Green function curves and H/K_R along a ray.
//!
//! Each export wraps a plain function so the numerics can be tested natively.

use fpwalk::boundary_lab::{hk_ratio_along_ray, ExactRatioLimit, RaySpec, SumsRatioLimit, DEFAULT_GAPS};
use fpwalk::factor_green::GreenMode;
use fpwalk::group::GroupElement;
use fpwalk::measures::LatticeMeasure;
use fpwalk::product_green::{tune_alpha, FreeProductWalk};
use wasm_bindgen::prelude::*;

fn ranks(r: &[u32]) -> Vec<usize> {
    r.iter().map(|&x| x as usize).collect()
}

fn element(s: &str) -> fpwalk::Result<GroupElement> {
    let s = s.trim();
    if s.is_empty() || s == "e" {
        Ok(GroupElement::identity())
    } else {
        s.parse()
    }
}

/// `Ψ(θ̄)` for weights `(α₁, 1−α₁)` on two simple-walk factors, one value per entry of `alphas`.
pub fn psi_sweep(rank_a: usize, rank_b: usize, alphas: &[f64]) -> fpwalk::Result<Vec<f64>> {
    let factors = [LatticeMeasure::srw(rank_a), LatticeMeasure::srw(rank_b)];
    let scan = tune_alpha(&factors, alphas, GreenMode::Auto)?;
    Ok(scan.points.iter().map(|p| p.psi_at_theta_bar).collect())
}

/// `G(e,y|r)` at `r = f·R` for each `f` in `fractions`; the radius `R` is appended last.
pub fn green_curve(ranks: &[usize], weights: &[f64], y: &str, fractions: &[f64]) -> fpwalk::Result<Vec<f64>> {
    let w = FreeProductWalk::srw(ranks, weights)?;
    let big_r = w.radius()?;
    let y = element(y)?;
    let e = GroupElement::identity();
    let mut out = fractions.iter().map(|f| w.at(f * big_r, 0)?.green_value(&e, &y)).collect::<fpwalk::Result<Vec<_>>>()?;
    out.push(big_r);
    Ok(out)
}

/// `H(x,y_n)/K_R(x,y_n)` at depths `1..=max_depth` of the ray `head·period^n`.
pub fn ray_ratios(ranks: &[usize], weights: &[f64], head: &str, period: &str, x: &str, max_depth: usize) -> fpwalk::Result<Vec<f64>> {
    let w = FreeProductWalk::srw(ranks, weights)?;
    let rep = w.spectral_report()?;
    let snap = w.at(rep.r, 0)?;
    let ray = RaySpec::new(element(head)?, element(period)?)?;
    let x = element(x)?;
    let depths: Vec<usize> = (1..=max_depth).collect();
    let prof = if rep.non_degenerate() {
        let k = ExactRatioLimit::new(&w)?;
        hk_ratio_along_ray(|a: &GroupElement, b: &GroupElement| k.h(a, b), &snap, &x, &ray, &depths)?
    } else {
        let k = SumsRatioLimit::new(&w, &rep, rep.derivative_order, &DEFAULT_GAPS)?;
        hk_ratio_along_ray(|a: &GroupElement, b: &GroupElement| k.h(a, b), &snap, &x, &ray, &depths)?
    };
    Ok(prof.ratios)
}

fn js<T>(r: fpwalk::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = psiSweep)]
pub fn psi_sweep_js(rank_a: u32, rank_b: u32, alphas: &[f64]) -> Result<Vec<f64>, JsError> {
    js(psi_sweep(rank_a as usize, rank_b as usize, alphas))
}

#[wasm_bindgen(js_name = greenCurve)]
pub fn green_curve_js(ranks_: &[u32], weights: &[f64], y: &str, fractions: &[f64]) -> Result<Vec<f64>, JsError> {
    js(green_curve(&ranks(ranks_), weights, y, fractions))
}

#[wasm_bindgen(js_name = rayRatios)]
pub fn ray_ratios_js(ranks_: &[u32], weights: &[f64], head: &str, period: &str, x: &str, max_depth: u32) -> Result<Vec<f64>, JsError> {
    js(ray_ratios(&ranks(ranks_), weights, head, period, x, max_depth as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_changes_sign_on_z5z() {
        let psi = psi_sweep(5, 1, &[0.1, 0.9]).unwrap();
        assert!(psi[0] < 0.0 && psi[1] > 0.0, "{psi:?}");
    }

    #[test]
    fn green_curve_hits_the_free_group_values() {
        let v = green_curve(&[1, 1], &[0.5, 0.5], "e", &[1.0]).unwrap();
        assert!((v[0] - 3.0).abs() < 1e-9 && (v[1] - 2.0 / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn ray_ratios_are_finite() {
        let q = ray_ratios(&[1, 1], &[0.5, 0.5], "f1:(1)", "f2:(1).f1:(1)", "f2:(1)", 4).unwrap();
        assert_eq!(q.len(), 4);
        assert!(q.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!(element("bogus").is_err());
    }
}
