//! Ratio-limit and Martin kernels: two routes to `H`, harmonicity and cocycle checks,
//! `H/K_R` along rays, boundary metrics, radical scans and local-limit fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::{linear_least_squares, richardson};
use crate::group::{GroupElement, Syllable};
use crate::measures::{ConvolutionTable, ProductMeasure};
use crate::product_green::{FreeProductWalk, Snapshot, SpectralReport};

/// An eventually periodic normal form `head · period · period · ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySpec {
    head: GroupElement,
    period: Vec<Syllable>,
}

impl RaySpec {
    pub fn new(head: GroupElement, period: GroupElement) -> Result<Self> {
        let p = period.syllables();
        if p.is_empty() {
            return Err(Error::InvalidInput("ray period must be nonempty".into()));
        }
        if p.len() < 2 || p[0].factor == p[p.len() - 1].factor {
            return Err(Error::InvalidInput(format!("period {period} does not concatenate with itself")));
        }
        if let Some(last) = head.syllables().last() {
            if last.factor == p[0].factor {
                return Err(Error::InvalidInput(format!("head {head} merges with period {period}")));
            }
        }
        Ok(Self { head, period: p.to_vec() })
    }

    pub fn head(&self) -> &GroupElement {
        &self.head
    }

    /// The truncation with `depth` syllables beyond the head.
    pub fn point(&self, depth: usize) -> GroupElement {
        let mut syl = self.head.syllables().to_vec();
        syl.extend(self.period.iter().cycle().take(depth).cloned());
        GroupElement::from_syllables(syl)
    }
}

/// Approximants of a limit and their extrapolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub order: usize,
    pub error: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl KernelProfile {
    fn constant(abscissa: Vec<f64>, v: f64) -> Self {
        let values = vec![v; abscissa.len()];
        Self { abscissa, values, limit: v, order: 0, error: 0.0, notes: Vec::new() }
    }
}

/// `P^n(x,y)/P^n(e,y)` for `n` in `n_list`, extrapolated in `1/n`.
///
/// `n` may reach twice the table depth; longer paths are split at the table depth.
pub fn h_finite_n(x: &GroupElement, y: &GroupElement, table: &ConvolutionTable, n_list: &[usize], order: usize) -> Result<KernelProfile> {
    let target = x.left_divide(y);
    let top = n_list.iter().copied().max().unwrap_or(0);
    if n_list.contains(&0) || top > 2 * table.max_n() {
        return Err(Error::BudgetExceeded(format!("n_list {n_list:?} outside 1..={}", 2 * table.max_n())));
    }
    let den_series = table.series_extended(y, top)?;
    if x.is_identity() {
        let mut p = series_ratio_limit(&den_series, &den_series, n_list, order)?;
        let notes = std::mem::take(&mut p.notes);
        p = KernelProfile::constant(p.abscissa, 1.0);
        p.notes = notes;
        return Ok(p);
    }
    series_ratio_limit(&table.series_extended(&target, top)?, &den_series, n_list, order)
}

/// `num[n]/den[n]` over `n_list`, extrapolated in `1/n`; callers holding `P^n(e,·)` series reuse them here.
pub fn series_ratio_limit(num: &[f64], den: &[f64], n_list: &[usize], order: usize) -> Result<KernelProfile> {
    let mut notes = Vec::new();
    let (mut h, mut v, mut abscissa) = (Vec::new(), Vec::new(), Vec::new());
    for &n in n_list {
        let (Some(&a), Some(&b)) = (num.get(n), den.get(n)) else {
            return Err(Error::InvalidInput(format!("n = {n} beyond the supplied series")));
        };
        if b == 0.0 {
            notes.push(format!("n = {n} skipped: P^n(e,y) = 0"));
            continue;
        }
        abscissa.push(n as f64);
        h.push(1.0 / n as f64);
        v.push(a / b);
    }
    if v.is_empty() {
        return Err(Error::InvalidInput("every P^n(e,y) vanished on the requested n".into()));
    }
    let ex = richardson(&h, &v, order);
    Ok(KernelProfile { abscissa, values: v, limit: ex.limit, order: ex.order, error: ex.error, notes })
}

/// `H(x,y) = ∂_u G(x,y)/∂_u G(e,y)` at `u = θ`, the limit of `F_1` ratios for a
/// spectrally non-degenerate walk.
pub struct ExactRatioLimit<'a> {
    snap: Snapshot<'a>,
}

impl<'a> ExactRatioLimit<'a> {
    pub fn new(walk: &'a FreeProductWalk) -> Result<Self> {
        let rep = walk.spectral_report()?;
        if !rep.non_degenerate() {
            return Err(Error::Refused(
                "the u-derivative formula needs a spectrally non-degenerate walk; use the r-route with s from the spectral report".into(),
            ));
        }
        Ok(Self { snap: walk.at_u(rep.theta, 1)? })
    }

    pub fn h(&self, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        if x.is_identity() {
            return Ok(1.0);
        }
        let e = GroupElement::identity();
        Ok(self.snap.u_derivative(1, x, y)? / self.snap.u_derivative(1, &e, y)?)
    }
}

/// Extrapolation variable for the `r`-route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularVariable {
    /// `√(R−r)`: non-degenerate walks, or odd degeneracy rank.
    Sqrt,
    /// `1/log(1/(R−r))`: even degeneracy rank.
    InverseLog,
}

/// `H(x,y) = lim_{r→R} I^{(s)}(x,y|r)/I^{(s)}(e,y|r)`, evaluated through `F_s = s! r^{s−1} I^{(s)}`.
pub struct SumsRatioLimit<'a> {
    s: usize,
    big_r: f64,
    variable: SingularVariable,
    snaps: Vec<Snapshot<'a>>,
    order: usize,
}

/// Default relative gaps `(R − r)/R`.
pub const DEFAULT_GAPS: [f64; 5] = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

impl<'a> SumsRatioLimit<'a> {
    pub fn new(walk: &'a FreeProductWalk, report: &SpectralReport, s: usize, gaps: &[f64]) -> Result<Self> {
        if s < report.derivative_order {
            return Err(Error::Refused(format!(
                "s = {s} is below the derivative order {} of this walk: F_s ratios of order below it do not converge to an R^-1-harmonic kernel",
                report.derivative_order
            )));
        }
        if s > crate::jet::MAX_ORDER {
            return Err(Error::InvalidInput(format!("s = {s} exceeds the supported jet order")));
        }
        if gaps.len() < 2 || gaps.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
            return Err(Error::InvalidInput("gaps must be at least two values in (0,1)".into()));
        }
        let variable = match report.degeneracy_rank {
            Some(d) if d % 2 == 0 => SingularVariable::InverseLog,
            _ => SingularVariable::Sqrt,
        };
        let big_r = report.r;
        let snaps = gaps.iter().map(|g| walk.at(big_r * (1.0 - g), s)).collect::<Result<Vec<_>>>()?;
        let order = (gaps.len() - 1).min(3);
        Ok(Self { s, big_r, variable, snaps, order })
    }

    pub fn variable(&self) -> SingularVariable {
        self.variable
    }

    pub fn profile(&self, x: &GroupElement, y: &GroupElement) -> Result<KernelProfile> {
        let abscissa: Vec<f64> = self.snaps.iter().map(|s| s.r()).collect();
        if x.is_identity() {
            return Ok(KernelProfile::constant(abscissa, 1.0));
        }
        let e = GroupElement::identity();
        let mut values = Vec::with_capacity(self.snaps.len());
        for snap in &self.snaps {
            values.push(snap.f_k(self.s, x, y)? / snap.f_k(self.s, &e, y)?);
        }
        let h: Vec<f64> = abscissa
            .iter()
            .map(|r| {
                let gap = self.big_r - r;
                match self.variable {
                    SingularVariable::Sqrt => gap.sqrt(),
                    SingularVariable::InverseLog => 1.0 / (1.0 / gap).ln(),
                }
            })
            .collect();
        let ex = richardson(&h, &values, self.order);
        Ok(KernelProfile { abscissa, values, limit: ex.limit, order: ex.order, error: ex.error, notes: Vec::new() })
    }

    pub fn h(&self, x: &GroupElement, y: &GroupElement) -> Result<f64> {
        Ok(self.profile(x, y)?.limit)
    }
}

/// `|t·u(x) − Σ_z μ(x^{-1}z) u(z)|`.
pub fn harmonicity_residual<F>(u: F, x: &GroupElement, measure: &ProductMeasure, t: f64) -> Result<f64>
where
    F: Fn(&GroupElement) -> Result<f64>,
{
    let mut sum = 0.0;
    for (step, w) in measure.atoms() {
        sum += w * u(&x.multiply(step))?;
    }
    Ok((t * u(x)? - sum).abs())
}

/// `P^n(gh,z)/P^n(e,z)` against `[P^n(h,g^{-1}z)/P^n(e,g^{-1}z)]·[P^n(g,z)/P^n(e,z)]`, as a relative gap.
pub fn cocycle_defect(table: &ConvolutionTable, g: &GroupElement, h: &GroupElement, z: &GroupElement, n: usize) -> Result<Option<f64>> {
    let e = GroupElement::identity();
    let p = |a: &GroupElement, b: &GroupElement| table.transition(a, b, n);
    let gz = g.left_divide(z);
    let (d1, d2) = (p(&e, z)?, p(&e, &gz)?);
    if d1 == 0.0 || d2 == 0.0 {
        return Ok(None);
    }
    let lhs = p(&g.multiply(h), z)? / d1;
    let rhs = p(h, &gz)? / d2 * (p(g, z)? / d1);
    if lhs == 0.0 && rhs == 0.0 {
        return Ok(Some(0.0));
    }
    Ok(Some((lhs - rhs).abs() / lhs.abs().max(rhs.abs())))
}

/// `H(x,y_n)/K_R(x,y_n)` along a ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayProfile {
    pub depths: Vec<usize>,
    pub ratios: Vec<f64>,
    pub last_deviation: f64,
    pub max_deviation: f64,
    /// `|ratio − 1|` non-increasing in depth.
    pub monotone: bool,
}

pub fn hk_ratio_along_ray<H>(h: H, at_r: &Snapshot<'_>, x: &GroupElement, ray: &RaySpec, depths: &[usize]) -> Result<RayProfile>
where
    H: Fn(&GroupElement, &GroupElement) -> Result<f64>,
{
    let mut ratios = Vec::with_capacity(depths.len());
    for &n in depths {
        let y = ray.point(n);
        ratios.push(h(x, &y)? / at_r.martin_kernel(x, &y)?);
    }
    let dev: Vec<f64> = ratios.iter().map(|q| (q - 1.0).abs()).collect();
    Ok(RayProfile {
        depths: depths.to_vec(),
        last_deviation: *dev.last().unwrap_or(&0.0),
        max_deviation: dev.iter().cloned().fold(0.0, f64::max),
        monotone: dev.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15),
        ratios,
    })
}

/// Truncation set in length-lexicographic order with bounds `D_x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub points: Vec<GroupElement>,
    pub bounds: Vec<f64>,
}

impl MetricConfig {
    /// `D_x = 1.1 · max_{y ∈ calibration} kernel(x,y)`.
    pub fn calibrate<K>(mut points: Vec<GroupElement>, calibration: &[GroupElement], kernel: K) -> Result<Self>
    where
        K: Fn(&GroupElement, &GroupElement) -> Result<f64>,
    {
        points.sort();
        let mut bounds = Vec::with_capacity(points.len());
        for x in &points {
            let mut m: f64 = 0.0;
            for y in calibration {
                m = m.max(kernel(x, y)?.abs());
            }
            bounds.push(1.1 * m.max(f64::MIN_POSITIVE));
        }
        Ok(Self { points, bounds })
    }

    pub fn depth(&self) -> usize {
        self.points.len()
    }

    /// `Σ_{φ(x) > T} 2^{1−φ(x)} = 2^{1−T}`, bounding the omitted terms when kernels stay below `D_x`.
    pub fn tail_bound(&self) -> f64 {
        2f64.powi(1 - self.depth() as i32)
    }

    /// `Σ_x (|k(x,y) − k(x,y′)| + |1_y(x) − 1_{y′}(x)|) / (2^{φ(x)} D_x)`, `φ(x) = position + 1`.
    pub fn distance<K>(&self, y: &GroupElement, y2: &GroupElement, kernel: K) -> Result<f64>
    where
        K: Fn(&GroupElement, &GroupElement) -> Result<f64>,
    {
        if y == y2 {
            return Ok(0.0);
        }
        let mut d = 0.0;
        for (i, (x, bound)) in self.points.iter().zip(&self.bounds).enumerate() {
            let ind = ((x == y) as i32 - (x == y2) as i32).abs() as f64;
            let term = (kernel(x, y)? - kernel(x, y2)?).abs() + ind;
            d += term / (2f64.powi(i as i32 + 1) * bound);
        }
        Ok(d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadicalScan {
    pub ball_radius: usize,
    pub elements: Vec<GroupElement>,
    /// `max_x |H(x,g) − H(x,e)|` over the test set.
    pub deviations: Vec<f64>,
    pub tolerance: f64,
    pub candidates: Vec<GroupElement>,
    pub closed_under_inverse: bool,
}

pub fn radical_scan<H>(ball_radius: usize, elements: Vec<GroupElement>, tests: &[GroupElement], tol: f64, h: H) -> Result<RadicalScan>
where
    H: Fn(&GroupElement, &GroupElement) -> Result<f64>,
{
    let e = GroupElement::identity();
    let mut deviations = Vec::with_capacity(elements.len());
    for g in &elements {
        let mut dev: f64 = 0.0;
        if !g.is_identity() {
            for x in tests {
                dev = dev.max((h(x, g)? - h(x, &e)?).abs());
            }
        }
        deviations.push(dev);
    }
    let candidates: Vec<GroupElement> =
        elements.iter().zip(&deviations).filter(|(_, d)| **d < tol).map(|(g, _)| g.clone()).collect();
    let closed = candidates.iter().all(|g| {
        let gi = g.inverse();
        !elements.contains(&gi) || candidates.contains(&gi)
    });
    Ok(RadicalScan { ball_radius, elements, deviations, tolerance: tol, candidates, closed_under_inverse: closed })
}

/// Fit of `log(P^n R^n) = c − a log n + b/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LltFit {
    /// `a`, the estimate of `d/2`.
    pub exponent: f64,
    /// `e^c`.
    pub coefficient: f64,
    pub r_used: f64,
    pub rms_residual: f64,
    pub points: usize,
    pub corrected: bool,
}

/// `samples` are `(n, P^n(x,y))`; zero entries are skipped.
pub fn llt_fit(samples: &[(usize, f64)], r: f64, corrected: bool) -> Result<LltFit> {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|(n, p)| *n > 0 && *p > 0.0).map(|&(n, p)| (n as f64, p.ln() + n as f64 * r.ln())).collect();
    let need = if corrected { 4 } else { 3 };
    if pts.len() < need {
        return Err(Error::InvalidInput(format!("local-limit fit needs at least {need} nonzero samples")));
    }
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|(n, _)| if corrected { vec![1.0, -n.ln(), 1.0 / n] } else { vec![1.0, -n.ln()] })
        .collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let beta = linear_least_squares(&rows, &y).ok_or_else(|| Error::RootFinding("singular local-limit fit".into()))?;
    let rms = (rows
        .iter()
        .zip(&y)
        .map(|(row, yy)| {
            let f: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (f - yy).powi(2)
        })
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(LltFit { exponent: beta[1], coefficient: beta[0].exp(), r_used: r, rms_residual: rms, points: pts.len(), corrected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_ball, FreeProductSpec, Metric};
    use crate::measures::AdaptedMeasure;
    use approx::assert_relative_eq;

    fn el(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    fn f2() -> FreeProductWalk {
        FreeProductWalk::srw(&[1, 1], &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn ray_points_are_nested_normal_forms() {
        let ray = RaySpec::new(el("f1:(1)"), el("f2:(1).f1:(1)")).unwrap();
        for n in 0..6 {
            let (a, b) = (ray.point(n), ray.point(n + 1));
            assert_eq!(a.relative_length(), n + 1);
            assert_eq!(b.common_prefix_length(&a), a.relative_length());
        }
        assert!(RaySpec::new(GroupElement::identity(), el("f1:(1)")).is_err());
        assert!(RaySpec::new(el("f2:(1)"), el("f2:(1).f1:(1)")).is_err());
    }

    #[test]
    fn exact_and_sums_routes_agree_on_free_group() {
        let w = f2();
        let rep = w.spectral_report().unwrap();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let sums = SumsRatioLimit::new(&w, &rep, 1, &DEFAULT_GAPS).unwrap();
        for (x, y) in [("f1:(1)", "f1:(1).f2:(1)"), ("f2:(-1)", "f1:(2).f2:(1)"), ("f1:(1).f2:(1)", "f2:(1)")] {
            let (x, y) = (el(x), el(y));
            let p = sums.profile(&x, &y).unwrap();
            assert_relative_eq!(p.limit, exact.h(&x, &y).unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn closed_form_ray_ratio_on_free_group() {
        // H(a,y_n)/K_R(a,y_n) = (n+1)/(n+2) on the ray a b a b ...
        let w = f2();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let snap = w.at(w.radius().unwrap(), 0).unwrap();
        let ray = RaySpec::new(GroupElement::identity(), el("f1:(1).f2:(1)")).unwrap();
        let depths: Vec<usize> = (1..=8).collect();
        let prof = hk_ratio_along_ray(|x, y| exact.h(x, y), &snap, &el("f1:(1)"), &ray, &depths).unwrap();
        for (n, q) in depths.iter().zip(&prof.ratios) {
            assert_relative_eq!(*q, (*n as f64 + 1.0) / (*n as f64 + 2.0), max_relative = 1e-9);
        }
        assert!(prof.monotone);
    }

    #[test]
    fn h_is_harmonic_and_kernel_defect_at_pole() {
        let w = f2();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let mu = w.measure().lift();
        let big_r = w.radius().unwrap();
        let y = el("f1:(1).f2:(-1)");
        for x in ["e", "f1:(1)", "f2:(1)", "f1:(-2)"] {
            let res = harmonicity_residual(|z| exact.h(z, &y), &el(x), &mu, 1.0 / big_r).unwrap();
            assert!(res < 1e-9, "{x}: {res}");
        }
        let snap = w.at(0.7 * big_r, 0).unwrap();
        let res = harmonicity_residual(|z| snap.martin_kernel(z, &y), &y, &mu, 1.0 / (0.7 * big_r)).unwrap();
        assert!(res > 1e-3);
    }

    #[test]
    fn refusals() {
        let w = FreeProductWalk::srw(&[5, 1], &[0.6, 0.4]).unwrap();
        let rep = w.spectral_report().unwrap();
        assert!(matches!(SumsRatioLimit::new(&w, &rep, 1, &DEFAULT_GAPS), Err(Error::Refused(_))));
        assert!(matches!(ExactRatioLimit::new(&w), Err(Error::Refused(_))));
    }

    #[test]
    fn finite_n_kernel_on_lazy_free_group() {
        let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
        let mu = AdaptedMeasure::srw(&spec, vec![0.5, 0.5]).unwrap().lift().lazy(0.25).unwrap();
        let mut table = ConvolutionTable::new(mu, 1 << 22);
        table.extend_to(12).unwrap();
        let n: Vec<usize> = (4..=12).collect();
        let p = h_finite_n(&GroupElement::identity(), &el("f1:(1)"), &table, &n, 2).unwrap();
        assert!(p.values.iter().all(|&v| v == 1.0));
        let w = f2();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let (x, y) = (el("f1:(1)"), el("f1:(1).f2:(1)"));
        let p = h_finite_n(&x, &y, &table, &n, 2).unwrap();
        assert_relative_eq!(p.limit, exact.h(&x, &y).unwrap(), max_relative = 0.05);
    }

    #[test]
    fn cocycle_is_exact() {
        let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
        let mu = AdaptedMeasure::srw(&spec, vec![0.5, 0.5]).unwrap().lift().lazy(0.25).unwrap();
        let mut table = ConvolutionTable::new(mu, 1 << 20);
        table.extend_to(6).unwrap();
        let d = cocycle_defect(&table, &el("f1:(1)"), &el("f2:(-1)"), &el("f1:(1).f2:(1)"), 6).unwrap().unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn metric_axioms_and_separation() {
        let w = f2();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let h = |x: &GroupElement, y: &GroupElement| exact.h(x, y);
        let pts = enumerate_ball(w.spec(), 2, Metric::Word, 1000).unwrap();
        let cal = enumerate_ball(w.spec(), 4, Metric::Word, 10_000).unwrap();
        let cfg = MetricConfig::calibrate(pts, &cal, h).unwrap();
        let (a, b) = (el("f1:(1)"), el("f2:(1).f1:(1)"));
        assert_eq!(cfg.distance(&a, &a, h).unwrap(), 0.0);
        assert_relative_eq!(cfg.distance(&a, &b, h).unwrap(), cfg.distance(&b, &a, h).unwrap(), max_relative = 1e-12);
        assert!(cfg.distance(&a, &b, h).unwrap() > 0.0);
        let ray1 = RaySpec::new(GroupElement::identity(), el("f1:(1).f2:(1)")).unwrap();
        let ray2 = RaySpec::new(GroupElement::identity(), el("f2:(1).f1:(1)")).unwrap();
        let same = cfg.distance(&ray1.point(6), &ray1.point(7), h).unwrap();
        let other = cfg.distance(&ray1.point(6), &ray2.point(6), h).unwrap();
        assert!(same < other);
    }

    #[test]
    fn radical_of_free_group_is_trivial() {
        let w = f2();
        let exact = ExactRatioLimit::new(&w).unwrap();
        let ball = enumerate_ball(w.spec(), 2, Metric::Word, 1000).unwrap();
        let scan = radical_scan(2, ball.clone(), &ball, 1e-2, |x, y| exact.h(x, y)).unwrap();
        assert_eq!(scan.candidates, vec![GroupElement::identity()]);
        assert!(scan.deviations.iter().skip(1).all(|&d| d > 0.1));
        assert!(scan.closed_under_inverse);
    }

    #[test]
    fn llt_on_simple_walk() {
        let mut samples = Vec::new();
        for n in (2..=40).step_by(2) {
            let mut c = 1.0f64;
            for k in 0..n / 2 {
                c *= (n - k) as f64 / (k + 1) as f64;
            }
            samples.push((n, c / 2f64.powi(n as i32)));
        }
        let fit = llt_fit(&samples, 1.0, false).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.1, "{fit:?}");
    }
}
