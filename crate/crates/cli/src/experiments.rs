//! One function per verb; each returns a JSON report, tables and cross-checks.

use std::time::Instant;

use fpwalk::ancona::{sample_triples, strong_ancona_fit, weak_ancona_scan};
use fpwalk::boundary_lab::{
    h_finite_n, hk_ratio_along_ray, llt_fit, radical_scan, ExactRatioLimit, RaySpec, SumsRatioLimit, DEFAULT_GAPS,
};
use fpwalk::factor_green::{FactorGreen, GreenMode};
use fpwalk::group::{enumerate_ball, GroupElement, Metric};
use fpwalk::measures::{LatticeMeasure, ProductMeasure};
use fpwalk::product_green::{
    direct_series_green, lazy_radius, tune_alpha, Classification, FreeProductWalk, SpectralReport, PSI_TOL,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::config::ExperimentConfig;
use crate::table::{col, Cell, ResultTable};
use crate::RunError;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Default)]
pub struct Outcome {
    pub report: Value,
    pub tables: Vec<ResultTable>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub cache: &'a mut Cache,
    pub stages: Vec<StageTiming>,
}

impl Context<'_> {
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, RunError>) -> Result<T, RunError> {
        let t0 = Instant::now();
        let out = f(self);
        self.stages.push(StageTiming { name: name.into(), seconds: t0.elapsed().as_secs_f64() });
        out
    }

    fn walk(&mut self) -> Result<FreeProductWalk, RunError> {
        let c = self.config;
        self.stage("build walk", |_| Ok(FreeProductWalk::new(c.spec()?, c.adapted_measure()?, c.green_mode())?))
    }

    fn ball(&self, radius: usize) -> Result<Vec<GroupElement>, RunError> {
        Ok(enumerate_ball(&self.config.spec()?, radius, Metric::Word, self.config.budgets.element_cap)?)
    }

    fn table(&mut self, base: &ProductMeasure, depth: usize) -> Result<fpwalk::measures::ConvolutionTable, RunError> {
        let cap = self.config.budgets.element_cap;
        self.stage("convolution table", |ctx| ctx.cache.table(base, depth, cap).map_err(RunError::from))
    }
}

fn text(g: &GroupElement) -> Cell {
    Cell::Text(g.to_string())
}

fn strings(gs: &[GroupElement]) -> Vec<String> {
    gs.iter().map(|g| g.to_string()).collect()
}

/// `H` by the cut-point formula when the walk is non-degenerate, by the derivative-sums limit otherwise.
pub enum Kernel<'a> {
    Exact(ExactRatioLimit<'a>),
    Sums(SumsRatioLimit<'a>),
}

impl<'a> Kernel<'a> {
    pub fn for_walk(walk: &'a FreeProductWalk, report: &SpectralReport) -> fpwalk::Result<Self> {
        if report.non_degenerate() {
            Ok(Kernel::Exact(ExactRatioLimit::new(walk)?))
        } else {
            Ok(Kernel::Sums(SumsRatioLimit::new(walk, report, report.derivative_order, &DEFAULT_GAPS)?))
        }
    }

    pub fn route(&self) -> &'static str {
        match self {
            Kernel::Exact(_) => "exact",
            Kernel::Sums(_) => "sums",
        }
    }

    pub fn h(&self, x: &GroupElement, y: &GroupElement) -> fpwalk::Result<f64> {
        match self {
            Kernel::Exact(k) => k.h(x, y),
            Kernel::Sums(k) => k.h(x, y),
        }
    }
}

pub fn validate(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let spec = c.spec()?;
    let mut mu = c.adapted_measure()?.lift();
    if c.measure.laziness > 0.0 {
        mu = mu.lazy(c.measure.laziness)?;
    }
    let v = ctx.stage("validate measure", |_| Ok(mu.validate(&spec)))?;
    Ok(Outcome {
        report: json!({
            "ranks": c.group.ranks,
            "weights": c.measure.weights,
            "laziness": c.measure.laziness,
            "atoms": mu.atoms().len(),
            "green_mode": c.green_mode(),
            "validation": v,
        }),
        ..Default::default()
    })
}

pub fn spectral_report(ctx: &mut Context) -> Result<Outcome, RunError> {
    let walk = ctx.walk()?;
    let rep = ctx.stage("spectral report", |_| Ok(walk.spectral_report()?))?;
    let checks = vec![
        Check { name: "classifier consistency".into(), value: f64::from(u8::from(rep.status == Classification::Inconsistent)), tolerance: 0.0, passed: rep.status != Classification::Inconsistent },
        Check::at_most("phi self-consistency at R", rep.diagnostics.phi_self_consistency, 1e-8),
        Check::at_most("zeta equation residual", rep.diagnostics.zeta_equation_residual, 1e-8),
    ];
    let mut notes = Vec::new();
    if rep.status == Classification::Borderline {
        notes.push("Ψ(θ̄) is within tolerance of zero; the classification is borderline".into());
    }
    Ok(Outcome { report: json!({ "ranks": ctx.config.group.ranks, "weights": ctx.config.measure.weights, "report": rep }), checks, notes, ..Default::default() })
}

pub fn green_table(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let p = &c.params.green_table;
    let walk = ctx.walk()?;
    let big_r = walk.radius()?;
    let fracs = p.r_fractions.clone().unwrap_or_else(|| c.budgets.r_grid.clone());
    let ys: Vec<GroupElement> = ctx.ball(p.ball_radius.unwrap_or(c.budgets.ball_radius))?.into_iter().step_by(p.stride).collect();
    let depth = c.budgets.n_max;
    let terms = p.series_terms.unwrap_or(2 * depth);
    if terms > 2 * depth {
        return Err(RunError::Config(format!("params.green_table.series_terms = {terms} exceeds twice budgets.n_max = {depth}")));
    }
    let coeffs: Option<Vec<Vec<f64>>> = if p.cross_check {
        let table = ctx.table(&walk.measure().lift(), depth)?;
        Some(ctx.stage("series coefficients", |_| {
            ys.par_iter().map(|y| table.series_extended(y, terms)).collect::<fpwalk::Result<Vec<_>>>().map_err(RunError::from)
        })?)
    } else {
        None
    };
    let e = GroupElement::identity();
    let mut t = ResultTable::new(
        "green-table",
        "green-table",
        "G(e,y|r) from the factorised formula, against the truncated series Σ P^n(e,y) r^n with a geometric tail bound",
        vec![
            col("y", "", "enumerate_ball (word metric)"),
            col("word_length", "generators", "GroupElement::word_length"),
            col("r_over_R", "1", "grid"),
            col("r", "1", "grid times compute_r"),
            col("green", "1", "Snapshot::green_value"),
            col("series_partial", "1", "direct_series_green over ConvolutionTable::series_extended"),
            col("tail_bound", "1", "direct_series_green"),
            col("bracketed", "", "DirectSeries::brackets at the cross-check tolerance"),
            col("rel_excess", "1", "distance of green outside the bracket, relative"),
        ],
        ys.len() * fracs.len(),
    );
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    ctx.stage("green values", |_| {
        for &f in &fracs {
            let r = f * big_r;
            let snap = walk.at(r, 0)?;
            for (i, y) in ys.iter().enumerate() {
                let g = snap.green_value(&e, y)?;
                let (partial, tail, ok, excess) = match &coeffs {
                    Some(cs) => {
                        let s = direct_series_green(&cs[i], r)?;
                        let ok = s.brackets(g, p.tolerance);
                        let lo = s.partial;
                        let hi = s.partial + s.tail_bound;
                        let excess = if g < lo { (lo - g) / g } else if g > hi { (g - hi) / g } else { 0.0 };
                        (Some(s.partial), Some(s.tail_bound), Cell::Flag(ok), Some(excess))
                    }
                    None => (None, None, Cell::Missing, None),
                };
                if let Some(x) = excess {
                    worst = worst.max(x);
                }
                if ok == Cell::Flag(false) {
                    failures += 1;
                }
                t.push(vec![text(y), (y.word_length() as usize).into(), f.into(), r.into(), g.into(), partial.into(), tail.into(), ok, excess.into()]);
            }
        }
        Ok(())
    })?;
    let mut checks = Vec::new();
    if p.cross_check {
        checks.push(Check { name: "series bracket".into(), value: worst, tolerance: p.tolerance, passed: failures == 0 });
    }
    Ok(Outcome {
        report: json!({
            "R": big_r,
            "points": ys.len(),
            "r_fractions": fracs,
            "series_terms": if p.cross_check { Some(terms) } else { None },
            "bracket_failures": failures,
            "max_rel_excess": worst,
        }),
        tables: vec![t],
        checks,
        notes: Vec::new(),
    })
}

fn default_pairs(ctx: &Context) -> Result<Vec<(GroupElement, GroupElement)>, RunError> {
    let spec = ctx.config.spec()?;
    let ys: Vec<GroupElement> = ctx.ball(2)?.into_iter().filter(|g| g.relative_length() == 2).take(5).collect();
    let xs: Vec<GroupElement> = spec.generators().into_iter().take(2).collect();
    Ok(xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect())
}

pub fn ratio_limit(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let p = &c.params.ratio_limit;
    let walk = ctx.walk()?;
    let rep = walk.spectral_report()?;
    let pairs = if p.pairs.is_empty() {
        default_pairs(ctx)?
    } else {
        p.pairs.iter().map(|(x, y)| Ok((x.parse()?, y.parse()?))).collect::<fpwalk::Result<Vec<_>>>()?
    };
    let mut notes = Vec::new();
    let exact = ExactRatioLimit::new(&walk).map_err(|e| notes.push(format!("exact route unavailable: {e}"))).ok();
    let sums = SumsRatioLimit::new(&walk, &rep, rep.derivative_order, &DEFAULT_GAPS)
        .map_err(|e| notes.push(format!("sums route unavailable: {e}")))
        .ok();
    let eps = if c.measure.laziness > 0.0 { c.measure.laziness } else { p.finite_n_laziness };
    let base = if eps > 0.0 { walk.measure().lift().lazy(eps)? } else { walk.measure().lift() };
    let depth = c.budgets.n_max;
    let top = p.finite_n_max.unwrap_or(2 * depth);
    if top > 2 * depth || top < p.finite_n_points {
        return Err(RunError::Config(format!("params.ratio_limit.finite_n_max = {top} must lie in [finite_n_points, 2·budgets.n_max]")));
    }
    let table = ctx.table(&base, depth)?;
    let n_list: Vec<usize> = (top + 1 - p.finite_n_points..=top).collect();
    let mut t = ResultTable::new(
        "ratio-limit",
        "ratio-limit",
        format!("H(x,y) by up to three routes; finite-n uses laziness {eps} and n in {n_list:?}"),
        vec![
            col("x", "", "config"),
            col("y", "", "config"),
            col("h_exact", "1", "ExactRatioLimit::h"),
            col("h_sums", "1", "SumsRatioLimit::h"),
            col("h_finite_n", "1", "h_finite_n (Richardson in 1/n)"),
            col("finite_n_error", "1", "h_finite_n error estimate"),
            col("max_rel_delta", "1", "largest pairwise relative difference between routes"),
        ],
        pairs.len(),
    );
    let mut worst: f64 = 0.0;
    let mut routes_compared = 0usize;
    ctx.stage("ratio limits", |_| {
        for (x, y) in &pairs {
            let he = exact.as_ref().map(|k| k.h(x, y)).transpose()?;
            let hs = sums.as_ref().map(|k| k.h(x, y)).transpose()?;
            let hf = h_finite_n(x, y, &table, &n_list, p.extrapolation_order)?;
            let vals: Vec<f64> = [he, hs, Some(hf.limit)].into_iter().flatten().collect();
            routes_compared = routes_compared.max(vals.len());
            let mut delta: f64 = 0.0;
            for (i, a) in vals.iter().enumerate() {
                for b in &vals[i + 1..] {
                    delta = delta.max((a - b).abs() / a.abs().max(b.abs()));
                }
            }
            worst = worst.max(delta);
            t.push(vec![text(x), text(y), he.into(), hs.into(), hf.limit.into(), hf.error.into(), delta.into()]);
        }
        Ok(())
    })?;
    let checks = if routes_compared >= 2 { vec![Check::at_most("route agreement", worst, p.tolerance)] } else { Vec::new() };
    Ok(Outcome {
        report: json!({
            "R": rep.r,
            "non_degenerate": rep.non_degenerate(),
            "derivative_order": rep.derivative_order,
            "finite_n_laziness": eps,
            "n_list": n_list,
            "max_rel_delta": worst,
        }),
        tables: vec![t],
        checks,
        notes,
    })
}

pub fn ray_scan(ctx: &mut Context) -> Result<Outcome, RunError> {
    let p = &ctx.config.params.ray_scan;
    let walk = ctx.walk()?;
    let rep = walk.spectral_report()?;
    let kernel = Kernel::for_walk(&walk, &rep)?;
    let snap = walk.at(rep.r, 0)?;
    let ray = RaySpec::new(p.head.parse()?, p.period.parse()?)?;
    let xs = ctx.ball(p.x_radius)?;
    let mut t = ResultTable::new(
        "ray-scan",
        "ray-scan",
        format!("H(x,y_n)/K_R(x,y_n) along the ray {} · ({})^∞ with H by the {} route", p.head, p.period, kernel.route()),
        vec![
            col("x", "", "enumerate_ball (word metric)"),
            col("depth", "syllables", "config"),
            col("y", "", "RaySpec::point"),
            col("ratio", "1", "hk_ratio_along_ray"),
            col("deviation", "1", "|ratio - 1|"),
        ],
        xs.len() * p.depths.len(),
    );
    let mut summary = Vec::new();
    let mut worst_last: f64 = 0.0;
    ctx.stage("ray profiles", |_| {
        for x in &xs {
            let prof = hk_ratio_along_ray(|a: &GroupElement, b: &GroupElement| kernel.h(a, b), &snap, x, &ray, &p.depths)?;
            for (d, q) in prof.depths.iter().zip(&prof.ratios) {
                t.push(vec![text(x), (*d).into(), text(&ray.point(*d)), (*q).into(), (q - 1.0).abs().into()]);
            }
            worst_last = worst_last.max(prof.last_deviation);
            summary.push(json!({ "x": x.to_string(), "last_deviation": prof.last_deviation, "max_deviation": prof.max_deviation, "monotone": prof.monotone }));
        }
        Ok(())
    })?;
    Ok(Outcome {
        report: json!({ "route": kernel.route(), "R": rep.r, "max_last_deviation": worst_last, "per_x": summary }),
        tables: vec![t],
        ..Default::default()
    })
}

pub fn ancona(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let p = &c.params.ancona;
    let walk = ctx.walk()?;
    let big_r = walk.radius()?;
    let grid: Vec<f64> = p.r_fractions.iter().map(|f| f * big_r).collect();
    let weak = ctx.stage("weak Ancona", |_| {
        let triples = sample_triples(walk.spec(), p.count, c.seed, p.max_len, p.perturb)?;
        Ok(weak_ancona_scan(&walk, &grid, &triples, c.seed)?)
    })?;
    let strong = ctx.stage("strong Ancona", |_| Ok(strong_ancona_fit(&walk, big_r, &p.depths, p.strong_count, c.seed, p.source_radius)?))?;
    let mut tw = ResultTable::new(
        "ancona-weak",
        "ancona",
        format!("G(x,z)/(G(x,y)G(y,z)) over {} sampled triples; prefix triples test exact factorisation", p.count),
        vec![
            col("r_over_R", "1", "config"),
            col("r", "1", "grid times compute_r"),
            col("prefix_identity_error", "1", "weak_ancona_scan"),
            col("c_hat", "1", "weak_ancona_scan (max over perturbed triples)"),
            col("median", "1", "weak_ancona_scan"),
            col("p90", "1", "weak_ancona_scan"),
        ],
        grid.len(),
    );
    for (f, l) in p.r_fractions.iter().zip(&weak.levels) {
        tw.push(vec![(*f).into(), l.r.into(), l.prefix_identity_error.into(), l.c_hat.into(), l.median.into(), l.p90.into()]);
    }
    let mut ts = ResultTable::new(
        "ancona-strong",
        "ancona",
        format!("cross-ratio deviations at r = R for targets sharing n syllables, {} samples per depth", p.strong_count),
        vec![
            col("depth", "syllables", "config"),
            col("median", "1", "strong_ancona_fit"),
            col("max", "1", "strong_ancona_fit"),
            col("exact_zero", "samples", "strong_ancona_fit"),
        ],
        p.depths.len(),
    );
    for l in &strong.levels {
        ts.push(vec![l.depth.into(), l.median.into(), l.max.into(), l.exact_zero.into()]);
    }
    let prefix = weak.levels.iter().map(|l| l.prefix_identity_error).fold(0.0, f64::max);
    Ok(Outcome {
        report: json!({ "R": big_r, "weak": weak, "strong": strong }),
        tables: vec![tw, ts],
        checks: vec![Check::at_most("prefix factorisation", prefix, 1e-10)],
        notes: strong.notes.clone(),
    })
}

pub fn llt(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let p = &c.params.llt_fit;
    let walk = ctx.walk()?;
    let big_r = walk.radius()?;
    let eps = c.measure.laziness;
    let base = if eps > 0.0 { walk.measure().lift().lazy(eps)? } else { walk.measure().lift() };
    let depth = c.budgets.n_max;
    let top = p.n_top.unwrap_or(2 * depth);
    let start = p.window_start.unwrap_or(top / 2);
    if top > 2 * depth || start >= top {
        return Err(RunError::Config(format!("params.llt_fit: need window_start < n_top ≤ 2·budgets.n_max, got {start}..{top}")));
    }
    let table = ctx.table(&base, depth)?;
    let r = if eps > 0.0 { lazy_radius(big_r, eps) } else { big_r };
    let returns = ctx.stage("return probabilities", |_| Ok(table.series_extended(&GroupElement::identity(), top)?))?;
    let samples: Vec<(usize, f64)> = (start..=top).map(|n| (n, returns[n])).collect();
    let fit = llt_fit(&samples, r, p.corrected)?;
    let plain = llt_fit(&samples, r, false)?;
    let mut t = ResultTable::new(
        "llt-fit",
        "llt-fit",
        format!("return probabilities in the fit window with r = {r}"),
        vec![
            col("n", "steps", "window"),
            col("p_n", "1", "ConvolutionTable::series_extended(e)"),
            col("log_p_n_r_n", "1", "log(p_n r^n)"),
        ],
        samples.len(),
    );
    for &(n, pn) in &samples {
        let l = if pn > 0.0 { Some(pn.ln() + n as f64 * r.ln()) } else { None };
        t.push(vec![n.into(), pn.into(), l.into()]);
    }
    Ok(Outcome { report: json!({ "laziness": eps, "r_used": r, "fit": fit, "uncorrected": plain }), tables: vec![t], ..Default::default() })
}

pub fn radical(ctx: &mut Context) -> Result<Outcome, RunError> {
    let p = &ctx.config.params.radical;
    let walk = ctx.walk()?;
    let rep = walk.spectral_report()?;
    let kernel = Kernel::for_walk(&walk, &rep)?;
    let elements = ctx.ball(p.ball_radius)?;
    let tests = ctx.ball(p.test_radius)?;
    let scan = ctx.stage("radical scan", |_| {
        Ok(radical_scan(p.ball_radius, elements, &tests, p.tolerance, |a: &GroupElement, b: &GroupElement| kernel.h(a, b))?)
    })?;
    let mut t = ResultTable::new(
        "radical",
        "radical",
        format!("max_x |H(x,g) - H(x,e)| over the ball of radius {} with H by the {} route", p.test_radius, kernel.route()),
        vec![
            col("g", "", "enumerate_ball (word metric)"),
            col("deviation", "1", "radical_scan"),
            col("candidate", "", "deviation below tolerance"),
        ],
        scan.elements.len(),
    );
    for (g, d) in scan.elements.iter().zip(&scan.deviations) {
        t.push(vec![text(g), (*d).into(), (*d < p.tolerance).into()]);
    }
    let smallest = scan.elements.iter().zip(&scan.deviations).filter(|(g, _)| !g.is_identity()).map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        report: json!({
            "route": kernel.route(),
            "ball_radius": p.ball_radius,
            "tolerance": p.tolerance,
            "candidates": strings(&scan.candidates),
            "trivial": scan.candidates == [GroupElement::identity()],
            "closed_under_inverse": scan.closed_under_inverse,
            "smallest_nontrivial_deviation": smallest,
        }),
        tables: vec![t],
        ..Default::default()
    })
}

fn regime(psi: f64) -> &'static str {
    if psi < -PSI_TOL {
        "non-degenerate"
    } else if psi > PSI_TOL {
        "degenerate"
    } else {
        "borderline"
    }
}

pub fn reproduce_z5z(ctx: &mut Context) -> Result<Outcome, RunError> {
    let c = ctx.config;
    let p = &c.params.reproduce_z5z;
    let factors: Vec<LatticeMeasure> = c.factor_measures()?;
    let grid = p.grid();
    let mode = c.green_mode();
    let scan = ctx.stage("alpha sweep", |_| Ok(tune_alpha(&factors, &grid, mode)?))?;
    let spec = c.spec()?;
    let mut endpoints = Vec::new();
    ctx.stage("endpoint reports", |_| {
        for &a in [grid[0], grid[grid.len() - 1]].iter() {
            let measure = fpwalk::measures::AdaptedMeasure::new(&spec, vec![a, 1.0 - a], factors.clone())?;
            let rep = FreeProductWalk::new(spec.clone(), measure, mode)?.spectral_report()?;
            endpoints.push(json!({
                "alpha1": a,
                "non_degenerate": rep.non_degenerate(),
                "degenerate": rep.degenerate,
                "convergent": rep.convergent,
                "degeneracy_rank": rep.degeneracy_rank,
                "derivative_order": rep.derivative_order,
                "psi_at_theta_bar": rep.psi_at_theta_bar,
                "status": rep.status,
            }));
        }
        Ok(())
    })?;
    let mut t = ResultTable::new(
        "reproduce-z5z",
        "reproduce-z5z",
        format!("Ψ(θ̄) against α₁ for weights (α₁, 1-α₁) on ranks {:?}", c.group.ranks),
        vec![
            col("alpha1", "1", "grid"),
            col("psi_at_theta_bar", "1", "tune_alpha"),
            col("regime", "", "sign of Ψ(θ̄) at the classifier tolerance"),
        ],
        grid.len(),
    );
    for pt in &scan.points {
        t.push(vec![pt.alpha1.into(), pt.psi_at_theta_bar.into(), Cell::Text(regime(pt.psi_at_theta_bar).into())]);
    }
    let width = scan.sign_change.map(|(a, b)| b - a);
    let mut notes = Vec::new();
    if width.is_none() {
        notes.push("Ψ(θ̄) does not change sign on the grid".into());
    }
    Ok(Outcome {
        report: json!({
            "ranks": c.group.ranks,
            "scan": scan,
            "bracket_width": width,
            "bracket_within_limit": width.is_some_and(|w| w <= p.max_bracket + 1e-12),
            "endpoints": endpoints,
        }),
        tables: vec![t],
        checks: Vec::new(),
        notes,
    })
}

/// Closed-form oracles that need no config.
pub fn selftest(ctx: &mut Context) -> Result<Outcome, RunError> {
    let s3 = 3f64.sqrt();
    let mut checks = Vec::new();
    ctx.stage("free group oracles", |_| {
        let w = FreeProductWalk::srw(&[1, 1], &[0.5, 0.5])?;
        let root = w.compute_r()?;
        checks.push(Check::at_most("F_2 R = 2/sqrt(3)", (root.r - 2.0 / s3).abs(), 1e-6));
        checks.push(Check::at_most("F_2 G(e,e|R) = 3", (root.green_ee - 3.0).abs(), 1e-6));
        let g1 = w.at(1.0, 0)?.green_value(&GroupElement::identity(), &GroupElement::identity())?;
        checks.push(Check::at_most("F_2 G(e,e|1) = 3/2", (g1 - 1.5).abs(), 1e-6));
        checks.push(Check::at_most("F_2 zeta(R) = sqrt(3)/2", (w.zeta(0, root.r)? - s3 / 2.0).abs(), 1e-8));
        let rep = w.spectral_report()?;
        checks.push(Check { name: "F_2 non-degenerate".into(), value: 0.0, tolerance: 0.0, passed: rep.non_degenerate() });
        Ok(())
    })?;
    ctx.stage("lattice oracle", |_| {
        let g = FactorGreen::new(LatticeMeasure::srw(3), GreenMode::Laplace)?.green(&[0, 0, 0], 1.0)?;
        checks.push(Check::at_most("Z^3 G(0,0|1) = 1.516386", (g.value - 1.516386).abs(), 5e-5));
        Ok(())
    })?;
    ctx.stage("Z^2*Z classifier", |_| {
        let rep = FreeProductWalk::srw(&[2, 1], &[0.5, 0.5])?.spectral_report()?;
        checks.push(Check { name: "Z^2*Z non-degenerate".into(), value: 0.0, tolerance: 0.0, passed: rep.non_degenerate() });
        Ok(())
    })?;
    Ok(Outcome { report: json!({ "checks": checks.len() }), checks, ..Default::default() })
}
