//! Experiment configuration: one JSON document, validated before anything runs.

use std::path::PathBuf;

use fpwalk::factor_green::GreenMode;
use fpwalk::group::{FreeProductSpec, GroupElement};
use fpwalk::measures::{AdaptedMeasure, LatticeMeasure};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Relative slack under which weights count as already normalised.
const NORMALISATION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub group: GroupConfig,
    pub measure: MeasureConfig,
    #[serde(default)]
    pub budgets: Budgets,
    /// Verb this config is meant for; a mismatch with the invoked verb is a config error.
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupConfig {
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub weights: Vec<f64>,
    /// Simple random walk on every factor when absent.
    #[serde(default)]
    pub factors: Option<Vec<FactorMeasure>>,
    #[serde(default)]
    pub laziness: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorMeasure {
    Srw,
    Atoms { atoms: Vec<(Vec<i32>, f64)> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub ball_radius: usize,
    /// Depth of the stored convolution table.
    pub n_max: usize,
    /// Fractions of `R`.
    pub r_grid: Vec<f64>,
    pub quadrature_nodes: Option<usize>,
    pub series_terms: Option<usize>,
    pub element_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            ball_radius: 3,
            n_max: 10,
            r_grid: vec![0.5, 0.8, 0.95],
            quadrature_nodes: None,
            series_terms: None,
            element_cap: 1 << 24,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub green_table: GreenTableParams,
    pub ratio_limit: RatioLimitParams,
    pub ray_scan: RayScanParams,
    pub ancona: AnconaParams,
    pub llt_fit: LltParams,
    pub radical: RadicalParams,
    pub reproduce_z5z: Z5zParams,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GreenTableParams {
    /// Defaults to `budgets.r_grid`.
    pub r_fractions: Option<Vec<f64>>,
    /// Defaults to `budgets.ball_radius`.
    pub ball_radius: Option<usize>,
    /// Keep every `stride`-th ball element.
    pub stride: usize,
    /// Number of series terms; at most twice the table depth.
    pub series_terms: Option<usize>,
    pub cross_check: bool,
    pub tolerance: f64,
}

impl Default for GreenTableParams {
    fn default() -> Self {
        Self { r_fractions: None, ball_radius: None, stride: 1, series_terms: None, cross_check: true, tolerance: 0.01 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RatioLimitParams {
    /// `[x, y]` pairs in text form; generators against ball-2 words when empty.
    pub pairs: Vec<(String, String)>,
    /// Laziness used for the finite-n route when the measure itself has none.
    pub finite_n_laziness: f64,
    /// Largest `n` of the finite-n route, at most twice `budgets.n_max`; defaults to twice.
    pub finite_n_max: Option<usize>,
    /// Number of trailing `n` values used by the extrapolation.
    pub finite_n_points: usize,
    pub extrapolation_order: usize,
    pub tolerance: f64,
}

impl Default for RatioLimitParams {
    fn default() -> Self {
        Self { pairs: Vec::new(), finite_n_laziness: 0.25, finite_n_max: None, finite_n_points: 5, extrapolation_order: 3, tolerance: 0.03 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RayScanParams {
    pub head: String,
    pub period: String,
    pub depths: Vec<usize>,
    pub x_radius: usize,
}

impl Default for RayScanParams {
    fn default() -> Self {
        Self { head: "f1:(1)".into(), period: "f2:(1).f1:(1)".into(), depths: vec![2, 4, 6, 8], x_radius: 2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct AnconaParams {
    pub r_fractions: Vec<f64>,
    pub count: usize,
    pub max_len: usize,
    pub perturb: usize,
    pub depths: Vec<usize>,
    pub strong_count: usize,
    pub source_radius: usize,
}

impl Default for AnconaParams {
    fn default() -> Self {
        Self {
            r_fractions: vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            count: 200,
            max_len: 6,
            perturb: 2,
            depths: (2..=8).collect(),
            strong_count: 100,
            source_radius: 2,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct LltParams {
    /// Last `n` of the fit window, at most twice `budgets.n_max`; defaults to twice.
    pub n_top: Option<usize>,
    /// First `n` of the fit window; defaults to half of `n_top`.
    pub window_start: Option<usize>,
    pub corrected: bool,
}

impl Default for LltParams {
    fn default() -> Self {
        Self { n_top: None, window_start: None, corrected: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RadicalParams {
    pub ball_radius: usize,
    pub test_radius: usize,
    pub tolerance: f64,
}

impl Default for RadicalParams {
    fn default() -> Self {
        Self { ball_radius: 3, test_radius: 2, tolerance: 1e-2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Z5zParams {
    /// Explicit `α₁` grid; otherwise `grid_min..=grid_max` in steps of `grid_step`.
    pub alpha_grid: Option<Vec<f64>>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub max_bracket: f64,
}

impl Default for Z5zParams {
    fn default() -> Self {
        Self { alpha_grid: None, grid_min: 0.05, grid_max: 0.95, grid_step: 0.025, max_bracket: 0.05 }
    }
}

impl Z5zParams {
    pub fn grid(&self) -> Vec<f64> {
        if let Some(g) = &self.alpha_grid {
            return g.clone();
        }
        let steps = ((self.grid_max - self.grid_min) / self.grid_step + 1e-9).floor() as usize;
        (0..=steps).map(|i| self.grid_min + i as f64 * self.grid_step).collect()
    }
}

/// A validated config and everything noticed while reading it.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
#[error("{}", .errors.join("\n"))]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl ConfigError {
    fn one(msg: impl Into<String>) -> Self {
        Self { errors: vec![msg.into()] }
    }
}

/// Parses and validates; unknown keys are warnings, or errors under `strict`.
pub fn parse_config(text: &str, strict: bool) -> Result<Loaded, ConfigError> {
    let mut unknown = Vec::new();
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut note = |path: serde_ignored::Path| unknown.push(path.to_string());
    let ignoring = serde_ignored::Deserializer::new(de, &mut note);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(ignoring).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::one(format!("{}: {}", if path == "." { "<root>".into() } else { path }, e.inner()))
    })?;
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    for key in unknown {
        let msg = format!("{key}: unknown key");
        if strict {
            errors.push(msg);
        } else {
            warnings.push(format!("{msg} (ignored)"));
        }
    }
    validate(&mut config, strict, &mut warnings, &mut errors);
    if errors.is_empty() {
        Ok(Loaded { config, warnings })
    } else {
        Err(ConfigError { errors })
    }
}

fn normalise(values: &mut [f64], field: &str, strict: bool, warnings: &mut Vec<String>, errors: &mut Vec<String>) {
    if values.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        errors.push(format!("{field}: weights must be finite and non-negative"));
        return;
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        errors.push(format!("{field}: weights sum to zero"));
        return;
    }
    if (total - 1.0).abs() > NORMALISATION_SLACK {
        if strict {
            errors.push(format!("{field}: weights sum to {total}, not 1"));
        } else {
            warnings.push(format!("{field}: weights sum to {total}; normalised"));
            values.iter_mut().for_each(|w| *w /= total);
        }
    }
}

fn positive(value: usize, field: &str, errors: &mut Vec<String>) {
    if value == 0 {
        errors.push(format!("{field}: must be positive"));
    }
}

fn fractions(values: &[f64], field: &str, errors: &mut Vec<String>) {
    if values.is_empty() {
        errors.push(format!("{field}: must not be empty"));
    }
    if values.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        errors.push(format!("{field}: fractions of R must lie in (0, 1]"));
    }
}

fn element(text: &str, field: &str, errors: &mut Vec<String>) {
    if let Err(e) = text.parse::<GroupElement>() {
        errors.push(format!("{field}: {e}"));
    }
}

fn validate(c: &mut ExperimentConfig, strict: bool, warnings: &mut Vec<String>, errors: &mut Vec<String>) {
    if let Err(e) = FreeProductSpec::from_ranks(&c.group.ranks) {
        errors.push(format!("group.ranks: {e}"));
    }
    let k = c.group.ranks.len();
    if c.measure.weights.len() != k {
        errors.push(format!("measure.weights: {} weights for {k} factors", c.measure.weights.len()));
    }
    normalise(&mut c.measure.weights, "measure.weights", strict, warnings, errors);
    if !(0.0..1.0).contains(&c.measure.laziness) {
        errors.push("measure.laziness: must lie in [0, 1)".into());
    }
    if let Some(fs) = &mut c.measure.factors {
        if fs.len() != k {
            errors.push(format!("measure.factors: {} entries for {k} factors", fs.len()));
        }
        for (i, f) in fs.iter_mut().enumerate() {
            if let FactorMeasure::Atoms { atoms } = f {
                let field = format!("measure.factors[{i}].atoms");
                if let Some(&rank) = c.group.ranks.get(i) {
                    if atoms.iter().any(|(v, _)| v.len() != rank) {
                        errors.push(format!("{field}: vectors must have length {rank}"));
                    }
                }
                let mut w: Vec<f64> = atoms.iter().map(|a| a.1).collect();
                normalise(&mut w, &field, strict, warnings, errors);
                for (a, w) in atoms.iter_mut().zip(w) {
                    a.1 = w;
                }
            }
        }
    }
    let b = &c.budgets;
    positive(b.ball_radius, "budgets.ball_radius", errors);
    positive(b.n_max, "budgets.n_max", errors);
    positive(b.element_cap, "budgets.element_cap", errors);
    fractions(&b.r_grid, "budgets.r_grid", errors);
    if let Some(n) = b.quadrature_nodes {
        positive(n, "budgets.quadrature_nodes", errors);
    }
    if let Some(n) = b.series_terms {
        positive(n, "budgets.series_terms", errors);
    }
    if b.quadrature_nodes.is_some() && b.series_terms.is_some() {
        errors.push("budgets: set at most one of quadrature_nodes and series_terms".into());
    }
    let p = &c.params;
    if let Some(r) = &p.green_table.r_fractions {
        fractions(r, "params.green_table.r_fractions", errors);
    }
    positive(p.green_table.stride, "params.green_table.stride", errors);
    for (i, (x, y)) in p.ratio_limit.pairs.iter().enumerate() {
        element(x, &format!("params.ratio_limit.pairs[{i}][0]"), errors);
        element(y, &format!("params.ratio_limit.pairs[{i}][1]"), errors);
    }
    if !(0.0..1.0).contains(&p.ratio_limit.finite_n_laziness) {
        errors.push("params.ratio_limit.finite_n_laziness: must lie in [0, 1)".into());
    }
    if p.ratio_limit.finite_n_points < 2 {
        errors.push("params.ratio_limit.finite_n_points: need at least 2".into());
    }
    element(&p.ray_scan.head, "params.ray_scan.head", errors);
    element(&p.ray_scan.period, "params.ray_scan.period", errors);
    if p.ray_scan.depths.is_empty() {
        errors.push("params.ray_scan.depths: must not be empty".into());
    }
    fractions(&p.ancona.r_fractions, "params.ancona.r_fractions", errors);
    positive(p.ancona.count, "params.ancona.count", errors);
    positive(p.ancona.max_len, "params.ancona.max_len", errors);
    positive(p.ancona.strong_count, "params.ancona.strong_count", errors);
    if p.ancona.depths.is_empty() {
        errors.push("params.ancona.depths: must not be empty".into());
    }
    if !(p.radical.tolerance > 0.0) {
        errors.push("params.radical.tolerance: must be positive".into());
    }
    let z = &p.reproduce_z5z;
    if z.alpha_grid.is_none() && !(z.grid_step > 0.0 && z.grid_min > 0.0 && z.grid_max < 1.0 && z.grid_min < z.grid_max) {
        errors.push("params.reproduce_z5z: need 0 < grid_min < grid_max < 1 and grid_step > 0".into());
    }
}

impl ExperimentConfig {
    pub fn spec(&self) -> fpwalk::Result<FreeProductSpec> {
        FreeProductSpec::from_ranks(&self.group.ranks)
    }

    pub fn factor_measures(&self) -> fpwalk::Result<Vec<LatticeMeasure>> {
        self.group
            .ranks
            .iter()
            .enumerate()
            .map(|(i, &rank)| match self.measure.factors.as_ref().map(|f| &f[i]) {
                None | Some(FactorMeasure::Srw) => Ok(LatticeMeasure::srw(rank)),
                Some(FactorMeasure::Atoms { atoms }) => LatticeMeasure::new(rank, atoms.clone()),
            })
            .collect()
    }

    pub fn adapted_measure(&self) -> fpwalk::Result<AdaptedMeasure> {
        AdaptedMeasure::new(&self.spec()?, self.measure.weights.clone(), self.factor_measures()?)
    }

    pub fn green_mode(&self) -> GreenMode {
        match (self.budgets.quadrature_nodes, self.budgets.series_terms) {
            (Some(nodes), _) => GreenMode::Quadrature { nodes },
            (None, Some(n_max)) => GreenMode::Series { n_max },
            _ => GreenMode::Auto,
        }
    }

    /// SHA-256 of the canonical serialisation, after normalisation and overrides.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F2: &str = r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let l = parse_config(F2, true).unwrap();
        assert_eq!(l.config.budgets.ball_radius, 3);
        assert_eq!(l.config.params.ancona.depths, (2..=8).collect::<Vec<_>>());
        assert!(l.warnings.is_empty());
    }

    #[test]
    fn negative_radius_names_the_field() {
        let text = r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}, "budgets": {"ball_radius": -1}}"#;
        let e = parse_config(text, false).unwrap_err();
        assert!(e.errors[0].contains("budgets.ball_radius"), "{e}");
        let text = r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}, "budgets": {"ball_radius": 0}}"#;
        assert!(parse_config(text, false).unwrap_err().to_string().contains("budgets.ball_radius"));
    }

    #[test]
    fn weights_are_normalised_unless_strict() {
        let text = r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [1, 3]}}"#;
        let l = parse_config(text, false).unwrap();
        assert_eq!(l.config.measure.weights, vec![0.25, 0.75]);
        assert_eq!(l.warnings.len(), 1);
        assert!(parse_config(text, true).unwrap_err().errors[0].contains("measure.weights"));
    }

    #[test]
    fn unknown_keys_warn_or_fail() {
        let text = r#"{"group": {"ranks": [1, 1], "colour": 3}, "measure": {"weights": [0.5, 0.5]}}"#;
        let l = parse_config(text, false).unwrap();
        assert!(l.warnings[0].contains("group.colour"));
        assert!(parse_config(text, true).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse_config(F2, true).unwrap().config;
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn default_alpha_grid_steps_evenly() {
        let g = Z5zParams::default().grid();
        assert_eq!(g.len(), 37);
        assert!((g[36] - 0.95).abs() < 1e-12);
    }
}
