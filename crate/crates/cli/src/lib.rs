//! Config-driven experiment runner: verbs, artifacts and the run manifest.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod table;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use cache::{write_atomic, Cache, CacheError, CacheStats};
use config::{ExperimentConfig, Loaded};
use experiments::{Check, Context, Outcome, StageTiming};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fpwalk::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cross-check failed: {0}")]
    ChecksFailed(String),
}

impl From<CacheError> for RunError {
    fn from(e: CacheError) -> Self {
        match e {
            CacheError::Io(e) => RunError::Io(e),
            CacheError::Compute(e) => RunError::Core(e),
        }
    }
}

impl From<config::ConfigError> for RunError {
    fn from(e: config::ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

impl RunError {
    /// 2 config error, 3 budget exceeded, 4 numerical inconsistency, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Core(fpwalk::Error::InvalidInput(_)) => 2,
            RunError::Core(fpwalk::Error::BudgetExceeded(_)) => 3,
            RunError::Core(fpwalk::Error::Inconsistent(_)) | RunError::ChecksFailed(_) => 4,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Validate,
    SpectralReport,
    GreenTable,
    RatioLimit,
    RayScan,
    Ancona,
    LltFit,
    Radical,
    ReproduceZ5z,
    Selftest,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Validate,
        Verb::SpectralReport,
        Verb::GreenTable,
        Verb::RatioLimit,
        Verb::RayScan,
        Verb::Ancona,
        Verb::LltFit,
        Verb::Radical,
        Verb::ReproduceZ5z,
        Verb::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Validate => "validate",
            Verb::SpectralReport => "spectral-report",
            Verb::GreenTable => "green-table",
            Verb::RatioLimit => "ratio-limit",
            Verb::RayScan => "ray-scan",
            Verb::Ancona => "ancona",
            Verb::LltFit => "llt-fit",
            Verb::Radical => "radical",
            Verb::ReproduceZ5z => "reproduce-z5z",
            Verb::Selftest => "selftest",
        }
    }

    pub fn needs_config(self) -> bool {
        self != Verb::Selftest
    }

    fn execute(self, ctx: &mut Context) -> Result<Outcome, RunError> {
        match self {
            Verb::Validate => experiments::validate(ctx),
            Verb::SpectralReport => experiments::spectral_report(ctx),
            Verb::GreenTable => experiments::green_table(ctx),
            Verb::RatioLimit => experiments::ratio_limit(ctx),
            Verb::RayScan => experiments::ray_scan(ctx),
            Verb::Ancona => experiments::ancona(ctx),
            Verb::LltFit => experiments::llt(ctx),
            Verb::Radical => experiments::radical(ctx),
            Verb::ReproduceZ5z => experiments::reproduce_z5z(ctx),
            Verb::Selftest => experiments::selftest(ctx),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub rows: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub verb: String,
    pub artifact_version: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// `complete`, or `failed` with partial artifacts listed.
    pub status: String,
    pub error: Option<ErrorRecord>,
    pub stages: Vec<StageTiming>,
    pub cache: CacheStats,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strict: bool,
}

pub struct RunResult {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
    pub outcome: Result<(), RunError>,
}

fn tolerances(c: Option<&ExperimentConfig>) -> BTreeMap<String, f64> {
    let mut t = BTreeMap::from([
        ("classifier.degeneracy".to_string(), fpwalk::product_green::DEGENERACY_TOL),
        ("classifier.psi".to_string(), fpwalk::product_green::PSI_TOL),
        ("ancona.prefix_factorisation".to_string(), 1e-10),
    ]);
    if let Some(c) = c {
        t.insert("green_table.bracket".into(), c.params.green_table.tolerance);
        t.insert("ratio_limit.route_agreement".into(), c.params.ratio_limit.tolerance);
        t.insert("radical.deviation".into(), c.params.radical.tolerance);
        t.insert("reproduce_z5z.max_bracket".into(), c.params.reproduce_z5z.max_bracket);
    }
    t
}

fn write_artifact(dir: &Path, name: &str, bytes: &[u8], rows: Option<usize>, list: &mut Vec<Artifact>) -> std::io::Result<()> {
    write_atomic(&dir.join(name), bytes)?;
    list.push(Artifact { path: name.into(), sha256: hex::encode(Sha256::digest(bytes)), rows });
    Ok(())
}

/// Runs `verb`, writes its artifacts and then the manifest.
pub fn run(verb: Verb, loaded: Option<Loaded>, opts: &Options) -> RunResult {
    let mut loaded = loaded;
    if let (Some(l), Some(seed)) = (loaded.as_mut(), opts.seed) {
        l.config.seed = seed;
    }
    let config = loaded.as_ref().map(|l| &l.config);
    let out_dir = opts
        .out
        .clone()
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("fpwalk-out"));
    let mut manifest = RunManifest {
        verb: verb.name().into(),
        artifact_version: VERSION.into(),
        config_hash: config.map(|c| c.hash()),
        seed: config.map(|c| c.seed),
        status: "failed".into(),
        error: None,
        stages: Vec::new(),
        cache: CacheStats::default(),
        tolerances: tolerances(config),
        checks: Vec::new(),
        warnings: loaded.as_ref().map(|l| l.warnings.clone()).unwrap_or_default(),
        notes: Vec::new(),
        artifacts: Vec::new(),
    };
    let outcome = run_inner(verb, config, opts, &out_dir, &mut manifest);
    match &outcome {
        Ok(()) => manifest.status = "complete".into(),
        Err(e) => manifest.error = Some(ErrorRecord { exit_code: e.exit_code(), message: e.to_string() }),
    }
    let written = fs::create_dir_all(&out_dir).and_then(|_| {
        let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
        write_atomic(&out_dir.join("manifest.json"), &bytes)
    });
    let outcome = match (outcome, written) {
        (Ok(()), Err(e)) => Err(RunError::Io(e)),
        (o, _) => o,
    };
    RunResult { manifest, out_dir, outcome }
}

fn run_inner(verb: Verb, config: Option<&ExperimentConfig>, opts: &Options, out_dir: &Path, manifest: &mut RunManifest) -> Result<(), RunError> {
    let placeholder;
    let config = match config {
        Some(c) => {
            if let Some(e) = &c.experiment {
                if e != verb.name() {
                    return Err(RunError::Config(format!("experiment: config is for `{e}`, invoked as `{}`", verb.name())));
                }
            }
            c
        }
        None if !verb.needs_config() => {
            placeholder = config::parse_config(r#"{"group": {"ranks": [1, 1]}, "measure": {"weights": [0.5, 0.5]}}"#, true)?.config;
            &placeholder
        }
        None => return Err(RunError::Config(format!("`{}` needs --config", verb.name()))),
    };
    let mut cache = Cache::new(opts.cache.clone())?;
    let mut ctx = Context { config, cache: &mut cache, stages: Vec::new() };
    let result = verb.execute(&mut ctx);
    manifest.stages = std::mem::take(&mut ctx.stages);
    manifest.cache = cache.stats.clone();
    let outcome = result?;
    manifest.checks = outcome.checks.clone();
    manifest.notes = outcome.notes.clone();
    fs::create_dir_all(out_dir)?;
    let report = serde_json::to_vec_pretty(&outcome.report).expect("report serialises");
    write_artifact(out_dir, &format!("{}.json", verb.name()), &report, None, &mut manifest.artifacts)?;
    for t in &outcome.tables {
        let bytes = t.to_csv().map_err(|e| RunError::Core(fpwalk::Error::Inconsistent(e)))?;
        write_artifact(out_dir, &format!("{}.csv", t.name), &bytes, Some(t.rows.len()), &mut manifest.artifacts)?;
    }
    let failed: Vec<String> = outcome.checks.iter().filter(|c| !c.passed).map(|c| format!("{} = {:e} (tolerance {:e})", c.name, c.value, c.tolerance)).collect();
    if !failed.is_empty() {
        return Err(RunError::ChecksFailed(failed.join("; ")));
    }
    Ok(())
}

/// Manifest for a run that stopped before any stage, e.g. on a config error.
pub fn write_failure_manifest(verb: Verb, out_dir: &Path, e: &RunError) -> std::io::Result<()> {
    let manifest = RunManifest {
        verb: verb.name().into(),
        artifact_version: VERSION.into(),
        config_hash: None,
        seed: None,
        status: "failed".into(),
        error: Some(ErrorRecord { exit_code: e.exit_code(), message: e.to_string() }),
        stages: Vec::new(),
        cache: CacheStats::default(),
        tolerances: tolerances(None),
        checks: Vec::new(),
        warnings: Vec::new(),
        notes: Vec::new(),
        artifacts: Vec::new(),
    };
    fs::create_dir_all(out_dir)?;
    write_atomic(&out_dir.join("manifest.json"), &serde_json::to_vec_pretty(&manifest).expect("manifest serialises"))
}

/// Reads and validates a config file; read failures are config errors.
pub fn load_config(path: &Path, strict: bool) -> Result<Loaded, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    Ok(config::parse_config(&text, strict)?)
}
