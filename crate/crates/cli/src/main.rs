use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fpwalk_cli::{load_config, run, write_failure_manifest, Options, RunError, Verb};

#[derive(Parser)]
#[command(name = "fpwalk", version, about = "Random walks on free products of lattices: reproducible experiments")]
struct Cli {
    #[command(subcommand)]
    verb: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's output_dir, then ./fpwalk-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cache directory for convolution tables.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Unknown keys and unnormalised weights become errors.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the config and the measure it describes.
    Validate,
    /// R, θ, ζ_i(R) and the degeneracy classification.
    SpectralReport,
    /// G(e,y|r) over a ball, cross-checked against the direct series.
    GreenTable,
    /// Ratio-limit kernel H(x,y) by every available route.
    RatioLimit,
    /// H/K_R along a ray of normal forms.
    RayScan,
    /// Weak and strong Ancona probes.
    Ancona,
    /// Local-limit exponent fit.
    LltFit,
    /// Elements g with H(·,g) = H(·,e) in a ball.
    Radical,
    /// Ψ(θ̄) sweep over the first weight.
    ReproduceZ5z,
    /// Built-in closed-form checks.
    Selftest,
}

impl From<Command> for Verb {
    fn from(c: Command) -> Self {
        match c {
            Command::Validate => Verb::Validate,
            Command::SpectralReport => Verb::SpectralReport,
            Command::GreenTable => Verb::GreenTable,
            Command::RatioLimit => Verb::RatioLimit,
            Command::RayScan => Verb::RayScan,
            Command::Ancona => Verb::Ancona,
            Command::LltFit => Verb::LltFit,
            Command::Radical => Verb::Radical,
            Command::ReproduceZ5z => Verb::ReproduceZ5z,
            Command::Selftest => Verb::Selftest,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("warning: thread pool: {e}");
        }
    }
    let verb = Verb::from(cli.verb);
    let opts = Options { out: cli.out, cache: cli.cache, seed: cli.seed, strict: cli.strict };
    let loaded = match &cli.config {
        Some(p) => match load_config(p, cli.strict) {
            Ok(l) => Some(l),
            Err(e) => return fail(verb, e, &opts),
        },
        None => None,
    };
    if let Some(l) = &loaded {
        for w in &l.warnings {
            eprintln!("warning: {w}");
        }
    }
    let res = run(verb, loaded, &opts);
    for c in &res.manifest.checks {
        eprintln!("{} {}: {:e} (tolerance {:e})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    for n in &res.manifest.notes {
        eprintln!("note: {n}");
    }
    match res.outcome {
        Ok(()) => {
            println!("{}", res.out_dir.join("manifest.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

/// Config errors still leave a manifest when an output directory was named.
fn fail(verb: Verb, e: RunError, opts: &Options) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(out) = &opts.out {
        if let Err(io) = write_failure_manifest(verb, out, &e) {
            eprintln!("warning: manifest not written: {io}");
        }
    }
    ExitCode::from(e.exit_code() as u8)
}
