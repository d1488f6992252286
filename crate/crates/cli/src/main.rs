use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fbhebb_cli::grid::{render_grid, run_matrix};
use fbhebb_cli::report::write_report;
use fbhebb_cli::runner::{render_summary, write_artifacts};
use fbhebb_cli::{
    execute, ExperimentMatrix, RunConfig, ACCEPTANCE_SEEDS, DEFAULT_OUT_ROOT, OUT_ROOT_ENV,
};
use fbhebb_core::{
    selectivity, Architecture, InjectionMode, NetworkSnapshot, Pair, Regime, RuleVariant,
    UpdateGranularity, ACTIVITY_MARGIN,
};

#[derive(Parser)]
#[command(
    name = "fbhebb",
    version,
    about = "Feedback-Hebbian continual-learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured experiment and write its artifacts.
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Probe a saved network snapshot.
    Probe {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long, value_enum, default_value_t = ProbeKind::Predict)]
        probe: ProbeKind,
        #[arg(long, default_value = "A")]
        pair: Pair,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run every cell of an experiment grid over several seeds.
    Matrix {
        /// controls, ablations or acceptance
        name: String,
        #[arg(long, value_delimiter = ',', default_values_t = ACCEPTANCE_SEEDS)]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Evaluate the acceptance criteria against run directories.
    Report {
        /// Directories searched recursively for runs (default: the output root).
        dirs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = ACCEPTANCE_SEEDS)]
        seeds: Vec<u64>,
        #[command(flatten)]
        out: OutArg,
        /// Exit with status 1 when any criterion fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    Predict,
    Regenerate,
}

#[derive(Args)]
struct OutArg {
    /// Output root.
    #[arg(long, env = OUT_ROOT_ENV, default_value = DEFAULT_OUT_ROOT)]
    out: PathBuf,
}

/// Config file plus per-flag overrides.
#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    arch: Option<Architecture>,
    #[arg(long)]
    variant: Option<RuleVariant>,
    #[arg(long)]
    regime: Option<Regime>,
    /// Epochs per phase.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    injection: Option<InjectionMode>,
    #[arg(long)]
    granularity: Option<UpdateGranularity>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(seed, arch, variant, regime, epochs, injection, granularity);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_run(args: &RunArgs, out: &Path) -> Result<()> {
    let cfg = args.resolve()?;
    let outcome = execute(&cfg)?;
    let dir = out.join(cfg.run_name());
    let summary = write_artifacts(&dir, &outcome)?;
    print!("{}", render_summary(&summary));
    println!("artifacts: {}", dir.display());
    Ok(())
}

fn cmd_probe(path: &Path, kind: ProbeKind, pair: Pair, json: bool) -> Result<()> {
    let snap =
        NetworkSnapshot::load(path).with_context(|| format!("loading {}", path.display()))?;
    let net = snap.to_network()?;
    let (pattern, targets, label) = match kind {
        ProbeKind::Predict => (pair.input(), pair.target_sites().to_vec(), "predict"),
        ProbeKind::Regenerate => (pair.target(), vec![pair.input_site()], "regenerate"),
    };
    let v = match kind {
        ProbeKind::Predict => net.probe_prediction(&pattern)?,
        ProbeKind::Regenerate => net.probe_regeneration(&pattern)?,
    };
    let sel = selectivity(&v, &targets, ACTIVITY_MARGIN);
    if json {
        let body = serde_json::json!({
            "probe": label,
            "pair": pair,
            "arch": net.arch(),
            "activity": v,
            "targets": targets,
            "margin": sel.margin,
            "selective": sel.selective,
        });
        println!("{}", serde_json::to_string_pretty(&body)?);
    } else {
        println!(
            "{label} pair {pair} on {} (step {})",
            net.arch(),
            net.step_counter()
        );
        for (site, a) in v.sites() {
            let mark = if targets.contains(&site) { "*" } else { " " };
            println!("  {mark}{site:>2}  {a:.4}");
        }
        println!(
            "margin {:+.4}: {}",
            sel.margin,
            if sel.selective {
                "selective"
            } else {
                "not selective"
            }
        );
    }
    Ok(())
}

fn cmd_matrix(name: &str, seeds: &[u64], workers: usize, args: &RunArgs, out: &Path) -> Result<()> {
    let matrix = ExperimentMatrix::builtin(name)?;
    let base = args.resolve()?;
    let report = run_matrix(&matrix, &base, seeds, out, workers)?;
    print!("{}", render_grid(&report));
    Ok(())
}

fn cmd_report(dirs: &[PathBuf], seeds: &[u64], out: &Path, strict: bool) -> Result<bool> {
    let roots = if dirs.is_empty() {
        vec![out.to_path_buf()]
    } else {
        dirs.to_vec()
    };
    let report = write_report(&roots, seeds, out)?;
    print!("{}", report.render());
    if strict && !report.all_passed() {
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { run, out } => cmd_run(run, &out.out).map(|_| true),
        Command::Probe {
            snapshot,
            probe,
            pair,
            json,
        } => cmd_probe(snapshot, *probe, *pair, *json).map(|_| true),
        Command::Matrix {
            name,
            seeds,
            workers,
            run,
            out,
        } => {
            if seeds.is_empty() {
                Err(anyhow::anyhow!("--seeds must name at least one seed"))
            } else {
                cmd_matrix(name, seeds, *workers, run, &out.out).map(|_| true)
            }
        }
        Command::Report {
            dirs,
            seeds,
            out,
            strict,
        } => cmd_report(dirs, seeds, &out.out, *strict),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
