use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use persuasion::inference::compare::{fit_model, Provenance};
use persuasion::inference::{
    compare_models, parse_levels, CompiledModel, Family, McmcConfig, ModelSpec, SearchConfig, Variant,
};
use persuasion::io::{self, RunConfig};
use persuasion::rsa::StickContest;
use persuasion::simulation::{self, svg::heatmap_svg};
use persuasion::world::WorldPrior;
use persuasion::Error;

#[derive(Parser)]
#[command(name = "persuasion", version, about = "Stick Contest persuasion models: simulation, synthetic data and model fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the model simulations.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Generate a synthetic participant dataset.
    GenData(GenData),
    /// Fit a response model and write a fit document.
    Fit(Fit),
    /// Rank fitted models by WAIC.
    Compare(Compare),
    /// Run the property battery.
    Check,
    /// Configuration helpers.
    #[command(subcommand)]
    Config(ConfigCmd),
}

#[derive(Subcommand)]
enum Simulate {
    /// Weak-evidence effect sizes over bias and evidence.
    Heatmap(Heatmap),
    /// Literal and pragmatic belief curves across the grid.
    Curves(Curves),
}

#[derive(Args)]
struct Heatmap {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated bias values, overriding the config.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta_list: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct Curves {
    #[arg(long, default_value_t = 2.03, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = -0.13, allow_hyphen_values = true)]
    offset: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenData {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to `synthetic.seed` from the config.
    #[arg(long, env = "SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Fit {
    #[arg(long, value_parser = ["rsa", "aa", "mas"])]
    model: String,
    #[arg(long, value_parser = ["homogeneous", "heterogeneous", "speaker-dependent"])]
    variant: String,
    /// Listener levels, e.g. J0,J1 or J0,J1,J2.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 7500)]
    burnin: usize,
    #[arg(long, default_value_t = 100)]
    lag: usize,
    #[arg(long, env = "SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Compare {
    #[arg(long, num_args = 1.., required = true)]
    fits: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ConfigCmd {
    /// Print the full default configuration.
    Init,
}

struct Failure {
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => io::write_file(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}

fn header(cfg: &RunConfig, seed: Option<u64>, hash: &str) -> String {
    if cfg.output.provenance_header {
        io::provenance_header(seed, hash)
    } else {
        String::new()
    }
}

fn heatmap(args: Heatmap) -> CliResult {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(b) = args.beta_list {
        cfg.sweep.betas = b;
    }
    let sweep = cfg.sweep.sweep()?;
    let h = simulation::effect_heatmap(&sweep)?;
    let text = header(&cfg, None, &cfg.hash()) + &h.to_csv();
    emit(args.out.as_deref(), &text)?;
    if let Some(p) = args.svg {
        io::write_file(&p, &heatmap_svg(&h))?;
    }
    Ok(())
}

fn curves(args: Curves) -> CliResult {
    let engine = StickContest::new(&WorldPrior::experiment())?;
    let grid = engine.grid().values().to_vec();
    let c = simulation::belief_curves(&engine, args.beta, args.offset, &grid)?;
    let hash = io::config_hash(&format!("curves beta={:?} offset={:?} grid=experiment n=5", args.beta, args.offset));
    let text = io::provenance_header(None, &hash) + &c.to_csv();
    emit(Some(&args.out), &text)?;
    Ok(())
}

fn gen_data(args: GenData) -> CliResult {
    let cfg = RunConfig::load(&args.config)?;
    let mut syn = cfg.synthetic.clone();
    if let Some(s) = args.seed {
        syn.seed = s;
    }
    let engine = cfg.world.engine()?;
    let records = simulation::generate_synthetic(&engine, &cfg.world.example(), &syn)?;
    let head = header(&cfg, Some(syn.seed), &cfg.hash());
    let text = io::write_records(&records, (!head.is_empty()).then_some(head.as_str()));
    emit(Some(&args.out), &text)?;
    eprintln!("wrote {} records to {}", records.len(), args.out.display());
    Ok(())
}

fn fit(args: Fit) -> CliResult {
    let family: Family = args.model.parse()?;
    let variant: Variant = args.variant.parse()?;
    let levels = match &args.levels {
        Some(l) => parse_levels(l)?,
        None => Vec::new(),
    };
    let spec = ModelSpec::new(family, variant, levels)?;
    let mcmc = McmcConfig {
        chains: args.chains,
        samples: args.samples,
        burnin: args.burnin,
        lag: args.lag,
        seed: args.seed,
        ..McmcConfig::default()
    };
    let search = SearchConfig::default();
    let world = RunConfig::default().world;
    let engine = Arc::new(world.engine()?);
    let (records, report) = io::ingest(&args.data, engine.grid(), &world.example())?;
    if !report.rejected.is_empty() {
        eprint!("{report}");
    }
    if records.is_empty() {
        return Err(Error::Validation(format!("{}: no valid records", args.data.display())).into());
    }
    let model = CompiledModel::new(spec.clone(), engine, &records)?;
    // the seed is reported on its own
    let canonical_mcmc = McmcConfig { seed: 0, ..mcmc.clone() };
    let canonical = serde_json::to_string(&(&spec, &canonical_mcmc, &search, &world)).map_err(Error::from)?;
    let provenance = Provenance {
        version: io::VERSION.to_string(),
        seed: args.seed,
        config_hash: io::config_hash(&canonical),
    };
    let result = fit_model(&model, &search, &mcmc, provenance)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    io::write_fit(&args.out, &result)?;
    eprintln!(
        "{}: max log-likelihood {:.3}, WAIC {:.2} +/- {:.2}, PSIS-LOO {:.2} +/- {:.2}, {} samples",
        result.label,
        result.max_loglik,
        result.waic.waic,
        result.waic.se,
        result.psis_loo.looic,
        result.psis_loo.se,
        result.n_samples()
    );
    Ok(())
}

fn compare(args: Compare) -> CliResult {
    let fits = args
        .fits
        .iter()
        .map(|p| io::read_fit(p))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = compare_models(&fits)?;
    let canonical: Vec<String> = fits
        .iter()
        .map(|f| format!("{}|{}|{}", f.label, f.data_fingerprint, f.provenance.config_hash))
        .collect();
    let mut text = io::provenance_header(None, &io::config_hash(&canonical.join("\n")));
    text.push_str("rank,model,max_loglik,waic,waic_se,psis_loo,psis_loo_se,delta_waic,delta_se,indistinguishable\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.rank,
            r.model,
            r.max_loglik,
            r.waic,
            r.waic_se,
            r.psis_loo,
            r.psis_loo_se,
            r.delta_waic,
            r.delta_se,
            r.indistinguishable
        ));
    }
    emit(args.out.as_deref(), &text)?;
    Ok(())
}

fn check() -> CliResult {
    let report = simulation::theorem_suite()?;
    print!("{report}");
    let failed = report.failures().count();
    if failed == 0 {
        println!("all properties passed");
        Ok(())
    } else {
        Err(Failure {
            kind: "property-failed".into(),
            message: format!("{failed} of {} properties failed", report.results.len()),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate(Simulate::Heatmap(a)) => heatmap(a),
        Command::Simulate(Simulate::Curves(a)) => curves(a),
        Command::GenData(a) => gen_data(a),
        Command::Fit(a) => fit(a),
        Command::Compare(a) => compare(a),
        Command::Check => check(),
        Command::Config(ConfigCmd::Init) => emit(None, &RunConfig::default_document()).map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            eprintln!("error[{}]: {message}", f.kind);
            ExitCode::FAILURE
        }
    }
}
