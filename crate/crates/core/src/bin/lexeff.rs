use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lexeff::baselines::BaselineKind;
use lexeff::config::AnalysisConfig;
use lexeff::pipeline::{self, Comparison};
use lexeff::report::{read_column, Table};
use lexeff::semantics::Listener;
use lexeff::taxonomy::write_item_taxonomy;
use lexeff::{Error, Result};

/// Communicative efficiency of labels for emerging concepts.
#[derive(Parser)]
#[command(name = "lexeff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Analysis configuration (`key = value` lines).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Overrides one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Writes the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Checks inputs and reports every problem found.
    Validate(Common),
    /// Average length and information loss per scope.
    Costs {
        #[command(flatten)]
        common: Common,
        /// Per-item costs instead.
        #[arg(long)]
        items: bool,
    },
    /// Optimal tradeoff curve over the beta grid.
    Frontier(Common),
    /// Efficiency loss of the attested encoding.
    Loss {
        #[command(flatten)]
        common: Common,
        /// Per-item losses instead.
        #[arg(long)]
        items: bool,
    },
    /// Near-synonym and random baselines.
    Baselines {
        #[command(flatten)]
        common: Common,
        /// `near-synonym`, `random`, or both when omitted.
        #[arg(long)]
        kind: Option<BaselineKind>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        bootstrap_resamples: Option<usize>,
    },
    /// Literal/metaphorical and endocentric/exocentric profile per item.
    Taxonomy {
        #[command(flatten)]
        common: Common,
        /// Profile of head-replaced compounds instead.
        #[arg(long)]
        heads: bool,
    },
    /// Two-group comparison of one numeric column of two tables.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "epsilon")]
        column: String,
        #[arg(long, default_value_t = 1000)]
        bootstrap_resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every stage; writes the output bundle.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also writes SVG plots.
        #[arg(long)]
        plot: bool,
        /// Also writes per-replicate baseline tables.
        #[arg(long)]
        dump_replicates: bool,
    },
}

const PATH_KEYS: [&str; 7] = ["concepts", "embeddings", "lexicon", "encoding", "taxonomy", "antonyms", "output"];

fn load_config(common: &Common) -> Result<AnalysisConfig> {
    let mut config = match &common.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig {
            base_dir: PathBuf::from("."),
            ..Default::default()
        },
    };
    let cwd = std::env::current_dir().map_err(|e| Error::io(".", e))?;
    for o in &common.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Error::config("--set", format!("expected KEY=VALUE, got `{o}`")))?;
        let (key, value) = (key.trim(), value.trim());
        // Paths given on the command line are relative to the working directory.
        if PATH_KEYS.contains(&key) && Path::new(value).is_relative() {
            config.set(key, &cwd.join(value).to_string_lossy())?;
        } else {
            config.set(key, value)?;
        }
    }
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    let diags = config.validate();
    if let Some(first) = diags.into_iter().next() {
        return Err(Error::InvalidInput(first));
    }
    Ok(config)
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn emit_table(table: &Table, out: Option<&Path>) -> Result<()> {
    emit(table.to_tsv().as_bytes(), out)
}

/// Loads inputs and a listener, then hands both to `f` on the configured pool.
fn with_inputs(
    config: &AnalysisConfig,
    f: impl FnOnce(&pipeline::Inputs, &Listener<'_>) -> Result<Vec<u8>> + Send,
) -> Result<Vec<u8>> {
    pipeline::with_threads(config.threads, || {
        let inputs = pipeline::load_inputs(config)?;
        let listener = Listener::new(&inputs.universe, &inputs.lexicon, config.listener_params())?;
        f(&inputs, &listener)
    })?
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate(common) => {
            let config = load_config(&common)?;
            let diags = pipeline::validate(&config);
            if diags.is_empty() {
                emit(b"ok\n", common.out.as_deref())?;
                return Ok(ExitCode::SUCCESS);
            }
            for d in &diags {
                eprintln!("{d}");
            }
            Ok(ExitCode::from(1))
        }
        Command::Costs { common, items } => {
            let config = load_config(&common)?;
            let bytes = with_inputs(&config, |inputs, listener| {
                let (scopes, per_item) = pipeline::cost_tables(inputs, listener)?;
                Ok(if items { per_item } else { scopes }.to_tsv().into_bytes())
            })?;
            emit(&bytes, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Frontier(common) => {
            let config = load_config(&common)?;
            let bytes = with_inputs(&config, |inputs, listener| {
                let full = pipeline::frontier(inputs, listener, &config)?;
                let frontiers = pipeline::scope_frontiers(inputs, &full)?;
                Ok(pipeline::frontier_table(&frontiers).to_tsv().into_bytes())
            })?;
            emit(&bytes, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Loss { common, items } => {
            let config = load_config(&common)?;
            let bytes = with_inputs(&config, |inputs, listener| {
                let full = pipeline::frontier(inputs, listener, &config)?;
                let table = if items {
                    let rows = pipeline::encoding_item_losses(&inputs.encoding, &full, &inputs.lexicon, listener)?;
                    pipeline::item_loss_table(&rows)
                } else {
                    let frontiers = pipeline::scope_frontiers(inputs, &full)?;
                    pipeline::loss_table(&pipeline::scope_losses(&frontiers, listener)?)
                };
                Ok(table.to_tsv().into_bytes())
            })?;
            emit(&bytes, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Baselines {
            common,
            kind,
            replicates,
            seed,
            bootstrap_resamples,
        } => {
            let mut config = load_config(&common)?;
            if let Some(n) = replicates {
                config.replicates = n;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(n) = bootstrap_resamples {
                config.bootstrap_resamples = n;
            }
            let kinds = match kind {
                Some(k) => vec![k],
                None => vec![BaselineKind::NearSynonym, BaselineKind::Random],
            };
            let bytes = with_inputs(&config, |inputs, listener| {
                let full = pipeline::frontier(inputs, listener, &config)?;
                let frontiers = pipeline::scope_frontiers(inputs, &full)?;
                let runs = pipeline::baselines(inputs, listener, &frontiers, &config, &kinds)?;
                Ok(pipeline::baseline_table(&runs).to_tsv().into_bytes())
            })?;
            emit(&bytes, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Taxonomy { common, heads } => {
            let config = load_config(&common)?;
            let inputs = pipeline::load_inputs(&config)?;
            let report = pipeline::taxonomy_report(&inputs)?;
            let mut buf = Vec::new();
            write_item_taxonomy(if heads { &report.heads } else { &report.items }, &mut buf)?;
            emit(&buf, common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            a,
            b,
            column,
            bootstrap_resamples,
            seed,
            out,
        } => {
            let comparison = Comparison {
                name: column.clone(),
                group_a: a.display().to_string(),
                group_b: b.display().to_string(),
                a: read_column(&a, &column)?,
                b: read_column(&b, &column)?,
            };
            let table = pipeline::comparison_table(&[comparison], bootstrap_resamples, seed);
            emit_table(&table, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            common,
            plot,
            dump_replicates,
        } => {
            let mut config = load_config(&common)?;
            config.plot |= plot;
            config.dump_replicates |= dump_replicates;
            let run = pipeline::run_pipeline(&config)?;
            let mut listing = String::new();
            for f in &run.files {
                listing.push_str(&format!("{}\n", run.dir.join(f).display()));
            }
            emit(listing.as_bytes(), common.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
