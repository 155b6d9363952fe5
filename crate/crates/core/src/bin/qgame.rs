use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qgame::analysis::DEFAULT_EDGE_THRESHOLD;
use qgame::cli::config::{MRange, OneOrMany, Outputs};
use qgame::cli::{commands, exit, exit_code, load_table, output, RunConfigFile};
use qgame::{Error, Result, SourceBit, Variant};

#[derive(Parser)]
#[command(name = "qgame", version, about = "Evolutionary three-player quantum game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one (m, variant, source) cell.
    Run(RunArgs),
    /// Simulate every cell of an m-range and write summary.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Simulate one cell and report its m-round transition graph.
    Transitions {
        #[command(flatten)]
        run: RunArgs,
        /// Sampling offset in rounds, below m.
        #[arg(long, default_value_t = 0)]
        phase: usize,
        /// Minimum edge probability when listing attractors.
        #[arg(long, default_value_t = DEFAULT_EDGE_THRESHOLD)]
        edge_threshold: f64,
    },
    /// Expected payoffs of the ten profile classes for inputs 0, 1 and 50:50.
    StaticTable {
        #[command(flatten)]
        table: TableArgs,
        /// Variants to tabulate.
        #[arg(long, value_delimiter = ',', default_values_t = [Variant::Classical, Variant::Quantum])]
        variant: Vec<Variant>,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a payoff table against the four structural constraints.
    ValidateTable {
        #[command(flatten)]
        table: TableArgs,
    },
    /// Dominant strategies and pure Nash equilibria of the static game.
    Equilibria {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        variant: Variant,
        /// Source bit, 0 or 1.
        #[arg(long, value_parser = parse_bit)]
        source: SourceBit,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Payoff table file (defaults to the bundled reference table).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Proceed even if the table fails validation.
    #[arg(long)]
    allow_invalid_table: bool,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// classical and/or quantum (comma-separated).
    #[arg(long)]
    variant: Option<String>,
    /// 0, 1 and/or mix50 (comma-separated).
    #[arg(long)]
    source: Option<String>,
    /// Memory m.
    #[arg(long)]
    m: Option<u32>,
    /// Memory range, e.g. 1..50 or 4,15,30.
    #[arg(long)]
    m_range: Option<String>,
    /// Mutation threshold.
    #[arg(long)]
    d: Option<f64>,
    /// strict (score < d) or inclusive (score <= d).
    #[arg(long)]
    threshold_rule: Option<String>,
    /// Trial period Y (defaults to m).
    #[arg(long)]
    trial_period: Option<u32>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    naming_threshold: Option<f64>,
    #[command(flatten)]
    table: TableArgs,
    /// summary.csv path.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Per-round trace.csv path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// transitions.csv path.
    #[arg(long)]
    transitions: Option<PathBuf>,
}

fn parse_bit(s: &str) -> std::result::Result<SourceBit, String> {
    match s {
        "0" => Ok(SourceBit::Zero),
        "1" => Ok(SourceBit::One),
        _ => Err(format!("source must be 0 or 1, got {s:?}")),
    }
}

impl RunArgs {
    fn overrides(&self) -> RunConfigFile {
        let outputs = (self.summary.is_some() || self.trace.is_some() || self.transitions.is_some()).then(|| Outputs {
            summary: self.summary.clone(),
            trace: self.trace.clone(),
            transitions: self.transitions.clone(),
        });
        RunConfigFile {
            variant: self.variant.clone().map(OneOrMany::One),
            source: self.source.clone().map(OneOrMany::One),
            m: self.m,
            m_range: self.m_range.clone().map(MRange::Spec),
            d: self.d,
            threshold_rule: self.threshold_rule.clone(),
            trial_period: self.trial_period,
            steps: self.steps,
            seed: self.seed,
            table_path: self.table.table.clone(),
            burn_in: self.burn_in,
            outputs,
            naming_threshold: self.naming_threshold,
        }
    }

    fn resolve(&self) -> Result<qgame::cli::ResolvedConfig> {
        let base = match &self.config {
            Some(path) => RunConfigFile::load(path)?,
            None => RunConfigFile::default(),
        };
        base.merge(self.overrides()).resolve()
    }
}

fn print_summary(out: &commands::RunOutput) {
    let s = &out.summary;
    let f = |x: f64| output::format_sig_digits(x, 6);
    println!(
        "m={} variant={} source={} rounds={}",
        out.cell.m, out.cell.variant, out.cell.source, s.rounds
    );
    println!("mean total payout per round: {}", f(s.mean_total_payout));
    match s.mean_lifetime {
        Some(l) => println!("mean strategy lifetime: {} rounds ({} samples)", f(l), s.lifetime_samples),
        None => println!("mean strategy lifetime: undefined (no completed lifetimes)"),
    }
    println!("mutations: {}", s.mutation_count);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let table = load_table(cfg.table_path.as_deref(), args.table.allow_invalid_table)?;
            let out = commands::cmd_run(&cfg, &table, 0, false)?;
            print_summary(&out);
        }
        Command::Sweep { run, jobs } => {
            let cfg = run.resolve()?;
            let table = load_table(cfg.table_path.as_deref(), run.table.allow_invalid_table)?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let result = commands::cmd_sweep(&cfg, &table, jobs)?;
            if cfg.outputs.summary.is_none() {
                output::write_summary(std::io::stdout().lock(), result.rows())?;
            }
        }
        Command::Transitions { run, phase, edge_threshold } => {
            let cfg = run.resolve()?;
            let table = load_table(cfg.table_path.as_deref(), run.table.allow_invalid_table)?;
            let out = commands::cmd_run(&cfg, &table, phase, true)?;
            print_summary(&out);
            if let Some(graph) = &out.transitions {
                print!("{}", commands::render_transitions(graph, edge_threshold));
            }
        }
        Command::StaticTable { table, variant, out } => {
            let checked = load_table(table.table.as_deref(), table.allow_invalid_table)?;
            let rows: Vec<_> = variant
                .iter()
                .flat_map(|&v| commands::cmd_static_table(v, &checked))
                .collect();
            print!("{}", commands::render_static_table(&rows));
            if let Some(path) = out {
                output::write_static_table_file(&path, &rows)?;
            }
        }
        Command::ValidateTable { table } => {
            let checked = load_table(table.table.as_deref(), true)?;
            print!("{}", checked.report());
            if !checked.report().passed() && !table.allow_invalid_table {
                return Err(Error::InvalidTable(Box::new(checked.report().clone())));
            }
        }
        Command::Equilibria { table, variant, source } => {
            let checked = load_table(table.table.as_deref(), table.allow_invalid_table)?;
            print!("{}", commands::render_equilibria(&commands::cmd_equilibria(variant, source, &checked)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
