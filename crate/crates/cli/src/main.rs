use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use intermed::game::DEFAULT_DEV_TOL;
use intermed::policies::DEFAULT_DISTR_TOL;
use intermed::DEFAULT_TOL;

mod commands;
mod convert;
mod report;

use report::{Report, Verdict};

#[derive(Debug, Parser)]
#[command(name = "intermed", version, about = "Check whether regulating goods alone lets competing intermediaries implement a screening outcome")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Economy document (JSON).
    #[arg(long, global = true)]
    pub economy: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "hat-per-unit")]
    pub policy: PolicyName,
    /// Per-unit fees as GOOD=VALUE pairs, e.g. `L=5,H=6.8`.
    #[arg(long, global = true)]
    pub fees: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_DISTR_TOL)]
    pub distr_tol: f64,
    /// Smallest gain that counts as a profitable deviation.
    #[arg(long, global = true, default_value_t = DEFAULT_DEV_TOL)]
    pub dev_tol: f64,
    #[arg(long, global = true, default_value_t = 0.5)]
    pub grid_step: f64,
    /// Lowest grid price; defaults to the lowest target price minus 5.
    #[arg(long, global = true)]
    pub grid_lo: Option<f64>,
    /// Highest grid price; defaults to the highest target price plus 5.
    #[arg(long, global = true)]
    pub grid_hi: Option<f64>,
    #[arg(long, global = true, default_value_t = 2)]
    pub max_menu_size: usize,
    #[arg(long, global = true, value_enum, default_value = "favor-target")]
    pub tiebreak: TieBreakName,
    #[arg(long, global = true, default_value_t = 2)]
    pub intermediaries: usize,
    /// Menu profile document to test instead of the symmetric target profile.
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    /// Worker threads for grid searches; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Run exponential enumerations past their size guard.
    #[arg(long, global = true)]
    pub force: bool,
    /// Hold intermediaries that sell nothing to distributional requirements.
    #[arg(long, global = true)]
    pub punish_inactive: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub wall_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyName {
    /// Per-unit fees equal to target profit per good.
    HatPerUnit,
    /// Per-unit fees from `--fees` (target profits if omitted).
    PerUnit,
    /// Target profits plus the target distribution requirement.
    HatDistr,
    /// Target profits; a seller must match the distribution of every rival.
    MatchEachOther,
    /// Target profits; every good must be sold.
    FullLine,
    /// Maximal-price profits plus distribution and total-mass requirements.
    Monopoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakName {
    FavorTarget,
    LowestIndex,
    SplitUniform,
    /// Any tie-break selection that makes a deviation pay.
    Adversarial,
    /// Any tie-break selection that pulls agents off their targets.
    AdversarialAnti,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate an economy document.
    Validate,
    #[command(subcommand)]
    Check(CheckKind),
    /// Prices implementing the target consumption rule.
    Transfers {
        #[arg(long, value_enum, default_value = "maximal")]
        mode: ModeName,
        #[arg(long, default_value_t = 0.0)]
        anchor_utility: f64,
        /// Type whose utility is pinned; defaults to the lowest-utility type.
        #[arg(long)]
        anchor: Option<String>,
    },
    #[command(subcommand)]
    Policy(PolicyAction),
    #[command(subcommand)]
    Verify(VerifyKind),
    /// Search the price grid for a profitable unilateral deviation.
    FindDeviation,
    /// Build the swap equilibrium on the first indifference cycle.
    BadEquilibrium,
    /// All two-intermediary equilibria on the price grid.
    EnumerateEquilibria {
        /// Equilibria listed in the report; the summary covers all of them.
        #[arg(long, default_value_t = 50)]
        show: usize,
    },
    /// Monopoly with maximal-price fees and rebates on a discretized screening model.
    Monopoly {
        /// Number of types when no --economy is given.
        #[arg(long, default_value_t = 50)]
        types: usize,
        /// Rebate type by type instead of uniformly.
        #[arg(long)]
        personalized: bool,
        /// Price step of the local search around the maximal prices.
        #[arg(long, default_value_t = 0.05)]
        price_step: f64,
        #[arg(long, default_value_t = 1)]
        radius: usize,
    },
    #[command(subcommand)]
    Demo(DemoKind),
}

#[derive(Debug, Subcommand)]
enum CheckKind {
    Ic,
    Ir,
    Cmon,
    Du,
    Indifference,
}

#[derive(Debug, Subcommand)]
enum PolicyAction {
    /// Fees and on-path profits of the selected policy.
    Eval,
}

#[derive(Debug, Subcommand)]
enum VerifyKind {
    Partial,
    Full,
}

#[derive(Debug, Subcommand)]
enum DemoKind {
    CarSales {
        /// Use type-dependent costs.
        #[arg(long)]
        interdependent: bool,
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
        /// Print the economy document instead of a report.
        #[arg(long)]
        emit: bool,
    },
    Insurance {
        #[arg(long)]
        emit: bool,
    },
    Taxation {
        #[arg(long, value_enum, default_value = "effective-output")]
        technology: TechnologyName,
        #[arg(long)]
        emit: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Maximal,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TechnologyName {
    EffectiveOutput,
    LaborHours,
}

/// Either a report or a raw document to print.
pub enum Output {
    Report(Report),
    Document(String),
}

fn dispatch(cmd: &Command, opts: &Options) -> anyhow::Result<Output> {
    use commands as c;
    let report = match cmd {
        Command::Validate => c::validate(opts)?,
        Command::Check(k) => match k {
            CheckKind::Ic => c::check_ic(opts, false)?,
            CheckKind::Ir => c::check_ic(opts, true)?,
            CheckKind::Cmon => c::check_cmon(opts)?,
            CheckKind::Du => c::check_du(opts)?,
            CheckKind::Indifference => c::check_indifference(opts)?,
        },
        Command::Transfers { mode, anchor_utility, anchor } => c::transfers(opts, *mode, *anchor_utility, anchor.as_deref())?,
        Command::Policy(PolicyAction::Eval) => c::policy_eval(opts)?,
        Command::Verify(VerifyKind::Partial) => c::verify_partial(opts)?,
        Command::Verify(VerifyKind::Full) => c::verify_full(opts)?,
        Command::FindDeviation => c::find_deviation(opts)?,
        Command::BadEquilibrium => c::bad_equilibrium(opts)?,
        Command::EnumerateEquilibria { show } => c::enumerate(opts, *show)?,
        Command::Monopoly { types, personalized, price_step, radius } => {
            c::monopoly(opts, *types, *personalized, *price_step, *radius)?
        }
        Command::Demo(d) => match d {
            DemoKind::CarSales { interdependent, masses, emit } => {
                return c::demo_car_sales(opts, *interdependent, masses.as_deref(), *emit)
            }
            DemoKind::Insurance { emit } => return c::demo_insurance(opts, *emit),
            DemoKind::Taxation { technology, emit } => return c::demo_taxation(opts, *technology, *emit),
        },
    };
    Ok(Output::Report(report))
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate => "validate",
        Command::Check(CheckKind::Ic) => "check ic",
        Command::Check(CheckKind::Ir) => "check ir",
        Command::Check(CheckKind::Cmon) => "check cmon",
        Command::Check(CheckKind::Du) => "check du",
        Command::Check(CheckKind::Indifference) => "check indifference",
        Command::Transfers { .. } => "transfers",
        Command::Policy(_) => "policy eval",
        Command::Verify(VerifyKind::Partial) => "verify partial",
        Command::Verify(VerifyKind::Full) => "verify full",
        Command::FindDeviation => "find-deviation",
        Command::BadEquilibrium => "bad-equilibrium",
        Command::EnumerateEquilibria { .. } => "enumerate-equilibria",
        Command::Monopoly { .. } => "monopoly",
        Command::Demo(DemoKind::CarSales { .. }) => "demo car-sales",
        Command::Demo(DemoKind::Insurance { .. }) => "demo insurance",
        Command::Demo(DemoKind::Taxation { .. }) => "demo taxation",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = dispatch(&cli.command, &cli.opts);
    let elapsed = start.elapsed().as_millis();
    match result {
        Ok(Output::Document(doc)) => {
            println!("{doc}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(mut report)) => {
            if cli.opts.wall_time {
                report.timing = Some(elapsed);
            }
            if cli.opts.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            ExitCode::from(report.verdict.exit_code())
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            if cli.opts.json {
                let report = Report::new(command_name(&cli.command), Verdict::Error).diagnostic(format!("{err:#}"));
                println!("{}", report.to_json());
            }
            ExitCode::from(Verdict::Error.exit_code())
        }
    }
}
