mod commands;
mod experiment;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use energia_core::energy::Mode;
use energia_core::kp::KpMode;
use energia_core::Error;

use report::Report;

#[derive(Parser, Debug)]
#[command(name = "energia", version, about = "Exact sumset, energy and decomposition experiments")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Refuse brute-force enumerations of more tuples than this.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    guard_max_tuples: u64,
    /// Also write the stage trace of `kp`, `decompose`, `constants thrt` or
    /// `experiment ap-gp-mix` to this CSV file.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Add the wall time to the report (it is then no longer reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    #[value(alias = "additive")]
    Add,
    #[value(alias = "multiplicative")]
    Mul,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Add => Mode::Additive,
            ModeArg::Mul => Mode::Multiplicative,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KpModeArg {
    Paper,
    Calibrated,
}

impl From<KpModeArg> for KpMode {
    fn from(m: KpModeArg) -> KpMode {
        match m {
            KpModeArg::Paper => KpMode::Paper,
            KpModeArg::Calibrated => KpMode::Calibrated,
        }
    }
}

#[derive(Args, Debug)]
struct InputArg {
    /// Integers, whitespace-separated or as a JSON array; `-` or nothing
    /// reads standard input.
    input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// `E_s` or `M_s` of a set.
    Energy {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 2)]
        s: u32,
        #[arg(long, value_enum, default_value = "add")]
        mode: ModeArg,
        /// Cross-check against tuple enumeration.
        #[arg(long)]
        oracle: bool,
    },
    /// `mA − nA`, or `A^(m)/A^(n)` multiplicatively.
    Sumset {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, value_enum, default_value = "add")]
        mode: ModeArg,
    },
    /// Runs inequality suites on seeded random cases.
    Check {
        /// A suite name or `all`.
        #[arg(long, value_parser = commands::parse_suites)]
        suite: commands::Suites,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
    /// The structured-subset pipeline.
    Kp {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 4)]
        s: u32,
        #[arg(long, default_value = "0.05", value_parser = commands::parse_rational)]
        delta: rug::Rational,
        #[arg(long, value_enum, default_value = "calibrated")]
        mode: KpModeArg,
        /// Run on sums or on products.
        #[arg(long, value_enum, default_value = "add")]
        op: ModeArg,
        /// `m,n` pairs for the iterated-sumset bounds on `A'`, e.g. `2,1`.
        #[arg(long = "verify", value_parser = commands::parse_pair)]
        verify: Vec<(u32, u32)>,
        /// Also check `|mA' − nA'| ≤ c·|A'|` for this `c`.
        #[arg(long, value_parser = commands::parse_rational)]
        practical: Option<rug::Rational>,
    },
    /// Partitions a set into an additively and a multiplicatively small part.
    Decompose(commands::DecomposeArgs),
    /// Explicit constants and exponent recursions.
    Constants {
        #[command(subcommand)]
        which: commands::ConstantsCmd,
    },
    /// Prints a generated set as a JSON array.
    Gen {
        #[command(subcommand)]
        kind: commands::GenCmd,
    },
    /// Bundled experiments with their expected properties asserted.
    Experiment {
        #[command(subcommand)]
        which: experiment::ExperimentCmd,
    },
}

/// Failures and their exit codes.
pub enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Lib(e) if e.is_guard() => 3,
            // invalid parameter values are usage errors
            Failure::Lib(Error::BadParams(_) | Error::BadArity(_) | Error::ZeroArity) => 2,
            _ => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

pub struct Ctx {
    pub seed: u64,
    pub guard: u64,
    pub precision: u32,
    pub csv: Option<PathBuf>,
}

fn precision() -> Result<u32, Failure> {
    match std::env::var("ENERGIA_PRECISION_BITS") {
        Err(_) => Ok(256),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(p) if (64..=1 << 16).contains(&p) => Ok(p),
            _ => Err(Failure::Usage(format!("ENERGIA_PRECISION_BITS must be an integer in [64, 65536], got {v:?}"))),
        },
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<Option<Report>, Failure> {
    let ctx = Ctx { seed: cli.seed, guard: cli.guard_max_tuples, precision: precision()?, csv: cli.csv };
    let mut report = Report::new(argv, ctx.seed, ctx.precision);
    let csv_ok = matches!(
        cli.command,
        Command::Kp { .. }
            | Command::Decompose(_)
            | Command::Constants { which: commands::ConstantsCmd::Thrt { .. } }
            | Command::Experiment { which: experiment::ExperimentCmd::ApGpMix { .. } }
    );
    if ctx.csv.is_some() && !csv_ok {
        return Err(Failure::Usage("--csv is only available where a stage trace exists".into()));
    }
    match cli.command {
        Command::Energy { input, s, mode, oracle } => {
            commands::energy(&ctx, &mut report, input.input.as_deref(), s, mode.into(), oracle)?
        }
        Command::Sumset { input, m, n, mode } => {
            commands::sumset(&mut report, input.input.as_deref(), m, n, mode.into())?
        }
        Command::Check { suite, cases } => commands::check(&ctx, &mut report, &suite, cases)?,
        Command::Kp { input, s, delta, mode, op, verify, practical } => {
            let p = energia_core::kp::KpParams::new(s, delta, mode.into()).with_op(op.into());
            commands::kp(&ctx, &mut report, input.input.as_deref(), &p, &verify, practical.as_ref())?
        }
        Command::Decompose(args) => commands::decompose(&ctx, &mut report, &args)?,
        Command::Constants { which } => commands::constants(&ctx, &mut report, &which)?,
        Command::Gen { kind } => {
            let a = commands::generate(&ctx, &kind)?;
            emit(&input::render_set(&a).to_string());
            return Ok(None);
        }
        Command::Experiment { which } => experiment::run(&ctx, &mut report, &which)?,
    }
    Ok(Some(report))
}

/// Writes one line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let timing = cli.timing;
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(cli, argv) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(mut report)) => {
            if timing {
                report.wall_time = Some(start.elapsed());
            }
            emit(&report.to_json().to_string());
            if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
