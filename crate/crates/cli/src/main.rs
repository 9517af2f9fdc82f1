use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use laguerre_core::suite::{run_suite, Suite};
use laguerre_core::sweep::{sweep_csv, ConfigFile, Mode, RunConfig, Scale, SweepSpec, SweepVariable, Units};
use laguerre_core::{
    alpha_star, cdma_lower_bound, lower_bound, optimal_users, pmf_row, sum_capacity, upper_bound, ChannelParams,
    NoiseTracking,
};
use serde_json::json;

/// `println!` that ignores a closed stdout (e.g. `| head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "laguerre",
    version,
    about = "Capacity bounds for the Laguerre photon-counting channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the output distribution for one input intensity.
    Pmf {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-9)]
        tail: f64,
        #[arg(long)]
        json: bool,
    },
    /// Lower and upper capacity bounds.
    Bounds {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
    },
    /// CDMA per-user bound, optimal alpha, sum capacity and best user count.
    Cdma {
        #[command(flatten)]
        run: RunArgs,
        /// Largest user count searched for the sum-capacity optimum.
        #[arg(long, default_value_t = 200)]
        max_users: u32,
        #[arg(long)]
        json: bool,
    },
    /// CSV curve over one parameter.
    Sweep(SweepArgs),
    /// Run the verification suites and print a residual table.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Vlc)]
    mode: ModeArg,
    #[arg(long, allow_hyphen_values = true)]
    peak: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    avg: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long)]
    users: Option<u32>,
    #[arg(long)]
    chips: Option<u32>,
    /// Track the CDMA noise with the realised average instead of the cap.
    #[arg(long)]
    realized_noise: bool,
    #[arg(long, value_enum, default_value_t = UnitsArg::Nats)]
    units: UnitsArg,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with `run` and `sweep` sections; other flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum)]
    variable: Option<VariableArg>,
    #[arg(long, allow_hyphen_values = true)]
    start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    stop: Option<f64>,
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    scale: ScaleArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Vlc,
    Cdma,
}

#[derive(ValueEnum, Clone, Copy)]
enum UnitsArg {
    Nats,
    Bits,
}

#[derive(ValueEnum, Clone, Copy)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(ValueEnum, Clone, Copy)]
enum VariableArg {
    #[value(name = "A")]
    A,
    #[value(name = "E")]
    E,
    #[value(name = "M")]
    M,
    #[value(name = "lambda")]
    Lambda,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            mode: match self.mode {
                ModeArg::Vlc => Mode::Vlc,
                ModeArg::Cdma => Mode::Cdma,
            },
            peak: self.peak,
            average: self.avg,
            lambda: self.lambda,
            users: self.users,
            chips: self.chips,
            noise: if self.realized_noise {
                NoiseTracking::Realized
            } else {
                NoiseTracking::Cap
            },
            units: match self.units {
                UnitsArg::Nats => Units::Nats,
                UnitsArg::Bits => Units::Bits,
            },
            ..RunConfig::default()
        }
    }
}

/// Failures mapped to exit codes: bad input is 2, a failed check is 1.
enum Failure {
    Usage(String),
    Verification,
}

impl From<laguerre_core::Error> for Failure {
    fn from(e: laguerre_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn pmf(x: f64, lambda: f64, tail: f64, as_json: bool) -> Result<(), Failure> {
    let row = pmf_row(x, ChannelParams::new(lambda)?, tail)?;
    if as_json {
        out!("{}", serde_json::to_string_pretty(&row).expect("row serialises"));
    } else {
        let mut text = format!(
            "# x={} lambda={} y_max={} tail_mass={}\ny,prob\n",
            row.x,
            row.lambda,
            row.y_max(),
            row.tail_mass
        );
        for (y, p) in row.probs.iter().enumerate() {
            text.push_str(&format!("{y},{p}\n"));
        }
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    Ok(())
}

fn bounds(run: &RunConfig, as_json: bool) -> Result<(), Failure> {
    let c = run.constraints()?;
    let u = run.units;
    let (lower, upper) = match run.mode {
        Mode::Vlc => (
            lower_bound(&c, ChannelParams::new(run.lambda)?)?,
            Some(upper_bound(&c)?),
        ),
        Mode::Cdma => {
            let (m, n0) = network(run)?;
            (cdma_lower_bound(&c, m, n0, run.noise)?.bound, None)
        }
    };
    if as_json {
        let v = json!({
            "units": u.suffix(),
            "lower": u.convert(lower.value),
            "regime": lower.regime.as_str(),
            "mu": lower.mu,
            "upper": upper.map(|b| u.convert(b.value)),
            "upper_asymptotic": upper.map(|b| b.asymptotic),
        });
        out!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        out!(
            "lower {} {} regime={} mu={}",
            u.convert(lower.value),
            u.suffix(),
            lower.regime.as_str(),
            fmt_opt(lower.mu)
        );
        match upper {
            Some(b) => out!(
                "upper {} {} asymptotic={}",
                u.convert(b.value),
                u.suffix(),
                b.asymptotic
            ),
            None => out!("upper - (not available for input-dependent noise)"),
        }
    }
    Ok(())
}

fn network(run: &RunConfig) -> Result<(u32, u32), Failure> {
    match (run.users, run.chips) {
        (Some(m), Some(n)) => Ok((m, n)),
        _ => Err(Failure::Usage("cdma needs --users and --chips".into())),
    }
}

fn cdma(run: &RunConfig, max_users: u32, as_json: bool) -> Result<(), Failure> {
    let c = run.constraints()?;
    let (m, n0) = network(run)?;
    let u = run.units;
    let b = cdma_lower_bound(&c, m, n0, run.noise)?;
    let alpha = if c.peak.is_some() {
        Some(alpha_star(&c, m, n0, run.noise)?)
    } else {
        None
    };
    let sum = sum_capacity(&c, m, n0, run.noise)?;
    let best = optimal_users(&c, n0, max_users, run.noise)?;
    let best_sum = sum_capacity(&c, best, n0, run.noise)?;
    if as_json {
        let v = json!({
            "units": u.suffix(),
            "users": m,
            "chips": n0,
            "per_user": u.convert(b.bound.value),
            "regime": b.bound.regime.as_str(),
            "mu": b.bound.mu,
            "alpha_star": alpha,
            "sum": u.convert(sum.value),
            "optimal_users": best,
            "optimal_sum": u.convert(best_sum.value),
        });
        out!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        out!(
            "per_user {} {} regime={} mu={}",
            u.convert(b.bound.value),
            u.suffix(),
            b.bound.regime.as_str(),
            fmt_opt(b.bound.mu)
        );
        out!("alpha_star {}", fmt_opt(alpha));
        out!("sum {} {} (M={m})", u.convert(sum.value), u.suffix());
        out!(
            "optimal_users {best} sum {} {} (searched 2..={max_users})",
            u.convert(best_sum.value),
            u.suffix()
        );
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let (run, spec, out) = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let cfg = ConfigFile::from_json(&text)?;
            let spec = cfg
                .sweep
                .ok_or_else(|| Failure::Usage("config has no sweep section".into()))?;
            let out = args.out.clone().or_else(|| cfg.run.out.clone());
            (cfg.run, spec, out)
        }
        None => {
            let (variable, start, stop) = match (args.variable, args.start, args.stop) {
                (Some(v), Some(a), Some(b)) => (v, a, b),
                _ => {
                    return Err(Failure::Usage(
                        "sweep needs --config or --variable, --start and --stop".into(),
                    ))
                }
            };
            let spec = SweepSpec {
                variable: match variable {
                    VariableArg::A => SweepVariable::A,
                    VariableArg::E => SweepVariable::E,
                    VariableArg::M => SweepVariable::M,
                    VariableArg::Lambda => SweepVariable::Lambda,
                },
                start,
                stop,
                points: args.points,
                scale: match args.scale {
                    ScaleArg::Linear => Scale::Linear,
                    ScaleArg::Log => Scale::Log,
                },
            };
            (args.run.config(), spec, args.out.clone())
        }
    };
    let csv = sweep_csv(&run, &spec)?;
    match out {
        Some(path) => fs::write(&path, csv).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
        }
    }
    Ok(())
}

fn verify(suite: &str, seed: u64, as_json: bool) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let checks = run_suite(suite, seed).map_err(|e| {
        eprintln!("error: {e}");
        Failure::Verification
    })?;
    if as_json {
        out!("{}", serde_json::to_string_pretty(&checks).expect("json"));
    } else {
        out!(
            "{:<12} {:<34} {:>14} {:>10}  status",
            "suite",
            "check",
            "value",
            "tolerance"
        );
        for c in &checks {
            out!(
                "{:<12} {:<34} {:>14.3e} {:>10.1e}  {}",
                c.suite.name(),
                c.name,
                c.value,
                c.tolerance,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
    }
    if checks.iter().all(|c| c.passed) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pmf { x, lambda, tail, json } => pmf(*x, *lambda, *tail, *json),
        Command::Bounds { run, json } => bounds(&run.config(), *json),
        Command::Cdma { run, max_users, json } => cdma(&run.config(), *max_users, *json),
        Command::Sweep(args) => sweep(args),
        Command::Verify { suite, seed, json } => verify(suite, *seed, *json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `laguerre --help` for usage");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
    }
}
