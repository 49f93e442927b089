//! `projrate`: scenario files in, verified numbers and convergence traces out.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use projrate::experiment::{
    analyze_scenario, generate_random, generate_two_subspace, read_scenario, render_report,
    run_scenario, run_suite, with_all_checks, Format, Report, Scenario, Starts, SuiteConfig,
};

#[derive(Parser)]
#[command(name = "projrate", version, about = "Convergence rates of cyclic and simultaneous projections onto subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Friedrichs numbers, rates and error-operator norms; no trajectories.
    Analyze(ScenarioArgs),
    /// Iterate every start and run the scenario's checks.
    Run(ScenarioArgs),
    /// Full identity suite, on one scenario or on seeded random instances.
    Verify(VerifyArgs),
    /// Write a scenario file with prescribed geometry.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time in the report (makes output differ between runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Override the seed of random starts.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of iterations.
    #[arg(long)]
    kmax: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify this scenario with every applicable check; without it the
    /// random-instance suite runs.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    kmax: Option<usize>,
    /// Number of random instances in the suite.
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Two subspaces with a planted Friedrichs angle.
    TwoSubspace {
        /// Angle in degrees, in (0, 90].
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: usize,
        /// Dimension of the common part.
        #[arg(long, default_value_t = 0)]
        shared: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random subspaces of given dimensions.
    Random {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n: usize,
        /// Comma-separated dimensions, one per subspace.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

/// Exit statuses: checks passed, a check failed, bad input.
const PASS: u8 = 0;
const CHECK_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

fn dispatch(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Analyze(args) => scenario_command(args, false),
        Command::Run(args) => scenario_command(args, true),
        Command::Verify(args) => verify(args),
        Command::Generate(g) => generate(g),
    }
}

fn load(path: &Path, seed: Option<u64>, kmax: Option<usize>) -> Result<Scenario, Failure> {
    let mut s = read_scenario(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        match &mut s.starts {
            Starts::Random { seed: old, .. } => *old = seed,
            Starts::Explicit(_) => {
                return Err(Failure("--seed applies only to scenarios with random starts".into()))
            }
        }
    }
    if let Some(k) = kmax {
        s.k_max = k;
    }
    s.validate()?;
    Ok(s)
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn finish_report(mut rep: Report, started: Instant, output: &OutputArgs) -> Result<u8, Failure> {
    if output.timing {
        rep.metadata.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    }
    write_output(&render_report(&rep, output.format)?, output.out.as_deref())?;
    if let Some(err) = &rep.error {
        eprintln!("error: {err}");
        return Ok(INPUT_ERROR);
    }
    let failed = rep.check_outcomes.iter().filter(|c| !c.passed).count();
    eprintln!(
        "{}: {} checks, {failed} failed",
        rep.scenario_name,
        rep.check_outcomes.len()
    );
    for c in rep.check_outcomes.iter().filter(|c| !c.passed) {
        eprintln!("  FAIL {}/{}: {}", c.check, c.property, c.detail);
    }
    Ok(if failed == 0 { PASS } else { CHECK_FAILED })
}

fn scenario_command(args: ScenarioArgs, run: bool) -> Result<u8, Failure> {
    let started = Instant::now();
    let s = load(&args.scenario, args.seed, args.kmax)?;
    let rep = if run {
        run_scenario(&s)?
    } else {
        analyze_scenario(&s)?
    };
    finish_report(rep, started, &args.output)
}

fn verify(args: VerifyArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    if let Some(path) = &args.scenario {
        let s = with_all_checks(&load(path, args.seed, args.kmax)?);
        return finish_report(run_scenario(&s)?, started, &args.output);
    }
    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        seed: args.seed.unwrap_or(defaults.seed),
        k_max: args.kmax.unwrap_or(defaults.k_max),
        instances: args.instances,
        ..defaults
    };
    let mut rep = run_suite(&cfg)?;
    if args.output.timing {
        rep.wall_time_seconds = Some(started.elapsed().as_secs_f64());
    }
    let bytes = match args.output.format {
        Format::Json => rep.to_json()?,
        Format::Csv => rep.to_csv()?,
    };
    write_output(&bytes, args.output.out.as_deref())?;
    eprintln!(
        "suite seed {}: {} instances, {} checks, {} failed",
        cfg.seed,
        rep.instances.len(),
        rep.total_checks,
        rep.failed_checks
    );
    for inst in &rep.instances {
        for c in &inst.failures {
            eprintln!("  FAIL instance {} {}/{}: {}", inst.index, c.check, c.property, c.detail);
        }
    }
    Ok(if rep.all_passed() { PASS } else { CHECK_FAILED })
}

fn generate(g: GenerateCommand) -> Result<u8, Failure> {
    let (scenario, out) = match g {
        GenerateCommand::TwoSubspace {
            theta,
            n,
            shared,
            seed,
            out,
        } => (generate_two_subspace(theta, n, shared, seed)?, out),
        GenerateCommand::Random {
            r,
            n,
            dims,
            seed,
            out,
        } => (generate_random(r, n, &dims, seed)?, out),
    };
    write_output(scenario.to_text().as_bytes(), out.as_deref())?;
    Ok(PASS)
}
