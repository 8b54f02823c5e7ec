use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pathint_core::cli_io::runner::{RunEntry, RunStatus};
use pathint_core::cli_io::{run, validate, RunConfig, ScenarioSource, SeedRange, Suite};
use pathint_core::gaussian::control_single;
use pathint_core::pathint_mc::{
    mc_control, quadratic_kernel_log_z, DiffusionSpec, EndKernel, McProblem,
};
use pathint_core::{ControlParams, DriftSpec, PotentialSpec, TargetSet};

#[derive(Parser)]
#[command(name = "pathint", version, about = "Path-integral control of cooperating agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one seeded run.
    Simulate {
        #[command(flatten)]
        common: RunArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate a range of seeds, e.g. `--seeds 0..100`.
    Sweep {
        #[command(flatten)]
        common: RunArgs,
        #[arg(long)]
        seeds: SeedRange,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run self-checks: gradient, oracle, montecarlo or all.
    Validate {
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Monte-Carlo estimate of log Z and the control for one agent and target.
    McCheck(McArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in name (firemen-2x2, firemen-6x3, holiday-42) or TOML file.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write an SVG plot per run.
    #[arg(long)]
    plots: bool,
    /// Add posterior columns p_a_s to the trajectory CSV.
    #[arg(long)]
    record_marginals: bool,
}

#[derive(Args)]
struct McArgs {
    /// Start position, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    x: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Target position, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    target: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    r: f64,
    /// End-cost stiffness of the quadratic kernel.
    #[arg(long, default_value_t = 10.0)]
    alpha: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
    /// Constant drift, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    drift: Option<Vec<f64>>,
    /// Constant potential.
    #[arg(long, default_value_t = 0.0)]
    potential: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Finite-difference step for the control.
    #[arg(long, default_value_t = 1e-2)]
    h: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn print_run(entry: &RunEntry) {
    match &entry.status {
        RunStatus::Ok => {
            let fin = entry
                .summary
                .as_ref()
                .map(|s| format!(" counts {:?}", s.counts))
                .unwrap_or_default();
            println!(
                "seed {}: ok, {} steps,{fin} -> {}",
                entry.seed,
                entry.steps,
                entry.trajectory_csv.display()
            );
        }
        RunStatus::Failed(e) => println!("seed {}: failed after {} steps: {e}", entry.seed, entry.steps),
    }
}

fn run_command(common: RunArgs, seeds: SeedRange, jobs: Option<usize>) -> Result<ExitCode> {
    let config = RunConfig {
        scenario: ScenarioSource::from_arg(&common.scenario),
        seeds,
        out_dir: common.out,
        plots: common.plots,
        record_marginals: common.record_marginals,
        jobs,
    };
    let report = run(&config).with_context(|| format!("running {}", config.scenario))?;
    for entry in &report.runs {
        print_run(entry);
    }
    println!("summary -> {}", report.summary_csv.display());
    if report.failures() > 0 {
        eprintln!("{} of {} runs failed", report.failures(), report.runs.len());
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn mc_check(args: McArgs) -> Result<ExitCode> {
    if args.x.len() != args.target.len() {
        bail!("--x has {} coordinates but --target has {}", args.x.len(), args.target.len());
    }
    let params = ControlParams::new(args.nu, args.r, args.alpha, 0.01, args.horizon)?;
    let drift = match &args.drift {
        Some(value) if value.len() != args.x.len() => bail!("--drift must match the dimension of --x"),
        Some(value) => DriftSpec::Constant { value: value.clone() },
        None => DriftSpec::Zero,
    };
    let potential = PotentialSpec::Constant {
        value: args.potential,
    };
    let targets = TargetSet::new(vec![args.target.clone()])?;
    let problem = McProblem {
        spec: DiffusionSpec::with_default_step(
            &drift,
            &potential,
            params.nu(),
            params.lambda(),
            args.t,
            args.horizon,
        )?,
        horizon: args.horizon,
        kernel: EndKernel::Quadratic { alpha: args.alpha },
        targets: &targets,
        log_weights: &[0.0],
    };
    let est = problem.log_z(&args.x, args.t, args.samples, args.seed)?;
    println!(
        "log Z: estimate {} se {} n {} survivors {}",
        est.log_z, est.std_error, est.n_samples, est.survivors
    );
    let u = mc_control(&problem, &args.x, args.t, args.h, args.samples, args.seed)?;
    println!("control: estimate {:?} se {:?} n {}", u.control, u.std_error, args.samples);
    if args.drift.is_none() && args.potential == 0.0 {
        let exact = quadratic_kernel_log_z(
            &args.x,
            args.t,
            &args.target,
            params.nu(),
            params.lambda(),
            args.alpha,
            args.horizon,
        );
        println!(
            "closed form: log Z {exact}, control {:?}",
            control_single(&args.x, args.t, &args.target, &params)?
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, seed } => run_command(common, SeedRange::single(seed), None),
        Command::Sweep {
            common,
            seeds,
            jobs,
        } => run_command(common, seeds, jobs),
        Command::Validate { suite, seed, report } => (|| {
            let r = validate(suite, seed)?;
            let json = serde_json::to_string_pretty(&r)?;
            println!("{json}");
            if let Some(path) = report {
                std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        })(),
        Command::McCheck(args) => mc_check(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
