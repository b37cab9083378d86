use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsedep::calibration::{run_test, CalibrationMethod, CalibrationPlan, Statistic, TestKind};
use sparsedep::model::{
    derive_params, sample_gmcm, sample_gmm, MarginalTransform, PairedSample, Regime, RegimeSpec,
};
use sparsedep::parametric::LrtParams;
use sparsedep::power::{run_experiment, summarize, theoretical_boundary, ExperimentConfig, Manifest};
use sparsedep::rng::{entropy_seed, stream};

#[derive(Parser)]
#[command(name = "sparsedep", version, about = "Tests for sparse dependence in paired samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from the mixture model and write it as CSV.
    Generate(GenerateArgs),
    /// Run one test on a CSV sample and print the outcome as JSON.
    Test(TestArgs),
    /// Run a power study described by a JSON config.
    Power(PowerArgs),
    /// Print the theoretical detection boundary for a test.
    Boundary(BoundaryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gmm,
    Gmcm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Full,
    Desk,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    regime: Regime,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    transform_x: Option<MarginalTransform>,
    #[arg(long)]
    transform_y: Option<MarginalTransform>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    test: TestKind,
    /// Defaults to the test's usual calibration.
    #[arg(long)]
    calibration: Option<CalibrationMethod>,
    /// Resampling count; defaults to the chosen profile's count for the test.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_enum, default_value = "full")]
    profile: Profile,
    #[arg(long)]
    seed: Option<u64>,
    /// Mixture weight, required by the likelihood ratio test.
    #[arg(long)]
    eps: Option<f64>,
    /// Contamination correlation, required by the likelihood ratio test.
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Divide n and resampling counts by ten.
    #[arg(long)]
    desk_scale: bool,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    regime: Regime,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    test: TestKind,
}

/// Bad input (exit 1) versus a failure while computing (exit 2).
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Test(args) => test(args),
        Command::Power(args) => power(args),
        Command::Boundary(args) => {
            println!("{}", theoretical_boundary(args.regime, args.beta, args.test));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SPARSEDEP_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("SPARSEDEP_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let spec = RegimeSpec::new(args.regime, args.beta, args.gamma, args.n).map_err(usage)?;
    let params = derive_params(&spec).map_err(usage)?;
    let hx = args.transform_x.unwrap_or_default();
    let hy = args.transform_y.unwrap_or_default();
    if matches!(args.model, Model::Gmm) && !(hx.is_identity() && hy.is_identity()) {
        return Err(usage(anyhow!("--transform-x/--transform-y require --model gmcm")));
    }
    let seed = args.seed.unwrap_or_else(entropy_seed);
    let mut rng = stream(seed, &[]);
    let n = args.n as usize;
    let sample = match args.model {
        Model::Gmm => sample_gmm(&params, n, &mut rng),
        Model::Gmcm => sample_gmcm(&params, n, &hx, &hy, &mut rng),
    }
    .map_err(runtime)?;
    let file = File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))
        .map_err(runtime)?;
    sample.write_csv(BufWriter::new(file), true).map_err(runtime)?;
    println!("seed {seed}");
    println!("eps {:?}", params.eps());
    println!("rho {:?}", params.rho());
    println!("one_minus_rho {:?}", params.one_minus_rho());
    Ok(())
}

fn test(args: TestArgs) -> Result<(), Failure> {
    let lrt = match (args.test, args.eps, args.rho) {
        (TestKind::Lrt, Some(eps), Some(rho)) => Some(LrtParams::new(eps, rho).map_err(usage)?),
        (TestKind::Lrt, _, _) => return Err(usage(anyhow!("the lrt test requires --eps and --rho"))),
        _ => None,
    };
    let statistic = Statistic::new(args.test, lrt).map_err(usage)?;
    let method = args.calibration.unwrap_or_else(|| args.test.default_method());
    if !args.test.supports(method) {
        return Err(usage(anyhow!("{} does not support {} calibration", args.test, method.as_str())));
    }
    let reps = args.reps.unwrap_or(match args.profile {
        Profile::Full => args.test.reference_reps(),
        Profile::Desk => args.test.desk_reps(),
    });
    let seed = args.seed.unwrap_or_else(entropy_seed);
    let file = File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))
        .map_err(usage)?;
    let sample = PairedSample::read_csv(BufReader::new(file))
        .with_context(|| format!("cannot read {}", args.input.display()))
        .map_err(usage)?;
    let plan = CalibrationPlan::new(method, reps, seed);
    let outcome = run_test(sample.view(), &statistic, &plan).map_err(runtime)?;
    println!("{}", outcome.to_json().map_err(runtime)?);
    Ok(())
}

fn power(args: PowerArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))
        .map_err(usage)?;
    let mut config = ExperimentConfig::from_json(&text)
        .with_context(|| format!("invalid config {}", args.config.display()))
        .map_err(usage)?;
    if args.desk_scale {
        config = config.desk_scaled();
        config
            .validate()
            .context("config is invalid after desk scaling")
            .map_err(usage)?;
    }
    println!("seed {}", config.master_seed);
    let result = run_experiment(&config).map_err(runtime)?;
    eprintln!("finished in {:.1} s", result.elapsed_ms as f64 / 1000.0);

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))
        .map_err(runtime)?;
    let write = |name: &str, contents: &str| -> Result<(), Failure> {
        let path = args.out_dir.join(name);
        let mut f = File::create(&path)
            .with_context(|| format!("cannot create {}", path.display()))
            .map_err(runtime)?;
        f.write_all(contents.as_bytes()).map_err(runtime)
    };
    let manifest = serde_json::to_string_pretty(&Manifest::new(&config, &result)).map_err(runtime)?;
    write("manifest.json", &manifest)?;
    if result.curves.iter().any(|c| !c.points.is_empty()) {
        let summary = summarize(&config, &result.curves).map_err(runtime)?;
        write("results.csv", &summary.csv)?;
        write("report.txt", &summary.report)?;
        print!("{}", summary.report);
    }
    if !result.failures.is_empty() {
        for f in &result.failures {
            eprintln!("failed: {}", f.message);
        }
        return Err(runtime(anyhow!("{} sweep point(s) failed", result.failures.len())));
    }
    Ok(())
}
