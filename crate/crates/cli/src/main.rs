use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coreset_iht::ModelKind;
use coreset_iht_cli::{
    build, evaluate, gen_data, read_json, run_sweep, run_theory_check, write_json, BuildOutput, ExperimentConfig,
    ExperimentKind, Overrides, SolverChoice, TheoryConfig, Weighting,
};

#[derive(Parser)]
#[command(name = "coreset-iht", version, about = "Sparse Bayesian coresets by accelerated iterative hard thresholding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the dataset of one trial as CSV.
    GenData {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct one coreset and write its weights and trace as JSON.
    Build {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        solver: SolverArg,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every solver, sparsity and trial of a configuration.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Check the iterate-distance bound on small exhaustively certified instances.
    TheoryCheck(TheoryArgs),
    /// KL divergences and MAP distance of a coreset written by `build`.
    Evaluate {
        /// Output of `build`.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ExperimentArg {
    Gaussian,
    RadialBasis,
    Logistic,
    Poisson,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SolverArg {
    Vanilla,
    Aiht,
    Aiht2,
    AihtBatched,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindArg {
    GaussianMean,
    LinearRegression,
    Logistic,
    Poisson,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum WeightingArg {
    Laplace,
    Exact,
}

impl From<SolverArg> for SolverChoice {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Vanilla => SolverChoice::Vanilla,
            SolverArg::Aiht => SolverChoice::Aiht,
            SolverArg::Aiht2 => SolverChoice::Aiht2,
            SolverArg::AihtBatched => SolverChoice::AihtBatched,
            SolverArg::Uniform => SolverChoice::Uniform,
        }
    }
}

/// Configuration file plus flags that override its fields.
#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Option<ExperimentArg>,
    #[arg(long, value_enum, value_delimiter = ',')]
    solvers: Option<Vec<SolverArg>>,
    /// Comma-separated coreset sizes.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Monte Carlo sample count of the projection.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of data points of synthetic experiments.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    /// Dataset for the csv experiment.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    map_l2: bool,
    /// Do not record wall time; outputs become byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let overrides = Overrides {
            experiment: self.experiment.map(|e| match e {
                ExperimentArg::Gaussian => ExperimentKind::Gaussian,
                ExperimentArg::RadialBasis => ExperimentKind::RadialBasis,
                ExperimentArg::Logistic => ExperimentKind::Logistic,
                ExperimentArg::Poisson => ExperimentKind::Poisson,
                ExperimentArg::Csv => ExperimentKind::Csv,
            }),
            solvers: self.solvers.map(|v| v.into_iter().map(SolverChoice::from).collect()),
            ks: self.ks,
            trials: self.trials,
            samples: self.samples,
            seed: self.seed,
            n: self.n,
            dim: self.dim,
            weighting: self.weighting.map(|w| match w {
                WeightingArg::Laplace => Weighting::Laplace,
                WeightingArg::Exact => Weighting::Exact,
            }),
            map_l2: self.map_l2.then_some(true),
            timing: self.no_timing.then_some(false),
            output_dir: self.output_dir,
        };
        overrides.apply(&mut cfg);
        if let Some(path) = self.data {
            cfg.model.csv_path = Some(path);
        }
        if let Some(kind) = self.kind {
            cfg.model.csv_kind = Some(match kind {
                KindArg::GaussianMean => ModelKind::GaussianMean,
                KindArg::LinearRegression => ModelKind::LinearRegression,
                KindArg::Logistic => ModelKind::Logistic,
                KindArg::Poisson => ModelKind::Poisson,
            });
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct TheoryArgs {
    /// TOML theory configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Rows of the measurement matrix.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest number of supports enumerated per level.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl TheoryArgs {
    fn resolve(self) -> anyhow::Result<TheoryConfig> {
        let mut cfg = match &self.config {
            Some(path) => toml::from_str(&std::fs::read_to_string(path)?)?,
            None => TheoryConfig::default(),
        };
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.samples = self.samples.unwrap_or(cfg.samples);
        cfg.k = self.k.unwrap_or(cfg.k);
        cfg.instances = self.instances.unwrap_or(cfg.instances);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        cfg.budget = self.budget.unwrap_or(cfg.budget);
        cfg.output = self.out.unwrap_or(cfg.output);
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::GenData { exp, trial, out } => {
            let cfg = exp.resolve()?;
            match out {
                Some(path) => gen_data(&cfg, trial, BufWriter::new(File::create(path)?))?,
                None => gen_data(&cfg, trial, std::io::stdout().lock())?,
            }
        }
        Command::Build { exp, solver, k, trial, out } => {
            let cfg = exp.resolve()?;
            write_json(&build(&cfg, solver.into(), k, trial)?, out.as_deref())?;
        }
        Command::Sweep { exp } => {
            let cfg = exp.resolve()?;
            let report = run_sweep(&cfg)?;
            eprintln!("wrote {}", report.aggregate_path.display());
            let failures = report.failures();
            if failures > 0 {
                for r in report.records.iter().filter(|r| !r.succeeded()) {
                    eprintln!(
                        "run failed: solver {} k {} trial {}: {}",
                        r.solver.name(),
                        r.k,
                        r.trial,
                        r.error.as_deref().unwrap_or_default()
                    );
                }
                eprintln!("{failures} of {} runs failed", report.records.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::TheoryCheck(args) => {
            let cfg = args.resolve()?;
            let report = run_theory_check(&cfg)?;
            eprintln!("wrote {}", cfg.output.display());
            if !report.all_satisfied {
                eprintln!("the invariant was violated on at least one iteration");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Evaluate { weights, out } => {
            let built: BuildOutput = read_json(&weights)?;
            write_json(&evaluate(&built)?, out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
