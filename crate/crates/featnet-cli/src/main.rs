//! Command-line interface: generate synthetic datasets, fit interaction
//! matrices, run cross-validated evaluation and export PR curves.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use featnet::estimators::{
    llama_fit, naive_estimate, perceptron_fit, FitDiagnostics, LlamaConfig, NaiveSmoothing,
    NodeOrdering, Normalization, DEFAULT_FLOOR,
};
use featnet::eval::{
    cross_validate_detailed, pr_curve, EstimatorConfig, NegativeDomain as EvalNegativeDomain,
};
use featnet::io::{
    load_dataset, load_scored_pairs, save_curve, save_dataset, save_matrix, save_report,
    DatasetPaths,
};
use featnet::model::ActivationSpec;
use featnet::synthgen::{generate_one, GraphFamilySpec, IbpParams, WDistribution};
use featnet::{FeatureAssignment, FeatureGraph, InteractionMatrix};

#[derive(Parser)]
#[command(name = "featnet", version, about = "Feature-rich graph modeling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a named graph family
    Generate(GenerateArgs),
    /// Fit an interaction matrix on a dataset
    Fit(FitArgs),
    /// Cross-validated AUPR evaluation of an estimator on a dataset
    Evaluate(EvaluateArgs),
    /// Explainability of a feature set: evaluate with the online learner
    Explain(EvaluateArgs),
    /// Precision-recall curve of a scored-pairs file
    Curve(CurveArgs),
}

/// Synthetic graph family: activation paired with a latent-matrix law.
#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// Step activation, two-point {10, -1} matrix entries
    ChiBernoulli,
    /// Step activation, moment-matched normal entries
    ChiNormal,
    /// Sigmoid activation, two-point {10, -1} entries
    SigmoidBernoulli,
    /// Sigmoid activation, moment-matched normal entries
    SigmoidNormal,
    /// Clipped-exponential activation, two-point {1, -1} entries
    ExpBernoulli,
    /// Clipped-exponential activation, moment-matched normal entries
    ExpNormal,
}

impl Family {
    fn activation(self, theta: f64, k: f64) -> ActivationSpec {
        match self {
            Family::ChiBernoulli | Family::ChiNormal => ActivationSpec::Step { threshold: 0.0 },
            Family::SigmoidBernoulli | Family::SigmoidNormal => {
                ActivationSpec::Sigmoid { theta, k }
            }
            Family::ExpBernoulli | Family::ExpNormal => ActivationSpec::ExpClipped,
        }
    }

    fn wdist(self) -> WDistribution {
        match self {
            Family::ChiBernoulli | Family::SigmoidBernoulli => WDistribution::BernoulliTen,
            Family::ChiNormal | Family::SigmoidNormal => WDistribution::NormalMatched,
            Family::ExpBernoulli => WDistribution::BernoulliOne,
            Family::ExpNormal => WDistribution::NormalMatchedOne,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Number of nodes
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replicate index within the family
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Sigmoid center
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Sigmoid sharpness
    #[arg(long, default_value_t = 5.0)]
    k: f64,
    #[arg(long = "ibp-alpha", default_value_t = 3.0)]
    ibp_alpha: f64,
    #[arg(long = "ibp-beta", default_value_t = 0.5)]
    ibp_beta: f64,
    #[arg(long = "ibp-c", default_value_t = 0.0)]
    ibp_c: f64,
    /// Output arc list (TSV)
    #[arg(long)]
    edges: PathBuf,
    /// Output node-feature incidence (TSV)
    #[arg(long)]
    features: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Naive,
    Llama,
    Perceptron,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothingKind {
    /// Unobserved feature pairs get the floor value
    Floor,
    /// log(x + 1) in place of log(x)
    AddOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationKind {
    None,
    RowL2,
}

#[derive(Clone, Copy, ValueEnum)]
enum NegativeDomain {
    /// Non-arc pairs within the test fold
    TestInduced,
    /// Non-arc pairs anywhere in the graph
    Global,
}

impl From<NegativeDomain> for EvalNegativeDomain {
    fn from(value: NegativeDomain) -> Self {
        match value {
            NegativeDomain::TestInduced => EvalNegativeDomain::TestInduced,
            NegativeDomain::Global => EvalNegativeDomain::Global,
        }
    }
}

#[derive(Args)]
struct EstimatorArgs {
    #[arg(long, value_enum, default_value = "llama")]
    estimator: EstimatorKind,
    /// Aggressiveness cap of the online learner
    #[arg(long, default_value_t = 1.5)]
    kappa: f64,
    /// Perceptron learning rate
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "floor")]
    smoothing: SmoothingKind,
    /// Floor value for unobserved feature pairs
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    floor: f64,
    #[arg(long, value_enum, default_value = "none")]
    normalization: NormalizationKind,
    /// Mirror every update to the transposed entry (undirected graphs)
    #[arg(long, default_value_t = false)]
    symmetric: bool,
}

impl EstimatorArgs {
    fn llama_config(&self, seed: u64) -> LlamaConfig {
        LlamaConfig {
            kappa: self.kappa,
            normalization: match self.normalization {
                NormalizationKind::None => Normalization::None,
                NormalizationKind::RowL2 => Normalization::RowL2,
            },
            ordering: NodeOrdering::Random,
            seed,
            symmetric_updates: self.symmetric,
        }
    }

    fn smoothing(&self) -> NaiveSmoothing {
        match self.smoothing {
            SmoothingKind::Floor => NaiveSmoothing::Floor(self.floor),
            SmoothingKind::AddOne => NaiveSmoothing::AddOne,
        }
    }

    fn config(&self, seed: u64) -> EstimatorConfig {
        match self.estimator {
            EstimatorKind::Naive => EstimatorConfig::Naive {
                smoothing: self.smoothing(),
            },
            EstimatorKind::Llama => EstimatorConfig::Llama(self.llama_config(seed)),
            EstimatorKind::Perceptron => EstimatorConfig::Perceptron {
                lambda: self.lambda,
                ordering: NodeOrdering::Random,
            },
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output matrix file
    #[arg(long)]
    out: PathBuf,
    /// Optional fit-diagnostics JSON
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "negative-domain", value_enum, default_value = "test-induced")]
    negative_domain: NegativeDomain,
    /// Output report CSV
    #[arg(long)]
    report: Option<PathBuf>,
    /// Directory for per-fold curve CSVs (curve_fold_<i>.csv)
    #[arg(long = "curve-dir")]
    curve_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Scored-pairs TSV (src, dst, score, label)
    #[arg(long)]
    pairs: PathBuf,
    /// Output curve CSV
    #[arg(long)]
    out: PathBuf,
}

fn configure_threads() {
    if let Ok(value) = std::env::var("FEATNET_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn load(edges: &PathBuf, features: &PathBuf) -> featnet::Result<(FeatureGraph, FeatureAssignment)> {
    let ds = load_dataset(&DatasetPaths {
        edges: edges.clone(),
        features: features.clone(),
    })?;
    if ds.duplicate_arcs > 0 || ds.duplicate_incidences > 0 {
        eprintln!(
            "warning: collapsed {} duplicate arcs and {} duplicate incidences",
            ds.duplicate_arcs, ds.duplicate_incidences
        );
    }
    Ok((ds.graph, ds.features))
}

fn run_generate(args: &GenerateArgs) -> featnet::Result<()> {
    let spec = GraphFamilySpec {
        n: args.n,
        activation: args.family.activation(args.theta, args.k),
        wdist: args.family.wdist(),
        ibp: IbpParams {
            alpha: args.ibp_alpha,
            beta: args.ibp_beta,
            c: args.ibp_c,
            seed: 0,
        },
        seed: args.seed,
    };
    let (z, _w, g) = generate_one(&spec, args.replicate)?;
    save_dataset(
        &g,
        &z,
        &DatasetPaths {
            edges: args.edges.clone(),
            features: args.features.clone(),
        },
    )?;
    println!(
        "generated n={} m={} arcs={}",
        g.n(),
        z.m(),
        g.num_arcs()
    );
    Ok(())
}

fn write_diagnostics(
    path: &PathBuf,
    diag: Option<&FitDiagnostics>,
    wall_time_s: f64,
) -> featnet::Result<()> {
    let mut object = serde_json::Map::new();
    if let Some(diag) = diag {
        object.insert("mistakes".into(), diag.mistakes.into());
        object.insert("radius_sq".into(), diag.radius_sq.into());
        object.insert("examples_seen".into(), diag.examples_seen.into());
        object.insert("skipped".into(), diag.skipped.into());
    }
    object.insert("wall_time_s".into(), wall_time_s.into());
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(object)).expect("json");
    std::fs::write(path, text + "\n").map_err(|e| featnet::Error::io(path.clone(), e))
}

fn run_fit(args: &FitArgs) -> featnet::Result<()> {
    let (g, z) = load(&args.edges, &args.features)?;
    let start = Instant::now();
    let (w, diag): (InteractionMatrix, Option<FitDiagnostics>) = match args.estimator.estimator {
        EstimatorKind::Naive => (
            naive_estimate(&g, &z, args.estimator.smoothing())?,
            None,
        ),
        EstimatorKind::Llama => {
            let (w, d) = llama_fit(&g, &z, &args.estimator.llama_config(args.seed))?;
            (w, Some(d))
        }
        EstimatorKind::Perceptron => {
            let (w, d) = perceptron_fit(
                &g,
                &z,
                args.estimator.lambda,
                &NodeOrdering::Random,
                args.seed,
            )?;
            (w, Some(d))
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();
    save_matrix(&w, &args.out)?;
    if let Some(path) = &args.diagnostics {
        write_diagnostics(path, diag.as_ref(), wall_time_s)?;
    }
    Ok(())
}

fn run_evaluate(args: &EvaluateArgs, explain: bool) -> featnet::Result<()> {
    let (g, z) = load(&args.edges, &args.features)?;
    let config = if explain {
        EstimatorConfig::Llama(args.estimator.llama_config(0))
    } else {
        args.estimator.config(0)
    };
    let outcome = cross_validate_detailed(
        &g,
        &z,
        &config,
        args.folds,
        args.seed,
        args.negative_domain.into(),
    )?;
    let folds: Vec<usize> = outcome.curves.iter().map(|&(fold, _)| fold).collect();
    if let Some(path) = &args.report {
        save_report(&outcome.report, &folds, path)?;
    }
    if let Some(dir) = &args.curve_dir {
        std::fs::create_dir_all(dir).map_err(|e| featnet::Error::io(dir.clone(), e))?;
        for (fold, curve) in &outcome.curves {
            save_curve(curve, &dir.join(format!("curve_fold_{fold}.csv")))?;
        }
    }
    if explain {
        println!(
            "explainability: {:.4} \u{00b1} {:.4}",
            outcome.report.mean, outcome.report.std
        );
    } else {
        println!(
            "mean AUPR {:.4} \u{00b1} {:.4} over {} folds ({} skipped)",
            outcome.report.mean,
            outcome.report.std,
            outcome.report.per_fold_aupr.len(),
            outcome.report.skipped_folds.len()
        );
    }
    Ok(())
}

fn run_curve(args: &CurveArgs) -> featnet::Result<()> {
    let pairs = load_scored_pairs(&args.pairs)?;
    let curve = pr_curve(&pairs)?;
    save_curve(&curve, &args.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are success, everything else is usage
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Fit(args) => run_fit(args),
        Command::Evaluate(args) => run_evaluate(args, false),
        Command::Explain(args) => run_evaluate(args, true),
        Command::Curve(args) => run_curve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
