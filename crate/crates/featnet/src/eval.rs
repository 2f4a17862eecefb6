//! Cross-validated link-prediction evaluation: fold splitting, balanced test
//! sets, tie-aware precision-recall curves and their exact area.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{
    llama_fit, naive_estimate, perceptron_fit, LabeledExample, LlamaConfig, NaiveSmoothing,
    NodeOrdering,
};
use crate::features::FeatureAssignment;
use crate::graph::FeatureGraph;
use crate::matrix::InteractionMatrix;
use crate::model::score;
use crate::rng::{derive_seed, rng_stream};

/// A partition of the nodes into `k` folds of (near) equal size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<u32>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.fold_of.len()
    }

    pub fn fold_of(&self, node: u32) -> u32 {
        self.fold_of[node as usize]
    }

    /// Nodes of one fold, in increasing id order.
    pub fn nodes_in(&self, fold: u32) -> Vec<u32> {
        self.fold_of
            .iter()
            .enumerate()
            .filter(|&(_, &f)| f == fold)
            .map(|(i, _)| i as u32)
            .collect()
    }
}

/// Uniform random partition of `0..n` into `k` folds whose sizes differ by
/// at most one.
pub fn split_folds(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "fold count must satisfy 2 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng_stream(seed, 0));
    let mut fold_of = vec![0u32; n];
    for (pos, &node) in order.iter().enumerate() {
        fold_of[node as usize] = (pos % k) as u32;
    }
    Ok(FoldAssignment { k, fold_of })
}

/// A training view for one fold: the subgraph induced on non-test nodes.
///
/// Node ids are re-indexed densely; feature ids are untouched, so a matrix
/// fitted here applies directly to the full assignment. `train_nodes[new]`
/// is the original id of training node `new`.
#[derive(Debug, Clone)]
pub struct InducedTraining {
    pub graph: FeatureGraph,
    pub features: FeatureAssignment,
    pub train_nodes: Vec<u32>,
    /// Original id to training id; `None` for held-out nodes.
    pub new_id: Vec<Option<u32>>,
}

pub fn induce_training(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    folds: &FoldAssignment,
    test_fold: u32,
) -> Result<InducedTraining> {
    if (test_fold as usize) >= folds.k() {
        return Err(Error::InvalidParameter(format!(
            "test fold {test_fold} out of range for k={}",
            folds.k()
        )));
    }
    if g.n() != z.n() || g.n() != folds.n() {
        return Err(Error::InvalidParameter(format!(
            "size mismatch: graph {} nodes, features {}, folds {}",
            g.n(),
            z.n(),
            folds.n()
        )));
    }
    let mut train_nodes = Vec::new();
    let mut new_id = vec![None; g.n()];
    for node in 0..g.n() as u32 {
        if folds.fold_of(node) != test_fold {
            new_id[node as usize] = Some(train_nodes.len() as u32);
            train_nodes.push(node);
        }
    }
    let adjacency: Vec<Vec<u32>> = train_nodes
        .iter()
        .map(|&old_src| {
            g.out(old_src)
                .iter()
                .filter_map(|&old_dst| new_id[old_dst as usize])
                .collect()
        })
        .collect();
    let graph = FeatureGraph::from_sorted_adjacency(adjacency);
    let rows: Vec<Vec<u32>> = train_nodes
        .iter()
        .map(|&old| z.features_of(old).to_vec())
        .collect();
    let features = FeatureAssignment::from_rows(z.m(), rows);
    Ok(InducedTraining {
        graph,
        features,
        train_nodes,
        new_id,
    })
}

/// Where test negatives are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeDomain {
    /// Non-arc pairs within the test fold.
    #[default]
    TestInduced,
    /// Non-arc pairs anywhere in the graph.
    Global,
}

/// Balanced test set for one fold: the arcs internal to the test fold as
/// positives and as many distinct non-arc pairs as negatives. Node ids are
/// the original (full-graph) ids.
pub fn build_test_pairs(
    g: &FeatureGraph,
    folds: &FoldAssignment,
    test_fold: u32,
    negative_domain: NegativeDomain,
    seed: u64,
) -> Result<Vec<LabeledExample>> {
    if (test_fold as usize) >= folds.k() {
        return Err(Error::InvalidParameter(format!(
            "test fold {test_fold} out of range for k={}",
            folds.k()
        )));
    }
    let test_nodes = folds.nodes_in(test_fold);
    let mut examples: Vec<LabeledExample> = Vec::new();
    for &src in &test_nodes {
        for &dst in g.out(src) {
            if folds.fold_of(dst) == test_fold {
                examples.push(LabeledExample::new(src, dst, true));
            }
        }
    }
    let positives = examples.len();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let (pool, pool_pairs, pool_arcs): (&[u32], u64, u64) = match negative_domain {
        NegativeDomain::TestInduced => {
            let t = test_nodes.len() as u64;
            (&test_nodes, t * t, positives as u64)
        }
        NegativeDomain::Global => (&[], (g.n() as u64) * (g.n() as u64), g.num_arcs()),
    };
    let available = pool_pairs - pool_arcs;
    if available < positives as u64 {
        return Err(Error::InfeasibleSampling {
            needed: positives as u64,
            available,
        });
    }
    let mut rng = rng_stream(seed, 0);
    let mut chosen: HashSet<(u32, u32)> = HashSet::with_capacity(positives);
    while chosen.len() < positives {
        let (src, dst) = if pool.is_empty() {
            (
                rng.random_range(0..g.n() as u32),
                rng.random_range(0..g.n() as u32),
            )
        } else {
            (
                pool[rng.random_range(0..pool.len())],
                pool[rng.random_range(0..pool.len())],
            )
        };
        if g.has_arc(src, dst) || !chosen.insert((src, dst)) {
            continue;
        }
        examples.push(LabeledExample::new(src, dst, false));
    }
    Ok(examples)
}

/// A test pair with its model score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub src: u32,
    pub dst: u32,
    pub score: f64,
    pub label: i8,
}

/// Scores test pairs with the raw bilinear score (the activation argument).
pub fn score_pairs(
    examples: &[LabeledExample],
    z: &FeatureAssignment,
    w: &InteractionMatrix,
) -> Result<Vec<ScoredPair>> {
    examples
        .iter()
        .map(|ex| {
            let s = score(z.features_of(ex.src), z.features_of(ex.dst), w)?;
            Ok(ScoredPair {
                src: ex.src,
                dst: ex.dst,
                score: s,
                label: ex.label,
            })
        })
        .collect()
}

/// A tie-aware precision-recall curve.
///
/// Equal-score runs form tie blocks whose true and false positives accrue
/// linearly, the expected behavior under a random intra-block order. Curve
/// points are emitted at block boundaries plus a 100-point recall grid for
/// plotting; [`aupr`] integrates the blocks exactly, not the plotted points.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    pub points: Vec<(f64, f64)>,
    pub positives: u64,
    pub negatives: u64,
    blocks: Vec<(u64, u64)>,
}

impl PrCurve {
    /// `(positives, negatives)` per tie block in descending score order.
    pub fn blocks(&self) -> &[(u64, u64)] {
        &self.blocks
    }
}

const PLOT_GRID: u64 = 100;

pub fn pr_curve(scored: &[ScoredPair]) -> Result<PrCurve> {
    for pair in scored {
        if !pair.score.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite score {} for pair ({}, {})",
                pair.score, pair.src, pair.dst
            )));
        }
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].score.total_cmp(&scored[a].score));
    let mut blocks: Vec<(u64, u64)> = Vec::new();
    let mut idx = 0;
    while idx < order.len() {
        let s = scored[order[idx]].score;
        let mut p = 0u64;
        let mut f = 0u64;
        while idx < order.len() && scored[order[idx]].score == s {
            if scored[order[idx]].label > 0 {
                p += 1;
            } else {
                f += 1;
            }
            idx += 1;
        }
        blocks.push((p, f));
    }
    let positives: u64 = blocks.iter().map(|&(p, _)| p).sum();
    let negatives: u64 = blocks.iter().map(|&(_, f)| f).sum();
    if positives == 0 {
        return Err(Error::NoPositives);
    }

    let total_p = positives as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    {
        let (p, f) = blocks[0];
        points.push((0.0, p as f64 / (p + f) as f64));
    }
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut grid_next = 1u64; // next recall grid index, out of PLOT_GRID
    for &(p, f) in &blocks {
        if p > 0 {
            // grid points strictly inside this block
            while grid_next < PLOT_GRID && grid_next * positives < (tp + p) * PLOT_GRID {
                let r = grid_next as f64 / PLOT_GRID as f64;
                let t = (r * total_p - tp as f64) / p as f64;
                if t > 0.0 {
                    let num = tp as f64 + p as f64 * t;
                    let den = (tp + fp) as f64 + (p + f) as f64 * t;
                    points.push((r, num / den));
                }
                grid_next += 1;
            }
        }
        tp += p;
        fp += f;
        points.push((tp as f64 / total_p, tp as f64 / (tp + fp) as f64));
        while grid_next * positives <= tp * PLOT_GRID {
            grid_next += 1; // grid points landing exactly on a boundary
        }
    }
    points.dedup();
    Ok(PrCurve {
        points,
        positives,
        negatives,
        blocks,
    })
}

/// Exact area under the precision-recall curve with tie blocks interpolated
/// linearly in TP/FP space (the Davis-Goadrich interpolation).
pub fn aupr(curve: &PrCurve) -> f64 {
    let total_p = curve.positives as f64;
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut area = 0.0;
    for &(p, f) in &curve.blocks {
        if p > 0 {
            // integral of (tp + p t) / ((tp+fp) + (p+f) t) over t in [0,1]
            let a = tp as f64;
            let b = p as f64;
            let c = (tp + fp) as f64;
            let d = (p + f) as f64;
            let mean_precision = if c == 0.0 {
                b / d
            } else {
                b / d + (a * d - b * c) / (d * d) * ((c + d) / c).ln()
            };
            area += (p as f64 / total_p) * mean_precision;
        }
        tp += p;
        fp += f;
    }
    area
}

/// The estimator a cross-validation run fits on each training fold.
#[derive(Debug, Clone)]
pub enum EstimatorConfig {
    Naive { smoothing: NaiveSmoothing },
    Llama(LlamaConfig),
    Perceptron { lambda: f64, ordering: NodeOrdering },
}

/// Cross-validated AUPR summary. `std` is the population standard deviation
/// across the evaluated folds.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_fold_aupr: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Folds with no internal test arcs, excluded from the statistics.
    pub skipped_folds: Vec<usize>,
    pub negative_domain: NegativeDomain,
}

/// [`EvalReport`] together with the per-fold curves (fold index, curve).
#[derive(Debug, Clone)]
pub struct CvOutcome {
    pub report: EvalReport,
    pub curves: Vec<(usize, PrCurve)>,
}

fn restrict_ordering(ordering: &NodeOrdering, induced: &InducedTraining) -> NodeOrdering {
    match ordering {
        NodeOrdering::Random => NodeOrdering::Random,
        NodeOrdering::Given(perm) => NodeOrdering::Given(
            perm.iter()
                .filter_map(|&old| {
                    induced
                        .new_id
                        .get(old as usize)
                        .copied()
                        .flatten()
                })
                .collect(),
        ),
    }
}

fn fit_on_fold(
    config: &EstimatorConfig,
    induced: &InducedTraining,
    seed: u64,
) -> Result<InteractionMatrix> {
    match config {
        EstimatorConfig::Naive { smoothing } => {
            naive_estimate(&induced.graph, &induced.features, *smoothing)
        }
        EstimatorConfig::Llama(cfg) => {
            let cfg = LlamaConfig {
                ordering: restrict_ordering(&cfg.ordering, induced),
                seed,
                ..cfg.clone()
            };
            Ok(llama_fit(&induced.graph, &induced.features, &cfg)?.0)
        }
        EstimatorConfig::Perceptron { lambda, ordering } => Ok(perceptron_fit(
            &induced.graph,
            &induced.features,
            *lambda,
            &restrict_ordering(ordering, induced),
            seed,
        )?
        .0),
    }
}

/// Full k-fold cross-validation: per fold, fit on the induced training part
/// and compute the AUPR of the scores on a balanced test set. Folds run in
/// parallel; a fold without internal test arcs is skipped and recorded.
pub fn cross_validate_detailed(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    config: &EstimatorConfig,
    k: usize,
    seed: u64,
    negative_domain: NegativeDomain,
) -> Result<CvOutcome> {
    let folds = split_folds(g.n(), k, derive_seed(seed, 0))?;
    let per_fold: Vec<Option<(f64, PrCurve)>> = (0..k)
        .into_par_iter()
        .map(|fold| -> Result<Option<(f64, PrCurve)>> {
            let fold_seed = derive_seed(seed, 1000 + fold as u64);
            let pairs = match build_test_pairs(
                g,
                &folds,
                fold as u32,
                negative_domain,
                derive_seed(fold_seed, 2),
            ) {
                Ok(pairs) => pairs,
                Err(Error::NoPositives) => return Ok(None),
                Err(e) => return Err(e),
            };
            let induced = induce_training(g, z, &folds, fold as u32)?;
            let w = fit_on_fold(config, &induced, derive_seed(fold_seed, 1))?;
            let scored = score_pairs(&pairs, z, &w)?;
            let curve = pr_curve(&scored)?;
            let area = aupr(&curve);
            Ok(Some((area, curve)))
        })
        .collect::<Result<_>>()?;

    let mut report = EvalReport {
        per_fold_aupr: Vec::new(),
        mean: 0.0,
        std: 0.0,
        skipped_folds: Vec::new(),
        negative_domain,
    };
    let mut curves = Vec::new();
    for (fold, outcome) in per_fold.into_iter().enumerate() {
        match outcome {
            Some((area, curve)) => {
                report.per_fold_aupr.push(area);
                curves.push((fold, curve));
            }
            None => report.skipped_folds.push(fold),
        }
    }
    if report.per_fold_aupr.is_empty() {
        return Err(Error::NoPositives);
    }
    let count = report.per_fold_aupr.len() as f64;
    report.mean = report.per_fold_aupr.iter().sum::<f64>() / count;
    report.std = (report
        .per_fold_aupr
        .iter()
        .map(|a| (a - report.mean).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(CvOutcome { report, curves })
}

pub fn cross_validate(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    config: &EstimatorConfig,
    k: usize,
    seed: u64,
    negative_domain: NegativeDomain,
) -> Result<EvalReport> {
    cross_validate_detailed(g, z, config, k, seed, negative_domain).map(|o| o.report)
}

/// How well a feature set explains a graph: the mean cross-validated AUPR
/// of the passive-aggressive model fitted on that feature set.
pub fn explainability(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    config: &LlamaConfig,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    cross_validate(
        g,
        z,
        &EstimatorConfig::Llama(config.clone()),
        k,
        seed,
        NegativeDomain::TestInduced,
    )
}

/// Reassigns the feature rows to nodes by a seeded random permutation; a
/// control that keeps the feature-count profile but destroys any relation
/// between features and arcs.
pub fn permute_nodes(z: &FeatureAssignment, seed: u64) -> FeatureAssignment {
    let mut perm: Vec<u32> = (0..z.n() as u32).collect();
    perm.shuffle(&mut rng_stream(seed, 0));
    let rows = perm
        .iter()
        .map(|&old| z.features_of(old).to_vec())
        .collect();
    FeatureAssignment::from_rows(z.m(), rows)
}
