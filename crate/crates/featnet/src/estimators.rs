//! Estimators of the latent feature-feature matrix: the closed-form Naive
//! estimator, the Llama passive-aggressive learner and a plain-perceptron
//! baseline, plus the mistake-bound diagnostics.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::FeatureAssignment;
use crate::graph::FeatureGraph;
use crate::matrix::{InteractionMatrix, DEFAULT_DENSE_BUDGET};
use crate::model::score_unchecked;
use crate::rng::rng_stream;

/// A training or test pair: `label` is `+1` iff the pair is an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledExample {
    pub src: u32,
    pub dst: u32,
    pub label: i8,
}

impl LabeledExample {
    pub fn new(src: u32, dst: u32, positive: bool) -> Self {
        LabeledExample {
            src,
            dst,
            label: if positive { 1 } else { -1 },
        }
    }
}

/// How nodes are enumerated when building the example sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOrdering {
    /// Seeded random permutation of the nodes.
    Random,
    /// An explicit node order (e.g. chronological), a permutation of `0..n`.
    Given(Vec<u32>),
}

/// Example-vector normalization used by the Llama update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    /// l2 row normalization of both incidence vectors.
    RowL2,
}

/// Configuration of the Llama passive-aggressive learner.
#[derive(Debug, Clone)]
pub struct LlamaConfig {
    /// Aggressiveness cap on the update magnitude; must be positive.
    pub kappa: f64,
    pub normalization: Normalization,
    pub ordering: NodeOrdering,
    pub seed: u64,
    /// For undirected graphs: apply each update to `(h,k)` and `(k,h)` jointly.
    pub symmetric_updates: bool,
}

impl Default for LlamaConfig {
    fn default() -> Self {
        LlamaConfig {
            kappa: 1.5,
            normalization: Normalization::None,
            ordering: NodeOrdering::Random,
            seed: 0,
            symmetric_updates: false,
        }
    }
}

impl LlamaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Zero-count handling for the Naive estimator's `log 0` entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NaiveSmoothing {
    /// Entries with no observed arc get this (strictly negative) value.
    Floor(f64),
    /// `log(x + 1)` in place of `log(x)`.
    AddOne,
}

impl NaiveSmoothing {
    pub fn validate(&self) -> Result<()> {
        if let NaiveSmoothing::Floor(v) = *self {
            if !(v.is_finite() && v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "floor smoothing value must be finite and negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Default floor value for the Naive estimator.
pub const DEFAULT_FLOOR: f64 = -50.0;

/// Counters reported by a training pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitDiagnostics {
    /// Sign mistakes under the strict step rule (`mu > 0` predicts a link).
    pub mistakes: u64,
    /// `R^2 = max |F_i| * |F_j|` over the examples seen.
    pub radius_sq: u64,
    pub examples_seen: u64,
    /// Examples skipped because one endpoint has no features.
    pub skipped: u64,
}

/// Builds the balanced training sequence: every arc once as a positive and
/// `|A|` distinct uniformly drawn non-arc pairs as negatives. Nodes are
/// enumerated per `ordering`; for each node its positives precede its
/// sampled negatives.
pub fn build_example_sequence(
    g: &FeatureGraph,
    ordering: &NodeOrdering,
    seed: u64,
) -> Result<Vec<LabeledExample>> {
    let n = g.n();
    let num_arcs = g.num_arcs();
    if num_arcs == 0 {
        return Err(Error::NoPositives);
    }
    let total_pairs = (n as u64) * (n as u64);
    let available = total_pairs - num_arcs;
    if available < num_arcs {
        return Err(Error::InfeasibleSampling {
            needed: num_arcs,
            available,
        });
    }

    // Rejection-sample |A| distinct non-arc pairs, grouped by source node.
    let mut rng = rng_stream(seed, 0);
    let mut drawn: HashSet<(u32, u32)> = HashSet::with_capacity(num_arcs as usize);
    let mut neg_of: Vec<Vec<u32>> = vec![Vec::new(); n];
    while (drawn.len() as u64) < num_arcs {
        let i = rng.random_range(0..n as u32);
        let j = rng.random_range(0..n as u32);
        if g.has_arc(i, j) || !drawn.insert((i, j)) {
            continue;
        }
        neg_of[i as usize].push(j);
    }

    let order: Vec<u32> = match ordering {
        NodeOrdering::Random => {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.shuffle(&mut rng_stream(seed, 1));
            order
        }
        NodeOrdering::Given(order) => {
            validate_permutation(order, n)?;
            order.clone()
        }
    };

    let mut sequence = Vec::with_capacity(2 * num_arcs as usize);
    for &i in &order {
        for &j in g.out(i) {
            sequence.push(LabeledExample::new(i, j, true));
        }
        for &j in &neg_of[i as usize] {
            sequence.push(LabeledExample::new(i, j, false));
        }
    }
    Ok(sequence)
}

fn validate_permutation(order: &[u32], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidParameter(format!(
            "node ordering has {} entries, graph has {} nodes",
            order.len(),
            n
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i as usize >= n || seen[i as usize] {
            return Err(Error::InvalidParameter(
                "node ordering is not a permutation of the nodes".into(),
            ));
        }
        seen[i as usize] = true;
    }
    Ok(())
}

enum Counts {
    Dense(Vec<u64>, usize),
    Sparse(HashMap<(u32, u32), u64>),
}

impl Counts {
    fn new(m: usize) -> Self {
        if m.checked_mul(m).is_some_and(|sq| sq <= DEFAULT_DENSE_BUDGET) {
            Counts::Dense(vec![0; m * m], m)
        } else {
            Counts::Sparse(HashMap::new())
        }
    }

    #[inline]
    fn bump(&mut self, h: u32, k: u32) {
        match self {
            Counts::Dense(v, m) => v[h as usize * *m + k as usize] += 1,
            Counts::Sparse(map) => *map.entry((h, k)).or_insert(0) += 1,
        }
    }

    fn drain(self) -> Vec<(u32, u32, u64)> {
        match self {
            Counts::Dense(v, m) => v
                .into_iter()
                .enumerate()
                .filter(|&(_, c)| c > 0)
                .map(|(idx, c)| ((idx / m) as u32, (idx % m) as u32, c))
                .collect(),
            Counts::Sparse(map) => map.into_iter().map(|((h, k), c)| (h, k, c)).collect(),
        }
    }
}

/// Closed-form estimator: `W[h][k] = log(|(N_h x N_k) ∩ A| / (|N_h| |N_k|))`,
/// with `log 0` handled per `smoothing`. A single streaming pass over the
/// arcs accumulates the co-occurrence counts.
pub fn naive_estimate(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    smoothing: NaiveSmoothing,
) -> Result<InteractionMatrix> {
    smoothing.validate()?;
    if g.n() != z.n() {
        return Err(Error::InvalidParameter(format!(
            "graph has {} nodes, assignment has {}",
            g.n(),
            z.n()
        )));
    }
    let m = z.m();
    let mut counts = Counts::new(m);
    for (i, j) in g.arcs() {
        for &h in z.features_of(i) {
            for &k in z.features_of(j) {
                counts.bump(h, k);
            }
        }
    }
    let background = match smoothing {
        NaiveSmoothing::Floor(v) => v,
        NaiveSmoothing::AddOne => 0.0,
    };
    let mut w = InteractionMatrix::filled(m, background, DEFAULT_DENSE_BUDGET);
    for (h, k, c) in counts.drain() {
        let p = c as f64 / (z.owners_of(h).len() as f64 * z.owners_of(k).len() as f64);
        let value = match smoothing {
            NaiveSmoothing::Floor(_) => p.ln(),
            NaiveSmoothing::AddOne => (p + 1.0).ln(),
        };
        w.set(h, k, value);
    }
    Ok(w)
}

/// The closed-form passive-aggressive update magnitude.
#[inline]
fn llama_delta(mu: f64, rho: f64, label: i8, kappa: f64, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::None => {
            if label > 0 {
                kappa.min((rho * (1.0 - mu)).max(0.0))
            } else {
                -kappa.min((rho * (1.0 + mu)).max(0.0))
            }
        }
        Normalization::RowL2 => {
            let sr = rho.sqrt();
            if label > 0 {
                sr * kappa.min((1.0 - sr * mu).max(0.0))
            } else {
                -sr * kappa.min((1.0 + sr * mu).max(0.0))
            }
        }
    }
}

#[inline]
fn apply_update(w: &mut InteractionMatrix, fi: &[u32], fj: &[u32], delta: f64, symmetric: bool) {
    for &h in fi {
        for &k in fj {
            w.add(h, k, delta);
            if symmetric && h != k {
                w.add(k, h, delta);
            }
        }
    }
}

/// One passive-aggressive step on the example `(fi, fj, label)`. Returns the
/// applied `delta` and whether any entry changed.
pub fn llama_step(
    w: &mut InteractionMatrix,
    fi: &[u32],
    fj: &[u32],
    label: i8,
    cfg: &LlamaConfig,
) -> Result<(f64, bool)> {
    cfg.validate()?;
    if fi.is_empty() || fj.is_empty() {
        return Err(Error::EmptyFeatureSet);
    }
    let m = w.m();
    for &h in fi.iter().chain(fj) {
        if h as usize >= m {
            return Err(Error::FeatureOutOfRange { id: h as usize, m });
        }
    }
    let rho = 1.0 / (fi.len() as f64 * fj.len() as f64);
    let mu = score_unchecked(fi, fj, w);
    let delta = llama_delta(mu, rho, label, cfg.kappa, cfg.normalization);
    if delta != 0.0 {
        apply_update(w, fi, fj, delta, cfg.symmetric_updates);
    }
    Ok((delta, delta != 0.0))
}

/// Single-pass passive-aggressive fit over the balanced example sequence,
/// starting from `W = 0`.
pub fn llama_fit(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    cfg: &LlamaConfig,
) -> Result<(InteractionMatrix, FitDiagnostics)> {
    cfg.validate()?;
    if g.n() != z.n() {
        return Err(Error::InvalidParameter(format!(
            "graph has {} nodes, assignment has {}",
            g.n(),
            z.n()
        )));
    }
    let sequence = build_example_sequence(g, &cfg.ordering, cfg.seed)?;
    let mut w = InteractionMatrix::zeros(z.m());
    let mut diag = FitDiagnostics::default();
    for ex in &sequence {
        let fi = z.features_of(ex.src);
        let fj = z.features_of(ex.dst);
        if fi.is_empty() || fj.is_empty() {
            diag.skipped += 1;
            continue;
        }
        let pairs = fi.len() as u64 * fj.len() as u64;
        diag.radius_sq = diag.radius_sq.max(pairs);
        diag.examples_seen += 1;
        let rho = 1.0 / pairs as f64;
        let mu = score_unchecked(fi, fj, &w);
        let predicted_link = mu > 0.0;
        if predicted_link != (ex.label > 0) {
            diag.mistakes += 1;
        }
        let delta = llama_delta(mu, rho, ex.label, cfg.kappa, cfg.normalization);
        if delta != 0.0 {
            apply_update(&mut w, fi, fj, delta, cfg.symmetric_updates);
        }
    }
    Ok((w, diag))
}

/// Plain perceptron baseline: on a sign mistake, `W[h][k] += y * lambda`
/// over the example's feature pairs.
pub fn perceptron_fit(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    lambda: f64,
    ordering: &NodeOrdering,
    seed: u64,
) -> Result<(InteractionMatrix, FitDiagnostics)> {
    if !(lambda.is_finite() && lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate lambda must be in (0, 1], got {lambda}"
        )));
    }
    if g.n() != z.n() {
        return Err(Error::InvalidParameter(format!(
            "graph has {} nodes, assignment has {}",
            g.n(),
            z.n()
        )));
    }
    let sequence = build_example_sequence(g, ordering, seed)?;
    let mut w = InteractionMatrix::zeros(z.m());
    let mut diag = FitDiagnostics::default();
    for ex in &sequence {
        let fi = z.features_of(ex.src);
        let fj = z.features_of(ex.dst);
        if fi.is_empty() || fj.is_empty() {
            diag.skipped += 1;
            continue;
        }
        diag.radius_sq = diag.radius_sq.max(fi.len() as u64 * fj.len() as u64);
        diag.examples_seen += 1;
        let mu = score_unchecked(fi, fj, &w);
        let predicted_link = mu > 0.0;
        if predicted_link != (ex.label > 0) {
            diag.mistakes += 1;
            apply_update(&mut w, fi, fj, ex.label as f64 * lambda, false);
        }
    }
    Ok((w, diag))
}

/// Sum of hinge losses `max(0, 1 - y * score)` of `w` over the examples.
pub fn hinge_loss(
    w: &InteractionMatrix,
    examples: &[LabeledExample],
    z: &FeatureAssignment,
) -> f64 {
    assert_eq!(z.m(), w.m(), "assignment and matrix disagree on m");
    examples
        .iter()
        .map(|ex| {
            let s = score_unchecked(z.features_of(ex.src), z.features_of(ex.dst), w);
            (1.0 - ex.label as f64 * s).max(0.0)
        })
        .sum()
}

/// `R^2 = max |F_i| * |F_j|` over the examples.
pub fn radius_sq(examples: &[LabeledExample], z: &FeatureAssignment) -> u64 {
    examples
        .iter()
        .map(|ex| z.features_of(ex.src).len() as u64 * z.features_of(ex.dst).len() as u64)
        .max()
        .unwrap_or(0)
}

/// The passive-aggressive mistake bound
/// `max(R^2, 1/kappa) * (2 kappa H(U) + ||U||_F^2)` for a comparison matrix `U`.
pub fn pa_mistake_bound(
    w_ref: &InteractionMatrix,
    examples: &[LabeledExample],
    z: &FeatureAssignment,
    kappa: f64,
) -> Result<f64> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let r_sq = radius_sq(examples, z) as f64;
    let h = hinge_loss(w_ref, examples, z);
    Ok(r_sq.max(1.0 / kappa) * (2.0 * kappa * h + w_ref.frobenius_norm_sq()))
}
