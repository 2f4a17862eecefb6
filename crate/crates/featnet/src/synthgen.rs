//! Synthetic feature-rich graph generation: Indian-Buffet-Process feature
//! assignments, i.i.d. latent-matrix samplers and arc realization through
//! the model.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::features::FeatureAssignment;
use crate::graph::FeatureGraph;
use crate::matrix::InteractionMatrix;
use crate::model::{activate, ActivationSpec};
use crate::rng::{derive_seed, rng_stream};

/// Three-parameter Indian Buffet Process parameters.
///
/// The rule implemented is the stable-beta form: customer `i` (1-based)
/// takes existing dish `k` with probability `(m_k - beta) / (i + c)` and
/// then orders `Poisson(alpha * G(1+c) G(i+c+beta) / (G(i+1+c) G(1+c+beta)))`
/// new dishes (`G` the gamma function), which degenerates to the classic
/// one-parameter process at `beta = 0`, `c = 0` and keeps the marginal
/// number of dishes per customer at mean `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub seed: u64,
}

impl IbpParams {
    /// The parameters used throughout the synthetic experiments.
    pub fn standard(seed: u64) -> Self {
        IbpParams {
            alpha: 3.0,
            beta: 0.5,
            c: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ibp alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ibp beta must be in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.c.is_finite() && self.c > -self.beta) {
            return Err(Error::InvalidParameter(format!(
                "ibp c must exceed -beta, got c={} beta={}",
                self.c, self.beta
            )));
        }
        Ok(())
    }
}

/// Samples a node-feature assignment from the Indian Buffet Process; the
/// number of features `m` emerges from the draw.
pub fn ibp_sample(n: usize, params: &IbpParams) -> Result<FeatureAssignment> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("ibp requires n >= 1".into()));
    }
    let IbpParams {
        alpha, beta, c, ..
    } = *params;
    let mut rng = rng_stream(params.seed, 0);
    let mut dish_counts: Vec<u64> = Vec::new();
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(n);
    let log_const = ln_gamma(1.0 + c) - ln_gamma(1.0 + c + beta);
    for i in 1..=n {
        let mut row = Vec::new();
        let denom = i as f64 + c;
        for (k, count) in dish_counts.iter_mut().enumerate() {
            let p = (*count as f64 - beta) / denom;
            if rng.random::<f64>() < p {
                *count += 1;
                row.push(k as u32);
            }
        }
        let rate = alpha
            * (log_const + ln_gamma(i as f64 + c + beta) - ln_gamma(i as f64 + 1.0 + c)).exp();
        let new_dishes = if rate > 0.0 {
            Poisson::new(rate)
                .map_err(|e| Error::InvalidParameter(format!("poisson rate {rate}: {e}")))?
                .sample(&mut rng) as u64
        } else {
            0
        };
        for _ in 0..new_dishes {
            row.push(dish_counts.len() as u32);
            dish_counts.push(1);
        }
        rows.push(row);
    }
    Ok(FeatureAssignment::from_rows(dish_counts.len(), rows))
}

/// Distribution of the i.i.d. entries of the sampled latent matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WDistribution {
    /// Value 10 with probability `10/m`, otherwise -1.
    BernoulliTen,
    /// Normal with the mean and variance of [`WDistribution::BernoulliTen`].
    NormalMatched,
    /// Value 1 with probability `1/m`, otherwise -1 (the exp-activation case).
    BernoulliOne,
    /// Normal with the mean and variance of [`WDistribution::BernoulliOne`].
    NormalMatchedOne,
}

impl WDistribution {
    fn min_m(self) -> usize {
        match self {
            WDistribution::BernoulliTen | WDistribution::NormalMatched => 10,
            WDistribution::BernoulliOne | WDistribution::NormalMatchedOne => 1,
        }
    }

    /// `(high value, probability of the high value)` of the underlying
    /// two-point law.
    fn two_point(self, m: usize) -> (f64, f64) {
        match self {
            WDistribution::BernoulliTen | WDistribution::NormalMatched => (10.0, 10.0 / m as f64),
            WDistribution::BernoulliOne | WDistribution::NormalMatchedOne => (1.0, 1.0 / m as f64),
        }
    }

    /// Analytic mean and variance of the two-point law for a given `m`.
    pub fn moments(self, m: usize) -> (f64, f64) {
        let (v, p) = self.two_point(m);
        let mean = v * p - (1.0 - p);
        let second = v * v * p + (1.0 - p);
        (mean, second - mean * mean)
    }

    fn is_normal(self) -> bool {
        matches!(
            self,
            WDistribution::NormalMatched | WDistribution::NormalMatchedOne
        )
    }
}

/// Samples an `m x m` latent matrix with i.i.d. entries.
pub fn sample_w(m: usize, dist: WDistribution, seed: u64) -> Result<InteractionMatrix> {
    if m < dist.min_m() {
        return Err(Error::InvalidParameter(format!(
            "{dist:?} requires m >= {}, got {m}",
            dist.min_m()
        )));
    }
    let mut rng = rng_stream(seed, 0);
    let mut w = InteractionMatrix::zeros(m);
    if dist.is_normal() {
        let (mean, var) = dist.moments(m);
        let normal = Normal::new(mean, var.sqrt())
            .map_err(|e| Error::InvalidParameter(format!("normal moments: {e}")))?;
        for h in 0..m as u32 {
            for k in 0..m as u32 {
                w.set(h, k, normal.sample(&mut rng));
            }
        }
    } else {
        let (high, p) = dist.two_point(m);
        for h in 0..m as u32 {
            for k in 0..m as u32 {
                let value = if rng.random::<f64>() < p { high } else { -1.0 };
                w.set(h, k, value);
            }
        }
    }
    Ok(w)
}

/// Realizes a graph from the model: each ordered pair `(i, j)`, self-loops
/// included, becomes an arc independently with probability
/// `phi(z_i^T W z_j)`. Rows are realized in parallel on derived RNG streams;
/// step activation needs no randomness at all.
pub fn realize_graph(
    z: &FeatureAssignment,
    w: &InteractionMatrix,
    spec: ActivationSpec,
    seed: u64,
) -> Result<FeatureGraph> {
    spec.validate()?;
    if z.m() != w.m() {
        return Err(Error::InvalidParameter(format!(
            "assignment has {} features, matrix has {}",
            z.m(),
            w.m()
        )));
    }
    let n = z.n();
    let m = z.m();
    let deterministic = matches!(spec, ActivationSpec::Step { .. });
    let out_adj: Vec<Vec<u32>> = (0..n as u32)
        .into_par_iter()
        .map(|i| {
            // combined row: u[k] = sum_{h in F_i} W[h][k]
            let mut row_scores = vec![0.0f64; m];
            for &h in z.features_of(i) {
                for (k, slot) in row_scores.iter_mut().enumerate() {
                    *slot += w.get(h, k as u32);
                }
            }
            let mut rng = rng_stream(seed, 1 + i as u64);
            let mut adj = Vec::new();
            for j in 0..n as u32 {
                let s: f64 = z.features_of(j).iter().map(|&k| row_scores[k as usize]).sum();
                let p = activate(spec, s);
                let arc = if deterministic {
                    p >= 1.0
                } else if p >= 1.0 {
                    true
                } else if p <= 0.0 {
                    false
                } else {
                    rng.random::<f64>() < p
                };
                if arc {
                    adj.push(j);
                }
            }
            adj
        })
        .collect();
    Ok(FeatureGraph::from_sorted_adjacency(out_adj))
}

/// A family of synthetic feature-rich graphs: an activation, a latent-matrix
/// distribution and the IBP feature prior, all driven by one master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFamilySpec {
    pub n: usize,
    pub activation: ActivationSpec,
    pub wdist: WDistribution,
    pub ibp: IbpParams,
    pub seed: u64,
}

/// One generated replicate: the feature assignment, the latent matrix it was
/// paired with, and the realized graph.
pub type Replicate = (FeatureAssignment, InteractionMatrix, FeatureGraph);

/// Generates `count` independent replicates of a graph family, each from a
/// seed derived from the master seed.
pub fn generate_family(spec: &GraphFamilySpec, count: usize) -> Result<Vec<Replicate>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "replicate count must be >= 1".into(),
        ));
    }
    (0..count as u64)
        .map(|r| generate_one(spec, r))
        .collect()
}

/// Generates the `replicate`-th member of a family.
pub fn generate_one(spec: &GraphFamilySpec, replicate: u64) -> Result<Replicate> {
    let base = derive_seed(spec.seed, replicate);
    let ibp = IbpParams {
        seed: derive_seed(base, 1),
        ..spec.ibp
    };
    let z = ibp_sample(spec.n, &ibp)?;
    let w = sample_w(z.m(), spec.wdist, derive_seed(base, 2))?;
    let g = realize_graph(&z, &w, spec.activation, derive_seed(base, 3))?;
    Ok((z, w, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ibp_first_customer_poisson_count() {
        let params = IbpParams::standard(7);
        let z = ibp_sample(1, &params).unwrap();
        assert_eq!(z.features_of(0).len(), z.m());
        // reproducible
        let z2 = ibp_sample(1, &params).unwrap();
        assert_eq!(z, z2);
    }

    #[test]
    fn ibp_tiny_alpha_yields_empty_assignment() {
        let params = IbpParams {
            alpha: 1e-12,
            ..IbpParams::standard(3)
        };
        let z = ibp_sample(50, &params).unwrap();
        assert_eq!(z.m(), 0);
    }

    #[test]
    fn ibp_rejects_bad_params() {
        for p in [
            IbpParams { alpha: 0.0, ..IbpParams::standard(0) },
            IbpParams { beta: 1.5, ..IbpParams::standard(0) },
            IbpParams { c: -0.9, ..IbpParams::standard(0) },
        ] {
            assert!(ibp_sample(10, &p).is_err());
        }
    }

    #[test]
    fn ibp_mean_features_per_node_close_to_alpha() {
        // per-customer dish count has mean alpha in the exchangeable process
        let mut means = Vec::new();
        for seed in 0..30 {
            let z = ibp_sample(1000, &IbpParams::standard(seed)).unwrap();
            let total: usize = (0..1000).map(|i| z.features_of(i as u32).len()).sum();
            means.push(total as f64 / 1000.0);
        }
        let mean = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (means.len() - 1) as f64;
        let se = (var / means.len() as f64).sqrt();
        assert!(
            (mean - 3.0).abs() < 3.0 * se.max(0.05),
            "mean {mean} too far from alpha=3 (se {se})"
        );
    }

    #[test]
    fn sample_w_boundary_probabilities() {
        let w = sample_w(10, WDistribution::BernoulliTen, 0).unwrap();
        for (_, _, v) in w.entries() {
            assert_eq!(v, 10.0);
        }
        let w = sample_w(1, WDistribution::BernoulliOne, 0).unwrap();
        assert_eq!(w.get(0, 0), 1.0);
        assert!(sample_w(9, WDistribution::BernoulliTen, 0).is_err());
    }

    #[test]
    fn sample_w_bernoulli_moments() {
        let m = 1000;
        let (mean, var) = WDistribution::BernoulliTen.moments(m);
        approx::assert_relative_eq!(mean, 110.0 / m as f64 - 1.0, max_relative = 1e-12);
        let w = sample_w(m, WDistribution::BernoulliTen, 11).unwrap();
        let mut sum = 0.0;
        let mut count_high = 0u64;
        for h in 0..m as u32 {
            for k in 0..m as u32 {
                let v = w.get(h, k);
                sum += v;
                if v == 10.0 {
                    count_high += 1;
                }
            }
        }
        let total = (m * m) as f64;
        let emp_mean = sum / total;
        let se = (var / total).sqrt();
        assert!((emp_mean - mean).abs() < 4.0 * se);
        // about 10/m of the entries should be the high value
        let p = 10.0 / m as f64;
        let se_p = (p * (1.0 - p) / total).sqrt();
        assert!((count_high as f64 / total - p).abs() < 4.0 * se_p);
    }

    #[test]
    fn normal_matched_moments() {
        let m = 1000;
        let (mean, var) = WDistribution::BernoulliTen.moments(m);
        let w = sample_w(m, WDistribution::NormalMatched, 5).unwrap();
        let total = (m * m) as f64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for h in 0..m as u32 {
            for k in 0..m as u32 {
                let v = w.get(h, k);
                sum += v;
                sum_sq += v * v;
            }
        }
        let emp_mean = sum / total;
        let emp_var = sum_sq / total - emp_mean * emp_mean;
        assert!((emp_mean - mean).abs() < 3.0 * (var / total).sqrt());
        // variance of the sample variance ~ 2 var^2 / n for a normal
        assert!((emp_var - var).abs() < 3.0 * (2.0 * var * var / total).sqrt());
    }

    #[test]
    fn realize_identity_construction_is_exact() {
        let n = 10u32;
        let arcs = [(0u32, 1u32), (1, 1), (4, 7), (9, 0)];
        let z = FeatureAssignment::new(n as usize, n as usize, (0..n).map(|i| (i, i))).unwrap();
        let mut w = InteractionMatrix::zeros(n as usize);
        for &(i, j) in &arcs {
            w.set(i, j, 1.0);
        }
        let g = realize_graph(&z, &w, ActivationSpec::Step { threshold: 0.0 }, 123).unwrap();
        assert_eq!(g.num_arcs(), arcs.len() as u64);
        for &(i, j) in &arcs {
            assert!(g.has_arc(i, j));
        }
        // step realization ignores the seed entirely
        let g2 = realize_graph(&z, &w, ActivationSpec::Step { threshold: 0.0 }, 456).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn realize_extreme_probabilities() {
        let z = FeatureAssignment::new(4, 2, [(0, 0), (1, 0), (2, 1), (3, 1)]).unwrap();
        let mut w = InteractionMatrix::zeros(2);
        for h in 0..2 {
            for k in 0..2 {
                w.set(h, k, -1e6);
            }
        }
        let g = realize_graph(&z, &w, ActivationSpec::Sigmoid { theta: 0.0, k: 5.0 }, 1).unwrap();
        assert_eq!(g.num_arcs(), 0);

        let zero = InteractionMatrix::zeros(2);
        let g = realize_graph(&z, &zero, ActivationSpec::ExpClipped, 1).unwrap();
        assert_eq!(g.num_arcs(), 16); // complete with self-loops
    }

    #[test]
    fn family_replicates_are_distinct_and_reproducible() {
        let spec = GraphFamilySpec {
            n: 60,
            activation: ActivationSpec::Step { threshold: 0.0 },
            wdist: WDistribution::BernoulliTen,
            ibp: IbpParams::standard(0),
            seed: 42,
        };
        let reps = generate_family(&spec, 2).unwrap();
        assert_eq!(reps.len(), 2);
        assert_ne!(reps[0].2, reps[1].2);
        let again = generate_family(&spec, 2).unwrap();
        assert_eq!(reps[0].2, again[0].2);
        assert_eq!(reps[1].2, again[1].2);
        assert!(generate_family(&spec, 0).is_err());
    }
}
