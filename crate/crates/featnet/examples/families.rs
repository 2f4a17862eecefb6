//! Quick tour: generates one graph per synthetic family at a chosen size and
//! reports the cross-validated AUPR of both estimators.
//!
//! Usage: `cargo run --release --example families [n]` (default n = 500).

use std::time::Instant;

use featnet::estimators::{LlamaConfig, NaiveSmoothing};
use featnet::eval::{cross_validate, EstimatorConfig, NegativeDomain};
use featnet::model::ActivationSpec;
use featnet::synthgen::{generate_one, GraphFamilySpec, IbpParams, WDistribution};

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500);
    for (name, activation, wdist) in [
        (
            "chi-bernoulli",
            ActivationSpec::Step { threshold: 0.0 },
            WDistribution::BernoulliTen,
        ),
        (
            "sigmoid-bernoulli",
            ActivationSpec::Sigmoid { theta: 0.0, k: 5.0 },
            WDistribution::BernoulliTen,
        ),
        (
            "exp-normal",
            ActivationSpec::ExpClipped,
            WDistribution::NormalMatchedOne,
        ),
    ] {
        let spec = GraphFamilySpec {
            n,
            activation,
            wdist,
            ibp: IbpParams::standard(0),
            seed: 7,
        };
        let t0 = Instant::now();
        let (z, _w, g) = generate_one(&spec, 0).unwrap();
        let gen_time = t0.elapsed();
        println!(
            "{name}: n={n} m={} arcs={} density={:.4} gen={:?}",
            z.m(),
            g.num_arcs(),
            g.num_arcs() as f64 / (n * n) as f64,
            gen_time
        );
        for (est_name, config) in [
            (
                "llama",
                EstimatorConfig::Llama(LlamaConfig::default()),
            ),
            (
                "naive",
                EstimatorConfig::Naive {
                    smoothing: NaiveSmoothing::Floor(-50.0),
                },
            ),
        ] {
            let t0 = Instant::now();
            let report =
                cross_validate(&g, &z, &config, 10, 42, NegativeDomain::TestInduced).unwrap();
            println!(
                "  {est_name}: mean={:.4} std={:.4} folds={} skipped={:?} time={:?}",
                report.mean,
                report.std,
                report.per_fold_aupr.len(),
                report.skipped_folds,
                t0.elapsed()
            );
        }
    }
}
