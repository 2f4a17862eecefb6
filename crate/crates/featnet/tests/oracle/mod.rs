//! Brute-force AUPR reference: walk the ranking one unit step at a time and
//! integrate precision over recall numerically, independent of the
//! closed-form block arithmetic in the library.

use featnet::eval::ScoredPair;

/// Integrand of one unit step: precision at TP/FP interpolated linearly.
fn precision(tp0: f64, fp0: f64, dp: f64, df: f64, t: f64) -> f64 {
    let tp = tp0 + dp * t;
    let fp = fp0 + df * t;
    if tp + fp == 0.0 {
        // limit from the right along the interpolation direction
        dp / (dp + df)
    } else {
        tp / (tp + fp)
    }
}

/// Composite Simpson on [0, 1] with 1000 intervals.
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 1000;
    let h = 1.0 / n as f64;
    let mut total = f(0.0) + f(1.0);
    for i in 1..n {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        total += weight * f(i as f64 * h);
    }
    total * h / 3.0
}

/// AUPR by unit steps: every tie block of `p` positives and `f` negatives is
/// split into `p + f` steps, each accruing `p/(p+f)` true positives and
/// `f/(p+f)` false positives; the area of each step comes from quadrature.
pub fn aupr_oracle(scored: &[ScoredPair]) -> f64 {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].score.total_cmp(&scored[a].score));
    let total_p = scored.iter().filter(|p| p.label > 0).count() as f64;
    assert!(total_p > 0.0, "oracle needs at least one positive");

    let mut area = 0.0;
    let mut tp = 0.0f64;
    let mut fp = 0.0f64;
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
        let steps = p + f;
        let dp = p as f64 / steps as f64;
        let df = f as f64 / steps as f64;
        for _ in 0..steps {
            if dp > 0.0 {
                let (tp0, fp0) = (tp, fp);
                area += simpson(|t| precision(tp0, fp0, dp, df, t)) * dp / total_p;
            }
            tp += dp;
            fp += df;
        }
    }
    area
}
