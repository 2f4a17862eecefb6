//! The generative model: bilinear feature scoring and activation functions.
//!
//! A pair of nodes `(i, j)` links with probability `phi(z_i^T W z_j)`, where
//! `W` is the latent feature-feature matrix and `phi` a monotone activation
//! mapping reals into `[0, 1]`.

use crate::error::{Error, Result};
use crate::features::FeatureAssignment;
use crate::matrix::InteractionMatrix;

/// The activation function `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationSpec {
    /// `(e^(K(theta-x)) + 1)^-1`; `K` regulates the smoothness and `theta`
    /// is the center.
    Sigmoid { theta: f64, k: f64 },
    /// Indicator of `x > threshold`; makes the model fully deterministic.
    Step { threshold: f64 },
    /// `min(1, e^x)`, the activation under which the closed-form estimator
    /// is exact.
    ExpClipped,
}

impl ActivationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ActivationSpec::Sigmoid { theta, k } => {
                if !(k.is_finite() && k > 0.0) || !theta.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "sigmoid requires finite theta and k > 0, got theta={theta}, k={k}"
                    )));
                }
            }
            ActivationSpec::Step { threshold } => {
                if !threshold.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "step threshold must be finite, got {threshold}"
                    )));
                }
            }
            ActivationSpec::ExpClipped => {}
        }
        Ok(())
    }
}

/// Applies the activation function; the result is in `[0, 1]` and monotone
/// non-decreasing in `x`.
pub fn activate(spec: ActivationSpec, x: f64) -> f64 {
    match spec {
        ActivationSpec::Sigmoid { theta, k } => 1.0 / ((k * (theta - x)).exp() + 1.0),
        ActivationSpec::Step { threshold } => {
            if x > threshold {
                1.0
            } else {
                0.0
            }
        }
        ActivationSpec::ExpClipped => x.exp().min(1.0),
    }
}

/// Bilinear score `sum_{h in fi} sum_{k in fj} W[h][k]`.
pub fn score(fi: &[u32], fj: &[u32], w: &InteractionMatrix) -> Result<f64> {
    let m = w.m();
    for &h in fi.iter().chain(fj) {
        if h as usize >= m {
            return Err(Error::FeatureOutOfRange { id: h as usize, m });
        }
    }
    Ok(score_unchecked(fi, fj, w))
}

#[inline]
pub(crate) fn score_unchecked(fi: &[u32], fj: &[u32], w: &InteractionMatrix) -> f64 {
    let mut total = 0.0;
    for &h in fi {
        for &k in fj {
            total += w.get(h, k);
        }
    }
    total
}

/// Score for normalized incidences: `sum z_i,h * W[h][k] * z_j,k`.
pub fn score_weighted(
    zi: &[(u32, f64)],
    zj: &[(u32, f64)],
    w: &InteractionMatrix,
) -> Result<f64> {
    let m = w.m();
    for &(h, _) in zi.iter().chain(zj) {
        if h as usize >= m {
            return Err(Error::FeatureOutOfRange { id: h as usize, m });
        }
    }
    let mut total = 0.0;
    for &(h, wh) in zi {
        for &(k, wk) in zj {
            total += wh * w.get(h, k) * wk;
        }
    }
    Ok(total)
}

/// `phi(score(F_i, F_j, W))`, the model's link probability for `(i, j)`.
pub fn link_probability(
    i: u32,
    j: u32,
    z: &FeatureAssignment,
    w: &InteractionMatrix,
    spec: ActivationSpec,
) -> Result<f64> {
    let n = z.n();
    if i as usize >= n {
        return Err(Error::NodeOutOfRange { id: i as usize, n });
    }
    if j as usize >= n {
        return Err(Error::NodeOutOfRange { id: j as usize, n });
    }
    let s = score(z.features_of(i), z.features_of(j), w)?;
    Ok(activate(spec, s))
}
