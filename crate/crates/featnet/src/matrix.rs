//! The latent feature-feature interaction matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Entry count up to which a matrix is stored densely (8 bytes per entry,
/// so the default allows roughly 128 MiB per matrix).
pub const DEFAULT_DENSE_BUDGET: usize = 1 << 24;

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<f64>),
    Sparse(HashMap<(u32, u32), f64>),
}

/// An `m x m` real matrix of feature-feature interaction weights.
///
/// Entries not explicitly stored read as `background` (0 except for
/// floor-smoothed estimates). Storage is dense when `m^2` fits the memory
/// budget and an open-addressed map otherwise; both expose the same
/// read/update semantics.
#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    m: usize,
    symmetric: bool,
    background: f64,
    storage: Storage,
}

impl InteractionMatrix {
    /// All-zero matrix, dense or sparse per the default budget.
    pub fn zeros(m: usize) -> Self {
        Self::filled(m, 0.0, DEFAULT_DENSE_BUDGET)
    }

    pub fn zeros_with_budget(m: usize, dense_budget: usize) -> Self {
        Self::filled(m, 0.0, dense_budget)
    }

    /// Matrix whose every entry reads `background`.
    pub fn filled(m: usize, background: f64, dense_budget: usize) -> Self {
        let storage = if m.checked_mul(m).is_some_and(|sq| sq <= dense_budget) {
            Storage::Dense(vec![background; m * m])
        } else {
            Storage::Sparse(HashMap::new())
        };
        InteractionMatrix {
            m,
            symmetric: false,
            background,
            storage,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn set_symmetric(&mut self, symmetric: bool) {
        self.symmetric = symmetric;
    }

    /// Value read by entries that were never written.
    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    #[inline]
    fn check(&self, h: u32, k: u32) -> Result<()> {
        let m = self.m;
        if h as usize >= m {
            return Err(Error::FeatureOutOfRange { id: h as usize, m });
        }
        if k as usize >= m {
            return Err(Error::FeatureOutOfRange { id: k as usize, m });
        }
        Ok(())
    }

    /// Reads `W[h][k]`. Panics if out of range.
    #[inline]
    pub fn get(&self, h: u32, k: u32) -> f64 {
        debug_assert!((h as usize) < self.m && (k as usize) < self.m);
        match &self.storage {
            Storage::Dense(v) => v[h as usize * self.m + k as usize],
            Storage::Sparse(map) => *map.get(&(h, k)).unwrap_or(&self.background),
        }
    }

    pub fn try_get(&self, h: u32, k: u32) -> Result<f64> {
        self.check(h, k)?;
        Ok(self.get(h, k))
    }

    #[inline]
    pub fn set(&mut self, h: u32, k: u32, value: f64) {
        debug_assert!((h as usize) < self.m && (k as usize) < self.m);
        match &mut self.storage {
            Storage::Dense(v) => v[h as usize * self.m + k as usize] = value,
            Storage::Sparse(map) => {
                map.insert((h, k), value);
            }
        }
    }

    pub fn try_set(&mut self, h: u32, k: u32, value: f64) -> Result<()> {
        self.check(h, k)?;
        self.set(h, k, value);
        Ok(())
    }

    #[inline]
    pub fn add(&mut self, h: u32, k: u32, delta: f64) {
        debug_assert!((h as usize) < self.m && (k as usize) < self.m);
        match &mut self.storage {
            Storage::Dense(v) => v[h as usize * self.m + k as usize] += delta,
            Storage::Sparse(map) => {
                *map.entry((h, k)).or_insert(self.background) += delta;
            }
        }
    }

    /// Entries whose value differs from the background, sorted by `(h, k)`.
    pub fn entries(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        match &self.storage {
            Storage::Dense(v) => {
                for h in 0..self.m {
                    for k in 0..self.m {
                        let value = v[h * self.m + k];
                        if value != self.background {
                            out.push((h as u32, k as u32, value));
                        }
                    }
                }
            }
            Storage::Sparse(map) => {
                out.extend(
                    map.iter()
                        .filter(|&(_, &v)| v != self.background)
                        .map(|(&(h, k), &v)| (h, k, v)),
                );
                out.sort_unstable_by_key(|&(h, k, _)| (h, k));
            }
        }
        out
    }

    /// Squared Frobenius norm over all `m^2` entries (background included).
    pub fn frobenius_norm_sq(&self) -> f64 {
        let stored: f64;
        let stored_count: usize;
        match &self.storage {
            Storage::Dense(v) => {
                return v.iter().map(|&x| x * x).sum();
            }
            Storage::Sparse(map) => {
                stored = map.values().map(|&x| x * x).sum();
                stored_count = map.len();
            }
        }
        let rest = (self.m * self.m - stored_count) as f64;
        stored + rest * self.background * self.background
    }

    /// Semantic equality: same shape and entry-by-entry equal values.
    pub fn same_values(&self, other: &InteractionMatrix) -> bool {
        if self.m != other.m {
            return false;
        }
        if self.background == other.background {
            return self.entries() == other.entries();
        }
        (0..self.m as u32)
            .all(|h| (0..self.m as u32).all(|k| self.get(h, k) == other.get(h, k)))
    }
}
