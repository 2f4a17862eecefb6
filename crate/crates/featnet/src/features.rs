//! Binary node-feature incidence and its normalized (weighted) variants.

use crate::error::{Error, Result};

/// Binary node-feature incidence: which of the `m` features each of the `n`
/// nodes carries, stored both row-wise and column-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureAssignment {
    n: usize,
    m: usize,
    features_of: Vec<Vec<u32>>,
    owners_of: Vec<Vec<u32>>,
}

impl FeatureAssignment {
    /// Builds an assignment from `(node, feature)` incidence pairs.
    /// Duplicate pairs are collapsed.
    pub fn new(n: usize, m: usize, incidences: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut features_of = vec![Vec::new(); n];
        for (node, feature) in incidences {
            if node as usize >= n {
                return Err(Error::NodeOutOfRange {
                    id: node as usize,
                    n,
                });
            }
            if feature as usize >= m {
                return Err(Error::FeatureOutOfRange {
                    id: feature as usize,
                    m,
                });
            }
            features_of[node as usize].push(feature);
        }
        for row in &mut features_of {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Self::from_rows(m, features_of))
    }

    /// Builds an assignment from per-node feature lists (sorted and deduplicated here).
    pub fn from_rows(m: usize, mut features_of: Vec<Vec<u32>>) -> Self {
        let n = features_of.len();
        let mut owners_of = vec![Vec::new(); m];
        for (node, row) in features_of.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            for &feature in row.iter() {
                owners_of[feature as usize].push(node as u32);
            }
        }
        FeatureAssignment {
            n,
            m,
            features_of,
            owners_of,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sorted features of node `i`.
    pub fn features_of(&self, i: u32) -> &[u32] {
        &self.features_of[i as usize]
    }

    /// Sorted owners of feature `k`.
    pub fn owners_of(&self, k: u32) -> &[u32] {
        &self.owners_of[k as usize]
    }

    pub fn has(&self, i: u32, k: u32) -> bool {
        self.features_of[i as usize].binary_search(&k).is_ok()
    }

    /// All incidence pairs, ordered by node then feature.
    pub fn incidences(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.features_of
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&k| (i as u32, k)))
    }

    /// Column normalization: entry `(i,h)` becomes `|N_h|^(-1/p)`, so rare
    /// features weigh more. Features without owners produce no entries.
    pub fn column_normalize(&self, p: f64) -> Result<WeightedAssignment> {
        check_p(p)?;
        let inv_norm: Vec<f64> = self
            .owners_of
            .iter()
            .map(|owners| {
                if owners.is_empty() {
                    0.0
                } else {
                    (owners.len() as f64).powf(-1.0 / p)
                }
            })
            .collect();
        let entries = self
            .features_of
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&h| (h, inv_norm[h as usize]))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(WeightedAssignment {
            n: self.n,
            m: self.m,
            entries,
        })
    }

    /// Row normalization: entry `(i,h)` becomes `|F_i|^(-1/p)`, so nodes with
    /// few features weigh more. Nodes without features get empty rows.
    pub fn row_normalize(&self, p: f64) -> Result<WeightedAssignment> {
        check_p(p)?;
        let entries = self
            .features_of
            .iter()
            .map(|row| {
                let w = if row.is_empty() {
                    0.0
                } else {
                    (row.len() as f64).powf(-1.0 / p)
                };
                row.iter().map(|&h| (h, w)).collect::<Vec<_>>()
            })
            .collect();
        Ok(WeightedAssignment {
            n: self.n,
            m: self.m,
            entries,
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "normalization exponent p must be >= 1, got {p}"
        )));
    }
    Ok(())
}

/// Real-valued incidence produced by normalizing a [`FeatureAssignment`];
/// the support is identical to the source assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAssignment {
    n: usize,
    m: usize,
    entries: Vec<Vec<(u32, f64)>>,
}

impl WeightedAssignment {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `(feature, weight)` entries of node `i`, sorted by feature.
    pub fn entries_of(&self, i: u32) -> &[(u32, f64)] {
        &self.entries[i as usize]
    }
}
