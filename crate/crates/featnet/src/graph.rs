//! Directed graphs with dense integer node ids.

use crate::error::{Error, Result};

/// A directed graph over nodes `0..n` with per-node sorted out-adjacency.
///
/// Self-loops are allowed; duplicate arcs are collapsed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGraph {
    n: usize,
    num_arcs: u64,
    out_adj: Vec<Vec<u32>>,
}

impl FeatureGraph {
    /// Builds a graph from an arc list. Out-of-range endpoints are rejected.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); n];
        for (src, dst) in arcs {
            if src as usize >= n {
                return Err(Error::NodeOutOfRange {
                    id: src as usize,
                    n,
                });
            }
            if dst as usize >= n {
                return Err(Error::NodeOutOfRange {
                    id: dst as usize,
                    n,
                });
            }
            out_adj[src as usize].push(dst);
        }
        let mut num_arcs = 0u64;
        for adj in &mut out_adj {
            adj.sort_unstable();
            adj.dedup();
            num_arcs += adj.len() as u64;
        }
        Ok(FeatureGraph {
            n,
            num_arcs,
            out_adj,
        })
    }

    /// Builds a graph directly from sorted, deduplicated adjacency lists.
    pub(crate) fn from_sorted_adjacency(out_adj: Vec<Vec<u32>>) -> Self {
        let num_arcs = out_adj.iter().map(|a| a.len() as u64).sum();
        FeatureGraph {
            n: out_adj.len(),
            num_arcs,
            out_adj,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_arcs(&self) -> u64 {
        self.num_arcs
    }

    pub fn has_arc(&self, src: u32, dst: u32) -> bool {
        self.out_adj
            .get(src as usize)
            .is_some_and(|adj| adj.binary_search(&dst).is_ok())
    }

    /// Sorted destinations of `src`.
    pub fn out(&self, src: u32) -> &[u32] {
        &self.out_adj[src as usize]
    }

    /// All arcs, ordered by source then destination.
    pub fn arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(src, adj)| adj.iter().map(move |&dst| (src as u32, dst)))
    }
}
