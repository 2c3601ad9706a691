use std::sync::Arc;

use super::Partition;
use crate::error::{Error, Result};

/// Graph on the groups of a [`Partition`], with self-loops allowed for groups
/// holding more than one node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Multigraph {
    partition: Arc<Partition>,
    // indexed like `partition.admissible_edges()`
    present: Vec<bool>,
}

impl Multigraph {
    pub fn empty(partition: Arc<Partition>) -> Self {
        let t = partition.admissible_count();
        Self {
            partition,
            present: vec![false; t],
        }
    }

    pub fn full(partition: Arc<Partition>) -> Self {
        let t = partition.admissible_count();
        Self {
            partition,
            present: vec![true; t],
        }
    }

    /// Builds a multigraph from `(l, m)` group pairs. Inadmissible or repeated
    /// edges are rejected.
    pub fn from_edges(partition: Arc<Partition>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(partition);
        for &(l, m) in edges {
            let idx = g
                .partition
                .edge_index(l, m)
                .ok_or(Error::InvalidEdge(l, m))?;
            if g.present[idx] {
                return Err(Error::InvalidEdge(l, m));
            }
            g.present[idx] = true;
        }
        Ok(g)
    }

    /// Builds a multigraph from a presence mask over the admissible edges.
    pub fn from_mask(partition: Arc<Partition>, present: Vec<bool>) -> Result<Self> {
        if present.len() != partition.admissible_count() {
            return Err(Error::DimensionMismatch {
                expected: partition.admissible_count(),
                found: present.len(),
            });
        }
        Ok(Self { partition, present })
    }

    pub fn partition(&self) -> &Arc<Partition> {
        &self.partition
    }

    pub fn mask(&self) -> &[bool] {
        &self.present
    }

    pub fn has_edge(&self, l: usize, m: usize) -> bool {
        self.partition
            .edge_index(l, m)
            .is_some_and(|idx| self.present[idx])
    }

    pub fn edge_count(&self) -> usize {
        self.present.iter().filter(|&&e| e).count()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_count() == 0
    }

    pub fn is_full(&self) -> bool {
        self.present.iter().all(|&e| e)
    }

    /// Present edges, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.select(true)
    }

    /// Admissible edges not present, lexicographic.
    pub fn missing_edges(&self) -> Vec<(usize, usize)> {
        self.select(false)
    }

    fn select(&self, state: bool) -> Vec<(usize, usize)> {
        self.partition
            .admissible_edges()
            .iter()
            .zip(&self.present)
            .filter(|(_, &p)| p == state)
            .map(|(&e, _)| e)
            .collect()
    }

    pub fn with_edge(&self, l: usize, m: usize, present: bool) -> Result<Self> {
        let idx = self
            .partition
            .edge_index(l, m)
            .ok_or(Error::InvalidEdge(l, m))?;
        let mut out = self.clone();
        out.present[idx] = present;
        Ok(out)
    }

    /// All multigraphs obtained by adding one admissible missing edge.
    pub fn nbd_add(&self) -> Vec<Multigraph> {
        self.missing_edges()
            .into_iter()
            .map(|(l, m)| self.with_edge(l, m, true).expect("admissible"))
            .collect()
    }

    /// All multigraphs obtained by removing one present edge.
    pub fn nbd_remove(&self) -> Vec<Multigraph> {
        self.edges()
            .into_iter()
            .map(|(l, m)| self.with_edge(l, m, false).expect("admissible"))
            .collect()
    }
}
