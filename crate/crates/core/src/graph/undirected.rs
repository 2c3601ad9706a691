use crate::error::{Error, Result};

/// Simple undirected graph on nodes `0..p`, stored as a dense adjacency matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    p: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            adj: vec![false; p * p],
        }
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Self::empty(p);
        for i in 0..p {
            for j in i + 1..p {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from an edge list; self-loops and out-of-range nodes are rejected.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(i, j) in edges {
            if i == j || i >= p || j >= p {
                return Err(Error::InvalidEdge(i, j));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.p + j]
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not allowed in a simple graph");
        self.adj[i * self.p + j] = present;
        self.adj[j * self.p + i] = present;
    }

    /// Edges `(i, j)` with `i < j`, row-major.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count() / 2
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count() == self.p * self.p.saturating_sub(1) / 2
    }

    /// For each node `i`, the number of neighbours `j > i`.
    pub fn nu_counts(&self) -> Vec<usize> {
        (0..self.p)
            .map(|i| (i + 1..self.p).filter(|&j| self.has_edge(i, j)).count())
            .collect()
    }

    /// Pairs `(i, j)`, `i < j`, whose status differs between the two graphs.
    pub fn symmetric_difference(&self, other: &Graph) -> Vec<(usize, usize)> {
        assert_eq!(self.p, other.p);
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                if self.has_edge(i, j) != other.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_counts_of_complete_graph() {
        assert_eq!(Graph::complete(4).nu_counts(), vec![3, 2, 1, 0]);
        assert_eq!(Graph::empty(4).nu_counts(), vec![0; 4]);
    }

    #[test]
    fn edges_are_symmetric() {
        let g = Graph::from_edges(4, &[(2, 0), (1, 3)]).unwrap();
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0));
        assert_eq!(g.edges(), vec![(0, 2), (1, 3)]);
        assert_eq!(g.edge_count(), 2);
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }
}
