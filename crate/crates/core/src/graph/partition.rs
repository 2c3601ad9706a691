use crate::error::{Error, Result};

/// Ordered grouping of `p` nodes into `M` contiguous groups.
///
/// Group `k` covers the node indices immediately following group `k - 1`.
/// Admissible multigraph edges are the pairs `(l, m)` with `l < m` plus a
/// self-loop `(l, l)` for every group holding more than one node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    sizes: Vec<usize>,
    starts: Vec<usize>,
    group_of: Vec<usize>,
    admissible: Vec<(usize, usize)>,
    // M x M lookup into `admissible`, usize::MAX when not admissible
    edge_index: Vec<usize>,
}

impl Partition {
    /// Builds a partition from group sizes. Every node in its own group
    /// (`M == p`) is rejected here; use [`Partition::singletons`] for that case.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        let p: usize = sizes.iter().sum();
        if sizes.len() == p && p > 1 {
            return Err(Error::InvalidPartition(
                "M == p requires the explicit singleton partition".into(),
            ));
        }
        Self::build(sizes)
    }

    /// The partition with one node per group, under which block moves reduce
    /// to single-edge moves.
    pub fn singletons(p: usize) -> Result<Self> {
        Self::build(vec![1; p])
    }

    /// Accepts any valid size list, including the all-singletons one.
    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        Self::build(sizes)
    }

    fn build(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("no groups".into()));
        }
        if let Some(k) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidPartition(format!("group {k} is empty")));
        }
        let m = sizes.len();
        let mut starts = Vec::with_capacity(m);
        let mut group_of = Vec::new();
        let mut next = 0;
        for (k, &n) in sizes.iter().enumerate() {
            starts.push(next);
            group_of.extend(std::iter::repeat_n(k, n));
            next += n;
        }
        let mut admissible = Vec::new();
        let mut edge_index = vec![usize::MAX; m * m];
        for l in 0..m {
            for mm in l..m {
                if l == mm && sizes[l] < 2 {
                    continue;
                }
                edge_index[l * m + mm] = admissible.len();
                edge_index[mm * m + l] = admissible.len();
                admissible.push((l, mm));
            }
        }
        Ok(Self {
            sizes,
            starts,
            group_of,
            admissible,
            edge_index,
        })
    }

    /// Number of nodes.
    pub fn p(&self) -> usize {
        self.group_of.len()
    }

    /// Number of groups.
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn group_size(&self, k: usize) -> usize {
        self.sizes[k]
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.group_of[node]
    }

    /// Node indices of group `k`.
    pub fn group(&self, k: usize) -> std::ops::Range<usize> {
        self.starts[k]..self.starts[k] + self.sizes[k]
    }

    /// Admissible multigraph edges in lexicographic order.
    pub fn admissible_edges(&self) -> &[(usize, usize)] {
        &self.admissible
    }

    /// Total number of admissible multigraph edges, self-loops included.
    pub fn admissible_count(&self) -> usize {
        self.admissible.len()
    }

    /// Position of `(l, m)` in [`Partition::admissible_edges`], if admissible.
    pub fn edge_index(&self, l: usize, m: usize) -> Option<usize> {
        let groups = self.m();
        if l >= groups || m >= groups {
            return None;
        }
        match self.edge_index[l * groups + m] {
            usize::MAX => None,
            i => Some(i),
        }
    }

    /// Node-level pairs `(i, j)`, `i < j`, covered by the multigraph edge `(l, m)`.
    pub fn block_pairs(&self, l: usize, m: usize) -> Vec<(usize, usize)> {
        let (l, m) = if l <= m { (l, m) } else { (m, l) };
        let mut out = Vec::new();
        if l == m {
            let g = self.group(l);
            for i in g.clone() {
                for j in i + 1..g.end {
                    out.push((i, j));
                }
            }
        } else {
            for i in self.group(l) {
                for j in self.group(m) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
