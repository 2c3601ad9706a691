//! Chordality via maximum cardinality search, and the clique/separator
//! sequence of a decomposable graph.

use super::Graph;
use crate::error::{Error, Result};

/// Maximum cardinality search visiting order, starting at `start`.
/// Ties are broken toward the smallest node index.
pub fn maximum_cardinality_search(g: &Graph, start: usize) -> Vec<usize> {
    let p = g.p();
    let mut weight = vec![0usize; p];
    let mut visited = vec![false; p];
    let mut order = Vec::with_capacity(p);
    for step in 0..p {
        let v = if step == 0 {
            start
        } else {
            (0..p)
                .filter(|&v| !visited[v])
                .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
                .expect("unvisited node remains")
        };
        visited[v] = true;
        order.push(v);
        for u in 0..p {
            if !visited[u] && g.has_edge(u, v) {
                weight[u] += 1;
            }
        }
    }
    order
}

fn predecessors(g: &Graph, order: &[usize]) -> Vec<Vec<usize>> {
    let mut position = vec![0; g.p()];
    for (k, &v) in order.iter().enumerate() {
        position[v] = k;
    }
    order
        .iter()
        .map(|&v| {
            order[..position[v]]
                .iter()
                .copied()
                .filter(|&u| g.has_edge(u, v))
                .collect()
        })
        .collect()
}

fn is_clique(g: &Graph, nodes: &[usize]) -> bool {
    nodes
        .iter()
        .enumerate()
        .all(|(a, &u)| nodes[a + 1..].iter().all(|&v| g.has_edge(u, v)))
}

/// True when `order` is a perfect elimination ordering read in visit order:
/// the earlier neighbours of every node form a clique.
pub fn is_perfect_ordering(g: &Graph, order: &[usize]) -> bool {
    predecessors(g, order).iter().all(|pred| is_clique(g, pred))
}

pub fn is_decomposable(g: &Graph) -> bool {
    g.p() == 0 || is_perfect_ordering(g, &maximum_cardinality_search(g, 0))
}

/// Maximal cliques in a perfect sequence together with their separators
/// `S_j = C_j ∩ (C_1 ∪ ... ∪ C_{j-1})` (`S_1` is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueSequence {
    pub cliques: Vec<Vec<usize>>,
    pub separators: Vec<Vec<usize>>,
}

/// Clique/separator sequence built from the MCS order rooted at `start`.
pub fn clique_sequence(g: &Graph, start: usize) -> Result<CliqueSequence> {
    let order = maximum_cardinality_search(g, start);
    let preds = predecessors(g, &order);
    if !preds.iter().all(|pred| is_clique(g, pred)) {
        return Err(Error::NotDecomposable);
    }
    let candidates: Vec<Vec<usize>> = order
        .iter()
        .zip(&preds)
        .map(|(&v, pred)| {
            let mut c = pred.clone();
            c.push(v);
            c.sort_unstable();
            c
        })
        .collect();
    let contains =
        |big: &[usize], small: &[usize]| small.iter().all(|x| big.binary_search(x).is_ok());
    let cliques: Vec<Vec<usize>> = candidates
        .iter()
        .enumerate()
        .filter(|(a, c)| {
            !candidates
                .iter()
                .enumerate()
                .any(|(b, d)| *a != b && d.len() > c.len() && contains(d, c))
        })
        .map(|(_, c)| c.clone())
        .collect();
    let mut seen = vec![false; g.p()];
    let mut separators = Vec::with_capacity(cliques.len());
    for c in &cliques {
        separators.push(c.iter().copied().filter(|&v| seen[v]).collect());
        for &v in c {
            seen[v] = true;
        }
    }
    Ok(CliqueSequence {
        cliques,
        separators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_of_four_is_not_decomposable() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert!(!is_decomposable(&g));
        assert!(matches!(
            clique_sequence(&g, 0),
            Err(Error::NotDecomposable)
        ));
        let chorded = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        assert!(is_decomposable(&chorded));
    }

    #[test]
    fn chain_cliques_and_separators() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let seq = clique_sequence(&g, 0).unwrap();
        assert_eq!(seq.cliques, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(seq.separators, vec![vec![], vec![1]]);
    }

    #[test]
    fn disconnected_components_have_empty_separators() {
        let g = Graph::from_edges(4, &[(0, 1)]).unwrap();
        let seq = clique_sequence(&g, 3).unwrap();
        assert_eq!(seq.cliques.len(), 3);
        assert!(seq.separators.iter().all(|s| s.is_empty()));
    }
}
