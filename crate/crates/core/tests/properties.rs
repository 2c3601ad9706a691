use std::collections::HashMap;
use std::sync::Arc;

use blockgraph::graph::{
    decomposable::is_decomposable, is_block_structured, rho, rho_inverse, BlockGraph, Graph,
    Multigraph, Partition,
};
use blockgraph::gwishart::{
    complete_cholesky, exact_gwishart_sample, log_norm_const_decomposable,
    log_norm_const_decomposable_from, ExactSamplerOptions, GWishartParams,
};
use blockgraph::posterior::{bfdr, bfdr_threshold, edge_inclusion, InclusionMatrix};
use blockgraph::simbench::confusion;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn partition_strategy() -> impl Strategy<Value = Arc<Partition>> {
    prop::collection::vec(1usize..=3, 1..=5)
        .prop_map(|sizes| Arc::new(Partition::from_sizes(sizes).unwrap()))
}

fn multigraph_strategy() -> impl Strategy<Value = Multigraph> {
    partition_strategy().prop_flat_map(|partition| {
        let t = partition.admissible_count();
        prop::collection::vec(any::<bool>(), t)
            .prop_map(move |mask| Multigraph::from_mask(partition.clone(), mask).unwrap())
    })
}

fn random_graph<R: Rng + ?Sized>(p: usize, density: f64, rng: &mut R) -> Graph {
    let mut g = Graph::empty(p);
    for i in 0..p {
        for j in i + 1..p {
            if rng.random::<f64>() < density {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// Chordal graph grown by attaching each new node to a clique of the
/// graph built so far.
fn random_chordal<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Graph {
    let mut g = Graph::empty(p);
    for v in 1..p {
        let anchor = rng.random_range(0..v);
        let mut clique = vec![anchor];
        for u in g.neighbors(anchor) {
            if u < v && clique.iter().all(|&c| g.has_edge(c, u)) && rng.random::<f64>() < 0.6 {
                clique.push(u);
            }
        }
        if rng.random::<f64>() < 0.85 {
            for c in clique {
                g.set_edge(c, v, true);
            }
        }
    }
    g
}

fn random_free_values<R: Rng + ?Sized>(
    g: &Graph,
    diag: (f64, f64),
    off_sd: f64,
    rng: &mut R,
) -> HashMap<(usize, usize), f64> {
    let mut free = HashMap::new();
    for i in 0..g.p() {
        free.insert((i, i), rng.random_range(diag.0..diag.1));
    }
    for (i, j) in g.edges() {
        free.insert((i, j), off_sd * normal(rng));
    }
    free
}

fn non_edges(g: &Graph) -> Vec<(usize, usize)> {
    let p = g.p();
    (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect()
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn random_scale<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(p, p, |_, _| normal(rng));
    a.transpose() * a / p as f64 + DMatrix::identity(p, p)
}

proptest! {
    #[test]
    fn rho_round_trip(gb in multigraph_strategy()) {
        let g = rho(&gb);
        prop_assert!(is_block_structured(g.graph(), gb.partition()));
        let back = rho_inverse(g.graph(), gb.partition()).unwrap();
        prop_assert_eq!(&back, &gb);
        let again = BlockGraph::try_from_graph(g.graph().clone(), gb.partition()).unwrap();
        prop_assert_eq!(again.graph(), g.graph());
    }

    #[test]
    fn block_subgraphs_are_constant(gb in multigraph_strategy()) {
        let g = rho(&gb);
        let part = gb.partition();
        for h in 0..part.m() {
            for k in h..part.m() {
                let pairs = part.block_pairs(h, k);
                let present = pairs.iter().filter(|&&(i, j)| g.graph().has_edge(i, j)).count();
                prop_assert!(present == 0 || present == pairs.len());
                prop_assert_eq!(present > 0, gb.has_edge(h, k));
            }
        }
    }

    #[test]
    fn add_then_remove_restores(gb in multigraph_strategy()) {
        for next in gb.nbd_add() {
            prop_assert_eq!(next.edge_count(), gb.edge_count() + 1);
            let added: Vec<_> = next.edges().into_iter().filter(|&(l, m)| !gb.has_edge(l, m)).collect();
            prop_assert_eq!(added.len(), 1);
            let (l, m) = added[0];
            prop_assert_eq!(&next.with_edge(l, m, false).unwrap(), &gb);
            prop_assert!(next.nbd_remove().contains(&gb));
        }
    }

    #[test]
    fn completion_zero_pattern(seed in any::<u64>(), p in 1usize..=15, density in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(p, density, &mut rng);
        let free = random_free_values(&g, (0.5, 2.0), 1.0, &mut rng);
        let factor = complete_cholesky(&free, &g).unwrap();
        let k = factor.precision();
        for (i, j) in non_edges(&g) {
            prop_assert!(k[(i, j)].abs() <= 1e-10, "K[{i},{j}] = {}", k[(i, j)]);
        }
        for (&(i, j), &v) in &free {
            prop_assert_eq!(factor.get(i, j), v);
        }
    }

    #[test]
    fn completion_residual_is_rounding_sized(seed in any::<u64>(), p in 1usize..=15, density in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(p, density, &mut rng);
        let free = random_free_values(&g, (0.2, 3.0), 2.0, &mut rng);
        let factor = complete_cholesky(&free, &g).unwrap();
        let (phi, k) = (factor.phi(), factor.precision());
        for (i, j) in non_edges(&g) {
            let scale: f64 = (0..=i).map(|r| (phi[(r, i)] * phi[(r, j)]).abs()).sum();
            prop_assert!(k[(i, j)].abs() <= 1e-12 * scale.max(1.0), "K[{i},{j}] = {} at scale {scale}", k[(i, j)]);
        }
    }

    #[test]
    fn determinant_from_diagonal(seed in any::<u64>(), p in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free = random_free_values(&Graph::complete(p), (0.5, 2.0), 0.3, &mut rng);
        let factor = complete_cholesky(&free, &Graph::complete(p)).unwrap();
        let det = factor.precision().lu().determinant();
        let diag: f64 = (0..p).map(|i| factor.get(i, i).powi(2)).product();
        prop_assert!(((det - diag) / diag).abs() <= 1e-10);
        prop_assert!((factor.log_det() - diag.ln()).abs() <= 1e-10);
    }

    #[test]
    fn normalizing_constant_ignores_elimination_order(seed in any::<u64>(), p in 1usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_chordal(p, &mut rng);
        prop_assert!(is_decomposable(&g));
        let params = GWishartParams::new(rng.random_range(2.5..8.0), random_scale(p, &mut rng)).unwrap();
        let reference = log_norm_const_decomposable(&g, &params).unwrap();
        for start in 1..p {
            let other = log_norm_const_decomposable_from(&g, &params, start).unwrap();
            prop_assert!((reference - other).abs() <= 1e-9 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn metrics_are_symmetric_and_bounded(seed in any::<u64>(), p in 2usize..=12, d1 in 0.0f64..1.0, d2 in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_graph(p, d1, &mut rng);
        let b = random_graph(p, d2, &mut rng);
        let ab = confusion(&a, &b).unwrap();
        let ba = confusion(&b, &a).unwrap();
        prop_assert_eq!(ab.std_shd, ba.std_shd);
        prop_assert_eq!(ab.tp + ab.fp + ab.tn + ab.fn_, p * (p - 1) / 2);
        for v in [ab.f1, ab.std_shd, ab.sensitivity, ab.specificity] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn inclusion_frequencies_are_counts(gbs in prop::collection::vec(any::<u64>(), 1..40)) {
        let partition = Arc::new(Partition::new(vec![2, 1, 2]).unwrap());
        let t = partition.admissible_count();
        let graphs: Vec<BlockGraph> = gbs
            .iter()
            .map(|bits| {
                let mask = (0..t).map(|e| bits >> e & 1 == 1).collect();
                rho(&Multigraph::from_mask(partition.clone(), mask).unwrap())
            })
            .collect();
        let pm = edge_inclusion(&graphs).unwrap();
        prop_assert_eq!(pm.samples(), graphs.len());
        for (_, v) in pm.pairs() {
            prop_assert!((0.0..=1.0).contains(&v));
            let count = v * graphs.len() as f64;
            prop_assert!((count - count.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn bfdr_threshold_is_monotone(values in prop::collection::vec(0.0f64..=1.0, 6), t1 in 0.001f64..0.5, t2 in 0.001f64..0.5) {
        let mut m = DMatrix::zeros(4, 4);
        let mut it = values.iter();
        for i in 0..4 {
            for j in i + 1..4 {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let pm = InclusionMatrix::from_matrix(m).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = bfdr_threshold(&pm, lo);
        let b = bfdr_threshold(&pm, hi);
        if let Some(s) = a.threshold {
            prop_assert!(a.bfdr.unwrap() < lo);
            prop_assert_eq!(bfdr(&pm, s), a.bfdr);
            prop_assert!(b.threshold.unwrap() <= s);
        }
        if let Some(s) = b.threshold {
            prop_assert!(bfdr(&pm, s).unwrap() < hi);
        }
    }
}

#[test]
fn complete_graph_sampler_matches_conjugate_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = 4;
    let y = DMatrix::from_fn(30, p, |_, _| normal(&mut rng));
    let u = y.tr_mul(&y);
    let prior = GWishartParams::identity(p, 3.0).unwrap();
    let post = prior.posterior(30, &u).unwrap();
    let draws = 20_000;
    let mut sum = DMatrix::<f64>::zeros(p, p);
    for _ in 0..draws {
        let k = exact_gwishart_sample(
            &Graph::complete(p),
            &post,
            &mut rng,
            &ExactSamplerOptions::default(),
        )
        .unwrap();
        sum += k.matrix();
    }
    let mean = sum / draws as f64;
    let expected = post.d().clone().try_inverse().unwrap() * (3.0 + 30.0 + p as f64 - 1.0);
    let rel = (&mean - &expected).norm() / expected.norm();
    assert!(rel < 0.01, "relative error {rel}");
}
