//! Independent reference implementations used by the integration suites.
//! Nothing here calls into the similarity kernels under test.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tridiff::BipartiteGraph;

/// Random graph with `left × right` nodes and the given edge density.
pub fn random_graph(rng: &mut ChaCha8Rng, left: usize, right: usize, density: f64) -> (BipartiteGraph, Vec<Vec<bool>>) {
    let mut adj = vec![vec![false; right]; left];
    let mut edges = Vec::new();
    for (u, row) in adj.iter_mut().enumerate() {
        for (x, cell) in row.iter_mut().enumerate() {
            if rng.random_bool(density) {
                *cell = true;
                edges.push((u as u32, x as u32));
            }
        }
    }
    (BipartiteGraph::from_edges(edges, left, right).unwrap(), adj)
}

/// A corpus of random graphs with varied shapes and densities.
pub fn corpus(seed: u64, count: usize, max_side: usize) -> Vec<(BipartiteGraph, Vec<Vec<bool>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let left = rng.random_range(1..=max_side);
            let right = rng.random_range(1..=max_side);
            let density = [0.01, 0.03, 0.1, 0.3, 0.7][rng.random_range(0..5)];
            random_graph(&mut rng, left, right, density)
        })
        .collect()
}

/// Full two-step transition matrix W (left × left) from a dense adjacency:
/// W = B · A, where A[x][v] = a(v,x)/k(v) moves resource from users to right
/// nodes and B[u][x] = a(u,x)/k(x) moves it back. Column v is v's row.
pub fn dense_transition(adj: &[Vec<bool>]) -> Vec<Vec<f64>> {
    let m = adj.len();
    let n = adj.first().map_or(0, Vec::len);
    let k_left: Vec<f64> = adj.iter().map(|r| r.iter().filter(|&&b| b).count() as f64).collect();
    let k_right: Vec<f64> = (0..n)
        .map(|x| adj.iter().filter(|r| r[x]).count() as f64)
        .collect();
    let a = |u: usize, x: usize| if adj[u][x] { 1.0 } else { 0.0 };
    let to_right: Vec<Vec<f64>> = (0..n)
        .map(|x| (0..m).map(|v| if k_left[v] > 0.0 { a(v, x) / k_left[v] } else { 0.0 }).collect())
        .collect();
    let to_left: Vec<Vec<f64>> = (0..m)
        .map(|u| (0..n).map(|x| if k_right[x] > 0.0 { a(u, x) / k_right[x] } else { 0.0 }).collect())
        .collect();
    let mut w = vec![vec![0.0; m]; m];
    for u in 0..m {
        for v in 0..m {
            w[u][v] = (0..n).map(|x| to_left[u][x] * to_right[x][v]).sum();
        }
    }
    w
}

pub fn neighbor_set(adj: &[Vec<bool>], u: usize) -> BTreeSet<usize> {
    adj[u].iter().enumerate().filter(|(_, &b)| b).map(|(x, _)| x).collect()
}

/// Binary cosine by set arithmetic; `None` when the overlap is empty.
pub fn naive_cosine(adj: &[Vec<bool>], u: usize, v: usize) -> Option<f64> {
    let (a, b) = (neighbor_set(adj, u), neighbor_set(adj, v));
    let overlap = a.intersection(&b).count();
    (overlap > 0).then(|| overlap as f64 / ((a.len() * b.len()) as f64).sqrt())
}

/// Jaccard index by set arithmetic; `None` when the overlap is empty.
pub fn naive_jaccard(adj: &[Vec<bool>], u: usize, v: usize) -> Option<f64> {
    let (a, b) = (neighbor_set(adj, u), neighbor_set(adj, v));
    let overlap = a.intersection(&b).count();
    let union = a.union(&b).count();
    (overlap > 0).then(|| overlap as f64 / union as f64)
}

/// Mean 1-based position of `target` over every ordering of `scores` that is
/// sorted by descending score, enumerated by brute force (tied elements in
/// every permutation).
pub fn enumerated_mean_rank(scores: &[f64], target: usize) -> f64 {
    let n = scores.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    permute(&mut idx, 0, &mut |perm| {
        if perm.windows(2).all(|w| scores[w[0]] >= scores[w[1]]) {
            total += (perm.iter().position(|&i| i == target).unwrap() + 1) as f64;
            count += 1;
        }
    });
    total / count as f64
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
