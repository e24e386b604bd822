//! Seeded random train/test partition of the user-object edges.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::TripartiteDataset;
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// Training data plus held-out user-object pairs.
///
/// The training dataset keeps the full index maps and every user-tag edge;
/// users or objects whose edges all landed in the test set stay with degree 0.
#[derive(Debug, Clone)]
pub struct EvaluationSplit {
    training: TripartiteDataset,
    /// Held-out pairs, stored as a graph for per-user lookup.
    test: BipartiteGraph,
    seed: u64,
}

impl EvaluationSplit {
    pub fn training(&self) -> &TripartiteDataset {
        &self.training
    }

    /// Held-out edges as a user-object graph over the training index space.
    pub fn test_graph(&self) -> &BipartiteGraph {
        &self.test
    }

    /// Held-out (user, object) pairs in ascending order.
    pub fn test_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.test.edges()
    }

    /// Held-out objects of user `u`, ascending.
    pub fn test_objects(&self, u: u32) -> &[u32] {
        self.test.left_neighbors(u)
    }

    /// N_p, the number of held-out pairs.
    pub fn test_count(&self) -> usize {
        self.test.edge_count()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Number of user-object edges kept for training out of `edge_count`.
pub fn training_size(edge_count: usize, train_fraction: f64) -> usize {
    ((train_fraction * edge_count as f64).round() as usize).min(edge_count)
}

/// Partitions the user-object edges uniformly at random.
///
/// `round(train_fraction * edges)` edges go to training. The same
/// `(dataset, train_fraction, seed)` always yields the same split.
pub fn split(dataset: &TripartiteDataset, train_fraction: f64, seed: u64) -> Result<EvaluationSplit> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1]"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot split an empty dataset".into()));
    }
    let graph = dataset.user_object();
    let mut edges: Vec<(u32, u32)> = graph.edges().collect();
    let keep = training_size(edges.len(), train_fraction);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let (train, test) = edges.split_at(keep);

    let users = graph.left_count();
    let objects = graph.right_count();
    let train_graph = BipartiteGraph::from_edges(train.iter().copied(), users, objects)?;
    let test_graph = BipartiteGraph::from_edges(test.iter().copied(), users, objects)?;
    Ok(EvaluationSplit {
        training: dataset.with_user_object(train_graph),
        test: test_graph,
        seed,
    })
}
