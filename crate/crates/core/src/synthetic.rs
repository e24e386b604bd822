//! Seeded generator of tagged collection data with latent taste groups.
//!
//! Users, objects and tags are each assigned to one of `groups` groups.
//! A user collects objects and uses tags mostly from its own group, with a
//! power-law popularity profile inside each group. Tags therefore carry
//! information about object preferences, as in real folksonomies.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::TripartiteDataset;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub users: usize,
    pub objects: usize,
    pub tags: usize,
    pub groups: usize,
    /// Mean number of objects per user (at least 1 each).
    pub mean_objects_per_user: usize,
    /// Mean number of tags per user (at least 1 each).
    pub mean_tags_per_user: usize,
    /// Probability that a pick comes from the user's own group.
    pub in_group: f64,
    /// Popularity exponent inside a group.
    pub popularity_exponent: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            users: 500,
            objects: 800,
            tags: 300,
            groups: 8,
            mean_objects_per_user: 15,
            mean_tags_per_user: 8,
            in_group: 0.8,
            popularity_exponent: 0.9,
        }
    }
}

struct Pool {
    members: Vec<Vec<u32>>,
    pickers: Vec<WeightedIndex<f64>>,
}

impl Pool {
    fn new(count: usize, groups: usize, exponent: f64) -> Self {
        let mut members = vec![Vec::new(); groups];
        for i in 0..count {
            members[i % groups].push(i as u32);
        }
        let pickers = members
            .iter()
            .map(|m| {
                let weights = (0..m.len().max(1)).map(|r| 1.0 / ((r + 1) as f64).powf(exponent));
                WeightedIndex::new(weights).expect("positive weights")
            })
            .collect();
        Pool { members, pickers }
    }

    fn pick(&self, group: usize, rng: &mut impl Rng) -> Option<u32> {
        let m = &self.members[group];
        (!m.is_empty()).then(|| m[self.pickers[group].sample(rng)])
    }
}

fn draw_edges(pool: &Pool, group: usize, groups: usize, mean: usize, p_in: f64, rng: &mut impl Rng) -> Vec<u32> {
    let k = 1 + rng.random_range(0..(2 * mean.max(1) - 1));
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let g = if rng.random_bool(p_in) { group } else { rng.random_range(0..groups) };
        out.extend(pool.pick(g, rng));
    }
    out
}

/// Generates a dataset. Identical `(params, seed)` give identical output.
/// The result is not core-filtered.
pub fn generate(params: &SyntheticParams, seed: u64) -> Result<TripartiteDataset> {
    let groups = params.groups.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objects = Pool::new(params.objects, groups, params.popularity_exponent);
    let tags = Pool::new(params.tags, groups, params.popularity_exponent);
    let p_in = params.in_group.clamp(0.0, 1.0);

    let mut object_edges = Vec::new();
    let mut tag_edges = Vec::new();
    for u in 0..params.users as u32 {
        let group = rng.random_range(0..groups);
        for o in draw_edges(&objects, group, groups, params.mean_objects_per_user, p_in, &mut rng) {
            object_edges.push((u, o));
        }
        for t in draw_edges(&tags, group, groups, params.mean_tags_per_user, p_in, &mut rng) {
            tag_edges.push((u, t));
        }
    }
    TripartiteDataset::from_index_edges(params.users, params.objects, params.tags, object_edges, tag_edges)
}
