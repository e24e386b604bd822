//! User-user similarity rows on a bipartite graph.
//!
//! A row holds the similarity of every user `u` toward one target user `v`.
//! Three measures are provided:
//!
//! * diffusion: a unit of resource on `v` is split equally over `v`'s
//!   neighbors, and each neighbor splits what it received equally over its own
//!   users. `s(u, v)` is what `u` ends up with. Asymmetric; rows sum to 1.
//! * cosine: `|N(u) ∩ N(v)| / sqrt(k(u) k(v))` on binary neighborhoods.
//! * Jaccard: `|N(u) ∩ N(v)| / |N(u) ∪ N(v)|`.
//!
//! Rows for the object graph and the tag graph are combined with [`fuse`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Channel, TripartiteDataset};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Diffusion,
    Cosine,
    Jaccard,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Diffusion, Measure::Cosine, Measure::Jaccard];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Diffusion => "diffusion",
            Measure::Cosine => "cosine",
            Measure::Jaccard => "jaccard",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "diffusion" | "ds" => Ok(Measure::Diffusion),
            "cosine" | "cs" => Ok(Measure::Cosine),
            "jaccard" => Ok(Measure::Jaccard),
            other => Err(Error::InvalidArgument(format!("unknown similarity `{other}`"))),
        }
    }
}

/// What a [`SimilarityRow`] was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RowKind {
    Single { measure: Measure, channel: Channel },
    Fused { measure: Measure, lambda: f64 },
}

impl RowKind {
    pub fn measure(self) -> Measure {
        match self {
            RowKind::Single { measure, .. } | RowKind::Fused { measure, .. } => measure,
        }
    }

    pub fn lambda(self) -> Option<f64> {
        match self {
            RowKind::Fused { lambda, .. } => Some(lambda),
            RowKind::Single { .. } => None,
        }
    }
}

/// Sparse similarities from all users toward `target`.
///
/// Entries are sorted by user index and strictly positive. The self entry
/// may be present.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    target: u32,
    kind: RowKind,
    entries: Vec<(u32, f64)>,
}

impl SimilarityRow {
    /// Builds a row from arbitrary entries: sorted by user, non-positive
    /// values dropped. Panics on duplicate users.
    pub fn new(target: u32, kind: RowKind, mut entries: Vec<(u32, f64)>) -> Self {
        entries.retain(|&(_, s)| s > 0.0);
        entries.sort_unstable_by_key(|&(u, _)| u);
        assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "duplicate user in similarity row"
        );
        SimilarityRow {
            target,
            kind,
            entries,
        }
    }

    pub fn empty(target: u32, kind: RowKind) -> Self {
        SimilarityRow {
            target,
            kind,
            entries: Vec::new(),
        }
    }

    pub fn target(&self) -> u32 {
        self.target
    }

    pub fn kind(&self) -> RowKind {
        self.kind
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Similarity of `u` toward the target; 0 when absent.
    pub fn get(&self, u: u32) -> f64 {
        self.entries
            .binary_search_by_key(&u, |&(x, _)| x)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, s)| s).sum()
    }
}

/// Resource held by each right node after the first diffusion step.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceVector {
    pub target: u32,
    /// (right node, amount) sorted by node.
    pub amounts: Vec<(u32, f64)>,
}

/// First diffusion step: `v`'s unit resource split equally over its
/// neighbors. Empty when `v` has no neighbors.
pub fn spread(graph: &BipartiteGraph, v: u32) -> Result<ResourceVector> {
    graph.check_left(v)?;
    let neighbors = graph.left_neighbors(v);
    let amounts = if neighbors.is_empty() {
        Vec::new()
    } else {
        let share = 1.0 / neighbors.len() as f64;
        neighbors.iter().map(|&x| (x, share)).collect()
    };
    Ok(ResourceVector { target: v, amounts })
}

/// Reusable scratch space for computing rows on one graph size.
///
/// Computing many rows through one builder avoids reallocating the dense
/// accumulator; builders are cheap to create per worker thread.
#[derive(Debug, Clone, Default)]
pub struct RowBuilder {
    acc: Vec<f64>,
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl RowBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, left_count: usize) {
        if self.acc.len() < left_count {
            self.acc.resize(left_count, 0.0);
            self.counts.resize(left_count, 0);
        }
        self.touched.clear();
    }

    fn finish(&mut self, target: u32, kind: RowKind, mut score: impl FnMut(u32, u32, f64) -> f64) -> SimilarityRow {
        self.touched.sort_unstable();
        let mut entries = Vec::with_capacity(self.touched.len());
        for &u in &self.touched {
            let i = u as usize;
            let s = score(u, self.counts[i], self.acc[i]);
            if s > 0.0 {
                entries.push((u, s));
            }
            self.acc[i] = 0.0;
            self.counts[i] = 0;
        }
        SimilarityRow {
            target,
            kind,
            entries,
        }
    }

    /// Visits every (u, α) with α ∈ N(v), u ∈ N(α), counting overlaps and
    /// accumulating `weight(α)`.
    fn scatter(&mut self, graph: &BipartiteGraph, v: u32, mut weight: impl FnMut(u32) -> f64) {
        for &x in graph.left_neighbors(v) {
            let w = weight(x);
            for &u in graph.right_neighbors(x) {
                let i = u as usize;
                if self.counts[i] == 0 {
                    self.touched.push(u);
                }
                self.counts[i] += 1;
                self.acc[i] += w;
            }
        }
    }

    pub fn diffusion(&mut self, graph: &BipartiteGraph, channel: Channel, v: u32) -> Result<SimilarityRow> {
        graph.check_left(v)?;
        let kind = RowKind::Single {
            measure: Measure::Diffusion,
            channel,
        };
        let kv = graph.left_degree(v);
        if kv == 0 {
            return Ok(SimilarityRow::empty(v, kind));
        }
        self.prepare(graph.left_count());
        let resource = 1.0 / kv as f64;
        self.scatter(graph, v, |x| resource / graph.right_degree(x) as f64);
        Ok(self.finish(v, kind, |_, _, acc| acc))
    }

    pub fn cosine(&mut self, graph: &BipartiteGraph, channel: Channel, v: u32) -> Result<SimilarityRow> {
        graph.check_left(v)?;
        let kind = RowKind::Single {
            measure: Measure::Cosine,
            channel,
        };
        let kv = graph.left_degree(v);
        if kv == 0 {
            return Ok(SimilarityRow::empty(v, kind));
        }
        self.prepare(graph.left_count());
        self.scatter(graph, v, |_| 0.0);
        Ok(self.finish(v, kind, |u, overlap, _| {
            cosine_score(overlap as usize, graph.left_degree(u), kv)
        }))
    }

    pub fn jaccard(&mut self, graph: &BipartiteGraph, channel: Channel, v: u32) -> Result<SimilarityRow> {
        graph.check_left(v)?;
        let kind = RowKind::Single {
            measure: Measure::Jaccard,
            channel,
        };
        let kv = graph.left_degree(v);
        if kv == 0 {
            return Ok(SimilarityRow::empty(v, kind));
        }
        self.prepare(graph.left_count());
        self.scatter(graph, v, |_| 0.0);
        Ok(self.finish(v, kind, |u, overlap, _| {
            jaccard_score(overlap as usize, graph.left_degree(u), kv)
        }))
    }

    pub fn row(&mut self, measure: Measure, graph: &BipartiteGraph, channel: Channel, v: u32) -> Result<SimilarityRow> {
        match measure {
            Measure::Diffusion => self.diffusion(graph, channel, v),
            Measure::Cosine => self.cosine(graph, channel, v),
            Measure::Jaccard => self.jaccard(graph, channel, v),
        }
    }

    /// Row on one channel of a dataset.
    pub fn channel_row(
        &mut self,
        measure: Measure,
        dataset: &TripartiteDataset,
        channel: Channel,
        v: u32,
    ) -> Result<SimilarityRow> {
        self.row(measure, dataset.graph(channel), channel, v)
    }
}

/// Cosine of two binary vectors with the given overlap and sizes.
#[inline]
pub fn cosine_score(overlap: usize, ku: usize, kv: usize) -> f64 {
    overlap as f64 / ((ku * kv) as f64).sqrt()
}

/// Jaccard index of two sets with the given overlap and sizes.
#[inline]
pub fn jaccard_score(overlap: usize, ku: usize, kv: usize) -> f64 {
    overlap as f64 / (ku + kv - overlap) as f64
}

/// Diffusion similarity of all users toward `v`.
pub fn diffusion_row(graph: &BipartiteGraph, v: u32) -> Result<SimilarityRow> {
    RowBuilder::new().diffusion(graph, Channel::Object, v)
}

/// Binary cosine similarity of all users toward `v`.
pub fn cosine_row(graph: &BipartiteGraph, v: u32) -> Result<SimilarityRow> {
    RowBuilder::new().cosine(graph, Channel::Object, v)
}

/// Jaccard similarity of all users toward `v`.
pub fn jaccard_row(graph: &BipartiteGraph, v: u32) -> Result<SimilarityRow> {
    RowBuilder::new().jaccard(graph, Channel::Object, v)
}

/// Linear fusion `λ·object + (1−λ)·tag`, absent entries counting as 0.
///
/// Both rows must target the same user, use the same measure and come from
/// the object and tag channel respectively.
pub fn fuse(object_row: &SimilarityRow, tag_row: &SimilarityRow, lambda: f64) -> Result<SimilarityRow> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0, 1]")));
    }
    if object_row.target != tag_row.target {
        return Err(Error::InvalidArgument(format!(
            "rows target different users ({} vs {})",
            object_row.target, tag_row.target
        )));
    }
    let measure = match (object_row.kind, tag_row.kind) {
        (
            RowKind::Single {
                measure: a,
                channel: Channel::Object,
            },
            RowKind::Single {
                measure: b,
                channel: Channel::Tag,
            },
        ) if a == b => a,
        (a, b) => {
            return Err(Error::InvalidArgument(format!(
                "cannot fuse {a:?} with {b:?}"
            )))
        }
    };

    let mu = 1.0 - lambda;
    let (a, b) = (&object_row.entries, &tag_row.entries);
    let mut entries = Vec::with_capacity(a.len().max(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let (u, x, y) = match (a.get(i), b.get(j)) {
            (Some(&(ua, sa)), Some(&(ub, sb))) if ua == ub => {
                i += 1;
                j += 1;
                (ua, sa, sb)
            }
            (Some(&(ua, sa)), Some(&(ub, _))) if ua < ub => {
                i += 1;
                (ua, sa, 0.0)
            }
            (Some(&(ua, sa)), None) => {
                i += 1;
                (ua, sa, 0.0)
            }
            (_, Some(&(ub, sb))) => {
                j += 1;
                (ub, 0.0, sb)
            }
            (None, None) => unreachable!(),
        };
        let s = lambda * x + mu * y;
        if s > 0.0 {
            entries.push((u, s));
        }
    }
    Ok(SimilarityRow {
        target: object_row.target,
        kind: RowKind::Fused { measure, lambda },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// u1-o1, u1-o2, u2-o1, u3-o2
    fn f1() -> BipartiteGraph {
        BipartiteGraph::from_edges([(0, 0), (0, 1), (1, 0), (2, 1)], 3, 2).unwrap()
    }

    fn single(measure: Measure, channel: Channel) -> RowKind {
        RowKind::Single { measure, channel }
    }

    #[test]
    fn spread_splits_equally() {
        let g = f1();
        assert_eq!(spread(&g, 0).unwrap().amounts, vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(spread(&g, 1).unwrap().amounts, vec![(0, 1.0)]);
        let isolated = BipartiteGraph::from_edges([(0, 0)], 2, 1).unwrap();
        assert!(spread(&isolated, 1).unwrap().amounts.is_empty());
        assert!(spread(&g, 3).is_err());
    }

    #[test]
    fn diffusion_on_f1() {
        let g = f1();
        assert_eq!(diffusion_row(&g, 0).unwrap().entries(), &[(0, 0.5), (1, 0.25), (2, 0.25)]);
        assert_eq!(diffusion_row(&g, 1).unwrap().entries(), &[(0, 0.5), (1, 0.5)]);
        // asymmetric: s(u1,u2) = 0.5 but s(u2,u1) = 0.25
        assert_eq!(diffusion_row(&g, 1).unwrap().get(0), 0.5);
        assert_eq!(diffusion_row(&g, 0).unwrap().get(1), 0.25);
    }

    #[test]
    fn isolated_target_gives_empty_rows() {
        let g = BipartiteGraph::from_edges([(0, 0), (1, 0)], 3, 1).unwrap();
        assert!(diffusion_row(&g, 2).unwrap().is_empty());
        assert!(cosine_row(&g, 2).unwrap().is_empty());
        assert!(jaccard_row(&g, 2).unwrap().is_empty());
    }

    #[test]
    fn degree_one_identity() {
        let g = BipartiteGraph::from_edges([(0, 0), (1, 1), (2, 1)], 3, 2).unwrap();
        assert_eq!(diffusion_row(&g, 0).unwrap().entries(), &[(0, 1.0)]);
    }

    #[test]
    fn cosine_on_f1() {
        let row = cosine_row(&f1(), 0).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(row.get(0), 1.0);
        assert!((row.get(1) - r).abs() < 1e-15);
        assert!((row.get(2) - r).abs() < 1e-15);
    }

    #[test]
    fn jaccard_on_f1() {
        assert_eq!(jaccard_row(&f1(), 0).unwrap().entries(), &[(0, 1.0), (1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn identical_and_disjoint_neighborhoods() {
        // users 0 and 1 share {0, 1, 2}; user 2 holds {3} alone
        let g = BipartiteGraph::from_edges(
            [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 3)],
            3,
            4,
        )
        .unwrap();
        for row in [cosine_row(&g, 0).unwrap(), jaccard_row(&g, 0).unwrap()] {
            assert_eq!(row.get(1), 1.0);
            assert_eq!(row.get(2), 0.0);
            assert_eq!(row.len(), 2);
        }
    }

    #[test]
    fn fuse_endpoints_and_example() {
        let obj = SimilarityRow::new(0, single(Measure::Diffusion, Channel::Object), vec![(1, 0.25)]);
        let tag = SimilarityRow::new(
            0,
            single(Measure::Diffusion, Channel::Tag),
            vec![(1, 0.5), (2, 0.1)],
        );
        assert_eq!(fuse(&obj, &tag, 1.0).unwrap().entries(), obj.entries());
        assert_eq!(fuse(&obj, &tag, 0.0).unwrap().entries(), tag.entries());

        let mid = fuse(&obj, &tag, 0.74).unwrap();
        assert_eq!(mid.kind().lambda(), Some(0.74));
        // independent evaluation: 0.74*0.25 + 0.26*0.5 and 0.26*0.1
        assert!((mid.get(1) - 0.315).abs() < 1e-15);
        assert!((mid.get(2) - 0.026).abs() < 1e-15);
    }

    #[test]
    fn fuse_rejects_bad_input() {
        let obj = SimilarityRow::new(0, single(Measure::Diffusion, Channel::Object), vec![(1, 0.25)]);
        let tag = SimilarityRow::new(0, single(Measure::Diffusion, Channel::Tag), vec![(1, 0.5)]);
        let other_target = SimilarityRow::new(1, single(Measure::Diffusion, Channel::Tag), vec![]);
        let cos_tag = SimilarityRow::new(0, single(Measure::Cosine, Channel::Tag), vec![]);
        assert!(fuse(&obj, &tag, 1.5).is_err());
        assert!(fuse(&obj, &tag, -0.1).is_err());
        assert!(fuse(&obj, &tag, f64::NAN).is_err());
        assert!(fuse(&obj, &other_target, 0.5).is_err());
        assert!(fuse(&obj, &cos_tag, 0.5).is_err());
        assert!(fuse(&tag, &obj, 0.5).is_err());
        let fused = fuse(&obj, &tag, 0.5).unwrap();
        assert!(fuse(&fused, &tag, 0.5).is_err());
    }

    #[test]
    fn measure_parsing() {
        assert_eq!("Diffusion".parse::<Measure>().unwrap(), Measure::Diffusion);
        assert_eq!(" cosine".parse::<Measure>().unwrap(), Measure::Cosine);
        assert!("katz".parse::<Measure>().is_err());
    }

    #[test]
    fn builder_reuse_matches_fresh() {
        let g = f1();
        let mut b = RowBuilder::new();
        for v in [0, 1, 2, 0, 2] {
            for m in Measure::ALL {
                let reused = b.row(m, &g, Channel::Object, v).unwrap();
                let fresh = RowBuilder::new().row(m, &g, Channel::Object, v).unwrap();
                assert_eq!(reused, fresh);
            }
        }
    }
}
