//! Collaborative-filtering scores and top-L lists.
//!
//! The preference of target `v` for an object `α` it has not collected is
//! `p(v, α) = Σ_{u ≠ v} s(u, v) · a(u, α)`.

use std::cmp::Ordering;

use crate::dataset::{Channel, TripartiteDataset};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::similarity::{fuse, Measure, RowBuilder, SimilarityRow};

/// Positive scores of objects the target has not collected, sorted by object.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub target: u32,
    pub entries: Vec<(u32, f64)>,
}

impl ScoreVector {
    pub fn get(&self, object: u32) -> f64 {
        self.entries
            .binary_search_by_key(&object, |&(o, _)| o)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Up to L (object, score) pairs, best first, ties by ascending object index.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub target: u32,
    pub entries: Vec<(u32, f64)>,
}

impl RecommendationList {
    pub fn objects(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(o, _)| o)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descending score, then ascending object index.
#[inline]
pub(crate) fn rank_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Dense scratch buffers for scoring many users against one graph.
#[derive(Debug, Clone, Default)]
pub struct Scorer {
    acc: Vec<f64>,
    collected: Vec<bool>,
    touched: Vec<u32>,
}

impl Scorer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scores every object not collected by `row.target()` in `graph`.
    /// The row's self entry is ignored.
    pub fn score(&mut self, graph: &BipartiteGraph, row: &SimilarityRow) -> Result<ScoreVector> {
        let mut entries = Vec::new();
        self.score_into(graph, row, true, &mut entries)?;
        Ok(ScoreVector {
            target: row.target(),
            entries,
        })
    }

    /// Writes the positive scores into `out`, sorted by object only when
    /// `sorted` is set. Values do not depend on `sorted`.
    pub(crate) fn score_into(
        &mut self,
        graph: &BipartiteGraph,
        row: &SimilarityRow,
        sorted: bool,
        out: &mut Vec<(u32, f64)>,
    ) -> Result<()> {
        let v = row.target();
        graph.check_left(v)?;
        let n = graph.right_count();
        if self.acc.len() < n {
            self.acc.resize(n, 0.0);
            self.collected.resize(n, false);
        }
        self.touched.clear();

        if let Some(&(u, _)) = row.entries().last() {
            if u as usize >= graph.left_count() {
                return Err(Error::IndexOutOfRange {
                    kind: "user",
                    index: u as usize,
                    count: graph.left_count(),
                });
            }
        }
        for (u, s) in row.iter() {
            if u == v {
                continue;
            }
            for &x in graph.left_neighbors(u) {
                let slot = &mut self.acc[x as usize];
                if *slot == 0.0 {
                    self.touched.push(x);
                }
                *slot += s;
            }
        }

        let own = graph.left_neighbors(v);
        for &x in own {
            self.collected[x as usize] = true;
        }
        if sorted {
            self.touched.sort_unstable();
        }
        out.clear();
        out.reserve(self.touched.len());
        for &x in &self.touched {
            let i = x as usize;
            let s = std::mem::take(&mut self.acc[i]);
            if !self.collected[i] && s > 0.0 {
                out.push((x, s));
            }
        }
        for &x in own {
            self.collected[x as usize] = false;
        }
        Ok(())
    }
}

/// Scores the uncollected objects of `row.target()` against the training
/// user-object graph.
pub fn score_objects(training: &TripartiteDataset, row: &SimilarityRow) -> Result<ScoreVector> {
    Scorer::new().score(training.user_object(), row)
}

/// The `l` best-scoring objects. Zero-score objects never appear, so the
/// list may be shorter than `l`.
pub fn top_l(scores: &ScoreVector, l: usize) -> Result<RecommendationList> {
    if l == 0 {
        return Err(Error::InvalidArgument("list length L must be at least 1".into()));
    }
    Ok(RecommendationList {
        target: scores.target,
        entries: top_entries(&scores.entries, l),
    })
}

pub(crate) fn top_entries(entries: &[(u32, f64)], l: usize) -> Vec<(u32, f64)> {
    let mut items = entries.to_vec();
    if items.len() > l {
        items.select_nth_unstable_by(l - 1, rank_order);
        items.truncate(l);
    }
    items.sort_unstable_by(rank_order);
    items
}

/// End-to-end recommendation for one user: channel rows, fusion, scoring,
/// truncation.
pub fn recommend(
    dataset: &TripartiteDataset,
    measure: Measure,
    lambda: f64,
    user: u32,
    l: usize,
) -> Result<RecommendationList> {
    let mut rows = RowBuilder::new();
    let object_row = rows.channel_row(measure, dataset, Channel::Object, user)?;
    let tag_row = rows.channel_row(measure, dataset, Channel::Tag, user)?;
    let fused = fuse(&object_row, &tag_row, lambda)?;
    top_l(&score_objects(dataset, &fused)?, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::RowKind;

    fn f1() -> TripartiteDataset {
        TripartiteDataset::from_index_edges(3, 2, 1, [(0, 0), (0, 1), (1, 0), (2, 1)], [(0, 0), (1, 0)])
            .unwrap()
    }

    /// F1 plus object o3 collected by u2.
    fn f2() -> TripartiteDataset {
        TripartiteDataset::from_index_edges(
            3,
            3,
            1,
            [(0, 0), (0, 1), (1, 0), (2, 1), (1, 2)],
            [(0, 0), (1, 0)],
        )
        .unwrap()
    }

    fn row(target: u32, entries: Vec<(u32, f64)>) -> SimilarityRow {
        SimilarityRow::new(
            target,
            RowKind::Single {
                measure: Measure::Diffusion,
                channel: Channel::Object,
            },
            entries,
        )
    }

    #[test]
    fn everything_collected_gives_empty_scores() {
        let s = score_objects(&f1(), &row(0, vec![(1, 0.25), (2, 0.25)])).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn f2_scores() {
        let s = score_objects(&f2(), &row(0, vec![(1, 0.25), (2, 0.25)])).unwrap();
        assert_eq!(s.entries, vec![(2, 0.25)]);
    }

    #[test]
    fn self_entry_ignored() {
        let with_self = score_objects(&f2(), &row(0, vec![(0, 0.5), (1, 0.25), (2, 0.25)])).unwrap();
        assert_eq!(with_self.entries, vec![(2, 0.25)]);
    }

    #[test]
    fn empty_row_gives_empty_scores() {
        assert!(score_objects(&f2(), &row(0, vec![])).unwrap().is_empty());
    }

    #[test]
    fn top_l_orders_and_breaks_ties() {
        let s = ScoreVector {
            target: 0,
            entries: vec![(3, 0.25), (4, 0.9), (5, 0.25)],
        };
        let list = top_l(&s, 2).unwrap();
        assert_eq!(list.objects().collect::<Vec<_>>(), vec![4, 3]);
        let all = top_l(&s, 10).unwrap();
        assert_eq!(all.objects().collect::<Vec<_>>(), vec![4, 3, 5]);
        assert!(top_l(&ScoreVector { target: 0, entries: vec![] }, 3).unwrap().is_empty());
        assert!(top_l(&s, 0).is_err());
    }

    #[test]
    fn recommend_on_f2_channels_disagree() {
        // Only o3 is uncollected by u1; it reaches u1 through u2 in both
        // channels but with weight s(u2,u1)=0.25 on objects and 0.5 on tags.
        let ds = f2();
        let obj = recommend(&ds, Measure::Diffusion, 1.0, 0, 10).unwrap();
        assert_eq!(obj.entries, vec![(2, 0.25)]);
        let tag = recommend(&ds, Measure::Diffusion, 0.0, 0, 10).unwrap();
        assert_eq!(tag.entries, vec![(2, 0.5)]);
    }

    #[test]
    fn scorer_reuse_is_clean() {
        let ds = f2();
        let mut scorer = Scorer::new();
        let a = scorer.score(ds.user_object(), &row(0, vec![(1, 0.25), (2, 0.25)])).unwrap();
        let b = scorer.score(ds.user_object(), &row(2, vec![(0, 0.5), (1, 0.1)])).unwrap();
        let a2 = scorer.score(ds.user_object(), &row(0, vec![(1, 0.25), (2, 0.25)])).unwrap();
        assert_eq!(a, a2);
        // u3 holds o2; u1 contributes o1 (0.5), u2 contributes o1 and o3 (0.1)
        assert_eq!(b.entries, vec![(0, 0.6), (2, 0.1)]);
    }
}
