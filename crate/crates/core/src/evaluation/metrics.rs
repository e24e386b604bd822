//! Ranking score, recall and precision on one split.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Channel;
use crate::error::{Error, Result};
use crate::ingest::EvaluationSplit;
use crate::recommender::{rank_order, Scorer};
use crate::similarity::{fuse, Measure, RowBuilder, SimilarityRow};

/// How the two channel rows are combined before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Blend {
    /// `λ·object + (1−λ)·tag`.
    Lambda(f64),
    /// The object-channel row alone, without fusion.
    ObjectOnly,
    /// The tag-channel row alone, without fusion.
    TagOnly,
}

impl Blend {
    fn validate(self) -> Result<()> {
        match self {
            Blend::Lambda(l) if !(0.0..=1.0).contains(&l) => {
                Err(Error::InvalidArgument(format!("lambda {l} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    fn apply(self, object_row: &SimilarityRow, tag_row: &SimilarityRow) -> Result<SimilarityRow> {
        match self {
            Blend::Lambda(l) => fuse(object_row, tag_row, l),
            Blend::ObjectOnly => Ok(object_row.clone()),
            Blend::TagOnly => Ok(tag_row.clone()),
        }
    }
}

/// Relative midrank of an object scoring `score` among `uncollected`
/// candidates whose positive scores are `positives`; every other candidate
/// scores 0.
///
/// Candidates are ordered by descending score and ranks start at 1. A block
/// of tied candidates shares the mean of the positions it spans.
pub fn relative_midrank(positives: &[(u32, f64)], uncollected: usize, score: f64) -> f64 {
    debug_assert!(uncollected >= 1);
    let (greater, equal) = if score > 0.0 {
        positives.iter().fold((0usize, 0usize), |(g, e), &(_, s)| {
            if s > score {
                (g + 1, e)
            } else if s == score {
                (g, e + 1)
            } else {
                (g, e)
            }
        })
    } else {
        (positives.len(), uncollected - positives.len())
    };
    let midrank = greater as f64 + (equal as f64 + 1.0) / 2.0;
    midrank / uncollected as f64
}

/// Mean of the relative ranks. Undefined for an empty test set.
pub fn ranking_score(ranks: &[f64]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::UndefinedMetric("ranking score over an empty test set"));
    }
    let mut sum = 0.0;
    for &r in ranks {
        sum += r;
    }
    Ok(sum / ranks.len() as f64)
}

/// Hit counts behind recall and precision at one list length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitCount {
    /// Σ_u N_r(u): held-out objects that made it into the top-L lists.
    pub hits: u64,
    /// N_p.
    pub test_count: u64,
    /// m, all users of the filtered dataset.
    pub users: u64,
    pub list_length: u64,
}

impl HitCount {
    pub fn recall(&self) -> Result<f64> {
        if self.test_count == 0 {
            return Err(Error::UndefinedMetric("recall over an empty test set"));
        }
        Ok(self.hits as f64 / self.test_count as f64)
    }

    pub fn precision(&self) -> Result<f64> {
        if self.test_count == 0 {
            return Err(Error::UndefinedMetric("precision over an empty test set"));
        }
        Ok(self.hits as f64 / (self.users * self.list_length) as f64)
    }
}

/// Everything measured for one blend on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvaluation {
    pub blend: Blend,
    /// ((user, object), relative rank) for every held-out pair, ascending.
    pub ranks: Vec<((u32, u32), f64)>,
    pub hits: BTreeMap<usize, HitCount>,
}

impl SplitEvaluation {
    pub fn ranking_score(&self) -> Result<f64> {
        let r: Vec<f64> = self.ranks.iter().map(|&(_, r)| r).collect();
        ranking_score(&r)
    }
}

/// Per-user results for all blends: (relative ranks, hits per list length).
type UserResult = Vec<(Vec<f64>, Vec<u64>)>;

struct Workspace {
    rows: RowBuilder,
    scorer: Scorer,
    positives: Vec<(u32, f64)>,
    top: Vec<(u32, f64)>,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            rows: RowBuilder::new(),
            scorer: Scorer::new(),
            positives: Vec::new(),
            top: Vec::new(),
        }
    }
}

fn evaluate_user(
    ws: &mut Workspace,
    split: &EvaluationSplit,
    measure: Measure,
    blends: &[Blend],
    list_lengths: &[usize],
    user: u32,
) -> Result<UserResult> {
    let training = split.training();
    let graph = training.user_object();
    let tests = split.test_objects(user);
    let uncollected = graph.right_count() - graph.left_degree(user);
    let max_l = list_lengths.iter().copied().max().unwrap_or(0);

    let object_row = ws.rows.channel_row(measure, training, Channel::Object, user)?;
    let tag_row = ws.rows.channel_row(measure, training, Channel::Tag, user)?;

    let mut out = Vec::with_capacity(blends.len());
    for &blend in blends {
        let row = blend.apply(&object_row, &tag_row)?;
        ws.scorer.score_into(graph, &row, false, &mut ws.positives)?;

        let ranks = tests
            .iter()
            .map(|&t| {
                let score = ws
                    .positives
                    .iter()
                    .find(|&&(o, _)| o == t)
                    .map_or(0.0, |&(_, s)| s);
                relative_midrank(&ws.positives, uncollected, score)
            })
            .collect();

        ws.top.clear();
        if max_l > 0 {
            ws.top.extend_from_slice(&ws.positives);
            if ws.top.len() > max_l {
                ws.top.select_nth_unstable_by(max_l - 1, rank_order);
                ws.top.truncate(max_l);
            }
            ws.top.sort_unstable_by(rank_order);
        }
        let hits = list_lengths
            .iter()
            .map(|&l| {
                ws.top
                    .iter()
                    .take(l)
                    .filter(|&&(o, _)| tests.binary_search(&o).is_ok())
                    .count() as u64
            })
            .collect();
        out.push((ranks, hits));
    }
    Ok(out)
}

/// Evaluates every blend on one split.
///
/// Channel rows are computed once per user and reused across blends. Users are
/// processed in parallel; results are reduced in user order so the output
/// does not depend on scheduling.
pub fn evaluate_split(
    split: &EvaluationSplit,
    measure: Measure,
    blends: &[Blend],
    list_lengths: &[usize],
) -> Result<Vec<SplitEvaluation>> {
    for b in blends {
        b.validate()?;
    }
    if list_lengths.contains(&0) {
        return Err(Error::InvalidArgument("list length L must be at least 1".into()));
    }
    let users: Vec<u32> = (0..split.training().user_count() as u32)
        .filter(|&u| !split.test_objects(u).is_empty())
        .collect();

    let per_user: Vec<UserResult> = users
        .par_iter()
        .map_init(Workspace::new, |ws, &u| {
            evaluate_user(ws, split, measure, blends, list_lengths, u)
        })
        .collect::<Result<_>>()?;

    let test_count = split.test_count() as u64;
    let user_count = split.training().user_count() as u64;
    let mut results: Vec<SplitEvaluation> = blends
        .iter()
        .map(|&blend| SplitEvaluation {
            blend,
            ranks: Vec::with_capacity(split.test_count()),
            hits: list_lengths
                .iter()
                .map(|&l| {
                    (
                        l,
                        HitCount {
                            hits: 0,
                            test_count,
                            users: user_count,
                            list_length: l as u64,
                        },
                    )
                })
                .collect(),
        })
        .collect();

    for (&u, user_result) in users.iter().zip(per_user) {
        let tests = split.test_objects(u);
        for (eval, (ranks, hits)) in results.iter_mut().zip(user_result) {
            eval.ranks
                .extend(tests.iter().zip(ranks).map(|(&o, r)| ((u, o), r)));
            for (&l, h) in list_lengths.iter().zip(hits) {
                eval.hits.get_mut(&l).expect("initialized").hits += h;
            }
        }
    }
    Ok(results)
}

/// Relative rank of every held-out pair under blend `λ`.
pub fn rank_of_test_pairs(
    split: &EvaluationSplit,
    measure: Measure,
    lambda: f64,
) -> Result<Vec<((u32, u32), f64)>> {
    let mut evals = evaluate_split(split, measure, &[Blend::Lambda(lambda)], &[])?;
    Ok(evals.pop().map(|e| e.ranks).unwrap_or_default())
}

/// Recall and precision of top-`l` lists under blend `λ`.
pub fn recall_precision_at(
    split: &EvaluationSplit,
    measure: Measure,
    lambda: f64,
    l: usize,
) -> Result<(f64, f64)> {
    let evals = evaluate_split(split, measure, &[Blend::Lambda(lambda)], &[l])?;
    let hit = evals[0].hits[&l];
    Ok((hit.recall()?, hit.precision()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TripartiteDataset;
    use crate::ingest::split;

    fn positives(scores: &[f64]) -> Vec<(u32, f64)> {
        scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(i, &s)| (i as u32, s))
            .collect()
    }

    #[test]
    fn third_of_hundred() {
        let mut scores = vec![0.0; 100];
        scores[10] = 0.9;
        scores[20] = 0.8;
        scores[30] = 0.7; // the held-out object
        scores[40] = 0.1;
        let r = relative_midrank(&positives(&scores), 100, 0.7);
        assert_eq!(r, 0.03);
    }

    #[test]
    fn unique_top_of_ten() {
        let r = relative_midrank(&[(4, 1.0), (5, 0.5)], 10, 1.0);
        assert_eq!(r, 0.1);
    }

    #[test]
    fn all_zero_block_gets_midrank() {
        assert_eq!(relative_midrank(&[], 10, 0.0), 0.55);
    }

    #[test]
    fn ties_within_positive_block() {
        // scores: 0.9, 0.5, 0.5, 0.5, then 6 zeros; a 0.5 object spans 2..4
        let p = [(0, 0.9), (1, 0.5), (2, 0.5), (3, 0.5)];
        assert_eq!(relative_midrank(&p, 10, 0.5), 0.3);
        // zero block spans 5..10
        assert_eq!(relative_midrank(&p, 10, 0.0), 0.75);
    }

    #[test]
    fn ranking_score_mean() {
        assert_eq!(ranking_score(&[0.03]).unwrap(), 0.03);
        assert_eq!(ranking_score(&[0.1, 0.3]).unwrap(), 0.2);
        assert!(matches!(ranking_score(&[]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn hit_count_metrics() {
        let h = HitCount {
            hits: 3,
            test_count: 6,
            users: 4,
            list_length: 10,
        };
        assert_eq!(h.recall().unwrap(), 0.5);
        assert_eq!(h.precision().unwrap(), 3.0 / 40.0);
        let empty = HitCount { test_count: 0, ..h };
        assert!(empty.recall().is_err());
        assert!(empty.precision().is_err());
    }

    /// Users 0 and 1 overlap heavily; user 2 is on its own.
    fn twins() -> TripartiteDataset {
        TripartiteDataset::from_index_edges(
            3,
            4,
            1,
            [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 3)],
            [(0, 0), (1, 0), (2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn perfect_recall_and_no_hits() {
        let ds = twins();
        // Hold out (0, 1); user 1 still holds object 1 in training.
        let s = (0..500)
            .map(|seed| split(&ds, 5.0 / 6.0, seed).unwrap())
            .find(|s| s.test_edges().collect::<Vec<_>>() == vec![(0, 1)])
            .expect("some seed holds out (0, 1)");
        let (r, p) = recall_precision_at(&s, Measure::Diffusion, 1.0, 1).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(p, 1.0 / 3.0);
        let ranks = rank_of_test_pairs(&s, Measure::Diffusion, 1.0).unwrap();
        assert_eq!(ranks.len(), 1);
        // user 0 keeps object 0; candidates 1, 2, 3; object 1 and 2 both
        // come from user 1 with the same weight, object 3 scores 0.
        assert_eq!(ranks[0].0, (0, 1));
        assert_eq!(ranks[0].1, 1.5 / 3.0);

        let s = (0..500)
            .map(|seed| split(&ds, 5.0 / 6.0, seed).unwrap())
            .find(|s| s.test_edges().collect::<Vec<_>>() == vec![(2, 3)])
            .expect("some seed holds out (2, 3)");
        let (r, p) = recall_precision_at(&s, Measure::Diffusion, 1.0, 2).unwrap();
        assert_eq!((r, p), (0.0, 0.0));
        // user 2 has no training objects: everything ties at 0
        let ranks = rank_of_test_pairs(&s, Measure::Diffusion, 1.0).unwrap();
        assert_eq!(ranks[0].1, 2.5 / 4.0);
    }

    #[test]
    fn empty_test_set_is_undefined() {
        let s = split(&twins(), 1.0, 0).unwrap();
        assert!(matches!(
            recall_precision_at(&s, Measure::Diffusion, 0.5, 3),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(rank_of_test_pairs(&s, Measure::Cosine, 0.5).unwrap().is_empty());
    }

    #[test]
    fn invalid_arguments() {
        let s = split(&twins(), 0.5, 0).unwrap();
        assert!(evaluate_split(&s, Measure::Diffusion, &[Blend::Lambda(1.2)], &[10]).is_err());
        assert!(evaluate_split(&s, Measure::Diffusion, &[Blend::Lambda(0.2)], &[0]).is_err());
    }
}
