//! Repeated random splits crossed with a λ grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::TripartiteDataset;
use crate::error::{Error, Result};
use crate::evaluation::metrics::{evaluate_split, Blend, SplitEvaluation};
use crate::ingest::split;
use crate::similarity::Measure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub measure: Measure,
    /// Ascending values in [0, 1].
    pub lambda_grid: Vec<f64>,
    pub runs: usize,
    pub train_fraction: f64,
    pub list_lengths: Vec<usize>,
    /// Run `i` splits with seed `base_seed + i`.
    pub base_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            measure: Measure::Diffusion,
            lambda_grid: lambda_grid(0.0, 1.0, 0.02).expect("valid default grid"),
            runs: 5,
            train_fraction: 0.9,
            list_lengths: vec![10, 20],
            base_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.lambda_grid.is_empty() {
            return bad("lambda grid is empty".into());
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad(format!("lambda {l} outside [0, 1]"));
        }
        if !self.lambda_grid.windows(2).all(|w| w[0] < w[1]) {
            return bad("lambda grid must be strictly increasing".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return bad(format!("train fraction {} outside (0, 1]", self.train_fraction));
        }
        if self.list_lengths.contains(&0) {
            return bad("list length L must be at least 1".into());
        }
        Ok(())
    }

    pub fn seed_for_run(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// `min, min+step, …, max` with values snapped to 10 decimals so that e.g.
/// 0.74 comes out as the literal 0.74.
pub fn lambda_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) || min > max {
        return Err(Error::InvalidArgument(format!(
            "lambda range [{min}, {max}] not within [0, 1]"
        )));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!("lambda step {step} must be positive")));
    }
    let snap = |x: f64| (x * 1e10).round() / 1e10;
    let count = ((max - min) / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count).map(|i| snap(min + i as f64 * step)).collect();
    if grid.last().is_some_and(|&l| l < max && max - l < step * 1e-6) {
        grid.pop();
        grid.push(max);
    }
    grid.dedup();
    Ok(grid)
}

/// A metric reported by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    RankScore,
    Recall(usize),
    Precision(usize),
}

impl Metric {
    /// Whether smaller values are better.
    pub fn lower_is_better(self) -> bool {
        matches!(self, Metric::RankScore)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::RankScore => f.write_str("rank_score"),
            Metric::Recall(l) => write!(f, "recall@{l}"),
            Metric::Precision(l) => write!(f, "precision@{l}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown metric `{s}`"));
        if s == "rank_score" {
            return Ok(Metric::RankScore);
        }
        let (name, l) = s.split_once('@').ok_or_else(bad)?;
        let l: usize = l.parse().map_err(|_| bad())?;
        match name {
            "recall" => Ok(Metric::Recall(l)),
            "precision" => Ok(Metric::Precision(l)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Metrics of one (λ, run) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    /// N_p.
    pub test_count: u64,
    pub rank_score: f64,
    /// Σ_u N_r(u) per list length; recall and precision both derive from it.
    pub hits: BTreeMap<usize, u64>,
    pub recall: BTreeMap<usize, f64>,
    pub precision: BTreeMap<usize, f64>,
}

impl CellMetrics {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::RankScore => Some(self.rank_score),
            Metric::Recall(l) => self.recall.get(&l).copied(),
            Metric::Precision(l) => self.precision.get(&l).copied(),
        }
    }

    fn from_evaluation(eval: &SplitEvaluation) -> Result<Self> {
        let rank_score = eval.ranking_score()?;
        let mut recall = BTreeMap::new();
        let mut precision = BTreeMap::new();
        let mut hits = BTreeMap::new();
        let mut test_count = eval.ranks.len() as u64;
        for (&l, h) in &eval.hits {
            recall.insert(l, h.recall()?);
            precision.insert(l, h.precision()?);
            hits.insert(l, h.hits);
            test_count = h.test_count;
        }
        Ok(CellMetrics {
            test_count,
            rank_score,
            hits,
            recall,
            precision,
        })
    }
}

/// Error text recorded for cells without a defined metric.
pub const UNDEFINED_CELL: &str = "metric undefined: empty test set";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lambda: f64,
    pub run: usize,
    pub seed: u64,
    /// `None` when a metric is undefined for this cell (empty test set).
    pub metrics: Option<CellMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-λ averages over the runs whose metrics are defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanRow {
    pub lambda: f64,
    pub runs: usize,
    pub values: BTreeMap<Metric, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub metric: Metric,
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub measure: Measure,
    /// m, the user count of the evaluated dataset.
    pub users: usize,
    pub config: ExperimentConfig,
    /// Ordered by λ, then run.
    pub cells: Vec<Cell>,
    pub means: Vec<MeanRow>,
    pub optima: Vec<Optimum>,
}

impl MetricsReport {
    pub fn metrics(&self) -> Vec<Metric> {
        let mut out = vec![Metric::RankScore];
        out.extend(self.config.list_lengths.iter().map(|&l| Metric::Recall(l)));
        out.extend(self.config.list_lengths.iter().map(|&l| Metric::Precision(l)));
        out
    }

    pub fn mean_at(&self, lambda: f64, metric: Metric) -> Option<f64> {
        self.means
            .iter()
            .find(|m| m.lambda == lambda)
            .and_then(|m| m.values.get(&metric).copied())
    }

    pub fn optimum(&self, metric: Metric) -> Option<Optimum> {
        self.optima.iter().find(|o| o.metric == metric).copied()
    }

    pub fn cell(&self, lambda: f64, run: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.lambda == lambda && c.run == run)
    }

    /// Relative gain of the optimal mean over the tag-free mean at λ = 1,
    /// positive when the optimum is better. `None` if λ = 1 was not swept.
    pub fn improvement_over_tag_free(&self, metric: Metric) -> Option<f64> {
        let base = self.mean_at(1.0, metric)?;
        let best = self.optimum(metric)?.value;
        Some(if metric.lower_is_better() {
            (base - best) / base
        } else {
            (best - base) / base
        })
    }

    fn finalize(
        measure: Measure,
        users: usize,
        config: ExperimentConfig,
        cells: Vec<Cell>,
    ) -> Self {
        let mut report = MetricsReport {
            measure,
            users,
            config,
            cells,
            means: Vec::new(),
            optima: Vec::new(),
        };
        let metrics = report.metrics();
        for &lambda in &report.config.lambda_grid {
            let defined: Vec<&CellMetrics> = report
                .cells
                .iter()
                .filter(|c| c.lambda == lambda)
                .filter_map(|c| c.metrics.as_ref())
                .collect();
            let mut values = BTreeMap::new();
            if !defined.is_empty() {
                for &metric in &metrics {
                    let mut sum = 0.0;
                    for c in &defined {
                        sum += c.get(metric).unwrap_or(f64::NAN);
                    }
                    values.insert(metric, sum / defined.len() as f64);
                }
            }
            report.means.push(MeanRow {
                lambda,
                runs: defined.len(),
                values,
            });
        }
        for &metric in &metrics {
            let mut best: Option<Optimum> = None;
            for row in &report.means {
                let Some(&value) = row.values.get(&metric) else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some(b) if metric.lower_is_better() => value < b.value,
                    Some(b) => value > b.value,
                };
                if better {
                    best = Some(Optimum {
                        metric,
                        lambda: row.lambda,
                        value,
                    });
                }
            }
            report.optima.extend(best);
        }
        report
    }
}

/// Runs the hold-out protocol: for each run a fresh seeded split, each λ of
/// the grid evaluated on it, then per-λ means and per-metric optima.
///
/// Cells whose metrics are undefined are recorded with an error message;
/// they do not stop the other cells.
pub fn run_experiment(dataset: &TripartiteDataset, config: &ExperimentConfig) -> Result<MetricsReport> {
    config.validate()?;
    let blends: Vec<Blend> = config.lambda_grid.iter().map(|&l| Blend::Lambda(l)).collect();
    let mut by_run: Vec<Vec<Cell>> = Vec::with_capacity(config.runs);
    for run in 0..config.runs {
        let seed = config.seed_for_run(run);
        let split = split(dataset, config.train_fraction, seed)?;
        log::info!(
            "{} run {run}: seed {seed}, {} held-out pairs",
            config.measure,
            split.test_count()
        );
        let evals = evaluate_split(&split, config.measure, &blends, &config.list_lengths)?;
        let cells = evals
            .iter()
            .zip(&config.lambda_grid)
            .map(|(eval, &lambda)| {
                let (metrics, error) = match CellMetrics::from_evaluation(eval) {
                    Ok(m) => (Some(m), None),
                    Err(Error::UndefinedMetric(_)) => (None, Some(UNDEFINED_CELL.to_owned())),
                    Err(e) => return Err(e),
                };
                Ok(Cell {
                    lambda,
                    run,
                    seed,
                    metrics,
                    error,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        by_run.push(cells);
    }

    let mut cells = Vec::with_capacity(config.runs * config.lambda_grid.len());
    for i in 0..config.lambda_grid.len() {
        for run_cells in &by_run {
            cells.push(run_cells[i].clone());
        }
    }
    Ok(MetricsReport::finalize(
        config.measure,
        dataset.user_count(),
        config.clone(),
        cells,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_51_points() {
        let g = lambda_grid(0.0, 1.0, 0.02).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[37], 0.74);
        assert_eq!(g[31], 0.62);
        assert_eq!(g[40], 0.8);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_edge_cases() {
        assert_eq!(lambda_grid(1.0, 1.0, 0.1).unwrap(), vec![1.0]);
        assert_eq!(lambda_grid(0.0, 1.0, 0.3).unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(lambda_grid(0.5, 1.0, 0.1).unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        assert!(lambda_grid(0.0, 1.0, 0.0).is_err());
        assert!(lambda_grid(0.0, 1.5, 0.1).is_err());
        assert!(lambda_grid(0.6, 0.5, 0.1).is_err());
    }

    #[test]
    fn metric_names_roundtrip() {
        for m in [Metric::RankScore, Metric::Recall(10), Metric::Precision(20)] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
        assert!("recall@x".parse::<Metric>().is_err());
        assert!("f1@10".parse::<Metric>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let cases = [
            ExperimentConfig { runs: 0, ..ok.clone() },
            ExperimentConfig { lambda_grid: vec![], ..ok.clone() },
            ExperimentConfig { lambda_grid: vec![0.5, 0.2], ..ok.clone() },
            ExperimentConfig { lambda_grid: vec![1.5], ..ok.clone() },
            ExperimentConfig { train_fraction: 0.0, ..ok.clone() },
            ExperimentConfig { list_lengths: vec![0], ..ok.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn undefined_cells_do_not_abort() {
        let ds = TripartiteDataset::from_index_edges(
            2,
            1,
            1,
            [(0, 0), (1, 0)],
            [(0, 0), (1, 0)],
        )
        .unwrap();
        let config = ExperimentConfig {
            lambda_grid: vec![0.0, 1.0],
            runs: 2,
            train_fraction: 1.0,
            ..ExperimentConfig::default()
        };
        let report = run_experiment(&ds, &config).unwrap();
        assert_eq!(report.cells.len(), 4);
        assert!(report.cells.iter().all(|c| c.metrics.is_none() && c.error.is_some()));
        assert!(report.optima.is_empty());
        assert!(report.means.iter().all(|m| m.runs == 0));
    }

    #[test]
    fn optimum_prefers_first_lambda_on_ties() {
        let cells = [0.0, 0.5, 1.0]
            .iter()
            .map(|&lambda| Cell {
                lambda,
                run: 0,
                seed: 0,
                metrics: Some(CellMetrics {
                    test_count: 4,
                    rank_score: if lambda == 1.0 { 0.4 } else { 0.3 },
                    hits: BTreeMap::from([(10, 1)]),
                    recall: BTreeMap::from([(10, 0.25)]),
                    precision: BTreeMap::from([(10, 0.05)]),
                }),
                error: None,
            })
            .collect();
        let config = ExperimentConfig {
            lambda_grid: vec![0.0, 0.5, 1.0],
            runs: 1,
            list_lengths: vec![10],
            ..ExperimentConfig::default()
        };
        let r = MetricsReport::finalize(Measure::Cosine, 2, config, cells);
        let best = r.optimum(Metric::RankScore).unwrap();
        assert_eq!((best.lambda, best.value), (0.0, 0.3));
        assert_eq!(r.optimum(Metric::Recall(10)).unwrap().lambda, 0.0);
        let gain = r.improvement_over_tag_free(Metric::RankScore).unwrap();
        assert!((gain - 0.25).abs() < 1e-12);
    }
}
