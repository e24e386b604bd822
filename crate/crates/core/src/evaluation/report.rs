//! CSV and JSON serialization of experiment reports.
//!
//! Metric values are written in scientific notation with 17 significant
//! digits, which parses back to the identical `f64`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::experiment::{Cell, CellMetrics, MeanRow, Metric, MetricsReport, Optimum, UNDEFINED_CELL};
use crate::similarity::Measure;

/// Formats a value with 17 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell_header(list_lengths: &[usize]) -> Vec<String> {
    let mut h: Vec<String> = ["similarity", "lambda", "run", "seed", "test_count", "rank_score"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(list_lengths.iter().map(|l| format!("recall@{l}")));
    h.extend(list_lengths.iter().map(|l| format!("precision@{l}")));
    h.extend(list_lengths.iter().map(|l| format!("hits@{l}")));
    h
}

/// Writes the per-cell table for one or more reports sharing list lengths.
/// Undefined cells have empty metric fields.
pub fn write_cells_csv<W: Write>(reports: &[MetricsReport], out: W) -> Result<()> {
    let list_lengths = match reports.first() {
        Some(r) => r.config.list_lengths.clone(),
        None => Vec::new(),
    };
    if reports.iter().any(|r| r.config.list_lengths != list_lengths) {
        return Err(Error::InvalidArgument(
            "reports with different list lengths cannot share a table".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(cell_header(&list_lengths))?;
    for report in reports {
        for cell in &report.cells {
            let mut rec = vec![
                report.measure.to_string(),
                cell.lambda.to_string(),
                cell.run.to_string(),
                cell.seed.to_string(),
            ];
            match &cell.metrics {
                Some(m) => {
                    rec.push(m.test_count.to_string());
                    rec.push(format_value(m.rank_score));
                    rec.extend(list_lengths.iter().map(|l| format_value(m.recall[l])));
                    rec.extend(list_lengths.iter().map(|l| format_value(m.precision[l])));
                    rec.extend(list_lengths.iter().map(|l| m.hits[l].to_string()));
                }
                None => rec.extend(std::iter::repeat_n(String::new(), 2 + 3 * list_lengths.len())),
            }
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// One parsed row of a cell table.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub measure: Measure,
    pub cell: Cell,
}

fn parse_field<T: std::str::FromStr>(value: &str, column: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value `{value}` in column {column}")))
}

/// Reads a table produced by [`write_cells_csv`].
pub fn read_cells_csv<R: Read>(input: R) -> Result<Vec<CellRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &str| {
        column(name).ok_or_else(|| Error::InvalidArgument(format!("missing column {name}")))
    };
    let list_lengths: Vec<usize> = headers
        .iter()
        .filter_map(|h| h.strip_prefix("recall@"))
        .map(|l| parse_field(l, "recall@L"))
        .collect::<Result<_>>()?;
    let (c_sim, c_lambda, c_run, c_seed, c_np, c_rank) = (
        required("similarity")?,
        required("lambda")?,
        required("run")?,
        required("seed")?,
        required("test_count")?,
        required("rank_score")?,
    );

    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let measure: Measure = rec[c_sim].parse()?;
        let metrics = if rec[c_rank].is_empty() {
            None
        } else {
            let mut recall = BTreeMap::new();
            let mut precision = BTreeMap::new();
            let mut hits = BTreeMap::new();
            for &l in &list_lengths {
                let get = |prefix: &str| -> Result<&str> {
                    let name = format!("{prefix}@{l}");
                    Ok(&rec[required(&name)?])
                };
                recall.insert(l, parse_field(get("recall")?, "recall")?);
                precision.insert(l, parse_field(get("precision")?, "precision")?);
                hits.insert(l, parse_field(get("hits")?, "hits")?);
            }
            Some(CellMetrics {
                test_count: parse_field(&rec[c_np], "test_count")?,
                rank_score: parse_field(&rec[c_rank], "rank_score")?,
                hits,
                recall,
                precision,
            })
        };
        let error = metrics
            .is_none()
            .then(|| UNDEFINED_CELL.to_owned());
        rows.push(CellRow {
            measure,
            cell: Cell {
                lambda: parse_field(&rec[c_lambda], "lambda")?,
                run: parse_field(&rec[c_run], "run")?,
                seed: parse_field(&rec[c_seed], "seed")?,
                metrics,
                error,
            },
        });
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
struct SummaryEntry<'a> {
    similarity: Measure,
    users: usize,
    runs: usize,
    train_fraction: f64,
    base_seed: u64,
    means: &'a [MeanRow],
    optima: &'a [Optimum],
    /// Relative gain of each metric's optimum over λ = 1.
    improvement_over_tag_free: BTreeMap<Metric, f64>,
}

/// Summary (means and optima) as pretty JSON.
pub fn write_summary_json<W: Write>(reports: &[MetricsReport], out: W) -> Result<()> {
    let entries: Vec<SummaryEntry> = reports
        .iter()
        .map(|r| SummaryEntry {
            similarity: r.measure,
            users: r.users,
            runs: r.config.runs,
            train_fraction: r.config.train_fraction,
            base_seed: r.config.base_seed,
            means: &r.means,
            optima: &r.optima,
            improvement_over_tag_free: r
                .metrics()
                .into_iter()
                .filter_map(|m| Some((m, r.improvement_over_tag_free(m)?)))
                .collect(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &entries)?;
    Ok(())
}

/// Summary as a long CSV table: `record,similarity,metric,lambda,value`
/// where `record` is `mean`, `optimum` or `improvement`.
pub fn write_summary_csv<W: Write>(reports: &[MetricsReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["record", "similarity", "metric", "lambda", "value"])?;
    for r in reports {
        let sim = r.measure.to_string();
        for row in &r.means {
            for (metric, value) in &row.values {
                w.write_record([
                    "mean",
                    &sim,
                    &metric.to_string(),
                    &row.lambda.to_string(),
                    &format_value(*value),
                ])?;
            }
        }
        for o in &r.optima {
            w.write_record([
                "optimum",
                &sim,
                &o.metric.to_string(),
                &o.lambda.to_string(),
                &format_value(o.value),
            ])?;
        }
        for m in r.metrics() {
            if let (Some(gain), Some(o)) = (r.improvement_over_tag_free(m), r.optimum(m)) {
                w.write_record([
                    "improvement",
                    &sim,
                    &m.to_string(),
                    &o.lambda.to_string(),
                    &format_value(gain),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::experiment::ExperimentConfig;
    use proptest::prelude::*;

    fn report(values: &[(f64, Option<(f64, u64)>)]) -> MetricsReport {
        let cells = values
            .iter()
            .enumerate()
            .map(|(i, &(lambda, m))| Cell {
                lambda,
                run: i % 2,
                seed: 40 + i as u64,
                metrics: m.map(|(rank, hits)| CellMetrics {
                    test_count: 7,
                    rank_score: rank,
                    hits: BTreeMap::from([(10, hits)]),
                    recall: BTreeMap::from([(10, hits as f64 / 7.0)]),
                    precision: BTreeMap::from([(10, hits as f64 / 30.0)]),
                }),
                error: m.is_none().then(|| UNDEFINED_CELL.to_owned()),
            })
            .collect();
        MetricsReport {
            measure: Measure::Diffusion,
            users: 3,
            config: ExperimentConfig {
                list_lengths: vec![10],
                ..ExperimentConfig::default()
            },
            cells,
            means: vec![],
            optima: vec![],
        }
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_exact(
            values in prop::collection::vec(
                (0.0f64..=1.0, prop::option::of((1e-9f64..=1.0, 0u64..8))),
                1..20,
            )
        ) {
            let r = report(&values);
            let mut buf = Vec::new();
            write_cells_csv(std::slice::from_ref(&r), &mut buf).unwrap();
            let rows = read_cells_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(rows.len(), r.cells.len());
            for (row, cell) in rows.iter().zip(&r.cells) {
                prop_assert_eq!(row.measure, Measure::Diffusion);
                prop_assert_eq!(&row.cell, cell);
            }
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_cells_csv(&[report(&[(0.5, Some((0.25, 2)))])], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "similarity,lambda,run,seed,test_count,rank_score,recall@10,precision@10,hits@10"
        );
    }
}
