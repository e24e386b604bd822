//! Times a full 51-λ × 5-run sweep on a synthetic dataset with roughly the
//! size of a filtered tagged MovieLens sample (~3.7k users, ~5.7k objects).
//!
//!     cargo run --release --example movielens_scale_sweep

use std::time::Instant;

use tridiff::evaluation::{run_experiment, ExperimentConfig, Metric};
use tridiff::ingest::{core_filter, RawRecords};
use tridiff::similarity::Measure;
use tridiff::synthetic::{generate, SyntheticParams};

fn main() {
    let params = SyntheticParams {
        users: 3710,
        objects: 5724,
        tags: 5228,
        groups: 20,
        mean_objects_per_user: 14,
        mean_tags_per_user: 9,
        in_group: 0.7,
        popularity_exponent: 1.0,
    };
    let raw = generate(&params, 2010).expect("generate");
    let dataset = core_filter(&RawRecords::from_dataset(&raw)).dataset;
    println!("dataset: {}", dataset.summary());

    for measure in [Measure::Diffusion, Measure::Cosine] {
        let config = ExperimentConfig {
            measure,
            ..ExperimentConfig::default()
        };
        let start = Instant::now();
        let report = run_experiment(&dataset, &config).expect("sweep");
        let best = report.optimum(Metric::RankScore).expect("defined");
        println!(
            "{measure}: {:.1?} for {} cells; best rank score {:.5} at λ={} (λ=1: {:.5})",
            start.elapsed(),
            report.cells.len(),
            best.value,
            best.lambda,
            report.mean_at(1.0, Metric::RankScore).unwrap_or(f64::NAN),
        );
    }
}
