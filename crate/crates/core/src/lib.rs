//! Tag-aware user-based collaborative filtering.
//!
//! Users are linked to the objects they collected and to the tags they used,
//! giving two bipartite graphs over a shared user index. User similarities are
//! computed on each graph (mass diffusion, cosine or Jaccard), fused linearly
//! with a weight `λ` on the object graph, and turned into top-L
//! recommendations. The [`evaluation`] module runs the hold-out protocol
//! (ranking score, recall and precision over a `λ` sweep).

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod index;
pub mod ingest;
pub mod recommender;
pub mod similarity;
pub mod snapshot;
pub mod synthetic;

#[doc(hidden)]
pub mod cli;

pub use dataset::{Channel, DatasetSummary, TripartiteDataset};
pub use error::{Error, Result};
pub use graph::BipartiteGraph;
pub use index::EntityIndexMap;
pub use recommender::{recommend, score_objects, top_l, RecommendationList, ScoreVector};
pub use similarity::{cosine_row, diffusion_row, fuse, jaccard_row, spread, Measure, RowKind, SimilarityRow};
