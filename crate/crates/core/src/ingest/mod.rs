//! From raw event logs to filtered datasets and evaluation splits.

pub mod filter;
pub mod parse;
pub mod split;

pub use filter::{core_filter, is_core, CoreFiltered};
pub use parse::{parse, parse_files, LineError, ObjectEvent, ParseOptions, ParseOutcome, RawRecords, TagEvent};
pub use split::{split, training_size, EvaluationSplit};
