//! C ABI over the `tridiff` library.
//!
//! Objects cross the boundary as opaque handles (`TridiffDataset`,
//! `TridiffReport`) that the caller releases with the matching `_free`
//! function. Every fallible call returns a [`TridiffStatus`]; on failure a
//! message is available from [`tridiff_last_error`] on the same thread.
//!
//! Arrays are returned through caller-owned buffers: pass a capacity and an
//! out-length. When the buffer is too small the call returns
//! `TRIDIFF_STATUS_BUFFER_TOO_SMALL` with the required length written, so a
//! caller can size the buffer with a first call of capacity 0.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use tridiff::evaluation::report::write_cells_csv;
use tridiff::evaluation::{lambda_grid, run_experiment, ExperimentConfig, Metric, MetricsReport};
use tridiff::ingest::{core_filter, parse_files, ParseOptions};
use tridiff::similarity::RowBuilder;
use tridiff::{fuse, Channel, Error, Measure, TripartiteDataset};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TridiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    IndexOutOfRange = 3,
    UnknownId = 4,
    EmptyDataset = 5,
    UndefinedMetric = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TridiffMeasure {
    Diffusion = 0,
    Cosine = 1,
    Jaccard = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TridiffMetric {
    RankScore = 0,
    /// Needs a list length.
    Recall = 1,
    /// Needs a list length.
    Precision = 2,
}

/// Sweep configuration. `list_lengths` points at `list_lengths_len` values.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TridiffExperimentConfig {
    pub measure: TridiffMeasure,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub runs: u32,
    pub train_fraction: f64,
    pub base_seed: u64,
    pub list_lengths: *const u32,
    pub list_lengths_len: usize,
}

/// Opaque dataset handle.
pub struct TridiffDataset(TripartiteDataset);

/// Opaque experiment report handle.
pub struct TridiffReport(MetricsReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TridiffStatus {
    match e {
        Error::IndexOutOfRange { .. } => TridiffStatus::IndexOutOfRange,
        Error::InvalidArgument(_) => TridiffStatus::InvalidArgument,
        Error::UndefinedMetric(_) => TridiffStatus::UndefinedMetric,
        Error::UnknownId { .. } => TridiffStatus::UnknownId,
        Error::EmptyDataset => TridiffStatus::EmptyDataset,
        Error::Io { .. } => TridiffStatus::Io,
        Error::Snapshot(_) | Error::Csv(_) | Error::Json(_) => TridiffStatus::Parse,
    }
}

struct Fail(TridiffStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TridiffStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TridiffStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TridiffStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TridiffStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    Ok(PathBuf::from(str_arg(p, what)?))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(TridiffStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn dataset_arg<'a>(p: *const TridiffDataset) -> Result<&'a TripartiteDataset, Fail> {
    p.as_ref().map(|d| &d.0).ok_or_else(|| null("dataset"))
}

fn measure_of(m: TridiffMeasure) -> Measure {
    match m {
        TridiffMeasure::Diffusion => Measure::Diffusion,
        TridiffMeasure::Cosine => Measure::Cosine,
        TridiffMeasure::Jaccard => Measure::Jaccard,
    }
}

fn metric_of(m: TridiffMetric, list_length: u32) -> Metric {
    match m {
        TridiffMetric::RankScore => Metric::RankScore,
        TridiffMetric::Recall => Metric::Recall(list_length as usize),
        TridiffMetric::Precision => Metric::Precision(list_length as usize),
    }
}

/// Copies `pairs` into the two output arrays, or reports the needed length.
unsafe fn write_pairs(
    pairs: &[(u32, f64)],
    out_ids: *mut u32,
    out_values: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> Result<(), Fail> {
    *out_arg(out_len, "out_len")? = pairs.len();
    if pairs.len() > capacity {
        return Err(Fail(
            TridiffStatus::BufferTooSmall,
            format!("need room for {} entries, got {capacity}", pairs.len()),
        ));
    }
    if pairs.is_empty() {
        return Ok(());
    }
    if out_ids.is_null() || out_values.is_null() {
        return Err(null("output array"));
    }
    for (i, &(id, v)) in pairs.iter().enumerate() {
        *out_ids.add(i) = id;
        *out_values.add(i) = v;
    }
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tridiff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tridiff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses rating and tag files, applies the core filter and returns the
/// dataset. Ratings below `rating_threshold` are dropped (0 keeps all).
/// Malformed lines are skipped; their count is written to `out_bad_lines`
/// when it is not NULL.
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_from_files(
    objects_path: *const c_char,
    tags_path: *const c_char,
    rating_threshold: i32,
    out_dataset: *mut *mut TridiffDataset,
    out_bad_lines: *mut usize,
) -> TridiffStatus {
    guard(|| {
        let out = out_arg(out_dataset, "out_dataset")?;
        let objects = path_arg(objects_path, "objects_path")?;
        let tags = path_arg(tags_path, "tags_path")?;
        let options = ParseOptions {
            rating_threshold,
            ..ParseOptions::default()
        };
        let parsed = parse_files(&objects, &tags, &options)?;
        if let Some(n) = out_bad_lines.as_mut() {
            *n = parsed.errors.len();
        }
        let filtered = core_filter(&parsed.records);
        if filtered.dataset.user_count() == 0 {
            return Err(Error::EmptyDataset.into());
        }
        *out = Box::into_raw(Box::new(TridiffDataset(filtered.dataset)));
        Ok(())
    })
}

/// Loads a dataset written by `tridiff ingest` or [`tridiff_dataset_save`].
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_load(dir: *const c_char, out_dataset: *mut *mut TridiffDataset) -> TridiffStatus {
    guard(|| {
        let out = out_arg(out_dataset, "out_dataset")?;
        let ds = tridiff::snapshot::load(&path_arg(dir, "dir")?)?;
        *out = Box::into_raw(Box::new(TridiffDataset(ds)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_save(dataset: *const TridiffDataset, dir: *const c_char) -> TridiffStatus {
    guard(|| {
        tridiff::snapshot::save(dataset_arg(dataset)?, &path_arg(dir, "dir")?)?;
        Ok(())
    })
}

/// Releases a dataset. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_free(dataset: *mut TridiffDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Entity and edge counts. Any out pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_counts(
    dataset: *const TridiffDataset,
    out_users: *mut usize,
    out_objects: *mut usize,
    out_tags: *mut usize,
    out_object_edges: *mut usize,
    out_tag_edges: *mut usize,
) -> TridiffStatus {
    guard(|| {
        let s = dataset_arg(dataset)?.summary();
        for (p, v) in [
            (out_users, s.users),
            (out_objects, s.objects),
            (out_tags, s.tags),
            (out_object_edges, s.user_object_edges),
            (out_tag_edges, s.user_tag_edges),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Dense index of the user with external id `user_id`.
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_user_index(
    dataset: *const TridiffDataset,
    user_id: *const c_char,
    out_index: *mut u32,
) -> TridiffStatus {
    guard(|| {
        let ds = dataset_arg(dataset)?;
        let id = str_arg(user_id, "user_id")?;
        let out = out_arg(out_index, "out_index")?;
        *out = ds.users().index_of(id).ok_or_else(|| Error::UnknownId {
            kind: "user",
            id: id.to_owned(),
        })?;
        Ok(())
    })
}

/// Copies the external id of object `index` into `buf` (NUL-terminated).
/// `out_len` receives the id length excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn tridiff_dataset_object_id(
    dataset: *const TridiffDataset,
    index: u32,
    buf: *mut c_char,
    capacity: usize,
    out_len: *mut usize,
) -> TridiffStatus {
    guard(|| {
        let ds = dataset_arg(dataset)?;
        let id = ds.objects().id(index).ok_or(Error::IndexOutOfRange {
            kind: "object",
            index: index as usize,
            count: ds.object_count(),
        })?;
        *out_arg(out_len, "out_len")? = id.len();
        if id.len() + 1 > capacity {
            return Err(Fail(
                TridiffStatus::BufferTooSmall,
                format!("need {} bytes, got {capacity}", id.len() + 1),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(id.as_ptr().cast::<c_char>(), buf, id.len());
        *buf.add(id.len()) = 0;
        Ok(())
    })
}

/// Fused similarity row of `user`: `λ·object + (1−λ)·tag`, as parallel
/// arrays of user indices (ascending) and scores.
#[no_mangle]
pub unsafe extern "C" fn tridiff_similarity_row(
    dataset: *const TridiffDataset,
    measure: TridiffMeasure,
    lambda: f64,
    user: u32,
    out_users: *mut u32,
    out_scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> TridiffStatus {
    guard(|| {
        let ds = dataset_arg(dataset)?;
        let m = measure_of(measure);
        let mut rows = RowBuilder::new();
        let o = rows.channel_row(m, ds, Channel::Object, user)?;
        let t = rows.channel_row(m, ds, Channel::Tag, user)?;
        let row = fuse(&o, &t, lambda)?;
        write_pairs(row.entries(), out_users, out_scores, capacity, out_len)
    })
}

/// Top-`list_length` recommendations for `user`, best first, as parallel
/// arrays of object indices and scores. The list may be shorter than
/// `list_length` when fewer objects score above zero.
#[no_mangle]
pub unsafe extern "C" fn tridiff_recommend(
    dataset: *const TridiffDataset,
    measure: TridiffMeasure,
    lambda: f64,
    user: u32,
    list_length: usize,
    out_objects: *mut u32,
    out_scores: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> TridiffStatus {
    guard(|| {
        let ds = dataset_arg(dataset)?;
        let list = tridiff::recommend(ds, measure_of(measure), lambda, user, list_length)?;
        write_pairs(&list.entries, out_objects, out_scores, capacity, out_len)
    })
}

/// Fills `out` with the default sweep: diffusion, λ = 0, 0.02, …, 1, five
/// runs at a 90/10 split, base seed 0, list lengths 10 and 20.
#[no_mangle]
pub unsafe extern "C" fn tridiff_experiment_config_default(out: *mut TridiffExperimentConfig) -> TridiffStatus {
    static DEFAULT_LENGTHS: [u32; 2] = [10, 20];
    guard(|| {
        *out_arg(out, "out")? = TridiffExperimentConfig {
            measure: TridiffMeasure::Diffusion,
            lambda_min: 0.0,
            lambda_max: 1.0,
            lambda_step: 0.02,
            runs: 5,
            train_fraction: 0.9,
            base_seed: 0,
            list_lengths: DEFAULT_LENGTHS.as_ptr(),
            list_lengths_len: DEFAULT_LENGTHS.len(),
        };
        Ok(())
    })
}

/// Runs the repeated hold-out sweep.
#[no_mangle]
pub unsafe extern "C" fn tridiff_run_experiment(
    dataset: *const TridiffDataset,
    config: *const TridiffExperimentConfig,
    out_report: *mut *mut TridiffReport,
) -> TridiffStatus {
    guard(|| {
        let ds = dataset_arg(dataset)?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let out = out_arg(out_report, "out_report")?;
        let list_lengths = match c.list_lengths_len {
            0 => Vec::new(),
            n if c.list_lengths.is_null() => return Err(null(&format!("list_lengths (len {n})"))),
            n => std::slice::from_raw_parts(c.list_lengths, n)
                .iter()
                .map(|&l| l as usize)
                .collect(),
        };
        let config = ExperimentConfig {
            measure: measure_of(c.measure),
            lambda_grid: lambda_grid(c.lambda_min, c.lambda_max, c.lambda_step)?,
            runs: c.runs as usize,
            train_fraction: c.train_fraction,
            list_lengths,
            base_seed: c.base_seed,
        };
        let report = run_experiment(ds, &config)?;
        *out = Box::into_raw(Box::new(TridiffReport(report)));
        Ok(())
    })
}

/// Releases a report. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn tridiff_report_free(report: *mut TridiffReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn report_arg<'a>(p: *const TridiffReport) -> Result<&'a MetricsReport, Fail> {
    p.as_ref().map(|r| &r.0).ok_or_else(|| null("report"))
}

/// Number of cells (λ values × runs).
#[no_mangle]
pub unsafe extern "C" fn tridiff_report_cell_count(report: *const TridiffReport, out_count: *mut usize) -> TridiffStatus {
    guard(|| {
        *out_arg(out_count, "out_count")? = report_arg(report)?.cells.len();
        Ok(())
    })
}

/// Mean of `metric` over runs at grid value `lambda`. `list_length` is
/// ignored for the rank score.
#[no_mangle]
pub unsafe extern "C" fn tridiff_report_mean(
    report: *const TridiffReport,
    metric: TridiffMetric,
    list_length: u32,
    lambda: f64,
    out_value: *mut f64,
) -> TridiffStatus {
    guard(|| {
        let r = report_arg(report)?;
        let out = out_arg(out_value, "out_value")?;
        let m = metric_of(metric, list_length);
        *out = r.mean_at(lambda, m).ok_or_else(|| {
            Fail(
                TridiffStatus::UndefinedMetric,
                format!("no mean for {m} at lambda {lambda}"),
            )
        })?;
        Ok(())
    })
}

/// Best grid point for `metric`: lowest rank score, highest recall or
/// precision.
#[no_mangle]
pub unsafe extern "C" fn tridiff_report_optimum(
    report: *const TridiffReport,
    metric: TridiffMetric,
    list_length: u32,
    out_lambda: *mut f64,
    out_value: *mut f64,
) -> TridiffStatus {
    guard(|| {
        let r = report_arg(report)?;
        let m = metric_of(metric, list_length);
        let o = r
            .optimum(m)
            .ok_or_else(|| Fail(TridiffStatus::UndefinedMetric, format!("no optimum for {m}")))?;
        *out_arg(out_lambda, "out_lambda")? = o.lambda;
        *out_arg(out_value, "out_value")? = o.value;
        Ok(())
    })
}

/// Writes the per-cell CSV table to `path`.
#[no_mangle]
pub unsafe extern "C" fn tridiff_report_write_cells_csv(report: *const TridiffReport, path: *const c_char) -> TridiffStatus {
    guard(|| {
        let r = report_arg(report)?;
        let path = path_arg(path, "path")?;
        let file = std::fs::File::create(&path)
            .map_err(|e| Fail(TridiffStatus::Io, format!("{}: {e}", path.display())))?;
        write_cells_csv(std::slice::from_ref(r), std::io::BufWriter::new(file))?;
        Ok(())
    })
}
