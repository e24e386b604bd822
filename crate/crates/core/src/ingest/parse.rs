//! Parsing of delimited object-event and tag-event logs.
//!
//! Both files are UTF-8, one event per line. The delimiter (tab, comma, or the
//! MovieLens `::`) is detected from the first non-empty line. A first line
//! whose leading field is not numeric is treated as a header and skipped.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectEvent {
    pub user: String,
    pub object: String,
    pub rating: Option<f32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagEvent {
    pub user: String,
    /// Carried through but not used by the model.
    pub object: Option<String>,
    pub tag: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawRecords {
    pub object_events: Vec<ObjectEvent>,
    pub tag_events: Vec<TagEvent>,
}

impl RawRecords {
    pub fn is_empty(&self) -> bool {
        self.object_events.is_empty() && self.tag_events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stream {
    Objects,
    Tags,
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stream::Objects => "objects",
            Stream::Tags => "tags",
        })
    }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub stream: Stream,
    /// 1-based line number.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} line {}: {}", self.stream, self.line, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    /// Object events with a rating below this are dropped. Events without a
    /// rating column are always kept.
    pub rating_threshold: i32,
    /// Trim and lowercase tag text.
    pub normalize_tags: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            rating_threshold: 0,
            normalize_tags: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub records: RawRecords,
    pub errors: Vec<LineError>,
    /// Object events dropped by the rating threshold.
    pub below_threshold: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Tab,
    Comma,
    DoubleColon,
}

fn detect_delimiter(text: &str) -> Delimiter {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains("::") {
        Delimiter::DoubleColon
    } else if first.contains('\t') {
        Delimiter::Tab
    } else {
        Delimiter::Comma
    }
}

fn is_numeric(field: &str) -> bool {
    let f = field.trim();
    !f.is_empty() && f.parse::<f64>().is_ok()
}

/// Calls `on_record(line, fields)` for each data record of `text`, skipping a
/// leading header line and blank lines.
fn for_each_record(
    text: &str,
    stream: Stream,
    errors: &mut Vec<LineError>,
    mut on_record: impl FnMut(u64, &csv::StringRecord) -> std::result::Result<(), String>,
) {
    let delimiter = detect_delimiter(text);
    let converted;
    let (body, delim, quoting) = match delimiter {
        Delimiter::Comma => (text, b',', true),
        Delimiter::Tab => (text, b'\t', false),
        Delimiter::DoubleColon => {
            converted = text.replace("::", "\t");
            (converted.as_str(), b'\t', false)
        }
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delim)
        .quoting(quoting)
        .from_reader(body.as_bytes());

    let mut first = true;
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.iter().all(|f| f.trim().is_empty()) {
                    continue;
                }
                let was_first = std::mem::replace(&mut first, false);
                if was_first && !is_numeric(&record[0]) {
                    continue;
                }
                if let Err(message) = on_record(line, &record) {
                    errors.push(LineError {
                        stream,
                        line,
                        message,
                    });
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(LineError {
                    stream,
                    line,
                    message: e.to_string(),
                });
                if !matches!(e.kind(), csv::ErrorKind::Utf8 { .. }) {
                    break;
                }
            }
        }
    }
}

fn required<'a>(record: &'a csv::StringRecord, i: usize, name: &str) -> std::result::Result<&'a str, String> {
    match record.get(i).map(str::trim) {
        Some(f) if !f.is_empty() => Ok(f),
        _ => Err(format!("missing {name} field")),
    }
}

fn parse_rating(field: &str) -> std::result::Result<Option<f32>, String> {
    let f = field.trim();
    if f.is_empty() {
        return Ok(None);
    }
    let value: f32 = f.parse().map_err(|_| format!("invalid rating `{f}`"))?;
    // Half-star scales (0.5..=5) occur in later MovieLens releases.
    if !(0.5..=5.0).contains(&value) {
        return Err(format!("rating {value} outside 0.5..=5"));
    }
    Ok(Some(value))
}

/// Normalizes a tag the way ingestion does: trimmed and lowercased.
pub fn normalize_tag(tag: &str) -> String {
    tag.trim().to_lowercase()
}

/// Parses object and tag event text. Malformed lines are collected in the
/// outcome rather than aborting the parse.
pub fn parse(object_text: &str, tag_text: &str, options: &ParseOptions) -> ParseOutcome {
    let mut out = ParseOutcome::default();
    let threshold = options.rating_threshold as f32;

    for_each_record(object_text, Stream::Objects, &mut out.errors, |_, rec| {
        let user = required(rec, 0, "user")?;
        let object = required(rec, 1, "object")?;
        let rating = match rec.get(2) {
            Some(f) => parse_rating(f)?,
            None => None,
        };
        if matches!(rating, Some(r) if r < threshold) {
            out.below_threshold += 1;
            return Ok(());
        }
        out.records.object_events.push(ObjectEvent {
            user: user.to_owned(),
            object: object.to_owned(),
            rating,
        });
        Ok(())
    });

    for_each_record(tag_text, Stream::Tags, &mut out.errors, |_, rec| {
        let user = required(rec, 0, "user")?;
        let (object, raw_tag) = if rec.len() == 2 {
            (None, rec.get(1).unwrap_or(""))
        } else {
            let object = rec.get(1).map(str::trim).filter(|s| !s.is_empty());
            (object.map(str::to_owned), rec.get(2).unwrap_or(""))
        };
        let tag = if options.normalize_tags {
            normalize_tag(raw_tag)
        } else {
            raw_tag.to_owned()
        };
        if tag.trim().is_empty() {
            return Err("missing tag field".into());
        }
        out.records.tag_events.push(TagEvent {
            user: user.to_owned(),
            object,
            tag,
        });
        Ok(())
    });

    out
}

/// Reads both files and parses them.
pub fn parse_files(objects: &Path, tags: &Path, options: &ParseOptions) -> Result<ParseOutcome> {
    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
    let object_text = read(objects)?;
    let tag_text = read(tags)?;
    Ok(parse(&object_text, &tag_text, options))
}
