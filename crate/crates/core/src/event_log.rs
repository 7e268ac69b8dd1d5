//! Event log ingestion.
//!
//! A log is read from CSV, grouped into traces by case id and indexed over a
//! global activity alphabet. Activity indices are dense (`0..alphabet.len()`)
//! and assigned in order of first occurrence when the traces are scanned in
//! log order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

/// Index of an activity within an [`EventLog`] alphabet.
pub type ActivityId = usize;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("log contains no events")]
    EmptyLog,
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: cannot parse timestamp `{value}`")]
    BadTimestamp { line: u64, value: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub index: ActivityId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<ActivityId>,
}

impl Trace {
    pub fn new(case_id: impl Into<String>, events: Vec<ActivityId>) -> Self {
        Trace {
            case_id: case_id.into(),
            events,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// How events are ordered inside a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventOrdering {
    FileOrder,
    Timestamp,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub case_column: String,
    pub activity_column: String,
    /// When set, events within a case are stably sorted by this column.
    pub time_column: Option<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            case_column: "case_id".to_string(),
            activity_column: "activity".to_string(),
            time_column: None,
        }
    }
}

impl IngestOptions {
    pub fn ordering(&self) -> EventOrdering {
        if self.time_column.is_some() {
            EventOrdering::Timestamp
        } else {
            EventOrdering::FileOrder
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    pub alphabet: Vec<Activity>,
    pub traces: Vec<Trace>,
}

impl EventLog {
    /// Builds a log from labelled traces, assigning activity indices by first
    /// occurrence.
    pub fn from_labeled<I, S, L>(traces: I) -> Self
    where
        I: IntoIterator<Item = (S, Vec<L>)>,
        S: Into<String>,
        L: AsRef<str>,
    {
        let mut builder = AlphabetBuilder::default();
        let traces = traces
            .into_iter()
            .map(|(case, labels)| {
                let events = labels.iter().map(|l| builder.intern(l.as_ref())).collect();
                Trace::new(case, events)
            })
            .collect();
        EventLog {
            alphabet: builder.finish(),
            traces,
        }
    }

    /// Convenience for single-character activity labels, e.g. `("1", "abaad")`.
    pub fn from_strings<'a>(traces: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self::from_labeled(traces.into_iter().map(|(case, s)| {
            (
                case.to_string(),
                s.chars().map(|c| c.to_string()).collect::<Vec<_>>(),
            )
        }))
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn labels(&self) -> Vec<String> {
        self.alphabet.iter().map(|a| a.label.clone()).collect()
    }

    pub fn label(&self, id: ActivityId) -> &str {
        &self.alphabet[id].label
    }

    pub fn activity_id(&self, label: &str) -> Option<ActivityId> {
        self.alphabet.iter().position(|a| a.label == label)
    }

    /// Writes the log as a two-column CSV (`case_id,activity`), one row per
    /// event, traces in log order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LogError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["case_id", "activity"])?;
        for trace in &self.traces {
            for &e in &trace.events {
                out.write_record([trace.case_id.as_str(), self.label(e)])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Default)]
struct AlphabetBuilder {
    index: HashMap<String, ActivityId>,
    labels: Vec<String>,
}

impl AlphabetBuilder {
    fn intern(&mut self, label: &str) -> ActivityId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    fn finish(self) -> Vec<Activity> {
        self.labels
            .into_iter()
            .enumerate()
            .map(|(index, label)| Activity { index, label })
            .collect()
    }
}

pub fn parse_csv_log(path: impl AsRef<Path>, options: &IngestOptions) -> Result<EventLog, LogError> {
    parse_csv_reader(File::open(path)?, options)
}

pub fn parse_csv_reader<R: Read>(reader: R, options: &IngestOptions) -> Result<EventLog, LogError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let width = header.len();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_string()))
    };
    let case_col = column(&options.case_column)?;
    let act_col = column(&options.activity_column)?;
    let time_col = options.time_column.as_deref().map(column).transpose()?;

    // case id -> (position in `cases`), events as (sort key, label)
    let mut case_index: HashMap<String, usize> = HashMap::new();
    let mut cases: Vec<(String, Vec<(i128, String)>)> = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut rows = 0usize;
    while rdr.read_record(&mut record)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            return Err(LogError::MalformedRow {
                line,
                reason: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let case = record[case_col].trim();
        let activity = record[act_col].trim();
        if activity.is_empty() {
            return Err(LogError::MalformedRow {
                line,
                reason: "empty activity label".into(),
            });
        }
        let key = match time_col {
            Some(c) => parse_timestamp(record[c].trim()).ok_or_else(|| LogError::BadTimestamp {
                line,
                value: record[c].to_string(),
            })?,
            None => 0,
        };
        let slot = *case_index.entry(case.to_string()).or_insert_with(|| {
            cases.push((case.to_string(), Vec::new()));
            cases.len() - 1
        });
        cases[slot].1.push((key, activity.to_string()));
        rows += 1;
    }
    if rows == 0 {
        return Err(LogError::EmptyLog);
    }

    let traces = cases.into_iter().map(|(case, mut events)| {
        if time_col.is_some() {
            // stable: ties keep file order
            events.sort_by_key(|(k, _)| *k);
        }
        (case, events.into_iter().map(|(_, l)| l).collect::<Vec<_>>())
    });
    Ok(EventLog::from_labeled(traces))
}

/// Parses an integer epoch (seconds) or an ISO-8601 date/time into
/// nanoseconds since the Unix epoch.
fn parse_timestamp(raw: &str) -> Option<i128> {
    const NANOS: i128 = 1_000_000_000;
    if let Ok(secs) = raw.parse::<i64>() {
        return Some(secs as i128 * NANOS);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return dt.timestamp_nanos_opt().map(i128::from);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return dt.and_utc().timestamp_nanos_opt().map(i128::from);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return d
            .and_hms_opt(0, 0, 0)?
            .and_utc()
            .timestamp_nanos_opt()
            .map(i128::from);
    }
    None
}
