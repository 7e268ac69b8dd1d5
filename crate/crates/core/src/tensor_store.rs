//! Tab-separated text serialization for tensor datasets and prediction sets.
//!
//! ```text
//! #!version       1
//! #!alphabet_size 3
//! #!activity      0   A_Declined
//! ...
//! #!profile_size  14
//! #!channel       0   absence:1
//! ...
//! #!scheme        fixed-count:5
//! #!trace_count   2
//! #!trace         0   5   173688
//! ...
//! 0   173688  4   0   1   11
//! ```
//!
//! Header lines start with `#!` and hold `key<TAB>value[<TAB>value...]`.
//! `trace` entries list `ordinal, window_count, case_id` so traces and windows
//! without any cell survive a round trip. Body lines are
//! `trace_ordinal case_id window_index row col channel`, with a trailing
//! `score` column in prediction files, sorted by
//! `(trace_ordinal, window_index, row, col, channel)` without duplicates.
//! Prediction records only address each trace's last window.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::declare::{ConstraintProfile, Template};
use crate::miner::{Cell, TensorSlice, TraceTensor};
use crate::windowing::WindowingScheme;

pub const FORMAT_VERSION: &str = "1";

/// Predictors may leave out cells scoring below this; they read back as 0.
pub const SPARSITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("cannot serialize: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_err(line: usize, reason: impl Into<String>) -> StoreError {
    StoreError::Format {
        line,
        reason: reason.into(),
    }
}

/// Shape and provenance shared by tensor and prediction files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetHeader {
    pub alphabet: Vec<String>,
    pub profile: ConstraintProfile,
    pub scheme: WindowingScheme,
}

impl DatasetHeader {
    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// Whether `cell` is addressable and structurally possible: unary
    /// channels on the diagonal, binary channels off it.
    pub fn admits(&self, cell: &Cell) -> bool {
        let a = self.alphabet.len() as u32;
        let Some(t) = self.profile.channel(cell.channel as usize) else {
            return false;
        };
        cell.row < a && cell.col < a && t.is_unary() == cell.is_diagonal()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorDataset {
    pub header: DatasetHeader,
    pub traces: Vec<TraceTensor>,
}

impl TensorDataset {
    /// A dataset containing the given traces (ordinals are file positions).
    pub fn with_traces(&self, traces: Vec<TraceTensor>) -> TensorDataset {
        TensorDataset {
            header: self.header.clone(),
            traces,
        }
    }
}

/// Scores for the last window of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePrediction {
    pub case_id: String,
    /// Window count of the trace; the scored window is `window_count - 1`.
    pub window_count: usize,
    pub scores: BTreeMap<Cell, f64>,
}

impl TracePrediction {
    pub fn target_window(&self) -> usize {
        self.window_count - 1
    }

    pub fn score(&self, cell: &Cell) -> f64 {
        self.scores.get(cell).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub header: DatasetHeader,
    pub traces: Vec<TracePrediction>,
}

impl PredictionSet {
    /// Ground truth as predictions: score 1 on every cell of each last window.
    pub fn from_final_windows(dataset: &TensorDataset) -> PredictionSet {
        PredictionSet {
            header: dataset.header.clone(),
            traces: dataset
                .traces
                .iter()
                .filter(|t| t.window_count() > 0)
                .map(|t| TracePrediction {
                    case_id: t.case_id.clone(),
                    window_count: t.window_count(),
                    scores: t.last().into_iter().flat_map(|s| &s.cells).map(|&c| (c, 1.0)).collect(),
                })
                .collect(),
        }
    }
}

/// Formats a score with exactly nine decimals.
pub fn format_score(score: f64) -> String {
    format!("{score:.9}")
}

fn check_field(what: &str, value: &str) -> Result<(), StoreError> {
    if value.is_empty() || value.contains(['\t', '\n', '\r']) || value != value.trim() {
        return Err(StoreError::InvalidField(format!(
            "{what} `{}` must be non-empty without surrounding whitespace, tabs or newlines",
            value.escape_debug()
        )));
    }
    Ok(())
}

fn write_header<W: Write>(
    out: &mut W,
    header: &DatasetHeader,
    traces: &[(&str, usize)],
) -> Result<(), StoreError> {
    writeln!(out, "#!version\t{FORMAT_VERSION}")?;
    writeln!(out, "#!alphabet_size\t{}", header.alphabet.len())?;
    for (i, label) in header.alphabet.iter().enumerate() {
        check_field("activity label", label)?;
        writeln!(out, "#!activity\t{i}\t{label}")?;
    }
    writeln!(out, "#!profile_size\t{}", header.profile.len())?;
    for (i, t) in header.profile.templates().iter().enumerate() {
        writeln!(out, "#!channel\t{i}\t{t}")?;
    }
    writeln!(out, "#!scheme\t{}", header.scheme)?;
    writeln!(out, "#!trace_count\t{}", traces.len())?;
    for (i, (case, windows)) in traces.iter().enumerate() {
        check_field("case id", case)?;
        writeln!(out, "#!trace\t{i}\t{windows}\t{case}")?;
    }
    Ok(())
}

pub fn write_tensors_to<W: Write>(dataset: &TensorDataset, writer: W) -> Result<(), StoreError> {
    let mut out = BufWriter::new(writer);
    let entries: Vec<(&str, usize)> = dataset
        .traces
        .iter()
        .map(|t| (t.case_id.as_str(), t.window_count()))
        .collect();
    write_header(&mut out, &dataset.header, &entries)?;
    for (ordinal, t) in dataset.traces.iter().enumerate() {
        for (w, slice) in t.slices.iter().enumerate() {
            if slice.window_index != w {
                return Err(StoreError::InvalidField(format!(
                    "trace {} has slice {} at position {w}",
                    t.case_id, slice.window_index
                )));
            }
            for c in &slice.cells {
                if !dataset.header.admits(c) {
                    return Err(StoreError::InvalidField(format!("cell {c:?} out of bounds")));
                }
                writeln!(out, "{ordinal}\t{}\t{w}\t{}\t{}\t{}", t.case_id, c.row, c.col, c.channel)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_tensors(dataset: &TensorDataset, path: impl AsRef<Path>) -> Result<(), StoreError> {
    write_tensors_to(dataset, File::create(path)?)
}

/// Writes predictions; scores below [`SPARSITY_FLOOR`] are omitted.
pub fn write_predictions_to<W: Write>(preds: &PredictionSet, writer: W) -> Result<(), StoreError> {
    let mut out = BufWriter::new(writer);
    let entries: Vec<(&str, usize)> = preds
        .traces
        .iter()
        .map(|t| (t.case_id.as_str(), t.window_count))
        .collect();
    write_header(&mut out, &preds.header, &entries)?;
    for (ordinal, t) in preds.traces.iter().enumerate() {
        if t.window_count == 0 {
            return Err(StoreError::InvalidField(format!("trace {} has no windows", t.case_id)));
        }
        let w = t.target_window();
        for (c, &score) in &t.scores {
            if !score.is_finite() || !(0.0..=1.0).contains(&score) {
                return Err(StoreError::InvalidField(format!("score {score} outside [0, 1]")));
            }
            if !preds.header.admits(c) {
                return Err(StoreError::InvalidField(format!("cell {c:?} out of bounds")));
            }
            if score < SPARSITY_FLOOR {
                continue;
            }
            writeln!(
                out,
                "{ordinal}\t{}\t{w}\t{}\t{}\t{}\t{}",
                t.case_id,
                c.row,
                c.col,
                c.channel,
                format_score(score)
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_predictions(preds: &PredictionSet, path: impl AsRef<Path>) -> Result<(), StoreError> {
    write_predictions_to(preds, File::create(path)?)
}

struct TraceEntry {
    case_id: String,
    window_count: usize,
}

struct Record {
    ordinal: usize,
    window: usize,
    cell: Cell,
    score: Option<f64>,
}

struct RawFile {
    header: DatasetHeader,
    traces: Vec<TraceEntry>,
    records: Vec<Record>,
}

#[derive(Default)]
struct HeaderBuilder {
    version: bool,
    alphabet_size: Option<usize>,
    alphabet: Vec<String>,
    profile_size: Option<usize>,
    channels: Vec<Template>,
    scheme: Option<WindowingScheme>,
    trace_count: Option<usize>,
    traces: Vec<TraceEntry>,
}

fn parse_index(line: usize, field: &str, what: &str) -> Result<usize, StoreError> {
    field
        .parse()
        .map_err(|_| format_err(line, format!("bad {what} `{field}`")))
}

impl HeaderBuilder {
    fn take(&mut self, line: usize, key: &str, values: &[&str]) -> Result<(), StoreError> {
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(format_err(line, format!("header `{key}` expects {n} value(s)")))
            }
        };
        let expect_next = |seen: usize, idx: usize, what: &str| {
            if seen == idx {
                Ok(())
            } else {
                Err(format_err(line, format!("{what} index {idx} out of sequence")))
            }
        };
        match key {
            "version" => {
                arity(1)?;
                if values[0] != FORMAT_VERSION {
                    return Err(format_err(line, format!("unsupported version `{}`", values[0])));
                }
                self.version = true;
            }
            "alphabet_size" => {
                arity(1)?;
                self.alphabet_size = Some(parse_index(line, values[0], "alphabet size")?);
            }
            "activity" => {
                arity(2)?;
                let idx = parse_index(line, values[0], "activity index")?;
                expect_next(self.alphabet.len(), idx, "activity")?;
                self.alphabet.push(values[1].to_string());
            }
            "profile_size" => {
                arity(1)?;
                self.profile_size = Some(parse_index(line, values[0], "profile size")?);
            }
            "channel" => {
                arity(2)?;
                let idx = parse_index(line, values[0], "channel index")?;
                expect_next(self.channels.len(), idx, "channel")?;
                let t = values[1].parse().map_err(|e| format_err(line, format!("{e}")))?;
                self.channels.push(t);
            }
            "scheme" => {
                arity(1)?;
                self.scheme = Some(values[0].parse().map_err(|e| format_err(line, format!("{e}")))?);
            }
            "trace_count" => {
                arity(1)?;
                self.trace_count = Some(parse_index(line, values[0], "trace count")?);
            }
            "trace" => {
                arity(3)?;
                let idx = parse_index(line, values[0], "trace ordinal")?;
                expect_next(self.traces.len(), idx, "trace")?;
                self.traces.push(TraceEntry {
                    window_count: parse_index(line, values[1], "window count")?,
                    case_id: values[2].to_string(),
                });
            }
            other => return Err(format_err(line, format!("unknown header key `{other}`"))),
        }
        Ok(())
    }

    fn finish(self, line: usize) -> Result<(DatasetHeader, Vec<TraceEntry>), StoreError> {
        if !self.version {
            return Err(format_err(line, "missing version header"));
        }
        let missing = |k: &str| format_err(line, format!("missing `{k}` header"));
        let alphabet_size = self.alphabet_size.ok_or_else(|| missing("alphabet_size"))?;
        if alphabet_size != self.alphabet.len() {
            return Err(format_err(line, "alphabet_size disagrees with activity entries"));
        }
        let profile_size = self.profile_size.ok_or_else(|| missing("profile_size"))?;
        if profile_size != self.channels.len() {
            return Err(format_err(line, "profile_size disagrees with channel entries"));
        }
        let trace_count = self.trace_count.ok_or_else(|| missing("trace_count"))?;
        if trace_count != self.traces.len() {
            return Err(format_err(line, "trace_count disagrees with trace entries"));
        }
        let profile = ConstraintProfile::new(self.channels).map_err(|e| format_err(line, e.to_string()))?;
        Ok((
            DatasetHeader {
                alphabet: self.alphabet,
                profile,
                scheme: self.scheme.ok_or_else(|| missing("scheme"))?,
            },
            self.traces,
        ))
    }
}

fn read_raw<R: Read>(reader: R, with_scores: bool) -> Result<RawFile, StoreError> {
    let mut builder = HeaderBuilder::default();
    let mut header: Option<(DatasetHeader, Vec<TraceEntry>)> = None;
    let mut records: Vec<Record> = Vec::new();
    let columns = if with_scores { 7 } else { 6 };
    let mut last_line = 0;

    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let n = i + 1;
        last_line = n;
        let line = line?;
        if let Some(rest) = line.strip_prefix("#!") {
            if header.is_some() {
                return Err(format_err(n, "header line after body records"));
            }
            let mut parts = rest.split('\t');
            let key = parts.next().unwrap_or_default();
            let values: Vec<&str> = parts.collect();
            builder.take(n, key, &values)?;
            continue;
        }
        if line.is_empty() {
            return Err(format_err(n, "empty line"));
        }
        if header.is_none() {
            header = Some(std::mem::take(&mut builder).finish(n)?);
        }
        let (hdr, traces) = header.as_ref().unwrap();
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != columns {
            return Err(format_err(
                n,
                format!("expected {columns} columns, found {}", fields.len()),
            ));
        }
        let ordinal = parse_index(n, fields[0], "trace ordinal")?;
        let entry = traces
            .get(ordinal)
            .ok_or_else(|| format_err(n, format!("trace ordinal {ordinal} not declared")))?;
        if fields[1] != entry.case_id {
            return Err(format_err(n, format!("case id `{}` does not match trace {ordinal}", fields[1])));
        }
        let window = parse_index(n, fields[2], "window index")?;
        if window >= entry.window_count {
            return Err(format_err(n, format!("window {window} out of range")));
        }
        if with_scores && window + 1 != entry.window_count {
            return Err(format_err(n, "predictions must address the last window"));
        }
        let cell = Cell::new(
            parse_index(n, fields[3], "row")?,
            parse_index(n, fields[4], "col")?,
            parse_index(n, fields[5], "channel")?,
        );
        if cell.row as usize >= hdr.alphabet_size() || cell.col as usize >= hdr.alphabet_size() {
            return Err(format_err(n, "activity index out of bounds"));
        }
        if cell.channel as usize >= hdr.profile.len() {
            return Err(format_err(n, "channel index out of bounds"));
        }
        if !hdr.admits(&cell) {
            return Err(format_err(n, "unary channels must be diagonal and binary channels off-diagonal"));
        }
        let score = if with_scores {
            let s: f64 = fields[6]
                .parse()
                .map_err(|_| format_err(n, format!("bad score `{}`", fields[6])))?;
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(format_err(n, format!("score {s} outside [0, 1]")));
            }
            Some(s)
        } else {
            None
        };
        let record = Record {
            ordinal,
            window,
            cell,
            score,
        };
        if let Some(prev) = records.last() {
            let key = |r: &Record| (r.ordinal, r.window, r.cell);
            match key(prev).cmp(&key(&record)) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => return Err(format_err(n, "duplicate record")),
                std::cmp::Ordering::Greater => return Err(format_err(n, "record out of canonical order")),
            }
        }
        records.push(record);
    }
    let (header, traces) = match header {
        Some(h) => h,
        None => builder.finish(last_line + 1)?,
    };
    Ok(RawFile {
        header,
        traces,
        records,
    })
}

pub fn read_tensors_from<R: Read>(reader: R) -> Result<TensorDataset, StoreError> {
    let raw = read_raw(reader, false)?;
    let mut traces: Vec<TraceTensor> = raw
        .traces
        .into_iter()
        .map(|e| TraceTensor {
            case_id: e.case_id,
            slices: (0..e.window_count).map(|w| TensorSlice::new(w, [])).collect(),
        })
        .collect();
    for r in raw.records {
        traces[r.ordinal].slices[r.window].cells.insert(r.cell);
    }
    Ok(TensorDataset {
        header: raw.header,
        traces,
    })
}

pub fn read_tensors(path: impl AsRef<Path>) -> Result<TensorDataset, StoreError> {
    read_tensors_from(File::open(path)?)
}

pub fn read_predictions_from<R: Read>(reader: R) -> Result<PredictionSet, StoreError> {
    let raw = read_raw(reader, true)?;
    let mut traces: Vec<TracePrediction> = Vec::with_capacity(raw.traces.len());
    for (i, e) in raw.traces.into_iter().enumerate() {
        if e.window_count == 0 {
            return Err(format_err(0, format!("trace {i} declares no windows")));
        }
        traces.push(TracePrediction {
            case_id: e.case_id,
            window_count: e.window_count,
            scores: BTreeMap::new(),
        });
    }
    for r in raw.records {
        traces[r.ordinal].scores.insert(r.cell, r.score.unwrap());
    }
    Ok(PredictionSet {
        header: raw.header,
        traces,
    })
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<PredictionSet, StoreError> {
    read_predictions_from(File::open(path)?)
}
