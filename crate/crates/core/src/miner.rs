//! Per-window Declare mining into sparse binary constraint tensors.
//!
//! Each window of a trace becomes one [`TensorSlice`]: the set of
//! `(row, col, channel)` cells whose constraint holds in that window. Unary
//! templates sit on the diagonal and are evaluated for every alphabet
//! activity, so absence appears for activities missing from the window.
//! Binary templates are evaluated only for ordered pairs of distinct
//! activities that both occur in the window.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::declare::{CompiledProfile, ConstraintProfile, Symbol, TemplateError};
use crate::event_log::{ActivityId, EventLog};
use crate::windowing::{validate_bins, WindowBin, WindowError, WindowingScheme};

#[derive(Debug, Error)]
pub enum MineError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error("window bins only apply to the fixed-size scheme")]
    BinsRequireFixedSize,
    #[error("cannot build thread pool: {0}")]
    ThreadPool(String),
}

/// One tensor cell. Ordering is `(row, col, channel)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: u32,
    pub col: u32,
    pub channel: u32,
}

impl Cell {
    pub fn new(row: usize, col: usize, channel: usize) -> Self {
        Cell {
            row: row as u32,
            col: col as u32,
            channel: channel as u32,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.row == self.col
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorSlice {
    pub window_index: usize,
    pub cells: BTreeSet<Cell>,
}

impl TensorSlice {
    pub fn new(window_index: usize, cells: impl IntoIterator<Item = Cell>) -> Self {
        TensorSlice {
            window_index,
            cells: cells.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// The constraint "movie" of one trace: one slice per window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceTensor {
    pub case_id: String,
    pub slices: Vec<TensorSlice>,
}

impl TraceTensor {
    pub fn window_count(&self) -> usize {
        self.slices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.slices.iter().map(TensorSlice::len).sum()
    }

    pub fn last(&self) -> Option<&TensorSlice> {
        self.slices.last()
    }
}

/// Jaccard similarity of two slices' cell sets; 1.0 when both are empty.
pub fn overlap(s1: &TensorSlice, s2: &TensorSlice) -> f64 {
    let union = s1.cells.union(&s2.cells).count();
    if union == 0 {
        return 1.0;
    }
    s1.cells.intersection(&s2.cells).count() as f64 / union as f64
}

/// Mines one window. Every event must be a valid index below `alphabet_size`.
pub fn mine_window(
    window_index: usize,
    window: &[ActivityId],
    profile: &CompiledProfile,
    alphabet_size: usize,
) -> TensorSlice {
    let mut counts = vec![0u32; alphabet_size];
    for &e in window {
        counts[e] += 1;
    }
    let mut cells = BTreeSet::new();

    // an absent activity projects to all-O, so its unary verdicts are shared
    let absent_verdict: Vec<bool> = profile
        .unary
        .iter()
        .map(|u| {
            let end = (0..window.len()).fold(0, |s, _| u.dfa.step(s, Symbol::O));
            u.dfa.is_accepting(end)
        })
        .collect();
    for (x, &count) in counts.iter().enumerate() {
        for (u, &absent) in profile.unary.iter().zip(&absent_verdict) {
            let holds = if count == 0 {
                absent
            } else {
                u.dfa.accepts_projected(window, x, None)
            };
            if holds {
                cells.insert(Cell::new(x, x, u.channel as usize));
            }
        }
    }

    if !profile.binary.is_empty() {
        let present: Vec<usize> = (0..alphabet_size).filter(|&x| counts[x] > 0).collect();
        let mut projected = Vec::with_capacity(window.len());
        for &a in &present {
            for &b in &present {
                if a == b {
                    continue;
                }
                projected.clear();
                projected.extend(window.iter().map(|&e| {
                    if e == a {
                        Symbol::A
                    } else if e == b {
                        Symbol::B
                    } else {
                        Symbol::O
                    }
                }));
                for bin in &profile.binary {
                    if bin.template.needs_repeated_second() && counts[b] < 2 {
                        continue;
                    }
                    if bin.dfa.accepts(projected.iter().copied()) {
                        cells.insert(Cell::new(a, b, bin.channel as usize));
                    }
                }
            }
        }
    }
    TensorSlice {
        window_index,
        cells,
    }
}

#[derive(Debug, Clone)]
pub struct MineOptions {
    pub scheme: WindowingScheme,
    /// Fixed-size only: keep traces whose window count falls in one of these.
    pub bins: Vec<WindowBin>,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl MineOptions {
    pub fn new(scheme: WindowingScheme) -> Self {
        MineOptions {
            scheme,
            bins: Vec::new(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStats {
    pub bin: String,
    pub traces: usize,
    pub constraints: u64,
    pub overlap: Option<f64>,
}

/// Corpus statistics for a mined dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiningStats {
    /// Traces in the input log.
    pub trace_count: usize,
    pub mined_traces: usize,
    pub too_short_count: usize,
    /// Fixed-size traces whose window count falls in no configured bin.
    pub excluded_count: usize,
    pub window_count: usize,
    pub total_constraint_count: u64,
    /// Mean Jaccard overlap over all consecutive window pairs; `None` when no
    /// trace has two windows.
    pub overlap: Option<f64>,
    pub per_template: BTreeMap<String, u64>,
    /// Constraints restricted to each trace's last window.
    pub final_window_per_template: BTreeMap<String, u64>,
    pub bins: Vec<BinStats>,
    pub elapsed_seconds: f64,
}

impl MiningStats {
    /// Computes the counting statistics of a tensor dataset. Timing and
    /// eligibility counters are left at zero.
    pub fn from_tensors(tensors: &[TraceTensor], profile: &ConstraintProfile, bins: &[WindowBin]) -> Self {
        let mut per_channel = vec![0u64; profile.len()];
        let mut final_per_channel = vec![0u64; profile.len()];
        let mut overlap_sum = 0.0;
        let mut pairs = 0usize;
        for t in tensors {
            for s in &t.slices {
                for c in &s.cells {
                    per_channel[c.channel as usize] += 1;
                }
            }
            if let Some(last) = t.last() {
                for c in &last.cells {
                    final_per_channel[c.channel as usize] += 1;
                }
            }
            for w in t.slices.windows(2) {
                overlap_sum += overlap(&w[0], &w[1]);
                pairs += 1;
            }
        }
        let named = |counts: Vec<u64>| {
            counts
                .into_iter()
                .enumerate()
                .map(|(c, n)| (profile.templates()[c].to_string(), n))
                .collect()
        };
        let bins = bins
            .iter()
            .map(|bin| {
                let members: Vec<&TraceTensor> =
                    tensors.iter().filter(|t| bin.contains(t.window_count())).collect();
                let (sum, count) = members
                    .iter()
                    .flat_map(|t| t.slices.windows(2))
                    .fold((0.0, 0usize), |(s, n), w| (s + overlap(&w[0], &w[1]), n + 1));
                BinStats {
                    bin: bin.to_string(),
                    traces: members.len(),
                    constraints: members.iter().map(|t| t.cell_count() as u64).sum(),
                    overlap: (count > 0).then(|| sum / count as f64),
                }
            })
            .collect();
        MiningStats {
            trace_count: tensors.len(),
            mined_traces: tensors.len(),
            too_short_count: 0,
            excluded_count: 0,
            window_count: tensors.iter().map(TraceTensor::window_count).sum(),
            total_constraint_count: per_channel.iter().sum(),
            overlap: (pairs > 0).then(|| overlap_sum / pairs as f64),
            per_template: named(per_channel),
            final_window_per_template: named(final_per_channel),
            bins,
            elapsed_seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MineOutput {
    pub tensors: Vec<TraceTensor>,
    pub stats: MiningStats,
}

/// Windows and mines every eligible trace of the log.
///
/// Under the fixed-count scheme traces shorter than the window count are
/// counted as too short. Under the fixed-size scheme a trace needs at least
/// two windows, and when bins are configured its window count must fall in
/// one of them. Output order follows the log regardless of thread count.
pub fn mine_log(
    log: &EventLog,
    profile: &ConstraintProfile,
    options: &MineOptions,
) -> Result<MineOutput, MineError> {
    let started = Instant::now();
    let compiled = profile.compile()?;
    if !options.bins.is_empty() {
        if !matches!(options.scheme, WindowingScheme::FixedSize(_)) {
            return Err(MineError::BinsRequireFixedSize);
        }
        validate_bins(&options.bins)?;
    }

    let mut too_short = 0;
    let mut excluded = 0;
    let mut eligible = Vec::new();
    for trace in &log.traces {
        let count = match (options.scheme, options.scheme.window_count(trace.len())) {
            (_, None) => None,
            (WindowingScheme::FixedSize(_), Some(c)) if c < 2 => None,
            (_, Some(c)) => Some(c),
        };
        match count {
            None => too_short += 1,
            Some(c) if !options.bins.is_empty() && !options.bins.iter().any(|b| b.contains(c)) => {
                excluded += 1
            }
            Some(_) => eligible.push(trace),
        }
    }

    let alphabet_size = log.alphabet_size();
    let mine_one = |trace: &&crate::event_log::Trace| -> Result<TraceTensor, MineError> {
        let windowed = options.scheme.split(trace)?;
        Ok(TraceTensor {
            case_id: trace.case_id.clone(),
            slices: windowed
                .windows()
                .enumerate()
                .map(|(i, w)| mine_window(i, w, &compiled, alphabet_size))
                .collect(),
        })
    };
    let tensors: Vec<TraceTensor> = match options.threads {
        Some(1) => eligible.iter().map(mine_one).collect::<Result<_, _>>()?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| MineError::ThreadPool(e.to_string()))?
            .install(|| eligible.par_iter().map(mine_one).collect::<Result<_, _>>())?,
        None => eligible.par_iter().map(mine_one).collect::<Result<_, _>>()?,
    };

    let mut stats = MiningStats::from_tensors(&tensors, profile, &options.bins);
    stats.trace_count = log.traces.len();
    stats.too_short_count = too_short;
    stats.excluded_count = excluded;
    stats.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(MineOutput { tensors, stats })
}
