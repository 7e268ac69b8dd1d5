//! Partitioning traces into consecutive, non-overlapping windows.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Range, RangeInclusive};
use std::str::FromStr;

use thiserror::Error;

use crate::event_log::{ActivityId, EventLog, Trace};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WindowError {
    #[error("trace of length {len} cannot be split into {windows} windows")]
    TraceTooShort { len: usize, windows: usize },
    #[error("cannot window an empty trace")]
    EmptyTrace,
    #[error("window parameter must be at least 1")]
    ZeroParameter,
    #[error("bins {0} and {1} overlap")]
    OverlappingBins(WindowBin, WindowBin),
    #[error("invalid bin {0}: bins must cover window counts >= 2 with lo <= hi")]
    InvalidBin(WindowBin),
    #[error("cannot parse `{0}`")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowingScheme {
    /// Every trace is divided into exactly `n` windows.
    FixedCount(usize),
    /// Every window holds `k` events except possibly the last.
    FixedSize(usize),
}

impl WindowingScheme {
    /// Splits a trace according to this scheme. Fixed-size splitting accepts any
    /// non-empty trace; callers needing at least two windows check that
    /// themselves.
    pub fn split<'a>(&self, trace: &'a Trace) -> Result<WindowedTrace<'a>, WindowError> {
        match *self {
            WindowingScheme::FixedCount(n) => split_fixed_count(trace, n),
            WindowingScheme::FixedSize(k) => split_fixed_size(trace, k),
        }
    }

    /// Number of windows a trace of `len` events yields, or `None` when the
    /// trace is too short for the scheme.
    pub fn window_count(&self, len: usize) -> Option<usize> {
        match *self {
            WindowingScheme::FixedCount(n) => (len >= n && n > 0).then_some(n),
            WindowingScheme::FixedSize(k) => (len > 0 && k > 0).then(|| len.div_ceil(k)),
        }
    }
}

impl fmt::Display for WindowingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowingScheme::FixedCount(n) => write!(f, "fixed-count:{n}"),
            WindowingScheme::FixedSize(k) => write!(f, "fixed-size:{k}"),
        }
    }
}

impl FromStr for WindowingScheme {
    type Err = WindowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, param) = s
            .split_once(':')
            .ok_or_else(|| WindowError::Parse(s.to_string()))?;
        let param: usize = param
            .trim()
            .parse()
            .map_err(|_| WindowError::Parse(s.to_string()))?;
        if param == 0 {
            return Err(WindowError::ZeroParameter);
        }
        match kind.trim() {
            "fixed-count" => Ok(WindowingScheme::FixedCount(param)),
            "fixed-size" => Ok(WindowingScheme::FixedSize(param)),
            _ => Err(WindowError::Parse(s.to_string())),
        }
    }
}

/// A trace together with half-open window boundaries that partition it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedTrace<'a> {
    pub trace: &'a Trace,
    pub boundaries: Vec<Range<usize>>,
}

impl<'a> WindowedTrace<'a> {
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn windows(&self) -> impl Iterator<Item = &'a [ActivityId]> + '_ {
        let events = &self.trace.events;
        self.boundaries.iter().map(move |r| &events[r.clone()])
    }

    pub fn window_lengths(&self) -> Vec<usize> {
        self.boundaries.iter().map(|r| r.len()).collect()
    }
}

/// Divides a trace into exactly `n` windows of `ceil(|t| / n)` events each,
/// shortening windows from the tail when the ceiling would exhaust the trace
/// before `n` windows exist. The last window takes the remainder.
pub fn split_fixed_count(trace: &Trace, n: usize) -> Result<WindowedTrace<'_>, WindowError> {
    if n == 0 {
        return Err(WindowError::ZeroParameter);
    }
    let len = trace.len();
    if len < n {
        return Err(WindowError::TraceTooShort { len, windows: n });
    }
    let size = len.div_ceil(n);
    let mut boundaries = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let windows_left = n - i;
        let remaining = len - start;
        let take = if windows_left == 1 {
            remaining
        } else {
            size.min(remaining - windows_left + 1)
        };
        boundaries.push(start..start + take);
        start += take;
    }
    Ok(WindowedTrace { trace, boundaries })
}

/// Divides a trace into consecutive chunks of `k` events; the final chunk holds
/// the remaining 1..=k events.
pub fn split_fixed_size(trace: &Trace, k: usize) -> Result<WindowedTrace<'_>, WindowError> {
    if k == 0 {
        return Err(WindowError::ZeroParameter);
    }
    if trace.is_empty() {
        return Err(WindowError::EmptyTrace);
    }
    let len = trace.len();
    let boundaries = (0..len)
        .step_by(k)
        .map(|s| s..(s + k).min(len))
        .collect();
    Ok(WindowedTrace { trace, boundaries })
}

/// An inclusive range of window counts, e.g. `6-10` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WindowBin {
    pub lo: usize,
    pub hi: usize,
}

impl WindowBin {
    pub fn new(lo: usize, hi: usize) -> Self {
        WindowBin { lo, hi }
    }

    pub fn contains(&self, windows: usize) -> bool {
        (self.lo..=self.hi).contains(&windows)
    }

    pub fn range(&self) -> RangeInclusive<usize> {
        self.lo..=self.hi
    }

    /// Parses a comma-separated list such as `6-10,11-15,16-20`.
    pub fn parse_list(s: &str) -> Result<Vec<WindowBin>, WindowError> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for WindowBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}-{}", self.lo, self.hi)
        }
    }
}

impl FromStr for WindowBin {
    type Err = WindowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WindowError::Parse(s.to_string());
        let s = s.trim();
        let (lo, hi) = match s.split_once('-') {
            Some((a, b)) => (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                let v = s.parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        Ok(WindowBin { lo, hi })
    }
}

/// Checks that bins are well formed and pairwise disjoint.
pub fn validate_bins(bins: &[WindowBin]) -> Result<(), WindowError> {
    for b in bins {
        if b.lo < 2 || b.lo > b.hi {
            return Err(WindowError::InvalidBin(*b));
        }
    }
    let mut sorted = bins.to_vec();
    sorted.sort();
    for pair in sorted.windows(2) {
        if pair[1].lo <= pair[0].hi {
            return Err(WindowError::OverlappingBins(pair[0], pair[1]));
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct Binning<'a> {
    pub bins: BTreeMap<WindowBin, Vec<WindowedTrace<'a>>>,
    /// Traces whose window count falls in no bin.
    pub excluded: usize,
}

/// Groups traces by the number of size-`k` windows they produce. Bins that
/// receive no traces are absent from the map.
pub fn bin_by_window_count<'a>(
    log: &'a EventLog,
    k: usize,
    bins: &[WindowBin],
) -> Result<Binning<'a>, WindowError> {
    validate_bins(bins)?;
    let mut out = Binning::default();
    for trace in &log.traces {
        let Some(count) = WindowingScheme::FixedSize(k).window_count(trace.len()) else {
            out.excluded += 1;
            continue;
        };
        match bins.iter().find(|b| b.contains(count)) {
            Some(bin) => out
                .bins
                .entry(*bin)
                .or_default()
                .push(split_fixed_size(trace, k)?),
            None => out.excluded += 1,
        }
    }
    Ok(out)
}
