use std::collections::HashMap;

use serde::Serialize;

use super::{EvalError, ScoreTally};
use crate::tensor_store::{PredictionSet, TensorDataset};

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub per_template: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateReport {
    pub channel: usize,
    pub template: String,
    pub positives: u64,
    /// `None` when the channel has no positive cell in any target window.
    pub ap: Option<f64>,
}

/// Micro-averaged scores over the last window of every test trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub ap: f64,
    pub auc: f64,
    pub f1_best: f64,
    pub f1_threshold: f64,
    pub positives: u64,
    pub negatives: u64,
    pub traces: usize,
    pub per_template: Vec<TemplateReport>,
}

fn check_headers(truth: &TensorDataset, preds: &PredictionSet) -> Result<(), EvalError> {
    let (t, p) = (&truth.header, &preds.header);
    if t.alphabet != p.alphabet {
        return Err(EvalError::HeaderMismatch("alphabet"));
    }
    if t.profile != p.profile {
        return Err(EvalError::HeaderMismatch("profile"));
    }
    if t.scheme != p.scheme {
        return Err(EvalError::HeaderMismatch("scheme"));
    }
    Ok(())
}

/// Per-channel tallies over the last window of every truth trace, plus the
/// number of traces scored.
fn channel_tallies(truth: &TensorDataset, preds: &PredictionSet) -> Result<(Vec<ScoreTally>, usize), EvalError> {
    check_headers(truth, preds)?;
    let header = &truth.header;
    let profile = &header.profile;
    let a = header.alphabet_size() as u64;
    let by_case: HashMap<&str, usize> = preds
        .traces
        .iter()
        .enumerate()
        .map(|(i, t)| (t.case_id.as_str(), i))
        .collect();

    let channel_universe: Vec<u64> = profile
        .templates()
        .iter()
        .map(|t| if t.is_unary() { a } else { a * a.saturating_sub(1) })
        .collect();
    // explicitly scored cells per channel; zero-score negatives are added in bulk
    let mut tallies: Vec<ScoreTally> = vec![ScoreTally::new(); profile.len()];
    let mut explicit: Vec<u64> = vec![0; profile.len()];
    let mut traces = 0usize;

    for trace in &truth.traces {
        let Some(target) = trace.last() else { continue };
        let &idx = by_case
            .get(trace.case_id.as_str())
            .ok_or_else(|| EvalError::MissingTrace(trace.case_id.clone()))?;
        let pred = &preds.traces[idx];
        if pred.window_count != trace.window_count() {
            return Err(EvalError::WindowMismatch {
                case_id: trace.case_id.clone(),
                truth: trace.window_count(),
                predicted: pred.window_count,
            });
        }
        traces += 1;
        for cell in &target.cells {
            let ch = cell.channel as usize;
            tallies[ch].add(pred.score(cell), true)?;
            explicit[ch] += 1;
        }
        for (cell, &score) in &pred.scores {
            if target.cells.contains(cell) || !header.admits(cell) {
                continue;
            }
            let ch = cell.channel as usize;
            tallies[ch].add(score, false)?;
            explicit[ch] += 1;
        }
    }

    for (ch, tally) in tallies.iter_mut().enumerate() {
        let universe = channel_universe[ch] * traces as u64;
        tally.add_many(0.0, false, universe - explicit[ch])?;
    }
    Ok((tallies, traces))
}

/// All cells of all target windows in one tally, for metrics at a fixed
/// threshold.
pub fn pooled_tally(truth: &TensorDataset, preds: &PredictionSet) -> Result<ScoreTally, EvalError> {
    let (tallies, _) = channel_tallies(truth, preds)?;
    let mut overall = ScoreTally::new();
    for t in &tallies {
        overall.merge(t);
    }
    Ok(overall)
}

/// Scores predictions against the last window of each truth trace.
///
/// The cell universe of a window excludes structurally impossible cells
/// (unary channels off the diagonal, binary channels on it). Cells without a
/// prediction score 0.
pub fn evaluate_predictions(
    truth: &TensorDataset,
    preds: &PredictionSet,
    options: EvalOptions,
) -> Result<EvalReport, EvalError> {
    let (mut tallies, traces) = channel_tallies(truth, preds)?;
    let mut overall = ScoreTally::new();
    for t in &tallies {
        overall.merge(t);
    }
    let (f1_best, f1_threshold) = overall.best_f1()?;
    let per_template = if options.per_template {
        let profile = &truth.header.profile;
        tallies
            .iter_mut()
            .enumerate()
            .map(|(ch, t)| TemplateReport {
                channel: ch,
                template: profile.templates()[ch].to_string(),
                positives: t.positives(),
                ap: t.average_precision().ok(),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(EvalReport {
        ap: overall.average_precision()?,
        auc: overall.roc_auc()?,
        f1_best,
        f1_threshold,
        positives: overall.positives(),
        negatives: overall.negatives(),
        traces,
        per_template,
    })
}
