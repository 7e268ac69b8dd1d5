//! Training-free reference predictors that emit standard prediction sets.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::miner::Cell;
use crate::tensor_store::{PredictionSet, TensorDataset, TracePrediction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("trace `{0}` has fewer than two windows")]
    SingleWindowTrace(String),
    #[error("training set is empty")]
    EmptyTraining,
}

/// Predicts each trace's last window as a copy of its penultimate window.
pub fn persistence_predict(dataset: &TensorDataset) -> Result<PredictionSet, BaselineError> {
    let traces = dataset
        .traces
        .iter()
        .map(|t| {
            let n = t.window_count();
            if n < 2 {
                return Err(BaselineError::SingleWindowTrace(t.case_id.clone()));
            }
            Ok(TracePrediction {
                case_id: t.case_id.clone(),
                window_count: n,
                scores: t.slices[n - 2].cells.iter().map(|&c| (c, 1.0)).collect(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(PredictionSet {
        header: dataset.header.clone(),
        traces,
    })
}

/// Scores every cell by how often it is present in the last window of the
/// training traces, and predicts that prior for every target trace.
pub fn marginal_frequency_predict(
    training: &TensorDataset,
    targets: &TensorDataset,
) -> Result<PredictionSet, BaselineError> {
    let finals: Vec<_> = training.traces.iter().filter_map(|t| t.last()).collect();
    if finals.is_empty() {
        return Err(BaselineError::EmptyTraining);
    }
    let mut counts: BTreeMap<Cell, usize> = BTreeMap::new();
    for slice in &finals {
        for &c in &slice.cells {
            *counts.entry(c).or_default() += 1;
        }
    }
    let n = finals.len() as f64;
    let prior: BTreeMap<Cell, f64> = counts.into_iter().map(|(c, k)| (c, k as f64 / n)).collect();
    Ok(PredictionSet {
        header: targets.header.clone(),
        traces: targets
            .traces
            .iter()
            .filter(|t| t.window_count() > 0)
            .map(|t| TracePrediction {
                case_id: t.case_id.clone(),
                window_count: t.window_count(),
                scores: prior.clone(),
            })
            .collect(),
    })
}
