//! Ranking metrics (AP, ROC AUC, best-threshold F1), evaluation of prediction
//! files against ground-truth tensors, and train/validation/test splitting.

mod evaluate;
mod ranking;
mod split;

use thiserror::Error;

pub use evaluate::{evaluate_predictions, pooled_tally, EvalOptions, EvalReport, TemplateReport};
pub use ranking::{average_precision, f1_at_best_threshold, roc_auc, PrPoint, ScoreTally};
pub use split::{split_dataset, Split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no positive labels")]
    NoPositives,
    #[error("need both positive and negative labels")]
    DegenerateLabels,
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("truth and predictions disagree on {0}")]
    HeaderMismatch(&'static str),
    #[error("no predictions for trace `{0}`")]
    MissingTrace(String),
    #[error("trace `{case_id}` has {truth} windows but predictions declare {predicted}")]
    WindowMismatch {
        case_id: String,
        truth: usize,
        predicted: usize,
    },
    #[error("need at least 3 traces to split, got {0}")]
    TooFewTraces(usize),
    #[error("fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
