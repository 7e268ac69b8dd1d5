//! Processes as movies: event logs turned into sequences of windowed Declare
//! constraint tensors.
//!
//! The pipeline runs in stages, each with a file artifact in between:
//!
//! ```text
//! CSV log > event_log > windowing > miner (declare) > tensor_store
//!         > metrics::split_dataset > predictor (baselines or external)
//!         > metrics::evaluate_predictions
//! ```
//!
//! A trace is cut into consecutive windows; for every window the miner
//! records which constraints of a [`ConstraintProfile`] hold between which
//! activities, giving a sparse binary `|A| x |A| x |C|` slice. Predictors
//! score the cells of each trace's last window from the earlier ones.

pub mod baselines;
pub mod declare;
pub mod event_log;
pub mod metrics;
pub mod miner;
pub mod tensor_store;
pub mod windowing;

pub use declare::{
    compile_template, evaluate_template, oracle::oracle_evaluate_template, ConstraintProfile, Template,
    TemplateError,
};
pub use event_log::{parse_csv_log, Activity, ActivityId, EventLog, IngestOptions, LogError, Trace};
pub use metrics::{evaluate_predictions, EvalOptions, EvalReport};
pub use miner::{mine_log, mine_window, overlap, Cell, MineOptions, MiningStats, TensorSlice, TraceTensor};
pub use tensor_store::{DatasetHeader, PredictionSet, StoreError, TensorDataset, TracePrediction};
pub use windowing::{split_fixed_count, split_fixed_size, WindowBin, WindowedTrace, WindowingScheme};
