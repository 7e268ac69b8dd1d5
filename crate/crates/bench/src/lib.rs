//! Synthetic workloads shared by the criterion benches.

use pam_core::EventLog;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A log of `traces` random traces over `alphabet` activities with lengths in
/// `3..=max_len`, roughly the shape of the BPI loan logs.
pub fn synthetic_log(traces: usize, alphabet: usize, max_len: usize, seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..alphabet).map(|i| format!("act_{i:02}")).collect();
    EventLog::from_labeled((0..traces).map(|t| {
        let len = rng.random_range(3..=max_len);
        let events: Vec<&str> = (0..len)
            .map(|_| labels[rng.random_range(0..alphabet)].as_str())
            .collect();
        (format!("case_{t}"), events)
    }))
}

/// Random score/label pairs with a positive rate of `positive_rate`.
pub fn scored_cells(n: usize, positive_rate: f64, seed: u64) -> Vec<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let label = rng.random_bool(positive_rate);
            let score: f64 = rng.random::<f64>() * 0.7 + if label { 0.3 } else { 0.0 };
            (score, label)
        })
        .collect()
}
