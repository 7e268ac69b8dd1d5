use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

/// Seeded trace-level split. `train_fraction` of the items go to training,
/// then `validation_fraction_of_train` of those are held out for validation;
/// the rest is test. Each partition keeps the input order.
pub fn split_dataset<T: Clone>(
    items: &[T],
    train_fraction: f64,
    validation_fraction_of_train: f64,
    seed: u64,
) -> Result<Split<T>, EvalError> {
    if items.len() < 3 {
        return Err(EvalError::TooFewTraces(items.len()));
    }
    for f in [train_fraction, validation_fraction_of_train] {
        if !(0.0..=1.0).contains(&f) {
            return Err(EvalError::BadFraction(f));
        }
    }
    let n = items.len();
    let n_train_total = (n as f64 * train_fraction).round() as usize;
    let n_val = (n_train_total as f64 * validation_fraction_of_train).round() as usize;
    let n_train = n_train_total - n_val;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |range: std::ops::Range<usize>| {
        let mut idx = order[range].to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| items[i].clone()).collect::<Vec<T>>()
    };
    Ok(Split {
        train: take(0..n_train),
        validation: take(n_train..n_train_total),
        test: take(n_train_total..n),
    })
}
