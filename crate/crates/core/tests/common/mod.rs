//! Brute-force reference implementations shared by the integration tests and
//! the acceptance binary. They avoid the library's fast paths on purpose.
#![allow(dead_code)]

use std::collections::BTreeSet;

use pam_core::declare::MAX_COUNT;
use pam_core::{oracle_evaluate_template, Cell, ConstraintProfile, Template};
use rand::Rng;

/// Every window over `alphabet` letters with length in `1..=max_len`.
pub fn all_windows(alphabet: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| {
                (0..alphabet).map(move |a| {
                    let mut next = w.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Every template with every supported count parameter.
pub fn all_templates() -> Vec<Template> {
    let mut out = Vec::new();
    for t in Template::ALL {
        match t {
            Template::Existence(_) => out.extend((1..=MAX_COUNT).map(Template::Existence)),
            Template::Absence(_) => out.extend((1..=MAX_COUNT).map(Template::Absence)),
            Template::Exactly(_) => out.extend((1..=MAX_COUNT).map(Template::Exactly)),
            other => out.push(other),
        }
    }
    out
}

/// `(first, second)` argument assignments of a template over `alphabet`
/// activities; binary templates take two distinct activities.
pub fn assignments(template: Template, alphabet: usize) -> Vec<(usize, Option<usize>)> {
    if template.is_unary() {
        (0..alphabet).map(|a| (a, None)).collect()
    } else {
        (0..alphabet)
            .flat_map(|a| (0..alphabet).filter(move |&b| b != a).map(move |b| (a, Some(b))))
            .collect()
    }
}

pub fn occurrences(window: &[usize], activity: usize) -> usize {
    window.iter().filter(|&&e| e == activity).count()
}

/// Cell set of a window computed one oracle call per candidate cell.
pub fn brute_force_mine(window: &[usize], profile: &ConstraintProfile, alphabet: usize) -> BTreeSet<Cell> {
    let mut cells = BTreeSet::new();
    for (ch, &t) in profile.templates().iter().enumerate() {
        for a in 0..alphabet {
            if t.is_unary() {
                if oracle_evaluate_template(t, a, None, window).unwrap() {
                    cells.insert(Cell::new(a, a, ch));
                }
                continue;
            }
            for b in 0..alphabet {
                if a == b || occurrences(window, a) == 0 || occurrences(window, b) == 0 {
                    continue;
                }
                let alternate = matches!(t, Template::AlternateResponse | Template::AlternatePrecedence);
                if alternate && occurrences(window, b) < 2 {
                    continue;
                }
                if oracle_evaluate_template(t, a, Some(b), window).unwrap() {
                    cells.insert(Cell::new(a, b, ch));
                }
            }
        }
    }
    cells
}

pub fn random_window(rng: &mut impl Rng, alphabet: usize, max_len: usize) -> Vec<usize> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| rng.random_range(0..alphabet)).collect()
}

/// Metrics computed by sweeping every distinct score as a threshold
/// (`score >= t` is predicted positive) and counting pairs for AUC.
pub struct SweepMetrics {
    pub ap: f64,
    pub auc: f64,
    pub best_f1: f64,
}

pub fn sweep_metrics(pairs: &[(f64, bool)]) -> Option<SweepMetrics> {
    let p = pairs.iter().filter(|x| x.1).count();
    let n = pairs.len() - p;
    if p == 0 || n == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = pairs.iter().map(|x| x.0).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let (mut ap, mut prev_recall, mut best_f1) = (0.0, 0.0, 0.0f64);
    for t in thresholds {
        let tp = pairs.iter().filter(|x| x.1 && x.0 >= t).count() as f64;
        let predicted = pairs.iter().filter(|x| x.0 >= t).count() as f64;
        let precision = tp / predicted;
        let recall = tp / p as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        if tp > 0.0 {
            best_f1 = best_f1.max(2.0 * precision * recall / (precision + recall));
        }
    }

    let mut wins = 0.0;
    for pos in pairs.iter().filter(|x| x.1) {
        for neg in pairs.iter().filter(|x| !x.1) {
            wins += if pos.0 > neg.0 {
                1.0
            } else if pos.0 == neg.0 {
                0.5
            } else {
                0.0
            };
        }
    }
    Some(SweepMetrics {
        ap,
        auc: wins / (p * n) as f64,
        best_f1,
    })
}
