//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! The corpus-scale reproduction runs only when `PAM_BPI2012_CSV` points at
//! the BPI Challenge 2012 log as CSV. Column names default to `case_id` and
//! `activity` and can be changed with `PAM_BPI2012_CASE_COL`,
//! `PAM_BPI2012_ACTIVITY_COL` and `PAM_BPI2012_TIME_COL`.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_templates, all_windows, assignments, brute_force_mine, occurrences, random_window, sweep_metrics};
use pam_core::metrics::{average_precision, f1_at_best_threshold, pooled_tally, roc_auc};
use pam_core::{
    baselines::persistence_predict, evaluate_predictions, evaluate_template, mine_log, mine_window,
    oracle_evaluate_template, parse_csv_log, split_fixed_count, split_fixed_size, Cell, ConstraintProfile,
    DatasetHeader, EvalOptions, EventLog, IngestOptions, MineOptions, PredictionSet, Template, TensorDataset,
    WindowingScheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = fn() -> Outcome;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let windows = all_windows(3, 6);
    let mut checks = 0u64;
    let mut mismatches = Vec::new();
    for t in all_templates() {
        for (a, b) in assignments(t, 3) {
            for w in &windows {
                checks += 1;
                if evaluate_template(t, a, b, w).unwrap() != oracle_evaluate_template(t, a, b, w).unwrap() {
                    mismatches.push(format!("{t}({a},{b:?}) on {w:?}"));
                }
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(
        mismatches.is_empty() && windows.len() == 1_092 && elapsed < Duration::from_secs(10),
        format!(
            "{} windows, {checks} evaluations, {} mismatches{}, {:.3}s",
            windows.len(),
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default(),
            elapsed.as_secs_f64()
        ),
    )
}

fn count_partition() -> Outcome {
    let profile = ConstraintProfile::default14();
    let channel = |name: &str| profile.templates().iter().position(|t| t.to_string() == name).unwrap();
    let partition = [channel("absence:1"), channel("exactly:1"), channel("exactly:2"), channel("existence:3")];
    let compiled = profile.compile().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0;
    let mut activity_checks = 0;
    for _ in 0..10_000 {
        let alphabet = rng.random_range(1..=10);
        let w = random_window(&mut rng, alphabet, 20);
        let slice = mine_window(0, &w, &compiled, alphabet);
        for a in 0..alphabet {
            activity_checks += 1;
            let holding: Vec<usize> = (0..4)
                .filter(|&i| slice.cells.contains(&Cell::new(a, a, partition[i])))
                .collect();
            if holding != [occurrences(&w, a).min(3)] {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("10000 windows, {activity_checks} activity checks, {violations} violations"),
    )
}

fn windowing_examples() -> Outcome {
    let log = EventLog::from_strings([("1", "abcde"), ("2", "abcdefghijk")]);
    let parts: Vec<String> = split_fixed_count(&log.traces[0], 3)
        .unwrap()
        .windows()
        .map(|w| w.iter().map(|&e| log.label(e)).collect())
        .collect();
    let sizes = split_fixed_size(&log.traces[1], 10).unwrap().window_lengths();
    verdict(
        parts == ["ab", "cd", "e"] && sizes == [10, 1],
        format!("fixed-count:3 on abcde -> {parts:?}; fixed-size:10 on 11 events -> {sizes:?}"),
    )
}

fn four_event_window() -> Outcome {
    let profile = ConstraintProfile::default14();
    let ch = |name: &str| profile.templates().iter().position(|t| t.to_string() == name).unwrap();
    let (d, w, z) = (0, 1, 2);
    let expected: BTreeSet<Cell> = [
        (d, d, "exactly:1"),
        (d, d, "init"),
        (w, w, "existence:3"),
        (w, w, "last"),
        (z, z, "absence:1"),
        (d, w, "response"),
        (d, w, "alternate_response"),
        (d, w, "chain_response"),
        (d, w, "precedence"),
        (d, w, "co_existence"),
        (w, d, "co_existence"),
        (w, d, "not_succession"),
    ]
    .into_iter()
    .map(|(r, c, t)| Cell::new(r, c, ch(t)))
    .collect();
    let window = [d, w, w, w];
    let mined = mine_window(0, &window, &profile.compile().unwrap(), 3).cells;
    let oracle = brute_force_mine(&window, &profile, 3);
    verdict(
        mined == expected && oracle == expected,
        format!("{} cells mined, {} expected, oracle agrees: {}", mined.len(), expected.len(), oracle == expected),
    )
}

fn self_satisfaction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let letters: Vec<char> = ('a'..='z').take(8).collect();
    let traces: Vec<(String, String)> = (0..1_000)
        .map(|i| {
            let w = random_window(&mut rng, letters.len(), 40);
            (format!("case{i}"), w.iter().map(|&e| letters[e]).collect())
        })
        .collect();
    let log = EventLog::from_strings(traces.iter().map(|(c, t)| (c.as_str(), t.as_str())));
    let mut cells = 0u64;
    let mut violations = 0u64;
    let mut mined_traces = 0;
    for (profile, scheme) in [
        (ConstraintProfile::default14(), WindowingScheme::FixedCount(3)),
        (ConstraintProfile::all21(), WindowingScheme::FixedSize(5)),
    ] {
        let out = mine_log(&log, &profile, &MineOptions::new(scheme)).unwrap();
        mined_traces += out.tensors.len();
        let by_case: std::collections::HashMap<&str, _> =
            log.traces.iter().map(|t| (t.case_id.as_str(), t)).collect();
        for tensor in &out.tensors {
            let windows: Vec<_> = scheme.split(by_case[tensor.case_id.as_str()]).unwrap().windows().collect();
            for slice in &tensor.slices {
                for c in &slice.cells {
                    cells += 1;
                    let t: Template = profile.templates()[c.channel as usize];
                    let second = (!t.is_unary()).then_some(c.col as usize);
                    let window = windows[slice.window_index];
                    let holds = evaluate_template(t, c.row as usize, second, window).unwrap()
                        && oracle_evaluate_template(t, c.row as usize, second, window).unwrap();
                    if !holds {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0 && cells > 0,
        format!("1000 traces, {mined_traces} mined under two schemes, {cells} cells, {violations} violations"),
    )
}

fn metrics_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut sets = 0;
    let mut worst = 0.0f64;
    while sets < 1_000 {
        let n = rng.random_range(2..=50);
        let levels = rng.random_range(2..=12);
        let pairs: Vec<(f64, bool)> = (0..n)
            .map(|_| (rng.random_range(0..levels) as f64 / (levels - 1) as f64, rng.random_bool(0.35)))
            .collect();
        let Some(expected) = sweep_metrics(&pairs) else { continue };
        sets += 1;
        worst = worst
            .max((average_precision(&pairs).unwrap() - expected.ap).abs())
            .max((roc_auc(&pairs).unwrap() - expected.auc).abs())
            .max((f1_at_best_threshold(&pairs).unwrap().0 - expected.best_f1).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let letters = ['a', 'b', 'c', 'd', 'e'];
    let traces: Vec<(String, String)> = (0..50)
        .map(|i| {
            let w = random_window(&mut rng, letters.len(), 16);
            (format!("c{i}"), w.iter().map(|&e| letters[e]).collect())
        })
        .collect();
    let log = EventLog::from_strings(traces.iter().map(|(c, t)| (c.as_str(), t.as_str())));
    let ds = mined_dataset(&log, ConstraintProfile::default14(), WindowingScheme::FixedCount(2));
    let r = evaluate_predictions(&ds, &PredictionSet::from_final_windows(&ds), EvalOptions::default()).unwrap();
    let perfect = (r.ap, r.auc, r.f1_best) == (1.0, 1.0, 1.0);
    verdict(
        worst <= 1e-9 && perfect,
        format!(
            "{sets} sets, max deviation {worst:.2e}; truth-as-prediction ap={} auc={} f1={}",
            r.ap, r.auc, r.f1_best
        ),
    )
}

fn mined_dataset(log: &EventLog, profile: ConstraintProfile, scheme: WindowingScheme) -> TensorDataset {
    let out = mine_log(log, &profile, &MineOptions::new(scheme)).unwrap();
    TensorDataset {
        header: DatasetHeader {
            alphabet: log.labels(),
            profile,
            scheme,
        },
        traces: out.tensors,
    }
}

fn persistence_identity() -> Outcome {
    // Two fixed-size windows per trace. "ab" and "ba" differ only in which
    // activity comes first, so init cells flip while exactly:1 cells repeat.
    let cases: [(f64, &str, &[&str]); 3] = [
        (0.0, "0\tinit\n", &["abba", "cddc", "baab"]),
        (0.5, "0\texactly:1\n1\tinit\n", &["abba", "cddc", "baab", "dccd"]),
        (1.0, "0\texactly:1\n1\tinit\n", &["abab", "cdcd", "dcdc"]),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (j, profile, traces) in cases {
        let log = EventLog::from_strings(traces.iter().enumerate().map(|(i, t)| (["t0", "t1", "t2", "t3"][i], *t)));
        let profile = ConstraintProfile::parse(profile).unwrap();
        let scheme = WindowingScheme::FixedSize(2);
        let stats = mine_log(&log, &profile, &MineOptions::new(scheme)).unwrap().stats;
        let ds = mined_dataset(&log, profile, scheme);
        let preds = persistence_predict(&ds).unwrap();
        let f1 = pooled_tally(&ds, &preds).unwrap().f1_at(1.0).unwrap();
        let target = 2.0 * j / (1.0 + j);
        let overlap = stats.overlap.unwrap();
        ok &= (f1 - target).abs() <= 1e-9 && (overlap - j).abs() <= 1e-12;
        details.push(format!("J={j}: overlap={overlap} f1={f1} expected={target}"));
    }
    verdict(ok, details.join("; "))
}

fn corpus_reproduction() -> Outcome {
    let Ok(path) = std::env::var("PAM_BPI2012_CSV") else {
        return Outcome::Skip("set PAM_BPI2012_CSV to the BPI Challenge 2012 CSV to run".into());
    };
    let options = IngestOptions {
        case_column: std::env::var("PAM_BPI2012_CASE_COL").unwrap_or_else(|_| "case_id".into()),
        activity_column: std::env::var("PAM_BPI2012_ACTIVITY_COL").unwrap_or_else(|_| "activity".into()),
        time_column: std::env::var("PAM_BPI2012_TIME_COL").ok(),
    };
    let log = match parse_csv_log(&path, &options) {
        Ok(log) => log,
        Err(e) => return Outcome::Fail(format!("cannot read {path}: {e}")),
    };
    let out = mine_log(
        &log,
        &ConstraintProfile::default14(),
        &MineOptions::new(WindowingScheme::FixedCount(2)),
    )
    .unwrap();
    let s = out.stats;
    let total = s.total_constraint_count as f64;
    let overlap = s.overlap.unwrap_or(0.0);
    let total_ok = (total - 2_701_992.0).abs() <= 0.02 * 2_701_992.0;
    let overlap_ok = (overlap - 0.447).abs() <= 0.02;
    let time_ok = s.elapsed_seconds <= 10.0;
    verdict(
        total_ok && overlap_ok && time_ok,
        format!(
            "{} traces ({} too short), {} constraints (target 2701992 +-2%), overlap {overlap:.4} (target 0.447 +-0.02), {:.2}s",
            s.trace_count, s.too_short_count, s.total_constraint_count, s.elapsed_seconds
        ),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("unary count partition", count_partition),
        ("windowing examples", windowing_examples),
        ("four-event window cell set", four_event_window),
        ("self-satisfaction", self_satisfaction),
        ("metrics correctness", metrics_correctness),
        ("persistence identity", persistence_identity),
        ("corpus-scale reproduction (optional)", corpus_reproduction),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Outcome::Pass(d) => println!("PASS {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
            Outcome::Skip(d) => println!("SKIP {name}: {d}"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
