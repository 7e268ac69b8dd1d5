use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use pam_bench::synthetic_log;
use pam_core::declare::oracle::oracle_evaluate_template;
use pam_core::{evaluate_template, mine_log, ConstraintProfile, MineOptions, Template, WindowingScheme};

fn bench_mining(c: &mut Criterion) {
    let log = synthetic_log(2_000, 24, 40, 17);
    let profile = ConstraintProfile::default14();
    let mut group = c.benchmark_group("mine_log");
    group.throughput(Throughput::Elements(log.event_count() as u64));
    for windows in [2, 5, 10] {
        let opts = MineOptions {
            threads: Some(1),
            ..MineOptions::new(WindowingScheme::FixedCount(windows))
        };
        group.bench_function(format!("fixed-count:{windows}/1-thread"), |b| {
            b.iter(|| mine_log(&log, &profile, &opts).unwrap())
        });
    }
    let parallel = MineOptions::new(WindowingScheme::FixedCount(5));
    group.bench_function("fixed-count:5/all-threads", |b| {
        b.iter(|| mine_log(&log, &profile, &parallel).unwrap())
    });
    group.finish();
}

fn bench_template_eval(c: &mut Criterion) {
    let window: Vec<usize> = (0..40).map(|i| (i * 7 + i / 3) % 5).collect();
    let mut group = c.benchmark_group("evaluate_template");
    for t in [Template::Response, Template::AlternatePrecedence, Template::NotChainSuccession] {
        group.bench_function(format!("dfa/{t}"), |b| {
            b.iter_batched(|| window.clone(), |w| evaluate_template(t, 1, Some(3), &w).unwrap(), BatchSize::SmallInput)
        });
        group.bench_function(format!("oracle/{t}"), |b| {
            b.iter_batched(
                || window.clone(),
                |w| oracle_evaluate_template(t, 1, Some(3), &w).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mining, bench_template_eval);
criterion_main!(benches);
