use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use myopic_auth::adversary::AdversaryStrategy;
use myopic_auth::channel::make_r_ow_bsc_bec;
use myopic_auth::math::Distribution;
use myopic_auth::overwrite::{classify_with, ClassifyOptions};
use myopic_auth::sim::estimate_tag_errors;
use myopic_auth::tag::{build_set_family, Tag, TagScheme};
use myopic_auth::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn tag_trials(c: &mut Criterion) {
    let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
    let fam = build_set_family(400, 0.2, 0.2, 8, 1, 10).unwrap();
    let tag: Tag = TagScheme::new(&avc, Distribution::uniform(2), 0, fam, 0.2, Some(0.05)).unwrap().into();
    let mut g = c.benchmark_group("tag_false_alarm_2000_trials");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| estimate_tag_errors(&tag, &avc, &AdversaryStrategy::Absent, 0, 0, 2000, 3, mode).unwrap())
        });
    }
    g.finish();
}

fn classification(c: &mut Criterion) {
    let avc = make_r_ow_bsc_bec(0.1, 0.3, 0.5).unwrap();
    let mut g = c.benchmark_group("classify_grid_0.05");
    g.sample_size(10);
    for (name, mode) in MODES {
        let opts = ClassifyOptions { execution: mode, ..ClassifyOptions::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| classify_with(&avc, opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, tag_trials, classification);
criterion_main!(benches);
