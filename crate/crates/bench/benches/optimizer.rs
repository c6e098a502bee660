use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flet::baseline::{baseline_assignment, BaselineKind};
use flet::fixtures;
use flet::optimizer::{optimize, Method, Problem, SearchConfig};
use flet::pattern::{enumerate_edge_patterns, PatternKind};
use flet::sim::simulate_steady;
use flet::{response_times, Metric, ObjectiveSpec};

fn search(c: &mut Criterion) {
    let dag = fixtures::case_study();
    let mut group = c.benchmark_group("case_study");
    for method in [Method::Enumerate, Method::Backtrack, Method::Symbolic] {
        for objective in [ObjectiveSpec::data_age(), ObjectiveSpec::reaction_time()] {
            let config = SearchConfig::new(method, objective);
            let id = format!("{}/{}", method.short_name(), objective.metric.short_name());
            group.bench_function(id, |b| b.iter(|| optimize(black_box(&dag), &config).unwrap()));
        }
    }
    let td = SearchConfig::new(Method::Backtrack, ObjectiveSpec::time_disparity(1.0));
    group.bench_function("backtrack/td", |b| b.iter(|| optimize(black_box(&dag), &td).unwrap()));
    group.finish();
}

fn building_blocks(c: &mut Criterion) {
    let example = fixtures::running_example();
    let r = response_times(&example).unwrap();
    c.bench_function("running_example/edge_patterns", |b| {
        b.iter(|| {
            for e in 0..example.edges().len() {
                black_box(enumerate_edge_patterns(&example, e, &r, PatternKind::LastReading).unwrap());
            }
        })
    });

    let dag = fixtures::case_study();
    let problem = Problem::new(&dag, Metric::DataAge).unwrap();
    let default = problem.default_let_pattern();
    c.bench_function("case_study/lp_default_pattern", |b| {
        b.iter(|| problem.evaluate(black_box(&default)).unwrap())
    });
    c.bench_function("case_study/rta", |b| b.iter(|| response_times(black_box(&dag)).unwrap()));
    c.bench_function("case_study/simulate", |b| {
        b.iter(|| simulate_steady(black_box(&dag), &vec![0; dag.len()]).unwrap())
    });
    c.bench_function("case_study/implicit_baseline", |b| {
        b.iter(|| baseline_assignment(BaselineKind::Implicit, black_box(&dag)).unwrap())
    });
}

criterion_group!(benches, search, building_blocks);
criterion_main!(benches);
