//! Parallel-vs-sequential timings for the heavy stages. Run with the
//! default features for the rayon paths and with `--no-default-features`
//! for a fully sequential build; the in-process "sequential" series always
//! measures the explicit sequential twins.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::Rng;
use rand::SeedableRng;

use condag::data::{Dataset, Variable};
use condag::mmd::{pair_scores, pair_scores_seq, triple_scores, triple_scores_seq};
use condag::net::Network;
use condag::pipeline::{learn, Deadline, LearnOptions};
use condag::sampler::forward_sample;
use condag::score::ScoreContext;
use condag::search::{hill_climb, hill_climb_seq, MoveConstraints};
use condag::Graph;

/// Binary columns where each column flips the previous one with small
/// probability: dense correlations without needing a network file.
fn synthetic(n_vars: usize, rows: usize, seed: u64) -> Dataset {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<u16>> = Vec::with_capacity(n_vars);
    for v in 0..n_vars {
        let col: Vec<u16> = if v == 0 {
            (0..rows).map(|_| u16::from(rng.gen_bool(0.5))).collect()
        } else {
            columns[v - 1]
                .iter()
                .map(|&prev| if rng.gen_bool(0.25) { 1 - prev } else { prev })
                .collect()
        };
        columns.push(col);
    }
    let variables = (0..n_vars)
        .map(|v| Variable {
            name: format!("v{v}"),
            states: vec!["0".into(), "1".into()],
        })
        .collect();
    Dataset::from_parts(variables, columns).unwrap()
}

fn chain_dag(d: &Dataset) -> Graph {
    let mut g = Graph::new(d.node_names()).unwrap();
    for i in 1..g.n() {
        g.add_directed(i - 1, i).unwrap();
    }
    g
}

fn bench_pair_scores(c: &mut Criterion) {
    let d = synthetic(8, 2000, 1);
    let stop = Deadline::none();
    let mut group = c.benchmark_group("pair_scores");
    group.bench_function("parallel", |b| {
        b.iter(|| pair_scores(black_box(&d), &stop).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| pair_scores_seq(black_box(&d), &stop).unwrap())
    });
    group.finish();
}

fn bench_triple_scores(c: &mut Criterion) {
    let d = synthetic(8, 2000, 1);
    let stop = Deadline::none();
    let pair = pair_scores_seq(&d, &stop).unwrap();
    let mut group = c.benchmark_group("triple_scores");
    group.bench_function("parallel", |b| {
        b.iter(|| triple_scores(black_box(&d), &pair, &stop).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| triple_scores_seq(black_box(&d), &pair, &stop).unwrap())
    });
    group.finish();
}

fn bench_hill_climb(c: &mut Criterion) {
    let d = synthetic(7, 1500, 2);
    let g0 = chain_dag(&d);
    let constraints = MoveConstraints::unrestricted(d.n_vars());
    let stop = Deadline::none();
    let mut group = c.benchmark_group("hill_climb");
    group.bench_function("parallel", |b| {
        b.iter_batched(
            || ScoreContext::new(&d),
            |ctx| hill_climb(&g0, &ctx, &constraints, &stop, &mut Vec::new()),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("sequential", |b| {
        b.iter_batched(
            || ScoreContext::new(&d),
            |ctx| hill_climb_seq(&g0, &ctx, &constraints, &stop, &mut Vec::new()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_forward_sample(c: &mut Criterion) {
    let net = Network::from_json_str(
        r#"{
            "variables": [
                {"name": "a", "states": ["on", "off"]},
                {"name": "b", "states": ["on", "off"]},
                {"name": "c", "states": ["on", "off"]}
            ],
            "edges": [["a", "b"], ["b", "c"]],
            "cpts": {
                "a": {"": [0.4, 0.6]},
                "b": {"a=on": [0.8, 0.2], "a=off": [0.3, 0.7]},
                "c": {"b=on": [0.9, 0.1], "b=off": [0.25, 0.75]}
            }
        }"#,
    )
    .unwrap();
    c.bench_function("forward_sample_10k", |b| {
        b.iter(|| forward_sample(black_box(&net), 10_000, 5).unwrap())
    });
}

fn bench_learn(c: &mut Criterion) {
    let d = synthetic(6, 1000, 3);
    let opts = LearnOptions {
        timeout: None,
        trace: false,
    };
    c.bench_function("learn_6x1000", |b| {
        b.iter(|| learn(black_box(&d), &opts).unwrap())
    });
}

criterion_group!(
    benches,
    bench_pair_scores,
    bench_triple_scores,
    bench_hill_climb,
    bench_forward_sample,
    bench_learn
);
criterion_main!(benches);
