use criterion::{criterion_group, criterion_main, Criterion};
use pabo::scenario::{preset, run, Mode};

fn tree_mild(c: &mut Criterion) {
    let mut g = c.benchmark_group("tree-mild");
    g.sample_size(10);
    for mode in [Mode::Pabo, Mode::Baseline] {
        let mut cfg = preset("tree-mild").unwrap();
        cfg.mode = mode;
        g.bench_function(mode.to_string(), |b| b.iter(|| run(&cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, tree_mild);
criterion_main!(benches);
