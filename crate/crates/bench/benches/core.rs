use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use skillprice_bench::corpus;
use skillprice_core::complementarity::{pagerank, value_weighted_pagerank, PageRankConfig, ValueSource};
use skillprice_core::skillgraph::{build_graph, detect_communities};
use skillprice_core::valuation::{premium_all, price_all, PriceSpec};

const SIZES: [usize; 2] = [2_000, 10_000];

fn valuation(c: &mut Criterion) {
    let mut group = c.benchmark_group("valuation");
    group.sample_size(10);
    for n in SIZES {
        let table = corpus(n);
        group.bench_with_input(BenchmarkId::new("premium_all", n), &table, |b, t| {
            b.iter(|| premium_all(black_box(t), 20))
        });
        group.bench_with_input(BenchmarkId::new("price_all", n), &table, |b, t| {
            b.iter(|| price_all(black_box(t), 20, &PriceSpec::default()).unwrap())
        });
    }
    group.finish();
}

fn network(c: &mut Criterion) {
    let mut group = c.benchmark_group("network");
    for n in SIZES {
        let table = corpus(n);
        let graph = build_graph(&table, 20).unwrap();
        let premia = premium_all(&table, 20);
        let values = premia.iter().map(|(k, p)| (k.clone(), p.premium)).collect();
        let cfg = PageRankConfig::default();
        group.bench_with_input(BenchmarkId::new("build_graph", n), &table, |b, t| {
            b.iter(|| build_graph(black_box(t), 20).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("louvain", n), &graph, |b, g| {
            b.iter(|| detect_communities(black_box(g), 7, 1.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pagerank", n), &graph, |b, g| {
            b.iter(|| pagerank(black_box(g), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("value_weighted_pagerank", n), &graph, |b, g| {
            b.iter(|| value_weighted_pagerank(black_box(g), &values, ValueSource::Premium, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, valuation, network);
criterion_main!(benches);
