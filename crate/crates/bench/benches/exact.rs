use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cubesample::constructions::{build_majority_proof_system, build_parity_sampler, verify_image, VerifyMode};
use cubesample::exactdist::slice_union_distance;
use cubesample::frontier::{search_best_sampler, SearchConfig, SearchMode};
use cubesample::rational::ratio;
use cubesample::sunflower::{robustness, RobustMode};
use cubesample::{tv_distance, SetFamily, SliceSpec, SwitchingNetwork};

fn output_distribution(c: &mut Criterion) {
    let mut g = c.benchmark_group("output_distribution");
    for n in [8usize, 12, 16, 20] {
        let f = build_parity_sampler(n).unwrap();
        g.bench_with_input(BenchmarkId::new("parity", n), &f, |b, f| b.iter(|| f.output_distribution().unwrap()));
    }
    g.finish();
}

fn distances(c: &mut Criterion) {
    let mut g = c.benchmark_group("tv_distance");
    for n in [8usize, 12, 16] {
        let d = build_parity_sampler(n).unwrap().output_distribution().unwrap();
        let even = SliceSpec::even(n + 1).unwrap();
        g.bench_with_input(BenchmarkId::new("parity_vs_even", n), &(d, even), |b, (d, t)| {
            b.iter(|| tv_distance(d, t).unwrap())
        });
    }
    for n in [64usize, 256, 1024] {
        let w: BTreeSet<usize> = (0..=n / 2).step_by(3).collect();
        g.bench_with_input(BenchmarkId::new("slice_union_closed_form", n), &w, |b, w| {
            b.iter(|| slice_union_distance(black_box(n), w).unwrap())
        });
    }
    g.finish();
}

fn sunflowers(c: &mut Criterion) {
    let mut g = c.benchmark_group("robustness_exact");
    for u in [8usize, 12, 16] {
        // Element 0 in every set, with disjoint petals {2i+1, 2i+2}.
        let sets: Vec<u64> = (0..(u - 1) / 2).map(|i| 1 | 0b11u64 << (2 * i + 1)).collect();
        let fam = SetFamily::new(u, sets).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(u), &fam, |b, f| {
            b.iter(|| robustness(f, &ratio(1, 2), &RobustMode::Exact).unwrap())
        });
    }
    g.finish();
}

fn proof_systems(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_image");
    g.sample_size(10);
    for n in [3usize, 5, 7] {
        let ps = build_majority_proof_system(n).unwrap();
        g.bench_with_input(BenchmarkId::new("majority_exhaustive", n), &ps, |b, ps| {
            b.iter(|| verify_image(ps, &VerifyMode::Exhaustive).unwrap())
        });
    }
    g.finish();
}

fn networks(c: &mut Criterion) {
    let mut g = c.benchmark_group("switchnet_distribution");
    for (n, depth) in [(12usize, 1usize), (16, 2), (20, 2)] {
        let s = SwitchingNetwork::random(n, 2, depth, 7).unwrap();
        g.bench_with_input(BenchmarkId::new(format!("n{n}"), depth), &s, |b, s| b.iter(|| s.distribution(26).unwrap()));
    }
    g.finish();
}

fn frontier(c: &mut Criterion) {
    let mut g = c.benchmark_group("frontier");
    g.sample_size(10);
    let cfg = SearchConfig { m: 3, d: 1, target: SliceSpec::single(3, 1).unwrap(), restarts: 20, steps: 200, seed: 1 };
    g.bench_function("exhaustive_u1_3", |b| b.iter(|| search_best_sampler(&cfg, SearchMode::Exhaustive).unwrap()));
    g.bench_function("hillclimb_u1_3", |b| b.iter(|| search_best_sampler(&cfg, SearchMode::Hillclimb).unwrap()));
    g.finish();
}

criterion_group!(benches, output_distribution, distances, sunflowers, proof_systems, networks, frontier);
criterion_main!(benches);
