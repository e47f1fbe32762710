use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use segcodec_bench::{clean_colormap, degraded, scene};
use segcodec_core::hungarian::solve_max;
use segcodec_core::{
    build_palette, decode, degrade, encode, miou_recall, sample_coarse_mask, suite_config,
    suite_profile, Branch, CoarseMaskParams, CoarseSource, CollisionPolicy, DecodeConfig,
};

fn encode_bench(c: &mut Criterion) {
    let gt = scene(1);
    let palette = build_palette(11).unwrap();
    c.bench_function("encode_512", |b| {
        b.iter(|| encode(black_box(&gt), &palette, CollisionPolicy::Share).unwrap())
    });
}

fn decode_bench(c: &mut Criterion) {
    let gt = scene(2);
    let mut group = c.benchmark_group("decode_512");
    group.sample_size(20);
    let clean = clean_colormap(&gt);
    group.bench_function("clean_native", |b| {
        b.iter(|| decode(black_box(&clean), None, &DecodeConfig::default(), None).unwrap())
    });
    let cfg = suite_config(512, 512);
    for profile in ["light", "medium", "heavy"] {
        let noisy = degraded(&gt, profile, 3);
        group.bench_with_input(BenchmarkId::new("reduced", profile), &noisy, |b, cm| {
            b.iter(|| decode(black_box(cm), None, &cfg, None).unwrap())
        });
    }
    group.finish();
}

fn degrade_bench(c: &mut Criterion) {
    let clean = clean_colormap(&scene(4));
    let mut group = c.benchmark_group("degrade_512");
    group.sample_size(20);
    for name in ["light", "medium", "heavy"] {
        let profile = suite_profile(name).unwrap().with_seed(5);
        group.bench_function(name, |b| b.iter(|| degrade(black_box(&clean), &profile).unwrap()));
    }
    group.finish();
}

fn metrics_bench(c: &mut Criterion) {
    let gt = scene(6);
    let pred = decode(&degraded(&gt, "medium", 7), None, &suite_config(512, 512), None).unwrap();
    c.bench_function("miou_recall_512", |b| {
        b.iter(|| miou_recall(black_box(&gt), black_box(&pred), 0.5).unwrap())
    });

    let mut group = c.benchmark_group("hungarian");
    for n in [10usize, 50, 120] {
        // Deterministic pseudo-random weights.
        let weights: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| ((i * 7919 + j * 104_729) % 1000) as f64 / 1000.0).collect())
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &weights, |b, w| {
            b.iter(|| solve_max(black_box(w)))
        });
    }
    group.finish();
}

fn coarse_bench(c: &mut Criterion) {
    let gt = scene(8);
    let params = CoarseMaskParams::default();
    c.bench_function("coarse_mask_curve_512", |b| {
        b.iter(|| sample_coarse_mask(CoarseSource::Masks(black_box(&gt)), &params, Some(Branch::Curve)).unwrap())
    });
}

criterion_group!(benches, encode_bench, decode_bench, degrade_bench, metrics_bench, coarse_bench);
criterion_main!(benches);
