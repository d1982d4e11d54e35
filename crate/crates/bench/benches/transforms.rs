use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use tflocal_core::signals::{gaussian, hermite1};
use tflocal_core::transforms::{cross_wigner, fourier, invert, stft};
use tflocal_core::Grid;

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transforms");
    group.sample_size(20);
    for n in [128usize, 256] {
        let g = Grid::with_extent(1, n, 12.0).unwrap();
        let g0 = gaussian(g);
        let f = hermite1(g);
        group.bench_with_input(BenchmarkId::new("fourier", n), &f, |b, f| b.iter(|| fourier(black_box(f))));
        group.bench_with_input(BenchmarkId::new("stft", n), &f, |b, f| b.iter(|| stft(black_box(f), &g0).unwrap()));
        group.bench_with_input(BenchmarkId::new("invert", n), &f, |b, f| b.iter(|| invert(black_box(f), &g0, &g0).unwrap()));
        group.bench_with_input(BenchmarkId::new("cross_wigner", n), &f, |b, f| {
            b.iter(|| cross_wigner(black_box(f), &g0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transforms);
criterion_main!(benches);
