//! Batch transform evaluation: sequential against data-parallel.

use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use patchflow::fields::{Part, PiecewiseField};
use patchflow::geometry::PatchDomain;
use patchflow::quadrature::QuadratureSpec;
use patchflow::transforms::TransformBackend;
use patchflow::{Parallelism, C64};

fn targets(n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(0.3 + 2.4 * (k as f64 / n as f64), 2.399963 * k as f64)).collect()
}

fn bench(c: &mut Criterion) {
    let d = Arc::new(PatchDomain::ellipse(C64::new(0.0, 0.0), 2.0, 1.0, 0.5).expect("ellipse"));
    // a non-constant interior part forces numerical radial integration
    let f = PiecewiseField::new(d.clone(), Part::func(|z| C64::new(1.0 + 0.3 * z.re, 0.2 * z.im)), Part::Zero);
    let pts = targets(64);
    let mut g = c.benchmark_group("eval_many");
    g.sample_size(10);
    for (name, par) in [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)] {
        let b = TransformBackend::quadrature(d.clone(), QuadratureSpec::default()).with_parallelism(par);
        g.bench_with_input(BenchmarkId::new(name, pts.len()), &pts, |bch, pts| bch.iter(|| black_box(b.eval_many(&f, pts))));
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
