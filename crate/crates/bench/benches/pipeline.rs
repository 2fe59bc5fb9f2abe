use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qesforge_bench::{razavy_gf, razavy_system};
use qesforge_core::export::GridExport;
use qesforge_core::oracle::band_edge_spectrum;
use qesforge_core::validator::{check_admissibility, ValidatorOptions};
use qesforge_core::verify::{verify_system, VerifyOptions};
use qesforge_core::{parse, Jet, Params};
use std::f64::consts::TAU;

fn expressions(c: &mut Criterion) {
    let e = parse("4*eps0*eps1*sin(x)^2 + 0.3*cos(2*x)*exp(sin(x))").unwrap();
    let p = Params::new(1.0, 0.5);
    c.bench_function("eval_jet<7>", |b| b.iter(|| e.eval_jet::<7>(black_box(0.7), &p).unwrap()));
    c.bench_function("jet exp*sin", |b| {
        b.iter(|| {
            let v = Jet::<7>::variable(black_box(0.3));
            v.exp() * v.sin_cos().0
        })
    });
}

fn construction(c: &mut Criterion) {
    let gf = razavy_gf(1.0);
    c.bench_function("validate razavy", |b| b.iter(|| check_admissibility(&gf, &ValidatorOptions::default())));
    c.bench_function("build razavy", |b| b.iter(|| razavy_system(black_box(1.0))));
    let sys = razavy_system(1.0);
    c.bench_function("evaluate all wavefunctions", |b| {
        b.iter(|| {
            let x = black_box(1.1);
            (sys.wavefunctions_minus(x, [1.0; 3]).unwrap(), sys.wavefunctions_plus(x, [1.0; 2]).unwrap())
        })
    });
    c.bench_function("export 1024 rows", |b| {
        b.iter(|| GridExport::from_system(&sys, "4*eps0*eps1*sin(x)^2", 1024, [1.0; 3], [1.0; 2]))
    });
}

fn oracle(c: &mut Criterion) {
    let sys = razavy_system(1.0);
    let mut group = c.benchmark_group("band edges");
    for harmonics in [32, 64, 128] {
        group.bench_with_input(BenchmarkId::from_parameter(harmonics), &harmonics, |b, &h| {
            b.iter(|| band_edge_spectrum(|x| sys.v_minus(x).unwrap(), TAU, h, 9).unwrap())
        });
    }
    group.finish();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("razavy", |b| b.iter(|| verify_system(&sys, None, &VerifyOptions::default()).unwrap()));
    group.finish();
}

criterion_group!(benches, expressions, construction, oracle);
criterion_main!(benches);
