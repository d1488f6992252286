use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fbhebb_bench::primed_matrix;
use fbhebb_core::{
    delta_w, run_protocol, train_step, Architecture, InjectionMode, Network, Pair, ProtocolSpec,
    RuleParams, RuleTerms, RuleVariant, Trainer, UpdateGranularity,
};
use std::hint::black_box;

fn bench_delta_w(c: &mut Criterion) {
    let (m, x, y, t) = primed_matrix(1);
    let p = RuleParams::default();
    c.bench_function("delta_w", |b| {
        b.iter(|| delta_w(black_box(&m), &x, &y, &t, &p, RuleTerms::ALL))
    });
}

fn bench_train_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("train_step");
    for arch in Architecture::ALL {
        g.bench_with_input(BenchmarkId::from_parameter(arch), &arch, |b, &arch| {
            let mut net = Network::new(arch, InjectionMode::Input, 1);
            let (x, t) = (Pair::A.input(), Pair::A.target());
            b.iter(|| {
                train_step(&mut net, &x, &t, &RuleParams::default(), RuleVariant::Full).unwrap()
            })
        });
    }
    g.finish();
}

fn bench_protocol(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_protocol");
    for (name, spec) in [
        ("sequential", ProtocolSpec::sequential(10)),
        ("interleaved", ProtocolSpec::interleaved(10)),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut net = Network::new(Architecture::Ff2Fb2, InjectionMode::Input, 1);
                let mut trainer = Trainer::new(
                    RuleParams::default(),
                    RuleVariant::Full,
                    UpdateGranularity::Sample,
                )
                .unwrap();
                run_protocol(
                    &mut net,
                    &spec,
                    &mut trainer,
                    &mut |_: usize, _: &Network| {},
                )
                .unwrap();
                net
            })
        });
    }
    g.finish();
}

criterion_group!(benches, bench_delta_w, bench_train_step, bench_protocol);
criterion_main!(benches);
