use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use troprank_bench::case;
use troprank_core::plfun::lower_envelope;
use troprank_core::series::standard_tableau;
use troprank_core::{
    certify_independence, search_dependence, CaseContext, CaseSpec, MultiSetIndex, PLFunction,
    ParameterQuadruple, RuleSet, Q,
};

fn context(c: &CaseSpec) -> CaseContext {
    CaseContext::new(c.params, c.tableau.clone(), c.long_bridges.as_ref(), 0).unwrap()
}

fn envelope(c: &mut Criterion) {
    let case = case("canonical-m4");
    let ctx = context(&case);
    let fns = ctx.functions(&case.family);
    let refs: Vec<&PLFunction> = fns.iter().collect();
    let shifts: Vec<Q> = (0..fns.len() as i64)
        .map(|k| Q::new((k * 37 % 11).into(), 3.into()))
        .collect();
    c.bench_function("envelope/canonical-m4", |b| {
        b.iter(|| lower_envelope(black_box(&refs), &shifts, &ctx.graph))
    });
}

fn context_build(c: &mut Criterion) {
    let case = case("rank3-rho2");
    c.bench_function("context/rank3-rho2", |b| {
        b.iter(|| context(black_box(&case)))
    });
}

fn certify(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    group.sample_size(10);
    for name in ["canonical-m4", "rank3-rho2", "thm1.3.2-r3"] {
        let case = case(name);
        let ctx = context(&case);
        group.bench_function(name, |b| {
            b.iter(|| certify_independence(black_box(&case.family), &ctx, &RuleSet::all()).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let p = ParameterQuadruple::from_rsrho(3, 1, 0, 2).unwrap();
    let ctx = CaseContext::new(p, standard_tableau(&p).unwrap(), None, 0).unwrap();
    let family = MultiSetIndex::all(3, 2);
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    group.bench_function("oversize-r3-m2", |b| {
        b.iter_batched(
            || family.clone(),
            |a| search_dependence(&a, &ctx, 100).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, envelope, context_build, certify, search);
criterion_main!(benches);
