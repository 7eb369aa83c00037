use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gradpre_bench::lts;
use gradpre_core::coalgebra::{classical_bisim, classical_sim, refines_in};
use gradpre_core::monads::{SemKind, Semantics, Space};

fn unfold(c: &mut Criterion) {
    let mut group = c.benchmark_group("refines_all_pairs");
    group.sample_size(20);
    for kind in [SemKind::Bisim, SemKind::Sim, SemKind::Sync] {
        for states in [4, 8] {
            let sys = lts(states as u64, states, 0.3);
            let space = Space::over_one(Semantics::new(kind, &sys.labels).unwrap());
            group.bench_with_input(BenchmarkId::new(kind.to_string(), states), &sys, |b, sys| {
                b.iter(|| {
                    let mut yes = 0;
                    for x in 0..sys.len() {
                        for y in 0..sys.len() {
                            yes += usize::from(refines_in(&space, sys, x, sys, y, 8).unwrap().holds_all());
                        }
                    }
                    yes
                })
            });
        }
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let sys = lts(7, 64, 0.05);
    c.bench_function("classical_bisim_64", |b| b.iter(|| classical_bisim(&sys).unwrap()));
    c.bench_function("classical_sim_64", |b| b.iter(|| classical_sim(&sys, &sys).unwrap()));
}

criterion_group!(benches, unfold, oracles);
criterion_main!(benches);
