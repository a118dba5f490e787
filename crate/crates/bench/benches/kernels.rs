use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_rational::BigRational;

use vcsp_core::algebra::operation::Operation;
use vcsp_core::algebra::support::{supp_membership, SuppOptions};
use vcsp_core::gen::{cycle, gen_instance, gen_min_uncut, gen_submodular};
use vcsp_core::library::{phi_cut, phi_xor};
use vcsp_core::lp::{solve_lp, Bound, LinearProgram, RowRelation, Sense};
use vcsp_core::relaxation::{build_sa, solve_sa};
use vcsp_core::{Domain, Language};

/// Transportation problem with `n` sources and `n` sinks.
fn transport(n: usize) -> LinearProgram {
    let q = |v: i64| BigRational::from_integer(v.into());
    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut x = vec![vec![0; n]; n];
    for (i, row) in x.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = lp.add_var(format!("x{i}_{j}"), Bound::NonNegative, q(((i * 7 + j * 3) % 11) as i64 + 1));
        }
    }
    for (i, row) in x.iter().enumerate() {
        lp.add_row(format!("s{i}"), row.iter().map(|&v| (v, q(1))), RowRelation::Le, q(i as i64 + 2))
            .unwrap();
        lp.add_row(format!("t{i}"), (0..n).map(|j| (x[j][i], q(1))), RowRelation::Ge, q(1))
            .unwrap();
    }
    lp
}

fn simplex(c: &mut Criterion) {
    let mut g = c.benchmark_group("simplex/transport");
    for n in [4, 8, 12] {
        let lp = transport(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &lp, |b, lp| b.iter(|| solve_lp(lp).unwrap()));
    }
    g.finish();
}

fn sherali_adams(c: &mut Criterion) {
    let mut g = c.benchmark_group("sa23");
    g.sample_size(10);
    for n in [4, 5, 6] {
        let inst = gen_min_uncut(n, &cycle(n)).unwrap();
        g.bench_with_input(BenchmarkId::new("min-uncut-cycle", n), &inst, |b, inst| {
            b.iter(|| solve_sa(&build_sa(inst, 2, 3).unwrap()).unwrap())
        });
    }
    let (_, inst) = gen_submodular(7, 6, 2, 8).unwrap();
    g.bench_function("submodular-n6", |b| b.iter(|| solve_sa(&build_sa(&inst, 2, 3).unwrap()).unwrap()));
    let lang = Arc::new(Language::with_relations(Domain::new(3).unwrap(), [vcsp_core::library::neq(3)]).unwrap());
    let inst = gen_instance(1, lang, 4, 5).unwrap();
    g.bench_function("neq3-n4", |b| b.iter(|| solve_sa(&build_sa(&inst, 2, 3).unwrap()).unwrap()));
    g.finish();
}

fn support(c: &mut Criterion) {
    let d2 = Domain::new(2).unwrap();
    let cut = Language::with_relations(d2, [phi_cut()]).unwrap();
    let xor = Language::with_relations(d2, [phi_xor()]).unwrap();
    let min = Operation::min(2);
    let opts = SuppOptions::default();
    let mut g = c.benchmark_group("supp");
    g.bench_function("min-in-cut", |b| b.iter(|| supp_membership(&min, &cut, &opts).unwrap()));
    g.bench_function("min-in-xor", |b| b.iter(|| supp_membership(&min, &xor, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, simplex, sherali_adams, support);
criterion_main!(benches);
