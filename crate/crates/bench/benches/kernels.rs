use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polyball::berezin::{berezin_kernel, vn_check};
use polyball::beurling::{beurling_factorize, random_inner_symbol};
use polyball::polyball::{check_membership, Tolerances};
use polyball::rewrite::reduce_word;
use polyball::sampling::{random_nilpotent_member, random_polynomial, random_word, stream};
use polyball::wold::{assemble, random_tuple_spec, wold_projections};
use polyball::TruncatedModel;
use polyball_bench::{mixed_arity, twisted_pair};

fn model_build(c: &mut Criterion) {
    let mut g = c.benchmark_group("model_build");
    for degree in [4, 6, 8] {
        g.bench_with_input(BenchmarkId::new("mixed_arity", degree), &degree, |b, &d| {
            b.iter(|| TruncatedModel::new(&mixed_arity(), black_box(d)).unwrap())
        });
    }
    g.finish();
}

fn normalize(c: &mut Criterion) {
    let lam = mixed_arity();
    let mut rng = stream(1, "bench-words");
    let words: Vec<_> = (0..64).map(|_| random_word(&mut rng, lam.n(), 12)).collect();
    c.bench_function("normalize_64_words_len12", |b| {
        b.iter(|| words.iter().map(|w| reduce_word(&lam, black_box(w)).len()).sum::<usize>())
    });
}

fn build_matrix(c: &mut Criterion) {
    let lam = twisted_pair();
    let model = TruncatedModel::new(&lam, 8).unwrap();
    let mut rng = stream(2, "bench-poly");
    let p = random_polynomial(&mut rng, lam.n(), 3, 6);
    c.bench_function("build_matrix_d8", |b| b.iter(|| model.build_matrix(black_box(&p)).unwrap()));
}

fn membership_and_kernel(c: &mut Criterion) {
    let lam = twisted_pair();
    let tol = Tolerances::default();
    let mut rng = stream(3, "bench-member");
    let t = random_nilpotent_member(&mut rng, &lam, 6, 3);
    let f = random_polynomial(&mut rng, lam.n(), 3, 4);
    let d = t.joint_nilpotency_order().unwrap();
    c.bench_function("check_membership", |b| b.iter(|| check_membership(black_box(&t), &tol)));
    c.bench_function("berezin_kernel", |b| b.iter(|| berezin_kernel(black_box(&t), &tol, None).unwrap()));
    c.bench_function("vn_check", |b| b.iter(|| vn_check(black_box(&t), &f, d + 3, &tol).unwrap()));
}

fn wold(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut rng = stream(4, "bench-wold");
    let (spec, d) = random_tuple_spec(&mut rng, 80);
    let t = assemble(&spec, d).unwrap();
    c.bench_function("wold_projections", |b| b.iter(|| wold_projections(black_box(&t), &tol).unwrap()));
}

fn beurling(c: &mut Criterion) {
    let tol = Tolerances::default();
    let model = TruncatedModel::new(&mixed_arity(), 4).unwrap();
    let mut rng = stream(5, "bench-beurling");
    let psi = random_inner_symbol(&mut rng, &model, 2, 2);
    let y = psi.range_projection();
    c.bench_function("beurling_factorize", |b| {
        b.iter(|| beurling_factorize(&model, psi.out_dim, black_box(&y), &tol).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = model_build, normalize, build_matrix, membership_and_kernel, wold, beurling
}
criterion_main!(benches);
