use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use gpe_core::classify::{admissible_embeddings, build_normal_form};
use gpe_core::crframe::{field_l, frame_decompose};
use gpe_core::dangelo::h_map;
use gpe_core::geometry::{sample_boundary, DEFAULT_SP_MARGIN};
use gpe_core::holomap::BoundaryDifferential;
use gpe_core::{BlockSignature, ClassificationProblem};

fn sig(dims: &[usize], exps: &[u32]) -> BlockSignature {
    BlockSignature::new(dims.to_vec(), exps.to_vec()).unwrap()
}

fn bench_h_map(c: &mut Criterion) {
    c.bench_function("h_map m=4 M=5", |b| b.iter(|| h_map(black_box(4), black_box(5)).unwrap()));
}

fn bench_classify(c: &mut Criterion) {
    let p = ClassificationProblem::new(
        sig(&[2, 3, 2, 1], &[4, 6, 4]),
        sig(&[6, 6, 6, 1], &[2, 2, 2]),
    )
    .unwrap();
    c.bench_function("admissible_embeddings N=4", |b| {
        b.iter(|| admissible_embeddings(black_box(&p)).unwrap())
    });
}

fn bench_frame(c: &mut Criterion) {
    let s = sig(&[3, 3, 2], &[3, 2]);
    let pt = sample_boundary(&s, 1, 1, DEFAULT_SP_MARGIN).unwrap().remove(0);
    let x = field_l(&s, &pt, 1, 0).unwrap();
    c.bench_function("frame_decompose 8-dim", |b| {
        b.iter(|| frame_decompose(&s, black_box(&pt), black_box(&x)).unwrap())
    });
}

fn bench_pushforward(c: &mut Criterion) {
    let p = ClassificationProblem::new(sig(&[2, 2, 2], &[4, 6]), sig(&[3, 10, 2], &[2, 3])).unwrap();
    let a = admissible_embeddings(&p).unwrap().remove(0);
    let nf = build_normal_form(&p, &a).unwrap();
    let diff = BoundaryDifferential::new(&nf);
    let pt = sample_boundary(p.source(), 1, 2, DEFAULT_SP_MARGIN).unwrap().remove(0);
    let x = field_l(p.source(), &pt, 0, 1).unwrap();
    c.bench_function("pushforward normal form", |b| {
        b.iter(|| diff.pushforward(black_box(&pt), black_box(&x)).unwrap())
    });
}

criterion_group!(benches, bench_h_map, bench_classify, bench_frame, bench_pushforward);
criterion_main!(benches);
