use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wreathlab::{magnus_embed, WreathProduct};
use wreathlab_bench::{random_element, random_word, rng, z_wr_z};

fn multiplication(c: &mut Criterion) {
    let mut group = c.benchmark_group("wr_mul");
    for support in [4usize, 32, 256] {
        let mut r = rng();
        for (name, w) in [("lamplighter", WreathProduct::lamplighter()), ("z_wr_z", z_wr_z())] {
            let x = random_element(&w, &mut r, support, 4 * support as i64);
            let y = random_element(&w, &mut r, support, 4 * support as i64);
            group.bench_with_input(BenchmarkId::new(name, support), &support, |b, _| {
                b.iter(|| w.mul(black_box(&x), black_box(&y)))
            });
        }
    }
    group.finish();
}

fn inverse_and_norm(c: &mut Criterion) {
    let w = WreathProduct::lamplighter();
    let x = random_element(&w, &mut rng(), 64, 200);
    c.bench_function("wr_inv/64", |b| b.iter(|| w.inv(black_box(&x))));
    c.bench_function("wr_norm/64", |b| b.iter(|| w.norm(black_box(&x))));
}

fn embedding(c: &mut Criterion) {
    let mut group = c.benchmark_group("magnus_embed");
    for len in [16usize, 128, 1024] {
        let word = random_word(&mut rng(), 3, len);
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| magnus_embed(black_box(&word)))
        });
    }
    group.finish();
}

criterion_group!(benches, multiplication, inverse_and_norm, embedding);
criterion_main!(benches);
