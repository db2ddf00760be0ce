//! Sequential vs parallel hot paths.
//!
//! The contraction has both paths in one binary. MSD and noise go through
//! the crate-wide dispatcher, so compare them by running once with default
//! features and once with `--no-default-features`; the benchmark ids carry
//! the mode.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use quenchlab_core::data::{gen_synthetic, LabelMode};
use quenchlab_core::nn::{init_net, NetArch, WeightSnapshot};
use quenchlab_core::observables::{msd_curves, noise_d, tw_grid, SystemTag};
use quenchlab_core::par;
use quenchlab_core::pspin::{random_sphere_config, sample_couplings};

fn mode() -> &'static str {
    if par::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn contraction(c: &mut Criterion) {
    let j = sample_couplings(256, 1).unwrap();
    let s = random_sphere_config(256, 2).unwrap();
    let mut g = vec![0.0; 256];
    let mut group = c.benchmark_group("pspin_energy_and_grad_n256");
    group.bench_function("sequential", |b| {
        b.iter(|| j.energy_and_grad_seq(black_box(&s.sigma), &mut g).unwrap())
    });
    group.bench_function(mode(), |b| {
        b.iter(|| j.energy_and_grad(black_box(&s.sigma), &mut g).unwrap())
    });
    group.finish();
}

fn msd(c: &mut Criterion) {
    let m = 20_000;
    let snaps: Vec<WeightSnapshot> = (0..60u64)
        .map(|k| WeightSnapshot {
            w: (0..m).map(|i| ((i as u64 * 31 + k * 17) % 101) as f64).collect(),
            iteration: k,
        })
        .collect();
    let times: Vec<f64> = snaps.iter().map(|s| s.iteration as f64).collect();
    let tws = tw_grid(&times, 4);
    c.bench_function(&format!("msd_curves_60x20000/{}", mode()), |b| {
        b.iter(|| msd_curves(black_box(&snaps), &tws, SystemTag::Weights).unwrap())
    });
}

fn noise(c: &mut Criterion) {
    let arch = NetArch::toy_a(32, 200, 1);
    let w = init_net(&arch).unwrap();
    let data = gen_synthetic(200, 32, LabelMode::RandomLabels, 1).unwrap();
    c.bench_function(&format!("noise_d_toy_a_200/{}", mode()), |b| {
        b.iter(|| noise_d(black_box(&w), &arch, data.samples()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = contraction, msd, noise
}
criterion_main!(benches);
