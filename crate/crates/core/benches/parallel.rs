//! Throughput of the estimation objective build: rayon fold vs sequential.
//!
//! Run `cargo bench -p glider-core` for the parallel path and
//! `cargo bench -p glider-core --no-default-features` to pin both rows to
//! the sequential implementation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use glider_core::config::default_params;
use glider_core::sysid::{Observation, QuadraticObjective};
use glider_core::vehicle::{ActuatorState, VehicleState};
use nalgebra::Vector6;

/// Deterministic cloud of plausible flight states; the objective build cost
/// is per-observation, so contents only need to be finite and gimbal-free.
fn observations(n: usize) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    (0..n)
        .map(|i| {
            let mut a = [0.0f64; 12];
            a[2] = rng.random_range(0.5..5.0);
            for k in 3..6 {
                a[k] = rng.random_range(-0.8..0.8);
            }
            a[6] = rng.random_range(0.1..0.6);
            for k in 7..12 {
                a[k] = rng.random_range(-0.2..0.2);
            }
            let mut nu_dot = Vector6::zeros();
            for k in 0..6 {
                nu_dot[k] = rng.random_range(-0.5..0.5);
            }
            Observation {
                t: i as f64 * 0.01,
                state: VehicleState::from_array(&a),
                act: ActuatorState::from_recorded(0.2, 0.01, 0.05, 0.1),
                nu_dot,
            }
        })
        .collect()
}

fn bench_objective_build(c: &mut Criterion) {
    let (params, _) = default_params();
    let mut group = c.benchmark_group("objective_build");
    for &n in &[2_048usize, 32_768] {
        let obs = observations(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("default", n), &obs, |b, obs| {
            b.iter(|| QuadraticObjective::build(obs, &params).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &obs, |b, obs| {
            b.iter(|| QuadraticObjective::build_sequential(obs, &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_objective_build);
criterion_main!(benches);
