// SPDX-License-Identifier: Apache-2.0

//! Sequential against rayon-backed execution for the data-parallel loops.
//! Build with `--no-default-features` to see the fallback on both arms.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qneuron::activations::Activation;
use qneuron::circuits::{Circuit, Gate};
use qneuron::fixedpoint::{encode_features, FixedPointFormat, Rounding};
use qneuron::neuron::{run_basis_batch, BasisNeuronConfig};
use qneuron::noise::{run_noisy, with_input, NoiseModel, OracleInput};
use qneuron::oracles::{build_phase_qft_circuit, BooleanTable};
use qneuron::statevec::{sample_distribution, StateVector};
use qneuron::Execution;

const POLICIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_distribution");
    let mut s = StateVector::new_zero(12).unwrap();
    let layer: Vec<Gate> = (0..12).map(Gate::h).collect();
    let mut circ = Circuit::new(12);
    circ.extend(layer).unwrap();
    circ.apply(&mut s).unwrap();
    let dist = s.full_probabilities();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 100_000), &exec, |b, &exec| {
            b.iter(|| sample_distribution(black_box(&dist), 100_000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn noisy_trajectories(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_noisy");
    g.sample_size(20);
    let truth = BooleanTable::new(2, 2, vec![0, 1, 0, 0]).unwrap();
    let circ = with_input(
        &build_phase_qft_circuit(&truth).unwrap(),
        2,
        &OracleInput::Uniform,
    )
    .unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, 8192), &exec, |b, &exec| {
            b.iter(|| {
                run_noisy(black_box(&circ), &NoiseModel::HARDWARE_LIKE, 8192, 1, exec).unwrap()
            })
        });
    }
    g.finish();
}

fn gate_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("hadamard_layer");
    g.sample_size(10);
    let n = 20;
    let mut circ = Circuit::new(n);
    circ.extend((0..n).map(Gate::h)).unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
            b.iter(|| {
                let mut s = StateVector::new_zero(n).unwrap().with_execution(exec);
                circ.apply(&mut s).unwrap();
                s
            })
        });
    }
    g.finish();
}

fn neuron_batch(c: &mut Criterion) {
    let mut g = c.benchmark_group("basis_neuron_batch");
    g.sample_size(20);
    let fmt = FixedPointFormat::unsigned(0, 4).unwrap();
    let cfg = BasisNeuronConfig::with_activation(vec![0.75, -1.25], fmt, 8, 4, Activation::Sigmoid)
        .unwrap();
    let samples: Vec<_> = (0..64)
        .map(|i| {
            let x = [(i % 16) as f64 / 16.0, (i / 4) as f64 / 16.0];
            encode_features(&x, fmt, Rounding::NearestEven).unwrap()
        })
        .collect();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, samples.len()), &exec, |b, &exec| {
            b.iter(|| run_basis_batch(&cfg, black_box(&samples), exec))
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    sampling,
    noisy_trajectories,
    gate_kernels,
    neuron_batch
);
criterion_main!(benches);
