// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qneuron::activations::{Activation, ActivationSpec};
use qneuron::circuits::{count_resources, Circuit, DecompositionRule};
use qneuron::cli::{closed_form_qubits, neuron_resources, NeuronConfig};
use qneuron::fixedpoint::{encode_features, FixedPointFormat, Rounding};
use qneuron::neuron::{
    run_amplitude_neuron, run_basis_neuron, run_basis_neuron_with_oracle, AmplitudeNeuronConfig,
    BasisNeuronConfig, RunMode,
};
use qneuron::noise::{accuracy, run_noisy, with_input, NoiseModel, OracleInput};
use qneuron::oracles::{
    apply_standard_oracle, build_assignment_circuit, build_phase_qft_circuit, BooleanTable,
};
use qneuron::qnn::{self, Dataset, ForwardMode, QFNNConfig, TrainConfig};
use qneuron::statevec::to_bitstring;
use qneuron::{Execution, DEFAULT_SHOTS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("runtime {:.1}s exceeds {limit_s}s", elapsed.as_secs_f64())
    })
}

fn relu_table() -> BooleanTable {
    BooleanTable::new(2, 2, vec![0, 1, 0, 0]).unwrap()
}

fn oracle(table: &BooleanTable, assignment: bool) -> Circuit {
    if assignment {
        build_assignment_circuit(table).unwrap()
    } else {
        build_phase_qft_circuit(table).unwrap()
    }
}

// 1 ---------------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let (n, m) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let f = BooleanTable::random(n, m, &mut rng).map_err(|e| e.to_string())?;
        let inputs: Vec<usize> = (0..n).collect();
        let outputs: Vec<usize> = (n..n + m).collect();
        let mut preps: Vec<Circuit> = (0..1u64 << n)
            .map(|x| {
                let bits = to_bitstring(x, n);
                with_input(&Circuit::new(n + m), n, &OracleInput::Basis(bits)).unwrap()
            })
            .collect();
        preps.push(with_input(&Circuit::new(n + m), n, &OracleInput::Uniform).unwrap());
        for prep in &preps {
            let mut reference = prep.run().map_err(|e| e.to_string())?;
            apply_standard_oracle(&mut reference, &f, &inputs, &outputs)
                .map_err(|e| e.to_string())?;
            let want = reference.full_probabilities();
            for assignment in [true, false] {
                let mut s = prep.run().unwrap();
                oracle(&f, assignment)
                    .apply(&mut s)
                    .map_err(|e| e.to_string())?;
                let got = s.full_probabilities();
                let d = got
                    .probs()
                    .iter()
                    .zip(want.probs())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(d);
                check(d <= 1e-9, || {
                    format!("table {case} (n={n}, m={m}): deviation {d:.2e}")
                })?;
            }
        }
    }
    within(start.elapsed(), 30)?;
    Ok(format!("100 tables, max deviation {worst:.1e}"))
}

// 2 ---------------------------------------------------------------------------

fn relu_demo_noiseless() -> Outcome {
    let start = Instant::now();
    let truth = relu_table();
    let mut accs = Vec::new();
    for assignment in [true, false] {
        let c = with_input(&oracle(&truth, assignment), 2, &OracleInput::Uniform).unwrap();
        let h = run_noisy(
            &c,
            &NoiseModel::ideal(),
            DEFAULT_SHOTS,
            0,
            Execution::default(),
        )
        .map_err(|e| e.to_string())?;
        let acc = accuracy(&h, &truth, &OracleInput::Uniform).map_err(|e| e.to_string())?;
        check(acc == 1.0, || format!("accuracy {acc}"))?;
        accs.push(acc);
    }
    within(start.elapsed(), 5)?;
    Ok(format!("assignment {}, phase-qft {}", accs[0], accs[1]))
}

// 3 ---------------------------------------------------------------------------

fn hardware_band() -> Outcome {
    let start = Instant::now();
    let truth = relu_table();
    let model = NoiseModel::HARDWARE_LIKE;
    let mut summary = Vec::new();
    for (assignment, label) in [(true, "assignment"), (false, "phase-qft")] {
        let c = with_input(&oracle(&truth, assignment), 2, &OracleInput::Uniform).unwrap();
        let mut accs = Vec::new();
        for seed in 0..10 {
            let h = run_noisy(&c, &model, DEFAULT_SHOTS, seed, Execution::default())
                .map_err(|e| e.to_string())?;
            let acc = accuracy(&h, &truth, &OracleInput::Uniform).map_err(|e| e.to_string())?;
            check((0.55..=0.85).contains(&acc), || {
                format!("{label} seed {seed}: {acc}")
            })?;
            accs.push(acc);
        }
        let lo = accs.iter().copied().fold(1.0, f64::min);
        let hi = accs.iter().copied().fold(0.0, f64::max);
        summary.push(format!("{label} {lo:.3}..{hi:.3}"));
    }
    within(start.elapsed(), 60)?;
    Ok(summary.join(", "))
}

// 4 ---------------------------------------------------------------------------

fn basis_exactness() -> Outcome {
    let fmt = FixedPointFormat::unsigned(1, 0).unwrap();
    let x = encode_features(&[1.0], fmt, Rounding::NearestEven).unwrap();
    for w in [-2i64, -1, 0, 1] {
        let cfg = BasisNeuronConfig::with_activation(vec![w as f64], fmt, 2, 0, Activation::Relu)
            .map_err(|e| e.to_string())?;
        let out =
            run_basis_neuron_with_oracle(&cfg, &x, RunMode::Exact).map_err(|e| e.to_string())?;
        let reg = to_bitstring(w.rem_euclid(4) as u64, 2);
        let act = to_bitstring(w.max(0) as u64, 2);
        let p_reg = out.distribution.get(&reg).copied().unwrap_or(0.0);
        let p_act = out
            .activation_distribution
            .get(&act)
            .copied()
            .unwrap_or(0.0);
        check(p_reg >= 1.0 - 1e-9, || {
            format!("w={w}: P(register={reg}) = {p_reg}")
        })?;
        check(p_act >= 1.0 - 1e-9, || {
            format!("w={w}: P(output={act}) = {p_act}")
        })?;
    }
    Ok("w in {-2,-1,0,1}: register w mod 4, output max(w,0)".into())
}

// 5 ---------------------------------------------------------------------------

fn qpe_concentration() -> Outcome {
    let bound = 8.0 / (PI * PI);
    let fmt = FixedPointFormat::unsigned(0, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 1.0f64;
    let mut cases = 0;
    while cases < 50 {
        let n = rng.random_range(1..=3);
        let xs: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..16) as f64 / 16.0)
            .collect();
        let ws: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = encode_features(&xs, fmt, Rounding::NearestEven).unwrap();
        let cfg = BasisNeuronConfig::with_activation(ws, fmt, 8, 4, Activation::Sigmoid)
            .map_err(|e| e.to_string())?;
        let v = cfg.scaled_inner_product(&x);
        if (v - v.round()).abs() < 1e-3 {
            continue;
        }
        cases += 1;
        let out = run_basis_neuron(&cfg, &x, RunMode::Exact).map_err(|e| e.to_string())?;
        let lo = v.floor().rem_euclid(256.0) as u64;
        let hi = (lo + 1) % 256;
        let p = |u: u64| {
            out.distribution
                .get(&to_bitstring(u, 8))
                .copied()
                .unwrap_or(0.0)
        };
        let mass = p(lo) + p(hi);
        worst = worst.min(mass);
        // Half-integer phases meet the bound with equality; allow rounding.
        check(mass >= bound - 1e-12, || {
            format!("v = {v}: adjacent mass {mass:.4} < {bound:.4}")
        })?;
    }
    Ok(format!(
        "50 cases, min adjacent mass {worst:.6} (bound {bound:.6})"
    ))
}

// 6 ---------------------------------------------------------------------------

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.iter().map(|a| a / norm).collect();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit vector with `<w|x> = c`, built from `w` and a direction orthogonal to it.
fn at_inner_product(w: &[f64], c: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let r = random_unit(w.len(), rng);
    let along = dot(&r, w);
    let perp: Vec<f64> = r.iter().zip(w).map(|(a, b)| a - along * b).collect();
    let norm = perp.iter().map(|a| a * a).sum::<f64>().sqrt();
    let s = (1.0 - c * c).max(0.0).sqrt();
    w.iter()
        .zip(&perp)
        .map(|(a, p)| c * a + s * p / norm)
        .collect()
}

fn amplitude_decoding() -> Outcome {
    let m = 8;
    let out_fmt: FixedPointFormat = "1:3:4".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for n in [2usize, 4, 8] {
        for case in 0..50 {
            let w = random_unit(n, &mut rng);
            // Every fifth pair sits exactly on a register step.
            let exact = case % 5 == 0;
            let x = if exact {
                let k = rng.random_range(0..=128) as f64;
                at_inner_product(&w, -(k * PI / 128.0).cos(), &mut rng)
            } else {
                random_unit(n, &mut rng)
            };
            let cfg =
                AmplitudeNeuronConfig::with_activation(w.clone(), m, Activation::Sigmoid, out_fmt)
                    .map_err(|e| e.to_string())?;
            let out = run_amplitude_neuron(&cfg, &x, RunMode::Exact).map_err(|e| e.to_string())?;
            let err = (out.decoded_pre_activation - dot(&w, &x)).abs();
            worst = worst.max(err);
            let tol = if exact { 1e-9 } else { 0.025 };
            check(err <= tol, || {
                format!("n={n} case {case}: error {err:.3e} > {tol}")
            })?;
        }
    }
    Ok(format!("150 pairs, max error {worst:.4}"))
}

// 7 ---------------------------------------------------------------------------

fn activation_curves() -> Outcome {
    let fmt: FixedPointFormat = "1:3:4".parse().unwrap();
    let mut worst = 0.0f64;
    for a in Activation::ALL {
        let rows = ActivationSpec::new(a, fmt)
            .curve()
            .map_err(|e| e.to_string())?;
        check(rows.len() == 256, || format!("{a}: {} rows", rows.len()))?;
        for r in &rows {
            let err = (r.quantized - r.exact).abs();
            worst = worst.max(err);
            check(err <= 1.0 / 32.0, || {
                format!("{a} at {}: error {err}", r.input)
            })?;
        }
        if a.is_monotone() {
            check(
                rows.windows(2).all(|p| p[1].quantized >= p[0].quantized),
                || format!("{a}: quantized curve not monotone"),
            )?;
        }
    }
    Ok(format!("4 activations, max error {worst:.4} <= 0.03125"))
}

// 8 ---------------------------------------------------------------------------

/// Final loss of the pinned default run.
const GOLDEN_PLATEAU: f64 = 0.1270;

fn xor_training() -> Outcome {
    let start = Instant::now();
    let net = QFNNConfig::xor_default();
    let data = Dataset::xor();
    let cfg = TrainConfig::default();
    let report = qnn::train(&net, &data, &cfg, Execution::default()).map_err(|e| e.to_string())?;
    check(report.final_loss <= 0.2, || {
        format!("final loss {}", report.final_loss)
    })?;
    let tail = &report.curve[TrainConfig::DEFAULT_BURN_IN..];
    if let Some(i) = tail.windows(2).position(|p| p[1] > p[0]) {
        return Err(format!(
            "loss rises at epoch {}",
            TrainConfig::DEFAULT_BURN_IN + i + 1
        ));
    }
    check((report.final_loss - GOLDEN_PLATEAU).abs() < 5e-4, || {
        format!(
            "plateau {} drifted from golden {GOLDEN_PLATEAU}",
            report.final_loss
        )
    })?;
    check((report.final_loss - 0.126).abs() <= 0.05, || {
        format!("plateau {} outside 0.126 ± 0.05", report.final_loss)
    })?;

    let mut worst = 0.0f64;
    for seed in 0..20 {
        let mut probe = net.clone();
        probe.init_uniform(3.0, 100 + seed);
        let analytic =
            qnn::gradient(&probe, &data, Execution::default()).map_err(|e| e.to_string())?;
        let base = probe.flat_weights();
        let h = 1e-5;
        for (i, a) in analytic.iter().enumerate() {
            let mut at = |delta: f64| {
                let mut w = base.clone();
                w[i] += delta;
                probe.set_flat_weights(&w);
                qnn::loss(&probe, &data, ForwardMode::Surrogate, Execution::Sequential).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let rel = (a - fd).abs() / fd.abs().max(a.abs()).max(1e-4);
            worst = worst.max(rel);
            check(rel <= 1e-4, || {
                format!("seed {seed} weight {i}: analytic {a}, numeric {fd}")
            })?;
        }
        probe.set_flat_weights(&base);
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "final loss {:.4} after {} epochs, gradient rel. error {worst:.1e}",
        report.final_loss, cfg.epochs
    ))
}

// 9 ---------------------------------------------------------------------------

/// Coefficient of determination of the least-squares line through `(x, y)`.
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn resource_counts() -> Outcome {
    let rule = DecompositionRule::NoAncilla;
    let sample_fmt = FixedPointFormat::unsigned(0, 4).unwrap();
    for n in [1usize, 2, 4] {
        for m in [4u32, 6, 8] {
            let basis = BasisNeuronConfig::with_activation(
                vec![0.25; n],
                sample_fmt,
                m,
                2,
                Activation::Relu,
            )
            .map_err(|e| e.to_string())?;
            let cfg = NeuronConfig::Basis(basis);
            let (_, report) = neuron_resources(&cfg, None, rule).map_err(|e| e.to_string())?;
            let want = 4 * n + 2 * m as usize;
            check(
                report.qubit_count == want && closed_form_qubits(&cfg) == want,
                || {
                    format!(
                        "basis n={n} m={m}: {} qubits, expected {want}",
                        report.qubit_count
                    )
                },
            )?;
        }
    }
    let fmt: FixedPointFormat = "1:3:4".parse().unwrap();
    for n in [2usize, 4, 8] {
        for m in [4u32, 6, 8] {
            let amp =
                AmplitudeNeuronConfig::with_activation(vec![1.0; n], m, Activation::Tanh, fmt)
                    .map_err(|e| e.to_string())?;
            let cfg = NeuronConfig::Amplitude(amp);
            let (_, report) = neuron_resources(&cfg, None, rule).map_err(|e| e.to_string())?;
            let want = n.trailing_zeros() as usize + 2 * m as usize + 1;
            check(
                report.qubit_count == want && closed_form_qubits(&cfg) == want,
                || {
                    format!(
                        "amplitude n={n} m={m}: {} qubits, expected {want}",
                        report.qubit_count
                    )
                },
            )?;
        }
    }

    // Gate count against pn at fixed m.
    let (mut pn, mut gates) = (Vec::new(), Vec::new());
    for n in 1..=6usize {
        let basis =
            BasisNeuronConfig::with_activation(vec![0.25; n], sample_fmt, 6, 2, Activation::Relu)
                .map_err(|e| e.to_string())?;
        let (_, report) =
            neuron_resources(&NeuronConfig::Basis(basis), None, rule).map_err(|e| e.to_string())?;
        pn.push((4 * n) as f64);
        gates.push(report.total_gates as f64);
    }
    let r2_pn = r_squared(&pn, &gates);
    check(r2_pn > 0.999, || format!("gates vs pn: R² = {r2_pn}"))?;

    // Controlled rotations of the phase/QFT activation block against m·2^m.
    let (mut scale, mut rotations) = (Vec::new(), Vec::new());
    for m in 2..=8u32 {
        let fmt = FixedPointFormat::register(m, 0).unwrap();
        let table = ActivationSpec::new(Activation::Relu, fmt)
            .table()
            .map_err(|e| e.to_string())?;
        let block = build_phase_qft_circuit(&table).map_err(|e| e.to_string())?;
        scale.push(m as f64 * (m as f64).exp2());
        rotations.push(count_resources(&block, rule).controlled_rotations as f64);
    }
    let r2_m = r_squared(&scale, &rotations);
    check(r2_m > 0.999, || {
        format!("oracle rotations vs m·2^m: R² = {r2_m}")
    })?;
    Ok(format!(
        "18 qubit counts exact, R² {r2_pn:.6} (pn), {r2_m:.6} (m·2^m)"
    ))
}

fn main() {
    // libtest flags such as `--nocapture` are accepted and ignored.
    let criteria: [Criterion; 9] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 ReLU demo, noiseless", relu_demo_noiseless),
        ("3 hardware-gap band", hardware_band),
        ("4 basis-neuron exactness", basis_exactness),
        ("5 QPE concentration", qpe_concentration),
        ("6 amplitude decoding", amplitude_decoding),
        ("7 activation curves", activation_curves),
        ("8 XOR training", xor_training),
        ("9 resource counts", resource_counts),
    ];
    if std::env::args().any(|a| a == "--list") {
        for (name, _) in &criteria {
            println!("{name}: test");
        }
        return;
    }
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} ({secs:.2}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
