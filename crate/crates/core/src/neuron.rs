// SPDX-License-Identifier: Apache-2.0

//! The two phase-estimation neurons.
//!
//! Both neurons use three registers, top to bottom: the activation output
//! register (`m` qubits), the phase-estimation register (`m` qubits) and the
//! data register.
//!
//! * **Basis neuron**: the sample is written bit by bit with X gates. Register
//!   qubit `j` (weight `2^s`, `s = m-1-j`) drives a `CRz` onto every sample
//!   bit with phase fraction `2^s · bitweight · w_j · 2^{fb} / 2^m`, so the
//!   inverse QFT leaves `round(2^fb · xᵀw) mod 2^m` in the register. The
//!   activation oracle then maps that code into the output register.
//! * **Amplitude neuron**: the data register holds
//!   `|φ> = (|+>|x> + |->|w>)/√2` and phase estimation runs on
//!   `G = (I - 2|φ><φ|)(Z ⊗ I)`, whose eigenphases `±2γ` satisfy
//!   `cos 2γ = -<w|x>`.
//!
//! Running a neuron only simulates the data and phase-estimation registers:
//! the activation oracle is a basis permutation, so the output distribution
//! is the push-forward of the register distribution through the table. The
//! `*_with_oracle` variants simulate the full circuit and are used to check
//! that shortcut.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::activations::Activation;
use crate::circuits::{fold_classical, inverse_qft_gates, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::fixedpoint::{FixedPointFormat, Rounding, SampleEncoding};
use crate::matrix::Matrix;
use crate::oracles::{assignment_gates, phase_qft_gates, tabulate_activation, BooleanTable};
use crate::statevec::{sample_distribution, to_bitstring, Distribution, StateVector};
use crate::Execution;

/// Probabilities below this are dropped from reported distributions.
const REPORT_THRESHOLD: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleConstruction {
    Assignment,
    #[default]
    PhaseQft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RunMode {
    #[default]
    Exact,
    Shots {
        shots: u64,
        seed: u64,
    },
}

/// Qubit ranges of a neuron circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeuronLayout {
    pub output: Option<Range<usize>>,
    pub register: Range<usize>,
    pub data: Range<usize>,
}

impl NeuronLayout {
    fn new(m: usize, data_qubits: usize, with_output: bool) -> Self {
        let off = if with_output { m } else { 0 };
        Self {
            output: with_output.then_some(0..m),
            register: off..off + m,
            data: off + m..off + m + data_qubits,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.data.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronOutput {
    /// Most probable register reading.
    pub register_value: u64,
    pub register_bits: String,
    pub decoded_pre_activation: f64,
    pub activation_code: u64,
    pub activation_value: f64,
    /// Register distribution keyed by bitstring (exact or empirical).
    pub distribution: BTreeMap<String, f64>,
    /// Output-register distribution keyed by bitstring.
    pub activation_distribution: BTreeMap<String, f64>,
    /// Set when the amplitude neuron's reading sits on `2^{m-1}`, i.e. an
    /// inner product of exactly 1.
    pub boundary: bool,
}

fn check_register_width(m: u32) -> Result<()> {
    if !(2..=12).contains(&m) {
        return Err(Error::Config(format!(
            "register width m = {m} outside 2..=12"
        )));
    }
    Ok(())
}

fn oracle_gates(
    table: &BooleanTable,
    construction: OracleConstruction,
    inputs: &[usize],
    outputs: &[usize],
) -> Result<Vec<Gate>> {
    match construction {
        OracleConstruction::Assignment => Ok(assignment_gates(table, inputs, outputs)),
        OracleConstruction::PhaseQft => phase_qft_gates(table, inputs, outputs),
    }
}

fn register_distribution(
    state: &StateVector,
    register: &[usize],
    mode: RunMode,
) -> Result<Distribution> {
    let exact = state.probabilities(register)?;
    match mode {
        RunMode::Exact => Ok(exact),
        RunMode::Shots { shots, seed } => {
            let h = sample_distribution(&exact, shots, seed, state.execution())?;
            let mut probs = vec![0.0; exact.probs().len()];
            for (bits, &c) in &h.counts {
                probs[crate::statevec::parse_bitstring(bits)? as usize] = c as f64 / shots as f64;
            }
            Ok(Distribution::from_probs(probs))
        }
    }
}

fn keyed(dist: &Distribution) -> BTreeMap<String, f64> {
    dist.to_map(REPORT_THRESHOLD)
}

fn push_forward(dist: &Distribution, table: &BooleanTable) -> Distribution {
    let mut probs = vec![0.0; 1 << table.m()];
    for (code, &p) in dist.probs().iter().enumerate() {
        probs[table.eval(code as u64) as usize] += p;
    }
    Distribution::from_probs(probs)
}

// ---------------------------------------------------------------------------
// Basis-encoded neuron

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisNeuronConfig {
    pub weights: Vec<f64>,
    /// Format of every sample feature; `p` is its bit width.
    pub sample_format: FixedPointFormat,
    /// Phase-estimation register width.
    pub m: u32,
    /// Fraction bits of the register reading.
    pub fb: u32,
    /// `m`-bit register code to output code.
    pub activation: BooleanTable,
    pub output_format: FixedPointFormat,
    #[serde(default)]
    pub oracle: OracleConstruction,
}

impl BasisNeuronConfig {
    pub fn new(
        weights: Vec<f64>,
        sample_format: FixedPointFormat,
        m: u32,
        fb: u32,
        activation: BooleanTable,
        output_format: FixedPointFormat,
    ) -> Result<Self> {
        check_register_width(m)?;
        FixedPointFormat::register(m, fb)?;
        if weights.is_empty() {
            return Err(Error::Config("weight vector is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Config(format!("non-finite weight {w}")));
        }
        if activation.n() != m as usize || activation.m() != output_format.total_bits() as usize {
            return Err(Error::Config(format!(
                "activation table is {}→{} bits, expected {}→{}",
                activation.n(),
                activation.m(),
                m,
                output_format.total_bits()
            )));
        }
        Ok(Self {
            weights,
            sample_format,
            m,
            fb,
            activation,
            output_format,
            oracle: OracleConstruction::default(),
        })
    }

    /// Config whose activation table maps the signed register format onto
    /// itself through `activation`.
    pub fn with_activation(
        weights: Vec<f64>,
        sample_format: FixedPointFormat,
        m: u32,
        fb: u32,
        activation: Activation,
    ) -> Result<Self> {
        let fmt = FixedPointFormat::register(m, fb)?;
        let table = tabulate_activation(|t| activation.eval(t), fmt, fmt)?;
        Self::new(weights, sample_format, m, fb, table, fmt)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> usize {
        self.sample_format.total_bits() as usize
    }

    pub fn register_format(&self) -> FixedPointFormat {
        FixedPointFormat::register(self.m, self.fb).expect("validated at construction")
    }

    /// `2^fb · xᵀw`, the value phase estimation writes into the register.
    pub fn scaled_inner_product(&self, sample: &SampleEncoding) -> f64 {
        let dot: f64 = sample
            .values()
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum();
        dot * (self.fb as f64).exp2()
    }

    fn check_sample(&self, sample: &SampleEncoding) -> Result<()> {
        if sample.format != self.sample_format {
            return Err(Error::Config(format!(
                "sample format {} does not match neuron format {}",
                sample.format, self.sample_format
            )));
        }
        if sample.n() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: sample.n(),
            });
        }
        let v = self.scaled_inner_product(sample);
        let half = (self.m as f64 - 1.0).exp2();
        // The register reads round(v); it must land in [-2^{m-1}, 2^{m-1}).
        if !(v >= -half - 0.5 && v < half - 0.5) {
            return Err(Error::RegisterOverflow {
                layer: 0,
                neuron: 0,
                value: v,
                min: -half,
                max: half,
            });
        }
        Ok(())
    }

    /// Phase fraction of the `CRz` between the register qubit of weight
    /// `2^s` and bit `k` of feature `j`.
    pub fn phase_fraction(&self, s: u32, j: usize, k: u32) -> f64 {
        let bit_weight = self.sample_format.bit_weight(k);
        (s as f64).exp2() * bit_weight * self.weights[j] * (self.fb as f64 - self.m as f64).exp2()
    }

    fn gates(&self, sample: &SampleEncoding, layout: &NeuronLayout) -> Result<Vec<Gate>> {
        self.check_sample(sample)?;
        let m = self.m as usize;
        let p = self.p();
        let data: Vec<usize> = layout.data.clone().collect();
        let register: Vec<usize> = layout.register.clone().collect();
        let mut gates = Vec::new();
        for (q, bit) in data.iter().zip(sample.bits()) {
            if bit {
                gates.push(Gate::x(*q));
            }
        }
        gates.extend(register.iter().map(|&q| Gate::h(q)));
        for (jr, &ctrl) in register.iter().enumerate() {
            let s = (m - 1 - jr) as u32;
            for j in 0..self.n() {
                for k in 0..p {
                    let alpha = self.phase_fraction(s, j, k as u32);
                    gates.push(Gate::crz(alpha, ctrl, data[j * p + k]));
                }
            }
        }
        gates.extend(inverse_qft_gates(&register));
        if let Some(out) = &layout.output {
            let outputs: Vec<usize> = out.clone().collect();
            gates.extend(oracle_gates(
                &self.activation,
                self.oracle,
                &register,
                &outputs,
            )?);
        }
        Ok(gates)
    }

    pub fn layout(&self, with_output: bool) -> NeuronLayout {
        NeuronLayout::new(self.m as usize, self.n() * self.p(), with_output)
    }
}

/// Full basis-neuron circuit: output register, phase register, sample bits.
pub fn build_basis_neuron_circuit(
    cfg: &BasisNeuronConfig,
    sample: &SampleEncoding,
) -> Result<Circuit> {
    let layout = cfg.layout(true);
    let mut c = Circuit::new(layout.num_qubits());
    c.extend(cfg.gates(sample, &layout)?)?;
    Ok(c)
}

fn simulate_basis(
    cfg: &BasisNeuronConfig,
    sample: &SampleEncoding,
    with_oracle: bool,
) -> Result<(StateVector, NeuronLayout, Vec<usize>)> {
    let layout = cfg.layout(with_oracle);
    let mut c = Circuit::new(layout.num_qubits());
    c.extend(cfg.gates(sample, &layout)?)?;
    // Sample qubits never leave the computational basis.
    let classical: Vec<(usize, bool)> = layout.data.clone().map(|q| (q, false)).collect();
    let folded = fold_classical(&c, &classical)?;
    let mut state = folded.circuit.fuse_rotations().run()?;
    state.apply_global_phase(folded.global_phase);
    Ok((state, layout, folded.kept))
}

fn finish_basis(
    cfg: &BasisNeuronConfig,
    reg: Distribution,
    activation: Distribution,
) -> NeuronOutput {
    let register_value = reg.argmax();
    let activation_code = cfg.activation.eval(register_value);
    NeuronOutput {
        register_value,
        register_bits: to_bitstring(register_value, cfg.m as usize),
        decoded_pre_activation: cfg.register_format().decode(register_value),
        activation_code,
        activation_value: cfg.output_format.decode(activation_code),
        distribution: keyed(&reg),
        activation_distribution: keyed(&activation),
        boundary: false,
    }
}

/// Runs the basis neuron on `sample`.
pub fn run_basis_neuron(
    cfg: &BasisNeuronConfig,
    sample: &SampleEncoding,
    mode: RunMode,
) -> Result<NeuronOutput> {
    let (state, _, _) = simulate_basis(cfg, sample, false)?;
    let m = cfg.m as usize;
    let register: Vec<usize> = (0..m).collect();
    let reg = register_distribution(&state, &register, mode)?;
    let act = push_forward(&reg, &cfg.activation);
    Ok(finish_basis(cfg, reg, act))
}

/// Most probable register code of the basis neuron in exact mode, without
/// building the reported distributions.
pub fn basis_register_mode(cfg: &BasisNeuronConfig, sample: &SampleEncoding) -> Result<u64> {
    let (state, _, _) = simulate_basis(cfg, sample, false)?;
    Ok(state.full_probabilities().argmax())
}

/// Same as [`run_basis_neuron`] but simulates the activation oracle too.
pub fn run_basis_neuron_with_oracle(
    cfg: &BasisNeuronConfig,
    sample: &SampleEncoding,
    mode: RunMode,
) -> Result<NeuronOutput> {
    let (state, _, _) = simulate_basis(cfg, sample, true)?;
    let m = cfg.m as usize;
    let output: Vec<usize> = (0..m).collect();
    let register: Vec<usize> = (m..2 * m).collect();
    let reg = register_distribution(&state, &register, RunMode::Exact)?;
    let act = state.probabilities(&output)?;
    let (reg, act) = match mode {
        RunMode::Exact => (reg, act),
        RunMode::Shots { .. } => {
            // Sample the joint (register, output) readout.
            let joint: Vec<usize> = register.iter().chain(&output).copied().collect();
            let d = register_distribution(&state, &joint, mode)?;
            let mut r = vec![0.0; 1 << m];
            let mut a = vec![0.0; 1 << output.len()];
            for (i, &p) in d.probs().iter().enumerate() {
                r[i >> output.len()] += p;
                a[i & ((1 << output.len()) - 1)] += p;
            }
            (Distribution::from_probs(r), Distribution::from_probs(a))
        }
    };
    Ok(finish_basis(cfg, reg, act))
}

// ---------------------------------------------------------------------------
// Amplitude-encoded neuron

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "feature count {n} is not a power of two"
        )));
    }
    Ok(n.trailing_zeros() as usize)
}

/// `|φ> = (|+>|x> + |->|w>)/√2` on `1 + log₂n` qubits, with `x` and `w`
/// normalised first.
pub fn prepare_phi(x: &[f64], w: &[f64]) -> Result<StateVector> {
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            found: x.len(),
        });
    }
    let k = log2_exact(x.len())?;
    let (x, w) = (unit(x)?, unit(w)?);
    let n = x.len();
    // |0>(x + w)/2 + |1>(x - w)/2
    let mut amps = Vec::with_capacity(2 * n);
    amps.extend(
        x.iter()
            .zip(&w)
            .map(|(a, b)| Complex64::new((a + b) / 2.0, 0.0)),
    );
    amps.extend(
        x.iter()
            .zip(&w)
            .map(|(a, b)| Complex64::new((a - b) / 2.0, 0.0)),
    );
    let mut s = StateVector::new_zero(k + 1)?;
    s.init_amplitudes(&amps)?;
    Ok(s)
}

/// `G = (I - 2|φ><φ|)(Z ⊗ I)`.
pub fn build_g(phi: &StateVector) -> Result<Matrix> {
    let amps = phi.amplitudes();
    let dim = amps.len();
    if (phi.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::Config("|φ> is not normalised".into()));
    }
    let reflect =
        Matrix::identity(dim).sub(&Matrix::outer(amps, amps).scale(Complex64::new(2.0, 0.0)));
    let z: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(if i < dim / 2 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    Ok(&reflect * &Matrix::diagonal(&z))
}

/// Householder reflection sending `|0>` to the real state `target`.
fn preparation_unitary(target: &StateVector) -> Matrix {
    let amps = target.amplitudes();
    let dim = amps.len();
    let mut v: Vec<Complex64> = amps.iter().map(|a| -a).collect();
    v[0] += Complex64::new(1.0, 0.0);
    let nv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    if nv < 1e-24 {
        return Matrix::identity(dim);
    }
    Matrix::identity(dim).sub(&Matrix::outer(&v, &v).scale(Complex64::new(2.0 / nv, 0.0)))
}

/// Table from a register reading `u` to `g(-cos(u·π/2^{m-1}))` in `out_fmt`.
///
/// The map is symmetric under `u -> 2^m - u`, so both phase-estimation
/// branches land on the same output code.
pub fn compose_activation_for_amplitude(
    g: impl Fn(f64) -> f64,
    m: u32,
    out_fmt: FixedPointFormat,
) -> Result<BooleanTable> {
    if m < 2 {
        return Err(Error::Config("amplitude neuron needs m >= 2".into()));
    }
    let half = (m as f64 - 1.0).exp2();
    BooleanTable::from_fn(m as usize, out_fmt.total_bits() as usize, |u| {
        out_fmt.quantize_saturating(
            g(decode_amplitude_register(u, m, half)),
            Rounding::NearestEven,
        )
    })
}

fn decode_amplitude_register(u: u64, _m: u32, half: f64) -> f64 {
    -(u as f64 * PI / half).cos()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeNeuronConfig {
    pub weights: Vec<f64>,
    pub m: u32,
    pub activation: BooleanTable,
    pub output_format: FixedPointFormat,
    #[serde(default)]
    pub oracle: OracleConstruction,
}

impl AmplitudeNeuronConfig {
    pub fn new(
        weights: Vec<f64>,
        m: u32,
        activation: BooleanTable,
        output_format: FixedPointFormat,
    ) -> Result<Self> {
        check_register_width(m)?;
        log2_exact(weights.len())?;
        unit(&weights)?;
        if activation.n() != m as usize || activation.m() != output_format.total_bits() as usize {
            return Err(Error::Config(
                "activation table shape does not match m".into(),
            ));
        }
        Ok(Self {
            weights,
            m,
            activation,
            output_format,
            oracle: OracleConstruction::default(),
        })
    }

    pub fn with_activation(
        weights: Vec<f64>,
        m: u32,
        activation: Activation,
        output_format: FixedPointFormat,
    ) -> Result<Self> {
        let table = compose_activation_for_amplitude(|t| activation.eval(t), m, output_format)?;
        Self::new(weights, m, table, output_format)
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn data_qubits(&self) -> usize {
        1 + self.n().trailing_zeros() as usize
    }

    pub fn layout(&self, with_output: bool) -> NeuronLayout {
        NeuronLayout::new(self.m as usize, self.data_qubits(), with_output)
    }

    fn gates(&self, sample: &[f64], layout: &NeuronLayout) -> Result<Vec<Gate>> {
        if sample.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: sample.len(),
            });
        }
        let phi = prepare_phi(sample, &self.weights)?;
        let g = build_g(&phi)?;
        let m = self.m as usize;
        let data: Vec<usize> = layout.data.clone().collect();
        let register: Vec<usize> = layout.register.clone().collect();
        let mut gates = vec![Gate {
            kind: GateKind::Unitary(preparation_unitary(&phi)),
            targets: data.clone(),
            controls: vec![],
        }];
        gates.extend(register.iter().map(|&q| Gate::h(q)));
        let mut power = g;
        for jr in (0..m).rev() {
            // Register qubit jr carries weight 2^{m-1-jr}.
            gates.push(Gate {
                kind: GateKind::Unitary(power.clone()),
                targets: data.clone(),
                controls: vec![register[jr]],
            });
            power = &power * &power;
        }
        gates.extend(inverse_qft_gates(&register));
        if let Some(out) = &layout.output {
            let outputs: Vec<usize> = out.clone().collect();
            gates.extend(oracle_gates(
                &self.activation,
                self.oracle,
                &register,
                &outputs,
            )?);
        }
        Ok(gates)
    }
}

pub fn build_amplitude_neuron_circuit(
    cfg: &AmplitudeNeuronConfig,
    sample: &[f64],
) -> Result<Circuit> {
    let layout = cfg.layout(true);
    let mut c = Circuit::new(layout.num_qubits());
    c.extend(cfg.gates(sample, &layout)?)?;
    Ok(c)
}

/// Folds readings `u > 2^{m-1}` onto `2^m - u`.
pub fn fold_amplitude_reading(u: u64, m: u32) -> u64 {
    let full = 1u64 << m;
    if u > full / 2 {
        full - u
    } else {
        u
    }
}

fn finish_amplitude(
    cfg: &AmplitudeNeuronConfig,
    reg: Distribution,
    act: Distribution,
) -> NeuronOutput {
    let half_int = 1u64 << (cfg.m - 1);
    let mut folded = vec![0.0; half_int as usize + 1];
    for (u, &p) in reg.probs().iter().enumerate() {
        folded[fold_amplitude_reading(u as u64, cfg.m) as usize] += p;
    }
    let u = Distribution::from_probs({
        let mut padded = folded.clone();
        padded.resize((half_int as usize + 1).next_power_of_two(), 0.0);
        padded
    })
    .argmax();
    let activation_code = cfg.activation.eval(u);
    NeuronOutput {
        register_value: u,
        register_bits: to_bitstring(u, cfg.m as usize),
        decoded_pre_activation: decode_amplitude_register(u, cfg.m, half_int as f64),
        activation_code,
        activation_value: cfg.output_format.decode(activation_code),
        distribution: keyed(&reg),
        activation_distribution: keyed(&act),
        boundary: u == half_int,
    }
}

fn simulate_amplitude(
    cfg: &AmplitudeNeuronConfig,
    sample: &[f64],
    with_oracle: bool,
) -> Result<StateVector> {
    let layout = cfg.layout(with_oracle);
    let mut c = Circuit::new(layout.num_qubits());
    c.extend(cfg.gates(sample, &layout)?)?;
    c.run()
}

/// Runs the amplitude neuron on `sample`.
pub fn run_amplitude_neuron(
    cfg: &AmplitudeNeuronConfig,
    sample: &[f64],
    mode: RunMode,
) -> Result<NeuronOutput> {
    let state = simulate_amplitude(cfg, sample, false)?;
    let register: Vec<usize> = (0..cfg.m as usize).collect();
    let reg = register_distribution(&state, &register, mode)?;
    let act = push_forward(&reg, &cfg.activation);
    Ok(finish_amplitude(cfg, reg, act))
}

/// Same as [`run_amplitude_neuron`] but simulates the activation oracle too.
pub fn run_amplitude_neuron_with_oracle(
    cfg: &AmplitudeNeuronConfig,
    sample: &[f64],
) -> Result<NeuronOutput> {
    let state = simulate_amplitude(cfg, sample, true)?;
    let m = cfg.m as usize;
    let output: Vec<usize> = (0..m).collect();
    let register: Vec<usize> = (m..2 * m).collect();
    let reg = state.probabilities(&register)?;
    let act = state.probabilities(&output)?;
    Ok(finish_amplitude(cfg, reg, act))
}

/// Runs many samples through the basis neuron.
pub fn run_basis_batch(
    cfg: &BasisNeuronConfig,
    samples: &[SampleEncoding],
    exec: Execution,
) -> Vec<Result<NeuronOutput>> {
    crate::exec::map_slice(exec, samples, |s| run_basis_neuron(cfg, s, RunMode::Exact))
}
