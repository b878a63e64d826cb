// SPDX-License-Identifier: Apache-2.0

//! Shot-by-shot noisy execution.
//!
//! Each shot is one trajectory. After every gate, each touched qubit
//! independently receives a uniformly random X, Y or Z with probability `p1`
//! (single-qubit gates) or `p2` (gates touching two or more qubits). The
//! measured bits are then flipped with probability `r01` (0 read as 1) or
//! `r10` (1 read as 0).
//!
//! Shot `k` draws from its own ChaCha stream `(seed, k)`, so a histogram does
//! not depend on the execution policy.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::exec::map_indices;
use crate::oracles::BooleanTable;
use crate::statevec::{
    parse_bitstring, to_bitstring, Distribution, MeasurementHistogram, StateVector,
};
use crate::Execution;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub r01: f64,
    pub r10: f64,
}

impl NoiseModel {
    /// Parameters used for the hardware-gap comparison.
    pub const HARDWARE_LIKE: NoiseModel = NoiseModel {
        p1: 0.01,
        p2: 0.03,
        r01: 0.05,
        r10: 0.07,
    };

    pub fn new(p1: f64, p2: f64, r01: f64, r10: f64) -> Result<Self> {
        let m = Self { p1, p2, r01, r10 };
        m.validate()?;
        Ok(m)
    }

    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("r01", self.r01),
            ("r10", self.r10),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Probability { name, value });
            }
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.r01 == 0.0 && self.r10 == 0.0
    }

    pub fn gate_error(&self, gate: &Gate) -> f64 {
        if gate.arity() == 1 {
            self.p1
        } else {
            self.p2
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json_str(&text)
    }
}

/// One Pauli insertion: after gate `gate`, apply `pauli` (1 = X, 2 = Y, 3 = Z)
/// to `qubit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PauliEvent {
    gate: usize,
    qubit: usize,
    pauli: u8,
}

fn draw_events(circuit: &Circuit, model: &NoiseModel, rng: &mut ChaCha8Rng) -> Vec<PauliEvent> {
    let mut events = Vec::new();
    if model.p1 == 0.0 && model.p2 == 0.0 {
        return events;
    }
    for (i, g) in circuit.gates().iter().enumerate() {
        let p = model.gate_error(g);
        if p == 0.0 {
            continue;
        }
        for q in g.qubits() {
            if rng.random::<f64>() < p {
                events.push(PauliEvent {
                    gate: i,
                    qubit: q,
                    pauli: rng.random_range(1..=3),
                });
            }
        }
    }
    events
}

fn pauli_gate(e: &PauliEvent) -> Gate {
    match e.pauli {
        1 => Gate::x(e.qubit),
        2 => Gate::y(e.qubit),
        _ => Gate::z(e.qubit),
    }
}

fn trajectory(init: &StateVector, circuit: &Circuit, events: &[PauliEvent]) -> StateVector {
    let mut state = init.clone();
    let mut next = events.iter().peekable();
    for (i, g) in circuit.gates().iter().enumerate() {
        g.apply(&mut state);
        while let Some(e) = next.next_if(|e| e.gate == i) {
            pauli_gate(e).apply(&mut state);
        }
    }
    state
}

fn draw_index(dist: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left u above the cumulative total: take the last nonzero entry.
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn readout(value: usize, width: usize, model: &NoiseModel, rng: &mut ChaCha8Rng) -> usize {
    if model.r01 == 0.0 && model.r10 == 0.0 {
        return value;
    }
    let mut out = value;
    for q in 0..width {
        let bit = 1 << (width - 1 - q);
        let flip = if value & bit == 0 {
            model.r01
        } else {
            model.r10
        };
        if rng.random::<f64>() < flip {
            out ^= bit;
        }
    }
    out
}

/// Runs `shots` noisy trajectories of `circuit` from `init` and measures
/// every qubit.
pub fn run_noisy_from(
    init: &StateVector,
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<MeasurementHistogram> {
    model.validate()?;
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if init.num_qubits() != circuit.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: circuit.num_qubits(),
            found: init.num_qubits(),
        });
    }
    let width = circuit.num_qubits();
    let mut ideal = init.clone();
    circuit.apply(&mut ideal)?;
    let ideal = ideal.full_probabilities();

    let outcomes = map_indices(exec, shots as usize, |shot| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot as u64);
        let events = draw_events(circuit, model, &mut rng);
        let u = rng.random::<f64>();
        let value = if events.is_empty() {
            draw_index(ideal.probs(), u)
        } else {
            let s = trajectory(init, circuit, &events);
            draw_index(s.full_probabilities().probs(), u)
        };
        readout(value, width, model, &mut rng)
    });

    let mut counts = vec![0u64; 1 << width];
    for v in outcomes {
        counts[v] += 1;
    }
    let mut h = MeasurementHistogram::new();
    for (v, &c) in counts.iter().enumerate() {
        if c > 0 {
            h.record(to_bitstring(v as u64, width), c);
        }
    }
    Ok(h)
}

/// [`run_noisy_from`] starting in `|0…0>`.
pub fn run_noisy(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<MeasurementHistogram> {
    let init = StateVector::new_zero(circuit.num_qubits())?.with_execution(exec);
    run_noisy_from(&init, circuit, model, shots, seed, exec)
}

/// Which input the oracle was run on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleInput {
    /// Fixed basis input given as a bitstring.
    Basis(String),
    /// Uniform superposition: each shot is scored against its measured input.
    Uniform,
}

/// Prepends the input preparation (Hadamards or X flips on the first `n`
/// qubits) to an oracle circuit.
pub fn with_input(oracle: &Circuit, n: usize, input: &OracleInput) -> Result<Circuit> {
    let mut circuit = Circuit::new(oracle.num_qubits());
    match input {
        OracleInput::Uniform => circuit.extend((0..n).map(Gate::h))?,
        OracleInput::Basis(bits) => {
            if bits.len() != n {
                return Err(Error::Bitstring(format!("input {bits:?} is not {n} bits")));
            }
            parse_bitstring(bits)?;
            circuit.extend(
                bits.chars()
                    .enumerate()
                    .filter(|&(_, c)| c == '1')
                    .map(|(q, _)| Gate::x(q)),
            )?
        }
    }
    circuit.extend(oracle.gates().iter().cloned())?;
    Ok(circuit)
}

/// Fraction of shots whose output bits equal `truth` of the input.
///
/// Histogram bitstrings are laid out as input bits followed by output bits.
pub fn accuracy(
    h: &MeasurementHistogram,
    truth: &BooleanTable,
    input: &OracleInput,
) -> Result<f64> {
    let (n, m) = (truth.n(), truth.m());
    let fixed = match input {
        OracleInput::Basis(bits) => {
            if bits.len() != n {
                return Err(Error::Bitstring(format!("input {bits:?} is not {n} bits")));
            }
            Some(parse_bitstring(bits)?)
        }
        OracleInput::Uniform => None,
    };
    if h.shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut correct = 0u64;
    for (bits, &c) in &h.counts {
        if bits.len() != n + m {
            return Err(Error::Bitstring(format!(
                "histogram entry {bits:?} does not cover {n} input and {m} output bits"
            )));
        }
        let x = fixed.unwrap_or(parse_bitstring(&bits[..n])?);
        if parse_bitstring(&bits[n..])? == truth.eval(x) {
            correct += c;
        }
    }
    Ok(correct as f64 / h.shots as f64)
}

/// Exact probability of a correct output under the noiseless distribution.
pub fn exact_accuracy(
    dist: &Distribution,
    truth: &BooleanTable,
    input: &OracleInput,
) -> Result<f64> {
    let (n, m) = (truth.n(), truth.m());
    if dist.width() != n + m {
        return Err(Error::LengthMismatch {
            expected: n + m,
            found: dist.width(),
        });
    }
    let fixed = match input {
        OracleInput::Basis(bits) => Some(parse_bitstring(bits)?),
        OracleInput::Uniform => None,
    };
    Ok(dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(v, _)| {
            let v = *v as u64;
            let x = fixed.unwrap_or(v >> m);
            v & ((1 << m) - 1) == truth.eval(x)
        })
        .map(|(_, p)| p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{build_assignment_circuit, build_phase_qft_circuit};

    fn relu() -> BooleanTable {
        BooleanTable::new(2, 2, vec![0, 1, 0, 0]).unwrap()
    }

    fn uniform_inputs(c: &Circuit, n: usize) -> Circuit {
        let mut out = Circuit::new(c.num_qubits());
        out.extend((0..n).map(Gate::h)).unwrap();
        out.extend(c.gates().iter().cloned()).unwrap();
        out
    }

    #[test]
    fn validation() {
        assert!(NoiseModel::new(0.1, 0.2, 0.0, 1.0).is_ok());
        assert!(matches!(
            NoiseModel::new(-0.1, 0.0, 0.0, 0.0),
            Err(Error::Probability { name: "p1", .. })
        ));
        assert!(NoiseModel::new(0.0, 0.0, 1.5, 0.0).is_err());
        assert!(NoiseModel::from_json_str(r#"{"p1":0,"p2":0,"r01":0,"r10":0,"x":1}"#).is_err());
        let m =
            NoiseModel::from_json_str(r#"{"p1":0.01,"p2":0.03,"r01":0.05,"r10":0.07}"#).unwrap();
        assert_eq!(m, NoiseModel::HARDWARE_LIKE);
    }

    #[test]
    fn full_readout_flip_complements() {
        let c = Circuit::new(2);
        let m = NoiseModel::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let h = run_noisy(&c, &m, 500, 9, Execution::default()).unwrap();
        assert_eq!(h.count("11"), 500);
    }

    #[test]
    fn ideal_relu_is_perfect() {
        for c in [
            build_assignment_circuit(&relu()).unwrap(),
            build_phase_qft_circuit(&relu()).unwrap(),
        ] {
            let c = uniform_inputs(&c, 2);
            let h = run_noisy(&c, &NoiseModel::ideal(), 8192, 1, Execution::default()).unwrap();
            assert_eq!(accuracy(&h, &relu(), &OracleInput::Uniform).unwrap(), 1.0);
            assert_eq!(h.counts.len(), 4);
        }
    }

    #[test]
    fn deterministic_across_policies() {
        let c = uniform_inputs(&build_phase_qft_circuit(&relu()).unwrap(), 2);
        let m = NoiseModel::HARDWARE_LIKE;
        let a = run_noisy(&c, &m, 2000, 5, Execution::Sequential).unwrap();
        let b = run_noisy(&c, &m, 2000, 5, Execution::default()).unwrap();
        assert_eq!(a, b);
        let c2 = run_noisy(&c, &m, 2000, 6, Execution::Sequential).unwrap();
        assert_ne!(a, c2);
    }

    #[test]
    fn lighter_noise_keeps_phase_oracle_in_band() {
        let c = uniform_inputs(&build_phase_qft_circuit(&relu()).unwrap(), 2);
        let m = NoiseModel::new(0.005, 0.02, 0.03, 0.03).unwrap();
        let h = run_noisy(&c, &m, 8192, 0, Execution::default()).unwrap();
        let a = accuracy(&h, &relu(), &OracleInput::Uniform).unwrap();
        assert!((0.55..=0.85).contains(&a), "{a}");
    }

    #[test]
    fn accuracy_examples() {
        let identity = BooleanTable::from_fn(2, 2, |x| x).unwrap();
        let mut h = MeasurementHistogram::new();
        // Every output is the complement of the input.
        for x in 0..4u64 {
            h.record(
                format!("{}{}", to_bitstring(x, 2), to_bitstring(3 - x, 2)),
                10,
            );
        }
        assert_eq!(accuracy(&h, &identity, &OracleInput::Uniform).unwrap(), 0.0);
        let mut fixed = MeasurementHistogram::new();
        fixed.record("0110".into(), 7);
        assert_eq!(
            accuracy(&fixed, &identity, &OracleInput::Basis("01".into())).unwrap(),
            0.0
        );
        let mut bad = MeasurementHistogram::new();
        bad.record("101".into(), 1);
        assert!(accuracy(&bad, &identity, &OracleInput::Uniform).is_err());
        assert!(accuracy(&h, &identity, &OracleInput::Basis("1".into())).is_err());
    }

    #[test]
    fn exact_accuracy_of_ideal_run() {
        let c = uniform_inputs(&build_assignment_circuit(&relu()).unwrap(), 2);
        let d = c.run().unwrap().full_probabilities();
        assert!((exact_accuracy(&d, &relu(), &OracleInput::Uniform).unwrap() - 1.0).abs() < 1e-12);
    }
}
