// SPDX-License-Identifier: Apache-2.0

//! Boolean-function oracles.
//!
//! A [`BooleanTable`] is the ground truth. It can be applied directly as the
//! standard oracle `|x>|y> -> |x>|y ⊕ f(x)>`, converted to a minimal phase
//! oracle, or compiled into one of two circuits:
//!
//! * the assignment circuit: one fully controlled X per `(x, output bit)`
//!   with `f_i(x) = 1`, zero-controls realised by X conjugation;
//! * the phase/QFT circuit: Hadamards on the output register, controlled
//!   powers of `diag(e^{2πi f(x)/2^m})`, then the inverse QFT.
//!
//! Circuit layout for both: input qubits `0..n`, output qubits `n..n+m`,
//! each register most significant bit first.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{inverse_qft_gates, Circuit, Gate};
use crate::error::{Error, Result};
use crate::fixedpoint::{FixedPointFormat, Rounding};
use crate::statevec::{parse_bitstring, to_bitstring, StateVector};

/// Largest `n + m` accepted by the circuit builders.
pub const MAX_ORACLE_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanTable {
    n: usize,
    m: usize,
    table: Vec<u64>,
}

impl BooleanTable {
    pub fn new(n: usize, m: usize, table: Vec<u64>) -> Result<Self> {
        if n == 0 || m == 0 || n > 30 || m > 32 {
            return Err(Error::Config(format!(
                "unsupported table shape n={n}, m={m}"
            )));
        }
        if table.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                found: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= 1u64 << m) {
            return Err(Error::Config(format!(
                "entry {bad} does not fit in {m} bits"
            )));
        }
        Ok(Self { n, m, table })
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(u64) -> u64) -> Result<Self> {
        Self::new(n, m, (0..1u64 << n).map(f).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        Self::new(
            n,
            m,
            (0..1u64 << n)
                .map(|_| rng.random_range(0..1u64 << m))
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[u64] {
        &self.table
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    /// Parses `"n m"` followed by `2^n` binary output strings in ascending
    /// input order. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty truth table".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::Parse(format!("bad header {header:?}")))
            })
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(Error::Parse(format!(
                "header must be \"n m\", got {header:?}"
            )));
        }
        let (n, m) = (dims[0], dims[1]);
        if n == 0 || n > MAX_ORACLE_QUBITS {
            return Err(Error::Parse(format!("input width {n} out of range")));
        }
        let mut table = Vec::with_capacity(1 << n);
        for (i, line) in lines.enumerate() {
            if line.len() != m {
                return Err(Error::Parse(format!(
                    "row {i}: expected {m} bits, got {line:?}"
                )));
            }
            table.push(
                parse_bitstring(line).map_err(|_| Error::Parse(format!("row {i}: {line:?}")))?,
            );
        }
        Self::new(n, m, table).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m);
        for &v in &self.table {
            let _ = writeln!(out, "{}", to_bitstring(v, self.m));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// `|x>|y> -> |x>|y ⊕ f(x)>`.
    Standard,
    /// Deutsch: `f: {0,1} -> {0,1}` acting on `|x>|->`.
    Deutsch,
    /// Grover: `f: {0,1}^n -> {0,1}` acting on `|x>|->`.
    Grover,
    /// `|x>|0…01> -> e^{2πi f(x)/2^m}|x>|0…01>`.
    GeneralPhase,
    /// `|x> -> e^{2πi f(x)/2^m}|x>`.
    MinimalPhase,
}

/// Diagonal entries (phase fractions) of the minimal phase oracle.
pub fn minimal_phase_fractions(f: &BooleanTable, kind: OracleKind) -> Result<Vec<f64>> {
    match kind {
        OracleKind::Deutsch if f.n != 1 || f.m != 1 => Err(Error::KindMismatch(format!(
            "Deutsch oracle needs n = m = 1, got n={}, m={}",
            f.n, f.m
        ))),
        OracleKind::Grover if f.m != 1 => Err(Error::KindMismatch(format!(
            "Grover oracle needs m = 1, got m={}",
            f.m
        ))),
        // e^{πi f(x)} = e^{2πi f(x)/2}.
        OracleKind::Deutsch | OracleKind::Grover => {
            Ok(f.table.iter().map(|&v| v as f64 / 2.0).collect())
        }
        OracleKind::GeneralPhase | OracleKind::MinimalPhase => {
            let scale = (f.m as f64).exp2();
            Ok(f.table.iter().map(|&v| v as f64 / scale).collect())
        }
        OracleKind::Standard => Err(Error::KindMismatch(
            "the standard oracle is a permutation, not a phase oracle".into(),
        )),
    }
}

/// Minimal phase oracle as a diagonal of dimension `2^n`.
pub fn to_minimal_phase(f: &BooleanTable, kind: OracleKind) -> Result<Vec<Complex64>> {
    Ok(minimal_phase_fractions(f, kind)?
        .into_iter()
        .map(|fr| Complex64::cis(std::f64::consts::TAU * fr))
        .collect())
}

/// Reference implementation: permutes basis states `|x>|y> -> |x>|y ⊕ f(x)>`.
pub fn apply_standard_oracle(
    state: &mut StateVector,
    f: &BooleanTable,
    input_qubits: &[usize],
    output_qubits: &[usize],
) -> Result<()> {
    if input_qubits.len() != f.n {
        return Err(Error::LengthMismatch {
            expected: f.n,
            found: input_qubits.len(),
        });
    }
    if output_qubits.len() != f.m {
        return Err(Error::LengthMismatch {
            expected: f.m,
            found: output_qubits.len(),
        });
    }
    let nq = state.num_qubits();
    let mut seen = vec![false; nq];
    for &q in input_qubits.iter().chain(output_qubits) {
        if q >= nq {
            return Err(Error::QubitIndex {
                index: q,
                num_qubits: nq,
            });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::QubitCollision(q));
        }
    }
    let in_masks: Vec<usize> = input_qubits.iter().map(|&q| state.mask(q)).collect();
    let out_masks: Vec<usize> = output_qubits.iter().map(|&q| state.mask(q)).collect();
    state.apply_permutation(|g| {
        let x = in_masks
            .iter()
            .fold(0u64, |acc, &mk| (acc << 1) | u64::from(g & mk != 0));
        let fx = f.eval(x);
        let mut out = g;
        for (i, &mk) in out_masks.iter().enumerate() {
            if (fx >> (f.m - 1 - i)) & 1 == 1 {
                out ^= mk;
            }
        }
        out
    });
    Ok(())
}

fn check_size(f: &BooleanTable) -> Result<()> {
    if f.n + f.m > MAX_ORACLE_QUBITS {
        return Err(Error::SizeCap {
            what: "oracle qubits n + m",
            value: f.n + f.m,
            max: MAX_ORACLE_QUBITS,
        });
    }
    Ok(())
}

/// Assignment-circuit gates on arbitrary input/output registers.
pub fn assignment_gates(f: &BooleanTable, inputs: &[usize], outputs: &[usize]) -> Vec<Gate> {
    let mut gates = Vec::new();
    for x in 0..1u64 << f.n {
        let fx = f.eval(x);
        if fx == 0 {
            continue;
        }
        let zeros: Vec<usize> = (0..f.n)
            .filter(|&i| (x >> (f.n - 1 - i)) & 1 == 0)
            .map(|i| inputs[i])
            .collect();
        gates.extend(zeros.iter().map(|&q| Gate::x(q)));
        for (i, &out) in outputs.iter().enumerate() {
            if (fx >> (f.m - 1 - i)) & 1 == 1 {
                gates.push(Gate::mcx(inputs.to_vec(), out));
            }
        }
        gates.extend(zeros.iter().map(|&q| Gate::x(q)));
    }
    gates
}

/// Phase/QFT-circuit gates; `outputs` must start in `|0…0>`.
pub fn phase_qft_gates(f: &BooleanTable, inputs: &[usize], outputs: &[usize]) -> Result<Vec<Gate>> {
    let fractions = minimal_phase_fractions(f, OracleKind::MinimalPhase)?;
    let m = f.m;
    let mut gates: Vec<Gate> = outputs.iter().map(|&q| Gate::h(q)).collect();
    for (j, &ctrl) in outputs.iter().enumerate() {
        // Register bit j carries weight 2^{m-1-j}, so it controls O_f^{2^{m-1-j}}.
        let power = (m - 1 - j) as i32;
        let scaled: Vec<f64> = fractions
            .iter()
            .map(|&fr| (fr * 2f64.powi(power)).rem_euclid(1.0))
            .collect();
        gates.push(Gate::diagonal(scaled, inputs.to_vec())?.with_controls(&[ctrl]));
    }
    gates.extend(inverse_qft_gates(outputs));
    Ok(gates)
}

fn registers(f: &BooleanTable) -> (Vec<usize>, Vec<usize>) {
    ((0..f.n).collect(), (f.n..f.n + f.m).collect())
}

pub fn build_assignment_circuit(f: &BooleanTable) -> Result<Circuit> {
    check_size(f)?;
    let (inputs, outputs) = registers(f);
    let mut c = Circuit::new(f.n + f.m);
    c.extend(assignment_gates(f, &inputs, &outputs))?;
    Ok(c)
}

pub fn build_phase_qft_circuit(f: &BooleanTable) -> Result<Circuit> {
    check_size(f)?;
    let (inputs, outputs) = registers(f);
    let mut c = Circuit::new(f.n + f.m);
    c.extend(phase_qft_gates(f, &inputs, &outputs)?)?;
    Ok(c)
}

/// Truth table of `g` between two fixed-point formats; outputs outside the
/// output range saturate.
pub fn tabulate_activation(
    g: impl Fn(f64) -> f64,
    in_fmt: FixedPointFormat,
    out_fmt: FixedPointFormat,
) -> Result<BooleanTable> {
    BooleanTable::from_fn(
        in_fmt.total_bits() as usize,
        out_fmt.total_bits() as usize,
        |code| out_fmt.quantize_saturating(g(in_fmt.decode(code)), Rounding::NearestEven),
    )
}
