// SPDX-License-Identifier: Apache-2.0

//! Gate lists, standard constructors, the inverse QFT, controlled powers and
//! elementary-gate resource counting.
//!
//! Rotation angles are stored as phase fractions: `Rz(α) = diag(1, e^{2πiα})`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, UNITARY_TOL};
use crate::statevec::StateVector;

/// Largest register handled by [`build_inverse_qft`].
pub const MAX_QFT_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    /// `diag(1, e^{2πiα})`; may carry any number of controls.
    Rz(f64),
    /// `Rz(α)` with exactly one control, i.e. `diag(1, 1, 1, e^{2πiα})`.
    CRz(f64),
    /// Pauli X on one target with one or more controls.
    Mcx,
    /// `diag(e^{2πi φ_0}, …)` over the targets, entries as phase fractions.
    Diagonal(Vec<f64>),
    Unitary(Matrix),
}

impl GateKind {
    pub fn label(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Rz(_) => "rz",
            GateKind::CRz(_) => "crz",
            GateKind::Mcx => "mcx",
            GateKind::Diagonal(_) => "diagonal",
            GateKind::Unitary(_) => "unitary",
        }
    }

    /// Phase fractions of the target-space diagonal, for diagonal kinds.
    pub fn diagonal_fractions(&self) -> Option<Vec<f64>> {
        match self {
            GateKind::Z => Some(vec![0.0, 0.5]),
            GateKind::S => Some(vec![0.0, 0.25]),
            GateKind::Rz(a) | GateKind::CRz(a) => Some(vec![0.0, *a]),
            GateKind::Diagonal(p) => Some(p.clone()),
            _ => None,
        }
    }
}

fn cis(fraction: f64) -> Complex64 {
    Complex64::cis(TAU * fraction)
}

fn pauli_matrix(kind: &GateKind) -> Option<Matrix> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let s = FRAC_1_SQRT_2;
    Some(match kind {
        GateKind::X | GateKind::Mcx => Matrix::new(2, vec![z, o, o, z]).ok()?,
        GateKind::Y => Matrix::new(2, vec![z, -i, i, z]).ok()?,
        GateKind::H => Matrix::from_real(2, &[s, s, s, -s]).ok()?,
        _ => return None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: vec![q],
            controls: Vec::new(),
        }
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn y(q: usize) -> Self {
        Self::single(GateKind::Y, q)
    }

    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }

    pub fn rz(alpha: f64, q: usize) -> Self {
        Self::single(GateKind::Rz(alpha), q)
    }

    pub fn crz(alpha: f64, control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::CRz(alpha),
            targets: vec![target],
            controls: vec![control],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::mcx(vec![control], target)
    }

    pub fn mcx(controls: Vec<usize>, target: usize) -> Self {
        Self {
            kind: GateKind::Mcx,
            targets: vec![target],
            controls,
        }
    }

    pub fn diagonal(fractions: Vec<f64>, targets: Vec<usize>) -> Result<Self> {
        if fractions.len() != 1 << targets.len() {
            return Err(Error::LengthMismatch {
                expected: 1 << targets.len(),
                found: fractions.len(),
            });
        }
        Ok(Self {
            kind: GateKind::Diagonal(fractions),
            targets,
            controls: Vec::new(),
        })
    }

    /// Generic unitary block; rejects matrices that are not unitary within
    /// 1e-10.
    pub fn unitary(matrix: Matrix, targets: Vec<usize>) -> Result<Self> {
        if matrix.dim() != 1 << targets.len() {
            return Err(Error::LengthMismatch {
                expected: 1 << targets.len(),
                found: matrix.dim(),
            });
        }
        matrix.check_unitary(UNITARY_TOL)?;
        Ok(Self {
            kind: GateKind::Unitary(matrix),
            targets,
            controls: Vec::new(),
        })
    }

    pub fn with_controls(mut self, controls: &[usize]) -> Self {
        self.controls.extend_from_slice(controls);
        self
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        self.controls.iter().chain(&self.targets).copied().collect()
    }

    /// Elementary gates this gate expands to under `rule`; see
    /// [`count_resources`].
    pub fn elementary_cost(&self, rule: DecompositionRule) -> usize {
        let d = self.arity();
        match &self.kind {
            GateKind::Diagonal(p) => p.len() * rule.controlled_cost(d),
            GateKind::Unitary(_) => 4usize.saturating_pow(d as u32),
            _ => rule.controlled_cost(d),
        }
    }

    pub fn arity(&self) -> usize {
        self.controls.len() + self.targets.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.kind.diagonal_fractions().is_some()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let single = matches!(
            self.kind,
            GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::H
                | GateKind::S
                | GateKind::Rz(_)
                | GateKind::CRz(_)
                | GateKind::Mcx
        );
        if self.targets.is_empty() || (single && self.targets.len() != 1) {
            return Err(Error::InvalidGate(format!(
                "{} expects one target, got {:?}",
                self.kind.label(),
                self.targets
            )));
        }
        match &self.kind {
            GateKind::CRz(_) if self.controls.len() != 1 => {
                return Err(Error::InvalidGate("crz needs exactly one control".into()))
            }
            GateKind::Mcx if self.controls.is_empty() => {
                return Err(Error::InvalidGate("mcx needs at least one control".into()))
            }
            GateKind::Diagonal(p) if p.len() != 1 << self.targets.len() => {
                return Err(Error::LengthMismatch {
                    expected: 1 << self.targets.len(),
                    found: p.len(),
                })
            }
            GateKind::Unitary(m) if m.dim() != 1 << self.targets.len() => {
                return Err(Error::LengthMismatch {
                    expected: 1 << self.targets.len(),
                    found: m.dim(),
                })
            }
            _ => {}
        }
        let mut seen = BTreeSet::new();
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits,
                });
            }
            if !seen.insert(q) {
                return Err(Error::QubitCollision(q));
            }
        }
        Ok(())
    }

    /// Applies the gate; assumes [`validate`](Self::validate) passed.
    pub fn apply(&self, state: &mut StateVector) {
        if let Some(fr) = self.kind.diagonal_fractions() {
            let phases: Vec<Complex64> = fr.iter().map(|&f| cis(f)).collect();
            state.apply_diagonal_unchecked(&phases, &self.targets, &self.controls);
            return;
        }
        match &self.kind {
            GateKind::Unitary(m) => state.apply_matrix_unchecked(m, &self.targets, &self.controls),
            k => {
                let m = pauli_matrix(k).expect("non-diagonal single-qubit kind");
                state.apply_matrix_unchecked(&m, &self.targets, &self.controls);
            }
        }
    }

    /// Matrix of the gate on its targets (controls excluded).
    pub fn target_matrix(&self) -> Matrix {
        if let Some(fr) = self.kind.diagonal_fractions() {
            let entries: Vec<Complex64> = fr.iter().map(|&f| cis(f)).collect();
            return Matrix::diagonal(&entries);
        }
        match &self.kind {
            GateKind::Unitary(m) => m.clone(),
            k => pauli_matrix(k).expect("non-diagonal single-qubit kind"),
        }
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::Mcx => {
                self.kind.clone()
            }
            GateKind::S => GateKind::Rz(-0.25),
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::CRz(a) => GateKind::CRz(-a),
            GateKind::Diagonal(p) => GateKind::Diagonal(p.iter().map(|v| -v).collect()),
            GateKind::Unitary(m) => GateKind::Unitary(m.adjoint()),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Copy with every qubit index passed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind.clone(),
            targets: self.targets.iter().map(|&q| map(q)).collect(),
            controls: self.controls.iter().map(|&q| map(q)).collect(),
        }
    }
}

/// Ordered gate list over a fixed number of qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Appends `other` with its qubit `i` placed on `qubit_map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, qubit_map: &[usize]) -> Result<()> {
        if qubit_map.len() != other.num_qubits {
            return Err(Error::LengthMismatch {
                expected: other.num_qubits,
                found: qubit_map.len(),
            });
        }
        for g in &other.gates {
            self.push(g.remapped(|q| qubit_map[q]))?;
        }
        Ok(())
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        for g in &self.gates {
            g.apply(state);
        }
        Ok(())
    }

    /// Runs the circuit on `|0…0>`.
    pub fn run(&self) -> Result<StateVector> {
        let mut s = StateVector::new_zero(self.num_qubits)?;
        self.apply(&mut s)?;
        Ok(s)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Merges uncontrolled `Rz` gates on the same qubit within each run of
    /// diagonal gates. Diagonal gates commute, so the result is the same
    /// unitary with fewer gates.
    pub fn fuse_rotations(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        let mut pending: BTreeMap<usize, f64> = BTreeMap::new();
        let flush = |pending: &mut BTreeMap<usize, f64>, gates: &mut Vec<Gate>| {
            for (q, a) in std::mem::take(pending) {
                if a.rem_euclid(1.0) != 0.0 {
                    gates.push(Gate::rz(a, q));
                }
            }
        };
        for g in &self.gates {
            match g.kind {
                GateKind::Rz(a) if g.controls.is_empty() => {
                    *pending.entry(g.targets[0]).or_insert(0.0) += a;
                }
                _ if g.is_diagonal() => gates.push(g.clone()),
                _ => {
                    flush(&mut pending, &mut gates);
                    gates.push(g.clone());
                }
            }
        }
        flush(&mut pending, &mut gates);
        Circuit {
            num_qubits: self.num_qubits,
            gates,
        }
    }

    /// JSON document with angles written as exact decimal strings.
    pub fn to_json(&self) -> Value {
        let gates: Vec<Value> = self.gates.iter().map(gate_to_json).collect();
        json!({ "num_qubits": self.num_qubits, "gates": gates })
    }

    pub fn from_json(value: &Value) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_value(value.clone())?;
        let mut c = Circuit::new(doc.num_qubits);
        for g in doc.gates {
            c.push(gate_from_doc(g)?)?;
        }
        Ok(c)
    }
}

#[derive(Serialize, Deserialize)]
struct GateDoc {
    kind: String,
    targets: Vec<usize>,
    #[serde(default)]
    controls: Vec<usize>,
    #[serde(default)]
    angle: Option<String>,
    #[serde(default)]
    phases: Option<Vec<String>>,
    #[serde(default)]
    matrix: Option<Vec<[String; 2]>>,
}

#[derive(Deserialize)]
struct CircuitDoc {
    num_qubits: usize,
    gates: Vec<GateDoc>,
}

fn exact(v: f64) -> String {
    // `Display` for f64 prints the shortest string that parses back exactly.
    format!("{v}")
}

fn parse_exact(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::Parse(format!("angle {s:?}: {e}")))
}

fn gate_to_json(g: &Gate) -> Value {
    let mut doc = GateDoc {
        kind: g.kind.label().to_string(),
        targets: g.targets.clone(),
        controls: g.controls.clone(),
        angle: None,
        phases: None,
        matrix: None,
    };
    match &g.kind {
        GateKind::Rz(a) | GateKind::CRz(a) => doc.angle = Some(exact(*a)),
        GateKind::Diagonal(p) => doc.phases = Some(p.iter().map(|&v| exact(v)).collect()),
        GateKind::Unitary(m) => {
            doc.matrix = Some(
                m.data()
                    .iter()
                    .map(|c| [exact(c.re), exact(c.im)])
                    .collect(),
            )
        }
        _ => {}
    }
    serde_json::to_value(doc).expect("gate document serialises")
}

fn gate_from_doc(doc: GateDoc) -> Result<Gate> {
    let angle = || -> Result<f64> {
        parse_exact(
            doc.angle
                .as_deref()
                .ok_or_else(|| Error::Parse(format!("{} gate without angle", doc.kind)))?,
        )
    };
    let kind = match doc.kind.as_str() {
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "h" => GateKind::H,
        "s" => GateKind::S,
        "rz" => GateKind::Rz(angle()?),
        "crz" => GateKind::CRz(angle()?),
        "mcx" => GateKind::Mcx,
        "diagonal" => GateKind::Diagonal(
            doc.phases
                .as_ref()
                .ok_or_else(|| Error::Parse("diagonal gate without phases".into()))?
                .iter()
                .map(|s| parse_exact(s))
                .collect::<Result<_>>()?,
        ),
        "unitary" => {
            let entries = doc
                .matrix
                .as_ref()
                .ok_or_else(|| Error::Parse("unitary gate without matrix".into()))?
                .iter()
                .map(|[re, im]| Ok(Complex64::new(parse_exact(re)?, parse_exact(im)?)))
                .collect::<Result<Vec<_>>>()?;
            let m = Matrix::new(1 << doc.targets.len(), entries)?;
            m.check_unitary(UNITARY_TOL)?;
            GateKind::Unitary(m)
        }
        other => return Err(Error::Parse(format!("unknown gate kind {other:?}"))),
    };
    Ok(Gate {
        kind,
        targets: doc.targets,
        controls: doc.controls,
    })
}

/// Inverse QFT on `register` (first entry is the most significant bit).
///
/// Maps `2^{-m/2} Σ_t e^{2πi·t·k/2^m}|t>` to `|k>`. Bit reversal is emitted
/// up front as three CNOTs per swapped pair, followed by the reversed
/// Hadamard/controlled-phase cascade with negated angles.
pub fn inverse_qft_gates(register: &[usize]) -> Vec<Gate> {
    let m = register.len();
    let mut gates = Vec::new();
    for i in 0..m / 2 {
        let (a, b) = (register[i], register[m - 1 - i]);
        gates.push(Gate::cnot(a, b));
        gates.push(Gate::cnot(b, a));
        gates.push(Gate::cnot(a, b));
    }
    for j in (0..m).rev() {
        for l in ((j + 1)..m).rev() {
            let alpha = -1.0 / (1u64 << (l - j + 1)) as f64;
            gates.push(Gate::crz(alpha, register[l], register[j]));
        }
        gates.push(Gate::h(register[j]));
    }
    gates
}

/// Inverse QFT on `m` qubits, `1 ≤ m ≤ 12`.
pub fn build_inverse_qft(m: usize) -> Result<Circuit> {
    if !(1..=MAX_QFT_QUBITS).contains(&m) {
        return Err(Error::SizeCap {
            what: "inverse QFT width",
            value: m,
            max: MAX_QFT_QUBITS,
        });
    }
    let register: Vec<usize> = (0..m).collect();
    let mut c = Circuit::new(m);
    c.extend(inverse_qft_gates(&register))?;
    Ok(c)
}

fn wrap_fraction(f: f64) -> f64 {
    let r = f.rem_euclid(1.0);
    if r == 1.0 {
        0.0
    } else {
        r
    }
}

/// `u^(2^s)` conditioned on `control`.
///
/// Diagonal blocks are exponentiated exactly by scaling their phase fractions
/// (multiplying by `2^s` is exact in binary floating point). Other blocks are
/// squared `s` times.
pub fn controlled_power(u: &Gate, s: u32, control: usize) -> Result<Vec<Gate>> {
    if u.qubits().contains(&control) {
        return Err(Error::QubitCollision(control));
    }
    let scale = (1u64 << s) as f64;
    let mut controls = u.controls.clone();
    controls.push(control);
    let kind = match &u.kind {
        GateKind::Z | GateKind::S | GateKind::Rz(_) | GateKind::CRz(_) => {
            let alpha = u.kind.diagonal_fractions().expect("diagonal")[1];
            let a = if s == 0 {
                alpha
            } else {
                wrap_fraction(alpha * scale)
            };
            if controls.len() == 1 {
                GateKind::CRz(a)
            } else {
                GateKind::Rz(a)
            }
        }
        GateKind::Diagonal(p) => GateKind::Diagonal(if s == 0 {
            p.clone()
        } else {
            p.iter().map(|&v| wrap_fraction(v * scale)).collect()
        }),
        GateKind::X | GateKind::Mcx if s == 0 => GateKind::Mcx,
        GateKind::Y | GateKind::H if s == 0 => u.kind.clone(),
        _ => GateKind::Unitary(u.target_matrix().pow2(s)),
    };
    Ok(vec![Gate {
        kind,
        targets: u.targets.clone(),
        controls,
    }])
}

/// Counting rule for multi-controlled rotations and multi-controlled X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionRule {
    /// `C^{d-1}` gates on `d` qubits cost `d²` elementary gates.
    #[default]
    NoAncilla,
    /// `C^{d-1}` gates on `d` qubits cost `d` elementary gates with one
    /// auxiliary qubit.
    OneAncilla,
}

impl DecompositionRule {
    /// Elementary cost of a controlled single-target operation on `d` qubits.
    /// Single-qubit gates and two-qubit entangling gates are elementary.
    pub fn controlled_cost(self, d: usize) -> usize {
        match (d, self) {
            (0..=2, _) => 1,
            (_, DecompositionRule::NoAncilla) => d * d,
            (_, DecompositionRule::OneAncilla) => d,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub qubit_count: usize,
    /// Auxiliary qubits required by the counting rule (0 or 1).
    pub ancilla_qubits: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub total_gates: usize,
    /// Controlled-phase rotations after expanding every diagonal block over
    /// `k` targets into `2^k` multi-controlled `Rz` gates.
    pub controlled_rotations: usize,
    pub elementary_estimate: usize,
    pub rule: DecompositionRule,
}

/// Counts qubits, gates per kind and an elementary-gate estimate.
///
/// * single-qubit gates, CNOT and CRz: 1 each;
/// * `Rz` / `Mcx` touching `d ≥ 3` qubits: `d²` or `d` per the rule;
/// * a diagonal over `k` targets with `c` controls: `2^k` rotations, each a
///   `C^{k+c-1}Rz`;
/// * a generic unitary touching `d` qubits: `4^d`.
pub fn count_resources(c: &Circuit, rule: DecompositionRule) -> ResourceReport {
    let mut gate_counts = BTreeMap::new();
    let mut elementary = 0usize;
    let mut rotations = 0usize;
    let mut needs_ancilla = false;
    for g in c.gates() {
        *gate_counts.entry(g.kind.label().to_string()).or_insert(0) += 1;
        let d = g.arity();
        match &g.kind {
            GateKind::Diagonal(p) => rotations += p.len(),
            GateKind::Rz(_) | GateKind::CRz(_) if d > 1 => rotations += 1,
            _ => {}
        }
        let cost = g.elementary_cost(rule);
        if d >= 3 && !matches!(g.kind, GateKind::Unitary(_)) {
            needs_ancilla = true;
        }
        elementary += cost;
    }
    ResourceReport {
        qubit_count: c.num_qubits(),
        ancilla_qubits: usize::from(needs_ancilla && rule == DecompositionRule::OneAncilla),
        gate_counts,
        total_gates: c.len(),
        controlled_rotations: rotations,
        elementary_estimate: elementary,
        rule,
    }
}

/// Result of removing qubits that stay in a known basis state.
#[derive(Clone, Debug)]
pub struct FoldedCircuit {
    pub circuit: Circuit,
    /// Original index of each remaining qubit, in order.
    pub kept: Vec<usize>,
    /// Final classical value of every folded qubit, by original index.
    pub classical: BTreeMap<usize, bool>,
    /// Global phase fraction collected from fully classical phases.
    pub global_phase: f64,
}

impl FoldedCircuit {
    /// Embeds a state of the folded circuit back into the original register.
    pub fn expand(&self, state: &StateVector) -> Result<StateVector> {
        let n = self.kept.len() + self.classical.len();
        let mut out = StateVector::new_zero(n)?;
        let mut fixed = 0usize;
        for (&q, &v) in &self.classical {
            if v {
                fixed |= 1 << (n - 1 - q);
            }
        }
        let k = self.kept.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (i, a) in state.amplitudes().iter().enumerate() {
            let mut g = fixed;
            for (pos, &q) in self.kept.iter().enumerate() {
                if (i >> (k - 1 - pos)) & 1 == 1 {
                    g |= 1 << (n - 1 - q);
                }
            }
            amps[g] = *a * cis(self.global_phase);
        }
        out.init_amplitudes(&amps)?;
        Ok(out)
    }
}

/// Folds away qubits whose value stays classical.
///
/// `classical` lists the initial basis value of each qubit to remove. Those
/// qubits may act as controls, as arguments of diagonal gates, or as targets
/// of X/Y/MCX gates whose controls are all classical; anything else is
/// rejected. The folded circuit acts on the remaining qubits (in increasing
/// original order) starting from `|0…0>`, and reproduces the full circuit's
/// state up to [`FoldedCircuit::global_phase`].
pub fn fold_classical(c: &Circuit, classical: &[(usize, bool)]) -> Result<FoldedCircuit> {
    let n = c.num_qubits();
    let mut values: BTreeMap<usize, bool> = BTreeMap::new();
    for &(q, v) in classical {
        if q >= n {
            return Err(Error::QubitIndex {
                index: q,
                num_qubits: n,
            });
        }
        values.insert(q, v);
    }
    let kept: Vec<usize> = (0..n).filter(|q| !values.contains_key(q)).collect();
    if kept.is_empty() {
        return Err(Error::NotFoldable("no quantum qubits left".into()));
    }
    let mut index = vec![usize::MAX; n];
    for (i, &q) in kept.iter().enumerate() {
        index[q] = i;
    }
    let mut out = Circuit::new(kept.len());
    let mut global = 0.0;

    for g in c.gates() {
        let mut quantum_controls = Vec::new();
        let mut live = true;
        for &q in &g.controls {
            match values.get(&q) {
                Some(false) => live = false,
                Some(true) => {}
                None => quantum_controls.push(q),
            }
        }
        if !live {
            continue;
        }

        if let Some(fractions) = g.kind.diagonal_fractions() {
            // Restrict the target-space diagonal to the fixed classical bits.
            let t = g.targets.len();
            let mut free = Vec::new();
            let mut fixed_sub = 0usize;
            for (pos, &q) in g.targets.iter().enumerate() {
                match values.get(&q) {
                    Some(&v) => {
                        if v {
                            fixed_sub |= 1 << (t - 1 - pos);
                        }
                    }
                    None => free.push((pos, q)),
                }
            }
            let restricted: Vec<f64> = (0..1usize << free.len())
                .map(|sub| {
                    let mut full = fixed_sub;
                    for (i, &(pos, _)) in free.iter().enumerate() {
                        if (sub >> (free.len() - 1 - i)) & 1 == 1 {
                            full |= 1 << (t - 1 - pos);
                        }
                    }
                    fractions[full]
                })
                .collect();
            let mut targets: Vec<usize> = free.iter().map(|&(_, q)| index[q]).collect();
            let mut ctrls: Vec<usize> = quantum_controls.iter().map(|&q| index[q]).collect();
            if targets.is_empty() {
                let alpha = restricted[0];
                match ctrls.pop() {
                    None => global += alpha,
                    Some(last) => {
                        targets.push(last);
                        out.push(phase_gate(vec![0.0, alpha], targets, ctrls)?)?;
                    }
                }
            } else {
                out.push(phase_gate(restricted, targets, ctrls)?)?;
            }
            continue;
        }

        let classical_targets: Vec<usize> = g
            .targets
            .iter()
            .copied()
            .filter(|q| values.contains_key(q))
            .collect();
        if !classical_targets.is_empty() {
            let flips = matches!(g.kind, GateKind::X | GateKind::Y | GateKind::Mcx);
            if !flips || !quantum_controls.is_empty() {
                return Err(Error::NotFoldable(format!(
                    "{} gate writes classical qubit {} under quantum control",
                    g.kind.label(),
                    classical_targets[0]
                )));
            }
            let q = g.targets[0];
            let v = values[&q];
            if g.kind == GateKind::Y {
                // Y|0> = i|1>, Y|1> = -i|0>.
                global += if v { -0.25 } else { 0.25 };
            }
            values.insert(q, !v);
            continue;
        }

        let kind = match &g.kind {
            GateKind::Mcx if quantum_controls.is_empty() => GateKind::X,
            k => k.clone(),
        };
        out.push(Gate {
            kind,
            targets: g.targets.iter().map(|&q| index[q]).collect(),
            controls: quantum_controls.iter().map(|&q| index[q]).collect(),
        })?;
    }
    Ok(FoldedCircuit {
        circuit: out,
        kept,
        classical: values,
        global_phase: global,
    })
}

/// Picks the simplest gate kind for a diagonal over `targets`.
fn phase_gate(fractions: Vec<f64>, targets: Vec<usize>, controls: Vec<usize>) -> Result<Gate> {
    if targets.len() == 1 && fractions[0] == 0.0 {
        let a = fractions[1];
        return Ok(if controls.len() == 1 {
            Gate::crz(a, controls[0], targets[0])
        } else {
            Gate::rz(a, targets[0]).with_controls(&controls)
        });
    }
    Ok(Gate::diagonal(fractions, targets)?.with_controls(&controls))
}
