// SPDX-License-Identifier: Apache-2.0

//! Dense state-vector simulator.
//!
//! Qubit 0 is the most significant bit of the basis index, so a register
//! drawn top-to-bottom reads directly as a big-endian integer. All bitstrings
//! in this crate follow the same order: character `i` is qubit `qubits[i]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::matrix::{Matrix, UNITARY_TOL};

/// Largest supported register (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Normalisation tolerance checked by tests and debug assertions.
pub const NORM_TOL: f64 = 1e-10;

/// Kernels touch the amplitude vector in chunks of at least this many entries
/// when running in parallel.
const MIN_PAR_CHUNK: usize = 1 << 12;

/// Shots are drawn in batches, each batch from its own ChaCha stream.
const SHOT_BATCH: u64 = 1024;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Formats the low `width` bits of `value` as a big-endian bitstring.
pub fn to_bitstring(value: u64, width: usize) -> String {
    (0..width)
        .map(|i| {
            if (value >> (width - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Parses a big-endian bitstring into its integer value.
pub fn parse_bitstring(bits: &str) -> Result<u64> {
    if bits.is_empty() || bits.len() > 64 {
        return Err(Error::Bitstring(bits.to_string()));
    }
    bits.chars().try_fold(0u64, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Bitstring(bits.to_string())),
    })
}

/// Exact marginal distribution over a qubit subset, indexed by the subset's
/// big-endian value.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    width: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let width = probs.len().trailing_zeros() as usize;
        debug_assert!(probs.len().is_power_of_two());
        Self { width, probs }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, value: u64) -> f64 {
        self.probs.get(value as usize).copied().unwrap_or(0.0)
    }

    pub fn probability(&self, bits: &str) -> Result<f64> {
        if bits.len() != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                found: bits.len(),
            });
        }
        Ok(self.get(parse_bitstring(bits)?))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Most probable value; ties resolve to the smallest value.
    pub fn argmax(&self) -> u64 {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best as u64
    }

    /// Nonzero entries keyed by bitstring.
    pub fn to_map(&self, threshold: f64) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > threshold)
            .map(|(i, &p)| (to_bitstring(i as u64, self.width), p))
            .collect()
    }
}

/// Shot counts keyed by measured bitstring.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MeasurementHistogram {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
}

impl MeasurementHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, bits: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(bits).or_insert(0) += count;
        self.shots += count;
    }

    pub fn merge(&mut self, other: &MeasurementHistogram) {
        for (k, &v) in &other.counts {
            self.record(k.clone(), v);
        }
    }

    pub fn count(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn frequency(&self, bits: &str) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        self.count(bits) as f64 / self.shots as f64
    }

    /// Most frequent bitstring; ties resolve to the lexicographically smallest.
    pub fn mode(&self) -> Option<&str> {
        let mut best: Option<(&str, u64)> = None;
        for (k, &v) in &self.counts {
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((k, v));
            }
        }
        best.map(|(k, _)| k)
    }

    /// CSV with header `bitstring,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (k, v) in &self.counts {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

/// Draws `shots` samples from `dist` using batch-seeded ChaCha streams.
///
/// Batch `b` uses `ChaCha8Rng::seed_from_u64(seed)` on stream `b`, so the
/// result does not depend on the execution policy.
pub fn sample_distribution(
    dist: &Distribution,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<MeasurementHistogram> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut cumulative = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for &p in &dist.probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let batches = shots.div_ceil(SHOT_BATCH) as usize;
    let partial = exec::map_indices(exec, batches, |b| {
        let start = b as u64 * SHOT_BATCH;
        let n = SHOT_BATCH.min(shots - start);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut counts = vec![0u64; cumulative.len()];
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(cumulative.len() - 1);
            counts[idx] += 1;
        }
        counts
    });
    let mut hist = MeasurementHistogram::new();
    let mut merged = vec![0u64; cumulative.len()];
    for counts in partial {
        for (m, c) in merged.iter_mut().zip(counts) {
            *m += c;
        }
    }
    for (i, c) in merged.into_iter().enumerate() {
        hist.record(to_bitstring(i as u64, dist.width), c);
    }
    Ok(hist)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
    exec: Execution,
}

impl StateVector {
    /// `|0…0>` on `num_qubits` qubits.
    pub fn new_zero(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCount {
                requested: num_qubits,
                max: MAX_QUBITS,
            });
        }
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            num_qubits,
            amplitudes,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of `qubit` inside a basis index.
    #[inline]
    pub fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Resets to the computational basis state `|bits>`.
    pub fn init_basis(&mut self, bits: &str) -> Result<()> {
        if bits.len() != self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                found: bits.len(),
            });
        }
        let index = parse_bitstring(bits)? as usize;
        self.init_basis_index(index)
    }

    pub fn init_basis_index(&mut self, index: usize) -> Result<()> {
        if index >= self.dim() {
            return Err(Error::QubitIndex {
                index,
                num_qubits: self.num_qubits,
            });
        }
        self.amplitudes.fill(ZERO);
        self.amplitudes[index] = ONE;
        Ok(())
    }

    /// Loads `values / ‖values‖` as the amplitudes.
    pub fn init_amplitudes(&mut self, values: &[Complex64]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        let norm = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        for (a, v) in self.amplitudes.iter_mut().zip(values) {
            *a = v / norm;
        }
        Ok(())
    }

    pub fn init_real_amplitudes(&mut self, values: &[f64]) -> Result<()> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.init_amplitudes(&c)
    }

    fn check_indices(&self, targets: &[usize], controls: &[usize]) -> Result<()> {
        let mut seen = 0u64;
        for &q in targets.iter().chain(controls) {
            if q >= self.num_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::QubitCollision(q));
            }
            seen |= 1 << q;
        }
        Ok(())
    }

    fn control_mask(&self, controls: &[usize]) -> usize {
        controls.iter().fold(0, |m, &q| m | self.mask(q))
    }

    fn chunk_len(&self, span_mask: usize) -> usize {
        // Groups only vary in target bits, so a chunk aligned to twice the
        // highest target bit always contains whole groups.
        let block = if span_mask == 0 {
            1
        } else {
            (span_mask + 1).next_power_of_two()
        };
        block.max(MIN_PAR_CHUNK).min(self.dim())
    }

    /// Applies a `2^k × 2^k` unitary to `targets` (first target is the most
    /// significant bit of the matrix index), conditioned on all `controls`
    /// being `|1>`.
    pub fn apply_unitary(
        &mut self,
        matrix: &Matrix,
        targets: &[usize],
        controls: &[usize],
    ) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::EmptySubset);
        }
        if matrix.dim() != 1 << targets.len() {
            return Err(Error::LengthMismatch {
                expected: 1 << targets.len(),
                found: matrix.dim(),
            });
        }
        self.check_indices(targets, controls)?;
        matrix.check_unitary(UNITARY_TOL)?;
        self.apply_matrix_unchecked(matrix, targets, controls);
        Ok(())
    }

    /// Same as [`apply_unitary`](Self::apply_unitary) without validation.
    pub(crate) fn apply_matrix_unchecked(
        &mut self,
        matrix: &Matrix,
        targets: &[usize],
        controls: &[usize],
    ) {
        let offsets: Vec<usize> = (0..matrix.dim())
            .map(|sub| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (sub >> (targets.len() - 1 - i)) & 1 == 1)
                    .fold(0, |acc, (_, &q)| acc | self.mask(q))
            })
            .collect();
        let tmask = offsets[offsets.len() - 1];
        let cmask = self.control_mask(controls);
        let chunk = self.chunk_len(tmask);
        let dim = matrix.dim();
        if dim == 2 {
            let &[m00, m01, m10, m11] = matrix.data() else {
                unreachable!("2x2 matrix")
            };
            exec::for_each_chunk_mut(self.exec, &mut self.amplitudes, chunk, |ci, amps| {
                let base = ci * chunk;
                for local in 0..amps.len() {
                    let g = base + local;
                    if g & tmask != 0 || g & cmask != cmask {
                        continue;
                    }
                    let (a0, a1) = (amps[local], amps[local + tmask]);
                    amps[local] = m00 * a0 + m01 * a1;
                    amps[local + tmask] = m10 * a0 + m11 * a1;
                }
            });
            return;
        }
        exec::for_each_chunk_mut(self.exec, &mut self.amplitudes, chunk, |ci, amps| {
            let base = ci * chunk;
            let mut scratch = vec![ZERO; dim];
            for local in 0..amps.len() {
                let g = base + local;
                if g & tmask != 0 || g & cmask != cmask {
                    continue;
                }
                for (s, off) in scratch.iter_mut().zip(&offsets) {
                    *s = amps[local + off];
                }
                for (r, off) in offsets.iter().enumerate() {
                    let row = &matrix.data()[r * dim..(r + 1) * dim];
                    amps[local + off] = row.iter().zip(&scratch).map(|(a, b)| a * b).sum();
                }
            }
        });
    }

    /// Multiplies each amplitude by `phases[sub]`, where `sub` is the value of
    /// `targets`, on the branches where all `controls` are `|1>`.
    pub fn apply_diagonal(
        &mut self,
        phases: &[Complex64],
        targets: &[usize],
        controls: &[usize],
    ) -> Result<()> {
        if phases.len() != 1 << targets.len() {
            return Err(Error::LengthMismatch {
                expected: 1 << targets.len(),
                found: phases.len(),
            });
        }
        self.check_indices(targets, controls)?;
        if let Some(bad) = phases.iter().find(|p| (p.norm() - 1.0).abs() > UNITARY_TOL) {
            return Err(Error::NonUnitary {
                deviation: (bad.norm() - 1.0).abs(),
            });
        }
        self.apply_diagonal_unchecked(phases, targets, controls);
        Ok(())
    }

    pub(crate) fn apply_diagonal_unchecked(
        &mut self,
        phases: &[Complex64],
        targets: &[usize],
        controls: &[usize],
    ) {
        let masks: Vec<usize> = targets.iter().map(|&q| self.mask(q)).collect();
        let cmask = self.control_mask(controls);
        let chunk = MIN_PAR_CHUNK.min(self.dim());
        if let (&[tmask], &[p0, p1]) = (masks.as_slice(), phases) {
            let skip_zero = p0 == ONE;
            exec::for_each_chunk_mut(self.exec, &mut self.amplitudes, chunk, |ci, amps| {
                let base = ci * chunk;
                for (local, a) in amps.iter_mut().enumerate() {
                    let g = base + local;
                    if g & cmask != cmask {
                        continue;
                    }
                    if g & tmask != 0 {
                        *a *= p1;
                    } else if !skip_zero {
                        *a *= p0;
                    }
                }
            });
            return;
        }
        exec::for_each_chunk_mut(self.exec, &mut self.amplitudes, chunk, |ci, amps| {
            let base = ci * chunk;
            for (local, a) in amps.iter_mut().enumerate() {
                let g = base + local;
                if g & cmask != cmask {
                    continue;
                }
                let sub = masks
                    .iter()
                    .fold(0usize, |acc, &m| (acc << 1) | usize::from(g & m != 0));
                *a *= phases[sub];
            }
        });
    }

    /// Replaces amplitude `i` with the amplitude previously at `perm⁻¹(i)`,
    /// i.e. basis state `|i>` moves to `|perm(i)>`. `perm` must be a bijection.
    pub fn apply_permutation<F>(&mut self, perm: F)
    where
        F: Fn(usize) -> usize,
    {
        let mut next = vec![ZERO; self.dim()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            next[perm(i)] = *a;
        }
        self.amplitudes = next;
    }

    /// Multiplies the whole state by `e^{2πi·fraction}`.
    pub fn apply_global_phase(&mut self, fraction: f64) {
        if fraction == 0.0 {
            return;
        }
        let p = Complex64::cis(std::f64::consts::TAU * fraction);
        self.amplitudes.iter_mut().for_each(|a| *a *= p);
    }

    /// Marginal distribution over `qubits` (first qubit is the most
    /// significant bit of the outcome).
    pub fn probabilities(&self, qubits: &[usize]) -> Result<Distribution> {
        if qubits.is_empty() {
            return Err(Error::EmptySubset);
        }
        self.check_indices(qubits, &[])?;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (g, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let sub = masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(g & m != 0));
            probs[sub] += p;
        }
        Ok(Distribution::from_probs(probs))
    }

    /// Full distribution over all qubits.
    pub fn full_probabilities(&self) -> Distribution {
        Distribution::from_probs(self.amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Draws `shots` measurement outcomes of `qubits`; deterministic in `seed`.
    pub fn sample(&self, qubits: &[usize], shots: u64, seed: u64) -> Result<MeasurementHistogram> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let dist = self.probabilities(qubits)?;
        sample_distribution(&dist, shots, seed, self.exec)
    }

    /// Largest elementwise amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn x() -> Matrix {
        Matrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn h() -> Matrix {
        let s = FRAC_1_SQRT_2;
        Matrix::from_real(2, &[s, s, s, -s]).unwrap()
    }

    #[test]
    fn zero_state() {
        let s = StateVector::new_zero(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);
        let s = StateVector::new_zero(2).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(matches!(
            StateVector::new_zero(25),
            Err(Error::QubitCount { .. })
        ));
        assert!(StateVector::new_zero(0).is_err());
    }

    #[test]
    fn basis_init() {
        let mut s = StateVector::new_zero(2).unwrap();
        s.init_basis("01").unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0));
        s.init_basis("10").unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0));
        assert_eq!(s.amplitudes()[1], c(0.0));
        assert!(matches!(
            s.init_basis("101"),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(s.init_basis("1x").is_err());
    }

    #[test]
    fn amplitude_init_normalises() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.init_real_amplitudes(&[1.0, 1.0]).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        s.init_real_amplitudes(&[3.0, 4.0]).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);
        assert!(matches!(
            s.init_real_amplitudes(&[0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(s.init_real_amplitudes(&[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn basic_gates() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_unitary(&x(), &[0], &[]).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0)]);

        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_unitary(&h(), &[0], &[]).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);

        // control = qubit 0 in |1>, target qubit 1 in |0>.
        let mut s = StateVector::new_zero(2).unwrap();
        s.init_basis("10").unwrap();
        s.apply_unitary(&x(), &[1], &[0]).unwrap();
        assert_eq!(s.amplitudes()[3], c(1.0));
        // control in |0>: nothing happens.
        s.init_basis("01").unwrap();
        s.apply_unitary(&x(), &[1], &[0]).unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0));
    }

    #[test]
    fn gate_errors() {
        let mut s = StateVector::new_zero(2).unwrap();
        assert!(matches!(
            s.apply_unitary(&x(), &[0], &[0]),
            Err(Error::QubitCollision(0))
        ));
        assert!(matches!(
            s.apply_unitary(&x(), &[2], &[]),
            Err(Error::QubitIndex { .. })
        ));
        let bad = Matrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            s.apply_unitary(&bad, &[0], &[]),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn marginals() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_unitary(&h(), &[0], &[]).unwrap();
        let d = s.probabilities(&[0]).unwrap();
        assert!((d.probability("0").unwrap() - 0.5).abs() < 1e-12);
        assert!((d.probability("1").unwrap() - 0.5).abs() < 1e-12);

        let mut s = StateVector::new_zero(2).unwrap();
        s.init_basis("10").unwrap();
        let d = s.probabilities(&[0]).unwrap();
        assert_eq!(d.probability("1").unwrap(), 1.0);
        assert_eq!(d.probability("0").unwrap(), 0.0);

        let mut bell = StateVector::new_zero(2).unwrap();
        bell.apply_unitary(&h(), &[0], &[]).unwrap();
        bell.apply_unitary(&x(), &[1], &[0]).unwrap();
        let d = bell.probabilities(&[1]).unwrap();
        assert!((d.get(0) - 0.5).abs() < 1e-12);
        assert!((d.get(1) - 0.5).abs() < 1e-12);
        assert!(matches!(bell.probabilities(&[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn sampling() {
        let mut one = StateVector::new_zero(1).unwrap();
        one.init_basis("1").unwrap();
        let h1 = one.sample(&[0], 8192, 1).unwrap();
        assert_eq!(h1.count("1"), 8192);
        assert_eq!(h1.shots, 8192);

        let mut plus = StateVector::new_zero(1).unwrap();
        plus.apply_unitary(&h(), &[0], &[]).unwrap();
        let a = plus.sample(&[0], 8192, 7).unwrap();
        let f0 = a.frequency("0");
        assert!((0.48..=0.52).contains(&f0), "{f0}");
        let b = plus.sample(&[0], 8192, 7).unwrap();
        assert_eq!(a, b);
        assert!(matches!(plus.sample(&[0], 0, 7), Err(Error::ZeroShots)));
    }

    #[test]
    fn sampling_independent_of_execution_policy() {
        let mut s = StateVector::new_zero(3).unwrap();
        for q in 0..3 {
            s.apply_unitary(&h(), &[q], &[]).unwrap();
        }
        let par = s
            .clone()
            .with_execution(Execution::Parallel)
            .sample(&[0, 1, 2], 10_000, 3)
            .unwrap();
        let seq = s
            .with_execution(Execution::Sequential)
            .sample(&[0, 1, 2], 10_000, 3)
            .unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn permutation_moves_basis_states() {
        let mut s = StateVector::new_zero(2).unwrap();
        s.init_basis("01").unwrap();
        s.apply_permutation(|i| i ^ 0b11);
        assert_eq!(s.amplitudes()[2], c(1.0));
    }

    #[test]
    fn bitstring_helpers() {
        assert_eq!(to_bitstring(5, 3), "101");
        assert_eq!(to_bitstring(1, 4), "0001");
        assert_eq!(parse_bitstring("101").unwrap(), 5);
        assert!(parse_bitstring("").is_err());
        assert!(parse_bitstring("12").is_err());
    }

    #[test]
    fn histogram_mode_and_csv() {
        let mut h = MeasurementHistogram::new();
        h.record("01".into(), 3);
        h.record("10".into(), 5);
        h.record("11".into(), 0);
        assert_eq!(h.mode(), Some("10"));
        assert_eq!(h.shots, 8);
        assert_eq!(h.to_csv(), "bitstring,count\n01,3\n10,5\n");
    }
}
