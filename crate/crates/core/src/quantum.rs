//! Small dense state-vector toolkit used to build the quantum correlation boxes.
//!
//! Qubit 0 is the most significant bit of a basis index, so in a tensor
//! product `a ⊗ b` the factor `a` owns the high-order qubits.

use alloc::{format, vec, vec::Vec};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

const NORM_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-10;
const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Builds a normalized state; the length must be a power of two.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if !is_power_of_two(amplitudes.len()) || amplitudes.len() < 2 {
            return Err(invalid(
                "amplitudes",
                format!("length {} is not a power of two >= 2", amplitudes.len()),
            ));
        }
        let state = Self { amplitudes };
        let deviation = (state.norm_sqr() - 1.0).abs();
        if deviation > NORM_TOLERANCE {
            return Err(Error::NotStochastic {
                what: "state vector",
                deviation,
            });
        }
        Ok(state)
    }

    /// Computational basis state `|index⟩` on `qubits` qubits.
    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector { amplitudes }
    }

    /// Applies `u` to the contiguous block of qubits starting at `first`,
    /// i.e. `I ⊗ u ⊗ I` with `u` acting on qubits `first..first + k`.
    pub fn apply_local_unitary(&self, u: &UnitaryMatrix, first: usize) -> Result<StateVector> {
        let k = u.qubits();
        let n = self.qubits();
        if first + k > n {
            return Err(Error::DimensionMismatch {
                what: "unitary block exceeds state",
                expected: n,
                found: first + k,
            });
        }
        let shift = n - first - k;
        let block_mask = ((1usize << k) - 1) << shift;
        let dim = u.dim();
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        for (i, slot) in out.iter_mut().enumerate() {
            let row = (i & block_mask) >> shift;
            let rest = i & !block_mask;
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..dim {
                acc += u.entry(row, col) * self.amplitudes[rest | (col << shift)];
            }
            *slot = acc;
        }
        Ok(StateVector { amplitudes: out })
    }

    /// Born probabilities of every computational basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Square unitary matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl UnitaryMatrix {
    /// Checks `U U† = I` elementwise within 1e-10.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if !is_power_of_two(dim) || dim < 2 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                what: "unitary entries",
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let m = Self { dim, entries };
        let deviation = m.unitarity_deviation();
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary(deviation));
        }
        Ok(m)
    }

    /// Scaled real/imaginary rows, as matrices are usually printed.
    pub fn from_rows(scale: f64, rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&z| z * scale))
            .collect::<Vec<_>>();
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn hadamard() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            dim: 2,
            entries: vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            dim: 2,
            entries: vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        }
    }

    /// `|0⟩ → |0⟩`, `|1⟩ → e^{iθ}|1⟩`.
    pub fn phase(theta: f64) -> Self {
        Self {
            dim: 2,
            entries: vec![
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(libm::cos(theta), libm::sin(theta)),
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn tensor(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        let dim = self.dim * other.dim;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.entry(r1, c1);
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        entries[(r1 * other.dim + r2) * dim + c1 * other.dim + c2] =
                            a * other.entry(r2, c2);
                    }
                }
            }
        }
        UnitaryMatrix { dim, entries }
    }

    pub fn matmul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        let dim = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for col in 0..dim {
                entries[r * dim + col] = (0..dim).map(|k| self.entry(r, k) * other.entry(k, col)).sum();
            }
        }
        UnitaryMatrix { dim, entries }
    }

    /// `max |(U U†)_{ij} - δ_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for col in 0..self.dim {
                let dot: C64 = (0..self.dim)
                    .map(|k| self.entry(r, k) * self.entry(col, k).conj())
                    .sum();
                let target = if r == col { 1.0 } else { 0.0 };
                worst = worst.max((dot - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Qubit observable with eigenvalues ±1 (a 2x2 Hermitian involution).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    entries: [C64; 4],
}

impl Observable {
    pub fn new(entries: [C64; 4]) -> Result<Self> {
        let herm = (entries[0] - entries[0].conj())
            .norm()
            .max((entries[3] - entries[3].conj()).norm())
            .max((entries[1] - entries[2].conj()).norm());
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(herm));
        }
        Ok(Self { entries })
    }

    pub fn pauli_z() -> Self {
        Self {
            entries: [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            entries: [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        }
    }

    /// Real linear combination `α A + β B`.
    pub fn combine(alpha: f64, a: &Observable, beta: f64, b: &Observable) -> Result<Self> {
        let mut entries = [C64::new(0.0, 0.0); 4];
        for (i, slot) in entries.iter_mut().enumerate() {
            *slot = a.entries[i] * alpha + b.entries[i] * beta;
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[C64; 4] {
        &self.entries
    }

    /// Eigenprojector `(I ± O)/2`; outcome 0 is eigenvalue +1.
    fn projector(&self, outcome: usize) -> [C64; 4] {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        let id = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let mut p = [C64::new(0.0, 0.0); 4];
        for i in 0..4 {
            p[i] = (id[i] + self.entries[i] * sign) * 0.5;
        }
        p
    }

    /// `max |O² - I|`; zero for a valid ±1 observable.
    fn involution_deviation(&self) -> f64 {
        let e = &self.entries;
        let sq = [
            e[0] * e[0] + e[1] * e[2],
            e[0] * e[1] + e[1] * e[3],
            e[2] * e[0] + e[3] * e[2],
            e[2] * e[1] + e[3] * e[3],
        ];
        let id = [1.0, 0.0, 0.0, 1.0];
        sq.iter()
            .zip(id)
            .map(|(z, t)| (z - C64::new(t, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// Joint computational-basis outcome distribution with per-player blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable {
    blocks: Vec<usize>,
    probabilities: Vec<f64>,
}

impl OutcomeTable {
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    /// Probabilities indexed by basis index (player outcomes concatenated).
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Per-player outcomes of a basis index.
    pub fn outcomes(&self, basis_index: usize) -> Vec<usize> {
        let mut rest = basis_index;
        let mut out = vec![0; self.blocks.len()];
        for (slot, &size) in out.iter_mut().zip(&self.blocks).rev() {
            *slot = rest & ((1 << size) - 1);
            rest >>= size;
        }
        out
    }

    pub fn probability(&self, outcomes: &[usize]) -> f64 {
        let index = outcomes
            .iter()
            .zip(&self.blocks)
            .fold(0, |acc, (&o, &size)| (acc << size) | o);
        self.probabilities[index]
    }

    pub fn marginal(&self, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.blocks[player]];
        for (i, &p) in self.probabilities.iter().enumerate() {
            out[self.outcomes(i)[player]] += p;
        }
        out
    }
}

/// Measures every qubit in the computational basis; `blocks[k]` is the number
/// of qubits held by player `k` (in order, high-order first).
pub fn measurement_distribution(state: &StateVector, blocks: &[usize]) -> Result<OutcomeTable> {
    let total: usize = blocks.iter().sum();
    if total != state.qubits() {
        return Err(Error::DimensionMismatch {
            what: "measurement blocks",
            expected: state.qubits(),
            found: total,
        });
    }
    Ok(OutcomeTable {
        blocks: blocks.to_vec(),
        probabilities: state.probabilities(),
    })
}

/// Joint distribution `P(a, b)` of two ±1 observables on a two-qubit state,
/// eigenvalue +1 labelled 0 and −1 labelled 1.
pub fn projective_binary_measurement(
    state: &StateVector,
    first: &Observable,
    second: &Observable,
) -> Result<[[f64; 2]; 2]> {
    if state.qubits() != 2 {
        return Err(Error::DimensionMismatch {
            what: "two-qubit state",
            expected: 2,
            found: state.qubits(),
        });
    }
    for o in [first, second] {
        let dev = o.involution_deviation();
        if dev > 1e-10 {
            return Err(invalid("observable", format!("eigenvalues are not ±1 (|O²-I| = {dev:e})")));
        }
    }
    let amps = state.amplitudes();
    let mut out = [[0.0; 2]; 2];
    for (a, row) in out.iter_mut().enumerate() {
        let pa = first.projector(a);
        for (b, slot) in row.iter_mut().enumerate() {
            let pb = second.projector(b);
            // ⟨ψ| Pa ⊗ Pb |ψ⟩
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..4 {
                let (ri, si) = (i >> 1, i & 1);
                for j in 0..4 {
                    let (rj, sj) = (j >> 1, j & 1);
                    acc += amps[i].conj() * pa[ri * 2 + rj] * pb[si * 2 + sj] * amps[j];
                }
            }
            *slot = acc.re;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn tensor_examples() {
        let zero = StateVector::basis(1, 0);
        assert_eq!(zero.tensor(&zero).amplitudes(), StateVector::basis(2, 0).amplitudes());
        let plus = zero.apply_local_unitary(&UnitaryMatrix::hadamard(), 0).unwrap();
        let v = plus.tensor(&StateVector::basis(1, 1));
        let expected = [0.0, H, 0.0, H];
        for (a, e) in v.amplitudes().iter().zip(expected) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
        let i2 = UnitaryMatrix::identity(2);
        assert_eq!(i2.tensor(&i2), UnitaryMatrix::identity(4));
    }

    #[test]
    fn local_unitary_examples() {
        let s = StateVector::basis(2, 0);
        assert_eq!(s.apply_local_unitary(&UnitaryMatrix::identity(2), 1).unwrap(), s);
        let flipped = s.apply_local_unitary(&UnitaryMatrix::pauli_x(), 0).unwrap();
        assert_eq!(flipped, StateVector::basis(2, 0b10));
        let flipped = s.apply_local_unitary(&UnitaryMatrix::pauli_x(), 1).unwrap();
        assert_eq!(flipped, StateVector::basis(2, 0b01));
        assert!(s.apply_local_unitary(&UnitaryMatrix::identity(4), 1).is_err());
    }

    #[test]
    fn local_unitary_matches_kronecker() {
        let u = UnitaryMatrix::hadamard().matmul(&UnitaryMatrix::phase(0.3));
        let amps: Vec<C64> = (0..8).map(|i| c(i as f64 + 1.0, 0.5 * i as f64)).collect();
        let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
        let s = StateVector::new(amps.iter().map(|a| a / norm).collect()).unwrap();
        let full = UnitaryMatrix::identity(2)
            .tensor(&u)
            .tensor(&UnitaryMatrix::identity(2));
        let direct = s.apply_local_unitary(&u, 1).unwrap();
        for r in 0..8 {
            let expect: C64 = (0..8).map(|k| full.entry(r, k) * s.amplitudes()[k]).sum();
            assert!((expect - direct.amplitudes()[r]).norm() < 1e-12);
        }
        assert!((direct.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = UnitaryMatrix::new(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(bad, Err(Error::NotUnitary(_))));
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn measurement_examples() {
        let t = measurement_distribution(&StateVector::basis(2, 0), &[1, 1]).unwrap();
        assert_eq!(t.probability(&[0, 0]), 1.0);
        let bell = StateVector::new(vec![c(H, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(H, 0.0)]).unwrap();
        let t = measurement_distribution(&bell, &[1, 1]).unwrap();
        assert!((t.probability(&[0, 0]) - 0.5).abs() < 1e-15);
        assert!((t.probability(&[1, 1]) - 0.5).abs() < 1e-15);
        assert_eq!(t.marginal(0).len(), 2);
        assert!(measurement_distribution(&bell, &[1]).is_err());
    }

    #[test]
    fn binary_measurement_examples() {
        let z = Observable::pauli_z();
        let p = projective_binary_measurement(&StateVector::basis(2, 0), &z, &z).unwrap();
        assert!((p[0][0] - 1.0).abs() < 1e-15);
        let x = Observable::pauli_x();
        let b0 = Observable::combine(-H, &z, -H, &x).unwrap();
        let bell = StateVector::new(vec![c(H, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(H, 0.0)]).unwrap();
        let p = projective_binary_measurement(&bell, &z, &b0).unwrap();
        // closed form: P(a = b) = (1 + ⟨Z ⊗ B0⟩)/2 with ⟨Z ⊗ B0⟩ = -1/√2
        let same = p[0][0] + p[1][1];
        assert!((same - (1.0 - H) / 2.0).abs() < 1e-12);
        for a in 0..2 {
            assert!((p[a][0] + p[a][1] - 0.5).abs() < 1e-12);
            assert!((p[0][a] + p[1][a] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let e = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(Observable::new(e), Err(Error::NotHermitian(_))));
        let two = Observable::combine(1.0, &Observable::pauli_z(), 1.0, &Observable::pauli_z()).unwrap();
        let bell = StateVector::basis(2, 0);
        assert!(projective_binary_measurement(&bell, &two, &Observable::pauli_z()).is_err());
    }
}
