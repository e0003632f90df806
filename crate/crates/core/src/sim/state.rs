use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, CVector, ONE};

/// A named group of contiguous qubits. Register 0 holds the most significant bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub qubits: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, qubits: usize) -> Self {
        Self {
            name: name.into(),
            qubits,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }
}

/// Normalized pure state over `2^n` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
    registers: Vec<Register>,
}

pub const NORM_TOL: f64 = 1e-10;

impl QuantumState {
    /// Wraps `amplitudes`; the length must be a power of two and the norm 1.
    pub fn new(amplitudes: CVector, registers: Vec<Register>) -> Result<Self> {
        let n = amplitudes.len();
        if !n.is_power_of_two() {
            return invalid(format!("state length {n} is not a power of two"));
        }
        let qubits: usize = registers.iter().map(|r| r.qubits).sum();
        if 1usize << qubits != n {
            return invalid(format!("registers cover {qubits} qubits, state has {n} amplitudes"));
        }
        if (amplitudes.norm() - 1.0).abs() > NORM_TOL {
            return invalid(format!("state norm {} is not 1", amplitudes.norm()));
        }
        Ok(Self {
            amplitudes,
            registers,
        })
    }

    /// Single-register state from raw amplitudes, padded with zeros to a power
    /// of two and normalized.
    pub fn from_unnormalized(values: &[Complex64], name: &str) -> Result<Self> {
        let dim = values.len().max(1).next_power_of_two();
        let mut v = CVector::zeros(dim);
        for (slot, z) in v.iter_mut().zip(values) {
            *slot = *z;
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(crate::Error::DegenerateInput("zero vector has no state".into()));
        }
        v /= Complex64::new(norm, 0.0);
        Self::new(v, vec![Register::new(name, dim.trailing_zeros() as usize)])
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return invalid(format!("basis index {index} out of range {dim}"));
        }
        let padded = dim.next_power_of_two();
        let mut v = CVector::zeros(padded);
        v[index] = ONE;
        Self::new(v, vec![Register::new("b", padded.trailing_zeros() as usize)])
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn apply(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return invalid("operator dimension does not match state");
        }
        Self::new(u * &self.amplitudes, self.registers.clone())
    }

    /// `|self> (x) |other>`, registers concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let a = &self.amplitudes;
        let b = &other.amplitudes;
        let v = CVector::from_fn(a.len() * b.len(), |i, _| a[i / b.len()] * b[i % b.len()]);
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self {
            amplitudes: v,
            registers: regs,
        }
    }
}
