//! Quantum Fourier transform and phase estimation.
//!
//! With `M = 2^d` control levels, an eigenvector with `U|v> = e^{2 pi i f}|v>`
//! lands in bucket `y ~ f M (mod M)`. Buckets in the upper half of the ring
//! decode to negative phases.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::linalg::{unitarity_error, CMatrix, CVector};

use super::ops::QpcaChannel;

thread_local! {
    static FFT_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}
use super::state::QuantumState;

/// Unitary QFT `|x> -> M^{-1/2} sum_y e^{2 pi i x y / M} |y>`.
pub fn qft(v: &CVector) -> CVector {
    fourier(v, true)
}

pub fn inverse_qft(v: &CVector) -> CVector {
    fourier(v, false)
}

fn fourier(v: &CVector, positive: bool) -> CVector {
    let n = v.len();
    let mut buf: Vec<Complex64> = v.iter().copied().collect();
    let mut planner = FftPlanner::new();
    // rustfft's forward transform uses e^{-2 pi i xy/n}.
    let fft = if positive {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    CVector::from_iterator(n, buf.into_iter().map(|z| z * scale))
}

/// Joint control/system state after phase estimation, split by bucket.
#[derive(Clone, Debug)]
pub struct PhaseEstimate {
    pub control_qubits: usize,
    /// `p(y)`, summing to 1.
    pub probabilities: Vec<f64>,
    /// Unnormalized system state attached to each bucket; `|branch_y|^2 = p(y)`.
    pub branches: Vec<CVector>,
}

impl PhaseEstimate {
    pub fn buckets(&self) -> usize {
        self.probabilities.len()
    }

    /// Normalized residual state for bucket `y`, if that bucket has weight.
    pub fn residual(&self, y: usize) -> Option<CVector> {
        let b = &self.branches[y];
        let n = b.norm();
        (n > 0.0).then(|| b / Complex64::new(n, 0.0))
    }
}

/// Signed offset of bucket `y` on a ring of `m` buckets, in `[-m/2, m/2)`.
pub fn signed_bucket(y: usize, m: usize) -> i64 {
    let y = y as i64;
    let m = m as i64;
    if y >= m / 2 {
        y - m
    } else {
        y
    }
}

/// Phase of bucket `y` in `[-pi, pi)`.
pub fn bucket_phase(y: usize, m: usize) -> f64 {
    2.0 * PI * signed_bucket(y, m) as f64 / m as f64
}

/// Exact phase estimation of `u` on the state `psi` with `d` control qubits.
pub fn phase_estimation(u: &CMatrix, psi: &QuantumState, d: usize) -> Result<PhaseEstimate> {
    phase_estimation_vec(u, psi.amplitudes(), d)
}

pub fn phase_estimation_vec(u: &CMatrix, psi: &CVector, d: usize) -> Result<PhaseEstimate> {
    if d == 0 || d > 24 {
        return invalid(format!("control qubits must lie in 1..=24, got {d}"));
    }
    if u.nrows() != psi.len() || u.ncols() != psi.len() {
        return invalid("operator and state dimensions differ");
    }
    if unitarity_error(u) > 1e-10 {
        return invalid("phase estimation needs a unitary operator");
    }
    let m = 1usize << d;
    let n = psi.len();
    // Component c of U^x psi at buf[c * m + x].
    let mut buf = vec![Complex64::new(0.0, 0.0); n * m];
    let mut cur = psi.clone();
    let mut next = CVector::zeros(n);
    for x in 0..m {
        for c in 0..n {
            buf[c * m + x] = cur[c];
        }
        u.mul_to(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    let fft = FFT_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(m));
    let scale = 1.0 / m as f64;
    let mut branches = vec![CVector::zeros(n); m];
    for (c, col) in buf.chunks_mut(m).enumerate() {
        fft.process(col);
        for (y, z) in col.iter().enumerate() {
            branches[y][c] = z * scale;
        }
    }
    let probabilities = branches.iter().map(|b| b.norm_squared()).collect();
    Ok(PhaseEstimate {
        control_qubits: d,
        probabilities,
        branches,
    })
}

/// Bucket distribution when every application of the target unitary is
/// replaced by `steps` uses of the exponentiation channel, each consuming a
/// fresh ancilla, and the system is traced out before the inverse QFT.
///
/// Control bit `j` drives `2^j * steps` channel uses. For a pair of control
/// values `(x, x')` the coherence block evolves under the channel when both
/// bits are set, under the one-sided map when exactly one is, and not at all
/// otherwise.
pub fn channel_phase_estimation(
    channel: &QpcaChannel,
    steps: usize,
    rho: &CMatrix,
    d: usize,
) -> Result<Vec<f64>> {
    if d == 0 || d > 8 {
        return invalid(format!("density-matrix phase estimation supports 1..=8 control qubits, got {d}"));
    }
    let n = rho.nrows();
    let m = 1usize << d;
    let t11 = channel.block_superoperator(true, true);
    let t10 = channel.block_superoperator(true, false);
    let t01 = channel.block_superoperator(false, true);
    let mut p11 = Vec::with_capacity(d);
    let mut p10 = Vec::with_capacity(d);
    let mut p01 = Vec::with_capacity(d);
    let mut base11 = matrix_power(&t11, steps);
    let mut base10 = matrix_power(&t10, steps);
    let mut base01 = matrix_power(&t01, steps);
    for _ in 0..d {
        p11.push(base11.clone());
        p10.push(base10.clone());
        p01.push(base01.clone());
        base11 = &base11 * &base11;
        base10 = &base10 * &base10;
        base01 = &base01 * &base01;
    }
    let vec0 = CVector::from_iterator(n * n, (0..n * n).map(|f| rho[(f / n, f % n)]));
    let traces: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|x| {
            (0..m)
                .map(|xp| {
                    let mut v = vec0.clone();
                    for j in 0..d {
                        let (a, b) = ((x >> j) & 1 == 1, (xp >> j) & 1 == 1);
                        v = match (a, b) {
                            (true, true) => &p11[j] * v,
                            (true, false) => &p10[j] * v,
                            (false, true) => &p01[j] * v,
                            (false, false) => v,
                        };
                    }
                    (0..n).map(|i| v[i * n + i]).sum()
                })
                .collect()
        })
        .collect();
    let inv = 1.0 / (m * m) as f64;
    let probs = (0..m)
        .map(|y| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, row) in traces.iter().enumerate() {
                for (xp, c) in row.iter().enumerate() {
                    let k = ((x + m - xp) * y) % m;
                    acc += Complex64::from_polar(1.0, -2.0 * PI * k as f64 / m as f64) * c;
                }
            }
            (acc.re * inv).max(0.0)
        })
        .collect();
    Ok(probs)
}

pub fn matrix_power(a: &CMatrix, mut e: usize) -> CMatrix {
    let n = a.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}
