use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{eigh, trace_norm_hermitian, CMatrix, CVector};

use super::state::QuantumState;

/// Mixed state as a dense Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Wraps `matrix` after checking trace, Hermiticity and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self { matrix };
        let v = rho.validity();
        if v.trace_error > 1e-10 || v.hermitian_error > 1e-12 || v.min_eigenvalue < -1e-10 {
            return invalid(format!("not a density matrix: {v:?}"));
        }
        Ok(rho)
    }

    /// Skips validation; callers check with [`DensityMatrix::validity`].
    pub fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(psi: &CVector) -> Self {
        Self {
            matrix: psi * psi.adjoint(),
        }
    }

    pub fn from_state(state: &QuantumState) -> Self {
        Self::pure(state.amplitudes())
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: crate::linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self {
            matrix: u * &self.matrix * u.adjoint(),
        }
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * trace_norm_hermitian(&(&self.matrix - &other.matrix))
    }

    pub fn validity(&self) -> Validity {
        let m = &self.matrix;
        let trace_error = (m.trace() - Complex64::new(1.0, 0.0)).norm();
        let hermitian_error = crate::linalg::max_abs_diff(m, &m.adjoint());
        let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = eigh(&herm).0.last().copied().unwrap_or(0.0);
        Validity {
            trace_error,
            hermitian_error,
            min_eigenvalue,
        }
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self {
            matrix: partial_trace(&self.matrix, dims, keep)?,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Validity {
    pub trace_error: f64,
    pub hermitian_error: f64,
    pub min_eigenvalue: f64,
}

/// Partial trace of `rho` over a system split into subsystems of sizes
/// `dims` (first subsystem most significant), keeping the subsystems listed
/// in `keep` in ascending order.
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return invalid(format!(
            "subsystem dims {dims:?} do not partition a {}x{} matrix",
            rho.nrows(),
            rho.ncols()
        ));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return invalid(format!("keep list {keep:?} must be ascending subsystem indices"));
    }
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kd: usize = kept_dims.iter().product();
    let td: usize = traced_dims.iter().product();

    let compose = |kept: usize, tr: usize| -> usize {
        let mut digits = vec![0usize; dims.len()];
        let mut r = kept;
        for (slot, &d) in keep.iter().zip(&kept_dims).rev() {
            digits[*slot] = r % d;
            r /= d;
        }
        let mut r = tr;
        for (slot, &d) in traced.iter().zip(&traced_dims).rev() {
            digits[*slot] = r % d;
            r /= d;
        }
        digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
    };

    let mut out = CMatrix::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..td {
                acc += rho[(compose(a, t), compose(b, t))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}
