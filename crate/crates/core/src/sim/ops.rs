//! Operators on the simulated registers: unfolding permutations, the Hermitian
//! extension, the one-sparse SWAP-like operator and its exponential, and the
//! sample-based density-matrix exponentiation channel.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{expm_hermitian, kron, CMatrix, CVector, ONE, ZERO};
use crate::tensor::{unfold, DenseTensor};

use super::density::{partial_trace, DensityMatrix};

/// Hermitian matrix stored by its nonzero entries (both triangles).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    /// Builds from entries; each `(r, c, v)` with `r != c` must come with its
    /// conjugate partner. Entries are sorted by `(r, c)`.
    pub fn from_entries(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if entries.iter().any(|&(r, c, _)| r >= dim || c >= dim) {
            return invalid("sparse entry out of range");
        }
        entries.retain(|e| e.2 != ZERO);
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let h = Self { dim, entries };
        if h.hermitian_error() > 1e-12 {
            return invalid("entries are not Hermitian");
        }
        Ok(h)
    }

    pub fn from_dense(m: &CMatrix) -> Result<Self> {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != ZERO {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_entries(m.nrows(), entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Same operator embedded in a larger space with zero blocks.
    pub fn padded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        Self {
            dim,
            entries: self.entries.clone(),
        }
    }

    pub fn hermitian_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &(r, c, v) in &self.entries {
            let partner = self
                .entries
                .binary_search_by_key(&(c, r), |&(a, b, _)| (a, b))
                .map(|i| self.entries[i].2)
                .unwrap_or(ZERO);
            worst = worst.max((v - partner.conj()).norm());
        }
        worst
    }

    /// At most one nonzero in every row and every column.
    pub fn is_one_sparse(&self) -> bool {
        let mut rows = vec![0u8; self.dim];
        let mut cols = vec![0u8; self.dim];
        for &(r, c, _) in &self.entries {
            rows[r] += 1;
            cols[c] += 1;
            if rows[r] > 1 || cols[c] > 1 {
                return false;
            }
        }
        true
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }
}

/// Register sizes of an extension: `logical = I_k + prod_{j != k} I_j`,
/// `padded` the next power of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtensionLayout {
    pub rows: usize,
    pub logical: usize,
    pub padded: usize,
}

/// `[[0, A], [A^dagger, 0]]` of size `n + p`.
pub fn hermitian_extension(matrix: &CMatrix) -> SparseHermitian {
    let (n, p) = matrix.shape();
    let mut entries = Vec::new();
    for r in 0..n {
        for c in 0..p {
            let v = matrix[(r, c)];
            if v != ZERO {
                entries.push((r, n + c, v));
                entries.push((n + c, r, v.conj()));
            }
        }
    }
    SparseHermitian::from_entries(n + p, entries).expect("extension is Hermitian")
}

pub fn extension_layout(dims: &[usize], k: usize) -> ExtensionLayout {
    let rows = dims[k];
    let cols: usize = dims.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &d)| d).product();
    let logical = rows + cols;
    ExtensionLayout {
        rows,
        logical,
        padded: logical.next_power_of_two(),
    }
}

/// Column of entry `index` in the mode-k unfolding.
fn unfolding_column(dims: &[usize], index: &[usize], k: usize) -> usize {
    let m = dims.len();
    (1..m).fold(0, |acc, step| {
        let j = (k + step) % m;
        acc * dims[j] + index[j]
    })
}

/// `S = sum_{l,j} Ã_{lj} |j><l| (x) |l><j|` on the doubled padded space,
/// read straight from the tensor entries.
pub fn swap_like_operator(tensor: &DenseTensor, k: usize) -> Result<(SparseHermitian, ExtensionLayout)> {
    if k >= tensor.order() {
        return invalid(format!("mode {k} out of range"));
    }
    if tensor.frobenius_norm() == 0.0 {
        return Err(crate::Error::DegenerateInput("zero tensor".into()));
    }
    let layout = extension_layout(tensor.dims(), k);
    let np = layout.padded;
    let mut entries = Vec::with_capacity(2 * tensor.len());
    for (flat, &a) in tensor.data().iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let idx = tensor.multi_index(flat);
        let l = idx[k];
        let j = layout.rows + unfolding_column(tensor.dims(), &idx, k);
        // Ã_{lj} = a maps |l>|j> to |j>|l>; Ã_{jl} = conj(a) the reverse.
        entries.push((j * np + l, l * np + j, a));
        entries.push((l * np + j, j * np + l, a.conj()));
    }
    Ok((SparseHermitian::from_entries(np * np, entries)?, layout))
}

/// `exp(-i H dt)`. One-sparse operators split into invariant 2x2 blocks that
/// are exponentiated in closed form; anything else goes through a dense
/// eigendecomposition.
pub fn evolve(h: &SparseHermitian, dt: f64) -> CMatrix {
    if !h.is_one_sparse() {
        return expm_hermitian(&h.to_dense(), dt);
    }
    let mut u = CMatrix::identity(h.dim, h.dim);
    for &(r, c, v) in &h.entries {
        if r == c {
            u[(r, r)] = Complex64::from_polar(1.0, -v.re * dt);
        } else {
            let mag = v.norm();
            let (s, co) = (mag * dt).sin_cos();
            u[(r, r)] = Complex64::new(co, 0.0);
            u[(r, c)] = Complex64::new(0.0, -s / mag) * v;
        }
    }
    u
}

/// Uniform state over the first `logical` of `padded` levels.
pub fn uniform_state(logical: usize, padded: usize) -> CVector {
    let a = Complex64::new(1.0 / (logical as f64).sqrt(), 0.0);
    CVector::from_fn(padded, |i, _| if i < logical { a } else { ZERO })
}

/// `tr_1( e^{-iS dt} (rho1 (x) rho2) e^{iS dt} )`.
pub fn qpca_step(s: &SparseHermitian, rho1: &DensityMatrix, rho2: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    let n = rho2.dim();
    if rho1.dim() != n || s.dim() != n * n {
        return invalid("qPCA registers must both match the operator's factor dimension");
    }
    let v = evolve(s, dt);
    let joint = kron(rho1.matrix(), rho2.matrix());
    let out = &v * joint * v.adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(partial_trace(&out, &[n, n], &[1])?))
}

/// One exponentiation step with a fixed pure ancilla `|r>`, in Kraus form
/// `K_l = (<l| (x) I) V (|r> (x) I)`.
#[derive(Clone, Debug)]
pub struct QpcaChannel {
    pub kraus: Vec<CMatrix>,
    pub ancilla: CVector,
}

impl QpcaChannel {
    pub fn new(s: &SparseHermitian, ancilla: &CVector, dt: f64) -> Result<Self> {
        let n = ancilla.len();
        if s.dim() != n * n {
            return invalid("ancilla size does not match the operator");
        }
        let v = evolve(s, dt);
        let mut kraus = Vec::with_capacity(n);
        for l in 0..n {
            let k = CMatrix::from_fn(n, n, |a, b| {
                (0..n).map(|c| v[(l * n + a, c * n + b)] * ancilla[c]).sum()
            });
            kraus.push(k);
        }
        Ok(Self {
            kraus,
            ancilla: ancilla.clone(),
        })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.kraus.iter().map(|k| k * rho * k.adjoint()).sum()
    }

    /// Row-major superoperator of `X -> sum_l K^a_l X (K^b_l)^dagger`, where
    /// `K^1 = K` and `K^0_l = <l|r> I` (the branch that skips the step).
    pub fn block_superoperator(&self, a: bool, b: bool) -> CMatrix {
        let n = self.ancilla.len();
        let id = CMatrix::identity(n, n);
        let pick = |on: bool, l: usize| -> CMatrix {
            if on {
                self.kraus[l].clone()
            } else {
                &id * self.ancilla[l]
            }
        };
        let mut sup = CMatrix::zeros(n * n, n * n);
        for l in 0..n {
            sup += kron(&pick(a, l), &pick(b, l).map(|z| z.conj()));
        }
        sup
    }
}

/// Permutation taking `|i_1 ... i_m>` to `|i_k i_{k+1} ... i_m i_1 ... i_{k-1}>`,
/// built as a product of adjacent register swaps. All dims must be powers of two.
pub fn unfolding_swap_unitary(dims: &[usize], k: usize) -> Result<CMatrix> {
    if k >= dims.len() {
        return invalid(format!("mode {k} out of range"));
    }
    if dims.iter().any(|d| !d.is_power_of_two()) {
        return invalid(format!("dims {dims:?} must be powers of two; pad first"));
    }
    let total: usize = dims.iter().product();
    let mut order: Vec<usize> = dims.to_vec();
    let mut u = CMatrix::identity(total, total);
    // Rotate the registers right m - k times; each rotation carries the last
    // register to the front through swaps (m-2, m-1), ..., (0, 1).
    let m = dims.len();
    for _ in 0..(m - k) % m {
        for pos in (0..m - 1).rev() {
            let swap = adjacent_swap(&order, pos);
            u = swap * u;
            order.swap(pos, pos + 1);
        }
    }
    Ok(u)
}

/// Swap of registers `pos` and `pos + 1` for the register sizes `dims`.
pub fn adjacent_swap(dims: &[usize], pos: usize) -> CMatrix {
    let total: usize = dims.iter().product();
    let mut swapped = dims.to_vec();
    swapped.swap(pos, pos + 1);
    let mut p = CMatrix::zeros(total, total);
    let mut idx = vec![0; dims.len()];
    for flat in 0..total {
        let mut r = flat;
        for (slot, &d) in idx.iter_mut().zip(dims).rev() {
            *slot = r % d;
            r /= d;
        }
        idx.swap(pos, pos + 1);
        let to = idx.iter().zip(&swapped).fold(0, |acc, (&i, &d)| acc * d + i);
        p[(to, flat)] = ONE;
    }
    p
}

/// Dense `Ã^(k)` padded to `layout.padded`, for reference computations.
pub fn dense_extension(tensor: &DenseTensor, k: usize) -> Result<(CMatrix, ExtensionLayout)> {
    let layout = extension_layout(tensor.dims(), k);
    let ext = hermitian_extension(&unfold(tensor, k)?.matrix).padded(layout.padded);
    Ok((ext.to_dense(), layout))
}
