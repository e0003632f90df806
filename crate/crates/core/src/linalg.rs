//! Dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Everything here works on small dense matrices; the sizes that occur in the
//! simulators are at most a few hundred rows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Full left singular basis of `m` (rows x rows) and the singular values
/// padded with zeros to length `rows`, in nonincreasing order.
pub fn left_singular_basis(m: &CMatrix) -> (CMatrix, Vec<f64>) {
    let rows = m.nrows();
    let cols = m.ncols().max(rows);
    let mut padded = CMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (rows, m.ncols())).copy_from(m);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.resize(rows, 0.0);
    (u.columns(0, rows).into_owned(), sigma)
}

/// Singular values of `m`, nonincreasing.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in nonincreasing order.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    &scaled * vectors.adjoint()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(h: &CMatrix) -> f64 {
    eigh(h).0.iter().map(|v| v.abs()).sum()
}

/// max |U^dagger U - I| entrywise.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    max_abs_diff_identity(&g)
}

pub(crate) fn max_abs_diff_identity(g: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((g[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Rotate every column so that its largest-magnitude entry is real and
/// positive. Ties (within 1e-12 relative) go to the lowest row index.
pub fn fix_column_phases(m: &mut CMatrix) {
    for c in 0..m.ncols() {
        let mut col = m.column_mut(c);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            continue;
        }
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max * (1.0 - 1e-12))
            .unwrap_or(0);
        let phase = col[pivot] / col[pivot].norm();
        let rot = phase.conj();
        for z in col.iter_mut() {
            *z *= rot;
        }
    }
}

/// Closest unitary matrix in Frobenius norm (the unitary polar factor).
pub fn nearest_unitary(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u");
    let v_t = svd.v_t.expect("v_t");
    u * v_t
}

/// Extend the given orthonormal columns to a full orthonormal basis of C^n by
/// Gram-Schmidt against the standard basis. Returns the added columns.
pub fn orthonormal_completion(columns: &[CVector], n: usize) -> Vec<CVector> {
    let mut basis: Vec<CVector> = columns.to_vec();
    let mut added = Vec::new();
    for e in 0..n {
        if basis.len() >= n {
            break;
        }
        let mut v = CVector::zeros(n);
        v[e] = ONE;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= Complex64::from(norm);
            basis.push(v.clone());
            added.push(v);
        }
    }
    added
}

/// Largest principal angle (radians) between the column spans of `a` and `b`,
/// both assumed to have orthonormal columns and the same column count.
pub fn max_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = a.adjoint() * b;
    let s = singular_values(&overlap);
    let smallest = s.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.clamp(-1.0, 1.0).acos()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Unitary whose first column is the unit vector `v` (complex Householder).
pub fn unitary_with_first_column(v: &CVector) -> CMatrix {
    let n = v.len();
    let v0 = v[0];
    let phase = if v0.norm() > 0.0 { v0 / v0.norm() } else { ONE };
    let mut w = v.clone();
    w[0] -= phase;
    let wn = w.norm_squared();
    let mut h = CMatrix::identity(n, n);
    if wn > 1e-30 {
        h -= (&w * w.adjoint()) * Complex64::from(2.0 / wn);
    }
    // h maps phase*e0 to v; undo the phase on the first column.
    let mut out = h;
    let mut col = out.column_mut(0);
    col *= phase;
    out
}

pub fn next_power_of_two(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

pub fn log2_exact(n: usize) -> Option<usize> {
    if n.is_power_of_two() {
        Some(n.trailing_zeros() as usize)
    } else {
        None
    }
}
