//! Seeded generators for test tensors and matrices.
//!
//! Every generator is a pure function of its seed, so fixtures can be rebuilt
//! anywhere without storing them.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{fix_column_phases, CMatrix, CVector};
use crate::tensor::{mode_multiply, DenseTensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex Gaussian tensor (unnormalized).
pub fn random_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    let mut r = rng(seed);
    let len = dims.iter().product();
    let data = (0..len).map(|_| complex_normal(&mut r)).collect();
    DenseTensor::new(dims.to_vec(), data).expect("valid dims")
}

/// Complex Gaussian tensor scaled to unit Frobenius norm.
pub fn random_unit_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    random_tensor(dims, seed).normalized().expect("nonzero").0
}

/// Real Gaussian tensor scaled to unit Frobenius norm.
pub fn random_real_unit_tensor(dims: &[usize], seed: u64) -> DenseTensor {
    let mut r = rng(seed);
    let len: usize = dims.iter().product();
    let data: Vec<f64> = (0..len).map(|_| r.sample(StandardNormal)).collect();
    DenseTensor::from_real(dims.to_vec(), &data)
        .expect("valid dims")
        .normalized()
        .expect("nonzero")
        .0
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut r))
}

pub fn random_vector(n: usize, seed: u64) -> CVector {
    let mut r = rng(seed);
    CVector::from_fn(n, |_, _| complex_normal(&mut r))
}

pub fn random_unit_vector(n: usize, seed: u64) -> CVector {
    let v = random_vector(n, seed);
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Haar-distributed unitary (QR of a Gaussian matrix with the phases of R removed).
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let qr = random_matrix(n, n, seed).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(c);
            col *= phase;
        }
    }
    q
}

/// Matrix with orthonormal columns, `rows x cols`, `cols <= rows`.
pub fn random_isometry(rows: usize, cols: usize, seed: u64) -> CMatrix {
    random_unitary(rows, seed).columns(0, cols).into_owned()
}

/// Random order and dims: order drawn from `orders`, each dim in `1..=max_dim`.
pub fn random_dims(seed: u64, orders: RangeInclusive<usize>, max_dim: usize) -> Vec<usize> {
    let mut r = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let m = r.random_range(orders);
    (0..m).map(|_| r.random_range(1..=max_dim)).collect()
}

/// Tensor of exact multilinear rank `ranks` inside `dims`, unit norm.
pub fn exact_rank_tensor(dims: &[usize], ranks: &[usize], seed: u64) -> DenseTensor {
    let mut t = random_tensor(ranks, seed);
    for (k, (&d, &r)) in dims.iter().zip(ranks).enumerate() {
        let iso = random_isometry(d, r, seed.wrapping_add(1 + k as u64));
        t = mode_multiply(&t, &iso, k).expect("shapes agree");
    }
    t.normalized().expect("nonzero").0
}

/// Tensor `S x_1 U_1 ... x_m U_m` with a prescribed mode-k spectrum pattern:
/// the core is diagonal-ish so that the given singular values appear in every mode.
pub fn tensor_with_spectrum(n: usize, order: usize, sigma: &[f64], seed: u64) -> DenseTensor {
    assert_eq!(sigma.len(), n);
    let dims = vec![n; order];
    let mut core = DenseTensor::zeros(dims.clone()).expect("valid dims");
    for (a, &s) in sigma.iter().enumerate() {
        core.set(&vec![a; order], Complex64::new(s, 0.0)).expect("in range");
    }
    let mut t = core;
    for k in 0..order {
        let u = random_unitary(n, seed.wrapping_add(k as u64));
        t = mode_multiply(&t, &u, k).expect("shapes agree");
    }
    t
}

/// Random unitary with phase-fixed columns; handy for comparing factors.
pub fn random_phase_fixed_unitary(n: usize, seed: u64) -> CMatrix {
    let mut u = random_unitary(n, seed);
    fix_column_phases(&mut u);
    u
}
