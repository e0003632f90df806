//! Dense complex tensors and the mode-k operations on them.
//!
//! Entries are stored row-major (last index fastest). All indices are 0-based.
//! The mode-k unfolding places entry `(i_1, ..., i_m)` at row `i_k` and at the
//! column whose mixed-radix digits, most significant first, are
//! `(i_{k+1}, ..., i_m, i_1, ..., i_{k-1})`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

/// A mode-k unfolding together with the shape of the tensor it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldingMatrix {
    pub mode: usize,
    pub dims: Vec<usize>,
    pub matrix: CMatrix,
}

impl UnfoldingMatrix {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return invalid("tensor order must be at least 1");
    }
    if dims.contains(&0) {
        return invalid(format!("every dimension must be positive, got {dims:?}"));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .map_or_else(|| invalid("tensor size overflows usize"), Ok)
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return invalid(format!(
                "dims {dims:?} need {len} entries, got {}",
                data.len()
            ));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("tensor entries must be finite");
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Self {
            dims,
            data: vec![ZERO; len],
        })
    }

    pub fn from_real(dims: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(dims, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Tensor with a single unit entry at `index`.
    pub fn one_hot(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(dims)?;
        let flat = t.flat_index(index)?;
        t.data[flat] = Complex64::new(1.0, 0.0);
        Ok(t)
    }

    /// Order-2 tensor holding the entries of `m`.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (r, c) = m.shape();
        let data = (0..r * c).map(|f| m[(f / c, f % c)]).collect();
        Self {
            dims: vec![r, c],
            data,
        }
    }

    /// Inverse of [`DenseTensor::from_matrix`]; fails unless the order is 2.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.order() != 2 {
            return invalid(format!("expected an order-2 tensor, got order {}", self.order()));
        }
        let (r, c) = (self.dims[0], self.dims[1]);
        Ok(CMatrix::from_fn(r, c, |i, j| self.data[i * c + j]))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return invalid(format!(
                "index of length {} for tensor of order {}",
                index.len(),
                self.order()
            ));
        }
        let mut flat = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return invalid(format!("index {index:?} out of range for dims {:?}", self.dims));
            }
            flat = flat * d + i;
        }
        Ok(flat)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims.len()];
        for (slot, &d) in idx.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
        idx
    }

    pub fn get(&self, index: &[usize]) -> Result<Complex64> {
        Ok(self.data[self.flat_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) -> Result<()> {
        let flat = self.flat_index(index)?;
        self.data[flat] = value;
        Ok(())
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im.to_bits() == 0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Copy scaled to unit Frobenius norm. Returns the copy and the original norm.
    pub fn normalized(&self) -> Result<(Self, f64)> {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return Err(crate::Error::DegenerateInput("zero tensor".into()));
        }
        Ok((self.scale(Complex64::new(1.0 / norm, 0.0)), norm))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return invalid(format!("dims {:?} vs {:?}", self.dims, other.dims));
        }
        Ok(Self {
            dims: self.dims.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Subtensor with index `k` fixed to `alpha`, as a flat list in row-major order.
    pub fn slice_entries(&self, k: usize, alpha: usize) -> Vec<Complex64> {
        let pre: usize = self.dims[..k].iter().product();
        let suf: usize = self.dims[k + 1..].iter().product();
        let ik = self.dims[k];
        let mut out = Vec::with_capacity(pre * suf);
        for p in 0..pre {
            let base = (p * ik + alpha) * suf;
            out.extend_from_slice(&self.data[base..base + suf]);
        }
        out
    }

    /// Subtensor with index `k` fixed to `alpha`, order reduced by one
    /// (order-1 tensors give a one-element tensor).
    pub fn slice(&self, k: usize, alpha: usize) -> Result<Self> {
        if k >= self.order() || alpha >= self.dims[k] {
            return invalid(format!("slice ({k}, {alpha}) out of range for {:?}", self.dims));
        }
        let mut dims: Vec<usize> = self.dims.clone();
        dims.remove(k);
        if dims.is_empty() {
            dims.push(1);
        }
        Self::new(dims, self.slice_entries(k, alpha))
    }

    /// Zero-pad every dimension up to the next power of two.
    pub fn pad_to_power_of_two(&self) -> Self {
        let dims: Vec<usize> = self.dims.iter().map(|&d| d.next_power_of_two()).collect();
        if dims == self.dims {
            return self.clone();
        }
        let mut out = Self::zeros(dims).expect("padded dims are valid");
        for (flat, z) in self.data.iter().enumerate() {
            let idx = self.multi_index(flat);
            let f = out.flat_index(&idx).expect("index fits");
            out.data[f] = *z;
        }
        out
    }

    pub fn unfold(&self, mode: usize) -> Result<UnfoldingMatrix> {
        unfold(self, mode)
    }
}

fn mode_strides(dims: &[usize], mode: usize) -> (usize, usize, usize) {
    let pre = dims[..mode].iter().product();
    let suf = dims[mode + 1..].iter().product();
    (pre, dims[mode], suf)
}

/// Mode-k unfolding: an `I_k x prod_{j != k} I_j` matrix.
pub fn unfold(tensor: &DenseTensor, mode: usize) -> Result<UnfoldingMatrix> {
    if mode >= tensor.order() {
        return invalid(format!("mode {mode} out of range for order {}", tensor.order()));
    }
    let (pre, ik, suf) = mode_strides(&tensor.dims, mode);
    let mut m = CMatrix::zeros(ik, pre * suf);
    // Row-major flat index is (p * ik + i) * suf + s; the column is s * pre + p.
    for p in 0..pre {
        for i in 0..ik {
            let base = (p * ik + i) * suf;
            for s in 0..suf {
                m[(i, s * pre + p)] = tensor.data[base + s];
            }
        }
    }
    Ok(UnfoldingMatrix {
        mode,
        dims: tensor.dims.clone(),
        matrix: m,
    })
}

/// Inverse of [`unfold`] for a tensor of shape `dims`.
pub fn fold(matrix: &CMatrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
    check_dims(dims)?;
    if mode >= dims.len() {
        return invalid(format!("mode {mode} out of range for order {}", dims.len()));
    }
    let (pre, ik, suf) = mode_strides(dims, mode);
    if matrix.nrows() != ik || matrix.ncols() != pre * suf {
        return invalid(format!(
            "matrix {}x{} does not fold into dims {dims:?} along mode {mode}",
            matrix.nrows(),
            matrix.ncols()
        ));
    }
    let mut data = vec![ZERO; pre * ik * suf];
    for p in 0..pre {
        for i in 0..ik {
            let base = (p * ik + i) * suf;
            for s in 0..suf {
                data[base + s] = matrix[(i, s * pre + p)];
            }
        }
    }
    DenseTensor::new(dims.to_vec(), data)
}

/// `tensor x_mode matrix`, where `matrix` is `J x I_mode`.
pub fn mode_multiply(tensor: &DenseTensor, matrix: &CMatrix, mode: usize) -> Result<DenseTensor> {
    if mode >= tensor.order() {
        return invalid(format!("mode {mode} out of range for order {}", tensor.order()));
    }
    if matrix.ncols() != tensor.dims[mode] {
        return invalid(format!(
            "matrix has {} columns, mode {mode} has dimension {}",
            matrix.ncols(),
            tensor.dims[mode]
        ));
    }
    let unfolded = unfold(tensor, mode)?;
    let product = matrix * &unfolded.matrix;
    let mut dims = tensor.dims.clone();
    dims[mode] = matrix.nrows();
    fold(&product, mode, &dims)
}

/// `sum conj(a) * b` over all entries.
pub fn inner_product(a: &DenseTensor, b: &DenseTensor) -> Result<Complex64> {
    if a.dims != b.dims {
        return invalid(format!("dims {:?} vs {:?}", a.dims, b.dims));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

pub fn frobenius_norm(a: &DenseTensor) -> f64 {
    a.frobenius_norm()
}

pub fn l1_norm(a: &DenseTensor) -> f64 {
    a.l1_norm()
}

/// Rank-one tensor `v_1 o v_2 o ... o v_m`.
pub fn outer_product(vectors: &[CVector]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return invalid("outer product needs at least one vector");
    }
    if vectors.iter().any(|v| v.is_empty()) {
        return invalid("outer product factors must be nonempty");
    }
    let mut data = vec![Complex64::new(1.0, 0.0)];
    for v in vectors {
        let mut next = Vec::with_capacity(data.len() * v.len());
        for a in &data {
            next.extend(v.iter().map(|b| a * b));
        }
        data = next;
    }
    DenseTensor::new(vectors.iter().map(|v| v.len()).collect(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::max_abs_diff;
    use proptest::prelude::*;

    /// Column index computed digit by digit over the cyclic order.
    fn column_oracle(dims: &[usize], idx: &[usize], k: usize) -> usize {
        let m = dims.len();
        let mut col = 0;
        for step in 1..m {
            let j = (k + step) % m;
            col = col * dims[j] + idx[j];
        }
        col
    }

    #[test]
    fn worked_example_2x2x2_mode3() {
        let t = DenseTensor::one_hot(vec![2, 2, 2], &[1, 0, 1]).unwrap();
        let u = unfold(&t, 2).unwrap();
        assert_eq!(u.matrix[(1, 2)], Complex64::new(1.0, 0.0));
        assert_eq!(u.matrix.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn matrix_mode0_unfolding_is_itself() {
        let m = corpus::random_matrix(3, 5, 4);
        let t = DenseTensor::from_matrix(&m);
        assert_eq!(unfold(&t, 0).unwrap().matrix, m);
        assert_eq!(unfold(&t, 1).unwrap().matrix, m.transpose());
    }

    #[test]
    fn unfold_matches_digit_oracle() {
        let t = corpus::random_tensor(&[3, 4, 5], 7);
        for k in 0..3 {
            let u = unfold(&t, k).unwrap();
            assert_eq!(u.rows() * u.cols(), t.len());
            for flat in 0..t.len() {
                let idx = t.multi_index(flat);
                assert_eq!(u.matrix[(idx[k], column_oracle(t.dims(), &idx, k))], t.data()[flat]);
            }
        }
        assert_eq!(unfold(&t, 1).unwrap().matrix.shape(), (4, 15));
    }

    #[test]
    fn fold_small_cases() {
        let s = DenseTensor::new(vec![1, 1, 1], vec![Complex64::new(2.5, -1.0)]).unwrap();
        assert_eq!(fold(&unfold(&s, 1).unwrap().matrix, 1, &[1, 1, 1]).unwrap(), s);
        let m = corpus::random_matrix(2, 3, 1);
        assert_eq!(fold(&m, 0, &[2, 3]).unwrap().to_matrix().unwrap(), m);
        assert!(fold(&m, 0, &[3, 2]).is_err());
        assert!(unfold(&s, 3).is_err());
    }

    #[test]
    fn mode_multiply_matches_triple_loop() {
        let t = corpus::random_tensor(&[2, 2, 2], 3);
        let m = corpus::random_matrix(3, 2, 5);
        let out = mode_multiply(&t, &m, 0).unwrap();
        assert_eq!(out.dims(), &[3, 2, 2]);
        for j in 0..3 {
            for b in 0..2 {
                for c in 0..2 {
                    let mut acc = ZERO;
                    for a in 0..2 {
                        acc += m[(j, a)] * t.get(&[a, b, c]).unwrap();
                    }
                    assert!((out.get(&[j, b, c]).unwrap() - acc).norm() < 1e-14);
                }
            }
        }
        assert!(mode_multiply(&t, &m, 3).is_err());
        assert!(mode_multiply(&t, &corpus::random_matrix(2, 3, 1), 1).is_err());
    }

    #[test]
    fn identity_and_unitary_multiply() {
        let t = corpus::random_tensor(&[3, 2, 4], 8);
        for k in 0..3 {
            let n = t.dims()[k];
            let id = CMatrix::identity(n, n);
            assert_eq!(mode_multiply(&t, &id, k).unwrap(), t);
            let u = corpus::random_unitary(n, 30 + k as u64);
            let rotated = mode_multiply(&t, &u, k).unwrap();
            assert!((rotated.frobenius_norm() - t.frobenius_norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_products_and_norms() {
        let a = corpus::random_tensor(&[2, 3, 2], 1);
        let b = corpus::random_tensor(&[2, 3, 2], 2);
        let aa = inner_product(&a, &a).unwrap();
        assert!(aa.im.abs() < 1e-15);
        assert!((aa.re - a.frobenius_norm().powi(2)).abs() < 1e-13);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        let mut direct = ZERO;
        for f in 0..a.len() {
            direct += a.data()[f].conj() * b.data()[f];
        }
        assert!((ab - direct).norm() < 1e-14);

        let e0 = DenseTensor::one_hot(vec![2, 2], &[0, 1]).unwrap();
        let e1 = DenseTensor::one_hot(vec![2, 2], &[1, 0]).unwrap();
        assert_eq!(inner_product(&e0, &e1).unwrap(), ZERO);
        assert_eq!(e0.frobenius_norm(), 1.0);
        assert_eq!(e0.l1_norm(), 1.0);
        let z = DenseTensor::zeros(vec![3, 3]).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        assert_eq!(z.l1_norm(), 0.0);
        assert!(inner_product(&e0, &z).is_err());

        let sq: f64 = a.data().iter().map(|z| z.re * z.re + z.im * z.im).sum();
        assert!((a.frobenius_norm() - sq.sqrt()).abs() < 1e-14);
        let l1: f64 = a.data().iter().map(|z| (z.re * z.re + z.im * z.im).sqrt()).sum();
        assert!((a.l1_norm() - l1).abs() < 1e-14);
    }

    #[test]
    fn outer_product_is_rank_one() {
        let v = corpus::random_vector(3, 1);
        let single = outer_product(std::slice::from_ref(&v)).unwrap();
        assert_eq!(single.dims(), &[3]);
        assert_eq!(single.data(), v.as_slice());

        let mut e0 = CVector::zeros(2);
        e0[0] = Complex64::new(1.0, 0.0);
        let mut e1 = CVector::zeros(2);
        e1[1] = Complex64::new(1.0, 0.0);
        assert_eq!(
            outer_product(&[e0, e1]).unwrap(),
            DenseTensor::one_hot(vec![2, 2], &[0, 1]).unwrap()
        );

        let vs = [corpus::random_vector(3, 2), corpus::random_vector(2, 3), corpus::random_vector(4, 4)];
        let t = outer_product(&vs).unwrap();
        for k in 0..3 {
            let m = unfold(&t, k).unwrap().matrix;
            for r0 in 0..m.nrows() {
                for r1 in r0 + 1..m.nrows() {
                    for c0 in 0..m.ncols() {
                        for c1 in c0 + 1..m.ncols() {
                            let minor = m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
                            assert!(minor.norm() < 1e-12);
                        }
                    }
                }
            }
        }
        assert!(outer_product(&[]).is_err());
    }

    #[test]
    fn padding_preserves_entries() {
        let t = corpus::random_tensor(&[3, 2, 5], 6);
        let p = t.pad_to_power_of_two();
        assert_eq!(p.dims(), &[4, 2, 8]);
        assert!((p.frobenius_norm() - t.frobenius_norm()).abs() < 1e-15);
        assert_eq!(p.get(&[2, 1, 4]).unwrap(), t.get(&[2, 1, 4]).unwrap());
    }

    #[test]
    fn fold_unfold_identity_over_corpus() {
        let mut count = 0;
        for seed in 0..200u64 {
            let dims = corpus::random_dims(seed, 2..=4, 5);
            let t = corpus::random_tensor(&dims, seed);
            for k in 0..dims.len() {
                let back = fold(&unfold(&t, k).unwrap().matrix, k, &dims).unwrap();
                assert_eq!(back, t);
            }
            count += 1;
        }
        assert_eq!(count, 200);
    }

    fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..=5, 2..=4)
    }

    proptest! {
        #[test]
        fn prop_fold_inverts_unfold(dims in dims_strategy(), seed in any::<u64>()) {
            let t = corpus::random_tensor(&dims, seed);
            for k in 0..dims.len() {
                let back = fold(&unfold(&t, k).unwrap().matrix, k, &dims).unwrap();
                prop_assert_eq!(&back, &t);
            }
        }

        #[test]
        fn prop_mode_products_commute(dims in prop::collection::vec(1usize..=4, 3..=4), seed in any::<u64>()) {
            let t = corpus::random_tensor(&dims, seed);
            let (j, k) = (0, dims.len() - 1);
            let b = corpus::random_matrix(3, dims[j], seed ^ 1);
            let c = corpus::random_matrix(2, dims[k], seed ^ 2);
            let lhs = mode_multiply(&mode_multiply(&t, &b, j).unwrap(), &c, k).unwrap();
            let rhs = mode_multiply(&mode_multiply(&t, &c, k).unwrap(), &b, j).unwrap();
            let diff = lhs.sub(&rhs).unwrap().max_abs();
            prop_assert!(diff < 1e-12 * (1.0 + lhs.max_abs()));
        }

        #[test]
        fn prop_unitary_preserves_norm(dims in dims_strategy(), seed in any::<u64>(), k in 0usize..4) {
            let k = k % dims.len();
            let t = corpus::random_tensor(&dims, seed);
            let u = corpus::random_unitary(dims[k], seed.wrapping_add(3));
            let r = mode_multiply(&t, &u, k).unwrap();
            prop_assert!((r.frobenius_norm() - t.frobenius_norm()).abs() < 1e-12);
        }

        #[test]
        fn prop_column_formula(dims in dims_strategy(), seed in any::<u64>()) {
            let t = corpus::random_tensor(&dims, seed);
            for k in 0..dims.len() {
                let u = unfold(&t, k).unwrap();
                for flat in 0..t.len() {
                    let idx = t.multi_index(flat);
                    prop_assert_eq!(u.matrix[(idx[k], column_oracle(&dims, &idx, k))], t.data()[flat]);
                }
            }
        }
    }

    #[test]
    fn matrix_roundtrip() {
        let m = corpus::random_matrix(3, 4, 2);
        assert!(max_abs_diff(&DenseTensor::from_matrix(&m).to_matrix().unwrap(), &m) == 0.0);
    }
}
