//! Binary-tree norm structure with quantum access.
//!
//! Every dimension is padded to a power of two and split into bits. The tree is
//! walked from the last index to the first: the bits of `i_m` (most significant
//! first) come directly below the root, then the bits of `i_{m-1}`, and so on
//! down to `i_1`. A node holds the squared Frobenius norm of all entries below
//! it, so the nodes at the end of each index's bits are exactly the suffix
//! norms `||A(:, ..., :, i_{m-t+1}, ..., i_m)||^2`. Leaves carry signs, or a
//! real/imaginary split for complex tensors.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::CVector;
use crate::sim::state::{QuantumState, Register};
use crate::tensor::{unfold, DenseTensor};

#[derive(Clone, Debug, PartialEq)]
pub enum Leaves {
    /// One sign per entry, `+1` for zeros.
    Real { sign: Vec<f64> },
    /// Squared real and imaginary parts with their signs.
    Complex {
        re_sq: Vec<f64>,
        im_sq: Vec<f64>,
        re_sign: Vec<f64>,
        im_sign: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QRamTree {
    dims: Vec<usize>,
    /// Bits per mode, `ceil(log2 I_k)`.
    bits: Vec<usize>,
    /// `nodes[b]` has `2^b` entries; `nodes[0]` is the root.
    nodes: Vec<Vec<f64>>,
    leaves: Leaves,
}

fn sign_of(x: f64) -> f64 {
    if x.is_sign_negative() {
        -1.0
    } else {
        1.0
    }
}

impl QRamTree {
    pub fn build(tensor: &DenseTensor) -> Result<Self> {
        if tensor.frobenius_norm() == 0.0 {
            return Err(Error::DegenerateInput(
                "zero tensor has no amplitude encoding".into(),
            ));
        }
        let dims = tensor.dims().to_vec();
        let bits: Vec<usize> = dims
            .iter()
            .map(|&d| d.next_power_of_two().trailing_zeros() as usize)
            .collect();
        let total_bits: usize = bits.iter().sum();
        let mut leaf_weights = vec![0.0; 1 << total_bits];
        let complex = !tensor.is_real();
        let n = tensor.len();
        let mut sign = vec![1.0; n];
        let (mut re_sq, mut im_sq) = (vec![0.0; n], vec![0.0; n]);
        let (mut re_sign, mut im_sign) = (vec![1.0; n], vec![1.0; n]);
        for (flat, z) in tensor.data().iter().enumerate() {
            let path = path_index(&bits, &tensor.multi_index(flat));
            if complex {
                re_sq[flat] = z.re * z.re;
                im_sq[flat] = z.im * z.im;
                re_sign[flat] = sign_of(z.re);
                im_sign[flat] = sign_of(z.im);
                leaf_weights[path] = re_sq[flat] + im_sq[flat];
            } else {
                sign[flat] = sign_of(z.re);
                leaf_weights[path] = z.re * z.re;
            }
        }
        let mut nodes = vec![Vec::new(); total_bits + 1];
        nodes[total_bits] = leaf_weights;
        for b in (0..total_bits).rev() {
            let child = &nodes[b + 1];
            let level: Vec<f64> = (0..1 << b).map(|i| child[2 * i] + child[2 * i + 1]).collect();
            nodes[b] = level;
        }
        let leaves = if complex {
            Leaves::Complex {
                re_sq,
                im_sq,
                re_sign,
                im_sign,
            }
        } else {
            Leaves::Real { sign }
        };
        Ok(Self {
            dims,
            bits,
            nodes,
            leaves,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.leaves, Leaves::Complex { .. })
    }

    pub fn leaves(&self) -> &Leaves {
        &self.leaves
    }

    /// Node weights per bit depth, root first.
    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn root(&self) -> f64 {
        self.nodes[0][0]
    }

    fn depth(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `||A(:, ..., :, i_{m-t+1}, ..., i_m)||^2` for the given trailing indices.
    pub fn suffix_norm_sq(&self, suffix: &[usize]) -> Result<f64> {
        let m = self.dims.len();
        let t = suffix.len();
        if t > m {
            return invalid("suffix longer than tensor order");
        }
        let mut node = 0usize;
        let mut depth = 0usize;
        for (offset, &i) in suffix.iter().enumerate().rev() {
            let k = m - t + offset;
            if i >= self.dims[k] {
                return invalid(format!("suffix index {i} out of range for mode {k}"));
            }
            node = (node << self.bits[k]) | i;
            depth += self.bits[k];
        }
        Ok(self.nodes[depth][node])
    }

    /// All suffix norms of length `t`, indexed row-major by `(i_{m-t+1}, ..., i_m)`.
    pub fn suffix_level(&self, t: usize) -> Result<Vec<f64>> {
        let m = self.dims.len();
        if t > m {
            return invalid("suffix longer than tensor order");
        }
        let sub = &self.dims[m - t..];
        let count: usize = sub.iter().product();
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; t];
        for f in 0..count {
            let mut r = f;
            for (slot, &d) in idx.iter_mut().zip(sub).rev() {
                *slot = r % d;
                r /= d;
            }
            out.push(self.suffix_norm_sq(&idx)?);
        }
        Ok(out)
    }

    /// Entry recovered from the leaf layer alone.
    pub fn leaf_value(&self, index: &[usize]) -> Result<Complex64> {
        let flat = flat_of(&self.dims, index)?;
        Ok(match &self.leaves {
            Leaves::Real { sign } => {
                let w = self.nodes[self.depth()][path_index(&self.bits, index)];
                Complex64::new(sign[flat] * w.sqrt(), 0.0)
            }
            Leaves::Complex {
                re_sq,
                im_sq,
                re_sign,
                im_sign,
            } => Complex64::new(re_sign[flat] * re_sq[flat].sqrt(), im_sign[flat] * im_sq[flat].sqrt()),
        })
    }

    /// Largest deviation of any interior node from the sum of its children.
    pub fn parent_sum_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for b in 0..self.depth() {
            for (i, &w) in self.nodes[b].iter().enumerate() {
                let s = self.nodes[b + 1][2 * i] + self.nodes[b + 1][2 * i + 1];
                worst = worst.max((w - s).abs());
            }
        }
        if let Leaves::Complex { re_sq, im_sq, .. } = &self.leaves {
            let leaf = &self.nodes[self.depth()];
            let mut idx = vec![0; self.dims.len()];
            for f in 0..re_sq.len() {
                multi_of(&self.dims, f, &mut idx);
                let w = leaf[path_index(&self.bits, &idx)];
                worst = worst.max((w - re_sq[f] - im_sq[f]).abs());
            }
        }
        worst
    }

    /// State `sum a_{i_1..i_m} / ||A||_F |i_1 ... i_m>` built from conditional
    /// rotations down the tree, then the leaf signs. Each mode is a register of
    /// `ceil(log2 I_k)` qubits.
    pub fn prepare_full_state(&self) -> QuantumState {
        let depth = self.depth();
        let mut amp = vec![0.0f64; 1 << depth];
        // Walk every root-to-leaf path, multiplying the rotation amplitudes
        // sqrt(child / parent) along the way.
        amp[0] = 1.0;
        let mut width = 1usize;
        for b in 0..depth {
            let mut next = vec![0.0f64; 1 << (b + 1)];
            for node in 0..width {
                let parent = self.nodes[b][node];
                if parent == 0.0 || amp[node] == 0.0 {
                    continue;
                }
                let left = self.nodes[b + 1][2 * node];
                let cos = (left / parent).sqrt().min(1.0);
                let sin = (1.0 - cos * cos).max(0.0).sqrt();
                next[2 * node] = amp[node] * cos;
                next[2 * node + 1] = amp[node] * sin;
            }
            amp.clear();
            amp.extend(next);
            width <<= 1;
        }
        let padded: Vec<usize> = self.bits.iter().map(|&b| 1 << b).collect();
        let total: usize = padded.iter().product();
        let mut v = CVector::zeros(total);
        let mut idx = vec![0; self.dims.len()];
        for flat in 0..self.dims.iter().product::<usize>() {
            multi_of(&self.dims, flat, &mut idx);
            let magnitude = amp[path_index(&self.bits, &idx)];
            let value = match &self.leaves {
                Leaves::Real { sign } => Complex64::new(sign[flat] * magnitude, 0.0),
                Leaves::Complex {
                    re_sq,
                    im_sq,
                    re_sign,
                    im_sign,
                } => {
                    let w = re_sq[flat] + im_sq[flat];
                    if w == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let c = (re_sq[flat] / w).sqrt();
                        let s = (im_sq[flat] / w).sqrt();
                        Complex64::new(re_sign[flat] * c, im_sign[flat] * s) * magnitude
                    }
                }
            };
            let pos = idx.iter().zip(&padded).fold(0, |acc, (&i, &d)| acc * d + i);
            v[pos] = value;
        }
        let registers = self
            .bits
            .iter()
            .enumerate()
            .map(|(k, &b)| Register::new(format!("i{}", k + 1), b))
            .collect();
        // Renormalize away rounding only; the tree already gives a unit vector.
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        QuantumState::new(v, registers).expect("tree amplitudes form a unit vector")
    }

    /// New tree with one entry replaced. Only the nodes on the root-to-leaf
    /// path of `index` are recomputed; the result equals a fresh build.
    pub fn update(&self, index: &[usize], value: Complex64) -> Result<Self> {
        let flat = flat_of(&self.dims, index)?;
        let mut next = self.clone();
        let becomes_complex = value.im.to_bits() != 0 && !self.is_complex();
        if becomes_complex {
            let mut t = self.to_tensor();
            t.data_mut()[flat] = value;
            return Self::build(&t);
        }
        let weight = match &mut next.leaves {
            Leaves::Real { sign } => {
                sign[flat] = sign_of(value.re);
                value.re * value.re
            }
            Leaves::Complex {
                re_sq,
                im_sq,
                re_sign,
                im_sign,
            } => {
                re_sq[flat] = value.re * value.re;
                im_sq[flat] = value.im * value.im;
                re_sign[flat] = sign_of(value.re);
                im_sign[flat] = sign_of(value.im);
                re_sq[flat] + im_sq[flat]
            }
        };
        let depth = self.depth();
        let mut node = path_index(&self.bits, index);
        next.nodes[depth][node] = weight;
        for b in (0..depth).rev() {
            node >>= 1;
            next.nodes[b][node] = next.nodes[b + 1][2 * node] + next.nodes[b + 1][2 * node + 1];
        }
        if next.root() == 0.0 {
            return Err(Error::DegenerateInput("update leaves a zero tensor".into()));
        }
        Ok(next)
    }

    /// The stored tensor, read back from the leaves.
    pub fn to_tensor(&self) -> DenseTensor {
        let mut t = DenseTensor::zeros(self.dims.clone()).expect("valid dims");
        let mut idx = vec![0; self.dims.len()];
        for flat in 0..t.len() {
            multi_of(&self.dims, flat, &mut idx);
            t.data_mut()[flat] = self.leaf_value(&idx).expect("in range");
        }
        t
    }
}

fn flat_of(dims: &[usize], index: &[usize]) -> Result<usize> {
    if index.len() != dims.len() || index.iter().zip(dims).any(|(&i, &d)| i >= d) {
        return invalid(format!("index {index:?} out of range for dims {dims:?}"));
    }
    Ok(index.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i))
}

fn multi_of(dims: &[usize], mut flat: usize, out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
}

/// Leaf position: bits of `i_m` first, then `i_{m-1}`, down to `i_1`.
fn path_index(bits: &[usize], index: &[usize]) -> usize {
    index
        .iter()
        .zip(bits)
        .rev()
        .fold(0, |acc, (&i, &b)| (acc << b) | i)
}

/// Row access to `B = A^(k)^dagger`. Row `j` of `B` is the conjugate of
/// column `j` of the mode-k unfolding; the stored row state holds the
/// conjugated row entries, which is column `j` itself, so that the isometries
/// built from it give `P^dagger Q = B / ||B||_F`. Each row and the vector of
/// row norms sit in their own trees.
#[derive(Clone, Debug)]
pub struct RowAccessor {
    mode: usize,
    row_len: usize,
    row_norms: Vec<f64>,
    row_trees: Vec<Option<QRamTree>>,
    norm_tree: QRamTree,
    frobenius: f64,
}

impl RowAccessor {
    pub fn new(tensor: &DenseTensor, mode: usize) -> Result<Self> {
        let a = unfold(tensor, mode)?.matrix;
        let frobenius = tensor.frobenius_norm();
        if frobenius == 0.0 {
            return Err(Error::DegenerateInput("zero tensor".into()));
        }
        let mut row_norms = Vec::with_capacity(a.ncols());
        let mut row_trees = Vec::with_capacity(a.ncols());
        for j in 0..a.ncols() {
            let row: Vec<Complex64> = a.column(j).iter().copied().collect();
            let t = DenseTensor::new(vec![row.len()], row)?;
            row_norms.push(t.frobenius_norm());
            row_trees.push(QRamTree::build(&t).ok());
        }
        let norm_tensor = DenseTensor::from_real(vec![row_norms.len()], &row_norms)?;
        let norm_tree = QRamTree::build(&norm_tensor)?;
        Ok(Self {
            mode,
            row_len: a.nrows(),
            row_norms,
            row_trees,
            norm_tree,
            frobenius,
        })
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn rows(&self) -> usize {
        self.row_norms.len()
    }

    pub fn row_len(&self) -> usize {
        self.row_len
    }

    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius
    }

    /// `conj(B_j) / ||B_j||` over `ceil(log2 I_k)` qubits.
    pub fn prepare_row_state(&self, j: usize) -> Result<QuantumState> {
        match self.row_trees.get(j) {
            None => invalid(format!("row {j} out of range")),
            Some(None) => Err(Error::DegenerateInput(format!("row {j} is zero"))),
            Some(Some(tree)) => Ok(tree.prepare_full_state()),
        }
    }

    /// `sum_j ||B_j|| / ||A||_F |j>`.
    pub fn prepare_norm_state(&self) -> QuantumState {
        self.norm_tree.prepare_full_state()
    }
}
