//! Quantum HOSVD through singular value estimation.
//!
//! For mode `k` let `B = A^(k)^dagger` (`J x I_k`, `J = prod_{j != k} I_j`).
//! Two isometries built from qRAM row access, `P|j> = |j>|c_j>` and
//! `Q|i> = |b>|i>`, satisfy `P^dagger Q = B / ||A||_F`, so the unitary
//! `W = (2PP^dagger - I)(2QQ^dagger - I)` has eigenphases `+-theta` with
//! `cos(theta/2) = sigma / ||A||_F` on the plane through `Q|u>`, where `u` is
//! a right singular vector of `B`, that is a left singular vector of
//! `A^(k)`. Phase estimation of `W` from `Q|i>` over all basis inputs yields
//! the factor matrix with no assumption on the rank of the unfolding.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::alg1::{polish, quantum_core};
use crate::collate::{collate, fold, CollateConfig, Collated, RunReadout};
use crate::error::{invalid, Error, Result};
use crate::hosvd::HosvdResult;
use crate::linalg::{max_abs_diff_identity, unitarity_error, unitary_with_first_column, CMatrix, CVector, ONE};
use crate::qram::RowAccessor;
use crate::sim::phase::{phase_estimation_vec, PhaseEstimate};
use crate::sim::state::QuantumState;
use crate::tensor::DenseTensor;

/// Operators for one mode. Registers are `|j>` (rows of `B`, `n1` levels)
/// followed by `|i>` (columns, `n2` levels); flat index `j * n2 + i`.
#[derive(Clone, Debug)]
pub struct QsveOperators {
    pub mode: usize,
    pub rows: usize,
    pub cols: usize,
    pub n1: usize,
    pub n2: usize,
    pub norm: f64,
    pub p: CMatrix,
    pub q: CMatrix,
    pub u_p: CMatrix,
    pub u_q: CMatrix,
    pub g_p: CMatrix,
    pub g_q: CMatrix,
    pub w: CMatrix,
}

impl QsveOperators {
    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    /// `2PP^dagger - I` from the projector.
    pub fn reflection_p(&self) -> CMatrix {
        reflection(&self.p)
    }

    pub fn reflection_q(&self) -> CMatrix {
        reflection(&self.q)
    }

    /// `|P^dagger P - I|` and `|Q^dagger Q - I|`, largest entry.
    pub fn isometry_error(&self) -> (f64, f64) {
        (
            max_abs_diff_identity(&(self.p.adjoint() * &self.p)),
            max_abs_diff_identity(&(self.q.adjoint() * &self.q)),
        )
    }

    /// Eigenphases of `W` in `[0, pi]` seen from the column space of `Q`,
    /// with their decoded singular values. `span{Q, PP^dagger Q}` is invariant
    /// under both reflections, so `W` is diagonalized on that span only.
    pub fn exact_phases(&self) -> Vec<(f64, f64)> {
        let pq = &self.p * (self.p.adjoint() * &self.q);
        let q = self.q.columns(0, self.cols);
        let pq = pq.columns(0, self.cols);
        let mut stacked = CMatrix::zeros(self.dim(), 2 * self.cols);
        stacked.columns_mut(0, self.cols).copy_from(&q);
        stacked.columns_mut(self.cols, self.cols).copy_from(&pq);
        let svd = stacked.svd(true, false);
        let basis = svd.u.expect("requested");
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-9)
            .collect();
        let v = basis.select_columns(&keep);
        let reduced = v.adjoint() * &self.w * &v;
        reduced
            .schur()
            .eigenvalues()
            .expect("triangular Schur form over the complex field")
            .iter()
            .map(|z| {
                let theta = z.arg().abs();
                (theta, self.norm * (theta / 2.0).cos())
            })
            .collect()
    }
}

fn reflection(iso: &CMatrix) -> CMatrix {
    let n = iso.nrows();
    (iso * iso.adjoint()) * Complex64::new(2.0, 0.0) - CMatrix::identity(n, n)
}

/// `2 (|0><0| on the selected register) - I`.
fn zero_reflection(n1: usize, n2: usize, on_second: bool) -> CMatrix {
    let n = n1 * n2;
    CMatrix::from_fn(n, n, |r, c| {
        if r != c {
            return Complex64::new(0.0, 0.0);
        }
        let zero = if on_second { r % n2 == 0 } else { r / n2 == 0 };
        if zero {
            ONE
        } else {
            -ONE
        }
    })
}

pub fn build_qsve(tensor: &DenseTensor, k: usize) -> Result<QsveOperators> {
    if k >= tensor.order() {
        return invalid(format!("mode {k} out of range"));
    }
    let access = RowAccessor::new(tensor, k)?;
    let rows = access.rows();
    let cols = access.row_len();
    let n1 = rows.next_power_of_two();
    let n2 = cols.next_power_of_two();
    let n = n1 * n2;

    let mut u_p = CMatrix::zeros(n, n);
    let mut p = CMatrix::zeros(n, n1);
    for j in 0..n1 {
        // Zero and padding rows load |0>; they never meet Q.
        let c = match access.prepare_row_state(j) {
            Ok(s) => s.amplitudes().clone(),
            Err(_) => {
                let mut e = CVector::zeros(n2);
                e[0] = ONE;
                e
            }
        };
        let block = unitary_with_first_column(&c);
        u_p.view_mut((j * n2, j * n2), (n2, n2)).copy_from(&block);
        p.view_mut((j * n2, j), (n2, 1)).copy_from(&c);
    }

    let b_hat = access.prepare_norm_state().amplitudes().clone();
    let h = unitary_with_first_column(&b_hat);
    let u_q = crate::linalg::kron(&h, &CMatrix::identity(n2, n2));
    let mut q = CMatrix::zeros(n, n2);
    for j in 0..n1 {
        for i in 0..n2 {
            q[(j * n2 + i, i)] = b_hat[j];
        }
    }

    let g_p = zero_reflection(n1, n2, true);
    let g_q = zero_reflection(n1, n2, false);
    let w = (&u_p * &g_p * u_p.adjoint()) * (&u_q * &g_q * u_q.adjoint());
    Ok(QsveOperators {
        mode: k,
        rows,
        cols,
        n1,
        n2,
        norm: access.frobenius(),
        p,
        q,
        u_p,
        u_q,
        g_p,
        g_q,
        w,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QsveEstimate {
    pub mode: usize,
    pub sigma: f64,
    /// Decoded eigenphase in `[0, pi]`.
    pub theta: f64,
    /// Normalized readout `Q^dagger` of the strongest branch in the group.
    #[serde(skip)]
    pub vector: CVector,
    pub weight: f64,
    /// Folded bucket.
    pub key: usize,
}

/// `||A|| cos(pi key / M)`.
pub fn decode_sigma(key: usize, m: usize, norm: f64) -> f64 {
    norm * (PI * key as f64 / m as f64).cos()
}

/// Largest change of the decoded value when the phase moves by one bucket.
pub fn mapped_bucket_width(sigma: f64, norm: f64, d: usize) -> f64 {
    let theta = 2.0 * (sigma / norm).clamp(0.0, 1.0).acos();
    let step = 2.0 * PI / (1u64 << d) as f64;
    [theta - step, theta + step]
        .iter()
        .map(|&t| norm * ((t.clamp(0.0, PI) / 2.0).cos() - (theta / 2.0).cos()).abs())
        .fold(0.0, f64::max)
}

/// Phase estimation output of one QSVE run with its readout map.
#[derive(Clone, Debug)]
pub struct QsveRun {
    pub mode: usize,
    pub cols: usize,
    pub norm: f64,
    pub estimate: PhaseEstimate,
    /// `Q^dagger phi_y` for every bucket, restricted to the first `I_k` levels.
    pub readouts: Vec<CVector>,
}

fn embed(b: &QuantumState, n2: usize) -> Result<CVector> {
    let a = b.amplitudes();
    if a.len() > n2 {
        return invalid("input state is larger than the column register");
    }
    let mut v = CVector::zeros(n2);
    v.rows_mut(0, a.len()).copy_from(a);
    Ok(v)
}

fn run_with(ops: &QsveOperators, b: &QuantumState, d: usize) -> Result<QsveRun> {
    let input = &ops.q * embed(b, ops.n2)?;
    let estimate = phase_estimation_vec(&ops.w, &input, d)?;
    let qa = ops.q.adjoint();
    let readouts = estimate
        .branches
        .iter()
        .map(|br| (&qa * br).rows(0, ops.cols).into_owned())
        .collect();
    Ok(QsveRun {
        mode: ops.mode,
        cols: ops.cols,
        norm: ops.norm,
        estimate,
        readouts,
    })
}

pub fn qsve_run(tensor: &DenseTensor, k: usize, b: &QuantumState, d: usize) -> Result<QsveRun> {
    run_with(&build_qsve(tensor, k)?, b, d)
}

/// Per-run estimates: folded buckets grouped around local maxima.
pub fn estimates_from_run(run: &QsveRun) -> Vec<QsveEstimate> {
    let p = &run.estimate.probabilities;
    let m = p.len();
    let half = m / 2;
    let mut folded = vec![0.0; half + 1];
    for (y, &py) in p.iter().enumerate() {
        folded[fold(y, m)] += py;
    }
    let peaks: Vec<usize> = (0..=half)
        .filter(|&key| {
            let f = folded[key];
            f >= 1e-4 && (key == 0 || f > folded[key - 1]) && (key == half || f >= folded[key + 1])
        })
        .collect();
    let mut weight = vec![0.0; peaks.len()];
    for (key, &f) in folded.iter().enumerate() {
        if let Some(i) = (0..peaks.len()).min_by_key(|&i| peaks[i].abs_diff(key)) {
            weight[i] += f;
        }
    }
    peaks
        .iter()
        .zip(weight)
        .filter(|&(_, w)| w >= 1e-3)
        .map(|(&key, weight)| {
            let y = if p[key] >= p[(m - key) % m] { key } else { m - key };
            let v = &run.readouts[y % m];
            let n = v.norm();
            let vector = if n > 0.0 { v / Complex64::new(n, 0.0) } else { v.clone() };
            QsveEstimate {
                mode: run.mode,
                sigma: decode_sigma(key, m, run.norm),
                theta: 2.0 * PI * key as f64 / m as f64,
                vector,
                weight,
                key,
            }
        })
        .collect()
}

pub fn qsve(tensor: &DenseTensor, k: usize, b: &QuantumState, d: usize) -> Result<Vec<QsveEstimate>> {
    Ok(estimates_from_run(&qsve_run(tensor, k, b, d)?))
}

/// All modes at once: a mode register in uniform superposition controls
/// `W_k`. Requires equal dimensions so every `W_k` acts on the same space.
#[derive(Clone, Debug)]
pub struct ControlledQsve {
    /// Probability of each mode branch before post-selection.
    pub branch_weights: Vec<f64>,
    /// Phase estimation of each branch after post-selecting its mode value.
    pub branches: Vec<PhaseEstimate>,
}

pub fn controlled_k_qsve(tensor: &DenseTensor, b: &QuantumState, d: usize) -> Result<ControlledQsve> {
    let dims = tensor.dims();
    if tensor.order() < 2 || dims.iter().any(|&n| n != dims[0]) {
        return invalid("controlled-k QSVE needs an order >= 2 tensor with equal dimensions");
    }
    let m = tensor.order();
    let ops: Vec<QsveOperators> = (0..m).map(|k| build_qsve(tensor, k)).collect::<Result<_>>()?;
    let n = ops[0].dim();
    let slots = m.next_power_of_two();
    let total = slots * n;
    let mut w = CMatrix::identity(total, total);
    let mut input = CVector::zeros(total);
    let amp = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
    for (k, o) in ops.iter().enumerate() {
        w.view_mut((k * n, k * n), (n, n)).copy_from(&o.w);
        let psi = &o.q * embed(b, o.n2)?;
        input.rows_mut(k * n, n).copy_from(&(psi * amp));
    }
    let joint = phase_estimation_vec(&w, &input, d)?;
    let buckets = joint.buckets();
    let mut branch_weights = Vec::with_capacity(m);
    let mut branches = Vec::with_capacity(m);
    for k in 0..m {
        let parts: Vec<CVector> = joint.branches.iter().map(|br| br.rows(k * n, n).into_owned()).collect();
        let weight: f64 = parts.iter().map(|v| v.norm_squared()).sum();
        let scale = Complex64::new(1.0 / weight.sqrt(), 0.0);
        let parts: Vec<CVector> = parts.into_iter().map(|v| v * scale).collect();
        branch_weights.push(weight);
        branches.push(PhaseEstimate {
            control_qubits: d,
            probabilities: (0..buckets).map(|y| parts[y].norm_squared()).collect(),
            branches: parts,
        });
    }
    Ok(ControlledQsve {
        branch_weights,
        branches,
    })
}

#[derive(Clone, Debug)]
pub struct ExtractedFactor {
    pub mode: usize,
    pub factor: CMatrix,
    pub values: Vec<f64>,
    pub completed: usize,
    pub collated: Collated,
}

pub fn mode_runs(tensor: &DenseTensor, k: usize, d: usize) -> Result<Vec<QsveRun>> {
    let ops = build_qsve(tensor, k)?;
    let n = ops.cols;
    (0..n)
        .into_par_iter()
        .map(|i| run_with(&ops, &QuantumState::basis(n, i)?, d))
        .collect()
}

/// Collates QSVE runs over all basis inputs. Groups at `theta = pi` hold the
/// null space of the unfolding and are kept, so no completion is needed for
/// rank-deficient modes.
pub fn extract_singular_matrix(runs: &[QsveRun]) -> Result<ExtractedFactor> {
    let first = runs.first().ok_or_else(|| Error::InvalidArgument("no runs".into()))?;
    let m = first.estimate.buckets();
    let readouts: Vec<RunReadout> = runs
        .iter()
        .map(|r| RunReadout {
            probabilities: r.estimate.probabilities.clone(),
            vectors: r.readouts.clone(),
        })
        .collect();
    let collated = collate(
        &readouts,
        first.cols,
        &CollateConfig::default(),
        |key| decode_sigma(key, m, first.norm),
        |_| true,
    );
    Ok(ExtractedFactor {
        mode: first.mode,
        factor: collated.matrix.clone(),
        values: collated.values.clone(),
        completed: collated.completed,
        collated,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Alg2Diagnostics {
    pub control_qubits: usize,
    pub raw_unitarity: Vec<f64>,
    pub completed: Vec<usize>,
    pub success_probabilities: Vec<f64>,
}

pub fn qhosvd2(tensor: &DenseTensor, d: usize) -> Result<(HosvdResult, Alg2Diagnostics)> {
    if tensor.order() < 2 {
        return invalid("HOSVD needs a tensor of order at least 2");
    }
    if d == 0 || d > 16 {
        return invalid(format!("control qubits must lie in 1..=16, got {d}"));
    }
    if tensor.frobenius_norm() == 0.0 {
        return Err(Error::DegenerateInput("zero tensor".into()));
    }
    let extracted = (0..tensor.order())
        .map(|k| extract_singular_matrix(&mode_runs(tensor, k, d)?))
        .collect::<Result<Vec<_>>>()?;
    let raw_unitarity = extracted.iter().map(|e| unitarity_error(&e.factor)).collect();
    let factors: Vec<CMatrix> = extracted.iter().map(|e| polish(&e.factor)).collect();
    let (core, success_probabilities) = quantum_core(tensor, &factors)?;
    Ok((
        HosvdResult {
            core,
            factors,
            spectra: extracted.iter().map(|e| e.values.clone()).collect(),
            ranks: None,
        },
        Alg2Diagnostics {
            control_qubits: d,
            raw_unitarity,
            completed: extracted.iter().map(|e| e.completed).collect(),
            success_probabilities,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::hosvd::{factor_angle, hosvd, verify};
    use crate::linalg::{left_singular_basis, max_abs_diff, singular_values};
    use crate::tensor::unfold;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn oracle_spectrum(t: &DenseTensor, k: usize) -> Vec<f64> {
        let u = unfold(t, k).unwrap().matrix;
        let mut s = singular_values(&u);
        s.resize(u.nrows(), 0.0);
        s
    }

    #[test]
    fn operator_invariants() {
        for seed in 0..6 {
            let dims = corpus::random_dims(seed, 2..=3, 3);
            let t = corpus::random_tensor(&dims, seed);
            for k in 0..dims.len() {
                let o = build_qsve(&t, k).unwrap();
                let (ep, eq) = o.isometry_error();
                assert!(ep < 1e-12 && eq < 1e-12);
                assert!(unitarity_error(&o.w) < 1e-12);
                assert!(unitarity_error(&o.reflection_p()) < 1e-12);
                assert!(unitarity_error(&o.reflection_q()) < 1e-12);
                let via_p = &o.u_p * &o.g_p * o.u_p.adjoint();
                let via_q = &o.u_q * &o.g_q * o.u_q.adjoint();
                assert!(max_abs_diff(&via_p, &o.reflection_p()) < 1e-12);
                assert!(max_abs_diff(&via_q, &o.reflection_q()) < 1e-12);
                // P^dagger Q = A^(k)^dagger / ||A||.
                let b = unfold(&t, k).unwrap().matrix.adjoint() / Complex64::new(t.frobenius_norm(), 0.0);
                let pq = o.p.adjoint() * &o.q;
                let block = pq.view((0, 0), (o.rows, o.cols)).into_owned();
                assert!(max_abs_diff(&block, &b) < 1e-12);
            }
        }
    }

    #[test]
    fn exact_phases_decode_to_spectrum() {
        for seed in 0..6 {
            let dims = corpus::random_dims(seed + 50, 2..=3, 4);
            let t = corpus::random_tensor(&dims, seed);
            for k in 0..dims.len() {
                let o = build_qsve(&t, k).unwrap();
                let spectrum = oracle_spectrum(&t, k);
                let phases = o.exact_phases();
                assert!(!phases.is_empty());
                for (_, s) in phases {
                    let err = spectrum.iter().map(|x| (x - s).abs()).fold(f64::INFINITY, f64::min);
                    assert!(err < 1e-10, "dims {dims:?} mode {k}: {s} off by {err}");
                }
            }
        }
    }

    #[test]
    fn one_by_one() {
        let t = DenseTensor::new(vec![1, 1], vec![ONE]).unwrap();
        let o = build_qsve(&t, 0).unwrap();
        let phases = o.exact_phases();
        assert_eq!(phases.len(), 1);
        assert!(phases[0].0.abs() < 1e-7 && (phases[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_identity_has_quarter_turns() {
        let m = CMatrix::identity(2, 2) / Complex64::new(2f64.sqrt(), 0.0);
        let t = DenseTensor::from_matrix(&m);
        let o = build_qsve(&t, 0).unwrap();
        for (theta, s) in o.exact_phases() {
            assert!((theta - PI / 2.0).abs() < 1e-7);
            assert!((s - FRAC_1_SQRT_2).abs() < 1e-12);
        }
        let b = QuantumState::basis(2, 0).unwrap();
        let est = qsve(&t, 0, &b, 6).unwrap();
        assert_eq!(est.len(), 1);
        assert!((est[0].sigma - FRAC_1_SQRT_2).abs() <= mapped_bucket_width(FRAC_1_SQRT_2, 1.0, 6));
    }

    #[test]
    fn rank_one_single_estimate() {
        let u = corpus::random_unit_vector(3, 1);
        let v = corpus::random_unit_vector(4, 2);
        let t = DenseTensor::from_matrix(&(&u * v.adjoint()));
        let b = QuantumState::from_unnormalized(u.as_slice(), "b").unwrap();
        for d in [2, 5, 8] {
            let est = qsve(&t, 0, &b, d).unwrap();
            assert_eq!(est.len(), 1);
            assert!((est[0].sigma - 1.0).abs() < 1e-12);
            assert!((est[0].weight - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn estimates_within_mapped_width() {
        for seed in 0..5 {
            let t = corpus::random_unit_tensor(&[2, 2, 2], 300 + seed);
            for k in 0..3 {
                let spectrum = oracle_spectrum(&t, k);
                for i in 0..2 {
                    let b = QuantumState::basis(2, i).unwrap();
                    for e in qsve(&t, k, &b, 8).unwrap() {
                        let ok = spectrum
                            .iter()
                            .any(|&s| (e.sigma - s).abs() <= mapped_bucket_width(s, 1.0, 8) + 1e-12);
                        assert!(ok, "seed {seed} mode {k}: {} vs {spectrum:?}", e.sigma);
                        assert!(e.sigma >= -1e-12 && e.sigma <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn weights_match_overlaps() {
        let t = corpus::random_unit_tensor(&[3, 2, 2], 8);
        let b = QuantumState::basis(3, 1).unwrap();
        let (u, s) = left_singular_basis(&unfold(&t, 0).unwrap().matrix);
        let est = qsve(&t, 0, &b, 10).unwrap();
        assert_eq!(est.len(), 3);
        for e in &est {
            let j = (0..3).min_by(|&a, &c| (s[a] - e.sigma).abs().total_cmp(&(s[c] - e.sigma).abs())).unwrap();
            let beta = u[(1, j)].norm_sqr();
            assert!((e.weight - beta).abs() < 0.02, "{} vs {beta}", e.weight);
        }
    }

    #[test]
    fn error_does_not_grow_with_d() {
        let t = corpus::random_unit_tensor(&[2, 2, 2], 17);
        let spectrum = oracle_spectrum(&t, 2);
        let b = QuantumState::basis(2, 1).unwrap();
        let mut prev = f64::INFINITY;
        for d in 4..=10 {
            let err = qsve(&t, 2, &b, d)
                .unwrap()
                .iter()
                .map(|e| spectrum.iter().map(|s| (e.sigma - s).abs()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            assert!(err <= prev + 1e-12, "d {d}: {err} after {prev}");
            prev = err;
        }
    }

    #[test]
    fn controlled_branches_match_single_mode() {
        let t = corpus::random_unit_tensor(&[2, 2, 2], 4);
        let b = QuantumState::basis(2, 1).unwrap();
        let c = controlled_k_qsve(&t, &b, 6).unwrap();
        for (k, w) in c.branch_weights.iter().enumerate() {
            assert!((w - 1.0 / 3.0).abs() < 1e-10);
            let single = qsve_run(&t, k, &b, 6).unwrap();
            for (x, y) in c.branches[k].probabilities.iter().zip(&single.estimate.probabilities) {
                assert!((x - y).abs() < 1e-10);
            }
            for (x, y) in c.branches[k].branches.iter().zip(&single.estimate.branches) {
                assert!((x - y).norm() < 1e-10);
            }
        }
        let m = DenseTensor::from_matrix(&corpus::random_matrix(2, 2, 9));
        let c = controlled_k_qsve(&m, &b, 5).unwrap();
        assert_eq!(c.branches.len(), 2);
        assert!(controlled_k_qsve(&corpus::random_tensor(&[2, 3], 1), &b, 4).is_err());
    }

    #[test]
    fn full_rank_cube() {
        let t = corpus::random_unit_tensor(&[3, 3, 3], 5);
        let (r, diag) = qhosvd2(&t, 10).unwrap();
        assert!(diag.completed.iter().all(|&c| c == 0));
        let rep = verify(&r, &t, 1e-2).unwrap();
        assert!(rep.passed, "{rep:?}");
        let oracle = hosvd(&t).unwrap();
        for k in 0..3 {
            assert!(factor_angle(&r.factors[k], &oracle.factors[k], &oracle.spectra[k], 1e-8) <= 1e-2);
        }
    }

    #[test]
    fn one_hot_is_exact() {
        let t = DenseTensor::one_hot(vec![2, 3, 2], &[1, 2, 0]).unwrap();
        let (r, _) = qhosvd2(&t, 6).unwrap();
        let rec = r.reconstruct().unwrap();
        assert!(rec.sub(&t).unwrap().max_abs() < 1e-10);
        let oracle = hosvd(&t).unwrap();
        for k in 0..3 {
            assert!(factor_angle(&r.factors[k], &oracle.factors[k], &oracle.spectra[k], 1e-8) < 1e-10);
        }
    }

    #[test]
    fn order_two_matches_svd() {
        let m = corpus::random_matrix(3, 4, 6);
        let t = DenseTensor::from_matrix(&m);
        let d = 10;
        let (r, _) = qhosvd2(&t, d).unwrap();
        let (u, s) = left_singular_basis(&m);
        assert!(factor_angle(&r.factors[0], &u, &s, 1e-8) <= 1e-2);
        for (a, b) in r.spectra[0].iter().zip(&s) {
            assert!((a - b).abs() <= mapped_bucket_width(*b, t.frobenius_norm(), d) + 1e-12);
        }
    }
}
