//! Quantum HOSVD through density-matrix exponentiation and phase estimation.
//!
//! For each mode `k` the unfolding `A^(k)` is embedded in the Hermitian
//! extension `Ã = [[0, A^(k)], [A^(k)^dagger, 0]]` of logical size
//! `N = I_k + prod_{j != k} I_j`, padded to a power of two. Phase estimation
//! of `U = exp(-i (Ã/N) t)` on a basis input `|i>`, `i < I_k`, writes the
//! eigenvalues `+-sigma/N` into the control register; projecting each
//! residual onto the first `I_k` coordinates exposes the left singular
//! vectors. Repeating over all `I_k` basis inputs and collating the buckets
//! gives the factor matrix. The core is then assembled by chained quantum
//! tensor-matrix products with post-selection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::collate::{collate, CollateConfig, Collated, RunReadout};
use crate::error::{invalid, Error, Result};
use crate::hosvd::HosvdResult;
use crate::linalg::{
    expm_hermitian, fix_column_phases, nearest_unitary, unitarity_error, CMatrix, CVector,
};
use crate::sim::density::DensityMatrix;
use crate::sim::ops::{dense_extension, swap_like_operator, uniform_state, ExtensionLayout, QpcaChannel};
use crate::sim::phase::{channel_phase_estimation, phase_estimation_vec, signed_bucket, PhaseEstimate};
use crate::sim::state::{QuantumState, Register};
use crate::tensor::{fold as fold_tensor, unfold, DenseTensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alg1Config {
    pub epsilon: f64,
    pub sim_time: f64,
    /// Exponentiation steps per application of `U` on the channel path.
    pub steps: usize,
    pub control_qubits: usize,
    /// Eigenvalues with `|lambda|/N` below this are treated as zero.
    pub eigen_threshold: f64,
}

impl Alg1Config {
    /// Defaults derived from a single accuracy: `d = ceil(log2(1/eps))`,
    /// `t = 2 pi`, `s = ceil(t^2 / eps)` (the step count for `||A||_max <= 1`),
    /// threshold `eps`.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        let t = 2.0 * PI;
        Ok(Self {
            epsilon,
            sim_time: t,
            steps: (t * t / epsilon).ceil() as usize,
            control_qubits: (1.0 / epsilon).log2().ceil().max(1.0) as usize,
            eigen_threshold: epsilon,
        })
    }

    pub fn with_control_qubits(mut self, d: usize) -> Self {
        self.control_qubits = d;
        self
    }

    pub fn with_steps(mut self, s: usize) -> Self {
        self.steps = s;
        self
    }

    /// `ceil(t^2 ||A||_max^2 / eps)`.
    pub fn steps_for(&self, tensor: &DenseTensor) -> usize {
        let max = tensor.max_abs();
        ((self.sim_time * self.sim_time * max * max / self.epsilon).ceil() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || self.steps == 0 || self.control_qubits == 0 {
            return invalid("epsilon > 0, steps >= 1 and control qubits >= 1 are required");
        }
        if !(self.sim_time > 0.0 && self.sim_time.is_finite()) {
            return invalid("simulation time must be positive and finite");
        }
        if self.control_qubits > 16 {
            return invalid("at most 16 control qubits are supported");
        }
        Ok(())
    }
}

impl Default for Alg1Config {
    fn default() -> Self {
        Self::from_epsilon(1e-3).expect("valid epsilon")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenPairEstimate {
    pub mode: usize,
    /// Estimated `lambda / N`.
    pub value: f64,
    /// Probability mass of the peak, an estimate of `|<u~_j|b>|^2`.
    pub weight: f64,
    /// Peak bucket.
    pub bucket: usize,
    /// Normalized residual state at the peak bucket (extension register).
    #[serde(skip)]
    pub residual: CVector,
    /// Residual projected on the first `I_k` coordinates and renormalized;
    /// `None` when that projection vanishes.
    #[serde(skip)]
    pub projected: Option<CVector>,
    /// Norm of the projected half before renormalization.
    pub projected_norm: f64,
}

/// Phase estimation output for one mode and one input, with the decoding.
#[derive(Clone, Debug)]
pub struct ModeRun {
    pub mode: usize,
    pub layout: ExtensionLayout,
    pub estimate: PhaseEstimate,
    pub sim_time: f64,
}

impl ModeRun {
    pub fn buckets(&self) -> usize {
        self.estimate.buckets()
    }

    /// `lambda / N` for bucket `y`.
    pub fn value_of(&self, y: usize) -> f64 {
        let m = self.buckets();
        -(signed_bucket(y, m) as f64) / m as f64 * (2.0 * PI / self.sim_time)
    }

    /// Unnormalized projection of bucket `y` on the first `I_k` coordinates.
    pub fn projected_branch(&self, y: usize) -> CVector {
        self.estimate.branches[y].rows(0, self.layout.rows).into_owned()
    }
}

fn require_unit_norm(tensor: &DenseTensor) -> Result<()> {
    let n = tensor.frobenius_norm();
    if n == 0.0 {
        return Err(Error::DegenerateInput("zero tensor".into()));
    }
    if (n - 1.0).abs() > 1e-9 {
        return invalid(format!("input must have unit Frobenius norm, got {n}"));
    }
    Ok(())
}

/// `exp(-i (Ã/N) t)` on the padded extension register.
pub fn evolution_unitary(tensor: &DenseTensor, k: usize, t: f64) -> Result<(CMatrix, ExtensionLayout)> {
    let (ext, layout) = dense_extension(tensor, k)?;
    Ok((expm_hermitian(&ext, t / layout.logical as f64), layout))
}

fn embed_input(b: &QuantumState, layout: &ExtensionLayout) -> Result<CVector> {
    let amps = b.amplitudes();
    if amps.len() > layout.padded {
        return invalid("input state is larger than the extension register");
    }
    let mut v = CVector::zeros(layout.padded);
    v.rows_mut(0, amps.len()).copy_from(amps);
    if v.rows(layout.logical, layout.padded - layout.logical).norm() > 1e-12 {
        return invalid("input state has weight on padding levels");
    }
    Ok(v)
}

/// Phase estimation for one mode on the exact evolution `U = exp(-i Ã t / N)`.
pub fn run_mode_detailed(tensor: &DenseTensor, k: usize, b: &QuantumState, cfg: &Alg1Config) -> Result<ModeRun> {
    cfg.validate()?;
    require_unit_norm(tensor)?;
    if k >= tensor.order() {
        return invalid(format!("mode {k} out of range"));
    }
    let (u, layout) = evolution_unitary(tensor, k, cfg.sim_time)?;
    let psi = embed_input(b, &layout)?;
    let estimate = phase_estimation_vec(&u, &psi, cfg.control_qubits)?;
    Ok(ModeRun {
        mode: k,
        layout,
        estimate,
        sim_time: cfg.sim_time,
    })
}

/// Local maxima of a bucket ring with probability at least `min_p`.
fn ring_peaks(p: &[f64], min_p: f64) -> Vec<usize> {
    let m = p.len();
    (0..m)
        .filter(|&y| {
            let prev = p[(y + m - 1) % m];
            let next = p[(y + 1) % m];
            p[y] >= min_p && p[y] > prev && p[y] >= next
        })
        .collect()
}

/// Eigenvalue estimates for mode `k` from input `b`. Every bucket is credited
/// to its nearest peak, so the weights sum to one over all peaks.
pub fn run_mode(tensor: &DenseTensor, k: usize, b: &QuantumState, cfg: &Alg1Config) -> Result<Vec<EigenPairEstimate>> {
    let run = run_mode_detailed(tensor, k, b, cfg)?;
    Ok(estimates_from_run(&run, cfg.eigen_threshold))
}

pub fn estimates_from_run(run: &ModeRun, threshold: f64) -> Vec<EigenPairEstimate> {
    let p = &run.estimate.probabilities;
    let m = p.len();
    let peaks = ring_peaks(p, 1e-4);
    let mut weights = vec![0.0; peaks.len()];
    for (y, &py) in p.iter().enumerate() {
        let nearest = peaks
            .iter()
            .enumerate()
            .min_by_key(|&(_, &q)| {
                let d = q.abs_diff(y);
                d.min(m - d)
            })
            .map(|(i, _)| i);
        if let Some(i) = nearest {
            weights[i] += py;
        }
    }
    peaks
        .iter()
        .zip(weights)
        .filter(|&(&y, w)| w >= 1e-3 && run.value_of(y).abs() >= threshold)
        .map(|(&y, weight)| {
            let residual = run.estimate.residual(y).unwrap_or_else(|| CVector::zeros(run.layout.padded));
            let half = residual.rows(0, run.layout.rows).into_owned();
            let projected_norm = half.norm();
            let projected = (projected_norm > 1e-12).then(|| half / Complex64::new(projected_norm, 0.0));
            EigenPairEstimate {
                mode: run.mode,
                value: run.value_of(y),
                weight,
                bucket: y,
                residual,
                projected,
                projected_norm,
            }
        })
        .collect()
}

/// Bucket distribution when `U` is realized by `steps` uses of the sample-based
/// exponentiation channel per application (density-matrix path).
pub fn run_mode_channel(tensor: &DenseTensor, k: usize, b: &QuantumState, cfg: &Alg1Config) -> Result<Vec<f64>> {
    cfg.validate()?;
    require_unit_norm(tensor)?;
    let (s, layout) = swap_like_operator(tensor, k)?;
    let psi = embed_input(b, &layout)?;
    let ancilla = uniform_state(layout.logical, layout.padded);
    let channel = QpcaChannel::new(&s, &ancilla, cfg.sim_time / cfg.steps as f64)?;
    channel_phase_estimation(&channel, cfg.steps, DensityMatrix::pure(&psi).matrix(), cfg.control_qubits)
}

/// Factor matrix for one mode from runs over every basis input.
#[derive(Clone, Debug)]
pub struct ExtractedFactor {
    pub mode: usize,
    pub factor: CMatrix,
    /// Estimated singular values of the normalized tensor, per column.
    pub values: Vec<f64>,
    pub completed: usize,
    pub collated: Collated,
}

/// Runs mode `k` on every basis input `|0>, ..., |I_k - 1>`.
pub fn mode_runs(tensor: &DenseTensor, k: usize, cfg: &Alg1Config) -> Result<Vec<ModeRun>> {
    let n = tensor.dims()[k];
    (0..n)
        .into_par_iter()
        .map(|i| {
            let b = QuantumState::basis(n, i)?;
            run_mode_detailed(tensor, k, &b, cfg)
        })
        .collect()
}

/// Collates runs over a complete basis of inputs into `U^(k)`: buckets are
/// folded so `+-sigma/N` meet, grouped around peaks, and the projected
/// residuals of each group summed into a Gram matrix whose eigenvectors are
/// the singular vectors. Columns are ordered by nonincreasing `|lambda|`,
/// phase-fixed, and any shortfall completed to an orthonormal basis.
pub fn extract_singular_matrix(runs: &[ModeRun], threshold: f64) -> Result<ExtractedFactor> {
    let first = runs.first().ok_or_else(|| Error::InvalidArgument("no runs".into()))?;
    let k = first.mode;
    let n = first.layout.rows;
    let m = first.buckets();
    let logical = first.layout.logical as f64;
    let readouts: Vec<RunReadout> = runs
        .iter()
        .map(|r| RunReadout {
            probabilities: r.estimate.probabilities.clone(),
            vectors: (0..m).map(|y| r.projected_branch(y)).collect(),
        })
        .collect();
    let value = |key: usize| first.value_of(key).abs();
    let collated = collate(
        &readouts,
        n,
        &CollateConfig::default(),
        value,
        |key| value(key) >= threshold,
    );
    let values = collated.values.iter().map(|v| v * logical).collect();
    Ok(ExtractedFactor {
        mode: k,
        factor: collated.matrix.clone(),
        values,
        completed: collated.completed,
        collated,
    })
}

/// Number of eigenvalues of `Ã/N` with `|lambda|/N >= 1/t` that mode `k`
/// resolves, counting each `+-` pair twice.
pub fn effective_rank(tensor: &DenseTensor, k: usize, cfg: &Alg1Config) -> Result<usize> {
    let runs = mode_runs(tensor, k, cfg)?;
    let e = extract_singular_matrix(&runs, 1.0 / cfg.sim_time)?;
    Ok(2 * e.collated.keys.iter().filter(|key| key.is_some()).count())
}

/// `||A||_max^2 t^2 / 2`. With `||A||_F = 1` the singular values satisfy
/// `sum sigma^2 = 1 <= I_k J ||A||_max^2 <= N^2 ||A||_max^2 / 4`, so at most
/// `2 (t/N)^2` of them clear `N/t`, which is this bound.
pub fn effective_rank_bound(tensor: &DenseTensor, t: f64) -> f64 {
    let max = tensor.max_abs();
    0.5 * max * max * t * t
}

/// Output of the quantum tensor-matrix product for `A x_k U^dagger`.
#[derive(Clone, Debug)]
pub struct ModeProduct {
    /// Register layout: ancilla, then one register per mode in order, with
    /// mode `k` holding the column index `j` of `U`.
    pub state: QuantumState,
    pub success_probability: f64,
    /// Normalized post-selected state on the mode registers.
    pub postselected: QuantumState,
    /// `A x_k U^dagger` read off the post-selected amplitudes and rescaled by
    /// `sqrt(p) ||A||_F ||U||_F`.
    pub product: DenseTensor,
}

/// Quantum tensor-matrix product with post-selection. For every tube `t` of
/// the mode-k unfolding and column `j` of `U`, the ancilla-0 amplitude is
/// `<U_j|A_t> / (||A|| ||U||_F)` and the ancilla-1 amplitude carries the
/// remainder `sqrt(||A_t||^2 ||U_j||^2 - |<U_j|A_t>|^2)`.
pub fn quantum_mode_multiply(tensor: &DenseTensor, factor: &CMatrix, k: usize) -> Result<ModeProduct> {
    if k >= tensor.order() {
        return invalid(format!("mode {k} out of range"));
    }
    let n = tensor.dims()[k];
    if factor.shape() != (n, n) {
        return invalid(format!("factor must be {n}x{n}, got {:?}", factor.shape()));
    }
    if unitarity_error(factor) > 1e-8 {
        return invalid("factor is not unitary");
    }
    let a_norm = tensor.frobenius_norm();
    if a_norm == 0.0 {
        return Err(Error::DegenerateInput("zero tensor".into()));
    }
    let u_norm = factor.norm();
    let scale = 1.0 / (a_norm * u_norm);
    let unf = unfold(tensor, k)?.matrix;
    let inner = factor.adjoint() * &unf; // <U_j|A_t>
    let tube_norms: Vec<f64> = (0..unf.ncols()).map(|t| unf.column(t).norm()).collect();
    let col_norms: Vec<f64> = (0..n).map(|j| factor.column(j).norm()).collect();

    let good_unf = inner.map(|z| z * scale);
    let bad_unf = CMatrix::from_fn(n, unf.ncols(), |j, t| {
        let total = tube_norms[t] * tube_norms[t] * col_norms[j] * col_norms[j];
        Complex64::new((total - inner[(j, t)].norm_sqr()).max(0.0).sqrt() * scale, 0.0)
    });
    let good = fold_tensor(&good_unf, k, tensor.dims())?;
    let bad = fold_tensor(&bad_unf, k, tensor.dims())?;

    let padded_dims: Vec<usize> = tensor.dims().iter().map(|d| d.next_power_of_two()).collect();
    let block: usize = padded_dims.iter().product();
    let place = |t: &DenseTensor| -> CVector {
        let p = t.pad_to_power_of_two();
        CVector::from_iterator(block, p.data().iter().copied())
    };
    let g = place(&good);
    let b = place(&bad);
    let mut full = CVector::zeros(2 * block);
    full.rows_mut(0, block).copy_from(&g);
    full.rows_mut(block, block).copy_from(&b);
    let norm = full.norm();
    full /= Complex64::new(norm, 0.0);
    let mode_regs: Vec<Register> = padded_dims
        .iter()
        .enumerate()
        .map(|(i, &d)| Register::new(format!("i{}", i + 1), d.trailing_zeros() as usize))
        .collect();
    let mut regs = vec![Register::new("anc", 1)];
    regs.extend(mode_regs.iter().cloned());
    let state = QuantumState::new(full, regs)?;

    let success_probability = g.norm_squared() / (norm * norm);
    if success_probability <= 0.0 {
        return Err(Error::DegenerateInput("post-selection has zero probability".into()));
    }
    let post = &g / Complex64::new(g.norm(), 0.0);
    let postselected = QuantumState::new(post.clone(), mode_regs)?;
    let amplitude_scale = success_probability.sqrt() * a_norm * u_norm;
    let mut product = DenseTensor::zeros(tensor.dims().to_vec())?;
    for flat in 0..product.len() {
        let idx = product.multi_index(flat);
        let pos = idx.iter().zip(&padded_dims).fold(0, |acc, (&i, &d)| acc * d + i);
        product.data_mut()[flat] = post[pos] * amplitude_scale;
    }
    Ok(ModeProduct {
        state,
        success_probability,
        postselected,
        product,
    })
}

/// Core `A x_1 U_1^dagger ... x_m U_m^dagger` by chained quantum products.
/// Returns the core and the success probability of each stage.
pub fn quantum_core(tensor: &DenseTensor, factors: &[CMatrix]) -> Result<(DenseTensor, Vec<f64>)> {
    let mut cur = tensor.clone();
    let mut probs = Vec::with_capacity(factors.len());
    for (k, u) in factors.iter().enumerate() {
        let out = quantum_mode_multiply(&cur, u, k)?;
        probs.push(out.success_probability);
        cur = out.product;
    }
    Ok((cur, probs))
}

/// Snaps an almost-unitary matrix to the nearest unitary and re-fixes phases.
pub fn polish(u: &CMatrix) -> CMatrix {
    let mut p = nearest_unitary(u);
    fix_column_phases(&mut p);
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct Alg1Diagnostics {
    /// Largest `|U^dagger U - I|` of the collated factors before polishing.
    pub raw_unitarity: Vec<f64>,
    pub completed: Vec<usize>,
    pub success_probabilities: Vec<f64>,
    pub config: Alg1Config,
}

/// Full pipeline: factor matrices from phase estimation on every mode, core by
/// chained quantum products, spectra from the eigenvalue estimates. Inputs of
/// any norm are accepted and normalized internally.
pub fn qhosvd1(tensor: &DenseTensor, cfg: &Alg1Config) -> Result<(HosvdResult, Alg1Diagnostics)> {
    if tensor.order() < 2 {
        return invalid("HOSVD needs a tensor of order at least 2");
    }
    cfg.validate()?;
    let (unit, norm) = tensor.normalized()?;
    let extracted = (0..unit.order())
        .map(|k| {
            let runs = mode_runs(&unit, k, cfg)?;
            extract_singular_matrix(&runs, cfg.eigen_threshold)
        })
        .collect::<Result<Vec<_>>>()?;
    let raw_unitarity = extracted.iter().map(|e| unitarity_error(&e.factor)).collect();
    let factors: Vec<CMatrix> = extracted.iter().map(|e| polish(&e.factor)).collect();
    let (core, success_probabilities) = quantum_core(&unit, &factors)?;
    let core = core.scale(Complex64::new(norm, 0.0));
    let spectra = extracted
        .iter()
        .map(|e| e.values.iter().map(|v| v * norm).collect())
        .collect();
    Ok((
        HosvdResult {
            core,
            factors,
            spectra,
            ranks: None,
        },
        Alg1Diagnostics {
            raw_unitarity,
            completed: extracted.iter().map(|e| e.completed).collect(),
            success_probabilities,
            config: *cfg,
        },
    ))
}
