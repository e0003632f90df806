//! Tensor completion for context-aware recommendation.
//!
//! Observed ratings `y` at cells `(i_1, ..., i_m)` are fitted by the Tucker
//! model `t = S x_1 F1[i_1,:] x_2 F2[i_2,:] ... x_m Fm[i_m,:]` through
//! stochastic gradient descent on
//! `J = (1/||S||_1) sum l(t, y) + lambda sum_k ||F_k||^2 + lambda_S ||S||^2`.
//!
//! The derivative of `t` with respect to `F_k[i_k, j]` is the inner product of
//! the core slice `S_{a_k = j}` with the outer product of the other rows. In
//! hybrid mode that inner product is estimated from two normalized states by
//! amplitude estimation; classical mode computes it directly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, parse_err, Error, Result};
use crate::linalg::CVector;
use crate::qten;
use crate::sim::amplitude::{amplitude_estimation, overlap_state};
use crate::tensor::{mode_multiply, DenseTensor};

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 5.0;

/// Observed cells of a ratings tensor. Missing cells are simply absent.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingsTensor {
    dims: Vec<usize>,
    entries: Vec<(Vec<usize>, f64)>,
}

impl RatingsTensor {
    pub fn new(dims: Vec<usize>, entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return invalid("dims must be a nonempty list of positive integers");
        }
        let mut out = Self {
            dims,
            entries: Vec::with_capacity(entries.len()),
        };
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (idx, y) in entries {
            out.check(&idx, y)?;
            match seen.get(&idx) {
                Some(&pos) => {
                    log::warn!("duplicate rating at {idx:?}; keeping the last value");
                    out.entries[pos].1 = y;
                }
                None => {
                    seen.insert(idx.clone(), out.entries.len());
                    out.entries.push((idx, y));
                }
            }
        }
        Ok(out)
    }

    fn check(&self, idx: &[usize], y: f64) -> Result<()> {
        if idx.len() != self.dims.len() {
            return invalid(format!("index {idx:?} has {} modes, expected {}", idx.len(), self.dims.len()));
        }
        if idx.iter().zip(&self.dims).any(|(&i, &d)| i >= d) {
            return invalid(format!("index {idx:?} out of range for dims {:?}", self.dims));
        }
        if !(MIN_RATING..=MAX_RATING).contains(&y) {
            return invalid(format!("rating {y} outside [{MIN_RATING}, {MAX_RATING}]"));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[(Vec<usize>, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        self.entries.iter().any(|(i, _)| i == idx)
    }

    /// Parses `i1<TAB>...<TAB>im<TAB>rating` lines with 0-based indices.
    /// Blank lines and lines starting with `#` are skipped. Without `dims`,
    /// each dimension is one past the largest index seen.
    pub fn from_tsv(text: &str, dims: Option<&[usize]>) -> Result<Self> {
        let mut rows: Vec<(usize, Vec<usize>, f64)> = Vec::new();
        let mut order = None;
        for (n, line) in text.lines().enumerate() {
            let n = n + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() < 2 {
                return Err(parse_err(n, "expected at least one index and a rating"));
            }
            let m = fields.len() - 1;
            if *order.get_or_insert(m) != m {
                return Err(parse_err(n, format!("expected {} indices, found {m}", order.unwrap())));
            }
            let idx = fields[..m]
                .iter()
                .map(|f| f.parse::<usize>().map_err(|e| parse_err(n, format!("bad index `{f}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let y: f64 = fields[m]
                .parse()
                .map_err(|e| parse_err(n, format!("bad rating `{}`: {e}", fields[m])))?;
            if !y.is_finite() || !(MIN_RATING..=MAX_RATING).contains(&y) {
                return Err(parse_err(n, format!("rating {y} outside [{MIN_RATING}, {MAX_RATING}]")));
            }
            rows.push((n, idx, y));
        }
        let dims = match dims {
            Some(d) => d.to_vec(),
            None => {
                let m = order.ok_or_else(|| parse_err(1, "no ratings"))?;
                (0..m)
                    .map(|k| rows.iter().map(|r| r.1[k] + 1).max().unwrap_or(1))
                    .collect()
            }
        };
        for (n, idx, _) in &rows {
            if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(&i, &d)| i >= d) {
                return Err(parse_err(*n, format!("index {idx:?} out of range for dims {dims:?}")));
            }
        }
        Self::new(dims, rows.into_iter().map(|(_, i, y)| (i, y)).collect())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (idx, y) in &self.entries {
            for i in idx {
                write!(out, "{i}\t").unwrap();
            }
            writeln!(out, "{y}").unwrap();
        }
        out
    }

    pub fn read(path: &Path, dims: Option<&[usize]>) -> Result<Self> {
        Self::from_tsv(&fs::read_to_string(path)?, dims)
    }
}

/// Pointwise loss `l(t, y)` with its derivative in `t`.
#[derive(Clone, Copy, Debug)]
pub struct PointLoss {
    pub value: fn(f64, f64) -> f64,
    pub derivative: fn(f64, f64) -> f64,
}

impl PointLoss {
    pub const SQUARED: Self = Self {
        value: |t, y| 0.5 * (t - y) * (t - y),
        derivative: |t, y| t - y,
    };
}

impl Default for PointLoss {
    fn default() -> Self {
        Self::SQUARED
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub eta: f64,
    pub lambda: f64,
    pub lambda_core: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            eta: 0.05,
            lambda: 1e-4,
            lambda_core: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientMode {
    Classical,
    Hybrid,
}

/// Tucker model: real core of shape `ranks` and one `I_k x d_k` factor per mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionModel {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    /// Row-major over `ranks`.
    pub core: Vec<f64>,
    pub factors: Vec<DMatrix<f64>>,
    pub hyper: Hyper,
}

pub const INIT_SCALE: f64 = 0.1;

/// Entries uniform in `[-scale, scale]`: factors in mode order, then the core.
pub fn initialize(dims: &[usize], ranks: &[usize], hyper: Hyper, scale: f64, seed: u64) -> Result<CompletionModel> {
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid("initialization scale must be positive");
    }
    if dims.len() != ranks.len() || dims.len() < 2 {
        return invalid("dims and ranks must have the same length, at least 2");
    }
    if ranks.iter().zip(dims).any(|(&r, &d)| r == 0 || r > d) {
        return invalid(format!("ranks {ranks:?} must lie in 1..=dims {dims:?}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = dims
        .iter()
        .zip(ranks)
        .map(|(&d, &r)| DMatrix::from_fn(d, r, |_, _| rng.random_range(-scale..=scale)))
        .collect();
    let core = (0..ranks.iter().product()).map(|_| rng.random_range(-scale..=scale)).collect();
    Ok(CompletionModel {
        dims: dims.to_vec(),
        ranks: ranks.to_vec(),
        core,
        factors,
        hyper,
    })
}

fn multi_index(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
}

/// Gradients of `t` at one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGradient {
    pub prediction: f64,
    /// `dt/dF_k[i_k, :]` for each mode.
    pub rows: Vec<Vec<f64>>,
    /// `dt/dS`, row-major.
    pub core: Vec<f64>,
}

impl CompletionModel {
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.order() || idx.iter().zip(&self.dims).any(|(&i, &d)| i >= d) {
            return invalid(format!("index {idx:?} out of range for dims {:?}", self.dims));
        }
        Ok(())
    }

    fn rows(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        self.factors
            .iter()
            .zip(idx)
            .map(|(f, &i)| f.row(i).iter().copied().collect())
            .collect()
    }

    pub fn predict(&self, idx: &[usize]) -> Result<f64> {
        self.check_index(idx)?;
        let rows = self.rows(idx);
        // Contract the last mode first; the row-major core is then a prefix block.
        let mut v = self.core.clone();
        for (r, row) in self.ranks.iter().zip(&rows).rev() {
            v = v.chunks(*r).map(|c| c.iter().zip(row).map(|(a, b)| a * b).sum()).collect();
        }
        Ok(v[0])
    }

    /// `t` and its gradients with respect to the touched rows and the core.
    pub fn cell_gradient(&self, idx: &[usize]) -> Result<CellGradient> {
        self.check_index(idx)?;
        let rows = self.rows(idx);
        let m = self.order();
        let mut grad_rows: Vec<Vec<f64>> = self.ranks.iter().map(|&r| vec![0.0; r]).collect();
        let mut grad_core = vec![0.0; self.core.len()];
        let mut a = vec![0; m];
        let mut prediction = 0.0;
        for (flat, &s) in self.core.iter().enumerate() {
            multi_index(flat, &self.ranks, &mut a);
            let weight: f64 = (0..m).map(|k| rows[k][a[k]]).product();
            grad_core[flat] = weight;
            prediction += s * weight;
            for k in 0..m {
                let others: f64 = (0..m).filter(|&l| l != k).map(|l| rows[l][a[l]]).product();
                grad_rows[k][a[k]] += s * others;
            }
        }
        Ok(CellGradient {
            prediction,
            rows: grad_rows,
            core: grad_core,
        })
    }

    pub fn core_l1(&self) -> f64 {
        self.core.iter().map(|x| x.abs()).sum()
    }

    /// `(1/||S||_1) sum_D l(t, y)`.
    pub fn loss(&self, ratings: &RatingsTensor, l: &PointLoss) -> Result<f64> {
        let s1 = self.core_l1();
        if s1 == 0.0 {
            return Err(Error::DegenerateModel("core has zero l1 norm".into()));
        }
        let mut total = 0.0;
        for (idx, y) in ratings.entries() {
            total += (l.value)(self.predict(idx)?, *y);
        }
        Ok(total / s1)
    }

    /// `lambda sum ||F_k||^2 + lambda_S ||S||^2`.
    pub fn regularizer(&self) -> f64 {
        let f: f64 = self.factors.iter().map(|f| f.norm_squared()).sum();
        let s: f64 = self.core.iter().map(|x| x * x).sum();
        self.hyper.lambda * f + self.hyper.lambda_core * s
    }

    pub fn objective(&self, ratings: &RatingsTensor, l: &PointLoss) -> Result<f64> {
        Ok(self.loss(ratings, l)? + self.regularizer())
    }

    /// `sum_D l(t, y) + Omega`: the objective without the `1/||S||_1`
    /// prefactor, which is what the SGD update descends.
    pub fn descent_objective(&self, ratings: &RatingsTensor, l: &PointLoss) -> Result<f64> {
        let mut total = 0.0;
        for (idx, y) in ratings.entries() {
            total += (l.value)(self.predict(idx)?, *y);
        }
        Ok(total + self.regularizer())
    }

    /// Core as a (real) dense tensor.
    pub fn core_tensor(&self) -> DenseTensor {
        DenseTensor::from_real(self.ranks.clone(), &self.core).expect("core matches ranks")
    }

    /// Core slice with `a_k = j`, over the remaining modes in order.
    pub fn core_slice(&self, k: usize, j: usize) -> DenseTensor {
        self.core_tensor().slice(k, j).expect("slice in range")
    }

    /// Every cell of the completed tensor.
    pub fn reconstruct(&self) -> DenseTensor {
        let mut t = self.core_tensor();
        for (k, f) in self.factors.iter().enumerate() {
            let c = f.map(|x| Complex64::new(x, 0.0));
            t = mode_multiply(&t, &c, k).expect("shapes agree");
        }
        t
    }

    /// Root mean squared error over `cells`.
    pub fn rmse(&self, cells: &[(Vec<usize>, f64)]) -> Result<f64> {
        if cells.is_empty() {
            return invalid("no cells to evaluate");
        }
        let sq = cells
            .par_iter()
            .map(|(idx, y)| self.predict(idx).map(|t| (t - y) * (t - y)))
            .collect::<Result<Vec<_>>>()?;
        Ok((sq.iter().sum::<f64>() / cells.len() as f64).sqrt())
    }

    /// Unobserved cells along the single free axis (`None` in `fixed`),
    /// highest predicted value first.
    pub fn recommend(&self, ratings: &RatingsTensor, fixed: &[Option<usize>], top_n: usize) -> Result<Vec<(usize, f64)>> {
        if fixed.len() != self.order() {
            return invalid("one entry per mode is required");
        }
        let free: Vec<usize> = (0..fixed.len()).filter(|&k| fixed[k].is_none()).collect();
        if free.len() != 1 {
            return invalid("exactly one mode must be left free");
        }
        let axis = free[0];
        let mut idx: Vec<usize> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        let mut out = Vec::new();
        for v in 0..self.dims[axis] {
            idx[axis] = v;
            if !ratings.contains(&idx) {
                out.push((v, self.predict(&idx)?));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.truncate(top_n);
        Ok(out)
    }

    /// Writes `core.qten`, `factor_{k}.qten` and `hyper.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        qten::write(&dir.join("core.qten"), &self.core_tensor())?;
        for (k, f) in self.factors.iter().enumerate() {
            let t = DenseTensor::from_real(vec![f.nrows(), f.ncols()], &row_major(f))?;
            qten::write(&dir.join(format!("factor_{k}.qten")), &t)?;
        }
        let json = serde_json::to_string_pretty(&self.hyper).expect("plain struct");
        fs::write(dir.join("hyper.json"), json + "\n")?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let core = qten::read(&dir.join("core.qten"))?;
        if !core.is_real() {
            return invalid("model core must be real");
        }
        let ranks = core.dims().to_vec();
        let mut factors = Vec::with_capacity(ranks.len());
        let mut dims = Vec::with_capacity(ranks.len());
        for (k, &r) in ranks.iter().enumerate() {
            let f = qten::read(&dir.join(format!("factor_{k}.qten")))?;
            if f.order() != 2 || f.dims()[1] != r || !f.is_real() {
                return invalid(format!("factor {k} does not match rank {r}"));
            }
            dims.push(f.dims()[0]);
            factors.push(DMatrix::from_row_iterator(f.dims()[0], r, f.data().iter().map(|z| z.re)));
        }
        let text = fs::read_to_string(dir.join("hyper.json"))?;
        let hyper = serde_json::from_str(&text).map_err(|e| parse_err(e.line(), e.to_string()))?;
        Ok(Self {
            dims,
            ranks,
            core: core.data().iter().map(|z| z.re).collect(),
            factors,
            hyper,
        })
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Result of the amplitude-estimation inner product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumInnerProduct {
    pub value: f64,
    /// Set when either operand is zero and no state can be prepared.
    pub degenerate: bool,
}

/// `<S_slice, Z>` with `Z` the outer product of `rows`, estimated as
/// `||S|| ||Z|| (1 - 2h)` where `h` estimates `(1 - <s|z>)/2` for the
/// normalized states `s`, `z`.
pub fn quantum_gradient_component(core_slice: &DenseTensor, rows: &[CVector], t_qubits: usize) -> Result<QuantumInnerProduct> {
    let z = crate::tensor::outer_product(rows)?;
    let slice_dims: Vec<usize> = core_slice.dims().iter().copied().filter(|&d| d != 1).collect();
    let z_dims: Vec<usize> = z.dims().iter().copied().filter(|&d| d != 1).collect();
    if core_slice.len() != z.len() || slice_dims != z_dims {
        return invalid(format!("slice dims {:?} differ from outer product dims {:?}", core_slice.dims(), z.dims()));
    }
    let (ns, nz) = (core_slice.frobenius_norm(), z.frobenius_norm());
    if ns == 0.0 || nz == 0.0 {
        return Ok(QuantumInnerProduct {
            value: 0.0,
            degenerate: true,
        });
    }
    let s = CVector::from_iterator(z.len(), core_slice.data().iter().map(|x| x / ns));
    let zv = CVector::from_iterator(z.len(), z.data().iter().map(|x| x / nz));
    let (phi, good) = overlap_state(&s, &zv);
    let h = amplitude_estimation(&phi, &good, t_qubits)?.h;
    Ok(QuantumInnerProduct {
        value: ns * nz * (1.0 - 2.0 * h),
        degenerate: false,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub hyper: Hyper,
    pub epochs: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub mode: GradientMode,
    /// Control qubits of amplitude estimation in hybrid mode.
    pub t_qubits: usize,
    /// Accuracy of the quantum outer product. The simulation forms the
    /// outer product exactly, so this value is carried but unused.
    pub epsilon4: f64,
    pub loss: PointLoss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hyper: Hyper::default(),
            epochs: 200,
            seed: 0,
            init_scale: INIT_SCALE,
            mode: GradientMode::Classical,
            t_qubits: 12,
            epsilon4: 0.0,
            loss: PointLoss::SQUARED,
        }
    }
}

/// One update at one observation: `x <- x - eta lambda x - eta dl/dx` for the
/// touched factor rows and the core, all gradients taken before any change.
pub fn sgd_step(model: &mut CompletionModel, idx: &[usize], y: f64, cfg: &TrainConfig) -> Result<()> {
    let g = model.cell_gradient(idx)?;
    let dl = (cfg.loss.derivative)(g.prediction, y);
    let row_grads: Vec<Vec<f64>> = match cfg.mode {
        GradientMode::Classical => g.rows,
        GradientMode::Hybrid => hybrid_row_gradients(model, idx, cfg.t_qubits)?,
    };
    let Hyper { eta, lambda, lambda_core } = model.hyper;
    for (k, grad) in row_grads.iter().enumerate() {
        let i = idx[k];
        for (j, gj) in grad.iter().enumerate() {
            let x = model.factors[k][(i, j)];
            model.factors[k][(i, j)] = x - eta * lambda * x - eta * dl * gj;
        }
    }
    for (x, gc) in model.core.iter_mut().zip(&g.core) {
        *x = *x - eta * lambda_core * *x - eta * dl * gc;
    }
    Ok(())
}

fn hybrid_row_gradients(model: &CompletionModel, idx: &[usize], t_qubits: usize) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<CVector> = model
        .factors
        .iter()
        .zip(idx)
        .map(|(f, &i)| CVector::from_iterator(f.ncols(), f.row(i).iter().map(|&x| Complex64::new(x, 0.0))))
        .collect();
    let core = model.core_tensor();
    (0..model.order())
        .map(|k| {
            let others: Vec<CVector> = rows.iter().enumerate().filter(|&(l, _)| l != k).map(|(_, r)| r.clone()).collect();
            (0..model.ranks[k])
                .map(|j| {
                    let slice = core.slice(k, j)?;
                    Ok(quantum_gradient_component(&slice, &others, t_qubits)?.value)
                })
                .collect()
        })
        .collect()
}

/// One pass over a seeded permutation of the observations.
pub fn sgd_epoch(model: &mut CompletionModel, ratings: &RatingsTensor, seed: u64, cfg: &TrainConfig) -> Result<()> {
    let mut order: Vec<usize> = (0..ratings.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    for p in order {
        let (idx, y) = &ratings.entries()[p];
        sgd_step(model, idx, *y, cfg)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Trained {
    pub model: CompletionModel,
    /// Objective at the end of each epoch.
    pub objective: Vec<f64>,
}

/// Initializes from `cfg.seed` and runs `cfg.epochs` epochs; epoch `e` shuffles
/// with seed `cfg.seed + 1 + e`.
pub fn train(ratings: &RatingsTensor, ranks: &[usize], cfg: &TrainConfig) -> Result<Trained> {
    if !(cfg.hyper.eta > 0.0 && cfg.hyper.lambda >= 0.0 && cfg.hyper.lambda_core >= 0.0) {
        return invalid("eta must be positive and the regularization weights nonnegative");
    }
    if cfg.mode == GradientMode::Hybrid && !(1..=24).contains(&cfg.t_qubits) {
        return invalid("hybrid mode needs 1..=24 amplitude-estimation qubits");
    }
    let mut model = initialize(ratings.dims(), ranks, cfg.hyper, cfg.init_scale, cfg.seed)?;
    let mut objective = Vec::with_capacity(cfg.epochs);
    for e in 0..cfg.epochs {
        sgd_epoch(&mut model, ratings, cfg.seed.wrapping_add(1 + e as u64), cfg)?;
        objective.push(model.objective(ratings, &cfg.loss)?);
        if model.core.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateModel(format!("parameters diverged in epoch {e}")));
        }
    }
    Ok(Trained { model, objective })
}

/// Planted low-rank ratings with a train/held-out split.
#[derive(Clone, Debug)]
pub struct SyntheticRatings {
    /// Noiseless planted tensor, mean 3.
    pub truth: DenseTensor,
    pub observed: RatingsTensor,
    pub held_out: Vec<(Vec<usize>, f64)>,
}

/// Tucker tensor with positive core and factors of multilinear rank `ranks`,
/// scaled to mean 3, plus Gaussian noise of standard deviation `noise`,
/// clamped to the rating range. A seeded `fraction` of cells is observed.
pub fn synthetic_ratings(dims: &[usize], ranks: &[usize], fraction: f64, noise: f64, seed: u64) -> Result<SyntheticRatings> {
    if dims.len() != ranks.len() || ranks.iter().zip(dims).any(|(&r, &d)| r == 0 || r > d) {
        return invalid("ranks must lie in 1..=dims");
    }
    if !(0.0..=1.0).contains(&fraction) {
        return invalid("fraction must lie in [0, 1]");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core: Vec<f64> = (0..ranks.iter().product()).map(|_| rng.random_range(0.2..1.0)).collect();
    let mut t = DenseTensor::from_real(ranks.to_vec(), &core)?;
    for (k, (&d, &r)) in dims.iter().zip(ranks).enumerate() {
        let f = DMatrix::from_fn(d, r, |_, _| Complex64::new(rng.random_range(0.3..1.0), 0.0));
        t = mode_multiply(&t, &f, k)?;
    }
    let mean = t.data().iter().map(|z| z.re).sum::<f64>() / t.len() as f64;
    let truth = t.scale(Complex64::new(3.0 / mean, 0.0));
    let gauss = Normal::new(0.0, noise).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut cells: Vec<(Vec<usize>, f64)> = (0..truth.len())
        .map(|flat| {
            let y = (truth.data()[flat].re + gauss.sample(&mut rng)).clamp(MIN_RATING, MAX_RATING);
            (truth.multi_index(flat), y)
        })
        .collect();
    cells.shuffle(&mut rng);
    let n_obs = (fraction * cells.len() as f64).round() as usize;
    let held_out = cells.split_off(n_obs);
    Ok(SyntheticRatings {
        truth,
        observed: RatingsTensor::new(dims.to_vec(), cells)?,
        held_out,
    })
}
