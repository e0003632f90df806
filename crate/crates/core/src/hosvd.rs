//! Classical HOSVD, truncated HOSVD, verification and on-disk layout.
//!
//! Factor columns are phase-fixed: the largest-magnitude entry of every
//! singular vector is real and positive, ties going to the lowest index.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, parse_err, Result};
use crate::linalg::{
    fix_column_phases, left_singular_basis, max_principal_angle, unitarity_error, CMatrix,
};
use crate::qten;
use crate::tensor::{inner_product, mode_multiply, unfold, DenseTensor};

/// Singular values below this fraction of the input norm count as zero.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HosvdResult {
    pub core: DenseTensor,
    pub factors: Vec<CMatrix>,
    /// Per-mode singular values, nonincreasing, length `I_k`.
    pub spectra: Vec<Vec<f64>>,
    /// Multilinear rank kept, when truncated.
    pub ranks: Option<Vec<usize>>,
}

impl HosvdResult {
    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// `S x_1 U^(1) ... x_m U^(m)`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let mut t = self.core.clone();
        for (k, u) in self.factors.iter().enumerate() {
            t = mode_multiply(&t, u, k)?;
        }
        Ok(t)
    }

    /// Number of stored scalars: core entries plus factor entries.
    pub fn parameter_count(&self) -> usize {
        self.core.len() + self.factors.iter().map(|u| u.len()).sum::<usize>()
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        qten::write(&dir.join("core.qten"), &self.core)?;
        for (k, u) in self.factors.iter().enumerate() {
            qten::write(&dir.join(format!("factor_{k}.qten")), &DenseTensor::from_matrix(u))?;
        }
        let mut tsv = String::from("mode\tindex\tvalue\n");
        for (k, s) in self.spectra.iter().enumerate() {
            for (a, v) in s.iter().enumerate() {
                writeln!(tsv, "{k}\t{a}\t{v:.16e}").unwrap();
            }
        }
        fs::write(dir.join("spectra.tsv"), tsv)?;
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let core = qten::read(&dir.join("core.qten"))?;
        let m = core.order();
        let mut factors = Vec::with_capacity(m);
        for k in 0..m {
            let f = qten::read(&dir.join(format!("factor_{k}.qten")))?;
            factors.push(f.to_matrix()?);
        }
        let text = fs::read_to_string(dir.join("spectra.tsv"))?;
        let mut spectra: Vec<Vec<f64>> = vec![Vec::new(); m];
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(parse_err(n + 1, "expected three tab-separated columns"));
            }
            let mode: usize = cols[0].parse().map_err(|_| parse_err(n + 1, "bad mode"))?;
            let index: usize = cols[1].parse().map_err(|_| parse_err(n + 1, "bad index"))?;
            let value: f64 = cols[2].parse().map_err(|_| parse_err(n + 1, "bad value"))?;
            let s = spectra
                .get_mut(mode)
                .ok_or_else(|| parse_err(n + 1, "mode out of range"))?;
            if index != s.len() {
                return Err(parse_err(n + 1, "spectra must be listed in order"));
            }
            s.push(value);
        }
        let truncated = factors.iter().any(|u| u.nrows() != u.ncols());
        let ranks = truncated.then(|| factors.iter().map(|u| u.ncols()).collect());
        Ok(Self {
            core,
            factors,
            spectra,
            ranks,
        })
    }
}

fn mode_basis(tensor: &DenseTensor, k: usize) -> Result<(CMatrix, Vec<f64>)> {
    let a = unfold(tensor, k)?;
    let (mut u, sigma) = left_singular_basis(&a.matrix);
    fix_column_phases(&mut u);
    Ok((u, sigma))
}

/// Core tensor `A x_1 U^(1)^dagger ... x_m U^(m)^dagger`.
pub fn project_core(tensor: &DenseTensor, factors: &[CMatrix]) -> Result<DenseTensor> {
    let mut core = tensor.clone();
    for (k, u) in factors.iter().enumerate() {
        core = mode_multiply(&core, &u.adjoint(), k)?;
    }
    Ok(core)
}

pub fn hosvd(tensor: &DenseTensor) -> Result<HosvdResult> {
    if tensor.order() < 2 {
        return invalid("HOSVD needs a tensor of order at least 2");
    }
    let per_mode = (0..tensor.order())
        .into_par_iter()
        .map(|k| mode_basis(tensor, k))
        .collect::<Result<Vec<_>>>()?;
    let (factors, spectra): (Vec<_>, Vec<_>) = per_mode.into_iter().unzip();
    let core = project_core(tensor, &factors)?;
    Ok(HosvdResult {
        core,
        factors,
        spectra,
        ranks: None,
    })
}

pub fn truncated_hosvd(tensor: &DenseTensor, ranks: &[usize]) -> Result<HosvdResult> {
    if ranks.len() != tensor.order() {
        return invalid(format!(
            "{} ranks given for a tensor of order {}",
            ranks.len(),
            tensor.order()
        ));
    }
    for (k, (&r, &d)) in ranks.iter().zip(tensor.dims()).enumerate() {
        if r == 0 || r > d {
            return invalid(format!("rank {r} for mode {k} must lie in 1..={d}"));
        }
    }
    let full = hosvd(tensor)?;
    let factors: Vec<CMatrix> = full
        .factors
        .iter()
        .zip(ranks)
        .map(|(u, &r)| u.columns(0, r).into_owned())
        .collect();
    let core = project_core(tensor, &factors)?;
    Ok(HosvdResult {
        core,
        factors,
        spectra: full.spectra,
        ranks: Some(ranks.to_vec()),
    })
}

/// Count of singular values above `RANK_TOL * scale`.
pub fn numerical_rank(sigma: &[f64], scale: f64) -> usize {
    sigma.iter().filter(|&&s| s > RANK_TOL * scale).count()
}

/// Norms of the subtensors `S_{i_k = alpha}` for every alpha.
pub fn slice_norms(core: &DenseTensor, k: usize) -> Vec<f64> {
    (0..core.dims()[k])
        .map(|a| {
            core.slice_entries(k, a)
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    /// Largest `|<S_{k=a}, S_{k=b}>|`, a != b, relative to `||A||^2`.
    pub orthogonality: f64,
    /// Largest increase `s_{a+1} - s_a` relative to `||A||`, over the stored
    /// spectra, the core slice norms and the norms `||u_a^dagger A^(k)||`.
    pub ordering: f64,
    /// `||A - reconstruction||_F / ||A||_F`.
    pub reconstruction: f64,
    pub reconstruction_abs: f64,
    /// Largest `|U^dagger U - I|` over all factors.
    pub factor_unitarity: f64,
    /// Largest gap between stored spectra and core slice norms, relative.
    pub spectra_mismatch: f64,
    /// `sqrt(sum of discarded sigma^2) / ||A||`; zero for full results.
    pub truncation_bound: f64,
    pub tol: f64,
    pub passed: bool,
}

fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max)
}

pub fn verify(result: &HosvdResult, tensor: &DenseTensor, tol: f64) -> Result<VerifyReport> {
    let m = tensor.order();
    if result.factors.len() != m || result.core.order() != m || result.spectra.len() != m {
        return invalid("result order does not match tensor order");
    }
    for (k, u) in result.factors.iter().enumerate() {
        if u.nrows() != tensor.dims()[k] || u.ncols() != result.core.dims()[k] {
            return invalid(format!("factor {k} has shape {:?}", u.shape()));
        }
    }
    let norm = tensor.frobenius_norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };

    let mut orthogonality: f64 = 0.0;
    let mut ordering: f64 = 0.0;
    let mut spectra_mismatch: f64 = 0.0;
    let mut discarded = 0.0;
    let truncated = result
        .factors
        .iter()
        .any(|u| u.nrows() != u.ncols());
    for k in 0..m {
        let rk = result.core.dims()[k];
        let slices: Vec<DenseTensor> = (0..rk)
            .map(|a| result.core.slice(k, a))
            .collect::<Result<_>>()?;
        for a in 0..rk {
            for b in a + 1..rk {
                let ip = inner_product(&slices[a], &slices[b])?.norm();
                orthogonality = orthogonality.max(ip / (scale * scale));
            }
        }
        let norms = slice_norms(&result.core, k);
        let implied: Vec<f64> = {
            let proj = result.factors[k].adjoint() * unfold(tensor, k)?.matrix;
            (0..proj.nrows()).map(|r| proj.row(r).norm()).collect()
        };
        ordering = ordering
            .max(max_increase(&result.spectra[k]) / scale)
            .max(max_increase(&implied) / scale);
        if !truncated {
            ordering = ordering.max(max_increase(&norms) / scale);
        }
        for (a, n) in norms.iter().enumerate() {
            let stored = result.spectra[k].get(a).copied().unwrap_or(0.0);
            spectra_mismatch = spectra_mismatch.max((stored - n).abs() / scale);
        }
        discarded += result.spectra[k]
            .iter()
            .skip(rk)
            .map(|s| s * s)
            .sum::<f64>();
    }
    let factor_unitarity = result
        .factors
        .iter()
        .map(unitarity_error)
        .fold(0.0, f64::max);
    let recon = result.reconstruct()?;
    let reconstruction_abs = tensor.sub(&recon)?.frobenius_norm();
    let reconstruction = reconstruction_abs / scale;
    let truncation_bound = discarded.sqrt() / scale;

    // A truncated core is a sub-block of the full one: its slices need not be
    // orthogonal and their norms need not equal the spectra.
    let core_ok = truncated || (orthogonality <= tol && spectra_mismatch <= tol);
    let passed = core_ok
        && ordering <= tol
        && factor_unitarity <= tol
        && reconstruction <= truncation_bound + tol;
    Ok(VerifyReport {
        orthogonality,
        ordering,
        reconstruction,
        reconstruction_abs,
        factor_unitarity,
        spectra_mismatch,
        truncation_bound,
        tol,
        passed,
    })
}

/// Largest principal angle between matching column groups of two factor
/// matrices. Columns whose singular values agree within `cluster_tol`
/// (relative to the largest) are compared as one subspace.
pub fn factor_angle(a: &CMatrix, b: &CMatrix, sigma: &[f64], cluster_tol: f64) -> f64 {
    let n = a.ncols().min(b.ncols()).min(sigma.len());
    let top = sigma.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (sigma[start] - sigma[end]).abs() <= cluster_tol * top {
            end += 1;
        }
        let width = end - start;
        let angle = max_principal_angle(
            &a.columns(start, width).into_owned(),
            &b.columns(start, width).into_owned(),
        );
        worst = worst.max(angle);
        start = end;
    }
    worst
}

/// Orthogonal projector onto the span of the given columns.
pub fn projector(columns: &CMatrix) -> CMatrix {
    columns * columns.adjoint()
}

pub fn global_phase(tensor: &DenseTensor, phi: f64) -> DenseTensor {
    tensor.scale(Complex64::from_polar(1.0, phi))
}
