//! Turning phase-estimation outcomes over a full basis of inputs into an
//! orthonormal factor matrix.
//!
//! Both quantum pipelines end the same way: for each basis input they hold,
//! per phase bucket, an unnormalized readout vector in the `I_k`-dimensional
//! space of the wanted singular vectors. Buckets are folded so that `+phi` and
//! `-phi` coincide, grouped around the peaks of the total distribution, and
//! each group's readouts are summed into `rho_G = sum v v^dagger`. Summed over
//! a complete basis of inputs, `rho_G` is diagonal in the singular basis, so
//! its dominant eigenvectors are the singular vectors of that group.

use crate::linalg::{eigh, fix_column_phases, orthonormal_completion, CMatrix, CVector};

/// Readouts of one run (one basis input), indexed by raw bucket `y`.
#[derive(Clone, Debug)]
pub struct RunReadout {
    pub probabilities: Vec<f64>,
    pub vectors: Vec<CVector>,
}

#[derive(Clone, Copy, Debug)]
pub struct CollateConfig {
    /// Ignore peaks of the (per-input averaged) folded distribution below this weight.
    pub min_peak: f64,
    /// Peaks closer than this many buckets merge.
    pub merge_radius: usize,
    /// Within a group, eigenvectors of `rho_G` below this fraction of the
    /// largest eigenvalue are ignored.
    pub relative_cutoff: f64,
    /// A candidate is rejected if its squared overlap with the span already
    /// selected reaches this value.
    pub max_overlap: f64,
}

impl Default for CollateConfig {
    fn default() -> Self {
        Self {
            min_peak: 1e-3,
            merge_radius: 2,
            relative_cutoff: 0.05,
            max_overlap: 0.9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Group {
    /// Folded bucket of the peak, in `0..=M/2`.
    pub key: usize,
    /// Total folded probability assigned to the group, averaged over inputs.
    pub weight: f64,
    pub kept: bool,
}

#[derive(Clone, Debug)]
pub struct Collated {
    /// Orthonormal columns, ordered by nonincreasing value; phase-fixed.
    pub matrix: CMatrix,
    /// Estimated value for each column (0 for completed columns).
    pub values: Vec<f64>,
    /// Group key each column came from, `None` for completed columns.
    pub keys: Vec<Option<usize>>,
    /// Columns added by orthonormal completion.
    pub completed: usize,
    pub groups: Vec<Group>,
}

pub fn fold(y: usize, m: usize) -> usize {
    y.min(m - y)
}

/// Local maxima of a folded distribution, merged within `radius`.
fn find_peaks(folded: &[f64], min_peak: f64, radius: usize) -> Vec<usize> {
    let n = folded.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| {
            let p = folded[k];
            p >= min_peak
                && (k == 0 || p > folded[k - 1])
                && (k + 1 == n || p >= folded[k + 1])
        })
        .collect();
    // Merge close peaks, keeping the stronger.
    peaks.sort_by(|&a, &b| folded[b].total_cmp(&folded[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in peaks {
        if kept.iter().all(|&q| p.abs_diff(q) > radius) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Collates readouts into `n` orthonormal columns. `value_of` maps a folded
/// key to the estimated singular value; `keep` decides whether a group's
/// vectors are used (dropped groups still absorb their buckets).
pub fn collate(
    runs: &[RunReadout],
    n: usize,
    cfg: &CollateConfig,
    value_of: impl Fn(usize) -> f64,
    keep: impl Fn(usize) -> bool,
) -> Collated {
    assert!(!runs.is_empty());
    let m = runs[0].probabilities.len();
    let half = m / 2;
    let mut total = vec![0.0; half + 1];
    for run in runs {
        for (y, p) in run.probabilities.iter().enumerate() {
            total[fold(y, m)] += p;
        }
    }
    let scale = 1.0 / runs.len() as f64;
    for t in &mut total {
        *t *= scale;
    }
    let keys = find_peaks(&total, cfg.min_peak, cfg.merge_radius);
    let nearest = |k: usize| -> Option<usize> {
        keys.iter()
            .enumerate()
            .min_by_key(|&(_, &g)| (g.abs_diff(k), g))
            .map(|(i, _)| i)
    };

    let mut rho: Vec<CMatrix> = vec![CMatrix::zeros(n, n); keys.len()];
    let mut weights = vec![0.0; keys.len()];
    for run in runs {
        for (y, v) in run.vectors.iter().enumerate() {
            let Some(g) = nearest(fold(y, m)) else { continue };
            weights[g] += run.probabilities[y] * scale;
            if run.probabilities[y] > 0.0 {
                rho[g] += v * v.adjoint();
            }
        }
    }
    let groups: Vec<Group> = keys
        .iter()
        .zip(&weights)
        .map(|(&key, &weight)| Group {
            key,
            weight,
            kept: keep(key),
        })
        .collect();

    struct Candidate {
        vector: CVector,
        weight: f64,
        key: usize,
    }
    let mut candidates = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        if !group.kept {
            continue;
        }
        let (vals, vecs) = eigh(&rho[g]);
        let top = vals.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            continue;
        }
        for (i, &v) in vals.iter().enumerate() {
            if v >= cfg.relative_cutoff * top {
                candidates.push(Candidate {
                    vector: vecs.column(i).into_owned(),
                    weight: v,
                    key: group.key,
                });
            }
        }
    }
    candidates.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.key.cmp(&b.key)));

    let mut chosen: Vec<(CVector, usize, f64)> = Vec::new();
    for c in candidates {
        if chosen.len() == n {
            break;
        }
        let mut r = c.vector.clone();
        for (s, _, _) in &chosen {
            let proj = s.dotc(&r);
            r -= s * proj;
        }
        let rest = r.norm_squared();
        if 1.0 - rest >= cfg.max_overlap {
            continue;
        }
        for (s, _, _) in &chosen {
            let proj = s.dotc(&r);
            r -= s * proj;
        }
        let norm = r.norm();
        chosen.push((r / crate::Complex64::new(norm, 0.0), c.key, c.weight));
    }
    chosen.sort_by(|a, b| {
        value_of(b.1)
            .total_cmp(&value_of(a.1))
            .then(b.2.total_cmp(&a.2))
    });

    let mut columns: Vec<CVector> = chosen.iter().map(|c| c.0.clone()).collect();
    let mut values: Vec<f64> = chosen.iter().map(|c| value_of(c.1)).collect();
    let mut col_keys: Vec<Option<usize>> = chosen.iter().map(|c| Some(c.1)).collect();
    let added = orthonormal_completion(&columns, n);
    let completed = added.len();
    if completed > 0 {
        log::warn!("only {} of {n} singular vectors resolved; completing the basis", columns.len());
    }
    for v in added {
        columns.push(v);
        values.push(0.0);
        col_keys.push(None);
    }
    let mut matrix = CMatrix::from_columns(&columns);
    fix_column_phases(&mut matrix);
    Collated {
        matrix,
        values,
        keys: col_keys,
        completed,
        groups,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::{unitarity_error, ZERO};
    use crate::Complex64;

    fn synthetic_runs(u: &CMatrix, keys: &[usize], m: usize) -> Vec<RunReadout> {
        let n = u.nrows();
        (0..n)
            .map(|b| {
                let mut probabilities = vec![0.0; m];
                let mut vectors = vec![CVector::zeros(n); m];
                for (a, &k) in keys.iter().enumerate() {
                    let beta = u[(b, a)].conj();
                    let v = u.column(a) * beta;
                    vectors[k] += &v;
                    probabilities[k] += v.norm_squared();
                }
                RunReadout {
                    probabilities,
                    vectors,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_exact_basis() {
        let u = corpus::random_phase_fixed_unitary(3, 4);
        let runs = synthetic_runs(&u, &[40, 20, 10], 128);
        let out = collate(&runs, 3, &CollateConfig::default(), |k| k as f64, |_| true);
        assert_eq!(out.completed, 0);
        assert!(unitarity_error(&out.matrix) < 1e-12);
        for c in 0..3 {
            assert!((out.matrix.column(c) - u.column(c)).norm() < 1e-10);
        }
        assert_eq!(out.values, vec![40.0, 20.0, 10.0]);
    }

    #[test]
    fn dropped_group_triggers_completion() {
        let u = corpus::random_phase_fixed_unitary(3, 5);
        let runs = synthetic_runs(&u, &[40, 20, 0], 128);
        let out = collate(&runs, 3, &CollateConfig::default(), |k| k as f64, |k| k > 2);
        assert_eq!(out.completed, 1);
        assert!(unitarity_error(&out.matrix) < 1e-12);
        let overlap = out.matrix.column(2).dotc(&u.column(2)).norm();
        assert!((overlap - 1.0).abs() < 1e-10);
        assert_eq!(out.keys[2], None);
    }

    #[test]
    fn folding_merges_signed_peaks() {
        assert_eq!(fold(3, 16), 3);
        assert_eq!(fold(13, 16), 3);
        assert_eq!(fold(8, 16), 8);
        let peaks = find_peaks(&[0.0, 0.5, 0.4, 0.0, 0.0, 0.3, 0.0], 1e-3, 2);
        assert_eq!(peaks, vec![1, 5]);
        let merged = find_peaks(&[0.0, 0.5, 0.0, 0.3, 0.0], 1e-3, 2);
        assert_eq!(merged, vec![1]);
        let _ = Complex64::new(0.0, 0.0) == ZERO;
    }
}
