//! Amplitude estimation by phase estimation of the Grover operator.
//!
//! For a state `|phi>` and a projector `Pi` onto the good subspace with
//! `a = |Pi phi|^2 = sin^2(theta)`, the operator
//! `G = (2|phi><phi| - I)(I - 2 Pi)` rotates the plane spanned by the good and
//! bad components of `|phi>` by `2 theta`, so its eigenphases there are
//! `+-2 theta`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{CMatrix, CVector, ONE};

use super::phase::phase_estimation_vec;

#[derive(Clone, Debug)]
pub struct AmplitudeEstimate {
    /// Interpolated estimate of `a`.
    pub h: f64,
    /// Estimate from the most likely folded bucket alone.
    pub h_mode: f64,
    /// Bucket distribution of the phase estimation.
    pub probabilities: Vec<f64>,
}

/// `G = (2|phi><phi| - I)(I - 2 Pi)` on the full space.
pub fn grover_operator(phi: &CVector, good: &[bool]) -> CMatrix {
    let n = phi.len();
    let reflect_phi = (phi * phi.adjoint()) * Complex64::new(2.0, 0.0) - CMatrix::identity(n, n);
    let oracle = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        good.iter().map(|&g| if g { -ONE } else { ONE }),
    ));
    reflect_phi * oracle
}

fn good_probability(phi: &CVector, good: &[bool]) -> f64 {
    phi.iter()
        .zip(good)
        .filter(|(_, &g)| g)
        .map(|(z, _)| z.norm_sqr())
        .sum()
}

/// Amplitude estimation with `t` control qubits, simulated in the
/// two-dimensional plane that contains `|phi>`.
pub fn amplitude_estimation(phi: &CVector, good: &[bool], t: usize) -> Result<AmplitudeEstimate> {
    if phi.len() != good.len() {
        return invalid("good-subspace mask does not match the state");
    }
    if (phi.norm() - 1.0).abs() > 1e-10 {
        return invalid("amplitude estimation needs a normalized state");
    }
    let a = good_probability(phi, good).clamp(0.0, 1.0);
    let theta = a.sqrt().asin();
    // Basis (good, bad): phi = (sin theta, cos theta), oracle = diag(-1, 1).
    let (s, c) = theta.sin_cos();
    let phi2 = CVector::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)]);
    let g = grover_operator(&phi2, &[true, false]);
    let pe = phase_estimation_vec(&g, &phi2, t)?;
    Ok(estimate_from_buckets(pe.probabilities))
}

/// Same estimate computed on the full space; used to check the reduction.
pub fn amplitude_estimation_full(phi: &CVector, good: &[bool], t: usize) -> Result<AmplitudeEstimate> {
    if phi.len() != good.len() {
        return invalid("good-subspace mask does not match the state");
    }
    let g = grover_operator(phi, good);
    let pe = phase_estimation_vec(&g, phi, t)?;
    Ok(estimate_from_buckets(pe.probabilities))
}

/// Folds `y` with `M - y` (the two eigenphases `+-2 theta`), takes the most
/// likely folded bucket and refines it with its stronger neighbour: for a
/// phase sitting a fraction `f` of a bucket past `y*`, the amplitude ratio of
/// the two buckets is `f / (1 - f)` up to `O(1/M^2)`.
pub fn estimate_from_buckets(probabilities: Vec<f64>) -> AmplitudeEstimate {
    let m = probabilities.len();
    let half = m / 2;
    let folded: Vec<f64> = (0..=half)
        .map(|k| {
            if k == 0 || k == half {
                probabilities[k]
            } else {
                probabilities[k] + probabilities[m - k]
            }
        })
        .collect();
    let best = (0..=half)
        .max_by(|&a, &b| folded[a].total_cmp(&folded[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let left = best.checked_sub(1).map(|k| folded[k]);
    let right = (best < half).then(|| folded[best + 1]);
    let (neighbour, dir) = match (left, right) {
        (Some(l), Some(r)) if l > r => (l, -1.0),
        (_, Some(r)) => (r, 1.0),
        (Some(l), None) => (l, -1.0),
        (None, None) => (0.0, 0.0),
    };
    let (ps, pn) = (folded[best].sqrt(), neighbour.sqrt());
    let delta = if ps + pn > 0.0 { pn / (ps + pn) } else { 0.0 };
    let y_hat = (best as f64 + dir * delta).clamp(0.0, half as f64);
    let h = (PI * y_hat / m as f64).sin().powi(2);
    let h_mode = (PI * best as f64 / m as f64).sin().powi(2);
    AmplitudeEstimate {
        h,
        h_mode,
        probabilities,
    }
}

/// `(|+>|s> + |->|z>) / sqrt(2)` with the ancilla as the most significant
/// qubit; the good subspace is ancilla `|1>`, with probability `(1 - Re<s|z>) / 2`.
pub fn overlap_state(s: &CVector, z: &CVector) -> (CVector, Vec<bool>) {
    let n = s.len();
    let mut phi = CVector::zeros(2 * n);
    for i in 0..n {
        phi[i] = (s[i] + z[i]) * 0.5;
        phi[n + i] = (s[i] - z[i]) * 0.5;
    }
    let good = (0..2 * n).map(|i| i >= n).collect();
    (phi, good)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn grover_plane_matches_full_space() {
        let s = corpus::random_unit_vector(4, 1);
        let z = corpus::random_unit_vector(4, 2);
        let (phi, good) = overlap_state(&s, &z);
        let a = amplitude_estimation(&phi, &good, 6).unwrap();
        let b = amplitude_estimation_full(&phi, &good, 6).unwrap();
        for (x, y) in a.probabilities.iter().zip(&b.probabilities) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((a.h - b.h).abs() < 1e-9);
    }

    #[test]
    fn overlap_state_probability() {
        let s = corpus::random_unit_vector(3, 5);
        let z = corpus::random_unit_vector(3, 6);
        let (phi, good) = overlap_state(&s, &z);
        assert!((phi.norm() - 1.0).abs() < 1e-14);
        let expect = (1.0 - s.dotc(&z).re) / 2.0;
        assert!((good_probability(&phi, &good) - expect).abs() < 1e-14);
    }

    #[test]
    fn extremes() {
        let s = corpus::random_unit_vector(4, 7);
        let (phi, good) = overlap_state(&s, &s);
        let e = amplitude_estimation(&phi, &good, 8).unwrap();
        assert!(e.h.abs() < 1e-12);
        let mut a = CVector::zeros(2);
        a[0] = ONE;
        let mut b = CVector::zeros(2);
        b[1] = ONE;
        let (phi, good) = overlap_state(&a, &b);
        let e = amplitude_estimation(&phi, &good, 8).unwrap();
        assert!((e.h - 0.5).abs() < 1e-12);
    }

    #[test]
    fn error_within_one_bucket_scale() {
        for t in [6usize, 10] {
            for seed in 0..40 {
                let s = corpus::random_unit_vector(4, seed);
                let z = corpus::random_unit_vector(4, seed + 1000);
                let (phi, good) = overlap_state(&s, &z);
                let a = (1.0 - s.dotc(&z).re) / 2.0;
                let e = amplitude_estimation(&phi, &good, t).unwrap();
                assert!((e.h - a).abs() <= 2f64.powi(-(t as i32)), "t {t} seed {seed}: {} vs {a}", e.h);
            }
        }
    }
}
