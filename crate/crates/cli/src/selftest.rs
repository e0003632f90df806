//! Built-in property suite and fixture checks for `qhosvd selftest`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use qhosvd::alg1::quantum_mode_multiply;
use qhosvd::alg2::build_qsve;
use qhosvd::completion::{initialize, Hyper};
use qhosvd::corpus;
use qhosvd::linalg::{eigh, expm_hermitian, singular_values, unitarity_error};
use qhosvd::sim::amplitude::{amplitude_estimation, overlap_state};
use qhosvd::sim::ops::{dense_extension, hermitian_extension, qpca_step, swap_like_operator, uniform_state};
use qhosvd::{hosvd, qten, unfold, verify, DensityMatrix, HosvdResult, QRamTree};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub worst: f64,
    pub tol: f64,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        passed: worst.is_finite() && worst <= tol,
        worst,
        tol,
    }
}

fn corpus_tensor(seed: u64) -> qhosvd::DenseTensor {
    let dims = corpus::random_dims(seed, 2..=4, 4);
    corpus::random_unit_tensor(&dims, seed)
}

fn hosvd_verify() -> f64 {
    (0..20)
        .map(|seed| {
            let t = corpus_tensor(seed);
            match hosvd(&t).and_then(|r| verify(&r, &t, 1e-9)) {
                Ok(rep) if rep.passed => rep.reconstruction,
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

fn dilation() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let t = corpus_tensor(seed);
        for k in 0..t.order() {
            let Ok(a) = unfold(&t, k) else { return f64::INFINITY };
            let a = a.matrix;
            let (r, c) = a.shape();
            let (vals, vecs) = eigh(&hermitian_extension(&a).to_dense());
            let mut expect: Vec<f64> = singular_values(&a).iter().flat_map(|&s| [s, -s]).collect();
            expect.resize(r + c, 0.0);
            expect.sort_by(|x, y| y.total_cmp(x));
            for (i, (v, e)) in vals.iter().zip(&expect).enumerate() {
                worst = worst.max((v - e).abs());
                if v.abs() > 1e-8 {
                    let top = vecs.column(i).rows(0, r).norm();
                    worst = worst.max((top - FRAC_1_SQRT_2).abs());
                }
            }
        }
    }
    worst
}

fn qram() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let t = corpus_tensor(seed);
        let Ok(tree) = QRamTree::build(&t) else { return f64::INFINITY };
        let leaves = tree.to_tensor().sub(&t).map(|d| d.max_abs()).unwrap_or(f64::INFINITY);
        worst = worst
            .max((tree.root() - t.frobenius_norm().powi(2)).abs())
            .max(tree.parent_sum_error())
            .max(leaves);
    }
    worst
}

/// Largest distance of the halving ratio of the one-step error from 4.
fn qpca_order() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let t = corpus::random_unit_tensor(&[2, 2, 2], seed);
        let (Ok((s, layout)), Ok((ext, _))) = (swap_like_operator(&t, 0), dense_extension(&t, 0)) else {
            return f64::INFINITY;
        };
        let rho1 = DensityMatrix::pure(&uniform_state(layout.logical, layout.padded));
        let rho2 = DensityMatrix::pure(&uniform_state(layout.rows, layout.padded));
        let n = layout.logical as f64;
        let err = |dt: f64| match qpca_step(&s, &rho1, &rho2, dt) {
            Ok(out) => out.trace_distance(&rho2.conjugate(&expm_hermitian(&ext, dt / n))),
            Err(_) => f64::NAN,
        };
        let ratio = err(1e-2) / err(5e-3);
        worst = worst.max(if ratio.is_nan() { f64::INFINITY } else { (ratio - 4.0).abs() });
    }
    worst
}

fn product_probability() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let t = corpus_tensor(seed + 100);
        for k in 0..t.order() {
            let n = t.dims()[k];
            let u = corpus::random_unitary(n, seed);
            match quantum_mode_multiply(&t, &u, k) {
                Ok(out) => worst = worst.max((out.success_probability - 1.0 / n as f64).abs()),
                Err(_) => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Worst error as a fraction of the `2^-t` bound.
fn amplitude() -> f64 {
    let t = 8;
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let s = corpus::random_unit_vector(4, seed);
        let z = corpus::random_unit_vector(4, seed + 500);
        let (phi, good) = overlap_state(&s, &z);
        let a = (1.0 - s.dotc(&z).re) / 2.0;
        match amplitude_estimation(&phi, &good, t) {
            Ok(e) => worst = worst.max((e.h - a).abs() * 2f64.powi(t as i32)),
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

fn qsve_phases() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let t = corpus::random_unit_tensor(&corpus::random_dims(seed + 50, 2..=3, 3), seed);
        for k in 0..t.order() {
            let Ok(o) = build_qsve(&t, k) else { return f64::INFINITY };
            worst = worst.max(unitarity_error(&o.w));
            let Ok(a) = unfold(&t, k) else { return f64::INFINITY };
            let mut spectrum = singular_values(&a.matrix);
            spectrum.resize(a.rows(), 0.0);
            for (_, s) in o.exact_phases() {
                worst = worst.max(spectrum.iter().map(|x| (x - s).abs()).fold(f64::INFINITY, f64::min));
            }
        }
    }
    worst
}

fn completion_gradients() -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let Ok(m) = initialize(&[4, 3, 3], &[2, 2, 2], Hyper::default(), 0.8, seed) else {
            return f64::INFINITY;
        };
        let idx = [seed as usize % 4, 1, 2];
        let Ok(g) = m.cell_gradient(&idx) else { return f64::INFINITY };
        let h = 1e-6;
        for c in 0..m.core.len() {
            let (mut plus, mut minus) = (m.clone(), m.clone());
            plus.core[c] += h;
            minus.core[c] -= h;
            let (Ok(p), Ok(q)) = (plus.predict(&idx), minus.predict(&idx)) else {
                return f64::INFINITY;
            };
            let numeric = (p - q) / (2.0 * h);
            let scale = numeric.abs().max(g.core[c].abs()).max(1e-3);
            worst = worst.max((numeric - g.core[c]).abs() / scale);
        }
    }
    worst
}

pub fn property_suite() -> Vec<Check> {
    vec![
        check("hosvd-verify", hosvd_verify(), 1e-9),
        check("extension-spectrum", dilation(), 1e-10),
        check("qram-invariants", qram(), 1e-12),
        check("qpca-second-order", qpca_order(), 0.5),
        check("product-probability", product_probability(), 1e-12),
        check("amplitude-bound", amplitude(), 1.0),
        check("qsve-exact-phases", qsve_phases(), 1e-10),
        check("completion-gradient", completion_gradients(), 1e-5),
    ]
}

/// Verifies `DIR/result/` against `DIR/input.qten`. Unreadable or
/// inconsistent fixture contents count as a failed check.
pub fn fixture_check(dir: &Path, tol: f64) -> Check {
    let outcome = qten::read(&dir.join("input.qten"))
        .and_then(|t| HosvdResult::read_dir(&dir.join("result")).and_then(|r| verify(&r, &t, tol)));
    match outcome {
        Ok(rep) => Check {
            name: "fixture-verify",
            passed: rep.passed,
            worst: rep.reconstruction.max(rep.orthogonality).max(rep.factor_unitarity),
            tol,
        },
        Err(e) => {
            log::error!("fixture {}: {e}", dir.display());
            Check {
                name: "fixture-verify",
                passed: false,
                worst: f64::INFINITY,
                tol,
            }
        }
    }
}
