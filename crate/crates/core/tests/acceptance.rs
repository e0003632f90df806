//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use qhosvd::alg1::{self, effective_rank, effective_rank_bound, quantum_mode_multiply, run_mode, Alg1Config};
use qhosvd::alg2::{self, build_qsve, mapped_bucket_width, qsve};
use qhosvd::completion::{self, sgd_step, synthetic_ratings, train, GradientMode, Hyper, TrainConfig};
use qhosvd::corpus;
use qhosvd::hosvd::{factor_angle, hosvd, verify};
use qhosvd::linalg::{eigh, expm_hermitian, singular_values, unitarity_error};
use qhosvd::sim::amplitude::{amplitude_estimation, overlap_state};
use qhosvd::sim::ops::{dense_extension, hermitian_extension, qpca_step, swap_like_operator, uniform_state, QpcaChannel};
use qhosvd::{mode_multiply, unfold, CMatrix, Complex64, DenseTensor, DensityMatrix, QRamTree, QuantumState};

/// Held-out RMSE of the classical run on the synthetic 8x8x4 corpus (seed 0,
/// eta 0.05, lambda = lambda_core = 1e-4, 200 epochs), recorded once.
const RECORDED_RMSE: f64 = 0.197289281035857;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_tensor(seed: u64) -> DenseTensor {
    let dims = corpus::random_dims(seed, 2..=4, 4);
    corpus::random_unit_tensor(&dims, seed)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50 {
        let t = corpus_tensor(seed);
        let r = hosvd(&t).map_err(|e| e.to_string())?;
        let rep = verify(&r, &t, 1e-9).map_err(|e| e.to_string())?;
        check(rep.passed, || format!("seed {seed} dims {:?}: {rep:?}", t.dims()))?;
        worst = worst.max(rep.reconstruction);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("50 tensors verified, worst reconstruction {worst:.1e}, {secs:.2} s"))
}

fn spectral_dilation() -> Outcome {
    let mut worst_val: f64 = 0.0;
    let mut worst_half: f64 = 0.0;
    for seed in 0..50 {
        let t = corpus_tensor(seed);
        for k in 0..t.order() {
            let a = unfold(&t, k).map_err(|e| e.to_string())?.matrix;
            let (r, c) = a.shape();
            let (vals, vecs) = eigh(&hermitian_extension(&a).to_dense());
            let sv = singular_values(&a);
            let mut expect: Vec<f64> = sv.iter().flat_map(|&s| [s, -s]).collect();
            expect.resize(r + c, 0.0);
            expect.sort_by(|x, y| y.total_cmp(x));
            for (v, e) in vals.iter().zip(&expect) {
                worst_val = worst_val.max((v - e).abs());
            }
            for (i, v) in vals.iter().enumerate() {
                if v.abs() > 1e-8 {
                    let col = vecs.column(i);
                    worst_half = worst_half
                        .max((col.rows(0, r).norm() - FRAC_1_SQRT_2).abs())
                        .max((col.rows(r, c).norm() - FRAC_1_SQRT_2).abs());
                }
            }
        }
    }
    check(worst_val <= 1e-10, || format!("eigenvalue error {worst_val:.1e}"))?;
    check(worst_half <= 1e-10, || format!("half-norm error {worst_half:.1e}"))?;
    Ok(format!("eigenvalue error {worst_val:.1e}, half-norm error {worst_half:.1e}"))
}

struct QpcaCase {
    s: qhosvd::SparseHermitian,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    ext: CMatrix,
    logical: usize,
    padded: usize,
}

fn qpca_case(seed: u64) -> QpcaCase {
    let t = corpus::random_unit_tensor(&[2, 2, 2], seed);
    let (s, layout) = swap_like_operator(&t, 0).unwrap();
    let (ext, _) = dense_extension(&t, 0).unwrap();
    let mut b = corpus::random_unit_vector(layout.padded, seed + 100);
    for i in layout.logical..layout.padded {
        b[i] = Complex64::new(0.0, 0.0);
    }
    let b = &b / Complex64::new(b.norm(), 0.0);
    QpcaCase {
        s,
        rho1: DensityMatrix::pure(&uniform_state(layout.logical, layout.padded)),
        rho2: DensityMatrix::pure(&b),
        ext,
        logical: layout.logical,
        padded: layout.padded,
    }
}

fn qpca_scaling() -> Outcome {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for seed in 0..10 {
        let c = qpca_case(seed);
        let n = c.logical as f64;
        let err = |dt: f64| {
            let out = qpca_step(&c.s, &c.rho1, &c.rho2, dt).unwrap();
            out.trace_distance(&c.rho2.conjugate(&expm_hermitian(&c.ext, dt / n)))
        };
        for dt in [1e-1, 1e-2, 1e-3] {
            let ratio = err(dt) / err(dt / 2.0);
            check((3.5..=4.5).contains(&ratio), || format!("seed {seed} dt {dt}: ratio {ratio}"))?;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    let mut budget = Vec::new();
    for eps in [1e-1, 1e-2] {
        let time: f64 = 1.0;
        let steps = (time * time / eps).ceil() as usize;
        let mut worst: f64 = 0.0;
        for seed in 0..3 {
            let c = qpca_case(seed);
            let ch = QpcaChannel::new(&c.s, &uniform_state(c.logical, c.padded), time / steps as f64)
                .map_err(|e| e.to_string())?;
            let mut rho = c.rho2.matrix().clone();
            for _ in 0..steps {
                rho = ch.apply(&rho);
            }
            let target = c.rho2.conjugate(&expm_hermitian(&c.ext, time / c.logical as f64));
            let dist = DensityMatrix::from_matrix_unchecked(rho).trace_distance(&target);
            check(dist <= eps, || format!("eps {eps} seed {seed}: {steps} steps give {dist:.2e}"))?;
            worst = worst.max(dist);
        }
        budget.push(format!("eps {eps}: {steps} steps, error {worst:.1e}"));
    }
    Ok(format!("ratios in [{lo:.3}, {hi:.3}]; {}", budget.join("; ")))
}

fn algorithm_one() -> Outcome {
    let d = 10;
    let cfg = Alg1Config::from_epsilon(2f64.powi(-(d as i32)))
        .map_err(|e| e.to_string())?
        .with_control_qubits(d);
    let tol = 2f64.powi(-(d as i32));
    let mut slowest: f64 = 0.0;
    let mut worst_angle: f64 = 0.0;
    for seed in [21u64, 22, 23] {
        let start = Instant::now();
        let t = corpus::random_unit_tensor(&[2, 2, 2], seed);
        let n = 6.0;
        for k in 0..3 {
            let sv = singular_values(&unfold(&t, k).unwrap().matrix);
            for i in 0..2 {
                let b = QuantumState::basis(2, i).unwrap();
                for e in run_mode(&t, k, &b, &cfg).map_err(|e| e.to_string())? {
                    let err = sv.iter().map(|s| (e.value.abs() - s / n).abs()).fold(f64::INFINITY, f64::min);
                    check(err <= tol, || format!("seed {seed} mode {k}: value {} off by {err:.2e}", e.value))?;
                }
            }
        }
        let (r, _) = alg1::qhosvd1(&t, &cfg).map_err(|e| e.to_string())?;
        let oracle = hosvd(&t).unwrap();
        for k in 0..3 {
            let angle = factor_angle(&r.factors[k], &oracle.factors[k], &oracle.spectra[k], 1e-8);
            check(angle <= 1e-2, || format!("seed {seed} mode {k}: angle {angle:.2e}"))?;
            worst_angle = worst_angle.max(angle);
        }
        let rep = verify(&r, &t, 1e-2).map_err(|e| e.to_string())?;
        check(rep.reconstruction <= 5e-2, || format!("seed {seed}: reconstruction {:.2e}", rep.reconstruction))?;
        let secs = start.elapsed().as_secs_f64();
        check(secs < 60.0, || format!("seed {seed}: {secs:.1} s"))?;
        slowest = slowest.max(secs);
    }
    Ok(format!("3 tensors at d=10, worst angle {worst_angle:.1e}, slowest {slowest:.2} s"))
}

fn oracle_spectrum(t: &DenseTensor, k: usize) -> Vec<f64> {
    let u = unfold(t, k).unwrap().matrix;
    let mut s = singular_values(&u);
    s.resize(u.nrows(), 0.0);
    s
}

fn algorithm_two() -> Outcome {
    let mut worst_w: f64 = 0.0;
    let mut worst_phase: f64 = 0.0;
    for seed in 0..10 {
        let dims = corpus::random_dims(seed + 50, 2..=3, 3);
        let t = corpus::random_tensor(&dims, seed);
        for k in 0..dims.len() {
            let o = build_qsve(&t, k).map_err(|e| e.to_string())?;
            worst_w = worst_w.max(unitarity_error(&o.w));
            let spectrum = oracle_spectrum(&t, k);
            for (_, s) in o.exact_phases() {
                let err = spectrum.iter().map(|x| (x - s).abs()).fold(f64::INFINITY, f64::min);
                worst_phase = worst_phase.max(err);
            }
        }
    }
    check(worst_w <= 1e-12, || format!("W unitarity {worst_w:.1e}"))?;
    check(worst_phase <= 1e-10, || format!("exact phase error {worst_phase:.1e}"))?;

    for seed in 0..5 {
        let t = corpus::random_unit_tensor(&[2, 2, 2], 300 + seed);
        for k in 0..3 {
            let spectrum = oracle_spectrum(&t, k);
            for i in 0..2 {
                let b = QuantumState::basis(2, i).unwrap();
                for e in qsve(&t, k, &b, 8).map_err(|e| e.to_string())? {
                    let ok = spectrum
                        .iter()
                        .any(|&s| (e.sigma - s).abs() <= mapped_bucket_width(s, 1.0, 8) + 1e-12);
                    check(ok, || format!("seed {seed} mode {k}: {} vs {spectrum:?}", e.sigma))?;
                }
            }
        }
    }

    let mut slowest: f64 = 0.0;
    for seed in [4u64, 5] {
        let start = Instant::now();
        let t = corpus::random_unit_tensor(&[3, 3, 3], seed);
        let full_rank = (0..3).all(|k| oracle_spectrum(&t, k).iter().all(|&s| s > 1e-3));
        check(full_rank, || format!("seed {seed}: corpus tensor is not full rank"))?;
        let (r, _) = alg2::qhosvd2(&t, 10).map_err(|e| e.to_string())?;
        let rep = verify(&r, &t, 1e-2).map_err(|e| e.to_string())?;
        check(rep.passed, || format!("seed {seed}: {rep:?}"))?;
        let secs = start.elapsed().as_secs_f64();
        check(secs < 120.0, || format!("seed {seed}: {secs:.1} s"))?;
        slowest = slowest.max(secs);
    }
    Ok(format!(
        "W unitarity {worst_w:.1e}, exact phases {worst_phase:.1e}, full-rank 3x3x3 verified, slowest {slowest:.2} s"
    ))
}

fn quantum_product() -> Outcome {
    let mut worst_p: f64 = 0.0;
    let mut worst_amp: f64 = 0.0;
    for seed in 0..20 {
        let dims = corpus::random_dims(seed + 900, 2..=3, 4);
        let t = corpus::random_tensor(&dims, seed);
        let unit = t.normalized().unwrap().0;
        for k in 0..dims.len() {
            let n = dims[k];
            let u = corpus::random_unitary(n, seed * 7 + k as u64);
            let classical = mode_multiply(&t, &u.adjoint(), k).unwrap();
            let out = quantum_mode_multiply(&t, &u, k).map_err(|e| e.to_string())?;
            let formula = classical.frobenius_norm().powi(2) / (t.frobenius_norm().powi(2) * u.norm_squared());
            worst_p = worst_p.max((out.success_probability - formula).abs());
            let unit_p = quantum_mode_multiply(&unit, &u, k).map_err(|e| e.to_string())?.success_probability;
            worst_p = worst_p.max((unit_p - 1.0 / n as f64).abs());

            worst_amp = worst_amp.max(out.product.sub(&classical).unwrap().max_abs());
            let padded: Vec<usize> = dims.iter().map(|d| d.next_power_of_two()).collect();
            let cn = classical.frobenius_norm();
            for flat in 0..classical.len() {
                let idx = classical.multi_index(flat);
                let pos = idx.iter().zip(&padded).fold(0, |acc, (&i, &d)| acc * d + i);
                let want = classical.data()[flat] / cn;
                worst_amp = worst_amp.max((out.postselected.amplitudes()[pos] - want).norm());
            }
        }
    }
    check(worst_p <= 1e-12, || format!("success probability error {worst_p:.1e}"))?;
    check(worst_amp <= 1e-10, || format!("amplitude error {worst_amp:.1e}"))?;
    Ok(format!("probability error {worst_p:.1e}, amplitude error {worst_amp:.1e}"))
}

fn qram_tree() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut tree_check = |t: &DenseTensor| -> Result<(), String> {
        let tree = QRamTree::build(t).map_err(|e| e.to_string())?;
        let root = (tree.root() - t.frobenius_norm().powi(2)).abs();
        let parents = tree.parent_sum_error();
        let leaves = tree.to_tensor().sub(t).unwrap().max_abs();
        let e = root.max(parents).max(leaves);
        check(e <= 1e-12, || format!("dims {:?}: root {root:.1e}, parents {parents:.1e}, leaves {leaves:.1e}", t.dims()))?;
        worst = worst.max(e);
        Ok(())
    };
    for seed in 0..100 {
        let dims = corpus::random_dims(seed + 2000, 1..=4, 4);
        let t = if seed % 2 == 0 {
            corpus::random_real_unit_tensor(&dims, seed)
        } else {
            corpus::random_tensor(&dims, seed)
        };
        tree_check(&t)?;
    }
    // Real 2x2x2: unit root whose children are the norms of the two last-mode slices.
    let real = corpus::random_real_unit_tensor(&[2, 2, 2], 7);
    tree_check(&real)?;
    let tree = QRamTree::build(&real).unwrap();
    let children = tree.suffix_level(1).unwrap();
    for (c, child) in children.iter().enumerate() {
        let slice = real.slice(2, c).unwrap().frobenius_norm().powi(2);
        check((child - slice).abs() <= 1e-12, || format!("child {c}: {child} vs {slice}"))?;
    }
    check((tree.root() - 1.0).abs() <= 1e-12, || format!("root {}", tree.root()))?;
    let complex = corpus::random_unit_tensor(&[2, 2, 2], 8);
    tree_check(&complex)?;
    check(QRamTree::build(&complex).unwrap().is_complex(), || "complex leaves expected".into())?;
    Ok(format!("102 tensors, worst invariant error {worst:.1e}"))
}

fn amplitude_inner_product() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for t in [6usize, 10, 12] {
        let bound = 2f64.powi(-(t as i32));
        for seed in 0..50 {
            let n = 2 + (seed as usize % 4);
            let s = corpus::random_unit_vector(n, seed);
            let z = corpus::random_unit_vector(n, seed + 5000);
            let (phi, good) = overlap_state(&s, &z);
            let a = (1.0 - s.dotc(&z).re) / 2.0;
            let h = amplitude_estimation(&phi, &good, t).map_err(|e| e.to_string())?.h;
            check((h - a).abs() <= bound, || format!("t {t} seed {seed}: h {h} vs {a}"))?;
            worst_ratio = worst_ratio.max((h - a).abs() / bound);
        }
    }
    Ok(format!("150 estimates, worst error {worst_ratio:.3} of the bound"))
}

fn fd_gradients() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let mut m = completion::initialize(&[4, 3, 3], &[2, 2, 3], Hyper::default(), 0.8, 100 + seed)
            .map_err(|e| e.to_string())?;
        m.hyper = Hyper::default();
        let mut rng = corpus::rng(seed);
        use rand::Rng;
        let idx: Vec<usize> = m.dims.iter().map(|&d| rng.random_range(0..d)).collect();
        let y: f64 = rng.random_range(1.0..5.0);
        let g = m.cell_gradient(&idx).map_err(|e| e.to_string())?;
        let dl = g.prediction - y;
        let loss = |p: &completion::CompletionModel| {
            let v = p.predict(&idx).unwrap();
            (v - y) * (v - y) / 2.0
        };
        let h = 1e-6;
        let mut rel = |analytic: f64, perturb: &dyn Fn(&mut completion::CompletionModel, f64)| {
            let mut plus = m.clone();
            perturb(&mut plus, h);
            let mut minus = m.clone();
            perturb(&mut minus, -h);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            let scale = analytic.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max((analytic - numeric).abs() / scale);
        };
        for k in 0..m.dims.len() {
            let i = idx[k];
            for j in 0..m.ranks[k] {
                rel(dl * g.rows[k][j], &|p, d| p.factors[k][(i, j)] += d);
            }
        }
        for c in 0..m.core.len() {
            rel(dl * g.core[c], &|p, d| p.core[c] += d);
        }
    }
    Ok(worst)
}

fn max_param_diff(a: &completion::CompletionModel, b: &completion::CompletionModel) -> f64 {
    let core = a.core.iter().zip(&b.core).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    a.factors
        .iter()
        .zip(&b.factors)
        .map(|(x, y)| (x - y).amax())
        .fold(core, f64::max)
}

fn completion_criteria() -> Outcome {
    let fd = fd_gradients()?;
    check(fd <= 1e-5, || format!("finite-difference relative error {fd:.1e}"))?;

    let data = synthetic_ratings(&[8, 8, 4], &[3, 3, 2], 0.3, 0.05, 0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let cfg = TrainConfig {
        hyper: Hyper {
            eta: 0.05,
            lambda: 1e-4,
            lambda_core: 1e-4,
        },
        epochs: 200,
        seed: 0,
        ..TrainConfig::default()
    };
    let trained = train(&data.observed, &[3, 3, 2], &cfg).map_err(|e| e.to_string())?;
    let rmse = trained.model.rmse(&data.held_out).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(rmse <= 1.1 * RECORDED_RMSE, || format!("held-out RMSE {rmse} above {}", 1.1 * RECORDED_RMSE))?;
    check(secs < 120.0, || format!("training took {secs:.1} s"))?;

    // Per-step agreement, starting from a partly trained model.
    let warm = train(&data.observed, &[3, 3, 2], &TrainConfig { epochs: 20, ..cfg }).map_err(|e| e.to_string())?;
    let hybrid = TrainConfig {
        mode: GradientMode::Hybrid,
        t_qubits: 12,
        ..cfg
    };
    let bound = 10.0 * 2f64.powi(-12);
    let mut worst: f64 = 0.0;
    let mut model = warm.model;
    for (idx, y) in data.observed.entries().iter().take(5) {
        let mut a = model.clone();
        let mut b = model.clone();
        sgd_step(&mut a, idx, *y, &cfg).map_err(|e| e.to_string())?;
        sgd_step(&mut b, idx, *y, &hybrid).map_err(|e| e.to_string())?;
        let diff = max_param_diff(&a, &b);
        check(diff <= bound, || format!("sample {idx:?}: step difference {diff:.2e}"))?;
        worst = worst.max(diff);
        model = a;
    }

    let start = Instant::now();
    let full = train(&data.observed, &[3, 3, 2], &hybrid).map_err(|e| e.to_string())?;
    let hybrid_secs = start.elapsed().as_secs_f64();
    let hybrid_rmse = full.model.rmse(&data.held_out).map_err(|e| e.to_string())?;
    check(hybrid_secs < 120.0, || format!("hybrid training took {hybrid_secs:.1} s"))?;
    check(hybrid_rmse <= 1.1 * RECORDED_RMSE, || format!("hybrid held-out RMSE {hybrid_rmse}"))?;
    Ok(format!(
        "FD error {fd:.1e}, RMSE {rmse:.4} (limit {:.4}) in {secs:.1} s, hybrid step difference {worst:.1e}, \
         hybrid run RMSE {hybrid_rmse:.4} in {hybrid_secs:.1} s",
        1.1 * RECORDED_RMSE
    ))
}

fn complexity_artifacts() -> Outcome {
    let mut worst_fraction: f64 = 0.0;
    for seed in 0..5 {
        for dims in [[2usize, 2, 2], [3, 3, 3]] {
            let t = corpus::random_unit_tensor(&dims, 700 + seed);
            for time in [PI, 2.0 * PI, 4.0 * PI] {
                let mut cfg = Alg1Config::from_epsilon(2f64.powi(-8)).map_err(|e| e.to_string())?;
                cfg.sim_time = time;
                let bound = effective_rank_bound(&t, time);
                for k in 0..3 {
                    let r = effective_rank(&t, k, &cfg).map_err(|e| e.to_string())?;
                    check(r as f64 <= bound, || format!("dims {dims:?} t {time}: rank {r} above {bound}"))?;
                    worst_fraction = worst_fraction.max(r as f64 / bound);
                }
            }
        }
    }
    Ok(format!(
        "effective rank at most {:.0}% of 0.5 max^2 t^2; step budget checked under criterion 3; speedup not checked (state-vector simulation is exponential)",
        100.0 * worst_fraction
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("classical HOSVD passes verify on the corpus", oracle_equivalence),
        ("Hermitian extension spectrum and eigenvector halves", spectral_dilation),
        ("qPCA step error is second order; step budget", qpca_scaling),
        ("eigenvalue-based pipeline end to end", algorithm_one),
        ("singular-value-estimation pipeline end to end", algorithm_two),
        ("quantum tensor-matrix product", quantum_product),
        ("qRAM tree invariants", qram_tree),
        ("amplitude-estimation inner product", amplitude_inner_product),
        ("tensor completion", completion_criteria),
        ("complexity artifacts", complexity_artifacts),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:6.2} s] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:6.2} s] {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
