//! Acceptance suite: every numbered criterion below runs at its stated
//! tolerance and prints one PASS/FAIL line (visible with `--nocapture`).
//!
//! Run with `cargo test --test acceptance -- --nocapture`.

use std::time::Instant;

use corrmax_core::bounds::{
    bell_tests_spin, chsh_optimal_directions, cross_norm_bound, holevo_bound,
    schmidt_mixture_imax, separability_witnesses, theorem_bound, two_qubit_max, werner_exact,
};
use corrmax_core::fano::OutcomeCount;
use corrmax_core::linalg::{self, hermitian_part, CMatrix};
use corrmax_core::measurement::{
    coincidence, joint_distribution, mutual_information, MaximalPOM,
};
use corrmax_core::optimizer::{
    extend_frames, gradient, hessian_quadratic_form, mirror_family_curve, optimize_coincidence,
    optimize_coincidence_seeded, second_order_classify, Classification, FramePair,
    OptimizeOptions,
};
use corrmax_core::scan::{run_scan, ScanConfig};
use corrmax_core::state::{named_state, random_density, random_separable, NamedStateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {criterion} ({name}) failed: {detail}");
}

fn scan_options(seed: u64) -> OptimizeOptions {
    OptimizeOptions {
        restarts: 8,
        seed,
        max_iters: 3000,
        tol: 1e-10,
        ..OptimizeOptions::default()
    }
}

#[test]
fn criterion_01_two_qubit_exact_law() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let rho = random_density(2, 2, 4, 10_000 + seed).unwrap();
        let exact = two_qubit_max(&rho).unwrap().value;
        let result = optimize_coincidence(&rho, 2, &scan_options(seed)).unwrap();
        worst = worst.max((result.coincidence - exact).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "two-qubit exact law",
        worst <= 1e-6 && elapsed <= 120.0,
        &format!("max |optimizer - (1+s1)/2| = {worst:.3e} over 200 states in {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_trine_saddle() {
    let rho = named_state(&NamedStateSpec::TrineDemo).unwrap();
    let trine = MaximalPOM::trine();
    let c = coincidence(&rho, &trine, &trine).unwrap();
    let (residual, _) =
        corrmax_core::optimizer::extremality_residual(&rho, &trine, &trine).unwrap();
    let discrimination =
        corrmax_core::optimizer::discrimination_check(&rho, &trine, &trine).unwrap();
    let frame = corrmax_core::measurement::naimark_extend(&trine, 3).unwrap();
    let so = second_order_classify(&rho, &frame, &frame, 6).unwrap();
    let pass = (c - 2.0 / 3.0).abs() <= 1e-12
        && residual <= 1e-10
        && discrimination.side_a.optimal
        && discrimination.side_b.optimal
        && so.classification == Classification::Saddle
        && so.min_eigenvalue < -1e-6
        && so.max_eigenvalue > 1e-6;
    report(
        2,
        "trine saddle",
        pass,
        &format!(
            "C = {c:.15}, residual = {residual:.2e}, discrimination = {}/{}, class = {}, hessian = [{:.3e}, {:.3e}]",
            discrimination.side_a.optimal,
            discrimination.side_b.optimal,
            so.classification,
            so.min_eigenvalue,
            so.max_eigenvalue
        ),
    );
}

#[test]
fn criterion_03_mirror_family() {
    let alphas: Vec<f64> = (0..101).map(|i| i as f64 / 100.0).collect();
    let curve = mirror_family_curve(&alphas).unwrap();
    let worst = curve
        .iter()
        .map(|&(alpha, c)| {
            let want = 2.0 / 3.0 + 0.75 * (alpha - 1.0 / 3.0).powi(2);
            (c - want).abs()
        })
        .fold(0.0, f64::max);
    report(
        3,
        "mirror family",
        worst <= 1e-12,
        &format!("max |C(alpha) - quadratic| = {worst:.3e} over 101 grid points"),
    );
}

#[test]
fn criterion_04_isotropic_sweep() {
    let mut worst_value: f64 = 0.0;
    let mut worst_dot: f64 = 0.0;
    for i in 0..=10 {
        let w = i as f64 / 10.0;
        let rho = named_state(&NamedStateSpec::Isotropic { w }).unwrap();
        let bound = two_qubit_max(&rho).unwrap();
        let want = 0.5 * (1.0 + (4.0 * w - 1.0).abs() / 3.0);
        worst_value = worst_value.max((bound.value - want).abs());
        let a = bound.certificate.direction_a.unwrap();
        let b = bound.certificate.direction_b.unwrap();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        if w < 0.25 {
            worst_dot = worst_dot.max((dot - 1.0).abs());
        } else if w > 0.25 {
            worst_dot = worst_dot.max((dot + 1.0).abs());
        }
    }
    report(
        4,
        "isotropic sweep",
        worst_value <= 1e-9 && worst_dot <= 1e-6,
        &format!("max value error = {worst_value:.3e}, max |a.b -/+ 1| = {worst_dot:.3e}"),
    );
}

#[test]
fn criterion_05_werner_qutrit() {
    let mut pass = true;
    let mut detail = String::new();
    for &x in &[0.4, 0.7, 1.0] {
        let rho = named_state(&NamedStateSpec::Werner { d: 3, x }).unwrap();
        let want = 1.0 / 3.0 + (x - 1.0 / 3.0).abs() / 4.0;
        let id = CMatrix::identity(3, 3);
        let result = optimize_coincidence_seeded(
            &rho,
            3,
            &scan_options(42),
            &[(id.clone(), id.clone())],
        )
        .unwrap();
        let bound = theorem_bound(&rho, OutcomeCount::Finite(3)).unwrap().value;
        let value_ok = (result.coincidence - want).abs() <= 1e-6;
        let bound_ok = bound >= want - 1e-9;
        pass &= value_ok && bound_ok;
        detail.push_str(&format!(
            "x={x}: C={:.9} (want {want:.9}), bound={bound:.9}; ",
            result.coincidence
        ));
    }
    report(5, "werner d=3 exact vs optimizer", pass, detail.trim_end());
}

#[test]
fn criterion_06_cross_norm() {
    let mut worst: f64 = 0.0;
    for &d in &[2usize, 3] {
        for i in 0..=8 {
            let x = -1.0 + i as f64 / 4.0;
            let rho = named_state(&NamedStateSpec::Werner { d, x }).unwrap();
            let got = cross_norm_bound(&rho).unwrap().value;
            let want = 1.0 / d as f64 + (x - 1.0 / d as f64).abs();
            worst = worst.max((got - want).abs());
        }
    }
    let mut max_separable: f64 = 0.0;
    for seed in 0..100u64 {
        let rho = random_separable(2, 2, 4, 60_000 + seed).unwrap();
        max_separable = max_separable.max(cross_norm_bound(&rho).unwrap().value);
    }
    report(
        6,
        "cross norm",
        worst <= 1e-9 && max_separable <= 1.0 + 1e-9,
        &format!(
            "max werner error = {worst:.3e}; max over 100 separable mixtures = {max_separable:.9}"
        ),
    );
}

#[test]
fn criterion_07_bound_chain() {
    let mut worst_slack = f64::INFINITY;
    for seed in 0..50u64 {
        let rho = random_density(2, 2, 4, 20_000 + seed).unwrap();
        let r2 = optimize_coincidence(&rho, 2, &scan_options(seed)).unwrap();
        let warm3 = extend_frames(&r2.frame_x, &r2.frame_y, 3);
        let r3 = optimize_coincidence_seeded(&rho, 3, &scan_options(seed + 1), &[warm3]).unwrap();
        let warm4 = extend_frames(&r3.frame_x, &r3.frame_y, 4);
        let r4 = optimize_coincidence_seeded(&rho, 4, &scan_options(seed + 2), &[warm4]).unwrap();
        let cross = cross_norm_bound(&rho).unwrap().value;
        worst_slack = worst_slack
            .min(r3.coincidence - r2.coincidence)
            .min(r4.coincidence - r3.coincidence)
            .min(cross - r4.coincidence);
    }
    report(
        7,
        "bound chain",
        worst_slack >= -1e-7,
        &format!("min slack along C2 <= C3 <= C4 <= cross-norm = {worst_slack:.3e} over 50 states"),
    );
}

#[test]
fn criterion_08_conjecture_scan() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut config = ScanConfig::new((2, 2), 1200, 20_260_809, dir.path().join("scan.jsonl"));
    config.rank = 4;
    config.ns = vec![2, 3];
    config.optimizer = OptimizeOptions {
        restarts: 6,
        max_iters: 3000,
        tol: 1e-10,
        ..OptimizeOptions::default()
    };
    let summary = run_scan(&config).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let converged_fraction = summary.converged_count as f64 / summary.count as f64;
    let pass = summary.count == 1200
        && summary.max_gap <= 1e-5
        && converged_fraction >= 0.99
        && elapsed <= 1800.0;
    report(
        8,
        "conjecture scan",
        pass,
        &format!(
            "1200 states: max gap = {:.3e}, converged = {:.2}%, violations = {}, {elapsed:.0}s",
            summary.max_gap,
            100.0 * converged_fraction,
            summary.violation_count
        ),
    );
}

#[test]
fn criterion_09_derivative_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(90_001);
    let mut worst_grad: f64 = 0.0;
    for trial in 0..100u64 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let rho = random_density(2, 2, 4, 30_000 + trial).unwrap();
        let pair = FramePair::with_frames(
            &rho,
            n,
            linalg::haar_unitary(n, &mut rng),
            linalg::haar_unitary(n, &mut rng),
        )
        .unwrap();
        let (g_m, g_n) = gradient(&pair);
        let m = hermitian_part(&linalg::ginibre(n, n, &mut rng));
        let nn = hermitian_part(&linalg::ginibre(n, n, &mut rng));
        let analytic = linalg::expectation(&m, &g_m).re + linalg::expectation(&nn, &g_n).re;
        let eps = 1e-5;
        let numeric = (pair.retract(&m, &nn, eps).coincidence()
            - pair.retract(&m, &nn, -eps).coincidence())
            / (2.0 * eps);
        let scale = analytic.abs().max(numeric.abs()).max(1e-3);
        worst_grad = worst_grad.max((analytic - numeric).abs() / scale);
    }

    let mut worst_hess: f64 = 0.0;
    for trial in 0..10u64 {
        let rho = random_density(2, 2, 4, 40_000 + trial).unwrap();
        let n = 3;
        let pair = FramePair::with_frames(
            &rho,
            n,
            linalg::haar_unitary(n, &mut rng),
            linalg::haar_unitary(n, &mut rng),
        )
        .unwrap();
        let c0 = pair.coincidence();
        for _ in 0..20 {
            let m = hermitian_part(&linalg::ginibre(n, n, &mut rng));
            let nn = hermitian_part(&linalg::ginibre(n, n, &mut rng));
            let analytic = hessian_quadratic_form(&pair, &m, &nn);
            let eps = 1e-4;
            let numeric = (pair.retract(&m, &nn, eps).coincidence() - 2.0 * c0
                + pair.retract(&m, &nn, -eps).coincidence())
                / (eps * eps);
            let scale = analytic.abs().max(numeric.abs()).max(1e-2);
            worst_hess = worst_hess.max((analytic - numeric).abs() / scale);
        }
    }
    report(
        9,
        "derivative oracles",
        worst_grad <= 1e-5 && worst_hess <= 1e-4,
        &format!(
            "gradient rel err = {worst_grad:.3e} (100 pairs), hessian rel err = {worst_hess:.3e} (10 pairs x 20 probes)"
        ),
    );
}

#[test]
fn criterion_10_holevo_and_schmidt_mixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(100_001);
    let mut worst_excess = f64::NEG_INFINITY;
    for trial in 0..100u64 {
        let (d1, d2) = if trial % 2 == 0 { (2, 2) } else { (2, 3) };
        let rho = random_density(d1, d2, d1 * d2, 50_000 + trial).unwrap();
        let a = MaximalPOM::from_unitary_columns(&linalg::haar_unitary(d1, &mut rng)).unwrap();
        let b = MaximalPOM::from_unitary_columns(&linalg::haar_unitary(d2, &mut rng)).unwrap();
        let info = mutual_information(&joint_distribution(&rho, &a, &b).unwrap());
        let bound = holevo_bound(&rho).unwrap();
        worst_excess = worst_excess.max(info - bound);
    }

    let mut worst_gap: f64 = 0.0;
    for trial in 0..50 {
        // Random two-component Schmidt mixtures on two qutrits.
        let w0: f64 = rng.random::<f64>();
        let weights = vec![w0, 1.0 - w0];
        let mut probs = Vec::new();
        for _ in 0..2 {
            let mut row: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= total);
            probs.push(row);
        }
        let phases = if trial % 2 == 0 {
            None
        } else {
            Some(vec![
                (0..3)
                    .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                    .collect(),
                (0..3)
                    .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                    .collect(),
            ])
        };
        let spec = NamedStateSpec::SchmidtMixture {
            weights,
            phases,
            schmidt_probs: probs,
        };
        let rho = named_state(&spec).unwrap();
        let basis = MaximalPOM::computational(3);
        let attained = mutual_information(&joint_distribution(&rho, &basis, &basis).unwrap());
        let want = schmidt_mixture_imax(&spec).unwrap();
        worst_gap = worst_gap.max((attained - want).abs());
        // The attained value also saturates against the Holevo bound side.
        worst_excess = worst_excess.max(attained - holevo_bound(&rho).unwrap());
    }
    report(
        10,
        "holevo / schmidt mixture",
        worst_excess <= 1e-9 && worst_gap <= 1e-9,
        &format!(
            "max I(A,B) - bound = {worst_excess:.3e}; max |attained - formula| = {worst_gap:.3e}"
        ),
    );
}

#[test]
fn criterion_11_bell() {
    let singlet = named_state(&NamedStateSpec::Singlet).unwrap();
    let chsh = bell_tests_spin(&singlet, chsh_optimal_directions()).unwrap();
    let singlet_ok = (chsh.coincidence_bell_lhs - (1.0 + 2f64.sqrt())).abs() <= 1e-9
        && chsh.coincidence_bell_lhs > 2.0;

    let mut rng = ChaCha8Rng::seed_from_u64(110_001);
    let mut max_product = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let mut bloch = [[0.0f64; 3]; 2];
        for v in bloch.iter_mut() {
            loop {
                for x in v.iter_mut() {
                    *x = rng.random::<f64>() * 2.0 - 1.0;
                }
                if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
                    break;
                }
            }
        }
        let rho = named_state(&NamedStateSpec::Product {
            m: bloch[0],
            n: bloch[1],
        })
        .unwrap();
        let mut dirs = [[0.0f64; 3]; 4];
        for v in dirs.iter_mut() {
            loop {
                for x in v.iter_mut() {
                    *x = rng.random::<f64>() * 2.0 - 1.0;
                }
                let norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                if norm2 > 1e-4 && norm2 <= 1.0 {
                    break;
                }
            }
        }
        let combo = bell_tests_spin(&rho, dirs).unwrap().coincidence_bell_lhs;
        max_product = max_product.max(combo);
    }
    report(
        11,
        "bell",
        singlet_ok && max_product <= 2.0 + 1e-9,
        &format!(
            "singlet CHSH = {:.12} (want {:.12}); max over 1e4 product trials = {max_product:.9}",
            chsh.coincidence_bell_lhs,
            1.0 + 2f64.sqrt()
        ),
    );
}

#[test]
fn criterion_12_witnesses() {
    let singlet = named_state(&NamedStateSpec::Singlet).unwrap();
    let w = separability_witnesses(&singlet).unwrap();
    let singlet_ok = (w.hs_norm - 3.0).abs() <= 1e-9
        && (w.purity_witness - 1.5).abs() <= 1e-9
        && (w.logneg_lower - 1.0).abs() <= 1e-9;

    let mut max_hs: f64 = 0.0;
    let mut max_purity: f64 = 0.0;
    let mut max_identity: f64 = w.hs_identity_residual;
    for seed in 0..100u64 {
        let rho = random_separable(2, 2, 3, 70_000 + seed).unwrap();
        let report = separability_witnesses(&rho).unwrap();
        max_hs = max_hs.max(report.hs_norm);
        max_purity = max_purity.max(report.purity_witness);
        max_identity = max_identity.max(report.hs_identity_residual);
    }
    // The identity also holds on entangled states.
    for seed in 0..20u64 {
        let rho = random_density(2, 2, 4, 80_000 + seed).unwrap();
        max_identity = max_identity.max(separability_witnesses(&rho).unwrap().hs_identity_residual);
    }
    report(
        12,
        "witnesses",
        singlet_ok && max_hs <= 1.0 + 1e-9 && max_purity <= 1.0 + 1e-9 && max_identity <= 1e-10,
        &format!(
            "singlet = ({:.9}, {:.9}, {:.9}); separable max hs = {max_hs:.6}, max purity = {max_purity:.6}, identity residual = {max_identity:.2e}",
            w.hs_norm, w.purity_witness, w.logneg_lower
        ),
    );
}

// Spec-level sanity used by several criteria: theorem bound dominates the
// optimizer value on random states of both dimension pairs.
#[test]
fn theorem_bound_dominates_optimizer() {
    let mut worst = f64::INFINITY;
    for seed in 0..30u64 {
        let rho = random_density(2, 2, 4, 90_000 + seed).unwrap();
        let value = optimize_coincidence(&rho, 2, &scan_options(seed))
            .unwrap()
            .coincidence;
        let bound = theorem_bound(&rho, OutcomeCount::Finite(2)).unwrap().value;
        worst = worst.min(bound - value);
    }
    for seed in 0..20u64 {
        let rho = random_density(3, 3, 9, 95_000 + seed).unwrap();
        let value = optimize_coincidence(&rho, 3, &scan_options(seed))
            .unwrap()
            .coincidence;
        let bound = theorem_bound(&rho, OutcomeCount::Finite(3)).unwrap().value;
        worst = worst.min(bound - value);
    }
    assert!(
        worst >= -1e-7,
        "theorem bound fell below optimizer value by {worst:.3e}"
    );
}

// Werner exact values agree between the closed form and the optimizer across
// the sign change of x - 1/d (the permuted-pairs branch).
#[test]
fn werner_negative_branch_reachable() {
    let rho = named_state(&NamedStateSpec::Werner { d: 2, x: -0.8 }).unwrap();
    let want = werner_exact(2, -0.8).unwrap();
    let result = optimize_coincidence(&rho, 2, &scan_options(7)).unwrap();
    assert!((result.coincidence - want).abs() <= 1e-6);
    // Achieved by a derangement pairing: |a_j> = |b_P(j)>, P(j) != j.
    let a0 = result.pom_a.ket(0);
    let b1 = result.pom_b.ket(1);
    let overlap = a0.dotc(b1).norm();
    assert!(overlap > 0.99, "expected swapped pairing, overlap {overlap}");
}
