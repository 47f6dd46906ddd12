use std::time::Instant;

use proptest::prelude::*;
use qphlab_core::games::GridOptions;
use qphlab_core::qstate::linalg;
use qphlab_core::qstate::random::{haar_state, random_density, random_effect};
use qphlab_core::verifiers::*;
use qphlab_core::{Layout, SeededRng};

#[test]
fn qma2_effect_matches_two_branch_simulation() {
    let mut rng = SeededRng::new(11);
    for trial in 0..200 {
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let layout = Layout::new(vec![d, d]).unwrap();
        let h = random_effect(&layout, &mut rng);
        let v = compile_qma2_verifier(&h, 0.0).unwrap();
        let one = Layout::single(d).unwrap();
        let rho = random_density(&one, 1 + trial % d, &mut rng).tensor(&random_density(&one, 1, &mut rng));
        let direct = v.effect().accept_prob(&rho.relayout(v.effect().layout().clone()).unwrap()).unwrap();
        let branched = simulate_qma2_two_branch(&h, &rho).unwrap();
        assert!((direct - branched).abs() < 1e-9, "trial {trial}: {direct} vs {branched}");
    }
}

#[test]
fn curve_minimum_on_fine_grid() {
    for eps in [0.0, 0.01, 0.1] {
        let (_, closed) = qma2_curve_minimum(eps).unwrap();
        let (delta, best) = qma2_curve_numeric_minimum(eps, 1e-5).unwrap();
        assert!((best - closed).abs() < 1e-6, "ε = {eps}: numeric {best} vs {closed}");
        assert!((delta - (1.0 - eps) / (1.0 + 2f64.sqrt())).abs() < 1e-6);
    }
    let (delta, value) = qma2_curve_minimum(0.0).unwrap();
    assert!((delta - 0.41421).abs() < 1e-5);
    assert!(value > 0.085 && (value - 0.08579).abs() < 1e-5);
}

#[test]
fn qma2_curve_bounds_the_compiled_acceptance() {
    // On ψ⊗φ with ψ the YES witness, acceptance never falls below the curve.
    let fx = qma2_yes_fixture();
    let v = compile_qma2_verifier(&fx.effect, fx.eps).unwrap();
    let psi = qphlab_core::PureState::bloch(0.0, 0.0);
    let mut rng = SeededRng::new(12);
    for _ in 0..300 {
        let phi = haar_state(&Layout::qubits(1), &mut rng);
        let delta = (1.0 - psi.inner(&phi).unwrap().norm_sqr()).max(0.0).sqrt();
        let joint = psi.tensor(&phi).relayout(v.effect().layout().clone()).unwrap();
        let acc = v.effect().accept_prob_pure(&joint).unwrap();
        assert!(acc >= qma2_acceptance_curve(delta.min(1.0), fx.eps).unwrap() - 1e-12);
    }
}

#[test]
fn qsigma3_effect_matches_branch_formula() {
    let mut rng = SeededRng::new(13);
    for _ in 0..50 {
        let h = random_effect(&Layout::new(vec![2, 3]).unwrap(), &mut rng);
        let s = rng.uniform() * 0.9;
        let v = compile_psigma2_to_qsigma3(&h, s + 0.05, s).unwrap();
        let a = Layout::single(2).unwrap();
        let b = Layout::single(3).unwrap();
        let (r1, r2, r3) = (random_density(&a, 2, &mut rng), random_density(&b, 3, &mut rng), random_density(&a, 1, &mut rng));
        let joint = r1.tensor(&r2).tensor(&r3).relayout(v.effect().layout().clone()).unwrap();
        let direct = v.effect().accept_prob(&joint).unwrap();
        let branched = simulate_qsigma3_two_branch(&h, v.mix_prob, &r1, &r2, &r3).unwrap();
        assert!((direct - branched).abs() < 1e-12);
    }
}

#[test]
fn largest_eigenvalue_dominates_overlap() {
    let mut rng = SeededRng::new(14);
    for i in 0..500 {
        let d = 2 + i % 3;
        let l = Layout::single(d).unwrap();
        let r1 = random_density(&l, 1 + i % d, &mut rng);
        let r3 = random_density(&l, 1 + (i / 3) % d, &mut rng);
        let lmax = *r1.eigenvalues().last().unwrap();
        assert!(lmax >= linalg::trace_product(r1.matrix(), r3.matrix()).re - 1e-10);
    }
}

#[test]
fn fixtures_meet_thresholds_on_the_grid() {
    let fx = qma2_yes_fixture();
    let v = compile_qma2_verifier(&fx.effect, fx.eps).unwrap();
    let t = Instant::now();
    let r = verify_compiled_game(&v, true, &VerifyOptions::default()).unwrap();
    assert!(t.elapsed().as_secs_f64() < 60.0);
    assert!(r.pass && r.value >= 0.08);

    let opts = VerifyOptions { grid: GridOptions { resolution: 0.1, ..GridOptions::default() }, ..VerifyOptions::default() };
    for fx in [qsigma3_yes_fixture(), qsigma3_no_fixture()] {
        let v = compile_psigma2_to_qsigma3(&fx.effect, fx.c, fx.s).unwrap();
        let t = Instant::now();
        let r = verify_compiled_game(&v, fx.yes, &opts).unwrap();
        assert!(t.elapsed().as_secs_f64() < 60.0);
        assert!(r.pass, "{}: {r:?}", fx.name);
    }
}

proptest! {
    #[test]
    fn gap_identity(s in 0.0f64..0.99, frac in 0.001f64..1.0) {
        let c = s + frac * (1.0 - s);
        let h = qphlab_core::EffectOperator::identity(Layout::qubits(2));
        let v = compile_psigma2_to_qsigma3(&h, c, s).unwrap();
        prop_assert!(((v.c_prime() - v.s_prime()) - (c - s) / (3.0 - 2.0 * s)).abs() < 1e-12);
        prop_assert!((v.c_prime() - (1.0 - v.mix_prob * (1.0 - c))).abs() < 1e-12);
    }

    #[test]
    fn envelope_branches_meet(s in 0.0f64..=1.0) {
        let p = mix_probability(s).unwrap();
        prop_assert!(((1.0 - p + p * s) - 0.5 * (1.0 + p)).abs() < 1e-12);
        prop_assert!((soundness_envelope(s, p).unwrap() - (2.0 - s) / (3.0 - 2.0 * s)).abs() < 1e-12);
    }
}
