use std::collections::BTreeSet;

use proptest::prelude::*;
use qphlab_core::disentangle::*;
use qphlab_core::protocols::{product_effect, CutSpec};
use qphlab_core::qstate::random::haar_state;
use qphlab_core::qstate::{epr_pair, trace_distance};
use qphlab_core::{Layout, PureState, SeededRng};

/// E_X[Z] = Σ_i p_i q(S_i)(1 − q(S_i))^m for X drawn as m i.i.d. samples.
fn expected_z(inst: &PeakedInstance, m: usize) -> f64 {
    let mut row = vec![0.0; inst.n()];
    for &(i, j) in inst.pairs() {
        row[i] += inst.q()[j];
    }
    (0..inst.n()).map(|i| inst.p()[i] * row[i] * (1.0 - row[i]).powi(m as i32)).sum()
}

#[test]
fn sampled_hitting_sets_meet_the_expectation_bound() {
    let root = SeededRng::new(404);
    for k in 0..20u64 {
        let n = [8, 16, 32][k as usize % 3];
        let mut rng = root.derive("instance", k);
        let inst = PeakedInstance::new_random_for_tests(n, &mut rng);
        let stats = hitting_set_statistics(&inst, &root.derive("seeds", k), 200).unwrap();
        assert!(stats.pass, "instance {k}: {stats:?}");
        let exact = expected_z(&inst, stats.m);
        assert!(exact <= stats.target + 1e-15);
        assert!((stats.mean_z - exact).abs() <= 4.0 * stats.std_error + 1e-12, "instance {k}: {} vs {exact}", stats.mean_z);
    }
}

trait ForTests {
    fn new_random_for_tests(n: usize, rng: &mut SeededRng) -> PeakedInstance;
}

impl ForTests for PeakedInstance {
    fn new_random_for_tests(n: usize, rng: &mut SeededRng) -> PeakedInstance {
        let density = 0.05 + 0.3 * rng.uniform();
        let gamma = 0.1 + 0.5 * rng.uniform();
        PeakedInstance::random(n, density, gamma, rng).unwrap()
    }
}

#[test]
fn exhaustive_sets_stay_within_the_size_bound() {
    let root = SeededRng::new(405);
    for k in 0..30u64 {
        let n = 2 + (k as usize % 15);
        let inst = PeakedInstance::new_random_for_tests(n, &mut root.derive("instance", k));
        let h = hitting_set_exact(&inst).unwrap();
        assert!(h.m <= h.size_bound, "{h:?}");
        assert!(h.uncovered_mass <= h.target * (1.0 + 1e-12));
        // Minimality: dropping any index breaks admissibility.
        for drop in &h.x {
            let smaller: BTreeSet<usize> = h.x.iter().copied().filter(|i| i != drop).collect();
            assert!(inst.uncovered_mass(&smaller) > h.target * (1.0 + 1e-12) || h.x.is_empty());
        }
    }
}

#[test]
fn diagonal_set_needs_several_columns() {
    let n = 6;
    let inst = PeakedInstance::new(vec![1.0 / n as f64; n], vec![1.0 / n as f64; n], (0..n).map(|i| (i, i)), 0.5).unwrap();
    let h = hitting_set_exact(&inst).unwrap();
    assert_eq!(h.m, 3);
    assert!(h.m <= h.size_bound);
}

#[test]
fn exhaustive_search_refuses_large_n() {
    let inst = PeakedInstance::random(17, 0.2, 0.5, &mut SeededRng::new(1)).unwrap();
    assert!(hitting_set_exact(&inst).is_err());
}

fn params() -> DisentanglerParams {
    // C = 0.01 keeps k' small enough for the pass probabilities to be visible.
    DisentanglerParams::new(2, 0.5, 0.01).unwrap()
}

/// P_prod(ψ, φ) as ⟨ψ⊗φ|Π_prod|ψ⊗φ⟩ with the dense projector.
fn product_prob_dense(a: &PureState, b: &PureState) -> f64 {
    let (joint, cut) = CutSpec::copies(a.layout());
    let pi = product_effect(&joint, &cut).unwrap();
    pi.accept_prob_pure(&a.tensor(b).relayout(joint).unwrap()).unwrap()
}

#[test]
fn product_inputs_pass_through_exactly() {
    let pr = params();
    let mut rng = SeededRng::new(6);
    for _ in 0..10 {
        let psi = haar_state(&Layout::qubits(1), &mut rng).tensor(&haar_state(&Layout::qubits(1), &mut rng));
        let e = StateEnsemble::single(psi.clone(), 3).unwrap();
        let r = gamma_channel([&e, &e, &e, &e], &pr, &ReferenceInner, &mut rng).unwrap();
        assert_eq!(r.output.len(), 1);
        assert_eq!(r.output.copy_count(), pr.k);
        assert_eq!(r.output.components()[0].state, psi);
        assert!((r.output.total_weight() - 1.0).abs() < 1e-9);
        let got = r.output.to_density().unwrap();
        let want = psi.power(pr.k).to_density();
        assert!(trace_distance(&got, &want).unwrap() < 1e-7);
    }
}

#[test]
fn orthogonal_product_pairs_fall_back() {
    let pr = params();
    let psi = PureState::basis(Layout::qubits(2), 0b00).unwrap();
    let phi = PureState::basis(Layout::qubits(2), 0b01).unwrap();
    assert!((product_prob_dense(&psi, &phi) - 0.5).abs() < 1e-12);
    let a = StateEnsemble::single(psi, 2).unwrap();
    let b = StateEnsemble::single(phi, 2).unwrap();
    let r = gamma_channel([&a, &a, &b, &b], &pr, &ReferenceInner, &mut SeededRng::new(0)).unwrap();
    let want = 1.0 - 0.5f64.powi(pr.k_prime as i32);
    assert!((r.fallback_weight - want).abs() < 1e-9);
    // ψ = |00⟩ is also the fallback state, so both weights are reported apart.
    assert_eq!(r.output.len(), 2);
}

#[test]
fn entangled_inputs_survive_with_product_test_power() {
    let pr = params();
    let e = StateEnsemble::single(epr_pair(), 4).unwrap();
    assert!((product_prob_dense(&epr_pair(), &epr_pair()) - 0.75).abs() < 1e-12);
    let r = gamma_channel([&e, &e, &e, &e], &pr, &ReferenceInner, &mut SeededRng::new(0)).unwrap();
    let survive = 0.75f64.powi(pr.k_prime as i32);
    assert!((r.p_acc - survive).abs() < 1e-9);
    assert!((r.fallback_weight - (1.0 - survive)).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_output_is_a_distribution(seed in any::<u64>(), sizes in prop::array::uniform4(1usize..4)) {
        let mut rng = SeededRng::new(seed);
        let layout = Layout::qubits(2);
        let make = |n: usize, rng: &mut SeededRng| {
            let w: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
            let t: f64 = w.iter().sum();
            let parts = w.iter().map(|x| (x / t, haar_state(&layout, rng))).collect();
            StateEnsemble::new(parts, 2).unwrap()
        };
        let ins: Vec<StateEnsemble> = sizes.iter().map(|&n| make(n, &mut rng)).collect();
        let pr = params();
        let r = gamma_channel([&ins[0], &ins[1], &ins[2], &ins[3]], &pr, &ReferenceInner, &mut rng).unwrap();
        prop_assert!(r.output.components().iter().all(|c| c.weight >= 0.0));
        prop_assert!((r.output.total_weight() - 1.0).abs() < 1e-9);
        prop_assert!(r.output.len() <= sizes[0] + sizes[1] + 1);
        prop_assert!(r.pr_accept_outside_s <= pr.alpha * r.p_acc + 1e-15);
        // c_ij against the dense product-test projector.
        let sigma1: Vec<PureState> = ins[0].components().iter().chain(ins[1].components()).map(|c| c.state.clone()).collect();
        let sigma2: Vec<PureState> = ins[2].components().iter().chain(ins[3].components()).map(|c| c.state.clone()).collect();
        for (i, a) in sigma1.iter().enumerate().take(r.c.len()) {
            for (j, b) in sigma2.iter().enumerate().take(r.c[i].len()) {
                let want = product_prob_dense(a, b).powi(pr.k_prime as i32);
                prop_assert!((r.c[i][j] - want).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn honest_episodes_never_lose_a_swap_round() {
    let base = amplifier_base_game().unwrap();
    let params = AmplifierParams { w: 34, t: 50, k_copies: 34 * 2 + 50, episodes: 10_000, far_distance: 0.5 };
    let r = transcript_amplifier_toy(&base, &honest_messages(), &params, &SeededRng::new(77)).unwrap();
    assert_eq!(r.swap_losses, vec![0, 0]);
    assert_eq!(r.far_checks, 0);
    assert_eq!(r.voted, 10_000);
    let sigma = (r.exact_vote_acceptance * (1.0 - r.exact_vote_acceptance) / r.episodes as f64).sqrt();
    assert!((r.accept_frequency - r.exact_vote_acceptance).abs() <= 3.0 * sigma + 1e-12);
    let sigma_h = (r.hoeffding_bound * (1.0 - r.hoeffding_bound) / r.voted as f64).sqrt();
    assert!(r.vote_rejection_frequency <= r.hoeffding_bound + 3.0 * sigma_h + 1e-12);
}

#[test]
fn far_transcripts_rarely_pass_all_tests() {
    let base = amplifier_base_game().unwrap();
    let w = swap_tests_needed(0.5, 1.0 / 64.0).unwrap();
    let params = AmplifierParams { w, t: 50, k_copies: w * 2 + 50, episodes: 10_000, far_distance: 0.5 };
    let r = transcript_amplifier_toy(&base, &adversarial_messages(0.5).unwrap(), &params, &SeededRng::new(78)).unwrap();
    assert_eq!(r.far_checks, 10_000);
    let exact = 0.875f64.powi(w as i32);
    assert!(exact <= r.far_pass_bound && r.far_pass_bound <= 1.0 / 64.0);
    let sigma = (exact * (1.0 - exact) / r.far_checks as f64).sqrt();
    assert!(r.far_pass_frequency <= 1.0 / 64.0 + 3.0 * sigma);
    assert!((r.far_pass_frequency - exact).abs() <= 4.0 * sigma);
    // A failed second round is a loss for the universal player: accept.
    assert_eq!(r.swap_losses[1], r.far_checks - r.far_passes);
}
