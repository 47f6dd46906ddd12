//! Acceptance run: one PASS/FAIL line per criterion with measured values.
//! Exits non-zero if any criterion fails.

use std::time::Instant;

use qphlab_core::disentangle::*;
use qphlab_core::games::{copy_game_values, minimax_equality_check, GridOptions};
use qphlab_core::hamiltonian::*;
use qphlab_core::protocols::{
    gentle_post_state, product_effect, product_self_prob, swap_accept_prob, swap_effect, symmetric_projector, CutSpec,
};
use qphlab_core::qstate::linalg::{self, c};
use qphlab_core::qstate::random::{haar_state, random_density, random_effect, random_mixed};
use qphlab_core::qstate::{epr_pair, trace_distance};
use qphlab_core::verifiers::*;
use qphlab_core::{EffectOperator, Layout, SeededRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, limit_s: Option<f64>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let secs = t.elapsed().as_secs_f64();
    let in_time = limit_s.is_none_or(|l| secs < l);
    let pass = out.pass && in_time;
    let limit = limit_s.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
    println!("{} [{id:>2}] {name}: {}; time {secs:.2} s{limit}", if pass { "PASS" } else { "FAIL" }, out.detail);
    pass
}

fn c1_swap_formula() -> Outcome {
    let root = SeededRng::new(1);
    let mut worst = 0.0f64;
    for k in 0..1000u64 {
        let mut rng = root.derive("pair", k);
        let d = 2 + (k as usize % 7);
        let one = Layout::single(d).unwrap();
        let rho = random_density(&one, 1 + (k as usize / 7) % d, &mut rng);
        let sigma = random_density(&one, 1 + (k as usize / 3) % d, &mut rng);
        let pi = swap_effect(d).unwrap();
        let joint = rho.tensor(&sigma).relayout(pi.layout().clone()).unwrap();
        let direct = pi.accept_prob(&joint).unwrap();
        let formula = 0.5 + 0.5 * linalg::trace_product(rho.matrix(), sigma.matrix()).re;
        let api = swap_accept_prob(&rho, &sigma).unwrap();
        worst = worst.max((direct - formula).abs()).max((api - direct).abs());
    }
    outcome(worst <= 1e-10, format!("1000 pairs, d ≤ 8, max |tr(Π_sym ρ⊗σ) − ½ − tr(ρσ)/2| = {worst:.2e}"))
}

fn c2_product_order() -> Outcome {
    let mut mins = Vec::new();
    for single in [Layout::qubits(2), Layout::new(vec![3, 3]).unwrap()] {
        let (joint, cut) = CutSpec::copies(&single);
        let swap = symmetric_projector(&joint, &cut).unwrap();
        let prod = product_effect(&joint, &cut).unwrap();
        let diff = linalg::hermitize(&(swap.matrix() - prod.matrix()));
        mins.push(linalg::eigvalsh(&diff)[0]);
    }
    let epr = product_self_prob(&epr_pair().to_density()).unwrap();
    let pass = mins.iter().all(|&m| m >= -1e-10) && (epr - 0.75).abs() <= 1e-10;
    outcome(
        pass,
        format!("λ_min(Π_swap − Π_prod) = {:.2e} (qubits), {:.2e} (qutrits); P_prod(EPR) = {epr:.12}", mins[0], mins[1]),
    )
}

fn c3_qma2() -> Outcome {
    let mut worst = 0.0f64;
    for eps in [0.0, 0.01, 0.1] {
        let want = (1.5 - 2f64.sqrt()) * (1.0 - eps) * (1.0 - eps);
        let (_, closed) = qma2_curve_minimum(eps).unwrap();
        let (_, numeric) = qma2_curve_numeric_minimum(eps, 1e-5).unwrap();
        worst = worst.max((closed - want).abs()).max((numeric - want).abs());
    }
    let (_, v0) = qma2_curve_minimum(0.0).unwrap();
    let fx = qma2_yes_fixture();
    let v = compile_qma2_verifier(&fx.effect, fx.eps).unwrap();
    let r = verify_compiled_game(&v, true, &VerifyOptions::default()).unwrap();
    let pass = worst <= 1e-6 && v0 > 0.085 && r.value >= 0.08;
    outcome(
        pass,
        format!(
            "max curve-minimum error {worst:.2e}; value(ε=0) = {v0:.6}; compiled YES min-over-φ = {:.6} (grid h = {})",
            r.value, VerifyOptions::default().grid.resolution
        ),
    )
}

fn c4_qsigma3() -> Outcome {
    let mut rng = SeededRng::new(4);
    let mut branch = 0.0f64;
    for _ in 0..1000 {
        let s = rng.uniform();
        let p = mix_probability(s).unwrap();
        let (x, y) = (1.0 - p + p * s, 0.5 * (1.0 + p));
        branch = branch.max((x - y).abs()).max((x.max(y) - soundness_envelope(s, p).unwrap()).abs());
    }
    let mut gap = 0.0f64;
    let h = EffectOperator::identity(Layout::qubits(2));
    for _ in 0..1000 {
        let s = rng.uniform() * 0.99;
        let c_ = s + (0.001 + 0.999 * rng.uniform()) * (1.0 - s);
        let v = compile_psigma2_to_qsigma3(&h, c_, s).unwrap();
        gap = gap.max(((v.c_prime() - v.s_prime()) - (c_ - s) / (3.0 - 2.0 * s)).abs());
    }
    let fx = qsigma3_no_fixture();
    let v = compile_psigma2_to_qsigma3(&fx.effect, fx.c, fx.s).unwrap();
    let opts = VerifyOptions { grid: GridOptions { resolution: 0.1, ..GridOptions::default() }, ..VerifyOptions::default() };
    let r = verify_compiled_game(&v, false, &opts).unwrap();
    let pass = branch <= 1e-12 && gap <= 1e-12 && r.value <= v.s_prime() + 0.02;
    outcome(
        pass,
        format!(
            "branch error {branch:.2e}; gap-identity error {gap:.2e}; NO value {:.6} vs s' + 0.02 = {:.6} (grid h = 0.1)",
            r.value,
            v.s_prime() + 0.02
        ),
    )
}

fn c5_hitting_sets() -> Outcome {
    let root = SeededRng::new(5);
    let mut worst_ratio = f64::NEG_INFINITY;
    let mut all_stat = true;
    let mut all_size = true;
    let mut exhaustive = 0;
    for k in 0..20u64 {
        let n = [8, 12, 16, 24, 32][k as usize % 5];
        let mut rng = root.derive("instance", k);
        let density = 0.05 + 0.3 * rng.uniform();
        let gamma = 0.1 + 0.5 * rng.uniform();
        let inst = PeakedInstance::random(n, density, gamma, &mut rng).unwrap();
        let st = hitting_set_statistics(&inst, &root.derive("seeds", k), 200).unwrap();
        all_stat &= st.mean_z <= st.target + 3.0 * st.std_error;
        worst_ratio = worst_ratio.max((st.mean_z - st.target) / st.std_error.max(1e-300));
        if n <= 16 {
            let h = hitting_set_exact(&inst).unwrap();
            all_size &= h.m <= h.size_bound;
            exhaustive += 1;
        }
    }
    outcome(
        all_stat && all_size,
        format!(
            "20 instances, 200 seeds each: max (mean Z − γε)/SE = {worst_ratio:.2}; exhaustive size ≤ bound on {exhaustive} instances with N ≤ 16: {all_size}"
        ),
    )
}

fn c6_gamma() -> Outcome {
    let pr = DisentanglerParams::new(2, 0.5, 0.01).unwrap();
    let mut rng = SeededRng::new(6);
    let mut exact = true;
    let mut weight_err = 0.0f64;
    let mut dist = 0.0f64;
    for _ in 0..20 {
        let psi = haar_state(&Layout::qubits(1), &mut rng).tensor(&haar_state(&Layout::qubits(1), &mut rng));
        let e = StateEnsemble::single(psi.clone(), 3).unwrap();
        let r = gamma_channel([&e, &e, &e, &e], &pr, &ReferenceInner, &mut rng).unwrap();
        exact &= r.output.len() == 1 && r.output.components()[0].state == psi && r.output.copy_count() == pr.k;
        weight_err = weight_err.max((r.output.total_weight() - 1.0).abs());
        dist = dist.max(trace_distance(&r.output.to_density().unwrap(), &psi.power(pr.k).to_density()).unwrap());
    }
    let e = StateEnsemble::single(epr_pair(), 4).unwrap();
    let r = gamma_channel([&e, &e, &e, &e], &pr, &ReferenceInner, &mut SeededRng::new(0)).unwrap();
    let survive = product_self_prob(&epr_pair().to_density()).unwrap().powi(pr.k_prime as i32);
    let fb_err = (r.p_acc - survive).abs().max((r.fallback_weight - (1.0 - survive)).abs());
    let pass = exact && weight_err <= 1e-9 && fb_err <= 1e-9;
    outcome(
        pass,
        format!(
            "20 product inputs: output is ψ^⊗k: {exact}, max |Σw − 1| = {weight_err:.2e}, max d_tr = {dist:.2e}; EPR fallback error vs 0.75^{} = {fb_err:.2e}",
            pr.k_prime
        ),
    )
}

fn c7_amplifier() -> Outcome {
    let base = amplifier_base_game().unwrap();
    let honest = AmplifierParams { w: 34, t: 50, k_copies: 34 * 2 + 50, episodes: 10_000, far_distance: 0.5 };
    let h = transcript_amplifier_toy(&base, &honest_messages(), &honest, &SeededRng::new(77)).unwrap();
    let lost: usize = h.swap_losses.iter().sum();
    let sigma_v = (h.exact_vote_acceptance * (1.0 - h.exact_vote_acceptance) / h.episodes as f64).sqrt();
    let vote_ok = (h.accept_frequency - h.exact_vote_acceptance).abs() <= 3.0 * sigma_v + 1e-12;
    let sigma_h = (h.hoeffding_bound * (1.0 - h.hoeffding_bound) / h.voted as f64).sqrt();
    let hoeff_ok = h.vote_rejection_frequency <= h.hoeffding_bound + 3.0 * sigma_h + 1e-12;

    let w = swap_tests_needed(0.5, 1.0 / 64.0).unwrap();
    let adv = AmplifierParams { w, t: 50, k_copies: w * 2 + 50, episodes: 10_000, far_distance: 0.5 };
    let a = transcript_amplifier_toy(&base, &adversarial_messages(0.5).unwrap(), &adv, &SeededRng::new(78)).unwrap();
    let exact = 0.875f64.powi(w as i32);
    let sigma = (exact * (1.0 - exact) / a.far_checks.max(1) as f64).sqrt();
    let far_ok = a.far_checks > 0 && a.far_pass_frequency <= 1.0 / 64.0 + 3.0 * sigma;
    let pass = lost == 0 && w == 34 && vote_ok && hoeff_ok && far_ok;
    outcome(
        pass,
        format!(
            "honest SWAP losses {lost} in {} episodes; W = {w}, far pass frequency {:.5} vs 1/64 + 3σ = {:.5}; vote rejection {:.2e} vs Hoeffding {:.2e}",
            h.episodes,
            a.far_pass_frequency,
            1.0 / 64.0 + 3.0 * sigma,
            h.vote_rejection_frequency,
            h.hoeffding_bound
        ),
    )
}

fn c8_kitaev() -> Outcome {
    let corpus = kitaev_corpus();
    let root = SeededRng::new(8);
    let mut kernels_ok = true;
    let mut residual = 0.0f64;
    let mut min_scaled = f64::INFINITY;
    let mut shape_ok = true;
    for (k, (_, circ)) in corpus.iter().enumerate() {
        shape_ok &= circ.m() <= 5 && circ.total_qubits() <= 12;
        let kh = kitaev_compile(circ).unwrap();
        let spec = kh.spectrum();
        kernels_ok &= spec.kernel_dim == 1 << circ.inputs();
        min_scaled = min_scaled.min(spec.scaled_gap);
        let mut rng = root.derive("input", k as u64);
        for _ in 0..3 {
            let psi = haar_state(&Layout::qubits(circ.inputs()), &mut rng);
            let h = history_state(circ, &psi).unwrap();
            residual = residual.max((&kh.matrix * h.amplitudes()).norm());
        }
    }
    let pass = corpus.len() >= 10 && shape_ok && kernels_ok && residual <= 1e-9 && min_scaled >= KITAEV_GAP_CONSTANT;
    outcome(
        pass,
        format!(
            "{} circuits: kernel dim = 2^b: {kernels_ok}; max residual {residual:.2e}; min gap·m² = {min_scaled:.4} vs constant {KITAEV_GAP_CONSTANT}",
            corpus.len()
        ),
    )
}

fn c9_psh() -> Outcome {
    let yes = psh_yes_fixture();
    let ry = psh_hardness_reduce(&yes.circuit, 2, yes.c, yes.s, &PshOptions::default()).unwrap();
    let honest = honest_copy_energy(&ry, &yes.circuit, 0.05).unwrap();
    let yes_upper = honest.max_energy + honest.margin;

    let no = psh_no_fixture();
    let rn = psh_hardness_reduce(&no.circuit, 2, no.c, no.s, &PshOptions::default()).unwrap();
    let g = quantified_energy_grid(&rn.instance, 0.25).unwrap();

    // Complement by brute force on both fixtures.
    let mut comp_ok = true;
    for red in [&ry, &rn] {
        let comp = complement_reduce(&red.instance);
        let back = complement_reduce(&comp);
        comp_ok &= back.summary() == red.instance.summary();
        comp_ok &= back.hamiltonian().to_dense().unwrap() == red.dense().unwrap();
        comp_ok &= comp.thresholds() == (-red.b, -red.a);
        let o = quantified_energy_grid(&red.instance, 0.4).unwrap();
        let f = quantified_energy_grid(&comp, 0.4).unwrap();
        comp_ok &= (o.value + f.value).abs() < 1e-9;
    }
    let pass = honest.pass && yes_upper <= ry.a && g.lower >= rn.b && comp_ok;
    outcome(
        pass,
        format!(
            "YES energy ≤ {yes_upper:.4} (grid h = 0.05, margin {:.4}) vs a = {:.4}; NO energy ≥ {:.4} (grid h = 0.25) vs b = {:.4}; complement involution: {comp_ok}",
            honest.margin, ry.a, g.lower, rn.b
        ),
    )
}

fn c10_minimax() -> Outcome {
    let root = SeededRng::new(10);
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let mut rng = root.derive("effect", k);
        let dims = if k % 2 == 0 { vec![2, 2] } else { vec![2, 3] };
        let e = random_effect(&Layout::new(dims).unwrap(), &mut rng);
        worst = worst.max(minimax_equality_check(&e, 1e-6).unwrap().difference);
    }
    let mut copy_err = 0.0f64;
    let mut rows = Vec::new();
    for n in 1..=3 {
        let v = copy_game_values(n).unwrap();
        let want = 0.5 + 0.5f64.powi(n as i32 + 1);
        copy_err = copy_err.max((v.solver_pure - 1.0).abs()).max((v.solver_mixed - want).abs());
        rows.push(format!("n={n}: {:.6}/{:.6}", v.solver_pure, v.solver_mixed));
    }
    outcome(
        worst <= 1e-6 && copy_err <= 1e-6,
        format!("100 effects: max |∃∀ − ∀∃| = {worst:.2e}; copy game pure/mixed {}; max error {copy_err:.2e}", rows.join(", ")),
    )
}

fn c11_gentle() -> Outcome {
    let root = SeededRng::new(11);
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for k in 0..500u64 {
        let mut rng = root.derive("gentle", k);
        let d = 2 + (k as usize % 4);
        let layout = Layout::single(d).unwrap();
        let rho = if k % 2 == 0 { haar_state(&layout, &mut rng).to_density() } else { random_mixed(&layout, &mut rng) };
        // M = I − tE with t chosen so that tr(Mρ) = 1 − ε.
        let e = random_effect(&layout, &mut rng);
        let pe = e.accept_prob(&rho).unwrap();
        let eps = (0.1 * rng.uniform()).min(pe);
        let t = if pe > 0.0 { eps / pe } else { 0.0 };
        let m = EffectOperator::new(layout.clone(), linalg::identity(d) - e.matrix() * c(t, 0.0)).unwrap();
        let (post, p) = gentle_post_state(&rho, &m).unwrap();
        let eps_real = 1.0 - p;
        let dist = trace_distance(&rho, &post).unwrap();
        ok &= eps_real <= 0.1 + 1e-12 && dist <= 2.0 * eps_real.max(0.0).sqrt() + 1e-12;
        if eps_real > 1e-12 {
            worst_ratio = worst_ratio.max(dist / (2.0 * eps_real.sqrt()));
        }
    }
    outcome(ok, format!("500 instances, ε ≤ 0.1: max d_tr/(2√ε) = {worst_ratio:.4}"))
}

fn main() {
    let start = Instant::now();
    let results = [
        run(1, "SWAP-test formula", Some(5.0), c1_swap_formula),
        run(2, "product test below SWAP test", None, c2_product_order),
        run(3, "QMA(2) curve and compiled YES instance", Some(60.0), c3_qma2),
        run(4, "QΣ3 compilation identities", None, c4_qsigma3),
        run(5, "hitting sets", Some(120.0), c5_hitting_sets),
        run(6, "Γ on product and entangled inputs", None, c6_gamma),
        run(7, "transcript amplifier", None, c7_amplifier),
        run(8, "clock Hamiltonian corpus", Some(120.0), c8_kitaev),
        run(9, "quantified Hamiltonian fixtures and complement", None, c9_psh),
        run(10, "minimax and copy game", None, c10_minimax),
        run(11, "gentle measurement", None, c11_gentle),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed in {:.1} s", results.len(), start.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
