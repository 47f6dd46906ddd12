use std::f64::consts::SQRT_2;

use super::{CompiledVerifier, Construction};
use crate::error::{Error, Result};
use crate::games::{GameInstance, Purity, Quantifier, QuantifierPrefix};
use crate::protocols::{gentle_post_state, symmetric_projector, CutSpec};
use crate::qstate::linalg;
use crate::qstate::{DensityOperator, EffectOperator, Layout, SeededRng};

/// Splits a layout [A…, B…] with identical halves.
fn halves(layout: &Layout) -> Result<Layout> {
    let dims = layout.dims();
    let k = dims.len() / 2;
    if dims.len() % 2 != 0 || dims[..k] != dims[k..] {
        return Err(Error::LayoutMismatch(dims[..k].to_vec(), dims[k..].to_vec()));
    }
    Layout::new(dims[..k].to_vec())
}

fn sym_projector(layout: &Layout) -> Result<EffectOperator> {
    let half = halves(layout)?;
    let (_, cut) = CutSpec::copies(&half);
    symmetric_projector(layout, &cut)
}

/// SWAP test on A, B first; accept on failure, otherwise run `h`.
///
/// The effect is (I − Π_sym) + Π_sym H Π_sym. With `eps` the promise
/// parameter of `h` (YES: some ψ⊗ψ accepted with probability ≥ 1 − ε; NO:
/// every product input accepted with probability ≤ ε) the compiled game
/// ∃ψ ∀φ has thresholds c' = (3/2 − √2)(1 − ε)² and s' = ε.
pub fn compile_qma2_verifier(h: &EffectOperator, eps: f64) -> Result<CompiledVerifier> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} outside [0, 1)")));
    }
    let half = halves(h.layout())?;
    let pi = sym_projector(h.layout())?;
    let n = h.dim();
    let p = pi.matrix();
    let m = (linalg::identity(n) - p) + p * h.matrix() * p;
    let effect = EffectOperator::new(h.layout().clone(), linalg::hermitize(&m))?;
    let d = half.total_dim();
    let prefix = QuantifierPrefix::alternating(Quantifier::Exists, &[d, d], Purity::Pure)?;
    let (_, c_prime) = qma2_curve_minimum(eps)?;
    let game = GameInstance::new(effect, prefix)?.with_thresholds(c_prime, eps)?;
    Ok(CompiledVerifier {
        game,
        construction: Construction::Qma2ToPsigma2,
        source_c: 1.0 - eps,
        source_s: eps,
        source_eps: eps,
        mix_prob: 1.0,
        register_permutation: vec![0, 1],
    })
}

/// δ²/2 + (1 − δ²/2)·max{0, 1 − ε − (1 + √2)δ}.
pub fn qma2_acceptance_curve(delta: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) || !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("need δ ∈ [0, 1] and ε ∈ [0, 1), got δ = {delta}, ε = {eps}")));
    }
    let fail = 0.5 * delta * delta;
    Ok(fail + (1.0 - fail) * (1.0 - eps - (1.0 + SQRT_2) * delta).max(0.0))
}

/// Minimizer δ* = (1 − ε)/(1 + √2) of the curve and its value
/// (3/2 − √2)(1 − ε)².
pub fn qma2_curve_minimum(eps: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε = {eps} outside [0, 1)")));
    }
    let delta = (1.0 - eps) / (1.0 + SQRT_2);
    Ok((delta, (1.5 - SQRT_2) * (1.0 - eps) * (1.0 - eps)))
}

/// Numerical minimum of the curve: a scan with step `step` over [0, 1],
/// then ternary search inside the bracket around the best scan point (the
/// curve falls and then rises, so the bracket holds the minimum).
pub fn qma2_curve_numeric_minimum(eps: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!("scan step {step} outside (0, 0.5]")));
    }
    let n = (1.0 / step).ceil() as usize;
    let at = |k: usize| (k as f64 * step).min(1.0);
    let mut best = (0usize, qma2_acceptance_curve(0.0, eps)?);
    for k in 1..=n {
        let v = qma2_acceptance_curve(at(k), eps)?;
        if v < best.1 {
            best = (k, v);
        }
    }
    let (mut lo, mut hi) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(n)));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if qma2_acceptance_curve(m1, eps)? <= qma2_acceptance_curve(m2, eps)? {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let delta = 0.5 * (lo + hi);
    Ok((delta, qma2_acceptance_curve(delta, eps)?))
}

struct Branches {
    fail: f64,
    pass: f64,
    v_after_pass: f64,
}

fn branches(h: &EffectOperator, rho: &DensityOperator) -> Result<Branches> {
    if rho.layout() != h.layout() {
        return Err(Error::LayoutMismatch(h.layout().dims().to_vec(), rho.layout().dims().to_vec()));
    }
    let pi = sym_projector(h.layout())?;
    let pass = pi.accept_prob(rho)?;
    let v_after_pass = if pass > 1e-12 {
        let (post, _) = gentle_post_state(rho, &pi)?;
        h.accept_prob(&post)?
    } else {
        0.0
    };
    Ok(Branches { fail: 1.0 - pass, pass, v_after_pass })
}

/// Acceptance of the two-step protocol computed branch by branch: SWAP
/// failure, or SWAP success followed by `h` on the post-measurement state.
pub fn simulate_qma2_two_branch(h: &EffectOperator, rho: &DensityOperator) -> Result<f64> {
    let b = branches(h, rho)?;
    Ok(b.fail + b.pass * b.v_after_pass)
}

/// Acceptance frequency over `shots` sampled runs of the two-step protocol.
pub fn simulate_qma2_sampled(h: &EffectOperator, rho: &DensityOperator, shots: usize, rng: &mut SeededRng) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Domain("at least one shot required".into()));
    }
    let b = branches(h, rho)?;
    let mut accepted = 0usize;
    for _ in 0..shots {
        if !rng.bernoulli(b.pass) || rng.bernoulli(b.v_after_pass) {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / shots as f64)
}
