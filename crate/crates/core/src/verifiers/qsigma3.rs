use super::{CompiledVerifier, Construction};
use crate::error::{Error, Result};
use crate::games::{GameInstance, Purity, Quantifier, QuantifierPrefix};
use crate::protocols::{swap_accept_prob, swap_effect};
use crate::qstate::linalg::{self, c};
use crate::qstate::{DensityOperator, EffectOperator, Layout};

/// p = 1/(3 − 2s).
pub fn mix_probability(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s = {s} outside [0, 1]")));
    }
    Ok(1.0 / (3.0 - 2.0 * s))
}

/// max(1 − p + ps, (1 + p)/2): the best a NO-side first player can reach
/// when the SWAP branch runs with probability 1 − p.
pub fn soundness_envelope(s: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) || !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain(format!("need s ∈ [0, 1] and p ∈ (0, 1], got s = {s}, p = {p}")));
    }
    Ok((1.0 - p + p * s).max(0.5 * (1.0 + p)))
}

fn check_thresholds(c_: f64, s: f64) -> Result<()> {
    if !(0.0 <= s && s < c_ && c_ <= 1.0) {
        return Err(Error::Domain(format!("thresholds need 0 ≤ s < c ≤ 1, got c = {c_}, s = {s}")));
    }
    Ok(())
}

/// Three-slot game on ρ₁⊗ρ₂⊗ρ₃: with probability p run `h` on ρ₁⊗ρ₂,
/// otherwise SWAP-test ρ₁ against ρ₃.
///
/// The SWAP term is assembled on the order (1, 3, 2) and brought to
/// (1, 2, 3) by the recorded factor permutation.
pub fn compile_psigma2_to_qsigma3(h: &EffectOperator, c_: f64, s: f64) -> Result<CompiledVerifier> {
    check_thresholds(c_, s)?;
    let dims = h.layout().dims();
    if dims.len() != 2 {
        return Err(Error::InvalidLayout(format!("expected a two-register effect, got factors {dims:?}")));
    }
    let (da, db) = (dims[0], dims[1]);
    let p = mix_probability(s)?;

    let assembled = Layout::new(vec![da, da, db])?;
    let swap_part = linalg::kron(swap_effect(da)?.matrix(), &linalg::identity(db));
    let perm = vec![0, 2, 1];
    let (target, swap_part) = linalg::permute_matrix(&swap_part, &assembled, &perm)?;
    let v_part = linalg::kron(h.matrix(), &linalg::identity(da));
    let m = v_part * c(p, 0.0) + swap_part * c(1.0 - p, 0.0);
    let effect = EffectOperator::new(target, linalg::hermitize(&m))?;

    let prefix = QuantifierPrefix::alternating(Quantifier::Exists, &[da, db, da], Purity::Mixed)?;
    let c_prime = (2.0 - 2.0 * s + c_) / (3.0 - 2.0 * s);
    let s_prime = (2.0 - s) / (3.0 - 2.0 * s);
    let game = GameInstance::new(effect, prefix)?.with_thresholds(c_prime, s_prime)?;
    Ok(CompiledVerifier {
        game,
        construction: Construction::Psigma2ToQsigma3,
        source_c: c_,
        source_s: s,
        source_eps: 0.0,
        mix_prob: p,
        register_permutation: perm,
    })
}

/// p·tr(H ρ₁⊗ρ₂) + (1 − p)·P_swap(ρ₁, ρ₃), evaluated branch by branch.
pub fn simulate_qsigma3_two_branch(
    h: &EffectOperator,
    p: f64,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    rho3: &DensityOperator,
) -> Result<f64> {
    let v = h.accept_prob(&rho1.tensor(rho2).relayout(h.layout().clone())?)?;
    Ok(p * v + (1.0 - p) * swap_accept_prob(rho1, rho3)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::PureState;

    #[test]
    fn envelope_examples() {
        assert!((soundness_envelope(0.0, 1.0 / 3.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((soundness_envelope(0.5, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(soundness_envelope(0.3, 1.0).unwrap(), 1.0);
        assert!(soundness_envelope(0.3, 0.0).is_err());
    }

    #[test]
    fn thresholds_for_perfect_source() {
        let h = EffectOperator::identity(Layout::qubits(2));
        let v = compile_psigma2_to_qsigma3(&h, 1.0, 0.0).unwrap();
        assert!((v.mix_prob - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(v.c_prime(), 1.0);
        assert!((v.s_prime() - 2.0 / 3.0).abs() < 1e-15);
        assert!(compile_psigma2_to_qsigma3(&h, 0.2, 0.2).is_err());
    }

    #[test]
    fn permutation_agrees_with_direct_embedding() {
        let layout = Layout::new(vec![2, 3, 2]).unwrap();
        let direct = linalg::embed(swap_effect(2).unwrap().matrix(), &layout, &[0, 2]).unwrap();
        let h = EffectOperator::zero(Layout::new(vec![2, 3]).unwrap());
        let v = compile_psigma2_to_qsigma3(&h, 1.0, 0.0).unwrap();
        let expected = direct * c(1.0 - v.mix_prob, 0.0);
        assert!(linalg::max_abs_diff(v.effect().matrix(), &expected) < 1e-15);
    }

    #[test]
    fn basis_states_route_through_the_swap() {
        // |0⟩|1⟩|0⟩ passes the 1–3 SWAP test surely; |0⟩|0⟩|1⟩ half the time.
        let h = EffectOperator::zero(Layout::qubits(2));
        let v = compile_psigma2_to_qsigma3(&h, 1.0, 0.0).unwrap();
        let q = 1.0 - v.mix_prob;
        for (idx, want) in [(0b010, q), (0b001, 0.5 * q), (0b100, 0.5 * q), (0b111, q)] {
            let psi = PureState::basis(Layout::qubits(3), idx).unwrap();
            let got = v.effect().accept_prob_pure(&psi).unwrap();
            assert!((got - want).abs() < 1e-15, "{idx:03b}: {got} vs {want}");
        }
    }
}
