//! The copy game: player 1 picks a state, player 2 must copy it and is
//! checked by a SWAP test.

use serde::{Deserialize, Serialize};

use super::{solve_alternating, GameInstance, Purity, Quantifier, QuantifierPrefix, SolverOptions};
use crate::error::{Error, Result};
use crate::protocols::swap_effect;
use crate::qstate::{EffectOperator, SeededRng};

/// SWAP-test effect on two n-qubit registers.
pub fn copy_game_effect(n_qubits: usize) -> Result<EffectOperator> {
    if n_qubits == 0 || n_qubits > 3 {
        return Err(Error::Domain(format!("copy game supports 1..=3 qubits, got {n_qubits}")));
    }
    swap_effect(1 << n_qubits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyGameValues {
    pub n_qubits: usize,
    /// 1: player 2 copies a pure state exactly.
    pub pure_value: f64,
    /// ½ + 2^{−(n+1)}: against I/2ⁿ the best pass probability is ½ + λ_max/2.
    pub mixed_value: f64,
    pub solver_pure: f64,
    pub solver_mixed: f64,
    /// Certified bracket around `solver_mixed`.
    pub solver_mixed_bounds: (f64, f64),
}

/// Closed-form values of ∀ρ ∃σ tr(Π_sym ρ⊗σ) over pure and mixed states,
/// each recomputed by the alternating solver.
pub fn copy_game_values(n_qubits: usize) -> Result<CopyGameValues> {
    let effect = copy_game_effect(n_qubits)?;
    let d = 1usize << n_qubits;
    let rng = SeededRng::new(0).derive("copy-game", n_qubits as u64);
    let opts = SolverOptions { restarts: 4, max_iters: 2_000_000, tol: 1e-10 };

    let pure = GameInstance::new(effect.clone(), QuantifierPrefix::alternating(Quantifier::Forall, &[d, d], Purity::Pure)?)?;
    let mixed = GameInstance::new(effect, QuantifierPrefix::alternating(Quantifier::Forall, &[d, d], Purity::Mixed)?)?;
    let solved_pure = solve_alternating(&pure, &rng, &opts)?;
    let solved_mixed = solve_alternating(&mixed, &rng, &opts)?;
    Ok(CopyGameValues {
        n_qubits,
        pure_value: 1.0,
        mixed_value: 0.5 + 0.5 / d as f64,
        solver_pure: solved_pure.value,
        solver_mixed: solved_mixed.value,
        solver_mixed_bounds: (solved_mixed.certificate.lower_bound, solved_mixed.certificate.upper_bound),
    })
}
