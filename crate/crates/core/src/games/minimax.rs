use serde::{Deserialize, Serialize};

use super::effective::Bilinear;
use super::ellipsoid::solve_outer_mixed;
use crate::error::{Error, Result};
use crate::qstate::EffectOperator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxReport {
    /// sup_ρ inf_σ tr(M ρ⊗σ).
    pub exists_forall: f64,
    /// inf_σ sup_ρ tr(M ρ⊗σ).
    pub forall_exists: f64,
    pub difference: f64,
    pub tol: f64,
    pub pass: bool,
    /// Width of each solver's certified bracket.
    pub exists_forall_gap: f64,
    pub forall_exists_gap: f64,
    pub converged: bool,
}

/// Compares both orders of play over mixed states for a two-slot effect
/// (ρ on factor 0, σ on factor 1).
pub fn minimax_equality_check(m: &EffectOperator, tol: f64) -> Result<MinimaxReport> {
    let dims = m.layout().dims();
    if dims.len() != 2 {
        return Err(Error::Precondition(format!("two slots required, layout {dims:?}")));
    }
    let form = Bilinear::new(m.matrix().clone(), dims[0], dims[1]);
    let solver_tol = (tol * 0.01).min(1e-9);
    let max_iters = 1_000_000;
    let ef = solve_outer_mixed(&form, true, max_iters, solver_tol);
    let fe = solve_outer_mixed(&form.swapped(), false, max_iters, solver_tol);
    let difference = (ef.value - fe.value).abs();
    Ok(MinimaxReport {
        exists_forall: ef.value,
        forall_exists: fe.value,
        difference,
        tol,
        pass: difference <= tol,
        exists_forall_gap: ef.upper - ef.lower,
        forall_exists_gap: fe.upper - fe.lower,
        converged: ef.converged && fe.converged,
    })
}
