//! Compiled verifiers: QMA(2) into a pure ∃∀ game, and a pure ∃∀ game into
//! a mixed ∃∀∃ game.

mod fixtures;
mod qma2;
mod qsigma3;

use serde::{Deserialize, Serialize};

pub use fixtures::{qma2_yes_fixture, qsigma3_no_fixture, qsigma3_yes_fixture, Fixture};
pub use qma2::{compile_qma2_verifier, qma2_acceptance_curve, qma2_curve_minimum, qma2_curve_numeric_minimum, simulate_qma2_sampled, simulate_qma2_two_branch};
pub use qsigma3::{compile_psigma2_to_qsigma3, mix_probability, simulate_qsigma3_two_branch, soundness_envelope};

use crate::error::{Error, Result};
use crate::games::{solve_alternating, solve_grid_pure, Certificate, GameInstance, GridOptions, Method, Purity, SolverOptions};
use crate::qstate::{EffectOperator, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Construction {
    Qma2ToPsigma2,
    Psigma2ToQsigma3,
}

/// Compiled game plus the thresholds it was derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledVerifier {
    /// Effect, quantifier prefix and derived thresholds (c', s').
    pub game: GameInstance,
    pub construction: Construction,
    pub source_c: f64,
    pub source_s: f64,
    pub source_eps: f64,
    /// Probability of running the source verifier (1 when no mixing).
    pub mix_prob: f64,
    /// New factor k of the effect is factor `register_permutation[k]` of
    /// the layout the effect was assembled in.
    pub register_permutation: Vec<usize>,
}

impl CompiledVerifier {
    pub fn effect(&self) -> &EffectOperator {
        self.game.effect()
    }

    pub fn c_prime(&self) -> f64 {
        self.game.thresholds().expect("compiled games carry thresholds").0
    }

    pub fn s_prime(&self) -> f64 {
        self.game.thresholds().expect("compiled games carry thresholds").1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Use the qubit grid oracle when the game allows it.
    pub prefer_grid: bool,
    pub grid: GridOptions,
    pub solver: SolverOptions,
    pub seed: u64,
    /// Slack added to the threshold comparison.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { prefer_grid: true, grid: GridOptions::default(), solver: SolverOptions::default(), seed: 0, tol: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub yes_instance: bool,
    pub value: f64,
    /// c' for YES instances, s' for NO instances.
    pub threshold: f64,
    pub tol: f64,
    pub pass: bool,
    pub method: Method,
    pub certificate: Certificate,
    /// Set when the grid oracle evaluated mixed slots over pure states.
    pub pure_restriction: bool,
}

/// Solves the compiled game and compares it with c' (YES) or s' (NO).
///
/// The grid oracle runs on the pure-state version of the game; for mixed
/// prefixes this is flagged in the report.
pub fn verify_compiled_game(v: &CompiledVerifier, yes_instance: bool, opts: &VerifyOptions) -> Result<VerificationReport> {
    let slots = v.game.prefix().slots();
    let grid_ok = opts.prefer_grid && slots.iter().all(|s| s.dim == 2) && slots.len() <= 3;
    let (estimate, pure_restriction) = if grid_ok {
        let mixed = slots.iter().any(|s| s.purity == Purity::Mixed);
        let pure = GameInstance::new(v.effect().clone(), v.game.prefix().with_purity(Purity::Pure))?;
        (solve_grid_pure(&pure, &opts.grid)?, mixed)
    } else {
        (solve_alternating(&v.game, &SeededRng::new(opts.seed).derive("verify", 0), &opts.solver)?, false)
    };
    if !estimate.certificate.converged {
        return Err(Error::Contract(format!("solver did not converge: {}", estimate.certificate.note)));
    }
    let threshold = if yes_instance { v.c_prime() } else { v.s_prime() };
    let pass = if yes_instance { estimate.value >= threshold - opts.tol } else { estimate.value <= threshold + opts.tol };
    Ok(VerificationReport {
        yes_instance,
        value: estimate.value,
        threshold,
        tol: opts.tol,
        pass,
        method: estimate.method,
        certificate: estimate.certificate,
        pure_restriction,
    })
}
