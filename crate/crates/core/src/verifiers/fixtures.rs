//! Fixed toy instances for checking compiled games.
//!
//! | name | source game | effect | (c, s) | expected compiled value |
//! |---|---|---|---|---|
//! | `qma2-yes` | QMA(2), ε = 0 | \|00⟩⟨00\| | (1, 0) | ½ for ∃ψ ∀φ |
//! | `qsigma3-yes` | pure ∃∀ | \|0⟩⟨0\| ⊗ I | (1, 0) | 1 |
//! | `qsigma3-no` | pure ∃∀ | 0 | (1, 0) | 2/3 |

use crate::qstate::{EffectOperator, Layout, PureState};

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub effect: EffectOperator,
    pub c: f64,
    pub s: f64,
    pub eps: f64,
    pub yes: bool,
}

/// Accepts exactly |0⟩⊗|0⟩.
pub fn qma2_yes_fixture() -> Fixture {
    let effect = EffectOperator::projector(&PureState::basis(Layout::qubits(2), 0).expect("index in range"));
    Fixture { name: "qma2-yes", effect, c: 1.0, s: 0.0, eps: 0.0, yes: true }
}

/// First player wins by sending |0⟩, whatever the second sends.
pub fn qsigma3_yes_fixture() -> Fixture {
    let zero = EffectOperator::projector(&PureState::bloch(0.0, 0.0));
    let effect = zero.tensor(&EffectOperator::identity(Layout::qubits(1)));
    Fixture { name: "qsigma3-yes", effect, c: 1.0, s: 0.0, eps: 0.0, yes: true }
}

/// Never accepts.
pub fn qsigma3_no_fixture() -> Fixture {
    Fixture { name: "qsigma3-no", effect: EffectOperator::zero(Layout::qubits(2)), c: 1.0, s: 0.0, eps: 0.0, yes: false }
}
