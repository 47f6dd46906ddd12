//! Sparse and local Hamiltonians, the clock construction and quantified
//! ground-energy problems.
//!
//! A quantified instance asks for Q₁ρ₁ Q₂ρ₂ ⋯ tr(H ρ₁⊗ρ₂⊗⋯) with ∃ = inf
//! and ∀ = sup over energies: YES means the quantified energy is at most
//! `a`, NO means at least `b`.

mod circuit;
mod local;
mod projection;
mod psh;
mod sparse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use circuit::{
    cnot, hadamard, history_state, kitaev_compile, kitaev_corpus, pauli_x, ry, swap_test_circuit, Gate, GateCircuit,
    KitaevHamiltonian, KitaevRegisters, KitaevSpectrum, KitaevTerm, TermKind, KERNEL_TOL, KITAEV_GAP_CONSTANT,
};
pub use local::{
    apply_local, compress_local_hamiltonian, local_marginals, LocalHamiltonian, LocalTerm, Marginal, PauliSum,
    DENSE_QUBIT_CAP,
};
pub use projection::{state_projection_apply, ProjectionReport};
pub use psh::{
    honest_copy_energy, psh_hardness_reduce, psh_no_fixture, psh_yes_fixture, HonestEnergy, PshFixture, PshOptions,
    ReductionOutput, RegisterLayout,
};
pub use sparse::{lanczos_extreme, RowFn, RowScan, SparseHamiltonian, SparseJson};

use crate::error::{Error, Result};
use crate::games::{bloch_grid, Purity, Quantifier};
use crate::qstate::linalg;
use crate::qstate::{Layout, PureState};

#[derive(Clone, Debug)]
pub struct QuantifiedHamiltonianInstance {
    hamiltonian: SparseHamiltonian,
    slot_qubits: Vec<usize>,
    a: f64,
    b: f64,
    first: Quantifier,
    purity: Purity,
    min_gap: f64,
}

/// Serializable description (the Hamiltonian itself is summarized).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub n_qubits: usize,
    pub slot_qubits: Vec<usize>,
    pub quantifiers: Vec<Quantifier>,
    pub purity: Purity,
    pub a: f64,
    pub b: f64,
    pub min_gap: f64,
    pub sparsity: usize,
    pub max_entry: f64,
}

impl QuantifiedHamiltonianInstance {
    pub fn new(
        hamiltonian: SparseHamiltonian,
        slot_qubits: Vec<usize>,
        a: f64,
        b: f64,
        first: Quantifier,
        purity: Purity,
        min_gap: f64,
    ) -> Result<Self> {
        if slot_qubits.is_empty() || slot_qubits.contains(&0) {
            return Err(Error::InvalidLayout(format!("slot sizes {slot_qubits:?}")));
        }
        let total: usize = slot_qubits.iter().sum();
        if total != hamiltonian.n_qubits() {
            return Err(Error::DimensionMismatch { expected: hamiltonian.n_qubits(), got: total });
        }
        if !(min_gap > 0.0) || b - a < min_gap * (1.0 - 1e-12) {
            return Err(Error::Domain(format!("thresholds a = {a}, b = {b} miss the declared gap {min_gap}")));
        }
        Ok(Self { hamiltonian, slot_qubits, a, b, first, purity, min_gap })
    }

    pub fn hamiltonian(&self) -> &SparseHamiltonian {
        &self.hamiltonian
    }

    pub fn slot_qubits(&self) -> &[usize] {
        &self.slot_qubits
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn purity(&self) -> Purity {
        self.purity
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn quantifiers(&self) -> Vec<Quantifier> {
        let mut q = self.first;
        (0..self.slot_qubits.len())
            .map(|_| {
                let here = q;
                q = q.flip();
                here
            })
            .collect()
    }

    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            n_qubits: self.hamiltonian.n_qubits(),
            slot_qubits: self.slot_qubits.clone(),
            quantifiers: self.quantifiers(),
            purity: self.purity,
            a: self.a,
            b: self.b,
            min_gap: self.min_gap,
            sparsity: self.hamiltonian.sparsity(),
            max_entry: self.hamiltonian.max_entry(),
        }
    }
}

/// (H, a, b) ↦ (−H, −b, −a) with every quantifier flipped.
pub fn complement_reduce(inst: &QuantifiedHamiltonianInstance) -> QuantifiedHamiltonianInstance {
    QuantifiedHamiltonianInstance {
        hamiltonian: inst.hamiltonian.negated(),
        slot_qubits: inst.slot_qubits.clone(),
        a: -inst.b,
        b: -inst.a,
        first: inst.first.flip(),
        purity: inst.purity,
        min_gap: inst.min_gap,
    }
}

/// Quantified energy of a two-slot instance whose first slot is one qubit:
/// first slot on a Bloch grid, second slot answered exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub value: f64,
    pub resolution: f64,
    pub points: usize,
    /// Best first-slot grid point (θ, φ).
    pub argbest: (f64, f64),
    /// ‖H − I⊗tr₁H/2‖·h: how far the grid value can sit from the true one.
    pub margin: f64,
    /// Certified interval for the true quantified energy.
    pub lower: f64,
    pub upper: f64,
}

pub fn quantified_energy_grid(inst: &QuantifiedHamiltonianInstance, resolution: f64) -> Result<EnergyGrid> {
    if inst.slot_qubits.len() != 2 || inst.slot_qubits[0] != 1 {
        return Err(Error::Precondition(format!("need slots [1, n₂], got {:?}", inst.slot_qubits)));
    }
    if !(resolution > 0.0) {
        return Err(Error::Domain(format!("grid resolution {resolution}")));
    }
    let h = inst.hamiltonian.to_dense()?;
    let d2 = 1usize << inst.slot_qubits[1];
    let layout = Layout::new(vec![2, d2])?;
    let q = inst.quantifiers();
    let grid = bloch_grid(resolution);
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&(theta, phi)| -> Result<f64> {
            let psi = PureState::bloch(theta, phi);
            let reduced = linalg::contract_factors(&h, &layout, &[0], &linalg::outer(psi.amplitudes()))?;
            let ev = linalg::eigvalsh(&reduced);
            Ok(match q[1] {
                Quantifier::Exists => ev[0],
                Quantifier::Forall => ev[d2 - 1],
            })
        })
        .collect::<Result<_>>()?;
    let outer_max = q[0] == Quantifier::Forall;
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if (outer_max && v > values[best]) || (!outer_max && v < values[best]) {
            best = k;
        }
    }
    let value = values[best];
    let mean = linalg::partial_trace_matrix(&h, &layout, &[1])? * linalg::c(0.5, 0.0);
    let shifted = &h - linalg::embed(&mean, &layout, &[1])?;
    let margin = linalg::operator_norm_hermitian(&shifted) * resolution;
    let (lower, upper) = if outer_max { (value, value + margin) } else { (value - margin, value) };
    Ok(EnergyGrid { value, resolution, points: grid.len(), argbest: grid[best], margin, lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz_instance() -> QuantifiedHamiltonianInstance {
        let h = LocalHamiltonian::from_pauli_sum(2, &[(1.0, "ZZ".into())]).unwrap();
        QuantifiedHamiltonianInstance::new(h.to_sparse(), vec![1, 1], 0.2, 0.5, Quantifier::Exists, Purity::Pure, 0.1)
            .unwrap()
    }

    #[test]
    fn complement_thresholds_and_involution() {
        let inst = zz_instance();
        let comp = complement_reduce(&inst);
        assert_eq!(comp.thresholds(), (-0.5, -0.2));
        assert_eq!(comp.quantifiers(), vec![Quantifier::Forall, Quantifier::Exists]);
        let back = complement_reduce(&comp);
        assert_eq!(back.summary(), inst.summary());
        assert_eq!(back.hamiltonian().to_dense().unwrap(), inst.hamiltonian().to_dense().unwrap());
    }

    #[test]
    fn zz_game_energy() {
        // ∃ρ₁ ∀ρ₂ ⟨Z⊗Z⟩: whatever ρ₁ is, ρ₂ can push the energy to |⟨Z⟩₁| ≥ 0.
        let g = quantified_energy_grid(&zz_instance(), std::f64::consts::PI / 16.0).unwrap();
        assert!(g.value.abs() < 1e-12, "{g:?}");
        assert!(g.lower <= 0.0 && 0.0 <= g.upper);
    }

    #[test]
    fn gap_is_enforced() {
        let h = LocalHamiltonian::from_pauli_sum(1, &[(1.0, "Z".into())]).unwrap();
        assert!(QuantifiedHamiltonianInstance::new(h.to_sparse(), vec![1], 0.0, 0.05, Quantifier::Exists, Purity::Pure, 0.1)
            .is_err());
    }
}
