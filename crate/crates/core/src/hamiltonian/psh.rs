//! From a verifier circuit to a quantified sparse Hamiltonian.
//!
//! For a verifier with i messages of p qubits each the Hamiltonian acts on
//! slots ℋ₁ … ℋ_{i−1} (p qubits each, copies of the first i−1 messages)
//! and a last slot ℋ_i = 𝒜ℬ𝒞 (ancillas, all i messages, clock), plus
//! optional identity padding at the end:
//!
//! H_x = |0⟩⟨0|_{𝒜₁} ⊗ |1⟩⟨1|_{𝒞_m} + J₁ |0⟩⟨0|_{𝒞₁} ⊗ (I − Π_sym) + J₂ H^{(V)}
//!
//! where Π_sym symmetrizes ℋ₁⋯ℋ_{i−1} against ℬ₁⋯ℬ_{i−1}.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{history_state, kitaev_terms, swap_test_circuit, GateCircuit};
use super::local::{LocalHamiltonian, LocalTerm, DENSE_QUBIT_CAP};
use super::QuantifiedHamiltonianInstance;
use crate::error::{Error, Result};
use crate::games::{bloch_grid, Purity, Quantifier};
use crate::qstate::linalg::{self, CMatrix, CVector, ONE};
use crate::qstate::PureState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PshOptions {
    /// Defaults to 10·(m+1).
    pub j1: Option<f64>,
    /// Defaults to 100·J₁.
    pub j2: Option<f64>,
    /// Identity qubits appended to the last slot.
    pub padding: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    pub message_qubits: usize,
    /// ℋ₁ … ℋ_{i−1}.
    pub copies: Vec<Range<usize>>,
    pub ancilla: Range<usize>,
    /// ℬ = ℬ₁ … ℬ_i.
    pub input: Range<usize>,
    pub clock: Range<usize>,
    pub padding: Range<usize>,
    pub output_qubit: usize,
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub instance: QuantifiedHamiltonianInstance,
    pub local: LocalHamiltonian,
    pub j1: f64,
    pub j2: f64,
    pub m: usize,
    pub c: f64,
    pub s: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub layout: RegisterLayout,
    /// Declared nonzeros per row of the row oracle.
    pub sparsity_bound: usize,
}

impl ReductionOutput {
    pub fn dense(&self) -> Result<CMatrix> {
        self.local.to_dense()
    }
}

pub fn psh_hardness_reduce(circ: &GateCircuit, i: usize, c: f64, s: f64, opts: &PshOptions) -> Result<ReductionOutput> {
    if !(0.0 <= s && s < c && c <= 1.0) {
        return Err(Error::Domain(format!("need 0 ≤ s < c ≤ 1, got c = {c}, s = {s}")));
    }
    if i == 0 || circ.inputs() % i != 0 || circ.inputs() == 0 {
        return Err(Error::Precondition(format!("{} input qubits do not split into {i} messages", circ.inputs())));
    }
    if circ.ancillas() == 0 || circ.m() == 0 {
        return Err(Error::Precondition("circuit needs an output ancilla and at least one gate".into()));
    }
    let p = circ.inputs() / i;
    let m = circ.m();
    let offset = (i - 1) * p;
    let unpadded = offset + circ.total_qubits();
    if unpadded > DENSE_QUBIT_CAP {
        return Err(Error::SizeGuard(format!("{unpadded} qubits exceed the dense cap {DENSE_QUBIT_CAP}")));
    }
    let j1 = opts.j1.unwrap_or(10.0 * (m + 1) as f64);
    let j2 = opts.j2.unwrap_or(100.0 * j1);
    if !(j2 >= 10.0 * j1 && 10.0 * j1 >= 100.0) {
        return Err(Error::Domain(format!("penalties need J₂ ≥ 10·J₁ ≥ 100, got J₁ = {j1}, J₂ = {j2}")));
    }
    let regs = circ.registers();
    let shift = |r: &Range<usize>| r.start + offset..r.end + offset;
    let layout = RegisterLayout {
        message_qubits: p,
        copies: (0..i - 1).map(|k| k * p..(k + 1) * p).collect(),
        ancilla: shift(&regs.ancilla),
        input: shift(&regs.input),
        clock: shift(&regs.clock),
        padding: unpadded..unpadded + opts.padding,
        output_qubit: offset,
    };

    let mut terms = Vec::new();
    let out_proj = {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = ONE; // |0⟩_{𝒜₁} |1⟩_{𝒞_m}
        m
    };
    terms.push(LocalTerm::new(1.0, vec![layout.output_qubit, layout.clock.end - 1], out_proj)?);
    if i >= 2 {
        let d = 1usize << offset;
        let anti = (linalg::identity(d * d) - linalg::swap_operator(d)) * linalg::c(0.5, 0.0);
        let mut zero = CMatrix::zeros(2, 2);
        zero[(0, 0)] = ONE;
        let mut support = vec![layout.clock.start];
        support.extend(0..offset);
        support.extend(layout.input.start..layout.input.start + offset);
        terms.push(LocalTerm::new(j1, support, linalg::kron(&zero, &anti))?);
    }
    for t in kitaev_terms(circ, offset) {
        terms.push(LocalTerm::new(j2, t.support, t.projector)?);
    }
    let n = unpadded + opts.padding;
    let local = LocalHamiltonian::new(n, terms)?;
    let sparsity_bound = local.sparsity_bound();

    let gamma = c - s;
    let a = (1.0 - c) / (m + 1) as f64;
    let b = (1.0 - c + gamma / 4.0) / (m + 1) as f64;
    let mut slots = vec![p; i - 1];
    slots.push(circ.total_qubits() + opts.padding);
    // Even i yields the ∀-first problem, odd i the ∃-first one.
    let first = if i % 2 == 0 { Quantifier::Forall } else { Quantifier::Exists };
    let instance = QuantifiedHamiltonianInstance::new(local.to_sparse(), slots, a, b, first, Purity::Pure, b - a)?;
    Ok(ReductionOutput { instance, local, j1, j2, m, c, s, gamma, a, b, layout, sparsity_bound })
}

/// Energy of the honest strategy for two one-qubit messages: slot 1 holds
/// φ and the last slot the history state on input φ ⊗ φ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HonestEnergy {
    pub points: usize,
    pub resolution: f64,
    pub max_energy: f64,
    /// √2·h/(m+1): bound on how far the output term moves between grid
    /// points; the penalty terms vanish identically on honest states.
    pub margin: f64,
    /// Largest energy not explained by the output term.
    pub max_penalty: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn honest_copy_energy(red: &ReductionOutput, circ: &GateCircuit, resolution: f64) -> Result<HonestEnergy> {
    if red.instance.slot_qubits().len() != 2 || red.layout.message_qubits != 1 {
        return Err(Error::Precondition("the copy strategy is defined for two one-qubit messages".into()));
    }
    let m1 = (red.m + 1) as f64;
    let pad = CVector::from_element(1, ONE);
    let pad = (0..red.layout.padding.len()).fold(pad, |v, _| linalg::kron_vec(&v, &linalg::basis_vector(2, 0)));
    let grid = bloch_grid(resolution);
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&(theta, phi)| -> Result<(f64, f64)> {
            let psi = PureState::bloch(theta, phi);
            let input = psi.tensor(&psi);
            let hist = history_state(circ, &input)?;
            let v = linalg::kron_vec(&linalg::kron_vec(psi.amplitudes(), hist.amplitudes()), &pad);
            let e = red.local.expectation(&v)?;
            let output = (1.0 - circ.accept_prob(&input)?) / m1;
            Ok((e, (e - output).abs()))
        })
        .collect::<Result<_>>()?;
    let max_energy = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let max_penalty = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let margin = std::f64::consts::SQRT_2 * resolution / m1;
    Ok(HonestEnergy {
        points: grid.len(),
        resolution,
        max_energy,
        margin,
        max_penalty,
        threshold: red.a,
        pass: max_energy + margin <= red.a && max_penalty <= 1e-9,
    })
}

/// Verifier circuit with promised thresholds.
#[derive(Clone, Debug)]
pub struct PshFixture {
    pub name: &'static str,
    pub circuit: GateCircuit,
    pub c: f64,
    pub s: f64,
    pub yes: bool,
}

/// SWAP test on two messages: copying the first message is accepted with
/// certainty, so ∀ψ₁ ∃ψ₂ acceptance ≥ c.
pub fn psh_yes_fixture() -> PshFixture {
    PshFixture { name: "swap-test-yes", circuit: swap_test_circuit(true), c: 0.9, s: 0.5, yes: true }
}

/// Antisymmetric test: acceptance ½ − ½|⟨ψ₁|ψ₂⟩|² ≤ s on every product input.
pub fn psh_no_fixture() -> PshFixture {
    PshFixture { name: "antisymmetric-test-no", circuit: swap_test_circuit(false), c: 0.9, s: 0.5, yes: false }
}
