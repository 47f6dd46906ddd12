//! Gate circuits and their unary-clock Hamiltonians.
//!
//! Qubits are numbered ancillas `0..a`, inputs `a..a+b`, then clock qubits
//! `C₁…C_m`. Clock state t is |1^t 0^{m−t}⟩. The compiled Hamiltonian is the
//! sum of these projectors, all with coefficient 1:
//!
//! | kind | support | projector |
//! |---|---|---|
//! | input j | A_j, C₁ | \|1⟩⟨1\| ⊗ \|0⟩⟨0\| |
//! | clock j, 1 ≤ j < m | C_j, C_{j+1} | \|0⟩⟨0\| ⊗ \|1⟩⟨1\| |
//! | propagation t | gate qubits, C_{t−1} C_t C_{t+1} | ½(I⊗P_{t−1} + I⊗P_t − U_t⊗\|t⟩⟨t−1\| − U_t†⊗\|t−1⟩⟨t\|) |
//!
//! In the propagation term only the clock qubits that exist are used: t = 1
//! reads (C₁, C₂) with patterns 00 → 10, t = m reads (C_{m−1}, C_m) with
//! 10 → 11, and m = 1 reads C₁ alone with 0 → 1. Every term is a projector
//! on at most five qubits.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::local::{apply_local, LocalHamiltonian, LocalTerm, DENSE_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::qstate::random::haar_unitary;
use crate::qstate::{Layout, PureState, SeededRng};

/// Eigenvalues below this count as kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Lower bound on gap·m² over [`kitaev_corpus`], frozen from the first
/// full diagonalization of the corpus (smallest observed value 0.5359,
/// on `bell-pair`, rounded down).
pub const KITAEV_GAP_CONSTANT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub qubits: Vec<usize>,
    pub unitary: CMatrix,
}

impl Gate {
    pub fn new(qubits: Vec<usize>, unitary: CMatrix) -> Result<Self> {
        if qubits.is_empty() || qubits.len() > 2 {
            return Err(Error::Precondition(format!("gates act on one or two qubits, got {qubits:?}")));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::Precondition(format!("repeated qubit in gate {qubits:?}")));
        }
        let d = 1 << qubits.len();
        if unitary.nrows() != d || unitary.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: unitary.nrows() });
        }
        let dev = linalg::max_abs_diff(&(unitary.adjoint() * &unitary), &linalg::identity(d));
        if dev > linalg::STRUCT_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Self { qubits, unitary })
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// exp(−iθY/2).
pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

/// CNOT with the first qubit as control.
pub fn cnot() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        m[(r, col)] = ONE;
    }
    m
}

/// Unitary over the ancilla and input qubits, applied as U_m ⋯ U₁.
#[derive(Clone, Debug, PartialEq)]
pub struct GateCircuit {
    ancillas: usize,
    inputs: usize,
    gates: Vec<Gate>,
}

/// Qubit ranges of the compiled Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KitaevRegisters {
    pub ancilla: Range<usize>,
    pub input: Range<usize>,
    pub clock: Range<usize>,
}

impl GateCircuit {
    pub fn new(ancillas: usize, inputs: usize, gates: Vec<Gate>) -> Result<Self> {
        let width = ancillas + inputs;
        if width == 0 {
            return Err(Error::Domain("circuit has no qubits".into()));
        }
        for g in &gates {
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= width) {
                return Err(Error::IndexOutOfRange { index: q, factors: width });
            }
        }
        Ok(Self { ancillas, inputs, gates })
    }

    pub fn ancillas(&self) -> usize {
        self.ancillas
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn m(&self) -> usize {
        self.gates.len()
    }

    pub fn width(&self) -> usize {
        self.ancillas + self.inputs
    }

    pub fn total_qubits(&self) -> usize {
        self.width() + self.m()
    }

    pub fn registers(&self) -> KitaevRegisters {
        let (a, w) = (self.ancillas, self.width());
        KitaevRegisters { ancilla: 0..a, input: a..w, clock: w..w + self.m() }
    }

    fn check_input(&self, psi: &PureState) -> Result<()> {
        if psi.dim() != 1 << self.inputs {
            return Err(Error::DimensionMismatch { expected: 1 << self.inputs, got: psi.dim() });
        }
        Ok(())
    }

    /// U_t ⋯ U₁ (|0^a⟩|ψ⟩) for t = 0..=m.
    pub fn trajectory(&self, psi: &PureState) -> Result<Vec<CVector>> {
        self.check_input(psi)?;
        let start = linalg::kron_vec(&linalg::basis_vector(1 << self.ancillas, 0), psi.amplitudes());
        let mut out = vec![start];
        for g in &self.gates {
            let next = apply_local(out.last().expect("nonempty"), self.width(), &g.qubits, &g.unitary)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Output state V(|0^a⟩|ψ⟩).
    pub fn run(&self, psi: &PureState) -> Result<PureState> {
        let v = self.trajectory(psi)?.pop().expect("nonempty");
        PureState::new(Layout::qubits(self.width()), v)
    }

    /// Probability that the first ancilla reads 1 at the end.
    pub fn accept_prob(&self, psi: &PureState) -> Result<f64> {
        if self.ancillas == 0 {
            return Err(Error::Precondition("acceptance needs an output ancilla".into()));
        }
        let out = self.run(psi)?;
        let half = out.dim() / 2;
        Ok(out.amplitudes().iter().skip(half).map(|z| z.norm_sqr()).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Input,
    Clock,
    Propagation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KitaevTerm {
    pub kind: TermKind,
    /// Ancilla index, clock index or gate index (1-based for clock and gates).
    pub index: usize,
    pub support: Vec<usize>,
    pub projector: CMatrix,
}

#[derive(Clone, Debug)]
pub struct KitaevHamiltonian {
    pub registers: KitaevRegisters,
    pub terms: Vec<KitaevTerm>,
    pub hamiltonian: LocalHamiltonian,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KitaevSpectrum {
    pub kernel_dim: usize,
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue above [`KERNEL_TOL`].
    pub gap: f64,
    /// gap · m².
    pub scaled_gap: f64,
}

fn diag_projector(k: usize, index: usize) -> CMatrix {
    let mut m = CMatrix::zeros(1 << k, 1 << k);
    m[(index, index)] = ONE;
    m
}

fn bits_to_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Clock support of the t-th propagation term with the patterns of clock
/// states t−1 and t on it.
fn clock_window(clock: &Range<usize>, m: usize, t: usize) -> (Vec<usize>, usize, usize) {
    let q = |j: usize| clock.start + j - 1;
    if m == 1 {
        (vec![q(1)], 0, 1)
    } else if t == 1 {
        (vec![q(1), q(2)], bits_to_index(&[0, 0]), bits_to_index(&[1, 0]))
    } else if t == m {
        (vec![q(m - 1), q(m)], bits_to_index(&[1, 0]), bits_to_index(&[1, 1]))
    } else {
        (vec![q(t - 1), q(t), q(t + 1)], bits_to_index(&[1, 0, 0]), bits_to_index(&[1, 1, 0]))
    }
}

fn propagation_projector(u: &CMatrix, clock_bits: usize, before: usize, after: usize) -> CMatrix {
    let dc = 1 << clock_bits;
    let dg = u.nrows();
    let ket_bra = |i: usize, j: usize| {
        let mut m = CMatrix::zeros(dc, dc);
        m[(i, j)] = ONE;
        m
    };
    let id = linalg::identity(dg);
    let p = linalg::kron(&id, &ket_bra(before, before)) + linalg::kron(&id, &ket_bra(after, after))
        - linalg::kron(u, &ket_bra(after, before))
        - linalg::kron(&u.adjoint(), &ket_bra(before, after));
    p * c(0.5, 0.0)
}

/// Kitaev terms with every qubit index shifted by `offset`.
pub(crate) fn kitaev_terms(circ: &GateCircuit, offset: usize) -> Vec<KitaevTerm> {
    let regs = circ.registers();
    let m = circ.m();
    let clock = regs.clock.start + offset..regs.clock.end + offset;
    let c1 = clock.start;
    let mut terms = Vec::new();
    for j in regs.ancilla.clone() {
        terms.push(KitaevTerm {
            kind: TermKind::Input,
            index: j,
            support: vec![j + offset, c1],
            projector: diag_projector(2, bits_to_index(&[1, 0])),
        });
    }
    for j in 1..m {
        terms.push(KitaevTerm {
            kind: TermKind::Clock,
            index: j,
            support: vec![clock.start + j - 1, clock.start + j],
            projector: diag_projector(2, bits_to_index(&[0, 1])),
        });
    }
    for (k, g) in circ.gates.iter().enumerate() {
        let t = k + 1;
        let (window, before, after) = clock_window(&clock, m, t);
        let mut support: Vec<usize> = g.qubits.iter().map(|q| q + offset).collect();
        support.extend(&window);
        terms.push(KitaevTerm {
            kind: TermKind::Propagation,
            index: t,
            support,
            projector: propagation_projector(&g.unitary, window.len(), before, after),
        });
    }
    terms
}

fn guard(circ: &GateCircuit) -> Result<()> {
    if circ.m() == 0 {
        return Err(Error::Precondition("circuit needs at least one gate".into()));
    }
    if circ.total_qubits() > DENSE_QUBIT_CAP {
        return Err(Error::SizeGuard(format!(
            "a + b + m = {} exceeds {DENSE_QUBIT_CAP}",
            circ.total_qubits()
        )));
    }
    Ok(())
}

pub fn kitaev_compile(circ: &GateCircuit) -> Result<KitaevHamiltonian> {
    guard(circ)?;
    let terms = kitaev_terms(circ, 0);
    let local: Vec<LocalTerm> = terms
        .iter()
        .map(|t| LocalTerm::new(1.0, t.support.clone(), t.projector.clone()))
        .collect::<Result<_>>()?;
    let hamiltonian = LocalHamiltonian::new(circ.total_qubits(), local)?;
    let matrix = hamiltonian.to_dense()?;
    Ok(KitaevHamiltonian { registers: circ.registers(), terms, hamiltonian, matrix })
}

impl KitaevHamiltonian {
    /// Full diagonalization of the compiled matrix.
    pub fn spectrum(&self) -> KitaevSpectrum {
        let ev = linalg::eigvalsh(&self.matrix);
        let kernel_dim = ev.iter().filter(|&&l| l < KERNEL_TOL).count();
        let gap = ev.iter().copied().find(|&l| l >= KERNEL_TOL).unwrap_or(f64::INFINITY);
        let m = self.registers.clock.len() as f64;
        KitaevSpectrum { kernel_dim, min_eigenvalue: ev[0], gap, scaled_gap: gap * m * m }
    }
}

/// (1/√(m+1)) Σ_t U_t⋯U₁(|0^a⟩|ψ⟩) ⊗ |1^t 0^{m−t}⟩ on the qubits
/// [ancilla, input, clock].
pub fn history_state(circ: &GateCircuit, psi: &PureState) -> Result<PureState> {
    guard(circ)?;
    let m = circ.m();
    let traj = circ.trajectory(psi)?;
    let dc = 1 << m;
    let norm = c(1.0 / ((m + 1) as f64).sqrt(), 0.0);
    let mut v = CVector::zeros(traj[0].len() * dc);
    for (t, w) in traj.iter().enumerate() {
        // |1^t 0^{m−t}⟩ has its t leading bits set.
        let clock = ((1usize << t) - 1) << (m - t);
        v += linalg::kron_vec(w, &linalg::basis_vector(dc, clock)) * norm;
    }
    PureState::new(Layout::qubits(circ.total_qubits()), v)
}

/// SWAP test of two one-qubit messages from four two-qubit gates: a Bell
/// rotation maps the singlet to |11⟩, then a relative-phase Toffoli writes
/// the result on the output ancilla.
///
/// Qubits: A₁ = 0, B₁ = 1, B₂ = 2. With `accept_symmetric` the circuit
/// accepts with probability tr(Π_sym ρ); otherwise tr(Π_anti ρ).
pub fn swap_test_circuit(accept_symmetric: bool) -> GateCircuit {
    let bell = linalg::kron(&hadamard(), &linalg::identity(2)) * cnot();
    // CNOT controlled by the second listed qubit onto the first.
    let rev = {
        let mut m = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
            m[(r, col)] = ONE;
        }
        m
    };
    let id = linalg::identity(2);
    let quarter = std::f64::consts::FRAC_PI_4;
    let step = |pre: CMatrix, post: CMatrix| linalg::kron(&post, &id) * &rev * linalg::kron(&pre, &id);
    let first_pre = if accept_symmetric { ry(quarter) * pauli_x() } else { ry(quarter) };
    let gates = vec![
        Gate::new(vec![1, 2], bell).expect("unitary"),
        Gate::new(vec![0, 2], step(first_pre, id.clone())).expect("unitary"),
        Gate::new(vec![0, 1], step(ry(quarter), id.clone())).expect("unitary"),
        Gate::new(vec![0, 2], step(ry(-quarter), ry(-quarter))).expect("unitary"),
    ];
    GateCircuit::new(1, 2, gates).expect("indices in range")
}

fn chain(m: usize, u: CMatrix) -> GateCircuit {
    let gates = (0..m).map(|_| Gate::new(vec![0], u.clone()).expect("unitary")).collect();
    GateCircuit::new(0, 1, gates).expect("indices in range")
}

fn random_circuit(a: usize, b: usize, m: usize, rng: &mut SeededRng) -> GateCircuit {
    let w = a + b;
    let gates = (0..m)
        .map(|t| {
            let q0 = t % w;
            let q1 = (t + 1 + t / w) % w;
            if q0 == q1 || w == 1 {
                Gate::new(vec![q0], haar_unitary(2, rng)).expect("unitary")
            } else {
                Gate::new(vec![q0, q1], haar_unitary(4, rng)).expect("unitary")
            }
        })
        .collect();
    GateCircuit::new(a, b, gates).expect("indices in range")
}

/// Fixed circuits with m ≤ 5 and at most ten qubits in total.
pub fn kitaev_corpus() -> Vec<(String, GateCircuit)> {
    let mut out: Vec<(String, GateCircuit)> = (1..=5).map(|m| (format!("identity-chain-{m}"), chain(m, linalg::identity(2)))).collect();
    out.push(("hadamard".into(), chain(1, hadamard())));
    out.push(("hadamard-pair".into(), chain(2, hadamard())));
    let entangler = GateCircuit::new(
        1,
        1,
        vec![Gate::new(vec![1], hadamard()).expect("unitary"), Gate::new(vec![1, 0], cnot()).expect("unitary")],
    )
    .expect("indices in range");
    out.push(("bell-pair".into(), entangler));
    out.push(("swap-test".into(), swap_test_circuit(true)));
    out.push(("antisymmetric-test".into(), swap_test_circuit(false)));
    let root = SeededRng::new(0x6b69_7461_6576);
    for (k, (a, b, m)) in [(1, 1, 3), (1, 2, 5), (2, 2, 5), (1, 3, 5)].into_iter().enumerate() {
        let mut rng = root.derive("kitaev-corpus", k as u64);
        out.push((format!("random-{a}-{b}-{m}"), random_circuit(a, b, m, &mut rng)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_identity_gate_history() {
        let circ = chain(1, linalg::identity(2));
        let h = history_state(&circ, &PureState::bloch(0.0, 0.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // qubits (B, C): (|00⟩ + |01⟩)/√2
        assert!((h.amplitudes()[0].re - s).abs() < 1e-15 && (h.amplitudes()[1].re - s).abs() < 1e-15);
    }

    #[test]
    fn terms_are_projectors_of_at_most_five_qubits() {
        for (_, circ) in kitaev_corpus() {
            for t in kitaev_terms(&circ, 0) {
                assert!(t.support.len() <= 5);
                assert!(linalg::max_abs_diff(&(&t.projector * &t.projector), &t.projector) < 1e-9);
            }
        }
    }

    #[test]
    fn swap_test_circuit_accepts_like_the_swap_test() {
        let root = SeededRng::new(3);
        for k in 0..5 {
            let mut rng = root.derive("pair", k);
            let a = crate::qstate::random::haar_state(&Layout::qubits(1), &mut rng);
            let b = crate::qstate::random::haar_state(&Layout::qubits(1), &mut rng);
            let overlap = a.inner(&b).unwrap().norm_sqr();
            let input = a.tensor(&b);
            let sym = swap_test_circuit(true).accept_prob(&input).unwrap();
            let anti = swap_test_circuit(false).accept_prob(&input).unwrap();
            assert!((sym - (0.5 + 0.5 * overlap)).abs() < 1e-12);
            assert!((anti - (0.5 - 0.5 * overlap)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unitary_gate_is_refused() {
        assert!(matches!(Gate::new(vec![0], linalg::identity(2) * c(2.0, 0.0)), Err(Error::NonUnitary(_))));
    }
}
