//! Hamiltonians given as sums of few-qubit terms, and the marginal-based
//! compression of such a Hamiltonian onto its second slot.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sparse::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix, CVector, C64, ZERO};
use crate::qstate::{DensityOperator, Layout};

/// Largest register the dense conversions accept.
pub const DENSE_QUBIT_CAP: usize = 12;

/// coefficient · matrix acting on `support` (qubit indices, first listed
/// qubit most significant in `matrix`).
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub coefficient: f64,
    pub support: Vec<usize>,
    pub matrix: CMatrix,
}

impl LocalTerm {
    pub fn new(coefficient: f64, support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let k = support.len();
        if matrix.nrows() != 1 << k || matrix.ncols() != 1 << k {
            return Err(Error::DimensionMismatch { expected: 1 << k, got: matrix.nrows() });
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::Precondition(format!("repeated qubit in support {support:?}")));
        }
        linalg::check_hermitian(&matrix, linalg::STRUCT_TOL)?;
        Ok(Self { coefficient, support, matrix })
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }

    /// Largest number of nonzeros in a row of the local matrix.
    pub fn row_nnz(&self) -> usize {
        (0..self.matrix.nrows())
            .map(|r| self.matrix.row(r).iter().filter(|z| **z != ZERO).count())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.coefficient.abs() * self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Bit mask of qubit `q` in an `n`-qubit index (qubit 0 most significant).
fn mask(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn local_index(n: usize, support: &[usize], global: usize) -> usize {
    support.iter().fold(0, |acc, &q| (acc << 1) | usize::from(global & mask(n, q) != 0))
}

fn with_local(n: usize, support: &[usize], global: usize, local: usize) -> usize {
    let k = support.len();
    let mut out = global;
    for (i, &q) in support.iter().enumerate() {
        let bit = (local >> (k - 1 - i)) & 1;
        out = (out & !mask(n, q)) | if bit == 1 { mask(n, q) } else { 0 };
    }
    out
}

/// u acting on `support` of an `n`-qubit vector.
pub fn apply_local(v: &CVector, n: usize, support: &[usize], u: &CMatrix) -> Result<CVector> {
    if v.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, got: v.len() });
    }
    let k = support.len();
    if u.nrows() != 1 << k || support.iter().any(|&q| q >= n) {
        return Err(Error::Precondition(format!("operator of size {} on support {support:?} of {n} qubits", u.nrows())));
    }
    let support_mask: usize = support.iter().map(|&q| mask(n, q)).sum();
    let mut out = CVector::zeros(v.len());
    let mut buf = CVector::zeros(1 << k);
    for base in 0..v.len() {
        if base & support_mask != 0 {
            continue;
        }
        for l in 0..1 << k {
            buf[l] = v[with_local(n, support, base, l)];
        }
        let w = u * &buf;
        for l in 0..1 << k {
            out[with_local(n, support, base, l)] = w[l];
        }
    }
    Ok(out)
}

/// Σ_t coefficient_t · term_t on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalHamiltonian {
    n_qubits: usize,
    terms: Vec<LocalTerm>,
}

impl LocalHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 62 {
            return Err(Error::Domain(format!("qubit count {n_qubits} outside 1..=62")));
        }
        for t in &terms {
            if let Some(&q) = t.support.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::IndexOutOfRange { index: q, factors: n_qubits });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Pauli-sum input: `(coefficient, "XZI…")` with one letter per qubit.
    pub fn from_pauli_sum(n_qubits: usize, terms: &[(f64, String)]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (coef, word) in terms {
            if word.chars().count() != n_qubits {
                return Err(Error::Domain(format!("Pauli string {word:?} has length ≠ {n_qubits}")));
            }
            let mut support = Vec::new();
            let mut m = CMatrix::from_element(1, 1, c(1.0, 0.0));
            for (q, ch) in word.chars().enumerate() {
                let p = match ch {
                    'I' => continue,
                    'X' => CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]),
                    'Y' => CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
                    'Z' => CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]),
                    other => return Err(Error::Domain(format!("unknown Pauli letter {other:?}"))),
                };
                support.push(q);
                m = linalg::kron(&m, &p);
            }
            out.push(LocalTerm::new(*coef, support, m)?);
        }
        Self::new(n_qubits, out)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn max_locality(&self) -> usize {
        self.terms.iter().map(LocalTerm::locality).max().unwrap_or(0)
    }

    /// Nonzeros per row can not exceed the sum of the terms' row counts.
    pub fn sparsity_bound(&self) -> usize {
        self.terms.iter().map(LocalTerm::row_nnz).sum::<usize>().max(1)
    }

    pub fn max_entry_bound(&self) -> f64 {
        self.terms.iter().map(LocalTerm::max_abs_entry).sum()
    }

    /// Nonzero entries of row `r`, sorted by column.
    pub fn row(&self, r: usize) -> Vec<(usize, C64)> {
        let n = self.n_qubits;
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for t in &self.terms {
            let lr = local_index(n, &t.support, r);
            for lc in 0..t.matrix.ncols() {
                let z = t.matrix[(lr, lc)];
                if z != ZERO {
                    *acc.entry(with_local(n, &t.support, r, lc)).or_insert(ZERO) += z * t.coefficient;
                }
            }
        }
        acc.into_iter().filter(|(_, z)| *z != ZERO).collect()
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        let mut out = CVector::zeros(self.dim());
        for t in &self.terms {
            out += apply_local(v, self.n_qubits, &t.support, &t.matrix)? * c(t.coefficient, 0.0);
        }
        Ok(out)
    }

    pub fn expectation(&self, v: &CVector) -> Result<f64> {
        Ok(v.dotc(&self.apply(v)?).re)
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::SizeGuard(format!("{} qubits exceed the dense cap {DENSE_QUBIT_CAP}", self.n_qubits)));
        }
        let n = self.n_qubits;
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for t in &self.terms {
            for r in 0..self.dim() {
                let lr = local_index(n, &t.support, r);
                for lc in 0..t.matrix.ncols() {
                    let z = t.matrix[(lr, lc)];
                    if z != ZERO {
                        out[(r, with_local(n, &t.support, r, lc))] += z * t.coefficient;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row-oracle view with the declared sparsity and entry bounds.
    pub fn to_sparse(&self) -> SparseHamiltonian {
        let me = Arc::new(self.clone());
        let d = self.sparsity_bound();
        let max_entry = self.max_entry_bound();
        SparseHamiltonian::from_row_fn(self.n_qubits, d, max_entry, Arc::new(move |r| me.row(r)))
            .expect("qubit count validated on construction")
    }
}

/// Pauli-sum file format: `{"n_qubits": 2, "terms": [[0.5, "ZZ"], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<(f64, String)>,
}

impl PauliSum {
    pub fn to_local(&self) -> Result<LocalHamiltonian> {
        LocalHamiltonian::from_pauli_sum(self.n_qubits, &self.terms)
    }
}

/// Reduced state of a candidate ρ on one support.
#[derive(Clone, Debug)]
pub struct Marginal {
    pub support: Vec<usize>,
    pub state: DensityOperator,
}

/// Reduced density matrices of ρ on each support (factor order as listed).
pub fn local_marginals(rho: &DensityOperator, supports: &[Vec<usize>]) -> Result<Vec<Marginal>> {
    supports
        .iter()
        .map(|s| {
            if s.is_empty() {
                return Err(Error::Precondition("empty support".into()));
            }
            Ok(Marginal { support: s.clone(), state: rho.partial_trace(s)? })
        })
        .collect()
}

/// Operator H' on the second slot with tr(H(ρ⊗σ)) = tr(H'σ), given
/// marginals of ρ covering each term's first-slot qubits.
///
/// Qubits `0..n1` form the first slot and `n1..n1+n2` the second; H' is
/// indexed by the second slot's qubits in order.
pub fn compress_local_hamiltonian(terms: &[LocalTerm], n1: usize, n2: usize, marginals: &[Marginal]) -> Result<CMatrix> {
    let d2 = 1usize << n2;
    let slot2 = Layout::qubits(n2);
    let mut out = CMatrix::zeros(d2, d2);
    for t in terms {
        let k = t.support.len();
        if let Some(&q) = t.support.iter().find(|&&q| q >= n1 + n2) {
            return Err(Error::IndexOutOfRange { index: q, factors: n1 + n2 });
        }
        let first: Vec<usize> = (0..k).filter(|&i| t.support[i] < n1).collect();
        let second: Vec<usize> = (0..k).filter(|&i| t.support[i] >= n1).collect();
        let reduced = if first.is_empty() {
            t.matrix.clone()
        } else {
            let qubits: Vec<usize> = first.iter().map(|&i| t.support[i]).collect();
            let marginal = marginals
                .iter()
                .find(|m| qubits.iter().all(|q| m.support.contains(q)))
                .ok_or_else(|| Error::Precondition(format!("no marginal covers qubits {qubits:?}")))?;
            let keep: Vec<usize> =
                qubits.iter().map(|q| marginal.support.iter().position(|s| s == q).expect("covered")).collect();
            let rho = linalg::partial_trace_matrix(marginal.state.matrix(), marginal.state.layout(), &keep)?;
            let perm: Vec<usize> = first.iter().chain(second.iter()).copied().collect();
            let local = Layout::qubits(k);
            let (_, m) = linalg::permute_matrix(&t.matrix, &local, &perm)?;
            let lead: Vec<usize> = (0..first.len()).collect();
            linalg::contract_factors(&m, &local, &lead, &rho)?
        };
        let reduced = reduced * c(t.coefficient, 0.0);
        if second.is_empty() {
            out += linalg::identity(d2) * reduced[(0, 0)];
        } else {
            let factors: Vec<usize> = second.iter().map(|&i| t.support[i] - n1).collect();
            out += linalg::embed(&reduced, &slot2, &factors)?;
        }
    }
    Ok(out)
}
