//! Hermitian operators given by a row oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::local::DENSE_QUBIT_CAP;
use crate::error::{Error, Result};
use crate::qstate::linalg::{c, CMatrix, CVector, C64, ZERO};
use crate::qstate::random::haar_state;
use crate::qstate::{Extreme, Layout, SeededRng};

/// Row index → nonzero `(column, entry)` pairs.
pub type RowFn = Arc<dyn Fn(usize) -> Vec<(usize, C64)> + Send + Sync>;

/// Entries this close are treated as equal in the Hermiticity checks.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct SparseHamiltonian {
    n_qubits: usize,
    sparsity: usize,
    max_entry: f64,
    row_fn: RowFn,
}

impl fmt::Debug for SparseHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseHamiltonian")
            .field("n_qubits", &self.n_qubits)
            .field("sparsity", &self.sparsity)
            .field("max_entry", &self.max_entry)
            .finish_non_exhaustive()
    }
}

/// Result of a Hermiticity and bounds scan over some rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowScan {
    pub rows_checked: usize,
    pub max_row_nnz: usize,
    pub max_abs_entry: f64,
    pub max_hermitian_deviation: f64,
}

/// `{n_qubits, d, max_entry, rows: {"r": [[c, re, im], …]}}`; rows not
/// listed are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseJson {
    pub n_qubits: usize,
    pub d: usize,
    pub max_entry: f64,
    pub rows: BTreeMap<String, Vec<(usize, f64, f64)>>,
}

impl SparseHamiltonian {
    pub fn from_row_fn(n_qubits: usize, sparsity: usize, max_entry: f64, row_fn: RowFn) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 62 {
            return Err(Error::Domain(format!("qubit count {n_qubits} outside 1..=62")));
        }
        if sparsity == 0 || !(max_entry >= 0.0) {
            return Err(Error::Domain(format!("need d ≥ 1 and max_entry ≥ 0, got d = {sparsity}, max_entry = {max_entry}")));
        }
        Ok(Self { n_qubits, sparsity, max_entry, row_fn })
    }

    /// Explicit rows; the bounds are taken from the data.
    pub fn from_rows(n_qubits: usize, rows: BTreeMap<usize, Vec<(usize, C64)>>) -> Result<Self> {
        let d = rows.values().map(Vec::len).max().unwrap_or(0).max(1);
        let max_entry = rows.values().flatten().map(|(_, z)| z.norm()).fold(0.0, f64::max);
        let rows = Arc::new(rows);
        let h = Self::from_row_fn(n_qubits, d, max_entry, Arc::new(move |r| rows.get(&r).cloned().unwrap_or_default()))?;
        h.full_scan()?;
        Ok(h)
    }

    pub fn from_dense(m: &CMatrix, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if !n.is_power_of_two() || n < 2 || m.ncols() != n {
            return Err(Error::Domain(format!("dense matrix of size {n}×{} is not a qubit operator", m.ncols())));
        }
        let mut rows = BTreeMap::new();
        for r in 0..n {
            let row: Vec<(usize, C64)> = (0..n).filter(|&j| m[(r, j)].norm() > tol).map(|j| (j, m[(r, j)])).collect();
            if !row.is_empty() {
                rows.insert(r, row);
            }
        }
        Self::from_rows(n.trailing_zeros() as usize, rows)
    }

    pub fn from_json(j: SparseJson) -> Result<Self> {
        let mut rows = BTreeMap::new();
        for (key, entries) in j.rows {
            let r: usize = key.parse().map_err(|_| Error::Domain(format!("row key {key:?} is not an index")))?;
            rows.insert(r, entries.into_iter().map(|(col, re, im)| (col, c(re, im))).collect::<Vec<_>>());
        }
        let rows = Arc::new(rows);
        let h = Self::from_row_fn(j.n_qubits, j.d, j.max_entry, Arc::new(move |r| rows.get(&r).cloned().unwrap_or_default()))?;
        h.full_scan()?;
        Ok(h)
    }

    /// Explicit listing of every nonzero row (full scan, dense guard).
    pub fn to_json(&self) -> Result<SparseJson> {
        self.guard()?;
        let mut rows = BTreeMap::new();
        for r in 0..self.dim() {
            let row = self.row(r)?;
            if !row.is_empty() {
                rows.insert(r.to_string(), row.into_iter().map(|(col, z)| (col, z.re, z.im)).collect());
            }
        }
        Ok(SparseJson { n_qubits: self.n_qubits, d: self.sparsity, max_entry: self.max_entry, rows })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn max_entry(&self) -> f64 {
        self.max_entry
    }

    /// Row `r`, checked against the declared bounds.
    pub fn row(&self, r: usize) -> Result<Vec<(usize, C64)>> {
        if r >= self.dim() {
            return Err(Error::IndexOutOfRange { index: r, factors: self.dim() });
        }
        let row = (self.row_fn)(r);
        if row.len() > self.sparsity {
            return Err(Error::Contract(format!("row {r} has {} nonzeros, declared d = {}", row.len(), self.sparsity)));
        }
        for &(col, z) in &row {
            if col >= self.dim() {
                return Err(Error::Contract(format!("row {r} names column {col} outside dimension {}", self.dim())));
            }
            if z.norm() > self.max_entry * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::Contract(format!("entry ({r}, {col}) = {z} exceeds max_entry {}", self.max_entry)));
            }
        }
        Ok(row)
    }

    pub fn entry(&self, r: usize, col: usize) -> Result<C64> {
        Ok(self.row(r)?.into_iter().find(|(j, _)| *j == col).map(|(_, z)| z).unwrap_or(ZERO))
    }

    fn scan(&self, rows: impl Iterator<Item = usize>) -> Result<RowScan> {
        let mut out = RowScan { rows_checked: 0, max_row_nnz: 0, max_abs_entry: 0.0, max_hermitian_deviation: 0.0 };
        for r in rows {
            let row = self.row(r)?;
            out.rows_checked += 1;
            out.max_row_nnz = out.max_row_nnz.max(row.len());
            for &(col, z) in &row {
                out.max_abs_entry = out.max_abs_entry.max(z.norm());
                let mirror = self.entry(col, r)?;
                out.max_hermitian_deviation = out.max_hermitian_deviation.max((mirror - z.conj()).norm());
            }
        }
        if out.max_hermitian_deviation > HERMITIAN_TOL * self.max_entry.max(1.0) {
            return Err(Error::NotHermitian(out.max_hermitian_deviation));
        }
        Ok(out)
    }

    /// Hermiticity and bound checks on `count` uniformly drawn rows.
    pub fn spot_check(&self, count: usize, rng: &mut SeededRng) -> Result<RowScan> {
        let dim = self.dim();
        let rows: Vec<usize> = (0..count).map(|_| ((rng.uniform() * dim as f64) as usize).min(dim - 1)).collect();
        self.scan(rows.into_iter())
    }

    pub fn full_scan(&self) -> Result<RowScan> {
        if self.n_qubits > 16 {
            return Err(Error::SizeGuard(format!("full scan of {} qubits", self.n_qubits)));
        }
        self.scan(0..self.dim())
    }

    fn guard(&self) -> Result<()> {
        if self.n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::SizeGuard(format!("{} qubits exceed the dense cap {DENSE_QUBIT_CAP}", self.n_qubits)));
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Result<CMatrix> {
        self.guard()?;
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for r in 0..self.dim() {
            for (col, z) in self.row(r)? {
                m[(r, col)] = z;
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let mut out = CVector::zeros(v.len());
        for r in 0..self.dim() {
            out[r] = self.row(r)?.into_iter().map(|(col, z)| z * v[col]).sum();
        }
        Ok(out)
    }

    /// −H under the same bounds.
    pub fn negated(&self) -> SparseHamiltonian {
        let inner = self.row_fn.clone();
        let mut out = self.clone();
        out.row_fn = Arc::new(move |r| inner(r).into_iter().map(|(col, z)| (col, -z)).collect());
        out
    }
}

/// Extreme Ritz value after at most `iters` Lanczos steps with full
/// reorthogonalization, started from a random vector.
pub fn lanczos_extreme(h: &SparseHamiltonian, which: Extreme, iters: usize, rng: &mut SeededRng) -> Result<f64> {
    let n = h.dim();
    let steps = iters.clamp(1, n);
    let mut basis: Vec<CVector> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut q = haar_state(&Layout::single(n)?, rng).amplitudes().clone();
    for k in 0..steps {
        let mut w = h.apply(&q)?;
        let a = q.dotc(&w).re;
        w -= &q * c(a, 0.0);
        if k > 0 {
            w -= &basis[k - 1] * c(beta[k - 1], 0.0);
        }
        basis.push(q.clone());
        // Two passes of Gram-Schmidt keep the Krylov basis orthonormal.
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        alpha.push(a);
        let bn = w.norm();
        if bn < 1e-12 || k + 1 == steps {
            break;
        }
        beta.push(bn);
        q = w.unscale(bn);
    }
    let k = alpha.len();
    let t = DMatrix::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let ev = t.symmetric_eigenvalues();
    let it = ev.iter().copied();
    Ok(match which {
        Extreme::Min => it.fold(f64::INFINITY, f64::min),
        Extreme::Max => it.fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg;
    use crate::qstate::random::random_hermitian;

    #[test]
    fn dense_roundtrip_and_json() {
        let m = random_hermitian(8, &mut SeededRng::new(1));
        let h = SparseHamiltonian::from_dense(&m, 0.0).unwrap();
        assert_eq!(h.sparsity(), 8);
        assert!(linalg::max_abs_diff(&h.to_dense().unwrap(), &m) == 0.0);
        let text = serde_json::to_string(&h.to_json().unwrap()).unwrap();
        let back = SparseHamiltonian::from_json(serde_json::from_str(&text).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(&back.to_dense().unwrap(), &m) == 0.0);
    }

    #[test]
    fn non_hermitian_rows_are_refused() {
        let mut rows = BTreeMap::new();
        rows.insert(0, vec![(1, c(1.0, 0.0))]);
        assert!(matches!(SparseHamiltonian::from_rows(1, rows), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn declared_sparsity_is_enforced() {
        let h = SparseHamiltonian::from_row_fn(1, 1, 1.0, Arc::new(|_| vec![(0, c(1.0, 0.0)), (1, c(1.0, 0.0))])).unwrap();
        assert!(matches!(h.row(0), Err(Error::Contract(_))));
    }

    #[test]
    fn lanczos_matches_dense_extremes() {
        let m = random_hermitian(32, &mut SeededRng::new(4));
        let h = SparseHamiltonian::from_dense(&m, 0.0).unwrap();
        let ev = linalg::eigvalsh(&m);
        let lo = lanczos_extreme(&h, Extreme::Min, 32, &mut SeededRng::new(5)).unwrap();
        let hi = lanczos_extreme(&h, Extreme::Max, 32, &mut SeededRng::new(6)).unwrap();
        assert!((lo - ev[0]).abs() < 1e-9 && (hi - ev[31]).abs() < 1e-9);
    }
}
