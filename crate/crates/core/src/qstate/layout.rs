use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered tensor factorization ℂ^{d₁} ⊗ ⋯ ⊗ ℂ^{d_s}.
///
/// Basis indices are big-endian: factor 0 is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Layout {
    dims: Vec<usize>,
}

impl Layout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout("layout needs at least one factor".into()));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("factor {pos} has dimension 0")));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidLayout("total dimension overflows".into()))?;
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n.max(1)] }
    }

    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim_of(&self, factors: &[usize]) -> usize {
        factors.iter().map(|&f| self.dims[f]).product()
    }

    /// Concatenation of factor lists.
    pub fn concat(&self, other: &Layout) -> Layout {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Layout { dims }
    }

    /// Sub-layout of the given factors, in the given order.
    pub fn select(&self, factors: &[usize]) -> Result<Layout> {
        self.check_factors(factors)?;
        Layout::new(factors.iter().map(|&f| self.dims[f]).collect())
    }

    pub fn check_factors(&self, factors: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.dims.len()];
        for &f in factors {
            if f >= self.dims.len() {
                return Err(Error::IndexOutOfRange { index: f, factors: self.dims.len() });
            }
            if seen[f] {
                return Err(Error::InvalidLayout(format!("factor {f} listed twice")));
            }
            seen[f] = true;
        }
        Ok(())
    }

    /// Factors not in `factors`, ascending.
    pub fn complement(&self, factors: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|f| !factors.contains(f)).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for j in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.dims[j + 1];
        }
        strides
    }

    /// Offsets of every multi-index over `factors` (enumerated big-endian in
    /// the listed order) inside the full basis.
    pub fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(out.len() * self.dims[f]);
            for &base in &out {
                for k in 0..self.dims[f] {
                    next.push(base + k * strides[f]);
                }
            }
            out = next;
        }
        out
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.dims.len()];
        for j in (0..self.dims.len()).rev() {
            digits[j] = index % self.dims[j];
            index /= self.dims[j];
        }
        digits
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Basis map for a factor permutation: new factor `k` is old factor
    /// `perm[k]`. Entry `i` of the result is the old index of new basis
    /// state `i`.
    pub fn permutation_map(&self, perm: &[usize]) -> Result<(Layout, Vec<usize>)> {
        if perm.len() != self.dims.len() {
            return Err(Error::InvalidLayout(format!(
                "permutation of length {} for {} factors",
                perm.len(),
                self.dims.len()
            )));
        }
        self.check_factors(perm)?;
        let new_layout = self.select(perm)?;
        Ok((new_layout, self.offsets(perm)))
    }
}

impl TryFrom<Vec<usize>> for Layout {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Layout::new(dims)
    }
}

impl From<Layout> for Vec<usize> {
    fn from(layout: Layout) -> Self {
        layout.dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_dims() {
        assert!(Layout::new(vec![2, 0]).is_err());
        assert!(Layout::new(vec![]).is_err());
    }

    #[test]
    fn digits_round_trip() {
        let l = Layout::new(vec![2, 3, 4]).unwrap();
        for i in 0..l.total_dim() {
            assert_eq!(l.index_of(&l.digits(i)), i);
        }
        assert_eq!(l.strides(), vec![12, 4, 1]);
    }

    #[test]
    fn offsets_enumerate_subsystems() {
        let l = Layout::new(vec![2, 3]).unwrap();
        assert_eq!(l.offsets(&[1]), vec![0, 1, 2]);
        assert_eq!(l.offsets(&[0]), vec![0, 3]);
        assert_eq!(l.offsets(&[1, 0]), vec![0, 3, 1, 4, 2, 5]);
    }
}
