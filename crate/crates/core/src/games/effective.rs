use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::qstate::linalg::{self, CMatrix, CVector};
use crate::qstate::{extreme_eigpair, DensityOperator, EffectOperator, Extreme, Layout};

/// Operator H' on the target slot with tr(M(ρ₁⊗⋯⊗σ⊗⋯)) = tr(H'σ).
///
/// Every slot other than `target` must appear in `fixed`.
pub fn effective_operator(m: &EffectOperator, fixed: &BTreeMap<usize, DensityOperator>, target: usize) -> Result<CMatrix> {
    let layout = m.layout();
    let s = layout.num_factors();
    if target >= s {
        return Err(Error::IndexOutOfRange { index: target, factors: s });
    }
    let others: Vec<usize> = (0..s).filter(|&k| k != target).collect();
    if fixed.len() != others.len() || others.iter().any(|k| !fixed.contains_key(k)) {
        return Err(Error::Precondition(format!(
            "all {} slots except {target} must be fixed, got {:?}",
            others.len(),
            fixed.keys().collect::<Vec<_>>()
        )));
    }
    if others.is_empty() {
        return Ok(m.matrix().clone());
    }
    let mut joint: Option<CMatrix> = None;
    for k in &others {
        let rho = &fixed[k];
        if rho.dim() != layout.dims()[*k] {
            return Err(Error::DimensionMismatch { expected: layout.dims()[*k], got: rho.dim() });
        }
        joint = Some(match joint {
            None => rho.matrix().clone(),
            Some(j) => linalg::kron(&j, rho.matrix()),
        });
    }
    let joint = joint.expect("at least one fixed slot");
    linalg::contract_factors(m.matrix(), layout, &others, &joint)
}

/// Best response of the target slot over mixed states: an extreme
/// eigenvector of the effective operator, with the value it attains.
pub fn best_response_mixed(
    m: &EffectOperator,
    fixed: &BTreeMap<usize, DensityOperator>,
    target: usize,
    objective: Extreme,
) -> Result<(DensityOperator, f64)> {
    let h = effective_operator(m, fixed, target)?;
    let (lam, v) = extreme_eigpair(&h, objective)?;
    let rho = DensityOperator::normalized(Layout::single(h.nrows())?, linalg::outer(&v))?;
    Ok((rho, lam))
}

/// Two-slot effect viewed as a bilinear form: slot 0 of dimension `d0`,
/// slot 1 of dimension `d1`.
#[derive(Clone, Debug)]
pub(crate) struct Bilinear {
    pub m: CMatrix,
    pub d0: usize,
    pub d1: usize,
}

impl Bilinear {
    pub fn new(m: CMatrix, d0: usize, d1: usize) -> Self {
        debug_assert_eq!(m.nrows(), d0 * d1);
        Self { m, d0, d1 }
    }

    /// H'[a,b] = Σ_{x,y} M[(x,a),(y,b)] ρ[y,x] (operator on slot 1).
    pub fn reduce_first(&self, rho: &CMatrix) -> CMatrix {
        let (d0, d1) = (self.d0, self.d1);
        let mut out = CMatrix::zeros(d1, d1);
        for x in 0..d0 {
            for y in 0..d0 {
                let w = rho[(y, x)];
                if w.norm_sqr() == 0.0 {
                    continue;
                }
                let block = self.m.view((x * d1, y * d1), (d1, d1));
                out += block * w;
            }
        }
        out
    }

    /// K[x,y] = Σ_{a,b} M[(x,a),(y,b)] σ[b,a] (operator on slot 0).
    pub fn reduce_second(&self, sigma: &CMatrix) -> CMatrix {
        let (d0, d1) = (self.d0, self.d1);
        CMatrix::from_fn(d0, d0, |x, y| {
            let block = self.m.view((x * d1, y * d1), (d1, d1));
            linalg::trace_product(&block.into_owned(), sigma)
        })
    }

    /// Same form with the two slots exchanged.
    pub fn swapped(&self) -> Bilinear {
        let layout = Layout::new(vec![self.d0, self.d1]).expect("valid dims");
        let (_, m) = linalg::permute_matrix(&self.m, &layout, &[1, 0]).expect("valid permutation");
        Bilinear { m, d0: self.d1, d1: self.d0 }
    }
}

/// Rank-one projector as a matrix.
pub(crate) fn projector(v: &CVector) -> CMatrix {
    linalg::outer(v)
}

/// Value and eigenvector of the chosen extreme eigenvalue.
pub(crate) fn extreme(h: &CMatrix, which: Extreme) -> (f64, CVector) {
    let (vals, vecs) = linalg::eigh(h);
    let k = match which {
        Extreme::Min => 0,
        Extreme::Max => vals.len() - 1,
    };
    (vals[k], vecs.column(k).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::c;
    use crate::qstate::PureState;

    fn pauli_z() -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]))
    }

    #[test]
    fn zz_with_zero_gives_z() {
        // Z⊗Z is not an effect, so go through the raw contraction.
        let zz = linalg::kron(&pauli_z(), &pauli_z());
        let form = Bilinear::new(zz, 2, 2);
        let zero = PureState::bloch(0.0, 0.0).to_density();
        let h = form.reduce_first(zero.matrix());
        assert!(linalg::max_abs_diff(&h, &pauli_z()) < 1e-15);
    }

    #[test]
    fn best_response_on_projector() {
        let e00 = EffectOperator::projector(&PureState::basis(Layout::qubits(2), 0).unwrap());
        let mut fixed = BTreeMap::new();
        fixed.insert(0, PureState::bloch(0.0, 0.0).to_density());
        let (rho, v) = best_response_mixed(&e00, &fixed, 1, Extreme::Max).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let (_, v) = best_response_mixed(&e00, &fixed, 1, Extreme::Min).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn reduce_second_matches_swapped_reduce_first() {
        let m = CMatrix::from_fn(6, 6, |i, j| c((i * 7 + j) as f64 % 5.0, (i as f64 - j as f64) * 0.1));
        let form = Bilinear::new(linalg::hermitize(&m), 2, 3);
        let sigma = CMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0 / 3.0, 0.0) } else { c(0.05, 0.0) });
        let a = form.reduce_second(&sigma);
        let b = form.swapped().reduce_first(&sigma);
        assert!(linalg::max_abs_diff(&a, &b) < 1e-12);
    }
}
