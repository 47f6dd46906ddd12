//! SWAP test, product test, symmetric projectors and gentle measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix, CVector, STRUCT_TOL};
use crate::qstate::state::same_layout;
use crate::qstate::{DensityOperator, EffectOperator, Layout, PureState, SeededRng};

/// Pairing of factors `a[i] ↔ b[i]` inside one layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSpec {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl CutSpec {
    pub fn new(layout: &Layout, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::InvalidLayout(format!("cut sides have lengths {} and {}", a.len(), b.len())));
        }
        let all: Vec<usize> = a.iter().chain(&b).copied().collect();
        layout.check_factors(&all)?;
        for (&x, &y) in a.iter().zip(&b) {
            if layout.dims()[x] != layout.dims()[y] {
                return Err(Error::LayoutMismatch(vec![layout.dims()[x]], vec![layout.dims()[y]]));
            }
        }
        Ok(Self { a, b })
    }

    /// Cut between two copies of `single`: factor i of the first copy is
    /// paired with factor i of the second.
    pub fn copies(single: &Layout) -> (Layout, CutSpec) {
        let s = single.num_factors();
        let joint = single.concat(single);
        (joint, CutSpec { a: (0..s).collect(), b: (s..2 * s).collect() })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Factor permutation exchanging every paired factor.
    fn permutation(&self, layout: &Layout) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..layout.num_factors()).collect();
        for (&x, &y) in self.a.iter().zip(&self.b) {
            perm.swap(x, y);
        }
        perm
    }
}

/// Operator exchanging all paired factors of the cut at once.
pub fn cut_swap_operator(layout: &Layout, cut: &CutSpec) -> Result<CMatrix> {
    linalg::permutation_unitary(layout, &cut.permutation(layout))
}

/// (I + F)/2 with F swapping whole registers A and B.
pub fn symmetric_projector(layout: &Layout, cut: &CutSpec) -> Result<EffectOperator> {
    let f = cut_swap_operator(layout, cut)?;
    let n = layout.total_dim();
    EffectOperator::new(layout.clone(), (linalg::identity(n) + f) * c(0.5, 0.0))
}

/// Π_sym on ℂ^d ⊗ ℂ^d.
pub fn swap_effect(dim: usize) -> Result<EffectOperator> {
    let layout = Layout::new(vec![dim, dim])?;
    let m = (linalg::identity(dim * dim) + linalg::swap_operator(dim)) * c(0.5, 0.0);
    EffectOperator::new(layout, m)
}

/// SWAP-test acceptance ½ + tr(ρσ)/2.
pub fn swap_accept_prob(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_layout(rho.layout(), sigma.layout())?;
    Ok(0.5 + 0.5 * linalg::trace_product(rho.matrix(), sigma.matrix()).re)
}

/// SWAP-test acceptance on pure inputs, ½ + |⟨ψ|φ⟩|²/2.
pub fn swap_accept_prob_pure(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok(0.5 + 0.5 * psi.inner(phi)?.norm_sqr())
}

/// Π_prod = ∏ᵢ (I + Fᵢ)/2 for the pairs of the cut.
pub fn product_effect(layout: &Layout, cut: &CutSpec) -> Result<EffectOperator> {
    let cut = CutSpec::new(layout, cut.a.clone(), cut.b.clone())?;
    let n = layout.total_dim();
    let mut p = linalg::identity(n);
    for (&x, &y) in cut.a.iter().zip(&cut.b) {
        let pair = CutSpec { a: vec![x], b: vec![y] };
        let f = cut_swap_operator(layout, &pair)?;
        p = &p * ((linalg::identity(n) + f) * c(0.5, 0.0));
    }
    EffectOperator::new(layout.clone(), linalg::hermitize(&p))
}

/// Product-test acceptance on ρ ⊗ σ, pairing factor i of ρ with factor i of
/// σ. Evaluated through the expansion 2^{-s} Σ_T tr(ρ_T σ_T) over subsets T
/// of factors, which avoids building the projector.
pub fn product_accept_prob(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_layout(rho.layout(), sigma.layout())?;
    let s = rho.layout().num_factors();
    if s > 20 {
        return Err(Error::SizeGuard(format!("{s} factors")));
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << s) {
        if mask == 0 {
            total += 1.0;
            continue;
        }
        let keep: Vec<usize> = (0..s).filter(|&i| mask & (1 << i) != 0).collect();
        let a = rho.partial_trace(&keep)?;
        let b = sigma.partial_trace(&keep)?;
        total += linalg::trace_product(a.matrix(), b.matrix()).re;
    }
    Ok(total / (1u64 << s) as f64)
}

/// P_prod(ρ) := product test on two copies of ρ.
pub fn product_self_prob(rho: &DensityOperator) -> Result<f64> {
    product_accept_prob(rho, rho)
}

/// Post-measurement state √M ρ √M / tr(Mρ) and the acceptance probability.
pub fn gentle_post_state(rho: &DensityOperator, m: &EffectOperator) -> Result<(DensityOperator, f64)> {
    let p = m.accept_prob(rho)?;
    if p <= 1e-12 {
        return Err(Error::VanishingProbability(p));
    }
    let sq = linalg::sqrt_psd(m.matrix());
    let post = &sq * rho.matrix() * &sq;
    Ok((DensityOperator::normalized(rho.layout().clone(), post)?, p))
}

#[derive(Clone, Debug)]
pub struct SymmetricCopy {
    /// |φ₂⟩ on the C register.
    pub state: PureState,
    /// ε = 1 − Pr[SWAP between A and B accepts].
    pub epsilon: f64,
    /// Certified d_tr(φ, ψ⊗φ₂) ≤ √(2ε).
    pub bound: f64,
}

/// Given |ψ⟩ on A and |φ⟩ on B⊗C that pass the A–B SWAP test with
/// probability 1−ε > ½, returns |φ₂⟩ ∝ (⟨ψ|⊗I)|φ⟩ with
/// d_tr(φ, ψ⊗φ₂) ≤ √(2ε).
///
/// The leading factors of `phi` form B and must match `psi`'s layout.
pub fn extract_symmetric_copy(psi: &PureState, phi: &PureState) -> Result<SymmetricCopy> {
    let a_dims = psi.layout().dims();
    let phi_dims = phi.layout().dims();
    if phi_dims.len() <= a_dims.len() || &phi_dims[..a_dims.len()] != a_dims {
        return Err(Error::LayoutMismatch(a_dims.to_vec(), phi_dims.to_vec()));
    }
    let c_layout = Layout::new(phi_dims[a_dims.len()..].to_vec())?;
    let (db, dc) = (psi.dim(), c_layout.total_dim());
    // φ reshaped as a db×dc matrix; (⟨ψ|⊗I)|φ⟩ = Φᵀ ψ̄.
    let phi_mat = CMatrix::from_fn(db, dc, |i, j| phi.amplitudes()[i * dc + j]);
    let contracted: CVector = phi_mat.transpose() * psi.amplitudes().conjugate();
    let overlap = contracted.norm_squared();
    let epsilon = ((1.0 - overlap) / 2.0).max(0.0);
    if epsilon >= 0.5 {
        return Err(Error::Precondition(format!("SWAP rejection ε = {epsilon} must be below 1/2")));
    }
    if overlap <= STRUCT_TOL {
        return Err(Error::VanishingProbability(overlap));
    }
    let state = PureState::normalized(c_layout, contracted)?;
    Ok(SymmetricCopy { state, epsilon, bound: (2.0 * epsilon).sqrt() })
}

/// One Bernoulli outcome drawn from an exact acceptance probability.
pub fn sample_outcome(prob: f64, rng: &mut SeededRng) -> bool {
    rng.bernoulli(prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{epr_pair, trace_distance};

    #[test]
    fn swap_effect_traces() {
        for (d, t) in [(2, 3.0), (3, 6.0)] {
            let e = swap_effect(d).unwrap();
            assert!((linalg::trace(e.matrix()).re - t).abs() < 1e-12);
            assert!(linalg::max_abs_diff(&(e.matrix() * e.matrix()), e.matrix()) < 1e-12);
        }
    }

    #[test]
    fn singlet_is_rejected() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
        let singlet = PureState::new(Layout::qubits(2), v).unwrap();
        assert!(swap_effect(2).unwrap().accept_prob_pure(&singlet).unwrap().abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_qubits_pass_with_three_quarters() {
        let m = DensityOperator::maximally_mixed(Layout::qubits(1));
        assert!((swap_accept_prob(&m, &m).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_pair_product_effect_is_swap_effect() {
        let (joint, cut) = CutSpec::copies(&Layout::qubits(1));
        let p = product_effect(&joint, &cut).unwrap();
        assert!(linalg::max_abs_diff(p.matrix(), swap_effect(2).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn epr_product_test() {
        let rho = epr_pair().to_density();
        assert!((product_accept_prob(&rho, &rho).unwrap() - 0.75).abs() < 1e-12);
        let (joint, cut) = CutSpec::copies(rho.layout());
        let p = product_effect(&joint, &cut).unwrap();
        assert!((p.accept_prob(&rho.tensor(&rho)).unwrap() - 0.75).abs() < 1e-12);
        assert!((linalg::trace(p.matrix()).re - 9.0).abs() < 1e-12);
    }

    #[test]
    fn gentle_collapse() {
        let plus = PureState::bloch(std::f64::consts::FRAC_PI_2, 0.0).to_density();
        let zero = PureState::bloch(0.0, 0.0);
        let m = EffectOperator::projector(&zero);
        let (post, p) = gentle_post_state(&plus, &m).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!(trace_distance(&post, &zero.to_density()).unwrap() < 1e-12);
    }

    #[test]
    fn extract_from_exact_product() {
        let psi = PureState::bloch(0.3, 0.2);
        let chi = PureState::bloch(2.0, -1.0);
        let out = extract_symmetric_copy(&psi, &psi.tensor(&chi)).unwrap();
        assert!(out.bound < 1e-7);
        assert!(out.state.inner(&chi).unwrap().norm() > 1.0 - 1e-12);
    }

    #[test]
    fn extract_refuses_orthogonal() {
        let psi = PureState::bloch(0.0, 0.0);
        let phi = PureState::bloch(std::f64::consts::PI, 0.0).tensor(&psi);
        assert!(matches!(extract_symmetric_copy(&psi, &phi), Err(Error::Precondition(_))));
    }
}
