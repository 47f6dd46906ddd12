use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::linalg::{self, c, CMatrix, CVector, C64, EIG_TOL, STRUCT_TOL};
use super::serial::{MatrixJson, VectorJson};
use crate::error::{Error, Result};

/// Normalized state vector on a tensor-factored space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorJson", into = "VectorJson")]
pub struct PureState {
    layout: Layout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(layout: Layout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STRUCT_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Normalizes `amplitudes` before validating.
    pub fn normalized(layout: Layout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        Self::new(layout, amplitudes.unscale(norm))
    }

    pub fn basis(layout: Layout, index: usize) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::DimensionMismatch { expected: n, got: index });
        }
        Ok(Self { amplitudes: linalg::basis_vector(n, index), layout })
    }

    /// Single-qubit state cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let a = CVector::from_vec(vec![c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]);
        Self { layout: Layout::qubits(1), amplitudes: a }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            layout: self.layout.concat(&other.layout),
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// |ψ⟩^{⊗n}.
    pub fn power(&self, n: usize) -> PureState {
        let mut out = self.clone();
        for _ in 1..n.max(1) {
            out = out.tensor(self);
        }
        out
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator { layout: self.layout.clone(), matrix: linalg::outer(&self.amplitudes) }
    }

    /// Same amplitudes with the factor structure replaced (total dimension
    /// must agree).
    pub fn relayout(&self, layout: Layout) -> Result<PureState> {
        if layout.total_dim() != self.dim() {
            return Err(Error::LayoutMismatch(self.layout.dims().to_vec(), layout.dims().to_vec()));
        }
        Ok(PureState { layout, amplitudes: self.amplitudes.clone() })
    }

    pub fn permute(&self, perm: &[usize]) -> Result<PureState> {
        let (layout, amplitudes) = linalg::permute_vector(&self.amplitudes, &self.layout, perm)?;
        Ok(PureState { layout, amplitudes })
    }
}

/// Density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityOperator {
    layout: Layout,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(layout: Layout, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(layout, matrix, STRUCT_TOL)
    }

    /// Validation with a caller-chosen tolerance (channel outputs inherit
    /// the looser Kraus-completeness tolerance).
    pub fn with_tolerance(layout: Layout, matrix: CMatrix, tol: f64) -> Result<Self> {
        check_square(&layout, &matrix)?;
        linalg::check_hermitian(&matrix, tol)?;
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { layout, matrix })
    }

    /// Hermitizes and rescales to unit trace before validating.
    pub fn normalized(layout: Layout, matrix: CMatrix) -> Result<Self> {
        let h = linalg::hermitize(&matrix);
        let tr = linalg::trace(&h).re;
        if tr <= 1e-300 || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr} cannot be normalized")));
        }
        Self::new(layout, h.unscale(tr))
    }

    pub fn maximally_mixed(layout: Layout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: linalg::identity(n).unscale(n as f64) }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            layout: self.layout.concat(&other.layout),
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    /// Reduced state on `keep` (in the listed order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let matrix = linalg::partial_trace_matrix(&self.matrix, &self.layout, keep)?;
        Ok(DensityOperator { layout: self.layout.select(keep)?, matrix })
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn permute(&self, perm: &[usize]) -> Result<DensityOperator> {
        let (layout, matrix) = linalg::permute_matrix(&self.matrix, &self.layout, perm)?;
        Ok(DensityOperator { layout, matrix })
    }

    pub fn relayout(&self, layout: Layout) -> Result<DensityOperator> {
        if layout.total_dim() != self.dim() {
            return Err(Error::LayoutMismatch(self.layout.dims().to_vec(), layout.dims().to_vec()));
        }
        Ok(DensityOperator { layout, matrix: self.matrix.clone() })
    }

    /// Convex combination Σ wᵢ ρᵢ (weights must be nonnegative, sum to 1).
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<DensityOperator> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let layout = first.1.layout.clone();
        let mut m = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            same_layout(&layout, &rho.layout)?;
            if *w < 0.0 {
                return Err(Error::InvalidState(format!("negative weight {w}")));
            }
            m += &rho.matrix * c(*w, 0.0);
        }
        DensityOperator::new(layout, m)
    }
}

impl From<&PureState> for DensityOperator {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

/// Hermitian effect 0 ⪯ M ⪯ I; `tr(Mρ)` is an acceptance probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct EffectOperator {
    layout: Layout,
    matrix: CMatrix,
}

impl EffectOperator {
    pub fn new(layout: Layout, matrix: CMatrix) -> Result<Self> {
        check_square(&layout, &matrix)?;
        linalg::check_hermitian(&matrix, STRUCT_TOL)?;
        let ev = linalg::eigvalsh(&matrix);
        let (min, max) = (ev[0], ev[ev.len() - 1]);
        if min < -STRUCT_TOL || max > 1.0 + STRUCT_TOL {
            return Err(Error::InvalidEffect { min, max });
        }
        Ok(Self { layout, matrix: linalg::hermitize(&matrix) })
    }

    pub fn identity(layout: Layout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: linalg::identity(n) }
    }

    pub fn zero(layout: Layout) -> Self {
        let n = layout.total_dim();
        Self { layout, matrix: CMatrix::zeros(n, n) }
    }

    /// Rank-one projector |ψ⟩⟨ψ|.
    pub fn projector(psi: &PureState) -> Self {
        Self { layout: psi.layout().clone(), matrix: linalg::outer(psi.amplitudes()) }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// tr(Mρ).
    pub fn accept_prob(&self, rho: &DensityOperator) -> Result<f64> {
        same_layout(&self.layout, &rho.layout)?;
        Ok(linalg::trace_product(&self.matrix, &rho.matrix).re)
    }

    /// ⟨ψ|M|ψ⟩.
    pub fn accept_prob_pure(&self, psi: &PureState) -> Result<f64> {
        same_layout(&self.layout, psi.layout())?;
        Ok(linalg::expectation(&self.matrix, psi.amplitudes()))
    }

    /// I − M.
    pub fn complement(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: linalg::identity(self.dim()) - &self.matrix }
    }

    pub fn tensor(&self, other: &EffectOperator) -> EffectOperator {
        EffectOperator {
            layout: self.layout.concat(&other.layout),
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<EffectOperator> {
        let (layout, matrix) = linalg::permute_matrix(&self.matrix, &self.layout, perm)?;
        Ok(EffectOperator { layout, matrix })
    }

    pub fn relayout(&self, layout: Layout) -> Result<EffectOperator> {
        if layout.total_dim() != self.dim() {
            return Err(Error::LayoutMismatch(self.layout.dims().to_vec(), layout.dims().to_vec()));
        }
        Ok(EffectOperator { layout, matrix: self.matrix.clone() })
    }
}

pub(crate) fn same_layout(a: &Layout, b: &Layout) -> Result<()> {
    if a != b {
        return Err(Error::LayoutMismatch(a.dims().to_vec(), b.dims().to_vec()));
    }
    Ok(())
}

fn check_square(layout: &Layout, m: &CMatrix) -> Result<()> {
    let n = layout.total_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    Ok(())
}

/// d_tr(ρ, σ) = ½‖ρ − σ‖₁.
pub fn trace_distance(x: &DensityOperator, y: &DensityOperator) -> Result<f64> {
    same_layout(x.layout(), y.layout())?;
    let d = 0.5 * linalg::trace_norm_hermitian(&(x.matrix() - y.matrix()));
    Ok(d.clamp(0.0, 1.0))
}

/// Trace distance between pure states, √(1 − |⟨ψ|φ⟩|²).
pub fn trace_distance_pure(x: &PureState, y: &PureState) -> Result<f64> {
    let ov = x.inner(y)?.norm_sqr();
    Ok((1.0 - ov).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extreme {
    Max,
    Min,
}

/// Largest or smallest eigenvalue of a Hermitian matrix with a unit
/// eigenvector. Degenerate ties return the first vector the solver reports.
pub fn extreme_eigpair(h: &CMatrix, which: Extreme) -> Result<(f64, CVector)> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: h.ncols() });
    }
    linalg::check_hermitian(h, STRUCT_TOL.max(1e-9 * h.norm()))?;
    let (vals, vecs) = linalg::eigh(h);
    let k = match which {
        Extreme::Min => 0,
        Extreme::Max => vals.len() - 1,
    };
    let v = vecs.column(k).into_owned();
    let residual = (h * &v - &v * c(vals[k], 0.0)).norm();
    if residual > EIG_TOL * h.norm().max(1.0) {
        return Err(Error::Contract(format!("eigen residual {residual:e}")));
    }
    Ok((vals[k], v))
}

/// Fact: |tr(Mρ) − tr(Mσ)| ≤ d_tr(ρ, σ) for every effect M.
pub fn povm_probability_bound_check(m: &EffectOperator, rho: &DensityOperator, sigma: &DensityOperator) -> Result<bool> {
    let lhs = (m.accept_prob(rho)? - m.accept_prob(sigma)?).abs();
    Ok(lhs <= trace_distance(rho, sigma)? + 1e-9)
}

/// |0…0⟩ on the given layout.
pub fn zero_state(layout: Layout) -> PureState {
    PureState::basis(layout, 0).expect("index 0 always exists")
}

/// (|00⟩ + |11⟩)/√2 on two qubits.
pub fn epr_pair() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVector::from_vec(vec![c(s, 0.0), linalg::ZERO, linalg::ZERO, c(s, 0.0)]);
    PureState::new(Layout::qubits(2), v).expect("normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::ONE;

    #[test]
    fn tensor_of_basis_states() {
        let z = PureState::basis(Layout::qubits(1), 0).unwrap();
        let o = PureState::basis(Layout::qubits(1), 1).unwrap();
        let t = z.tensor(&o);
        assert_eq!(t.layout().dims(), &[2, 2]);
        assert!((t.amplitudes()[1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn plus_plus_is_uniform() {
        let plus = PureState::bloch(std::f64::consts::FRAC_PI_2, 0.0);
        let t = plus.tensor(&plus);
        for a in t.amplitudes().iter() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn epr_marginal_is_maximally_mixed() {
        let rho = epr_pair().to_density().partial_trace(&[0]).unwrap();
        let target = DensityOperator::maximally_mixed(Layout::qubits(1));
        assert!(trace_distance(&rho, &target).unwrap() < 1e-15);
    }

    #[test]
    fn product_marginal() {
        let s = PureState::basis(Layout::qubits(2), 1).unwrap().to_density();
        let a = s.partial_trace(&[0]).unwrap();
        assert!((a.matrix()[(0, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn distance_zero_vs_plus() {
        let z = PureState::bloch(0.0, 0.0).to_density();
        let p = PureState::bloch(std::f64::consts::FRAC_PI_2, 0.0).to_density();
        assert!((trace_distance(&z, &p).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn extreme_of_pauli_z() {
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        let (lam, v) = extreme_eigpair(&z, Extreme::Max).unwrap();
        assert!((lam - 1.0).abs() < 1e-15);
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effect_validation_rejects_out_of_range() {
        let m = linalg::identity(2) * c(1.5, 0.0);
        assert!(matches!(EffectOperator::new(Layout::qubits(1), m), Err(Error::InvalidEffect { .. })));
    }

    #[test]
    fn density_validation_rejects_bad_trace() {
        let m = linalg::identity(2);
        assert!(DensityOperator::new(Layout::qubits(1), m).is_err());
    }
}
