//! Projecting a low-energy state onto the kernel of a large penalty term.

use serde::{Deserialize, Serialize};

use super::circuit::KERNEL_TOL;
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, CMatrix};
use crate::qstate::{trace_distance, DensityOperator};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub sigma: DensityOperator,
    /// tr((H₁+H₂)ρ).
    pub epsilon: f64,
    /// √((ε + ‖H₁‖)/J).
    pub delta_bound: f64,
    /// ε + 2δ‖H₁‖.
    pub energy_bound: f64,
    /// Measured d_tr(ρ, σ).
    pub distance: f64,
    /// Measured tr((H₁+H₂)σ).
    pub energy: f64,
    pub kernel_dim: usize,
}

/// σ = PρP/tr(PρP) for P the projector onto ker H₂, with the distance and
/// energy bounds checked.
///
/// H₂ must be PSD with every nonzero eigenvalue at least J.
pub fn state_projection_apply(h1: &CMatrix, h2: &CMatrix, rho: &DensityOperator, j: f64) -> Result<ProjectionReport> {
    if !(j > 0.0) {
        return Err(Error::Domain(format!("penalty J must be positive, got {j}")));
    }
    let n = rho.dim();
    for h in [h1, h2] {
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.nrows() });
        }
        linalg::check_hermitian(h, linalg::STRUCT_TOL)?;
    }
    let scale = linalg::operator_norm_hermitian(h2).max(1.0);
    let (vals, vecs) = linalg::eigh(h2);
    let kernel: Vec<usize> = (0..n).filter(|&k| vals[k].abs() < KERNEL_TOL * scale).collect();
    if kernel.is_empty() {
        return Err(Error::Precondition("H₂ has an empty kernel".into()));
    }
    if let Some(&low) = vals.iter().find(|&&l| l.abs() >= KERNEL_TOL * scale && l < j - KERNEL_TOL * scale) {
        return Err(Error::Precondition(format!("H₂ has eigenvalue {low} outside {{0}} ∪ [J, ∞) for J = {j}")));
    }
    let mut p = CMatrix::zeros(n, n);
    for &k in &kernel {
        p += linalg::outer(&vecs.column(k).into_owned());
    }
    let projected = &p * rho.matrix() * &p;
    let weight = linalg::trace(&projected).re;
    if weight <= 1e-14 {
        return Err(Error::VanishingProbability(weight));
    }
    let sigma = DensityOperator::normalized(rho.layout().clone(), projected)?;
    let h = h1 + h2;
    let epsilon = linalg::trace_product(&h, rho.matrix()).re;
    let h1_norm = linalg::operator_norm_hermitian(h1);
    let delta_bound = ((epsilon + h1_norm).max(0.0) / j).sqrt();
    let energy_bound = epsilon + 2.0 * delta_bound * h1_norm;
    let distance = trace_distance(rho, &sigma)?;
    let energy = linalg::trace_product(&h, sigma.matrix()).re;
    let slack = 1e-10 * (1.0 + epsilon.abs() + h1_norm);
    if distance > delta_bound + slack || energy > energy_bound + slack {
        return Err(Error::Contract(format!(
            "projection bounds violated: distance {distance} vs {delta_bound}, energy {energy} vs {energy_bound}"
        )));
    }
    Ok(ProjectionReport { sigma, epsilon, delta_bound, energy_bound, distance, energy, kernel_dim: kernel.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::linalg::c;
    use crate::qstate::Layout;

    #[test]
    fn state_in_kernel_is_unchanged() {
        let mut h2 = CMatrix::zeros(2, 2);
        h2[(1, 1)] = c(5.0, 0.0);
        let rho = DensityOperator::new(Layout::qubits(1), linalg::outer(&linalg::basis_vector(2, 0))).unwrap();
        let r = state_projection_apply(&CMatrix::zeros(2, 2), &h2, &rho, 5.0).unwrap();
        assert!(r.distance < 1e-15 && r.epsilon.abs() < 1e-15);
    }

    #[test]
    fn penalty_below_j_is_refused() {
        let mut h2 = CMatrix::zeros(2, 2);
        h2[(1, 1)] = c(1.0, 0.0);
        let rho = DensityOperator::maximally_mixed(Layout::qubits(1));
        assert!(matches!(state_projection_apply(&CMatrix::zeros(2, 2), &h2, &rho, 2.0), Err(Error::Precondition(_))));
        assert!(matches!(state_projection_apply(&CMatrix::zeros(2, 2), &h2, &rho, 0.0), Err(Error::Domain(_))));
    }
}
