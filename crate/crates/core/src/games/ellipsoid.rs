//! Central-cut ellipsoid method over density matrices.
//!
//! The outer player's state is written ρ(x) = I/d + Σ x_k G_k with {G_k} a
//! trace-orthonormal basis of traceless Hermitian matrices, so ‖x‖² ≤ 1 − 1/d
//! on the state space. With the inner player answering exactly, the outer
//! objective x ↦ λ_min(H'(ρ(x))) is concave (λ_max is convex), so the method
//! returns matching lower and upper bounds.

use nalgebra::{DMatrix, DVector};

use super::effective::{extreme, Bilinear};
use crate::qstate::linalg::{self, c, CMatrix};
use crate::qstate::Extreme;

/// Trace-orthonormal traceless Hermitian basis (generalized Gell-Mann).
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(s, 0.0);
            m[(k, j)] = c(s, 0.0);
            out.push(m);
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(0.0, -s);
            m[(k, j)] = c(0.0, s);
            out.push(m);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(1.0 / norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) / norm, 0.0);
        out.push(m);
    }
    out
}

#[derive(Clone, Debug)]
pub(crate) struct OuterSolution {
    /// Game value attained by `strategy` against the exact inner response.
    pub value: f64,
    pub strategy: CMatrix,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Outer player on slot 0 over mixed states, inner player on slot 1 exact.
/// `maximize` selects ∃ (maximize λ_min) versus ∀ (minimize λ_max).
pub(crate) fn solve_outer_mixed(form: &Bilinear, maximize: bool, max_iters: usize, tol: f64) -> OuterSolution {
    let d = form.d0;
    let basis = hermitian_basis(d);
    let n = basis.len();
    let a0 = form.reduce_first(&(linalg::identity(d) * c(1.0 / d as f64, 0.0)));
    let a: Vec<CMatrix> = basis.iter().map(|g| form.reduce_first(g)).collect();
    let (sign, inner) = if maximize { (1.0, Extreme::Min) } else { (-1.0, Extreme::Max) };

    let rho_of = |x: &DVector<f64>| -> CMatrix {
        let mut rho = linalg::identity(d) * c(1.0 / d as f64, 0.0);
        for (k, g) in basis.iter().enumerate() {
            rho += g * c(x[k], 0.0);
        }
        rho
    };
    // h(x) = sign·λ_inner(H'(x)) together with a supergradient.
    let eval = |x: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut h = a0.clone();
        for (k, ak) in a.iter().enumerate() {
            h += ak * c(x[k], 0.0);
        }
        let (lam, v) = extreme(&linalg::hermitize(&h), inner);
        let g = DVector::from_fn(n, |k, _| sign * linalg::expectation(&a[k], &v));
        (sign * lam, g)
    };

    let mut center = DVector::<f64>::zeros(n);
    let mut shape = DMatrix::<f64>::identity(n, n);
    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut best = center.clone();
    let mut iterations = 0;
    let mut converged = false;
    let nf = n as f64;

    while iterations < max_iters {
        iterations += 1;
        let rho = rho_of(&center);
        let (lmin, v) = extreme(&linalg::hermitize(&rho), Extreme::Min);
        let cut = if lmin < 0.0 {
            // ⟨v|ρ(x)|v⟩ ≥ 0 on feasible points and < 0 at the center.
            DVector::from_fn(n, |k, _| linalg::expectation(&basis[k], &v))
        } else {
            let (val, g) = eval(&center);
            if val > lb {
                lb = val;
                best = center.clone();
            }
            let spread = (g.dot(&(&shape * &g))).max(0.0).sqrt();
            ub = ub.min(val + spread);
            if ub - lb <= tol || spread == 0.0 {
                if spread == 0.0 {
                    ub = ub.min(val);
                }
                converged = true;
                break;
            }
            g
        };
        let pc = &shape * &cut;
        let denom = cut.dot(&pc);
        if denom <= 0.0 || !denom.is_finite() {
            break;
        }
        let b = pc / denom.sqrt();
        center += &b / (nf + 1.0);
        shape = (&shape - (&b * b.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
        shape = (&shape + shape.transpose()) * 0.5;
    }

    let strategy = rho_of(&best);
    let (value, lower, upper) = if maximize { (lb, lb, ub) } else { (-lb, -ub, -lb) };
    OuterSolution { value, strategy: linalg::hermitize(&strategy), lower, upper, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        for d in 2..5 {
            let b = hermitian_basis(d);
            assert_eq!(b.len(), d * d - 1);
            for (i, x) in b.iter().enumerate() {
                assert!(linalg::trace(x).norm() < 1e-15);
                for (j, y) in b.iter().enumerate() {
                    let ip = linalg::trace_product(x, y);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - c(want, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn swap_effect_copy_game() {
        // ∀ρ ∃σ: min_ρ (1 + λ_max(ρ))/2 = 1/2 + 1/(2d).
        for d in [2usize, 4] {
            let m = (linalg::identity(d * d) + linalg::swap_operator(d)) * c(0.5, 0.0);
            let form = Bilinear::new(m, d, d);
            let sol = solve_outer_mixed(&form, false, 200_000, 1e-10);
            assert!(sol.converged);
            let want = 0.5 + 0.5 / d as f64;
            assert!((sol.value - want).abs() < 1e-8, "{} vs {}", sol.value, want);
            assert!(sol.lower <= sol.value + 1e-12 && sol.value <= sol.upper + 1e-12);
        }
    }
}
