//! Local search over pure states: projected gradient on the unit sphere.

use rayon::prelude::*;

use super::effective::{extreme, projector, Bilinear};
use crate::qstate::linalg::{self, c, CMatrix, CVector};
use crate::qstate::random::haar_state;
use crate::qstate::{Extreme, Layout, SeededRng};

#[derive(Clone, Debug)]
pub(crate) struct PureOuter {
    pub value: f64,
    pub state: CVector,
    pub iterations: usize,
    pub converged: bool,
}

const BETAS: [f64; 5] = [10.0, 100.0, 1e3, 1e4, 1e5];

/// Smoothed objective J_β(ψ) = softmin_i μ_i with μ = sign·spec(H'(ψ)), and
/// the operator on slot 0 whose quadratic form gives its gradient.
fn smoothed(form: &Bilinear, psi: &CVector, sign: f64, beta: f64) -> (f64, CMatrix) {
    let h = form.reduce_first(&projector(psi));
    let (vals, vecs) = linalg::eigh(&h);
    let mu: Vec<f64> = vals.iter().map(|l| sign * l).collect();
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = mu.iter().map(|m| (-beta * (m - mu_min)).exp()).collect();
    let z: f64 = w.iter().sum();
    let value = mu_min - z.ln() / beta;
    let mut p = CMatrix::zeros(h.nrows(), h.nrows());
    for (k, wk) in w.iter().enumerate() {
        let v = vecs.column(k).into_owned();
        p += projector(&v) * c(sign * wk / z, 0.0);
    }
    (value, form.reduce_second(&p))
}

/// Exact objective: the inner player's extreme value against ψ.
pub(crate) fn exact_value(form: &Bilinear, psi: &CVector, maximize: bool) -> f64 {
    let inner = if maximize { Extreme::Min } else { Extreme::Max };
    extreme(&form.reduce_first(&projector(psi)), inner).0
}

fn tangent(psi: &CVector, g: &CVector) -> CVector {
    let along = psi.dotc(g).re;
    g - psi * c(along, 0.0)
}

fn ascend(form: &Bilinear, mut psi: CVector, sign: f64, beta: f64, iters: usize, tol: f64) -> (CVector, usize, bool) {
    let (mut val, mut k) = smoothed(form, &psi, sign, beta);
    let mut step = 1.0;
    let trial_at = |psi: &CVector, t: &CVector, s: f64| {
        let x = psi + t * c(s, 0.0);
        let x = x.unscale(x.norm());
        let (v, k) = smoothed(form, &x, sign, beta);
        (x, v, k)
    };
    for it in 0..iters {
        let g = &k * &psi * c(2.0, 0.0);
        let t = tangent(&psi, &g);
        let tn2 = t.norm_squared();
        if tn2.sqrt() < tol {
            return (psi, it, true);
        }
        // Backtrack to the first step with sufficient increase, then keep
        // moving the step (halving or doubling) while the value improves:
        // plain Armijo happily accepts steps that overshoot the maximum.
        let mut s = step;
        let mut best = trial_at(&psi, &t, s);
        while best.1 < val + 1e-4 * s * tn2 && s > 1e-14 {
            s *= 0.5;
            best = trial_at(&psi, &t, s);
        }
        if best.1 < val + 1e-4 * s * tn2 {
            return (psi, it, true);
        }
        for factor in [0.5, 2.0] {
            loop {
                let cand = trial_at(&psi, &t, s * factor);
                if cand.1 > best.1 {
                    best = cand;
                    s *= factor;
                } else {
                    break;
                }
            }
        }
        let gain = best.1 - val;
        step = s;
        psi = best.0;
        val = best.1;
        k = best.2;
        if gain <= 1e-15 * val.abs().max(1.0) {
            return (psi, it + 1, true);
        }
    }
    (psi, iters, false)
}

/// Outer player on slot 0 restricted to pure states; inner player exact.
pub(crate) fn solve_outer_pure(
    form: &Bilinear,
    maximize: bool,
    rng: &SeededRng,
    restarts: usize,
    max_iters: usize,
    tol: f64,
) -> PureOuter {
    let sign = if maximize { 1.0 } else { -1.0 };
    let layout = Layout::single(form.d0).expect("positive dimension");
    let per_beta = (max_iters / BETAS.len()).max(1);
    let runs: Vec<PureOuter> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut sub = rng.derive("sphere-restart", r as u64);
            let mut psi = haar_state(&layout, &mut sub).amplitudes().clone();
            let mut iterations = 0;
            let mut converged = true;
            for &beta in &BETAS {
                let (next, used, ok) = ascend(form, psi, sign, beta, per_beta, tol);
                psi = next;
                iterations += used;
                converged = ok;
            }
            let value = exact_value(form, &psi, maximize);
            PureOuter { value, state: psi, iterations, converged }
        })
        .collect();
    pick_best(runs, maximize)
}

/// Deterministic reduction: best value, ties to the lowest restart index.
fn pick_best(runs: Vec<PureOuter>, maximize: bool) -> PureOuter {
    let mut best: Option<PureOuter> = None;
    for r in runs {
        let better = match &best {
            None => true,
            Some(b) => {
                if maximize {
                    r.value > b.value
                } else {
                    r.value < b.value
                }
            }
        };
        if better {
            best = Some(r);
        }
    }
    best.expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_copy_game_value_is_one() {
        let m = (linalg::identity(4) + linalg::swap_operator(2)) * c(0.5, 0.0);
        let form = Bilinear::new(m, 2, 2);
        let sol = solve_outer_pure(&form, false, &SeededRng::new(5), 3, 500, 1e-10);
        assert!((sol.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exists_forall_on_product_projector() {
        // M = |0⟩⟨0| ⊗ I: outer picks |0⟩ and gets 1 whatever the inner does.
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(1.0, 0.0);
        let form = Bilinear::new(m, 2, 2);
        let sol = solve_outer_pure(&form, true, &SeededRng::new(6), 4, 2000, 1e-12);
        assert!((sol.value - 1.0).abs() < 1e-6, "{}", sol.value);
    }
}
