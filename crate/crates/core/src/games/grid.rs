//! Brute-force oracle for qubit games on a Bloch-sphere grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::effective::{extreme, projector, Bilinear};
use super::{Certificate, GameInstance, GameValueEstimate, Method, Purity, Slot};
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, CMatrix, CVector};
use crate::qstate::{DensityOperator, Layout, PureState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Angular step h for both the polar and the azimuthal angle.
    pub resolution: f64,
    /// Answer the last slot by an exact eigenvalue instead of the grid
    /// (the grid limit of the last slot is exactly that eigenvalue).
    pub exact_last: bool,
    /// Refuse instances needing more effective-operator evaluations.
    pub max_evaluations: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { resolution: 0.01, exact_last: true, max_evaluations: 20_000_000 }
    }
}

/// Grid points (θ, φ): θ ∈ {0, h, 2h, …} ∪ {π}, φ ∈ {0, h, …} below 2π,
/// with a single point at each pole. Every pure qubit state lies within
/// trace distance h/2 of some grid point.
pub fn bloch_grid(h: f64) -> Vec<(f64, f64)> {
    use std::f64::consts::PI;
    let mut thetas = Vec::new();
    let mut k = 0usize;
    while (k as f64) * h < PI {
        thetas.push(k as f64 * h);
        k += 1;
    }
    thetas.push(PI);
    let mut phis = Vec::new();
    let mut j = 0usize;
    while (j as f64) * h < 2.0 * PI {
        phis.push(j as f64 * h);
        j += 1;
    }
    let mut out = Vec::with_capacity(thetas.len() * phis.len());
    for (i, &t) in thetas.iter().enumerate() {
        if i == 0 || i == thetas.len() - 1 {
            out.push((t, 0.0));
        } else {
            out.extend(phis.iter().map(|&p| (t, p)));
        }
    }
    out
}

fn better(maximize: bool, a: f64, b: f64) -> bool {
    if maximize {
        a > b
    } else {
        a < b
    }
}

struct Oracle<'a> {
    points: &'a [CVector],
    projectors: &'a [CMatrix],
    exact_last: bool,
}

impl Oracle<'_> {
    /// Value of the game `slots` on operator `m` and the index chosen by
    /// the first mover (None if the slot is answered exactly).
    fn value(&self, m: &CMatrix, slots: &[Slot]) -> (f64, Option<usize>) {
        let q = slots[0].quantifier;
        let maximize = q.maximizes();
        if slots.len() == 1 {
            if self.exact_last {
                return (extreme_2x2(m, maximize), None);
            }
            let mut best = (if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, 0);
            for (i, p) in self.points.iter().enumerate() {
                let v = linalg::expectation(m, p);
                if better(maximize, v, best.0) {
                    best = (v, i);
                }
            }
            return (best.0, Some(best.1));
        }
        let rest: usize = slots[1..].iter().map(|s| s.dim).product();
        let form = Bilinear::new(m.clone(), 2, rest);
        let mut best = (if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, 0);
        for (i, p) in self.projectors.iter().enumerate() {
            let (v, _) = self.value(&form.reduce_first(p), &slots[1..]);
            if better(maximize, v, best.0) {
                best = (v, i);
            }
        }
        (best.0, Some(best.1))
    }
}

/// Closed-form extreme eigenvalue of a 2×2 Hermitian matrix.
fn extreme_2x2(m: &CMatrix, maximize: bool) -> f64 {
    let (a, d, b) = (m[(0, 0)].re, m[(1, 1)].re, m[(0, 1)]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    if maximize {
        mean + r
    } else {
        mean - r
    }
}

/// Exact alternation over a deterministic grid of pure qubit states.
///
/// The certificate's `lipschitz_bound` bounds the distance between the grid
/// value and the continuum value: (slots on the grid)·(h/2)·(λ_max − λ_min).
pub fn solve_grid_pure(g: &GameInstance, opts: &GridOptions) -> Result<GameValueEstimate> {
    let slots = g.prefix().slots();
    if slots.iter().any(|s| s.dim != 2) {
        return Err(Error::Domain("grid oracle needs qubit slots".into()));
    }
    if slots.iter().any(|s| s.purity != Purity::Pure) {
        return Err(Error::Domain("grid oracle needs pure slots".into()));
    }
    if slots.len() > 3 {
        return Err(Error::SizeGuard(format!("grid oracle supports at most 3 slots, got {}", slots.len())));
    }
    if !(opts.resolution > 0.0 && opts.resolution <= 1.0) {
        return Err(Error::Domain(format!("grid resolution {} outside (0, 1]", opts.resolution)));
    }
    let grid = bloch_grid(opts.resolution);
    let exact_last = opts.exact_last && slots.len() > 1;
    let on_grid = if exact_last { slots.len() - 1 } else { slots.len() };
    let evaluations = (grid.len() as u64).checked_pow(on_grid as u32).unwrap_or(u64::MAX);
    if evaluations > opts.max_evaluations {
        return Err(Error::SizeGuard(format!("{evaluations} grid evaluations exceed the cap {}", opts.max_evaluations)));
    }
    let points: Vec<CVector> = grid.iter().map(|&(t, p)| PureState::bloch(t, p).amplitudes().clone()).collect();
    let projectors: Vec<CMatrix> = points.iter().map(projector).collect();
    let oracle = Oracle { points: &points, projectors: &projectors, exact_last };
    let m = g.effect().matrix();

    let (value, first) = if slots.len() == 1 {
        oracle.value(m, slots)
    } else {
        // Parallel over the first mover; deterministic reduction keeps the
        // lowest index among equal values.
        let rest: usize = slots[1..].iter().map(|s| s.dim).product();
        let form = Bilinear::new(m.clone(), 2, rest);
        let values: Vec<f64> =
            projectors.par_iter().map(|p| oracle.value(&form.reduce_first(p), &slots[1..]).0).collect();
        let maximize = slots[0].quantifier.maximizes();
        let mut best = (values[0], 0);
        for (i, &v) in values.iter().enumerate().skip(1) {
            if better(maximize, v, best.0) {
                best = (v, i);
            }
        }
        (best.0, Some(best.1))
    };

    // Line of play: replay the choices slot by slot.
    let mut strategy = Vec::with_capacity(slots.len());
    let mut cur = m.clone();
    let mut choice = first;
    for k in 0..slots.len() {
        let state: CVector = match choice {
            Some(i) => points[i].clone(),
            None => extreme(&cur, slots[k].quantifier.extreme()).1,
        };
        strategy.push(DensityOperator::new(Layout::qubits(1), projector(&state))?);
        if k + 1 < slots.len() {
            let rest: usize = slots[k + 1..].iter().map(|s| s.dim).product();
            cur = Bilinear::new(cur, 2, rest).reduce_first(&projector(&state));
            choice = oracle.value(&cur, &slots[k + 1..]).1;
        }
    }

    let ev = linalg::eigvalsh(m);
    let range = ev[ev.len() - 1] - ev[0];
    let lipschitz = on_grid as f64 * 0.5 * opts.resolution * range;
    Ok(GameValueEstimate {
        value,
        strategy,
        method: Method::Grid,
        certificate: Certificate {
            converged: true,
            iterations: 1,
            lower_bound: value - lipschitz,
            upper_bound: value + lipschitz,
            resolution: Some(opts.resolution),
            lipschitz_bound: Some(lipschitz),
            evaluations,
            note: if exact_last { "grid on leading slots, exact last slot".into() } else { "grid on every slot".into() },
        },
    })
}
