//! Values of alternating quantified games ∃ρ₁ ∀ρ₂ … over quantum states.
//!
//! The value of a game is Q₁ρ₁ Q₂ρ₂ ⋯ tr(M ρ₁⊗ρ₂⊗⋯) with ∃ = sup and
//! ∀ = inf. The last mover is always answered exactly by an extreme
//! eigenvector of the effective operator; earlier movers are handled by the
//! ellipsoid method (mixed outer slot of a two-slot game), projected
//! gradient on the sphere (pure outer slot) or nested local search.

mod copy_game;
mod effective;
mod ellipsoid;
mod grid;
mod minimax;
mod sphere;

use serde::{Deserialize, Serialize};

pub use copy_game::{copy_game_effect, copy_game_values, CopyGameValues};
pub use effective::{best_response_mixed, effective_operator};
pub use ellipsoid::hermitian_basis;
pub use grid::{bloch_grid, solve_grid_pure, GridOptions};
pub use minimax::{minimax_equality_check, MinimaxReport};

use effective::{extreme, projector, Bilinear};
use crate::error::{Error, Result};
use crate::qstate::linalg::{self, c, CMatrix, CVector};
use crate::qstate::random::haar_state;
use crate::qstate::{DensityOperator, EffectOperator, Extreme, Layout, MatrixJson, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    #[serde(rename = "E")]
    Exists,
    #[serde(rename = "A")]
    Forall,
}

impl Quantifier {
    pub fn maximizes(self) -> bool {
        matches!(self, Quantifier::Exists)
    }

    pub fn flip(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }

    /// The extreme eigenvalue this player picks when moving last.
    pub fn extreme(self) -> Extreme {
        if self.maximizes() {
            Extreme::Max
        } else {
            Extreme::Min
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Purity {
    Pure,
    Mixed,
}

/// One quantified register: serialized as `["E", 2, "pure"]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(Quantifier, usize, Purity)", into = "(Quantifier, usize, Purity)")]
pub struct Slot {
    pub quantifier: Quantifier,
    pub dim: usize,
    pub purity: Purity,
}

impl Slot {
    pub fn new(quantifier: Quantifier, dim: usize, purity: Purity) -> Self {
        Self { quantifier, dim, purity }
    }
}

impl From<(Quantifier, usize, Purity)> for Slot {
    fn from((quantifier, dim, purity): (Quantifier, usize, Purity)) -> Self {
        Self { quantifier, dim, purity }
    }
}

impl From<Slot> for (Quantifier, usize, Purity) {
    fn from(s: Slot) -> Self {
        (s.quantifier, s.dim, s.purity)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Slot>", into = "Vec<Slot>")]
pub struct QuantifierPrefix {
    slots: Vec<Slot>,
}

impl QuantifierPrefix {
    pub fn new(slots: Vec<Slot>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Domain("quantifier prefix needs at least one slot".into()));
        }
        if let Some(s) = slots.iter().find(|s| s.dim < 2) {
            return Err(Error::Domain(format!("slot dimension {} below 2", s.dim)));
        }
        Ok(Self { slots })
    }

    /// Convenience: alternating prefix starting with `first`, all of one purity.
    pub fn alternating(first: Quantifier, dims: &[usize], purity: Purity) -> Result<Self> {
        let mut q = first;
        let mut slots = Vec::with_capacity(dims.len());
        for &d in dims {
            slots.push(Slot::new(q, d, purity));
            q = q.flip();
        }
        Self::new(slots)
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.dim).collect()
    }

    /// ∃ ↔ ∀ on every slot.
    pub fn flipped(&self) -> Self {
        Self { slots: self.slots.iter().map(|s| Slot { quantifier: s.quantifier.flip(), ..*s }).collect() }
    }

    /// Same prefix with every slot set to `purity`.
    pub fn with_purity(&self, purity: Purity) -> Self {
        Self { slots: self.slots.iter().map(|s| Slot { purity, ..*s }).collect() }
    }
}

impl TryFrom<Vec<Slot>> for QuantifierPrefix {
    type Error = Error;
    fn try_from(slots: Vec<Slot>) -> Result<Self> {
        Self::new(slots)
    }
}

impl From<QuantifierPrefix> for Vec<Slot> {
    fn from(p: QuantifierPrefix) -> Self {
        p.slots
    }
}

/// Effect plus quantifier prefix, optionally with completeness and
/// soundness thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameInstanceJson", into = "GameInstanceJson")]
pub struct GameInstance {
    effect: EffectOperator,
    prefix: QuantifierPrefix,
    c: Option<f64>,
    s: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameInstanceJson {
    effect: MatrixJson,
    prefix: QuantifierPrefix,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    s: Option<f64>,
}

impl GameInstance {
    /// The effect's layout is replaced by one factor per slot (the total
    /// dimension must agree).
    pub fn new(effect: EffectOperator, prefix: QuantifierPrefix) -> Result<Self> {
        let dims = prefix.dims();
        let layout = Layout::new(dims.clone())?;
        if layout.total_dim() != effect.dim() {
            return Err(Error::LayoutMismatch(effect.layout().dims().to_vec(), dims));
        }
        let effect = effect.relayout(layout)?;
        Ok(Self { effect, prefix, c: None, s: None })
    }

    pub fn with_thresholds(mut self, c: f64, s: f64) -> Result<Self> {
        if !(0.0 <= s && s < c && c <= 1.0) {
            return Err(Error::Domain(format!("thresholds need 0 ≤ s < c ≤ 1, got c = {c}, s = {s}")));
        }
        self.c = Some(c);
        self.s = Some(s);
        Ok(self)
    }

    pub fn effect(&self) -> &EffectOperator {
        &self.effect
    }

    pub fn prefix(&self) -> &QuantifierPrefix {
        &self.prefix
    }

    pub fn thresholds(&self) -> Option<(f64, f64)> {
        self.c.zip(self.s)
    }

    /// tr(M ρ₁⊗⋯⊗ρ_n) for a full strategy profile.
    pub fn payoff(&self, strategy: &[DensityOperator]) -> Result<f64> {
        if strategy.len() != self.prefix.len() {
            return Err(Error::Precondition(format!("{} states for {} slots", strategy.len(), self.prefix.len())));
        }
        let mut joint = strategy[0].matrix().clone();
        for rho in &strategy[1..] {
            joint = linalg::kron(&joint, rho.matrix());
        }
        if joint.nrows() != self.effect.dim() {
            return Err(Error::DimensionMismatch { expected: self.effect.dim(), got: joint.nrows() });
        }
        Ok(linalg::trace_product(self.effect.matrix(), &joint).re)
    }
}

impl TryFrom<GameInstanceJson> for GameInstance {
    type Error = Error;
    fn try_from(j: GameInstanceJson) -> Result<Self> {
        let effect = EffectOperator::try_from(j.effect)?;
        let g = GameInstance::new(effect, j.prefix)?;
        match (j.c, j.s) {
            (Some(c), Some(s)) => g.with_thresholds(c, s),
            (None, None) => Ok(g),
            _ => Err(Error::Domain("c and s must be given together".into())),
        }
    }
}

impl From<GameInstance> for GameInstanceJson {
    fn from(g: GameInstance) -> Self {
        GameInstanceJson { effect: g.effect.into(), prefix: g.prefix, c: g.c, s: g.s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Grid,
    Alternating,
}

/// How far the reported value can be trusted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub converged: bool,
    pub iterations: usize,
    /// Bounds on the true game value that the solver could certify.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Grid step (grid oracle only).
    pub resolution: Option<f64>,
    /// |grid value − continuum value| ≤ this (grid oracle only).
    pub lipschitz_bound: Option<f64>,
    pub evaluations: u64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameValueEstimate {
    pub value: f64,
    /// One state per slot along the reported line of play.
    pub strategy: Vec<DensityOperator>,
    pub method: Method,
    pub certificate: Certificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 50_000, tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
struct Solved {
    value: f64,
    strategy: Vec<CMatrix>,
    lower: f64,
    upper: f64,
    iterations: usize,
    converged: bool,
    note: &'static str,
}

/// Heuristic alternating solver. Deterministic given the seed.
///
/// Exact for single-slot games. Two-slot games with a mixed outer slot and
/// opposite quantifiers are solved to `tol` with certified bounds; pure
/// outer slots use sphere search with `restarts` random starts and report
/// the mixed relaxation as the one-sided bound.
pub fn solve_alternating(g: &GameInstance, rng: &SeededRng, opts: &SolverOptions) -> Result<GameValueEstimate> {
    let solved = solve_rec(g.effect.matrix(), g.prefix.slots(), rng, opts, 0);
    let strategy = solved
        .strategy
        .iter()
        .map(|m| DensityOperator::normalized(Layout::single(m.nrows())?, m.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GameValueEstimate {
        value: solved.value.clamp(0.0, 1.0),
        strategy,
        method: Method::Alternating,
        certificate: Certificate {
            converged: solved.converged,
            iterations: solved.iterations,
            lower_bound: solved.lower,
            upper_bound: solved.upper,
            resolution: None,
            lipschitz_bound: None,
            evaluations: solved.iterations as u64,
            note: solved.note.into(),
        },
    })
}

fn spectrum_range(m: &CMatrix) -> (f64, f64) {
    let ev = linalg::eigvalsh(m);
    (ev[0], ev[ev.len() - 1])
}

fn solve_rec(m: &CMatrix, slots: &[Slot], rng: &SeededRng, opts: &SolverOptions, depth: u64) -> Solved {
    if slots.len() == 1 {
        let (value, v) = extreme(m, slots[0].quantifier.extreme());
        return Solved {
            value,
            strategy: vec![projector(&v)],
            lower: value,
            upper: value,
            iterations: 1,
            converged: true,
            note: "exact extreme eigenvalue",
        };
    }
    let q0 = slots[0].quantifier;
    if slots.iter().all(|s| s.quantifier == q0) {
        return solve_same_quantifier(m, slots, rng, opts);
    }
    if slots.len() == 2 {
        return solve_two_slot(m, slots, rng, opts);
    }
    solve_nested(m, slots, rng, opts, depth)
}

fn solve_two_slot(m: &CMatrix, slots: &[Slot], rng: &SeededRng, opts: &SolverOptions) -> Solved {
    let form = Bilinear::new(m.clone(), slots[0].dim, slots[1].dim);
    let maximize = slots[0].quantifier.maximizes();
    let inner = slots[1].quantifier.extreme();
    let relax = ellipsoid::solve_outer_mixed(&form, maximize, opts.max_iters, opts.tol);
    match slots[0].purity {
        Purity::Mixed => {
            let (_, v) = extreme(&form.reduce_first(&relax.strategy), inner);
            Solved {
                value: relax.value,
                strategy: vec![relax.strategy, projector(&v)],
                lower: relax.lower,
                upper: relax.upper,
                iterations: relax.iterations,
                converged: relax.converged,
                note: "ellipsoid over the outer mixed state, exact inner response",
            }
        }
        Purity::Pure => {
            let pure = sphere::solve_outer_pure(&form, maximize, rng, opts.restarts, opts.max_iters, opts.tol);
            let (_, v) = extreme(&form.reduce_first(&projector(&pure.state)), inner);
            // Pure strategies are a subset of mixed ones: the mixed value
            // bounds the pure value from the outer player's side.
            let (lower, upper) = if maximize { (pure.value, relax.upper) } else { (relax.lower, pure.value) };
            Solved {
                value: pure.value,
                strategy: vec![projector(&pure.state), projector(&v)],
                lower,
                upper,
                iterations: pure.iterations + relax.iterations,
                converged: pure.converged,
                note: "sphere search over the outer pure state, exact inner response",
            }
        }
    }
}

/// All players on the same side: alternating best responses are monotone.
fn solve_same_quantifier(m: &CMatrix, slots: &[Slot], rng: &SeededRng, opts: &SolverOptions) -> Solved {
    let dims: Vec<usize> = slots.iter().map(|s| s.dim).collect();
    let layout = Layout::new(dims.clone()).expect("validated dims");
    let q = slots[0].quantifier;
    let maximize = q.maximizes();
    let (lo, hi) = spectrum_range(m);

    let run = |r: usize| -> (f64, Vec<CVector>, usize, bool) {
        let mut sub = rng.derive("same-restart", r as u64);
        let mut states: Vec<CVector> =
            dims.iter().map(|&d| haar_state(&Layout::single(d).expect("d ≥ 2"), &mut sub).amplitudes().clone()).collect();
        let mut value = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
        for it in 0..opts.max_iters.max(1) {
            let prev = value;
            for k in 0..states.len() {
                let others: Vec<usize> = (0..states.len()).filter(|&j| j != k).collect();
                let mut joint = projector(&states[others[0]]);
                for &j in &others[1..] {
                    joint = linalg::kron(&joint, &projector(&states[j]));
                }
                let h = linalg::contract_factors(m, &layout, &others, &joint).expect("consistent layout");
                let (val, v) = extreme(&h, q.extreme());
                states[k] = v;
                value = val;
            }
            if (value - prev).abs() <= opts.tol {
                return (value, states, it + 1, true);
            }
        }
        (value, states, opts.max_iters, false)
    };
    let mut best: Option<(f64, Vec<CVector>, usize, bool)> = None;
    for r in 0..opts.restarts.max(1) {
        let out = run(r);
        let better = match &best {
            None => true,
            Some(b) => (maximize && out.0 > b.0) || (!maximize && out.0 < b.0),
        };
        if better {
            best = Some(out);
        }
    }
    let (value, states, iterations, converged) = best.expect("one restart");
    let (lower, upper) = if maximize { (value, hi) } else { (lo, value) };
    Solved {
        value,
        strategy: states.iter().map(projector).collect(),
        lower,
        upper,
        iterations,
        converged,
        note: "alternating best responses",
    }
}

/// Three or more slots: local search for the first slot, the rest solved
/// recursively for each candidate.
fn solve_nested(m: &CMatrix, slots: &[Slot], rng: &SeededRng, opts: &SolverOptions, depth: u64) -> Solved {
    let d0 = slots[0].dim;
    let rest_dim: usize = slots[1..].iter().map(|s| s.dim).product();
    let form = Bilinear::new(m.clone(), d0, rest_dim);
    let maximize = slots[0].quantifier.maximizes();
    let sign = if maximize { 1.0 } else { -1.0 };
    let inner_opts = SolverOptions { restarts: opts.restarts.min(4), ..*opts };
    let inner_rng = rng.derive("nested-inner", depth);
    let (lo, hi) = spectrum_range(m);

    let evaluate = |rho: &CMatrix| -> Solved { solve_rec(&form.reduce_first(rho), &slots[1..], &inner_rng, &inner_opts, depth + 1) };
    // Envelope gradient: the inner line of play held fixed.
    let gradient_op = |inner: &Solved| -> CMatrix {
        let mut joint = inner.strategy[0].clone();
        for s in &inner.strategy[1..] {
            joint = linalg::kron(&joint, s);
        }
        form.reduce_second(&joint) * c(sign, 0.0)
    };
    let outer_iters = opts.max_iters.min(200);
    let layout0 = Layout::single(d0).expect("d ≥ 2");

    let mut best: Option<(f64, CMatrix, Solved, usize, bool)> = None;
    for r in 0..opts.restarts.clamp(1, 4) {
        let mut sub = rng.derive("nested-restart", r as u64 + 1000 * depth);
        let (rho, inner, iters, conv) = match slots[0].purity {
            Purity::Pure => {
                let mut psi = haar_state(&layout0, &mut sub).amplitudes().clone();
                let mut inner = evaluate(&projector(&psi));
                let mut step = 1.0;
                let mut used = 0;
                let mut conv = false;
                for it in 0..outer_iters {
                    used = it + 1;
                    let g = gradient_op(&inner) * &psi * c(2.0, 0.0);
                    let t = &g - &psi * c(psi.dotc(&g).re, 0.0);
                    if t.norm() < opts.tol.sqrt() {
                        conv = true;
                        break;
                    }
                    let mut moved = false;
                    while step > 1e-10 {
                        let trial = &psi + &t * c(step, 0.0);
                        let trial = trial.unscale(trial.norm());
                        let cand = evaluate(&projector(&trial));
                        if sign * cand.value > sign * inner.value + 1e-12 {
                            psi = trial;
                            inner = cand;
                            step *= 2.0;
                            moved = true;
                            break;
                        }
                        step *= 0.5;
                    }
                    if !moved {
                        conv = true;
                        break;
                    }
                }
                (projector(&psi), inner, used, conv)
            }
            Purity::Mixed => {
                let mut a = crate::qstate::random::ginibre(d0, d0, &mut sub);
                let rho_of = |a: &CMatrix| {
                    let p = a * a.adjoint();
                    let t = linalg::trace(&p).re;
                    p * c(1.0 / t, 0.0)
                };
                let mut inner = evaluate(&rho_of(&a));
                let mut step = 1.0;
                let mut used = 0;
                let mut conv = false;
                for it in 0..outer_iters {
                    used = it + 1;
                    let k = gradient_op(&inner);
                    let rho = rho_of(&a);
                    let t = linalg::trace(&(&a * a.adjoint())).re;
                    let kr = linalg::trace_product(&k, &rho).re;
                    let g = (&k * &a - &a * c(kr, 0.0)) * c(2.0 / t, 0.0);
                    if g.norm() < opts.tol.sqrt() {
                        conv = true;
                        break;
                    }
                    let mut moved = false;
                    while step > 1e-10 {
                        let trial = &a + &g * c(step, 0.0);
                        let cand = evaluate(&rho_of(&trial));
                        if sign * cand.value > sign * inner.value + 1e-12 {
                            a = trial;
                            inner = cand;
                            step *= 2.0;
                            moved = true;
                            break;
                        }
                        step *= 0.5;
                    }
                    if !moved {
                        conv = true;
                        break;
                    }
                }
                (rho_of(&a), inner, used, conv)
            }
        };
        let better = match &best {
            None => true,
            Some(b) => sign * inner.value > sign * b.2.value,
        };
        if better {
            best = Some((inner.value, rho, inner, iters, conv));
        }
    }
    let (value, rho, inner, iterations, converged) = best.expect("one restart");
    let mut strategy = vec![rho];
    strategy.extend(inner.strategy);
    Solved {
        value,
        strategy,
        lower: lo,
        upper: hi,
        iterations: iterations + inner.iterations,
        converged: converged && inner.converged,
        note: "nested local search (heuristic, bounds are the spectral range)",
    }
}
