//! The Γ channel on ensemble inputs: two inner disentangler calls, k'
//! product tests, and a fallback to |0⟩^{⊗k}.

use serde::{Deserialize, Serialize};

use super::ensemble::StateEnsemble;
use super::peaked::{hitting_set, hitting_set_exact, PeakedInstance};
use crate::error::{Error, Result};
use crate::protocols::product_accept_prob;
use crate::qstate::{zero_state, SeededRng};

/// Weights at or below this are dropped from the output ensemble.
pub const PRUNE_WEIGHT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisentanglerParams {
    pub k: usize,
    pub delta: f64,
    /// The constant C in t = Ck(8/δ)².
    pub c_const: f64,
    pub t: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub k_prime: usize,
    /// Copies per input register, ⌈(k + k')³/δ⁴⌉ with logarithmic factors
    /// dropped (informational; the reference inner channel ignores it).
    pub ell: u64,
    /// Support bound ⌈64/(e(1 − α)δ²)⌉ for the surviving part.
    pub m: usize,
    /// e^{−1/t}, the lower bound on τ = ε_S^{1/k'}.
    pub tau_floor: f64,
}

impl DisentanglerParams {
    /// t = Ck(8/δ)², α = γ = δ/16, k' = ⌈−t ln(αδ/4)⌉.
    pub fn new(k: usize, delta: f64, c_const: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be positive".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("δ = {delta} outside (0, 1)")));
        }
        if !(c_const > 0.0 && c_const.is_finite()) {
            return Err(Error::Domain(format!("C = {c_const} must be positive")));
        }
        let t = c_const * k as f64 * (8.0 / delta).powi(2);
        let alpha = delta / 16.0;
        let gamma = delta / 16.0;
        let k_prime = (-t * (alpha * delta / 4.0).ln()).ceil() as usize;
        let kk = (k + k_prime) as f64;
        let ell = (kk.powi(3) / delta.powi(4)).ceil().min(u64::MAX as f64) as u64;
        let m = (64.0 / (std::f64::consts::E * (1.0 - alpha) * delta * delta)).ceil() as usize;
        Ok(Self { k, delta, c_const, t, alpha, gamma, k_prime, ell, m, tau_floor: (-1.0 / t).exp() })
    }

    pub fn k_prime_floor(&self) -> usize {
        (-self.t * (self.alpha * self.delta / 4.0).ln()).ceil() as usize
    }
}

/// Maps ρ_a ⊗ ρ_b (each an ensemble over copies of ℋ) to an ensemble over
/// `out_copies` copies of ℋ.
pub trait InnerDisentangler: Sync {
    fn name(&self) -> &str;
    fn apply(&self, a: &StateEnsemble, b: &StateEnsemble, out_copies: usize) -> Result<StateEnsemble>;
}

/// Stand-in for the inner disentangler: picks one of the two inputs with
/// probability ½ and re-emits each of its components with `out_copies`
/// copies. On χ^{⊗ℓ} ⊗ χ^{⊗ℓ} it returns χ^{⊗(k+k')} exactly.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceInner;

impl InnerDisentangler for ReferenceInner {
    fn name(&self) -> &str {
        "reference"
    }

    fn apply(&self, a: &StateEnsemble, b: &StateEnsemble, out_copies: usize) -> Result<StateEnsemble> {
        if a.layout() != b.layout() {
            return Err(Error::LayoutMismatch(a.layout().dims().to_vec(), b.layout().dims().to_vec()));
        }
        let mut parts: Vec<(f64, crate::qstate::PureState)> = Vec::with_capacity(a.len() + b.len());
        for c in a.components().iter().chain(b.components()) {
            let w = 0.5 * c.weight;
            match parts.iter_mut().find(|(_, s)| s == &c.state) {
                Some(slot) => slot.0 += w,
                None => parts.push((w, c.state.clone())),
            }
        }
        StateEnsemble::new(parts, out_copies)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub output: StateEnsemble,
    pub inner: String,
    pub params: DisentanglerParams,
    /// Component weights of σ₁ and σ₂.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// c_ij = P_prod(ψ_i, φ_j)^{k'}.
    pub c: Vec<Vec<f64>>,
    /// Probability that all k' product tests accept.
    pub p_acc: f64,
    pub fallback_weight: f64,
    /// p_acc ≤ δ/4: the output is within δ of the fallback state.
    pub low_acceptance: bool,
    /// ε_S = α·p_acc and S = {(i, j) : c_ij ≥ ε_S}.
    pub eps_s: f64,
    pub s: Vec<(usize, usize)>,
    pub pr_s: f64,
    /// Pr[A ∩ Sᶜ] ≤ α p_acc.
    pub pr_accept_outside_s: f64,
    /// ε_S^{1/k'}.
    pub tau: f64,
    /// Hitting set X for S and S' = {i : ∃ j ∈ X, (i, j) ∈ S}.
    pub x: Vec<usize>,
    pub s_prime: Vec<usize>,
    /// Pr[i ∈ S' | (i, j) ∈ S].
    pub s_prime_coverage: f64,
    pub pruned_weight: f64,
}

/// Γ(ρ₁⊗ρ₂⊗ρ₃⊗ρ₄) with ensemble inputs.
///
/// Step 1 calls `inner` on (ρ₁, ρ₂) and (ρ₃, ρ₄). Step 2 runs k' product
/// tests between the first k' registers of the two outputs, which accept
/// on the component pair (i, j) with probability c_ij = P_prod(ψ_i, φ_j)^{k'};
/// then the output keeps ψ_i^{⊗k} with weight Σ_j p_i q_j c_ij and puts the
/// rest on |0⟩^{⊗k}.
pub fn gamma_channel(
    inputs: [&StateEnsemble; 4],
    params: &DisentanglerParams,
    inner: &dyn InnerDisentangler,
    rng: &mut SeededRng,
) -> Result<GammaReport> {
    let layout = inputs[0].layout().clone();
    for e in &inputs[1..] {
        if e.layout() != &layout {
            return Err(Error::LayoutMismatch(layout.dims().to_vec(), e.layout().dims().to_vec()));
        }
    }
    let out_copies = params.k + params.k_prime;
    let sigma1 = inner.apply(inputs[0], inputs[1], out_copies)?;
    let sigma2 = inner.apply(inputs[2], inputs[3], out_copies)?;
    for s in [&sigma1, &sigma2] {
        if s.copy_count() != out_copies || s.layout() != &layout || (s.total_weight() - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "inner channel '{}' returned {} copies on {:?}",
                inner.name(),
                s.copy_count(),
                s.layout().dims()
            )));
        }
    }

    let p = sigma1.weights();
    let q = sigma2.weights();
    let kp = i32::try_from(params.k_prime).map_err(|_| Error::SizeGuard(format!("k' = {}", params.k_prime)))?;
    let c: Vec<Vec<f64>> = sigma1
        .components()
        .iter()
        .map(|a| {
            let ra = a.state.to_density();
            sigma2
                .components()
                .iter()
                .map(|b| product_accept_prob(&ra, &b.state.to_density()).map(|x| x.clamp(0.0, 1.0).powi(kp)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut survive = vec![0.0; p.len()];
    let mut p_acc = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            let w = p[i] * q[j] * cij;
            survive[i] += w;
            p_acc += w;
        }
    }
    let fallback_weight = (1.0 - p_acc).max(0.0);

    let mut parts = Vec::with_capacity(p.len() + 1);
    let mut pruned_weight = 0.0;
    for (i, &w) in survive.iter().enumerate() {
        if w > PRUNE_WEIGHT {
            parts.push((w, sigma1.components()[i].state.clone()));
        } else {
            pruned_weight += w;
        }
    }
    let zero = zero_state(layout.clone());
    if fallback_weight > PRUNE_WEIGHT {
        parts.push((fallback_weight, zero));
    } else {
        pruned_weight += fallback_weight;
    }
    if parts.is_empty() {
        return Err(Error::Contract("every output weight was pruned".into()));
    }
    // Pruned mass is at most (M+1)·PRUNE_WEIGHT; fold it into the heaviest part.
    let heaviest = (0..parts.len()).max_by(|&a, &b| parts[a].0.total_cmp(&parts[b].0)).expect("nonempty");
    parts[heaviest].0 += 1.0 - parts.iter().map(|x| x.0).sum::<f64>();
    let output = StateEnsemble::new(parts, params.k)?;

    // Diagnostics of the analysis.
    let eps_s = params.alpha * p_acc;
    let mut s = Vec::new();
    let mut pr_s = 0.0;
    let mut pr_accept_outside_s = 0.0;
    for (i, row) in c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij >= eps_s && p[i] * q[j] > 0.0 {
                s.push((i, j));
                pr_s += p[i] * q[j];
            } else {
                pr_accept_outside_s += p[i] * q[j] * cij;
            }
        }
    }
    let tau = if eps_s > 0.0 { eps_s.powf(1.0 / params.k_prime as f64) } else { 0.0 };
    let (x, s_prime, s_prime_coverage) = cover(&p, &q, &s, params.gamma, rng)?;

    Ok(GammaReport {
        output,
        inner: inner.name().to_string(),
        params: params.clone(),
        p,
        q,
        c,
        p_acc,
        fallback_weight,
        low_acceptance: p_acc <= params.delta / 4.0,
        eps_s,
        s,
        pr_s,
        pr_accept_outside_s,
        tau,
        x,
        s_prime,
        s_prime_coverage,
        pruned_weight,
    })
}

/// Hitting set for S over the padded index range, and the rows it covers.
fn cover(p: &[f64], q: &[f64], s: &[(usize, usize)], gamma: f64, rng: &mut SeededRng) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    if s.is_empty() {
        return Ok((Vec::new(), Vec::new(), 0.0));
    }
    let n = p.len().max(q.len());
    let pad = |v: &[f64]| {
        let mut out = v.to_vec();
        out.resize(n, 0.0);
        let t: f64 = out.iter().sum();
        out.iter().map(|x| x / t).collect::<Vec<f64>>()
    };
    let inst = PeakedInstance::new(pad(p), pad(q), s.iter().copied(), gamma)?;
    let h = if n <= 16 { hitting_set_exact(&inst)? } else { hitting_set(&inst, rng)? };
    let s_prime: Vec<usize> = (0..p.len()).filter(|&i| s.iter().any(|&(a, j)| a == i && h.x.contains(&j))).collect();
    Ok((h.x, s_prime, h.conditional_coverage))
}
