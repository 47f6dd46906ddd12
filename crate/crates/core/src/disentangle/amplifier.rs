//! Toy-scale round loop of the transcript amplifier: canonical transcript
//! selection by repeated SWAP tests, then majority voting on the base
//! verifier.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::DENSE_DIM_CAP;
use crate::error::{Error, Result};
use crate::games::{GameInstance, Purity};
use crate::qstate::{EffectOperator, Layout, PureState, SeededRng};

/// One table row: the transcript of the previous rounds (absent in round
/// 1) and the answer given that transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub transcript: Option<PureState>,
    pub answer: PureState,
}

/// A round's message after disentangling: a distribution over tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMessage {
    pub components: Vec<(f64, Vec<TableEntry>)>,
}

impl RoundMessage {
    pub fn single(table: Vec<TableEntry>) -> Self {
        Self { components: vec![(1.0, table)] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    pub round: usize,
    pub entry: usize,
    /// |⟨C|T⟩|².
    pub overlap: f64,
    /// Tests passed before the first failure (W if all passed).
    pub passed: usize,
}

/// Canonical transcript |C_round⟩ and the SWAP checks that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptState {
    pub round: usize,
    pub canonical: PureState,
    pub history: Vec<SwapRecord>,
}

impl TranscriptState {
    pub fn start(answer: PureState) -> Self {
        Self { round: 1, canonical: answer, history: Vec::new() }
    }

    /// Appends an answer: |C_i⟩ = |T⟩ ⊗ |ψ⟩.
    pub fn extend(&mut self, transcript: &PureState, answer: &PureState) -> Result<()> {
        if transcript.layout() != self.canonical.layout() {
            return Err(Error::LayoutMismatch(self.canonical.layout().dims().to_vec(), transcript.layout().dims().to_vec()));
        }
        let next = transcript.tensor(answer);
        if next.dim() > DENSE_DIM_CAP {
            return Err(Error::SizeGuard(format!("transcript dimension {} exceeds {DENSE_DIM_CAP}", next.dim())));
        }
        self.canonical = next;
        self.round += 1;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierParams {
    /// SWAP tests per table entry.
    pub w: usize,
    /// Majority-vote repetitions of the base verifier.
    pub t: usize,
    /// Copies available per message; must cover W·r·M_r + T.
    pub k_copies: usize,
    pub episodes: usize,
    /// Entries at trace distance ≥ this from the canonical transcript count
    /// as far in the false-pass statistics.
    pub far_distance: f64,
}

/// W = ⌈2ε⁻² ln(1/failure)⌉: all W SWAP tests pass on an ε-far transcript
/// with probability at most `failure`.
pub fn swap_tests_needed(eps: f64, failure: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) || !(failure > 0.0 && failure < 1.0) {
        return Err(Error::Domain(format!("need ε ∈ (0, 1] and failure ∈ (0, 1), got {eps}, {failure}")));
    }
    Ok((2.0 / (eps * eps) * (1.0 / failure).ln()).ceil() as usize)
}

/// Exact Pr[Bin(T, v) ≥ threshold].
pub fn binomial_upper_tail(t: usize, v: f64, threshold: usize) -> f64 {
    if threshold == 0 {
        return 1.0;
    }
    if threshold > t {
        return 0.0;
    }
    // Accumulate log-pmf terms to stay finite for large T.
    let ln_choose = |k: usize| -> f64 { (1..=k).map(|i| ((t - k + i) as f64 / i as f64).ln()).sum() };
    (threshold..=t)
        .map(|k| {
            let lp = ln_choose(k)
                + if k > 0 { k as f64 * v.ln() } else { 0.0 }
                + if t > k { (t - k) as f64 * (1.0 - v).ln() } else { 0.0 };
            lp.exp()
        })
        .sum::<f64>()
        .min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifierReport {
    pub episodes: usize,
    pub rounds: usize,
    pub w: usize,
    pub t: usize,
    /// ⌈T(c + s)/2⌉.
    pub majority_threshold: usize,
    pub accept_count: usize,
    pub accept_frequency: f64,
    /// Episodes ended by a SWAP loss, per round (index 0 is round 1).
    pub swap_losses: Vec<usize>,
    /// Table entries at distance ≥ `far_distance` that were SWAP-tested,
    /// and how many of them passed all W tests.
    pub far_checks: usize,
    pub far_passes: usize,
    pub far_pass_frequency: f64,
    /// e^{−Wε²/2} for ε = `far_distance`.
    pub far_pass_bound: f64,
    /// Episodes that reached the vote, with their mean base acceptance.
    pub voted: usize,
    pub mean_base_value: f64,
    /// Vote rejections among episodes whose base value clears the
    /// threshold, and the Hoeffding bound exp(−2(v − (c+s)/2)²T) at the
    /// smallest such base value.
    pub vote_rejections: usize,
    pub vote_rejection_frequency: f64,
    pub hoeffding_bound: f64,
    /// Exact majority acceptance Pr[Bin(T, v) ≥ threshold] averaged over
    /// the voted episodes.
    pub exact_vote_acceptance: f64,
}

struct Episode {
    accepted: bool,
    loss_round: Option<usize>,
    far_checks: usize,
    far_passes: usize,
    base_value: Option<f64>,
    vote_accepted: Option<bool>,
}

fn validate(base: &GameInstance, messages: &[RoundMessage], params: &AmplifierParams) -> Result<(usize, usize)> {
    let slots = base.prefix().slots();
    let r = slots.len();
    if r > 2 {
        return Err(Error::SizeGuard(format!("toy amplifier supports at most 2 rounds, got {r}")));
    }
    if slots.iter().any(|s| s.purity != Purity::Pure) {
        return Err(Error::Domain("toy amplifier expects pure slots".into()));
    }
    let d = slots[0].dim;
    if slots.iter().any(|s| s.dim != d) {
        return Err(Error::Domain("all rounds must use the same register dimension".into()));
    }
    if base.thresholds().is_none() {
        return Err(Error::Domain("base game needs thresholds c and s".into()));
    }
    if messages.len() != r {
        return Err(Error::Precondition(format!("{} messages for {r} rounds", messages.len())));
    }
    let cap = (d as u128).checked_pow(r as u32).unwrap_or(u128::MAX);
    if cap > DENSE_DIM_CAP as u128 {
        return Err(Error::SizeGuard(format!("transcript dimension {cap} exceeds {DENSE_DIM_CAP}")));
    }
    let mut max_entries = 1;
    for (i, msg) in messages.iter().enumerate() {
        if msg.components.is_empty() {
            return Err(Error::Domain(format!("round {} message is empty", i + 1)));
        }
        let total: f64 = msg.components.iter().map(|c| c.0).sum();
        if msg.components.iter().any(|c| !(c.0 >= 0.0)) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("round {} weights sum to {total}", i + 1)));
        }
        for (_, table) in &msg.components {
            if table.is_empty() || table.len() > 4 {
                return Err(Error::SizeGuard(format!("round {} table has {} entries (1..=4)", i + 1, table.len())));
            }
            max_entries = max_entries.max(table.len());
            for e in table {
                if e.answer.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: e.answer.dim() });
                }
                match (&e.transcript, i) {
                    (None, 0) => {}
                    (Some(t), i) if i > 0 && t.dim() == d.pow(i as u32) => {}
                    _ => return Err(Error::Domain(format!("round {} entry has a malformed transcript", i + 1))),
                }
            }
        }
    }
    let needed = params.w * r * max_entries + params.t;
    if params.k_copies < needed {
        return Err(Error::Precondition(format!("K = {} copies, need W·r·M_r + T = {needed}", params.k_copies)));
    }
    if params.t == 0 || params.episodes == 0 {
        return Err(Error::Domain("T and the episode count must be positive".into()));
    }
    Ok((r, d))
}

fn run_episode(
    effect: &EffectOperator,
    messages: &[RoundMessage],
    params: &AmplifierParams,
    threshold: usize,
    rng: &mut SeededRng,
) -> Result<Episode> {
    let mut ep = Episode { accepted: false, loss_round: None, far_checks: 0, far_passes: 0, base_value: None, vote_accepted: None };
    let far_overlap = 1.0 - params.far_distance * params.far_distance;
    let mut state: Option<TranscriptState> = None;
    for (i, msg) in messages.iter().enumerate() {
        let round = i + 1;
        let weights: Vec<f64> = msg.components.iter().map(|c| c.0).collect();
        let table = &msg.components[rng.categorical(&weights)].1;
        let Some(st) = state.as_mut() else {
            state = Some(TranscriptState::start(table[0].answer.clone()));
            continue;
        };
        let mut chosen = None;
        for (j, entry) in table.iter().enumerate() {
            let t = entry.transcript.as_ref().expect("validated transcript");
            let overlap = st.canonical.inner(&t.relayout(st.canonical.layout().clone())?)?.norm_sqr();
            let p_pass = 0.5 + 0.5 * overlap;
            let mut passed = 0;
            while passed < params.w && rng.bernoulli(p_pass) {
                passed += 1;
            }
            let far = overlap <= far_overlap + 1e-12;
            if far {
                ep.far_checks += 1;
            }
            st.history.push(SwapRecord { round, entry: j, overlap, passed });
            if passed == params.w {
                if far {
                    ep.far_passes += 1;
                }
                chosen = Some(j);
                break;
            }
        }
        match chosen {
            Some(j) => {
                let t = table[j].transcript.as_ref().expect("validated transcript").relayout(st.canonical.layout().clone())?;
                st.extend(&t, &table[j].answer)?;
            }
            None => {
                // The player of this round loses: the ∀ player moves in even rounds.
                ep.loss_round = Some(round);
                ep.accepted = round % 2 == 0;
                return Ok(ep);
            }
        }
    }
    let st = state.expect("at least one round");
    let c_r = st.canonical.relayout(effect.layout().clone())?;
    let v = effect.accept_prob_pure(&c_r)?;
    let n_acc = (0..params.t).filter(|_| rng.bernoulli(v)).count();
    let vote = n_acc >= threshold;
    ep.base_value = Some(v);
    ep.vote_accepted = Some(vote);
    ep.accepted = vote;
    Ok(ep)
}

/// Runs `params.episodes` independent episodes of the round loop on a base
/// game with at most two pure slots. Round `i` draws a table from
/// `messages[i]`; from round 2 on every entry's transcript is SWAP-tested W
/// times against the canonical one and the first entry passing all tests
/// extends it. If none passes, the player of that round loses. After the
/// last round the base effect is sampled T times on the canonical
/// transcript and the episode accepts iff N_acc ≥ ⌈T(c + s)/2⌉.
pub fn transcript_amplifier_toy(
    base: &GameInstance,
    messages: &[RoundMessage],
    params: &AmplifierParams,
    rng: &SeededRng,
) -> Result<AmplifierReport> {
    let (r, _) = validate(base, messages, params)?;
    let (c, s) = base.thresholds().expect("validated thresholds");
    let half = 0.5 * (c + s);
    // Guard against 0.5·T landing a hair above an integer.
    let threshold = ((params.t as f64 * half) - 1e-9).ceil().max(0.0) as usize;
    let effect = base.effect();

    let episodes: Vec<Episode> = (0..params.episodes)
        .into_par_iter()
        .map(|e| run_episode(effect, messages, params, threshold, &mut rng.derive("episode", e as u64)))
        .collect::<Result<_>>()?;

    let mut swap_losses = vec![0usize; r];
    let (mut accept_count, mut far_checks, mut far_passes) = (0, 0, 0);
    let (mut voted, mut value_sum, mut exact_sum) = (0usize, 0.0, 0.0);
    let (mut clear, mut vote_rejections) = (0usize, 0usize);
    let mut min_clear_value = f64::INFINITY;
    for ep in &episodes {
        accept_count += ep.accepted as usize;
        far_checks += ep.far_checks;
        far_passes += ep.far_passes;
        if let Some(round) = ep.loss_round {
            swap_losses[round - 1] += 1;
        }
        if let (Some(v), Some(vote)) = (ep.base_value, ep.vote_accepted) {
            voted += 1;
            value_sum += v;
            exact_sum += binomial_upper_tail(params.t, v, threshold);
            if v > half {
                clear += 1;
                vote_rejections += (!vote) as usize;
                min_clear_value = min_clear_value.min(v);
            }
        }
    }
    let freq = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let hoeffding_bound =
        if clear > 0 { (-2.0 * (min_clear_value - half).powi(2) * params.t as f64).exp() } else { 1.0 };
    Ok(AmplifierReport {
        episodes: params.episodes,
        rounds: r,
        w: params.w,
        t: params.t,
        majority_threshold: threshold,
        accept_count,
        accept_frequency: freq(accept_count, params.episodes),
        swap_losses,
        far_checks,
        far_passes,
        far_pass_frequency: freq(far_passes, far_checks),
        far_pass_bound: (-(params.w as f64) * params.far_distance * params.far_distance / 2.0).exp(),
        voted,
        mean_base_value: if voted == 0 { 0.0 } else { value_sum / voted as f64 },
        vote_rejections,
        vote_rejection_frequency: freq(vote_rejections, clear),
        hoeffding_bound,
        exact_vote_acceptance: if voted == 0 { 0.0 } else { exact_sum / voted as f64 },
    })
}

/// Two qubit rounds, base effect 0.9·|0⟩⟨0| ⊗ I + 0.2·|1⟩⟨1| ⊗ I with
/// (c, s) = (0.9, 0.1).
pub fn amplifier_base_game() -> Result<GameInstance> {
    use crate::games::{Quantifier, QuantifierPrefix};
    use crate::qstate::linalg::{self, c, CMatrix};
    let mut m = CMatrix::zeros(4, 4);
    for (i, v) in [(0, 0.9), (1, 0.9), (2, 0.2), (3, 0.2)] {
        m[(i, i)] = c(v, 0.0);
    }
    let effect = EffectOperator::new(Layout::qubits(2), linalg::hermitize(&m))?;
    GameInstance::new(effect, QuantifierPrefix::alternating(Quantifier::Exists, &[2, 2], Purity::Pure)?)?.with_thresholds(0.9, 0.1)
}

/// Both players copy the transcript exactly; the second player mixes two
/// answers.
pub fn honest_messages() -> Vec<RoundMessage> {
    let zero = PureState::bloch(0.0, 0.0);
    let round1 = RoundMessage::single(vec![TableEntry { transcript: None, answer: zero.clone() }]);
    let round2 = RoundMessage {
        components: vec![
            (0.5, vec![TableEntry { transcript: Some(zero.clone()), answer: PureState::bloch(0.0, 0.0) }]),
            (0.5, vec![TableEntry { transcript: Some(zero), answer: PureState::bloch(2.0, 1.0) }]),
        ],
    };
    vec![round1, round2]
}

/// The second player's only table entry carries a transcript at trace
/// distance `eps` from the canonical |0⟩.
pub fn adversarial_messages(eps: f64) -> Result<Vec<RoundMessage>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("ε = {eps} outside (0, 1]")));
    }
    // d_tr(|0⟩, cos(θ/2)|0⟩ + sin(θ/2)|1⟩) = sin(θ/2).
    let theta = 2.0 * eps.asin();
    let zero = PureState::bloch(0.0, 0.0);
    let round1 = RoundMessage::single(vec![TableEntry { transcript: None, answer: zero }]);
    let round2 = RoundMessage::single(vec![TableEntry {
        transcript: Some(PureState::bloch(theta, 0.0)),
        answer: PureState::bloch(std::f64::consts::PI, 0.0),
    }]);
    Ok(vec![round1, round2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_count_for_half_distance() {
        assert_eq!(swap_tests_needed(0.5, 1.0 / 64.0).unwrap(), 34);
    }

    #[test]
    fn binomial_tail_edges() {
        assert_eq!(binomial_upper_tail(10, 0.3, 0), 1.0);
        assert!((binomial_upper_tail(1, 0.3, 1) - 0.3).abs() < 1e-15);
        assert!((binomial_upper_tail(2, 0.5, 1) - 0.75).abs() < 1e-15);
        assert!((binomial_upper_tail(10, 1.0, 10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_copies_is_refused() {
        let base = amplifier_base_game().unwrap();
        let params = AmplifierParams { w: 34, t: 50, k_copies: 10, episodes: 10, far_distance: 0.5 };
        assert!(transcript_amplifier_toy(&base, &honest_messages(), &params, &SeededRng::new(0)).is_err());
    }

    #[test]
    fn transcript_extension_concatenates() {
        let mut st = TranscriptState::start(PureState::bloch(0.0, 0.0));
        st.extend(&PureState::bloch(0.0, 0.0), &PureState::bloch(std::f64::consts::PI, 0.0)).unwrap();
        assert_eq!(st.round, 2);
        assert!((st.canonical.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }
}
