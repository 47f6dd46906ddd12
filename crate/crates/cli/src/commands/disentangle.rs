//! peaked, gamma-channel, amplify-toy.

use std::path::PathBuf;

use clap::Args;
use qphlab_core::disentangle::{
    adversarial_messages, amplifier_base_game, gamma_channel, hitting_set_exact, hitting_set_statistics,
    honest_messages, swap_tests_needed, transcript_amplifier_toy, AmplifierParams, DisentanglerParams, PeakedInstance,
    ReferenceInner, StateEnsemble,
};
use qphlab_core::protocols::product_self_prob;
use qphlab_core::qstate::random::haar_state;
use qphlab_core::qstate::{epr_pair, trace_distance};
use qphlab_core::{Layout, PureState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{pick, read_json, Ctx};
use crate::error::{config_err, CliError};
use crate::output::{v, Report, Table};

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakedArgs {
    /// PeakedInstance JSON; otherwise random instances are drawn.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Sizes N cycled over the random instances.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Pair density of S; drawn from [0.05, 0.35) per instance when absent.
    #[arg(long)]
    pub density: Option<f64>,
    /// γ; drawn from [0.1, 0.6) per instance when absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sampled hitting sets per instance.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Exhaustive minimum-size search; defaults to N ≤ 16.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exhaustive: Option<bool>,
}

pub fn peaked(mut p: PeakedArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let seeds = *p.seeds.get_or_insert(200);
    ctx.seed()?;
    let instances: Vec<PeakedInstance> = match &p.file {
        Some(path) => vec![read_json(path)?],
        None => {
            let count = *p.instances.get_or_insert(20);
            let sizes = p.sizes.get_or_insert_with(|| vec![8, 12, 16, 24, 32]).clone();
            if sizes.is_empty() || sizes.iter().any(|&n| n == 0) {
                return Err(config_err("sizes must be positive"));
            }
            (0..count)
                .map(|k| {
                    let mut rng = ctx.rng("instance", k as u64)?;
                    let density = 0.05 + 0.3 * rng.uniform();
                    let gamma = 0.1 + 0.5 * rng.uniform();
                    let inst = PeakedInstance::random(
                        sizes[k % sizes.len()],
                        p.density.unwrap_or(density),
                        p.gamma.unwrap_or(gamma),
                        &mut rng,
                    )?;
                    Ok(inst)
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let results: Vec<_> = instances
        .par_iter()
        .enumerate()
        .map(|(k, inst)| -> Result<_, CliError> {
            let stats = hitting_set_statistics(inst, &ctx.rng("seeds", k as u64)?, seeds)?;
            let exact = match p.exhaustive {
                Some(false) => None,
                Some(true) => Some(hitting_set_exact(inst)?),
                None if inst.n() <= 16 => Some(hitting_set_exact(inst)?),
                None => None,
            };
            Ok((stats, exact))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "index", "n", "gamma", "eps", "m", "mean_z", "std_error", "gamma_eps", "stat_pass", "exact_size",
    ]);
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (k, (inst, (st, ex))) in instances.iter().zip(&results).enumerate() {
        ok &= st.pass;
        worst = worst.max((st.mean_z - st.target) / st.std_error.max(f64::MIN_POSITIVE));
        let exact_size = ex.as_ref().map(|h| {
            ok &= h.m <= h.size_bound;
            h.m
        });
        table.push(vec![
            v(k),
            v(inst.n()),
            v(st.gamma),
            v(st.eps),
            v(st.m),
            v(st.mean_z),
            v(st.std_error),
            v(st.target),
            v(st.pass),
            v(exact_size),
        ]);
    }
    let mut r = Report::new(&p);
    r.set("instances", instances.len());
    r.set("seeds", seeds);
    r.set("max_excess_in_std_errors", worst);
    if let [(st, ex)] = results.as_slice() {
        r.set("mean_z", st.mean_z);
        r.set("std_error", st.std_error);
        r.set("gamma_eps", st.target);
        r.set("m", st.m);
        r.set("exhaustive", ex);
    }
    r.table = Some(table);
    r.check(ok);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GammaChannelArgs {
    /// Output copies k.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// The constant C in t = Ck(8/δ)².
    #[arg(long)]
    pub c_const: Option<f64>,
    /// all | product | epr | orthogonal.
    #[arg(long)]
    pub input: Option<String>,
    /// Random product inputs tried; the trace distance is only computed
    /// for k ≤ 4.
    #[arg(long)]
    pub trials: Option<usize>,
    /// JSON {"inputs": [four StateEnsembles]} replacing the built-in inputs.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GammaInputs {
    inputs: [StateEnsemble; 4],
}

pub fn gamma_channel_cmd(mut p: GammaChannelArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let k = *p.k.get_or_insert(2);
    let delta = *p.delta.get_or_insert(0.5);
    let cc = *p.c_const.get_or_insert(0.01);
    let trials = *p.trials.get_or_insert(20);
    let params = DisentanglerParams::new(k, delta, cc)?;
    ctx.seed()?;
    let mut r = Report::new(&p);
    r.set("k_prime", params.k_prime);
    r.set("alpha", params.alpha);
    if let Some(path) = p.file.clone() {
        let inp: GammaInputs = read_json(&path)?;
        let [a, b, c, d] = &inp.inputs;
        let rep = gamma_channel([a, b, c, d], &params, &ReferenceInner, &mut ctx.rng("file", 0)?)?;
        let weight = rep.output.total_weight();
        r.set("report", &rep);
        r.check((weight - 1.0).abs() <= 1e-9 && rep.pr_accept_outside_s <= params.alpha * rep.p_acc + 1e-15);
        return Ok(r);
    }
    let mode = p.input.get_or_insert_with(|| "all".into()).clone();
    pick(&mode, &["all", "product", "epr", "orthogonal"], "input")?;
    let mut ok = true;
    if mode == "all" || mode == "product" {
        let mut exact = true;
        let mut weight_err = 0.0f64;
        let mut dist = 0.0f64;
        for t in 0..trials {
            let mut rng = ctx.rng("product", t as u64)?;
            let psi = haar_state(&Layout::qubits(1), &mut rng).tensor(&haar_state(&Layout::qubits(1), &mut rng));
            let e = StateEnsemble::single(psi.clone(), 3)?;
            let rep = gamma_channel([&e, &e, &e, &e], &params, &ReferenceInner, &mut rng)?;
            exact &= rep.output.len() == 1 && rep.output.components()[0].state == psi && rep.output.copy_count() == k;
            weight_err = weight_err.max((rep.output.total_weight() - 1.0).abs());
            if 4usize.pow(k as u32) <= 256 {
                dist = dist.max(trace_distance(&rep.output.to_density()?, &psi.power(k).to_density())?);
            }
        }
        ok &= exact && weight_err <= 1e-9;
        r.set("product", json!({"trials": trials, "exact": exact, "max_weight_error": weight_err, "max_trace_distance": dist}));
    }
    if mode == "all" || mode == "epr" {
        let e = StateEnsemble::single(epr_pair(), 4)?;
        let rep = gamma_channel([&e, &e, &e, &e], &params, &ReferenceInner, &mut ctx.rng("epr", 0)?)?;
        let pprod = product_self_prob(&epr_pair().to_density())?;
        let survive = pprod.powi(params.k_prime as i32);
        let err = (rep.p_acc - survive).abs().max((rep.fallback_weight - (1.0 - survive)).abs());
        ok &= err <= 1e-9;
        r.set("epr", json!({"p_prod": pprod, "p_acc": rep.p_acc, "expected_p_acc": survive,
            "fallback_weight": rep.fallback_weight, "error": err}));
    }
    if mode == "all" || mode == "orthogonal" {
        let a = StateEnsemble::single(PureState::basis(Layout::qubits(2), 0b00)?, 2)?;
        let b = StateEnsemble::single(PureState::basis(Layout::qubits(2), 0b01)?, 2)?;
        let rep = gamma_channel([&a, &a, &b, &b], &params, &ReferenceInner, &mut ctx.rng("orthogonal", 0)?)?;
        let want = 1.0 - 0.5f64.powi(params.k_prime as i32);
        let err = (rep.fallback_weight - want).abs();
        ok &= err <= 1e-9;
        r.set("orthogonal", json!({"fallback_weight": rep.fallback_weight, "expected": want, "error": err}));
    }
    r.check(ok);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmplifyToyArgs {
    /// SWAP tests per table entry; defaults to ⌈2ε⁻² ln(1/failure)⌉.
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub failure: Option<f64>,
    /// Majority-vote repetitions.
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub far_distance: Option<f64>,
    /// both | honest | adversarial.
    #[arg(long)]
    pub mode: Option<String>,
}

pub fn amplify_toy(mut p: AmplifyToyArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let failure = *p.failure.get_or_insert(1.0 / 64.0);
    let far = *p.far_distance.get_or_insert(0.5);
    let w = match p.w {
        Some(w) => w,
        None => *p.w.insert(swap_tests_needed(far, failure)?),
    };
    let t = *p.t.get_or_insert(50);
    let episodes = *p.episodes.get_or_insert(10_000);
    let mode = p.mode.get_or_insert_with(|| "both".into()).clone();
    pick(&mode, &["both", "honest", "adversarial"], "mode")?;
    if episodes == 0 || t == 0 || w == 0 {
        return Err(config_err("w, t and episodes must be positive"));
    }
    ctx.seed()?;
    let base = amplifier_base_game()?;
    let mut r = Report::new(&p);
    let mut ok = true;
    if mode != "adversarial" {
        let msgs = honest_messages();
        let params = AmplifierParams { w, t, k_copies: w * msgs.len() + t, episodes, far_distance: far };
        let h = transcript_amplifier_toy(&base, &msgs, &params, &ctx.rng("honest", 0)?)?;
        let lost: usize = h.swap_losses.iter().sum();
        let sv = (h.exact_vote_acceptance * (1.0 - h.exact_vote_acceptance) / h.episodes as f64).sqrt();
        let vote_ok = (h.accept_frequency - h.exact_vote_acceptance).abs() <= 3.0 * sv + 1e-12;
        let sh = (h.hoeffding_bound * (1.0 - h.hoeffding_bound) / h.voted.max(1) as f64).sqrt();
        let hoeff_ok = h.vote_rejection_frequency <= h.hoeffding_bound + 3.0 * sh + 1e-12;
        ok &= lost == 0 && vote_ok && hoeff_ok;
        r.set("honest", json!({"report": h, "swap_losses": lost, "vote_within_3_sigma": vote_ok,
            "hoeffding_within_3_sigma": hoeff_ok}));
    }
    if mode != "honest" {
        let msgs = adversarial_messages(far)?;
        let params = AmplifierParams { w, t, k_copies: w * msgs.len() + t, episodes, far_distance: far };
        let a = transcript_amplifier_toy(&base, &msgs, &params, &ctx.rng("adversarial", 0)?)?;
        let sigma = (failure * (1.0 - failure) / a.far_checks.max(1) as f64).sqrt();
        let far_ok = a.far_checks > 0 && a.far_pass_frequency <= failure + 3.0 * sigma;
        ok &= far_ok;
        r.set("adversarial", json!({"report": a, "limit": failure + 3.0 * sigma, "pass": far_ok}));
    }
    r.check(ok);
    Ok(r)
}
