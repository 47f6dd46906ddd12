//! qma2-curve, compile-qsigma3.

use std::path::PathBuf;

use clap::Args;
use qphlab_core::games::GridOptions;
use qphlab_core::verifiers::{
    compile_psigma2_to_qsigma3, compile_qma2_verifier, mix_probability, qma2_acceptance_curve, qma2_curve_minimum,
    qma2_curve_numeric_minimum, qma2_yes_fixture, qsigma3_no_fixture, qsigma3_yes_fixture, soundness_envelope,
    verify_compiled_game, VerifyOptions,
};
use qphlab_core::EffectOperator;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{pick, read_json, Ctx};
use crate::error::{config_err, CliError};
use crate::output::{v, Report, Table};

/// Smallest acceptable min-over-φ value of the compiled YES fixture.
const YES_FLOOR: f64 = 0.08;

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Qma2CurveArgs {
    /// One or more ε values, e.g. 0,0.01,0.1.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// δ step of the tabulated curve.
    #[arg(long)]
    pub step: Option<f64>,
    /// Also solve the compiled YES fixture on the qubit grid.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub check_fixture: Option<bool>,
    #[arg(long)]
    pub resolution: Option<f64>,
}

pub fn qma2_curve(mut p: Qma2CurveArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let eps_list = p.eps.get_or_insert_with(|| vec![0.0]).clone();
    let step = *p.step.get_or_insert(0.001);
    let check = *p.check_fixture.get_or_insert(false);
    let resolution = *p.resolution.get_or_insert(0.01);
    if !(step > 0.0 && step <= 0.5) {
        return Err(config_err(format!("step {step} outside (0, 0.5]")));
    }
    let mut table = Table::new(&["eps", "delta", "value", "is_min"]);
    let mut minima = Vec::new();
    let mut ok = true;
    for &eps in &eps_list {
        let (dstar, closed) = qma2_curve_minimum(eps)?;
        let (_, numeric) = qma2_curve_numeric_minimum(eps, 1e-5)?;
        let n = (1.0 / step).round() as usize;
        let mut inserted = false;
        for k in 0..=n {
            let delta = (k as f64 * step).min(1.0);
            if !inserted && delta >= dstar {
                if delta > dstar {
                    table.push(vec![v(eps), v(dstar), v(closed), v(true)]);
                }
                inserted = true;
            }
            let value = qma2_acceptance_curve(delta, eps)?;
            table.push(vec![v(eps), v(delta), v(value), v(delta == dstar)]);
        }
        let err = (numeric - closed).abs();
        ok &= err <= 1e-6 && (eps != 0.0 || closed > 0.085);
        minima.push(json!({"eps": eps, "delta": dstar, "value": closed, "numeric": numeric, "error": err}));
    }
    let mut r = Report::new(&p);
    r.set("minima", minima);
    if check {
        let fx = qma2_yes_fixture();
        let cv = compile_qma2_verifier(&fx.effect, fx.eps)?;
        let opts = VerifyOptions { grid: GridOptions { resolution, ..GridOptions::default() }, ..VerifyOptions::default() };
        let rep = verify_compiled_game(&cv, true, &opts)?;
        ok &= rep.value >= YES_FLOOR;
        r.set("fixture", json!({"name": fx.name, "value": rep.value, "floor": YES_FLOOR, "resolution": resolution,
            "lipschitz_bound": rep.certificate.lipschitz_bound}));
    }
    r.table = Some(table);
    r.check(ok);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompileQsigma3Args {
    /// Built-in source game: yes | no.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Two-slot EffectOperator JSON used instead of a fixture.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Whether --file is a YES or a NO instance: yes | no.
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Slack on the c' / s' comparison.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random s values for the branch and gap identities (needs --seed).
    #[arg(long)]
    pub identity_samples: Option<usize>,
    /// Also write the compiled game as JSON.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export: Option<bool>,
}

pub fn compile_qsigma3(mut p: CompileQsigma3Args, ctx: &Ctx) -> Result<Report, CliError> {
    let resolution = *p.resolution.get_or_insert(0.1);
    let tol = *p.tol.get_or_insert(0.02);
    let samples = *p.identity_samples.get_or_insert(0);
    let export = *p.export.get_or_insert(false);
    let (name, effect, c, s, yes) = match &p.file {
        Some(path) => {
            let effect: EffectOperator = read_json(path)?;
            let claim = p.claim.get_or_insert_with(|| "yes".into()).clone();
            pick(&claim, &["yes", "no"], "claim")?;
            let (c, s) = match (p.c, p.s) {
                (Some(c), Some(s)) => (c, s),
                _ => return Err(config_err("--file needs --c and --s")),
            };
            (path.display().to_string(), effect, c, s, claim == "yes")
        }
        None => {
            let which = p.fixture.get_or_insert_with(|| "no".into()).clone();
            let fx = match pick(&which, &["yes", "no"], "fixture")? {
                "yes" => qsigma3_yes_fixture(),
                _ => qsigma3_no_fixture(),
            };
            let c = *p.c.get_or_insert(fx.c);
            let s = *p.s.get_or_insert(fx.s);
            (fx.name.to_string(), fx.effect, c, s, fx.yes)
        }
    };
    let cv = compile_psigma2_to_qsigma3(&effect, c, s)?;
    let gap_err = ((cv.c_prime() - cv.s_prime()) - (c - s) / (3.0 - 2.0 * s)).abs();
    let seed = ctx.seed.unwrap_or(0);
    let opts = VerifyOptions {
        grid: GridOptions { resolution, ..GridOptions::default() },
        seed,
        tol,
        ..VerifyOptions::default()
    };
    let rep = verify_compiled_game(&cv, yes, &opts)?;
    let mut ok = rep.pass && gap_err <= 1e-12;
    let mut r = Report::new(&p);
    r.set("source", name);
    r.set("claim", if yes { "yes" } else { "no" });
    r.set("c", c);
    r.set("s", s);
    r.set("mix_prob", cv.mix_prob);
    r.set("c_prime", cv.c_prime());
    r.set("s_prime", cv.s_prime());
    r.set("gap_identity_error", gap_err);
    r.set("value", rep.value);
    r.set("threshold", rep.threshold);
    r.set("method", rep.method);
    r.set("pure_restriction", rep.pure_restriction);
    r.set("certificate", &rep.certificate);
    if samples > 0 {
        let mut branch = 0.0f64;
        let mut gap = 0.0f64;
        let id = EffectOperator::identity(effect.layout().clone());
        for k in 0..samples {
            let mut rng = ctx.rng("identity", k as u64)?;
            let s = rng.uniform();
            let pm = mix_probability(s)?;
            let (x, y) = (1.0 - pm + pm * s, 0.5 * (1.0 + pm));
            branch = branch.max((x - y).abs()).max((x.max(y) - soundness_envelope(s, pm)?).abs());
            let s2 = 0.99 * s;
            let c2 = s2 + (0.001 + 0.999 * rng.uniform()) * (1.0 - s2);
            let cv2 = compile_psigma2_to_qsigma3(&id, c2, s2)?;
            gap = gap.max(((cv2.c_prime() - cv2.s_prime()) - (c2 - s2) / (3.0 - 2.0 * s2)).abs());
        }
        ok &= branch <= 1e-12 && gap <= 1e-12;
        r.set("identity_samples", json!({"count": samples, "max_branch_error": branch, "max_gap_error": gap}));
    }
    if export {
        let mut bytes = serde_json::to_vec_pretty(&cv).map_err(|e| CliError::Failure(e.to_string()))?;
        bytes.push(b'\n');
        r.extra.push(("compile-qsigma3.game.json".into(), bytes));
    }
    r.check(ok);
    Ok(r)
}
