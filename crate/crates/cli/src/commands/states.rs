//! swap-prob, product-prob, gentle-measure.

use clap::Args;
use qphlab_core::protocols::{
    gentle_post_state, product_effect, product_self_prob, swap_accept_prob, swap_effect, symmetric_projector, CutSpec,
};
use qphlab_core::qstate::linalg::{self, c};
use qphlab_core::qstate::random::{haar_state, random_density, random_effect, random_mixed};
use qphlab_core::qstate::{epr_pair, trace_distance};
use qphlab_core::{EffectOperator, Layout};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{parse_dims, Ctx};
use crate::error::{config_err, CliError};
use crate::output::{v, Report, Table};

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwapProbArgs {
    /// Random (ρ, σ) pairs; dimensions cycle through min-dim..=max-dim.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub min_dim: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn swap_prob(mut p: SwapProbArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let pairs = *p.pairs.get_or_insert(1000);
    let lo = *p.min_dim.get_or_insert(2);
    let hi = *p.max_dim.get_or_insert(8);
    let tol = *p.tol.get_or_insert(1e-10);
    if lo < 2 || hi < lo || hi > 64 {
        return Err(config_err(format!("need 2 ≤ min-dim ≤ max-dim ≤ 64, got {lo}..{hi}")));
    }
    ctx.seed()?;
    let rows: Vec<(usize, usize, usize, f64, f64)> = (0..pairs)
        .into_par_iter()
        .map(|k| -> Result<_, CliError> {
            let mut rng = ctx.rng("pair", k as u64)?;
            let d = lo + k % (hi - lo + 1);
            let one = Layout::single(d)?;
            let r1 = 1 + ((rng.uniform() * d as f64) as usize).min(d - 1);
            let r2 = 1 + ((rng.uniform() * d as f64) as usize).min(d - 1);
            let rho = random_density(&one, r1, &mut rng);
            let sigma = random_density(&one, r2, &mut rng);
            let pi = swap_effect(d)?;
            let direct = pi.accept_prob(&rho.tensor(&sigma).relayout(pi.layout().clone())?)?;
            Ok((d, r1, r2, direct, swap_accept_prob(&rho, &sigma)?))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["index", "dim", "rank_rho", "rank_sigma", "projector", "formula", "abs_error"]);
    let mut worst = 0.0f64;
    for (k, &(d, r1, r2, direct, formula)) in rows.iter().enumerate() {
        let err = (direct - formula).abs();
        worst = worst.max(err);
        table.push(vec![v(k), v(d), v(r1), v(r2), v(direct), v(formula), v(err)]);
    }
    let mut r = Report::new(&p);
    r.set("pairs", pairs);
    r.set("max_abs_error", worst);
    r.set("tol", tol);
    r.table = Some(table);
    r.check(worst <= tol);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProductProbArgs {
    /// Single-copy layouts such as 2x2,3x3.
    #[arg(long, value_delimiter = ',')]
    pub layouts: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn product_prob(mut p: ProductProbArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let layouts = p.layouts.get_or_insert_with(|| vec!["2x2".into(), "3x3".into()]).clone();
    let tol = *p.tol.get_or_insert(1e-10);
    let mut table = Table::new(&["layout", "joint_dim", "min_eigenvalue", "pass"]);
    let mut ok = true;
    for spec in &layouts {
        let single = Layout::new(parse_dims(spec)?)?;
        if single.total_dim() > 64 {
            return Err(config_err(format!("layout {spec} is too large (dimension above 64)")));
        }
        let (joint, cut) = CutSpec::copies(&single);
        let swap = symmetric_projector(&joint, &cut)?;
        let prod = product_effect(&joint, &cut)?;
        let low = linalg::eigvalsh(&linalg::hermitize(&(swap.matrix() - prod.matrix())))[0];
        ok &= low >= -tol;
        table.push(vec![v(spec), v(joint.total_dim()), v(low), v(low >= -tol)]);
    }
    let epr = epr_pair();
    let formula = product_self_prob(&epr.to_density())?;
    let (joint, cut) = CutSpec::copies(epr.layout());
    let dense = product_effect(&joint, &cut)?.accept_prob_pure(&epr.tensor(&epr).relayout(joint)?)?;
    let mut r = Report::new(&p);
    r.set("epr_product_prob", formula);
    r.set("epr_product_prob_dense", dense);
    r.set("tol", tol);
    r.table = Some(table);
    r.check(ok && (formula - 0.75).abs() <= tol && (dense - 0.75).abs() <= tol);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GentleMeasureArgs {
    #[arg(long)]
    pub instances: Option<usize>,
    /// Largest rejection probability ε = 1 − tr(Mρ).
    #[arg(long)]
    pub max_eps: Option<f64>,
    #[arg(long)]
    pub max_dim: Option<usize>,
}

pub fn gentle_measure(mut p: GentleMeasureArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let n = *p.instances.get_or_insert(500);
    let max_eps = *p.max_eps.get_or_insert(0.1);
    let max_dim = *p.max_dim.get_or_insert(5);
    if !(max_eps > 0.0 && max_eps <= 1.0) || !(2..=64).contains(&max_dim) {
        return Err(config_err("need 0 < max-eps ≤ 1 and 2 ≤ max-dim ≤ 64"));
    }
    ctx.seed()?;
    let rows: Vec<(usize, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<_, CliError> {
            let mut rng = ctx.rng("instance", k as u64)?;
            let d = 2 + k % (max_dim - 1);
            let layout = Layout::single(d)?;
            let rho = if k % 2 == 0 { haar_state(&layout, &mut rng).to_density() } else { random_mixed(&layout, &mut rng) };
            // M = I − tE scaled so that tr(Mρ) = 1 − ε.
            let e = random_effect(&layout, &mut rng);
            let pe = e.accept_prob(&rho)?;
            let eps = (max_eps * rng.uniform()).min(pe);
            let t = if pe > 0.0 { eps / pe } else { 0.0 };
            let m = EffectOperator::new(layout, linalg::identity(d) - e.matrix() * c(t, 0.0))?;
            let (post, acc) = gentle_post_state(&rho, &m)?;
            Ok((d, 1.0 - acc, trace_distance(&rho, &post)?))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["index", "dim", "eps", "distance", "bound"]);
    let mut ok = true;
    let mut worst = 0.0f64;
    for (k, &(d, eps, dist)) in rows.iter().enumerate() {
        let bound = 2.0 * eps.max(0.0).sqrt();
        ok &= eps <= max_eps + 1e-12 && dist <= bound + 1e-12;
        if eps > 1e-12 {
            worst = worst.max(dist / bound);
        }
        table.push(vec![v(k), v(d), v(eps), v(dist), v(bound)]);
    }
    let mut r = Report::new(&p);
    r.set("instances", n);
    r.set("max_distance_over_bound", worst);
    r.table = Some(table);
    r.check(ok);
    Ok(r)
}
