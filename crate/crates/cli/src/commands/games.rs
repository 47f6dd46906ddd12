//! game-solve, copy-game, minimax-check.

use std::path::PathBuf;

use clap::Args;
use qphlab_core::games::{
    copy_game_values, minimax_equality_check, solve_alternating, solve_grid_pure, GameInstance, GridOptions, Method,
    Purity, SolverOptions,
};
use qphlab_core::qstate::random::random_effect;
use qphlab_core::{EffectOperator, Layout};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{parse_dims, pick, read_json, Ctx};
use crate::error::{config_err, CliError};
use crate::output::{v, Report, Table};

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameSolveArgs {
    /// GameInstance JSON.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// auto | grid | alternating.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

pub fn game_solve(mut p: GameSolveArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let path = p.file.clone().ok_or_else(|| config_err("game-solve needs --file with a game instance"))?;
    let g: GameInstance = read_json(&path)?;
    let method = p.method.get_or_insert_with(|| "auto".into()).clone();
    pick(&method, &["auto", "grid", "alternating"], "method")?;
    let resolution = *p.resolution.get_or_insert(0.01);
    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        restarts: *p.restarts.get_or_insert(defaults.restarts),
        max_iters: *p.max_iters.get_or_insert(defaults.max_iters),
        tol: *p.tol.get_or_insert(defaults.tol),
    };
    let slots = g.prefix().slots();
    let grid_ok = slots.len() <= 3 && slots.iter().all(|s| s.dim == 2 && s.purity == Purity::Pure);
    let use_grid = match method.as_str() {
        "grid" => true,
        "alternating" => false,
        _ => grid_ok,
    };
    let est = if use_grid {
        solve_grid_pure(&g, &GridOptions { resolution, ..GridOptions::default() })?
    } else {
        solve_alternating(&g, &ctx.rng("solver", 0)?, &solver)?
    };
    let mut r = Report::new(&p);
    r.set("value", est.value);
    r.set("method", est.method);
    r.set("certificate", &est.certificate);
    r.set("strategy", &est.strategy);
    r.set("dims", g.prefix().dims());
    if let Some((c, s)) = g.thresholds() {
        r.set("thresholds", json!({"c": c, "s": s}));
        r.set("at_least_c", est.value >= c);
        r.set("at_most_s", est.value <= s);
    }
    r.check(est.certificate.converged || est.method == Method::Grid);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CopyGameArgs {
    /// Qubits per player.
    #[arg(long)]
    pub n: Option<usize>,
}

pub fn copy_game(mut p: CopyGameArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let n = *p.n.get_or_insert(1);
    if !(1..=4).contains(&n) {
        return Err(config_err(format!("n must be in 1..=4, got {n}")));
    }
    let cv = copy_game_values(n)?;
    let mut r = Report::new(&p);
    r.set("n", n);
    r.set("pure", cv.pure_value);
    r.set("mixed", cv.mixed_value);
    r.set("solver_pure", cv.solver_pure);
    r.set("solver_mixed", cv.solver_mixed);
    r.set("solver_mixed_bounds", cv.solver_mixed_bounds);
    r.check((cv.solver_pure - cv.pure_value).abs() <= 1e-6 && (cv.solver_mixed - cv.mixed_value).abs() <= 1e-6);
    Ok(r)
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MinimaxCheckArgs {
    /// EffectOperator JSON on two factors; replaces the random effects.
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub effects: Option<usize>,
    /// Layouts cycled over the random effects, such as 2x2,2x3.
    #[arg(long, value_delimiter = ',')]
    pub layouts: Option<Vec<String>>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Copy-game contrast for n = 1..=copy-n (0 skips it).
    #[arg(long)]
    pub copy_n: Option<usize>,
}

pub fn minimax_check(mut p: MinimaxCheckArgs, ctx: &Ctx) -> Result<Report, CliError> {
    let tol = *p.tol.get_or_insert(1e-6);
    let copy_n = *p.copy_n.get_or_insert(3);
    if copy_n > 4 {
        return Err(config_err("copy-n must be at most 4"));
    }
    let effects: Vec<EffectOperator> = match &p.file {
        Some(path) => vec![read_json(path)?],
        None => {
            let count = *p.effects.get_or_insert(100);
            let specs = p.layouts.get_or_insert_with(|| vec!["2x2".into(), "2x3".into()]).clone();
            let layouts: Vec<Layout> =
                specs.iter().map(|s| Ok(Layout::new(parse_dims(s)?)?)).collect::<Result<_, CliError>>()?;
            if layouts.is_empty() {
                return Err(config_err("no layouts given"));
            }
            (0..count)
                .map(|k| Ok(random_effect(&layouts[k % layouts.len()], &mut ctx.rng("effect", k as u64)?)))
                .collect::<Result<_, CliError>>()?
        }
    };
    let reports: Vec<_> = effects
        .par_iter()
        .map(|e| minimax_equality_check(e, tol))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["index", "dims", "exists_forall", "forall_exists", "difference", "converged"]);
    let mut worst = 0.0f64;
    let mut ok = true;
    for (k, (e, m)) in effects.iter().zip(&reports).enumerate() {
        worst = worst.max(m.difference);
        ok &= m.pass;
        let dims = e.layout().dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
        table.push(vec![v(k), v(dims), v(m.exists_forall), v(m.forall_exists), v(m.difference), v(m.converged)]);
    }
    let mut copy = Vec::new();
    for n in 1..=copy_n {
        let cv = copy_game_values(n)?;
        ok &= (cv.solver_pure - 1.0).abs() <= 1e-6 && (cv.solver_mixed - cv.mixed_value).abs() <= 1e-6;
        copy.push(json!({"n": n, "pure": cv.pure_value, "mixed": cv.mixed_value,
            "solver_pure": cv.solver_pure, "solver_mixed": cv.solver_mixed}));
    }
    let mut r = Report::new(&p);
    r.set("effects", effects.len());
    r.set("max_difference", worst);
    r.set("tol", tol);
    r.set("copy_game", copy);
    r.table = Some(table);
    r.check(ok);
    Ok(r)
}
