//! kitaev, psh-reduce, complement.

use std::path::PathBuf;

use clap::Args;
use qphlab_core::games::{Purity, Quantifier};
use qphlab_core::hamiltonian::{
    complement_reduce, history_state, honest_copy_energy, kitaev_compile, kitaev_corpus, psh_hardness_reduce,
    psh_no_fixture, psh_yes_fixture, quantified_energy_grid, PshFixture, PshOptions, QuantifiedHamiltonianInstance,
    ReductionOutput, SparseHamiltonian, SparseJson, KITAEV_GAP_CONSTANT,
};
use qphlab_core::{Layout, PureState};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{pick, read_json, Ctx};
use crate::error::{config_err, CliError};
use crate::output::{v, Report, Table};

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KitaevArgs {
    /// Corpus circuit name, or `all`.
    #[arg(long)]
    pub circuit: Option<String>,
}

pub fn kitaev(mut p: KitaevArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let which = p.circuit.get_or_insert_with(|| "all".into()).clone();
    let corpus: Vec<_> = kitaev_corpus().into_iter().filter(|(name, _)| which == "all" || *name == which).collect();
    if corpus.is_empty() {
        let names: Vec<String> = kitaev_corpus().into_iter().map(|(n, _)| n).collect();
        return Err(config_err(format!("unknown circuit `{which}`; available: {}", names.join(", "))));
    }
    let mut table = Table::new(&[
        "circuit",
        "ancillas",
        "inputs",
        "m",
        "qubits",
        "kernel_dim",
        "expected_kernel_dim",
        "min_eigenvalue",
        "gap",
        "scaled_gap",
        "max_residual",
    ]);
    let mut ok = true;
    let mut min_scaled = f64::INFINITY;
    for (name, circ) in &corpus {
        let kh = kitaev_compile(circ)?;
        let spec = kh.spectrum();
        // Histories of the computational basis inputs span the kernel.
        let mut residual = 0.0f64;
        for x in 0..1usize << circ.inputs() {
            let psi = PureState::basis(Layout::qubits(circ.inputs()), x)?;
            let h = history_state(circ, &psi)?;
            residual = residual.max((&kh.matrix * h.amplitudes()).norm());
        }
        let expected = 1usize << circ.inputs();
        ok &= spec.kernel_dim == expected && residual <= 1e-9 && spec.scaled_gap >= KITAEV_GAP_CONSTANT;
        min_scaled = min_scaled.min(spec.scaled_gap);
        table.push(vec![
            v(name),
            v(circ.ancillas()),
            v(circ.inputs()),
            v(circ.m()),
            v(circ.total_qubits()),
            v(spec.kernel_dim),
            v(expected),
            v(spec.min_eigenvalue),
            v(spec.gap),
            v(spec.scaled_gap),
            v(residual),
        ]);
    }
    let mut r = Report::new(&p);
    r.set("circuits", corpus.len());
    r.set("min_scaled_gap", min_scaled);
    r.set("gap_constant", KITAEV_GAP_CONSTANT);
    r.table = Some(table);
    r.check(ok);
    Ok(r)
}

fn fixtures(which: &str) -> Result<Vec<PshFixture>, CliError> {
    Ok(match pick(which, &["both", "yes", "no"], "fixture")? {
        "yes" => vec![psh_yes_fixture()],
        "no" => vec![psh_no_fixture()],
        _ => vec![psh_yes_fixture(), psh_no_fixture()],
    })
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PshReduceArgs {
    /// both | yes | no.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub j1: Option<f64>,
    #[arg(long)]
    pub j2: Option<f64>,
    /// Identity qubits appended to the last slot.
    #[arg(long)]
    pub padding: Option<usize>,
    /// Bloch-grid step for the honest YES strategy.
    #[arg(long)]
    pub resolution_yes: Option<f64>,
    /// Bloch-grid step for the NO lower bound.
    #[arg(long)]
    pub resolution_no: Option<f64>,
    /// Also write each Hamiltonian as row-oracle JSON.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export: Option<bool>,
}

fn reduction_summary(red: &ReductionOutput) -> serde_json::Value {
    json!({
        "instance": red.instance.summary(),
        "j1": red.j1,
        "j2": red.j2,
        "m": red.m,
        "c": red.c,
        "s": red.s,
        "gamma": red.gamma,
        "a": red.a,
        "b": red.b,
        "layout": red.layout,
        "sparsity_bound": red.sparsity_bound,
    })
}

pub fn psh_reduce(mut p: PshReduceArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let which = p.fixture.get_or_insert_with(|| "both".into()).clone();
    let padding = *p.padding.get_or_insert(0);
    let hy = *p.resolution_yes.get_or_insert(0.05);
    let hn = *p.resolution_no.get_or_insert(0.25);
    let export = *p.export.get_or_insert(false);
    if !(hy > 0.0 && hn > 0.0) {
        return Err(config_err("grid resolutions must be positive"));
    }
    let opts = PshOptions { j1: p.j1, j2: p.j2, padding };
    let mut ok = true;
    let mut sections = Vec::new();
    let mut extra = Vec::new();
    for f in fixtures(&which)? {
        let red = psh_hardness_reduce(&f.circuit, 2, f.c, f.s, &opts)?;
        p.j1.get_or_insert(red.j1);
        p.j2.get_or_insert(red.j2);
        let mut section = reduction_summary(&red);
        if f.yes {
            let honest = honest_copy_energy(&red, &f.circuit, hy)?;
            let upper = honest.max_energy + honest.margin;
            ok &= honest.pass;
            section["energy_upper_bound"] = json!(upper);
            section["honest"] = json!(honest);
            section["pass"] = json!(honest.pass);
        } else {
            let g = quantified_energy_grid(&red.instance, hn)?;
            let pass = g.lower >= red.b;
            ok &= pass;
            section["energy_lower_bound"] = json!(g.lower);
            section["grid"] = json!(g);
            section["pass"] = json!(pass);
        }
        if export {
            let j = red.instance.hamiltonian().to_json()?;
            let mut bytes = serde_json::to_vec(&j).map_err(|e| CliError::Failure(e.to_string()))?;
            bytes.push(b'\n');
            extra.push((format!("psh-reduce.{}.hamiltonian.json", f.name), bytes));
        }
        sections.push((f.name, section));
    }
    let mut r = Report::new(&p);
    for (name, section) in sections {
        r.set(name, section);
    }
    r.extra = extra;
    r.check(ok);
    Ok(r)
}

/// Quantified instance on disk: row-oracle Hamiltonian plus the game data.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub hamiltonian: SparseJson,
    pub slot_qubits: Vec<usize>,
    pub a: f64,
    pub b: f64,
    pub first: Quantifier,
    pub purity: Purity,
    pub min_gap: f64,
}

impl InstanceFile {
    fn load(self) -> Result<QuantifiedHamiltonianInstance, CliError> {
        let h = SparseHamiltonian::from_json(self.hamiltonian)?;
        Ok(QuantifiedHamiltonianInstance::new(h, self.slot_qubits, self.a, self.b, self.first, self.purity, self.min_gap)?)
    }

    fn store(inst: &QuantifiedHamiltonianInstance) -> Result<Self, CliError> {
        let (a, b) = inst.thresholds();
        Ok(Self {
            hamiltonian: inst.hamiltonian().to_json()?,
            slot_qubits: inst.slot_qubits().to_vec(),
            a,
            b,
            first: inst.quantifiers()[0],
            purity: inst.purity(),
            min_gap: inst.min_gap(),
        })
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplementArgs {
    /// both | yes | no (built-in fixtures).
    #[arg(long)]
    pub fixture: Option<String>,
    /// Instance JSON replacing the fixtures.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Bloch-grid step of the brute-force comparison.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Also write the complemented instance.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export: Option<bool>,
}

/// Involution and grid-value negation for one instance.
fn brute_force(inst: &QuantifiedHamiltonianInstance, h: f64) -> Result<(serde_json::Value, bool), CliError> {
    let comp = complement_reduce(inst);
    let back = complement_reduce(&comp);
    let (a, b) = inst.thresholds();
    let mut ok = back.summary() == inst.summary() && comp.thresholds() == (-b, -a);
    ok &= comp.quantifiers().iter().zip(inst.quantifiers()).all(|(x, y)| *x == y.flip());
    let dense_equal = back.hamiltonian().to_dense()? == inst.hamiltonian().to_dense()?;
    ok &= dense_equal;
    let mut out = json!({
        "original": inst.summary(),
        "complement": comp.summary(),
        "involution": back.summary() == inst.summary() && dense_equal,
    });
    let slots = inst.slot_qubits();
    if slots.len() == 2 && slots[0] == 1 {
        let o = quantified_energy_grid(inst, h)?;
        let c = quantified_energy_grid(&comp, h)?;
        let err = (o.value + c.value).abs();
        ok &= err < 1e-9;
        out["grid_value"] = json!(o.value);
        out["complement_grid_value"] = json!(c.value);
        out["negation_error"] = json!(err);
    }
    Ok((out, ok))
}

pub fn complement(mut p: ComplementArgs, _ctx: &Ctx) -> Result<Report, CliError> {
    let h = *p.resolution.get_or_insert(0.4);
    let export = *p.export.get_or_insert(false);
    if !(h > 0.0) {
        return Err(config_err("resolution must be positive"));
    }
    let mut r = Report::new(&p);
    let mut ok = true;
    let mut outputs = Vec::new();
    if let Some(path) = p.file.clone() {
        let file: InstanceFile = read_json(&path)?;
        let inst = file.load()?;
        let (section, pass) = brute_force(&inst, h)?;
        ok &= pass;
        r.set("instance", section);
        outputs.push(("complement.instance.json".to_string(), complement_reduce(&inst)));
    } else {
        let which = p.fixture.get_or_insert_with(|| "both".into()).clone();
        for f in fixtures(&which)? {
            let red = psh_hardness_reduce(&f.circuit, 2, f.c, f.s, &PshOptions::default())?;
            let (mut section, pass) = brute_force(&red.instance, h)?;
            ok &= pass;
            let comp = complement_reduce(&red.instance);
            let (ca, cb) = comp.thresholds();
            // YES for H becomes NO for −H and the other way round.
            let flipped = if f.yes {
                let honest = honest_copy_energy(&red, &f.circuit, 0.05)?;
                let lower = -(honest.max_energy + honest.margin);
                json!({"claim": "no", "energy_lower_bound": lower, "b": cb, "pass": lower >= cb})
            } else {
                let g = quantified_energy_grid(&comp, 0.25)?;
                json!({"claim": "yes", "energy_upper_bound": g.upper, "a": ca, "pass": g.upper <= ca})
            };
            ok &= flipped["pass"].as_bool().unwrap_or(false);
            section["complement_certificate"] = flipped;
            r.set(f.name, section);
            outputs.push((format!("complement.{}.instance.json", f.name), comp));
        }
    }
    if export {
        for (name, inst) in outputs {
            let mut bytes =
                serde_json::to_vec(&InstanceFile::store(&inst)?).map_err(|e| CliError::Failure(e.to_string()))?;
            bytes.push(b'\n');
            r.extra.push((name, bytes));
        }
    }
    r.check(ok);
    Ok(r)
}
