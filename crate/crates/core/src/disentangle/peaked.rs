//! Small hitting sets for a set S ⊆ [N]² under a product distribution.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::SeededRng;

/// Distributions p, q over [N] (0-based) and a set S of pairs.
///
/// JSON: `{"N": 2, "p": [...], "q": [...], "S": [[0, 0]], "gamma": 0.5}`
/// with an optional `"eps"` that must agree with the recomputed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PeakedJson", into = "PeakedJson")]
pub struct PeakedInstance {
    n: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    s: BTreeSet<(usize, usize)>,
    gamma: f64,
    eps: f64,
    /// q(S_i) per row.
    row_mass: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PeakedJson {
    #[serde(rename = "N")]
    n: usize,
    p: Vec<f64>,
    q: Vec<f64>,
    #[serde(rename = "S")]
    s: Vec<(usize, usize)>,
    gamma: f64,
    #[serde(default)]
    eps: Option<f64>,
}

impl TryFrom<PeakedJson> for PeakedInstance {
    type Error = Error;
    fn try_from(j: PeakedJson) -> Result<Self> {
        if j.p.len() != j.n || j.q.len() != j.n {
            return Err(Error::DimensionMismatch { expected: j.n, got: j.p.len().max(j.q.len()) });
        }
        let inst = PeakedInstance::new(j.p, j.q, j.s, j.gamma)?;
        if let Some(e) = j.eps {
            if (e - inst.eps).abs() > 1e-12 {
                return Err(Error::Domain(format!("stored ε = {e} but (p, q, S) give {}", inst.eps)));
            }
        }
        Ok(inst)
    }
}

impl From<PeakedInstance> for PeakedJson {
    fn from(i: PeakedInstance) -> Self {
        PeakedJson { n: i.n, p: i.p, q: i.q, s: i.s.into_iter().collect(), gamma: i.gamma, eps: Some(i.eps) }
    }
}

fn check_distribution(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("{name} has a negative or non-finite entry")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("{name} sums to {total}")));
    }
    Ok(())
}

impl PeakedInstance {
    pub fn new(p: Vec<f64>, q: Vec<f64>, s: impl IntoIterator<Item = (usize, usize)>, gamma: f64) -> Result<Self> {
        let n = p.len();
        if n == 0 || q.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.len() });
        }
        check_distribution("p", &p)?;
        check_distribution("q", &q)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Domain(format!("γ = {gamma} outside (0, 1]")));
        }
        let s: BTreeSet<(usize, usize)> = s.into_iter().collect();
        if let Some(&(i, j)) = s.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::IndexOutOfRange { index: i.max(j), factors: n });
        }
        let mut row_mass = vec![0.0; n];
        for &(i, j) in &s {
            row_mass[i] += q[j];
        }
        let eps = p.iter().zip(&row_mass).map(|(a, b)| a * b).sum();
        Ok(Self { n, p, q, s, gamma, eps, row_mass })
    }

    /// Random instance: p, q from a flat Dirichlet, each pair in S with
    /// probability `density`; S is never empty.
    pub fn random(n: usize, density: f64, gamma: f64, rng: &mut SeededRng) -> Result<Self> {
        let draw = |rng: &mut SeededRng| {
            let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
            let t: f64 = w.iter().sum();
            let mut v: Vec<f64> = w.iter().map(|x| x / t).collect();
            // Absorb rounding so the sum check holds tightly.
            let drift: f64 = 1.0 - v.iter().sum::<f64>();
            v[0] += drift;
            v
        };
        let p = draw(rng);
        let q = draw(rng);
        let mut s = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if rng.uniform() < density {
                    s.push((i, j));
                }
            }
        }
        if s.is_empty() {
            s.push((0, 0));
        }
        Self::new(p, q, s, gamma)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Pr_{p×q}[S].
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// ⌈1/(e ε γ)⌉.
    pub fn size_bound(&self) -> Result<usize> {
        if self.eps <= 0.0 {
            return Err(Error::Domain("S has probability zero".into()));
        }
        Ok((1.0 / (std::f64::consts::E * self.eps * self.gamma)).ceil() as usize)
    }

    /// Z = Pr[F_X ∩ E] = Σ_{i : S_i ∩ X = ∅} p_i q(S_i).
    pub fn uncovered_mass(&self, x: &BTreeSet<usize>) -> f64 {
        let mut hit = vec![false; self.n];
        for &(i, j) in &self.s {
            if x.contains(&j) {
                hit[i] = true;
            }
        }
        (0..self.n).filter(|&i| !hit[i]).map(|i| self.p[i] * self.row_mass[i]).sum()
    }

    /// Pr[∃k ∈ X : (i,k) ∈ S | (i,j) ∈ S] = 1 − Z/ε.
    pub fn conditional_coverage(&self, x: &BTreeSet<usize>) -> f64 {
        if self.eps <= 0.0 {
            return 0.0;
        }
        1.0 - self.uncovered_mass(x) / self.eps
    }

    fn admissible(&self, z: f64) -> bool {
        z <= self.gamma * self.eps * (1.0 + 1e-12) + 1e-300
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingSet {
    /// Distinct indices, ascending.
    pub x: Vec<usize>,
    /// Number of draws (sampling) or the size found (exhaustive search).
    pub m: usize,
    pub uncovered_mass: f64,
    pub conditional_coverage: f64,
    /// ⌈1/(eεγ)⌉.
    pub size_bound: usize,
    /// γε.
    pub target: f64,
}

fn report(inst: &PeakedInstance, x: BTreeSet<usize>, m: usize) -> Result<HittingSet> {
    let z = inst.uncovered_mass(&x);
    Ok(HittingSet {
        conditional_coverage: inst.conditional_coverage(&x),
        x: x.into_iter().collect(),
        m,
        uncovered_mass: z,
        size_bound: inst.size_bound()?,
        target: inst.gamma * inst.eps,
    })
}

/// X from m = ⌈1/(eεγ)⌉ i.i.d. draws from q, duplicates collapsed.
///
/// Only E_X[Z] ≤ γε is guaranteed; a single draw can miss the target.
pub fn hitting_set(inst: &PeakedInstance, rng: &mut SeededRng) -> Result<HittingSet> {
    let m = inst.size_bound()?;
    let x: BTreeSet<usize> = (0..m).map(|_| rng.categorical(&inst.q)).collect();
    report(inst, x, m)
}

/// Minimum-size X with Z ≤ γε by exhaustive search (N ≤ 16). Among sets
/// of the minimum size the one with the smallest bitmask is returned.
pub fn hitting_set_exact(inst: &PeakedInstance) -> Result<HittingSet> {
    if inst.n > 16 {
        return Err(Error::SizeGuard(format!("exhaustive search needs N ≤ 16, got {}", inst.n)));
    }
    inst.size_bound()?;
    let n = inst.n;
    let mut row_bits = vec![0u32; n];
    for &(i, j) in &inst.s {
        row_bits[i] |= 1 << j;
    }
    let weight: Vec<f64> = (0..n).map(|i| inst.p[i] * inst.row_mass[i]).collect();
    let z_of = |mask: u32| -> f64 { (0..n).filter(|&i| row_bits[i] & mask == 0).map(|i| weight[i]).sum() };
    for size in 0..=n as u32 {
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() == size && inst.admissible(z_of(mask)) {
                let x: BTreeSet<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
                return report(inst, x, size as usize);
            }
        }
    }
    Err(Error::Contract("the full index set must be admissible".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingStatistics {
    pub seeds: usize,
    pub m: usize,
    pub mean_z: f64,
    pub std_error: f64,
    /// γε.
    pub target: f64,
    /// mean Z ≤ γε + 3·(standard error).
    pub pass: bool,
    pub eps: f64,
    pub gamma: f64,
}

/// Mean of Z over `seeds` independent sampled hitting sets.
pub fn hitting_set_statistics(inst: &PeakedInstance, rng: &SeededRng, seeds: usize) -> Result<HittingStatistics> {
    if seeds < 2 {
        return Err(Error::Domain("at least two seeds are needed for a standard error".into()));
    }
    let m = inst.size_bound()?;
    let zs: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|k| hitting_set(inst, &mut rng.derive("hitting-set", k as u64)).map(|h| h.uncovered_mass))
        .collect::<Result<_>>()?;
    let mean = zs.iter().sum::<f64>() / seeds as f64;
    let var = zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (seeds - 1) as f64;
    let std_error = (var / seeds as f64).sqrt();
    let target = inst.gamma * inst.eps;
    Ok(HittingStatistics {
        seeds,
        m,
        mean_z: mean,
        std_error,
        target,
        pass: mean <= target + 3.0 * std_error,
        eps: inst.eps,
        gamma: inst.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> PeakedInstance {
        PeakedInstance::new(vec![0.5, 0.5], vec![0.5, 0.5], [(0, 0)], 0.5).unwrap()
    }

    #[test]
    fn small_instance_numbers() {
        let inst = two_by_two();
        assert!((inst.eps() - 0.25).abs() < 1e-15);
        assert_eq!(inst.size_bound().unwrap(), 3);
        let h = hitting_set_exact(&inst).unwrap();
        assert_eq!(h.x, vec![0]);
        assert_eq!(h.m, 1);
    }

    #[test]
    fn full_set_is_hit_by_any_index() {
        let s: Vec<_> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
        let inst = PeakedInstance::new(vec![1.0 / 3.0; 3], vec![0.2, 0.3, 0.5], s, 0.1).unwrap();
        let h = hitting_set(&inst, &mut SeededRng::new(1)).unwrap();
        assert!((h.conditional_coverage - 1.0).abs() < 1e-15);
        assert_eq!(hitting_set_exact(&inst).unwrap().m, 1);
    }

    #[test]
    fn gamma_one_admits_the_empty_set() {
        let inst = PeakedInstance::new(vec![0.5, 0.5], vec![0.5, 0.5], [(0, 0)], 1.0).unwrap();
        assert!(hitting_set_exact(&inst).unwrap().x.is_empty());
        let inst = PeakedInstance::new(vec![0.5, 0.5], vec![0.5, 0.5], [(0, 0)], 0.999).unwrap();
        assert_eq!(hitting_set_exact(&inst).unwrap().m, 1);
    }

    #[test]
    fn refuses_measure_zero_and_bad_input() {
        let inst = PeakedInstance::new(vec![1.0, 0.0], vec![1.0, 0.0], [(1, 1)], 0.5).unwrap();
        assert!(hitting_set(&inst, &mut SeededRng::new(0)).is_err());
        assert!(PeakedInstance::new(vec![0.6, 0.6], vec![0.5, 0.5], [(0, 0)], 0.5).is_err());
        assert!(PeakedInstance::new(vec![0.5, 0.5], vec![0.5, 0.5], [(0, 2)], 0.5).is_err());
    }

    #[test]
    fn json_roundtrip_and_eps_check() {
        let inst = two_by_two();
        let text = serde_json::to_string(&inst).unwrap();
        let back: PeakedInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        let bad = r#"{"N":2,"p":[0.5,0.5],"q":[0.5,0.5],"S":[[0,0]],"gamma":0.5,"eps":0.3}"#;
        assert!(serde_json::from_str::<PeakedInstance>(bad).is_err());
    }
}
