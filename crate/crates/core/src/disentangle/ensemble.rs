use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{DensityOperator, Layout, PureState};

/// Largest Hilbert-space dimension materialized as a dense matrix.
pub const DENSE_DIM_CAP: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleComponent {
    pub weight: f64,
    pub state: PureState,
}

/// Σᵢ wᵢ |χᵢ⟩⟨χᵢ|^{⊗copy_count}, with every χᵢ on the same single-copy
/// layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnsembleJson", into = "EnsembleJson")]
pub struct StateEnsemble {
    components: Vec<EnsembleComponent>,
    copy_count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleJson {
    components: Vec<EnsembleComponent>,
    copy_count: usize,
}

impl TryFrom<EnsembleJson> for StateEnsemble {
    type Error = Error;
    fn try_from(j: EnsembleJson) -> Result<Self> {
        StateEnsemble::new(j.components.into_iter().map(|c| (c.weight, c.state)).collect(), j.copy_count)
    }
}

impl From<StateEnsemble> for EnsembleJson {
    fn from(e: StateEnsemble) -> Self {
        EnsembleJson { components: e.components, copy_count: e.copy_count }
    }
}

impl StateEnsemble {
    pub fn new(components: Vec<(f64, PureState)>, copy_count: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("ensemble needs at least one component".into()));
        }
        if copy_count == 0 {
            return Err(Error::Domain("copy count must be positive".into()));
        }
        let layout = components[0].1.layout().clone();
        let mut total = 0.0;
        for (w, s) in &components {
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!("ensemble weight {w}")));
            }
            if s.layout() != &layout {
                return Err(Error::LayoutMismatch(layout.dims().to_vec(), s.layout().dims().to_vec()));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("ensemble weights sum to {total}")));
        }
        let components = components.into_iter().map(|(weight, state)| EnsembleComponent { weight, state }).collect();
        Ok(Self { components, copy_count })
    }

    pub fn single(state: PureState, copy_count: usize) -> Result<Self> {
        Self::new(vec![(1.0, state)], copy_count)
    }

    pub fn components(&self) -> &[EnsembleComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn copy_count(&self) -> usize {
        self.copy_count
    }

    /// Layout of one copy.
    pub fn layout(&self) -> &Layout {
        self.components[0].state.layout()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Dense density matrix of the full mixture (guarded by
    /// [`DENSE_DIM_CAP`]).
    pub fn to_density(&self) -> Result<DensityOperator> {
        let d = self.layout().total_dim();
        let total = (d as u128).checked_pow(self.copy_count as u32).unwrap_or(u128::MAX);
        if total > DENSE_DIM_CAP as u128 {
            return Err(Error::SizeGuard(format!("{d}^{} exceeds the dense cap {DENSE_DIM_CAP}", self.copy_count)));
        }
        let parts: Vec<(f64, DensityOperator)> =
            self.components.iter().map(|c| (c.weight, c.state.power(self.copy_count).to_density())).collect();
        DensityOperator::mixture(&parts)
    }
}
