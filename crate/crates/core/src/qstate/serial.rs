//! JSON wire format `{layout, re, im}` (row-major for matrices).
//!
//! Floats round-trip exactly through `serde_json` with `float_roundtrip`.

use serde::{Deserialize, Serialize};

use super::layout::Layout;
use super::linalg::{c, CMatrix, CVector};
use super::state::{DensityOperator, EffectOperator, PureState};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub layout: Layout,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub layout: Layout,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(layout: &Layout, m: &CMatrix) -> Self {
        let n = m.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..m.ncols() {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { layout: layout.clone(), re, im }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.layout.total_dim();
        if self.re.len() != n * n || self.im.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: self.re.len().max(self.im.len()) });
        }
        Ok(CMatrix::from_fn(n, n, |i, j| c(self.re[i * n + j], self.im[i * n + j])))
    }
}

impl VectorJson {
    pub fn from_vector(layout: &Layout, v: &CVector) -> Self {
        Self {
            layout: layout.clone(),
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vector(&self) -> Result<CVector> {
        let n = self.layout.total_dim();
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.re.len().max(self.im.len()) });
        }
        Ok(CVector::from_fn(n, |i, _| c(self.re[i], self.im[i])))
    }
}

impl TryFrom<VectorJson> for PureState {
    type Error = Error;
    fn try_from(j: VectorJson) -> Result<Self> {
        let v = j.to_vector()?;
        PureState::new(j.layout, v)
    }
}

impl From<PureState> for VectorJson {
    fn from(s: PureState) -> Self {
        VectorJson::from_vector(s.layout(), s.amplitudes())
    }
}

impl TryFrom<MatrixJson> for DensityOperator {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let m = j.to_matrix()?;
        DensityOperator::new(j.layout, m)
    }
}

impl From<DensityOperator> for MatrixJson {
    fn from(s: DensityOperator) -> Self {
        MatrixJson::from_matrix(s.layout(), s.matrix())
    }
}

impl TryFrom<MatrixJson> for EffectOperator {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let m = j.to_matrix()?;
        EffectOperator::new(j.layout, m)
    }
}

impl From<EffectOperator> for MatrixJson {
    fn from(e: EffectOperator) -> Self {
        MatrixJson::from_matrix(e.layout(), e.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_round_trip_is_exact() {
        let psi = PureState::normalized(Layout::qubits(2), CVector::from_fn(4, |i, _| c(0.1 + i as f64 / 3.0, -(i as f64) / 7.0)))
            .unwrap();
        let rho = psi.to_density();
        let text = serde_json::to_string(&rho).unwrap();
        let back: DensityOperator = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rho);
        let text = serde_json::to_string(&psi).unwrap();
        let back: PureState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn rejects_wrong_length() {
        let j = MatrixJson { layout: Layout::qubits(1), re: vec![1.0, 0.0, 0.0], im: vec![0.0; 3] };
        assert!(DensityOperator::try_from(j).is_err());
    }
}
