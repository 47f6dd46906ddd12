use super::layout::Layout;
use super::linalg::{self, CMatrix, EIG_TOL};
use super::state::{same_layout, DensityOperator};
use crate::error::{Error, Result};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    input_layout: Layout,
    output_layout: Layout,
    kraus_ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(input_layout: Layout, output_layout: Layout, kraus_ops: Vec<CMatrix>) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::NotTracePreserving(1.0));
        }
        let (din, dout) = (input_layout.total_dim(), output_layout.total_dim());
        let mut sum = CMatrix::zeros(din, din);
        for k in &kraus_ops {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimensionMismatch { expected: dout * din, got: k.nrows() * k.ncols() });
            }
            sum += k.adjoint() * k;
        }
        let dev = linalg::max_abs_diff(&sum, &linalg::identity(din));
        if dev > EIG_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { input_layout, output_layout, kraus_ops })
    }

    pub fn identity(layout: Layout) -> Self {
        let n = layout.total_dim();
        Self { input_layout: layout.clone(), output_layout: layout, kraus_ops: vec![linalg::identity(n)] }
    }

    /// ρ ↦ tr(ρ)·I/d, written with the d² Weyl operators X^a Z^b / d.
    pub fn completely_depolarizing(layout: Layout) -> Self {
        let d = layout.total_dim();
        let omega = 2.0 * std::f64::consts::PI / d as f64;
        let mut ops = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut k = CMatrix::zeros(d, d);
                for j in 0..d {
                    k[((j + a) % d, j)] = num_complex::Complex64::from_polar(1.0 / d as f64, omega * (b * j) as f64);
                }
                ops.push(k);
            }
        }
        Self { input_layout: layout.clone(), output_layout: layout, kraus_ops: ops }
    }

    pub fn input_layout(&self) -> &Layout {
        &self.input_layout
    }

    pub fn output_layout(&self) -> &Layout {
        &self.output_layout
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus_ops
    }

    /// Σ K ρ K†.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        same_layout(&self.input_layout, rho.layout())?;
        let dout = self.output_layout.total_dim();
        let mut out = CMatrix::zeros(dout, dout);
        for k in &self.kraus_ops {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityOperator::with_tolerance(self.output_layout.clone(), linalg::hermitize(&out), EIG_TOL)
    }
}

pub fn apply_channel(ch: &KrausChannel, rho: &DensityOperator) -> Result<DensityOperator> {
    ch.apply(rho)
}
