//! Random states, effects, unitaries and channels for tests and experiments.

use rand_distr::{Distribution, StandardNormal};

use super::channel::KrausChannel;
use super::layout::Layout;
use super::linalg::{self, c, CMatrix, CVector, C64};
use super::rng::SeededRng;
use super::state::{DensityOperator, EffectOperator, PureState};

fn gaussian(rng: &mut SeededRng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    // Fill row-major so the draw order is easy to reproduce elsewhere.
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-random pure state.
pub fn haar_state(layout: &Layout, rng: &mut SeededRng) -> PureState {
    let n = layout.total_dim();
    let v = CVector::from_fn(n, |_, _| gaussian(rng));
    PureState::normalized(layout.clone(), v).expect("Gaussian vector is nonzero")
}

/// Random density operator G G†/tr(G G†) with G of size d×rank.
pub fn random_density(layout: &Layout, rank: usize, rng: &mut SeededRng) -> DensityOperator {
    let n = layout.total_dim();
    let g = ginibre(n, rank.max(1), rng);
    DensityOperator::normalized(layout.clone(), &g * g.adjoint()).expect("Ginibre matrix has positive trace")
}

/// Full-rank random density operator.
pub fn random_mixed(layout: &Layout, rng: &mut SeededRng) -> DensityOperator {
    random_density(layout, layout.total_dim(), rng)
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
pub fn haar_unitary(n: usize, rng: &mut SeededRng) -> CMatrix {
    let g = ginibre(n, n, rng);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix (GUE-like, unnormalized).
pub fn random_hermitian(n: usize, rng: &mut SeededRng) -> CMatrix {
    linalg::hermitize(&ginibre(n, n, rng))
}

/// U diag(λ) U† with λ uniform in [0, 1].
pub fn random_effect(layout: &Layout, rng: &mut SeededRng) -> EffectOperator {
    let n = layout.total_dim();
    let u = haar_unitary(n, rng);
    let lam = CVector::from_fn(n, |_, _| c(rng.uniform(), 0.0));
    let m = &u * CMatrix::from_diagonal(&lam) * u.adjoint();
    EffectOperator::new(layout.clone(), linalg::hermitize(&m)).expect("spectrum in [0,1]")
}

/// Random channel with `n_kraus` operators: Kᵢ = Aᵢ S^{-1/2}, S = Σ Aᵢ†Aᵢ.
pub fn random_channel(input: &Layout, output: &Layout, n_kraus: usize, rng: &mut SeededRng) -> KrausChannel {
    let (din, dout) = (input.total_dim(), output.total_dim());
    let ops: Vec<CMatrix> = (0..n_kraus.max(1)).map(|_| ginibre(dout, din, rng)).collect();
    let mut s = CMatrix::zeros(din, din);
    for a in &ops {
        s += a.adjoint() * a;
    }
    let s_inv_half = linalg::spectral_map(&s, |x| 1.0 / x.sqrt());
    let kraus = ops.iter().map(|a| a * &s_inv_half).collect();
    KrausChannel::new(input.clone(), output.clone(), kraus).expect("normalized Kraus set")
}
