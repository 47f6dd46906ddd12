//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::layout::Layout;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Structural tolerance for Hermiticity, trace and normalization.
pub const STRUCT_TOL: f64 = 1e-10;
/// Tolerance for eigen residuals and Kraus completeness.
pub const EIG_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// tr(AB) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// ⟨v|M|v⟩ (real part; M is assumed Hermitian).
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    let mv = m * v;
    v.dotc(&mv).re
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// (M + M†)/2.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted
/// ascending; column `k` of the returned matrix belongs to eigenvalue `k`.
/// Ties keep the solver's original order.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// f(M) = U f(Λ) U† for Hermitian M.
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (k, &lam) in vals.iter().enumerate() {
        let fk = f(lam);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    scaled * vecs.adjoint()
}

/// Principal square root of a positive semidefinite matrix.
///
/// Eigenvalues within rounding noise of zero are set to zero: the square
/// root would otherwise turn 1e-17 noise into 3e-9 errors.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (vals, _) = eigh(m);
    let scale = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let floor = 64.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) * m.nrows() as f64;
    spectral_map(m, |x| if x <= floor { 0.0 } else { x.sqrt() })
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

/// Spectral norm of a Hermitian matrix.
pub fn operator_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Contract the listed factors of `m` against `rho`:
/// result[r, c] = Σ_{x,y} m[(r,x),(c,y)] · rho[y,x].
///
/// `rho` is indexed by the listed factors in the listed order. The result
/// lives on the remaining factors, ascending.
pub fn contract_factors(m: &CMatrix, layout: &Layout, factors: &[usize], rho: &CMatrix) -> Result<CMatrix> {
    layout.check_factors(factors)?;
    let dim_f = layout.dim_of(factors);
    if rho.nrows() != dim_f || rho.ncols() != dim_f {
        return Err(Error::DimensionMismatch { expected: dim_f, got: rho.nrows() });
    }
    let rest = layout.complement(factors);
    let off_rest = layout.offsets(&rest);
    let off_f = layout.offsets(factors);
    let n = off_rest.len();
    let mut out = CMatrix::zeros(n, n);
    for (r, &or) in off_rest.iter().enumerate() {
        for (cc, &oc) in off_rest.iter().enumerate() {
            let mut acc = ZERO;
            for (x, &ox) in off_f.iter().enumerate() {
                for (y, &oy) in off_f.iter().enumerate() {
                    let w = rho[(y, x)];
                    if w != ZERO {
                        acc += m[(or + ox, oc + oy)] * w;
                    }
                }
            }
            out[(r, cc)] = acc;
        }
    }
    Ok(out)
}

/// Partial trace keeping `keep` (result ordered as `keep` is listed).
pub fn partial_trace_matrix(m: &CMatrix, layout: &Layout, keep: &[usize]) -> Result<CMatrix> {
    layout.check_factors(keep)?;
    let traced = layout.complement(keep);
    let off_keep = layout.offsets(keep);
    let off_tr = layout.offsets(&traced);
    let n = off_keep.len();
    let mut out = CMatrix::zeros(n, n);
    for (r, &or) in off_keep.iter().enumerate() {
        for (cc, &oc) in off_keep.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &off_tr {
                acc += m[(or + t, oc + t)];
            }
            out[(r, cc)] = acc;
        }
    }
    Ok(out)
}

/// Reorder tensor factors of a matrix: new factor `k` is old factor `perm[k]`.
pub fn permute_matrix(m: &CMatrix, layout: &Layout, perm: &[usize]) -> Result<(Layout, CMatrix)> {
    let (new_layout, map) = layout.permutation_map(perm)?;
    let n = map.len();
    let out = CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]);
    Ok((new_layout, out))
}

pub fn permute_vector(v: &CVector, layout: &Layout, perm: &[usize]) -> Result<(Layout, CVector)> {
    let (new_layout, map) = layout.permutation_map(perm)?;
    let out = CVector::from_fn(map.len(), |i, _| v[map[i]]);
    Ok((new_layout, out))
}

/// Unitary P with P·(old basis) = new basis for the factor permutation, so
/// that `P m P†` equals [`permute_matrix`]'s output.
pub fn permutation_unitary(layout: &Layout, perm: &[usize]) -> Result<CMatrix> {
    let (_, map) = layout.permutation_map(perm)?;
    let n = map.len();
    let mut p = CMatrix::zeros(n, n);
    for (i, &old) in map.iter().enumerate() {
        p[(i, old)] = ONE;
    }
    Ok(p)
}

/// Embed an operator on `factors` (in listed order) into the full layout as
/// op ⊗ I.
pub fn embed(op: &CMatrix, layout: &Layout, factors: &[usize]) -> Result<CMatrix> {
    layout.check_factors(factors)?;
    let dim_f = layout.dim_of(factors);
    if op.nrows() != dim_f || op.ncols() != dim_f {
        return Err(Error::DimensionMismatch { expected: dim_f, got: op.nrows() });
    }
    let rest = layout.complement(factors);
    let off_rest = layout.offsets(&rest);
    let off_f = layout.offsets(factors);
    let n = layout.total_dim();
    let mut out = CMatrix::zeros(n, n);
    for &or in &off_rest {
        for (x, &ox) in off_f.iter().enumerate() {
            for (y, &oy) in off_f.iter().enumerate() {
                let w = op[(x, y)];
                if w != ZERO {
                    out[(or + ox, or + oy)] += w;
                }
            }
        }
    }
    Ok(out)
}

/// Swap operator on ℂ^d ⊗ ℂ^d built by index permutation.
pub fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(j * d + i, i * d + j)] = ONE;
        }
    }
    f
}

/// Unit vector `e_k` of dimension `n`.
pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_squares_to_identity() {
        let f = swap_operator(3);
        assert!(max_abs_diff(&(&f * &f), &identity(9)) < 1e-15);
    }

    #[test]
    fn eigh_sorted_and_residual() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 0.0).abs() < 1e-12 && (vals[1] - 2.0).abs() < 1e-12);
        for k in 0..2 {
            let v = vecs.column(k).into_owned();
            let r = &m * &v - &v * c(vals[k], 0.0);
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn embed_matches_kron() {
        let layout = Layout::new(vec![2, 3]).unwrap();
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE]));
        let full = embed(&z, &layout, &[0]).unwrap();
        assert!(max_abs_diff(&full, &kron(&z, &identity(3))) < 1e-15);
        let x = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let full = embed(&x, &layout, &[1]).unwrap();
        assert!(max_abs_diff(&full, &kron(&identity(2), &x)) < 1e-15);
    }

    #[test]
    fn permutation_unitary_agrees_with_permute_matrix() {
        let layout = Layout::new(vec![2, 3, 2]).unwrap();
        let m = CMatrix::from_fn(12, 12, |i, j| c((i * 12 + j) as f64, (i as f64) * 0.5));
        let perm = [2, 0, 1];
        let (_, direct) = permute_matrix(&m, &layout, &perm).unwrap();
        let p = permutation_unitary(&layout, &perm).unwrap();
        assert!(max_abs_diff(&direct, &(&p * &m * p.adjoint())) < 1e-12);
    }
}
