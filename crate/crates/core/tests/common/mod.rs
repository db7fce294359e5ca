//! Dense oracles built from first principles (orthogonal transforms,
//! Kronecker products, explicit selection matrices) with nalgebra doing the
//! linear algebra.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use structmg_core::dense::DenseMatrix;
use structmg_core::{Algebra, CosinePoly, GridShape, SymbolMode, SymbolND};

pub fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Orthogonal eigenvector matrix `Q` and eigenvalue grid of the algebra, so
/// that the algebra matrix generated by `f` is `Q diag(f(θ_j)) Qᵀ`.
fn transform(algebra: Algebra, n: usize) -> (DMatrix<f64>, Vec<f64>) {
    let nf = n as f64;
    match algebra {
        Algebra::Tau => {
            let c = (2.0 / (nf + 1.0)).sqrt();
            let q = DMatrix::from_fn(n, n, |k, j| c * (((k + 1) * (j + 1)) as f64 * PI / (nf + 1.0)).sin());
            let grid = (1..=n).map(|j| j as f64 * PI / (nf + 1.0)).collect();
            (q, grid)
        }
        Algebra::Dct3 => {
            let q = DMatrix::from_fn(n, n, |k, j| {
                let c = if j == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                c * ((k as f64 + 0.5) * j as f64 * PI / nf).cos()
            });
            let grid = (0..n).map(|j| j as f64 * PI / nf).collect();
            (q, grid)
        }
        Algebra::Circulant => {
            // Real Fourier basis: 1, cos and sin pairs, and (−1)^k for even n.
            let mut cols: Vec<(DVector<f64>, f64)> = Vec::new();
            cols.push((DVector::from_element(n, 1.0 / nf.sqrt()), 0.0));
            for j in 1..n.div_ceil(2) {
                let t = 2.0 * PI * j as f64 / nf;
                let c = (2.0 / nf).sqrt();
                cols.push((DVector::from_fn(n, |k, _| c * (t * k as f64).cos()), t));
                cols.push((DVector::from_fn(n, |k, _| c * (t * k as f64).sin()), t));
            }
            if n % 2 == 0 {
                cols.push((DVector::from_fn(n, |k, _| if k % 2 == 0 { 1.0 } else { -1.0 } / nf.sqrt()), PI));
            }
            let q = DMatrix::from_fn(n, n, |k, j| cols[j].0[k]);
            (q, cols.iter().map(|c| c.1).collect())
        }
    }
}

/// The algebra matrix generated by a univariate cosine polynomial.
pub fn algebra_matrix(algebra: Algebra, n: usize, f: &CosinePoly) -> DMatrix<f64> {
    let (q, grid) = transform(algebra, n);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, grid.iter().map(|&t| f.eval(t))));
    &q * d * q.transpose()
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Algebra matrix of a 1D or 2D symbol; the first factor acts on the slow
/// (row) index of the grid.
pub fn symbol_matrix(algebra: Algebra, shape: GridShape, sym: &SymbolND) -> DMatrix<f64> {
    let [n1, n2] = shape.dims();
    let f = sym.factors();
    if shape.dim() == 1 {
        return algebra_matrix(algebra, n1, &f[0]);
    }
    let a = algebra_matrix(algebra, n1, &f[0]);
    let b = algebra_matrix(algebra, n2, &f[1]);
    match sym.mode() {
        SymbolMode::Sum => kron(&a, &DMatrix::identity(n2, n2)) + kron(&DMatrix::identity(n1, n1), &b),
        SymbolMode::Product => kron(&a, &b),
    }
}

/// Selection matrix from its definition: coarse unknown `j` at fine `2j+1`
/// (τ), `2j` (circulant) or both `2j, 2j+1` (DCT-III).
pub fn cutting_1d(algebra: Algebra, n: usize) -> DMatrix<f64> {
    let m = if algebra == Algebra::Tau { (n - 1) / 2 } else { n / 2 };
    DMatrix::from_fn(n, m, |i, j| {
        let hit = match algebra {
            Algebra::Tau => i == 2 * j + 1,
            Algebra::Circulant => i == 2 * j,
            Algebra::Dct3 => i == 2 * j || i == 2 * j + 1,
        };
        f64::from(u8::from(hit))
    })
}

/// `p = c P₀ T` with `c = 2^{-d/2}` for τ and 1 otherwise.
pub fn prolongation(algebra: Algebra, shape: GridShape, psym: &SymbolND) -> DMatrix<f64> {
    let [n1, n2] = shape.dims();
    let p0 = symbol_matrix(algebra, shape, psym);
    let t = if shape.dim() == 1 { cutting_1d(algebra, n1) } else { kron(&cutting_1d(algebra, n1), &cutting_1d(algebra, n2)) };
    let c = if algebra == Algebra::Tau { 0.5f64.powf(shape.dim() as f64 / 2.0) } else { 1.0 };
    p0 * t * c
}

pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max() / b.abs().max().max(f64::MIN_POSITIVE)
}

/// `‖E‖_B` via the symmetric form `B^{1/2} E B^{-1/2}`.
pub fn energy_norm(b: &DMatrix<f64>, e: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(b.clone());
    let half = &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let inv_half = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    (&half * e * inv_half).singular_values().max()
}

pub fn laplacian(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    })
}
