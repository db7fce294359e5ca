use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Algebra, BandMatrix, GridShape, Stencil};
use crate::dense::DenseMatrix;
use crate::symbols::SymbolND;
use crate::{dot, Error, Result};

/// Default size limit for dense materialization.
pub const DEFAULT_DENSE_CAP: usize = 1024;

/// `B = S + D + v vᵀ`: algebra matrix `S` of a stencil, band correction `D`,
/// optional rank-one term.
///
/// `S + D` is also kept pre-summed so that products touch one band matrix.
#[derive(Debug, Clone)]
pub struct LevelOperator {
    algebra: Algebra,
    shape: GridShape,
    stencil: Stencil,
    correction: BandMatrix,
    rank_one: Option<Vec<f64>>,
    assembled: BandMatrix,
}

/// Compressed sparse rows of `S + D`, without the rank-one term.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    fn from_rows(rows: &[Vec<(usize, f64)>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        row_ptr.push(0);
        for r in rows {
            for &(c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }
}

impl LevelOperator {
    /// The algebra matrix generated by `sym` on `shape`, without correction.
    pub fn assemble_structured(algebra: Algebra, shape: GridShape, sym: &SymbolND) -> Result<Self> {
        if sym.dim() != shape.dim() {
            return Err(Error::InvalidDimension(sym.dim()));
        }
        let stencil = Stencil::from_symbol(sym);
        let correction = BandMatrix::zeros(shape, algebra.is_periodic());
        Self::from_parts(algebra, shape, stencil, correction, None)
    }

    pub fn from_parts(
        algebra: Algebra,
        shape: GridShape,
        stencil: Stencil,
        correction: BandMatrix,
        rank_one: Option<Vec<f64>>,
    ) -> Result<Self> {
        let hb = stencil.half_bandwidth();
        for axis in 0..shape.dim() {
            let n = shape.dims()[axis];
            if hb[axis] >= n {
                return Err(Error::BandwidthTooLarge { axis, bandwidth: hb[axis], size: n });
            }
        }
        if correction.shape() != shape || correction.is_periodic() != algebra.is_periodic() {
            return Err(Error::ShapeMismatch);
        }
        if let Some(v) = &rank_one {
            if v.len() != shape.size() {
                return Err(Error::LengthMismatch { expected: shape.size(), found: v.len() });
            }
        }
        let assembled = BandMatrix::from_stencil(&stencil, algebra, shape).add(&correction)?;
        Ok(Self { algebra, shape, stencil, correction, rank_one, assembled })
    }

    /// Replaces the band correction.
    pub fn with_correction(self, correction: BandMatrix) -> Result<Self> {
        Self::from_parts(self.algebra, self.shape, self.stencil, correction, self.rank_one)
    }

    pub fn with_rank_one(self, v: Vec<f64>) -> Result<Self> {
        Self::from_parts(self.algebra, self.shape, self.stencil, self.correction, Some(v))
    }

    /// Adds the Strang term `f(θ) e eᵀ / N` with `θ = 2π/N` (circulant),
    /// `π/N` (DCT-III) or `π/(N+1)` (τ), evaluated along the first axis in 2D.
    pub fn with_strang(self, sym: &SymbolND) -> Result<Self> {
        let n = self.shape.size() as f64;
        let theta = match self.algebra {
            Algebra::Circulant => 2.0 * PI / n,
            Algebra::Dct3 => PI / n,
            Algebra::Tau => PI / (n + 1.0),
        };
        let mut t = vec![0.0; sym.dim()];
        t[0] = theta;
        let value = libm::sqrt(sym.eval(&t).max(0.0) / n);
        let v = vec![value; self.shape.size()];
        self.with_rank_one(v)
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn size(&self) -> usize {
        self.shape.size()
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn correction(&self) -> &BandMatrix {
        &self.correction
    }

    pub fn rank_one(&self) -> Option<&[f64]> {
        self.rank_one.as_deref()
    }

    /// `S + D` as one band matrix.
    pub fn assembled(&self) -> &BandMatrix {
        &self.assembled
    }

    /// `S` alone.
    pub fn structured_band(&self) -> BandMatrix {
        BandMatrix::from_stencil(&self.stencil, self.algebra, self.shape)
    }

    /// `y = B x` without length checks.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.assembled.matvec_add(x, y);
        if let Some(v) = &self.rank_one {
            let a = dot(v, x);
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi += a * vi;
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), found: x.len() });
        }
        let mut y = vec![0.0; self.size()];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// `r = b − B x` without length checks.
    pub fn residual(&self, x: &[f64], b: &[f64], r: &mut [f64]) {
        self.apply(x, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    pub fn materialize_dense(&self) -> Result<DenseMatrix> {
        self.materialize_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_dense_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.size();
        if n > cap {
            return Err(Error::DenseCapExceeded { size: n, cap });
        }
        let mut m = self.assembled.to_dense();
        if let Some(v) = &self.rank_one {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j];
                }
            }
        }
        Ok(m)
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_rows(&self.assembled.rows())
    }

    /// Gershgorin upper bound on the spectrum: the largest absolute row sum of
    /// `S + D + v vᵀ`.
    pub fn gershgorin_bound(&self) -> f64 {
        let mut sums = self.assembled.row_abs_sums();
        if let Some(v) = &self.rank_one {
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            for (s, vi) in sums.iter_mut().zip(v) {
                *s += vi.abs() * l1;
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `‖D‖_∞` of the band correction.
    pub fn correction_norm_inf(&self) -> f64 {
        self.correction.norm_inf()
    }
}
