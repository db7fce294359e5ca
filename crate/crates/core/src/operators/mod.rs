//! Level operators: a structured stencil closed at the boundary according to
//! its matrix algebra, a banded correction, and an optional rank-one term.

mod band;
mod level;
mod stencil;

use core::fmt;

pub use band::BandMatrix;
pub use level::{CsrMatrix, LevelOperator, DEFAULT_DENSE_CAP};
pub use stencil::Stencil;

use crate::{Error, Result};

/// Matrix algebra of the structured part. Fixes both the boundary closure of
/// band stencils and the grid-size rule used when coarsening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algebra {
    /// Sine-transform algebra (homogeneous Dirichlet). Axis sizes `2m + 1`.
    Tau,
    /// Fourier algebra (periodic). Even axis sizes.
    Circulant,
    /// Type-III cosine transform algebra (reflective). Even axis sizes.
    Dct3,
}

impl Algebra {
    pub fn name(self) -> &'static str {
        match self {
            Algebra::Tau => "tau",
            Algebra::Circulant => "circ",
            Algebra::Dct3 => "dct3",
        }
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, Algebra::Circulant)
    }

    /// Maps a possibly out-of-range index `m` on an axis of size `n` to the
    /// in-range index that carries its weight, with the sign it enters with.
    ///
    /// - τ: odd reflection about the virtual zero nodes `-1` and `n`
    ///   (index `-1` and `n` vanish, `-1 - k` maps to `k - 1` negated).
    /// - circulant: wrap modulo `n`.
    /// - DCT-III: even reflection about the half-sample points.
    ///
    /// Valid for overshoots shorter than the axis.
    pub fn fold(self, m: isize, n: usize) -> Option<(usize, f64)> {
        let ni = n as isize;
        if (0..ni).contains(&m) {
            return Some((m as usize, 1.0));
        }
        match self {
            Algebra::Circulant => Some((m.rem_euclid(ni) as usize, 1.0)),
            Algebra::Dct3 => {
                let r = if m < 0 { -m - 1 } else { 2 * ni - 1 - m };
                (0..ni).contains(&r).then_some((r as usize, 1.0))
            }
            Algebra::Tau => {
                // 1-based position J = m + 1 with zeros at J = 0 and J = n + 1.
                let j = m + 1;
                let mirrored = if j <= 0 { -j } else { 2 * (ni + 1) - j };
                (1..=ni).contains(&mirrored).then_some(((mirrored - 1) as usize, -1.0))
            }
        }
    }

    /// Coarse axis size for a fine axis size: τ `n = 2m + 1 ↦ m`, circulant
    /// and DCT-III `n = 2m ↦ m`.
    pub fn coarse_size(self, n: usize) -> Result<usize> {
        let ok = match self {
            Algebra::Tau => n >= 3 && n % 2 == 1,
            Algebra::Circulant | Algebra::Dct3 => n >= 2 && n % 2 == 0,
        };
        if ok {
            Ok(n / 2)
        } else {
            Err(Error::Parity { algebra: self, size: n })
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid of one or two axes, stored lexicographically with the last axis
/// fastest. One-dimensional grids carry a trivial second axis of size 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    dim: usize,
    dims: [usize; 2],
}

impl GridShape {
    pub fn new_1d(n: usize) -> Result<Self> {
        Self::new(&[n])
    }

    pub fn new_2d(n1: usize, n2: usize) -> Result<Self> {
        Self::new(&[n1, n2])
    }

    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.iter().any(|&n| n == 0) {
            return Err(Error::ShapeMismatch);
        }
        match *sizes {
            [n] => Ok(Self { dim: 1, dims: [n, 1] }),
            [n1, n2] => Ok(Self { dim: 2, dims: [n1, n2] }),
            _ => Err(Error::InvalidDimension(sizes.len())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Axis sizes including the trivial second axis of 1D grids.
    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    /// Total number of unknowns `N = Π n⁽ʳ⁾`.
    pub fn size(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dims[1] + j
    }

    pub fn coords(&self, s: usize) -> (usize, usize) {
        (s / self.dims[1], s % self.dims[1])
    }

    /// Shape after one coarsening step, or a parity error.
    pub fn coarsen(&self, algebra: Algebra) -> Result<GridShape> {
        let n1 = algebra.coarse_size(self.dims[0])?;
        if self.dim == 1 {
            return GridShape::new_1d(n1);
        }
        let n2 = algebra.coarse_size(self.dims[1])?;
        GridShape::new_2d(n1, n2)
    }
}

impl fmt::Display for GridShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "{}", self.dims[0]),
            _ => write!(f, "{}x{}", self.dims[0], self.dims[1]),
        }
    }
}

/// `λ_min(tridiag[−1, 2, −1]) = 4 sin²(π / (2(n + 1)))`.
pub fn min_eig_formula_tau_1d(n: usize) -> f64 {
    let s = libm::sin(core::f64::consts::PI / (2.0 * (n as f64 + 1.0)));
    4.0 * s * s
}
