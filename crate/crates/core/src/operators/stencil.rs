use alloc::collections::BTreeMap;

use super::Algebra;
use crate::symbols::{SymbolMode, SymbolND};

/// Symmetric band stencil: offset `(o₁, o₂)` ↦ coefficient. One-dimensional
/// stencils only use offsets `(o, 0)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stencil {
    entries: BTreeMap<[isize; 2], f64>,
}

impl Stencil {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fourier coefficients of a separable symbol laid out as a stencil.
    pub fn from_symbol(sym: &SymbolND) -> Self {
        let mut st = Stencil::new();
        let f = sym.factors();
        fn axis(c: &[f64]) -> impl Iterator<Item = (isize, f64)> + '_ {
            let k = c.len() as isize - 1;
            (-k..=k).map(move |o| (o, c[o.unsigned_abs()]))
        }
        match (f.len(), sym.mode()) {
            (1, _) => {
                for (o, c) in axis(f[0].coeffs()) {
                    st.add([o, 0], c);
                }
            }
            (_, SymbolMode::Sum) => {
                for (o, c) in axis(f[0].coeffs()) {
                    st.add([o, 0], c);
                }
                for (o, c) in axis(f[1].coeffs()) {
                    st.add([0, o], c);
                }
            }
            (_, SymbolMode::Product) => {
                for (o1, c1) in axis(f[0].coeffs()) {
                    for (o2, c2) in axis(f[1].coeffs()) {
                        st.add([o1, o2], c1 * c2);
                    }
                }
            }
        }
        st
    }

    pub fn add(&mut self, offset: [isize; 2], value: f64) {
        *self.entries.entry(offset).or_insert(0.0) += value;
    }

    pub fn get(&self, offset: [isize; 2]) -> f64 {
        self.entries.get(&offset).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ([isize; 2], f64)> + '_ {
        self.entries.iter().map(|(o, c)| (*o, *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Per-axis half-bandwidth over nonzero entries.
    pub fn half_bandwidth(&self) -> [usize; 2] {
        let mut hb = [0, 0];
        for (o, c) in self.iter() {
            if c != 0.0 {
                hb[0] = hb[0].max(o[0].unsigned_abs());
                hb[1] = hb[1].max(o[1].unsigned_abs());
            }
        }
        hb
    }

    /// Sum of absolute coefficients, the symbol's value bound `Σ|c|`.
    pub fn abs_sum(&self) -> f64 {
        self.entries.values().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> Stencil {
        Stencil { entries: self.entries.iter().map(|(o, c)| (*o, c * s)).collect() }
    }

    /// Product of the generating symbols.
    pub fn convolve(&self, other: &Stencil) -> Stencil {
        let mut out = Stencil::new();
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                out.add([a[0] + b[0], a[1] + b[1]], ca * cb);
            }
        }
        out
    }

    /// Stencil of the coarse structured operator `Tᵀ X T` for a Toeplitz-like
    /// `X` carrying this stencil, read off away from the boundary.
    ///
    /// τ and circulant keep every other coefficient; DCT-III merges each
    /// even coefficient twice with its two odd neighbours.
    pub fn select_coarse(&self, algebra: Algebra, dim: usize) -> Stencil {
        let mut out = Stencil::new();
        for (o, c) in self.iter() {
            for (c0, w0) in axis_targets(algebra, o[0]) {
                let second: [(isize, f64); 2] = if dim == 1 {
                    [(o[1], 1.0), (0, 0.0)]
                } else {
                    let t = axis_targets(algebra, o[1]);
                    [t[0], t[1]]
                };
                for (c1, w1) in second {
                    if w0 != 0.0 && w1 != 0.0 {
                        out.add([c0, c1], c * w0 * w1);
                    }
                }
            }
        }
        out.pruned(0.0)
    }

    /// Drops entries with `|c| ≤ tol`.
    pub fn pruned(mut self, tol: f64) -> Stencil {
        self.entries.retain(|_, c| c.abs() > tol);
        self
    }
}

/// Coarse offsets (with weights) that a fine offset contributes to along one
/// axis. Unused slots carry weight zero.
fn axis_targets(algebra: Algebra, o: isize) -> [(isize, f64); 2] {
    let even = o.rem_euclid(2) == 0;
    match algebra {
        Algebra::Tau | Algebra::Circulant => {
            if even {
                [(o.div_euclid(2), 1.0), (0, 0.0)]
            } else {
                [(0, 0.0), (0, 0.0)]
            }
        }
        Algebra::Dct3 => {
            if even {
                [(o.div_euclid(2), 2.0), (0, 0.0)]
            } else {
                [(o.div_euclid(2), 1.0), (o.div_euclid(2) + 1, 1.0)]
            }
        }
    }
}
