//! Generating functions and projector symbols as even cosine polynomials.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

const SUP_SAMPLES: usize = 2048;
const SUP_TOL: f64 = 1e-12;

/// `f(t) = c₀ + Σ_{j≥1} 2 c_j cos(j t)`.
///
/// The coefficients are the Fourier coefficients of an even real function,
/// which are also the entries of the symmetric band stencil it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct CosinePoly {
    coeffs: Vec<f64>,
}

impl CosinePoly {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCoefficients);
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut s = self.coeffs[0];
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            s += 2.0 * c * libm::cos(j as f64 * t);
        }
        s
    }

    /// Product of two cosine polynomials (convolution of the symmetric
    /// coefficient sequences).
    pub fn mul(&self, other: &CosinePoly) -> CosinePoly {
        let (ka, kb) = (self.degree() as isize, other.degree() as isize);
        let a = |j: isize| self.coeffs[j.unsigned_abs()];
        let b = |j: isize| other.coeffs[j.unsigned_abs()];
        let coeffs = (0..=ka + kb)
            .map(|m| {
                (-ka..=ka)
                    .filter(|i| (m - i).abs() <= kb)
                    .map(|i| a(i) * b(m - i))
                    .sum()
            })
            .collect();
        CosinePoly { coeffs }
    }

    pub fn pow(&self, exponent: u32) -> CosinePoly {
        (0..exponent).fold(CosinePoly::constant(1.0), |acc, _| acc.mul(self))
    }

    /// `t ↦ f(t + π)`: flips the sign of the odd coefficients.
    pub fn shift_by_pi(&self) -> CosinePoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 1 { -c } else { c })
            .collect();
        CosinePoly { coeffs }
    }

    pub fn scaled(&self, s: f64) -> CosinePoly {
        CosinePoly { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Minimum and maximum over `[0, π]`: dense sampling followed by
    /// golden-section refinement around the best samples.
    pub fn range(&self) -> (f64, f64) {
        if self.degree() == 0 {
            return (self.coeffs[0], self.coeffs[0]);
        }
        let h = PI / SUP_SAMPLES as f64;
        let mut imin = 0;
        let mut imax = 0;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for i in 0..=SUP_SAMPLES {
            let v = self.eval(i as f64 * h);
            if v < vmin {
                vmin = v;
                imin = i;
            }
            if v > vmax {
                vmax = v;
                imax = i;
            }
        }
        let bracket = |i: usize| {
            let lo = i.saturating_sub(1) as f64 * h;
            let hi = (i + 1).min(SUP_SAMPLES) as f64 * h;
            (lo, hi)
        };
        let (lo, hi) = bracket(imax);
        let vmax = vmax.max(golden_max(|t| self.eval(t), lo, hi));
        let (lo, hi) = bracket(imin);
        let vmin = vmin.min(-golden_max(|t| -self.eval(t), lo, hi));
        (vmin, vmax)
    }

    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > SUP_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).max(fc).max(fd)
}

/// How the per-axis factors of a two-level symbol combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolMode {
    /// `f(t₁, t₂) = f₁(t₁) + f₂(t₂)`
    Sum,
    /// `f(t₁, t₂) = f₁(t₁) · f₂(t₂)`
    Product,
}

/// A separable symbol in one or two variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolND {
    mode: SymbolMode,
    factors: Vec<CosinePoly>,
}

impl SymbolND {
    pub fn new(mode: SymbolMode, factors: Vec<CosinePoly>) -> Result<Self> {
        match factors.len() {
            1 | 2 => Ok(Self { mode, factors }),
            d => Err(Error::InvalidDimension(d)),
        }
    }

    pub fn univariate(f: CosinePoly) -> Self {
        Self { mode: SymbolMode::Sum, factors: vec![f] }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn mode(&self) -> SymbolMode {
        self.mode
    }

    pub fn factors(&self) -> &[CosinePoly] {
        &self.factors
    }

    /// Largest per-axis degree.
    pub fn degree(&self) -> usize {
        self.factors.iter().map(CosinePoly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        assert_eq!(t.len(), self.dim(), "point dimension must match the symbol");
        let values = self.factors.iter().zip(t).map(|(f, &ti)| f.eval(ti));
        match self.mode {
            SymbolMode::Sum => values.sum(),
            SymbolMode::Product => values.product(),
        }
    }

    /// `‖f‖_∞` over `[0, π]^d`. Separability reduces it to per-factor ranges.
    pub fn sup_norm(&self) -> f64 {
        let ranges: Vec<(f64, f64)> = self.factors.iter().map(CosinePoly::range).collect();
        match self.mode {
            SymbolMode::Sum => {
                let lo: f64 = ranges.iter().map(|r| r.0).sum();
                let hi: f64 = ranges.iter().map(|r| r.1).sum();
                lo.abs().max(hi.abs())
            }
            SymbolMode::Product => ranges.iter().map(|r| r.0.abs().max(r.1.abs())).product(),
        }
    }

    /// Whether `f(0, …, 0) = 0`, i.e. the zero Fourier mode is in the kernel
    /// of every circulant or DCT-III matrix the symbol generates.
    pub fn vanishes_at_origin(&self) -> bool {
        let origin = vec![0.0; self.dim()];
        self.eval(&origin).abs() <= 1e-12 * self.sup_norm().max(1.0)
    }
}

/// `f(t) = Σ_i (2 − 2cos tᵢ)^q`, the symbol of the order-2q finite difference
/// operator.
pub fn laplacian_symbol(d: usize, q: u32) -> Result<SymbolND> {
    if !(1..=3).contains(&q) {
        return Err(Error::InvalidOrder(q));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidDimension(d));
    }
    let factor = CosinePoly { coeffs: vec![2.0, -1.0] }.pow(q);
    SymbolND::new(SymbolMode::Sum, vec![factor; d])
}

/// `p(t) = Π_i (2 + 2cos tᵢ)^w`, vanishing at the mirror point π of the zero
/// at the origin.
pub fn projector_symbol(d: usize, w: u32) -> Result<SymbolND> {
    if w < 1 {
        return Err(Error::InvalidExponent(w));
    }
    if !(1..=2).contains(&d) {
        return Err(Error::InvalidDimension(d));
    }
    let factor = CosinePoly { coeffs: vec![2.0, 1.0] }.pow(w);
    SymbolND::new(SymbolMode::Product, vec![factor; d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn laplacian_symbol_values() {
        let f = laplacian_symbol(1, 1).unwrap();
        assert!(approx(f.eval(&[0.0]), 0.0, 1e-15));
        assert!(approx(f.eval(&[PI]), 4.0, 1e-15));
        let f2 = laplacian_symbol(2, 1).unwrap();
        assert!(approx(f2.eval(&[PI, PI]), 8.0, 1e-14));
    }

    #[test]
    fn family_coefficients() {
        assert_eq!(laplacian_symbol(1, 1).unwrap().factors()[0].coeffs(), &[2.0, -1.0]);
        assert_eq!(laplacian_symbol(1, 2).unwrap().factors()[0].coeffs(), &[6.0, -4.0, 1.0]);
        assert_eq!(projector_symbol(1, 1).unwrap().factors()[0].coeffs(), &[2.0, 1.0]);
        assert_eq!(projector_symbol(1, 2).unwrap().factors()[0].coeffs(), &[6.0, 4.0, 1.0]);
        let f2 = laplacian_symbol(2, 1).unwrap();
        assert_eq!(f2.mode(), SymbolMode::Sum);
        assert_eq!(f2.factors().len(), 2);
        assert_eq!(projector_symbol(2, 1).unwrap().mode(), SymbolMode::Product);
    }

    #[test]
    fn power_expansion_matches_pointwise_powers() {
        // Brute-force check of the cosine-basis expansion at 100 points.
        let base = laplacian_symbol(1, 1).unwrap().factors()[0].clone();
        let pbase = projector_symbol(1, 1).unwrap().factors()[0].clone();
        for q in 1..=3u32 {
            let fq = laplacian_symbol(1, q).unwrap();
            let pw = projector_symbol(1, q).unwrap();
            for i in 0..100 {
                let t = PI * i as f64 / 99.0;
                assert!(approx(fq.eval(&[t]), libm::pow(base.eval(t), q as f64), 1e-12));
                assert!(approx(pw.eval(&[t]), libm::pow(pbase.eval(t), q as f64), 1e-12));
            }
        }
    }

    #[test]
    fn sup_norms() {
        assert!(approx(laplacian_symbol(1, 1).unwrap().sup_norm(), 4.0, 1e-12));
        assert!(approx(laplacian_symbol(1, 2).unwrap().sup_norm(), 16.0, 1e-12));
        assert!(approx(laplacian_symbol(2, 1).unwrap().sup_norm(), 8.0, 1e-12));
        assert!(approx(laplacian_symbol(1, 3).unwrap().sup_norm(), 64.0, 1e-10));
        assert!(approx(projector_symbol(2, 1).unwrap().sup_norm(), 16.0, 1e-12));
    }

    #[test]
    fn interior_extremum_is_refined() {
        // Maximum strictly inside (0, π), off the sample grid.
        let f = CosinePoly::new(vec![0.0, 0.5, -0.4]).unwrap();
        let dense_max = (0..=200_000)
            .map(|i| f.eval(PI * i as f64 / 200_000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(approx(f.range().1, dense_max, 1e-9));
    }

    #[test]
    fn invalid_parameters() {
        assert_eq!(laplacian_symbol(3, 1).unwrap_err(), Error::InvalidDimension(3));
        assert_eq!(laplacian_symbol(1, 4).unwrap_err(), Error::InvalidOrder(4));
        assert_eq!(projector_symbol(1, 0).unwrap_err(), Error::InvalidExponent(0));
        assert_eq!(CosinePoly::new(vec![]).unwrap_err(), Error::InvalidCoefficients);
    }

    #[test]
    fn zero_at_origin() {
        assert!(laplacian_symbol(2, 2).unwrap().vanishes_at_origin());
        assert!(!projector_symbol(1, 1).unwrap().vanishes_at_origin());
    }
}
