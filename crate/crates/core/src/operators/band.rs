use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{Algebra, GridShape, Stencil};
use crate::dense::DenseMatrix;
use crate::{Error, Result};

/// Sparse matrix on a grid stored by diagonal offsets.
///
/// For offset `o = (o₁, o₂)` the vector `v` holds `v[s] = M[s, col(s, o)]`
/// where `col` moves the grid point `s` by `o`. Periodic matrices wrap the
/// move around each axis, the others drop moves that leave the grid (their
/// slots stay zero). Periodic offsets are kept in canonical form
/// `-n/2 < o ≤ n/2` per axis, so no two stored offsets alias.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    shape: GridShape,
    periodic: bool,
    diags: BTreeMap<[isize; 2], Vec<f64>>,
}

/// A run of consecutive indices `start..start + len` on one axis that moves to
/// `target..target + len`.
#[derive(Clone, Copy)]
struct Segment {
    start: usize,
    len: usize,
    target: usize,
}

fn segments(n: usize, o: isize, periodic: bool) -> [Segment; 2] {
    let empty = Segment { start: 0, len: 0, target: 0 };
    let ni = n as isize;
    if periodic {
        let o = o.rem_euclid(ni) as usize;
        // [0, n - o) → [o, n) and [n - o, n) → [0, o)
        [
            Segment { start: 0, len: n - o, target: o },
            Segment { start: n - o, len: o, target: 0 },
        ]
    } else if o.abs() >= ni {
        [empty, empty]
    } else if o >= 0 {
        [Segment { start: 0, len: n - o as usize, target: o as usize }, empty]
    } else {
        let k = o.unsigned_abs();
        [Segment { start: k, len: n - k, target: 0 }, empty]
    }
}

fn canonical_axis(o: isize, n: usize) -> isize {
    let ni = n as isize;
    let r = o.rem_euclid(ni);
    if 2 * r > ni {
        r - ni
    } else {
        r
    }
}

impl BandMatrix {
    pub fn zeros(shape: GridShape, periodic: bool) -> Self {
        Self { shape, periodic, diags: BTreeMap::new() }
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(shape: GridShape, periodic: bool, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.size() {
            return Err(Error::LengthMismatch { expected: shape.size(), found: values.len() });
        }
        let mut m = Self::zeros(shape, periodic);
        m.diags.insert([0, 0], values);
        Ok(m)
    }

    /// The algebra matrix generated by a stencil: each stencil weight is moved
    /// to the column the algebra's boundary rule folds it onto.
    pub fn from_stencil(stencil: &Stencil, algebra: Algebra, shape: GridShape) -> Self {
        let mut m = Self::zeros(shape, algebra.is_periodic());
        let [n1, n2] = shape.dims();
        for (o, c) in stencil.iter() {
            if c == 0.0 {
                continue;
            }
            if shape.dim() == 1 && o[1] != 0 {
                continue;
            }
            for i in 0..n1 {
                let Some((ti, si)) = algebra.fold(i as isize + o[0], n1) else { continue };
                for j in 0..n2 {
                    let (tj, sj) = if shape.dim() == 1 {
                        (0, 1.0)
                    } else {
                        match algebra.fold(j as isize + o[1], n2) {
                            Some(t) => t,
                            None => continue,
                        }
                    };
                    let off = [ti as isize - i as isize, tj as isize - j as isize];
                    m.add_entry(i * n2 + j, off, c * si * sj);
                }
            }
        }
        m
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn offsets(&self) -> impl Iterator<Item = [isize; 2]> + '_ {
        self.diags.keys().copied()
    }

    pub fn diagonals(&self) -> impl Iterator<Item = ([isize; 2], &[f64])> + '_ {
        self.diags.iter().map(|(o, v)| (*o, v.as_slice()))
    }

    pub fn diag(&self, offset: [isize; 2]) -> Option<&[f64]> {
        self.diags.get(&self.canonical(offset)).map(Vec::as_slice)
    }

    pub fn canonical(&self, o: [isize; 2]) -> [isize; 2] {
        if self.periodic {
            let [n1, n2] = self.shape.dims();
            [canonical_axis(o[0], n1), canonical_axis(o[1], n2)]
        } else {
            o
        }
    }

    /// Column reached from row `s` by offset `o`, if any.
    pub fn col(&self, s: usize, o: [isize; 2]) -> Option<usize> {
        let [n1, n2] = self.shape.dims();
        let (i, j) = self.shape.coords(s);
        let (mut ti, mut tj) = (i as isize + o[0], j as isize + o[1]);
        if self.periodic {
            ti = ti.rem_euclid(n1 as isize);
            tj = tj.rem_euclid(n2 as isize);
        } else if ti < 0 || ti >= n1 as isize || tj < 0 || tj >= n2 as isize {
            return None;
        }
        Some(ti as usize * n2 + tj as usize)
    }

    /// Adds `value` to `M[s, col(s, offset)]`. Entries whose column falls off
    /// a non-periodic grid are ignored.
    pub fn add_entry(&mut self, s: usize, offset: [isize; 2], value: f64) {
        if self.col(s, offset).is_none() {
            return;
        }
        let o = self.canonical(offset);
        let n = self.shape.size();
        self.diags.entry(o).or_insert_with(|| vec![0.0; n])[s] += value;
    }

    /// Adds a whole diagonal; slots whose column falls off the grid are
    /// skipped.
    pub fn add_diagonal(&mut self, offset: [isize; 2], values: &[f64]) {
        let o = self.canonical(offset);
        let n = self.shape.size();
        let mut acc = self.diags.remove(&o).unwrap_or_else(|| vec![0.0; n]);
        self.for_each_pair(o, |s, _| acc[s] += values[s]);
        self.diags.insert(o, acc);
    }

    pub fn get(&self, s: usize, offset: [isize; 2]) -> f64 {
        if self.col(s, offset).is_none() {
            return 0.0;
        }
        self.diags.get(&self.canonical(offset)).map_or(0.0, |v| v[s])
    }

    /// Visits every valid `(row, column)` pair of an offset in row order.
    fn for_each_pair(&self, o: [isize; 2], mut f: impl FnMut(usize, usize)) {
        let [n1, n2] = self.shape.dims();
        for s0 in segments(n1, o[0], self.periodic) {
            for k in 0..s0.len {
                let (i, ti) = (s0.start + k, s0.target + k);
                for s1 in segments(n2, o[1], self.periodic) {
                    for l in 0..s1.len {
                        f(i * n2 + s1.start + l, ti * n2 + s1.target + l);
                    }
                }
            }
        }
    }

    /// `y += M x`.
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        let [n1, n2] = self.shape.dims();
        for (o, v) in &self.diags {
            for s0 in segments(n1, o[0], self.periodic) {
                if s0.len == 0 {
                    continue;
                }
                let segs1 = segments(n2, o[1], self.periodic);
                if segs1[0].start == 0 && segs1[0].len == n2 && segs1[0].target == 0 {
                    // Whole rows move together: one contiguous block.
                    let (a, t, len) = (s0.start * n2, s0.target * n2, s0.len * n2);
                    axpy_mul(&mut y[a..a + len], &v[a..a + len], &x[t..t + len]);
                    continue;
                }
                for k in 0..s0.len {
                    let (ra, rt) = ((s0.start + k) * n2, (s0.target + k) * n2);
                    for s1 in segs1 {
                        let (a, t) = (ra + s1.start, rt + s1.target);
                        axpy_mul(&mut y[a..a + s1.len], &v[a..a + s1.len], &x[t..t + s1.len]);
                    }
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.shape.size()];
        self.matvec_add(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.shape.size();
        let mut m = DenseMatrix::zeros(n, n);
        for (o, v) in &self.diags {
            self.for_each_pair(*o, |s, t| m[(s, t)] += v[s]);
        }
        m
    }

    /// Per-row lists of `(column, value)`, merged and sorted by column.
    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.shape.size();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (o, v) in &self.diags {
            self.for_each_pair(*o, |s, t| {
                if v[s] != 0.0 {
                    rows[s].push((t, v[s]));
                }
            });
        }
        for r in &mut rows {
            r.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for &(c, v) in r.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *r = merged;
        }
        rows
    }

    /// Matrix product by offset arithmetic:
    /// `(AB)[s, oa + ob] += A[s, oa] · B[col(s, oa), ob]`.
    pub fn product(&self, other: &BandMatrix) -> Result<BandMatrix> {
        if self.shape != other.shape || self.periodic != other.periodic {
            return Err(Error::ShapeMismatch);
        }
        let n = self.shape.size();
        let mut out = BandMatrix::zeros(self.shape, self.periodic);
        for (oa, va) in &self.diags {
            for (ob, vb) in &other.diags {
                let o = out.canonical([oa[0] + ob[0], oa[1] + ob[1]]);
                let mut acc = out.diags.remove(&o).unwrap_or_else(|| vec![0.0; n]);
                self.for_each_pair(*oa, |s, t| {
                    if other.periodic || other.col(t, *ob).is_some() {
                        acc[s] += va[s] * vb[t];
                    }
                });
                out.diags.insert(o, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &BandMatrix, sign: f64) -> Result<BandMatrix> {
        if self.shape != other.shape || self.periodic != other.periodic {
            return Err(Error::ShapeMismatch);
        }
        let mut out = self.clone();
        let n = self.shape.size();
        for (o, v) in &other.diags {
            let acc = out.diags.entry(*o).or_insert_with(|| vec![0.0; n]);
            for (a, b) in acc.iter_mut().zip(v) {
                *a += sign * b;
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> BandMatrix {
        let mut out = self.clone();
        for v in out.diags.values_mut() {
            v.iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    /// Absolute row sums, i.e. Gershgorin radii plus the diagonal modulus.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.shape.size()];
        for (o, v) in &self.diags {
            self.for_each_pair(*o, |s, _| sums[s] += v[s].abs());
        }
        sums
    }

    /// `‖M‖_∞`, the maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.row_abs_sums().into_iter().fold(0.0, f64::max)
    }

    /// Largest stored entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.diags.values().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Removes diagonals whose entries are all at most `tol` in absolute
    /// value.
    pub fn prune(&mut self, tol: f64) {
        self.diags.retain(|_, v| v.iter().any(|x| x.abs() > tol));
    }

    pub fn is_zero(&self) -> bool {
        self.diags.values().flatten().all(|x| *x == 0.0)
    }

    /// Per-axis half-bandwidth over diagonals holding a nonzero entry.
    pub fn half_bandwidth(&self) -> [usize; 2] {
        let mut hb = [0, 0];
        for (o, v) in &self.diags {
            if v.iter().any(|x| *x != 0.0) {
                hb[0] = hb[0].max(o[0].unsigned_abs());
                hb[1] = hb[1].max(o[1].unsigned_abs());
            }
        }
        hb
    }

    /// Half-bandwidth in the lexicographic ordering, `|o₁| n₂ + |o₂|`
    /// maximized over stored diagonals. Infinite in effect for periodic
    /// matrices with wrapped entries; callers check periodicity first.
    pub fn linear_bandwidth(&self) -> usize {
        let n2 = self.shape.dims()[1] as isize;
        self.diags
            .iter()
            .filter(|(_, v)| v.iter().any(|x| *x != 0.0))
            .map(|(o, _)| (o[0] * n2 + o[1]).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// `max |M[s, t] − M[t, s]|` over stored entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (o, v) in &self.diags {
            let back = [-o[0], -o[1]];
            self.for_each_pair(*o, |s, t| {
                worst = worst.max((v[s] - self.get(t, back)).abs());
            });
        }
        worst
    }
}

fn axpy_mul(y: &mut [f64], v: &[f64], x: &[f64]) {
    for ((yi, vi), xi) in y.iter_mut().zip(v).zip(x) {
        *yi += vi * xi;
    }
}
