//! The diagonal and random banded corrections of the experiment families.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use structmg_core::{Algebra, BandMatrix, GridShape, Result};

/// Correction family `d0` … `d10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family(u8);

impl Family {
    pub const D0: Family = Family(0);
    pub const D1: Family = Family(1);
    pub const D4: Family = Family(4);

    pub fn new(index: u8) -> Option<Family> {
        (index <= 10).then_some(Family(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// `d5` … `d10` draw random entries and are averaged over repetitions.
    pub fn is_random(self) -> bool {
        self.0 >= 5
    }

    /// Number of nonzero diagonals of the correction.
    pub fn diagonals(self) -> usize {
        match self.0 {
            7 | 8 => 3,
            9 | 10 => 5,
            _ => 1,
        }
    }

    fn normal(self) -> bool {
        self.is_random() && self.0 % 2 == 0
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.0)
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.strip_prefix('d')
            .and_then(|k| k.parse::<u8>().ok())
            .and_then(Family::new)
            .ok_or_else(|| format!("unknown correction family `{s}` (expected d0..d10)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrectionSpec {
    pub family: Family,
    /// Only read by the random families.
    pub seed: u64,
}

fn d1(s: f64) -> f64 {
    s / (s + 1.0)
}

fn d2(s: f64) -> f64 {
    s.sin().abs()
}

fn d3(s: f64) -> f64 {
    s.sin().abs() * (s * s - 1.0) / (s * s + 1.0)
}

/// Builds the correction `D` on the given grid, with 1-based indices `s`
/// (1D) or `(i, j)` (2D).
pub fn make_correction(spec: CorrectionSpec, algebra: Algebra, shape: GridShape) -> Result<BandMatrix> {
    let n = shape.size();
    let periodic = algebra.is_periodic();
    let k = spec.family.index();
    if spec.family.is_random() {
        return Ok(random_band(spec, shape, periodic));
    }
    let point: fn(f64) -> f64 = match k {
        1 => d1,
        2 => d2,
        3 => d3,
        _ => |_| 0.0,
    };
    let values: Vec<f64> = (0..n)
        .map(|s| {
            let (i, j) = shape.coords(s);
            match (k, shape.dim()) {
                (0, _) => 0.0,
                (4, _) => (s + 1) as f64 / n as f64,
                (_, 1) => point((s + 1) as f64),
                _ => point((i + 1) as f64) + point((j + 1) as f64),
            }
        })
        .collect();
    BandMatrix::diagonal(shape, periodic, values)
}

/// Symmetric random band with `γ` diagonals, scaled by `1/(γ n₁²)`. In 2D the
/// off-diagonals couple neighbours within a grid row.
fn random_band(spec: CorrectionSpec, shape: GridShape, periodic: bool) -> BandMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gamma = spec.family.diagonals();
    let [n1, _] = shape.dims();
    let scale = 1.0 / (gamma as f64 * (n1 * n1) as f64);
    let normal = spec.family.normal();
    let mut draw = move || -> f64 {
        let x: f64 = if normal { rng.sample(StandardNormal) } else { rng.random() };
        x * scale
    };
    let n = shape.size();
    let mut m = BandMatrix::zeros(shape, periodic);
    for s in 0..n {
        m.add_entry(s, [0, 0], draw());
    }
    for k in 1..=(gamma / 2) as isize {
        let o = if shape.dim() == 1 { [k, 0] } else { [0, k] };
        for s in 0..n {
            if let Some(t) = m.col(s, o) {
                let v = draw();
                m.add_entry(s, o, v);
                m.add_entry(t, [-o[0], -o[1]], v);
            }
        }
    }
    m
}
