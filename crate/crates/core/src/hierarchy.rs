//! Cutting operators, prolongations, Galerkin coarsening and the level chain.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{generalized_eigenvalues, BandCholesky, Cholesky, DenseMatrix};
use crate::operators::{Algebra, BandMatrix, CsrMatrix, GridShape, LevelOperator, Stencil, DEFAULT_DENSE_CAP};
use crate::solvers::{level_smoother_params, solve, CycleConfig, CycleMode, OmegaPolicy, SmootherConfig, SmootherKind};
use crate::symbols::SymbolND;
use crate::{Error, Result};

/// Relative size below which a coarse correction diagonal counts as zero.
const PRUNE_REL: f64 = 1e-14;

/// Positions, relative to `2j`, of the fine points carrying coarse point `j`.
fn cut_axis(algebra: Algebra) -> &'static [usize] {
    match algebra {
        Algebra::Tau => &[1],
        Algebra::Circulant => &[0],
        Algebra::Dct3 => &[0, 1],
    }
}

/// The 0/1 selection matrix `T` with coarse unknown `j` sitting at fine
/// position `2j + 1` (τ), `2j` (circulant) or spread over `{2j, 2j + 1}`
/// (DCT-III), tensorized in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuttingOperator {
    algebra: Algebra,
    fine: GridShape,
    coarse: GridShape,
}

impl CuttingOperator {
    pub fn new(algebra: Algebra, fine: GridShape) -> Result<Self> {
        let coarse = fine.coarsen(algebra)?;
        Ok(Self { algebra, fine, coarse })
    }

    pub fn fine_shape(&self) -> GridShape {
        self.fine
    }

    pub fn coarse_shape(&self) -> GridShape {
        self.coarse
    }

    /// Fine linear indices hit by coarse linear index `sc`.
    fn targets(&self, sc: usize, mut f: impl FnMut(usize)) {
        let (i, j) = self.coarse.coords(sc);
        let shifts = cut_axis(self.algebra);
        if self.fine.dim() == 1 {
            for a in shifts {
                f(2 * i + a);
            }
            return;
        }
        for a in shifts {
            for b in shifts {
                f(self.fine.index(2 * i + a, 2 * j + b));
            }
        }
    }

    /// `T x`.
    pub fn apply(&self, xc: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.fine.size()];
        for (sc, &v) in xc.iter().enumerate() {
            self.targets(sc, |s| y[s] += v);
        }
        y
    }

    /// `Tᵀ x`.
    pub fn apply_transpose(&self, xf: &[f64]) -> Vec<f64> {
        (0..self.coarse.size())
            .map(|sc| {
                let mut acc = 0.0;
                self.targets(sc, |s| acc += xf[s]);
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.fine.size(), self.coarse.size());
        for sc in 0..self.coarse.size() {
            self.targets(sc, |s| m[(s, sc)] += 1.0);
        }
        m
    }
}

/// `p = c · P₀ · T`, with `P₀` the algebra matrix of the projector symbol and
/// `c = 2^{-d/2}` for τ, `1` otherwise.
#[derive(Debug, Clone)]
pub struct Prolongation {
    cut: CuttingOperator,
    scale: f64,
    stencil: Stencil,
    p0: BandMatrix,
}

impl Prolongation {
    pub fn new(algebra: Algebra, fine: GridShape, psym: &SymbolND) -> Result<Self> {
        if psym.dim() != fine.dim() {
            return Err(Error::InvalidDimension(psym.dim()));
        }
        let cut = CuttingOperator::new(algebra, fine)?;
        let stencil = Stencil::from_symbol(psym);
        let hb = stencil.half_bandwidth();
        for axis in 0..fine.dim() {
            let n = fine.dims()[axis];
            if hb[axis] >= n {
                return Err(Error::BandwidthTooLarge { axis, bandwidth: hb[axis], size: n });
            }
        }
        let scale = match algebra {
            Algebra::Tau => libm::pow(0.5, fine.dim() as f64 / 2.0),
            _ => 1.0,
        };
        let p0 = BandMatrix::from_stencil(&stencil, algebra, fine);
        Ok(Self { cut, scale, stencil, p0 })
    }

    pub fn algebra(&self) -> Algebra {
        self.cut.algebra
    }

    pub fn fine_shape(&self) -> GridShape {
        self.cut.fine
    }

    pub fn coarse_shape(&self) -> GridShape {
        self.cut.coarse
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cutting(&self) -> &CuttingOperator {
        &self.cut
    }

    /// `P₀` on the fine grid.
    pub fn projector_band(&self) -> &BandMatrix {
        &self.p0
    }

    /// `p x_c`.
    pub fn prolong(&self, xc: &[f64]) -> Vec<f64> {
        let t = self.cut.apply(xc);
        let mut y = vec![0.0; t.len()];
        self.p0.matvec_add(&t, &mut y);
        y.iter_mut().for_each(|v| *v *= self.scale);
        y
    }

    /// `pᵀ x_f`.
    pub fn restrict(&self, xf: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; xf.len()];
        self.p0.matvec_add(xf, &mut y);
        let mut r = self.cut.apply_transpose(&y);
        r.iter_mut().for_each(|v| *v *= self.scale);
        r
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = self.cut.fine.size();
        if n > DEFAULT_DENSE_CAP {
            return Err(Error::DenseCapExceeded { size: n, cap: DEFAULT_DENSE_CAP });
        }
        Ok(self.p0.to_dense().matmul(&self.cut.to_dense()).scaled(self.scale))
    }
}

/// `Tᵀ X T` for a fine band matrix `X`, in offset form.
fn select_band(x: &BandMatrix, cut: &CuttingOperator) -> BandMatrix {
    let (fine, coarse) = (cut.fine, cut.coarse);
    let periodic = x.is_periodic();
    let mut out = BandMatrix::zeros(coarse, periodic);
    let hb = x.half_bandwidth();
    // Per-axis (row shift, fine offset relative to 2O, weight) contributions.
    let rules: &[(usize, isize)] = match cut.algebra {
        Algebra::Tau => &[(1, 0)],
        Algebra::Circulant => &[(0, 0)],
        Algebra::Dct3 => &[(0, 0), (0, 1), (1, -1), (1, 0)],
    };
    let trivial: &[(usize, isize)] = &[(0, 0)];
    let axis_rules = |axis: usize| if axis == 1 && fine.dim() == 1 { trivial } else { rules };
    let mut candidates = BTreeSet::new();
    let bound = |axis: usize| if axis == 1 && fine.dim() == 1 { 0 } else { (hb[axis] as isize + 1) / 2 + 1 };
    for o1 in -bound(0)..=bound(0) {
        for o2 in -bound(1)..=bound(1) {
            candidates.insert(out.canonical([o1, o2]));
        }
    }
    let [c1, c2] = coarse.dims();
    let fine_n2 = fine.dims()[1];
    let scale_axis = |axis: usize| if axis == 1 && fine.dim() == 1 { 1 } else { 2 };
    let (m1, m2) = (scale_axis(0), scale_axis(1));
    for o in candidates {
        let mut acc = vec![0.0; coarse.size()];
        let mut touched = false;
        for &(a1, d1) in axis_rules(0) {
            for &(a2, d2) in axis_rules(1) {
                let fo = [m1 as isize * o[0] + d1, m2 as isize * o[1] + d2];
                let Some(diag) = x.diag(fo) else { continue };
                touched = true;
                for i in 0..c1 {
                    for j in 0..c2 {
                        let s = (m1 * i + a1) * fine_n2 + m2 * j + a2;
                        acc[i * c2 + j] += diag[s];
                    }
                }
            }
        }
        if touched {
            out.add_diagonal(o, &acc);
        }
    }
    out
}

/// Exact Galerkin product `pᵀ B p`, split into a coarse structured stencil,
/// a coarse band correction and the rank-one term `pᵀ v`.
pub fn galerkin_coarsen(op: &LevelOperator, p: &Prolongation) -> Result<LevelOperator> {
    if op.shape() != p.fine_shape() || op.algebra() != p.algebra() {
        return Err(Error::ShapeMismatch);
    }
    let algebra = op.algebra();
    let coarse = p.coarse_shape();
    let s2 = p.scale * p.scale;

    let x = p.p0.product(op.assembled())?.product(&p.p0)?;
    let exact = select_band(&x, &p.cut).scaled(s2);

    let symbol_level = p.stencil.convolve(op.stencil()).convolve(&p.stencil);
    let tiny = PRUNE_REL * symbol_level.abs_sum();
    let stencil = symbol_level.select_coarse(algebra, coarse.dim()).scaled(s2).pruned(tiny * s2);
    let structured = BandMatrix::from_stencil(&stencil, algebra, coarse);

    let mut correction = exact.sub(&structured)?;
    correction.prune(PRUNE_REL * exact.max_abs().max(f64::MIN_POSITIVE));
    let rank_one = op.rank_one().map(|v| p.restrict(v));
    LevelOperator::from_parts(algebra, coarse, stencil, correction, rank_one)
}

/// One grid of the chain.
#[derive(Debug, Clone)]
pub struct Level {
    pub op: LevelOperator,
    /// Prolongation from the next coarser level into this one, absent on the
    /// coarsest.
    pub prolongation: Option<Prolongation>,
    pub smoother: SmootherConfig,
    /// Spectral upper bound the relaxation parameters were derived from.
    pub bound: f64,
    pub(crate) csr: Option<CsrMatrix>,
}

/// Direct (or nested iterative) solver on the coarsest level.
#[derive(Debug, Clone)]
pub enum CoarseSolver {
    Dense(Cholesky),
    Band(BandCholesky),
    /// V-cycles iterated to a tight relative residual.
    Nested(Box<LevelHierarchy>, f64),
}

impl CoarseSolver {
    fn build(op: &LevelOperator, psym: &SymbolND, opts: &HierarchyOptions) -> Result<Self> {
        let n = op.size();
        if n <= opts.dense_coarse_cap {
            return Ok(CoarseSolver::Dense(Cholesky::factor(&op.materialize_dense_capped(n)?)?));
        }
        if !op.algebra().is_periodic() && op.rank_one().is_none() {
            return Ok(CoarseSolver::Band(BandCholesky::factor(n, &op.assembled().rows())?));
        }
        let inner = HierarchyOptions { mode: CycleMode::Vcycle, coarsest_cap: None, ..opts.clone() };
        let h = build_hierarchy(op.clone(), None, psym, &inner)?;
        Ok(CoarseSolver::Nested(Box::new(h), NESTED_TOL))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            CoarseSolver::Dense(c) => c.solve(b),
            CoarseSolver::Band(c) => {
                let mut x = b.to_vec();
                c.solve_in_place(&mut x);
                x
            }
            CoarseSolver::Nested(h, tol) => {
                let cfg = CycleConfig { tol: *tol, max_iter: 200, ..CycleConfig::default() };
                solve(h, b, &cfg).map(|(x, _)| x).unwrap_or_else(|_| vec![0.0; b.len()])
            }
        }
    }
}

const NESTED_TOL: f64 = 1e-13;

/// Knobs for [`build_hierarchy`].
#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    pub mode: CycleMode,
    /// Stop coarsening once `N ≤ cap`; defaults to `16^d`. Ignored by the
    /// two-grid mode, which always coarsens once.
    pub coarsest_cap: Option<usize>,
    pub smoother: SmootherKind,
    pub nu_pre: usize,
    pub nu_post: usize,
    pub omega_policy: OmegaPolicy,
    /// Largest coarsest level factored densely.
    pub dense_coarse_cap: usize,
    /// Multiplies the finest-level spectral bound before the relaxation
    /// parameters are derived from it.
    pub finest_bound_scale: f64,
    /// Same for every coarser level.
    pub coarse_bound_scale: f64,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            mode: CycleMode::Vcycle,
            coarsest_cap: None,
            smoother: SmootherKind::Richardson,
            nu_pre: 1,
            nu_post: 1,
            omega_policy: OmegaPolicy::PerLevelGershgorin,
            dense_coarse_cap: DEFAULT_DENSE_CAP,
            finest_bound_scale: 1.0,
            coarse_bound_scale: 1.0,
        }
    }
}

impl HierarchyOptions {
    pub fn two_grid() -> Self {
        Self { mode: CycleMode::Tgm, ..Self::default() }
    }

    pub fn v_cycle() -> Self {
        Self::default()
    }
}

/// Precomputed level chain from the finest to the coarsest grid.
#[derive(Debug, Clone)]
pub struct LevelHierarchy {
    levels: Vec<Level>,
    coarse_solver: CoarseSolver,
    mode: CycleMode,
}

impl LevelHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, s: usize) -> &Level {
        &self.levels[s]
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &LevelOperator {
        &self.levels[0].op
    }

    pub fn mode(&self) -> CycleMode {
        self.mode
    }

    pub fn coarse_solver(&self) -> &CoarseSolver {
        &self.coarse_solver
    }

    /// Per-level unknown counts, finest first.
    pub fn ladder(&self) -> Vec<GridShape> {
        self.levels.iter().map(|l| l.op.shape()).collect()
    }
}

/// Builds the chain `B₀, B₁ = p₀ᵀ B₀ p₀, …` down to the coarsest level.
///
/// `fsym` is the generating function of the finest structured part; its
/// sup norm enters the finest-level relaxation parameters. Without it every
/// level uses its Gershgorin bound.
pub fn build_hierarchy(
    fine_op: LevelOperator,
    fsym: Option<&SymbolND>,
    psym: &SymbolND,
    opts: &HierarchyOptions,
) -> Result<LevelHierarchy> {
    let d = fine_op.shape().dim();
    let cap = opts.coarsest_cap.unwrap_or(16usize.pow(d as u32));
    let algebra = fine_op.algebra();

    let mut ops = vec![fine_op];
    let mut prolongations = Vec::new();
    loop {
        let cur = ops.last().expect("nonempty");
        let done = match opts.mode {
            CycleMode::Tgm => ops.len() == 2,
            CycleMode::Vcycle => cur.size() <= cap,
        };
        if done {
            break;
        }
        let p = match Prolongation::new(algebra, cur.shape(), psym) {
            Ok(p) => p,
            Err(Error::Parity { size, .. }) => return Err(Error::LadderBreaks { size }),
            Err(e) => return Err(e),
        };
        let next = galerkin_coarsen(cur, &p)?;
        prolongations.push(p);
        ops.push(next);
    }

    let finest_params = level_smoother_params(&ops[0], fsym);
    let mut levels = Vec::with_capacity(ops.len());
    let mut prolongations = prolongations.into_iter();
    for (s, op) in ops.into_iter().enumerate() {
        let params = match (s, opts.omega_policy) {
            (0, _) => finest_params.scaled(opts.finest_bound_scale),
            (_, OmegaPolicy::FinestFixed) => finest_params.scaled(opts.coarse_bound_scale),
            (_, OmegaPolicy::PerLevelGershgorin) => level_smoother_params(&op, None).scaled(opts.coarse_bound_scale),
        };
        let smoother = SmootherConfig {
            kind: opts.smoother,
            omega_pre: params.omega_pre,
            omega_post: params.omega_post,
            nu_pre: opts.nu_pre,
            nu_post: opts.nu_post,
        };
        let csr = matches!(opts.smoother, SmootherKind::GaussSeidelPost).then(|| op.to_csr());
        levels.push(Level { op, prolongation: prolongations.next(), smoother, bound: params.bound, csr });
    }
    let coarse_solver = CoarseSolver::build(&levels.last().expect("nonempty").op, psym, opts)?;
    Ok(LevelHierarchy { levels, coarse_solver, mode: opts.mode })
}

/// Smallest `ϑ` with `A ≤ ϑ B`: the largest eigenvalue of the pencil
/// `(A, B)`. Fails with [`Error::NotPositiveDefinite`] when `B` is not SPD.
pub fn check_order_relation(a: &LevelOperator, b: &LevelOperator) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch);
    }
    let ev = generalized_eigenvalues(&a.materialize_dense()?, &b.materialize_dense()?)?;
    Ok(ev.last().copied().unwrap_or(0.0))
}
