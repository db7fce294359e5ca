//! Dense certification of the two-grid convergence constants and condition
//! number estimates.
//!
//! With weighting `X = I`, for `B = Bᵀ > 0`, Richardson smoothers
//! `V = I − ωB` and the coarse grid correction `C = I − p (pᵀBp)⁻¹ pᵀ B`:
//!
//! - smoothing: `‖V x‖²_B ≤ ‖x‖²_B − α_post ‖B x‖²` (post) and
//!   `‖V x‖²_B ≤ ‖x‖²_B − α_pre ‖B V x‖²` (pre);
//! - approximation: `min_y ‖x − p y‖² ≤ β ‖x‖²_B` (range form) or
//!   `‖C x‖²_B ≤ β ‖B x‖²` (unconditional form);
//! - then `‖V_post C‖_B ≤ √(1 − α_post/β)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{generalized_eigenvalues, symmetric_eigenvalues, Cholesky, DenseMatrix};
use crate::hierarchy::{build_hierarchy, HierarchyOptions, LevelHierarchy, Prolongation};
use crate::operators::LevelOperator;
use crate::solvers::{mgm_vcycle, solve, CycleConfig, CycleMode};
use crate::symbols::SymbolND;
use crate::{dot, norm2, Error, Result};

/// Explicit smoothing constants for Richardson with spectral bound `M`:
/// `α_post = ω(2 − ωM)`; `α_pre = 2ω` for `ω ≤ 3/(2M)`, otherwise
/// `ω(2 − ωM)/(1 − ωM)²`.
pub fn alpha_formulas(omega_pre: f64, omega_post: f64, m: f64) -> Result<(f64, f64)> {
    let bound = 2.0 / m;
    for w in [omega_pre, omega_post] {
        if !(w > 0.0 && w < bound) {
            return Err(Error::OmegaOutOfRange { omega: w, bound });
        }
    }
    let post = omega_post * (2.0 - omega_post * m);
    let pre = if omega_pre <= 1.5 / m {
        2.0 * omega_pre
    } else {
        let t = 1.0 - omega_pre * m;
        omega_pre * (2.0 - omega_pre * m) / (t * t)
    };
    Ok((pre, post))
}

fn b_norm2(b: &DenseMatrix, x: &[f64]) -> f64 {
    dot(x, &b.matvec(x))
}

fn richardson_step(b: &DenseMatrix, x: &[f64], omega: f64) -> Vec<f64> {
    let bx = b.matvec(x);
    x.iter().zip(&bx).map(|(xi, bi)| xi - omega * bi).collect()
}

/// Relative slacks `(pre, post)` of the two smoothing inequalities at `x`,
/// each normalized by `‖x‖²_B`. Nonnegative means the inequality holds.
pub fn smoothing_slacks(
    b: &DenseMatrix,
    x: &[f64],
    omega: (f64, f64),
    alpha: (f64, f64),
) -> (f64, f64) {
    let xb = b_norm2(b, x);
    let vpre = richardson_step(b, x, omega.0);
    let bvpre = b.matvec(&vpre);
    let pre = xb - alpha.0 * dot(&bvpre, &bvpre) - b_norm2(b, &vpre);
    let vpost = richardson_step(b, x, omega.1);
    let bx = b.matvec(x);
    let post = xb - alpha.1 * dot(&bx, &bx) - b_norm2(b, &vpost);
    (pre / xb, post / xb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingCheck {
    pub alpha_pre: f64,
    pub alpha_post: f64,
    /// Smallest relative slack over the samples (negative = violated).
    pub worst_pre_slack: f64,
    pub worst_post_slack: f64,
    /// `0 < ω < 2/M` for both phases and `M ≥ λ_max(B)`.
    pub premise_ok: bool,
}

impl SmoothingCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.premise_ok && self.worst_pre_slack >= -tol && self.worst_post_slack >= -tol
    }
}

fn random_vectors(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect()
}

/// Checks both smoothing inequalities on `samples` random vectors for the
/// Richardson parameters of `omega` with spectral bound `m`.
pub fn verify_smoothing_property(
    op: &LevelOperator,
    omega: (f64, f64),
    m: f64,
    samples: usize,
    seed: u64,
) -> Result<SmoothingCheck> {
    let b = op.materialize_dense()?;
    let lmax = symmetric_eigenvalues(&b).last().copied().unwrap_or(0.0);
    let (alpha, premise_ok) = match alpha_formulas(omega.0, omega.1, m) {
        Ok(a) => (a, m >= lmax * (1.0 - 1e-12)),
        // Outside the admissible range: fall back to the raw expressions so the
        // slacks still show how the inequality fails.
        Err(_) => ((2.0 * omega.0, omega.1 * (2.0 - omega.1 * m)), false),
    };
    let mut check = SmoothingCheck {
        alpha_pre: alpha.0,
        alpha_post: alpha.1,
        worst_pre_slack: f64::INFINITY,
        worst_post_slack: f64::INFINITY,
        premise_ok,
    };
    for x in random_vectors(op.size(), samples, seed) {
        let (pre, post) = smoothing_slacks(&b, &x, omega, alpha);
        check.worst_pre_slack = check.worst_pre_slack.min(pre);
        check.worst_post_slack = check.worst_post_slack.min(post);
    }
    if !premise_ok {
        check.worst_post_slack = check.worst_post_slack.min(-f64::EPSILON);
    }
    Ok(check)
}

/// Which approximation inequality [`estimate_beta`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    /// `min_y ‖x − p y‖² ≤ β ‖x‖²_B`.
    RangeCgc,
    /// `‖C x‖²_B ≤ β ‖B x‖²`.
    Unconditional,
}

/// Dense coarse grid correction `C = I − p (pᵀBp)⁻¹ pᵀ B`.
pub fn coarse_grid_correction(op: &LevelOperator, p: &Prolongation) -> Result<DenseMatrix> {
    let b = op.materialize_dense()?;
    let pd = p.to_dense()?;
    let pt = pd.transpose();
    let coarse = Cholesky::factor(&pt.matmul(&b).matmul(&pd))?;
    let ptb = pt.matmul(&b);
    let cols: Vec<Vec<f64>> = (0..b.cols()).map(|j| coarse.solve(&ptb.column(j))).collect();
    let y = DenseMatrix::from_columns(pd.cols(), &cols);
    Ok(DenseMatrix::identity(b.rows()).sub(&pd.matmul(&y)))
}

/// Smallest `β` for the chosen approximation inequality, by a dense
/// generalized eigenproblem.
pub fn estimate_beta(op: &LevelOperator, p: &Prolongation, mode: BetaMode) -> Result<f64> {
    if op.shape() != p.fine_shape() {
        return Err(Error::ShapeMismatch);
    }
    let b = op.materialize_dense()?;
    let pd = p.to_dense()?;
    let n = b.rows();
    let top = match mode {
        BetaMode::RangeCgc => {
            // I − p (pᵀp)⁻¹ pᵀ
            let pt = pd.transpose();
            let gram = Cholesky::factor(&pt.matmul(&pd))?;
            let cols: Vec<Vec<f64>> = (0..n).map(|j| gram.solve(&pt.column(j))).collect();
            let proj = pd.matmul(&DenseMatrix::from_columns(pd.cols(), &cols));
            let q = DenseMatrix::identity(n).sub(&proj);
            generalized_eigenvalues(&q, &b)?
        }
        BetaMode::Unconditional => {
            // sup ‖C x‖²_B / ‖Bx‖² = λ_max(B⁻¹ − p (pᵀBp)⁻¹ pᵀ)
            let chol = Cholesky::factor(&b)?;
            let binv = DenseMatrix::from_columns(n, &(0..n).map(|j| chol.solve(&DenseMatrix::identity(n).column(j))).collect::<Vec<_>>());
            let pt = pd.transpose();
            let coarse = Cholesky::factor(&pt.matmul(&b).matmul(&pd))?;
            let cols: Vec<Vec<f64>> = (0..n).map(|j| coarse.solve(&pt.column(j))).collect();
            let g = binv.sub(&pd.matmul(&DenseMatrix::from_columns(pd.cols(), &cols)));
            let g = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
            symmetric_eigenvalues(&g)
        }
    };
    Ok(top.last().copied().unwrap_or(0.0).max(0.0))
}

/// Error propagation matrix of one cycle, built column by column from cycles
/// on `b = 0`.
pub fn iteration_matrix(h: &LevelHierarchy, cfg: &CycleConfig) -> Result<DenseMatrix> {
    let n = h.finest().size();
    if n > crate::operators::DEFAULT_DENSE_CAP {
        return Err(Error::DenseCapExceeded { size: n, cap: crate::operators::DEFAULT_DENSE_CAP });
    }
    let zero = vec![0.0; n];
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(mgm_vcycle(h, 0, &e, &zero, cfg)?);
    }
    Ok(DenseMatrix::from_columns(n, &cols))
}

/// `‖E‖_B = max ‖E x‖_B / ‖x‖_B`.
pub fn energy_norm(b: &DenseMatrix, e: &DenseMatrix) -> Result<f64> {
    let ebe = e.transpose().matmul(b).matmul(e);
    let ebe = DenseMatrix::from_fn(ebe.rows(), ebe.cols(), |i, j| 0.5 * (ebe[(i, j)] + ebe[(j, i)]));
    let ev = generalized_eigenvalues(&ebe, b)?;
    Ok(libm::sqrt(ev.last().copied().unwrap_or(0.0).max(0.0)))
}

/// Energy norm of one cycle's error propagator.
pub fn measure_contraction(h: &LevelHierarchy) -> Result<f64> {
    let e = iteration_matrix(h, &CycleConfig::default())?;
    energy_norm(&h.finest().materialize_dense()?, &e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaTransfer {
    pub theta: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub holds: bool,
}

/// `A ≤ ϑB` carries the range-form constant over: `β_B ≤ ϑ β_A`.
pub fn verify_beta_transfer(
    a: &LevelOperator,
    b: &LevelOperator,
    p: &Prolongation,
    tol: f64,
) -> Result<BetaTransfer> {
    let theta = crate::hierarchy::check_order_relation(a, b)?;
    let beta_a = estimate_beta(a, p, BetaMode::RangeCgc)?;
    let beta_b = estimate_beta(b, p, BetaMode::RangeCgc)?;
    let holds = beta_b <= theta * beta_a + tol * beta_b.max(1.0);
    Ok(BetaTransfer { theta, beta_a, beta_b, holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck {
    /// `max ‖V_post C x‖²_B / ‖x‖²_B` over samples.
    pub post_ratio: f64,
    /// `1 − α_post/β` (range form).
    pub post_factor: f64,
    /// `max ‖C V_pre x‖²_B / ‖x‖²_B` over samples.
    pub pre_ratio: f64,
    /// `(1 + α_pre/β)⁻¹` (unconditional form).
    pub pre_factor: f64,
}

impl ChainCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.post_ratio <= self.post_factor + tol && self.pre_ratio <= self.pre_factor + tol
    }
}

/// Samples the two energy chains behind the two-grid bounds.
#[allow(clippy::too_many_arguments)]
pub fn check_norm_chains(
    op: &LevelOperator,
    p: &Prolongation,
    omega: (f64, f64),
    alpha: (f64, f64),
    beta_range: f64,
    beta_unconditional: f64,
    samples: usize,
    seed: u64,
) -> Result<ChainCheck> {
    let b = op.materialize_dense()?;
    let c = coarse_grid_correction(op, p)?;
    let mut check = ChainCheck {
        post_ratio: 0.0,
        post_factor: 1.0 - alpha.1 / beta_range,
        pre_ratio: 0.0,
        pre_factor: 1.0 / (1.0 + alpha.0 / beta_unconditional),
    };
    for x in random_vectors(op.size(), samples, seed) {
        let xb = b_norm2(&b, &x);
        let vc = richardson_step(&b, &c.matvec(&x), omega.1);
        check.post_ratio = check.post_ratio.max(b_norm2(&b, &vc) / xb);
        let cv = c.matvec(&richardson_step(&b, &x, omega.0));
        check.pre_ratio = check.pre_ratio.max(b_norm2(&b, &cv) / xb);
    }
    Ok(check)
}

/// All two-grid constants for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCertificate {
    pub n: usize,
    pub m: f64,
    pub omega_pre: f64,
    pub omega_post: f64,
    pub alpha_pre: f64,
    pub alpha_post: f64,
    /// Range-form constant.
    pub beta: f64,
    pub beta_unconditional: f64,
    pub theta: f64,
    pub beta_structured: f64,
    /// `√(1 − α_post/β)`.
    pub bound: f64,
    /// `√((1 − α_post/β)/(1 + α_pre/β_unconditional))`.
    pub bound_pre_post: f64,
    /// Energy norm of the post-smoothing-only two-grid propagator.
    pub measured_contraction: f64,
    /// Same with one pre-smoothing step added.
    pub measured_contraction_pre_post: f64,
    pub smoothing: SmoothingCheck,
    pub chains: ChainCheck,
    pub transfer_holds: bool,
}

impl TheoryCertificate {
    /// Every assertion of the two-grid theory, with `tol` on the contraction
    /// bounds.
    pub fn passes(&self, tol: f64) -> bool {
        self.beta >= self.alpha_post
            && self.bound > 0.0
            && self.bound < 1.0
            && self.measured_contraction <= self.bound + tol
            && self.measured_contraction_pre_post <= self.bound_pre_post + tol
            && self.smoothing.holds(1e-12)
            && self.chains.holds(1e-10)
            && self.transfer_holds
    }
}

/// Certifies the two-grid method for `B` with structured reference `A ≤ ϑB`.
///
/// `fsym` fixes the finest spectral bound `M = ‖f‖_∞ + ‖D‖_∞`, so
/// `ω_pre = 1/(2M)` and `ω_post = 1/M`.
pub fn certify_two_grid(
    a: &LevelOperator,
    b: &LevelOperator,
    fsym: &SymbolND,
    psym: &SymbolND,
    samples: usize,
    seed: u64,
) -> Result<TheoryCertificate> {
    let post_only = HierarchyOptions { nu_pre: 0, ..HierarchyOptions::two_grid() };
    let h_post = build_hierarchy(b.clone(), Some(fsym), psym, &post_only)?;
    let h_full = build_hierarchy(b.clone(), Some(fsym), psym, &HierarchyOptions::two_grid())?;
    let level = h_full.level(0);
    let (m, omega) = (level.bound, (level.smoother.omega_pre, level.smoother.omega_post));
    let p = h_full.level(0).prolongation.as_ref().ok_or(Error::ShapeMismatch)?;

    let (alpha_pre, alpha_post) = alpha_formulas(omega.0, omega.1, m)?;
    let beta = estimate_beta(b, p, BetaMode::RangeCgc)?;
    let beta_unconditional = estimate_beta(b, p, BetaMode::Unconditional)?;
    let transfer = verify_beta_transfer(a, b, p, 1e-10)?;
    let bound = libm::sqrt((1.0 - alpha_post / beta).max(0.0));
    let bound_pre_post = libm::sqrt((1.0 - alpha_post / beta).max(0.0) / (1.0 + alpha_pre / beta_unconditional));

    Ok(TheoryCertificate {
        n: b.size(),
        m,
        omega_pre: omega.0,
        omega_post: omega.1,
        alpha_pre,
        alpha_post,
        beta,
        beta_unconditional,
        theta: transfer.theta,
        beta_structured: transfer.beta_a,
        bound,
        bound_pre_post,
        measured_contraction: measure_contraction(&h_post)?,
        measured_contraction_pre_post: measure_contraction(&h_full)?,
        smoothing: verify_smoothing_property(b, omega, m, samples, seed)?,
        chains: check_norm_chains(b, p, omega, (alpha_pre, alpha_post), beta, beta_unconditional, samples, seed ^ 0x9e37)?,
        transfer_holds: transfer.holds,
    })
}

/// How [`condition_number`] obtains the extreme eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    Dense,
    /// Lanczos on `B` for `λ_max` and on `B⁻¹` (V-cycle solves) for `λ_min`.
    Iterative,
    /// Dense up to [`DENSE_CONDITION_LIMIT`] unknowns.
    Auto,
}

/// Largest size [`ConditionMethod::Auto`] treats densely.
pub const DENSE_CONDITION_LIMIT: usize = 1024;

/// Stopping threshold on the relative change of the extreme Ritz value.
const LANCZOS_TOL: f64 = 1e-10;

/// Relative residual of the inner solves behind `B⁻¹`.
const INNER_TOL: f64 = 1e-12;

/// Euclidean condition number `λ_max / λ_min` of an SPD operator.
pub fn condition_number(op: &LevelOperator, method: ConditionMethod, psym: &SymbolND) -> Result<f64> {
    let dense = match method {
        ConditionMethod::Dense => true,
        ConditionMethod::Iterative => false,
        ConditionMethod::Auto => op.size() <= DENSE_CONDITION_LIMIT,
    };
    let (lo, hi) = if dense {
        let ev = symmetric_eigenvalues(&op.materialize_dense()?);
        (ev[0], ev[ev.len() - 1])
    } else {
        (smallest_eigenvalue(op, psym)?, largest_eigenvalue(op)?)
    };
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(hi / lo)
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.5).collect();
    let s = norm2(&x);
    x.iter_mut().for_each(|v| *v /= s);
    x
}

/// Largest eigenvalue of the symmetric map `apply` by Lanczos with full
/// reorthogonalization. Stops once the top Ritz value moves by less than
/// `tol` relative over a block of steps, or the Krylov space is exhausted.
fn lanczos_max(n: usize, tol: f64, mut apply: impl FnMut(&[f64], &mut [f64]) -> Result<()>) -> Result<f64> {
    const CHECK_EVERY: usize = 5;
    let max_steps = n.min(400);
    let mut basis: Vec<Vec<f64>> = vec![start_vector(n)];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; n];
    let mut last = f64::NAN;
    for k in 0..max_steps {
        apply(&basis[k], &mut w)?;
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = norm2(&w);
        let steps = k + 1;
        let exhausted = b <= 1e-12 * a.abs().max(1.0) || steps == max_steps;
        if steps % CHECK_EVERY == 0 || exhausted {
            let t = DenseMatrix::from_fn(steps, steps, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let top = *symmetric_eigenvalues(&t).last().expect("nonempty");
            if exhausted || ((top - last) / top).abs() < tol {
                return Ok(top);
            }
            last = top;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::NoConvergence)
}

/// `λ_max` by Lanczos on the operator.
pub fn largest_eigenvalue(op: &LevelOperator) -> Result<f64> {
    lanczos_max(op.size(), LANCZOS_TOL, |x, y| {
        op.apply(x, y);
        Ok(())
    })
}

/// `λ_min` as the reciprocal of Lanczos' `λ_max(B⁻¹)`, with `B⁻¹` applied by
/// V-cycles iterated to a tight residual.
pub fn smallest_eigenvalue(op: &LevelOperator, psym: &SymbolND) -> Result<f64> {
    let h = build_hierarchy(op.clone(), None, psym, &HierarchyOptions { mode: CycleMode::Vcycle, ..HierarchyOptions::default() })?;
    let cfg = CycleConfig { tol: INNER_TOL, max_iter: 500, ..CycleConfig::default() };
    let top = lanczos_max(op.size(), LANCZOS_TOL, |x, y| {
        let (z, rep) = solve(&h, x, &cfg)?;
        if !rep.converged {
            return Err(Error::NoConvergence);
        }
        y.copy_from_slice(&z);
        Ok(())
    })?;
    Ok(1.0 / top)
}
