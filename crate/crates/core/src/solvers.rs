//! Smoothers, the two-grid method, the V-cycle and a CG baseline.

use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::hierarchy::LevelHierarchy;
use crate::operators::{CsrMatrix, LevelOperator};
use crate::symbols::SymbolND;
use crate::{dot, norm2, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmootherKind {
    /// `x ← x + ω (b − B x)` in both phases.
    Richardson,
    /// Richardson pre-smoothing, forward Gauss-Seidel post-smoothing.
    GaussSeidelPost,
}

/// Where coarse-level relaxation parameters come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OmegaPolicy {
    /// Each level uses its own Gershgorin bound.
    PerLevelGershgorin,
    /// Every level reuses the finest-level parameters.
    FinestFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleMode {
    /// One coarsening, exact coarse solve.
    Tgm,
    /// Recursive V-cycle down to the coarsest cap.
    Vcycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    pub kind: SmootherKind,
    pub omega_pre: f64,
    pub omega_post: f64,
    pub nu_pre: usize,
    pub nu_post: usize,
}

impl SmootherConfig {
    /// Richardson with one step per phase.
    pub fn richardson(omega_pre: f64, omega_post: f64) -> Self {
        Self { kind: SmootherKind::Richardson, omega_pre, omega_post, nu_pre: 1, nu_post: 1 }
    }
}

/// Relaxation parameters of one level and the spectral bound behind them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSmootherParams {
    pub bound: f64,
    pub omega_pre: f64,
    pub omega_post: f64,
}

impl LevelSmootherParams {
    /// Parameters for the bound `c M`.
    pub fn scaled(self, c: f64) -> Self {
        let bound = self.bound * c;
        Self { bound, omega_pre: 0.5 / bound, omega_post: 1.0 / bound }
    }
}

/// `ω_pre = 1/(2M)`, `ω_post = 1/M`. With a symbol, `M = ‖f‖_∞ + ‖D‖_∞`;
/// without one, `M` is the Gershgorin bound of the assembled operator.
pub fn level_smoother_params(op: &LevelOperator, sym: Option<&SymbolND>) -> LevelSmootherParams {
    let bound = match sym {
        Some(f) => f.sup_norm() + op.correction_norm_inf(),
        None => op.gershgorin_bound(),
    };
    LevelSmootherParams { bound, omega_pre: 0.5 / bound, omega_post: 1.0 / bound }
}

/// Cycle-level settings shared by every level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    /// Extra smoothing steps per level of depth: `ν_s = ν_0 + s ρ`.
    pub rho: usize,
    /// Apply the ρ increment to post-smoothing only.
    pub rho_post_only: bool,
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self { rho: 0, rho_post_only: false, tol: 1e-7, max_iter: 1000 }
    }
}

impl CycleConfig {
    /// Smoothing counts at depth `s`. A phase switched off at the base stays
    /// off.
    pub fn steps(&self, base: &SmootherConfig, s: usize) -> (usize, usize) {
        let inc = s * self.rho;
        let pre = if base.nu_pre == 0 || self.rho_post_only { base.nu_pre } else { base.nu_pre + inc };
        let post = if base.nu_post == 0 { 0 } else { base.nu_post + inc };
        (pre, post)
    }
}

/// Which iteration produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Tgm,
    Vcycle,
    Cg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b − B x_k‖₂` for `k = 0, 1, …`, starting from `x_0 = 0`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Filled in by callers that can read a clock.
    pub wall_time: Option<Duration>,
    pub method: Method,
    pub levels: usize,
    pub cycle: CycleConfig,
}

impl SolveReport {
    /// Final relative residual.
    pub fn relative_residual(&self) -> f64 {
        let r0 = self.residual_history[0];
        let last = *self.residual_history.last().expect("history starts with r0");
        if r0 == 0.0 {
            0.0
        } else {
            last / r0
        }
    }
}

/// `ν` Richardson steps with parameter `ω`.
fn richardson(op: &LevelOperator, x: &mut [f64], b: &[f64], omega: f64, nu: usize, r: &mut [f64]) {
    for _ in 0..nu {
        op.residual(x, b, r);
        for (xi, ri) in x.iter_mut().zip(r.iter()) {
            *xi += omega * ri;
        }
    }
}

/// `ν` forward Gauss-Seidel sweeps over `S + D + v vᵀ`.
fn gauss_seidel(csr: &CsrMatrix, rank_one: Option<&[f64]>, x: &mut [f64], b: &[f64], nu: usize) {
    for _ in 0..nu {
        let mut vx = rank_one.map_or(0.0, |v| dot(v, x));
        for i in 0..csr.nrows() {
            let (mut diag, mut off) = (0.0, 0.0);
            for (j, a) in csr.row(i) {
                if j == i {
                    diag += a;
                } else {
                    off += a * x[j];
                }
            }
            let old = x[i];
            if let Some(v) = rank_one {
                diag += v[i] * v[i];
                off += v[i] * (vx - v[i] * old);
            }
            x[i] = (b[i] - off) / diag;
            if let Some(v) = rank_one {
                vx += v[i] * (x[i] - old);
            }
        }
    }
}

fn smooth_with(
    op: &LevelOperator,
    csr: Option<&CsrMatrix>,
    cfg: &SmootherConfig,
    phase: Phase,
    nu: usize,
    x: &mut [f64],
    b: &[f64],
) {
    if nu == 0 {
        return;
    }
    match (phase, cfg.kind) {
        (Phase::Post, SmootherKind::GaussSeidelPost) => match csr {
            Some(c) => gauss_seidel(c, op.rank_one(), x, b, nu),
            None => gauss_seidel(&op.to_csr(), op.rank_one(), x, b, nu),
        },
        (Phase::Pre, _) => richardson(op, x, b, cfg.omega_pre, nu, &mut vec![0.0; x.len()]),
        (Phase::Post, SmootherKind::Richardson) => {
            richardson(op, x, b, cfg.omega_post, nu, &mut vec![0.0; x.len()])
        }
    }
}

/// Applies the phase's smoother `ν` times (`cfg.nu_pre` or `cfg.nu_post`).
pub fn smooth(op: &LevelOperator, x: &[f64], b: &[f64], cfg: &SmootherConfig, phase: Phase) -> Result<Vec<f64>> {
    check_len(op.size(), x.len())?;
    check_len(op.size(), b.len())?;
    let nu = match phase {
        Phase::Pre => cfg.nu_pre,
        Phase::Post => cfg.nu_post,
    };
    let mut y = x.to_vec();
    smooth_with(op, None, cfg, phase, nu, &mut y, b);
    Ok(y)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

/// One two-grid sweep: pre-smooth, restrict the residual, solve exactly on
/// the coarse grid, correct, post-smooth.
pub fn tgm_iterate(h: &LevelHierarchy, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    mgm_vcycle(h, 0, x, b, &CycleConfig::default())
}

/// One V-cycle started at level `s`; on the coarsest level it solves
/// directly.
pub fn mgm_vcycle(h: &LevelHierarchy, s: usize, x: &[f64], b: &[f64], cfg: &CycleConfig) -> Result<Vec<f64>> {
    if s >= h.num_levels() {
        return Err(Error::ShapeMismatch);
    }
    check_len(h.level(s).op.size(), x.len())?;
    check_len(h.level(s).op.size(), b.len())?;
    let mut y = x.to_vec();
    vcycle(h, s, &mut y, b, cfg);
    Ok(y)
}

fn vcycle(h: &LevelHierarchy, s: usize, x: &mut [f64], b: &[f64], cfg: &CycleConfig) {
    let level = h.level(s);
    if s + 1 == h.num_levels() {
        let y = h.coarse_solver().solve(b);
        x.copy_from_slice(&y);
        return;
    }
    let (pre, post) = cfg.steps(&level.smoother, s);
    let op = &level.op;
    smooth_with(op, level.csr.as_ref(), &level.smoother, Phase::Pre, pre, x, b);

    let mut r = vec![0.0; x.len()];
    op.residual(x, b, &mut r);
    let p = level.prolongation.as_ref().expect("non-coarsest levels carry a prolongation");
    let rc = p.restrict(&r);
    let mut ec = vec![0.0; rc.len()];
    vcycle(h, s + 1, &mut ec, &rc, cfg);
    for (xi, ei) in x.iter_mut().zip(p.prolong(&ec)) {
        *xi += ei;
    }

    smooth_with(op, level.csr.as_ref(), &level.smoother, Phase::Post, post, x, b);
}

/// Iterates cycles from `x = 0` until `‖b − B x‖₂ / ‖b‖₂ < tol` or
/// `max_iter`. Non-convergence is reported, not raised.
pub fn solve(h: &LevelHierarchy, b: &[f64], cfg: &CycleConfig) -> Result<(Vec<f64>, SolveReport)> {
    let op = h.finest();
    check_len(op.size(), b.len())?;
    let method = if h.num_levels() == 2 && h.mode() == CycleMode::Tgm { Method::Tgm } else { Method::Vcycle };
    let mut x = vec![0.0; b.len()];
    let mut r = vec![0.0; b.len()];
    let r0 = norm2(b);
    let mut history = vec![r0];
    let mut converged = r0 == 0.0;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iter {
        vcycle(h, 0, &mut x, b, cfg);
        iterations += 1;
        op.residual(&x, b, &mut r);
        let rn = norm2(&r);
        history.push(rn);
        if !rn.is_finite() {
            break;
        }
        converged = rn / r0 < cfg.tol;
    }
    let report = SolveReport {
        iterations,
        residual_history: history,
        converged,
        wall_time: None,
        method,
        levels: h.num_levels(),
        cycle: *cfg,
    };
    Ok((x, report))
}

/// Conjugate gradients from `x = 0` with the same stopping rule as
/// [`solve`]. A non-positive curvature `pᵀ B p ≤ 0` raises
/// [`Error::Breakdown`].
pub fn cg_solve(op: &LevelOperator, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveReport)> {
    check_len(op.size(), b.len())?;
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let r0 = norm2(b);
    let mut rr = r0 * r0;
    let mut history = vec![r0];
    let mut converged = r0 == 0.0;
    let mut iterations = 0;
    while !converged && iterations < max_iter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Breakdown);
        }
        let alpha = rr / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rr_new = dot(&r, &r);
        iterations += 1;
        history.push(libm::sqrt(rr_new));
        converged = libm::sqrt(rr_new) / r0 < tol;
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    let report = SolveReport {
        iterations,
        residual_history: history,
        converged,
        wall_time: None,
        method: Method::Cg,
        levels: 1,
        cycle: CycleConfig { tol, max_iter, ..CycleConfig::default() },
    };
    Ok((x, report))
}
