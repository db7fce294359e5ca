//! Experiment grids laid out like the reference tables, and their runner.

use rayon::prelude::*;
use structmg_core::analysis::{condition_number, ConditionMethod, DENSE_CONDITION_LIMIT};
use structmg_core::solvers::OmegaPolicy;
use structmg_core::{Algebra, SmootherKind};

use crate::corrections::Family;
use crate::experiment::{build_system, cell_seed, run_cell, Cell, Solver, CALIBRATED_BOUND_SCALE};
use crate::report::{format_cond, format_iters, CondRecord, MarkdownTable, Record};

/// What one table column reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Iters { label: String, family: Family, solver: Solver, rho: usize },
    Cond { label: String, family: Family },
}

impl Column {
    fn iters(family: Family, solver: Solver, rho: usize, show_rho: bool) -> Self {
        let label = if show_rho { format!("{family} ρ={rho}") } else { family.to_string() };
        Column::Iters { label, family, solver, rho }
    }

    fn label(&self) -> &str {
        match self {
            Column::Iters { label, .. } | Column::Cond { label, .. } => label,
        }
    }
}

/// Sizes × columns for one operator family.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub title: String,
    pub algebra: Algebra,
    pub dim: usize,
    pub q: u32,
    pub w: u32,
    pub sizes: Vec<usize>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub title: String,
    pub blocks: Vec<Block>,
}

/// Settings shared by every cell of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub reps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub smoother: SmootherKind,
    pub rho_post_only: bool,
    pub bound_scale: f64,
    /// Largest per-axis size used in 2D.
    pub max_2d: usize,
    pub timings: bool,
    /// Replaces the Laplacian factor in every cell (see [`Cell::symbol`]).
    pub symbol: Option<Vec<f64>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            reps: 10,
            tol: 1e-7,
            max_iter: 1000,
            smoother: SmootherKind::Richardson,
            rho_post_only: false,
            bound_scale: CALIBRATED_BOUND_SCALE,
            max_2d: 511,
            timings: false,
            symbol: None,
        }
    }
}

pub fn ladder_sizes(algebra: Algebra) -> Vec<usize> {
    let off = usize::from(algebra == Algebra::Tau);
    (5..=9).map(|k| (1usize << k) - off).collect()
}

fn fams(ks: &[u8]) -> Vec<Family> {
    ks.iter().map(|&k| Family::new(k).expect("valid family")).collect()
}

fn dims_label(dim: usize) -> &'static str {
    if dim == 1 {
        "1D"
    } else {
        "2D"
    }
}

/// TGM columns `d0..d4`, then MGM with `d4` split over `ρ = 0` and `rho`.
fn tgm_mgm_blocks(algebra: Algebra, dim: usize, rho: usize, what: &str) -> Vec<Block> {
    let sizes = ladder_sizes(algebra);
    let tgm = fams(&[0, 1, 2, 3, 4]).into_iter().map(|f| Column::iters(f, Solver::Tgm, 0, false)).collect();
    let mut mgm: Vec<Column> = fams(&[0, 1, 2, 3]).into_iter().map(|f| Column::iters(f, Solver::Mgm, 0, false)).collect();
    mgm.push(Column::iters(Family::D4, Solver::Mgm, 0, true));
    mgm.push(Column::iters(Family::D4, Solver::Mgm, rho, true));
    let base = format!("{} {what} + diagonal, f = {}", dims_label(dim), laplacian_label(dim, 1));
    vec![
        Block { title: format!("{base}: TGM"), algebra, dim, q: 1, w: 1, sizes: sizes.clone(), columns: tgm },
        Block { title: format!("{base}: MGM"), algebra, dim, q: 1, w: 1, sizes, columns: mgm },
    ]
}

fn laplacian_label(dim: usize, q: u32) -> String {
    let one = if q == 1 { "(2 - 2cos t)".to_string() } else { format!("(2 - 2cos t)^{q}") };
    if dim == 1 {
        one
    } else {
        format!("{} + {}", one.replace('t', "t1"), one.replace('t', "t2"))
    }
}

fn cond_cg_block(dim: usize) -> Block {
    let mut columns = Vec::new();
    for f in fams(&[0, 1, 2, 3, 4]) {
        columns.push(Column::Cond { label: format!("{f} k2"), family: f });
        columns.push(Column::Iters { label: format!("{f} nit"), family: f, solver: Solver::Cg, rho: 0 });
    }
    Block {
        title: format!("{} tau Laplacian + diagonal: condition number and CG iterations", dims_label(dim)),
        algebra: Algebra::Tau,
        dim,
        q: 1,
        w: 1,
        sizes: ladder_sizes(Algebra::Tau),
        columns,
    }
}

fn random_block(dim: usize) -> Block {
    let mut columns = Vec::new();
    for f in fams(&[5, 6, 7, 8, 9, 10]) {
        columns.push(Column::Cond { label: format!("{f} k2"), family: f });
        columns.push(Column::Iters { label: format!("{f} nit"), family: f, solver: Solver::Mgm, rho: 0 });
    }
    Block {
        title: format!("{} tau Laplacian + random band: condition number and mean MGM iterations", dims_label(dim)),
        algebra: Algebra::Tau,
        dim,
        q: 1,
        w: 1,
        sizes: ladder_sizes(Algebra::Tau),
        columns,
    }
}

fn higher_order_block(algebra: Algebra, dim: usize, q: u32, w: u32, rho: usize) -> Block {
    let mut columns: Vec<Column> = fams(&[0, 1, 2, 3]).into_iter().map(|f| Column::iters(f, Solver::Mgm, 0, false)).collect();
    columns.push(Column::iters(Family::D4, Solver::Mgm, 0, true));
    columns.push(Column::iters(Family::D4, Solver::Mgm, rho, true));
    Block {
        title: format!(
            "{} {algebra} + diagonal, f = {}, q = {q}, w = {w}: MGM",
            dims_label(dim),
            laplacian_label(dim, q)
        ),
        algebra,
        dim,
        q,
        w,
        sizes: ladder_sizes(algebra),
        columns,
    }
}

/// The grid behind reference table `number` (1 to 8).
pub fn table_spec(number: u8) -> Result<TableSpec, String> {
    use Algebra::*;
    let (title, blocks) = match number {
        1 => ("Table 1: tau 1D, TGM and MGM iterations", tgm_mgm_blocks(Tau, 1, 1, "tau")),
        2 => ("Table 2: tau 2D, TGM and MGM iterations", tgm_mgm_blocks(Tau, 2, 1, "tau")),
        3 => ("Table 3: condition numbers and CG iterations", vec![cond_cg_block(1), cond_cg_block(2)]),
        4 => ("Table 4: random band corrections", vec![random_block(1), random_block(2)]),
        5 => {
            let mut b = tgm_mgm_blocks(Circulant, 1, 4, "circulant");
            b.extend(tgm_mgm_blocks(Dct3, 1, 2, "DCT-III"));
            ("Table 5: circulant and DCT-III 1D", b)
        }
        6 => {
            let mut b = tgm_mgm_blocks(Circulant, 2, 1, "circulant");
            b.extend(tgm_mgm_blocks(Dct3, 2, 1, "DCT-III"));
            ("Table 6: circulant and DCT-III 2D", b)
        }
        7 => (
            "Table 7: tau, higher order",
            vec![
                higher_order_block(Tau, 1, 2, 1, 4),
                higher_order_block(Tau, 1, 2, 2, 2),
                higher_order_block(Tau, 1, 3, 2, 1),
                higher_order_block(Tau, 1, 3, 3, 1),
                higher_order_block(Tau, 2, 2, 1, 2),
                higher_order_block(Tau, 2, 2, 2, 2),
                higher_order_block(Tau, 2, 3, 2, 2),
                higher_order_block(Tau, 2, 3, 3, 2),
            ],
        ),
        8 => (
            "Table 8: circulant, higher order",
            vec![
                higher_order_block(Circulant, 1, 2, 1, 4),
                higher_order_block(Circulant, 1, 2, 2, 4),
                higher_order_block(Circulant, 1, 3, 2, 4),
                higher_order_block(Circulant, 1, 3, 3, 4),
                higher_order_block(Circulant, 2, 2, 1, 2),
                higher_order_block(Circulant, 2, 2, 2, 1),
                higher_order_block(Circulant, 2, 3, 2, 1),
                higher_order_block(Circulant, 2, 3, 3, 1),
            ],
        ),
        _ => return Err(format!("no table {number}; tables 1 to 8 are available")),
    };
    Ok(TableSpec { title: title.to_string(), blocks })
}

/// A single block from explicit lists, one column per (solver, family, ρ).
#[allow(clippy::too_many_arguments)]
pub fn custom_spec(
    algebra: Algebra,
    dim: usize,
    q: u32,
    w: u32,
    sizes: Vec<usize>,
    families: &[Family],
    solvers: &[Solver],
    rhos: &[usize],
) -> TableSpec {
    let mut columns = Vec::new();
    for &solver in solvers {
        for &family in families {
            let rs: &[usize] = if solver == Solver::Cg { &[0] } else { rhos };
            for &rho in rs {
                let label = if rs.len() > 1 { format!("{solver} {family} ρ={rho}") } else { format!("{solver} {family}") };
                columns.push(Column::Iters { label, family, solver, rho });
            }
        }
    }
    let title = format!("{} {algebra}, q = {q}, w = {w}", dims_label(dim));
    TableSpec { title: title.clone(), blocks: vec![Block { title, algebra, dim, q, w, sizes, columns }] }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOutput {
    pub markdown: String,
    pub records: Vec<Record>,
    pub conds: Vec<CondRecord>,
}

enum Job {
    Iters(Cell, u64),
    Cond(Cell, u64),
}

enum Outcome {
    Iters(crate::experiment::CellResult),
    Cond(f64, &'static str),
}

fn size_label(n: usize, dim: usize) -> String {
    if dim == 1 {
        n.to_string()
    } else {
        format!("{n}^2")
    }
}

/// Runs every cell (in parallel) and lays the results out.
pub fn run_table(spec: &TableSpec, opts: &RunOptions) -> structmg_core::Result<TableOutput> {
    let mut jobs = Vec::new();
    let mut layout = Vec::new();
    for block in &spec.blocks {
        let sizes: Vec<usize> =
            block.sizes.iter().copied().filter(|&n| block.dim == 1 || n <= opts.max_2d + 1).collect();
        layout.push(sizes.clone());
        for &n in &sizes {
            for col in &block.columns {
                let index = jobs.len() as u64;
                let family = match col {
                    Column::Iters { family, .. } | Column::Cond { family, .. } => *family,
                };
                let mut cell = Cell::new(block.algebra, block.dim, n, family, Solver::Cg).with_order(block.q, block.w);
                cell.seed = opts.seed;
                cell.reps = opts.reps;
                cell.tol = opts.tol;
                cell.max_iter = opts.max_iter;
                cell.smoother = opts.smoother;
                cell.rho_post_only = opts.rho_post_only;
                cell.bound_scale = opts.bound_scale;
                cell.omega_policy = OmegaPolicy::PerLevelGershgorin;
                cell.symbol = opts.symbol.clone();
                jobs.push(match col {
                    Column::Iters { solver, rho, .. } => Job::Iters(Cell { solver: *solver, rho: *rho, ..cell.clone() }, index),
                    Column::Cond { .. } => Job::Cond(cell, index),
                });
            }
        }
    }

    let outcomes: Vec<structmg_core::Result<Outcome>> = jobs
        .par_iter()
        .map(|job| match job {
            Job::Iters(cell, index) => run_cell(cell, *index).map(Outcome::Iters),
            Job::Cond(cell, index) => {
                let sys = build_system(cell, cell_seed(cell.seed, *index, 0))?;
                let dense = sys.op.size() <= DENSE_CONDITION_LIMIT;
                let k = condition_number(&sys.op, ConditionMethod::Auto, &sys.psym)?;
                Ok(Outcome::Cond(k, if dense { "dense" } else { "iterative" }))
            }
        })
        .collect();

    let mut records = Vec::new();
    let mut conds = Vec::new();
    let mut md = format!("## {}\n\n", spec.title);
    let mut it = jobs.iter().zip(outcomes);
    for (block, sizes) in spec.blocks.iter().zip(&layout) {
        let mut table = MarkdownTable {
            title: block.title.clone(),
            header: std::iter::once("N(n)".to_string())
                .chain(block.columns.iter().map(|c| c.label().to_string()))
                .collect(),
            rows: Vec::new(),
        };
        for &n in sizes {
            let mut row = vec![size_label(n, block.dim)];
            for _ in &block.columns {
                let (job, outcome) = it.next().expect("one outcome per job");
                match (job, outcome?) {
                    (_, Outcome::Iters(r)) => {
                        row.push(format_iters(r.iters, r.converged));
                        records.push(Record::from_result(&r, opts.timings));
                    }
                    (Job::Cond(cell, _), Outcome::Cond(k, method)) => {
                        row.push(format_cond(k));
                        conds.push(CondRecord {
                            algebra: cell.algebra,
                            dim: cell.dim,
                            q: cell.q,
                            w: cell.w,
                            n: cell.n,
                            correction: cell.family,
                            cond: k,
                            method: method.to_string(),
                            seed: cell.seed,
                        });
                    }
                    (Job::Iters(..), Outcome::Cond(..)) => unreachable!("jobs and outcomes are zipped in order"),
                }
            }
            table.rows.push(row);
        }
        md.push_str(&table.render());
        md.push('\n');
    }
    Ok(TableOutput { markdown: md, records, conds })
}
