use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use structmg_bench::certify::{certify_markdown, default_cases, run_certify, write_certify_csv};
use structmg_bench::config::expand_config;
use structmg_bench::corrections::Family;
use structmg_bench::experiment::{check_ladder_size, parse_algebra, parse_smoother, Solver, CALIBRATED_BOUND_SCALE};
use structmg_bench::report::{write_cond_csv, write_csv};
use structmg_bench::tables::{custom_spec, ladder_sizes, run_table, table_spec, RunOptions, TableOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
    Both,
}

/// Multigrid benchmarks for structured-plus-banded SPD systems.
///
/// Without a subcommand, runs the grid given by the flags. Any flag can also
/// come from `--config FILE` (`key = value` lines); command-line flags win.
#[derive(Debug, Parser)]
#[command(name = "structmg", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// tau, circ or dct3.
    #[arg(long, global = true, default_value = "tau")]
    algebra: String,
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    dim: u8,
    /// Laplacian power.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=3))]
    q: u32,
    /// Projector exponent.
    #[arg(long, global = true, default_value_t = 1)]
    w: u32,
    /// Comma-separated per-axis sizes; defaults to the algebra's ladder.
    #[arg(long, global = true)]
    sizes: Option<String>,
    /// Comma-separated families d0..d10.
    #[arg(long, global = true, default_value = "d0,d1,d2,d3,d4")]
    correction: String,
    /// Comma-separated solvers: tgm, mgm, cg.
    #[arg(long, global = true, default_value = "mgm")]
    solver: String,
    /// Comma-separated extra-smoothing increments.
    #[arg(long, global = true, default_value = "0")]
    rho: String,
    /// richardson or gs-post.
    #[arg(long, global = true, default_value = "richardson")]
    smoother: String,
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Repetitions for the random families.
    #[arg(long, global = true, default_value_t = 10)]
    reps: usize,
    /// Output stem: writes STEM.md, STEM.csv (and STEM.cond.csv). Stdout if absent.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Fill the secs column (makes the CSV run-dependent).
    #[arg(long, global = true)]
    timings: bool,
    /// Largest 2D per-axis size (511 or 255).
    #[arg(long = "max-2d", global = true, default_value_t = 511)]
    max_2d: usize,
    /// Factor on each level's spectral bound before deriving ω.
    #[arg(long, global = true, default_value_t = CALIBRATED_BOUND_SCALE)]
    bound_scale: f64,
    /// Give the extra ρ steps to the post-smoother only.
    #[arg(long, global = true)]
    rho_post_only: bool,
    /// Comma-separated cosine coefficients a0,a1,.. of a per-axis symbol
    /// a0 + 2 Σ a_k cos(k t), replacing the Laplacian.
    #[arg(long, global = true, allow_hyphen_values = true)]
    symbol: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reproduce the grid of reference table N (1 to 8).
    Table { number: u8 },
    /// Two-grid certificates over all algebras, d0/d1/d4, small sizes.
    Certify,
}

fn list<T>(raw: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("bad number `{s}`"))
}

fn run_options(cli: &Cli) -> Result<RunOptions, String> {
    let symbol = cli.symbol.as_deref().map(|s| list(s, parse_num::<f64>)).transpose()?;
    Ok(RunOptions {
        seed: cli.seed,
        reps: cli.reps,
        tol: cli.tol,
        max_iter: cli.max_iter,
        smoother: parse_smoother(&cli.smoother)?,
        rho_post_only: cli.rho_post_only,
        bound_scale: cli.bound_scale,
        max_2d: cli.max_2d,
        timings: cli.timings,
        symbol,
    })
}

fn emit(cli: &Cli, md: &str, csv: impl Fn(&mut Vec<u8>) -> Result<(), String>, cond: Option<Vec<u8>>) -> Result<(), String> {
    let want_md = cli.format != Format::Csv;
    let want_csv = cli.format != Format::Md;
    let mut csv_bytes = Vec::new();
    if want_csv {
        csv(&mut csv_bytes)?;
    }
    match &cli.out {
        Some(stem) => {
            let io = |p: String, b: &[u8]| fs::write(&p, b).map_err(|e| format!("writing {p}: {e}"));
            if want_md {
                io(format!("{stem}.md"), md.as_bytes())?;
            }
            if want_csv {
                io(format!("{stem}.csv"), &csv_bytes)?;
                if let Some(c) = cond {
                    io(format!("{stem}.cond.csv"), &c)?;
                }
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let mut put = |b: &[u8]| out.write_all(b).map_err(|e| e.to_string());
            if want_md {
                put(md.as_bytes())?;
            }
            if want_csv {
                put(&csv_bytes)?;
                if let Some(c) = cond {
                    put(b"\n")?;
                    put(&c)?;
                }
            }
        }
    }
    Ok(())
}

fn emit_table(cli: &Cli, out: &TableOutput) -> Result<(), String> {
    let cond = if out.conds.is_empty() {
        None
    } else {
        let mut b = Vec::new();
        write_cond_csv(&mut b, &out.conds).map_err(|e| e.to_string())?;
        Some(b)
    };
    emit(cli, &out.markdown, |b| write_csv(b, &out.records).map_err(|e| e.to_string()), cond)
}

fn run(cli: Cli) -> Result<bool, String> {
    let opts = run_options(&cli)?;
    match cli.command {
        Some(Command::Table { number }) => {
            let spec = table_spec(number)?;
            let out = run_table(&spec, &opts).map_err(|e| e.to_string())?;
            emit_table(&cli, &out)?;
            Ok(true)
        }
        Some(Command::Certify) => {
            let rows = run_certify(&default_cases(), cli.seed).map_err(|e| e.to_string())?;
            let md = certify_markdown(&rows);
            emit(&cli, &md, |b| write_certify_csv(b, &rows).map_err(|e| e.to_string()), None)?;
            Ok(rows.iter().all(|r| r.pass))
        }
        None => {
            let algebra = parse_algebra(&cli.algebra)?;
            let sizes = match &cli.sizes {
                Some(s) => list(s, parse_num::<usize>)?,
                None => ladder_sizes(algebra),
            };
            for &n in &sizes {
                check_ladder_size(algebra, n)?;
            }
            let families = list(&cli.correction, |s| s.parse::<Family>())?;
            let solvers = list(&cli.solver, |s| s.parse::<Solver>())?;
            let rhos = list(&cli.rho, parse_num::<usize>)?;
            let spec = custom_spec(algebra, cli.dim.into(), cli.q, cli.w, sizes, &families, &solvers, &rhos);
            let out = run_table(&spec, &opts).map_err(|e| e.to_string())?;
            emit_table(&cli, &out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(Cli::parse_from(args)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some certificates failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
