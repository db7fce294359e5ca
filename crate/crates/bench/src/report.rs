//! CSV and markdown output.

use std::io::{Read, Write};

use structmg_core::{Algebra, Error as CoreError};

use crate::corrections::Family;
use crate::experiment::{parse_algebra, CellResult, Solver};

pub const CSV_HEADER: [&str; 12] =
    ["algebra", "dim", "q", "w", "n", "correction", "solver", "rho", "iters", "resid", "secs", "seed"];

pub const COND_HEADER: [&str; 9] = ["algebra", "dim", "q", "w", "n", "correction", "cond", "method", "seed"];

/// One line of the iteration-count CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub algebra: Algebra,
    pub dim: usize,
    pub q: u32,
    pub w: u32,
    pub n: usize,
    pub correction: Family,
    pub solver: Solver,
    pub rho: usize,
    pub iters: f64,
    pub resid: f64,
    /// Left empty unless timings were requested, so that repeated runs
    /// produce identical files.
    pub secs: Option<f64>,
    pub seed: u64,
}

impl Record {
    pub fn from_result(r: &CellResult, timings: bool) -> Self {
        let c = &r.cell;
        Record {
            algebra: c.algebra,
            dim: c.dim,
            q: c.q,
            w: c.w,
            n: c.n,
            correction: c.family,
            solver: c.solver,
            rho: c.rho,
            iters: r.iters,
            resid: r.resid,
            secs: timings.then_some(r.secs),
            seed: c.seed,
        }
    }

    fn fields(&self) -> [String; 12] {
        [
            self.algebra.name().to_string(),
            self.dim.to_string(),
            self.q.to_string(),
            self.w.to_string(),
            self.n.to_string(),
            self.correction.to_string(),
            self.solver.to_string(),
            self.rho.to_string(),
            self.iters.to_string(),
            format!("{:e}", self.resid),
            self.secs.map(|s| format!("{s:.6}")).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }
}

/// One line of the condition-number CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CondRecord {
    pub algebra: Algebra,
    pub dim: usize,
    pub q: u32,
    pub w: u32,
    pub n: usize,
    pub correction: Family,
    pub cond: f64,
    /// `dense` or `iterative`.
    pub method: String,
    pub seed: u64,
}

#[derive(Debug)]
pub enum ReportError {
    Csv(csv::Error),
    Io(std::io::Error),
    Parse(String),
}

impl std::fmt::Display for ReportError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReportError::Csv(e) => write!(f, "csv: {e}"),
            ReportError::Io(e) => write!(f, "io: {e}"),
            ReportError::Parse(e) => write!(f, "parse: {e}"),
        }
    }
}

impl std::error::Error for ReportError {}

impl From<csv::Error> for ReportError {
    fn from(e: csv::Error) -> Self {
        ReportError::Csv(e)
    }
}

impl From<std::io::Error> for ReportError {
    fn from(e: std::io::Error) -> Self {
        ReportError::Io(e)
    }
}

impl From<CoreError> for ReportError {
    fn from(e: CoreError) -> Self {
        ReportError::Parse(e.to_string())
    }
}

pub fn write_csv<W: Write>(out: W, records: &[Record]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(row: &csv::StringRecord, i: usize) -> Result<T, ReportError> {
    let raw = row.get(i).ok_or_else(|| ReportError::Parse(format!("missing column {}", CSV_HEADER[i])))?;
    raw.parse().map_err(|_| ReportError::Parse(format!("bad {} value `{raw}`", CSV_HEADER[i])))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<Record>, ReportError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ReportError::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let secs = match row.get(10) {
            Some("") | None => None,
            Some(_) => Some(field(&row, 10)?),
        };
        out.push(Record {
            algebra: parse_algebra(&row[0]).map_err(ReportError::Parse)?,
            dim: field(&row, 1)?,
            q: field(&row, 2)?,
            w: field(&row, 3)?,
            n: field(&row, 4)?,
            correction: row[5].parse().map_err(ReportError::Parse)?,
            solver: row[6].parse().map_err(ReportError::Parse)?,
            rho: field(&row, 7)?,
            iters: field(&row, 8)?,
            resid: field(&row, 9)?,
            secs,
            seed: field(&row, 11)?,
        });
    }
    Ok(out)
}

pub fn write_cond_csv<W: Write>(out: W, records: &[CondRecord]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COND_HEADER)?;
    for r in records {
        w.write_record([
            r.algebra.name().to_string(),
            r.dim.to_string(),
            r.q.to_string(),
            r.w.to_string(),
            r.n.to_string(),
            r.correction.to_string(),
            format!("{:e}", r.cond),
            r.method.clone(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Iteration counts as printed: the mean rounded to the nearest half.
pub fn format_iters(mean: f64, converged: bool) -> String {
    let half = (mean * 2.0).round() / 2.0;
    let s = if half.fract() == 0.0 { format!("{half:.0}") } else { format!("{half:.1}") };
    if converged {
        s
    } else {
        format!("{s}*")
    }
}

pub fn format_cond(k: f64) -> String {
    let s = format!("{k:.2e}");
    // `4.14e2` → `4.14e+2`, the usual printed form.
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

/// A markdown table with a title line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkdownTable {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl MarkdownTable {
    pub fn render(&self) -> String {
        let mut s = String::new();
        if !self.title.is_empty() {
            s.push_str(&format!("**{}**\n\n", self.title));
        }
        s.push_str(&format!("| {} |\n", self.header.join(" | ")));
        s.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
        for r in &self.rows {
            s.push_str(&format!("| {} |\n", r.join(" | ")));
        }
        s
    }
}
