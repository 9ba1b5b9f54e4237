//! Per-iteration convergence reports and their CSV form.

use std::io::Write;
use std::path::Path;

use anyhow::Context;

use lanfa_core::optimal::RatioOutcome;
use lanfa_core::xlinalg::Real;

pub const CSV_DIGITS: usize = 25;
pub const FAILED: &str = "FAILED";
pub const EXACT: &str = "EXACT";

pub const COLUMNS: [&str; 9] = [
    "k",
    "err_lanczos_fa",
    "err_opt2",
    "ratio",
    "bound_thm1",
    "bound_uniform",
    "bound_triangle",
    "err_lanczos_or",
    "status",
];

/// An entry that was requested but may be undefined at this `k`.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Value(Real),
    Failed,
    /// Not requested, or not defined at this `k`.
    Empty,
}

impl Cell {
    pub fn value(&self) -> Option<&Real> {
        match self {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Value(v) => v.to_sci(CSV_DIGITS),
            Cell::Failed => FAILED.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<Option<Real>> for Cell {
    fn from(v: Option<Real>) -> Self {
        v.map_or(Cell::Empty, Cell::Value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
    Exact,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Failed => FAILED,
            Status::Exact => EXACT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub k: usize,
    /// `None` when Lanczos-FA is undefined at `k`.
    pub err_lanczos_fa: Option<Real>,
    pub err_opt2: Real,
    pub ratio: RatioOutcome,
    pub bound_thm1: Cell,
    pub bound_uniform: Cell,
    pub bound_triangle: Cell,
    pub err_lanczos_or: Cell,
}

impl ReportRow {
    pub fn status(&self) -> Status {
        match self.ratio {
            RatioOutcome::Exact => Status::Exact,
            RatioOutcome::Failed => Status::Failed,
            RatioOutcome::Ratio(_) => Status::Ok,
        }
    }

    fn record(&self) -> [String; 9] {
        let ratio = match &self.ratio {
            RatioOutcome::Ratio(r) => r.to_sci(CSV_DIGITS),
            RatioOutcome::Failed => FAILED.to_string(),
            RatioOutcome::Exact => EXACT.to_string(),
        };
        [
            self.k.to_string(),
            self.err_lanczos_fa
                .as_ref()
                .map_or_else(|| FAILED.to_string(), |e| e.to_sci(CSV_DIGITS)),
            self.err_opt2.to_sci(CSV_DIGITS),
            ratio,
            self.bound_thm1.render(),
            self.bound_uniform.render(),
            self.bound_triangle.render(),
            self.err_lanczos_or.render(),
            self.status().as_str().to_string(),
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    /// Largest finite optimality ratio.
    pub fn max_ratio(&self) -> Option<&Real> {
        self.rows
            .iter()
            .filter_map(|r| r.ratio.value())
            .reduce(|a, b| if b > a { b } else { a })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lanfa_core::xlinalg::Precision;

    #[test]
    fn sentinels_and_empty_cells() {
        let p = Precision::default();
        let report = ConvergenceReport {
            rows: vec![
                ReportRow {
                    k: 1,
                    err_lanczos_fa: Some(p.int(3) / &p.int(10)),
                    err_opt2: p.int(1) / &p.int(10),
                    ratio: RatioOutcome::Ratio(p.int(3)),
                    bound_thm1: Cell::Empty,
                    bound_uniform: Cell::Value(p.int(2)),
                    bound_triangle: Cell::Empty,
                    err_lanczos_or: Cell::Failed,
                },
                ReportRow {
                    k: 2,
                    err_lanczos_fa: None,
                    err_opt2: p.zero(),
                    ratio: RatioOutcome::Exact,
                    bound_thm1: Cell::Empty,
                    bound_uniform: Cell::Empty,
                    bound_triangle: Cell::Empty,
                    err_lanczos_or: Cell::Empty,
                },
            ],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], COLUMNS.join(","));
        assert_eq!(lines[1], "1,3e-1,1e-1,3,,2,,FAILED,ok");
        assert_eq!(lines[2], "2,FAILED,0,EXACT,,,,,EXACT");
        assert_eq!(report.max_ratio(), Some(&p.int(3)));
    }

    #[test]
    fn values_keep_25_digits() {
        let p = Precision::default();
        let third = p.one() / &p.int(3);
        let s = Cell::Value(third).render();
        assert_eq!(s, "3.333333333333333333333333e-1");
    }
}
