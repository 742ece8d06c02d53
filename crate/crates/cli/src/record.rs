//! Result rows, their CSV form, and the JSON summary written beside them.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sgdg::SchemeKind;

/// Bumped whenever a column or summary field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 14] = [
    "experiment",
    "D",
    "k",
    "n",
    "scheme",
    "P",
    "nnz",
    "mcerr",
    "steps_accepted",
    "steps_rejected",
    "wall_ms",
    "mem_bytes",
    "status",
    "reason",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// Over a memory or cost budget; never attempted.
    Infeasible,
    /// Attempted and aborted, e.g. by the integrator.
    Failed,
}

/// One CSV row. Empty cells mean "not measured".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    #[serde(rename = "D")]
    pub dim: usize,
    pub k: usize,
    pub n: usize,
    pub scheme: SchemeKind,
    #[serde(rename = "P")]
    pub p: Option<u64>,
    pub nnz: Option<u64>,
    pub mcerr: Option<f64>,
    pub steps_accepted: Option<u64>,
    pub steps_rejected: Option<u64>,
    pub wall_ms: Option<f64>,
    pub mem_bytes: Option<u64>,
    pub status: Status,
    pub reason: String,
}

impl Record {
    pub fn new(experiment: &str, dim: usize, k: usize, n: usize, scheme: SchemeKind) -> Self {
        Self {
            experiment: experiment.to_string(),
            dim,
            k,
            n,
            scheme,
            p: None,
            nnz: None,
            mcerr: None,
            steps_accepted: None,
            steps_rejected: None,
            wall_ms: None,
            mem_bytes: None,
            status: Status::Ok,
            reason: String::new(),
        }
    }

    pub fn mark(&mut self, status: Status, reason: impl Into<String>) {
        self.status = status;
        self.reason = reason.into();
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// Least-squares line through `(log10 x, log10 y)` for one `(k, scheme)` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub x: String,
    pub y: String,
    pub k: usize,
    pub scheme: SchemeKind,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    pub unix_time: u64,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            threads: rayon::current_num_threads(),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RowCounts {
    pub ok: usize,
    pub infeasible: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub experiment: String,
    pub columns: Vec<String>,
    pub parameters: serde_json::Value,
    pub rows: RowCounts,
    pub fits: Vec<Fit>,
    /// Derived scalars such as `nnz_bound_c/k=3/sparse`.
    pub metrics: BTreeMap<String, f64>,
    pub environment: Environment,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub rows: Vec<Record>,
    pub summary: Summary,
}

impl Report {
    pub fn new(experiment: &str, parameters: serde_json::Value, rows: Vec<Record>) -> Self {
        let mut counts = RowCounts::default();
        for r in &rows {
            match r.status {
                Status::Ok => counts.ok += 1,
                Status::Infeasible => counts.infeasible += 1,
                Status::Failed => counts.failed += 1,
            }
        }
        Self {
            rows,
            summary: Summary {
                schema_version: SCHEMA_VERSION,
                experiment: experiment.to_string(),
                columns: COLUMNS.iter().map(|c| c.to_string()).collect(),
                parameters,
                rows: counts,
                fits: Vec::new(),
                metrics: BTreeMap::new(),
                environment: Environment::current(),
            },
        }
    }

    /// Adds one fit per `(k, scheme)` series of the rows with status ok.
    pub fn fit_series(
        &mut self,
        x_name: &str,
        y_name: &str,
        x: impl Fn(&Record) -> Option<f64>,
        y: impl Fn(&Record) -> Option<f64>,
    ) {
        let mut series: BTreeMap<(usize, SchemeKind), Vec<(f64, f64)>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.is_ok()) {
            if let (Some(a), Some(b)) = (x(r), y(r)) {
                if a > 0.0 && b > 0.0 {
                    series.entry((r.k, r.scheme)).or_default().push((a.log10(), b.log10()));
                }
            }
        }
        for ((k, scheme), pts) in series {
            if let Some((slope, intercept)) = least_squares(&pts) {
                self.summary.fits.push(Fit {
                    x: x_name.to_string(),
                    y: y_name.to_string(),
                    k,
                    scheme,
                    points: pts.len(),
                    slope,
                    intercept,
                });
            }
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        if self.rows.is_empty() {
            out.write_record(COLUMNS)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes the CSV to `path` and the summary to the sibling `.json`.
    pub fn write(&self, path: &Path) -> Result<PathBuf, Box<dyn std::error::Error>> {
        self.write_csv(BufWriter::new(File::create(path)?))?;
        let json = summary_path(path);
        let mut f = BufWriter::new(File::create(&json)?);
        serde_json::to_writer_pretty(&mut f, &self.summary)?;
        writeln!(f)?;
        f.flush()?;
        Ok(json)
    }
}

pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn read_csv<R: std::io::Read>(r: R) -> csv::Result<Vec<Record>> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Slope and intercept of the least-squares line, if at least two distinct `x`.
pub fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
