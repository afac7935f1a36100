//! CSV outputs.
//!
//! - results: `delta,eps,method,replicate,l2,linf`, one row per replicate;
//! - summary: `delta,eps,method,n,mean_l2,se_l2,median_l2,mean_linf,se_linf`;
//! - field: `x,y,z,value`, one row per grid point.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sphdeconv_core::estimators::Method;
use sphdeconv_core::metrics::{field_values, EvalGrid};
use sphdeconv_core::study::{CellSummary, ErrorReport, ErrorRow};
use sphdeconv_core::HarmonicCoeffs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub delta: f64,
    pub eps: f64,
    pub method: String,
    pub replicate: usize,
    pub l2: f64,
    pub linf: f64,
}

impl From<&ErrorRow> for ResultRecord {
    fn from(r: &ErrorRow) -> Self {
        Self {
            delta: r.delta,
            eps: r.eps,
            method: r.method.as_str().into(),
            replicate: r.replicate,
            l2: r.l2,
            linf: r.linf,
        }
    }
}

impl ResultRecord {
    pub fn to_row(&self) -> anyhow::Result<ErrorRow> {
        Ok(ErrorRow {
            delta: self.delta,
            eps: self.eps,
            method: self.method.parse::<Method>()?,
            replicate: self.replicate,
            l2: self.l2,
            linf: self.linf,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub delta: f64,
    pub eps: f64,
    pub method: String,
    pub n: usize,
    pub mean_l2: f64,
    pub se_l2: f64,
    pub median_l2: f64,
    pub mean_linf: f64,
    pub se_linf: f64,
}

impl From<&CellSummary> for SummaryRecord {
    fn from(s: &CellSummary) -> Self {
        Self {
            delta: s.delta,
            eps: s.eps,
            method: s.method.as_str().into(),
            n: s.count,
            mean_l2: s.mean_l2,
            se_l2: s.stderr_l2,
            median_l2: s.median_l2,
            mean_linf: s.mean_linf,
            se_linf: s.stderr_linf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub value: f64,
}

pub fn write_results<W: Write>(out: W, report: &ErrorReport) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(ResultRecord::from(row))?;
    }
    if report.rows.is_empty() {
        w.write_record(["delta", "eps", "method", "replicate", "l2", "linf"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: std::io::Read>(input: R) -> anyhow::Result<Vec<ErrorRow>> {
    csv::Reader::from_reader(input)
        .deserialize::<ResultRecord>()
        .map(|r| r?.to_row())
        .collect()
}

pub fn write_summary<W: Write>(out: W, report: &ErrorReport) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in report.summaries() {
        w.serialize(SummaryRecord::from(&s))?;
    }
    w.flush()?;
    Ok(())
}

/// Grid points and the values of `f` there.
pub fn export_field(f: &HarmonicCoeffs, grid: &EvalGrid) -> Vec<FieldRecord> {
    grid.points()
        .iter()
        .zip(field_values(f, grid))
        .map(|(p, value)| {
            let [x, y, z] = p.xyz();
            FieldRecord { x, y, z, value }
        })
        .collect()
}

pub fn write_field<W: Write>(out: W, records: &[FieldRecord]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field<R: std::io::Read>(input: R) -> anyhow::Result<Vec<FieldRecord>> {
    Ok(csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()?)
}

/// Writes through a temporary file next to `path`, then renames it into place.
pub fn write_atomic<F>(path: &Path, body: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> anyhow::Result<()>,
{
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let file = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let mut w = std::io::BufWriter::new(file);
        body(&mut w)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
