//! CSV readers and writers for point clouds, plans and result tables.
//!
//! Point clouds use a header `x0,x1,...,x{d-1}` with an optional trailing
//! weight column `w`. Floats are written in Rust's shortest round-trip form,
//! which is locale independent.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{PointCloud, ProbVector};

/// A point cloud with its weights (uniform when the file has no `w` column).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCloud {
    pub points: PointCloud,
    pub weights: ProbVector,
}

fn parse_header(header: &csv::StringRecord) -> Result<(usize, bool)> {
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    let has_w = fields.last() == Some(&"w");
    let d = fields.len() - usize::from(has_w);
    if d == 0 {
        return Err(Error::UnsupportedFormat("point cloud header needs at least one coordinate column".into()));
    }
    for (c, f) in fields[..d].iter().enumerate() {
        if *f != format!("x{c}") {
            return Err(Error::UnsupportedFormat(format!("expected column x{c}, found {f:?}")));
        }
    }
    Ok((d, has_w))
}

pub fn read_cloud_from<R: Read>(reader: R) -> Result<WeightedCloud> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let (d, has_w) = parse_header(rdr.headers()?)?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != d + usize::from(has_w) {
            return Err(Error::UnsupportedFormat(format!("row {} has {} fields", line + 1, rec.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::UnsupportedFormat(format!("row {}: cannot parse {field:?}", line + 1)))?;
            if !v.is_finite() {
                return Err(Error::UnsupportedFormat(format!("row {}: non-finite value", line + 1)));
            }
            if c < d {
                coords.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    if coords.is_empty() {
        return Err(Error::UnsupportedFormat("point cloud has no rows".into()));
    }
    let points = PointCloud::from_flat(d, coords)?;
    let weights = if has_w { ProbVector::normalized(weights)? } else { ProbVector::uniform(points.len()) };
    Ok(WeightedCloud { points, weights })
}

pub fn read_cloud(path: impl AsRef<Path>) -> Result<WeightedCloud> {
    read_cloud_from(std::fs::File::open(path)?)
}

pub fn write_cloud_to<W: Write>(writer: W, points: &PointCloud, weights: Option<&ProbVector>) -> Result<()> {
    let mut header: Vec<String> = (0..points.dim()).map(|c| format!("x{c}")).collect();
    if weights.is_some() {
        header.push("w".into());
    }
    let mut table = Table::new(header);
    for (i, p) in points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if let Some(w) = weights {
            row.push(w[i].to_string());
        }
        table.rows.push(row);
    }
    table.write_to(writer)
}

pub fn write_cloud(path: impl AsRef<Path>, points: &PointCloud, weights: Option<&ProbVector>) -> Result<()> {
    write_cloud_to(std::fs::File::create(path)?, points, weights)
}

/// A header plus string rows, written as comma-separated values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }

    /// Values of one column, looked up by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c].as_str()).collect())
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?.into_iter().map(|s| s.parse().ok()).collect()
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    /// Appends rows to `path`, writing the header only when the file is new or empty.
    pub fn append(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = csv::WriterBuilder::new().from_writer(file);
        if fresh {
            w.write_record(&self.header)?;
        }
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.iter().map(String::from).collect();
        let rows = rdr.records().map(|r| r.map(|r| r.iter().map(String::from).collect())).collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Sparse plan entries as a `(i, j, mass)` table.
pub fn plan_table(entries: &[(usize, usize, f64)]) -> Table {
    let mut t = Table::new(["i", "j", "mass"]);
    for &(i, j, v) in entries {
        t.push([i.to_string(), j.to_string(), v.to_string()]);
    }
    t
}
