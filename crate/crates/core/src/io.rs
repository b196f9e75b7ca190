//! File formats: sample CSV, grid CSV with a JSON sidecar, slice CSV.
//!
//! A grid written to `grid.csv` has its metadata in `grid.json` next to it.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Strategy;
use crate::grid::{GridShape, RankGrid};
use crate::sample::SampleMatrix;
use crate::smoothing::DensitySlice;

/// Reads a numeric table. A first row with any non-numeric field is taken as
/// a header; empty, NaN and infinite cells are rejected.
pub fn read_sample<R: Read>(reader: R) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 1;
        if i == 0 && record.iter().any(|f| !f.is_empty() && f.parse::<f64>().is_err()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            if field.is_empty() {
                return Err(Error::Parse(format!("empty cell at line {line}, column {}", j + 1)));
            }
            let v: f64 = field.parse().map_err(|_| {
                Error::Parse(format!("non-numeric cell {field:?} at line {line}, column {}", j + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::Parse(format!(
                    "non-finite cell {field:?} at line {line}, column {}",
                    j + 1
                )));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    SampleMatrix::from_rows(&rows)
}

pub fn read_sample_csv(path: &Path) -> Result<SampleMatrix> {
    read_sample(BufReader::new(File::open(path)?))
}

/// Writes `x1..xd` header and one row per observation.
pub fn write_sample<W: Write>(sample: &SampleMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..=sample.d()).map(|l| format!("x{l}")))?;
    for row in sample.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata stored beside a grid CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub strategy: String,
    /// Number of sub-samples averaged over.
    pub b: u64,
    pub seed: Option<u64>,
    pub total_weight: f64,
}

impl GridSidecar {
    pub fn new(grid: &RankGrid, n: usize, strategy: Strategy) -> Self {
        let (name, seed) = match strategy {
            Strategy::Exhaustive => ("exhaustive", None),
            Strategy::Random { seed, .. } => ("random", Some(seed)),
        };
        GridSidecar {
            m: grid.m(),
            d: grid.d(),
            n,
            strategy: name.to_string(),
            b: grid.total_draws(),
            seed,
            total_weight: grid.total_weight(),
        }
    }
}

/// `grid.csv` → `grid.json`.
pub fn sidecar_path(grid_path: &Path) -> PathBuf {
    grid_path.with_extension("json")
}

/// Writes the cells with positive weight as `r_1..r_d,weight`.
pub fn write_grid<W: Write>(grid: &RankGrid, writer: W) -> Result<()> {
    let shape = grid.shape();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=shape.d()).map(|l| format!("r_{l}")).collect();
    header.push("weight".into());
    w.write_record(&header)?;
    for (idx, weight) in grid.nonzero() {
        if weight == 0.0 {
            continue;
        }
        let mut rec: Vec<String> = shape.decode(idx).iter().map(|r| r.to_string()).collect();
        rec.push(weight.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(reader: R, m: usize, d: usize, total_draws: u64) -> Result<RankGrid> {
    let shape = GridShape::new(m, d)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() != d + 1 {
        return Err(Error::Parse(format!(
            "grid CSV has {} columns, expected {}",
            headers.len(),
            d + 1
        )));
    }
    let mut cells = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let bad = |what: &str| Error::Parse(format!("grid row {}: {what}", i + 1));
        let mut r = Vec::with_capacity(d);
        for field in record.iter().take(d) {
            let v: usize = field.parse().map_err(|_| bad("rank is not an integer"))?;
            if v == 0 || v > m {
                return Err(bad("rank out of range"));
            }
            r.push(v);
        }
        let w: f64 = record[d].parse().map_err(|_| bad("weight is not a number"))?;
        if !(w.is_finite() && w >= 0.0) {
            return Err(bad("weight must be finite and non-negative"));
        }
        let idx = shape.encode(&r);
        if !seen.insert(idx) {
            return Err(bad("duplicate cell"));
        }
        cells.push((idx, w));
    }
    let sparse = RankGrid::from_sparse(m, d, cells, total_draws)?;
    if shape.is_dense() {
        sparse.to_dense()
    } else {
        Ok(sparse)
    }
}

/// Writes `path` and its sidecar.
pub fn save_grid(grid: &RankGrid, path: &Path, sidecar: &GridSidecar) -> Result<()> {
    write_grid(grid, BufWriter::new(File::create(path)?))?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<(RankGrid, GridSidecar)> {
    let meta: GridSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let grid = read_grid(BufReader::new(File::open(path)?), meta.m, meta.d, meta.b)?;
    Ok((grid, meta))
}

/// `x,y,density` rows, `x` varying slowest.
pub fn write_slice<W: Write>(slice: &DensitySlice, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "density"])?;
    for (i, x) in slice.xs.iter().enumerate() {
        for (j, y) in slice.ys.iter().enumerate() {
            w.write_record([x.to_string(), y.to_string(), slice.value(i, j).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// File at `path`, or standard output.
pub fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}
