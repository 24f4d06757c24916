//! Problem instances: two disjoint point sets described only through
//! distances, origin proximities and a cross proximity matrix.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::indexing::AugmentedIndexing;

/// Relative tolerance for symmetry and zero-diagonal checks on input
/// distance matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Two point sets `X` (size `M`) and `Y` (size `N`).
///
/// Construct through [`ProblemInstance::new`] or [`load_instance`]; both
/// validate the data and return canonical matrices (exactly symmetric with
/// an exactly zero diagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    dx: DMatrix<f64>,
    dy: DMatrix<f64>,
    f: DMatrix<f64>,
    ux: Option<DVector<f64>>,
    uy: Option<DVector<f64>>,
    include_origin: bool,
}

impl ProblemInstance {
    pub fn new(
        dx: DMatrix<f64>,
        dy: DMatrix<f64>,
        f: DMatrix<f64>,
        ux: Option<DVector<f64>>,
        uy: Option<DVector<f64>>,
        include_origin: bool,
    ) -> Result<Self> {
        let dx = canonical_distances("dX", dx)?;
        let dy = canonical_distances("dY", dy)?;
        let (m, n) = (dx.nrows(), dy.nrows());

        if f.shape() != (m, n) {
            return Err(Error::DimensionMismatch {
                what: "F",
                expected: format!("{m}x{n}"),
                found: format!("{}x{}", f.nrows(), f.ncols()),
            });
        }
        check_entries("F", &f)?;
        if f.iter().all(|&v| v == 0.0) {
            return Err(Error::CrossProximityZero);
        }

        let ux = ux.map(|u| check_origin_vector("uX", u, m)).transpose()?;
        let uy = uy.map(|u| check_origin_vector("uY", u, n)).transpose()?;
        if include_origin {
            if ux.is_none() {
                return Err(Error::MissingOriginProximity("uX"));
            }
            if uy.is_none() {
                return Err(Error::MissingOriginProximity("uY"));
            }
        }

        Ok(Self { dx, dy, f, ux, uy, include_origin })
    }

    pub fn m(&self) -> usize {
        self.dx.nrows()
    }

    pub fn n(&self) -> usize {
        self.dy.nrows()
    }

    pub fn dx(&self) -> &DMatrix<f64> {
        &self.dx
    }

    pub fn dy(&self) -> &DMatrix<f64> {
        &self.dy
    }

    /// Cross proximities, `M × N`.
    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn ux(&self) -> Option<&DVector<f64>> {
        self.ux.as_ref()
    }

    pub fn uy(&self) -> Option<&DVector<f64>> {
        self.uy.as_ref()
    }

    pub fn include_origin(&self) -> bool {
        self.include_origin
    }

    pub fn indexing(&self) -> AugmentedIndexing {
        AugmentedIndexing::new(self.m(), self.n(), self.include_origin)
    }

    /// The same data with the roles of `X` and `Y` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            dx: self.dy.clone(),
            dy: self.dx.clone(),
            f: self.f.transpose(),
            ux: self.uy.clone(),
            uy: self.ux.clone(),
            include_origin: self.include_origin,
        }
    }

    /// Reorders `X` so that its new `i`-th point is the old `order[i]`-th.
    pub fn with_x_order(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.m());
        let m = self.m();
        Self {
            dx: DMatrix::from_fn(m, m, |i, j| self.dx[(order[i], order[j])]),
            dy: self.dy.clone(),
            f: DMatrix::from_fn(m, self.n(), |i, j| self.f[(order[i], j)]),
            ux: self.ux.as_ref().map(|u| DVector::from_fn(m, |i, _| u[order[i]])),
            uy: self.uy.clone(),
            include_origin: self.include_origin,
        }
    }

    /// Same instance with or without the theoretical origin.
    pub fn with_origin(&self, include_origin: bool) -> Result<Self> {
        Self::new(
            self.dx.clone(),
            self.dy.clone(),
            self.f.clone(),
            self.ux.clone(),
            self.uy.clone(),
            include_origin,
        )
    }

    /// Writes the instance as CSV files into `dir` and returns their paths.
    pub fn write_csv(&self, dir: &Path) -> Result<InstancePaths> {
        let paths = InstancePaths {
            dx: dir.join("dX.csv"),
            dy: dir.join("dY.csv"),
            f: dir.join("F.csv"),
            ux: self.ux.as_ref().map(|_| dir.join("uX.csv")),
            uy: self.uy.as_ref().map(|_| dir.join("uY.csv")),
        };
        write_matrix_csv(&paths.dx, &self.dx)?;
        write_matrix_csv(&paths.dy, &self.dy)?;
        write_matrix_csv(&paths.f, &self.f)?;
        if let (Some(p), Some(u)) = (&paths.ux, &self.ux) {
            write_vector_csv(p, u)?;
        }
        if let (Some(p), Some(u)) = (&paths.uy, &self.uy) {
            write_vector_csv(p, u)?;
        }
        Ok(paths)
    }
}

fn check_entries(what: &'static str, a: &DMatrix<f64>) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let v = a[(i, j)];
            if !v.is_finite() {
                return Err(Error::NonFinite { what, row: i, col: j });
            }
            if v < 0.0 {
                return Err(Error::NegativeEntry { what, row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

fn canonical_distances(what: &'static str, mut d: DMatrix<f64>) -> Result<DMatrix<f64>> {
    if d.nrows() != d.ncols() || d.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            what,
            expected: "a non-empty square matrix".into(),
            found: format!("{}x{}", d.nrows(), d.ncols()),
        });
    }
    check_entries(what, &d)?;
    let scale = d.amax();
    let k = d.nrows();
    for i in 0..k {
        if d[(i, i)] > SYMMETRY_TOLERANCE * scale {
            return Err(Error::NonzeroDiagonal { what, index: i, value: d[(i, i)] });
        }
        d[(i, i)] = 0.0;
        for j in i + 1..k {
            let (a, b) = (d[(i, j)], d[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOLERANCE * a.max(b) {
                return Err(Error::Asymmetric { what, row: i, col: j, a, b });
            }
            let mean = 0.5 * (a + b);
            d[(i, j)] = mean;
            d[(j, i)] = mean;
        }
    }
    if scale == 0.0 {
        return Err(Error::AllZero { what });
    }
    Ok(d)
}

fn check_origin_vector(what: &'static str, u: DVector<f64>, len: usize) -> Result<DVector<f64>> {
    if u.len() != len {
        return Err(Error::DimensionMismatch {
            what,
            expected: format!("{len} entries"),
            found: format!("{} entries", u.len()),
        });
    }
    for (i, &v) in u.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { what, row: i, col: 0 });
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry { what, row: i, col: 0, value: v });
        }
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::AllZero { what });
    }
    Ok(u)
}

/// File locations of an instance on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePaths {
    pub dx: PathBuf,
    pub dy: PathBuf,
    pub f: PathBuf,
    pub ux: Option<PathBuf>,
    pub uy: Option<PathBuf>,
}

/// Reads and validates an instance from CSV files.
pub fn load_instance(paths: &InstancePaths, include_origin: bool) -> Result<ProblemInstance> {
    let dx = read_matrix_csv(&paths.dx)?;
    let dy = read_matrix_csv(&paths.dy)?;
    let f = read_matrix_csv(&paths.f)?;
    let ux = paths.ux.as_deref().map(read_vector_csv).transpose()?;
    let uy = paths.uy.as_deref().map(read_vector_csv).transpose()?;
    ProblemInstance::new(dx, dy, f, ux, uy, include_origin)
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    Ok(csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(file))
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.into(), message: message.into() }
}

/// Reads a header-less numeric CSV matrix.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in open_csv(path)?.records().enumerate() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| parse_error(path, format!("row {}: {field:?} is not a number", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    format!("row {} has {} columns, expected {}", line + 1, row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, "empty matrix"));
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Reads a single-column CSV vector.
pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() != 1 {
        return Err(parse_error(path, format!("expected a single column, found {}", m.ncols())));
    }
    Ok(m.column(0).into_owned())
}

fn write_rows<'a>(path: &Path, rows: impl Iterator<Item = Vec<String>> + 'a) -> Result<()> {
    let io_err =
        |e: csv::Error| Error::Io { path: path.into(), source: std::io::Error::other(e.to_string()) };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|source| Error::Io { path: path.into(), source })
}

/// Writes a matrix as header-less CSV using the shortest round-trip
/// representation of each value.
pub fn write_matrix_csv(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    write_rows(path, (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)].to_string()).collect()))
}

pub fn write_vector_csv(path: &Path, u: &DVector<f64>) -> Result<()> {
    write_rows(path, u.iter().map(|v| vec![v.to_string()]))
}

/// Optional overrides for the constants `c1`, `c2`, `c3`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
}

/// JSON run configuration.
///
/// Relative paths are resolved against the directory holding the config
/// file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "dX")]
    pub dx: PathBuf,
    #[serde(rename = "dY")]
    pub dy: PathBuf,
    #[serde(rename = "F")]
    pub f: PathBuf,
    #[serde(rename = "uX", default)]
    pub ux: Option<PathBuf>,
    #[serde(rename = "uY", default)]
    pub uy: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub include_origin: bool,
    #[serde(default)]
    pub constants: ConstantOverrides,
    #[serde(default)]
    pub psd_tolerance: Option<f64>,
    #[serde(default)]
    pub max_doublings: Option<usize>,
    /// 1-based index of the reference point inside the embeddable set.
    #[serde(default)]
    pub reference: Option<usize>,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        };
        resolve(&mut cfg.dx);
        resolve(&mut cfg.dy);
        resolve(&mut cfg.f);
        if let Some(p) = cfg.ux.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.uy.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_json_str(&text, base)
    }

    pub fn paths(&self) -> InstancePaths {
        InstancePaths {
            dx: self.dx.clone(),
            dy: self.dy.clone(),
            f: self.f.clone(),
            ux: self.ux.clone(),
            uy: self.uy.clone(),
        }
    }
}
