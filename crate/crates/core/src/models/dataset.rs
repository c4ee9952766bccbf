//! Datasets and their CSV representation.
//!
//! CSV layout: a header row, then one row per data point with the feature columns
//! followed by a single target column (UTF-8, `.` as decimal separator). For
//! `gaussian_mean` data there is no target column; every column is a coordinate of
//! the observation. Lines starting with `#` are comments.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::scalar::Scalar;

/// Features `x` (N x D) and targets `y` (N).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T: Scalar> {
    x: Array2<T>,
    y: Array1<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Validates the target domain for `kind`: labels in {-1, +1} for logistic,
    /// non-negative integers for Poisson. `gaussian_mean` data carries zero targets.
    pub fn new(x: Array2<T>, y: Array1<T>, kind: ModelKind) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.len() });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("dataset contains non-finite values".into()));
        }
        for (i, &v) in y.iter().enumerate() {
            validate_target(kind, v).map_err(|m| Error::Validation(format!("row {i}: {m}")))?;
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }

    /// Feature dimension D.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn y(&self) -> &Array1<T> {
        &self.y
    }
}

fn validate_target<T: Scalar>(kind: ModelKind, v: T) -> std::result::Result<(), String> {
    match kind {
        ModelKind::Logistic if v != T::one() && v != -T::one() => {
            Err(format!("logistic label {v} is not -1 or 1"))
        }
        ModelKind::Poisson if v < T::zero() || v.fract() != T::zero() => {
            Err(format!("Poisson target {v} is not a non-negative integer"))
        }
        _ => Ok(()),
    }
}

/// Reads a dataset from CSV.
pub fn load_csv_dataset<T: Scalar>(path: impl AsRef<Path>, kind: ModelKind) -> Result<Dataset<T>> {
    read_csv_dataset(File::open(path)?, kind)
}

pub fn read_csv_dataset<T: Scalar, R: Read>(reader: R, kind: ModelKind) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(reader);
    let width = rdr.headers()?.len();
    let has_target = kind != ModelKind::GaussianMean;
    let feature_cols = if has_target { width.checked_sub(1) } else { Some(width) };
    let feature_cols = match feature_cols {
        Some(c) if c >= 1 => c,
        _ => return Err(Error::Parse { line: 1, message: "header needs at least one feature column".into() }),
    };

    let mut xs: Vec<T> = Vec::new();
    let mut ys: Vec<T> = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(row + 2, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(row + 2, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(width);
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            values.push(T::lit(v));
        }
        if has_target {
            let target = values[feature_cols];
            validate_target(kind, target).map_err(|message| Error::Validation(format!("line {line}: {message}")))?;
            ys.push(target);
        } else {
            ys.push(T::zero());
        }
        xs.extend_from_slice(&values[..feature_cols]);
    }
    if ys.is_empty() {
        return Err(Error::Parse { line: 2, message: "no data rows".into() });
    }
    let x = Array2::from_shape_vec((ys.len(), feature_cols), xs).expect("row-major shape");
    Dataset::new(x, Array1::from(ys), kind)
}

/// Writes a dataset as CSV with header `x0,...,x{D-1}[,y]`. Values use Rust's
/// shortest round-trip formatting, so reading the file back is lossless.
pub fn write_csv_dataset<T: Scalar, W: Write>(writer: W, data: &Dataset<T>, kind: ModelKind) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let has_target = kind != ModelKind::GaussianMean;
    let mut header: Vec<String> = (0..data.dim()).map(|j| format!("x{j}")).collect();
    if has_target {
        header.push("y".into());
    }
    out.write_record(&header)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data.x().row(i).iter().map(|v| v.to_string()).collect();
        if has_target {
            row.push(data.y()[i].to_string());
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv_dataset<T: Scalar>(path: impl AsRef<Path>, data: &Dataset<T>, kind: ModelKind) -> Result<()> {
    write_csv_dataset(File::create(path)?, data, kind)
}
