//! Matrix files and fixed-precision float output.
//!
//! Every float is written as `{:.16e}` (17 significant digits), which
//! round-trips `f64` exactly and is stable across platforms.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// An `f64` that serializes in 17-significant-digit scientific notation.
/// Non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl fmt::Display for Sci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sci {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Option::<f64>::deserialize(d).map(|v| Sci(v.unwrap_or(f64::NAN)))
    }
}

/// `{rows, cols, data: [[re, im], ...]}` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[Sci; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                data.push([Sci(z.re), Sci(z.im)]);
            }
        }
        Self { rows, cols, data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::dims(self.rows * self.cols, self.data.len()));
        }
        if self.data.iter().any(|[re, im]| !re.0.is_finite() || !im.0.is_finite()) {
            return Err(Error::Parameter("non-finite matrix entry".into()));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re.0, im.0)
        }))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("matrix file serialization")
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Parameter(format!("bad matrix file: {e}")))?;
    file.to_matrix()
}

/// CSV with one `re,im` pair per cell: a row of the matrix is one line of
/// `2 · cols` fields.
pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols())
            .map(|j| format!("{},{}", Sci(m[(i, j)].re), Sci(m[(i, j)].im)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse a `[re, im]` JSON pair into a complex number (helper for config files).
pub fn complex_from_pair<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<num_complex::Complex64, D::Error> {
    let v = <[f64; 2]>::deserialize(d).map_err(D::Error::custom)?;
    Ok(c(v[0], v[1]))
}
