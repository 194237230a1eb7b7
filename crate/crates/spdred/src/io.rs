//! JSON and CSV file formats.
//!
//! Matrices are stored as arrays of rows. Floats are written in shortest
//! round-trip form, so reading a file back reproduces every bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use spdred_core::baselines::ReductionReport;
use spdred_core::lti::{LtiSystem, ReducedModel};
use spdred_core::optimizer::IterationRecord;
use spdred_core::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed JSON in {}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{0} must be a non-empty rectangular array of rows")]
    Ragged(&'static str),

    #[error("{0}")]
    Invalid(String),

    #[error("invalid system: {0}")]
    System(#[from] spdred_core::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Rows = Vec<Vec<f64>>;

pub fn matrix_from_rows(what: &'static str, rows: &Rows) -> Result<Matrix, IoError> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(IoError::Ragged(what));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| IoError::Json {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })
}

/// A full-order system `ẋ = −Ax + Bu, y = Cx`. With `gradient_system` set,
/// `C` is omitted and taken as `Bᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Rows>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub gradient_system: bool,
}

impl SystemFile {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_json(path, self)
    }

    pub fn from_matrices(a: &Matrix, b: &Matrix, c: Option<&Matrix>) -> Self {
        Self {
            a: matrix_to_rows(a),
            b: matrix_to_rows(b),
            c: c.map(matrix_to_rows),
            gradient_system: c.is_none(),
        }
    }

    /// Validates dimensions and the SPD property of `A`.
    pub fn to_system(&self) -> Result<LtiSystem, IoError> {
        let a = matrix_from_rows("A", &self.a)?;
        let b = matrix_from_rows("B", &self.b)?;
        if a.nrows() != a.ncols() {
            return Err(IoError::Invalid(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != a.nrows() {
            return Err(IoError::Invalid(format!(
                "B must have {} rows, got {}",
                a.nrows(),
                b.nrows()
            )));
        }
        let c = match (&self.c, self.gradient_system) {
            (None, true) => b.transpose(),
            (Some(_), true) => {
                return Err(IoError::Invalid(
                    "C must be omitted when gradient_system is true".into(),
                ))
            }
            (Some(c), false) => matrix_from_rows("C", c)?,
            (None, false) => {
                return Err(IoError::Invalid(
                    "missing C (or set gradient_system)".into(),
                ))
            }
        };
        if c.ncols() != a.nrows() {
            return Err(IoError::Invalid(format!(
                "C must have {} columns, got {}",
                a.nrows(),
                c.ncols()
            )));
        }
        Ok(LtiSystem::new(a, b, c)?)
    }
}

/// Starting data for an iterative method: an `n×r` basis `U`, or a reduced
/// triple (`C_r` may be omitted for gradient systems).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitFile {
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Rows>,
    #[serde(rename = "A_r", default, skip_serializing_if = "Option::is_none")]
    pub a_r: Option<Rows>,
    #[serde(rename = "B_r", default, skip_serializing_if = "Option::is_none")]
    pub b_r: Option<Rows>,
    #[serde(rename = "C_r", default, skip_serializing_if = "Option::is_none")]
    pub c_r: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitData {
    Basis(Matrix),
    Triple {
        a_r: Matrix,
        b_r: Matrix,
        c_r: Option<Matrix>,
    },
}

impl InitFile {
    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_json(path, self)
    }

    pub fn data(&self) -> Result<InitData, IoError> {
        match (&self.u, &self.a_r, &self.b_r) {
            (Some(u), None, None) => Ok(InitData::Basis(matrix_from_rows("U", u)?)),
            (None, Some(a), Some(b)) => Ok(InitData::Triple {
                a_r: matrix_from_rows("A_r", a)?,
                b_r: matrix_from_rows("B_r", b)?,
                c_r: self
                    .c_r
                    .as_ref()
                    .map(|c| matrix_from_rows("C_r", c))
                    .transpose()?,
            }),
            _ => Err(IoError::Invalid(
                "init file needs either \"U\" or both \"A_r\" and \"B_r\"".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub method: String,
    pub r: usize,
    pub h2_error: f64,
    pub relative_h2_error: f64,
    pub symmetry_defect: f64,
    pub spd_flag: bool,
    pub iterations: Option<usize>,
    pub grad_norm: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub converged: Option<bool>,
    /// Why an iterative method stopped.
    pub termination: Option<String>,
    #[serde(rename = "A_r")]
    pub a_r: Rows,
    #[serde(rename = "B_r")]
    pub b_r: Rows,
    #[serde(rename = "C_r")]
    pub c_r: Rows,
}

impl ReportFile {
    pub fn from_report(report: &ReductionReport, termination: Option<&str>) -> Self {
        Self {
            method: report.method.name().to_owned(),
            r: report.model.r(),
            h2_error: report.h2_error,
            relative_h2_error: report.relative_h2_error,
            symmetry_defect: report.symmetry_defect,
            spd_flag: report.spd_flag,
            iterations: report.iterations,
            grad_norm: report.grad_norm,
            wall_time_ms: report.wall_time_ms,
            converged: report.converged,
            termination: termination.map(str::to_owned),
            a_r: matrix_to_rows(&report.model.a),
            b_r: matrix_to_rows(&report.model.b),
            c_r: matrix_to_rows(&report.model.c),
        }
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let finite = [self.h2_error, self.relative_h2_error, self.symmetry_defect]
            .into_iter()
            .chain(self.grad_norm)
            .chain(self.wall_time_ms)
            .chain(
                self.a_r
                    .iter()
                    .chain(&self.b_r)
                    .chain(&self.c_r)
                    .flatten()
                    .copied(),
            )
            .all(f64::is_finite);
        if !finite {
            return Err(IoError::Invalid(
                "report contains non-finite numbers".into(),
            ));
        }
        write_json(path, self)
    }

    pub fn model(&self) -> Result<ReducedModel, IoError> {
        Ok(ReducedModel {
            a: matrix_from_rows("A_r", &self.a_r)?,
            b: matrix_from_rows("B_r", &self.b_r)?,
            c: matrix_from_rows("C_r", &self.c_r)?,
        })
    }
}

#[derive(Debug, Serialize)]
struct TraceRow {
    iter: usize,
    #[serde(rename = "J")]
    j: f64,
    grad_norm: f64,
    delta: f64,
    rho: f64,
    accepted: bool,
}

/// Iteration trace as CSV: `iter,J,grad_norm,delta,rho,accepted`.
pub fn write_trace(path: &Path, records: &[IterationRecord]) -> Result<(), IoError> {
    let file = fs::File::create(path).map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(["iter", "J", "grad_norm", "delta", "rho", "accepted"])?;
    for rec in records {
        w.serialize(TraceRow {
            iter: rec.iter,
            j: rec.j,
            grad_norm: rec.grad_norm,
            delta: rec.delta,
            rho: rec.rho,
            accepted: rec.accepted,
        })?;
    }
    w.flush().map_err(|source| IoError::Write {
        path: path.to_owned(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use spdred_core::fixtures::five_state_system;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name)
    }

    #[test]
    fn fixture_matches_built_in_system() {
        let sys = SystemFile::read(&fixture("five_state.json"))
            .unwrap()
            .to_system()
            .unwrap();
        let builtin = five_state_system();
        assert_eq!(sys.a(), builtin.a());
        assert_eq!(sys.b(), builtin.b());
        assert_eq!(sys.c(), builtin.c());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(
            matrix_from_rows("A", &rows),
            Err(IoError::Ragged("A"))
        ));
        assert!(matches!(
            matrix_from_rows("A", &vec![]),
            Err(IoError::Ragged("A"))
        ));
    }

    #[test]
    fn gradient_system_takes_c_from_b() {
        let file = SystemFile {
            a: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
            b: vec![vec![1.0], vec![-1.0]],
            c: None,
            gradient_system: true,
        };
        let sys = file.to_system().unwrap();
        assert_eq!(sys.c(), &sys.b().transpose());
        let mut bad = file.clone();
        bad.c = Some(vec![vec![1.0, 1.0]]);
        assert!(bad.to_system().is_err());
        bad.gradient_system = false;
        bad.c = None;
        assert!(bad.to_system().is_err());
    }

    #[test]
    fn asymmetric_a_is_rejected() {
        let file = SystemFile {
            a: vec![vec![2.0, 1.0], vec![0.0, 1.0]],
            b: vec![vec![1.0], vec![1.0]],
            c: Some(vec![vec![1.0, 1.0]]),
            gradient_system: false,
        };
        assert!(matches!(
            file.to_system(),
            Err(IoError::System(spdred_core::Error::NotSymmetric { .. }))
        ));
    }

    #[test]
    fn rows_round_trip_exactly() {
        let m = Matrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2.5e-300, 7.0, f64::MAX, -0.0]);
        let json = serde_json::to_string(&matrix_to_rows(&m)).unwrap();
        let rows: Rows = serde_json::from_str(&json).unwrap();
        let back = matrix_from_rows("M", &rows).unwrap();
        assert!(m
            .iter()
            .zip(back.iter())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn init_file_variants() {
        let basis = InitFile::read(&fixture("five_state_stiefel_basis.json")).unwrap();
        assert!(matches!(basis.data().unwrap(), InitData::Basis(u) if u.shape() == (5, 3)));
        let triple = InitFile::read(&fixture("two_state_init.json")).unwrap();
        assert!(matches!(
            triple.data().unwrap(),
            InitData::Triple { c_r: Some(_), .. }
        ));
        let empty = InitFile {
            u: None,
            a_r: None,
            b_r: None,
            c_r: None,
        };
        assert!(empty.data().is_err());
    }
}
