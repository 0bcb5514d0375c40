//! On-disk formats.
//!
//! Matrix: `{"dim": n, "entries": [[[re, im], ...], ...]}` (row-major rows).
//! Decomposition: `{"dim": n, "blocks": [{"lambda": x, "projector": <matrix>}, ...]}`
//! with strictly increasing `lambda`. Reals that may be infinite are written
//! as numbers when finite and as the strings `"inf"` / `"-inf"` otherwise.

use std::fs;
use std::io;
use std::path::Path;

use mre_core::{Complex64, ComplexMatrix, DensityOperator, ProjectiveDecomposition};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let entries = (0..m.dim()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect();
        Self { dim: m.dim(), entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        if self.entries.len() != self.dim || self.entries.iter().any(|r| r.len() != self.dim) {
            return Err(format!("expected {0}×{0} entries", self.dim));
        }
        let flat = self.entries.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_row_major(self.dim, flat).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFile {
    pub lambda: f64,
    pub projector: MatrixFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub dim: usize,
    pub blocks: Vec<BlockFile>,
}

impl DecompositionFile {
    pub fn from_decomposition(pvm: &ProjectiveDecomposition) -> Self {
        let blocks = pvm.blocks().iter().map(|b| BlockFile { lambda: b.lambda, projector: MatrixFile::from_matrix(&b.projector) }).collect();
        Self { dim: pvm.dim(), blocks }
    }

    pub fn to_decomposition(&self) -> Result<ProjectiveDecomposition, String> {
        let blocks = self.blocks.iter().map(|b| Ok((b.lambda, b.projector.to_matrix()?))).collect::<Result<Vec<_>, String>>()?;
        ProjectiveDecomposition::new(self.dim, blocks).map_err(|e| e.to_string())
    }
}

/// A real that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JsonReal(pub f64);

impl Serialize for JsonReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            x if x.is_finite() => s.serialize_f64(x),
            x if x == f64::INFINITY => s.serialize_str("inf"),
            x if x == f64::NEG_INFINITY => s.serialize_str("-inf"),
            _ => s.serialize_str("nan"),
        }
    }
}

impl<'de> Deserialize<'de> for JsonReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::Number(n) => n.as_f64().map(JsonReal).ok_or_else(|| D::Error::custom("number out of range")),
            serde_json::Value::String(s) => match s.as_str() {
                "inf" => Ok(JsonReal(f64::INFINITY)),
                "-inf" => Ok(JsonReal(f64::NEG_INFINITY)),
                "nan" => Ok(JsonReal(f64::NAN)),
                other => Err(D::Error::custom(format!("unexpected string {other:?}"))),
            },
            other => Err(D::Error::custom(format!("expected a number, got {other}"))),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_owned(), message: e.to_string() })
}

pub fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    read_json::<MatrixFile>(path)?.to_matrix().map_err(|message| CliError::Parse { path: path.to_owned(), message })
}

pub fn read_state(path: &Path) -> CliResult<DensityOperator> {
    Ok(DensityOperator::new(read_matrix(path)?)?)
}

pub fn read_decomposition(path: &Path) -> CliResult<ProjectiveDecomposition> {
    read_json::<DecompositionFile>(path)?.to_decomposition().map_err(|message| CliError::Parse { path: path.to_owned(), message })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Single-line JSON with a space after `:` and `,`.
pub fn to_spaced_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SpacedFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

struct SpacedFormatter;

impl serde_json::ser::Formatter for SpacedFormatter {
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_fn(3, |i, j| Complex64::new(i as f64, j as f64 - 0.5));
        let back = MatrixFile::from_matrix(&m).to_matrix().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let f = MatrixFile { dim: 2, entries: vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]] };
        assert!(f.to_matrix().is_err());
    }

    #[test]
    fn decomposition_round_trip() {
        let pvm = mre_core::random_pvm(4, &[1, 3], 2).unwrap();
        let back = DecompositionFile::from_decomposition(&pvm).to_decomposition().unwrap();
        assert!((&back.observable() - &pvm.observable()).max_abs() < 1e-15);
    }

    #[test]
    fn decomposition_requires_increasing_lambda() {
        let mut f = DecompositionFile::from_decomposition(&ProjectiveDecomposition::computational_basis(2));
        f.blocks.swap(0, 1);
        assert!(f.to_decomposition().is_err());
    }

    #[test]
    fn infinite_reals() {
        assert_eq!(serde_json::to_string(&JsonReal(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&JsonReal(0.5)).unwrap(), "0.5");
        assert_eq!(serde_json::from_str::<JsonReal>("\"inf\"").unwrap(), JsonReal(f64::INFINITY));
        assert_eq!(serde_json::from_str::<JsonReal>("2.0").unwrap(), JsonReal(2.0));
        assert!(serde_json::from_str::<JsonReal>("\"big\"").is_err());
    }

    #[test]
    fn spaced_output() {
        let v = serde_json::json!({"posterior": [0.25, 0.75]});
        assert_eq!(to_spaced_string(&v), "{\"posterior\": [0.25, 0.75]}");
    }
}
