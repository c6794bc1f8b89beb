//! JSON encoding shared by the library and the command-line tool.
//!
//! Matrices are `{"n": n, "entries": [[[re, im], ...], ...]}`, dense and
//! row-major. On input a bare number is accepted as a real entry.

use serde::{Deserialize, Serialize, Serializer};

use crate::clifford::UnitaryTuple;
use crate::error::{Error, Result};
use crate::extremality::{ExtremalityReport, ExtremeDecomposition};
use crate::matkernel::{CMatrix, Tolerance, C64};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl From<Entry> for C64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Complex([re, im]) => C64::new(re, im),
            Entry::Real(re) => C64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct MatrixIn {
    n: usize,
    entries: Vec<Vec<Entry>>,
}

fn rows_of(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    MatrixJson {
        n: m.nrows(),
        entries: rows_of(m),
    }
}

/// For `#[serde(serialize_with = ...)]` on square matrices.
pub fn serialize_matrix<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_json(m).serialize(s)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Json(e.to_string())
}

fn matrix_from(m: MatrixIn) -> Result<CMatrix> {
    if m.entries.len() != m.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            found: m.entries.len(),
        });
    }
    for row in &m.entries {
        if row.len() != m.n {
            return Err(Error::NotSquare {
                rows: m.n,
                cols: row.len(),
            });
        }
    }
    Ok(CMatrix::from_fn(m.n, m.n, |i, j| m.entries[i][j].into()))
}

pub fn parse_matrix(s: &str) -> Result<CMatrix> {
    matrix_from(serde_json::from_str(s).map_err(json_err)?)
}

pub fn matrix_to_string(m: &CMatrix) -> String {
    serde_json::to_string(&matrix_json(m)).expect("matrix serialization")
}

/// A frame as `{"r": r, "n": n, "vectors": rows}`; column j is `f_j`.
#[derive(Debug, Clone, Serialize)]
pub struct FrameJson {
    pub r: usize,
    pub n: usize,
    pub vectors: Vec<Vec<[f64; 2]>>,
}

pub fn frame_json(f: &CMatrix) -> FrameJson {
    FrameJson {
        r: f.nrows(),
        n: f.ncols(),
        vectors: rows_of(f),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TupleJson {
    pub k: usize,
    pub unitaries: Vec<MatrixJson>,
}

#[derive(Deserialize)]
struct TupleIn {
    k: usize,
    unitaries: Vec<MatrixIn>,
}

pub fn tuple_json(t: &UnitaryTuple) -> TupleJson {
    TupleJson {
        k: t.k(),
        unitaries: t.unitaries().iter().map(matrix_json).collect(),
    }
}

pub fn parse_tuple(s: &str, tol: &Tolerance) -> Result<UnitaryTuple> {
    let t: TupleIn = serde_json::from_str(s).map_err(json_err)?;
    let unitaries = t
        .unitaries
        .into_iter()
        .map(matrix_from)
        .collect::<Result<Vec<_>>>()?;
    if let Some(v) = unitaries.iter().find(|v| v.nrows() != t.k) {
        return Err(Error::DimensionMismatch {
            expected: t.k,
            found: v.nrows(),
        });
    }
    UnitaryTuple::new(unitaries, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct TermJson {
    pub weight: f64,
    pub matrix: MatrixJson,
    pub rank: usize,
    pub extreme: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionJson {
    pub terms: Vec<TermJson>,
    pub real_mode: bool,
}

pub fn decomposition_json(d: &ExtremeDecomposition) -> DecompositionJson {
    DecompositionJson {
        terms: d
            .terms
            .iter()
            .map(|t| TermJson {
                weight: t.weight,
                matrix: matrix_json(t.matrix.matrix()),
                rank: t.rank,
                extreme: t.extreme,
            })
            .collect(),
        real_mode: d.real_mode,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub is_extreme: bool,
    pub rank: usize,
    pub rank_bound_satisfied: bool,
    pub dimension: usize,
    pub real_mode: bool,
    pub witness: Option<MatrixJson>,
}

pub fn report_json(r: &ExtremalityReport) -> ReportJson {
    ReportJson {
        is_extreme: r.is_extreme,
        rank: r.rank,
        rank_bound_satisfied: r.rank_bound_satisfied,
        dimension: r.dimension,
        real_mode: r.real_mode,
        witness: r.witness.as_ref().map(|w| matrix_json(w.matrix())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::matkernel::max_abs_diff;

    #[test]
    fn matrix_round_trip() {
        let m = fixtures::x4_matrix();
        let s = matrix_to_string(&m);
        assert_eq!(parse_matrix(&s).unwrap(), m);
    }

    #[test]
    fn real_entries_accepted() {
        let m = parse_matrix(r#"{"n": 2, "entries": [[1, 0.5], [[0.5, 0], 1.0]]}"#).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(m[(1, 0)], C64::new(0.5, 0.0));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            parse_matrix(r#"{"n": 2, "entries": [[1, 0]]}"#),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            parse_matrix(r#"{"n": 2, "entries": [[1, 0], [0]]}"#),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(parse_matrix("{"), Err(Error::Json(_))));
    }

    #[test]
    fn tuple_round_trip() {
        let t = crate::moments::haar_tuple(3, 2, 1);
        let s = serde_json::to_string(&tuple_json(&t)).unwrap();
        let back = parse_tuple(&s, &Tolerance::default()).unwrap();
        for (a, b) in back.unitaries().iter().zip(t.unitaries()) {
            assert_eq!(max_abs_diff(a, b), 0.0);
        }
    }
}
