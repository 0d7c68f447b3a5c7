//! JSON encoding shared by every artifact: a complex scalar is `[re, im]`,
//! a matrix is an array of row arrays.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{c, ComplexMatrix, ComplexVector};

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix, String> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(format!("row {bad} has {} entries, expected {ncols}", rows[bad].len()));
    }
    Ok(ComplexMatrix::from_fn(rows.len(), ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

pub fn vector_to_json(v: &ComplexVector) -> Vec<ComplexJson> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(entries: &[ComplexJson]) -> ComplexVector {
    ComplexVector::from_iterator(entries.len(), entries.iter().map(|e| c(e[0], e[1])))
}

/// `#[serde(with = "matrix")]` for a single `ComplexMatrix`.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let rows = MatrixJson::deserialize(d)?;
        matrix_from_json(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "matrix_list")]` for `Vec<ComplexMatrix>`.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        let raw = Vec::<MatrixJson>::deserialize(d)?;
        raw.iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m).map_err(|e| serde::de::Error::custom(format!("matrix {i}: {e}"))))
            .collect()
    }
}

/// `#[serde(with = "matrix_grid")]` for `Vec<Vec<ComplexMatrix>>`.
pub mod matrix_grid {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[Vec<ComplexMatrix>], s: S) -> Result<S::Ok, S::Error> {
        ms.iter()
            .map(|row| row.iter().map(matrix_to_json).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<ComplexMatrix>>, D::Error> {
        let raw = Vec::<Vec<MatrixJson>>::deserialize(d)?;
        raw.iter()
            .enumerate()
            .map(|(v, row)| {
                row.iter()
                    .enumerate()
                    .map(|(i, m)| {
                        matrix_from_json(m)
                            .map_err(|e| serde::de::Error::custom(format!("question {v}, outcome {i}: {e}")))
                    })
                    .collect()
            })
            .collect()
    }
}

/// `#[serde(with = "vector")]` for a `ComplexVector`.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &ComplexVector, s: S) -> Result<S::Ok, S::Error> {
        vector_to_json(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexVector, D::Error> {
        Ok(vector_from_json(&Vec::<ComplexJson>::deserialize(d)?))
    }
}
