//! JSON encoding of complex matrices: `{"dim": [rows, cols], "data": [[re, im], ...]}`
//! with `data` in row-major order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: [usize; 2],
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let (r, c) = m.shape();
        let data = (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self { dim: [r, c], data }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let [r, c] = self.dim;
        if self.data.len() != r * c {
            return Err(Error::DimensionMismatch(format!(
                "matrix declares {r}x{c} but holds {} entries",
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            r,
            c,
            self.data.iter().map(|&[re, im]| Complex64::new(re, im)),
        ))
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string(&MatrixJson::from_matrix(m))?)
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<MatrixJson>(text)?.to_matrix()
}

pub fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

pub fn serialize_matrices<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ms.iter().map(MatrixJson::from_matrix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_matrix, rng};

    #[test]
    fn round_trip_is_exact() {
        let mut r = rng(1);
        let m = ComplexMatrix::from_fn(2, 3, |i, j| random_matrix(&mut r, 3)[(i, j)]);
        let back = matrix_from_json(&matrix_to_json(&m).unwrap()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn layout_is_row_major() {
        let m = ComplexMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 2.0), Complex64::new(3.0, -4.0)]);
        assert_eq!(matrix_to_json(&m).unwrap(), r#"{"dim":[1,2],"data":[[1.0,2.0],[3.0,-4.0]]}"#);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matrix_from_json(r#"{"dim":[2,2],"data":[[1,0]]}"#).is_err());
        assert!(matrix_from_json(r#"{"dim":[1,1],"data":[[1,0]],"extra":1}"#).is_err());
    }
}
