//! Serde helpers writing dense matrices as arrays of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != c) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(n, c, |i, k| rows[i][k]))
}

pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
    rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
    let r = Vec::<Vec<f64>>::deserialize(d)?;
    from_rows(&r).map_err(serde::de::Error::custom)
}
