//! JSON tuple file format shared by CLI input, transform output and witnesses.
//!
//! ```json
//! {"d": 1, "n": 2, "matrices": [[[[0,0],[1,0]], [[0,0],[0,0]]]],
//!  "metadata": {"name": "jordan"}}
//! ```
//!
//! Each matrix is a list of rows and each entry is a `[re, im]` pair.
//! Floats are written in shortest round-trip form, so a file re-parses to
//! bit-identical values.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::tuple::OperatorTuple;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TupleMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleFile {
    pub d: usize,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<TupleMetadata>,
}

impl TupleFile {
    pub fn from_tuple(t: &OperatorTuple) -> Self {
        let n = t.dim();
        let matrices = t
            .iter()
            .map(|m| {
                (0..n)
                    .map(|i| (0..n).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
                    .collect()
            })
            .collect();
        Self {
            d: t.d(),
            n,
            matrices,
            metadata: None,
        }
    }

    pub fn with_metadata(mut self, metadata: TupleMetadata) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn to_tuple(&self) -> Result<OperatorTuple> {
        let ms = self
            .matrices
            .iter()
            .map(|rows| {
                let entries = rows.iter().flatten().map(|&[re, im]| c64::new(re, im)).collect();
                ComplexMatrix::from_row_major(self.n, self.n, entries)
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorTuple::new(ms)
    }

    /// Parse and validate, naming the first offending field on failure.
    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| bad("$", "expected an object"))?;
        let d = positive(obj.get("d"), "d")?;
        let n = positive(obj.get("n"), "n")?;
        let list = obj
            .get("matrices")
            .ok_or_else(|| bad("matrices", "missing"))?
            .as_array()
            .ok_or_else(|| bad("matrices", "expected an array"))?;
        if list.len() != d {
            return Err(bad("matrices", &format!("has {} entries but d = {d}", list.len())));
        }
        let mut matrices = Vec::with_capacity(d);
        for (k, m) in list.iter().enumerate() {
            let path = format!("matrices[{k}]");
            let rows = m.as_array().ok_or_else(|| bad(&path, "expected an array of rows"))?;
            if rows.len() != n {
                return Err(bad(&path, &format!("has {} rows but n = {n}", rows.len())));
            }
            let mut out_rows = Vec::with_capacity(n);
            for (i, row) in rows.iter().enumerate() {
                let path = format!("matrices[{k}][{i}]");
                let row = row.as_array().ok_or_else(|| bad(&path, "expected an array of entries"))?;
                if row.len() != n {
                    return Err(bad(&path, &format!("has {} entries but n = {n}", row.len())));
                }
                let mut out = Vec::with_capacity(n);
                for (j, z) in row.iter().enumerate() {
                    out.push(entry(z, &format!("matrices[{k}][{i}][{j}]"))?);
                }
                out_rows.push(out);
            }
            matrices.push(out_rows);
        }
        let metadata = match obj.get("metadata") {
            None | Some(Value::Null) => None,
            Some(m) => Some(
                serde_json::from_value::<TupleMetadata>(m.clone())
                    .map_err(|e| bad("metadata", &e.to_string()))?,
            ),
        };
        Ok(Self { d, n, matrices, metadata })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("tuple file serializes")
    }
}

fn bad(field: &str, msg: &str) -> Error {
    Error::Input(format!("field `{field}`: {msg}"))
}

fn positive(v: Option<&Value>, field: &str) -> Result<usize> {
    let v = v.ok_or_else(|| bad(field, "missing"))?;
    match v.as_u64() {
        Some(x) if x >= 1 => Ok(x as usize),
        _ => Err(bad(field, &format!("expected a positive integer, got {v}"))),
    }
}

fn entry(z: &Value, path: &str) -> Result<[f64; 2]> {
    let pair = z
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| bad(path, "expected a [re, im] pair"))?;
    let mut out = [0.0; 2];
    for (slot, x) in out.iter_mut().zip(pair) {
        *slot = x
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(path, &format!("expected a finite number, got {x}")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::noncommuting_pair;
    use crate::linalg::{random_matrix, MatrixKind};

    #[test]
    fn round_trip_is_bit_exact() {
        let t = OperatorTuple::new(vec![
            random_matrix(3, MatrixKind::Dense, 1).unwrap(),
            random_matrix(3, MatrixKind::Normal, 2).unwrap(),
        ])
        .unwrap();
        let file = TupleFile::from_tuple(&t).with_metadata(TupleMetadata {
            name: Some("r".into()),
            description: None,
            seed: Some(u64::MAX),
        });
        let back = TupleFile::parse(&file.to_json_pretty()).unwrap();
        assert_eq!(back, file);
        let t2 = back.to_tuple().unwrap();
        for (a, b) in t.iter().zip(t2.iter()) {
            for (x, y) in a.row_major().iter().zip(b.row_major()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |s: &str| TupleFile::parse(s).unwrap_err().to_string();
        assert!(msg(r#"{"d":1,"n":2,"matrices":[[[[0,0],[1,0]],[[0,0]]]]}"#).contains("matrices[0][1]"));
        assert!(msg(r#"{"d":0,"n":2,"matrices":[]}"#).contains("`d`"));
        assert!(msg(r#"{"d":1,"n":1,"matrices":[[[[0,"x"]]]]}"#).contains("matrices[0][0][0]"));
        assert!(msg(r#"{"d":2,"n":1,"matrices":[[[[0,0]]]]}"#).contains("`matrices`"));
        assert!(msg(r#"{"d":1,"n":1"#).contains("invalid JSON"));
        assert!(msg(r#"{"n":1,"matrices":[]}"#).contains("`d`"));
    }

    #[test]
    fn example_file() {
        let f = TupleFile::from_tuple(&noncommuting_pair());
        assert_eq!((f.d, f.n), (2, 2));
        assert_eq!(f.matrices[1][0][1], [-1.0, 0.0]);
    }
}
