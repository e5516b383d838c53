//! JSON interchange for tuples (schema version 1).
//!
//! Complex numbers are `{re, im}` objects. serde_json prints floats as
//! shortest round-trip decimals and, with `float_roundtrip`, parses them back
//! to the same bits, so `load ∘ save` is the identity.

use std::collections::BTreeMap;

use qmc_core::linalg::{CMatrix, C64};
use qmc_core::qseries::QBase;
use qmc_core::system::{MCResult, SystemTuple};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

impl From<Complex> for C64 {
    fn from(z: Complex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub type JsonMatrix = Vec<Vec<Complex>>;

fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect()).collect()
}

fn matrix_from_json(rows: &JsonMatrix, what: &str) -> Result<CMatrix, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(CliError::Format(format!("{what}: rows have different lengths")));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| rows[i][j].into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McInfo {
    pub lambda: Complex,
    pub dim_k: usize,
    pub dim_l: usize,
    pub quotient: usize,
    /// `C^{(N+1)m} → quotient`.
    pub proj: JsonMatrix,
    /// A right inverse of `proj`.
    pub lift: JsonMatrix,
}

impl McInfo {
    pub fn new(lambda: C64, mc: &MCResult) -> Self {
        McInfo {
            lambda: lambda.into(),
            dim_k: mc.dim_k(),
            dim_l: mc.dim_l(),
            quotient: mc.quotient_dim(),
            proj: matrix_to_json(&mc.proj),
            lift: matrix_to_json(&mc.lift),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleDocument {
    pub schema_version: String,
    pub q: Complex,
    pub poles: Vec<Complex>,
    pub matrices: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl TupleDocument {
    pub fn from_tuple(t: &SystemTuple, metadata: Option<Metadata>) -> Self {
        TupleDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            q: t.base().q().into(),
            poles: t.poles().iter().map(|&b| b.into()).collect(),
            matrices: t.matrices().iter().map(matrix_to_json).collect(),
            metadata,
        }
    }

    /// Checks the document invariants and builds the tuple.
    pub fn to_tuple(&self) -> Result<SystemTuple, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Format(format!(
                "schema_version {:?} is not supported (expected {SCHEMA_VERSION:?})",
                self.schema_version
            )));
        }
        match self.poles.first() {
            Some(b0) if b0.re == 0.0 && b0.im == 0.0 => {}
            _ => return Err(CliError::Format("poles[0] must be exactly 0".into())),
        }
        if self.matrices.len() != self.poles.len() {
            return Err(CliError::Format(format!(
                "{} matrices for {} poles",
                self.matrices.len(),
                self.poles.len()
            )));
        }
        let mut mats = Vec::with_capacity(self.matrices.len());
        for (i, rows) in self.matrices.iter().enumerate() {
            let m = matrix_from_json(rows, &format!("matrices[{i}]"))?;
            if !m.is_square() || m.nrows() == 0 {
                return Err(CliError::Format(format!("matrices[{i}] is {}×{}, not square", m.nrows(), m.ncols())));
            }
            mats.push(m);
        }
        let base = QBase::new(self.q.into()).map_err(|e| CliError::Format(e.to_string()))?;
        let poles = self.poles.iter().map(|&b| b.into()).collect();
        SystemTuple::new(base, poles, mats).map_err(|e| CliError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let doc: TupleDocument = serde_json::from_str(text).map_err(|e| CliError::Format(format!("malformed document: {e}")))?;
        doc.to_tuple()?;
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_shifted_first_pole() {
        let text = r#"{"schema_version":"1","q":{"re":0.5,"im":0},"poles":[{"re":1e-300,"im":0}],"matrices":[[[{"re":1,"im":0}]]]}"#;
        assert!(matches!(TupleDocument::from_json(text), Err(CliError::Format(_))));
    }

    #[test]
    fn rejects_ragged_matrices() {
        let text = r#"{"schema_version":"1","q":{"re":0.5,"im":0},"poles":[{"re":0,"im":0}],
            "matrices":[[[{"re":1,"im":0},{"re":1,"im":0}],[{"re":1,"im":0}]]]}"#;
        assert!(TupleDocument::from_json(text).is_err());
    }

    #[test]
    fn awkward_floats_survive() {
        let vals = [0.1 + 0.2, 1.0 / 3.0, -0.0, 5e-324, 1.7976931348623157e308, 0.45f64.powf(0.37)];
        let doc = TupleDocument {
            schema_version: "1".into(),
            q: Complex { re: 0.45, im: 0.0 },
            poles: vec![Complex { re: 0.0, im: 0.0 }],
            matrices: vec![vec![vec![Complex { re: vals[0], im: vals[1] }; 1]]],
            metadata: None,
        };
        for &v in &vals {
            let mut d = doc.clone();
            d.matrices[0][0][0].re = v;
            let back = TupleDocument::from_json(&d.to_json()).unwrap();
            assert_eq!(back.matrices[0][0][0].re.to_bits(), v.to_bits());
        }
    }
}
