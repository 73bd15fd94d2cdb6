//! JSON documents for pairs and sequences.
//!
//! ```json
//! {"variables": 2,
//!  "P": [{"exponents": [1, -1], "re": 0.5, "im": 0.0}, ...],
//!  "Q": [...],
//!  "name": "optional", "source": "optional"}
//!
//! {"variables": 2, "phases": [0.0, 1.5707963267948966], "indices": [1]}
//! ```
//!
//! Indices are 1-based. Terms are written in lexicographic exponent order.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{LaurentPoly, PolyError};
use crate::su2::{MqspSequence, PqPair, SequenceError};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{component}: exponent vector {exponents:?} has length {got}, expected {expected}")]
    ExponentLength {
        component: &'static str,
        exponents: Vec<i64>,
        expected: usize,
        got: usize,
    },
    #[error("{component}: duplicate exponent vector {0:?}", .exponents)]
    DuplicateExponents {
        component: &'static str,
        exponents: Vec<i64>,
    },
    #[error("{component}: exponent {value} does not fit in 32 bits")]
    ExponentRange { component: &'static str, value: i64 },
    #[error("{component}: coefficient for {exponents:?} is not finite")]
    NonFinite {
        component: &'static str,
        exponents: Vec<i64>,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub exponents: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPairDocument {
    pub variables: usize,
    #[serde(rename = "P")]
    pub p: Vec<TermRecord>,
    #[serde(rename = "Q")]
    pub q: Vec<TermRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

fn records(p: &LaurentPoly) -> Vec<TermRecord> {
    p.terms()
        .map(|(e, c)| TermRecord {
            exponents: e.as_slice().iter().map(|&k| i64::from(k)).collect(),
            re: c.re,
            im: c.im,
        })
        .collect()
}

fn poly_from_records(
    component: &'static str,
    variables: usize,
    terms: &[TermRecord],
    tol: f64,
) -> Result<LaurentPoly, DocumentError> {
    let mut seen = BTreeSet::new();
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        if t.exponents.len() != variables {
            return Err(DocumentError::ExponentLength {
                component,
                exponents: t.exponents.clone(),
                expected: variables,
                got: t.exponents.len(),
            });
        }
        if !seen.insert(t.exponents.clone()) {
            return Err(DocumentError::DuplicateExponents {
                component,
                exponents: t.exponents.clone(),
            });
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(DocumentError::NonFinite {
                component,
                exponents: t.exponents.clone(),
            });
        }
        let exps = t
            .exponents
            .iter()
            .map(|&k| {
                i32::try_from(k).map_err(|_| DocumentError::ExponentRange {
                    component,
                    value: k,
                })
            })
            .collect::<Result<Vec<i32>, _>>()?;
        parsed.push((exps, Complex64::new(t.re, t.im)));
    }
    Ok(LaurentPoly::from_terms(variables, parsed)?.with_tolerance(tol)?)
}

impl PolyPairDocument {
    pub fn from_pair(pair: &PqPair) -> Self {
        PolyPairDocument {
            variables: pair.variables(),
            p: records(&pair.p),
            q: records(&pair.q),
            name: None,
            source: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes") + "\n"
    }

    /// Validates the document and builds the pair, thresholded at `tol`.
    pub fn to_pair(&self, tol: f64) -> Result<PqPair, DocumentError> {
        let p = poly_from_records("P", self.variables, &self.p, tol)?;
        let q = poly_from_records("Q", self.variables, &self.q, tol)?;
        Ok(PqPair::new(p, q)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDocument {
    pub variables: usize,
    pub phases: Vec<f64>,
    pub indices: Vec<usize>,
}

impl SequenceDocument {
    pub fn from_sequence(seq: &MqspSequence) -> Self {
        SequenceDocument {
            variables: seq.variables(),
            phases: seq.phases().to_vec(),
            indices: seq.indices().to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes") + "\n"
    }

    pub fn to_sequence(&self) -> Result<MqspSequence, DocumentError> {
        Ok(MqspSequence::new(
            self.variables,
            self.phases.clone(),
            self.indices.clone(),
        )?)
    }
}

/// Built-in pairs shipped with the library.
pub mod fixtures {
    use super::*;
    use crate::su2::PolyMatrix;

    const COUNTEREXAMPLE_JSON: &str = include_str!("../fixtures/counterexample_p22_q22.json");

    /// Names accepted by [`by_name`].
    pub const NAMES: [&str; 3] = ["counterexample", "identity", "signal"];

    /// The two-variable pair `(P_{2,2}, Q_{2,2})`: every necessary condition
    /// holds, yet no M-QSP sequence of any length realizes it.
    pub fn counterexample_document() -> PolyPairDocument {
        PolyPairDocument::from_json(COUNTEREXAMPLE_JSON).expect("bundled fixture parses")
    }

    pub fn counterexample() -> PqPair {
        counterexample_document()
            .to_pair(crate::laurent::DEFAULT_TOLERANCE)
            .expect("bundled fixture is valid")
    }

    /// `(1, 0)` in one variable.
    pub fn identity() -> PqPair {
        PqPair::identity(1).expect("one variable")
    }

    /// Top row of `A(a)` in one variable.
    pub fn signal() -> PqPair {
        PolyMatrix::signal_operator(1, 1)
            .expect("index 1 of 1")
            .top_row()
    }

    pub fn by_name(name: &str) -> Option<PolyPairDocument> {
        let (pair, label) = match name {
            "counterexample" => return Some(counterexample_document()),
            "identity" => (identity(), "identity pair (1, 0)"),
            "signal" => (signal(), "signal operator A(a)"),
            _ => return None,
        };
        let mut doc = PolyPairDocument::from_pair(&pair);
        doc.name = Some(name.to_string());
        doc.source = Some(label.to_string());
        Some(doc)
    }
}
