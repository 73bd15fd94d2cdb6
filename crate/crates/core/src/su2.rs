//! 2x2 matrices over Laurent polynomials, the `(P, Q)` embedding, and
//! brute-force evaluation of M-QSP sequences.
//!
//! A pair `(P, Q)` stands for the matrix
//!
//! ```text
//! [[ P,            Q          ],
//!  [ -conj_T(Q),   conj_T(P)  ]]
//! ```
//!
//! where `conj_T = star . invert_vars` realizes complex conjugation on the
//! torus as a polynomial operation.

use num_complex::Complex64;
use thiserror::Error;

use crate::laurent::{LaurentPoly, PolyError, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error("sequence needs at least one variable")]
    NoVariables,
    #[error("{phases} phases given for {indices} indices; expected indices + 1")]
    LengthMismatch { phases: usize, indices: usize },
    #[error("index {index} at step {step} is outside 1..={variables}")]
    IndexOutOfRange {
        step: usize,
        index: usize,
        variables: usize,
    },
    #[error("phase at position {0} is not finite")]
    NonFinitePhase(usize),
}

/// Matrix `[[e00, e01], [e10, e11]]` of same-arity Laurent polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    pub entries: [[LaurentPoly; 2]; 2],
}

impl PolyMatrix {
    pub fn new(entries: [[LaurentPoly; 2]; 2]) -> Result<Self, PolyError> {
        let m = entries[0][0].variables();
        for e in entries.iter().flatten() {
            if e.variables() != m {
                return Err(PolyError::ArityMismatch {
                    left: m,
                    right: e.variables(),
                });
            }
        }
        Ok(PolyMatrix { entries })
    }

    pub fn variables(&self) -> usize {
        self.entries[0][0].variables()
    }

    pub fn identity(variables: usize) -> Result<Self, PolyError> {
        let one = LaurentPoly::one(variables)?;
        let zero = LaurentPoly::zero(variables)?;
        Ok(PolyMatrix {
            entries: [[one.clone(), zero.clone()], [zero, one]],
        })
    }

    /// Signal operator `A(a_j)`: diagonal `(a_j + a_j^-1)/2`, off-diagonal
    /// `(a_j - a_j^-1)/2`.
    pub fn signal_operator(j: usize, variables: usize) -> Result<Self, PolyError> {
        let c = LaurentPoly::half_sum(variables, j, 1.0)?;
        let s = LaurentPoly::half_sum(variables, j, -1.0)?;
        Ok(PolyMatrix {
            entries: [[c.clone(), s.clone()], [s, c]],
        })
    }

    /// `exp(i phi sigma_z) = diag(e^{i phi}, e^{-i phi})`.
    pub fn z_rotation(phi: f64, variables: usize) -> Result<Self, PolyError> {
        let w = Complex64::from_polar(1.0, phi);
        let zero = LaurentPoly::zero(variables)?;
        Ok(PolyMatrix {
            entries: [
                [LaurentPoly::constant(variables, w)?, zero.clone()],
                [zero, LaurentPoly::constant(variables, w.conj())?],
            ],
        })
    }

    pub fn mat_mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix, PolyError> {
        let a = &self.entries;
        let b = &rhs.entries;
        let entry = |r: usize, c: usize| -> Result<LaurentPoly, PolyError> {
            a[r][0].mul(&b[0][c])?.add(&a[r][1].mul(&b[1][c])?)
        };
        Ok(PolyMatrix {
            entries: [[entry(0, 0)?, entry(0, 1)?], [entry(1, 0)?, entry(1, 1)?]],
        })
    }

    pub fn det(&self) -> Result<LaurentPoly, PolyError> {
        let e = &self.entries;
        e[0][0].mul(&e[1][1])?.sub(&e[0][1].mul(&e[1][0])?)
    }

    /// Re-thresholds every entry at `tol`.
    pub fn with_tolerance(self, tol: f64) -> Result<Self, PolyError> {
        let [[a, b], [c, d]] = self.entries;
        Ok(PolyMatrix {
            entries: [
                [a.with_tolerance(tol)?, b.with_tolerance(tol)?],
                [c.with_tolerance(tol)?, d.with_tolerance(tol)?],
            ],
        })
    }

    pub fn top_row(&self) -> PqPair {
        PqPair {
            p: self.entries[0][0].clone(),
            q: self.entries[0][1].clone(),
        }
    }

    pub fn approx_eq(&self, other: &PolyMatrix, tol: f64) -> Result<bool, PolyError> {
        for (x, y) in self
            .entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
        {
            if !x.approx_eq(y, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether the bottom row is `(-conj_T(Q), conj_T(P))` of the top row.
    pub fn is_pair_form(&self, tol: f64) -> Result<bool, PolyError> {
        let e = &self.entries;
        Ok(e[1][0].approx_eq(&e[0][1].torus_conj().neg(), tol)?
            && e[1][1].approx_eq(&e[0][0].torus_conj(), tol)?)
    }
}

/// Top row `(P, Q)` of a structured 2x2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PqPair {
    pub p: LaurentPoly,
    pub q: LaurentPoly,
}

impl PqPair {
    pub fn new(p: LaurentPoly, q: LaurentPoly) -> Result<Self, PolyError> {
        if p.variables() != q.variables() {
            return Err(PolyError::ArityMismatch {
                left: p.variables(),
                right: q.variables(),
            });
        }
        Ok(PqPair { p, q })
    }

    /// The pair `(1, 0)`.
    pub fn identity(variables: usize) -> Result<Self, PolyError> {
        Ok(PqPair {
            p: LaurentPoly::one(variables)?,
            q: LaurentPoly::zero(variables)?,
        })
    }

    pub fn variables(&self) -> usize {
        self.p.variables()
    }

    pub fn with_tolerance(self, tol: f64) -> Result<Self, PolyError> {
        Ok(PqPair {
            p: self.p.with_tolerance(tol)?,
            q: self.q.with_tolerance(tol)?,
        })
    }

    pub fn to_matrix(&self) -> PolyMatrix {
        PolyMatrix {
            entries: [
                [self.p.clone(), self.q.clone()],
                [self.q.torus_conj().neg(), self.p.torus_conj()],
            ],
        }
    }

    /// `P conj_T(P) + Q conj_T(Q)`, which is the constant 1 exactly when
    /// `|P|^2 + |Q|^2 = 1` on the torus.
    pub fn normalization(&self) -> Result<LaurentPoly, PolyError> {
        self.p
            .mul(&self.p.torus_conj())?
            .add(&self.q.mul(&self.q.torus_conj())?)
    }

    pub fn is_normalized(&self, tol: f64) -> Result<bool, PolyError> {
        self.normalization()?
            .approx_eq(&LaurentPoly::one(self.variables())?, tol)
    }

    /// Largest coefficient deviation over both components.
    pub fn max_deviation(&self, other: &PqPair) -> Result<f64, PolyError> {
        Ok(self
            .p
            .max_deviation(&other.p)?
            .max(self.q.max_deviation(&other.q)?))
    }

    pub fn approx_eq(&self, other: &PqPair, tol: f64) -> Result<bool, PolyError> {
        Ok(self.p.approx_eq(&other.p, tol)? && self.q.approx_eq(&other.q, tol)?)
    }
}

/// Angle parameters `phi_0..phi_n` and 1-based index parameters `s_1..s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MqspSequence {
    variables: usize,
    phases: Vec<f64>,
    indices: Vec<usize>,
}

impl MqspSequence {
    pub fn new(
        variables: usize,
        phases: Vec<f64>,
        indices: Vec<usize>,
    ) -> Result<Self, SequenceError> {
        if variables == 0 {
            return Err(SequenceError::NoVariables);
        }
        if phases.len() != indices.len() + 1 {
            return Err(SequenceError::LengthMismatch {
                phases: phases.len(),
                indices: indices.len(),
            });
        }
        if let Some(pos) = phases.iter().position(|p| !p.is_finite()) {
            return Err(SequenceError::NonFinitePhase(pos));
        }
        for (k, &s) in indices.iter().enumerate() {
            if s == 0 || s > variables {
                return Err(SequenceError::IndexOutOfRange {
                    step: k + 1,
                    index: s,
                    variables,
                });
            }
        }
        Ok(MqspSequence {
            variables,
            phases,
            indices,
        })
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of signal operators `n`.
    pub fn steps(&self) -> usize {
        self.indices.len()
    }

    /// Brute-force product `e^{i phi_0 Z} prod_k A(a_{s_k}) e^{i phi_k Z}`,
    /// folded left to right, at the default tolerance.
    pub fn evaluate(&self) -> PqPair {
        self.evaluate_with_tolerance(DEFAULT_TOLERANCE)
            .expect("default tolerance is valid")
    }

    pub fn evaluate_with_tolerance(&self, tol: f64) -> Result<PqPair, PolyError> {
        self.evaluate_matrix(tol).map(|m| m.top_row())
    }

    pub fn evaluate_matrix(&self, tol: f64) -> Result<PolyMatrix, PolyError> {
        let m = self.variables;
        let signals = (1..=m)
            .map(|j| PolyMatrix::signal_operator(j, m)?.with_tolerance(tol))
            .collect::<Result<Vec<_>, _>>()?;
        let mut acc = PolyMatrix::z_rotation(self.phases[0], m)?.with_tolerance(tol)?;
        for (&s, &phi) in self.indices.iter().zip(&self.phases[1..]) {
            let rotation = PolyMatrix::z_rotation(phi, m)?.with_tolerance(tol)?;
            acc = acc.mat_mul(&signals[s - 1])?.mat_mul(&rotation)?;
        }
        Ok(acc)
    }
}
