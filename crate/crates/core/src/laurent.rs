//! Sparse multivariable Laurent polynomials over complex coefficients.
//!
//! A polynomial lives in `m` variables `a_1, ..., a_m` and may carry negative
//! exponents. Terms are kept in a `BTreeMap` keyed by exponent vector, so the
//! iteration order is lexicographic and serialization is deterministic.
//!
//! Every polynomial carries the zero threshold `eps` it was built with. After
//! each operation, terms whose modulus is at most `eps * max(1, scale)` are
//! dropped, where `scale` is the largest coefficient modulus among the
//! operands and the raw result. Binary operations keep the looser of the two
//! thresholds.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

/// Default relative tolerance for zero tests and approximate equality.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range 1..={variables}")]
    IndexOutOfRange { index: usize, variables: usize },
    #[error("a polynomial needs at least one variable")]
    NoVariables,
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("coefficient is not finite")]
    NonFinite,
    #[error("tolerance must be finite and non-negative, got {0}")]
    BadTolerance(f64),
}

pub type Result<T, E = PolyError> = std::result::Result<T, E>;

/// Exponent vector `(k_1, ..., k_m)` of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponents(SmallVec<[i32; 4]>);

impl Exponents {
    pub fn zeros(variables: usize) -> Self {
        Exponents(SmallVec::from_elem(0, variables))
    }

    /// The monomial `a_j` (1-based `j`).
    pub fn unit(variables: usize, j: usize) -> Self {
        let mut e = Self::zeros(variables);
        e.0[j - 1] = 1;
        e
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    /// Exponent of the 1-based variable `j`.
    pub fn get(&self, j: usize) -> i32 {
        self.0[j - 1]
    }

    fn add(&self, other: &Exponents) -> Exponents {
        Exponents(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn neg(&self) -> Exponents {
        Exponents(self.0.iter().map(|k| -k).collect())
    }

    fn with(&self, j: usize, k: i32) -> Exponents {
        let mut e = self.clone();
        e.0[j - 1] = k;
        e
    }
}

impl From<Vec<i32>> for Exponents {
    fn from(v: Vec<i32>) -> Self {
        Exponents(SmallVec::from_vec(v))
    }
}

impl From<&[i32]> for Exponents {
    fn from(v: &[i32]) -> Self {
        Exponents(SmallVec::from_slice(v))
    }
}

/// Sparse Laurent polynomial in `variables` unknowns.
#[derive(Debug, Clone)]
pub struct LaurentPoly {
    variables: usize,
    eps: f64,
    terms: BTreeMap<Exponents, Complex64>,
}

/// Equality is exact on the stored terms; the carried threshold is ignored.
impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.terms == other.terms
    }
}

fn check_tolerance(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= 0.0 {
        Ok(())
    } else {
        Err(PolyError::BadTolerance(eps))
    }
}

fn max_modulus<'a>(coeffs: impl Iterator<Item = &'a Complex64>) -> f64 {
    coeffs.map(|c| c.norm()).fold(0.0, f64::max)
}

impl LaurentPoly {
    pub fn zero(variables: usize) -> Result<Self> {
        if variables == 0 {
            return Err(PolyError::NoVariables);
        }
        Ok(LaurentPoly {
            variables,
            eps: DEFAULT_TOLERANCE,
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(variables: usize, c: Complex64) -> Result<Self> {
        Self::from_terms(variables, [(Exponents::zeros(variables), c)])
    }

    pub fn one(variables: usize) -> Result<Self> {
        Self::constant(variables, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponents: impl Into<Exponents>, c: Complex64) -> Result<Self> {
        let e = exponents.into();
        Self::from_terms(e.len(), [(e, c)])
    }

    /// `(a_j + a_j^-1) / 2` when `sign = 1`, `(a_j - a_j^-1) / 2` when `sign = -1`.
    pub fn half_sum(variables: usize, j: usize, sign: f64) -> Result<Self> {
        let mut p = Self::zero(variables)?;
        p.check_index(j)?;
        let up = Exponents::unit(variables, j);
        let down = up.neg();
        p.terms.insert(up, Complex64::new(0.5, 0.0));
        p.terms.insert(down, Complex64::new(0.5 * sign, 0.0));
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated exponents and dropping negligible terms.
    pub fn from_terms<E, I>(variables: usize, terms: I) -> Result<Self>
    where
        E: Into<Exponents>,
        I: IntoIterator<Item = (E, Complex64)>,
    {
        let mut p = Self::zero(variables)?;
        for (e, c) in terms {
            let e = e.into();
            if e.len() != variables {
                return Err(PolyError::ExponentLength {
                    expected: variables,
                    got: e.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(PolyError::NonFinite);
            }
            *p.terms.entry(e).or_default() += c;
        }
        let scale = p.max_modulus();
        p.chop(scale);
        Ok(p)
    }

    /// Re-thresholds this polynomial at `eps`.
    pub fn with_tolerance(mut self, eps: f64) -> Result<Self> {
        check_tolerance(eps)?;
        self.eps = eps;
        let scale = self.max_modulus();
        self.chop(scale);
        Ok(self)
    }

    pub fn tolerance(&self) -> f64 {
        self.eps
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    /// Coefficient of the monomial with the given exponents (zero if absent).
    pub fn coeff(&self, exponents: &[i32]) -> Complex64 {
        self.terms
            .get(&Exponents::from(exponents))
            .copied()
            .unwrap_or_default()
    }

    /// Largest coefficient modulus; zero for the zero polynomial.
    pub fn max_modulus(&self) -> f64 {
        max_modulus(self.terms.values())
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.len() {
            0 => Some(Complex64::default()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.0.iter().all(|&k| k == 0).then_some(*c)
            }
            _ => None,
        }
    }

    fn chop(&mut self, scale: f64) {
        let threshold = self.eps * scale.max(1.0);
        self.terms.retain(|_, c| c.norm() > threshold);
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.variables {
            Err(PolyError::IndexOutOfRange {
                index: j,
                variables: self.variables,
            })
        } else {
            Ok(())
        }
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        if self.variables != other.variables {
            Err(PolyError::ArityMismatch {
                left: self.variables,
                right: other.variables,
            })
        } else {
            Ok(())
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        out.eps = self.eps.max(other.eps);
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_default() += c * sign;
        }
        let scale = self
            .max_modulus()
            .max(other.max_modulus())
            .max(out.max_modulus());
        out.chop(scale);
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = -*c);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut terms: BTreeMap<Exponents, Complex64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *terms.entry(e1.add(e2)).or_default() += c1 * c2;
            }
        }
        let mut out = LaurentPoly {
            variables: self.variables,
            eps: self.eps.max(other.eps),
            terms,
        };
        let scale = self
            .max_modulus()
            .max(other.max_modulus())
            .max(out.max_modulus());
        out.chop(scale);
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|v| *v *= c);
        let scale = self.max_modulus().max(out.max_modulus());
        out.chop(scale);
        out
    }

    /// Conjugates every coefficient, keeping the support.
    pub fn star(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = c.conj());
        out
    }

    /// Substitutes `a_j -> a_j^-1` for every variable.
    pub fn invert_vars(&self) -> Self {
        LaurentPoly {
            variables: self.variables,
            eps: self.eps,
            terms: self.terms.iter().map(|(e, c)| (e.neg(), *c)).collect(),
        }
    }

    /// `star(invert_vars(p))`: the polynomial that equals the complex
    /// conjugate of `p` on the torus.
    pub fn torus_conj(&self) -> Self {
        LaurentPoly {
            variables: self.variables,
            eps: self.eps,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.neg(), c.conj()))
                .collect(),
        }
    }

    /// Substitutes `a_j -> -a_j`.
    pub fn negate_var(&self, j: usize) -> Result<Self> {
        self.check_index(j)?;
        let mut out = self.clone();
        for (e, c) in out.terms.iter_mut() {
            if e.get(j).rem_euclid(2) == 1 {
                *c = -*c;
            }
        }
        Ok(out)
    }

    /// `max |k_j|` over the stored terms, or 0 for the zero polynomial.
    pub fn degree(&self, j: usize) -> Result<u32> {
        self.check_index(j)?;
        Ok(self
            .terms
            .keys()
            .map(|e| e.get(j).unsigned_abs())
            .max()
            .unwrap_or(0))
    }

    /// Per-variable degrees `(deg_1, ..., deg_m)`.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.variables];
        for e in self.terms.keys() {
            for (dj, k) in d.iter_mut().zip(e.as_slice()) {
                *dj = (*dj).max(k.unsigned_abs());
            }
        }
        d
    }

    /// Terms with `k_j = k`, returned with the `j`-th exponent set to zero.
    pub fn coeff_slice(&self, j: usize, k: i32) -> Result<Self> {
        self.check_index(j)?;
        Ok(LaurentPoly {
            variables: self.variables,
            eps: self.eps,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.get(j) == k)
                .map(|(e, c)| (e.with(j, 0), *c))
                .collect(),
        })
    }

    /// Splits into the terms with `|k_j| <= d` and the rest.
    pub fn split_degree(&self, j: usize, d: u32) -> Result<(Self, Self)> {
        self.check_index(j)?;
        let (low, high) = self
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), *c))
            .partition(|(e, _)| e.get(j).unsigned_abs() <= d);
        let part = |terms| LaurentPoly {
            variables: self.variables,
            eps: self.eps,
            terms,
        };
        Ok((part(low), part(high)))
    }

    /// Multiplies by the monomial `a_j^k`.
    pub fn shift(&self, j: usize, k: i32) -> Result<Self> {
        self.check_index(j)?;
        Ok(LaurentPoly {
            variables: self.variables,
            eps: self.eps,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.with(j, e.get(j) + k), *c))
                .collect(),
        })
    }

    /// Largest coefficient modulus of `self - other`, computed without
    /// thresholding.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        self.check_arity(other)?;
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            let d = other.terms.get(e).map_or(*c, |o| c - o);
            worst = worst.max(d.norm());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }

    /// True iff every coefficient of `self - other` has modulus at most
    /// `tol * max(1, scale(self), scale(other))`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<bool> {
        let scale = 1f64.max(self.max_modulus()).max(other.max_modulus());
        Ok(self.max_deviation(other)? <= tol * scale)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            for (j, k) in e.as_slice().iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*a{}", j + 1)?,
                    _ => write!(f, "*a{}^{}", j + 1, k)?,
                }
            }
        }
        Ok(())
    }
}
