//! Seeded instance generation and brute-force round-trip checks.
//!
//! Random sequences are evaluated with [`MqspSequence::evaluate`], which
//! multiplies the 2x2 matrices out directly and shares no code with the
//! peeling in [`crate::cda`]. A round trip then asks the decision procedure
//! to recover a sequence for the evaluated pair.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cda::{decide, synthesize, CdaError};
use crate::laurent::{LaurentPoly, PolyError};
use crate::su2::{MqspSequence, PqPair};

/// Pseudo-random generator behind every seeded draw in this module.
pub const GENERATOR: &str = "ChaCha8Rng";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle needs at least one variable")]
    NoVariables,
    #[error("unknown angle mode {0:?}; expected \"continuous\" or \"discrete\"")]
    UnknownAngleMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleMode {
    /// Uniform over `(-pi, pi]`.
    Continuous,
    /// Uniform over the multiples of `pi/12` in `(-pi, pi]`.
    Discrete,
}

impl fmt::Display for AngleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleMode::Continuous => "continuous",
            AngleMode::Discrete => "discrete",
        })
    }
}

impl FromStr for AngleMode {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuous" => Ok(AngleMode::Continuous),
            "discrete" => Ok(AngleMode::Discrete),
            other => Err(OracleError::UnknownAngleMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub variables: usize,
    pub steps: usize,
    pub seed: u64,
    pub angle_mode: AngleMode,
}

impl OracleConfig {
    pub fn new(
        variables: usize,
        steps: usize,
        seed: u64,
        angle_mode: AngleMode,
    ) -> Result<Self, OracleError> {
        if variables == 0 {
            return Err(OracleError::NoVariables);
        }
        Ok(OracleConfig {
            variables,
            steps,
            seed,
            angle_mode,
        })
    }
}

fn draw_angle(rng: &mut impl Rng, mode: AngleMode) -> f64 {
    match mode {
        AngleMode::Continuous => PI - 2.0 * PI * rng.gen::<f64>(),
        AngleMode::Discrete => f64::from(rng.gen_range(-11i32..=12)) * PI / 12.0,
    }
}

/// Deterministic function of the config: `n + 1` phases, `n` indices
/// uniform in `1..=m`.
pub fn random_sequence(cfg: &OracleConfig) -> MqspSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let phases = (0..=cfg.steps)
        .map(|_| draw_angle(&mut rng, cfg.angle_mode))
        .collect();
    let indices = (0..cfg.steps)
        .map(|_| rng.gen_range(1..=cfg.variables))
        .collect();
    MqspSequence::new(cfg.variables, phases, indices).expect("config is validated")
}

/// Outcome of one round trip, one field per assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub steps: usize,
    /// `decide(pair, n)`.
    pub accepted: bool,
    /// Max coefficient deviation between the pair and the evaluated
    /// synthesized sequence; `None` if synthesis failed.
    pub synthesis_deviation: Option<f64>,
    pub synthesis_ok: bool,
    /// `decide(pair, n + 1)` is false.
    pub parity_rejected: bool,
    /// `decide(pair, n + 2)` is true.
    pub padded_accepted: bool,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.accepted && self.synthesis_ok && self.parity_rejected && self.padded_accepted
    }
}

impl fmt::Display for RoundtripReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} accepted={} synthesis_ok={} deviation={} parity_rejected={} padded_accepted={}",
            self.steps,
            self.accepted,
            self.synthesis_ok,
            self.synthesis_deviation
                .map_or_else(|| "-".to_string(), |d| format!("{d:.3e}")),
            self.parity_rejected,
            self.padded_accepted,
        )
    }
}

/// Evaluates `seq`, then checks acceptance at `n`, synthesis, rejection at
/// `n + 1` and acceptance at `n + 2`.
pub fn roundtrip_check(seq: &MqspSequence, tol: f64) -> Result<RoundtripReport, CdaError> {
    let n = seq.steps();
    let pair = seq.evaluate_with_tolerance(tol)?;
    let accepted = decide(&pair, n, tol)?;
    let synthesized = synthesize(&pair, n, tol)?;
    let synthesis_deviation = match &synthesized.sequence {
        Some(s) if s.steps() == n => Some(s.evaluate_with_tolerance(tol)?.max_deviation(&pair)?),
        _ => None,
    };
    let synthesis_ok = synthesis_deviation.is_some_and(|d| d <= tol);
    Ok(RoundtripReport {
        steps: n,
        accepted,
        synthesis_deviation,
        synthesis_ok,
        parity_rejected: !decide(&pair, n + 1, tol)?,
        padded_accepted: decide(&pair, n + 2, tol)?,
    })
}

/// Which component of a pair a coefficient lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    P,
    Q,
}

/// Adds `delta` to one stored coefficient chosen uniformly over the terms
/// of `P` and `Q`.
pub fn perturb_coefficient(
    pair: &PqPair,
    delta: Complex64,
    rng: &mut impl Rng,
) -> Result<(PqPair, Component), PolyError> {
    let choices: Vec<_> = pair
        .p
        .terms()
        .map(|(e, _)| (Component::P, e.clone()))
        .chain(pair.q.terms().map(|(e, _)| (Component::Q, e.clone())))
        .collect();
    let (which, exps) = choices
        .choose(rng)
        .cloned()
        .expect("a valid pair has a non-zero P");
    let bump = LaurentPoly::monomial(exps, delta)?;
    let out = match which {
        Component::P => PqPair::new(pair.p.add(&bump)?, pair.q.clone())?,
        Component::Q => PqPair::new(pair.p.clone(), pair.q.add(&bump)?)?,
    };
    Ok((out, which))
}

/// Structural edits used to produce (mostly) non-constructible variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Add `1e-3` to one coefficient.
    Perturb,
    /// Exchange `P` and `Q`.
    Swap,
    /// Multiply `P` by `a_1`.
    ShiftP,
    /// Scale `Q` by `1/2`.
    ShrinkQ,
    /// Conjugate the coefficients of `P` only.
    ConjugateP,
    /// Substitute `a_1 -> -a_1` in `P` only.
    NegateVarP,
}

impl Mutation {
    pub const ALL: [Mutation; 6] = [
        Mutation::Perturb,
        Mutation::Swap,
        Mutation::ShiftP,
        Mutation::ShrinkQ,
        Mutation::ConjugateP,
        Mutation::NegateVarP,
    ];
}

pub fn mutate(pair: &PqPair, mutation: Mutation, rng: &mut impl Rng) -> Result<PqPair, PolyError> {
    let (p, q) = (&pair.p, &pair.q);
    match mutation {
        Mutation::Perturb => {
            perturb_coefficient(pair, Complex64::new(1e-3, 0.0), rng).map(|(x, _)| x)
        }
        Mutation::Swap => PqPair::new(q.clone(), p.clone()),
        Mutation::ShiftP => PqPair::new(p.shift(1, 1)?, q.clone()),
        Mutation::ShrinkQ => PqPair::new(p.clone(), q.scale(Complex64::new(0.5, 0.0))),
        Mutation::ConjugateP => PqPair::new(p.star(), q.clone()),
        Mutation::NegateVarP => PqPair::new(p.negate_var(1)?, q.clone()),
    }
}
