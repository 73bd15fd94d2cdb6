//! Constructivity decision for M-QSP pairs, with parameter synthesis.
//!
//! Given `(P, Q)` and a step count `n`, [`decide`] answers whether some
//! sequence `e^{i phi_0 Z} prod_k A(a_{s_k}) e^{i phi_k Z}` of exactly `n`
//! signal operators has `(P, Q)` as its top row. The procedure peels one
//! signal operator at a time:
//!
//! * `n = 0`: accept iff `P` is a unimodular constant and `Q = 0`.
//! * `sum_j deg_j P <= n - 2`: the last two steps can be an identity pad,
//!   continue at `n - 2`.
//! * `sum_j deg_j P = n`: find the first `j` (ascending) whose top slices
//!   satisfy `P_{a_j^d} = e^{2 i phi} Q_{a_j^d}`, strip `A(a_j) e^{i phi Z}`
//!   from the right and continue at `n - 1`.
//! * anything else rejects.
//!
//! The recursion runs as a loop and records every branch in a
//! [`DecisionTrace`], from which [`synthesize`] reads off the parameters.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::laurent::{LaurentPoly, PolyError};
use crate::refine::refine_phases;
use crate::su2::{MqspSequence, PqPair};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CdaError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("single-variable characterization needs arity 1, got {0}")]
    NotSingleVariable(usize),
}

pub type Result<T, E = CdaError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// At `n = 0`, `P` is not a constant of modulus one.
    BaseNotUnimodular,
    /// At `n = 0`, `Q` is not zero.
    BaseQNonzero,
    /// `sum_j deg_j P` is neither `n` nor at most `n - 2`.
    DegreeSum { sum: u64 },
    /// No variable admits a phase matching the top-degree slices.
    NoPhase,
    /// The peeled sequence, after refinement, still misses the pair.
    Residual,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::BaseNotUnimodular => write!(f, "P is not a unimodular constant"),
            RejectReason::BaseQNonzero => write!(f, "Q is not zero"),
            RejectReason::DegreeSum { sum } => write!(f, "degree sum {sum} does not fit"),
            RejectReason::NoPhase => write!(f, "no variable admits a matching phase"),
            RejectReason::Residual => write!(f, "refined sequence misses the pair"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceStep {
    /// Identity-pad branch taken at step count `n`.
    ReduceN2 {
        n: usize,
    },
    /// Stripped `A(a_j) e^{i phi Z}` (right) or `e^{i phi Z} A(a_j)` (left)
    /// at step count `n`.
    ReduceVar {
        n: usize,
        side: Side,
        j: usize,
        phi: f64,
        reduced: PqPair,
    },
    BaseAccept {
        phi0: f64,
    },
    /// Phases after refinement and the remaining max coefficient deviation.
    Refine {
        phases: Vec<f64>,
        deviation: f64,
    },
    Reject {
        n: usize,
        reason: RejectReason,
    },
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::ReduceN2 { n } => write!(
                f,
                "n={n}: degree sum <= n-2, pad and continue at n={}",
                n - 2
            ),
            TraceStep::ReduceVar {
                n, side, j, phi, ..
            } => {
                write!(f, "n={n}: strip A(a{j}) from the {side} with phi={phi:.12}")
            }
            TraceStep::BaseAccept { phi0 } => {
                write!(f, "n=0: base case holds with phi0={phi0:.12}")
            }
            TraceStep::Refine { deviation, .. } => {
                write!(f, "refine phases: deviation {deviation:.3e}")
            }
            TraceStep::Reject { n, reason } => write!(f, "n={n}: reject ({reason})"),
        }
    }
}

/// Branch record of one decision run. The terminal step is always last.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecisionTrace {
    pub steps: Vec<TraceStep>,
}

impl DecisionTrace {
    pub fn accepted(&self) -> bool {
        matches!(self.steps.last(), Some(TraceStep::Refine { .. }))
    }

    pub fn reject_reason(&self) -> Option<(usize, RejectReason)> {
        match self.steps.last() {
            Some(TraceStep::Reject { n, reason }) => Some((*n, *reason)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub constructible: bool,
    pub sequence: Option<MqspSequence>,
    pub trace: DecisionTrace,
}

/// Necessary conditions for constructibility, each evaluated on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport {
    /// `P(1/a) = P(a)`.
    pub symmetry_p: bool,
    /// `Q(1/a) = -Q(a)`.
    pub symmetry_q: bool,
    /// `deg_j P = deg_j Q` for every `j`.
    pub degree_equality: bool,
    pub p_nonzero: bool,
    /// `sum_j deg_j P = n (mod 2)`.
    pub parity_ok: bool,
    /// `sum_j deg_j P <= n`.
    pub degree_bound_ok: bool,
    /// `|P|^2 + |Q|^2 = 1` on the torus.
    pub normalization_ok: bool,
    pub degrees: Vec<u32>,
    pub degree_sum: u64,
}

impl NecessaryReport {
    pub fn all_ok(&self) -> bool {
        self.flags().iter().all(|(_, ok)| *ok)
    }

    pub fn flags(&self) -> [(&'static str, bool); 7] {
        [
            ("symmetry_P", self.symmetry_p),
            ("symmetry_Q", self.symmetry_q),
            ("degree_equality", self.degree_equality),
            ("p_nonzero", self.p_nonzero),
            ("parity_ok", self.parity_ok),
            ("degree_bound_ok", self.degree_bound_ok),
            ("normalization_ok", self.normalization_ok),
        ]
    }
}

fn pair_scale(pair: &PqPair) -> f64 {
    1f64.max(pair.p.max_modulus()).max(pair.q.max_modulus())
}

fn degree_sum(degrees: &[u32]) -> u64 {
    degrees.iter().map(|&d| u64::from(d)).sum()
}

/// Principal half-angle of `r`, in `(-pi/2, pi/2]`.
fn half_arg(r: Complex64) -> f64 {
    let mut arg = r.im.atan2(r.re);
    if arg <= -PI {
        arg = PI;
    }
    arg / 2.0
}

/// Best phase for the top slices of `a_j` at degree `d`, the max deviation
/// `|P_{a_j^d} - e^{2 i phi} Q_{a_j^d}|` it leaves, and the slice size.
fn slice_phase(pair: &PqPair, j: usize, d: u32) -> Result<(f64, f64, f64)> {
    let k = i32::try_from(d).map_err(|_| PolyError::IndexOutOfRange {
        index: j,
        variables: pair.variables(),
    })?;
    let cp = pair.p.coeff_slice(j, k)?;
    let cq = pair.q.coeff_slice(j, k)?;
    // e^{2 i phi} from the whole slice, weighted by magnitude
    let overlap: Complex64 = cq
        .terms()
        .map(|(e, c)| c.conj() * cp.coeff(e.as_slice()))
        .sum();
    let phi = if overlap == Complex64::new(0.0, 0.0) {
        0.0
    } else {
        half_arg(overlap)
    };
    let rotated = cq.scale(Complex64::from_polar(1.0, 2.0 * phi));
    let deviation = cp.max_deviation(&rotated)?;
    Ok((phi, deviation, cp.max_modulus().max(cq.max_modulus())))
}

/// Looks for `phi` with `P_{a_j^d} = e^{2 i phi} Q_{a_j^d}` within `tol`.
///
/// Both slices zero is vacuously satisfied with `phi = 0`.
pub fn find_phase(pair: &PqPair, j: usize, d: u32, tol: f64) -> Result<Option<f64>> {
    let (phi, deviation, size) = slice_phase(pair, j, d)?;
    let level = tol * pair_scale(pair);
    if size <= level {
        return Ok(Some(0.0));
    }
    Ok((deviation <= level).then_some(phi))
}

/// Relative slice mismatch tolerated while peeling. Accepted pairs are
/// certified afterwards by refinement at the caller's tolerance.
pub const PEEL_SLACK: f64 = 1e-2;

/// Absolute slice mismatch, in units of `tol` times the pair scale, that is
/// treated as input rounding while peeling.
const NOISE_FLOOR: f64 = 10.0;

/// Tolerance used while peeling, before the phases are refined.
pub fn peel_tolerance(tol: f64) -> f64 {
    tol.max(PEEL_SLACK)
}

/// Strips `A(a_j) e^{i phi Z}` from the right of the pair's matrix:
///
/// ```text
/// P_j = e^{-i phi} (a_j + 1/a_j)/2 P - e^{i phi} (a_j - 1/a_j)/2 Q
/// Q_j = e^{i phi} (a_j + 1/a_j)/2 Q - e^{-i phi} (a_j - 1/a_j)/2 P
/// ```
pub fn reduce_step(pair: &PqPair, j: usize, phi: f64) -> Result<PqPair> {
    let m = pair.variables();
    let eps = pair.p.tolerance().max(pair.q.tolerance());
    let cos = LaurentPoly::half_sum(m, j, 1.0)?.with_tolerance(eps)?;
    let sin = LaurentPoly::half_sum(m, j, -1.0)?.with_tolerance(eps)?;
    let w = Complex64::from_polar(1.0, phi);
    let wc = w.conj();

    let cp = cos.mul(&pair.p)?;
    let sp = sin.mul(&pair.p)?;
    let cq = cos.mul(&pair.q)?;
    let sq = sin.mul(&pair.q)?;
    let p = cp.scale(wc).sub(&sq.scale(w))?;
    let q = cq.scale(w).sub(&sp.scale(wc))?;
    Ok(PqPair::new(p, q)?)
}

/// End of the sequence a strip removes a factor from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `A(a_j) e^{i phi Z}` off the right.
    Right,
    /// `e^{i phi Z} A(a_j)` off the left.
    Left,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Right => "right",
            Side::Left => "left",
        })
    }
}

/// Top row of the transposed matrix, `(P, -Q~)`. Transposing reverses the
/// sequence, so a left strip is a right strip of the transpose.
pub fn transpose_pair(pair: &PqPair) -> Result<PqPair> {
    Ok(PqPair::new(pair.p.clone(), pair.q.torus_conj().neg())?)
}

/// One strip branch: side, variable, its degree before the strip, and the
/// phase.
#[derive(Debug, Clone, Copy)]
struct Peel {
    side: Side,
    j: usize,
    d: u32,
    phi: f64,
}

/// Strips `peel` and splits the result into the part of degree below `d`
/// in `a_j` and the slices `|k_j| >= d` that vanish in exact arithmetic.
fn strip(pair: &PqPair, peel: Peel) -> Result<(PqPair, PqPair)> {
    let view = match peel.side {
        Side::Right => pair.clone(),
        Side::Left => transpose_pair(pair)?,
    };
    let reduced = reduce_step(&view, peel.j, peel.phi)?;
    let (p, p_rest) = reduced.p.split_degree(peel.j, peel.d - 1)?;
    let (q, q_rest) = reduced.q.split_degree(peel.j, peel.d - 1)?;
    let kept = PqPair::new(p, q)?;
    let rest = PqPair::new(p_rest, q_rest)?;
    Ok(match peel.side {
        Side::Right => (kept, rest),
        Side::Left => (transpose_pair(&kept)?, rest),
    })
}

fn dropped_size(rest: &PqPair) -> f64 {
    rest.p.max_modulus().max(rest.q.max_modulus())
}

/// How well the next phase is determined: the smallest top slice of `P`
/// relative to its largest coefficient.
fn conditioning(pair: &PqPair) -> Result<f64> {
    let scale = pair.p.max_modulus();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut worst = f64::INFINITY;
    for (j, d) in (1..=pair.variables()).zip(pair.p.degrees()) {
        if d > 0 {
            let top = pair.p.coeff_slice(j, d as i32)?.max_modulus();
            worst = worst.min(top / scale);
        }
    }
    Ok(if worst.is_finite() { worst } else { 1.0 })
}

/// Best strip on `side`: exact matches first in ascending `j`, then the
/// rest by relative mismatch. Returns the peel and the reduced pair.
fn best_strip(
    current: &PqPair,
    side: Side,
    tol: f64,
    slack: f64,
) -> Result<Option<(Peel, PqPair)>> {
    let view = match side {
        Side::Right => current.clone(),
        Side::Left => transpose_pair(current)?,
    };
    let scale = pair_scale(current);
    let floor = NOISE_FLOOR * tol * scale;
    let mut exact = Vec::new();
    let mut loose = Vec::new();
    for (j, d) in (1..=view.variables()).zip(view.p.degrees()) {
        if d == 0 {
            continue;
        }
        let (phi, deviation, size) = slice_phase(&view, j, d)?;
        let peel = Peel { side, j, d, phi };
        if deviation <= tol * scale {
            exact.push((0.0, peel, size));
        } else if deviation <= (slack * size).max(floor) {
            loose.push((deviation / size, peel, size));
        }
    }
    loose.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, peel, size) in exact.into_iter().chain(loose) {
        let (kept, rest) = strip(current, peel)?;
        if dropped_size(&rest) <= floor.max(slack * size) {
            return Ok(Some((peel, kept)));
        }
    }
    Ok(None)
}

/// Sequence from the trace: left strips in order, the base rotation, then
/// right strips and pads in reverse order. Pads are `(a_1, pi/2), (a_1, -pi/2)`.
fn assemble(m: usize, steps: &[TraceStep], phi0: f64) -> MqspSequence {
    let mut left: Vec<(usize, f64)> = Vec::new();
    let mut right: Vec<(usize, f64)> = Vec::new();
    for step in steps {
        match step {
            TraceStep::ReduceN2 { .. } => {
                right.push((1, -FRAC_PI_2));
                right.push((1, FRAC_PI_2));
            }
            TraceStep::ReduceVar {
                side: Side::Right,
                j,
                phi,
                ..
            } => right.push((*j, *phi)),
            TraceStep::ReduceVar {
                side: Side::Left,
                j,
                phi,
                ..
            } => left.push((*j, *phi)),
            _ => {}
        }
    }
    right.reverse();
    let phases = left
        .iter()
        .map(|&(_, phi)| phi)
        .chain(std::iter::once(phi0))
        .chain(right.iter().map(|&(_, phi)| phi))
        .collect();
    let indices = left.iter().chain(&right).map(|&(j, _)| j).collect();
    MqspSequence::new(m, phases, indices).expect("trace yields a well-formed sequence")
}

/// Which end each level strips from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Fixed(Side),
    /// Whichever end leaves the better conditioned remainder, right on ties.
    Adaptive,
}

const STRATEGIES: [Strategy; 3] = [
    Strategy::Fixed(Side::Right),
    Strategy::Fixed(Side::Left),
    Strategy::Adaptive,
];

/// Runs the decision procedure and returns the full branch trace.
///
/// Peeling runs at [`peel_tolerance`]; a pair that reaches the base case is
/// accepted only if the refined sequence reproduces it within `tol`. Error
/// in the input grows with every layer peeled while a nearly cancelling pair
/// of factors remains inside, so peeling is tried from the right, from the
/// left, then adaptively. The first accepted trace is returned, or the
/// right-only trace if none is.
pub fn trace(pair: &PqPair, n: usize, tol: f64) -> Result<DecisionTrace> {
    let original = pair.clone().with_tolerance(tol)?;
    let mut first = None;
    for strategy in STRATEGIES {
        let t = peel(&original, n, tol, strategy)?;
        if t.accepted() {
            return Ok(t);
        }
        // a structural rejection does not depend on the side
        if !matches!(
            t.reject_reason(),
            Some((_, RejectReason::NoPhase | RejectReason::Residual))
        ) {
            return Ok(t);
        }
        first.get_or_insert(t);
    }
    Ok(first.expect("at least one strategy runs"))
}

fn peel(original: &PqPair, n: usize, tol: f64, strategy: Strategy) -> Result<DecisionTrace> {
    let slack = peel_tolerance(tol);
    let mut current = original.clone().with_tolerance(tol * 1e-3)?;
    let mut n = n;
    let mut trace = DecisionTrace::default();
    let m = current.variables();

    loop {
        if n == 0 {
            let scale = pair_scale(&current);
            let step = match current.p.as_constant() {
                Some(c) if (c.norm() - 1.0).abs() <= slack => {
                    if current.q.max_modulus() <= slack * scale {
                        TraceStep::BaseAccept {
                            phi0: c.im.atan2(c.re),
                        }
                    } else {
                        TraceStep::Reject {
                            n,
                            reason: RejectReason::BaseQNonzero,
                        }
                    }
                }
                _ => TraceStep::Reject {
                    n,
                    reason: RejectReason::BaseNotUnimodular,
                },
            };
            trace.steps.push(step.clone());
            let TraceStep::BaseAccept { phi0 } = step else {
                return Ok(trace);
            };
            let peeled = assemble(m, &trace.steps, phi0);
            let polished = refine_phases(original, &peeled, tol)?;
            trace.steps.push(TraceStep::Refine {
                phases: polished.sequence.phases().to_vec(),
                deviation: polished.deviation,
            });
            if polished.deviation > tol * pair_scale(original) {
                trace.steps.push(TraceStep::Reject {
                    n,
                    reason: RejectReason::Residual,
                });
            }
            return Ok(trace);
        }

        let degrees = current.p.degrees();
        let sum = degree_sum(&degrees);
        let n64 = n as u64;
        if sum + 2 <= n64 {
            trace.steps.push(TraceStep::ReduceN2 { n });
            n -= 2;
            continue;
        }
        if sum != n64 {
            trace.steps.push(TraceStep::Reject {
                n,
                reason: RejectReason::DegreeSum { sum },
            });
            return Ok(trace);
        }

        let chosen = match strategy {
            Strategy::Fixed(side) => best_strip(&current, side, tol, slack)?,
            Strategy::Adaptive => {
                let right = best_strip(&current, Side::Right, tol, slack)?;
                let left = best_strip(&current, Side::Left, tol, slack)?;
                match (right, left) {
                    (Some(r), Some(l)) => {
                        if conditioning(&l.1)? > conditioning(&r.1)? * (1.0 + 1e-6) {
                            Some(l)
                        } else {
                            Some(r)
                        }
                    }
                    (r, l) => r.or(l),
                }
            }
        };
        let Some((peel, kept)) = chosen else {
            trace.steps.push(TraceStep::Reject {
                n,
                reason: RejectReason::NoPhase,
            });
            return Ok(trace);
        };
        trace.steps.push(TraceStep::ReduceVar {
            n,
            side: peel.side,
            j: peel.j,
            phi: peel.phi,
            reduced: kept.clone(),
        });
        current = kept;
        n -= 1;
    }
}

/// Whether `pair` is constructible by M-QSP in exactly `n` steps.
pub fn decide(pair: &PqPair, n: usize, tol: f64) -> Result<bool> {
    Ok(trace(pair, n, tol)?.accepted())
}

/// Decides and, when constructible, returns the certified sequence. Indices
/// come from the trace; phases are the refined ones.
pub fn synthesize(pair: &PqPair, n: usize, tol: f64) -> Result<SynthesisResult> {
    let trace = trace(pair, n, tol)?;
    let sequence = if trace.accepted() {
        let phi0 = trace.steps.iter().find_map(|s| match s {
            TraceStep::BaseAccept { phi0 } => Some(*phi0),
            _ => None,
        });
        let phases = trace.steps.iter().find_map(|s| match s {
            TraceStep::Refine { phases, .. } => Some(phases.clone()),
            _ => None,
        });
        match (phi0, phases) {
            (Some(phi0), Some(phases)) => {
                let peeled = assemble(pair.variables(), &trace.steps, phi0);
                Some(
                    MqspSequence::new(pair.variables(), phases, peeled.indices().to_vec())
                        .expect("refined phases match the peeled shape"),
                )
            }
            _ => None,
        }
    } else {
        None
    };
    Ok(SynthesisResult {
        constructible: sequence.is_some(),
        sequence,
        trace,
    })
}

/// Evaluates every necessary condition independently.
pub fn check_necessary(pair: &PqPair, n: usize, tol: f64) -> Result<NecessaryReport> {
    let pair = pair.clone().with_tolerance(tol)?;
    let degrees = pair.p.degrees();
    let degree_sum = degree_sum(&degrees);
    let n64 = n as u64;
    Ok(NecessaryReport {
        symmetry_p: pair.p.invert_vars().approx_eq(&pair.p, tol)?,
        symmetry_q: pair.q.invert_vars().approx_eq(&pair.q.neg(), tol)?,
        degree_equality: degrees == pair.q.degrees(),
        p_nonzero: !pair.p.is_zero(),
        parity_ok: degree_sum % 2 == n64 % 2,
        degree_bound_ok: degree_sum <= n64,
        normalization_ok: pair.is_normalized(tol)?,
        degrees,
        degree_sum,
    })
}

/// Classical single-variable characterization: degree bound, inversion
/// symmetry, parity under `a -> -a`, and normalization.
pub fn qsp1_characterize(pair: &PqPair, n: usize, tol: f64) -> Result<bool> {
    if pair.variables() != 1 {
        return Err(CdaError::NotSingleVariable(pair.variables()));
    }
    let pair = pair.clone().with_tolerance(tol)?;
    let (p, q) = (&pair.p, &pair.q);
    let n32 = u32::try_from(n).unwrap_or(u32::MAX);

    let degree_ok = p.degree(1)? <= n32 && q.degree(1)? <= n32;
    let symmetry_ok =
        p.invert_vars().approx_eq(p, tol)? && q.invert_vars().approx_eq(&q.neg(), tol)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let parity_ok = p.negate_var(1)?.approx_eq(&p.scale(sign.into()), tol)?
        && q.negate_var(1)?.approx_eq(&q.scale(sign.into()), tol)?;
    let normalization_ok = pair.is_normalized(tol)?;
    Ok(degree_ok && symmetry_ok && parity_ok && normalization_ok)
}

/// `L = prod_j (2 max(deg_j P, deg_j Q) + 1)`, the term-count bound that
/// sizes each decision step. Saturates at `u64::MAX`.
pub fn term_bound(pair: &PqPair) -> u64 {
    let dp = pair.p.degrees();
    let dq = pair.q.degrees();
    dp.iter()
        .zip(&dq)
        .map(|(&a, &b)| 2 * u64::from(a.max(b)) + 1)
        .fold(1u64, |acc, f| acc.saturating_mul(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::PolyMatrix;
    use std::f64::consts::FRAC_PI_3;

    const TOL: f64 = 1e-9;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn signal_pair(m: usize, j: usize) -> PqPair {
        PolyMatrix::signal_operator(j, m).unwrap().top_row()
    }

    fn seq(m: usize, phases: &[f64], indices: &[usize]) -> MqspSequence {
        MqspSequence::new(m, phases.to_vec(), indices.to_vec()).unwrap()
    }

    fn monomial_pair() -> PqPair {
        PqPair::new(
            LaurentPoly::monomial(vec![1], c(1., 0.)).unwrap(),
            LaurentPoly::zero(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn find_phase_examples() {
        assert_eq!(
            find_phase(&signal_pair(1, 1), 1, 1, TOL).unwrap(),
            Some(0.0)
        );

        // e^{i pi/3} (a + 1/a)/2, e^{-i pi/3} (a - 1/a)/2
        let pair = seq(1, &[0.0, FRAC_PI_3], &[1]).evaluate();
        let phi = find_phase(&pair, 1, 1, TOL).unwrap().unwrap();
        assert!((phi - FRAC_PI_3).abs() < 1e-12);

        let unmatched = PqPair::new(
            LaurentPoly::half_sum(1, 1, 1.0).unwrap().scale(c(2., 0.)),
            LaurentPoly::zero(1).unwrap(),
        )
        .unwrap();
        assert_eq!(find_phase(&unmatched, 1, 1, TOL).unwrap(), None);

        let id = PqPair::identity(1).unwrap();
        assert_eq!(find_phase(&id, 1, 3, TOL).unwrap(), Some(0.0));
        assert!(find_phase(&id, 2, 0, TOL).is_err());
    }

    #[test]
    fn find_phase_principal_branch() {
        // ratio -1 maps to phi = pi/2, never -pi/2
        let pair = seq(1, &[0.0, FRAC_PI_2], &[1]).evaluate();
        let phi = find_phase(&pair, 1, 1, TOL).unwrap().unwrap();
        assert!((phi - FRAC_PI_2).abs() < 1e-12);
        let pair = seq(1, &[0.0, -FRAC_PI_2], &[1]).evaluate();
        let phi = find_phase(&pair, 1, 1, TOL).unwrap().unwrap();
        assert!((phi - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn reduce_step_examples() {
        let r = reduce_step(&signal_pair(1, 1), 1, 0.0).unwrap();
        assert!(r.approx_eq(&PqPair::identity(1).unwrap(), 1e-15).unwrap());

        let two = seq(2, &[0.0, 0.0, 0.0], &[1, 2]).evaluate();
        let r = reduce_step(&two, 2, 0.0).unwrap();
        assert!(r.approx_eq(&signal_pair(2, 1), 1e-15).unwrap());
    }

    #[test]
    fn reduce_step_inverts_the_last_factor() {
        let pair = seq(2, &[0.2, -0.4, 1.3, 0.9], &[1, 2, 2]).evaluate();
        let phi = find_phase(&pair, 2, 2, TOL).unwrap().unwrap();
        let reduced = reduce_step(&pair, 2, phi).unwrap();
        let back = reduced
            .to_matrix()
            .mat_mul(&PolyMatrix::signal_operator(2, 2).unwrap())
            .unwrap()
            .mat_mul(&PolyMatrix::z_rotation(phi, 2).unwrap())
            .unwrap();
        assert!(back.approx_eq(&pair.to_matrix(), 1e-12).unwrap());
        assert_eq!(reduced.p.degrees(), vec![1, 1]);
    }

    #[test]
    fn decide_examples() {
        let id = PqPair::identity(1).unwrap();
        assert!(decide(&id, 0, TOL).unwrap());
        assert!(!decide(&id, 1, TOL).unwrap());
        assert!(decide(&id, 2, TOL).unwrap());
        assert!(decide(&signal_pair(1, 1), 1, TOL).unwrap());
        assert!(!decide(&monomial_pair(), 1, TOL).unwrap());
    }

    #[test]
    fn trace_shapes() {
        let t = trace(&PqPair::identity(1).unwrap(), 4, TOL).unwrap();
        assert_eq!(
            t.steps[..3],
            [
                TraceStep::ReduceN2 { n: 4 },
                TraceStep::ReduceN2 { n: 2 },
                TraceStep::BaseAccept { phi0: 0.0 }
            ]
        );
        assert!(matches!(t.steps[3], TraceStep::Refine { deviation, .. } if deviation <= 1e-15));
        assert!(t.accepted());
        let t = trace(&PqPair::identity(1).unwrap(), 1, TOL).unwrap();
        assert_eq!(
            t.reject_reason(),
            Some((1, RejectReason::DegreeSum { sum: 0 }))
        );
        let t = trace(&monomial_pair(), 1, TOL).unwrap();
        assert_eq!(t.reject_reason(), Some((1, RejectReason::NoPhase)));

        let half = PqPair::new(
            LaurentPoly::constant(1, c(0.5, 0.)).unwrap(),
            LaurentPoly::zero(1).unwrap(),
        )
        .unwrap();
        let t = trace(&half, 0, TOL).unwrap();
        assert_eq!(
            t.reject_reason(),
            Some((0, RejectReason::BaseNotUnimodular))
        );
    }

    #[test]
    fn synthesize_examples() {
        let r = synthesize(&PqPair::identity(1).unwrap(), 2, TOL).unwrap();
        let s = r.sequence.unwrap();
        assert_eq!(s.phases(), &[0.0, FRAC_PI_2, -FRAC_PI_2]);
        assert_eq!(s.indices(), &[1, 1]);

        let r = synthesize(&signal_pair(1, 1), 1, TOL).unwrap();
        let s = r.sequence.unwrap();
        assert_eq!(s.phases(), &[0.0, 0.0]);
        assert_eq!(s.indices(), &[1]);

        let r = synthesize(&monomial_pair(), 1, TOL).unwrap();
        assert!(!r.constructible);
        assert!(r.sequence.is_none());
    }

    #[test]
    fn synthesize_places_pads_at_their_level() {
        // pad at n=3 fills positions 2 and 3, then strip at n=1
        let pair = signal_pair(2, 2);
        let r = synthesize(&pair, 3, TOL).unwrap();
        let s = r.sequence.unwrap();
        assert_eq!(s.indices(), &[2, 1, 1]);
        assert_eq!(s.phases(), &[0.0, 0.0, FRAC_PI_2, -FRAC_PI_2]);
        assert!(s.evaluate().approx_eq(&pair, 1e-12).unwrap());
    }

    #[test]
    fn check_necessary_examples() {
        let pair = seq(2, &[0.3, 1.0, -0.2, 0.5], &[2, 1, 2]).evaluate();
        assert!(check_necessary(&pair, 3, TOL).unwrap().all_ok());

        let r = check_necessary(&monomial_pair(), 1, TOL).unwrap();
        assert!(!r.symmetry_p);
        assert!(r.parity_ok);

        let r = check_necessary(&PqPair::identity(1).unwrap(), 1, TOL).unwrap();
        assert!(!r.parity_ok);
        assert!(r.symmetry_p && r.symmetry_q && r.normalization_ok && r.p_nonzero);

        let zero =
            PqPair::new(LaurentPoly::zero(1).unwrap(), LaurentPoly::zero(1).unwrap()).unwrap();
        let r = check_necessary(&zero, 0, TOL).unwrap();
        assert!(!r.p_nonzero);
        assert!(!r.normalization_ok);
    }

    #[test]
    fn qsp1_examples() {
        assert!(qsp1_characterize(&signal_pair(1, 1), 1, TOL).unwrap());
        assert!(!qsp1_characterize(&PqPair::identity(1).unwrap(), 1, TOL).unwrap());
        assert!(qsp1_characterize(&PqPair::identity(1).unwrap(), 2, TOL).unwrap());
        assert_eq!(
            qsp1_characterize(&PqPair::identity(2).unwrap(), 0, TOL),
            Err(CdaError::NotSingleVariable(2))
        );
    }

    #[test]
    fn term_bound_examples() {
        assert_eq!(term_bound(&PqPair::identity(3).unwrap()), 1);
        assert_eq!(term_bound(&signal_pair(1, 1)), 3);
        assert_eq!(term_bound(&seq(2, &[0.0, 0.0, 0.0], &[1, 2]).evaluate()), 9);
    }

    #[test]
    fn half_arg_range() {
        assert_eq!(half_arg(c(-1.0, -0.0)), FRAC_PI_2);
        assert_eq!(half_arg(c(-1.0, 0.0)), FRAC_PI_2);
        assert_eq!(half_arg(c(1.0, 0.0)), 0.0);
        assert!((half_arg(c(0.0, -1.0)) + FRAC_PI_2 / 2.0).abs() < 1e-15);
    }
}
