//! Decide whether a pair of multivariable Laurent polynomials `(P, Q)` is the
//! top row of an `n`-step multivariable quantum signal processing (M-QSP)
//! sequence, and when it is, recover the angle and index parameters.
//!
//! * [`laurent`]: sparse Laurent polynomial arithmetic.
//! * [`su2`]: signal operators, z-rotations, pairs, and sequence evaluation.
//! * [`cda`]: the decision procedure, synthesis, and necessary-condition checks.
//! * [`refine`]: least-squares polishing of peeled phases.
//! * [`oracle`]: seeded random sequences and round-trip verification.
//! * [`document`]: JSON documents and bundled fixtures.

pub mod cda;
pub mod document;
pub mod laurent;
pub mod oracle;
pub mod refine;
pub mod su2;

pub use cda::{
    check_necessary, decide, find_phase, peel_tolerance, qsp1_characterize, reduce_step,
    synthesize, term_bound, trace, transpose_pair, CdaError, DecisionTrace, NecessaryReport,
    RejectReason, Side, SynthesisResult, TraceStep,
};
pub use document::{DocumentError, PolyPairDocument, SequenceDocument};
pub use laurent::{Exponents, LaurentPoly, PolyError, DEFAULT_TOLERANCE};
pub use oracle::{random_sequence, roundtrip_check, AngleMode, OracleConfig, RoundtripReport};
pub use refine::{refine_phases, Refinement};
pub use su2::{MqspSequence, PolyMatrix, PqPair, SequenceError};
