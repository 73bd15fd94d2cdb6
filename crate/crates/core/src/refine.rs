//! Least-squares polishing of sequence phases against a target pair.
//!
//! Peeling reads each phase off the top-degree slices of a partially
//! reduced pair. Rounding in the input is amplified layer by layer, so the
//! phases it returns can be off by far more than the input error. Here the
//! index sequence is held fixed and all phases are adjusted together to
//! minimize the coefficient residual of the evaluated product.
//!
//! The work is done on a dense exponent box, `|k_j| <= (number of factors
//! A(a_j))`, which contains every term the sequence can produce.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::laurent::PolyError;
use crate::su2::{MqspSequence, PqPair};

const LM_ITERATIONS: usize = 30;
const MAX_SLOW: usize = 3;
const DAMPING_TRIES: usize = 40;

/// Phases of a refined sequence and its final max coefficient deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub sequence: MqspSequence,
    pub deviation: f64,
}

/// Wraps into `(-pi, pi]`.
fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

struct Grid {
    radius: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn for_sequence(seq: &MqspSequence) -> Self {
        let mut radius = vec![0; seq.variables()];
        for &j in seq.indices() {
            radius[j - 1] += 1;
        }
        let mut strides = Vec::with_capacity(radius.len());
        let mut len = 1;
        for r in &radius {
            strides.push(len);
            len *= 2 * r + 1;
        }
        Grid {
            radius,
            strides,
            len,
        }
    }

    fn offset(&self, exps: &[i32]) -> Option<usize> {
        let mut at = 0;
        for ((&k, &r), &s) in exps.iter().zip(&self.radius).zip(&self.strides) {
            let shifted = i64::from(k) + r as i64;
            if shifted < 0 || shifted > 2 * r as i64 {
                return None;
            }
            at += shifted as usize * s;
        }
        Some(at)
    }
}

/// Top row `(u, v)` of a product, densely.
#[derive(Clone)]
struct Row {
    u: Vec<Complex64>,
    v: Vec<Complex64>,
}

/// Right-multiplies the row by `A(a_j) e^{i phi Z}`:
/// `u' = e^{i phi} (C u + S v)`, `v' = e^{-i phi} (S u + C v)` with
/// `C, S = (a_j +- 1/a_j)/2`, so only `u + v` moves up and `u - v` down.
fn advance(
    row: &mut Row,
    stride: usize,
    w: Complex64,
    sum: &mut [Complex64],
    diff: &mut [Complex64],
) {
    let len = row.u.len();
    for i in 0..len {
        sum[i] = (row.u[i] + row.v[i]) * 0.5;
        diff[i] = (row.u[i] - row.v[i]) * 0.5;
    }
    let wc = w.conj();
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..len {
        let up = if i >= stride { sum[i - stride] } else { zero };
        let down = if i + stride < len {
            diff[i + stride]
        } else {
            zero
        };
        row.u[i] = w * (up + down);
        row.v[i] = wc * (up - down);
    }
}

/// Evaluated top row, and when `jacobian` is set its derivative with respect
/// to every phase.
fn evaluate(seq: &MqspSequence, grid: &Grid, jacobian: bool) -> (Row, Vec<Row>) {
    let zero = vec![Complex64::new(0.0, 0.0); grid.len];
    let centre = grid
        .offset(&vec![0; grid.radius.len()])
        .expect("origin is in the box");
    let phases = seq.phases();
    let mut top = Row {
        u: zero.clone(),
        v: zero.clone(),
    };
    top.u[centre] = Complex64::from_polar(1.0, phases[0]);
    let mut sum = zero.clone();
    let mut diff = zero;
    let i = Complex64::i();
    // d/d phi_k inserts i Z right after the k-th rotation
    let tangent = |row: &Row| Row {
        u: row.u.iter().map(|c| i * c).collect(),
        v: row.v.iter().map(|c| -i * c).collect(),
    };
    let mut columns = Vec::new();
    if jacobian {
        columns.push(tangent(&top));
    }
    for (k, &j) in seq.indices().iter().enumerate() {
        let stride = grid.strides[j - 1];
        let w = Complex64::from_polar(1.0, phases[k + 1]);
        advance(&mut top, stride, w, &mut sum, &mut diff);
        for col in columns.iter_mut() {
            advance(col, stride, w, &mut sum, &mut diff);
        }
        if jacobian {
            columns.push(tangent(&top));
        }
    }
    (top, columns)
}

/// The pair on the grid, plus what lies outside it.
struct Target {
    row: Row,
    outside_sq: f64,
    outside_max: f64,
}

impl Target {
    fn new(pair: &PqPair, grid: &Grid) -> Self {
        let mut row = Row {
            u: vec![Complex64::new(0.0, 0.0); grid.len],
            v: vec![Complex64::new(0.0, 0.0); grid.len],
        };
        let (mut outside_sq, mut outside_max) = (0.0, 0.0f64);
        for (poly, dense) in [(&pair.p, &mut row.u), (&pair.q, &mut row.v)] {
            for (e, c) in poly.terms() {
                match grid.offset(e.as_slice()) {
                    Some(at) => dense[at] = *c,
                    None => {
                        outside_sq += c.norm_sqr();
                        outside_max = outside_max.max(c.norm());
                    }
                }
            }
        }
        Target {
            row,
            outside_sq,
            outside_max,
        }
    }

    fn misfit(&self, top: &Row) -> f64 {
        let on_grid: f64 = top
            .u
            .iter()
            .zip(&self.row.u)
            .chain(top.v.iter().zip(&self.row.v))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        on_grid + self.outside_sq
    }

    /// Max deviation with the evaluated row thresholded at `tol` the way
    /// sparse polynomials are.
    fn deviation(&self, top: &Row, tol: f64) -> f64 {
        let mut worst = self.outside_max;
        for (got, want) in [(&top.u, &self.row.u), (&top.v, &self.row.v)] {
            let scale = got.iter().map(|c| c.norm()).fold(1.0, f64::max);
            for (a, b) in got.iter().zip(want) {
                let a = if a.norm() > tol * scale {
                    *a
                } else {
                    Complex64::new(0.0, 0.0)
                };
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

fn stack(row: &Row) -> impl Iterator<Item = f64> + '_ {
    row.u.iter().chain(&row.v).flat_map(|c| [c.re, c.im])
}

fn with_phases(seq: &MqspSequence, phases: Vec<f64>) -> MqspSequence {
    MqspSequence::new(seq.variables(), phases, seq.indices().to_vec())
        .expect("same shape as a valid sequence")
}

/// Adjusts the phases of `seq` so that its top row approaches `pair`,
/// stopping once the deviation is well under `tol` or progress stalls. The
/// deviation compares both sides thresholded at `tol`. The returned sequence
/// is never worse than the input.
pub fn refine_phases(pair: &PqPair, seq: &MqspSequence, tol: f64) -> Result<Refinement, PolyError> {
    if pair.variables() != seq.variables() {
        return Err(PolyError::ArityMismatch {
            left: pair.variables(),
            right: seq.variables(),
        });
    }
    let goal = tol * 1e-2;
    let grid = Grid::for_sequence(seq);
    let target = Target::new(pair, &grid);

    let mut current = seq.clone();
    let (top, _) = evaluate(&current, &grid, false);
    let mut current_sq = target.misfit(&top);
    let mut best = current.clone();
    let mut best_dev = target.deviation(&top, tol);
    let mut damping = 1e-6;

    // consecutive iterations that cut the misfit by less than half
    let mut slow = 0;
    for _ in 0..LM_ITERATIONS {
        if best_dev <= goal || (slow > 0 && best_dev <= tol) || slow >= MAX_SLOW {
            break;
        }
        let (top, columns) = evaluate(&current, &grid, true);
        let residual: Vec<f64> = stack(&top)
            .zip(stack(&target.row))
            .map(|(a, b)| a - b)
            .collect();
        let mut jac = DMatrix::zeros(residual.len(), columns.len());
        for (k, col) in columns.iter().enumerate() {
            jac.set_column(k, &DVector::from_iterator(residual.len(), stack(col)));
        }

        let svd = jac.svd(true, true);
        let (Some(u), Some(v_t)) = (&svd.u, &svd.v_t) else {
            break;
        };
        let sigma = &svd.singular_values;
        let largest = sigma.max();
        if largest == 0.0 {
            break;
        }
        let coords = u.transpose() * -DVector::from_vec(residual);

        // Levenberg-Marquardt through SVD filter factors, so that weakly
        // identified directions are damped rather than cut off
        let mut accepted = None;
        for _ in 0..DAMPING_TRIES {
            let lambda = damping * largest * largest;
            let filtered = DVector::from_iterator(
                sigma.len(),
                sigma
                    .iter()
                    .zip(coords.iter())
                    .map(|(s, c)| s * c / (s * s + lambda)),
            );
            let step = v_t.transpose() * filtered;
            let phases = current
                .phases()
                .iter()
                .zip(step.iter())
                .map(|(phi, d)| wrap(phi + d))
                .collect();
            let candidate = with_phases(&current, phases);
            let (top, _) = evaluate(&candidate, &grid, false);
            let sq = target.misfit(&top);
            if sq < current_sq {
                slow = if sq > 0.5 * current_sq { slow + 1 } else { 0 };
                current = candidate;
                current_sq = sq;
                damping = (damping / 3.0).max(1e-30);
                accepted = Some(top);
                break;
            }
            damping *= 4.0;
        }
        let Some(top) = accepted else {
            break;
        };
        let dev = target.deviation(&top, tol);
        if dev < best_dev {
            best = current.clone();
            best_dev = dev;
        }
    }
    let deviation = best.evaluate_with_tolerance(tol)?.max_deviation(pair)?;
    Ok(Refinement {
        sequence: best,
        deviation,
    })
}
