//! Embedded Dormand–Prince 5(4) stepper for the matrix-valued master
//! equation, with PI step-size control, exact landing on requested sample
//! times, and periodic CPTP integrity guards (re-Hermitize, renormalize the
//! trace, assert positivity).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Right-hand side of the matrix ODE `dy/dt = f(t, y)`.
pub(crate) trait RhsEval {
    fn eval(&self, t: f64, y: &CMatrix, out: &mut CMatrix);
}

pub(crate) struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub guard_every: usize,
    pub positivity_floor: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub guards: usize,
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the 5th-order propagation weights and the embedded
// 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 10.0;
// PI controller exponents (classic dopri5 values).
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

fn axpy(alpha: f64, x: &CMatrix, y: &mut CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += alpha * *xi;
    }
}

/// Weighted RMS of the error estimate against `atol + rtol*max(|y|, |y_new|)`.
fn error_norm(err: &CMatrix, y: &CMatrix, y_new: &CMatrix, opts: &StepperOptions) -> f64 {
    let n = err.len() as f64;
    let mut acc = 0.0;
    for ((e, a), b) in err
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .zip(y_new.as_slice())
    {
        let scale = opts.abs_tol + opts.rel_tol * a.norm().max(b.norm());
        let r = e.norm() / scale;
        acc += r * r;
    }
    (acc / n).sqrt()
}

fn scaled_norm(m: &CMatrix, reference: &CMatrix, opts: &StepperOptions) -> f64 {
    let n = m.len() as f64;
    let mut acc = 0.0;
    for (v, r) in m.as_slice().iter().zip(reference.as_slice()) {
        let scale = opts.abs_tol + opts.rel_tol * r.norm();
        let q = v.norm() / scale;
        acc += q * q;
    }
    (acc / n).sqrt()
}

/// Hairer-style initial step size guess; costs one extra RHS evaluation.
fn initial_step<R: RhsEval>(
    rhs: &R,
    y0: &CMatrix,
    f0: &CMatrix,
    duration: f64,
    opts: &StepperOptions,
    stats: &mut IntegrationStats,
) -> f64 {
    let d0 = scaled_norm(y0, y0, opts);
    let d1 = scaled_norm(f0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(opts.max_step).min(duration);
    let mut y1 = y0.clone();
    axpy(h0, f0, &mut y1);
    let mut f1 = CMatrix::zeros(y0.nrows(), y0.ncols());
    rhs.eval(h0, &y1, &mut f1);
    stats.rhs_evals += 1;
    let mut df = f1;
    axpy(-1.0, f0, &mut df);
    let d2 = scaled_norm(&df, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step).min(duration)
}

/// Re-Hermitize, renormalize the trace, and assert positivity.
fn guard(y: &mut CMatrix, t: f64, opts: &StepperOptions) -> Result<()> {
    linalg::hermitize(y);
    let tr = linalg::trace(y).re;
    let trace_dev = (tr - 1.0).abs();
    if !(tr > 0.0) {
        return Err(Error::Integrity {
            t,
            min_eigenvalue: f64::NAN,
            trace_deviation: trace_dev,
        });
    }
    y.unscale_mut(tr);
    if let Err(min) = linalg::min_eigenvalue_at_least(y, opts.positivity_floor) {
        return Err(Error::Integrity {
            t,
            min_eigenvalue: min,
            trace_deviation: trace_dev,
        });
    }
    Ok(())
}

/// Integrate from 0 to `duration`, landing exactly on each of `stops`
/// (sorted, unique, within `(0, duration]`) and invoking `observe` there.
/// Returns the final state after a closing integrity guard.
pub(crate) fn integrate<R: RhsEval>(
    rhs: &R,
    y0: &CMatrix,
    duration: f64,
    opts: &StepperOptions,
    stops: &[f64],
    mut observe: impl FnMut(f64, &CMatrix),
) -> Result<(CMatrix, IntegrationStats)> {
    let mut stats = IntegrationStats::default();
    let mut y = y0.clone();
    if duration == 0.0 {
        return Ok((y, stats));
    }

    let dim_r = y0.nrows();
    let dim_c = y0.ncols();
    let zeros = || CMatrix::zeros(dim_r, dim_c);
    let mut k: Vec<CMatrix> = (0..7).map(|_| zeros()).collect();
    let mut y_stage = zeros();
    let mut y_new = zeros();
    let mut err = zeros();

    rhs.eval(0.0, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let mut h_prop = initial_step(rhs, &y, &k[0], duration, opts, &mut stats);

    // Targets: every stop plus the final time.
    let mut targets: Vec<(f64, bool)> = stops.iter().map(|&s| (s, true)).collect();
    match targets.last() {
        Some(&(last, _)) if last == duration => {}
        _ => targets.push((duration, false)),
    }

    let mut t = 0.0;
    let mut facold: f64 = 1e-4;
    let mut just_rejected = false;
    let mut since_guard = 0usize;

    for &(target, emit) in &targets {
        while t < target {
            let mut h = h_prop.min(opts.max_step);
            let mut landing = false;
            // stretch by up to 1% to land exactly instead of leaving an
            // ulp-sized sliver for the next step
            if t + 1.01 * h >= target {
                h = target - t;
                landing = true;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Stiffness { t, h });
            }

            // Stages 2..7 (k1 is fresh from FSAL or the initial evaluation).
            y_stage.copy_from(&y);
            axpy(h * A21, &k[0], &mut y_stage);
            rhs.eval(t + C2 * h, &y_stage, &mut k[1]);

            y_stage.copy_from(&y);
            axpy(h * A31, &k[0], &mut y_stage);
            axpy(h * A32, &k[1], &mut y_stage);
            rhs.eval(t + C3 * h, &y_stage, &mut k[2]);

            y_stage.copy_from(&y);
            axpy(h * A41, &k[0], &mut y_stage);
            axpy(h * A42, &k[1], &mut y_stage);
            axpy(h * A43, &k[2], &mut y_stage);
            rhs.eval(t + C4 * h, &y_stage, &mut k[3]);

            y_stage.copy_from(&y);
            axpy(h * A51, &k[0], &mut y_stage);
            axpy(h * A52, &k[1], &mut y_stage);
            axpy(h * A53, &k[2], &mut y_stage);
            axpy(h * A54, &k[3], &mut y_stage);
            rhs.eval(t + C5 * h, &y_stage, &mut k[4]);

            y_stage.copy_from(&y);
            axpy(h * A61, &k[0], &mut y_stage);
            axpy(h * A62, &k[1], &mut y_stage);
            axpy(h * A63, &k[2], &mut y_stage);
            axpy(h * A64, &k[3], &mut y_stage);
            axpy(h * A65, &k[4], &mut y_stage);
            rhs.eval(t + h, &y_stage, &mut k[5]);

            y_new.copy_from(&y);
            axpy(h * B1, &k[0], &mut y_new);
            axpy(h * B3, &k[2], &mut y_new);
            axpy(h * B4, &k[3], &mut y_new);
            axpy(h * B5, &k[4], &mut y_new);
            axpy(h * B6, &k[5], &mut y_new);
            rhs.eval(t + h, &y_new, &mut k[6]);
            stats.rhs_evals += 6;

            err.fill(Complex64::new(0.0, 0.0));
            axpy(h * E1, &k[0], &mut err);
            axpy(h * E3, &k[2], &mut err);
            axpy(h * E4, &k[3], &mut err);
            axpy(h * E5, &k[4], &mut err);
            axpy(h * E6, &k[5], &mut err);
            axpy(h * E7, &k[6], &mut err);
            let err_norm = error_norm(&err, &y, &y_new, opts);

            if err_norm <= 1.0 {
                t = if landing { target } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6); // FSAL
                stats.accepted += 1;
                since_guard += 1;

                if since_guard >= opts.guard_every {
                    guard(&mut y, t, opts)?;
                    stats.guards += 1;
                    since_guard = 0;
                    // the guard touches y, so the FSAL derivative is stale
                    rhs.eval(t, &y, &mut k[0]);
                    stats.rhs_evals += 1;
                }

                let fac = SAFETY * err_norm.powf(-ALPHA) * facold.powf(BETA);
                let fac = fac.clamp(MIN_SCALE, MAX_SCALE);
                facold = err_norm.max(1e-4);
                let mut next = h * fac;
                if just_rejected {
                    next = next.min(h);
                }
                h_prop = next;
                just_rejected = false;
            } else {
                let fac = (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, 1.0);
                h_prop = h * fac;
                stats.rejected += 1;
                just_rejected = true;
            }
        }
        if emit {
            observe(t, &y);
        }
    }

    guard(&mut y, t, opts)?;
    stats.guards += 1;
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use approx::assert_relative_eq;

    /// dy/dt = lambda y on a 1x1 "matrix".
    struct Scalar {
        lambda: Complex64,
    }

    impl RhsEval for Scalar {
        fn eval(&self, _t: f64, y: &CMatrix, out: &mut CMatrix) {
            out[(0, 0)] = self.lambda * y[(0, 0)];
        }
    }

    fn opts() -> StepperOptions {
        StepperOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 0.05,
            guard_every: usize::MAX, // scalar test state is not a density matrix
            positivity_floor: 1e-8,
        }
    }

    #[test]
    fn exponential_decay_to_tolerance() {
        let rhs = Scalar { lambda: c(-0.3) };
        let y0 = CMatrix::from_element(1, 1, c(1.0));
        let mut seen = Vec::new();
        let (_y, stats) = integrate(&rhs, &y0, 10.0, &opts(), &[2.5, 5.0, 10.0], |t, y| {
            seen.push((t, y[(0, 0)].re));
        })
        .unwrap();
        assert!(stats.accepted > 0);
        assert_eq!(seen.len(), 3);
        for (t, v) in seen {
            assert_relative_eq!(v, (-0.3 * t).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn zero_duration_returns_input() {
        let rhs = Scalar { lambda: c(1.0) };
        let y0 = CMatrix::from_element(1, 1, c(0.7));
        let (y, stats) = integrate(&rhs, &y0, 0.0, &opts(), &[], |_, _| {}).unwrap();
        assert_eq!(y[(0, 0)], c(0.7));
        assert_eq!(stats.rhs_evals, 0);
    }
}
