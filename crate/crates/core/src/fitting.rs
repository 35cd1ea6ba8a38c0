//! Scaling-law fits, thermal-coherent-state fits, and the single-atom
//! micromaser intensity oracle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    displaced_thermal_state, fidelity, make_boson_ops, DensityMatrix, SpaceKind, ThermalParams,
};
use crate::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

/// Quadratic scaling fit `value = offset + xi * N^2`, plus a free-exponent
/// companion fit `value = offset + b * N^p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Intercept of the quadratic model (pinned when requested).
    pub offset: f64,
    /// `xi`, the `N^2` prefactor.
    pub coefficient: f64,
    /// Fitted power of the free-exponent model.
    pub exponent: f64,
    /// Root-mean-square residual of the quadratic model.
    pub residual: f64,
    pub free_offset: f64,
    pub free_amplitude: f64,
    pub free_residual: f64,
    pub points: Vec<(f64, f64)>,
}

fn solve_linear_model(
    points: &[(f64, f64)],
    basis: impl Fn(f64) -> f64,
    pin_offset: Option<f64>,
) -> Result<(f64, f64, f64)> {
    let n = points.len() as f64;
    match pin_offset {
        Some(offset) => {
            let mut sxx = 0.0;
            let mut sxv = 0.0;
            for &(x, v) in points {
                let b = basis(x);
                sxx += b * b;
                sxv += b * (v - offset);
            }
            if sxx == 0.0 {
                return Err(Error::InvalidArgument(
                    "degenerate design matrix in scaling fit".into(),
                ));
            }
            let coeff = sxv / sxx;
            let rss: f64 = points
                .iter()
                .map(|&(x, v)| (v - offset - coeff * basis(x)).powi(2))
                .sum();
            Ok((offset, coeff, (rss / n).sqrt()))
        }
        None => {
            let (mut sx, mut sxx, mut sv, mut sxv) = (0.0, 0.0, 0.0, 0.0);
            for &(x, v) in points {
                let b = basis(x);
                sx += b;
                sxx += b * b;
                sv += v;
                sxv += b * v;
            }
            let det = n * sxx - sx * sx;
            if det.abs() < 1e-12 * (n * sxx).max(1.0) {
                return Err(Error::InvalidArgument(
                    "degenerate design matrix in scaling fit".into(),
                ));
            }
            let offset = (sxx * sv - sx * sxv) / det;
            let coeff = (n * sxv - sx * sv) / det;
            let rss: f64 = points
                .iter()
                .map(|&(x, v)| (v - offset - coeff * basis(x)).powi(2))
                .sum();
            Ok((offset, coeff, (rss / n).sqrt()))
        }
    }
}

/// Least squares of `value = offset + xi N^2` (offset pinned when provided),
/// plus a free-exponent fit reporting `p`.
pub fn fit_quadratic_scaling(
    points: &[(f64, f64)],
    pin_offset: Option<f64>,
) -> Result<ScalingFit> {
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs at least 3 distinct N values, got {}",
            distinct.len()
        )));
    }

    let (offset, coefficient, residual) =
        solve_linear_model(points, |x| x * x, pin_offset)?;

    // free-exponent companion: golden-section refinement of a coarse scan
    let residual_at = |p: f64| -> f64 {
        solve_linear_model(points, |x| x.powf(p), pin_offset)
            .map(|(_, _, r)| r)
            .unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (0.2f64, 4.5f64);
    let mut best_p = lo;
    let mut best_r = f64::INFINITY;
    let coarse_steps = 86;
    for k in 0..=coarse_steps {
        let p = lo + (hi - lo) * k as f64 / coarse_steps as f64;
        let r = residual_at(p);
        if r < best_r {
            best_r = r;
            best_p = p;
        }
    }
    let step = (hi - lo) / coarse_steps as f64;
    lo = (best_p - step).max(0.05);
    hi = best_p + step;
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c1 = b - phi * (b - a);
    let mut c2 = a + phi * (b - a);
    let (mut f1, mut f2) = (residual_at(c1), residual_at(c2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - phi * (b - a);
            f1 = residual_at(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + phi * (b - a);
            f2 = residual_at(c2);
        }
    }
    let exponent = 0.5 * (a + b);
    let (free_offset, free_amplitude, free_residual) =
        solve_linear_model(points, |x| x.powf(exponent), pin_offset)?;

    Ok(ScalingFit {
        offset,
        coefficient,
        exponent,
        residual,
        free_offset,
        free_amplitude,
        free_residual,
        points: points.to_vec(),
    })
}

/// Unweighted log-log regression `value = amplitude * x^exponent`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub amplitude: f64,
    pub exponent: f64,
    /// RMS residual in log space.
    pub residual: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(
            "power-law fit needs at least 2 points".into(),
        ));
    }
    if points.iter().any(|&(x, v)| x <= 0.0 || v <= 0.0) {
        return Err(Error::InvalidArgument(
            "power-law fit needs positive abscissas and values".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, v)| (x.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let (mut sx, mut sxx, mut sv, mut sxv) = (0.0, 0.0, 0.0, 0.0);
    for &(x, v) in &logs {
        sx += x;
        sxx += x * x;
        sv += v;
        sxv += x * v;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::InvalidArgument(
            "degenerate design matrix in power-law fit".into(),
        ));
    }
    let intercept = (sxx * sv - sx * sxv) / det;
    let exponent = (n * sxv - sx * sv) / det;
    let rss: f64 = logs
        .iter()
        .map(|&(x, v)| (v - intercept - exponent * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        amplitude: intercept.exp(),
        exponent,
        residual: (rss / n).sqrt(),
        points: points.to_vec(),
    })
}

/// Thermal-coherent-state fit of a field state.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TCSFit {
    pub alpha: Complex64,
    pub temperature: f64,
    pub fidelity_value: f64,
}

/// Fit `D(alpha) rho_th(T) D†(alpha)` to a field state by moment matching
/// (`alpha = Tr(rho a)`, `<n>_th = Tr(rho a†a) - |alpha|^2`), scoring with
/// the Uhlmann fidelity. With `refine` set, a local grid search around the
/// moment estimates maximizes the fidelity (deterministic).
pub fn fit_thermal_coherent_state(
    rho_f: &DensityMatrix,
    omega: f64,
    refine: bool,
) -> Result<TCSFit> {
    let space = rho_f.space();
    if !matches!(space.kind(), SpaceKind::Fock { .. }) {
        return Err(Error::RepresentationMismatch {
            expected: "Fock".into(),
            found: format!("{:?}", space.kind()),
        });
    }
    let boson = make_boson_ops(space)?;
    let alpha = rho_f.expectation(&boson.annihilate);
    let mean_n = rho_f.expectation(&boson.number).re;
    let n_th = mean_n - alpha.norm_sqr();
    if n_th < -1e-9 {
        return Err(Error::FitInfeasible(format!(
            "coherent displacement |alpha|^2 = {:.6} exceeds the mean occupation {:.6}",
            alpha.norm_sqr(),
            mean_n
        )));
    }
    let n_th = n_th.max(1e-12);
    let temperature = omega / (1.0 + 1.0 / n_th).ln();

    let score = |temp: f64, amp: f64| -> Result<f64> {
        let candidate = displaced_thermal_state(
            space,
            &ThermalParams::new(temp, omega)?,
            Complex64::from_polar(amp, alpha.arg()),
        )?;
        fidelity(rho_f, &candidate.state)
    };

    let mut best_t = temperature;
    let mut best_amp = alpha.norm();
    let mut best_f = score(best_t, best_amp)?;
    if refine {
        let mut spread = 0.05;
        for _ in 0..3 {
            let (t0, a0, mut improved) = (best_t, best_amp, false);
            for dt in -2..=2 {
                for da in -2..=2 {
                    if dt == 0 && da == 0 {
                        continue;
                    }
                    let t = t0 * (1.0 + spread * dt as f64 / 2.0);
                    let a = a0 * (1.0 + spread * da as f64 / 2.0);
                    if t <= 0.0 {
                        continue;
                    }
                    let f = score(t, a)?;
                    if f > best_f {
                        best_f = f;
                        best_t = t;
                        best_amp = a;
                        improved = true;
                    }
                }
            }
            if !improved {
                spread /= 4.0;
            }
        }
    }

    Ok(TCSFit {
        alpha: Complex64::from_polar(best_amp, alpha.arg()),
        temperature: best_t,
        fidelity_value: best_f,
    })
}

/// Closed-form micromaser emission intensity for random arrival times,
/// `I_1 = r g^2 t_int^2 P_e / kappa`; the single-atom incoherent oracle.
pub fn micromaser_intensity(r: f64, g: f64, t_int: f64, p_e: f64, kappa: f64) -> Result<f64> {
    for (name, v) in [("r", r), ("g", g), ("t_int", t_int), ("P_e", p_e)] {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be nonnegative, got {v}"
            )));
        }
    }
    if p_e > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "P_e is a probability, got {p_e}"
        )));
    }
    if kappa <= 0.0 {
        return Err(Error::InvalidArgument(
            "micromaser intensity is undefined for kappa <= 0".into(),
        ));
    }
    Ok(r * g * g * t_int * t_int * p_e / kappa)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiStudyPoint {
    pub parameter: f64,
    pub xi: f64,
    pub points: Vec<(f64, f64)>,
}

/// Power-law studies of the `N^2` prefactor against `g` and `kappa`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiStudy {
    pub g_fit: PowerLawFit,
    pub kappa_fit: PowerLawFit,
    pub g_points: Vec<XiStudyPoint>,
    pub kappa_points: Vec<XiStudyPoint>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Coupling,
    Damping,
}

/// For each grid value, rerun the ignition at `N in {2, 3, 4}`, fit the
/// effective-temperature prefactor `xi` (offset pinned at `T_c`), and
/// regress `xi` against the parameter on log-log axes.
pub fn xi_parameter_study(
    base: &ProtocolConfig,
    g_grid: &[f64],
    kappa_grid: &[f64],
) -> Result<XiStudy> {
    if g_grid.len() < 4 || kappa_grid.len() < 4 {
        return Err(Error::InsufficientData(
            "parameter grids need at least 4 values each".into(),
        ));
    }
    const CLUSTER_SIZES: [usize; 3] = [2, 3, 4];
    let jobs: Vec<(Axis, f64, usize)> = g_grid
        .iter()
        .flat_map(|&g| CLUSTER_SIZES.iter().map(move |&n| (Axis::Coupling, g, n)))
        .chain(
            kappa_grid
                .iter()
                .flat_map(|&k| CLUSTER_SIZES.iter().map(move |&n| (Axis::Damping, k, n))),
        )
        .collect();

    let results: Result<Vec<f64>> = jobs
        .par_iter()
        .map(|&(axis, value, atoms)| {
            let mut cfg = base.clone();
            cfg.atoms = atoms;
            match axis {
                Axis::Coupling => cfg.model.g = value,
                Axis::Damping => cfg.model.kappa = value,
            }
            let label = match axis {
                Axis::Coupling => format!("g = {value}, N = {atoms}"),
                Axis::Damping => format!("kappa = {value}, N = {atoms}"),
            };
            let series = run_ignition(&cfg).map_err(|e| e.in_context(label.clone()))?;
            let stats = steady_state_stats(&series, &cfg).map_err(|e| e.in_context(label))?;
            Ok(stats.t_eff_ss)
        })
        .collect();
    let results = results?;

    let collect_axis = |axis: Axis, grid: &[f64]| -> Result<(Vec<XiStudyPoint>, PowerLawFit)> {
        let mut study_points = Vec::with_capacity(grid.len());
        for (gi, &value) in grid.iter().enumerate() {
            let mut pts = Vec::with_capacity(CLUSTER_SIZES.len());
            for (ni, &n) in CLUSTER_SIZES.iter().enumerate() {
                let idx = match axis {
                    Axis::Coupling => gi * CLUSTER_SIZES.len() + ni,
                    Axis::Damping => {
                        g_grid.len() * CLUSTER_SIZES.len() + gi * CLUSTER_SIZES.len() + ni
                    }
                };
                pts.push((n as f64, results[idx]));
            }
            let fit = fit_quadratic_scaling(&pts, Some(base.t_c))?;
            study_points.push(XiStudyPoint {
                parameter: value,
                xi: fit.coefficient,
                points: pts,
            });
        }
        let fit = fit_power_law(
            &study_points
                .iter()
                .map(|p| (p.parameter, p.xi))
                .collect::<Vec<_>>(),
        )?;
        Ok((study_points, fit))
    };

    let (g_points, g_fit) = collect_axis(Axis::Coupling, g_grid)?;
    let (kappa_points, kappa_fit) = collect_axis(Axis::Damping, kappa_grid)?;
    Ok(XiStudy {
        g_fit,
        kappa_fit,
        g_points,
        kappa_points,
    })
}
