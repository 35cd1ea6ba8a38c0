//! Four-stroke quantum Otto cycle bookkeeping.
//!
//! The working fluid is the cavity photon gas with level energies
//! `E_n = n * omega`. Heat intake/output and net work come from occupation
//! changes at fixed spectrum (isochores), while the adiabats rescale the
//! spectrum `omega_H -> omega_L` at fixed occupations:
//!
//! ```text
//! Q_in  = sum_n E_n^H [P_n(T_H) - P_n(T_L)]
//! Q_out = sum_n E_n^L [P_n(T_L) - P_n(T_H)]
//! W     = Q_in + Q_out
//! ```
//!
//! The cold-end temperature is tied to the compression ratio,
//! `T_L = omega_L * T_c`, which keeps the occupation probabilities invariant
//! across the adiabats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bose–Einstein occupation `1 / (exp(omega/T) - 1)`.
pub fn bose_occupation(temperature: f64, omega: f64) -> f64 {
    1.0 / ((omega / temperature).exp() - 1.0)
}

/// Effective temperature whose Bose–Einstein occupation matches `mean_n`:
/// `T_eff = omega / ln(1 + 1/mean_n)`.
pub fn effective_temperature(mean_n: f64, omega: f64) -> Result<f64> {
    if !(mean_n > 0.0) {
        return Err(Error::UndefinedTemperature(mean_n));
    }
    Ok(omega / (1.0 + 1.0 / mean_n).ln())
}

/// Occupation probabilities of a thermal oscillator state with level spacing
/// `omega`, truncated at `n_levels` and normalized.
pub fn thermal_occupations(temperature: f64, omega: f64, n_levels: usize) -> Vec<f64> {
    let q = (-omega / temperature).exp();
    let mut p: Vec<f64> = (0..n_levels).map(|n| q.powi(n as i32)).collect();
    let z: f64 = p.iter().sum();
    for v in &mut p {
        *v /= z;
    }
    p
}

/// Number of levels needed so the energy-weighted tail of the thermal
/// distribution stays below `rel_tol` of the mean energy.
pub fn levels_for_tail(temperature: f64, omega: f64, rel_tol: f64) -> usize {
    let q = (-omega / temperature).exp();
    let mean = bose_occupation(temperature, omega).max(1e-12);
    let mut levels = 2usize;
    loop {
        let l = levels as f64;
        // (1-q) * sum_{n>=L} n q^n = q^L (L - (L-1) q) / (1 - q)
        let tail = q.powf(l) * (l - (l - 1.0) * q) / (1.0 - q);
        if tail <= rel_tol * mean || levels > 100_000 {
            return levels;
        }
        levels += 1;
    }
}

/// Fixed data of one Otto cycle evaluation: compression ratio, the two
/// isochore temperatures, and the truncation of the spectral sums.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OttoCycleSpec {
    pub omega_h: f64,
    pub omega_l: f64,
    pub t_h: f64,
    /// Tied to the compression ratio: `t_l = omega_l * t_c`.
    pub t_l: f64,
    pub n_levels: usize,
}

impl OttoCycleSpec {
    /// `omega_h` is the unit of energy; `t_l` is derived as `omega_l * t_c`.
    pub fn new(omega_l: f64, t_h: f64, t_c: f64, n_levels: usize) -> Result<Self> {
        if !(omega_l > 0.0 && omega_l < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "omega_L must lie in (0, 1) in units of omega_H, got {omega_l}"
            )));
        }
        if !(t_h > 0.0) || !(t_c > 0.0) {
            return Err(Error::InvalidArgument(
                "temperatures must be positive".into(),
            ));
        }
        if n_levels < 2 {
            return Err(Error::InvalidArgument(
                "n_levels must be at least 2".into(),
            ));
        }
        Ok(OttoCycleSpec {
            omega_h: 1.0,
            omega_l,
            t_h,
            t_l: omega_l * t_c,
            n_levels,
        })
    }
}

/// Heat and work of one cycle, in units of `omega_H`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OttoResult {
    pub omega_l: f64,
    pub q_in: f64,
    pub q_out: f64,
    pub work: f64,
    /// `W / Q_in`; absent when no heat is taken in.
    pub efficiency: Option<f64>,
    /// `Q_in > -Q_out > 0`.
    pub positive_work: bool,
}

fn check_distribution(name: &str, p: &[f64], n_levels: usize) -> Result<()> {
    if p.len() != n_levels {
        return Err(Error::InvalidArgument(format!(
            "{name} has {} entries, expected n_levels = {n_levels}",
            p.len()
        )));
    }
    if p.iter().any(|&v| v < -1e-12) {
        return Err(Error::InvalidArgument(format!(
            "{name} has negative probabilities"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "{name} sums to {sum}, expected 1 within 1e-6"
        )));
    }
    Ok(())
}

/// Evaluate the three isochore/adiabat sums for occupation distributions
/// `p_h` (hot isochore) and `p_l` (cold isochore).
pub fn otto_quantities(spec: &OttoCycleSpec, p_h: &[f64], p_l: &[f64]) -> Result<OttoResult> {
    check_distribution("P_H", p_h, spec.n_levels)?;
    check_distribution("P_L", p_l, spec.n_levels)?;
    let mut q_in = 0.0;
    let mut q_out = 0.0;
    for n in 0..spec.n_levels {
        let dp = p_h[n] - p_l[n];
        q_in += n as f64 * spec.omega_h * dp;
        q_out -= n as f64 * spec.omega_l * dp;
    }
    let work = q_in + q_out;
    let efficiency = if q_in > 0.0 { Some(work / q_in) } else { None };
    let positive_work = q_in > -q_out && -q_out > 0.0;
    Ok(OttoResult {
        omega_l: spec.omega_l,
        q_in,
        q_out,
        work,
        efficiency,
        positive_work,
    })
}

/// Work and efficiency from mean photon numbers alone:
/// `eta = 1 - omega_L/omega_H`, `W = eta * (mean_n_ss - mean_n_l) * omega_H`.
///
/// This is exact energy bookkeeping for any occupation distribution, so it
/// serves as the headline figure; `mean_n_l` defaults to the initial cavity
/// occupation at `T_c`.
pub fn work_from_photon_numbers(
    spec: &OttoCycleSpec,
    mean_n_ss: f64,
    mean_n_l: f64,
) -> (f64, f64) {
    let efficiency = 1.0 - spec.omega_l / spec.omega_h;
    let work = efficiency * (mean_n_ss - mean_n_l) * spec.omega_h;
    (work, efficiency)
}

/// Otto results over an `omega_L` grid with thermal occupations at the
/// effective hot temperature of `mean_n_ss` and at `T_L = omega_L T_c`.
pub fn work_curve(
    mean_n_ss: f64,
    t_c: f64,
    n_levels: usize,
    omega_l_grid: &[f64],
) -> Result<Vec<OttoResult>> {
    let t_h = effective_temperature(mean_n_ss, 1.0)?;
    let p_h = thermal_occupations(t_h, 1.0, n_levels);
    omega_l_grid
        .iter()
        .map(|&omega_l| {
            let spec = OttoCycleSpec::new(omega_l, t_h, t_c, n_levels)?;
            let p_l = thermal_occupations(spec.t_l, spec.omega_l, n_levels);
            otto_quantities(&spec, &p_h, &p_l)
        })
        .collect()
}

/// Same grid evaluation but with an explicit hot-isochore distribution
/// (e.g. the raw diagonal of the simulated steady field state).
pub fn work_curve_from_occupations(
    p_h: &[f64],
    t_h: f64,
    t_c: f64,
    omega_l_grid: &[f64],
) -> Result<Vec<OttoResult>> {
    let n_levels = p_h.len();
    omega_l_grid
        .iter()
        .map(|&omega_l| {
            let spec = OttoCycleSpec::new(omega_l, t_h, t_c, n_levels)?;
            let p_l = thermal_occupations(spec.t_l, spec.omega_l, n_levels);
            otto_quantities(&spec, p_h, &p_l)
        })
        .collect()
}
