//! Energetic cost of preparing the coherent clusters.
//!
//! A pi/2 square pulse of duration `tau_p` tips each ground-state atom onto
//! the Bloch equator. The chain dipole moment -> pulse amplitude -> intensity
//! -> pulse energy gives, per atom,
//!
//! ```text
//! U_p = hbar omega (pi^2 / 24) (1 / tau_p gamma) (1 / zeta^2)
//! ```
//!
//! with `zeta = lambda / (pi delta)` the radial beam divergence. The module
//! is purely analytic; engine work output is passed in from the Otto-cycle
//! calculations and the cost is reported as a separate round-trip figure,
//! never folded into the engine efficiency.

use serde::Serialize;

use crate::error::{Error, Result};

/// Vacuum permittivity (F/m), CODATA.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s), exact.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Pulse and beam parameters, SI units.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CostParams {
    /// Transition angular frequency (rad/s).
    pub omega: f64,
    /// Spontaneous emission rate (1/s).
    pub gamma_sp: f64,
    /// Pulse duration (s).
    pub tau_p: f64,
    /// Beam width (m).
    pub delta: f64,
    /// Radial beam divergence `zeta = lambda / (pi delta)`.
    pub divergence: f64,
    /// `1 / (tau_p gamma_sp)`, the shorthand of the reduced estimate.
    pub tau_gamma_product: f64,
}

impl CostParams {
    /// Build from SI pulse/beam data; the divergence and `1/(tau gamma)`
    /// shorthands are derived.
    pub fn from_si(omega: f64, gamma_sp: f64, tau_p: f64, delta: f64) -> Result<Self> {
        let divergence = 2.0 * C_LIGHT / (omega * delta); // lambda/(pi delta)
        Self::build(omega, gamma_sp, tau_p, delta, divergence)
    }

    /// Build from the reduced estimate inputs `1/(tau_p gamma)` and the
    /// divergence; pulse duration and beam width are derived consistently.
    pub fn from_reduced(
        omega: f64,
        gamma_sp: f64,
        inv_tau_gamma: f64,
        divergence: f64,
    ) -> Result<Self> {
        if !(inv_tau_gamma > 0.0) {
            return Err(Error::InvalidArgument(
                "1/(tau_p gamma) must be positive".into(),
            ));
        }
        let tau_p = 1.0 / (inv_tau_gamma * gamma_sp);
        let delta = 2.0 * C_LIGHT / (omega * divergence);
        Self::build(omega, gamma_sp, tau_p, delta, divergence)
    }

    fn build(omega: f64, gamma_sp: f64, tau_p: f64, delta: f64, divergence: f64) -> Result<Self> {
        for (name, v) in [
            ("omega", omega),
            ("gamma_sp", gamma_sp),
            ("tau_p", tau_p),
            ("delta", delta),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(divergence > 0.0 && divergence <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "beam divergence must lie in (0, 1], got {divergence}"
            )));
        }
        Ok(CostParams {
            omega,
            gamma_sp,
            tau_p,
            delta,
            divergence,
            tau_gamma_product: 1.0 / (tau_p * gamma_sp),
        })
    }
}

/// Squared dipole matrix element from the spontaneous-emission relation
/// (Weisskopf–Wigner): `d^2 = 3 pi epsilon_0 hbar c^3 gamma / omega^3`.
pub fn dipole_moment_sq(omega: f64, gamma_sp: f64) -> f64 {
    3.0 * std::f64::consts::PI * EPSILON_0 * HBAR * C_LIGHT.powi(3) * gamma_sp / omega.powi(3)
}

/// Square-pulse amplitude for a pi/2 pulse area: `E_p = hbar pi / (2 d tau_p)`.
pub fn pulse_amplitude(params: &CostParams) -> f64 {
    let d = dipole_moment_sq(params.omega, params.gamma_sp).sqrt();
    HBAR * std::f64::consts::PI / (2.0 * d * params.tau_p)
}

/// Pulse intensity `I_p = c epsilon_0 E_p^2 / 2`, which reduces to
/// `pi hbar omega^3 / (24 c^2 tau_p^2 gamma)`.
pub fn pulse_intensity(params: &CostParams) -> f64 {
    let e_p = pulse_amplitude(params);
    C_LIGHT * EPSILON_0 * e_p * e_p / 2.0
}

/// Pulse energy in units of `hbar omega`:
/// `(pi^2 / 24) (1 / tau_p gamma) (1 / zeta^2)`.
pub fn pulse_energy(params: &CostParams) -> f64 {
    std::f64::consts::PI.powi(2) / 24.0 * params.tau_gamma_product
        / (params.divergence * params.divergence)
}

/// Pulse energy in joules, `I_p * pi (delta/2)^2 * tau_p`.
pub fn pulse_energy_joules(params: &CostParams) -> f64 {
    pulse_intensity(params) * std::f64::consts::PI * (params.delta / 2.0).powi(2) * params.tau_p
}

/// Coherence-generation cost versus engine work output.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CostReport {
    pub atoms: usize,
    pub clusters: usize,
    /// Per-atom pulse energy in units of `hbar omega`.
    pub pulse_energy_hbar_omega: f64,
    /// Per-atom pulse energy in joules; absent for reports built directly
    /// from a pulse energy in `hbar omega` units.
    pub pulse_energy_joules: Option<f64>,
    /// `N * U_p`.
    pub per_cluster_hbar_omega: f64,
    /// `m * N * U_p`.
    pub total_hbar_omega: f64,
    /// Engine work output in units of `omega` (same normalized units).
    pub work_output_omega: f64,
    /// `total / work_output`; absent when no positive work was supplied.
    pub ratio: Option<f64>,
}

/// Assemble a report from an explicit per-atom pulse energy.
pub fn cost_report_from_pulse_energy(
    pulse_energy_hbar_omega: f64,
    pulse_energy_joules: Option<f64>,
    atoms: usize,
    clusters: usize,
    work_output_omega: f64,
) -> Result<CostReport> {
    if atoms < 1 {
        return Err(Error::InvalidArgument(
            "cluster must contain at least one atom".into(),
        ));
    }
    let per_cluster = atoms as f64 * pulse_energy_hbar_omega;
    let total = clusters as f64 * per_cluster;
    let ratio = if work_output_omega > 0.0 {
        Some(total / work_output_omega)
    } else {
        None
    };
    Ok(CostReport {
        atoms,
        clusters,
        pulse_energy_hbar_omega,
        pulse_energy_joules,
        per_cluster_hbar_omega: per_cluster,
        total_hbar_omega: total,
        work_output_omega,
        ratio,
    })
}

/// Full report from pulse/beam parameters: per-atom, per-cluster, and total
/// cost for `clusters` injections, compared against `work_output` (in units
/// of `omega`).
pub fn total_cost_report(
    params: &CostParams,
    atoms: usize,
    clusters: usize,
    work_output_omega: f64,
) -> Result<CostReport> {
    cost_report_from_pulse_energy(
        pulse_energy(params),
        Some(pulse_energy_joules(params)),
        atoms,
        clusters,
        work_output_omega,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn photon_energy(omega: f64) -> f64 {
        HBAR * omega
    }

    #[test]
    fn dipole_moment_linear_in_gamma() {
        let omega = 2.0 * PI * 5e9;
        assert_relative_eq!(
            dipole_moment_sq(omega, 2e4),
            2.0 * dipole_moment_sq(omega, 1e4),
            epsilon = 1e-12
        );
    }

    #[test]
    fn intensity_chain_matches_closed_form() {
        // substituting d into E_p and I_p must reproduce
        // I_p = pi hbar omega^3 / (24 c^2 tau_p^2 gamma)
        let params = CostParams::from_si(2.0 * PI * 5e9, 1e4, 1e-7, 0.1).unwrap();
        let closed = PI * HBAR * params.omega.powi(3)
            / (24.0 * C_LIGHT * C_LIGHT * params.tau_p * params.tau_p * params.gamma_sp);
        assert_relative_eq!(pulse_intensity(&params), closed, epsilon = 1e-12);
    }

    #[test]
    fn intensity_scales_as_omega_cubed() {
        let p1 = CostParams::from_si(1e10, 1e4, 1e-7, 0.1).unwrap();
        let p2 = CostParams::from_si(2e10, 1e4, 1e-7, 0.1).unwrap();
        assert_relative_eq!(
            pulse_intensity(&p2) / pulse_intensity(&p1),
            8.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn reduced_pulse_energy_reference_point() {
        // 1/(tau gamma) = 2, zeta = 0.5 -> U_p = pi^2/3 ~ 3.29 hbar omega
        let params = CostParams::from_reduced(2.0 * PI * 5e9, 1e4, 2.0, 0.5).unwrap();
        assert_relative_eq!(pulse_energy(&params), PI * PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pulse_energy(&params), 3.29, epsilon = 0.01);
    }

    #[test]
    fn si_and_reduced_energy_paths_agree() {
        let params = CostParams::from_reduced(2.0 * PI * 5e9, 1e4, 2.0, 0.5).unwrap();
        let joules = pulse_energy_joules(&params);
        assert_relative_eq!(
            joules / photon_energy(params.omega),
            pulse_energy(&params),
            epsilon = 1e-10
        );
    }

    #[test]
    fn pulse_energy_homogeneity() {
        let base = CostParams::from_reduced(1e10, 1e4, 2.0, 0.5).unwrap();
        // degree -1 in tau_p * gamma
        let double_product = CostParams::from_reduced(1e10, 1e4, 4.0, 0.5).unwrap();
        assert_relative_eq!(
            pulse_energy(&double_product),
            2.0 * pulse_energy(&base),
            epsilon = 1e-12
        );
        // degree -2 in divergence: halving zeta quadruples U_p
        let half_div = CostParams::from_reduced(1e10, 1e4, 2.0, 0.25).unwrap();
        assert_relative_eq!(
            pulse_energy(&half_div),
            4.0 * pulse_energy(&base),
            epsilon = 1e-12
        );
    }

    #[test]
    fn vanishing_drive_limit() {
        // 1/(tau_p gamma) -> 0 sends the pulse energy to zero
        let params = CostParams::from_reduced(1e10, 1e4, 1e-12, 0.5).unwrap();
        assert!(pulse_energy(&params) < 1e-11);
    }

    #[test]
    fn total_cost_reference_numbers() {
        // U_p = 3 hbar omega, N = 2, m = 250 -> total = 1500 exactly
        let report = cost_report_from_pulse_energy(3.0, None, 2, 250, 0.35).unwrap();
        assert_eq!(report.total_hbar_omega, 1500.0);
        assert_eq!(report.per_cluster_hbar_omega, 6.0);
        let ratio = report.ratio.unwrap();
        assert_abs_diff_eq!(ratio, 4285.7, epsilon = 0.1);
        assert!(ratio > 1e3);
    }

    #[test]
    fn zero_clusters_is_vacuous() {
        let report = cost_report_from_pulse_energy(3.0, None, 2, 0, 0.35).unwrap();
        assert_eq!(report.total_hbar_omega, 0.0);
    }

    #[test]
    fn no_work_means_no_ratio() {
        let report = cost_report_from_pulse_energy(3.0, None, 2, 250, 0.0).unwrap();
        assert!(report.ratio.is_none());
    }

    #[test]
    fn total_is_exact_product() {
        let params = CostParams::from_reduced(1e10, 1e4, 2.0, 0.5).unwrap();
        let report = total_cost_report(&params, 3, 117, 1.0).unwrap();
        assert_eq!(
            report.total_hbar_omega,
            117.0 * report.per_cluster_hbar_omega
        );
        assert_eq!(
            report.per_cluster_hbar_omega,
            3.0 * report.pulse_energy_hbar_omega
        );
    }
}
