//! The ignition stroke: repeated coherent-cluster injections.
//!
//! Each cycle of length `period = 1/r` tensors a freshly prepared cluster
//! with the current field state, evolves the joint system for `t_int` under
//! the full master equation, traces out the atoms, and lets the field evolve
//! freely for the remainder of the period. The cluster state is identical at
//! every injection; the field walks toward its superradiant steady state.
//!
//! A single run is strictly sequential (cycle `k+1` depends on `k`). Sweeps
//! over `N`, `gamma`, `g`, or `kappa` are independent runs dispatched on a
//! rayon pool.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    collective_ops_for, make_boson_ops, partial_trace, rotate_cluster, tensor_density,
    thermal_state, DensityMatrix, HilbertSpace, OperatorMatrix, RotationParams, ThermalParams,
};
use crate::linalg::c;
use crate::lindblad::{
    build_hamiltonian, evolve_free_field_observed, evolve_observed, DissipatorChannel,
    DissipatorSpec, IntegratorConfig, SystemModel,
};
use crate::otto::bose_occupation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomRepresentation {
    /// Symmetric `j = N/2` space, dimension `N + 1`; the main pipeline.
    Collective,
    /// Full `2^N` space; needed for individual dissipator channels and
    /// finite-`T_h` validation, capped at small `N`.
    Product,
}

/// Injection schedule, preparation temperatures, and numerical knobs for one
/// ignition run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Atoms per cluster.
    pub atoms: usize,
    pub num_injections: usize,
    /// Interaction time per injection (units of `1/omega_H`).
    pub t_int: f64,
    /// Injection period `1/r` (units of `1/omega_H`).
    pub period: f64,
    /// Cluster preparation temperature.
    pub t_h: f64,
    /// Initial cavity temperature.
    pub t_c: f64,
    pub rotation: RotationParams,
    pub model: SystemModel,
    /// Fraction of the run excluded from steady-state averaging.
    pub burn_in_fraction: f64,
    /// Fock truncation of the cavity mode.
    pub n_max: usize,
    pub representation: AtomRepresentation,
    pub samples_per_cycle: usize,
    pub integrator: IntegratorConfig,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            atoms: 2,
            num_injections: 250,
            t_int: 1.0,
            period: 6.0,
            t_h: 0.001,
            t_c: 0.5,
            rotation: RotationParams::default(),
            model: SystemModel::default(),
            burn_in_fraction: 0.4,
            n_max: 40,
            representation: AtomRepresentation::Collective,
            samples_per_cycle: 10,
            integrator: IntegratorConfig::default(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.atoms < 1 {
            return Err(Error::InvalidArgument("need at least one atom".into()));
        }
        if !(self.t_int > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_int must be positive, got {}",
                self.t_int
            )));
        }
        if !(self.period >= self.t_int) {
            return Err(Error::InvalidArgument(format!(
                "period {} must be at least t_int {} (injection rate r < 1/t_int)",
                self.period, self.t_int
            )));
        }
        if self.num_injections < 1 {
            return Err(Error::InvalidArgument(
                "num_injections must be at least 1".into(),
            ));
        }
        if !(self.burn_in_fraction >= 0.0 && self.burn_in_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.samples_per_cycle < 1 {
            return Err(Error::InvalidArgument(
                "samples_per_cycle must be at least 1".into(),
            ));
        }
        if !(self.t_h > 0.0) || !(self.t_c > 0.0) {
            return Err(Error::InvalidArgument(
                "preparation temperatures must be positive".into(),
            ));
        }
        self.model.validate()?;
        self.integrator.validate()?;
        let needs_product = self
            .model
            .atomic_dissipators
            .iter()
            .any(|d| d.channel.is_individual() && d.gamma != 0.0);
        if needs_product && self.representation != AtomRepresentation::Product {
            return Err(Error::RepresentationMismatch {
                expected: "ProductSpin (individual dissipator channels)".into(),
                found: "CollectiveSpin".into(),
            });
        }
        self.atom_space()?;
        Ok(())
    }

    pub fn atom_space(&self) -> Result<HilbertSpace> {
        match self.representation {
            AtomRepresentation::Collective => HilbertSpace::collective_spin(self.atoms),
            AtomRepresentation::Product => HilbertSpace::product_spin(self.atoms),
        }
    }

    /// Steady-state occupation predicted by the quadratic scaling law; used
    /// for the truncation adequacy check.
    pub fn predicted_steady_mean_n(&self) -> f64 {
        bose_occupation(self.t_c, self.model.omega_f) + 0.095 * (self.atoms as f64).powi(2)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Sample {
    pub t: f64,
    pub mean_n: f64,
    pub t_eff: f64,
}

/// Sampled trajectory of one ignition run.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
    /// `(cycle index, end-of-cycle mean photon number)`.
    pub per_cycle: Vec<(usize, f64)>,
    pub final_field_state: DensityMatrix,
    /// Set when the top two Fock levels ever exceed 1e-7 population (or the
    /// predicted steady occupation crowds the truncation).
    pub truncation_flag: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SteadyStateStats {
    pub mean_n_ss: f64,
    pub t_eff_ss: f64,
    /// Fluctuation (population standard deviation) of the sampled mean
    /// photon number over the averaging window.
    pub std_n: f64,
    pub cycles_used: usize,
}

fn guarded_t_eff(mean_n: f64, omega: f64) -> f64 {
    if mean_n > 0.0 {
        omega / (1.0 + 1.0 / mean_n).ln()
    } else {
        0.0
    }
}

/// Thermal cluster at `T_h`, rotated onto the Bloch equator. Identical at
/// the beginning of every interaction.
pub fn prepare_cluster(config: &ProtocolConfig) -> Result<DensityMatrix> {
    let space = config.atom_space()?;
    // Gibbs state of omega_a S_z; in the product representation this is
    // exactly the tensor power of single-atom thermal states.
    let (_, _, s_z) = collective_ops_for(&space)?;
    let h = OperatorMatrix::new(space.clone(), s_z.entries() * c(config.model.omega_a))?;
    let thermal = thermal_state(
        &space,
        &ThermalParams::new(config.t_h, config.model.omega_a)?,
        &h,
    )?;
    rotate_cluster(&thermal, &config.rotation)
}

/// Sample offsets within one cycle, split into the interaction window and
/// the free-evolution window (local times).
fn cycle_sample_offsets(config: &ProtocolConfig) -> (Vec<f64>, Vec<f64>) {
    let delta = config.period / config.samples_per_cycle as f64;
    let free_duration = config.period - config.t_int;
    let mut interaction = Vec::new();
    let mut free = Vec::new();
    for j in 1..=config.samples_per_cycle {
        let offset = j as f64 * delta;
        if offset <= config.t_int {
            interaction.push(offset.min(config.t_int));
        } else {
            free.push((offset - config.t_int).min(free_duration));
        }
    }
    // the cycle boundary is always sampled
    if free.is_empty() {
        if interaction.last() != Some(&config.t_int) {
            interaction.push(config.t_int);
        }
    } else if let Some(last) = free.last_mut() {
        *last = free_duration;
    }
    (interaction, free)
}

/// Drive the ignition stroke and record the field trajectory.
pub fn run_ignition(config: &ProtocolConfig) -> Result<TimeSeries> {
    config.validate()?;
    let atom_space = config.atom_space()?;
    let field_space = HilbertSpace::fock(config.n_max);
    let system_space =
        HilbertSpace::composite(vec![atom_space.clone(), field_space.clone()])?;
    let hamiltonian = build_hamiltonian(&config.model, &system_space)?;
    let cluster = prepare_cluster(config)?;

    let boson = make_boson_ops(&field_space)?;
    let field_h = OperatorMatrix::new(
        field_space.clone(),
        boson.number.entries() * c(config.model.omega_f),
    )?;
    let mut rho_f = thermal_state(
        &field_space,
        &ThermalParams::new(config.t_c, config.model.omega_f)?,
        &field_h,
    )?;

    let field_dim = config.n_max + 1;
    let mean_n_field = |rho: &DensityMatrix| -> f64 {
        (0..field_dim)
            .map(|n| n as f64 * rho.entries()[(n, n)].re)
            .sum()
    };
    let mean_n_joint = |rho: &DensityMatrix| -> f64 {
        (0..system_space.dim())
            .map(|i| (i % field_dim) as f64 * rho.entries()[(i, i)].re)
            .sum()
    };

    let omega = config.model.omega_f;
    let mut samples = Vec::with_capacity(1 + config.samples_per_cycle * config.num_injections);
    let n0 = mean_n_field(&rho_f);
    samples.push(Sample {
        t: 0.0,
        mean_n: n0,
        t_eff: guarded_t_eff(n0, omega),
    });

    let mut truncation_flag = config.predicted_steady_mean_n() > config.n_max as f64 / 3.0;
    let (interaction_stops, free_stops) = cycle_sample_offsets(config);
    let free_duration = config.period - config.t_int;
    let mut per_cycle = Vec::with_capacity(config.num_injections);

    for cycle in 0..config.num_injections {
        let cycle_start = cycle as f64 * config.period;
        let joint = tensor_density(&cluster, &rho_f);
        let joint = evolve_observed(
            &config.model,
            &hamiltonian,
            &joint,
            config.t_int,
            &config.integrator,
            &interaction_stops,
            |t_local, rho| {
                let n = mean_n_joint(rho);
                samples.push(Sample {
                    t: cycle_start + t_local,
                    mean_n: n,
                    t_eff: guarded_t_eff(n, omega),
                });
            },
        )
        .map_err(|e| e.at_cycle(cycle))?;

        rho_f = partial_trace(&joint, 1).map_err(|e| e.at_cycle(cycle))?;
        rho_f.validate().map_err(|e| e.at_cycle(cycle))?;

        if free_duration > 0.0 {
            rho_f = evolve_free_field_observed(
                &config.model,
                &rho_f,
                free_duration,
                &config.integrator,
                &free_stops,
                |t_local, rho| {
                    let n = mean_n_field(rho);
                    samples.push(Sample {
                        t: cycle_start + config.t_int + t_local,
                        mean_n: n,
                        t_eff: guarded_t_eff(n, omega),
                    });
                },
            )
            .map_err(|e| e.at_cycle(cycle))?;
        }

        per_cycle.push((cycle, mean_n_field(&rho_f)));
        let top_population = rho_f.entries()[(config.n_max, config.n_max)].re
            + rho_f.entries()[(config.n_max - 1, config.n_max - 1)].re;
        if top_population > 1e-7 {
            truncation_flag = true;
        }
    }

    Ok(TimeSeries {
        samples,
        per_cycle,
        final_field_state: rho_f,
        truncation_flag,
    })
}

/// Time averages over the post-burn-in window.
pub fn steady_state_stats(
    series: &TimeSeries,
    config: &ProtocolConfig,
) -> Result<SteadyStateStats> {
    if config.num_injections < 50 {
        return Err(Error::InsufficientData(format!(
            "steady-state statistics need at least 50 injections, got {}",
            config.num_injections
        )));
    }
    let total = config.num_injections as f64 * config.period;
    let cutoff = config.burn_in_fraction * total;
    let window: Vec<&Sample> = series
        .samples
        .iter()
        .filter(|s| s.t >= cutoff - 1e-12)
        .collect();
    let cycles_used = series
        .per_cycle
        .iter()
        .filter(|(k, _)| (*k as f64 + 1.0) * config.period >= cutoff - 1e-12)
        .count();
    if cycles_used < 10 || window.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "only {cycles_used} cycles after burn-in; need at least 10"
        )));
    }
    let m = window.len() as f64;
    let mean_n_ss = window.iter().map(|s| s.mean_n).sum::<f64>() / m;
    let t_eff_ss = window.iter().map(|s| s.t_eff).sum::<f64>() / m;
    let var = window
        .iter()
        .map(|s| (s.mean_n - mean_n_ss).powi(2))
        .sum::<f64>()
        / m;
    Ok(SteadyStateStats {
        mean_n_ss,
        t_eff_ss,
        std_n: var.sqrt(),
        cycles_used,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecoherencePoint {
    pub gamma: f64,
    pub channel: DissipatorChannel,
    pub stats: SteadyStateStats,
}

/// Rerun the ignition for every `(channel, gamma)` combination; individual
/// channels force the product representation. Runs are independent and
/// dispatched in parallel; the output order matches the input grids.
pub fn decoherence_sweep(
    config: &ProtocolConfig,
    gammas: &[f64],
    channels: &[DissipatorChannel],
) -> Result<Vec<DecoherencePoint>> {
    let jobs: Vec<(DissipatorChannel, f64)> = channels
        .iter()
        .flat_map(|&ch| gammas.iter().map(move |&g| (ch, g)))
        .collect();
    jobs.par_iter()
        .map(|&(channel, gamma)| {
            let mut cfg = config.clone();
            cfg.model.atomic_dissipators = vec![DissipatorSpec { channel, gamma }];
            if channel.is_individual() && gamma != 0.0 {
                cfg.representation = AtomRepresentation::Product;
            }
            let series = run_ignition(&cfg)?;
            let stats = steady_state_stats(&series, &cfg)?;
            Ok(DecoherencePoint {
                gamma,
                channel,
                stats,
            })
        })
        .collect()
}

/// Canonical per-run CSV name: `ignition_N{N}_g{g}_k{kappa}_gam{gamma}.csv`.
pub fn ignition_file_name(config: &ProtocolConfig) -> String {
    let gamma = config
        .model
        .atomic_dissipators
        .first()
        .map(|d| d.gamma)
        .unwrap_or(0.0);
    format!(
        "ignition_N{}_g{}_k{}_gam{}.csv",
        config.atoms, config.model.g, config.model.kappa, gamma
    )
}

/// Write the sampled trajectory as CSV (columns `t,mean_n,T_eff`, 12
/// significant digits).
pub fn write_time_series_csv(series: &TimeSeries, path: &std::path::Path) -> std::io::Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,mean_n,T_eff")?;
    for s in &series.samples {
        writeln!(out, "{:.11e},{:.11e},{:.11e}", s.t, s.mean_n, s.t_eff)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::make_collective_spin_ops;
    use crate::linalg;
    use approx::assert_abs_diff_eq;

    fn small_config() -> ProtocolConfig {
        ProtocolConfig {
            atoms: 2,
            num_injections: 8,
            n_max: 15,
            ..ProtocolConfig::default()
        }
    }

    #[test]
    fn defaults_match_reference_parameters() {
        let config = ProtocolConfig::default();
        assert_eq!(config.atoms, 2);
        assert_abs_diff_eq!(config.model.g, 0.19);
        assert_abs_diff_eq!(config.model.kappa, 0.03);
        assert_abs_diff_eq!(config.t_h, 0.001);
        assert_abs_diff_eq!(config.t_c, 0.5);
        assert_abs_diff_eq!(config.t_int, 1.0);
        assert_abs_diff_eq!(config.period, 6.0);
        assert_eq!(config.n_max, 40);
    }

    #[test]
    fn cluster_is_rotated_ground_state_at_low_temperature() {
        let config = small_config();
        let cluster = prepare_cluster(&config).unwrap();
        // reference: rotate the exact ground Dicke state
        let space = config.atom_space().unwrap();
        let mut ground = crate::linalg::CMatrix::zeros(3, 3);
        ground[(0, 0)] = c(1.0);
        let ground = DensityMatrix::new(space, ground).unwrap();
        let reference = rotate_cluster(&ground, &config.rotation).unwrap();
        assert!(
            linalg::max_abs(&(cluster.entries() - reference.entries())) < 1e-10,
            "low-temperature cluster must be the rotated pure Dicke ground state"
        );
    }

    #[test]
    fn cluster_without_rotation_is_thermal() {
        let mut config = small_config();
        config.rotation = RotationParams::new(0.0, 0.0);
        config.t_h = 0.7;
        let cluster = prepare_cluster(&config).unwrap();
        let space = config.atom_space().unwrap();
        let (_, _, s_z) = collective_ops_for(&space).unwrap();
        let h = OperatorMatrix::new(space.clone(), s_z.entries().clone()).unwrap();
        let thermal =
            thermal_state(&space, &ThermalParams::new(0.7, 1.0).unwrap(), &h).unwrap();
        assert!(linalg::max_abs(&(cluster.entries() - thermal.entries())) < 1e-12);
    }

    #[test]
    fn cluster_equator_expectations() {
        // N = 2, phi = -pi/2: <S_z> = 0 and <S+ S-> = 3/2
        let config = small_config();
        let cluster = prepare_cluster(&config).unwrap();
        let space = config.atom_space().unwrap();
        let ops = make_collective_spin_ops(&space).unwrap();
        assert_abs_diff_eq!(cluster.expectation(&ops.z).re, 0.0, epsilon = 1e-10);
        let splus_sminus = OperatorMatrix::new(
            space.clone(),
            ops.raise.entries() * ops.lower.entries(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            cluster.expectation(&splus_sminus).re,
            1.5,
            epsilon = 1e-10
        );
    }

    #[test]
    fn uncoupled_run_decays_monotonically() {
        let mut config = small_config();
        config.model.g = 0.0;
        let series = run_ignition(&config).unwrap();
        let n0 = series.samples[0].mean_n;
        assert_abs_diff_eq!(n0, bose_occupation(0.5, 1.0), epsilon = 1e-8);
        for pair in series.samples.windows(2) {
            assert!(pair[1].mean_n <= pair[0].mean_n + 1e-12);
        }
    }

    #[test]
    fn trajectory_grid_is_regular() {
        let config = small_config();
        let series = run_ignition(&config).unwrap();
        assert_eq!(
            series.samples.len(),
            1 + config.samples_per_cycle * config.num_injections
        );
        for pair in series.samples.windows(2) {
            assert!(pair[1].t > pair[0].t);
            assert!(pair[1].mean_n >= 0.0);
        }
        assert_eq!(series.per_cycle.len(), config.num_injections);
        assert!(!series.truncation_flag);
    }

    #[test]
    fn pumping_raises_mean_photon_number() {
        let config = small_config();
        let series = run_ignition(&config).unwrap();
        let last = series.per_cycle.last().unwrap().1;
        assert!(
            last > 1.2 * series.samples[0].mean_n,
            "8 injections should visibly pump the cavity (got {last})"
        );
    }

    #[test]
    fn steady_stats_on_synthetic_series() {
        let config = ProtocolConfig {
            num_injections: 100,
            ..small_config()
        };
        let field_space = HilbertSpace::fock(3);
        let mut vacuum = crate::linalg::CMatrix::zeros(4, 4);
        vacuum[(0, 0)] = c(1.0);
        let state = DensityMatrix::new(field_space, vacuum).unwrap();
        let samples: Vec<Sample> = (0..=1000)
            .map(|k| Sample {
                t: k as f64 * (config.period / 10.0),
                mean_n: 0.75,
                t_eff: 1.25,
            })
            .collect();
        let per_cycle = (0..100).map(|k| (k, 0.75)).collect();
        let series = TimeSeries {
            samples,
            per_cycle,
            final_field_state: state,
            truncation_flag: false,
        };
        let stats = steady_state_stats(&series, &config).unwrap();
        assert_abs_diff_eq!(stats.mean_n_ss, 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(stats.t_eff_ss, 1.25, epsilon = 1e-14);
        assert_abs_diff_eq!(stats.std_n, 0.0, epsilon = 1e-14);
        // cutoff at t = 240; cycles 39..=99 end at or after it
        assert_eq!(stats.cycles_used, 61);
    }

    #[test]
    fn too_few_injections_is_an_error() {
        let config = small_config(); // 8 injections
        let series = run_ignition(&config).unwrap();
        assert!(matches!(
            steady_state_stats(&series, &config),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_gamma_reproduces_baseline_exactly() {
        // a zero-rate channel must leave the arithmetic untouched
        let config = small_config();
        let baseline = run_ignition(&config).unwrap();
        let mut cfg = config.clone();
        cfg.model.atomic_dissipators = vec![DissipatorSpec {
            channel: DissipatorChannel::CollectiveLowering,
            gamma: 0.0,
        }];
        let with_zero_rate = run_ignition(&cfg).unwrap();
        for (a, b) in baseline.samples.iter().zip(&with_zero_rate.samples) {
            assert_eq!(a.mean_n.to_bits(), b.mean_n.to_bits());
        }
    }

    #[test]
    fn config_validation_errors() {
        let mut bad = ProtocolConfig::default();
        bad.num_injections = 0;
        assert!(bad.validate().is_err());

        let mut bad = ProtocolConfig::default();
        bad.period = 0.5; // < t_int
        assert!(bad.validate().is_err());

        let mut bad = ProtocolConfig::default();
        bad.burn_in_fraction = 1.0;
        assert!(bad.validate().is_err());

        let mut bad = ProtocolConfig::default();
        bad.model.atomic_dissipators = vec![DissipatorSpec {
            channel: DissipatorChannel::IndividualLowering,
            gamma: 0.1,
        }];
        assert!(matches!(
            bad.validate(),
            Err(Error::RepresentationMismatch { .. })
        ));

        let mut bad = ProtocolConfig::default();
        bad.representation = AtomRepresentation::Product;
        bad.atoms = 6; // above the 2^N cap
        assert!(matches!(bad.validate(), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn file_name_scheme() {
        let config = ProtocolConfig::default();
        assert_eq!(
            ignition_file_name(&config),
            "ignition_N2_g0.19_k0.03_gam0.csv"
        );
    }
}
