//! Declarative run configuration: a TOML file with sections mirroring the
//! core type structure, plus command-line overrides. Defaults reproduce the
//! reference parameter set (g = 0.19, kappa = 0.03, T_h = 0.001, T_c = 0.5,
//! t_int = 1, period = 6, N = 2, n_max = 40).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use sr_otto::hilbert::RotationParams;
use sr_otto::lindblad::{
    DissipatorChannel, HamiltonianKind, IntegratorConfig, SystemModel,
};
use sr_otto::protocol::{AtomRepresentation, ProtocolConfig};
use sr_otto::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Worker threads for parameter sweeps; 0 means all available cores.
    pub jobs: usize,
    pub physics: PhysicsSection,
    pub protocol: ProtocolSection,
    pub otto: OttoSection,
    pub sweep: SweepSection,
    pub cost: CostSection,
    pub integrator: IntegratorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("runs"),
            jobs: 0,
            physics: PhysicsSection::default(),
            protocol: ProtocolSection::default(),
            otto: OttoSection::default(),
            sweep: SweepSection::default(),
            cost: CostSection::default(),
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega_f: f64,
    pub omega_a: f64,
    pub g: f64,
    pub kappa: f64,
    pub hamiltonian: HamiltonianKind,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let m = SystemModel::default();
        PhysicsSection {
            omega_f: m.omega_f,
            omega_a: m.omega_a,
            g: m.g,
            kappa: m.kappa,
            hamiltonian: m.hamiltonian_kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    /// Cluster sizes to run (one output file per entry).
    pub atoms: Vec<usize>,
    pub num_injections: usize,
    pub t_int: f64,
    pub period: f64,
    pub t_h: f64,
    pub t_c: f64,
    pub burn_in: f64,
    pub n_max: usize,
    pub samples_per_cycle: usize,
    pub representation: AtomRepresentation,
    pub phi: f64,
    pub varphi: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        ProtocolSection {
            atoms: vec![p.atoms],
            num_injections: p.num_injections,
            t_int: p.t_int,
            period: p.period,
            t_h: p.t_h,
            t_c: p.t_c,
            burn_in: p.burn_in_fraction,
            n_max: p.n_max,
            samples_per_cycle: p.samples_per_cycle,
            representation: p.representation,
            phi: p.rotation.phi,
            varphi: p.rotation.varphi,
        }
    }
}

/// Either an explicit list or a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidArgument("empty grid".into()));
                }
                Ok(v.clone())
            }
            GridSpec::Linspace { start, stop, count } => {
                if *count < 2 {
                    return Err(Error::InvalidArgument(
                        "grid needs at least 2 points".into(),
                    ));
                }
                let step = (stop - start) / (*count as f64 - 1.0);
                Ok((0..*count).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OttoSection {
    pub omega_l: GridSpec,
    /// Fock levels in the cycle sums; 0 picks enough levels for a
    /// negligible spectral tail (and at least the ignition n_max).
    pub n_levels: usize,
}

impl Default for OttoSection {
    fn default() -> Self {
        OttoSection {
            omega_l: GridSpec::Linspace {
                start: 0.01,
                stop: 0.99,
                count: 50,
            },
            n_levels: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Cluster sizes for `scaling` and `otto`.
    pub atoms: Vec<usize>,
    /// Decoherence rates; empty means `{kappa, 3 kappa, 6 kappa}`.
    pub gamma: Vec<f64>,
    pub channels: Vec<DissipatorChannel>,
    /// Coupling grid for the `xi` study inside `scaling` reports.
    pub g: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            atoms: vec![2, 3, 4, 5, 6],
            gamma: Vec::new(),
            channels: vec![
                DissipatorChannel::CollectiveLowering,
                DissipatorChannel::CollectiveDephasing,
            ],
            g: vec![0.10, 0.15, 0.22, 0.30],
            kappa: vec![0.01, 0.02, 0.045, 0.10],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    /// Transition angular frequency for the joules conversion (rad/s).
    pub omega_si: f64,
    /// Spontaneous emission rate (1/s).
    pub gamma_sp: f64,
    /// `1 / (tau_p gamma)` of the reduced pulse-energy estimate.
    pub inv_tau_gamma: f64,
    /// Radial beam divergence.
    pub divergence: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        CostSection {
            omega_si: 2.0 * std::f64::consts::PI * 5e9,
            gamma_sp: 1e4,
            inv_tau_gamma: 2.0,
            divergence: 0.5,
        }
    }
}

impl RunConfig {
    pub fn system_model(&self) -> SystemModel {
        SystemModel {
            omega_f: self.physics.omega_f,
            omega_a: self.physics.omega_a,
            g: self.physics.g,
            kappa: self.physics.kappa,
            hamiltonian_kind: self.physics.hamiltonian,
            atomic_dissipators: Vec::new(),
        }
    }

    pub fn protocol_config(&self, atoms: usize) -> ProtocolConfig {
        ProtocolConfig {
            atoms,
            num_injections: self.protocol.num_injections,
            t_int: self.protocol.t_int,
            period: self.protocol.period,
            t_h: self.protocol.t_h,
            t_c: self.protocol.t_c,
            rotation: RotationParams::new(self.protocol.phi, self.protocol.varphi),
            model: self.system_model(),
            burn_in_fraction: self.protocol.burn_in,
            n_max: self.protocol.n_max,
            representation: self.protocol.representation,
            samples_per_cycle: self.protocol.samples_per_cycle,
            integrator: self.integrator,
        }
    }

    pub fn gamma_grid(&self) -> Vec<f64> {
        if self.sweep.gamma.is_empty() {
            vec![self.physics.kappa, 3.0 * self.physics.kappa, 6.0 * self.physics.kappa]
        } else {
            self.sweep.gamma.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocol.atoms.is_empty() {
            return Err(Error::InvalidArgument(
                "protocol.atoms must list at least one cluster size".into(),
            ));
        }
        for &n in self.protocol.atoms.iter().chain(&self.sweep.atoms) {
            self.protocol_config(n).validate()?;
        }
        self.otto.omega_l.values().and_then(|grid| {
            for &w in &grid {
                if !(w > 0.0 && w < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "omega_L grid value {w} outside (0, 1)"
                    )));
                }
            }
            Ok(())
        })?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("config parse error: {e}")))
    }
}

/// Parse a grid flag: either `start:stop:count` or a comma-separated list.
pub fn parse_grid_flag(text: &str) -> Result<GridSpec> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "grid must be start:stop:count, got {text}"
            )));
        }
        let start: f64 = parts[0]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid start {}", parts[0])))?;
        let stop: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid stop {}", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad grid count {}", parts[2])))?;
        Ok(GridSpec::Linspace { start, stop, count })
    } else {
        let values: std::result::Result<Vec<f64>, _> =
            text.split(',').map(|s| s.trim().parse::<f64>()).collect();
        Ok(GridSpec::List(values.map_err(|_| {
            Error::InvalidArgument(format!("bad grid list {text}"))
        })?))
    }
}

/// Parse a comma-separated list of cluster sizes.
pub fn parse_atoms_flag(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad atom count {s}")))
        })
        .collect()
}
