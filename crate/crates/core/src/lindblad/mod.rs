//! Hamiltonians, dissipators, and the master-equation integrator.
//!
//! The system Hamiltonian couples an `N`-atom cluster to one cavity mode,
//!
//! ```text
//! H_TC    = omega_f a†a + omega_a S_z + g (a S+ + a† S-)
//! H_Dicke = omega_f a†a + omega_a S_z + g (a + a†)(S+ + S-)
//! ```
//!
//! and the state evolves under
//!
//! ```text
//! drho/dt = -i [H, rho] + (kappa/2)(2 a rho a† - a†a rho - rho a†a)
//!           + sum_channels (gamma/2)(2 x rho x† - x†x rho - rho x†x)
//! ```
//!
//! Integration uses an adaptive embedded Runge–Kutta 4(5) pair on the matrix
//! ODE with PI step control. On guard steps the state is re-Hermitized, its
//! trace renormalized, and positivity asserted to the module floor; the
//! integrator's own error estimate governs accuracy between guards.

mod dia;
mod dopri5;
mod generator;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    collective_ops_for, make_boson_ops, make_product_spin_ops, DensityMatrix, HilbertSpace,
    OperatorMatrix, SpaceKind, POSITIVITY_FLOOR,
};
use crate::linalg::{self, c, CMatrix};

use dopri5::StepperOptions;
use generator::PreparedGenerator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    TavisCummings,
    Dicke,
}

/// Atomic decoherence channels of the general Lindblad form; collective
/// channels act through `S-`/`S_z`, individual ones through per-atom Pauli
/// operators and require the product representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissipatorChannel {
    CollectiveLowering,
    CollectiveDephasing,
    IndividualLowering,
    IndividualDephasing,
}

impl DissipatorChannel {
    pub fn is_individual(&self) -> bool {
        matches!(
            self,
            DissipatorChannel::IndividualLowering | DissipatorChannel::IndividualDephasing
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            DissipatorChannel::CollectiveLowering => "collective-lowering",
            DissipatorChannel::CollectiveDephasing => "collective-dephasing",
            DissipatorChannel::IndividualLowering => "individual-lowering",
            DissipatorChannel::IndividualDephasing => "individual-dephasing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipatorSpec {
    pub channel: DissipatorChannel,
    pub gamma: f64,
}

/// Physical parameters of the atom–cavity model, in units of `omega_H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub omega_f: f64,
    pub omega_a: f64,
    pub g: f64,
    pub kappa: f64,
    pub hamiltonian_kind: HamiltonianKind,
    #[serde(default)]
    pub atomic_dissipators: Vec<DissipatorSpec>,
}

impl Default for SystemModel {
    /// Resonant model at the reference coupling and damping.
    fn default() -> Self {
        SystemModel {
            omega_f: 1.0,
            omega_a: 1.0,
            g: 0.19,
            kappa: 0.03,
            hamiltonian_kind: HamiltonianKind::TavisCummings,
            atomic_dissipators: Vec::new(),
        }
    }
}

impl SystemModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_f > 0.0) || !(self.omega_a > 0.0) {
            return Err(Error::InvalidArgument(
                "mode and transition frequencies must be positive".into(),
            ));
        }
        if !(self.g >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling g must be nonnegative, got {}",
                self.g
            )));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cavity decay kappa must be nonnegative, got {}",
                self.kappa
            )));
        }
        for d in &self.atomic_dissipators {
            if !(d.gamma >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "dissipator rate must be nonnegative, got {}",
                    d.gamma
                )));
            }
        }
        Ok(())
    }
}

/// Adaptive-integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum step, in units of `1/omega_H`.
    pub max_step: f64,
    /// Accepted steps between CPTP integrity checks.
    pub guard_every: usize,
    /// Integrate in the interaction picture of `diag(H)` (exact change of
    /// variables; removes the bare-energy phases from the stepped state).
    #[serde(default = "default_true")]
    pub interaction_frame: bool,
}

fn default_true() -> bool {
    true
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 0.05,
            guard_every: 50,
            interaction_frame: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "integrator tolerances must be positive".into(),
            ));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument(
                "max_step must be positive".into(),
            ));
        }
        if self.guard_every == 0 {
            return Err(Error::InvalidArgument(
                "guard_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn stepper_options(&self) -> StepperOptions {
        StepperOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            guard_every: self.guard_every,
            positivity_floor: POSITIVITY_FLOOR,
        }
    }
}

fn split_atoms_field(space: &HilbertSpace) -> Result<(&HilbertSpace, &HilbertSpace)> {
    let factors = space.factors();
    let mismatch = || Error::RepresentationMismatch {
        expected: "Composite[(CollectiveSpin|ProductSpin), Fock]".into(),
        found: format!("{:?}", space.kind()),
    };
    if factors.len() != 2 {
        return Err(mismatch());
    }
    let atoms = &factors[0];
    let field = &factors[1];
    let atoms_ok = matches!(
        atoms.kind(),
        SpaceKind::CollectiveSpin { .. } | SpaceKind::ProductSpin { .. }
    );
    let field_ok = matches!(field.kind(), SpaceKind::Fock { .. });
    if !atoms_ok || !field_ok {
        return Err(mismatch());
    }
    Ok((atoms, field))
}

/// Tavis–Cummings or Dicke Hamiltonian on a composite (atoms, field) space.
pub fn build_hamiltonian(model: &SystemModel, space: &HilbertSpace) -> Result<OperatorMatrix> {
    model.validate()?;
    let (atom_space, field_space) = split_atoms_field(space)?;
    let (s_plus, s_minus, s_z) = collective_ops_for(atom_space)?;
    let boson = make_boson_ops(field_space)?;
    let id_atoms = CMatrix::identity(atom_space.dim(), atom_space.dim());
    let id_field = CMatrix::identity(field_space.dim(), field_space.dim());

    let mut h = linalg::kron(&id_atoms, boson.number.entries()) * c(model.omega_f)
        + linalg::kron(s_z.entries(), &id_field) * c(model.omega_a);
    match model.hamiltonian_kind {
        HamiltonianKind::TavisCummings => {
            h += (linalg::kron(s_plus.entries(), boson.annihilate.entries())
                + linalg::kron(s_minus.entries(), boson.create.entries()))
                * c(model.g);
        }
        HamiltonianKind::Dicke => {
            let s_x2 = s_plus.entries() + s_minus.entries();
            let quad = boson.annihilate.entries() + boson.create.entries();
            h += linalg::kron(&s_x2, &quad) * c(model.g);
        }
    }
    debug_assert!(linalg::herm_deviation(&h) <= 1e-12);
    OperatorMatrix::new(space.clone(), h)
}

/// Collapse operators `(rate, L)` for `space`: the cavity channel plus the
/// model's atomic channels. Zero-rate channels are dropped so they leave the
/// arithmetic untouched.
fn collapse_operators(model: &SystemModel, space: &HilbertSpace) -> Result<Vec<(f64, CMatrix)>> {
    let mut out = Vec::new();
    match space.kind() {
        SpaceKind::Fock { .. } => {
            if !model.atomic_dissipators.iter().all(|d| d.gamma == 0.0) {
                return Err(Error::RepresentationMismatch {
                    expected: "Composite[(atoms), Fock] for atomic dissipators".into(),
                    found: "Fock".into(),
                });
            }
            if model.kappa != 0.0 {
                let boson = make_boson_ops(space)?;
                out.push((model.kappa, boson.annihilate.entries().clone()));
            }
        }
        _ => {
            let (atom_space, field_space) = split_atoms_field(space)?;
            let id_atoms = CMatrix::identity(atom_space.dim(), atom_space.dim());
            let id_field = CMatrix::identity(field_space.dim(), field_space.dim());
            if model.kappa != 0.0 {
                let boson = make_boson_ops(field_space)?;
                out.push((
                    model.kappa,
                    linalg::kron(&id_atoms, boson.annihilate.entries()),
                ));
            }
            for spec in &model.atomic_dissipators {
                if spec.gamma == 0.0 {
                    continue;
                }
                match spec.channel {
                    DissipatorChannel::CollectiveLowering => {
                        let (_, s_minus, _) = collective_ops_for(atom_space)?;
                        out.push((spec.gamma, linalg::kron(s_minus.entries(), &id_field)));
                    }
                    DissipatorChannel::CollectiveDephasing => {
                        let (_, _, s_z) = collective_ops_for(atom_space)?;
                        out.push((spec.gamma, linalg::kron(s_z.entries(), &id_field)));
                    }
                    DissipatorChannel::IndividualLowering => {
                        let ops = make_product_spin_ops(atom_space)?;
                        for sigma in &ops.lower_each {
                            out.push((spec.gamma, linalg::kron(sigma.entries(), &id_field)));
                        }
                    }
                    DissipatorChannel::IndividualDephasing => {
                        let ops = make_product_spin_ops(atom_space)?;
                        for sigma in &ops.z_each {
                            out.push((spec.gamma, linalg::kron(sigma.entries(), &id_field)));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Master-equation right-hand side, evaluated with dense products. This is
/// the direct transcription of the generator; the integrator's prepared
/// (offset-diagonal) path is cross-checked against it in tests.
pub fn lindblad_rhs(
    model: &SystemModel,
    hamiltonian: &OperatorMatrix,
    rho: &DensityMatrix,
) -> Result<CMatrix> {
    model.validate()?;
    if hamiltonian.space() != rho.space() {
        return Err(Error::RepresentationMismatch {
            expected: format!("{:?}", hamiltonian.space().kind()),
            found: format!("{:?}", rho.space().kind()),
        });
    }
    let h = hamiltonian.entries();
    let r = rho.entries();
    let i = Complex64::new(0.0, 1.0);
    let mut out = (h * r - r * h) * (-i);
    for (rate, l) in collapse_operators(model, rho.space())? {
        let l_dag = l.adjoint();
        let l_rho = &l * r;
        let norm = &l_dag * &l;
        out += (&l_rho * &l_dag) * c(rate);
        out += (&norm * r + r * &norm) * c(-0.5 * rate);
    }
    Ok(out)
}

/// Evolve `rho0` under the model's master equation for `duration`.
pub fn evolve(
    model: &SystemModel,
    hamiltonian: &OperatorMatrix,
    rho0: &DensityMatrix,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<DensityMatrix> {
    evolve_observed(model, hamiltonian, rho0, duration, config, &[], |_, _| {})
}

/// As [`evolve`], invoking `observe` with the lab-frame state at each of
/// `sample_times` (strictly increasing, within `(0, duration]`).
pub fn evolve_observed(
    model: &SystemModel,
    hamiltonian: &OperatorMatrix,
    rho0: &DensityMatrix,
    duration: f64,
    config: &IntegratorConfig,
    sample_times: &[f64],
    mut observe: impl FnMut(f64, &DensityMatrix),
) -> Result<DensityMatrix> {
    model.validate()?;
    config.validate()?;
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "duration must be a finite nonnegative time, got {duration}"
        )));
    }
    if hamiltonian.space() != rho0.space() {
        return Err(Error::RepresentationMismatch {
            expected: format!("{:?}", hamiltonian.space().kind()),
            found: format!("{:?}", rho0.space().kind()),
        });
    }
    for w in sample_times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "sample times must be strictly increasing".into(),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (sample_times.first(), sample_times.last()) {
        if first <= 0.0 || last > duration {
            return Err(Error::InvalidArgument(
                "sample times must lie in (0, duration]".into(),
            ));
        }
    }

    let collapse = collapse_operators(model, rho0.space())?;
    let gen = PreparedGenerator::new(hamiltonian, &collapse, config.interaction_frame)?;
    let space = rho0.space().clone();
    let (y, _stats) = dopri5::integrate(
        &gen,
        rho0.entries(),
        duration,
        &config.stepper_options(),
        sample_times,
        |t, y_frame| {
            let lab = gen.to_lab_frame(t, y_frame);
            observe(t, &DensityMatrix::from_parts_unchecked(space.clone(), lab));
        },
    )?;
    let lab = gen.to_lab_frame(duration, &y);
    Ok(DensityMatrix::from_parts_unchecked(space, lab))
}

/// Free cavity evolution: `H = omega_f a†a` with cavity damping only.
pub fn evolve_free_field(
    model: &SystemModel,
    rho_f: &DensityMatrix,
    duration: f64,
    config: &IntegratorConfig,
) -> Result<DensityMatrix> {
    evolve_free_field_observed(model, rho_f, duration, config, &[], |_, _| {})
}

pub fn evolve_free_field_observed(
    model: &SystemModel,
    rho_f: &DensityMatrix,
    duration: f64,
    config: &IntegratorConfig,
    sample_times: &[f64],
    observe: impl FnMut(f64, &DensityMatrix),
) -> Result<DensityMatrix> {
    let space = rho_f.space();
    if !matches!(space.kind(), SpaceKind::Fock { .. }) {
        return Err(Error::RepresentationMismatch {
            expected: "Fock".into(),
            found: format!("{:?}", space.kind()),
        });
    }
    let boson = make_boson_ops(space)?;
    let h = OperatorMatrix::new(space.clone(), boson.number.entries() * c(model.omega_f))?;
    let free_model = SystemModel {
        g: 0.0,
        atomic_dissipators: Vec::new(),
        ..model.clone()
    };
    evolve_observed(
        &free_model,
        &h,
        rho_f,
        duration,
        config,
        sample_times,
        observe,
    )
}

#[cfg(test)]
mod tests;
