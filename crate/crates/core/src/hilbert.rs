//! Hilbert spaces, operators, and initial states.
//!
//! Spaces are finite: a truncated Fock space for the cavity mode, and either
//! the symmetric collective-spin space (dimension `N + 1`) or the full
//! product space (dimension `2^N`) for an `N`-atom cluster. Composite spaces
//! record their factor order, fixed as (atoms, field) throughout the crate.
//!
//! Basis conventions:
//! - Fock: `|0>, ..., |n_max>`, `a|n> = sqrt(n)|n-1>`.
//! - Collective spin `j = N/2`: index `k` is `|j, m>` with `m = -j + k`, so
//!   the cluster ground state `|j, -j>` is index 0.
//! - Product spin: atom `i` contributes bit `2^(N-1-i)`, bit set = excited;
//!   single-atom basis order is (ground, excited) with `sigma_z = diag(-1, +1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};

/// Default cap on the number of atoms in the `2^N` product representation.
pub const PRODUCT_SPIN_CAP: usize = 4;

/// Tolerances for density-matrix integrity checks.
pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind {
    Fock { n_max: usize },
    CollectiveSpin { atoms: usize },
    ProductSpin { atoms: usize },
    Composite { factors: Vec<HilbertSpace> },
}

impl SpaceKind {
    fn name(&self) -> String {
        match self {
            SpaceKind::Fock { n_max } => format!("Fock(n_max={n_max})"),
            SpaceKind::CollectiveSpin { atoms } => format!("CollectiveSpin(N={atoms})"),
            SpaceKind::ProductSpin { atoms } => format!("ProductSpin(N={atoms})"),
            SpaceKind::Composite { factors } => format!(
                "Composite[{}]",
                factors
                    .iter()
                    .map(|f| f.kind.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertSpace {
    kind: SpaceKind,
    dim: usize,
}

impl HilbertSpace {
    pub fn fock(n_max: usize) -> Self {
        HilbertSpace {
            kind: SpaceKind::Fock { n_max },
            dim: n_max + 1,
        }
    }

    pub fn collective_spin(atoms: usize) -> Result<Self> {
        if atoms < 1 {
            return Err(Error::InvalidArgument(
                "collective spin space needs at least one atom".into(),
            ));
        }
        Ok(HilbertSpace {
            kind: SpaceKind::CollectiveSpin { atoms },
            dim: atoms + 1,
        })
    }

    pub fn product_spin(atoms: usize) -> Result<Self> {
        Self::product_spin_with_cap(atoms, PRODUCT_SPIN_CAP)
    }

    pub fn product_spin_with_cap(atoms: usize, cap: usize) -> Result<Self> {
        if atoms < 1 {
            return Err(Error::InvalidArgument(
                "product spin space needs at least one atom".into(),
            ));
        }
        if atoms > cap {
            return Err(Error::ResourceLimit(format!(
                "product representation of {atoms} atoms needs dimension 2^{atoms} = {}; \
                 cap is {cap} atoms",
                1usize << atoms
            )));
        }
        Ok(HilbertSpace {
            kind: SpaceKind::ProductSpin { atoms },
            dim: 1 << atoms,
        })
    }

    pub fn composite(factors: Vec<HilbertSpace>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(
                "composite space needs at least one factor".into(),
            ));
        }
        let dim = factors.iter().map(|f| f.dim).product();
        Ok(HilbertSpace {
            kind: SpaceKind::Composite { factors },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    /// Factor list; a non-composite space is its own single factor.
    pub fn factors(&self) -> &[HilbertSpace] {
        match &self.kind {
            SpaceKind::Composite { factors } => factors,
            _ => std::slice::from_ref(self),
        }
    }

    /// Stride of factor `idx` in the composite index (factor 0 is slowest).
    pub fn factor_stride(&self, idx: usize) -> usize {
        self.factors()[idx + 1..].iter().map(|f| f.dim).product()
    }

    fn expect_kind(&self, expected: &str, ok: bool) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::RepresentationMismatch {
                expected: expected.into(),
                found: self.kind.name(),
            })
        }
    }
}

/// A dense operator tied to the space it acts on.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpace, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{} but the space has dimension {}",
                entries.nrows(),
                entries.ncols(),
                space.dim()
            )));
        }
        Ok(OperatorMatrix { space, entries })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let dim = space.dim();
        OperatorMatrix {
            space,
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            space: self.space.clone(),
            entries: self.entries.adjoint(),
        }
    }
}

/// A density matrix tied to its space. Constructors in this module validate
/// the trace/Hermiticity/positivity invariants; internal evolution code
/// maintains them and re-checks on guard steps.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: HilbertSpace,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != space.dim() || entries.ncols() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "state is {}x{} but the space has dimension {}",
                entries.nrows(),
                entries.ncols(),
                space.dim()
            )));
        }
        let rho = DensityMatrix { space, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// Build without validation; for internal paths where validity is
    /// maintained by construction.
    pub(crate) fn from_parts_unchecked(space: HilbertSpace, entries: CMatrix) -> Self {
        DensityMatrix { space, entries }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Check unit trace, Hermiticity, and positivity at module tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = linalg::trace(&self.entries);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "trace is {tr} (must be 1 within {TRACE_TOL:.0e})"
            )));
        }
        let herm = linalg::herm_deviation(&self.entries);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "Hermiticity deviation {herm:.3e} exceeds {HERMITICITY_TOL:.0e}"
            )));
        }
        if let Err(min) = linalg::min_eigenvalue_at_least(&self.entries, POSITIVITY_FLOOR) {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {min:.3e} below -{POSITIVITY_FLOOR:.0e}"
            )));
        }
        Ok(())
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Complex64 {
        assert_eq!(
            self.space, op.space,
            "expectation value across mismatched spaces"
        );
        let n = self.space.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.entries[(i, j)] * op.entries[(j, i)];
            }
        }
        acc
    }
}

/// Rotation pulse shared by every cluster: tipping angle `phi` and azimuth
/// `varphi`, entering through `zeta = (phi/2) e^{i varphi}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RotationParams {
    pub phi: f64,
    pub varphi: f64,
}

impl RotationParams {
    pub fn new(phi: f64, varphi: f64) -> Self {
        RotationParams { phi, varphi }
    }

    pub fn zeta(&self) -> Complex64 {
        Complex64::from_polar(self.phi / 2.0, self.varphi)
    }
}

impl Default for RotationParams {
    /// Pole-to-equator pulse: `phi = -pi/2`, `varphi = 0`.
    fn default() -> Self {
        RotationParams {
            phi: -std::f64::consts::FRAC_PI_2,
            varphi: 0.0,
        }
    }
}

/// Temperature and mode/transition frequency in units of `omega_H`
/// (`k_B = 1`).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThermalParams {
    pub temperature: f64,
    pub frequency: f64,
}

impl ThermalParams {
    pub fn new(temperature: f64, frequency: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !(frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        Ok(ThermalParams {
            temperature,
            frequency,
        })
    }
}

pub struct BosonOps {
    pub annihilate: OperatorMatrix,
    pub create: OperatorMatrix,
    pub number: OperatorMatrix,
}

/// Ladder and number operators on a truncated Fock space. Truncation drops
/// the raising element out of the top level, so `[a, a†]` picks up a
/// `-n_max` artifact in its bottom-right corner.
pub fn make_boson_ops(space: &HilbertSpace) -> Result<BosonOps> {
    let n_max = match space.kind() {
        SpaceKind::Fock { n_max } => *n_max,
        _ => return space.expect_kind("Fock", false).map(|_| unreachable!()),
    };
    let dim = n_max + 1;
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let a_dag = a.adjoint();
    let number = &a_dag * &a;
    Ok(BosonOps {
        annihilate: OperatorMatrix::new(space.clone(), a)?,
        create: OperatorMatrix::new(space.clone(), a_dag)?,
        number: OperatorMatrix::new(space.clone(), number)?,
    })
}

pub struct CollectiveSpinOps {
    /// `S+`
    pub raise: OperatorMatrix,
    /// `S-`
    pub lower: OperatorMatrix,
    /// `S_z`
    pub z: OperatorMatrix,
}

/// Collective spin operators on the symmetric `j = N/2` space.
pub fn make_collective_spin_ops(space: &HilbertSpace) -> Result<CollectiveSpinOps> {
    let atoms = match space.kind() {
        SpaceKind::CollectiveSpin { atoms } => *atoms,
        _ => {
            return space
                .expect_kind("CollectiveSpin", false)
                .map(|_| unreachable!())
        }
    };
    let j = atoms as f64 / 2.0;
    let dim = atoms + 1;
    let mut raise = CMatrix::zeros(dim, dim);
    let mut z = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let m = -j + k as f64;
        z[(k, k)] = c(m);
        if k + 1 < dim {
            raise[(k + 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let lower = raise.adjoint();
    Ok(CollectiveSpinOps {
        raise: OperatorMatrix::new(space.clone(), raise)?,
        lower: OperatorMatrix::new(space.clone(), lower)?,
        z: OperatorMatrix::new(space.clone(), z)?,
    })
}

pub struct ProductSpinOps {
    /// `sigma_i^+` for each atom.
    pub raise_each: Vec<OperatorMatrix>,
    /// `sigma_i^-` for each atom.
    pub lower_each: Vec<OperatorMatrix>,
    /// `sigma_i^z` for each atom.
    pub z_each: Vec<OperatorMatrix>,
    /// `S+ = sum_i sigma_i^+`
    pub raise_sum: OperatorMatrix,
    /// `S- = sum_i sigma_i^-`
    pub lower_sum: OperatorMatrix,
    /// `S_z = (1/2) sum_i sigma_i^z`
    pub z_sum: OperatorMatrix,
}

/// Per-atom Pauli operators and their collective sums on the full `2^N`
/// product space.
pub fn make_product_spin_ops(space: &HilbertSpace) -> Result<ProductSpinOps> {
    let atoms = match space.kind() {
        SpaceKind::ProductSpin { atoms } => *atoms,
        _ => {
            return space
                .expect_kind("ProductSpin", false)
                .map(|_| unreachable!())
        }
    };
    let dim = 1usize << atoms;
    let mut raise_each = Vec::with_capacity(atoms);
    let mut lower_each = Vec::with_capacity(atoms);
    let mut z_each = Vec::with_capacity(atoms);
    let mut raise_sum = CMatrix::zeros(dim, dim);
    let mut z_sum = CMatrix::zeros(dim, dim);
    for i in 0..atoms {
        let bit = 1usize << (atoms - 1 - i);
        let mut raise = CMatrix::zeros(dim, dim);
        let mut z = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            if b & bit == 0 {
                raise[(b | bit, b)] = c(1.0);
                z[(b, b)] = c(-1.0);
            } else {
                z[(b, b)] = c(1.0);
            }
        }
        raise_sum += &raise;
        z_sum += &z;
        lower_each.push(OperatorMatrix::new(space.clone(), raise.adjoint())?);
        raise_each.push(OperatorMatrix::new(space.clone(), raise)?);
        z_each.push(OperatorMatrix::new(space.clone(), z)?);
    }
    let lower_sum = raise_sum.adjoint();
    Ok(ProductSpinOps {
        raise_each,
        lower_each,
        z_each,
        raise_sum: OperatorMatrix::new(space.clone(), raise_sum)?,
        lower_sum: OperatorMatrix::new(space.clone(), lower_sum)?,
        z_sum: OperatorMatrix::new(space.clone(), z_sum * c(0.5))?,
    })
}

/// Collective `(S+, S-, S_z)` in whichever atomic representation `space`
/// uses.
pub fn collective_ops_for(space: &HilbertSpace) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    match space.kind() {
        SpaceKind::CollectiveSpin { .. } => {
            let ops = make_collective_spin_ops(space)?;
            Ok((ops.raise, ops.lower, ops.z))
        }
        SpaceKind::ProductSpin { .. } => {
            let ops = make_product_spin_ops(space)?;
            Ok((ops.raise_sum, ops.lower_sum, ops.z_sum))
        }
        _ => Err(Error::RepresentationMismatch {
            expected: "CollectiveSpin or ProductSpin".into(),
            found: space.kind.name(),
        }),
    }
}

/// Kronecker product of operators; the result lives on the composite space
/// with `a`'s factors first.
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let space = tensor_space(&a.space, &b.space);
    OperatorMatrix {
        entries: linalg::kron(&a.entries, &b.entries),
        space,
    }
}

/// Kronecker product of states, `rho_a (x) rho_b`.
pub fn tensor_density(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let space = tensor_space(&a.space, &b.space);
    DensityMatrix {
        entries: linalg::kron(&a.entries, &b.entries),
        space,
    }
}

fn tensor_space(a: &HilbertSpace, b: &HilbertSpace) -> HilbertSpace {
    let mut factors: Vec<HilbertSpace> = a.factors().to_vec();
    factors.extend(b.factors().iter().cloned());
    HilbertSpace::composite(factors).expect("non-empty factor list")
}

/// Trace out every factor except `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let factors = rho.space.factors();
    if factors.len() < 2 {
        return Err(Error::RepresentationMismatch {
            expected: "Composite with at least 2 factors".into(),
            found: rho.space.kind.name(),
        });
    }
    if keep >= factors.len() {
        return Err(Error::InvalidArgument(format!(
            "factor index {keep} out of range for {} factors",
            factors.len()
        )));
    }
    let kept = factors[keep].clone();
    let dk = kept.dim();
    let stride = rho.space.factor_stride(keep);
    let dim = rho.space.dim();
    let mut out = CMatrix::zeros(dk, dk);
    // Row index runs over the full space; the column index differs from it
    // only in the kept factor.
    for idx in 0..dim {
        let a = (idx / stride) % dk;
        let base = idx - a * stride;
        for b in 0..dk {
            let jdx = base + b * stride;
            out[(a, b)] += rho.entries[(idx, jdx)];
        }
    }
    Ok(DensityMatrix {
        space: kept,
        entries: out,
    })
}

/// Gibbs state `exp(-H/T) / Z` of a Hermitian `hamiltonian`, via
/// eigendecomposition (spectrum shifted so the weights never underflow all
/// at once).
pub fn thermal_state(
    space: &HilbertSpace,
    params: &ThermalParams,
    hamiltonian: &OperatorMatrix,
) -> Result<DensityMatrix> {
    if hamiltonian.space != *space {
        return Err(Error::RepresentationMismatch {
            expected: space.kind.name(),
            found: hamiltonian.space.kind.name(),
        });
    }
    let herm = linalg::herm_deviation(&hamiltonian.entries);
    if herm > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "thermal_state needs a Hermitian Hamiltonian (deviation {herm:.3e})"
        )));
    }
    let eig = linalg::eigh(&hamiltonian.entries);
    let e0 = eig.values[0];
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|&e| (-(e - e0) / params.temperature).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let dim = space.dim();
    let mut rho = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let p = c(weights[k] / z);
        let v = eig.vectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += p * v[i] * v[j].conj();
            }
        }
    }
    Ok(DensityMatrix {
        space: space.clone(),
        entries: rho,
    })
}

/// Conjugate a cluster state by the rotation `R(zeta) = exp(zeta S+ - zeta* S-)`.
///
/// The exponential is exact (eigendecomposition of the anti-Hermitian
/// generator) and the unitarity of `R` is verified to 1e-10.
pub fn rotate_cluster(rho_prime: &DensityMatrix, params: &RotationParams) -> Result<DensityMatrix> {
    let (raise, lower, _) = collective_ops_for(&rho_prime.space)?;
    let zeta = params.zeta();
    let gen = raise.entries * zeta - lower.entries * zeta.conj();
    let r = linalg::expm_antihermitian(&gen, 1e-10);
    let dim = rho_prime.space.dim();
    let unit_dev = linalg::max_abs(&(&r * r.adjoint() - CMatrix::identity(dim, dim)));
    assert!(
        unit_dev <= 1e-10,
        "rotation failed unitarity check ({unit_dev:.3e})"
    );
    let rotated = &r * &rho_prime.entries * r.adjoint();
    Ok(DensityMatrix {
        space: rho_prime.space.clone(),
        entries: rotated,
    })
}

/// A displaced thermal state together with a truncation-quality flag.
pub struct DisplacedThermal {
    pub state: DensityMatrix,
    /// Set when `|alpha|^2 + <n>_th` is not well inside the truncation
    /// (`> n_max / 3`), so moments may be degraded.
    pub truncation_warning: bool,
}

/// `D(alpha) rho_th(T) D†(alpha)` on a truncated Fock space.
pub fn displaced_thermal_state(
    space: &HilbertSpace,
    params: &ThermalParams,
    alpha: Complex64,
) -> Result<DisplacedThermal> {
    let n_max = match space.kind() {
        SpaceKind::Fock { n_max } => *n_max,
        _ => {
            return Err(Error::RepresentationMismatch {
                expected: "Fock".into(),
                found: space.kind.name(),
            })
        }
    };
    let ops = make_boson_ops(space)?;
    let h_field = OperatorMatrix::new(
        space.clone(),
        ops.number.entries() * c(params.frequency),
    )?;
    let rho_th = thermal_state(space, params, &h_field)?;
    let gen = ops.create.entries() * alpha - ops.annihilate.entries() * alpha.conj();
    let d = linalg::expm_antihermitian(&gen, 1e-10);
    let displaced = &d * rho_th.entries() * d.adjoint();
    let n_th = 1.0 / ((params.frequency / params.temperature).exp() - 1.0);
    let load = alpha.norm_sqr() + n_th;
    Ok(DisplacedThermal {
        state: DensityMatrix {
            space: space.clone(),
            entries: displaced,
        },
        truncation_warning: load > n_max as f64 / 3.0,
    })
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.space != sigma.space {
        return Err(Error::RepresentationMismatch {
            expected: rho.space.kind.name(),
            found: sigma.space.kind.name(),
        });
    }
    for (label, state) in [("rho", rho), ("sigma", sigma)] {
        if let Err(min) = linalg::min_eigenvalue_at_least(state.entries(), POSITIVITY_FLOOR) {
            return Err(Error::InvalidState(format!(
                "fidelity input {label} has eigenvalue {min:.3e}"
            )));
        }
    }
    let eig = linalg::eigh(rho.entries());
    let dim = rho.space.dim();
    let mut sqrt_rho = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let s = c(eig.values[k].max(0.0).sqrt());
        let v = eig.vectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                sqrt_rho[(i, j)] += s * v[i] * v[j].conj();
            }
        }
    }
    let mut inner = &sqrt_rho * sigma.entries() * &sqrt_rho;
    linalg::hermitize(&mut inner);
    let vals = linalg::eigh(&inner).values;
    let root_sum: f64 = vals.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).min(1.0))
}
