use approx::{assert_abs_diff_eq, assert_relative_eq};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::*;
use crate::hilbert::{
    displaced_thermal_state, rotate_cluster, tensor_density, thermal_state, RotationParams,
    ThermalParams,
};

fn composite(atoms: usize, n_max: usize) -> HilbertSpace {
    HilbertSpace::composite(vec![
        HilbertSpace::collective_spin(atoms).unwrap(),
        HilbertSpace::fock(n_max),
    ])
    .unwrap()
}

fn random_state(space: &HilbertSpace, seed: u64) -> DensityMatrix {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim();
    let m = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let mut rho = &m * m.adjoint();
    let tr = linalg::trace(&rho);
    rho /= tr;
    DensityMatrix::new(space.clone(), rho).unwrap()
}

fn thermal_field(n_max: usize, temperature: f64) -> DensityMatrix {
    let space = HilbertSpace::fock(n_max);
    let boson = make_boson_ops(&space).unwrap();
    let h = OperatorMatrix::new(space.clone(), boson.number.entries().clone()).unwrap();
    thermal_state(&space, &ThermalParams::new(temperature, 1.0).unwrap(), &h).unwrap()
}

fn mean_photons_field(rho: &DensityMatrix) -> f64 {
    (0..rho.space().dim())
        .map(|n| n as f64 * rho.entries()[(n, n)].re)
        .sum()
}

#[test]
fn hamiltonian_is_hermitian() {
    let space = composite(3, 6);
    for kind in [HamiltonianKind::TavisCummings, HamiltonianKind::Dicke] {
        let model = SystemModel {
            hamiltonian_kind: kind,
            ..SystemModel::default()
        };
        let h = build_hamiltonian(&model, &space).unwrap();
        assert!(linalg::herm_deviation(h.entries()) <= 1e-12);
    }
}

#[test]
fn uncoupled_spectrum_is_additive() {
    let space = composite(2, 3);
    let model = SystemModel {
        g: 0.0,
        omega_f: 1.0,
        omega_a: 0.7,
        ..SystemModel::default()
    };
    let h = build_hamiltonian(&model, &space).unwrap();
    let mut vals = linalg::eigh(h.entries()).values;
    let mut expected = Vec::new();
    for m in [-1.0f64, 0.0, 1.0] {
        for n in 0..=3 {
            expected.push(n as f64 + 0.7 * m);
        }
    }
    expected.sort_by(f64::total_cmp);
    vals.sort_by(f64::total_cmp);
    for (v, e) in vals.iter().zip(&expected) {
        assert_abs_diff_eq!(v, e, epsilon = 1e-12);
    }
}

#[test]
fn jaynes_cummings_doublet_splits_by_2g() {
    let space = composite(1, 2);
    let model = SystemModel::default();
    let h = build_hamiltonian(&model, &space).unwrap();
    let vals = linalg::eigh(h.entries()).values;
    // first excitation manifold straddles omega/2
    assert_abs_diff_eq!(vals[1], 0.5 - model.g, epsilon = 1e-12);
    assert_abs_diff_eq!(vals[2], 0.5 + model.g, epsilon = 1e-12);
    assert_abs_diff_eq!(vals[2] - vals[1], 2.0 * model.g, epsilon = 1e-12);
}

#[test]
fn excitation_number_conservation() {
    let space = composite(2, 4);
    let (_, _, s_z) = collective_ops_for(&space.factors()[0]).unwrap();
    let boson = make_boson_ops(&space.factors()[1]).unwrap();
    let n_ex = linalg::kron(
        s_z.entries(),
        &CMatrix::identity(5, 5),
    ) + linalg::kron(&CMatrix::identity(3, 3), boson.number.entries());

    let tc = build_hamiltonian(&SystemModel::default(), &space).unwrap();
    let comm_tc = tc.entries() * &n_ex - &n_ex * tc.entries();
    assert!(linalg::max_abs(&comm_tc) <= 1e-12);

    let dicke_model = SystemModel {
        hamiltonian_kind: HamiltonianKind::Dicke,
        g: 0.36,
        ..SystemModel::default()
    };
    let dicke = build_hamiltonian(&dicke_model, &space).unwrap();
    let comm_dicke = dicke.entries() * &n_ex - &n_ex * dicke.entries();
    assert!(linalg::max_abs(&comm_dicke) > 0.1);
}

#[test]
fn build_hamiltonian_rejects_wrong_space() {
    let err = build_hamiltonian(&SystemModel::default(), &HilbertSpace::fock(4)).unwrap_err();
    assert!(matches!(err, Error::RepresentationMismatch { .. }));
}

#[test]
fn rhs_is_traceless_and_hermiticity_preserving() {
    let space = composite(2, 3);
    let mut model = SystemModel::default();
    model.atomic_dissipators = vec![
        DissipatorSpec {
            channel: DissipatorChannel::CollectiveLowering,
            gamma: 0.05,
        },
        DissipatorSpec {
            channel: DissipatorChannel::CollectiveDephasing,
            gamma: 0.02,
        },
    ];
    let h = build_hamiltonian(&model, &space).unwrap();
    let rho = random_state(&space, 42);
    let rhs = lindblad_rhs(&model, &h, &rho).unwrap();
    assert!(linalg::trace(&rhs).norm() <= 1e-12);
    assert!(linalg::herm_deviation(&rhs) <= 1e-12);
}

#[test]
fn rhs_single_photon_decay_rate() {
    let space = HilbertSpace::fock(3);
    let model = SystemModel::default();
    let mut one = CMatrix::zeros(4, 4);
    one[(1, 1)] = c(1.0);
    let rho = DensityMatrix::new(space.clone(), one).unwrap();
    let h0 = OperatorMatrix::new(space.clone(), CMatrix::zeros(4, 4)).unwrap();
    let rhs = lindblad_rhs(&model, &h0, &rho).unwrap();
    let boson = make_boson_ops(&space).unwrap();
    let dn_dt: Complex64 = (&rhs * boson.number.entries()).diagonal().iter().sum();
    assert_abs_diff_eq!(dn_dt.re, -model.kappa, epsilon = 1e-14);
    assert_abs_diff_eq!(dn_dt.im, 0.0, epsilon = 1e-14);
}

#[test]
fn prepared_generator_matches_dense_rhs() {
    let space = composite(2, 4);
    let mut model = SystemModel::default();
    model.atomic_dissipators = vec![DissipatorSpec {
        channel: DissipatorChannel::CollectiveLowering,
        gamma: 0.07,
    }];
    let h = build_hamiltonian(&model, &space).unwrap();
    let rho = random_state(&space, 3);
    let dense = lindblad_rhs(&model, &h, &rho).unwrap();

    use super::dopri5::RhsEval;
    let collapse = collapse_operators(&model, &space).unwrap();
    // lab frame: identical by definition
    let gen = PreparedGenerator::new(&h, &collapse, false).unwrap();
    let mut out = CMatrix::zeros(space.dim(), space.dim());
    gen.eval(0.77, rho.entries(), &mut out);
    assert!(linalg::max_abs(&(&out - &dense)) <= 1e-12);

    // interaction frame at t = 0: d(rho_tilde)/dt = rhs_lab + i [D, rho]
    let gen_frame = PreparedGenerator::new(&h, &collapse, true).unwrap();
    let mut out_frame = CMatrix::zeros(space.dim(), space.dim());
    gen_frame.eval(0.0, rho.entries(), &mut out_frame);
    let dim = space.dim();
    let d = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            c(h.entries()[(i, i)].re)
        } else {
            c(0.0)
        }
    });
    let expected = &dense + (&d * rho.entries() - rho.entries() * &d) * Complex64::new(0.0, 1.0);
    assert!(linalg::max_abs(&(&out_frame - &expected)) <= 1e-12);
}

#[test]
fn interaction_frame_matches_lab_frame_evolution() {
    let space = composite(2, 6);
    let model = SystemModel::default();
    let h = build_hamiltonian(&model, &space).unwrap();
    let cluster = rotate_cluster(
        &thermal_cluster(2, 0.001),
        &RotationParams::default(),
    )
    .unwrap();
    let rho0 = tensor_density(&cluster, &thermal_field(6, 0.5));
    let config_frame = IntegratorConfig::default();
    let config_lab = IntegratorConfig {
        interaction_frame: false,
        ..IntegratorConfig::default()
    };
    let a = evolve(&model, &h, &rho0, 2.0, &config_frame).unwrap();
    let b = evolve(&model, &h, &rho0, 2.0, &config_lab).unwrap();
    assert!(linalg::max_abs(&(a.entries() - b.entries())) < 1e-8);
}

fn thermal_cluster(atoms: usize, temperature: f64) -> DensityMatrix {
    let space = HilbertSpace::collective_spin(atoms).unwrap();
    let (_, _, s_z) = collective_ops_for(&space).unwrap();
    let h = OperatorMatrix::new(space.clone(), s_z.entries().clone()).unwrap();
    thermal_state(
        &space,
        &ThermalParams::new(temperature, 1.0).unwrap(),
        &h,
    )
    .unwrap()
}

#[test]
fn zero_duration_returns_input() {
    let rho = thermal_field(5, 0.5);
    let model = SystemModel::default();
    let out = evolve_free_field(&model, &rho, 0.0, &IntegratorConfig::default()).unwrap();
    assert!(linalg::max_abs(&(out.entries() - rho.entries())) == 0.0);
}

#[test]
fn free_field_decay_matches_exact_map() {
    // <n>(t) = <n>(0) exp(-kappa t); run out to 5/kappa
    let model = SystemModel::default();
    let temperature = 1.0 / 2.0f64.ln(); // <n> = 1
    let rho0 = thermal_field(40, temperature);
    let n0 = mean_photons_field(&rho0);
    assert_abs_diff_eq!(n0, 1.0, epsilon = 1e-9);
    let duration = 5.0 / model.kappa;
    let mut checks = Vec::new();
    let samples = [0.2 * duration, 0.6 * duration, duration];
    let out = evolve_free_field_observed(
        &model,
        &rho0,
        duration,
        &IntegratorConfig::default(),
        &samples,
        |t, rho| checks.push((t, mean_photons_field(rho))),
    )
    .unwrap();
    for (t, n) in checks {
        let exact = n0 * (-model.kappa * t).exp();
        assert_relative_eq!(n, exact, max_relative = 1e-6);
    }
    assert_relative_eq!(
        mean_photons_field(&out),
        (-5.0f64).exp(),
        max_relative = 1e-6
    );
}

#[test]
fn free_field_diagonal_states_stay_diagonal() {
    let model = SystemModel::default();
    let rho0 = thermal_field(10, 0.5);
    let out = evolve_free_field(&model, &rho0, 7.0, &IntegratorConfig::default()).unwrap();
    let mut off_diag_max = 0.0f64;
    for i in 0..11 {
        for j in 0..11 {
            if i != j {
                off_diag_max = off_diag_max.max(out.entries()[(i, j)].norm());
            }
        }
    }
    assert!(off_diag_max < 1e-12);
    // populations decay toward vacuum
    assert!(mean_photons_field(&out) < mean_photons_field(&rho0));
}

#[test]
fn free_field_coherent_amplitude_decay_with_phase() {
    // <a>(t) = <a>(0) exp((-i omega_f - kappa/2) t), checked as a complex
    // number so the lab-frame phase restoration is exercised.
    let model = SystemModel::default();
    let space = HilbertSpace::fock(20);
    let params = ThermalParams::new(0.3, 1.0).unwrap();
    let rho0 = displaced_thermal_state(&space, &params, c(0.8)).unwrap().state;
    let boson = make_boson_ops(&space).unwrap();
    let a0 = rho0.expectation(&boson.annihilate);
    let mut observed = Vec::new();
    evolve_free_field_observed(
        &model,
        &rho0,
        10.0,
        &IntegratorConfig::default(),
        &[2.5, 6.0, 10.0],
        |t, rho| observed.push((t, rho.expectation(&boson.annihilate))),
    )
    .unwrap();
    for (t, a_t) in observed {
        let exact = a0
            * Complex64::from_polar(
                (-0.5 * model.kappa * t).exp(),
                -model.omega_f * t,
            );
        assert!((a_t - exact).norm() <= 1e-6 * a0.norm());
    }
}

#[test]
fn vacuum_rabi_oscillation() {
    // N = 1, kappa = 0, |e, 0>: excited population follows cos^2(g t)
    let space = composite(1, 3);
    let model = SystemModel {
        kappa: 0.0,
        ..SystemModel::default()
    };
    let h = build_hamiltonian(&model, &space).unwrap();
    let dim = space.dim();
    let mut excited = CMatrix::zeros(dim, dim);
    excited[(4, 4)] = c(1.0); // atom excited (index 1), field vacuum -> 1*4 + 0
    let rho0 = DensityMatrix::new(space.clone(), excited).unwrap();
    let p_e_op = {
        let mut proj = CMatrix::zeros(2, 2);
        proj[(1, 1)] = c(1.0);
        linalg::kron(&proj, &CMatrix::identity(4, 4))
    };
    let p_e_op = OperatorMatrix::new(space.clone(), p_e_op).unwrap();
    let samples: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
    let mut results = Vec::new();
    evolve_observed(
        &model,
        &h,
        &rho0,
        5.0,
        &IntegratorConfig::default(),
        &samples,
        |t, rho| results.push((t, rho.expectation(&p_e_op).re)),
    )
    .unwrap();
    for (t, p_e) in results {
        let exact = (model.g * t).cos().powi(2);
        assert_abs_diff_eq!(p_e, exact, epsilon = 1e-6);
    }
}

#[test]
fn zero_rates_evolution_is_unitary() {
    let space = composite(2, 4);
    let model = SystemModel {
        kappa: 0.0,
        ..SystemModel::default()
    };
    let h = build_hamiltonian(&model, &space).unwrap();
    let cluster = rotate_cluster(&thermal_cluster(2, 0.3), &RotationParams::default()).unwrap();
    let rho0 = tensor_density(&cluster, &thermal_field(4, 0.5));
    let out = evolve(&model, &h, &rho0, 3.0, &IntegratorConfig::default()).unwrap();
    let before = linalg::eigh(rho0.entries()).values;
    let after = linalg::eigh(out.entries()).values;
    for (b, a) in before.iter().zip(&after) {
        assert_abs_diff_eq!(b, a, epsilon = 1e-8);
    }
}

#[test]
fn tolerance_halving_converges() {
    let space = composite(1, 5);
    let model = SystemModel::default();
    let h = build_hamiltonian(&model, &space).unwrap();
    let cluster = rotate_cluster(&thermal_cluster(1, 0.001), &RotationParams::default()).unwrap();
    let rho0 = tensor_density(&cluster, &thermal_field(5, 0.5));
    let n_op = {
        let boson = make_boson_ops(&space.factors()[1]).unwrap();
        OperatorMatrix::new(
            space.clone(),
            linalg::kron(&CMatrix::identity(2, 2), boson.number.entries()),
        )
        .unwrap()
    };
    let coarse_tol = 1e-6;
    let run = |rel_tol: f64| {
        let config = IntegratorConfig {
            rel_tol,
            abs_tol: 1e-12,
            ..IntegratorConfig::default()
        };
        let out = evolve(&model, &h, &rho0, 4.0, &config).unwrap();
        out.expectation(&n_op).re
    };
    let coarse = run(coarse_tol);
    let fine = run(coarse_tol / 2.0);
    assert!(
        (coarse - fine).abs() < coarse_tol * coarse.abs().max(1.0),
        "coarse {coarse} vs fine {fine}"
    );
}

#[test]
fn trajectory_points_satisfy_state_invariants() {
    let space = composite(2, 5);
    let model = SystemModel::default();
    let h = build_hamiltonian(&model, &space).unwrap();
    let cluster = rotate_cluster(&thermal_cluster(2, 0.001), &RotationParams::default()).unwrap();
    let rho0 = tensor_density(&cluster, &thermal_field(5, 0.5));
    let samples: Vec<f64> = (1..=10).map(|k| k as f64 * 0.3).collect();
    let mut count = 0;
    evolve_observed(
        &model,
        &h,
        &rho0,
        3.0,
        &IntegratorConfig::default(),
        &samples,
        |_t, rho| {
            rho.validate().expect("trajectory point must stay a density matrix");
            count += 1;
        },
    )
    .unwrap();
    assert_eq!(count, 10);
}

#[test]
fn atomic_dissipators_need_atom_factor() {
    let rho = thermal_field(4, 0.5);
    let space = rho.space().clone();
    let boson = make_boson_ops(&space).unwrap();
    let h = OperatorMatrix::new(space.clone(), boson.number.entries().clone()).unwrap();
    let mut model = SystemModel::default();
    model.atomic_dissipators = vec![DissipatorSpec {
        channel: DissipatorChannel::CollectiveLowering,
        gamma: 0.1,
    }];
    let err = evolve(&model, &h, &rho, 1.0, &IntegratorConfig::default()).unwrap_err();
    assert!(matches!(err, Error::RepresentationMismatch { .. }));
}

#[test]
fn individual_channels_require_product_representation() {
    let space = composite(2, 3); // collective atoms
    let mut model = SystemModel::default();
    model.atomic_dissipators = vec![DissipatorSpec {
        channel: DissipatorChannel::IndividualDephasing,
        gamma: 0.1,
    }];
    let h = build_hamiltonian(&model, &space).unwrap();
    let cluster = thermal_cluster(2, 0.5);
    let rho0 = tensor_density(&cluster, &thermal_field(3, 0.5));
    let err = evolve(&model, &h, &rho0, 0.5, &IntegratorConfig::default()).unwrap_err();
    assert!(matches!(err, Error::RepresentationMismatch { .. }));
}

#[test]
fn negative_duration_rejected() {
    let rho = thermal_field(3, 0.5);
    let model = SystemModel::default();
    let err = evolve_free_field(&model, &rho, -1.0, &IntegratorConfig::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
}

#[test]
fn collective_and_product_representations_agree() {
    // same physics integrated in the (N+1)-dim symmetric space and the 2^N
    // product space, compared through the reduced field state
    let n_max = 4;
    let model = SystemModel::default();
    let field = thermal_field(n_max, 0.5);

    let coll_space = composite(2, n_max);
    let h_coll = build_hamiltonian(&model, &coll_space).unwrap();
    let coll_cluster =
        rotate_cluster(&thermal_cluster(2, 0.001), &RotationParams::default()).unwrap();
    let rho0 = tensor_density(&coll_cluster, &field);
    let out_coll = evolve(&model, &h_coll, &rho0, 1.0, &IntegratorConfig::default()).unwrap();
    let field_coll = crate::hilbert::partial_trace(&out_coll, 1).unwrap();

    let prod_atoms = HilbertSpace::product_spin(2).unwrap();
    let prod_space =
        HilbertSpace::composite(vec![prod_atoms.clone(), HilbertSpace::fock(n_max)]).unwrap();
    let h_prod = build_hamiltonian(&model, &prod_space).unwrap();
    let prod_ops = make_product_spin_ops(&prod_atoms).unwrap();
    let h_atom = OperatorMatrix::new(prod_atoms.clone(), prod_ops.z_sum.entries().clone()).unwrap();
    let prod_thermal = thermal_state(
        &prod_atoms,
        &ThermalParams::new(0.001, 1.0).unwrap(),
        &h_atom,
    )
    .unwrap();
    let prod_cluster = rotate_cluster(&prod_thermal, &RotationParams::default()).unwrap();
    let rho0_prod = tensor_density(&prod_cluster, &field);
    let out_prod = evolve(&model, &h_prod, &rho0_prod, 1.0, &IntegratorConfig::default()).unwrap();
    let field_prod = crate::hilbert::partial_trace(&out_prod, 1).unwrap();

    assert!(linalg::max_abs(&(field_coll.entries() - field_prod.entries())) < 1e-9);
}

