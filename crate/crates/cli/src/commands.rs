//! Subcommand implementations. Each command writes machine-readable
//! artifacts into the output directory and finishes with a manifest.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sr_otto::cost::{self, CostParams};
use sr_otto::fitting::{
    fit_quadratic_scaling, fit_thermal_coherent_state, xi_parameter_study, ScalingFit, TCSFit,
    XiStudy,
};
use sr_otto::lindblad::HamiltonianKind;
use sr_otto::otto::{
    bose_occupation, effective_temperature, levels_for_tail, work_curve,
    work_curve_from_occupations, work_from_photon_numbers, OttoCycleSpec,
};
use sr_otto::protocol::{
    decoherence_sweep, ignition_file_name, run_ignition, steady_state_stats, ProtocolConfig,
    SteadyStateStats, TimeSeries,
};
use sr_otto::{Error, Result};

use crate::config::RunConfig;
use crate::output::{CsvCell, RunRecorder};

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidArgument(format!("i/o error: {e}"))
}

fn write_series_csv(
    rec: &mut RunRecorder,
    name: &str,
    series: &TimeSeries,
) -> Result<()> {
    rec.write_csv(
        name,
        "t,mean_n,T_eff",
        series.samples.iter().map(|s| {
            vec![
                CsvCell::Float(s.t),
                CsvCell::Float(s.mean_n),
                CsvCell::Float(s.t_eff),
            ]
        }),
    )
    .map_err(io_err)?;
    Ok(())
}

fn run_many(configs: &[ProtocolConfig]) -> Result<Vec<TimeSeries>> {
    configs
        .par_iter()
        .map(|cfg| {
            run_ignition(cfg).map_err(|e| {
                e.in_context(format!(
                    "ignition N = {}, g = {}, kappa = {}",
                    cfg.atoms, cfg.model.g, cfg.model.kappa
                ))
            })
        })
        .collect()
}

/// Per-run record stored in scaling/ignition summaries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub atoms: usize,
    pub stats: SteadyStateStats,
    pub truncation_flag: bool,
    /// Diagonal of the steady (final) field state in the Fock basis.
    pub final_diag: Vec<f64>,
}

fn run_record(cfg: &ProtocolConfig, series: &TimeSeries) -> Result<RunRecord> {
    let stats = steady_state_stats(series, cfg)?;
    let dim = cfg.n_max + 1;
    let final_diag = (0..dim)
        .map(|n| series.final_field_state.entries()[(n, n)].re)
        .collect();
    Ok(RunRecord {
        atoms: cfg.atoms,
        stats,
        truncation_flag: series.truncation_flag,
        final_diag,
    })
}

pub fn cmd_ignition(config: &RunConfig) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "ignition").map_err(io_err)?;
    let configs: Vec<ProtocolConfig> = config
        .protocol
        .atoms
        .iter()
        .map(|&n| config.protocol_config(n))
        .collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    rec.stage("runs");
    let series = run_many(&configs)?;
    rec.stage("outputs");
    let mut records = Vec::new();
    for (cfg, s) in configs.iter().zip(&series) {
        write_series_csv(&mut rec, &ignition_file_name(cfg), s)?;
        if cfg.num_injections >= 50 {
            records.push(run_record(cfg, s)?);
        }
    }
    rec.write_json("ignition_summary.json", &records)
        .map_err(io_err)?;
    rec.finish(config).map_err(io_err)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingSummary {
    pub t_c: f64,
    pub mean_n_c: f64,
    pub points: Vec<RunRecord>,
    pub mean_n_fit_pinned: ScalingFit,
    pub mean_n_fit_free: ScalingFit,
    pub t_eff_fit_pinned: ScalingFit,
    pub t_eff_fit_free: ScalingFit,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi_study: Option<XiStudy>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tcs_fits: Option<Vec<TcsRecord>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TcsRecord {
    pub atoms: usize,
    pub alpha_abs_sq: f64,
    pub temperature: f64,
    pub fidelity: f64,
}

fn tcs_record(atoms: usize, fit: &TCSFit) -> TcsRecord {
    TcsRecord {
        atoms,
        alpha_abs_sq: fit.alpha.norm_sqr(),
        temperature: fit.temperature,
        fidelity: fit.fidelity_value,
    }
}

fn scaling_summary(config: &RunConfig, with_xi_study: bool) -> Result<(ScalingSummary, Vec<(ProtocolConfig, TimeSeries)>)> {
    let configs: Vec<ProtocolConfig> = config
        .sweep
        .atoms
        .iter()
        .map(|&n| config.protocol_config(n))
        .collect();
    for cfg in &configs {
        cfg.validate()?;
        if cfg.num_injections < 50 {
            return Err(Error::InsufficientData(
                "scaling needs at least 50 injections per run".into(),
            ));
        }
    }
    let series = run_many(&configs)?;
    let mut points = Vec::new();
    for (cfg, s) in configs.iter().zip(&series) {
        points.push(run_record(cfg, s)?);
    }
    let mean_n_c = bose_occupation(config.protocol.t_c, config.physics.omega_f);
    let n_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.atoms as f64, p.stats.mean_n_ss))
        .collect();
    let t_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.atoms as f64, p.stats.t_eff_ss))
        .collect();
    let mean_n_fit_pinned = fit_quadratic_scaling(&n_points, Some(mean_n_c))?;
    let mean_n_fit_free = fit_quadratic_scaling(&n_points, None)?;
    let t_eff_fit_pinned = fit_quadratic_scaling(&t_points, Some(config.protocol.t_c))?;
    let t_eff_fit_free = fit_quadratic_scaling(&t_points, None)?;

    let mut tcs_fits = Vec::new();
    for (cfg, s) in configs.iter().zip(&series) {
        let fit = fit_thermal_coherent_state(&s.final_field_state, cfg.model.omega_f, false)?;
        tcs_fits.push(tcs_record(cfg.atoms, &fit));
    }

    let xi_study = if with_xi_study {
        Some(xi_parameter_study(
            &config.protocol_config(config.protocol.atoms[0]),
            &config.sweep.g,
            &config.sweep.kappa,
        )?)
    } else {
        None
    };

    Ok((
        ScalingSummary {
            t_c: config.protocol.t_c,
            mean_n_c,
            points,
            mean_n_fit_pinned,
            mean_n_fit_free,
            t_eff_fit_pinned,
            t_eff_fit_free,
            xi_study,
            tcs_fits: Some(tcs_fits),
        },
        configs.into_iter().zip(series).collect(),
    ))
}

pub fn cmd_scaling(config: &RunConfig, with_xi_study: bool) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "scaling").map_err(io_err)?;
    rec.stage("runs");
    let (summary, runs) = scaling_summary(config, with_xi_study)?;
    rec.stage("outputs");
    for (cfg, series) in &runs {
        write_series_csv(&mut rec, &ignition_file_name(cfg), series)?;
    }
    rec.write_csv(
        "scaling.csv",
        "atoms,mean_n_ss,T_eff_ss,std_n",
        summary.points.iter().map(|p| {
            vec![
                CsvCell::Int(p.atoms as i64),
                CsvCell::Float(p.stats.mean_n_ss),
                CsvCell::Float(p.stats.t_eff_ss),
                CsvCell::Float(p.stats.std_n),
            ]
        }),
    )
    .map_err(io_err)?;
    rec.write_json("scaling_fits.json", &summary).map_err(io_err)?;
    rec.finish(config).map_err(io_err)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OttoPerN {
    pub atoms: usize,
    pub t_h: f64,
    /// Work at the smallest grid frequency from the spectral sums with a
    /// thermal hot distribution.
    pub w_max_thermal_sums: f64,
    /// Work at the smallest grid frequency from the photon-number difference
    /// (exact energy bookkeeping; the headline figure).
    pub w_max_photon_diff: f64,
    /// Same sums evaluated with the raw diagonal of the steady field state.
    pub w_max_raw_diag: f64,
    pub efficiency_at_min: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OttoSummary {
    pub omega_l_min: f64,
    pub per_n: Vec<OttoPerN>,
    /// `W_max = c N^2` fit (offset pinned at zero) of the photon-difference
    /// work.
    pub wmax_fit: ScalingFit,
}

fn load_or_build_scaling(config: &RunConfig) -> Result<ScalingSummary> {
    let path = config.output_dir.join("scaling_fits.json");
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(io_err)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("cannot parse {}: {e}", path.display())))
    } else {
        Ok(scaling_summary(config, false)?.0)
    }
}

pub fn cmd_otto(config: &RunConfig) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "otto").map_err(io_err)?;
    rec.stage("scaling-input");
    let summary = load_or_build_scaling(config)?;
    rec.stage("curves");
    let grid = config.otto.omega_l.values()?;
    let mut sorted_grid = grid.clone();
    sorted_grid.sort_by(f64::total_cmp);
    let omega_l_min = sorted_grid[0];

    let mut per_n = Vec::new();
    let mut wmax_points = Vec::new();
    for point in &summary.points {
        let t_h = effective_temperature(point.stats.mean_n_ss, 1.0)?;
        let n_levels = if config.otto.n_levels > 0 {
            config.otto.n_levels
        } else {
            levels_for_tail(t_h, 1.0, 1e-9).max(point.final_diag.len())
        };
        let curve = work_curve(point.stats.mean_n_ss, summary.t_c, n_levels, &grid)?;
        rec.write_csv(
            &format!("otto_N{}.csv", point.atoms),
            "omega_L,q_in,q_out,work,efficiency,positive_work",
            curve.iter().map(|r| {
                vec![
                    CsvCell::Float(r.omega_l),
                    CsvCell::Float(r.q_in),
                    CsvCell::Float(r.q_out),
                    CsvCell::Float(r.work),
                    match r.efficiency {
                        Some(e) => CsvCell::Float(e),
                        None => CsvCell::Text(String::new()),
                    },
                    CsvCell::Bool(r.positive_work),
                ]
            }),
        )
        .map_err(io_err)?;

        let spec = OttoCycleSpec::new(omega_l_min, t_h, summary.t_c, n_levels)?;
        let (w_photon, eta) =
            work_from_photon_numbers(&spec, point.stats.mean_n_ss, summary.mean_n_c);
        let w_sums = curve
            .iter()
            .find(|r| r.omega_l == omega_l_min)
            .map(|r| r.work)
            .unwrap_or(f64::NAN);
        // raw steady-state diagonal as the hot distribution
        let mut p_h = point.final_diag.clone();
        let raw_sum: f64 = p_h.iter().sum();
        for v in &mut p_h {
            *v = v.max(0.0) / raw_sum;
        }
        let raw = work_curve_from_occupations(&p_h, t_h, summary.t_c, &[omega_l_min])?;
        per_n.push(OttoPerN {
            atoms: point.atoms,
            t_h,
            w_max_thermal_sums: w_sums,
            w_max_photon_diff: w_photon,
            w_max_raw_diag: raw[0].work,
            efficiency_at_min: eta,
        });
        wmax_points.push((point.atoms as f64, w_photon));
    }
    let wmax_fit = fit_quadratic_scaling(&wmax_points, Some(0.0))?;
    rec.write_json(
        "otto_fit.json",
        &OttoSummary {
            omega_l_min,
            per_n,
            wmax_fit,
        },
    )
    .map_err(io_err)?;
    rec.finish(config).map_err(io_err)?;
    Ok(())
}

pub fn cmd_decoherence(config: &RunConfig) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "decoherence").map_err(io_err)?;
    let gammas = config.gamma_grid();
    rec.stage("sweeps");
    let mut rows = Vec::new();
    for &atoms in &config.protocol.atoms {
        let base = config.protocol_config(atoms);
        base.validate()?;
        let points = decoherence_sweep(&base, &gammas, &config.sweep.channels)?;
        for p in points {
            rows.push((p.gamma, p.channel.label().to_string(), atoms, p.stats));
        }
    }
    rec.stage("outputs");
    rec.write_csv(
        "decoherence.csv",
        "gamma,channel,atoms,mean_n_ss,T_eff_ss",
        rows.iter().map(|(gamma, channel, atoms, stats)| {
            vec![
                CsvCell::Float(*gamma),
                CsvCell::Text(channel.clone()),
                CsvCell::Int(*atoms as i64),
                CsvCell::Float(stats.mean_n_ss),
                CsvCell::Float(stats.t_eff_ss),
            ]
        }),
    )
    .map_err(io_err)?;
    rec.finish(config).map_err(io_err)?;
    Ok(())
}

/// Fock truncation sized for the predicted Dicke steady state
/// `T_eff = T_c + N^2`.
pub fn dicke_n_max(t_c: f64, atoms: usize) -> usize {
    let predicted = bose_occupation(t_c + (atoms * atoms) as f64, 1.0);
    (predicted + 10.0 * predicted.sqrt() + 15.0).ceil() as usize
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DickeSummary {
    pub g: f64,
    pub points: Vec<RunRecord>,
    /// Free-exponent fit of `T_eff,ss - T_c` against `N` (offset pinned at
    /// `T_c` before subtracting).
    pub t_eff_fit: ScalingFit,
}

pub fn cmd_dicke(config: &RunConfig) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "dicke").map_err(io_err)?;
    let mut configs = Vec::new();
    for &atoms in &config.protocol.atoms {
        let mut cfg = config.protocol_config(atoms);
        cfg.model.hamiltonian_kind = HamiltonianKind::Dicke;
        cfg.n_max = cfg.n_max.max(dicke_n_max(cfg.t_c, atoms));
        cfg.validate()?;
        if cfg.num_injections < 50 {
            return Err(Error::InsufficientData(
                "dicke needs at least 50 injections per run".into(),
            ));
        }
        configs.push(cfg);
    }
    rec.stage("runs");
    let series = run_many(&configs)?;
    rec.stage("outputs");
    let mut points = Vec::new();
    for (cfg, s) in configs.iter().zip(&series) {
        write_series_csv(&mut rec, &format!("dicke_{}", ignition_file_name(cfg)), s)?;
        points.push(run_record(cfg, s)?);
    }
    let t_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.atoms as f64, p.stats.t_eff_ss))
        .collect();
    let t_eff_fit = fit_quadratic_scaling(&t_points, Some(config.protocol.t_c))?;
    rec.write_csv(
        "dicke.csv",
        "atoms,mean_n_ss,T_eff_ss,std_n",
        points.iter().map(|p| {
            vec![
                CsvCell::Int(p.atoms as i64),
                CsvCell::Float(p.stats.mean_n_ss),
                CsvCell::Float(p.stats.t_eff_ss),
                CsvCell::Float(p.stats.std_n),
            ]
        }),
    )
    .map_err(io_err)?;
    rec.write_json(
        "dicke_fit.json",
        &DickeSummary {
            g: configs[0].model.g,
            points,
            t_eff_fit,
        },
    )
    .map_err(io_err)?;
    rec.finish(config).map_err(io_err)?;
    Ok(())
}

#[derive(Serialize)]
struct CostSummary {
    report: cost::CostReport,
    work_source: String,
}

pub fn cmd_cost(config: &RunConfig) -> Result<()> {
    let mut rec = RunRecorder::new(&config.output_dir, "cost").map_err(io_err)?;
    let params = CostParams::from_reduced(
        config.cost.omega_si,
        config.cost.gamma_sp,
        config.cost.inv_tau_gamma,
        config.cost.divergence,
    )?;
    let atoms = config.protocol.atoms[0];
    let clusters = config.protocol.num_injections;

    // engine work output: prefer the otto artifacts, fall back to the
    // quadratic-scaling prediction
    let otto_path = config.output_dir.join("otto_fit.json");
    let (work, source) = if otto_path.exists() {
        let text = std::fs::read_to_string(&otto_path).map_err(io_err)?;
        let summary: OttoSummary = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("cannot parse otto_fit.json: {e}")))?;
        let per_n = summary
            .per_n
            .iter()
            .find(|p| p.atoms == atoms)
            .or_else(|| summary.per_n.first())
            .ok_or_else(|| Error::InsufficientData("otto_fit.json has no entries".into()))?;
        (per_n.w_max_photon_diff, "otto-output".to_string())
    } else {
        let grid = config.otto.omega_l.values()?;
        let omega_l_min = grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let predicted = bose_occupation(config.protocol.t_c, config.physics.omega_f)
            + 0.095 * (atoms * atoms) as f64;
        let mean_n_c = bose_occupation(config.protocol.t_c, config.physics.omega_f);
        (
            (1.0 - omega_l_min) * (predicted - mean_n_c),
            "scaling-prediction".to_string(),
        )
    };

    let report = cost::total_cost_report(&params, atoms, clusters, work)?;
    rec.stage("outputs");
    rec.write_json(
        "cost_report.json",
        &CostSummary {
            report,
            work_source: source.clone(),
        },
    )
    .map_err(io_err)?;

    println!("coherence generation cost");
    println!(
        "  pulse energy U_p    = {:.4} hbar*omega ({:.4e} J at omega = {:.4e} rad/s)",
        report.pulse_energy_hbar_omega,
        report.pulse_energy_joules.unwrap_or(f64::NAN),
        config.cost.omega_si,
    );
    println!(
        "  per cluster (N={})   = {:.4} hbar*omega",
        report.atoms, report.per_cluster_hbar_omega
    );
    println!(
        "  total (m={})       = {:.4} hbar*omega",
        report.clusters, report.total_hbar_omega
    );
    println!(
        "  work output         = {:.4} omega ({source})",
        report.work_output_omega
    );
    match report.ratio {
        Some(r) => println!("  cost / work         = {r:.1}"),
        None => println!("  cost / work         = undefined (no positive work)"),
    }
    rec.finish(config).map_err(io_err)?;
    Ok(())
}
