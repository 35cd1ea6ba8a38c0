use sr_otto::lindblad::{HamiltonianKind, IntegratorConfig};
use sr_otto::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

fn main() {
    let atoms: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let injections: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let n_max: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(30);
    let rel_tol: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(1e-6);
    let mut config = ProtocolConfig {
        atoms,
        num_injections: injections,
        n_max,
        integrator: IntegratorConfig {
            rel_tol,
            abs_tol: 1e-10,
            ..IntegratorConfig::default()
        },
        ..ProtocolConfig::default()
    };
    config.model.hamiltonian_kind = HamiltonianKind::Dicke;
    config.model.g = 0.36;
    let t0 = std::time::Instant::now();
    let series = run_ignition(&config).unwrap();
    let elapsed = t0.elapsed();
    let last = series.per_cycle.last().unwrap().1;
    // last-quarter drift of cycle-end values
    let q = series.per_cycle.len() * 3 / 4;
    let early = series.per_cycle[q].1;
    println!(
        "DICKE N={atoms} M={injections} n_max={n_max}: final <n> = {last:.4}, drift_last_quarter = {:.3}%, trunc={}, wall = {elapsed:?}",
        100.0 * (last - early).abs() / last,
        series.truncation_flag
    );
    if injections >= 50 {
        let stats = steady_state_stats(&series, &config).unwrap();
        println!(
            "  steady: <n>_ss = {:.4}, T_eff = {:.4} (T_c + N^2 = {:.1}), std = {:.4}",
            stats.mean_n_ss, stats.t_eff_ss, 0.5 + (atoms * atoms) as f64, stats.std_n
        );
    }
}
