use sr_otto::fitting::fit_quadratic_scaling;
use sr_otto::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

fn xi_at(g: f64, kappa: f64) -> f64 {
    let points: Vec<(f64, f64)> = [2usize, 3, 4]
        .iter()
        .map(|&atoms| {
            let mut config = ProtocolConfig {
                atoms,
                num_injections: 250,
                ..ProtocolConfig::default()
            };
            config.model.g = g;
            config.model.kappa = kappa;
            let series = run_ignition(&config).unwrap();
            let stats = steady_state_stats(&series, &config).unwrap();
            (atoms as f64, stats.t_eff_ss)
        })
        .collect();
    fit_quadratic_scaling(&points, Some(0.5)).unwrap().coefficient
}

fn main() {
    let xi_g_lo = xi_at(0.10, 0.03);
    let xi_g_hi = xi_at(0.30, 0.03);
    let p_g = (xi_g_hi / xi_g_lo).ln() / (0.30f64 / 0.10).ln();
    println!("xi(g=0.10) = {xi_g_lo:.5}, xi(g=0.30) = {xi_g_hi:.5}, endpoint exponent = {p_g:.3}");
    let xi_k_lo = xi_at(0.19, 0.01);
    let xi_k_hi = xi_at(0.19, 0.10);
    let p_k = (xi_k_hi / xi_k_lo).ln() / (0.10f64 / 0.01).ln();
    println!("xi(k=0.01) = {xi_k_lo:.5}, xi(k=0.10) = {xi_k_hi:.5}, endpoint exponent = {p_k:.3}");
}
