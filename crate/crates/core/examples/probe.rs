use sr_otto::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

fn main() {
    let atoms: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let injections: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ProtocolConfig {
        atoms,
        num_injections: injections,
        ..ProtocolConfig::default()
    };
    let t0 = std::time::Instant::now();
    let series = run_ignition(&config).unwrap();
    let elapsed = t0.elapsed();
    let last = series.per_cycle.last().unwrap().1;
    println!(
        "N={atoms} M={injections}: final <n> = {last:.4}, truncation_flag={}, wall = {elapsed:?}",
        series.truncation_flag
    );
    if injections >= 50 {
        let stats = steady_state_stats(&series, &config).unwrap();
        println!(
            "  steady: <n>_ss = {:.4} (predict {:.4}), T_eff = {:.4}, std = {:.4}, cycles {}",
            stats.mean_n_ss,
            config.predicted_steady_mean_n(),
            stats.t_eff_ss,
            stats.std_n,
            stats.cycles_used
        );
    }
}
