use sr_otto::lindblad::{DissipatorChannel, DissipatorSpec};
use sr_otto::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

fn main() {
    let gamma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.18);
    let channel = match std::env::args().nth(2).as_deref() {
        Some("lower") => DissipatorChannel::CollectiveLowering,
        _ => DissipatorChannel::CollectiveDephasing,
    };
    let mut config = ProtocolConfig {
        num_injections: 250,
        ..ProtocolConfig::default()
    };
    config.model.atomic_dissipators = vec![DissipatorSpec { channel, gamma }];
    let t0 = std::time::Instant::now();
    let series = run_ignition(&config).unwrap();
    let stats = steady_state_stats(&series, &config).unwrap();
    println!(
        "N=2 gamma={gamma} {channel:?}: <n>_ss = {:.4}, T_eff = {:.4}, wall = {:?}",
        stats.mean_n_ss,
        stats.t_eff_ss,
        t0.elapsed()
    );
}
