use sr_otto::lindblad::{DissipatorChannel, DissipatorSpec};
use sr_otto::protocol::{run_ignition, steady_state_stats, ProtocolConfig};

fn main() {
    for atoms in [2usize, 3] {
        for gamma in [0.03, 0.09, 0.18] {
            for channel in [
                DissipatorChannel::CollectiveDephasing,
                DissipatorChannel::CollectiveLowering,
            ] {
                let mut config = ProtocolConfig {
                    atoms,
                    num_injections: 250,
                    ..ProtocolConfig::default()
                };
                config.model.atomic_dissipators = vec![DissipatorSpec { channel, gamma }];
                let series = run_ignition(&config).unwrap();
                let stats = steady_state_stats(&series, &config).unwrap();
                println!(
                    "N={atoms} gamma={gamma:5} {:>22}: T_eff = {:.4}",
                    channel.label(),
                    stats.t_eff_ss
                );
            }
        }
    }
}
