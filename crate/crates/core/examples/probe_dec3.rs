use sr_otto::lindblad::{DissipatorChannel, DissipatorSpec};
use sr_otto::protocol::{run_ignition, steady_state_stats, AtomRepresentation, ProtocolConfig};

fn main() {
    for gamma in [0.03f64, 0.18] {
        for channel in [
            DissipatorChannel::IndividualDephasing,
            DissipatorChannel::IndividualLowering,
        ] {
            let mut config = ProtocolConfig {
                atoms: 2,
                num_injections: 250,
                representation: AtomRepresentation::Product,
                ..ProtocolConfig::default()
            };
            config.model.atomic_dissipators = vec![DissipatorSpec { channel, gamma }];
            let series = run_ignition(&config).unwrap();
            let stats = steady_state_stats(&series, &config).unwrap();
            println!(
                "N=2 gamma={gamma:5} {:>22}: T_eff = {:.4}",
                channel.label(),
                stats.t_eff_ss
            );
        }
    }
}
