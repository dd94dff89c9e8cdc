//! Runs the proposed scheme and the three baselines on the bundled scenario.
//! An optional argument overrides the trajectory trust radius in metres.
use secjam_core::ao::{self, AoConfig, AoResult};
use secjam_core::{baselines, Result, Scenario};

type Scheme = fn(&Scenario, &AoConfig) -> Result<AoResult>;

fn main() {
    let s = Scenario::table1();
    let mut cfg = AoConfig::default();
    cfg.traj.trust_radius = std::env::args().nth(1).map(|a| a.parse().expect("trust radius in metres"));
    let schemes: [(&str, Scheme); 4] = [
        ("proposed", ao::run),
        ("fixed", baselines::baseline_fixed_antenna),
        ("direct", baselines::baseline_direct_path),
        ("eve_oriented", baselines::baseline_eve_oriented),
    ];
    for (name, run) in schemes {
        let r = run(&s, &cfg).unwrap();
        println!(
            "{name:<13} SEE {:.6e}  secrecy {:.4}  energy {:.2} J  path {:.2} m  {} iterations in {:?}",
            r.report.see,
            r.report.sum_secrecy,
            r.report.total_energy,
            r.state.path_length(),
            r.trace.iterations.len() - 1,
            r.trace.wall_time,
        );
    }
}
