use narrowcap::geometry::{DomainSpec, Point2, TrapSpec};
use narrowcap::montecarlo::{compare_gmfpt, WalkerConfig};
use std::time::Instant;

fn main() {
    let xi = Point2::new(0.85, 0.0);
    let t_rad = TrapSpec::new(xi, 3.0, 1.0, 0.04, 0.0).unwrap();
    let t_tan = TrapSpec::new(xi, 3.0, 1.0, 0.04, std::f64::consts::FRAC_PI_2).unwrap();
    let cfg = WalkerConfig::new(3.0e-5, 30_000_000, 2024, 600_000).unwrap();
    let t0 = Instant::now();
    let cmp = compare_gmfpt(&DomainSpec::UnitDisk, &t_rad, &t_tan, 1.0, &cfg).unwrap();
    println!(
        "DECISIVE dt 3e-5 n 6e5: diff {:.6} +- {:.6} (z = {:.2}), means {:.5}/{:.5}, pairs {}, wall {:.0}s",
        cmp.diff_mean, cmp.diff_std_error, cmp.diff_mean / cmp.diff_std_error,
        cmp.first.mean, cmp.second.mean, cmp.n_pairs, t0.elapsed().as_secs_f64()
    );
}
