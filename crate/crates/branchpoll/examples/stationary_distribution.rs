//! Stationary behaviour of the population with immigration.
//!
//! In a subcritical environment the population with immigration has a
//! stationary law with positive mass at zero (the process empties
//! infinitely often). The probe samples the population at spaced
//! generations after burn-in; two disjoint sampling windows agree in total
//! variation.
//!
//!     cargo run --release --example stationary_distribution

use branchpoll::branching::{stationary_probe, tv_distance, ProcessConfig, ProcessMode};
use branchpoll::env::{
    AmountLaw, CountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, OffspringLaw,
};
use branchpoll::StreamKey;

fn main() {
    let atom = |a: f64| {
        EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Poisson(a)],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Bernoulli(0.5)],
                product: AmountLaw::Zero,
            },
        )
    };
    let env = EnvironmentDistribution::new(vec![(0.6, atom(0.5)), (0.4, atom(2.0))]).unwrap();
    let cfg = ProcessConfig::new(env, ProcessMode::Mbpifpre);

    let mut rng = StreamKey::new(20).rng();
    let first = stationary_probe(&cfg, 500, 200_000, 2, &mut rng).unwrap();
    let second = stationary_probe(&cfg, 0, 200_000, 2, &mut rng).unwrap();

    println!("P(V = 0) = {:.4} (first window), {:.4} (second)", first.p_zero, second.p_zero);
    println!("split-window total-variation distance: {:.4}", tv_distance(&first, &second));

    let mut head: Vec<(u64, u64)> = first
        .distribution
        .iter()
        .map(|(v, count)| (v[0], *count))
        .collect();
    head.sort();
    println!("\nstationary law of the population size (head):");
    for (v, count) in head.into_iter().take(8) {
        println!("  P(V = {v}) ~ {:.4}", count as f64 / first.n_samples as f64);
    }
}
