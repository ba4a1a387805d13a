//! Tail of the total final product of an immigration-free process.
//!
//! Runs the no-immigration reduction from a single initial particle to
//! extinction and fits the tail of the total accumulated product; the index
//! matches the environment's kappa.
//!
//!     cargo run --release --example total_product_tails

use branchpoll::branching::{simulate_total_product, ProcessConfig, ProcessMode};
use branchpoll::env::{
    AmountLaw, CountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, OffspringLaw,
};
use branchpoll::experiment::run_replicates;
use branchpoll::stats::{empirical_ccdf, hill_estimator, SampleSet};
use branchpoll::StreamKey;

fn main() {
    let atom = |a: f64| {
        EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Poisson(a)],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Zero,
            },
        )
    };
    let env = EnvironmentDistribution::new(vec![(0.6, atom(0.5)), (0.4, atom(2.0))]).unwrap();
    let cfg = ProcessConfig::new(env, ProcessMode::Mbpfpre).with_generation_cap(100_000);

    let records = run_replicates(1_000_000, StreamKey::new(11).child(5), |_, rng| {
        simulate_total_product(&cfg, &[1], rng)
    })
    .expect("simulation");
    let censored = records.iter().filter(|r| r.censored).count();
    let phi: Vec<f64> = records.iter().filter(|r| !r.censored).map(|r| r.phi).collect();
    println!("1e6 runs to extinction ({censored} censored)");

    let set = SampleSet::new(phi, censored, "total product", 11);
    let fit = hill_estimator(&set, None).unwrap();
    println!(
        "hill index of total product: {:.4} (CI {:.4} .. {:.4}); kappa = log2(1.5) = {:.4}",
        fit.hill_index,
        fit.ci.0,
        fit.ci.1,
        1.5f64.log2()
    );

    println!("\nlog-log CCDF of the total product:");
    let grid: Vec<f64> = (0..8).map(|i| 4.0f64 * 4.0f64.powi(i)).collect();
    for (y, p) in empirical_ccdf(&set, Some(&grid)) {
        if p > 0.0 {
            println!("  P(Phi > {y:>8.0}) = {p:.2e}");
        }
    }
}
