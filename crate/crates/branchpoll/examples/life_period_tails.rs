//! Power-law tail of the final product accumulated over life periods.
//!
//! Simulates life periods of a subcritical branching process with
//! immigration in a random environment, fits the Hill index of the
//! accumulated product (it should match the environment's kappa), probes
//! the moment dichotomy around kappa, and shows that the life-period
//! length itself is light-tailed.
//!
//!     cargo run --release --example life_period_tails

use branchpoll::analysis::{kappa, McParams};
use branchpoll::branching::{simulate_life_period, ProcessConfig, ProcessMode};
use branchpoll::env::{
    AmountLaw, CountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, OffspringLaw,
};
use branchpoll::experiment::run_replicates;
use branchpoll::stats::{hill_estimator, moment_probe, SampleSet};
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
    let kappa_ref = kappa(&env, &McParams { tol: 1e-6, ..McParams::default() }, StreamKey::new(1))
        .value()
        .expect("finite kappa");

    let replicates = 1_000_000u64;
    let cfg = ProcessConfig::new(env, ProcessMode::Mbpifpre).with_generation_cap(100_000);
    let records = run_replicates(replicates, StreamKey::new(11).child(4), |_, rng| {
        simulate_life_period(&cfg, rng)
    })
    .expect("simulation");

    let censored = records.iter().filter(|r| r.censored).count();
    let theta: Vec<f64> = records.iter().filter(|r| !r.censored).map(|r| r.theta_total).collect();
    let mean_upsilon =
        records.iter().map(|r| r.upsilon as f64).sum::<f64>() / records.len() as f64;
    println!("{replicates} life periods ({censored} censored), mean length {mean_upsilon:.2}");

    let set = SampleSet::new(theta, censored, "life periods", 11);
    let fit = hill_estimator(&set, None).unwrap();
    println!(
        "hill index of accumulated product: {:.4} (CI {:.4} .. {:.4}) at k = {}",
        fit.hill_index, fit.ci.0, fit.ci.1, fit.k_used
    );
    println!("environment kappa:                 {kappa_ref:.4}");
    println!("hill plot flat over a decade: {}", fit.flat_decade);

    println!("\nmoment dichotomy (finite below kappa, infinite above):");
    for probe in moment_probe(&set, &[0.5 * kappa_ref, 1.5 * kappa_ref]) {
        println!(
            "  E Theta^{:.3}: prefix means {:.4e} / {:.4e} / {:.4e} -> {}",
            probe.x,
            probe.estimates[0],
            probe.estimates[1],
            probe.estimates[2],
            if probe.stable { "stable (finite)" } else { "growing (infinite)" }
        );
    }

    // Life-period lengths decay exponentially; print the log-CCDF.
    println!("\nP(Upsilon > t):");
    let n = records.len() as f64;
    for t in [5u64, 10, 15, 20, 25, 30] {
        let p = records.iter().filter(|r| r.upsilon > t).count() as f64 / n;
        println!("  t = {t:>2}: {p:.4}");
    }
}
