//! The polling-to-branching correspondence, checked in distribution.
//!
//! The final product accumulated over a generalized busy period of a
//! branching-type polling system has the same law as the final product
//! accumulated over a life period of the associated branching process with
//! immigration. This example simulates both sides on matched configurations
//! and compares them with a two-sample Kolmogorov-Smirnov test.
//!
//!     cargo run --release --example polling_equivalence

use branchpoll::branching::{simulate_life_period, Initial, ProcessConfig, ProcessMode};
use branchpoll::env::AmountLaw;
use branchpoll::experiment::run_replicates;
use branchpoll::matrix::Matrix;
use branchpoll::polling::map::{
    CycleDistribution, CycleLaw, Discipline, PollingCycleParams, ProductMode,
};
use branchpoll::polling::sim::{run_generalized_busy_period, PollingConfig};
use branchpoll::stats::{ks_distance, SampleSet};
use branchpoll::StreamKey;

fn main() {
    // Asymmetric two-station system: cross arrivals, routing with feedback,
    // exhaustive service at station 1 and gated at station 2.
    let tuple = |scale: f64| {
        PollingCycleParams::new(
            Matrix::from_rows(&[
                vec![0.25 * scale, 0.30 * scale],
                vec![0.10 * scale, 0.15 * scale],
            ]),
            Matrix::from_rows(&[vec![0.10, 0.25], vec![0.20, 0.05]]),
            vec![0.7, 0.6],
            Matrix::from_rows(&[vec![0.1, 0.2], vec![0.25, 0.15]]),
            vec![AmountLaw::Exponential { mean: 0.8 }, AmountLaw::Exponential { mean: 1.1 }],
            vec![AmountLaw::Exponential { mean: 0.4 }, AmountLaw::Exponential { mean: 0.6 }],
        )
        .unwrap()
    };
    let disciplines = vec![Discipline::Exhaustive, Discipline::Gated];
    let law = |scale| {
        CycleLaw::new(tuple(scale), disciplines.clone(), ProductMode::ServiceTime).unwrap()
    };
    let cycles = CycleDistribution::new(vec![(0.7, law(0.6)), (0.3, law(1.4))]).unwrap();

    let n = 20_000u64;
    let pcfg = PollingConfig::new(cycles.clone()).with_caps(100_000, 10_000_000);
    let key = StreamKey::new(7);
    let polling = run_replicates(n, key.child(1), |_, rng| {
        run_generalized_busy_period(&pcfg, rng)
    })
    .expect("polling simulation");

    // Associated branching process: one type per station, started by a
    // single type-1 particle (the customer that opens the busy period).
    let assoc = cycles.associated_environment(0).unwrap();
    let bcfg = ProcessConfig::new(assoc, ProcessMode::Mbpifpre)
        .with_initial(Initial::Fixed { v: vec![1, 0], theta: 0.0 })
        .with_generation_cap(100_000);
    let branching =
        run_replicates(n, key.child(2), |_, rng| simulate_life_period(&bcfg, rng))
            .expect("branching simulation");

    let pset = SampleSet::new(
        polling.iter().filter(|r| !r.censored).map(|r| r.theta_p).collect(),
        polling.iter().filter(|r| r.censored).count(),
        "generalized busy periods",
        7,
    );
    let bset = SampleSet::new(
        branching.iter().filter(|r| !r.censored).map(|r| r.theta_total).collect(),
        branching.iter().filter(|r| r.censored).count(),
        "life periods",
        7,
    );
    println!("polling:   {} periods, mean product {:.4}", pset.len(), pset.mean());
    println!("branching: {} periods, mean product {:.4}", bset.len(), bset.mean());

    let ks = ks_distance(&pset, &bset).unwrap();
    println!("two-sample KS: D = {:.5}, p = {:.4}", ks.statistic, ks.p_value);
    if ks.p_value > 0.01 {
        println!("the two distributions are statistically indistinguishable");
    } else {
        println!("warning: distributions differ more than sampling noise explains");
    }
}
