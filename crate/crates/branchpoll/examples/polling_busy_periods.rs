//! Busy-period tails of a polling system in a random environment.
//!
//! Two gated stations, exponential service and switch-over times, Poisson
//! arrivals; each cycle draws its parameter tuple afresh (calm with
//! probability 0.8, heavy with probability 0.2). Although every single
//! tuple is stable, the mixture is what produces a power-law busy period;
//! the Hill index of the busy-period length matches the tail index kappa of
//! the associated branching environment.
//!
//!     cargo run --release --example polling_busy_periods

use branchpoll::analysis::{kappa, McParams};
use branchpoll::env::AmountLaw;
use branchpoll::experiment::run_replicates;
use branchpoll::matrix::Matrix;
use branchpoll::polling::map::{
    CycleDistribution, CycleLaw, Discipline, PollingCycleParams, ProductMode,
};
use branchpoll::polling::sim::{run_busy_period, PollingConfig};
use branchpoll::stats::{hill_estimator, SampleSet};
use branchpoll::StreamKey;

fn tuple(service_mean: f64) -> PollingCycleParams {
    PollingCycleParams::new(
        Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
        Matrix::from_rows(&[vec![0.1, 0.1], vec![0.1, 0.1]]),
        vec![1.0, 1.0],
        Matrix::zeros(2),
        vec![
            AmountLaw::Exponential { mean: service_mean },
            AmountLaw::Exponential { mean: service_mean },
        ],
        vec![AmountLaw::Exponential { mean: 0.5 }, AmountLaw::Exponential { mean: 0.5 }],
    )
    .unwrap()
}

fn main() {
    let law = |mean| {
        CycleLaw::new(tuple(mean), vec![Discipline::Gated; 2], ProductMode::ServiceTime).unwrap()
    };
    let cycles = CycleDistribution::new(vec![(0.8, law(0.4)), (0.2, law(3.0))]).unwrap();

    // kappa of the associated branching environment (Monte Carlo on the
    // 2x2 mean-matrix products; short horizons keep it reliable).
    let assoc = cycles.associated_environment(0).unwrap();
    let mc = McParams { horizon: 5, replicates: 1_000_000, ..McParams::default() };
    let kappa_assoc = kappa(&assoc, &mc, StreamKey::new(4)).value().expect("finite kappa");

    let cfg = PollingConfig::new(cycles).with_caps(100_000, 10_000_000);
    let replicates = 1_000_000u64;
    let records =
        run_replicates(replicates, StreamKey::new(12), |_, rng| run_busy_period(&cfg, rng))
            .expect("simulation");
    let censored = records.iter().filter(|r| r.censored).count();
    let mean_services =
        records.iter().map(|r| r.n_services as f64).sum::<f64>() / records.len() as f64;
    println!("{replicates} busy periods ({censored} censored), mean services {mean_services:.1}");

    let set = SampleSet::new(
        records.iter().filter(|r| !r.censored).map(|r| r.theta_p).collect(),
        censored,
        "busy periods",
        12,
    );
    let fit = hill_estimator(&set, None).unwrap();
    println!(
        "hill index of busy-period length: {:.4} (CI {:.4} .. {:.4})",
        fit.hill_index, fit.ci.0, fit.ci.1
    );
    println!("kappa of associated environment:  {kappa_assoc:.4}");
}
