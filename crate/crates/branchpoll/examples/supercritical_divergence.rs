//! Busy periods of a supercritical polling system diverge.
//!
//! When the associated branching environment has a positive Lyapunov
//! exponent, the busy period is infinite with positive probability: a large
//! fraction of simulated busy periods never terminate and are censored at
//! the service cap.
//!
//!     cargo run --release --example supercritical_divergence

use branchpoll::env::AmountLaw;
use branchpoll::experiment::run_replicates;
use branchpoll::matrix::Matrix;
use branchpoll::polling::map::{
    CycleDistribution, CycleLaw, Discipline, PollingCycleParams, ProductMode,
};
use branchpoll::polling::sim::{run_busy_period, PollingConfig};
use branchpoll::StreamKey;

fn main() {
    let tuple = PollingCycleParams::new(
        Matrix::from_rows(&[vec![1.6, 0.8], vec![0.8, 1.6]]),
        Matrix::from_rows(&[vec![0.1, 0.1], vec![0.1, 0.1]]),
        vec![1.0, 1.0],
        Matrix::zeros(2),
        vec![AmountLaw::Exponential { mean: 1.0 }, AmountLaw::Exponential { mean: 1.0 }],
        vec![AmountLaw::Exponential { mean: 0.5 }, AmountLaw::Exponential { mean: 0.5 }],
    )
    .unwrap();
    let law = CycleLaw::new(tuple, vec![Discipline::Gated; 2], ProductMode::ServiceTime).unwrap();
    let radius = law.stats().a.spectral_radius().unwrap();
    println!(
        "mean offspring matrix spectral radius {:.3} (log = {:.3} > 0: supercritical)",
        radius,
        radius.ln()
    );

    let cycles = CycleDistribution::new(vec![(1.0, law)]).unwrap();
    let cfg = PollingConfig::new(cycles).with_caps(1_000_000, 100_000);
    let records =
        run_replicates(1000, StreamKey::new(13), |_, rng| run_busy_period(&cfg, rng))
            .expect("simulation");
    let censored = records.iter().filter(|r| r.censored).count();
    println!(
        "{censored}/1000 busy periods still running at the 100000-service cap \
         ({}% censored)",
        censored as f64 / 10.0
    );
    let finite: Vec<f64> =
        records.iter().filter(|r| !r.censored).map(|r| r.theta_p).collect();
    if !finite.is_empty() {
        println!(
            "finished periods: {} with mean length {:.2}",
            finite.len(),
            finite.iter().sum::<f64>() / finite.len() as f64
        );
    }
}
