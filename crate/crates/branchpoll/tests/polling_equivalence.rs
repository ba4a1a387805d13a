//! Distributional equivalence between physical polling periods and the
//! associated branching process beyond the acceptance configuration:
//! asymmetric stations, exhaustive service, and a rotated start station.

use branchpoll::branching::{simulate_life_period, Initial, ProcessConfig, ProcessMode};
use branchpoll::env::AmountLaw;
use branchpoll::experiment::run_replicates;
use branchpoll::matrix::Matrix;
use branchpoll::polling::map::{CycleDistribution, CycleLaw, Discipline, PollingCycleParams, ProductMode};
use branchpoll::polling::sim::{run_generalized_busy_period, PollingConfig};
use branchpoll::stats::{ks_distance, SampleSet};
use branchpoll::StreamKey;

fn asymmetric_params(scale: f64) -> PollingCycleParams {
    PollingCycleParams::new(
        Matrix::from_rows(&[vec![0.25 * scale, 0.30 * scale], vec![0.10 * scale, 0.15 * scale]]),
        Matrix::from_rows(&[vec![0.10, 0.25], vec![0.20, 0.05]]),
        vec![0.7, 0.6],
        Matrix::from_rows(&[vec![0.1, 0.2], vec![0.25, 0.15]]),
        vec![AmountLaw::Exponential { mean: 0.8 }, AmountLaw::Exponential { mean: 1.1 }],
        vec![AmountLaw::Exponential { mean: 0.4 }, AmountLaw::Exponential { mean: 0.6 }],
    )
    .unwrap()
}

fn cycles(disciplines: Vec<Discipline>, mode: ProductMode) -> CycleDistribution {
    CycleDistribution::new(vec![
        (0.7, CycleLaw::new(asymmetric_params(0.6), disciplines.clone(), mode).unwrap()),
        (0.3, CycleLaw::new(asymmetric_params(1.4), disciplines, mode).unwrap()),
    ])
    .unwrap()
}

fn equivalence_check(dist: CycleDistribution, start: usize, seed: u64) {
    let n = 20_000u64;
    let pcfg = PollingConfig::new(dist.clone())
        .with_start_station(start)
        .with_caps(100_000, 10_000_000);
    let assoc = dist.associated_environment(start).unwrap();
    let mut v0 = vec![0u64; assoc.type_count()];
    v0[0] = 1; // type 1 is the start station after rotation
    let bcfg = ProcessConfig::new(assoc, ProcessMode::Mbpifpre)
        .with_initial(Initial::Fixed { v: v0, theta: 0.0 })
        .with_generation_cap(100_000);
    let key = StreamKey::new(seed);
    let prec = run_replicates(n, key.child(1), |_, rng| run_generalized_busy_period(&pcfg, rng))
        .unwrap();
    let brec =
        run_replicates(n, key.child(2), |_, rng| simulate_life_period(&bcfg, rng)).unwrap();
    let pset = SampleSet::new(
        prec.iter().filter(|r| !r.censored).map(|r| r.theta_p).collect(),
        prec.iter().filter(|r| r.censored).count(),
        "polling",
        seed,
    );
    let bset = SampleSet::new(
        brec.iter().filter(|r| !r.censored).map(|r| r.theta_total).collect(),
        brec.iter().filter(|r| r.censored).count(),
        "branching",
        seed,
    );
    let ks = ks_distance(&pset, &bset).unwrap();
    assert!(
        ks.p_value > 0.005,
        "start {start}: KS D = {} p = {} (means {} vs {})",
        ks.statistic,
        ks.p_value,
        pset.mean(),
        bset.mean()
    );
}

#[test]
fn gated_equivalence_with_routing_and_feedback() {
    equivalence_check(
        cycles(vec![Discipline::Gated; 2], ProductMode::ServiceTime),
        0,
        7001,
    );
}

#[test]
fn gated_equivalence_from_rotated_start_station() {
    equivalence_check(
        cycles(vec![Discipline::Gated; 2], ProductMode::ServiceTime),
        1,
        7002,
    );
}

#[test]
fn exhaustive_equivalence() {
    equivalence_check(
        cycles(vec![Discipline::Exhaustive; 2], ProductMode::ServiceTime),
        0,
        7003,
    );
}

#[test]
fn mixed_disciplines_with_switchover_product() {
    equivalence_check(
        cycles(
            vec![Discipline::Exhaustive, Discipline::Gated],
            ProductMode::ServicePlusSwitchover,
        ),
        0,
        7004,
    );
}

#[test]
fn generalized_period_duration_equals_theta_in_full_product_mode() {
    // With service plus switch-over as the final product, theta_P is the
    // wall-clock length of the generalized busy period.
    let dist = cycles(vec![Discipline::Gated; 2], ProductMode::ServicePlusSwitchover);
    let cfg = PollingConfig::new(dist).with_caps(100_000, 10_000_000);
    let key = StreamKey::new(7005);
    for rep in 0..200 {
        let rec = run_generalized_busy_period(&cfg, &mut key.child(rep).rng()).unwrap();
        let total = rec.duration_services + rec.duration_switchover;
        assert!((rec.theta_p - total).abs() < 1e-9 * (1.0 + total));
    }
}
