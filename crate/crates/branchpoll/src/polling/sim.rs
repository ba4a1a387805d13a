//! Discrete-event simulation of the physical polling system: one server
//! cycling over `m` stations with a fresh random parameter tuple each cycle,
//! gated or exhaustive service, and positive random switch-over times.
//!
//! Arrivals over a service or switch-over interval are generated as Poisson
//! counts at the end of the interval; every measured quantity here is a
//! count or a total duration, for which this is distributionally equivalent
//! to timestamped arrivals.

use crate::error::{Error, Result};
use crate::polling::map::{CycleDistribution, Discipline, ProductMode};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct PollingConfig {
    pub cycles: CycleDistribution,
    /// 0-based station the first customer arrives at.
    pub start_station: usize,
    pub max_cycles: u64,
    pub max_services: u64,
}

impl PollingConfig {
    pub fn new(cycles: CycleDistribution) -> Self {
        PollingConfig { cycles, start_station: 0, max_cycles: 100_000, max_services: 10_000_000 }
    }

    pub fn with_start_station(mut self, station: usize) -> Self {
        assert!(station < self.cycles.station_count());
        self.start_station = station;
        self
    }

    pub fn with_caps(mut self, max_cycles: u64, max_services: u64) -> Self {
        assert!(max_cycles >= 1 && max_services >= 1);
        self.max_cycles = max_cycles;
        self.max_services = max_services;
        self
    }
}

/// One simulated busy or generalized busy period.
#[derive(Clone, Debug, Default)]
pub struct PollingRecord {
    pub theta_p: f64,
    pub duration_services: f64,
    pub duration_switchover: f64,
    pub n_cycles: u64,
    pub n_services: u64,
    pub censored: bool,
}

/// Standard busy period: one customer arrives at the start station of an
/// idle system; the period ends at the first service completion that leaves
/// the whole system empty.
pub fn run_busy_period(config: &PollingConfig, rng: &mut ChaCha8Rng) -> Result<PollingRecord> {
    run(config, rng, false)
}

/// Generalized busy period: the server keeps cycling (switch-overs included)
/// through idle intermediate states; the period ends at the first arrival at
/// the start station, right after the switch-over into it, that finds the
/// system empty.
pub fn run_generalized_busy_period(
    config: &PollingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PollingRecord> {
    run(config, rng, true)
}

fn run(config: &PollingConfig, rng: &mut ChaCha8Rng, generalized: bool) -> Result<PollingRecord> {
    let m = config.cycles.station_count();
    let start = config.start_station;
    let mut queues = vec![0u64; m];
    queues[start] = 1;
    let mut rec = PollingRecord::default();

    'cycles: loop {
        if rec.n_cycles >= config.max_cycles {
            rec.censored = true;
            break;
        }
        let cycle = config.cycles.sample(rng).clone();
        let mode = cycle.mode();
        for s in 0..m {
            let i = (start + s) % m;
            let mut to_serve = match cycle.disciplines()[i] {
                Discipline::Gated => {
                    // Serve exactly the customers present on arrival; later
                    // arrivals and feedback stay behind the gate.
                    let gate = queues[i];
                    queues[i] = 0;
                    gate
                }
                Discipline::Exhaustive => 0, // drained below
            };
            loop {
                match cycle.disciplines()[i] {
                    Discipline::Gated => {
                        if to_serve == 0 {
                            break;
                        }
                        to_serve -= 1;
                    }
                    Discipline::Exhaustive => {
                        if queues[i] == 0 {
                            break;
                        }
                        queues[i] -= 1;
                    }
                }
                if rec.n_services >= config.max_services {
                    rec.censored = true;
                    break 'cycles;
                }
                let stage = cycle.sample_service_stage(i, rng)?;
                rec.n_services += 1;
                rec.duration_services += stage.duration;
                rec.theta_p += match mode {
                    ProductMode::UnitPerService => 1.0,
                    _ => stage.duration,
                };
                // Arrivals and feedback at the served station itself land in
                // the queue: behind the gate under gated service (next
                // cycle), drained this visit under exhaustive service.
                for (j, &n) in stage.arrivals.iter().enumerate() {
                    queues[j] = queues[j].checked_add(n).ok_or(Error::CountOverflow)?;
                }
                if let Some(j) = stage.routed_to {
                    queues[j] = queues[j].checked_add(1).ok_or(Error::CountOverflow)?;
                }
                if !generalized && to_serve == 0 && queues.iter().all(|&q| q == 0) {
                    // System empty at a service completion: the standard
                    // busy period ends before any further switch-over.
                    break 'cycles;
                }
            }
            if cycle.disciplines()[i] == Discipline::Exhaustive {
                debug_assert_eq!(queues[i], 0, "exhaustive visit must drain the station");
            }
            let sw = cycle.sample_switchover(i, rng)?;
            rec.duration_switchover += sw.duration;
            if mode == ProductMode::ServicePlusSwitchover {
                rec.theta_p += sw.duration;
            }
            for (j, &n) in sw.arrivals.iter().enumerate() {
                queues[j] = queues[j].checked_add(n).ok_or(Error::CountOverflow)?;
            }
        }
        rec.n_cycles += 1;
        if generalized && queues.iter().all(|&q| q == 0) {
            // Idle right after the switch-over into the start station.
            break;
        }
    }
    Ok(rec)
}
