//! The multitype branching process with immigration and final product in a
//! random environment, its reductions, and life-period simulation.
//!
//! The Markov state is `(V(n); Theta(n))`: per-type counts plus the
//! accumulated final product. One step draws a fresh environment, replaces
//! every particle by an offspring draw of its type, accumulates every
//! particle's final product, and (in the full model) adds one immigration
//! draw. Replicates are embarrassingly parallel; each takes its own stream.

use crate::env::{EnvironmentDistribution, EnvironmentSample};
use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Which reduction of the full model to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessMode {
    /// Immigration and final product (the full model).
    Mbpifpre,
    /// Final product, no immigration.
    Mbpfpre,
    /// Plain multitype branching in random environment.
    Mbpre,
}

/// Starting condition for life periods and probes.
#[derive(Clone, Debug)]
pub enum Initial {
    /// Idle system: wait for the first nonzero immigration draw.
    Idle,
    /// Fixed start `(V(0), Theta(0))`.
    Fixed { v: Vec<u64>, theta: f64 },
}

#[derive(Clone, Debug)]
pub struct ProcessConfig {
    pub env: EnvironmentDistribution,
    pub mode: ProcessMode,
    pub initial: Initial,
    pub generation_cap: u64,
    pub record_trace: bool,
}

impl ProcessConfig {
    pub fn new(env: EnvironmentDistribution, mode: ProcessMode) -> Self {
        ProcessConfig { env, mode, initial: Initial::Idle, generation_cap: 100_000, record_trace: false }
    }

    pub fn with_initial(mut self, initial: Initial) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_generation_cap(mut self, cap: u64) -> Self {
        assert!(cap >= 1, "generation cap must be at least 1");
        self.generation_cap = cap;
        self
    }
}

/// The Markov state `(V(n); Theta(n))` at generation `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationState {
    pub v: Vec<u64>,
    pub theta: f64,
    pub generation: u64,
}

impl PopulationState {
    pub fn new(v: Vec<u64>, theta: f64) -> Self {
        PopulationState { v, theta, generation: 0 }
    }

    /// Total population `||V(n)||`.
    pub fn total(&self) -> u64 {
        self.v.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.v.iter().all(|&x| x == 0)
    }
}

/// Advance one generation under the given environment draw.
pub fn step(
    state: &PopulationState,
    env: &EnvironmentSample,
    mode: ProcessMode,
    rng: &mut ChaCha8Rng,
) -> Result<PopulationState> {
    let (mut v_next, offspring_product) = env
        .sample_offspring_total(&state.v, rng)
        .map_err(|e| tag_overflow(e, state.generation + 1))?;
    let mut delta = match mode {
        ProcessMode::Mbpre => 0.0,
        _ => offspring_product,
    };
    if mode == ProcessMode::Mbpifpre {
        let (eta, psi) = env.sample_immigration(rng)?;
        for (acc, x) in v_next.iter_mut().zip(&eta) {
            *acc = acc
                .checked_add(*x)
                .ok_or(Error::PopulationOverflow { generation: state.generation + 1 })?;
        }
        delta += psi;
    }
    debug_assert!(delta >= 0.0, "final product must be nondecreasing");
    Ok(PopulationState {
        v: v_next,
        theta: state.theta + delta,
        generation: state.generation + 1,
    })
}

fn tag_overflow(e: Error, generation: u64) -> Error {
    match e {
        Error::CountOverflow => Error::PopulationOverflow { generation },
        other => other,
    }
}

/// Outcome of one simulated life period.
#[derive(Clone, Debug)]
pub struct LifePeriodRecord {
    /// Life-period length: generations from the start until the population
    /// first returns to zero.
    pub upsilon: u64,
    /// Total final product accumulated over the period (including the
    /// starting immigration draw's product and the terminal epoch's).
    pub theta_total: f64,
    /// True when the generation cap was reached before extinction.
    pub censored: bool,
    /// Peak total population over the period.
    pub max_population: u64,
    /// Optional per-generation `(||V(n)||, delta Theta)` summary.
    pub trace: Option<Vec<(u64, f64)>>,
}

/// Simulate one life period: from an idle state, discard immigration draws
/// until the first nonzero one (whose product still counts), then run until
/// the population, immigration included, returns to zero or the cap is hit.
/// A `Fixed` initial state starts the period directly from `V(0)`.
pub fn simulate_life_period(config: &ProcessConfig, rng: &mut ChaCha8Rng) -> Result<LifePeriodRecord> {
    if config.mode != ProcessMode::Mbpifpre {
        return Err(Error::InvalidArgument(
            "life periods are defined for the immigration model".into(),
        ));
    }
    let mut state = match &config.initial {
        Initial::Idle => {
            if config.env.immigration_always_zero() {
                return Err(Error::ImmigrationAlwaysZero);
            }
            loop {
                let env = config.env.sample(rng);
                let (eta, psi) = env.sample_immigration(rng)?;
                if eta.iter().any(|&x| x > 0) {
                    break PopulationState::new(eta, psi);
                }
            }
        }
        Initial::Fixed { v, theta } => {
            if v.iter().all(|&x| x == 0) {
                return Err(Error::InvalidArgument("life period cannot start from an empty state".into()));
            }
            PopulationState::new(v.clone(), *theta)
        }
    };
    let mut trace = config.record_trace.then(Vec::new);
    let mut max_population = state.total();
    let mut steps = 0u64;
    loop {
        if steps >= config.generation_cap {
            return Ok(LifePeriodRecord {
                upsilon: steps,
                theta_total: state.theta,
                censored: true,
                max_population,
                trace,
            });
        }
        let env = config.env.sample(rng);
        let prev_theta = state.theta;
        state = step(&state, env, ProcessMode::Mbpifpre, rng)?;
        steps += 1;
        max_population = max_population.max(state.total());
        if let Some(t) = trace.as_mut() {
            t.push((state.total(), state.theta - prev_theta));
        }
        if state.is_empty() {
            return Ok(LifePeriodRecord {
                upsilon: steps,
                theta_total: state.theta,
                censored: false,
                max_population,
                trace,
            });
        }
    }
}

/// Outcome of a no-immigration run to extinction.
#[derive(Clone, Debug)]
pub struct TotalProductRecord {
    pub phi: f64,
    pub generations: u64,
    pub censored: bool,
    pub max_population: u64,
}

/// Total final product of the immigration-free process started from `z`,
/// run until extinction or the generation cap.
pub fn simulate_total_product(
    config: &ProcessConfig,
    z: &[u64],
    rng: &mut ChaCha8Rng,
) -> Result<TotalProductRecord> {
    if config.mode != ProcessMode::Mbpfpre {
        return Err(Error::InvalidArgument(
            "total-product runs are defined for the immigration-free model".into(),
        ));
    }
    if z.iter().all(|&x| x == 0) {
        return Err(Error::InvalidArgument("initial population must be nonzero".into()));
    }
    let mut state = PopulationState::new(z.to_vec(), 0.0);
    let mut max_population = state.total();
    let mut steps = 0u64;
    loop {
        if state.is_empty() {
            return Ok(TotalProductRecord {
                phi: state.theta,
                generations: steps,
                censored: false,
                max_population,
            });
        }
        if steps >= config.generation_cap {
            return Ok(TotalProductRecord {
                phi: state.theta,
                generations: steps,
                censored: true,
                max_population,
            });
        }
        let env = config.env.sample(rng);
        state = step(&state, env, ProcessMode::Mbpfpre, rng)?;
        steps += 1;
        max_population = max_population.max(state.total());
    }
}

/// Empirical law of `V(n)` sampled at spaced generations after burn-in.
#[derive(Clone, Debug)]
pub struct StationaryProbe {
    pub distribution: HashMap<Vec<u64>, u64>,
    pub n_samples: u64,
    pub p_zero: f64,
}

pub fn stationary_probe(
    config: &ProcessConfig,
    burn_in: u64,
    n_samples: u64,
    spacing: u64,
    rng: &mut ChaCha8Rng,
) -> Result<StationaryProbe> {
    if config.mode != ProcessMode::Mbpifpre {
        return Err(Error::InvalidArgument(
            "the stationary probe is defined for the immigration model".into(),
        ));
    }
    let spacing = spacing.max(1);
    let mut state = match &config.initial {
        Initial::Idle => PopulationState::new(vec![0; config.env.type_count()], 0.0),
        Initial::Fixed { v, theta } => PopulationState::new(v.clone(), *theta),
    };
    for _ in 0..burn_in {
        let env = config.env.sample(rng);
        state = step(&state, env, ProcessMode::Mbpifpre, rng)?;
    }
    let mut distribution: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut zeros = 0u64;
    for _ in 0..n_samples {
        for _ in 0..spacing {
            let env = config.env.sample(rng);
            state = step(&state, env, ProcessMode::Mbpifpre, rng)?;
        }
        if state.is_empty() {
            zeros += 1;
        }
        *distribution.entry(state.v.clone()).or_insert(0) += 1;
    }
    Ok(StationaryProbe {
        distribution,
        n_samples,
        p_zero: zeros as f64 / n_samples as f64,
    })
}

/// Total-variation distance between two empirical count-vector laws.
pub fn tv_distance(a: &StationaryProbe, b: &StationaryProbe) -> f64 {
    let mut keys: Vec<&Vec<u64>> = a.distribution.keys().chain(b.distribution.keys()).collect();
    keys.sort();
    keys.dedup();
    let (na, nb) = (a.n_samples as f64, b.n_samples as f64);
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = a.distribution.get(k).copied().unwrap_or(0) as f64 / na;
            let pb = b.distribution.get(k).copied().unwrap_or(0) as f64 / nb;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AmountLaw, CountLaw, EnvironmentSample, ImmigrationLaw, OffspringLaw};
    use crate::rng::StreamKey;

    fn degenerate_env() -> EnvironmentDistribution {
        // Each type-1 parent -> one type-2 child with product 1; type-2 is
        // sterile; immigration adds product 0.5 and no particles.
        EnvironmentDistribution::single(EnvironmentSample::new(
            vec![
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Zero, CountLaw::Constant(1)],
                    product: AmountLaw::Constant(1.0),
                },
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Zero, CountLaw::Zero],
                    product: AmountLaw::Zero,
                },
            ],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero, CountLaw::Zero],
                product: AmountLaw::Constant(0.5),
            },
        ))
    }

    pub(crate) fn scalar_toy(immigration_p: f64) -> EnvironmentDistribution {
        let atom = |a: f64| {
            EnvironmentSample::new(
                vec![OffspringLaw::Independent {
                    counts: vec![CountLaw::Poisson(a)],
                    product: AmountLaw::Constant(1.0),
                }],
                ImmigrationLaw::Independent {
                    counts: vec![CountLaw::Bernoulli(immigration_p)],
                    product: AmountLaw::Zero,
                },
            )
        };
        EnvironmentDistribution::new(vec![(0.6, atom(0.5)), (0.4, atom(2.0))]).unwrap()
    }

    #[test]
    fn empty_population_is_absorbing_without_immigration() {
        let env = degenerate_env();
        let atom = env.sample(&mut StreamKey::new(0).rng()).clone();
        let state = PopulationState::new(vec![0, 0], 3.0);
        let mut rng = StreamKey::new(1).rng();
        let next = step(&state, &atom, ProcessMode::Mbpfpre, &mut rng).unwrap();
        assert_eq!(next.v, vec![0, 0]);
        assert_eq!(next.theta, 3.0);
    }

    #[test]
    fn degenerate_step_is_exact() {
        // V=(2,0), each type-1 parent -> one type-2 child with phi=1,
        // immigration eta=(0,0), psi=0.5: V'=(0,2), Theta' = Theta + 2.5.
        let env = degenerate_env();
        let atom = env.sample(&mut StreamKey::new(0).rng()).clone();
        let state = PopulationState::new(vec![2, 0], 1.0);
        let mut rng = StreamKey::new(2).rng();
        let next = step(&state, &atom, ProcessMode::Mbpifpre, &mut rng).unwrap();
        assert_eq!(next.v, vec![0, 2]);
        assert_eq!(next.theta, 3.5);
        assert_eq!(next.generation, 1);
    }

    #[test]
    fn conditional_mean_identity() {
        // E[V(n+1) | V(n), env] = V(n) A + B and
        // E[dTheta | V(n), env] = <V(n), C> + D, within 5 sigma at 1e6 draws.
        let m = 2;
        let atom = EnvironmentSample::new(
            vec![
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Poisson(0.4), CountLaw::Poisson(0.3)],
                    product: AmountLaw::Exponential { mean: 0.7 },
                },
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Poisson(0.2), CountLaw::Poisson(0.5)],
                    product: AmountLaw::Constant(0.25),
                },
            ],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Poisson(0.6), CountLaw::Bernoulli(0.35)],
                product: AmountLaw::Exponential { mean: 0.2 },
            },
        );
        let stats = atom.stats().clone();
        let state = PopulationState::new(vec![1, 1], 0.0);
        let mut rng = StreamKey::new(5).child(77).rng();
        let n = 1_000_000u64;
        let mut count_sum = vec![0u64; m];
        let mut theta_sum = 0.0;
        let mut theta_sq = 0.0;
        for _ in 0..n {
            let next = step(&state, &atom, ProcessMode::Mbpifpre, &mut rng).unwrap();
            for (acc, x) in count_sum.iter_mut().zip(&next.v) {
                *acc += x;
            }
            theta_sum += next.theta;
            theta_sq += next.theta * next.theta;
        }
        let expected_v = {
            let va = stats.a.left_mul_vec(&[1.0, 1.0]);
            va.iter().zip(&stats.b).map(|(x, b)| x + b).collect::<Vec<_>>()
        };
        for j in 0..m {
            let emp = count_sum[j] as f64 / n as f64;
            // Poisson-dominated variance bound: var <= mean here is not
            // exact, use a conservative sigma from the observed scale.
            let sigma = (expected_v[j].max(0.5) / n as f64).sqrt();
            assert!(
                (emp - expected_v[j]).abs() < 5.0 * sigma * 2.0,
                "component {j}: {emp} vs {}",
                expected_v[j]
            );
        }
        let expected_theta =
            stats.c.iter().sum::<f64>() + stats.d;
        let emp_theta = theta_sum / n as f64;
        let var = (theta_sq / n as f64 - emp_theta * emp_theta).max(1e-12);
        let sigma = (var / n as f64).sqrt();
        assert!(
            (emp_theta - expected_theta).abs() < 5.0 * sigma,
            "theta mean {emp_theta} vs {expected_theta}"
        );
    }

    #[test]
    fn theta_is_monotone_along_trajectories() {
        let env = scalar_toy(0.5);
        let cfg = ProcessConfig::new(env, ProcessMode::Mbpifpre);
        let mut rng = StreamKey::new(9).rng();
        let mut state = PopulationState::new(vec![1], 0.0);
        for _ in 0..200 {
            let atom = cfg.env.sample(&mut rng).clone();
            let next = step(&state, &atom, ProcessMode::Mbpifpre, &mut rng).unwrap();
            assert!(next.theta >= state.theta);
            state = next;
        }
    }

    #[test]
    fn childless_immigrants_give_geometric_life_periods() {
        // Offspring identically zero, immigration e1 with probability 1/2,
        // phi = 1 per particle: every generation holds one particle, the
        // period ends at the first zero-immigration epoch, and Theta counts
        // the particle generations, so Theta = Upsilon exactly.
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Bernoulli(0.5)],
                product: AmountLaw::Zero,
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpifpre,
        );
        let mut rng = StreamKey::new(12).rng();
        let n = 20_000;
        let mut mean_upsilon = 0.0;
        for _ in 0..n {
            let rec = simulate_life_period(&cfg, &mut rng).unwrap();
            assert!(!rec.censored);
            assert_eq!(rec.theta_total, rec.upsilon as f64);
            assert_eq!(rec.max_population, 1);
            mean_upsilon += rec.upsilon as f64;
        }
        mean_upsilon /= n as f64;
        // Upsilon ~ Geometric(1/2) on {1,2,...}: mean 2, sd sqrt(2).
        assert!((mean_upsilon - 2.0).abs() < 5.0 * (2.0f64 / n as f64).sqrt());
    }

    #[test]
    fn deterministic_immigration_censors_at_cap() {
        // eta = e1 every epoch: the population can never return to zero, so
        // the record must come back censored at the generation cap.
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Constant(1)],
                product: AmountLaw::Zero,
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpifpre,
        )
        .with_generation_cap(64);
        let mut rng = StreamKey::new(13).rng();
        let rec = simulate_life_period(&cfg, &mut rng).unwrap();
        assert!(rec.censored);
        assert_eq!(rec.upsilon, 64);
    }

    #[test]
    fn zero_immigration_is_a_config_error_for_life_periods() {
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Poisson(0.3)],
                product: AmountLaw::Zero,
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Exponential { mean: 1.0 },
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpifpre,
        );
        let mut rng = StreamKey::new(14).rng();
        assert!(matches!(
            simulate_life_period(&cfg, &mut rng),
            Err(Error::ImmigrationAlwaysZero)
        ));
    }

    #[test]
    fn total_product_of_sterile_population() {
        // Offspring zero, phi = 1, z = (3,0): Phi = 3 in one generation.
        let atom = EnvironmentSample::new(
            vec![
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Zero, CountLaw::Zero],
                    product: AmountLaw::Constant(1.0),
                },
                OffspringLaw::Independent {
                    counts: vec![CountLaw::Zero, CountLaw::Zero],
                    product: AmountLaw::Constant(1.0),
                },
            ],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero, CountLaw::Zero],
                product: AmountLaw::Zero,
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpfpre,
        );
        let mut rng = StreamKey::new(15).rng();
        let rec = simulate_total_product(&cfg, &[3, 0], &mut rng).unwrap();
        assert_eq!(rec.phi, 3.0);
        assert!(!rec.censored);
    }

    #[test]
    fn immortal_line_censors() {
        // Deterministic one child of the same type: never dies.
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Constant(1)],
                product: AmountLaw::Constant(1.0),
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Zero,
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpfpre,
        )
        .with_generation_cap(100);
        let mut rng = StreamKey::new(16).rng();
        let rec = simulate_total_product(&cfg, &[1], &mut rng).unwrap();
        assert!(rec.censored);
        assert_eq!(rec.phi, 100.0);
    }

    #[test]
    fn mode_reduction_zero_immigration_matches_mbpfpre() {
        // The full model with an all-zero immigration law consumes the same
        // draws as the no-immigration model: identical trajectories.
        let offspring = vec![OffspringLaw::Independent {
            counts: vec![CountLaw::Poisson(0.9)],
            product: AmountLaw::Constant(1.0),
        }];
        let zero_imm = ImmigrationLaw::Independent {
            counts: vec![CountLaw::Zero],
            product: AmountLaw::Zero,
        };
        let atom = EnvironmentSample::new(offspring, zero_imm);
        let env = EnvironmentDistribution::single(atom);
        let key = StreamKey::new(17).child(3);
        let run = |mode: ProcessMode| {
            let mut rng = key.rng();
            let env = env.clone();
            let mut state = PopulationState::new(vec![4], 0.0);
            let mut trail = Vec::new();
            for _ in 0..50 {
                let atom = env.sample(&mut rng).clone();
                state = step(&state, &atom, mode, &mut rng).unwrap();
                trail.push((state.v.clone(), state.theta));
                if state.is_empty() {
                    break;
                }
            }
            trail
        };
        assert_eq!(run(ProcessMode::Mbpifpre), run(ProcessMode::Mbpfpre));
    }

    #[test]
    fn stationary_probe_concentrates_on_immigration_atom() {
        // Zero offspring, immigration exactly e1: the stationary law is the
        // point mass at e1.
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Zero,
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Constant(1)],
                product: AmountLaw::Zero,
            },
        );
        let cfg = ProcessConfig::new(
            EnvironmentDistribution::single(atom),
            ProcessMode::Mbpifpre,
        );
        let mut rng = StreamKey::new(18).rng();
        let probe = stationary_probe(&cfg, 10, 1000, 1, &mut rng).unwrap();
        assert_eq!(probe.p_zero, 0.0);
        assert_eq!(probe.distribution.len(), 1);
        assert_eq!(probe.distribution[&vec![1u64]], 1000);
    }

    #[test]
    fn stationary_probe_sees_empty_states_in_subcritical_toy() {
        let cfg = ProcessConfig::new(scalar_toy(0.5), ProcessMode::Mbpifpre);
        let mut rng = StreamKey::new(19).rng();
        let probe = stationary_probe(&cfg, 100, 20_000, 3, &mut rng).unwrap();
        assert!(probe.p_zero > 0.0, "expected positive mass at zero, got {}", probe.p_zero);
    }

    #[test]
    fn split_half_stationary_distributions_agree() {
        // A light-tailed subcritical mixture (both atoms below 1, so the
        // stationary law has geometric tails and the empirical TV distance
        // converges at the root-n rate).
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
        let env =
            EnvironmentDistribution::new(vec![(0.5, atom(0.3)), (0.5, atom(0.9))]).unwrap();
        let cfg = ProcessConfig::new(env, ProcessMode::Mbpifpre);
        let mut rng = StreamKey::new(20).rng();
        let a = stationary_probe(&cfg, 200, 100_000, 2, &mut rng).unwrap();
        let b = stationary_probe(&cfg, 200, 100_000, 2, &mut rng).unwrap();
        let tv = tv_distance(&a, &b);
        assert!(tv < 0.02, "split-half total variation {tv}");
    }

    #[test]
    fn plain_mode_tracks_counts_only() {
        // MBPRE: neither immigration nor final product enters the state.
        let env = scalar_toy(0.5);
        let mut rng = StreamKey::new(29).rng();
        let mut state = PopulationState::new(vec![3], 0.0);
        for _ in 0..50 {
            let atom = env.sample(&mut rng).clone();
            state = step(&state, &atom, ProcessMode::Mbpre, &mut rng).unwrap();
            assert_eq!(state.theta, 0.0);
            if state.is_empty() {
                break;
            }
        }
    }

    #[test]
    fn count_overflow_is_an_explicit_error() {
        let atom = EnvironmentSample::new(
            vec![OffspringLaw::Independent {
                counts: vec![CountLaw::Constant(u64::MAX)],
                product: AmountLaw::Zero,
            }],
            ImmigrationLaw::Independent {
                counts: vec![CountLaw::Zero],
                product: AmountLaw::Zero,
            },
        );
        let env = EnvironmentDistribution::single(atom);
        let state = PopulationState::new(vec![2], 0.0);
        let mut rng = StreamKey::new(30).rng();
        let atom = env.sample(&mut rng).clone();
        let err = step(&state, &atom, ProcessMode::Mbpfpre, &mut rng).unwrap_err();
        assert!(matches!(err, Error::PopulationOverflow { generation: 1 }), "{err}");
    }

    #[test]
    fn invalid_parent_type_is_rejected() {
        let env = scalar_toy(0.5);
        let mut rng = StreamKey::new(31).rng();
        let atom = env.sample(&mut rng).clone();
        assert!(matches!(
            atom.sample_offspring(0, &mut rng),
            Err(Error::BadTypeIndex { index: 0, m: 1 })
        ));
        assert!(matches!(
            atom.sample_offspring(2, &mut rng),
            Err(Error::BadTypeIndex { index: 2, m: 1 })
        ));
        assert!(atom.sample_offspring(1, &mut rng).is_ok());
    }

    #[test]
    fn absorption_without_immigration() {
        let cfg = ProcessConfig::new(scalar_toy(0.5), ProcessMode::Mbpfpre);
        let mut rng = StreamKey::new(21).rng();
        for rep in 0..200 {
            let rec = simulate_total_product(&cfg, &[1], &mut rng);
            let rec = rec.unwrap();
            if !rec.censored {
                assert!(rec.generations >= 1, "rep {rep}");
            }
        }
    }
}
