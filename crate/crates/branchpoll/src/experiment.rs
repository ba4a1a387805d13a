//! Experiment orchestration: replicate fan-out over deterministic streams
//! and the command dispatch behind the CLI and the runnable examples.

use crate::analysis::{kesten_check, classify, McParams};
use crate::branching::{simulate_life_period, simulate_total_product, Initial, ProcessConfig, ProcessMode};
use crate::config::{Command, ExperimentSpec, McSection, PeriodSpec};
use crate::error::{Error, Result};
use crate::polling::sim::{run_busy_period, run_generalized_busy_period, PollingConfig, PollingRecord};
use crate::report::{read_samples_csv, Reporter};
use crate::rng::StreamKey;
use crate::stats::{hill_estimator, ks_distance, SampleSet, TailFit};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Hash of the effective (post-override) spec, embedded in artifact headers.
pub fn spec_hash(spec: &ExperimentSpec) -> String {
    let mut hasher = Sha256::new();
    hasher.update(spec.canonical().as_bytes());
    let out = hasher.finalize();
    out.iter().fold(String::with_capacity(64), |mut acc, b| {
        write!(acc, "{b:02x}").unwrap();
        acc
    })
}

/// Run `replicates` independent jobs on disjoint child streams; results come
/// back ordered by replica id regardless of scheduling.
pub fn run_replicates<T, F>(replicates: u64, key: StreamKey, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = key.child(r).rng();
            job(r, &mut rng)
        })
        .collect()
}

fn hill_k(mc: &McSection) -> Option<usize> {
    (mc.hill_k > 0).then_some(mc.hill_k as usize)
}

fn mc_params(mc: &McSection) -> McParams {
    McParams {
        horizon: mc.horizon,
        replicates: mc.replicates,
        alpha_horizon: mc.alpha_horizon,
        alpha_replicates: mc.alpha_replicates,
        x_max: mc.x_max,
        tol: mc.tol,
        ..McParams::default()
    }
}

struct BranchingRow {
    upsilon: u64,
    theta: f64,
    censored: bool,
    max_population: u64,
}

fn branching_rows(cfg: &ProcessConfig, replicates: u64, key: StreamKey) -> Result<Vec<BranchingRow>> {
    match cfg.mode {
        ProcessMode::Mbpifpre => run_replicates(replicates, key, |_, rng| {
            let rec = simulate_life_period(cfg, rng)?;
            Ok(BranchingRow {
                upsilon: rec.upsilon,
                theta: rec.theta_total,
                censored: rec.censored,
                max_population: rec.max_population,
            })
        }),
        ProcessMode::Mbpfpre => {
            let z = match &cfg.initial {
                Initial::Fixed { v, .. } => v.clone(),
                Initial::Idle => {
                    return Err(Error::Config {
                        path: "environment.initial".into(),
                        message: "the immigration-free model needs a fixed initial population"
                            .into(),
                    })
                }
            };
            run_replicates(replicates, key, |_, rng| {
                let rec = simulate_total_product(cfg, &z, rng)?;
                Ok(BranchingRow {
                    upsilon: rec.generations,
                    theta: rec.phi,
                    censored: rec.censored,
                    max_population: rec.max_population,
                })
            })
        }
        ProcessMode::Mbpre => Err(Error::Config {
            path: "environment.mode".into(),
            message: "simulate-branching records final product; use mbpifpre or mbpfpre".into(),
        }),
    }
}

fn branching_sample_set(rows: &[BranchingRow], source: &str, seed: u64) -> SampleSet {
    let values: Vec<f64> = rows.iter().filter(|r| !r.censored).map(|r| r.theta).collect();
    let censored = rows.iter().filter(|r| r.censored).count();
    SampleSet::new(values, censored, source, seed)
}

fn polling_rows(
    cfg: &PollingConfig,
    period: PeriodSpec,
    replicates: u64,
    key: StreamKey,
) -> Result<Vec<PollingRecord>> {
    run_replicates(replicates, key, |_, rng| match period {
        PeriodSpec::Busy => run_busy_period(cfg, rng),
        PeriodSpec::Generalized => run_generalized_busy_period(cfg, rng),
    })
}

fn polling_sample_set(rows: &[PollingRecord], source: &str, seed: u64) -> SampleSet {
    let values: Vec<f64> = rows.iter().filter(|r| !r.censored).map(|r| r.theta_p).collect();
    let censored = rows.iter().filter(|r| r.censored).count();
    SampleSet::new(values, censored, source, seed)
}

fn censoring_gate(set: &SampleSet, mc: &McSection) -> Result<()> {
    let fraction = set.censored_fraction();
    if fraction > mc.max_censored_fraction {
        return Err(Error::CapExhaustion { fraction, threshold: mc.max_censored_fraction });
    }
    Ok(())
}

fn try_tail_fit(
    reporter: &mut Reporter,
    prefix: &str,
    set: &SampleSet,
    k: Option<usize>,
) -> Result<Option<TailFit>> {
    match hill_estimator(set, k) {
        Ok(fit) => {
            reporter.write_tail_fit(prefix, &fit, set)?;
            Ok(Some(fit))
        }
        Err(Error::NotEnoughSamples { need, have }) => {
            reporter.write_text(
                &format!("{prefix}tail_fit.txt"),
                &format!("tail fit skipped: need {need} uncensored samples, have {have}\n"),
            )?;
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Execute one configured experiment, writing artifacts under `out_dir`.
/// Returns the written paths.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let hash = spec_hash(spec);
    let mc = &spec.mc;
    let key = StreamKey::new(mc.seed);
    let mut reporter = Reporter::new(out_dir, &hash, mc.seed)?;

    match spec.experiment.command {
        Command::Analyze => {
            let env = spec.environment.as_ref().expect("validated").build_distribution()?;
            let report = classify(&env, &mc_params(mc), key.child(1));
            // The Kesten-type conditions are probed a touch above the
            // crossing: at kappa itself the min-row-sum inequality is tight
            // and a point estimate flips by noise.
            let kappa0 = report.kappa.value().filter(|k| *k > 0.0).map(|k| 1.05 * k).unwrap_or(1.0);
            let kesten = kesten_check(&env, kappa0, mc.replicates.min(100_000), key.child(2));
            reporter.write_analysis(&report, Some(&kesten))?;
        }
        Command::SimulateBranching => {
            let cfg = spec.environment.as_ref().expect("validated").build_process(mc)?;
            let rows = branching_rows(&cfg, mc.replicates, key.child(1))?;
            reporter.write_csv(
                "life_periods.csv",
                "replica_id,upsilon,theta_total,censored,max_population",
                rows.iter().enumerate().map(|(i, r)| {
                    format!("{i},{},{},{},{}", r.upsilon, r.theta, r.censored, r.max_population)
                }),
            )?;
            let set = branching_sample_set(&rows, "simulate-branching", mc.seed);
            try_tail_fit(&mut reporter, "", &set, hill_k(mc))?;
            censoring_gate(&set, mc)?;
        }
        Command::SimulatePolling => {
            let polling = spec.polling.as_ref().expect("validated");
            let cfg = polling.build_polling(mc)?;
            let rows = polling_rows(&cfg, polling.period, mc.replicates, key.child(1))?;
            reporter.write_csv(
                "polling_records.csv",
                "replica_id,theta_P,duration_services,duration_switchover,n_cycles,n_services,censored",
                rows.iter().enumerate().map(|(i, r)| {
                    format!(
                        "{i},{},{},{},{},{},{}",
                        r.theta_p,
                        r.duration_services,
                        r.duration_switchover,
                        r.n_cycles,
                        r.n_services,
                        r.censored
                    )
                }),
            )?;
            let set = polling_sample_set(&rows, "simulate-polling", mc.seed);
            try_tail_fit(&mut reporter, "", &set, hill_k(mc))?;
            censoring_gate(&set, mc)?;
        }
        Command::ValidateEquivalence => {
            let polling = spec.polling.as_ref().expect("validated");
            let cfg = polling.build_polling(mc)?;
            let rows = polling_rows(&cfg, PeriodSpec::Generalized, mc.replicates, key.child(1))?;
            reporter.write_csv(
                "polling_records.csv",
                "replica_id,theta_P,duration_services,duration_switchover,n_cycles,n_services,censored",
                rows.iter().enumerate().map(|(i, r)| {
                    format!(
                        "{i},{},{},{},{},{},{}",
                        r.theta_p,
                        r.duration_services,
                        r.duration_switchover,
                        r.n_cycles,
                        r.n_services,
                        r.censored
                    )
                }),
            )?;

            let env = cfg.cycles.associated_environment(cfg.start_station)?;
            let mut initial = vec![0u64; env.type_count()];
            initial[0] = 1;
            let branching_cfg = ProcessConfig::new(env, ProcessMode::Mbpifpre)
                .with_initial(Initial::Fixed { v: initial, theta: 0.0 })
                .with_generation_cap(mc.generation_cap);
            let brows = branching_rows(&branching_cfg, mc.replicates, key.child(2))?;
            reporter.write_csv(
                "life_periods.csv",
                "replica_id,upsilon,theta_total,censored,max_population",
                brows.iter().enumerate().map(|(i, r)| {
                    format!("{i},{},{},{},{}", r.upsilon, r.theta, r.censored, r.max_population)
                }),
            )?;

            let pset = polling_sample_set(&rows, "polling generalized busy periods", mc.seed);
            let bset = branching_sample_set(&brows, "associated branching life periods", mc.seed);
            let ks = ks_distance(&pset, &bset)?;
            let pfit = try_tail_fit(&mut reporter, "polling_", &pset, hill_k(mc))?;
            let bfit = try_tail_fit(&mut reporter, "branching_", &bset, hill_k(mc))?;

            let mut text = String::new();
            writeln!(text, "polling periods: {} ({} censored)", pset.len(), pset.censored()).unwrap();
            writeln!(text, "branching periods: {} ({} censored)", bset.len(), bset.censored()).unwrap();
            writeln!(text, "theta mean polling:   {}", pset.mean()).unwrap();
            writeln!(text, "theta mean branching: {}", bset.mean()).unwrap();
            writeln!(text, "ks statistic: {}", ks.statistic).unwrap();
            writeln!(text, "ks p-value:   {}", ks.p_value).unwrap();
            if let (Some(p), Some(b)) = (&pfit, &bfit) {
                writeln!(text, "hill polling:   {} (CI {} .. {})", p.hill_index, p.ci.0, p.ci.1).unwrap();
                writeln!(text, "hill branching: {} (CI {} .. {})", b.hill_index, b.ci.0, b.ci.1).unwrap();
            }
            reporter.write_text("equivalence.txt", &text)?;
            censoring_gate(&pset, mc)?;
            censoring_gate(&bset, mc)?;
        }
        Command::TailFit => {
            let section = spec.tail_fit.as_ref().expect("validated");
            let set = read_samples_csv(Path::new(&section.input), section.column.as_deref())?;
            let fit = hill_estimator(&set, hill_k(mc))?;
            reporter.write_tail_fit("", &fit, &set)?;
        }
    }
    Ok(reporter.written().to_vec())
}
