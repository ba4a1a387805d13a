//! Experiment configuration: a single TOML file with sections mirroring the
//! domain types, schema-validated before any computation. The effective
//! config (after CLI overrides) is hashed into every output header.

use crate::branching::{Initial, ProcessConfig, ProcessMode};
use crate::env::{AmountLaw, CountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, OffspringLaw};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::polling::map::{CycleDistribution, CycleLaw, Discipline, PollingCycleParams, ProductMode};
use crate::polling::sim::PollingConfig;
use serde::{Deserialize, Serialize};

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    SimulateBranching,
    SimulatePolling,
    ValidateEquivalence,
    TailFit,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub command: Command,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub seed: u64,
    pub replicates: u64,
    pub workers: usize,
    pub generation_cap: u64,
    pub max_cycles: u64,
    pub max_services: u64,
    /// Censored fraction above which the run exits with the cap-exhaustion
    /// code.
    pub max_censored_fraction: f64,
    pub horizon: u64,
    pub alpha_horizon: u64,
    pub alpha_replicates: u64,
    pub x_max: f64,
    pub tol: f64,
    /// Hill order statistics count; 0 selects ceil(sqrt(n)).
    pub hill_k: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            seed: 1,
            replicates: 10_000,
            workers: 0,
            generation_cap: 100_000,
            max_cycles: 100_000,
            max_services: 10_000_000,
            max_censored_fraction: 0.5,
            horizon: 50,
            alpha_horizon: 1000,
            alpha_replicates: 1000,
            x_max: 10.0,
            tol: 1e-3,
            hill_k: 0,
        }
    }
}

/// Amount-law schema: `{ kind = "exponential", mean = 1.0 }` etc.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AmountSpec {
    Zero,
    Constant { value: f64 },
    Exponential { mean: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl AmountSpec {
    fn build(&self, path: &str) -> Result<AmountLaw> {
        let law = match self {
            AmountSpec::Zero => AmountLaw::Zero,
            AmountSpec::Constant { value } => AmountLaw::Constant(*value),
            AmountSpec::Exponential { mean } => AmountLaw::Exponential { mean: *mean },
            AmountSpec::LogNormal { mu, sigma } => AmountLaw::LogNormal { mu: *mu, sigma: *sigma },
        };
        law.validate(path)?;
        Ok(law)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountSpec {
    Zero,
    Constant { value: u64 },
    Poisson { mean: f64 },
    Bernoulli { p: f64 },
}

impl CountSpec {
    fn build(&self, path: &str) -> Result<CountLaw> {
        let law = match self {
            CountSpec::Zero => CountLaw::Zero,
            CountSpec::Constant { value } => CountLaw::Constant(*value),
            CountSpec::Poisson { mean } => CountLaw::Poisson(*mean),
            CountSpec::Bernoulli { p } => CountLaw::Bernoulli(*p),
        };
        law.validate(path)?;
        Ok(law)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffspringSpec {
    Independent { counts: Vec<CountSpec>, product: AmountSpec },
    Routed { leave: f64, to: Vec<f64>, product: AmountSpec },
}

impl OffspringSpec {
    fn build(&self, m: usize, path: &str) -> Result<OffspringLaw> {
        match self {
            OffspringSpec::Independent { counts, product } => {
                if counts.len() != m {
                    return Err(config_err(format!("{path}.counts"), format!("expected {m} count laws, got {}", counts.len())));
                }
                let built: Result<Vec<CountLaw>> = counts
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.build(&format!("{path}.counts[{j}]")))
                    .collect();
                Ok(OffspringLaw::Independent { counts: built?, product: product.build(&format!("{path}.product"))? })
            }
            OffspringSpec::Routed { leave, to, product } => {
                if to.len() != m {
                    return Err(config_err(format!("{path}.to"), format!("expected {m} routing probabilities, got {}", to.len())));
                }
                let total: f64 = *leave + to.iter().sum::<f64>();
                if !(*leave >= 0.0) || to.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return Err(config_err(path.to_string(), format!("routing probabilities must be nonnegative and sum to 1, got total {total}")));
                }
                Ok(OffspringLaw::Routed { leave: *leave, to: to.clone(), product: product.build(&format!("{path}.product"))? })
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ImmigrationSpec {
    pub counts: Vec<CountSpec>,
    pub product: AmountSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnvAtomSpec {
    pub weight: f64,
    pub offspring: Vec<OffspringSpec>,
    pub immigration: ImmigrationSpec,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Mbpifpre,
    Mbpfpre,
    Mbpre,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Fixed { v: Vec<u64>, theta: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub m: usize,
    #[serde(default = "default_mode")]
    pub mode: ModeSpec,
    #[serde(default)]
    pub initial: Option<InitialSpec>,
    pub atoms: Vec<EnvAtomSpec>,
}

fn default_mode() -> ModeSpec {
    ModeSpec::Mbpifpre
}

impl EnvironmentSection {
    pub fn build_distribution(&self) -> Result<EnvironmentDistribution> {
        if self.m == 0 {
            return Err(config_err("environment.m", "type count must be at least 1"));
        }
        let mut atoms = Vec::new();
        for (idx, atom) in self.atoms.iter().enumerate() {
            let path = format!("environment.atoms[{idx}]");
            if atom.offspring.len() != self.m {
                return Err(config_err(format!("{path}.offspring"), format!("expected {} offspring laws, got {}", self.m, atom.offspring.len())));
            }
            if atom.immigration.counts.len() != self.m {
                return Err(config_err(format!("{path}.immigration.counts"), format!("expected {} count laws, got {}", self.m, atom.immigration.counts.len())));
            }
            let offspring: Result<Vec<OffspringLaw>> = atom
                .offspring
                .iter()
                .enumerate()
                .map(|(i, o)| o.build(self.m, &format!("{path}.offspring[{i}]")))
                .collect();
            let counts: Result<Vec<CountLaw>> = atom
                .immigration
                .counts
                .iter()
                .enumerate()
                .map(|(j, c)| c.build(&format!("{path}.immigration.counts[{j}]")))
                .collect();
            let immigration = ImmigrationLaw::Independent {
                counts: counts?,
                product: atom.immigration.product.build(&format!("{path}.immigration.product"))?,
            };
            atoms.push((atom.weight, EnvironmentSample::new(offspring?, immigration)));
        }
        EnvironmentDistribution::new(atoms)
    }

    pub fn build_process(&self, mc: &McSection) -> Result<ProcessConfig> {
        let env = self.build_distribution()?;
        let mode = match self.mode {
            ModeSpec::Mbpifpre => ProcessMode::Mbpifpre,
            ModeSpec::Mbpfpre => ProcessMode::Mbpfpre,
            ModeSpec::Mbpre => ProcessMode::Mbpre,
        };
        let initial = match &self.initial {
            None => Initial::Idle,
            Some(InitialSpec::Named(name)) if name == "idle" => Initial::Idle,
            Some(InitialSpec::Named(name)) => {
                return Err(config_err("environment.initial", format!("unknown initial condition `{name}`; use \"idle\" or {{ v = [...], theta = ... }}")));
            }
            Some(InitialSpec::Fixed { v, theta }) => {
                if v.len() != self.m {
                    return Err(config_err("environment.initial.v", format!("expected {} components, got {}", self.m, v.len())));
                }
                Initial::Fixed { v: v.clone(), theta: *theta }
            }
        };
        Ok(ProcessConfig::new(env, mode)
            .with_initial(initial)
            .with_generation_cap(mc.generation_cap))
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DisciplineSpec {
    Gated,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProductModeSpec {
    ServiceTime,
    ServicePlusSwitchover,
    UnitPerService,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PeriodSpec {
    Busy,
    Generalized,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PollingAtomSpec {
    pub weight: f64,
    pub service_arrivals: Vec<Vec<f64>>,
    pub switchover_arrivals: Vec<Vec<f64>>,
    /// `m` rows of `m + 1` entries: `[leave, to_1, ..., to_m]`.
    pub routing: Vec<Vec<f64>>,
    pub service: Vec<AmountSpec>,
    pub switchover: Vec<AmountSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PollingSection {
    pub m: usize,
    pub disciplines: Vec<DisciplineSpec>,
    #[serde(default = "default_product_mode")]
    pub final_product: ProductModeSpec,
    /// 1-based start station.
    #[serde(default = "default_start_station")]
    pub start_station: usize,
    #[serde(default = "default_period")]
    pub period: PeriodSpec,
    pub atoms: Vec<PollingAtomSpec>,
}

fn default_product_mode() -> ProductModeSpec {
    ProductModeSpec::ServiceTime
}

fn default_start_station() -> usize {
    1
}

fn default_period() -> PeriodSpec {
    PeriodSpec::Busy
}

fn matrix_from_spec(rows: &[Vec<f64>], m: usize, path: &str) -> Result<Matrix> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(config_err(path.to_string(), format!("expected an {m}x{m} matrix")));
    }
    Ok(Matrix::from_rows(rows))
}

impl PollingSection {
    pub fn build_cycles(&self) -> Result<CycleDistribution> {
        if self.m == 0 {
            return Err(config_err("polling.m", "station count must be at least 1"));
        }
        if self.disciplines.len() != self.m {
            return Err(config_err("polling.disciplines", format!("expected {} entries, got {}", self.m, self.disciplines.len())));
        }
        let disciplines: Vec<Discipline> = self
            .disciplines
            .iter()
            .map(|d| match d {
                DisciplineSpec::Gated => Discipline::Gated,
                DisciplineSpec::Exhaustive => Discipline::Exhaustive,
            })
            .collect();
        let mode = match self.final_product {
            ProductModeSpec::ServiceTime => ProductMode::ServiceTime,
            ProductModeSpec::ServicePlusSwitchover => ProductMode::ServicePlusSwitchover,
            ProductModeSpec::UnitPerService => ProductMode::UnitPerService,
        };
        let mut atoms = Vec::new();
        for (idx, atom) in self.atoms.iter().enumerate() {
            let path = format!("polling.atoms[{idx}]");
            let service_rates = matrix_from_spec(&atom.service_arrivals, self.m, &format!("{path}.service_arrivals"))?;
            let switchover_rates = matrix_from_spec(&atom.switchover_arrivals, self.m, &format!("{path}.switchover_arrivals"))?;
            if atom.routing.len() != self.m || atom.routing.iter().any(|r| r.len() != self.m + 1) {
                return Err(config_err(format!("{path}.routing"), format!("expected {} rows of {} entries [leave, to_1..to_m]", self.m, self.m + 1)));
            }
            let leave: Vec<f64> = atom.routing.iter().map(|r| r[0]).collect();
            let route = Matrix::from_rows(
                &atom.routing.iter().map(|r| r[1..].to_vec()).collect::<Vec<_>>(),
            );
            if atom.service.len() != self.m || atom.switchover.len() != self.m {
                return Err(config_err(format!("{path}.service"), format!("expected {} service and switch-over laws", self.m)));
            }
            let service: Result<Vec<AmountLaw>> = atom
                .service
                .iter()
                .enumerate()
                .map(|(i, s)| s.build(&format!("{path}.service[{i}]")))
                .collect();
            let switchover: Result<Vec<AmountLaw>> = atom
                .switchover
                .iter()
                .enumerate()
                .map(|(i, s)| s.build(&format!("{path}.switchover[{i}]")))
                .collect();
            let params = PollingCycleParams::new(
                service_rates,
                switchover_rates,
                leave,
                route,
                service?,
                switchover?,
            )
            .map_err(|e| rewrite_path(e, &path))?;
            let law = CycleLaw::new(params, disciplines.clone(), mode)?;
            atoms.push((atom.weight, law));
        }
        CycleDistribution::new(atoms)
    }

    pub fn build_polling(&self, mc: &McSection) -> Result<PollingConfig> {
        let cycles = self.build_cycles()?;
        if self.start_station == 0 || self.start_station > self.m {
            return Err(config_err("polling.start_station", format!("must be in 1..={}, got {}", self.m, self.start_station)));
        }
        Ok(PollingConfig::new(cycles)
            .with_start_station(self.start_station - 1)
            .with_caps(mc.max_cycles, mc.max_services))
    }
}

fn rewrite_path(e: Error, prefix: &str) -> Error {
    match e {
        Error::Config { path, message } => Error::Config {
            path: if path.starts_with("polling.") {
                path.replacen("polling", prefix, 1)
            } else {
                format!("{prefix}.{path}")
            },
            message,
        },
        other => other,
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TailFitSection {
    pub input: String,
    #[serde(default)]
    pub column: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<String>,
}

/// The whole experiment file.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub environment: Option<EnvironmentSection>,
    #[serde(default)]
    pub polling: Option<PollingSection>,
    #[serde(default)]
    pub tail_fit: Option<TailFitSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text)
            .map_err(|e| config_err("<config>", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.experiment.command {
            Command::Analyze | Command::SimulateBranching => {
                if self.environment.is_none() {
                    return Err(config_err("environment", "section required for this command"));
                }
            }
            Command::SimulatePolling | Command::ValidateEquivalence => {
                if self.polling.is_none() {
                    return Err(config_err("polling", "section required for this command"));
                }
            }
            Command::TailFit => {
                if self.tail_fit.is_none() {
                    return Err(config_err("tail_fit", "section required for this command"));
                }
            }
        }
        if !(self.mc.max_censored_fraction >= 0.0 && self.mc.max_censored_fraction <= 1.0) {
            return Err(config_err("mc.max_censored_fraction", "must lie in [0, 1]"));
        }
        if self.mc.replicates == 0 {
            return Err(config_err("mc.replicates", "must be positive"));
        }
        // Build eagerly so schema and guard violations surface before any
        // computation.
        if let Some(env) = &self.environment {
            env.build_process(&self.mc)?;
        }
        if let Some(polling) = &self.polling {
            polling.build_polling(&self.mc)?;
        }
        Ok(())
    }

    /// Canonical serialization of the effective spec, used for hashing.
    /// The worker count is normalized out: it schedules the run but cannot
    /// change its results.
    pub fn canonical(&self) -> String {
        let mut normalized = self.clone();
        normalized.mc.workers = 0;
        toml::to_string(&normalized).expect("spec serializes")
    }
}
