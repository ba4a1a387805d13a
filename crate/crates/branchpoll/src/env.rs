//! The random environment: joint laws of offspring, immigration and final
//! product, and finite mixtures of such laws.
//!
//! An environment draw pairs the offspring laws of one generation with the
//! immigration law of the next epoch, together with the mean statistics
//! `(A, B, C, D)` of the draw: the mean offspring matrix, mean immigration
//! vector, mean per-particle final product and mean immigrant final product.
//! Successive draws are iid by construction; all law objects are immutable
//! after construction and safe to share across workers.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::polling::map::CycleLaw;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Gamma, LogNormal, Poisson};
use std::sync::Arc;

/// Largest count we accept from a continuous-output sampler before declaring
/// overflow; beyond 2^53 the f64 representation is no longer exact.
const MAX_EXACT_COUNT: f64 = 9.0e15;

/// Draw a Poisson count, exact for all meaningful rates.
pub(crate) fn sample_poisson(lambda: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if lambda <= 0.0 {
        return Ok(0);
    }
    if lambda >= MAX_EXACT_COUNT {
        return Err(Error::CountOverflow);
    }
    let x: f64 = Poisson::new(lambda)
        .map_err(|e| Error::InvalidArgument(format!("poisson({lambda}): {e}")))?
        .sample(rng);
    if x >= MAX_EXACT_COUNT {
        return Err(Error::CountOverflow);
    }
    Ok(x as u64)
}

fn sample_binomial(n: u64, p: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    let b = Binomial::new(n, p)
        .map_err(|e| Error::InvalidArgument(format!("binomial({n},{p}): {e}")))?;
    Ok(b.sample(rng))
}

/// Law of one nonnegative real amount (a final-product or duration draw).
#[derive(Clone, Debug, PartialEq)]
pub enum AmountLaw {
    Zero,
    Constant(f64),
    Exponential { mean: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl AmountLaw {
    pub fn mean(&self) -> f64 {
        match self {
            AmountLaw::Zero => 0.0,
            AmountLaw::Constant(c) => *c,
            AmountLaw::Exponential { mean } => *mean,
            AmountLaw::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            AmountLaw::Zero => 0.0,
            AmountLaw::Constant(c) => *c,
            AmountLaw::Exponential { mean } => {
                Exp::new(1.0 / mean).expect("validated rate").sample(rng)
            }
            AmountLaw::LogNormal { mu, sigma } => {
                LogNormal::new(*mu, *sigma).expect("validated params").sample(rng)
            }
        }
    }

    /// Sum of `n` independent draws, using the exact convolution where one
    /// exists (Gamma for exponential, scaling for constants).
    pub fn sample_sum(&self, n: u64, rng: &mut ChaCha8Rng) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self {
            AmountLaw::Zero => 0.0,
            AmountLaw::Constant(c) => *c * n as f64,
            AmountLaw::Exponential { mean } => {
                if n == 1 {
                    self.sample(rng)
                } else {
                    Gamma::new(n as f64, *mean).expect("validated params").sample(rng)
                }
            }
            AmountLaw::LogNormal { .. } => {
                let mut total = 0.0;
                for _ in 0..n {
                    total += self.sample(rng);
                }
                total
            }
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let ok = match self {
            AmountLaw::Zero => true,
            AmountLaw::Constant(c) => c.is_finite() && *c >= 0.0,
            AmountLaw::Exponential { mean } => mean.is_finite() && *mean > 0.0,
            AmountLaw::LogNormal { mu, sigma } => mu.is_finite() && sigma.is_finite() && *sigma >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config {
                path: path.to_string(),
                message: format!("invalid amount law {self:?}"),
            })
        }
    }
}

/// Law of one nonnegative integer count.
#[derive(Clone, Debug, PartialEq)]
pub enum CountLaw {
    Zero,
    Constant(u64),
    Poisson(f64),
    Bernoulli(f64),
}

impl CountLaw {
    pub fn mean(&self) -> f64 {
        match self {
            CountLaw::Zero => 0.0,
            CountLaw::Constant(k) => *k as f64,
            CountLaw::Poisson(lambda) => *lambda,
            CountLaw::Bernoulli(p) => *p,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<u64> {
        match self {
            CountLaw::Zero => Ok(0),
            CountLaw::Constant(k) => Ok(*k),
            CountLaw::Poisson(lambda) => sample_poisson(*lambda, rng),
            CountLaw::Bernoulli(p) => Ok(if rng.random::<f64>() < *p { 1 } else { 0 }),
        }
    }

    /// Sum of `n` independent draws via the exact convolution
    /// (Poisson(n*lambda), Binomial(n,p), n*k).
    pub fn sample_sum(&self, n: u64, rng: &mut ChaCha8Rng) -> Result<u64> {
        if n == 0 {
            return Ok(0);
        }
        match self {
            CountLaw::Zero => Ok(0),
            CountLaw::Constant(k) => n.checked_mul(*k).ok_or(Error::CountOverflow),
            CountLaw::Poisson(lambda) => sample_poisson(*lambda * n as f64, rng),
            CountLaw::Bernoulli(p) => sample_binomial(n, *p, rng),
        }
    }

    pub fn is_always_zero(&self) -> bool {
        match self {
            CountLaw::Zero => true,
            CountLaw::Constant(k) => *k == 0,
            CountLaw::Poisson(lambda) => *lambda == 0.0,
            CountLaw::Bernoulli(p) => *p == 0.0,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let ok = match self {
            CountLaw::Zero | CountLaw::Constant(_) => true,
            CountLaw::Poisson(lambda) => lambda.is_finite() && *lambda >= 0.0,
            CountLaw::Bernoulli(p) => (0.0..=1.0).contains(p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config {
                path: path.to_string(),
                message: format!("invalid count law {self:?}"),
            })
        }
    }
}

/// Offspring law of one parent type: a sampler for the pair
/// `(offspring count vector, final-product amount)`.
#[derive(Clone, Debug)]
pub enum OffspringLaw {
    /// Entrywise independent counts with an independent product amount.
    Independent { counts: Vec<CountLaw>, product: AmountLaw },
    /// One child routed to type `j` with probability `to[j]` (or none, with
    /// probability `leave`), plus an independent product amount.
    Routed { leave: f64, to: Vec<f64>, product: AmountLaw },
    /// One polling visit-unit of the associated branching environment.
    Station { cycle: Arc<CycleLaw>, station: usize },
}

impl OffspringLaw {
    /// Mean offspring row `a_i.` and mean product `c_i`.
    pub fn mean(&self) -> (Vec<f64>, f64) {
        match self {
            OffspringLaw::Independent { counts, product } => {
                (counts.iter().map(CountLaw::mean).collect(), product.mean())
            }
            OffspringLaw::Routed { to, product, .. } => (to.clone(), product.mean()),
            OffspringLaw::Station { cycle, station } => cycle.offspring_mean(*station),
        }
    }

    /// One draw `(xi, phi)`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<u64>, f64)> {
        match self {
            OffspringLaw::Independent { counts, product } => {
                let mut xi = Vec::with_capacity(counts.len());
                for law in counts {
                    xi.push(law.sample(rng)?);
                }
                Ok((xi, product.sample(rng)))
            }
            OffspringLaw::Routed { leave, to, product } => {
                let mut xi = vec![0u64; to.len()];
                let mut u = rng.random::<f64>() - *leave;
                if u >= 0.0 {
                    for (j, p) in to.iter().enumerate() {
                        u -= p;
                        if u < 0.0 {
                            xi[j] = 1;
                            break;
                        }
                    }
                }
                Ok((xi, product.sample(rng)))
            }
            OffspringLaw::Station { cycle, station } => {
                let unit = cycle.sample_offspring_unit(*station, rng)?;
                Ok((unit.counts, unit.product))
            }
        }
    }

    /// Aggregate draw for `parents` iid copies: the summed count vector and
    /// summed product. Uses closed-form convolutions where the law admits
    /// them; station laws are sampled per parent.
    pub fn sample_aggregate(&self, parents: u64, rng: &mut ChaCha8Rng) -> Result<(Vec<u64>, f64)> {
        match self {
            OffspringLaw::Independent { counts, product } => {
                let mut xi = Vec::with_capacity(counts.len());
                for law in counts {
                    xi.push(law.sample_sum(parents, rng)?);
                }
                Ok((xi, product.sample_sum(parents, rng)))
            }
            OffspringLaw::Routed { leave, to, product } => {
                // Multinomial(parents; leave, to) by sequential binomials.
                let mut xi = vec![0u64; to.len()];
                let mut remaining = parents;
                let mut mass = 1.0;
                // Leave-probability slot first; the survivors get routed.
                let stay = sample_binomial(remaining, (1.0 - leave / mass).clamp(0.0, 1.0), rng)?;
                remaining = stay;
                mass -= leave;
                for (j, p) in to.iter().enumerate() {
                    if remaining == 0 || mass <= 0.0 {
                        break;
                    }
                    let here = sample_binomial(remaining, (p / mass).clamp(0.0, 1.0), rng)?;
                    xi[j] = here;
                    remaining -= here;
                    mass -= p;
                }
                Ok((xi, product.sample_sum(parents, rng)))
            }
            OffspringLaw::Station { cycle, station } => {
                let m = cycle.station_count();
                let mut xi = vec![0u64; m];
                let mut phi = 0.0;
                for _ in 0..parents {
                    let unit = cycle.sample_offspring_unit(*station, rng)?;
                    for (acc, v) in xi.iter_mut().zip(&unit.counts) {
                        *acc = acc.checked_add(*v).ok_or(Error::CountOverflow)?;
                    }
                    phi += unit.product;
                }
                Ok((xi, phi))
            }
        }
    }
}

/// Immigration law: a sampler for `(immigrant count vector, product amount)`.
/// The product can be strictly positive while the count vector is zero.
#[derive(Clone, Debug)]
pub enum ImmigrationLaw {
    Independent { counts: Vec<CountLaw>, product: AmountLaw },
    /// The switch-over composition of one polling cycle.
    Cycle(Arc<CycleLaw>),
}

impl ImmigrationLaw {
    pub fn mean(&self) -> (Vec<f64>, f64) {
        match self {
            ImmigrationLaw::Independent { counts, product } => {
                (counts.iter().map(CountLaw::mean).collect(), product.mean())
            }
            ImmigrationLaw::Cycle(cycle) => cycle.immigration_mean(),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<u64>, f64)> {
        match self {
            ImmigrationLaw::Independent { counts, product } => {
                let mut eta = Vec::with_capacity(counts.len());
                for law in counts {
                    eta.push(law.sample(rng)?);
                }
                Ok((eta, product.sample(rng)))
            }
            ImmigrationLaw::Cycle(cycle) => {
                let draw = cycle.sample_immigration(rng)?;
                Ok((draw.counts, draw.product))
            }
        }
    }

    /// True when the count vector is zero almost surely.
    pub fn counts_always_zero(&self) -> bool {
        let (b, _) = self.mean();
        b.iter().all(|&v| v == 0.0)
    }
}

/// Mean statistics `(A, B, C, D)` of one environment draw.
#[derive(Clone, Debug)]
pub struct MeanStatistics {
    /// Mean offspring matrix, row `i` = mean offspring of a type-`i` parent.
    pub a: Matrix,
    /// Mean immigration vector.
    pub b: Vec<f64>,
    /// Mean per-particle final product, by parent type.
    pub c: Vec<f64>,
    /// Mean immigrant final product.
    pub d: f64,
    /// True when the statistics were estimated by Monte Carlo rather than
    /// derived from the declared laws.
    pub estimated: bool,
}

/// One realized environment: the offspring laws `F_n` of a generation and
/// the immigration law `G_{n+1}` of the following epoch, with their means.
#[derive(Clone, Debug)]
pub struct EnvironmentSample {
    offspring: Vec<OffspringLaw>,
    immigration: ImmigrationLaw,
    stats: MeanStatistics,
}

impl EnvironmentSample {
    pub fn new(offspring: Vec<OffspringLaw>, immigration: ImmigrationLaw) -> Self {
        let m = offspring.len();
        let mut a = Matrix::zeros(m);
        let mut c = vec![0.0; m];
        for (i, law) in offspring.iter().enumerate() {
            let (row, ci) = law.mean();
            assert_eq!(row.len(), m, "offspring row length must equal type count");
            for (j, v) in row.iter().enumerate() {
                a.set(i, j, *v);
            }
            c[i] = ci;
        }
        let (b, d) = immigration.mean();
        assert_eq!(b.len(), m, "immigration vector length must equal type count");
        let stats = MeanStatistics { a, b, c, d, estimated: false };
        EnvironmentSample { offspring, immigration, stats }
    }

    /// Number of particle types `m`.
    pub fn type_count(&self) -> usize {
        self.offspring.len()
    }

    pub fn stats(&self) -> &MeanStatistics {
        &self.stats
    }

    /// Draw `(xi_i, phi_i)` for one parent of the given 1-based type.
    pub fn sample_offspring(
        &self,
        parent_type: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<u64>, f64)> {
        let m = self.type_count();
        if parent_type == 0 || parent_type > m {
            return Err(Error::BadTypeIndex { index: parent_type, m });
        }
        self.offspring[parent_type - 1].sample(rng)
    }

    /// Aggregate offspring draw for a whole population vector.
    pub fn sample_offspring_total(
        &self,
        population: &[u64],
        rng: &mut ChaCha8Rng,
    ) -> Result<(Vec<u64>, f64)> {
        let m = self.type_count();
        assert_eq!(population.len(), m);
        let mut total = vec![0u64; m];
        let mut product = 0.0;
        for (i, &v) in population.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (xi, phi) = self.offspring[i].sample_aggregate(v, rng)?;
            for (acc, x) in total.iter_mut().zip(&xi) {
                *acc = acc.checked_add(*x).ok_or(Error::CountOverflow)?;
            }
            product += phi;
        }
        Ok((total, product))
    }

    /// Draw `(eta, psi)`.
    pub fn sample_immigration(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<u64>, f64)> {
        self.immigration.sample(rng)
    }

    pub fn immigration(&self) -> &ImmigrationLaw {
        &self.immigration
    }

    /// Monte Carlo estimate of the mean statistics over `n` draws; used to
    /// validate declared means.
    pub fn estimate_stats(&self, n: u64, rng: &mut ChaCha8Rng) -> Result<MeanStatistics> {
        let m = self.type_count();
        let mut a = Matrix::zeros(m);
        let mut c = vec![0.0; m];
        let mut b = vec![0.0; m];
        let mut d = 0.0;
        for _ in 0..n {
            for i in 0..m {
                let (xi, phi) = self.offspring[i].sample(rng)?;
                for (j, &x) in xi.iter().enumerate() {
                    a.set(i, j, a.get(i, j) + x as f64);
                }
                c[i] += phi;
            }
            let (eta, psi) = self.immigration.sample(rng)?;
            for (j, &x) in eta.iter().enumerate() {
                b[j] += x as f64;
            }
            d += psi;
        }
        let scale = 1.0 / n as f64;
        a.scale_mut(scale);
        for v in c.iter_mut().chain(b.iter_mut()) {
            *v *= scale;
        }
        Ok(MeanStatistics { a, b, c, d: d * scale, estimated: true })
    }
}

/// Finite mixture over environment atoms; the measure `Q` restricted to a
/// finitely supported law.
#[derive(Clone, Debug)]
pub struct EnvironmentDistribution {
    atoms: Vec<Arc<EnvironmentSample>>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    m: usize,
}

impl EnvironmentDistribution {
    pub fn new(atoms: Vec<(f64, EnvironmentSample)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config {
                path: "environment.atoms".into(),
                message: "mixture must have at least one atom".into(),
            });
        }
        let m = atoms[0].1.type_count();
        let mut weights = Vec::with_capacity(atoms.len());
        let mut samples = Vec::with_capacity(atoms.len());
        for (idx, (w, atom)) in atoms.into_iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config {
                    path: format!("environment.atoms[{idx}].weight"),
                    message: format!("weight must be positive and finite, got {w}"),
                });
            }
            if atom.type_count() != m {
                return Err(Error::Config {
                    path: format!("environment.atoms[{idx}]"),
                    message: "all atoms must have the same type count".into(),
                });
            }
            if !atom.stats().a.is_finite() {
                return Err(Error::Config {
                    path: format!("environment.atoms[{idx}]"),
                    message: "mean matrix has non-finite entries".into(),
                });
            }
            weights.push(w);
            samples.push(Arc::new(atom));
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(EnvironmentDistribution { atoms: samples, weights, cumulative, m })
    }

    /// A single deterministic environment.
    pub fn single(atom: EnvironmentSample) -> Self {
        Self::new(vec![(1.0, atom)]).expect("single atom is always valid")
    }

    pub fn type_count(&self) -> usize {
        self.m
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, &EnvironmentSample)> {
        self.weights.iter().copied().zip(self.atoms.iter().map(|a| a.as_ref()))
    }

    /// One iid draw from the mixture.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> &Arc<EnvironmentSample> {
        if self.atoms.len() == 1 {
            return &self.atoms[0];
        }
        let u = rng.random::<f64>();
        let idx = match self.cumulative.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.atoms.len() - 1,
        };
        &self.atoms[idx]
    }

    /// Closed-form `E||A||^x` is available exactly when the environment is
    /// scalar (`m == 1`): then `||Pi_{0,n}|| = a_{n-1} ... a_0`.
    pub fn scalar_closed_form(&self) -> bool {
        self.m == 1
    }

    /// Weighted atoms as `(weight, a)` pairs for the scalar closed form.
    pub fn scalar_atoms(&self) -> Option<Vec<(f64, f64)>> {
        if !self.scalar_closed_form() {
            return None;
        }
        Some(
            self.weights
                .iter()
                .copied()
                .zip(self.atoms.iter().map(|a| a.stats().a.get(0, 0)))
                .collect(),
        )
    }

    /// True when immigration counts are almost surely zero under every atom.
    pub fn immigration_always_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.immigration().counts_always_zero())
    }
}
