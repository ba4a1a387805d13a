//! The polling-to-branching correspondence.
//!
//! One polling cycle under a fixed parameter tuple defines, per station, a
//! "visit-unit" law: serve one customer (gated: one service stage;
//! exhaustive: the whole sub-busy period clearing the station) and follow
//! every produced customer at a later station through its service within the
//! same cycle. The counts left at stations the server has already passed are
//! the offspring of the associated branching process; the switch-over
//! composition plays the same role for immigration. This module provides
//! both the samplers (realized as worklists over stations in visiting order)
//! and the exact mean-level formulas, which the test suite cross-validates
//! against Monte Carlo.

use crate::env::{sample_poisson, AmountLaw, EnvironmentDistribution, EnvironmentSample, ImmigrationLaw, MeanStatistics, OffspringLaw};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Default within-cycle service cap for one offspring or immigration draw.
pub const DEFAULT_CYCLE_SERVICE_CAP: u64 = 1_000_000;

/// One cycle's random parameter tuple: arrival rate matrices for service and
/// switch-over intervals, the routing matrix, and the per-station service
/// and switch-over time laws.
#[derive(Clone, Debug)]
pub struct PollingCycleParams {
    m: usize,
    /// `eps[i][j]`: Poisson arrival rate at station `j` while a station-`i`
    /// customer is in service.
    pub service_rates: Matrix,
    /// `eps_sw[i][j]`: arrival rate at `j` during the switch-over out of `i`.
    pub switchover_rates: Matrix,
    /// Probability that a served station-`i` customer leaves the system.
    pub leave: Vec<f64>,
    /// `route[i][j]`: probability the served customer moves to station `j`.
    pub route: Matrix,
    pub service: Vec<AmountLaw>,
    pub switchover: Vec<AmountLaw>,
}

impl PollingCycleParams {
    pub fn new(
        service_rates: Matrix,
        switchover_rates: Matrix,
        leave: Vec<f64>,
        route: Matrix,
        service: Vec<AmountLaw>,
        switchover: Vec<AmountLaw>,
    ) -> Result<Self> {
        let m = service_rates.dim();
        let params = PollingCycleParams {
            m,
            service_rates,
            switchover_rates,
            leave,
            route,
            service,
            switchover,
        };
        params.validate("polling")?;
        Ok(params)
    }

    pub fn station_count(&self) -> usize {
        self.m
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let m = self.m;
        let bad = |sub: String, message: String| Error::Config { path: format!("{path}.{sub}"), message };
        if self.switchover_rates.dim() != m || self.route.dim() != m {
            return Err(bad("".into(), "matrix dimensions disagree".into()));
        }
        if self.leave.len() != m || self.service.len() != m || self.switchover.len() != m {
            return Err(bad("".into(), "per-station vectors must have length m".into()));
        }
        for i in 0..m {
            for j in 0..m {
                let e = self.service_rates.get(i, j);
                if !(e.is_finite() && e >= 0.0) {
                    return Err(bad(format!("service_arrivals[{}][{}]", i + 1, j + 1), format!("negative or non-finite rate {e}")));
                }
                let e = self.switchover_rates.get(i, j);
                if !(e.is_finite() && e >= 0.0) {
                    return Err(bad(format!("switchover_arrivals[{}][{}]", i + 1, j + 1), format!("negative or non-finite rate {e}")));
                }
                let g = self.route.get(i, j);
                if !(g.is_finite() && g >= 0.0) {
                    return Err(bad(format!("routing[{}][{}]", i + 1, j + 1), format!("negative or non-finite probability {g}")));
                }
            }
            if !(self.leave[i].is_finite() && self.leave[i] >= 0.0) {
                return Err(bad(format!("routing[{}][0]", i + 1), format!("negative leave probability {}", self.leave[i])));
            }
            let row_sum: f64 = self.leave[i] + self.route.row(i).iter().sum::<f64>();
            if (row_sum - 1.0).abs() > 1e-9 {
                return Err(bad(format!("routing[{}]", i + 1), format!("row must sum to 1, got {row_sum}")));
            }
            self.service[i].validate(&format!("{path}.service[{}]", i + 1))?;
            self.switchover[i].validate(&format!("{path}.switchover[{}]", i + 1))?;
        }
        if !self.leave.iter().any(|&g| g > 0.0) {
            return Err(bad("routing".into(), "at least one station needs a positive leave probability".into()));
        }
        Ok(())
    }

    /// Relabel stations so that physical station `start` becomes type 1 of
    /// the associated branching process (cyclic rotation).
    pub fn rotated(&self, start: usize) -> PollingCycleParams {
        let m = self.m;
        let old = |t: usize| (start + t) % m;
        let mut service_rates = Matrix::zeros(m);
        let mut switchover_rates = Matrix::zeros(m);
        let mut route = Matrix::zeros(m);
        for i in 0..m {
            for j in 0..m {
                service_rates.set(i, j, self.service_rates.get(old(i), old(j)));
                switchover_rates.set(i, j, self.switchover_rates.get(old(i), old(j)));
                route.set(i, j, self.route.get(old(i), old(j)));
            }
        }
        PollingCycleParams {
            m,
            service_rates,
            switchover_rates,
            leave: (0..m).map(|i| self.leave[old(i)]).collect(),
            route,
            service: (0..m).map(|i| self.service[old(i)].clone()).collect(),
            switchover: (0..m).map(|i| self.switchover[old(i)].clone()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Discipline {
    Gated,
    Exhaustive,
}

/// What counts as final product in a polling experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMode {
    /// Each service contributes its service time; switch-overs contribute
    /// nothing.
    ServiceTime,
    /// Service times plus switch-over times.
    ServicePlusSwitchover,
    /// One unit per service (customer counting).
    UnitPerService,
}

/// Per-station mean law: `h[i][j]` mean customers left at `j` by one
/// station-`i` visit-unit, `c[i]` its mean final product, `l[i][j]` mean
/// switch-over arrivals surviving as immigrants, `p[i]` the switch-over
/// product contribution.
#[derive(Clone, Debug)]
pub struct StationMeanLaw {
    pub h: Matrix,
    pub c: Vec<f64>,
    pub l: Matrix,
    pub p: Vec<f64>,
}

/// Mean visit-unit law of one gated station-`i` customer stage.
fn gated_means(params: &PollingCycleParams, i: usize, mode: ProductMode) -> (Vec<f64>, f64) {
    let m = params.m;
    let mean_tau = params.service[i].mean();
    let mut h = vec![0.0; m];
    for j in 0..m {
        h[j] = params.route.get(i, j) + params.service_rates.get(i, j) * mean_tau;
    }
    let c = match mode {
        ProductMode::UnitPerService => 1.0,
        _ => mean_tau,
    };
    (h, c)
}

/// Mean visit-unit law of one exhaustive station-`i` clearing, derived by
/// implicit differentiation of the fixed-point transform; validated against
/// Monte Carlo in the test suite.
fn exhaustive_means(
    params: &PollingCycleParams,
    i: usize,
    mode: ProductMode,
) -> Result<(Vec<f64>, f64)> {
    let m = params.m;
    let g_ii = params.route.get(i, i);
    if g_ii >= 1.0 {
        return Err(Error::UnstableStation { station: i + 1, load: f64::INFINITY });
    }
    let mean_w = params.service[i].mean() / (1.0 - g_ii);
    let own_load = mean_w * params.service_rates.get(i, i);
    if own_load >= 1.0 {
        return Err(Error::UnstableStation { station: i + 1, load: own_load });
    }
    let mut h = vec![0.0; m];
    for j in 0..m {
        if j == i {
            continue;
        }
        h[j] = (params.route.get(i, j) / (1.0 - g_ii) + mean_w * params.service_rates.get(i, j))
            / (1.0 - own_load);
    }
    let base = match mode {
        ProductMode::UnitPerService => 1.0 / (1.0 - g_ii),
        _ => mean_w,
    };
    Ok((h, base / (1.0 - own_load)))
}

/// Compose the per-cycle mean offspring matrix from per-station visit-unit
/// means, by the backward recursion and, independently, by the product of
/// one-row elementary matrices; the two must agree to 1e-12.
pub fn compose_cycle(h: &Matrix) -> Result<Matrix> {
    let m = h.dim();
    // Backward recursion: row m-1 is h's, then
    // a_ij = h_ij 1{j <= i} + sum_{k>i} h_ik a_kj.
    let mut a = Matrix::zeros(m);
    for j in 0..m {
        a.set(m - 1, j, h.get(m - 1, j));
    }
    for i in (0..m.saturating_sub(1)).rev() {
        for j in 0..m {
            let mut v = if j <= i { h.get(i, j) } else { 0.0 };
            for k in i + 1..m {
                v += h.get(i, k) * a.get(k, j);
            }
            a.set(i, j, v);
        }
    }
    // Elementary-matrix product H^(1) H^(2) ... H^(m).
    let mut prod = Matrix::identity(m);
    for i in 0..m {
        let mut hi = Matrix::identity(m);
        for j in 0..m {
            hi.set(i, j, h.get(i, j));
        }
        prod = prod.mul(&hi);
    }
    let diff = a.max_abs_diff(&prod);
    if diff > 1e-12 * (1.0 + a.sum_norm()) {
        return Err(Error::Inconsistency(format!(
            "cycle composition paths disagree by {diff:e} for H = {h}"
        )));
    }
    Ok(a)
}

/// Per-visit cumulative product means `C = (E - H^Delta)^{-1} c`, by
/// back-substitution and cross-checked against the explicit unit-triangular
/// inverse (Neumann sum of the nilpotent strict upper triangle).
pub fn final_product_mean(h: &Matrix, c: &[f64]) -> Result<Vec<f64>> {
    let m = h.dim();
    assert_eq!(c.len(), m);
    let mut out = vec![0.0; m];
    for i in (0..m).rev() {
        let mut v = c[i];
        for k in i + 1..m {
            v += h.get(i, k) * out[k];
        }
        out[i] = v;
    }
    // Explicit inverse: sum_{k=0}^{m-1} (H^Delta)^k applied to c.
    let mut upper = Matrix::zeros(m);
    for i in 0..m {
        for j in i + 1..m {
            upper.set(i, j, h.get(i, j));
        }
    }
    let mut inverse = Matrix::identity(m);
    let mut power = Matrix::identity(m);
    for _ in 1..m {
        power = power.mul(&upper);
        for i in 0..m {
            for j in 0..m {
                inverse.set(i, j, inverse.get(i, j) + power.get(i, j));
            }
        }
    }
    let check = inverse.mul_vec(c);
    let scale = 1.0 + out.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diff = out
        .iter()
        .zip(&check)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if diff > 1e-12 * scale {
        return Err(Error::Inconsistency(format!(
            "final-product mean paths disagree by {diff:e}"
        )));
    }
    Ok(out)
}

/// Mean immigration `(B, D)` of one cycle's switch-over composition.
///
/// Index ranges: arrivals at station `j` during the switch-over out of
/// station `i >= j` stay behind the server and count directly, so the direct
/// term is `sum_{i >= j} l_ij`; arrivals ahead of the server (`k > i`) are
/// served within the cycle and enter through the composed residues `a_kj`
/// and cumulative products `C_k`.
pub fn immigration_mean(l: &Matrix, p: &[f64], a: &Matrix, c_cum: &[f64]) -> (Vec<f64>, f64) {
    let m = l.dim();
    let mut b = vec![0.0; m];
    for j in 0..m {
        let mut v = 0.0;
        for i in j..m {
            v += l.get(i, j);
        }
        for i in 0..m {
            for k in i + 1..m {
                v += l.get(i, k) * a.get(k, j);
            }
        }
        b[j] = v;
    }
    let mut d = 0.0;
    for i in 0..m {
        d += p[i];
        for k in i + 1..m {
            d += l.get(i, k) * c_cum[k];
        }
    }
    (b, d)
}

/// One station visit-unit draw.
#[derive(Clone, Debug)]
pub struct UnitDraw {
    pub counts: Vec<u64>,
    pub product: f64,
    pub services: u64,
    pub service_time: f64,
}

/// One cycle's switch-over (immigration) draw.
#[derive(Clone, Debug)]
pub struct ImmigrationDraw {
    pub counts: Vec<u64>,
    pub product: f64,
    pub services: u64,
    pub service_time: f64,
    pub switchover_time: f64,
}

/// One raw service or switch-over interval: its duration, the Poisson
/// arrivals it generated, and (for services) where the customer was routed.
#[derive(Clone, Debug)]
pub struct StageDraw {
    pub duration: f64,
    pub arrivals: Vec<u64>,
    pub routed_to: Option<usize>,
}

/// The sampling-level and mean-level law of one polling cycle under fixed
/// parameters: the associated branching environment atom.
#[derive(Clone, Debug)]
pub struct CycleLaw {
    params: PollingCycleParams,
    disciplines: Vec<Discipline>,
    mode: ProductMode,
    station: StationMeanLaw,
    stats: MeanStatistics,
    service_cap: u64,
}

impl CycleLaw {
    pub fn new(
        params: PollingCycleParams,
        disciplines: Vec<Discipline>,
        mode: ProductMode,
    ) -> Result<Self> {
        let m = params.station_count();
        if disciplines.len() != m {
            return Err(Error::Config {
                path: "polling.disciplines".into(),
                message: format!("expected {m} entries, got {}", disciplines.len()),
            });
        }
        let mut h = Matrix::zeros(m);
        let mut c = vec![0.0; m];
        for i in 0..m {
            let (row, ci) = match disciplines[i] {
                Discipline::Gated => gated_means(&params, i, mode),
                Discipline::Exhaustive => exhaustive_means(&params, i, mode)?,
            };
            for (j, v) in row.iter().enumerate() {
                h.set(i, j, *v);
            }
            c[i] = ci;
        }
        let mut l = Matrix::zeros(m);
        let mut p = vec![0.0; m];
        for i in 0..m {
            let mean_sigma = params.switchover[i].mean();
            for j in 0..m {
                l.set(i, j, params.switchover_rates.get(i, j) * mean_sigma);
            }
            p[i] = match mode {
                ProductMode::ServicePlusSwitchover => mean_sigma,
                _ => 0.0,
            };
        }
        let a = compose_cycle(&h)?;
        let c_cum = final_product_mean(&h, &c)?;
        let (b, d) = immigration_mean(&l, &p, &a, &c_cum);
        let stats = MeanStatistics { a, b, c: c_cum, d, estimated: false };
        Ok(CycleLaw {
            params,
            disciplines,
            mode,
            station: StationMeanLaw { h, c, l, p },
            stats,
            service_cap: DEFAULT_CYCLE_SERVICE_CAP,
        })
    }

    pub fn with_service_cap(mut self, cap: u64) -> Self {
        self.service_cap = cap;
        self
    }

    pub fn station_count(&self) -> usize {
        self.params.station_count()
    }

    pub fn params(&self) -> &PollingCycleParams {
        &self.params
    }

    pub fn disciplines(&self) -> &[Discipline] {
        &self.disciplines
    }

    pub fn mode(&self) -> ProductMode {
        self.mode
    }

    /// Per-station visit-unit means before cycle composition.
    pub fn station_means(&self) -> &StationMeanLaw {
        &self.station
    }

    /// Composed mean statistics `(A, B, C, D)` of the associated branching
    /// environment.
    pub fn stats(&self) -> &MeanStatistics {
        &self.stats
    }

    pub fn offspring_mean(&self, station: usize) -> (Vec<f64>, f64) {
        (self.stats.a.row(station).to_vec(), self.stats.c[station])
    }

    pub fn immigration_mean(&self) -> (Vec<f64>, f64) {
        (self.stats.b.clone(), self.stats.d)
    }

    /// The same cycle law with stations relabeled so physical station
    /// `start` becomes type 1.
    pub fn rotated(&self, start: usize) -> Result<CycleLaw> {
        let m = self.station_count();
        let disciplines = (0..m).map(|i| self.disciplines[(start + i) % m]).collect();
        CycleLaw::new(self.params.rotated(start), disciplines, self.mode)
            .map(|law| law.with_service_cap(self.service_cap))
    }

    /// One service stage at station `i`: duration, Poisson arrivals over the
    /// stage, and the routing of the served customer.
    pub fn sample_service_stage(&self, i: usize, rng: &mut ChaCha8Rng) -> Result<StageDraw> {
        let m = self.station_count();
        let tau = self.params.service[i].sample(rng);
        let mut arrivals = Vec::with_capacity(m);
        for j in 0..m {
            arrivals.push(sample_poisson(self.params.service_rates.get(i, j) * tau, rng)?);
        }
        let mut routed_to = None;
        let mut u = rng.random::<f64>() - self.params.leave[i];
        if u >= 0.0 {
            for j in 0..m {
                u -= self.params.route.get(i, j);
                if u < 0.0 {
                    routed_to = Some(j);
                    break;
                }
            }
        }
        Ok(StageDraw { duration: tau, arrivals, routed_to })
    }

    /// One switch-over out of station `i`.
    pub fn sample_switchover(&self, i: usize, rng: &mut ChaCha8Rng) -> Result<StageDraw> {
        let m = self.station_count();
        let sigma = self.params.switchover[i].sample(rng);
        let mut arrivals = Vec::with_capacity(m);
        for j in 0..m {
            arrivals.push(sample_poisson(self.params.switchover_rates.get(i, j) * sigma, rng)?);
        }
        Ok(StageDraw { duration: sigma, arrivals, routed_to: None })
    }

    fn product_of(&self, services: u64, service_time: f64) -> f64 {
        match self.mode {
            ProductMode::UnitPerService => services as f64,
            _ => service_time,
        }
    }

    /// Serve one visit-unit at station `k`, accumulating counts left for the
    /// next cycle into `final_counts` (stations `<= k`) and work for later
    /// stations of the same cycle into `pending` (stations `> k`).
    fn serve_unit(
        &self,
        k: usize,
        final_counts: &mut [u64],
        pending: &mut [u64],
        services: &mut u64,
        service_time: &mut f64,
        budget: &mut u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        let distribute = |stage: &StageDraw,
                              own: Option<&mut u64>,
                              final_counts: &mut [u64],
                              pending: &mut [u64]|
         -> Result<()> {
            let mut own = own;
            for (j, &n) in stage.arrivals.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                match &mut own {
                    Some(own) if j == k => {
                        **own = own.checked_add(n).ok_or(Error::CountOverflow)?;
                        continue;
                    }
                    _ => {}
                }
                let slot = if j <= k { &mut final_counts[j] } else { &mut pending[j] };
                *slot = slot.checked_add(n).ok_or(Error::CountOverflow)?;
            }
            if let Some(j) = stage.routed_to {
                match &mut own {
                    Some(own) if j == k => {
                        **own += 1;
                        return Ok(());
                    }
                    _ => {}
                }
                let slot = if j <= k { &mut final_counts[j] } else { &mut pending[j] };
                *slot = slot.checked_add(1).ok_or(Error::CountOverflow)?;
            }
            Ok(())
        };

        match self.disciplines[k] {
            Discipline::Gated => {
                if *budget == 0 {
                    return Err(Error::CycleCapExceeded { cap: self.service_cap });
                }
                *budget -= 1;
                let stage = self.sample_service_stage(k, rng)?;
                *services += 1;
                *service_time += stage.duration;
                distribute(&stage, None, final_counts, pending)?;
            }
            Discipline::Exhaustive => {
                // Clear the cascade seeded by one customer: own-station
                // arrivals and self-feedback are served within the unit, so
                // the unit leaves nothing at its own station.
                let mut own: u64 = 1;
                while own > 0 {
                    own -= 1;
                    if *budget == 0 {
                        return Err(Error::CycleCapExceeded { cap: self.service_cap });
                    }
                    *budget -= 1;
                    let stage = self.sample_service_stage(k, rng)?;
                    *services += 1;
                    *service_time += stage.duration;
                    distribute(&stage, Some(&mut own), final_counts, pending)?;
                }
            }
        }
        Ok(())
    }

    /// One draw from the offspring law of type `station` (0-based): the
    /// within-cycle recursion seeded by a single station-`station` customer.
    pub fn sample_offspring_unit(&self, station: usize, rng: &mut ChaCha8Rng) -> Result<UnitDraw> {
        let m = self.station_count();
        let mut final_counts = vec![0u64; m];
        let mut pending = vec![0u64; m];
        let mut services = 0u64;
        let mut service_time = 0.0;
        let mut budget = self.service_cap;
        pending[station] = 1;
        for k in station..m {
            while pending[k] > 0 {
                pending[k] -= 1;
                self.serve_unit(
                    k,
                    &mut final_counts,
                    &mut pending,
                    &mut services,
                    &mut service_time,
                    &mut budget,
                    rng,
                )?;
            }
        }
        Ok(UnitDraw {
            counts: final_counts,
            product: self.product_of(services, service_time),
            services,
            service_time,
        })
    }

    /// One draw from the immigration law: all m switch-overs of a cycle,
    /// with arrivals ahead of the server served within the cycle.
    pub fn sample_immigration(&self, rng: &mut ChaCha8Rng) -> Result<ImmigrationDraw> {
        let m = self.station_count();
        let mut final_counts = vec![0u64; m];
        let mut pending = vec![0u64; m];
        let mut services = 0u64;
        let mut service_time = 0.0;
        let mut switchover_time = 0.0;
        let mut budget = self.service_cap;
        for i in 0..m {
            let stage = self.sample_switchover(i, rng)?;
            switchover_time += stage.duration;
            for (j, &n) in stage.arrivals.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let slot = if j <= i { &mut final_counts[j] } else { &mut pending[j] };
                *slot = slot.checked_add(n).ok_or(Error::CountOverflow)?;
            }
        }
        for k in 0..m {
            while pending[k] > 0 {
                pending[k] -= 1;
                self.serve_unit(
                    k,
                    &mut final_counts,
                    &mut pending,
                    &mut services,
                    &mut service_time,
                    &mut budget,
                    rng,
                )?;
            }
        }
        let mut product = self.product_of(services, service_time);
        if self.mode == ProductMode::ServicePlusSwitchover {
            product += switchover_time;
        }
        Ok(ImmigrationDraw {
            counts: final_counts,
            product,
            services,
            service_time,
            switchover_time,
        })
    }
}

/// Finite mixture of cycle laws: the per-cycle random environment of a
/// polling system. All atoms must share station count, disciplines and
/// product mode.
#[derive(Clone, Debug)]
pub struct CycleDistribution {
    atoms: Vec<Arc<CycleLaw>>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CycleDistribution {
    pub fn new(atoms: Vec<(f64, CycleLaw)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Config {
                path: "polling.atoms".into(),
                message: "mixture must have at least one atom".into(),
            });
        }
        let m = atoms[0].1.station_count();
        let disciplines = atoms[0].1.disciplines().to_vec();
        let mode = atoms[0].1.mode();
        let mut weights = Vec::new();
        let mut laws = Vec::new();
        for (idx, (w, law)) in atoms.into_iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config {
                    path: format!("polling.atoms[{idx}].weight"),
                    message: format!("weight must be positive and finite, got {w}"),
                });
            }
            if law.station_count() != m || law.disciplines() != disciplines || law.mode() != mode {
                return Err(Error::Config {
                    path: format!("polling.atoms[{idx}]"),
                    message: "atoms must share station count, disciplines and product mode".into(),
                });
            }
            weights.push(w);
            laws.push(Arc::new(law));
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
        Ok(CycleDistribution { atoms: laws, weights, cumulative })
    }

    pub fn station_count(&self) -> usize {
        self.atoms[0].station_count()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, &CycleLaw)> {
        self.weights.iter().copied().zip(self.atoms.iter().map(|a| a.as_ref()))
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> &Arc<CycleLaw> {
        if self.atoms.len() == 1 {
            return &self.atoms[0];
        }
        let u = rng.random::<f64>();
        let idx = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.atoms.len() - 1);
        &self.atoms[idx]
    }

    /// The associated branching environment: each cycle atom becomes an
    /// environment atom whose offspring laws are the station visit-units and
    /// whose immigration law is the switch-over composition. `start` is the
    /// 0-based station the busy period starts at; station labels rotate so
    /// it becomes type 1.
    pub fn associated_environment(&self, start: usize) -> Result<EnvironmentDistribution> {
        let m = self.station_count();
        let mut env_atoms = Vec::with_capacity(self.atoms.len());
        for (w, law) in self.weights.iter().zip(&self.atoms) {
            let rotated = if start == 0 {
                law.as_ref().clone()
            } else {
                law.rotated(start)?
            };
            let shared = Arc::new(rotated);
            let offspring = (0..m)
                .map(|i| OffspringLaw::Station { cycle: Arc::clone(&shared), station: i })
                .collect();
            let immigration = ImmigrationLaw::Cycle(shared);
            env_atoms.push((*w, EnvironmentSample::new(offspring, immigration)));
        }
        EnvironmentDistribution::new(env_atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use approx::assert_abs_diff_eq;

    fn gated_toy() -> PollingCycleParams {
        // No routing feedback, eps = [[0.2,0.3],[0.1,0.2]], unit mean
        // services; switch-over means (2,3) with eps_sw = [[0,1],[1,0]].
        PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.2, 0.3], vec![0.1, 0.2]]),
            Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![1.0, 1.0],
            Matrix::zeros(2),
            vec![AmountLaw::Exponential { mean: 1.0 }, AmountLaw::Exponential { mean: 1.0 }],
            vec![AmountLaw::Exponential { mean: 2.0 }, AmountLaw::Exponential { mean: 3.0 }],
        )
        .unwrap()
    }

    fn gated_toy_law(mode: ProductMode) -> CycleLaw {
        CycleLaw::new(gated_toy(), vec![Discipline::Gated; 2], mode).unwrap()
    }

    #[test]
    fn gated_station_means() {
        let law = gated_toy_law(ProductMode::ServiceTime);
        let sm = law.station_means();
        let expect = [[0.2, 0.3], [0.1, 0.2]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(sm.h.get(i, j), expect[i][j], epsilon = 1e-12);
            }
        }
        assert_eq!(sm.c, vec![1.0, 1.0]);
        // L = eps_sw scaled by switch-over means, p = 0 in service-time mode.
        assert_abs_diff_eq!(sm.l.get(0, 1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sm.l.get(1, 0), 3.0, epsilon = 1e-12);
        assert_eq!(sm.p, vec![0.0, 0.0]);
        let plus = gated_toy_law(ProductMode::ServicePlusSwitchover);
        assert_eq!(plus.station_means().p, vec![2.0, 3.0]);
    }

    #[test]
    fn gated_pure_routing_rows() {
        // eps = 0, every served customer routed to station 1: H row i = e1.
        let params = PollingCycleParams::new(
            Matrix::zeros(2),
            Matrix::zeros(2),
            vec![0.0, 0.5],
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 0.0]]),
            vec![AmountLaw::Constant(1.0), AmountLaw::Constant(1.0)],
            vec![AmountLaw::Constant(0.1), AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let law = CycleLaw::new(params, vec![Discipline::Gated; 2], ProductMode::ServiceTime).unwrap();
        assert_eq!(law.station_means().h.get(0, 0), 1.0);
        assert_eq!(law.station_means().h.get(0, 1), 0.0);
        assert_eq!(law.station_means().h.get(1, 0), 0.5);
    }

    #[test]
    fn exhaustive_reduces_to_gated_form_without_self_interaction() {
        // gamma_ii = 0 and eps_ii = 0: h_ij = gamma_ij + E[tau] eps_ij.
        let params = PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.0, 0.3], vec![0.2, 0.0]]),
            Matrix::zeros(2),
            vec![0.6, 0.9],
            Matrix::from_rows(&[vec![0.0, 0.4], vec![0.1, 0.0]]),
            vec![AmountLaw::Exponential { mean: 1.5 }, AmountLaw::Constant(1.0)],
            vec![AmountLaw::Constant(0.1), AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let law =
            CycleLaw::new(params, vec![Discipline::Exhaustive; 2], ProductMode::ServiceTime).unwrap();
        let sm = law.station_means();
        assert_abs_diff_eq!(sm.h.get(0, 1), 0.4 + 1.5 * 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(sm.h.get(1, 0), 0.1 + 1.0 * 0.2, epsilon = 1e-12);
        assert_eq!(sm.h.get(0, 0), 0.0);
        assert_abs_diff_eq!(sm.c[0], 1.5, epsilon = 1e-12);
    }

    fn exhaustive_worked_params() -> PollingCycleParams {
        PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.2, 0.3], vec![0.1, 0.2]]),
            Matrix::from_rows(&[vec![0.1, 0.2], vec![0.1, 0.1]]),
            vec![0.25, 0.5],
            Matrix::from_rows(&[vec![0.5, 0.25], vec![0.2, 0.3]]),
            vec![AmountLaw::Exponential { mean: 1.0 }, AmountLaw::Exponential { mean: 0.5 }],
            vec![AmountLaw::Exponential { mean: 0.5 }, AmountLaw::Exponential { mean: 0.5 }],
        )
        .unwrap()
    }

    #[test]
    fn exhaustive_worked_example_means() {
        // Station 1: W = 1/(1-0.5) = 2, guard 2*0.2 = 0.4 < 1,
        // h_12 = (0.25/0.5 + 2*0.3)/0.6 = 1.1/0.6, c_1 = 2/0.6.
        let law = CycleLaw::new(
            exhaustive_worked_params(),
            vec![Discipline::Exhaustive; 2],
            ProductMode::ServiceTime,
        )
        .unwrap();
        let sm = law.station_means();
        assert_abs_diff_eq!(sm.h.get(0, 1), 1.1 / 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(sm.c[0], 2.0 / 0.6, epsilon = 1e-12);
        assert_eq!(sm.h.get(0, 0), 0.0);
        assert_eq!(sm.h.get(1, 1), 0.0);
    }

    #[test]
    fn exhaustive_instability_is_a_guard_error() {
        // W_1 * eps_11 = 2 * 0.6 = 1.2 >= 1.
        let params = PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.6, 0.3], vec![0.1, 0.2]]),
            Matrix::zeros(2),
            vec![0.25, 0.5],
            Matrix::from_rows(&[vec![0.5, 0.25], vec![0.2, 0.3]]),
            vec![AmountLaw::Exponential { mean: 1.0 }, AmountLaw::Exponential { mean: 0.5 }],
            vec![AmountLaw::Constant(0.1), AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let err = CycleLaw::new(params, vec![Discipline::Exhaustive; 2], ProductMode::ServiceTime)
            .unwrap_err();
        match err {
            Error::UnstableStation { station, load } => {
                assert_eq!(station, 1);
                assert_abs_diff_eq!(load, 1.2, epsilon = 1e-12);
            }
            other => panic!("expected guard violation, got {other}"),
        }
    }

    #[test]
    fn compose_cycle_symbolic_two_stations() {
        // A = [[h11 + h12 h21, h12 h22], [h21, h22]].
        let h = Matrix::from_rows(&[vec![0.3, 0.5], vec![0.7, 0.2]]);
        let a = compose_cycle(&h).unwrap();
        assert_abs_diff_eq!(a.get(0, 0), 0.3 + 0.5 * 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(a.get(0, 1), 0.5 * 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(a.get(1, 0), 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(a.get(1, 1), 0.2, epsilon = 1e-14);
    }

    #[test]
    fn compose_cycle_zero_and_triangular() {
        assert_eq!(compose_cycle(&Matrix::zeros(3)).unwrap(), Matrix::zeros(3));
        // Strictly upper-triangular H with zero diagonal (m=3): every
        // produced customer sits ahead of the server and is absorbed within
        // the cycle by sterile later stations, so A = 0. (Both composition
        // paths agree on this; the j <= i indicator in the backward
        // recursion is what kills the direct h_13 term.)
        let mut h = Matrix::zeros(3);
        h.set(0, 1, 0.4);
        h.set(0, 2, 0.3);
        h.set(1, 2, 0.6);
        assert_eq!(compose_cycle(&h).unwrap(), Matrix::zeros(3));
        // Lower-triangular H has nothing served later in the cycle: A = H.
        let mut low = Matrix::zeros(3);
        low.set(0, 0, 0.2);
        low.set(1, 0, 0.5);
        low.set(2, 1, 0.7);
        low.set(2, 2, 0.1);
        assert_eq!(compose_cycle(&low).unwrap(), low);
    }

    #[test]
    fn compose_cycle_paths_agree_on_random_instances() {
        // compose_cycle asserts recursion == elementary-product internally;
        // drive it over 1000 random H draws, m in 1..=5.
        let mut rng = StreamKey::new(40).rng();
        use rand::Rng;
        for trial in 0..1000 {
            let m = 1 + (trial % 5);
            let rows: Vec<Vec<f64>> =
                (0..m).map(|_| (0..m).map(|_| 2.0 * rng.random::<f64>()).collect()).collect();
            compose_cycle(&Matrix::from_rows(&rows)).unwrap();
        }
    }

    #[test]
    fn final_product_mean_back_substitution() {
        // m=2, h12 = 0.5, c = (1,2): C = (2,2).
        let mut h = Matrix::zeros(2);
        h.set(0, 1, 0.5);
        let c = final_product_mean(&h, &[1.0, 2.0]).unwrap();
        assert_eq!(c, vec![2.0, 2.0]);
        assert_eq!(final_product_mean(&h, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        // Lower-triangular H has an empty strict upper triangle: C = c.
        let mut low = Matrix::zeros(2);
        low.set(1, 0, 0.9);
        low.set(0, 0, 0.9);
        assert_eq!(final_product_mean(&low, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn immigration_mean_trivia() {
        // L = 0: B = 0 and D = sum p_i.
        let a = Matrix::from_rows(&[vec![0.3, 0.1], vec![0.2, 0.4]]);
        let (b, d) = immigration_mean(&Matrix::zeros(2), &[0.5, 0.7], &a, &[1.0, 2.0]);
        assert_eq!(b, vec![0.0, 0.0]);
        assert_abs_diff_eq!(d, 1.2, epsilon = 1e-14);
        // Single station: no later stations, B = 0 offsets vanish, D = p_1.
        let (b1, d1) = immigration_mean(&Matrix::from_rows(&[vec![0.8]]), &[0.3], &Matrix::from_rows(&[vec![0.5]]), &[2.0]);
        assert_eq!(b1, vec![0.8]);
        assert_abs_diff_eq!(d1, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn immigration_mean_resolved_index_ranges() {
        // m=2, l_12 = 1, p = 0, a_2. = (0.1, 0.2), C_2 = 2. Arrivals behind
        // the server (i >= j) count directly; the l_12 arrivals are served
        // within the cycle, so B = (l_12 a_21, l_12 a_22) = (0.1, 0.2) and
        // D = l_12 C_2 = 2. The Monte Carlo consistency tests pin these
        // ranges against the samplers.
        let l = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let a = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.1, 0.2]]);
        let (b, d) = immigration_mean(&l, &[0.0, 0.0], &a, &[0.0, 2.0]);
        assert_abs_diff_eq!(b[0], 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(b[1], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(d, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn offspring_unit_without_customers_is_one_service() {
        // chi produces no customers: offspring 0, product = one service.
        let params = PollingCycleParams::new(
            Matrix::zeros(2),
            Matrix::zeros(2),
            vec![1.0, 1.0],
            Matrix::zeros(2),
            vec![AmountLaw::Constant(1.25), AmountLaw::Constant(2.0)],
            vec![AmountLaw::Constant(0.1), AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let law = CycleLaw::new(params, vec![Discipline::Gated; 2], ProductMode::ServiceTime).unwrap();
        let mut rng = StreamKey::new(41).rng();
        let unit = law.sample_offspring_unit(0, &mut rng).unwrap();
        assert_eq!(unit.counts, vec![0, 0]);
        assert_eq!(unit.product, 1.25);
        assert_eq!(unit.services, 1);
    }

    #[test]
    fn last_station_unit_has_no_recursion() {
        // F^(m) = chi^(m): a unit at the last station is one raw stage.
        let law = gated_toy_law(ProductMode::ServiceTime);
        let key = StreamKey::new(42);
        let unit = law.sample_offspring_unit(1, &mut key.rng()).unwrap();
        let stage = law.sample_service_stage(1, &mut key.rng()).unwrap();
        assert_eq!(unit.services, 1);
        assert_eq!(unit.counts, stage.arrivals);
        assert_eq!(unit.product, stage.duration);
    }

    #[test]
    fn gated_offspring_unit_mean_matches_composed_row() {
        // Empirical mean of the station-1 unit vs A row 1 = (0.23, 0.06)
        // and C_1, within 5 sigma at 1e6 draws.
        let law = gated_toy_law(ProductMode::ServiceTime);
        let stats = law.stats().clone();
        assert_abs_diff_eq!(stats.a.get(0, 0), 0.23, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.a.get(0, 1), 0.06, epsilon = 1e-12);
        let mut rng = StreamKey::new(43).rng();
        let n = 1_000_000u64;
        let mut sums = [0.0f64; 2];
        let mut sqs = [0.0f64; 2];
        let mut prod_sum = 0.0;
        let mut prod_sq = 0.0;
        for _ in 0..n {
            let unit = law.sample_offspring_unit(0, &mut rng).unwrap();
            for j in 0..2 {
                let x = unit.counts[j] as f64;
                sums[j] += x;
                sqs[j] += x * x;
            }
            prod_sum += unit.product;
            prod_sq += unit.product * unit.product;
        }
        for j in 0..2 {
            let mean = sums[j] / n as f64;
            let var = (sqs[j] / n as f64 - mean * mean).max(1e-12);
            let sigma = (var / n as f64).sqrt();
            let expect = stats.a.get(0, j);
            assert!((mean - expect).abs() < 5.0 * sigma, "count {j}: {mean} vs {expect}");
        }
        let mean = prod_sum / n as f64;
        let var = (prod_sq / n as f64 - mean * mean).max(1e-12);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - stats.c[0]).abs() < 5.0 * sigma, "product {mean} vs {}", stats.c[0]);
    }

    #[test]
    fn immigration_draw_trivia() {
        // All switch-over arrival rates zero, constant switch-over times:
        // counts 0 and, with switch-over counted as product, psi = sum.
        let params = PollingCycleParams::new(
            Matrix::zeros(2),
            Matrix::zeros(2),
            vec![1.0, 1.0],
            Matrix::zeros(2),
            vec![AmountLaw::Constant(1.0), AmountLaw::Constant(1.0)],
            vec![AmountLaw::Constant(0.5), AmountLaw::Constant(0.75)],
        )
        .unwrap();
        let law = CycleLaw::new(
            params,
            vec![Discipline::Gated; 2],
            ProductMode::ServicePlusSwitchover,
        )
        .unwrap();
        let mut rng = StreamKey::new(44).rng();
        let draw = law.sample_immigration(&mut rng).unwrap();
        assert_eq!(draw.counts, vec![0, 0]);
        assert_eq!(draw.product, 1.25);
        assert_eq!(draw.services, 0);
    }

    #[test]
    fn single_station_immigration_has_no_recursion() {
        let params = PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.4]]),
            Matrix::from_rows(&[vec![0.7]]),
            vec![1.0],
            Matrix::from_rows(&[vec![0.0]]),
            vec![AmountLaw::Exponential { mean: 1.0 }],
            vec![AmountLaw::Exponential { mean: 2.0 }],
        )
        .unwrap();
        let law = CycleLaw::new(params, vec![Discipline::Gated], ProductMode::ServiceTime).unwrap();
        let mut rng = StreamKey::new(45).rng();
        for _ in 0..200 {
            let draw = law.sample_immigration(&mut rng).unwrap();
            assert_eq!(draw.services, 0, "m=1 switch-over arrivals are never served in-cycle");
        }
        // B = l_11 = 0.7 * 2.
        assert_abs_diff_eq!(law.stats().b[0], 1.4, epsilon = 1e-12);
        assert_eq!(law.stats().d, 0.0);
    }

    #[test]
    fn gated_immigration_mean_matches_formulas() {
        // eta means must match B = (3.2, 0.4) and psi mean D = 2 for the
        // gated toy in service-time mode, within 5 sigma at 1e6 draws.
        let law = gated_toy_law(ProductMode::ServiceTime);
        let stats = law.stats().clone();
        assert_abs_diff_eq!(stats.b[0], 3.2, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.b[1], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(stats.d, 2.0, epsilon = 1e-12);
        let mut rng = StreamKey::new(46).rng();
        let n = 1_000_000u64;
        let mut sums = [0.0f64; 2];
        let mut sqs = [0.0f64; 2];
        let mut psi_sum = 0.0;
        let mut psi_sq = 0.0;
        for _ in 0..n {
            let draw = law.sample_immigration(&mut rng).unwrap();
            for j in 0..2 {
                let x = draw.counts[j] as f64;
                sums[j] += x;
                sqs[j] += x * x;
            }
            psi_sum += draw.product;
            psi_sq += draw.product * draw.product;
        }
        for j in 0..2 {
            let mean = sums[j] / n as f64;
            let var = (sqs[j] / n as f64 - mean * mean).max(1e-12);
            let sigma = (var / n as f64).sqrt();
            assert!((mean - stats.b[j]).abs() < 5.0 * sigma, "eta {j}: {mean} vs {}", stats.b[j]);
        }
        let mean = psi_sum / n as f64;
        let var = (psi_sq / n as f64 - mean * mean).max(1e-12);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - stats.d).abs() < 5.0 * sigma, "psi {mean} vs {}", stats.d);
    }

    #[test]
    fn exhaustive_stage_leaves_no_own_station_offspring() {
        // The station-level clearing never emits own-station counts. For
        // the last station the composed unit IS the raw stage, so the
        // invariant is visible there on every draw; earlier stations can
        // receive own-station counts back from later stations' units.
        let law = CycleLaw::new(
            exhaustive_worked_params(),
            vec![Discipline::Exhaustive; 2],
            ProductMode::ServiceTime,
        )
        .unwrap();
        let mut rng = StreamKey::new(47).rng();
        for _ in 0..20_000 {
            let unit = law.sample_offspring_unit(1, &mut rng).unwrap();
            assert_eq!(unit.counts[1], 0);
        }
        // Single-station system: the whole unit is one clearing.
        let single = PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.4]]),
            Matrix::from_rows(&[vec![0.1]]),
            vec![0.7],
            Matrix::from_rows(&[vec![0.3]]),
            vec![AmountLaw::Exponential { mean: 1.0 }],
            vec![AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let single_law =
            CycleLaw::new(single, vec![Discipline::Exhaustive], ProductMode::ServiceTime).unwrap();
        let mut rng = StreamKey::new(48).rng();
        for _ in 0..20_000 {
            let unit = single_law.sample_offspring_unit(0, &mut rng).unwrap();
            assert_eq!(unit.counts[0], 0);
        }
    }

    #[test]
    fn exhaustive_offspring_and_immigration_means_match_derived_formulas() {
        // The implicit-differentiation means must agree with 1e6-draw Monte
        // Carlo for the worked two-station exhaustive system.
        let law = CycleLaw::new(
            exhaustive_worked_params(),
            vec![Discipline::Exhaustive; 2],
            ProductMode::ServiceTime,
        )
        .unwrap();
        let stats = law.stats().clone();
        let mut rng = StreamKey::new(48).rng();
        let n = 1_000_000u64;
        let mut count_sums = [0.0f64; 2];
        let mut count_sqs = [0.0f64; 2];
        let mut prod_sum = 0.0;
        let mut prod_sq = 0.0;
        for _ in 0..n {
            let unit = law.sample_offspring_unit(0, &mut rng).unwrap();
            for j in 0..2 {
                let x = unit.counts[j] as f64;
                count_sums[j] += x;
                count_sqs[j] += x * x;
            }
            prod_sum += unit.product;
            prod_sq += unit.product * unit.product;
        }
        for j in 0..2 {
            let mean = count_sums[j] / n as f64;
            let var = (count_sqs[j] / n as f64 - mean * mean).max(1e-12);
            let sigma = (var / n as f64).sqrt();
            let expect = stats.a.get(0, j);
            assert!((mean - expect).abs() < 5.0 * sigma, "count {j}: {mean} vs {expect}");
        }
        let mean = prod_sum / n as f64;
        let var = (prod_sq / n as f64 - mean * mean).max(1e-12);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - stats.c[0]).abs() < 5.0 * sigma, "product {mean} vs {}", stats.c[0]);

        let mut eta_sums = [0.0f64; 2];
        let mut eta_sqs = [0.0f64; 2];
        let mut psi_sum = 0.0;
        let mut psi_sq = 0.0;
        for _ in 0..n {
            let draw = law.sample_immigration(&mut rng).unwrap();
            for j in 0..2 {
                let x = draw.counts[j] as f64;
                eta_sums[j] += x;
                eta_sqs[j] += x * x;
            }
            psi_sum += draw.product;
            psi_sq += draw.product * draw.product;
        }
        for j in 0..2 {
            let mean = eta_sums[j] / n as f64;
            let var = (eta_sqs[j] / n as f64 - mean * mean).max(1e-12);
            let sigma = (var / n as f64).sqrt();
            assert!((mean - stats.b[j]).abs() < 5.0 * sigma, "eta {j}: {mean} vs {}", stats.b[j]);
        }
        let mean = psi_sum / n as f64;
        let var = (psi_sq / n as f64 - mean * mean).max(1e-12);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - stats.d).abs() < 5.0 * sigma, "psi {mean} vs {}", stats.d);
    }

    #[test]
    fn within_cycle_service_cap_propagates() {
        // A near-critical exhaustive station with a tiny cap must refuse
        // the draw rather than loop.
        let params = PollingCycleParams::new(
            Matrix::from_rows(&[vec![0.9]]),
            Matrix::from_rows(&[vec![0.0]]),
            vec![1.0],
            Matrix::from_rows(&[vec![0.0]]),
            vec![AmountLaw::Exponential { mean: 1.0 }],
            vec![AmountLaw::Constant(0.1)],
        )
        .unwrap();
        let law = CycleLaw::new(params, vec![Discipline::Exhaustive], ProductMode::ServiceTime)
            .unwrap()
            .with_service_cap(4);
        let mut rng = StreamKey::new(50).rng();
        let mut capped = 0;
        for _ in 0..2000 {
            match law.sample_offspring_unit(0, &mut rng) {
                Ok(_) => {}
                Err(Error::CycleCapExceeded { cap }) => {
                    assert_eq!(cap, 4);
                    capped += 1;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(capped > 0, "the cap never triggered");
    }

    #[test]
    fn rotation_permutes_station_means() {
        let law = CycleLaw::new(
            exhaustive_worked_params(),
            vec![Discipline::Exhaustive; 2],
            ProductMode::ServiceTime,
        )
        .unwrap();
        let rotated = law.rotated(1).unwrap();
        let sm = law.station_means();
        let rm = rotated.station_means();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    rm.h.get(i, j),
                    sm.h.get((i + 1) % 2, (j + 1) % 2),
                    epsilon = 1e-12
                );
            }
        }
        assert_abs_diff_eq!(rm.c[0], sm.c[1], epsilon = 1e-12);
        assert_abs_diff_eq!(rm.p[1], sm.p[0], epsilon = 1e-12);
    }

    #[test]
    fn unit_per_service_mode_counts_customers() {
        let law = gated_toy_law(ProductMode::UnitPerService);
        let mut rng = StreamKey::new(49).rng();
        for _ in 0..500 {
            let unit = law.sample_offspring_unit(0, &mut rng).unwrap();
            assert_eq!(unit.product, unit.services as f64);
        }
    }

    #[test]
    fn associated_environment_carries_cycle_stats() {
        let dist = CycleDistribution::new(vec![
            (0.75, gated_toy_law(ProductMode::ServiceTime)),
            (0.25, gated_toy_law(ProductMode::ServiceTime)),
        ])
        .unwrap();
        let env = dist.associated_environment(0).unwrap();
        assert_eq!(env.type_count(), 2);
        for (_, atom) in env.atoms() {
            assert_abs_diff_eq!(atom.stats().a.get(0, 0), 0.23, epsilon = 1e-12);
            assert_abs_diff_eq!(atom.stats().d, 2.0, epsilon = 1e-12);
        }
    }
}
