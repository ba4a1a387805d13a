//! Random-matrix functionals of the environment: the top Lyapunov exponent
//! `alpha`, the moment function `s(x) = lim (E||Pi_{0,n}||^x)^{1/n}`, the
//! tail index `kappa` (where `s` crosses 1), the discounted final-product
//! series `Xi`, and an empirical report on the Kesten regularity conditions.
//!
//! Everything uses the entrywise sum norm. Products are accumulated with
//! periodic renormalization (log of the norm is carried separately), so long
//! horizons neither overflow nor underflow. Monte Carlo estimates of
//! `E||Pi||^x` are formed in the log domain via log-sum-exp; near `kappa`
//! the summands have diverging variance, so every estimate carries a
//! relative-CI reliability flag and the two-horizon Richardson value is only
//! used where both horizons are reliable.

use crate::env::EnvironmentDistribution;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::StreamKey;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Monte Carlo settings for the moment-function and kappa estimators.
#[derive(Clone, Debug)]
pub struct McParams {
    /// Product horizon `n` for `s(x)`; the estimator also uses `2n`.
    pub horizon: u64,
    /// Replicated product paths per horizon.
    pub replicates: u64,
    /// Horizon for the Lyapunov estimate.
    pub alpha_horizon: u64,
    pub alpha_replicates: u64,
    /// Upper end of the kappa search; `s(x_max) < 1` flags kappa = infinity.
    pub x_max: f64,
    /// Bisection tolerance in `x`.
    pub tol: f64,
    /// Relative CI width above which an `s(x)` estimate is unreliable.
    pub unreliable_width: f64,
    /// Run the sampling estimator even when a scalar closed form exists
    /// (used to validate the Monte Carlo path against the exact one).
    pub force_monte_carlo: bool,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            horizon: 50,
            replicates: 100_000,
            alpha_horizon: 1000,
            alpha_replicates: 1000,
            x_max: 10.0,
            tol: 1e-3,
            unreliable_width: 0.5,
            force_monte_carlo: false,
        }
    }
}

/// Lyapunov exponent estimate with a replicate-variance CI.
#[derive(Clone, Debug)]
pub struct LyapunovEstimate {
    pub alpha: f64,
    pub ci: (f64, f64),
    /// Replicates whose product reached the zero matrix (log-norm -inf);
    /// excluded from the mean and reported explicitly.
    pub neg_inf_replicates: u64,
    pub n: u64,
    pub replicates: u64,
    /// Finite-horizon allowance `log(m)/n` on the location of zero.
    pub bias_allowance: f64,
}

/// `log ||Pi_{0,n}||` along one sampled path, with renormalization.
fn log_norm_path(dist: &EnvironmentDistribution, n: u64, rng: &mut ChaCha8Rng) -> f64 {
    let mut prod = Matrix::identity(dist.type_count());
    let mut log_scale = 0.0f64;
    for _ in 0..n {
        let env = dist.sample(rng);
        prod = env.stats().a.mul(&prod);
        let norm = prod.sum_norm();
        if norm == 0.0 {
            return f64::NEG_INFINITY;
        }
        log_scale += norm.ln();
        prod.scale_mut(1.0 / norm);
    }
    log_scale
}

/// `alpha = lim (1/n) E log ||A_{n-1} ... A_0||`, estimated over replicates.
pub fn lyapunov_exponent(
    dist: &EnvironmentDistribution,
    n: u64,
    replicates: u64,
    key: StreamKey,
) -> LyapunovEstimate {
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = key.child(r).rng();
            log_norm_path(dist, n, &mut rng) / n as f64
        })
        .collect();
    let neg_inf = values.iter().filter(|v| !v.is_finite()).count() as u64;
    let finite: Vec<f64> = values.into_iter().filter(|v| v.is_finite()).collect();
    let count = finite.len().max(1) as f64;
    let mean = finite.iter().sum::<f64>() / count;
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count.max(2.0);
    let half = 1.96 * (var / count).sqrt();
    LyapunovEstimate {
        alpha: mean,
        ci: (mean - half, mean + half),
        neg_inf_replicates: neg_inf,
        n,
        replicates,
        bias_allowance: (dist.type_count() as f64).ln() / n as f64,
    }
}

/// One `s(x)` estimate: both horizons, the Richardson extrapolation, and the
/// value the kappa search should use.
#[derive(Clone, Debug)]
pub struct SPoint {
    pub x: f64,
    pub s_n: f64,
    pub ci_n: (f64, f64),
    pub reliable_n: bool,
    pub s_2n: f64,
    pub ci_2n: (f64, f64),
    pub reliable_2n: bool,
    pub s_extrapolated: Option<f64>,
    /// Best available estimate at this `x`.
    pub s_best: f64,
    pub ci_best: (f64, f64),
    pub reliable: bool,
    /// True when the value came from the scalar closed form.
    pub exact: bool,
}

/// Cached log-norms of shared product paths at horizons `n` and `2n`
/// (common random numbers across all probed `x`).
struct PathEnsemble {
    n: u64,
    log_half: Vec<f64>,
    log_full: Vec<f64>,
}

fn sample_paths(dist: &EnvironmentDistribution, n: u64, replicates: u64, key: StreamKey) -> PathEnsemble {
    let pairs: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = key.child(r).rng();
            let mut prod = Matrix::identity(dist.type_count());
            let mut log_scale = 0.0f64;
            let mut at_half = f64::NEG_INFINITY;
            let mut dead = false;
            for s in 0..2 * n {
                if !dead {
                    let env = dist.sample(&mut rng);
                    prod = env.stats().a.mul(&prod);
                    let norm = prod.sum_norm();
                    if norm == 0.0 {
                        dead = true;
                    } else {
                        log_scale += norm.ln();
                        prod.scale_mut(1.0 / norm);
                    }
                }
                if s + 1 == n {
                    at_half = if dead { f64::NEG_INFINITY } else { log_scale };
                }
            }
            let at_full = if dead { f64::NEG_INFINITY } else { log_scale };
            (at_half, at_full)
        })
        .collect();
    PathEnsemble {
        n,
        log_half: pairs.iter().map(|p| p.0).collect(),
        log_full: pairs.iter().map(|p| p.1).collect(),
    }
}

/// `( (1/R) sum ||Pi||^x )^{1/n}` in the log domain, with a delta-method
/// relative CI for the inner mean.
fn s_from_logs(logs: &[f64], x: f64, horizon: u64) -> (f64, f64) {
    let r = logs.len() as f64;
    let t = |l: f64| if l == f64::NEG_INFINITY { if x == 0.0 { 0.0 } else { f64::NEG_INFINITY } } else { x * l };
    let max_t = logs.iter().map(|&l| t(l)).fold(f64::NEG_INFINITY, f64::max);
    if max_t == f64::NEG_INFINITY {
        return (0.0, f64::INFINITY);
    }
    let (mut sum1, mut sum2) = (0.0f64, 0.0f64);
    for &l in logs {
        let e = (t(l) - max_t).exp();
        sum1 += e;
        sum2 += e * e;
    }
    let log_mean = max_t + (sum1 / r).ln();
    // Var(Y)/E(Y)^2 = E Y^2 / (E Y)^2 - 1, all relative to max_t.
    let log_mean2 = 2.0 * max_t + (sum2 / r).ln();
    let rel_var = (log_mean2 - 2.0 * log_mean).exp() - 1.0;
    let rel_ci = 1.96 * (rel_var.max(0.0) / r).sqrt();
    (log_mean / horizon as f64, rel_ci)
}

fn closed_form_s(atoms: &[(f64, f64)], x: f64) -> f64 {
    atoms.iter().map(|&(w, a)| w * a.powf(x)).sum()
}

impl PathEnsemble {
    fn point(&self, x: f64, unreliable_width: f64) -> SPoint {
        let n = self.n;
        let (log_s_n, rel_n) = s_from_logs(&self.log_half, x, n);
        let (log_s_2n, rel_2n) = s_from_logs(&self.log_full, x, 2 * n);
        let s_n = log_s_n.exp();
        let s_2n = log_s_2n.exp();
        let reliable_n = rel_n <= unreliable_width;
        let reliable_2n = rel_2n <= unreliable_width;
        // CI of s in log-domain: d log s = d log(EY) / horizon.
        let band = |s: f64, rel: f64, h: u64| {
            let d = rel / h as f64;
            (s * (-d).exp(), s * d.exp())
        };
        let ci_n = band(s_n, rel_n, n);
        let ci_2n = band(s_2n, rel_2n, 2 * n);
        let (s_best, ci_best, reliable, s_extrapolated) = if reliable_n && reliable_2n {
            // The leading finite-horizon bias of log s_n is O(1/n);
            // 2 log s_2n - log s_n removes it.
            let log_ex = 2.0 * log_s_2n - log_s_n;
            let d = ((2.0 * rel_2n / (2 * n) as f64).powi(2) + (rel_n / n as f64).powi(2)).sqrt();
            let s_ex = log_ex.exp();
            (s_ex, (s_ex * (-d).exp(), s_ex * d.exp()), true, Some(s_ex))
        } else if reliable_2n {
            (s_2n, ci_2n, true, None)
        } else if reliable_n {
            (s_n, ci_n, true, None)
        } else {
            (s_n, ci_n, false, None)
        };
        SPoint {
            x,
            s_n,
            ci_n,
            reliable_n,
            s_2n,
            ci_2n,
            reliable_2n,
            s_extrapolated,
            s_best,
            ci_best,
            reliable,
            exact: false,
        }
    }
}

fn exact_point(atoms: &[(f64, f64)], x: f64) -> SPoint {
    let s = closed_form_s(atoms, x);
    SPoint {
        x,
        s_n: s,
        ci_n: (s, s),
        reliable_n: true,
        s_2n: s,
        ci_2n: (s, s),
        reliable_2n: true,
        s_extrapolated: Some(s),
        s_best: s,
        ci_best: (s, s),
        reliable: true,
        exact: true,
    }
}

/// Estimate `s(x)`. Scalar environments bypass Monte Carlo: for `m = 1`,
/// `E||Pi_{0,n}||^x = (E a^x)^n` exactly.
pub fn s_of_x(
    dist: &EnvironmentDistribution,
    x: f64,
    n: u64,
    replicates: u64,
    key: StreamKey,
) -> Result<SPoint> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("s(x) needs x >= 0, got {x}")));
    }
    if let Some(atoms) = dist.scalar_atoms() {
        return Ok(exact_point(&atoms, x));
    }
    let paths = sample_paths(dist, n, replicates, key);
    Ok(paths.point(x, McParams::default().unreliable_width))
}

/// Kappa search outcome.
#[derive(Clone, Debug)]
pub enum KappaOutcome {
    /// The environment is supercritical: kappa = 0.
    Zero,
    Finite { kappa: f64, ci: (f64, f64) },
    /// `s(x) <= 1` up to `x_max`.
    Infinite,
    /// The estimated curve does not bracket a crossing reliably.
    Indeterminate,
}

impl KappaOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            KappaOutcome::Zero => Some(0.0),
            KappaOutcome::Finite { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }
}

/// Locate the crossing `s(x) = 1` with an adaptive upward walk: the step
/// halves whenever a probe comes back unreliable, so the search only needs
/// reliable estimates near the crossing itself (relative variance of
/// `||Pi||^x` grows steeply with `x`, and a fixed doubling bracket would
/// overshoot into the unusable region). Returns `None` when the walk is
/// stuck on unreliable probes, `Some(None)` when `s` stays at or below 1 up
/// to `x_max`, and the final bracket otherwise.
fn bisect_crossing<F: FnMut(f64) -> Option<f64>>(
    mut s_at: F,
    x_max: f64,
    tol: f64,
) -> Option<Option<(f64, f64)>> {
    let min_step = tol.max(1e-9);
    let mut lo = 0.0f64; // s(0) = 1 by construction
    let mut step = (x_max / 16.0).min(0.5).max(min_step);
    let mut hi = None;
    while hi.is_none() {
        let x = (lo + step).min(x_max);
        match s_at(x) {
            Some(s) if s > 1.0 => hi = Some(x),
            Some(_) => {
                lo = x;
                if lo >= x_max {
                    return Some(None);
                }
            }
            None => {
                step *= 0.5;
                if step < min_step {
                    return None;
                }
            }
        }
    }
    let mut hi = hi.expect("bracket found");
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match s_at(mid) {
            None => return None,
            Some(s) if s > 1.0 => hi = mid,
            Some(_) => lo = mid,
        }
    }
    Some(Some((lo, hi)))
}

/// Find the tail index kappa: the crossing of `s(x) = 1`, with kappa = 0
/// when the environment is supercritical and an infinity flag when `s`
/// stays at or below 1 across `[0, x_max]`.
pub fn kappa(dist: &EnvironmentDistribution, mc: &McParams, key: StreamKey) -> KappaOutcome {
    kappa_and_curve(dist, mc, key).0
}

/// As [`kappa`], also returning the `s(x)` grid used for reporting.
pub fn kappa_and_curve(
    dist: &EnvironmentDistribution,
    mc: &McParams,
    key: StreamKey,
) -> (KappaOutcome, Vec<SPoint>, LyapunovEstimate) {
    let alpha = lyapunov_exponent(dist, mc.alpha_horizon, mc.alpha_replicates, key.child(0));
    let grid_xs: Vec<f64> = (0..=20).map(|i| mc.x_max * i as f64 / 20.0).collect();

    if let Some(atoms) = dist.scalar_atoms().filter(|_| !mc.force_monte_carlo) {
        let curve: Vec<SPoint> = grid_xs.iter().map(|&x| exact_point(&atoms, x)).collect();
        if alpha.alpha > alpha.bias_allowance {
            return (KappaOutcome::Zero, curve, alpha);
        }
        let outcome = match bisect_crossing(|x| Some(closed_form_s(&atoms, x)), mc.x_max, mc.tol) {
            Some(Some((lo, hi))) => {
                let mid = 0.5 * (lo + hi);
                KappaOutcome::Finite { kappa: mid, ci: (lo, hi) }
            }
            Some(None) => KappaOutcome::Infinite,
            None => KappaOutcome::Indeterminate,
        };
        return (outcome, curve, alpha);
    }

    let paths = sample_paths(dist, mc.horizon, mc.replicates, key.child(1));
    let curve: Vec<SPoint> = grid_xs.iter().map(|&x| paths.point(x, mc.unreliable_width)).collect();
    if alpha.alpha > alpha.bias_allowance {
        return (KappaOutcome::Zero, curve, alpha);
    }
    let probe = |x: f64| {
        let p = paths.point(x, mc.unreliable_width);
        p.reliable.then_some(p.s_best)
    };
    let outcome = match bisect_crossing(probe, mc.x_max, mc.tol) {
        Some(Some((lo, hi))) => {
            let mid = 0.5 * (lo + hi);
            // CI from the local slope of log s against the estimate's band.
            let p = paths.point(mid, mc.unreliable_width);
            let delta = (0.05f64).max(2.0 * mc.tol);
            let up = paths.point((mid + delta).min(mc.x_max), mc.unreliable_width);
            let dn = paths.point((mid - delta).max(0.0), mc.unreliable_width);
            let slope = ((up.s_best.ln() - dn.s_best.ln()) / (up.x - dn.x)).abs().max(1e-9);
            let band = 0.5 * (p.ci_best.1.ln() - p.ci_best.0.ln()).abs();
            let half = (band / slope).max(0.5 * (hi - lo));
            KappaOutcome::Finite { kappa: mid, ci: (mid - half, mid + half) }
        }
        Some(None) => {
            // Infinity flag only when the top of the range is clearly below 1.
            let top = paths.point(mc.x_max, mc.unreliable_width);
            if top.reliable && top.ci_best.1 < 1.0 {
                KappaOutcome::Infinite
            } else {
                KappaOutcome::Indeterminate
            }
        }
        None => KappaOutcome::Indeterminate,
    };
    (outcome, curve, alpha)
}

/// One realization of the discounted final-product series
/// `Xi = sum_k Pi_{0,k} C_k`, truncated once the carried product norm times
/// the recent final-product scale drops below `tol`.
#[derive(Clone, Debug)]
pub struct XiEstimate {
    pub xi: Vec<f64>,
    pub terms: u64,
    pub residual_bound: f64,
    pub converged: bool,
}

pub fn xi_series(
    dist: &EnvironmentDistribution,
    tol: f64,
    k_max: u64,
    rng: &mut ChaCha8Rng,
) -> XiEstimate {
    let m = dist.type_count();
    let mut prod = Matrix::identity(m);
    let mut log_scale = 0.0f64; // prod carries ||.|| == 1 after the first step
    let mut xi = vec![0.0; m];
    let mut recent_c: Vec<f64> = Vec::new();
    let mut terms = 0u64;
    let mut residual = f64::INFINITY;
    while terms < k_max {
        let env = dist.sample(rng);
        let stats = env.stats();
        let scale = log_scale.exp();
        for (acc, v) in xi.iter_mut().zip(prod.mul_vec(&stats.c)) {
            *acc += scale * v;
        }
        terms += 1;
        let c_norm: f64 = stats.c.iter().map(|v| v.abs()).sum();
        recent_c.push(c_norm);
        if recent_c.len() > 64 {
            recent_c.remove(0);
        }
        prod = prod.mul(&stats.a);
        let norm = prod.sum_norm();
        if norm == 0.0 {
            return XiEstimate { xi, terms, residual_bound: 0.0, converged: true };
        }
        log_scale += norm.ln();
        prod.scale_mut(1.0 / norm);
        let c_sup = recent_c.iter().copied().fold(0.0, f64::max).max(1e-300);
        residual = log_scale.exp() * c_sup;
        if residual < tol {
            return XiEstimate { xi, terms, residual_bound: residual, converged: true };
        }
    }
    XiEstimate { xi, terms, residual_bound: residual, converged: false }
}

/// One finding of the Kesten-condition report.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub name: String,
    /// `None` marks the condition as not machine-checkable (heuristic only).
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct KestenReport {
    pub kappa0: f64,
    pub entries: Vec<CheckEntry>,
}

fn prefix_stable(values: &[f64]) -> (bool, [f64; 3]) {
    let n = values.len();
    let mean_of = |k: usize| values[..k].iter().sum::<f64>() / k as f64;
    let m1 = mean_of(n / 4);
    let m2 = mean_of(n / 2);
    let m3 = mean_of(n);
    let rel = |a: f64, b: f64| if a == 0.0 { (b - a).abs() } else { ((b - a) / a).abs() };
    (rel(m1, m2) < 0.1 && rel(m2, m3) < 0.1, [m1, m2, m3])
}

/// Empirical report on the Kesten-type regularity conditions at moment
/// order `kappa0`.
pub fn kesten_check(
    dist: &EnvironmentDistribution,
    kappa0: f64,
    n_samples: u64,
    key: StreamKey,
) -> KestenReport {
    let m = dist.type_count() as f64;
    let mut rng = key.child(0).rng();
    let mut norms_pow = Vec::with_capacity(n_samples as usize);
    let mut norms_pow_log = Vec::with_capacity(n_samples as usize);
    let mut min_row_pow = Vec::with_capacity(n_samples as usize);
    let mut zero_rows = 0u64;
    for _ in 0..n_samples {
        let a = &dist.sample(&mut rng).stats().a;
        let norm = a.sum_norm();
        norms_pow.push(norm.powf(kappa0));
        norms_pow_log.push(norm.powf(kappa0) * norm.ln().max(0.0));
        if a.has_zero_row() {
            zero_rows += 1;
        }
        let min_row = (0..a.dim())
            .map(|i| a.row(i).iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        min_row_pow.push(min_row.powf(kappa0));
    }
    let mut entries = Vec::new();

    let (stable, means) = prefix_stable(&norms_pow);
    entries.push(CheckEntry {
        name: format!("moment E||A||^{kappa0:.4} finiteness (prefix stability)"),
        passed: Some(stable),
        detail: format!("prefix means {:.6} / {:.6} / {:.6}", means[0], means[1], means[2]),
    });

    entries.push(CheckEntry {
        name: "no zero rows almost surely".into(),
        passed: Some(zero_rows == 0),
        detail: format!("{zero_rows} of {n_samples} sampled matrices had a zero row"),
    });

    // Density of the group generated by log spectral radii of positive
    // products: not machine-checkable; report distinct observed values.
    let mut rng = key.child(1).rng();
    let mut distinct: Vec<i64> = Vec::new();
    for trial in 0..64u64 {
        let len = 2 + (trial % 5) as usize;
        let mut prod = Matrix::identity(dist.type_count());
        for _ in 0..len {
            prod = dist.sample(&mut rng).stats().a.mul(&prod);
        }
        if prod.all_positive() {
            if let Ok(lambda) = prod.spectral_radius() {
                if lambda > 0.0 {
                    let rounded = (lambda.ln() * 1e9).round() as i64;
                    if !distinct.contains(&rounded) {
                        distinct.push(rounded);
                    }
                }
            }
        }
    }
    entries.push(CheckEntry {
        name: "log-spectral-radius group density".into(),
        passed: None,
        detail: format!(
            "not machine-checkable; heuristic: {} distinct log-spectral-radius values observed over 64 positive products",
            distinct.len()
        ),
    });

    let mean_min_row = min_row_pow.iter().sum::<f64>() / n_samples as f64;
    let bound = m.powf(kappa0 / 2.0);
    entries.push(CheckEntry {
        name: format!("E[min_i (sum_j a_ij)^{kappa0:.4}] >= m^({kappa0:.4}/2)"),
        passed: Some(mean_min_row >= bound),
        detail: format!("empirical {mean_min_row:.6} vs bound {bound:.6}"),
    });

    let (stable_log, means_log) = prefix_stable(&norms_pow_log);
    entries.push(CheckEntry {
        name: format!("E||A||^{kappa0:.4} log+||A|| finiteness (prefix stability)"),
        passed: Some(stable_log),
        detail: format!(
            "prefix means {:.6} / {:.6} / {:.6}",
            means_log[0], means_log[1], means_log[2]
        ),
    });

    KestenReport { kappa0, entries }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Subcritical,
    Supercritical,
    Indeterminate,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Subcritical => "subcritical",
            Classification::Supercritical => "supercritical",
            Classification::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// Combined analysis: Lyapunov exponent, `s(x)` curve, kappa, classification.
#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub alpha: LyapunovEstimate,
    pub s_curve: Vec<SPoint>,
    pub kappa: KappaOutcome,
    pub classification: Classification,
    /// Norm used throughout.
    pub norm: &'static str,
    pub seed: u64,
    pub horizon: u64,
    pub replicates: u64,
}

/// Classify the environment and assemble the full analysis report.
pub fn classify(dist: &EnvironmentDistribution, mc: &McParams, key: StreamKey) -> AnalysisReport {
    let (kappa, s_curve, alpha) = kappa_and_curve(dist, mc, key);
    // The CI must clear zero by more than the deterministic finite-horizon
    // allowance log(m)/n before we commit to a sign.
    let classification = if alpha.ci.1 < -alpha.bias_allowance {
        Classification::Subcritical
    } else if alpha.ci.0 > alpha.bias_allowance {
        Classification::Supercritical
    } else {
        Classification::Indeterminate
    };
    let kappa = match (classification, kappa) {
        (Classification::Supercritical, _) => KappaOutcome::Zero,
        (Classification::Indeterminate, KappaOutcome::Zero) => KappaOutcome::Indeterminate,
        (_, k) => k,
    };
    AnalysisReport {
        alpha,
        s_curve,
        kappa,
        classification,
        norm: "sum",
        seed: key.seed(),
        horizon: mc.horizon,
        replicates: mc.replicates,
    }
}
