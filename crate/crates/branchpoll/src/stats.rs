//! Heavy-tail and distributional statistics: the Hill tail-index estimator
//! with its diagnostic plot, prefix-stability moment probes, empirical
//! CCDFs, and the two-sample Kolmogorov-Smirnov test.

use crate::error::{Error, Result};

/// A set of nonnegative samples with its censoring bookkeeping. Censored
/// replicates are excluded from the values and only counted: censoring
/// truncates exactly the tail under study, so fits over a sample with more
/// than 1% censoring are marked unreliable.
#[derive(Clone, Debug)]
pub struct SampleSet {
    values: Vec<f64>,
    censored: usize,
    source: String,
    seed: u64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, censored: usize, source: impl Into<String>, seed: u64) -> Self {
        SampleSet { values, censored, source: source.into(), seed }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn censored(&self) -> usize {
        self.censored
    }

    pub fn censored_fraction(&self) -> f64 {
        let total = self.values.len() + self.censored;
        if total == 0 {
            0.0
        } else {
            self.censored as f64 / total as f64
        }
    }

    pub fn tail_fit_unreliable(&self) -> bool {
        self.censored_fraction() > 0.01
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return f64::NAN;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn sorted_descending(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_unstable_by(|a, b| b.partial_cmp(a).expect("samples must not be NaN"));
        v
    }
}

/// Hill fit with CI, the `k` diagnostic plot, and CCDF points.
#[derive(Clone, Debug)]
pub struct TailFit {
    pub hill_index: f64,
    pub ci: (f64, f64),
    pub k_used: usize,
    /// `(k, hill(k))` over a log-spaced grid.
    pub hill_plot: Vec<(usize, f64)>,
    pub ccdf: Vec<(f64, f64)>,
    /// True when the Hill plot stays within +/-35% of flat across a decade
    /// of `k` around the one used.
    pub flat_decade: bool,
    pub censored_excluded: usize,
    pub unreliable: bool,
}

fn hill_at(sorted_desc: &[f64], k: usize) -> Result<f64> {
    let n = sorted_desc.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!("hill order k={k} out of range for n={n}")));
    }
    let floor = sorted_desc[k];
    if floor <= 0.0 {
        return Err(Error::NonpositiveTail);
    }
    let mean_log: f64 =
        sorted_desc[..k].iter().map(|&x| (x / floor).ln()).sum::<f64>() / k as f64;
    if mean_log <= 0.0 {
        return Err(Error::DegenerateTail);
    }
    Ok(1.0 / mean_log)
}

/// Hill estimator of the tail index over the top `k` order statistics
/// (`k = ceil(sqrt(n))` when not given), with the mandatory diagnostic plot.
pub fn hill_estimator(samples: &SampleSet, k: Option<usize>) -> Result<TailFit> {
    let n = samples.len();
    if n < 100 {
        return Err(Error::NotEnoughSamples { need: 100, have: n });
    }
    let sorted = samples.sorted_descending();
    let k_used = k.unwrap_or_else(|| (n as f64).sqrt().ceil() as usize).clamp(1, n - 1);
    let hill_index = hill_at(&sorted, k_used)?;
    let half = 1.96 / (k_used as f64).sqrt();
    let ci = (hill_index * (1.0 - half), hill_index * (1.0 + half));

    // Diagnostic grid: a decade of k around k_used plus wider context.
    let mut ks: Vec<usize> = Vec::new();
    let lo = ((k_used as f64) / 3.16).max(10.0);
    let hi = ((k_used as f64) * 3.16).min((n - 1) as f64);
    for i in 0..=16 {
        let f = lo * (hi / lo).powf(i as f64 / 16.0);
        let k = f.round() as usize;
        if k >= 1 && k < n && !ks.contains(&k) {
            ks.push(k);
        }
    }
    let mut hill_plot = Vec::with_capacity(ks.len());
    let mut decade_min = f64::INFINITY;
    let mut decade_max = f64::NEG_INFINITY;
    for &k in &ks {
        if let Ok(h) = hill_at(&sorted, k) {
            decade_min = decade_min.min(h);
            decade_max = decade_max.max(h);
            hill_plot.push((k, h));
        }
    }
    let flat_decade = hill_plot.len() == ks.len()
        && decade_min.is_finite()
        && decade_max / decade_min <= 1.35;

    let ccdf = empirical_ccdf(samples, None);
    Ok(TailFit {
        hill_index,
        ci,
        k_used,
        hill_plot,
        ccdf,
        flat_decade,
        censored_excluded: samples.censored(),
        unreliable: samples.tail_fit_unreliable(),
    })
}

/// One moment-probe result: the empirical mean of `X^x` on nested prefixes
/// and whether it is stable (finite-moment behaviour).
#[derive(Clone, Debug)]
pub struct MomentProbe {
    pub x: f64,
    /// Means over the first n/4, n/2 and n samples.
    pub estimates: [f64; 3],
    pub stable: bool,
}

/// Probe `E X^x` for each `x` on nested sample prefixes: stable (relative
/// change under 10% between consecutive prefixes) suggests a finite moment,
/// growth suggests an infinite one.
pub fn moment_probe(samples: &SampleSet, x_grid: &[f64]) -> Vec<MomentProbe> {
    let n = samples.len();
    let values = samples.values();
    x_grid
        .iter()
        .map(|&x| {
            let mean_of = |k: usize| {
                let k = k.max(1);
                values[..k].iter().map(|&v| v.powf(x)).sum::<f64>() / k as f64
            };
            let estimates = [mean_of(n / 4), mean_of(n / 2), mean_of(n)];
            let rel = |a: f64, b: f64| {
                if a == 0.0 {
                    (b - a).abs()
                } else {
                    ((b - a) / a).abs()
                }
            };
            let stable =
                rel(estimates[0], estimates[1]) < 0.1 && rel(estimates[1], estimates[2]) < 0.1;
            MomentProbe { x, estimates, stable }
        })
        .collect()
}

/// Empirical complementary CDF `P(X > y)` on the given grid (default: a
/// log-spaced grid over the sample range).
pub fn empirical_ccdf(samples: &SampleSet, grid: Option<&[f64]>) -> Vec<(f64, f64)> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sorted = samples.values().to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("samples must not be NaN"));
    let own_grid: Vec<f64>;
    let grid = match grid {
        Some(g) => g,
        None => {
            let lo = sorted[0].max(1e-300);
            let hi = sorted[n - 1].max(lo);
            own_grid = (0..=64)
                .map(|i| lo * (hi / lo).powf(i as f64 / 64.0))
                .collect();
            &own_grid
        }
    };
    grid.iter()
        .map(|&y| {
            // count of samples > y via partition point on the sorted values
            let idx = sorted.partition_point(|&v| v <= y);
            (y, (n - idx) as f64 / n as f64)
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Clone, Debug)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn ks_p_value(t: f64) -> f64 {
    // Asymptotic Kolmogorov survival function Q(t) = 2 sum (-1)^{j-1} e^{-2 j^2 t^2}.
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * t * t).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
/// (finite-sample corrected argument).
pub fn ks_distance(a: &SampleSet, b: &SampleSet) -> Result<KsResult> {
    let (n_a, n_b) = (a.len(), b.len());
    if n_a < 100 || n_b < 100 {
        return Err(Error::NotEnoughSamples { need: 100, have: n_a.min(n_b) });
    }
    let mut xs = a.values().to_vec();
    let mut ys = b.values().to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).expect("samples must not be NaN"));
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).expect("samples must not be NaN"));
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n_a && j < n_b {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n_a && xs[i] <= v {
            i += 1;
        }
        while j < n_b && ys[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n_a as f64 - j as f64 / n_b as f64).abs();
        d = d.max(diff);
    }
    let ne = (n_a as f64 * n_b as f64) / (n_a as f64 + n_b as f64);
    let t = d * (ne.sqrt() + 0.12 + 0.11 / ne.sqrt());
    Ok(KsResult { statistic: d, p_value: ks_p_value(t), n_a, n_b })
}
