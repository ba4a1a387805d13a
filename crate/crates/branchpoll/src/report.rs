//! CSV and plain-text artifact emission. Every file starts with a comment
//! line carrying the tool version, the hash of the effective spec and the
//! seed, so any artifact can be traced back to its exact run.

use crate::analysis::{AnalysisReport, KappaOutcome, KestenReport};
use crate::error::{Error, Result};
use crate::stats::{SampleSet, TailFit};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes artifacts for one run into a directory, stamping every file.
pub struct Reporter {
    out_dir: PathBuf,
    stamp: String,
    written: Vec<PathBuf>,
}

impl Reporter {
    pub fn new(out_dir: &Path, spec_hash: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Reporter {
            out_dir: out_dir.to_path_buf(),
            stamp: format!("# branchpoll v{VERSION} spec_sha256={spec_hash} seed={seed}"),
            written: Vec::new(),
        })
    }

    pub fn stamp(&self) -> &str {
        &self.stamp
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Write a CSV file: stamp comment, header row, then data rows. An
    /// empty row set still produces the stamped header.
    pub fn write_csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = String>,
    {
        let mut body = String::new();
        writeln!(body, "{}", self.stamp).expect("write to string");
        writeln!(body, "{header}").expect("write to string");
        for row in rows {
            writeln!(body, "{row}").expect("write to string");
        }
        self.write_file(name, &body)
    }

    pub fn write_text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let text = format!("{}\n{}", self.stamp, body);
        self.write_file(name, &text)
    }

    fn write_file(&mut self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, content)?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Tail-fit artifacts: the text summary plus the Hill-plot and CCDF CSVs.
    pub fn write_tail_fit(&mut self, prefix: &str, fit: &TailFit, samples: &SampleSet) -> Result<()> {
        let mut text = String::new();
        writeln!(text, "source: {}", samples.source()).unwrap();
        writeln!(text, "samples: {} (censored excluded: {})", samples.len(), fit.censored_excluded).unwrap();
        writeln!(text, "censored fraction: {:.6}", samples.censored_fraction()).unwrap();
        if samples.censored_fraction() > 0.01 {
            writeln!(text, "warning: censored fraction exceeds 1%; tail fit unreliable").unwrap();
        }
        writeln!(text, "hill index: {} (95% CI {} .. {}) at k = {}", fit.hill_index, fit.ci.0, fit.ci.1, fit.k_used).unwrap();
        writeln!(text, "hill plot flat over a decade: {}", if fit.flat_decade { "yes" } else { "no" }).unwrap();
        self.write_text(&format!("{prefix}tail_fit.txt"), &text)?;
        self.write_csv(
            &format!("{prefix}hill_plot.csv"),
            "k,hill_index",
            fit.hill_plot.iter().map(|(k, h)| format!("{k},{h}")),
        )?;
        self.write_csv(
            &format!("{prefix}ccdf.csv"),
            "y,ccdf",
            fit.ccdf.iter().map(|(y, p)| format!("{y},{p}")),
        )?;
        Ok(())
    }

    /// The analysis artifacts: `s_curve.csv` and the text report.
    pub fn write_analysis(&mut self, report: &AnalysisReport, kesten: Option<&KestenReport>) -> Result<()> {
        self.write_csv(
            "s_curve.csv",
            "x,s_hat,ci_lo,ci_hi",
            report
                .s_curve
                .iter()
                .map(|p| format!("{},{},{},{}", p.x, p.s_best, p.ci_best.0, p.ci_best.1)),
        )?;
        let mut text = String::new();
        writeln!(text, "norm: entrywise sum").unwrap();
        writeln!(
            text,
            "alpha: {} (95% CI {} .. {}), n = {}, replicates = {}",
            report.alpha.alpha, report.alpha.ci.0, report.alpha.ci.1, report.alpha.n, report.alpha.replicates
        )
        .unwrap();
        if report.alpha.neg_inf_replicates > 0 {
            writeln!(
                text,
                "warning: {} replicate(s) reached the zero matrix (log-norm -inf, excluded)",
                report.alpha.neg_inf_replicates
            )
            .unwrap();
        }
        writeln!(text, "classification: {}", report.classification).unwrap();
        match &report.kappa {
            KappaOutcome::Zero => writeln!(text, "kappa: 0 (supercritical)").unwrap(),
            KappaOutcome::Finite { kappa, ci } => {
                writeln!(text, "kappa: {kappa} (CI {} .. {})", ci.0, ci.1).unwrap()
            }
            KappaOutcome::Infinite => {
                writeln!(text, "kappa: infinite (s(x) <= 1 across the search range)").unwrap()
            }
            KappaOutcome::Indeterminate => {
                writeln!(text, "kappa: indeterminate (no reliable crossing; see s_curve.csv)").unwrap()
            }
        }
        writeln!(text, "s-curve horizon: {} (and doubled), replicates: {}", report.horizon, report.replicates).unwrap();
        if let Some(kesten) = kesten {
            writeln!(text, "\nKesten condition report at kappa0 = {}:", kesten.kappa0).unwrap();
            for entry in &kesten.entries {
                let status = match entry.passed {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "heuristic",
                };
                writeln!(text, "  [{status}] {}: {}", entry.name, entry.detail).unwrap();
            }
        }
        self.write_text("analysis.txt", &text)?;
        Ok(())
    }
}

/// Minimal CSV reading for the tail-fit command: skips stamped comment
/// lines, parses the header, and extracts one numeric column with optional
/// censoring flags.
pub fn read_samples_csv(path: &Path, column: Option<&str>) -> Result<SampleSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Config {
        path: path.display().to_string(),
        message: "empty csv".into(),
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let value_idx = match column {
        Some(name) => columns.iter().position(|c| *c == name).ok_or_else(|| Error::Config {
            path: path.display().to_string(),
            message: format!("column `{name}` not found in header `{header}`"),
        })?,
        None => ["theta_total", "theta_P", "phi", "value"]
            .iter()
            .find_map(|name| columns.iter().position(|c| c == name))
            .ok_or_else(|| Error::Config {
                path: path.display().to_string(),
                message: format!("no known value column in header `{header}`; pass tail_fit.column"),
            })?,
    };
    let censored_idx = columns.iter().position(|c| *c == "censored");
    let mut values = Vec::new();
    let mut censored = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let is_censored = censored_idx
            .and_then(|i| fields.get(i))
            .map(|v| *v == "true" || *v == "1")
            .unwrap_or(false);
        if is_censored {
            censored += 1;
            continue;
        }
        let raw = fields.get(value_idx).ok_or_else(|| Error::Config {
            path: path.display().to_string(),
            message: format!("row {} has no column {}", lineno + 2, value_idx + 1),
        })?;
        let v: f64 = raw.parse().map_err(|_| Error::Config {
            path: path.display().to_string(),
            message: format!("row {}: `{raw}` is not a number", lineno + 2),
        })?;
        values.push(v);
    }
    Ok(SampleSet::new(values, censored, path.display().to_string(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut reporter = Reporter::new(dir.path(), "abc", 5).unwrap();
        let path = reporter
            .write_csv("empty.csv", "a,b,c", std::iter::empty::<String>())
            .unwrap();
        let text = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("# branchpoll"));
        assert_eq!(lines[1], "a,b,c");
    }

    #[test]
    fn samples_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut reporter = Reporter::new(dir.path(), "abc", 5).unwrap();
        let rows = vec![
            "0,3,12.5,false,4".to_string(),
            "1,2,0.5,true,9".to_string(),
            "2,1,7.25,false,1".to_string(),
        ];
        let path = reporter
            .write_csv("life.csv", "replica_id,upsilon,theta_total,censored,max_population", rows)
            .unwrap();
        let set = read_samples_csv(&path, None).unwrap();
        assert_eq!(set.values(), &[12.5, 7.25]);
        assert_eq!(set.censored(), 1);
    }
}
