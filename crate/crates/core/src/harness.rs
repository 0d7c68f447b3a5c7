//! Seeded robustness sweeps: perturb the canonical strategy at a range of
//! noise levels, certify each trial, and tabulate `(δ, ε)` together with
//! the lemma-bound audits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::family_for;
use crate::matcore::random::derive_seed;
use crate::selftest::{extract_dilation, residual_report, within, DEFAULT_MONOMIAL_DEGREE};
use crate::strategies::{canonical_strategy, perturb, NoiseModel};

/// Noise levels of the standard sweep.
pub const STANDARD_LEVELS: [f64; 7] = [0.0, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

pub const CSV_HEADER: &str =
    "level,trial,delta,epsilon,alpha,rep_residual_A,rep_residual_B,tracial_residual,sync_max,lemma35_pass,lemma63_pass";

fn default_degree() -> usize {
    DEFAULT_MONOMIAL_DEGREE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub noise_model: NoiseModel,
    pub levels: Vec<f64>,
    pub trials_per_level: usize,
    pub seed: u64,
    #[serde(default = "default_degree")]
    pub monomial_degree: usize,
}

impl SweepConfig {
    /// 4 questions, `x = 4/3`, the standard levels and 10 trials each.
    pub fn standard(noise_model: NoiseModel, seed: u64) -> Self {
        SweepConfig {
            n: 4,
            k: 1,
            noise_model,
            levels: STANDARD_LEVELS.to_vec(),
            trials_per_level: 10,
            seed,
            monomial_degree: DEFAULT_MONOMIAL_DEGREE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::InvalidConfig("levels must not be empty".into()));
        }
        if let Some(bad) = self.levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::InvalidConfig(format!("level {bad} is outside [0, 1]")));
        }
        if self.levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidConfig("levels must be sorted ascending".into()));
        }
        if self.trials_per_level == 0 {
            return Err(Error::InvalidConfig("trialsPerLevel must be at least 1".into()));
        }
        if self.monomial_degree == 0 {
            return Err(Error::InvalidConfig("monomialDegree must be at least 1".into()));
        }
        Ok(())
    }
}

/// One certified trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub level: f64,
    pub level_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub delta: f64,
    /// Absent when junk extraction failed.
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub extraction_error: Option<String>,
    pub rep_residual_a: f64,
    pub rep_residual_b: f64,
    pub tracial_residual: f64,
    pub sync_max: f64,
    pub c_bound: f64,
    pub lemma35_pass: bool,
    pub lemma63_pass: bool,
    pub lemma37_pass: bool,
    pub epsilon_prime: Option<f64>,
    pub beta: Option<f64>,
    pub state_residual: Option<f64>,
    pub epsilon_bound: Option<f64>,
    /// Whether `ε′ < (x − λ₂)/(2n+1)` held for this trial.
    pub premises_hold: bool,
}

impl SweepRow {
    /// When the premises hold: state residual ≤ β and ε ≤ the per-term bound.
    pub fn robustness_bounds_hold(&self) -> Option<bool> {
        if !self.premises_hold {
            return None;
        }
        let state_ok = within(self.state_residual?, self.beta?);
        let eps_ok = within(self.epsilon?, self.epsilon_bound?);
        Some(state_ok && eps_ok)
    }
}

/// Runs every `(level, trial)` of `cfg`; rows come back in level-major order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let fam = family_for(cfg.n, cfg.k)?;
    let canonical = canonical_strategy(&fam)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.levels.len())
        .flat_map(|l| (0..cfg.trials_per_level).map(move |t| (l, t)))
        .collect();
    jobs.par_iter()
        .map(|&(level_index, trial)| {
            let level = cfg.levels[level_index];
            let seed = derive_seed(cfg.seed, &[level_index as u64, trial as u64]);
            let s = perturb(&canonical, cfg.noise_model, level, seed)?;
            let report = residual_report(&s, &fam.x, cfg.monomial_degree)?;
            let mut row = SweepRow {
                level,
                level_index,
                trial,
                seed,
                delta: report.delta,
                epsilon: None,
                alpha: None,
                extraction_error: None,
                rep_residual_a: report.rep_residuals_a.max(),
                rep_residual_b: report.rep_residuals_b.max(),
                tracial_residual: report.tracial.max(),
                sync_max: report.sync_max,
                c_bound: report.c_bound,
                lemma35_pass: report.lemma35_pass,
                lemma63_pass: report.lemma63_pass,
                lemma37_pass: report.lemma37_pass,
                epsilon_prime: None,
                beta: None,
                state_residual: None,
                epsilon_bound: None,
                premises_hold: false,
            };
            match extract_dilation(&s, &fam) {
                Ok(cert) => {
                    row.epsilon = Some(cert.epsilon);
                    row.alpha = cert.alpha;
                    row.beta = cert.beta;
                    if let Some(res) = cert.residuals {
                        row.epsilon_prime = Some(res.epsilon_prime);
                        row.state_residual = Some(res.state_residual);
                        row.epsilon_bound = res.epsilon_bound;
                        row.premises_hold = res.premises_hold;
                    }
                }
                Err(e @ (Error::JunkExtractionFailed { .. } | Error::FitDegenerate(_))) => {
                    row.extraction_error = Some(e.to_string());
                }
                Err(e) => return Err(e),
            }
            Ok(row)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    /// Chooses the format from a `.csv` / `.json` extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(ReportFormat::Csv),
            Some("json") => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidInput(format!(
                "cannot infer report format from {}; use .csv or .json",
                path.display()
            ))),
        }
    }
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            sci(r.level),
            r.trial,
            sci(r.delta),
            opt_sci(r.epsilon),
            opt_sci(r.alpha),
            sci(r.rep_residual_a),
            sci(r.rep_residual_b),
            sci(r.tracial_residual),
            sci(r.sync_max),
            r.lemma35_pass,
            r.lemma63_pass
        );
    }
    out
}

pub fn emit_report(rows: &[SweepRow], format: ReportFormat, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no rows to report".into()));
    }
    let text = match format {
        ReportFormat::Csv => to_csv(rows),
        ReportFormat::Json => serde_json::to_string_pretty(rows)? + "\n",
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_json_report(path: &Path) -> Result<Vec<SweepRow>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Median ε per level, skipping trials without a certificate.
pub fn median_epsilon_by_level(rows: &[SweepRow]) -> Vec<(f64, Option<f64>)> {
    let mut by_level: BTreeMap<usize, (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let entry = by_level.entry(r.level_index).or_insert((r.level, Vec::new()));
        entry.1.extend(r.epsilon);
    }
    by_level.into_values().map(|(level, mut eps)| (level, median(&mut eps))).collect()
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Ties share the average of their 1-based positions.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let mean = (xs.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(levels: Vec<f64>, trials: usize) -> SweepConfig {
        SweepConfig { levels, trials_per_level: trials, ..SweepConfig::standard(NoiseModel::PovmJitter, 7) }
    }

    #[test]
    fn zero_level_is_exact() {
        let rows = run_sweep(&small(vec![0.0], 3)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert!(r.delta <= 1e-10);
            assert!(r.epsilon.unwrap() <= 1e-7);
        }
    }

    #[test]
    fn level_major_order() {
        let rows = run_sweep(&small(vec![0.0, 1e-3, 1e-2], 2)).unwrap();
        let keys: Vec<(usize, usize)> = rows.iter().map(|r| (r.level_index, r.trial)).collect();
        assert_eq!(keys, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
        assert_eq!(to_csv(&rows).lines().count(), 7);
    }

    #[test]
    fn deterministic_csv() {
        let cfg = small(vec![1e-3, 1e-2], 3);
        assert_eq!(to_csv(&run_sweep(&cfg).unwrap()), to_csv(&run_sweep(&cfg).unwrap()));
    }

    #[test]
    fn invalid_configs() {
        assert!(small(vec![], 1).validate().is_err());
        assert!(small(vec![0.1, 0.01], 1).validate().is_err());
        assert!(small(vec![1.5], 1).validate().is_err());
        assert!(small(vec![0.1], 0).validate().is_err());
        let json = r#"{"n":4,"k":1,"noiseModel":"povm-jitter","levels":[0],"trialsPerLevel":1,"seed":1}"#;
        let cfg: SweepConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.monomial_degree, 2);
        assert!(serde_json::from_str::<SweepConfig>(&json.replace("seed", "sede")).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn report_formats() {
        let rows = run_sweep(&small(vec![1e-3], 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("r.csv");
        emit_report(&rows, ReportFormat::from_path(&csv).unwrap(), &csv).unwrap();
        let text = std::fs::read_to_string(&csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let json = dir.path().join("r.json");
        emit_report(&rows, ReportFormat::Json, &json).unwrap();
        assert_eq!(load_json_report(&json).unwrap(), rows);
        assert!(emit_report(&[], ReportFormat::Csv, &csv).is_err());
        assert!(ReportFormat::from_path(Path::new("x.txt")).is_err());
    }
}
