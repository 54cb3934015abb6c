//! Result records shared by every experiment.

use crate::scaling::ScalingSchedule;
use std::fmt;

/// Tri-state outcome of a statistic or an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ReportOnly => "report",
        }
    }

    /// Fail dominates, then pass; report-only is neutral.
    pub fn combine(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Pass, _) | (_, Verdict::Pass) => Verdict::Pass,
            _ => Verdict::ReportOnly,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One named scalar aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    /// Confidence interval (Wilson for frequencies, order statistics for medians).
    pub interval: Option<(f64, f64)>,
    pub threshold: Option<f64>,
    pub verdict: Verdict,
}

impl Statistic {
    pub fn report(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, stderr: None, interval: None, threshold: None, verdict: Verdict::ReportOnly }
    }

    pub fn with_stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.interval = Some((lo, hi));
        self
    }

    /// Attach a threshold and the verdict it implies.
    pub fn judged(mut self, threshold: f64, ok: bool) -> Self {
        self.threshold = Some(threshold);
        self.verdict = Verdict::from_bool(ok);
        self
    }

    /// Attach a threshold that is shown but not enforced.
    pub fn against(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self
    }
}

/// Columnar data written to `data/<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// One curve of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y }
    }
}

/// Figure description; rendered to SVG by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// Everything an experiment reports.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub experiment: String,
    pub sched: Option<ScalingSchedule>,
    /// Zero for deterministic experiments.
    pub n_replicas: usize,
    pub statistics: Vec<Statistic>,
    pub verdict: Verdict,
    pub thresholds: Vec<(String, f64)>,
    /// Experiment parameters recorded in the manifest.
    pub params: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub plot: Option<Plot>,
    pub notes: Vec<String>,
}

impl EnsembleSummary {
    pub fn new(experiment: &str, sched: Option<ScalingSchedule>, n_replicas: usize) -> Self {
        Self {
            experiment: experiment.into(),
            sched,
            n_replicas,
            statistics: vec![],
            verdict: Verdict::ReportOnly,
            thresholds: vec![],
            params: vec![],
            tables: vec![],
            plot: None,
            notes: vec![],
        }
    }

    pub fn push(&mut self, s: Statistic) {
        self.statistics.push(s);
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn threshold(&mut self, key: &str, value: f64) {
        self.thresholds.push((key.into(), value));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// No judged statistic failed.
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn stat(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    /// Downgrade verdicts of sampled experiments with too few replicas, then
    /// combine the per-statistic verdicts.
    pub fn finalize(mut self, stochastic: bool, min_replicas: usize) -> Self {
        if stochastic && self.n_replicas < min_replicas {
            let mut touched = false;
            for s in &mut self.statistics {
                if s.verdict != Verdict::ReportOnly {
                    s.verdict = Verdict::ReportOnly;
                    touched = true;
                }
            }
            if touched {
                self.notes.push(format!(
                    "{} replicas is below the minimum of {min_replicas} for a verdict; all statistics are report-only",
                    self.n_replicas
                ));
            }
        }
        self.verdict = self.statistics.iter().fold(Verdict::ReportOnly, |v, s| v.combine(s.verdict));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fail_dominates_combination() {
        use Verdict::*;
        assert_eq!(Pass.combine(Fail), Fail);
        assert_eq!(ReportOnly.combine(Pass), Pass);
        assert_eq!(ReportOnly.combine(ReportOnly), ReportOnly);
    }

    #[test]
    fn small_ensembles_are_report_only() {
        let mut s = EnsembleSummary::new("x", None, 20);
        s.push(Statistic::report("f", 1.0).judged(0.5, true));
        let s = s.finalize(true, 100);
        assert_eq!(s.verdict, Verdict::ReportOnly);
        assert_eq!(s.notes.len(), 1);
    }

    #[test]
    fn deterministic_experiments_keep_verdicts() {
        let mut s = EnsembleSummary::new("x", None, 0);
        s.push(Statistic::report("f", 1.0).judged(0.5, false));
        assert_eq!(s.finalize(false, 100).verdict, Verdict::Fail);
    }
}
