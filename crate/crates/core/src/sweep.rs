//! Monte-Carlo sweep plumbing shared by the link and multi-user experiments.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::seed::trial_seed;
use crate::Result;

/// One `(sweep point, scheme)` cell of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub scheme: String,
    pub mean_asr: f64,
    /// Sample standard deviation across trials (0 for a single trial).
    pub std_asr: f64,
    pub trials: usize,
    pub seed: u64,
    pub k_users: Option<usize>,
    /// Per-trial sum rates in trial order.
    pub samples: Vec<f64>,
}

impl SweepRow {
    pub fn from_samples(
        sweep_var: f64,
        scheme: &str,
        seed: u64,
        k_users: Option<usize>,
        samples: Vec<f64>,
    ) -> Self {
        let (mean, std) = mean_std(&samples);
        Self {
            sweep_var,
            scheme: scheme.to_string(),
            mean_asr: mean,
            std_asr: std,
            trials: samples.len(),
            seed,
            k_users,
            samples,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std_asr / (self.trials as f64).sqrt()
    }
}

pub fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    /// Name of the swept variable (`snr_db`, `omega`).
    pub variable: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(variable: &str, rows: Vec<SweepRow>) -> Self {
        Self {
            variable: variable.to_string(),
            rows,
        }
    }

    pub fn row(&self, scheme: &str, sweep_var: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sweep_var == sweep_var)
    }

    /// Rows of one scheme in table order.
    pub fn curve<'a>(&'a self, scheme: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    pub fn schemes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.scheme) {
                out.push(r.scheme.clone());
            }
        }
        out
    }

    /// CSV with columns `sweep_var,scheme,mean_asr,std_asr,trials,seed`
    /// (plus `k_users` when any row carries it), each comment line prefixed by `# `.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let with_k = self.rows.iter().any(|r| r.k_users.is_some());
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("sweep_var,scheme,mean_asr,std_asr,trials,seed");
        if with_k {
            out.push_str(",k_users");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.sweep_var, r.scheme, r.mean_asr, r.std_asr, r.trials, r.seed
            );
            if with_k {
                let _ = write!(
                    out,
                    ",{}",
                    r.k_users.map(|k| k.to_string()).unwrap_or_default()
                );
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluate `f(point, trial_seed)` for every `(point, trial)` pair in
/// parallel; results come back grouped by point in trial order.
pub fn run_trials<F>(points: usize, trials: usize, master: u64, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, u64) -> Result<f64> + Sync,
{
    let flat: Vec<f64> = (0..points * trials)
        .into_par_iter()
        .map(|i| f(i / trials, trial_seed(master, (i % trials) as u64)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(flat.chunks(trials.max(1)).map(<[f64]>::to_vec).collect())
}
