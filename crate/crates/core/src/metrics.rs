//! Aggregation of repeated runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient of variation of a Monte Carlo failure-probability estimate.
///
/// Returns `+inf` for `pf = 0` and `0` for `pf = 1`.
pub fn cov_of_pf(pf: f64, n: usize) -> f64 {
    if pf <= 0.0 {
        f64::INFINITY
    } else if pf >= 1.0 {
        0.0
    } else {
        ((1.0 - pf) / (n as f64 * pf)).sqrt()
    }
}

/// The per-run quantities aggregation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub pf: f64,
    pub n_g: f64,
    pub n_pred: f64,
    pub wall_ms: f64,
}

/// Reference failure probability: one value for all runs, or one per run.
#[derive(Debug, Clone, PartialEq)]
pub enum PfRef {
    Scalar(f64),
    PerRun(Vec<f64>),
    /// No reference; both error fields come back empty.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub n_runs: usize,
    pub pf_mean: f64,
    /// Population (divide-by-n) standard deviation.
    pub pf_std: f64,
    /// Relative error of the mean against a scalar reference.
    pub rel_error: Option<f64>,
    /// Mean of the per-run relative errors.
    pub avg_rel_error: Option<f64>,
    pub ng_mean: f64,
    pub npred_mean: f64,
    pub time_mean: f64,
    pub std_convention: String,
}

fn mean(v: impl Iterator<Item = f64>) -> (f64, usize) {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (s / n as f64, n)
}

pub fn aggregate(runs: &[RunSummary], reference: &PfRef) -> Result<RunStats> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("cannot aggregate zero runs".into()));
    }
    let n = runs.len();
    let refs: Vec<f64> = match reference {
        PfRef::Scalar(r) => vec![*r; n],
        PfRef::Unknown => Vec::new(),
        PfRef::PerRun(v) if v.len() == n => v.clone(),
        PfRef::PerRun(v) => {
            return Err(Error::InvalidArgument(format!("{} references for {n} runs", v.len())));
        }
    };
    if refs.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("reference failure probabilities must be positive".into()));
    }
    // Shifting by the first value keeps identical runs exactly spread-free.
    let shift = runs[0].pf;
    let (offset, _) = mean(runs.iter().map(|r| r.pf - shift));
    let pf_mean = shift + offset;
    let var = runs.iter().map(|r| (r.pf - shift - offset).powi(2)).sum::<f64>() / n as f64;
    let rel_error = match reference {
        PfRef::Scalar(r) => Some((pf_mean - r).abs() / r),
        _ => None,
    };
    let avg_rel_error = (!refs.is_empty()).then(|| mean(runs.iter().zip(&refs).map(|(r, p)| (r.pf - p).abs() / p)).0);
    Ok(RunStats {
        n_runs: n,
        pf_mean,
        pf_std: var.sqrt(),
        rel_error,
        avg_rel_error,
        ng_mean: mean(runs.iter().map(|r| r.n_g)).0,
        npred_mean: mean(runs.iter().map(|r| r.n_pred)).0,
        time_mean: mean(runs.iter().map(|r| r.wall_ms)).0,
        std_convention: "population".into(),
    })
}
