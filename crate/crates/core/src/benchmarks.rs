//! Registry of limit-state functions with their input distributions,
//! reference failure probabilities and default construction settings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probspace::{normal_cdf, DistributionKind, Marginal, RandomVectorSpec};
use crate::trussfe::{truss_lsf, TrussModel};

pub const IDS: [&str; 9] = [
    "four_branch",
    "modified_two_branch",
    "two_component",
    "parabolic",
    "highly_nonlinear",
    "rastrigin",
    "oscillator",
    "truss",
    "high_dim",
];

/// Optional benchmark parameters; unused fields are ignored by benchmarks
/// that take no parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkParams {
    /// Offset of the modified two-branch system.
    pub k: f64,
    /// Oscillator load case, 1 or 2.
    pub case: u8,
    /// Truss deflection limit in meters.
    pub v_max: f64,
    /// Reliability index of the linear high-dimensional function.
    pub beta: f64,
    /// Dimension of the linear high-dimensional function.
    pub dim: usize,
}

impl Default for BenchmarkParams {
    fn default() -> Self {
        BenchmarkParams { k: 3.4, case: 1, v_max: 0.11, beta: 3.5, dim: 20 }
    }
}

/// Construction and sampling settings a benchmark ships with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkDefaults {
    pub r_c: f64,
    pub r_d: f64,
    pub lambda: f64,
    pub delta: f64,
    pub n_doe_init: usize,
    /// Monte Carlo population for the failure-probability stage.
    pub n_mc: usize,
    /// Batch appended when the population is grown adaptively.
    pub n_mc_batch: usize,
    /// Cap on the DoE size, and whether reaching it ends construction
    /// normally instead of raising an error.
    pub doe_budget: usize,
    pub stop_at_budget: bool,
    /// Fixed candidate pool for the AK-MCS baseline, if any.
    pub csp_fixed: Option<usize>,
    /// Lower bound of the correlation-parameter search.
    pub theta_lower: f64,
}

impl BenchmarkDefaults {
    fn standard(n_doe_init: usize, n_mc: usize) -> Self {
        BenchmarkDefaults {
            r_c: 4.3,
            r_d: 0.5,
            lambda: 0.5,
            delta: 0.001,
            n_doe_init,
            n_mc,
            n_mc_batch: n_mc,
            doe_budget: 1000,
            stop_at_budget: false,
            csp_fixed: None,
            theta_lower: 1e-3,
        }
    }
}

/// Reference failure probability for a benchmark configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub pf: f64,
    /// Population size behind a sampled reference; `None` when exact.
    pub n_mc: Option<usize>,
}

impl Reference {
    fn sampled(pf: f64, n: usize) -> Option<Self> {
        Some(Reference { pf, n_mc: Some(n) })
    }
}

#[derive(Debug, Clone)]
enum Kind {
    FourBranch,
    TwoBranch { k: f64 },
    TwoComponent,
    Parabolic,
    HighlyNonlinear,
    Rastrigin,
    Oscillator,
    Truss { v_max: f64, model: Box<TrussModel> },
    HighDim { beta: f64 },
}

/// A fully wired limit-state function `G`; failure is `G < 0`.
#[derive(Debug, Clone)]
pub struct Benchmark {
    id: &'static str,
    params: BenchmarkParams,
    spec: RandomVectorSpec,
    kind: Kind,
    pub defaults: BenchmarkDefaults,
    pub reference: Option<Reference>,
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::TwoBranch { k } => write!(f, "{}(k={k})", self.id),
            Kind::Oscillator => write!(f, "{}(case={})", self.id, self.params.case),
            Kind::Truss { v_max, .. } => write!(f, "{}(v_max={v_max})", self.id),
            Kind::HighDim { beta } => write!(f, "{}(beta={beta}, dim={})", self.id, self.dim()),
            _ => f.write_str(self.id),
        }
    }
}

/// Looks up `id` and wires it with `params`.
pub fn make(id: &str, params: &BenchmarkParams) -> Result<Benchmark> {
    let sn = RandomVectorSpec::standard_normal;
    let std = BenchmarkDefaults::standard;
    let (id, spec, kind, defaults, reference): (&'static str, _, _, _, _) = match id {
        "four_branch" => ("four_branch", sn(2), Kind::FourBranch, std(6, 1_000_000), Reference::sampled(4.4454e-3, 1_000_000)),
        "modified_two_branch" => {
            let k = params.k;
            if !k.is_finite() || k <= 0.0 {
                return Err(Error::InvalidParameter(format!("modified_two_branch needs k > 0, got {k}")));
            }
            let (n_mc, reference) = if k == 3.9 {
                (8_000_000, Reference::sampled(5.7718e-5, 8_000_000))
            } else if k == 3.4 {
                (1_000_000, Reference::sampled(4.2994e-4, 1_000_000))
            } else {
                (1_000_000, None)
            };
            ("modified_two_branch", sn(2), Kind::TwoBranch { k }, std(6, n_mc), reference)
        }
        "two_component" => {
            ("two_component", sn(2), Kind::TwoComponent, std(6, 5_000_000), Reference::sampled(8.70e-5, 5_000_000))
        }
        "parabolic" => ("parabolic", sn(2), Kind::Parabolic, std(6, 1_000_000), Reference::sampled(3.02e-3, 1_000_000)),
        "highly_nonlinear" => {
            let d = BenchmarkDefaults { r_c: 3.2, ..std(8, 1_000_000) };
            ("highly_nonlinear", sn(2), Kind::HighlyNonlinear, d, Reference::sampled(4.710e-3, 1_000_000))
        }
        "rastrigin" => {
            let d = BenchmarkDefaults { r_c: 3.0, r_d: 0.1, delta: 0.1, ..std(20, 60_000) };
            ("rastrigin", sn(2), Kind::Rastrigin, d, Reference::sampled(7.308e-2, 60_000))
        }
        "oscillator" => {
            let normal = |m, s| Marginal::from_moments(DistributionKind::Normal, m, s);
            let (f_mean, f_std, d, reference) = match params.case {
                1 => (1.0, 0.2, BenchmarkDefaults { r_c: 2.1, ..std(13, 1_000_000) }, Reference::sampled(2.859e-2, 1_000_000)),
                2 => (
                    0.6,
                    0.1,
                    BenchmarkDefaults { n_mc_batch: 10_000_000, ..std(13, 20_000_000) },
                    Reference::sampled(9.090e-6, 180_000_000),
                ),
                c => return Err(Error::InvalidParameter(format!("oscillator case must be 1 or 2, got {c}"))),
            };
            let spec = RandomVectorSpec::new(vec![
                normal(1.0, 0.1)?,
                normal(0.1, 0.01)?,
                normal(1.0, 0.05)?,
                normal(0.5, 0.05)?,
                normal(1.0, 0.2)?,
                normal(f_mean, f_std)?,
            ])?;
            ("oscillator", spec, Kind::Oscillator, d, reference)
        }
        "truss" => {
            let v_max = params.v_max;
            if !v_max.is_finite() || v_max <= 0.0 {
                return Err(Error::InvalidParameter(format!("truss needs v_max > 0, got {v_max}")));
            }
            let gumbel = Marginal::from_moments(DistributionKind::Gumbel, 5e4, 7.5e3)?;
            let ln = |m, s| Marginal::from_moments(DistributionKind::Lognormal, m, s);
            let mut marginals = vec![gumbel; 6];
            marginals.extend([ln(2e-3, 2e-4)?, ln(1e-3, 1e-4)?, ln(2.1e11, 2.1e10)?, ln(2.1e11, 2.1e10)?]);
            let (r_c, n_mc, reference) = if v_max >= 0.14 {
                (5.5, 20_000_000, if v_max == 0.14 { Reference::sampled(3.425e-5, 20_000_000) } else { None })
            } else {
                (5.0, 1_000_000, if v_max == 0.11 { Reference::sampled(8.875e-3, 1_000_000) } else { None })
            };
            let d = BenchmarkDefaults { r_c, n_mc_batch: n_mc.min(10_000_000), ..std(20, n_mc) };
            let kind = Kind::Truss { v_max, model: Box::new(TrussModel::new()) };
            ("truss", RandomVectorSpec::new(marginals)?, kind, d, reference)
        }
        "high_dim" => {
            let (beta, dim) = (params.beta, params.dim);
            if !beta.is_finite() || dim < 2 {
                return Err(Error::InvalidParameter(format!("high_dim needs finite beta and dim >= 2, got {beta}, {dim}")));
            }
            let (r_c, budget) = match dim {
                20 => (7.0, 74),
                40 => (8.9, 131),
                60 => (10.2, 220),
                100 => (12.5, 361),
                n => ((n as f64).sqrt() + 2.5, 1000),
            };
            let d = BenchmarkDefaults {
                r_c,
                doe_budget: budget,
                stop_at_budget: true,
                csp_fixed: Some(300_000),
                // Twenty inputs with a smooth response: the likelihood wants
                // correlation lengths beyond what the usual floor allows.
                theta_lower: 1e-4,
                ..std(20, 2_000_000)
            };
            let reference = Some(Reference { pf: normal_cdf(-beta), n_mc: None });
            ("high_dim", sn(dim), Kind::HighDim { beta }, d, reference)
        }
        other => {
            return Err(Error::UnknownBenchmark {
                id: other.to_string(),
                valid: IDS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(Benchmark { id, params: *params, spec, kind, defaults, reference })
}

impl Benchmark {
    pub fn id(&self) -> &'static str {
        self.id
    }

    pub fn params(&self) -> &BenchmarkParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn spec(&self) -> &RandomVectorSpec {
        &self.spec
    }

    /// `G` at a physical-space point.
    pub fn eval_x(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} expects {} inputs, got {}",
                self.id,
                self.dim(),
                x.len()
            )));
        }
        Ok(match &self.kind {
            Kind::FourBranch => four_branch(x[0], x[1]),
            Kind::TwoBranch { k } => two_branch(*k, x[0], x[1]),
            Kind::TwoComponent => two_component(x[0], x[1]),
            Kind::Parabolic => 5.0 - x[1] - 0.5 * (x[0] - 0.1).powi(2),
            Kind::HighlyNonlinear => 1.2 - (x[0] * x[0] + 4.0) * (x[1] - 1.0) / 20.0 + (2.5 * x[0]).sin(),
            Kind::Rastrigin => rastrigin(x),
            Kind::Oscillator => oscillator_lsf(x)?,
            Kind::Truss { v_max, model } => truss_lsf(model, x, *v_max)?,
            Kind::HighDim { beta } => beta * (x.len() as f64).sqrt() - x.iter().sum::<f64>(),
        })
    }

    /// `G` at a standard-normal-space point.
    pub fn eval_u(&self, u: &[f64]) -> Result<f64> {
        if self.spec.is_standard_normal() {
            self.eval_x(u)
        } else {
            if u.len() != self.dim() {
                return Err(Error::InvalidArgument(format!("{} expects {} inputs", self.id, self.dim())));
            }
            self.eval_x(&self.spec.u_to_x(u))
        }
    }

    /// Evaluates `G` on flat U-space rows into `out`, writing `None` for
    /// points outside the function's domain.
    pub fn eval_u_rows(&self, flat: &[f64], out: &mut Vec<Option<f64>>) {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for u in flat.chunks_exact(d) {
            let g = if self.spec.is_standard_normal() {
                self.eval_x(u)
            } else {
                self.spec.u_to_x_into(u, &mut x);
                self.eval_x(&x)
            };
            out.push(g.ok());
        }
    }
}

pub fn four_branch(x1: f64, x2: f64) -> f64 {
    let s = std::f64::consts::SQRT_2;
    let q = 0.1 * (x1 - x2).powi(2);
    let b1 = 3.0 + q - (x1 + x2) / s;
    let b2 = 3.0 + q + (x1 + x2) / s;
    let b3 = (x1 - x2) + 6.0 / s;
    let b4 = (x2 - x1) + 6.0 / s;
    b1.min(b2).min(b3).min(b4)
}

pub fn two_branch(k: f64, x1: f64, x2: f64) -> f64 {
    let q = 0.1 * (x1 - x2).powi(2);
    let t = (x1 + x2) / std::f64::consts::SQRT_2;
    (k + q - t).min(k + q + t)
}

pub fn two_component(x1: f64, x2: f64) -> f64 {
    let g1 = 3.0 - x2 + (-x1 * x1 / 10.0).exp() + (x1 / 5.0).powi(4);
    let g2 = 8.0 - x1 * x2;
    g1.min(g2)
}

pub fn rastrigin(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|&v| v * v - 5.0 * (2.0 * std::f64::consts::PI * v).cos()).sum();
    10.0 - s
}

/// Oscillator under a rectangular pulse; `x = [c1, c2, m, r, t1, F1]`.
pub fn oscillator_lsf(x: &[f64]) -> Result<f64> {
    let [c1, c2, m, r, t1, f1] = <[f64; 6]>::try_from(x)
        .map_err(|_| Error::InvalidArgument(format!("oscillator expects 6 inputs, got {}", x.len())))?;
    let k = c1 + c2;
    if !(m > 0.0) || !(k > 0.0) {
        return Err(Error::Domain(format!("oscillator needs positive mass and stiffness, got m={m}, c1+c2={k}")));
    }
    let w = (k / m).sqrt();
    Ok(3.0 * r - (2.0 * f1 / (m * w * w) * (w * t1 / 2.0).sin()).abs())
}
