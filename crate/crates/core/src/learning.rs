//! Acquisition functions: the U score, the penalty coefficient and radius
//! schedule, the density-control index, and the three objective variants
//! minimised by the swarm to pick the next training point.

use serde::{Deserialize, Serialize};

use crate::kriging::{KrigingModel, Prediction};
use crate::probspace::SampleMatrix;

/// Returned by [`u_score`] when the predictive variance vanishes.
pub const U_SENTINEL: f64 = 1e30;

/// Floor on the predictive standard deviation inside the objective.
pub const SIGMA_FLOOR: f64 = 1e-15;

/// Weight of the density-violation indicator.
pub const DENSITY_WEIGHT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// U-type score plus the hypersphere penalty.
    Basic,
    /// Adds the growing-radius penalty.
    Penalty,
    /// Adds the density-control indicator on top of `Penalty`.
    Density,
}

/// `|mean| / sigma`, or [`U_SENTINEL`] when the variance is below 1e-30.
pub fn u_score(pred: &Prediction) -> f64 {
    if pred.variance < 1e-30 {
        U_SENTINEL
    } else {
        pred.mean.abs() / pred.variance.sqrt()
    }
}

/// `sqrt(2 / N_D)`.
pub fn alpha_s(dim: usize) -> f64 {
    (2.0 / dim as f64).sqrt()
}

/// Penalty intensity scaled to the range of the observed responses.
pub fn penalty_coefficient(responses: &[f64], dim: usize) -> f64 {
    let (lo, hi) = responses
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| (lo.min(y), hi.max(y)));
    if responses.is_empty() {
        return 0.0;
    }
    alpha_s(dim) * (hi - lo) / 4.0
}

pub fn norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Penalty radius for the current design.
///
/// With no points beyond the initial design it is the mean norm of the
/// initial points; otherwise the largest norm among the added points,
/// capped at `r_c`. `doe` must start with the rows of `initial_doe`.
pub fn update_radius(doe: &SampleMatrix, initial_doe: &SampleMatrix, r_c: f64) -> f64 {
    debug_assert!(doe.rows() >= initial_doe.rows());
    let n_init = initial_doe.rows();
    if doe.rows() == n_init {
        return initial_doe.iter_rows().map(norm).sum::<f64>() / n_init as f64;
    }
    let far = doe.iter_rows().skip(n_init).map(norm).fold(0.0, f64::max);
    far.min(r_c)
}

/// Scalars and design snapshot shared by every objective evaluation of one
/// swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveContext {
    pub variant: Variant,
    /// Offset of the search target from the predicted limit state.
    pub delta: f64,
    /// Fitness guard; kept for reporting only, the swarm minimises directly.
    pub delta0: f64,
    pub p: f64,
    pub r_c: f64,
    pub r: f64,
    pub r_d: f64,
    pub lambda: f64,
    pub alpha_s: f64,
    pub u_lim: f64,
    pub doe_points: SampleMatrix,
}

impl ObjectiveContext {
    /// Density-control index at `u`.
    pub fn density_index(&self, u: &[f64]) -> f64 {
        density_index_at(norm(u), self.alpha_s, self.r_d, self.lambda)
    }

    /// 1 when some design point lies closer than the density index.
    pub fn density_violation(&self, u: &[f64]) -> bool {
        let d_c = self.density_index(u);
        self.doe_points.iter_rows().any(|x| {
            let d = u.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            self.alpha_s * d < d_c
        })
    }

    /// Objective for a given prediction at `u`.
    pub fn evaluate(&self, u: &[f64], pred: &Prediction) -> f64 {
        let sigma = pred.variance.sqrt().max(SIGMA_FLOOR);
        let base = (pred.mean - self.delta).abs() / sigma;
        let n = norm(u);
        let mut f = base + self.p * (n - self.r_c).max(0.0);
        if matches!(self.variant, Variant::Penalty | Variant::Density) {
            f += self.p * (n - self.r).max(0.0);
        }
        if self.variant == Variant::Density && self.density_violation(u) {
            f += DENSITY_WEIGHT;
        }
        f
    }
}

/// Density-control index as a function of `|u|`.
pub fn density_index_at(norm_u: f64, alpha_s: f64, r_d: f64, lambda: f64) -> f64 {
    if alpha_s * norm_u <= lambda / r_d {
        r_d
    } else {
        lambda / (alpha_s * norm_u)
    }
}

/// Density-control index at `u` for the context's parameters.
pub fn density_index(u: &[f64], ctx: &ObjectiveContext) -> f64 {
    ctx.density_index(u)
}

/// Acquisition objective at `u` under `model`.
pub fn objective(u: &[f64], model: &KrigingModel, ctx: &ObjectiveContext) -> f64 {
    ctx.evaluate(u, &model.predict(u))
}
