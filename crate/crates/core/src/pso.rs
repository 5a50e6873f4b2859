//! Global-best particle swarm minimiser on a bounded box.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probspace::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub n_swarm: usize,
    pub n_ite_max: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Per-dimension speed cap.
    pub v_max: f64,
    /// Half-width of the search box `[-u_lim, u_lim]^N_D`.
    pub u_lim: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams { n_swarm: 100, n_ite_max: 50, inertia: 0.729, c1: 2.0, c2: 2.0, v_max: 0.3, u_lim: 6.0 }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_swarm >= 2
            && self.n_ite_max >= 1
            && self.v_max > 0.0
            && self.inertia > 0.0
            && self.inertia <= 1.0
            && self.c1 > 0.0
            && self.c2 > 0.0
            && self.u_lim > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid PSO parameters: {self:?}")))
        }
    }

    /// Objective evaluations performed by one call to [`minimize`].
    pub fn evaluations(&self) -> usize {
        self.n_swarm * (self.n_ite_max + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Objective calls that returned NaN (scored as +inf).
    pub nan_count: usize,
    /// Global-best value after initialisation and after every iteration.
    pub history: Vec<f64>,
}

/// Minimises `objective` over `[-u_lim, u_lim]^dim`.
///
/// Positions leaving the box are clamped to it and the offending velocity
/// component is zeroed. Ties in the global best go to the lowest particle
/// index.
pub fn minimize<F>(objective: F, dim: usize, params: &PsoParams, stream: RngStream) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64,
{
    params.validate()?;
    if dim == 0 {
        return Err(Error::InvalidParameter("PSO needs at least one dimension".into()));
    }
    let n = params.n_swarm;
    let (lo, hi) = (-params.u_lim, params.u_lim);
    let vmax = params.v_max;
    let mut rng = stream.rng();

    let mut pos: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut vel: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-vmax..=vmax)).collect();

    let mut nan_count = 0usize;
    let mut evaluations = 0usize;
    let mut score = |x: &[f64]| -> f64 {
        evaluations += 1;
        let f = objective(x);
        if f.is_nan() {
            nan_count += 1;
            f64::INFINITY
        } else {
            f
        }
    };

    let mut pbest = pos.clone();
    let mut pbest_f: Vec<f64> = pos.chunks_exact(dim).map(&mut score).collect();
    let argmin = |vals: &[f64]| {
        let mut best = 0;
        for (i, &v) in vals.iter().enumerate() {
            if v < vals[best] {
                best = i;
            }
        }
        best
    };
    let mut g = argmin(&pbest_f);
    let mut gbest = pbest[g * dim..(g + 1) * dim].to_vec();
    let mut gbest_f = pbest_f[g];
    let mut history = Vec::with_capacity(params.n_ite_max + 1);
    history.push(gbest_f);

    let mut f_new = vec![0.0; n];
    for _ in 0..params.n_ite_max {
        for i in 0..n {
            for j in 0..dim {
                let k = i * dim + j;
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let v = params.inertia * vel[k]
                    + params.c1 * r1 * (pbest[k] - pos[k])
                    + params.c2 * r2 * (gbest[j] - pos[k]);
                let v = v.clamp(-vmax, vmax);
                let x = pos[k] + v;
                if x < lo || x > hi {
                    pos[k] = x.clamp(lo, hi);
                    vel[k] = 0.0;
                } else {
                    pos[k] = x;
                    vel[k] = v;
                }
            }
        }
        for (fi, x) in f_new.iter_mut().zip(pos.chunks_exact(dim)) {
            *fi = score(x);
        }
        for i in 0..n {
            if f_new[i] <= pbest_f[i] {
                pbest_f[i] = f_new[i];
                pbest[i * dim..(i + 1) * dim].copy_from_slice(&pos[i * dim..(i + 1) * dim]);
            }
        }
        g = argmin(&pbest_f);
        gbest_f = pbest_f[g];
        gbest.copy_from_slice(&pbest[g * dim..(g + 1) * dim]);
        history.push(gbest_f);
    }

    Ok(PsoOutcome { best: gbest, value: gbest_f, evaluations, nan_count, history })
}
