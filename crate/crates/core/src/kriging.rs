//! Ordinary Kriging with a separable Gaussian correlation kernel.
//!
//! The correlation parameters are chosen by minimising the reduced
//! likelihood `det(R)^(1/m) * sigma2_hat(theta)` with a multistart
//! Hooke–Jeeves search in `log10(theta)`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::probspace::{latin_hypercube, RngStream, SampleMatrix};

/// Minimum Euclidean separation between two training points.
pub const MIN_SEPARATION: f64 = 1e-8;

/// Training data: points in U-space and their limit-state responses.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    points: SampleMatrix,
    responses: Vec<f64>,
}

impl TrainingSet {
    pub fn new(points: SampleMatrix, responses: Vec<f64>) -> Result<Self> {
        if points.rows() != responses.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} responses",
                points.rows(),
                responses.len()
            )));
        }
        if points.rows() < 2 {
            return Err(Error::InvalidArgument("a Kriging training set needs at least 2 points".into()));
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument("training responses must be finite".into()));
        }
        for i in 0..points.rows() {
            for j in 0..i {
                if distance(points.row(i), points.row(j)) < MIN_SEPARATION {
                    return Err(Error::DuplicatePoint { first: j, second: i, tol: MIN_SEPARATION });
                }
            }
        }
        Ok(TrainingSet { points, responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &SampleMatrix {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    /// Distance from `u` to the closest training point.
    pub fn min_distance_to(&self, u: &[f64]) -> f64 {
        self.points.iter_rows().map(|p| distance(p, u)).fold(f64::INFINITY, f64::min)
    }

    pub fn push(&mut self, u: &[f64], response: f64) -> Result<()> {
        if let Some((i, _)) = self
            .points
            .iter_rows()
            .enumerate()
            .find(|(_, p)| distance(p, u) < MIN_SEPARATION)
        {
            return Err(Error::DuplicatePoint { first: i, second: self.len(), tol: MIN_SEPARATION });
        }
        if !response.is_finite() {
            return Err(Error::InvalidArgument("training responses must be finite".into()));
        }
        self.points.push_row(u);
        self.responses.push(response);
        Ok(())
    }

    fn closest_pair(&self) -> (usize, usize) {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..self.len() {
            for j in 0..i {
                let d = distance(self.points.row(i), self.points.row(j));
                if d < best.2 {
                    best = (j, i, d);
                }
            }
        }
        (best.0, best.1)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Gaussian correlation `prod_d exp(-theta_d (xi_d - xj_d)^2)`.
pub fn correlation(theta: &[f64], xi: &[f64], xj: &[f64]) -> f64 {
    debug_assert_eq!(theta.len(), xi.len());
    debug_assert_eq!(xi.len(), xj.len());
    let s: f64 = theta
        .iter()
        .zip(xi.iter().zip(xj))
        .map(|(t, (a, b))| t * (a - b) * (a - b))
        .sum();
    (-s).exp()
}

/// Shared count of surrogate predictions.
#[derive(Debug, Clone, Default)]
pub struct PredictionCounter(Arc<AtomicU64>);

impl PredictionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Settings for the correlation-parameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Per-dimension bounds on theta; a single entry applies to every dimension.
    pub theta_bounds: Vec<(f64, f64)>,
    /// Latin hypercube starting points in log10(theta).
    pub n_starts: usize,
    /// Total reduced-likelihood evaluations, starts included.
    pub search_budget: usize,
    /// Previous theta, evaluated as an extra start.
    pub warm_start: Option<Vec<f64>>,
    pub stream: RngStream,
    pub nugget_start: f64,
    pub nugget_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            theta_bounds: vec![(1e-3, 1e2)],
            n_starts: 10,
            search_budget: 200,
            warm_start: None,
            stream: RngStream::new(0, -2),
            nugget_start: 1e-10,
            nugget_max: 1e-4,
        }
    }
}

impl FitOptions {
    fn bounds(&self, dim: usize) -> Result<Vec<(f64, f64)>> {
        let bounds = match self.theta_bounds.len() {
            1 => vec![self.theta_bounds[0]; dim],
            n if n == dim => self.theta_bounds.clone(),
            n => {
                return Err(Error::InvalidParameter(format!(
                    "{n} theta bounds given for a {dim}-dimensional model"
                )))
            }
        };
        if bounds.iter().any(|&(lo, hi)| !(lo > 0.0) || !(hi >= lo)) {
            return Err(Error::InvalidParameter("theta bounds must satisfy 0 < lo <= hi".into()));
        }
        Ok(bounds)
    }
}

/// Diagnostics of a correlation-parameter search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitReport {
    /// Reduced-likelihood evaluations performed.
    pub evaluations: usize,
    /// Every starting point with its objective value (`inf` if singular).
    pub starts: Vec<(Vec<f64>, f64)>,
    /// Objective at the returned theta.
    pub objective: f64,
}

#[derive(Debug, Clone)]
struct Factorization {
    /// Lower Cholesky factor of `R + nugget I`, column-major.
    l: DMatrix<f64>,
    nugget: f64,
    log_det: f64,
    rinv_one: DVector<f64>,
    one_rinv_one: f64,
    gamma: DVector<f64>,
    beta: f64,
    sigma2: f64,
}

impl Factorization {
    fn objective(&self, m: usize) -> f64 {
        if self.sigma2 <= 0.0 {
            return 0.0;
        }
        (self.log_det / m as f64).exp() * self.sigma2
    }

    /// Whether the nugget keeps the mean within [`INTERP_TOL`] of the data.
    /// At training point i the mean misses the response by nugget * gamma_i.
    fn interpolates(&self, responses: &[f64]) -> bool {
        self.gamma.iter().zip(responses).all(|(g, y)| self.nugget * g.abs() <= INTERP_TOL * (1.0 + y.abs()))
    }
}

/// Misfit the theta search tolerates at training points.
const INTERP_TOL: f64 = 1e-6;

/// Search score: candidates that keep the interpolation property rank before
/// any that do not, then by reduced likelihood.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Score(bool, f64);

impl Score {
    const WORST: Score = Score(true, f64::INFINITY);
}

fn correlation_matrix(train: &TrainingSet, theta: &[f64]) -> DMatrix<f64> {
    let m = train.len();
    let mut r = DMatrix::<f64>::identity(m, m);
    for j in 0..m {
        let xj = train.points.row(j);
        for i in (j + 1)..m {
            let c = correlation(theta, train.points.row(i), xj);
            r[(i, j)] = c;
            r[(j, i)] = c;
        }
    }
    r
}

fn factorize(train: &TrainingSet, theta: &[f64], nugget_start: f64, nugget_max: f64) -> Result<Factorization> {
    let m = train.len();
    let base = correlation_matrix(train, theta);
    let mut nugget = nugget_start;
    loop {
        let mut r = base.clone();
        for i in 0..m {
            r[(i, i)] += nugget;
        }
        if let Some(chol) = r.cholesky() {
            let ones = DVector::<f64>::from_element(m, 1.0);
            let y = DVector::<f64>::from_column_slice(&train.responses);
            let rinv_one = chol.solve(&ones);
            let rinv_y = chol.solve(&y);
            let one_rinv_one = rinv_one.sum();
            let beta = rinv_y.sum() / one_rinv_one;
            let resid = &y - DVector::from_element(m, beta);
            let gamma = chol.solve(&resid);
            let sigma2 = (resid.dot(&gamma) / m as f64).max(0.0);
            let l = chol.unpack();
            let log_det = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
            return Ok(Factorization { l, nugget, log_det, rinv_one, one_rinv_one, gamma, beta, sigma2 });
        }
        if nugget >= nugget_max {
            let (first, second) = train.closest_pair();
            return Err(Error::SingularModel { nugget, first, second });
        }
        nugget = (nugget * 10.0).min(nugget_max);
    }
}

/// Reduced-likelihood objective at `theta` (smaller is better).
pub fn reduced_likelihood(train: &TrainingSet, theta: &[f64]) -> Result<f64> {
    let opts = FitOptions::default();
    Ok(factorize(train, theta, opts.nugget_start, opts.nugget_max)?.objective(train.len()))
}

/// A fitted ordinary Kriging surrogate. Immutable once built.
#[derive(Debug, Clone)]
pub struct KrigingModel {
    theta: Vec<f64>,
    beta: f64,
    sigma2: f64,
    nugget: f64,
    l: DMatrix<f64>,
    gamma: Vec<f64>,
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
    degenerate: bool,
    training: TrainingSet,
    counter: PredictionCounter,
    report: FitReport,
}

impl KrigingModel {
    /// Fits the surrogate, searching theta to minimise the reduced likelihood.
    pub fn fit(train: TrainingSet, opts: &FitOptions, counter: PredictionCounter) -> Result<Self> {
        let dim = train.dim();
        let bounds = opts.bounds(dim)?;
        let log_bounds: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (lo.log10(), hi.log10())).collect();
        let to_theta = |z: &[f64]| z.iter().map(|v| 10f64.powf(*v)).collect::<Vec<_>>();

        let first = train.responses[0];
        if train.responses.iter().all(|&y| y == first) {
            let theta = opts.warm_start.clone().unwrap_or_else(|| {
                log_bounds.iter().map(|&(lo, hi)| 10f64.powf(0.5 * (lo + hi))).collect()
            });
            return Ok(KrigingModel::degenerate(train, theta, counter));
        }

        let mut evals = 0usize;
        let mut eval = |z: &[f64]| -> Score {
            evals += 1;
            match factorize(&train, &to_theta(z), opts.nugget_start, opts.nugget_max) {
                Ok(f) => Score(!f.interpolates(&train.responses), f.objective(train.len())),
                Err(_) => Score::WORST,
            }
        };

        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(w) = &opts.warm_start {
            if w.len() == dim {
                starts.push(
                    w.iter()
                        .zip(&log_bounds)
                        .map(|(t, &(lo, hi))| t.max(1e-300).log10().clamp(lo, hi))
                        .collect(),
                );
            }
        }
        if opts.n_starts >= 2 {
            let lhs = latin_hypercube(opts.n_starts, dim, 1.0, opts.stream)?;
            for row in lhs.iter_rows() {
                starts.push(
                    row.iter()
                        .zip(&log_bounds)
                        .map(|(v, &(lo, hi))| lo + 0.5 * (v + 1.0) * (hi - lo))
                        .collect(),
                );
            }
        } else if starts.is_empty() {
            starts.push(log_bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect());
        }

        let mut report = FitReport::default();
        let mut best_z = starts[0].clone();
        let mut best_f = Score::WORST;
        for z in &starts {
            let f = eval(z);
            report.starts.push((to_theta(z), f.1));
            if f < best_f {
                best_f = f;
                best_z = z.clone();
            }
        }

        // Hooke–Jeeves pattern search from the best start.
        let budget = opts.search_budget.max(starts.len());
        let mut step = 0.5;
        let min_step = 1e-2;
        let mut count = starts.len();
        let explore = |base: &[f64], f_base: Score, step: f64, count: &mut usize, eval: &mut dyn FnMut(&[f64]) -> Score| {
            let mut z = base.to_vec();
            let mut fz = f_base;
            for d in 0..dim {
                for dir in [1.0, -1.0] {
                    if *count >= budget {
                        return (z, fz);
                    }
                    let (lo, hi) = log_bounds[d];
                    let trial_v = (z[d] + dir * step).clamp(lo, hi);
                    if trial_v == z[d] {
                        continue;
                    }
                    let mut trial = z.clone();
                    trial[d] = trial_v;
                    *count += 1;
                    let ft = eval(&trial);
                    if ft < fz {
                        z = trial;
                        fz = ft;
                        break;
                    }
                }
            }
            (z, fz)
        };
        while count < budget && step >= min_step && best_f.1.is_finite() {
            let (z, fz) = explore(&best_z, best_f, step, &mut count, &mut eval);
            if fz < best_f {
                // Pattern move along the improving direction.
                let pattern: Vec<f64> = z
                    .iter()
                    .zip(&best_z)
                    .zip(&log_bounds)
                    .map(|((a, b), &(lo, hi))| (2.0 * a - b).clamp(lo, hi))
                    .collect();
                best_z = z;
                best_f = fz;
                if count < budget {
                    count += 1;
                    let fp = eval(&pattern);
                    let (zp, fzp) = explore(&pattern, fp, step, &mut count, &mut eval);
                    if fzp < best_f {
                        best_z = zp;
                        best_f = fzp;
                    }
                }
            } else {
                step *= 0.5;
            }
        }

        let theta = to_theta(&best_z);
        let fact = factorize(&train, &theta, opts.nugget_start, opts.nugget_max)?;
        report.evaluations = evals + 1;
        report.objective = fact.objective(train.len());
        Ok(KrigingModel::from_factorization(train, theta, fact, counter, report))
    }

    /// Builds the model at a fixed theta without any search.
    pub fn with_theta(train: TrainingSet, theta: Vec<f64>, counter: PredictionCounter) -> Result<Self> {
        if theta.len() != train.dim() || theta.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidParameter("theta must be positive with one entry per dimension".into()));
        }
        let first = train.responses[0];
        if train.responses.iter().all(|&y| y == first) {
            return Ok(KrigingModel::degenerate(train, theta, counter));
        }
        let opts = FitOptions::default();
        let fact = factorize(&train, &theta, opts.nugget_start, opts.nugget_max)?;
        let report = FitReport { evaluations: 1, starts: Vec::new(), objective: fact.objective(train.len()) };
        Ok(KrigingModel::from_factorization(train, theta, fact, counter, report))
    }

    fn degenerate(train: TrainingSet, theta: Vec<f64>, counter: PredictionCounter) -> Self {
        let m = train.len();
        KrigingModel {
            theta,
            beta: train.responses[0],
            sigma2: 0.0,
            nugget: 0.0,
            l: DMatrix::zeros(0, 0),
            gamma: vec![0.0; m],
            rinv_one: vec![0.0; m],
            one_rinv_one: 1.0,
            degenerate: true,
            training: train,
            counter,
            report: FitReport::default(),
        }
    }

    fn from_factorization(
        train: TrainingSet,
        theta: Vec<f64>,
        fact: Factorization,
        counter: PredictionCounter,
        report: FitReport,
    ) -> Self {
        KrigingModel {
            theta,
            beta: fact.beta,
            sigma2: fact.sigma2,
            nugget: fact.nugget,
            l: fact.l,
            gamma: fact.gamma.as_slice().to_vec(),
            rinv_one: fact.rinv_one.as_slice().to_vec(),
            one_rinv_one: fact.one_rinv_one,
            degenerate: false,
            training: train,
            counter,
            report,
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn training(&self) -> &TrainingSet {
        &self.training
    }

    pub fn into_training(self) -> TrainingSet {
        self.training
    }

    pub fn dim(&self) -> usize {
        self.training.dim()
    }

    pub fn counter(&self) -> &PredictionCounter {
        &self.counter
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    /// `1^T R^-1 1`.
    pub fn one_rinv_one(&self) -> f64 {
        self.one_rinv_one
    }

    fn correlations(&self, u: &[f64], r: &mut Vec<f64>) {
        r.clear();
        r.extend(self.training.points.iter_rows().map(|x| correlation(&self.theta, u, x)));
    }

    fn mean_from(&self, r: &[f64]) -> f64 {
        self.beta + r.iter().zip(&self.gamma).map(|(a, b)| a * b).sum::<f64>()
    }

    fn variance_from(&self, r: &mut [f64]) -> f64 {
        if self.degenerate || self.sigma2 == 0.0 {
            return 0.0;
        }
        let u_term = r.iter().zip(&self.rinv_one).map(|(a, b)| a * b).sum::<f64>() - 1.0;
        // Forward substitution L w = r, in place; then r^T R^-1 r = |w|^2.
        let m = r.len();
        let mut quad = 0.0;
        for j in 0..m {
            let col = self.l.column(j);
            let w = r[j] / col[j];
            r[j] = w;
            quad += w * w;
            for i in (j + 1)..m {
                r[i] -= col[i] * w;
            }
        }
        let v = self.sigma2 * (1.0 - quad + u_term * u_term / self.one_rinv_one);
        v.max(0.0)
    }

    pub fn predict(&self, u: &[f64]) -> Prediction {
        assert_eq!(u.len(), self.dim(), "prediction point dimension mismatch");
        self.counter.add(1);
        let mut r = Vec::with_capacity(self.training.len());
        self.correlations(u, &mut r);
        let mean = self.mean_from(&r);
        let variance = self.variance_from(&mut r);
        Prediction { mean, variance }
    }

    pub fn predict_mean(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim(), "prediction point dimension mismatch");
        self.counter.add(1);
        self.mean_uncounted(u)
    }

    fn mean_uncounted(&self, u: &[f64]) -> f64 {
        let s: f64 = self
            .training
            .points
            .iter_rows()
            .zip(&self.gamma)
            .map(|(x, g)| g * correlation(&self.theta, u, x))
            .sum();
        self.beta + s
    }

    pub fn predict_batch(&self, points: &SampleMatrix) -> Vec<Prediction> {
        assert_eq!(points.cols(), self.dim(), "prediction point dimension mismatch");
        self.counter.add(points.rows() as u64);
        let mut r = Vec::with_capacity(self.training.len());
        points
            .iter_rows()
            .map(|u| {
                self.correlations(u, &mut r);
                let mean = self.mean_from(&r);
                let variance = self.variance_from(&mut r);
                Prediction { mean, variance }
            })
            .collect()
    }

    /// Predicted means of consecutive rows stored in `flat`.
    pub fn predict_mean_flat(&self, flat: &[f64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(flat.len() % d, 0);
        self.counter.add((flat.len() / d) as u64);
        flat.chunks_exact(d).map(|u| self.mean_uncounted(u)).collect()
    }

    /// Analytic gradient of the predicted mean with respect to `u`.
    pub fn mean_gradient(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.dim(), "gradient point dimension mismatch");
        let mut grad = vec![0.0; u.len()];
        for (x, g) in self.training.points.iter_rows().zip(&self.gamma) {
            let w = g * correlation(&self.theta, u, x);
            for d in 0..u.len() {
                grad[d] -= 2.0 * self.theta[d] * (u[d] - x[d]) * w;
            }
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn train_1d(xs: &[f64], ys: &[f64]) -> TrainingSet {
        let pts = SampleMatrix::from_flat(1, xs.to_vec()).unwrap();
        TrainingSet::new(pts, ys.to_vec()).unwrap()
    }

    #[test]
    fn correlation_values() {
        assert_eq!(correlation(&[1.0, 1.0], &[0.3, -2.0], &[0.3, -2.0]), 1.0);
        assert_relative_eq!(correlation(&[1.0], &[0.0], &[1.0]), (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(
            correlation(&[2.0, 0.5], &[0.0, 0.0], &[1.0, 2.0]),
            0.018_315_638_888_734_18,
            max_relative = 1e-12
        );
    }

    #[test]
    fn training_set_rejects_duplicates() {
        let pts = SampleMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1e-10]]).unwrap();
        let err = TrainingSet::new(pts, vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoint { first: 0, second: 2, .. }));

        let mut t = train_1d(&[0.0, 1.0], &[0.0, 1.0]);
        assert!(t.push(&[1.0 + 1e-9], 3.0).is_err());
        t.push(&[2.0], 2.0).unwrap();
        assert_eq!(t.len(), 3);
        assert!(TrainingSet::new(SampleMatrix::from_flat(1, vec![0.0]).unwrap(), vec![1.0]).is_err());
    }

    #[test]
    fn linear_data_interpolates() {
        let model = KrigingModel::fit(train_1d(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]), &FitOptions::default(), PredictionCounter::new()).unwrap();
        for (x, y) in [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)] {
            let p = model.predict(&[x]);
            assert!((p.mean - y).abs() <= 1e-6 * (1.0 + y.abs()));
        }
        let mid = model.predict(&[0.5]).mean;
        assert!((0.0..=1.0).contains(&mid), "mid prediction {mid}");
        let slope = model.mean_gradient(&[1.0])[0];
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn constant_responses_are_degenerate() {
        let model = KrigingModel::fit(train_1d(&[0.0, 1.0, 3.0], &[2.5, 2.5, 2.5]), &FitOptions::default(), PredictionCounter::new()).unwrap();
        assert!(model.is_degenerate());
        for x in [-4.0, 0.3, 10.0] {
            let p = model.predict(&[x]);
            assert_eq!(p.mean, 2.5);
            assert_eq!(p.variance, 0.0);
        }
        assert_eq!(model.mean_gradient(&[0.7]), vec![0.0]);
    }

    #[test]
    fn far_field_limit() {
        let model = KrigingModel::fit(
            train_1d(&[0.0, 0.7, 1.5, 2.2], &[1.0, -0.5, 0.3, 2.0]),
            &FitOptions::default(),
            PredictionCounter::new(),
        )
        .unwrap();
        let p = model.predict(&[1e3]);
        assert_relative_eq!(p.mean, model.beta(), max_relative = 1e-12);
        assert_relative_eq!(p.variance, model.sigma2() * (1.0 + 1.0 / model.one_rinv_one()), max_relative = 1e-9);
    }

    #[test]
    fn sine_example_variance_shape() {
        let xs = [4.0, 6.18, 6.38, 7.5];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin()).collect();
        let model = KrigingModel::fit(train_1d(&xs, &ys), &FitOptions::default(), PredictionCounter::new()).unwrap();
        let near = model.predict(&[6.28]).variance;
        let gap = model.predict(&[5.0]).variance;
        assert!(near < 0.01 * gap, "variance near data {near} vs gap {gap}");
    }

    #[test]
    fn counter_tracks_batches() {
        let counter = PredictionCounter::new();
        let model = KrigingModel::fit(train_1d(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]), &FitOptions::default(), counter.clone()).unwrap();
        let pts = SampleMatrix::from_flat(1, vec![0.1, 0.2, 0.3]).unwrap();
        let batch = model.predict_batch(&pts);
        assert_eq!(counter.get(), 3);
        assert_eq!(batch[1], model.predict(&[0.2]));
        assert_eq!(counter.get(), 4);
        model.predict_mean_flat(&[0.0, 1.0]);
        assert_eq!(counter.get(), 6);
    }

    #[test]
    fn multistart_returns_best_start_or_better() {
        let xs = [0.0, 0.5, 1.1, 1.9, 2.4, 3.3];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| (2.0 * x).cos() + 0.3 * x).collect();
        let model = KrigingModel::fit(train_1d(&xs, &ys), &FitOptions::default(), PredictionCounter::new()).unwrap();
        let rep = model.report();
        assert!(rep.starts.len() >= 10);
        for (_, f) in &rep.starts {
            assert!(rep.objective <= *f);
        }
        assert!(rep.evaluations <= FitOptions::default().search_budget + 1);
    }
}
