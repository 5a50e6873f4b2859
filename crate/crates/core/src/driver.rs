//! Two-stage CSP-free construction, the pool-based AK-MCS+U baseline, and
//! plain Monte Carlo, each producing a [`RunResult`].
//!
//! Seed `s` owns these streams: `(s, 0)` initial design, `(s, i)` for the
//! i-th swarm call, `(s, -1)` the Monte Carlo population and `(s, -2)` the
//! correlation-parameter search (one sub-stream per fit).

use std::cell::Cell;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::error::{Error, Result};
use crate::kriging::{FitOptions, KrigingModel, Prediction, PredictionCounter, TrainingSet, MIN_SEPARATION};
use crate::learning::{self, ObjectiveContext, Variant};
use crate::metrics::cov_of_pf;
use crate::probspace::{latin_hypercube, McPopulation, RngStream, SampleMatrix};
use crate::pso::{self, PsoParams};

/// Retries of the swarm after a duplicate candidate.
pub const MAX_DUPLICATE_RETRIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CfakB,
    CfakP,
    CfakC,
    AkmcsU,
    Mcs,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::CfakB, Method::CfakP, Method::CfakC, Method::AkmcsU, Method::Mcs];

    pub fn name(self) -> &'static str {
        match self {
            Method::CfakB => "cfak_b",
            Method::CfakP => "cfak_p",
            Method::CfakC => "cfak_c",
            Method::AkmcsU => "akmcs_u",
            Method::Mcs => "mcs",
        }
    }

    /// Objective variant for the CSP-free methods.
    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::CfakB => Some(Variant::Basic),
            Method::CfakP => Some(Variant::Penalty),
            Method::CfakC => Some(Variant::Density),
            _ => None,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

/// Correlation-parameter search effort for the initial fit and for refits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KrigingSettings {
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub n_starts: usize,
    pub search_budget: usize,
    /// Budget of a warm-started refit after one DoE addition.
    pub refit_budget: usize,
    /// Every n-th refit repeats the full multistart search; 0 disables.
    pub full_refit_every: usize,
}

impl Default for KrigingSettings {
    fn default() -> Self {
        KrigingSettings {
            theta_lower: 1e-3,
            theta_upper: 1e2,
            n_starts: 10,
            search_budget: 200,
            refit_budget: 60,
            full_refit_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub method: Method,
    pub n_doe_init: usize,
    /// Half-width of the initial Latin hypercube in U-space.
    pub lhs_bound: f64,
    pub pso: PsoParams,
    pub delta: f64,
    pub delta0: f64,
    pub r_c: f64,
    pub r_d: f64,
    pub lambda: f64,
    pub u_threshold: f64,
    pub cov_threshold: f64,
    pub n_mc_init: usize,
    pub n_mc_batch: usize,
    pub mc_budget: usize,
    pub csp_init: usize,
    pub csp_batch: usize,
    pub doe_budget: usize,
    /// End construction normally when the DoE budget is reached.
    pub stop_at_budget: bool,
    pub kriging: KrigingSettings,
    /// Also classify the stage-2 population with the true function.
    pub same_population_reference: bool,
    /// Data-parallel stage-2 prediction (bit-identical to serial).
    pub parallel: bool,
}

impl MethodConfig {
    /// Settings for `method` on `bench`, using the benchmark's defaults.
    pub fn for_benchmark(method: Method, bench: &Benchmark) -> Self {
        let d = bench.defaults;
        let csp = d.csp_fixed.unwrap_or(50_000);
        MethodConfig {
            method,
            n_doe_init: d.n_doe_init,
            lhs_bound: 3.0,
            pso: PsoParams::default(),
            delta: d.delta,
            delta0: 1e-8,
            r_c: d.r_c,
            r_d: d.r_d,
            lambda: d.lambda,
            u_threshold: 2.0,
            cov_threshold: 0.05,
            n_mc_init: d.n_mc_batch.min(d.n_mc),
            n_mc_batch: d.n_mc_batch,
            mc_budget: d.n_mc,
            csp_init: csp,
            csp_batch: if d.csp_fixed.is_some() { 0 } else { 50_000 },
            doe_budget: d.doe_budget,
            stop_at_budget: d.stop_at_budget,
            kriging: KrigingSettings { theta_lower: d.theta_lower, ..KrigingSettings::default() },
            same_population_reference: false,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.u_threshold > 0.0) {
            return bad("u_threshold must be positive");
        }
        if !(self.cov_threshold > 0.0 && self.cov_threshold < 1.0) {
            return bad("cov_threshold must lie in (0, 1)");
        }
        if self.n_mc_init == 0 || self.mc_budget < self.n_mc_init {
            return bad("need 1 <= n_mc_init <= mc_budget");
        }
        if self.mc_budget > self.n_mc_init && self.n_mc_batch == 0 {
            return bad("n_mc_batch must be positive when the population can grow");
        }
        if self.method != Method::Mcs {
            if self.n_doe_init < 2 {
                return bad("n_doe_init must be at least 2");
            }
            if self.doe_budget < self.n_doe_init {
                return bad("doe_budget must be at least n_doe_init");
            }
            if !(self.lhs_bound > 0.0) {
                return bad("lhs_bound must be positive");
            }
        }
        if self.method.variant().is_some() {
            self.pso.validate()?;
            if !(self.r_c > 0.0 && self.r_d > 0.0 && self.lambda > 0.0) {
                return bad("r_c, r_d and lambda must be positive");
            }
        }
        if self.method == Method::AkmcsU && (self.csp_init == 0 || self.csp_init > self.mc_budget) {
            return bad("need 1 <= csp_init <= mc_budget");
        }
        Ok(())
    }

    fn fit_options(&self, seed: u64, fit_index: u64, warm: Option<Vec<f64>>) -> FitOptions {
        let k = &self.kriging;
        let full = warm.is_none() || (k.full_refit_every > 0 && fit_index % k.full_refit_every as u64 == 0);
        FitOptions {
            theta_bounds: vec![(k.theta_lower, k.theta_upper)],
            n_starts: if full { k.n_starts } else { 0 },
            search_budget: if full { k.search_budget } else { k.refit_budget },
            warm_start: warm,
            stream: RngStream::new(seed, -2).substream(fit_index),
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    BudgetReached,
}

/// One construction step: a candidate and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    pub candidate: Vec<f64>,
    pub u_value: f64,
    /// Acquisition objective at the candidate (U for the pool baseline).
    pub objective: f64,
    /// Penalty radius and coefficient in force when the candidate was chosen.
    pub r: f64,
    pub p: f64,
    pub accepted: bool,
    /// Stop conditions held but the gradient guard failed.
    pub forced: bool,
    pub duplicate: bool,
    pub g_value: Option<f64>,
    /// Surrogate predictions made so far.
    pub n_pred: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionLog {
    pub entries: Vec<LogEntry>,
    pub n_doe_init: usize,
    pub n_g: usize,
    pub n_pred: u64,
    /// Monte Carlo population samples drawn during construction.
    pub mc_draws: u64,
    pub wall_ms: f64,
    pub stop: Option<StopReason>,
}

impl ConstructionLog {
    fn new(n_doe_init: usize) -> Self {
        ConstructionLog {
            entries: Vec::new(),
            n_doe_init,
            n_g: n_doe_init,
            n_pred: 0,
            mc_draws: 0,
            wall_ms: 0.0,
            stop: None,
        }
    }

    pub fn accepted(&self) -> usize {
        self.entries.iter().filter(|e| e.accepted).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfEstimate {
    pub pf: f64,
    pub n_mc: usize,
    pub n_fail: usize,
    /// `+inf` when no failure was observed.
    pub cov: f64,
    pub zero_failure: bool,
    /// Samples outside the function's domain, counted as failures.
    pub domain_errors: usize,
}

impl PfEstimate {
    pub fn from_counts(n_fail: usize, n_mc: usize, domain_errors: usize) -> Self {
        let pf = n_fail as f64 / n_mc as f64;
        PfEstimate { pf, n_mc, n_fail, cov: cov_of_pf(pf, n_mc), zero_failure: n_fail == 0, domain_errors }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub benchmark: String,
    pub method: Method,
    pub seed: u64,
    pub estimate: PfEstimate,
    pub log: ConstructionLog,
    /// True-function classification of the same population, if requested.
    pub same_population: Option<PfEstimate>,
    /// Size of the final design of experiments (0 for plain MCS).
    pub doe_size: usize,
    /// Function evaluations charged to the run.
    pub n_g: usize,
    /// Surrogate predictions during construction.
    pub n_pred: u64,
    /// Surrogate predictions in the failure-probability stage.
    pub n_pred_stage2: u64,
    pub wall_ms: f64,
}

/// A fitted surrogate with its construction record.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub model: KrigingModel,
    pub log: ConstructionLog,
    pub initial: SampleMatrix,
}

fn initial_design<F>(lsf: &F, dim: usize, cfg: &MethodConfig, seed: u64) -> Result<(SampleMatrix, TrainingSet)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let initial = latin_hypercube(cfg.n_doe_init, dim, cfg.lhs_bound, RngStream::new(seed, 0))?;
    let responses = initial.iter_rows().map(lsf).collect::<Result<Vec<_>>>()?;
    let train = TrainingSet::new(initial.clone(), responses)?;
    Ok((initial, train))
}

/// Stage-1 construction without any candidate pool.
pub fn build_surrogate<F>(lsf: F, dim: usize, cfg: &MethodConfig, seed: u64) -> Result<Surrogate>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let variant = cfg
        .method
        .variant()
        .ok_or_else(|| Error::InvalidArgument(format!("{} does not build a CSP-free surrogate", cfg.method.name())))?;
    let t0 = Instant::now();
    let counter = PredictionCounter::new();
    let (initial, train) = initial_design(&lsf, dim, cfg, seed)?;
    let mut log = ConstructionLog::new(cfg.n_doe_init);
    let mut fit_index = 0u64;
    let mut model = KrigingModel::fit(train, &cfg.fit_options(seed, fit_index, None), counter.clone())?;
    let mut p = learning::penalty_coefficient(model.training().responses(), dim);
    let mut r = learning::update_radius(model.training().points(), &initial, cfg.r_c);
    let alpha_s = learning::alpha_s(dim);
    let mut pso_calls = 0i64;
    let mut retries = 0usize;
    let n_init = cfg.n_doe_init;

    let finish = |mut log: ConstructionLog, stop: StopReason, counter: &PredictionCounter| {
        log.stop = Some(stop);
        log.n_pred = counter.get();
        log.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        log
    };

    loop {
        if model.training().len() >= cfg.doe_budget {
            let log = finish(log, StopReason::BudgetReached, &counter);
            if cfg.stop_at_budget {
                return Ok(Surrogate { model, log, initial });
            }
            return Err(Error::BudgetExhausted { budget: cfg.doe_budget, log: Box::new(log) });
        }

        let ctx = ObjectiveContext {
            variant,
            delta: cfg.delta,
            delta0: cfg.delta0,
            p,
            r_c: cfg.r_c,
            r,
            r_d: cfg.r_d,
            lambda: cfg.lambda,
            alpha_s,
            u_lim: cfg.pso.u_lim,
            doe_points: model.training().points().clone(),
        };
        pso_calls += 1;
        let best_seen: Cell<(f64, Option<Prediction>)> = Cell::new((f64::INFINITY, None));
        let last_u: std::cell::RefCell<Vec<f64>> = std::cell::RefCell::new(Vec::new());
        let outcome = pso::minimize(
            |u| {
                let pred = model.predict(u);
                let f = ctx.evaluate(u, &pred);
                if f < best_seen.get().0 {
                    best_seen.set((f, Some(pred)));
                    last_u.replace(u.to_vec());
                }
                f
            },
            dim,
            &cfg.pso,
            RngStream::new(seed, pso_calls),
        )?;
        let u_star = outcome.best;
        // Reuse the swarm's own prediction at the winner when available.
        let pred = match best_seen.get().1 {
            Some(pred) if *last_u.borrow() == u_star => pred,
            _ => model.predict(&u_star),
        };
        let u_value = learning::u_score(&pred);
        let iteration = log.entries.len() + 1;
        let mut entry = LogEntry {
            iteration,
            candidate: u_star.clone(),
            u_value,
            objective: outcome.value,
            r,
            p,
            accepted: false,
            forced: false,
            duplicate: false,
            g_value: None,
            n_pred: counter.get(),
        };

        let radius_ok = variant == Variant::Basic || r == cfg.r_c;
        if u_value >= cfg.u_threshold && radius_ok {
            if gradient_guard(&model, n_init) {
                log.entries.push(entry);
                let log = finish(log, StopReason::Converged, &counter);
                return Ok(Surrogate { model, log, initial });
            }
            entry.forced = true;
        }

        if model.training().min_distance_to(&u_star) < MIN_SEPARATION {
            entry.duplicate = true;
            log.entries.push(entry);
            retries += 1;
            if retries > MAX_DUPLICATE_RETRIES {
                let log = finish(log, StopReason::BudgetReached, &counter);
                return Err(Error::BudgetExhausted { budget: cfg.doe_budget, log: Box::new(log) });
            }
            continue;
        }
        retries = 0;

        let g = lsf(&u_star)?;
        entry.accepted = true;
        entry.g_value = Some(g);
        log.entries.push(entry);
        log.n_g += 1;

        let warm = model.theta().to_vec();
        let mut train = model.into_training();
        train.push(&u_star, g)?;
        fit_index += 1;
        model = KrigingModel::fit(train, &cfg.fit_options(seed, fit_index, Some(warm)), counter.clone())?;
        p = learning::penalty_coefficient(model.training().responses(), dim);
        r = learning::update_radius(model.training().points(), &initial, cfg.r_c);
    }
}

/// True when some added design point sits close to the predicted limit
/// state relative to the local slope: `|G| < 0.1 |grad mu|`.
pub fn gradient_guard(model: &KrigingModel, n_initial: usize) -> bool {
    let train = model.training();
    train
        .points()
        .iter_rows()
        .zip(train.responses())
        .skip(n_initial)
        .any(|(u, &g)| {
            let grad = model.mean_gradient(u);
            g.abs() < 0.1 * grad.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
}

/// Failure counts of `classify` over population rows `start..end`.
///
/// `classify(flat_rows)` returns `(failures, domain_errors)` for a slice of
/// whole rows.
fn count_range<C>(classify: &C, pop: &McPopulation, start: usize, end: usize, parallel: bool) -> (usize, usize)
where
    C: Fn(&[f64]) -> (usize, usize) + Sync,
{
    let ranges = McPopulation::chunk_ranges(start, end);
    let work = |&(a, b): &(usize, usize)| classify(pop.rows(a, b).as_flat());
    let sum = |x: (usize, usize), y: (usize, usize)| (x.0 + y.0, x.1 + y.1);
    if parallel {
        ranges.par_iter().map(work).reduce(|| (0, 0), sum)
    } else {
        ranges.iter().map(work).fold((0, 0), sum)
    }
}

/// Stage 2: classify a growing standard-normal population until the
/// failure-probability CoV drops below the threshold or the budget is spent.
pub fn estimate_pf<C>(classify: C, pop: &McPopulation, cfg: &MethodConfig) -> Result<PfEstimate>
where
    C: Fn(&[f64]) -> (usize, usize) + Sync,
{
    if cfg.n_mc_init == 0 {
        return Err(Error::InvalidParameter("n_mc_init must be >= 1".into()));
    }
    let mut n = cfg.n_mc_init.min(cfg.mc_budget.max(1));
    let (mut fails, mut domain) = count_range(&classify, pop, 0, n, cfg.parallel);
    loop {
        let est = PfEstimate::from_counts(fails, n, domain);
        if est.cov < cfg.cov_threshold || n >= cfg.mc_budget || cfg.n_mc_batch == 0 {
            return Ok(est);
        }
        let next = (n + cfg.n_mc_batch).min(cfg.mc_budget);
        let (f, d) = count_range(&classify, pop, n, next, cfg.parallel);
        fails += f;
        domain += d;
        n = next;
    }
}

/// Classifier counting negative predicted means.
pub fn surrogate_classifier(model: &KrigingModel) -> impl Fn(&[f64]) -> (usize, usize) + Sync + '_ {
    move |flat| (model.predict_mean_flat(flat).iter().filter(|&&m| m < 0.0).count(), 0)
}

/// Classifier applying the true function; domain errors count as failures.
pub fn lsf_classifier(bench: &Benchmark) -> impl Fn(&[f64]) -> (usize, usize) + Sync + '_ {
    move |flat| {
        let mut out = Vec::with_capacity(flat.len() / bench.dim());
        bench.eval_u_rows(flat, &mut out);
        let domain = out.iter().filter(|g| g.is_none()).count();
        let fails = out.iter().filter(|g| g.map_or(true, |g| g < 0.0)).count();
        (fails, domain)
    }
}

/// Lowest-U pool point; ties go to the lowest index.
pub fn akmcs_select(model: &KrigingModel, pool: &SampleMatrix) -> Result<(usize, f64)> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("candidate pool is empty".into()));
    }
    let preds = model.predict_batch(pool);
    Ok(select_min_u(&preds))
}

fn select_min_u(preds: &[Prediction]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in preds.iter().enumerate() {
        let u = learning::u_score(p);
        if u < best.1 {
            best = (i, u);
        }
    }
    best
}

/// The pool-based baseline: learn on a candidate pool drawn from the
/// population prefix, growing the pool when the estimate is too noisy.
pub fn run_akmcs<F>(lsf: F, dim: usize, cfg: &MethodConfig, seed: u64, pop: &McPopulation) -> Result<(Surrogate, PfEstimate)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let t0 = Instant::now();
    let counter = PredictionCounter::new();
    let (initial, train) = initial_design(&lsf, dim, cfg, seed)?;
    let mut log = ConstructionLog::new(cfg.n_doe_init);
    let mut fit_index = 0u64;
    let mut model = KrigingModel::fit(train, &cfg.fit_options(seed, fit_index, None), counter.clone())?;
    let mut pool = pop.rows(0, cfg.csp_init);

    loop {
        let preds = model.predict_batch(&pool);
        let (idx, u_value) = select_min_u(&preds);
        let candidate = pool.row(idx).to_vec();
        let mut entry = LogEntry {
            iteration: log.entries.len() + 1,
            candidate: candidate.clone(),
            u_value,
            objective: u_value,
            r: f64::NAN,
            p: f64::NAN,
            accepted: false,
            forced: false,
            duplicate: false,
            g_value: None,
            n_pred: counter.get(),
        };
        if u_value >= cfg.u_threshold {
            let fails = preds.iter().filter(|p| p.mean < 0.0).count();
            let est = PfEstimate::from_counts(fails, pool.rows(), 0);
            let can_grow = cfg.csp_batch > 0 && pool.rows() < cfg.mc_budget;
            if est.cov < cfg.cov_threshold || !can_grow {
                log.entries.push(entry);
                log.stop = Some(StopReason::Converged);
                log.n_pred = counter.get();
                log.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
                return Ok((Surrogate { model, log, initial }, est));
            }
            log.entries.push(entry);
            let next = (pool.rows() + cfg.csp_batch).min(cfg.mc_budget);
            let extra = pop.rows(pool.rows(), next);
            for row in extra.iter_rows() {
                pool.push_row(row);
            }
            continue;
        }
        if model.training().len() >= cfg.doe_budget {
            log.entries.push(entry);
            log.stop = Some(StopReason::BudgetReached);
            log.n_pred = counter.get();
            log.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
            if cfg.stop_at_budget {
                let fails = preds.iter().filter(|p| p.mean < 0.0).count();
                let est = PfEstimate::from_counts(fails, pool.rows(), 0);
                return Ok((Surrogate { model, log, initial }, est));
            }
            return Err(Error::BudgetExhausted { budget: cfg.doe_budget, log: Box::new(log) });
        }
        let g = lsf(&candidate)?;
        entry.accepted = true;
        entry.g_value = Some(g);
        log.entries.push(entry);
        log.n_g += 1;
        let warm = model.theta().to_vec();
        let mut train = model.into_training();
        train.push(&candidate, g)?;
        fit_index += 1;
        model = KrigingModel::fit(train, &cfg.fit_options(seed, fit_index, Some(warm)), counter.clone())?;
    }
}

/// One seed of `cfg.method` on `bench`.
pub fn run_single(bench: &Benchmark, cfg: &MethodConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let t0 = Instant::now();
    let dim = bench.dim();
    let pop = McPopulation::new(dim, RngStream::new(seed, -1));
    let lsf = |u: &[f64]| bench.eval_u(u);

    let (log, estimate, doe_size, n_g, n_pred_stage2) = match cfg.method {
        Method::Mcs => {
            let est = estimate_pf(lsf_classifier(bench), &pop, cfg)?;
            (ConstructionLog::new(0), est, 0, est.n_mc, 0)
        }
        Method::AkmcsU => {
            let (s, est) = run_akmcs(lsf, dim, cfg, seed, &pop)?;
            let mut log = s.log;
            log.mc_draws = pop.drawn();
            let n_g = log.n_g;
            (log, est, s.model.training().len(), n_g, 0)
        }
        _ => {
            let s = build_surrogate(lsf, dim, cfg, seed)?;
            let mut log = s.log;
            log.mc_draws = pop.drawn();
            let before = s.model.counter().get();
            let est = estimate_pf(surrogate_classifier(&s.model), &pop, cfg)?;
            let stage2 = s.model.counter().get() - before;
            let n_g = log.n_g;
            (log, est, s.model.training().len(), n_g, stage2)
        }
    };
    let same_population = if cfg.same_population_reference && cfg.method != Method::Mcs {
        let c = lsf_classifier(bench);
        let (fails, domain) = count_range(&c, &pop, 0, estimate.n_mc, cfg.parallel);
        Some(PfEstimate::from_counts(fails, estimate.n_mc, domain))
    } else {
        None
    };
    Ok(RunResult {
        benchmark: bench.to_string(),
        method: cfg.method,
        seed,
        estimate,
        n_pred: log.n_pred,
        log,
        same_population,
        doe_size,
        n_g,
        n_pred_stage2,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs every seed independently; a failing seed does not stop the others.
/// With `jobs > 1` seeds run on a thread pool; results keep seed order.
pub fn run_method(bench: &Benchmark, cfg: &MethodConfig, seeds: &[u64], jobs: usize) -> Result<Vec<Result<RunResult>>> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    cfg.validate()?;
    if jobs <= 1 {
        return Ok(seeds.iter().map(|&s| run_single(bench, cfg, s)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| seeds.par_iter().map(|&s| run_single(bench, cfg, s)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make, BenchmarkParams};
    use crate::probspace::normal_cdf;

    fn bench(id: &str) -> Benchmark {
        make(id, &BenchmarkParams::default()).unwrap()
    }

    #[test]
    fn fixed_population_estimate() {
        let b = bench("high_dim");
        let mut cfg = MethodConfig::for_benchmark(Method::Mcs, &b);
        cfg.n_mc_init = 200_000;
        cfg.mc_budget = 200_000;
        let pop = McPopulation::new(20, RngStream::new(1, -1));
        let est = estimate_pf(lsf_classifier(&b), &pop, &cfg).unwrap();
        assert_eq!(est.n_mc, 200_000);
        let pf = normal_cdf(-3.5);
        assert!((est.pf - pf).abs() <= 3.0 * pf * cov_of_pf(pf, est.n_mc));
    }

    #[test]
    fn zero_failure_flag() {
        let b = bench("parabolic");
        let mut cfg = MethodConfig::for_benchmark(Method::Mcs, &b);
        cfg.n_mc_init = 1000;
        cfg.n_mc_batch = 1000;
        cfg.mc_budget = 3000;
        let pop = McPopulation::new(2, RngStream::new(1, -1));
        let est = estimate_pf(|flat: &[f64]| (0 * flat.len(), 0), &pop, &cfg).unwrap();
        assert!(est.zero_failure && est.cov.is_infinite());
        assert_eq!((est.pf, est.n_mc), (0.0, 3000));
    }

    #[test]
    fn batches_grow_by_exact_steps() {
        let b = bench("four_branch");
        let mut cfg = MethodConfig::for_benchmark(Method::Mcs, &b);
        cfg.n_mc_init = 10_000;
        cfg.n_mc_batch = 7_000;
        cfg.mc_budget = 40_000;
        cfg.cov_threshold = 0.01;
        let pop = McPopulation::new(2, RngStream::new(2, -1));
        let est = estimate_pf(lsf_classifier(&b), &pop, &cfg).unwrap();
        assert!(est.n_mc == 40_000 || (est.n_mc - 10_000) % 7_000 == 0);
    }

    #[test]
    fn parallel_matches_serial() {
        let b = bench("four_branch");
        let mut cfg = MethodConfig::for_benchmark(Method::Mcs, &b);
        cfg.n_mc_init = 150_000;
        cfg.mc_budget = 150_000;
        let pop = McPopulation::new(2, RngStream::new(3, -1));
        let a = estimate_pf(lsf_classifier(&b), &pop, &cfg).unwrap();
        cfg.parallel = true;
        let c = estimate_pf(lsf_classifier(&b), &pop, &cfg).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn constant_lsf_exhausts_budget() {
        let b = bench("four_branch");
        let mut cfg = MethodConfig::for_benchmark(Method::CfakC, &b);
        cfg.doe_budget = 12;
        cfg.pso = PsoParams { n_swarm: 20, n_ite_max: 10, ..PsoParams::default() };
        match build_surrogate(|_| Ok(5.0), 2, &cfg, 1) {
            Err(Error::BudgetExhausted { budget, log }) => {
                assert_eq!(budget, 12);
                assert_eq!(log.n_g, 12);
                assert!(log.entries.iter().any(|e| e.forced));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_cfak_method() {
        let b = bench("four_branch");
        let cfg = MethodConfig::for_benchmark(Method::Mcs, &b);
        assert!(build_surrogate(|u| b.eval_u(u), 2, &cfg, 1).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
