//! Property checks shared by the property suite and the acceptance harness.
//! Each returns a short detail string on success and the reason on failure.

#![allow(dead_code)]

use cfak_core::benchmarks::{four_branch, make, BenchmarkParams};
use cfak_core::driver::{self, Method, MethodConfig};
use cfak_core::kriging::{FitOptions, KrigingModel, PredictionCounter, TrainingSet};
use cfak_core::learning::{self, ObjectiveContext, Variant};
use cfak_core::metrics::{aggregate, cov_of_pf, PfRef, RunSummary};
use cfak_core::probspace::{latin_hypercube, McPopulation, RngStream, SampleMatrix};
use cfak_core::pso::{minimize, PsoParams};
use cfak_core::trussfe::TrussModel;
use rand::Rng;

pub type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A smooth 2-D test function with a few bumps.
pub fn wavy(u: &[f64]) -> f64 {
    (1.3 * u[0]).sin() + 0.5 * u[1] * u[1] - 0.3 * u[0] * u[1] + 1.0
}

pub fn fitted(points: usize, dim: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> KrigingModel {
    let x = latin_hypercube(points, dim, 3.0, RngStream::new(seed, 0)).unwrap();
    let y: Vec<f64> = x.iter_rows().map(&f).collect();
    let train = TrainingSet::new(x, y).unwrap();
    let opts = FitOptions { stream: RngStream::new(seed, -2), ..FitOptions::default() };
    KrigingModel::fit(train, &opts, PredictionCounter::new()).unwrap()
}

pub fn kriging_interpolation() -> Check {
    let mut worst_mean = 0.0f64;
    let mut worst_var = 0.0f64;
    for seed in 0..10 {
        let model = fitted(15, 2, seed, wavy);
        let scale = model.sigma2();
        for (u, &y) in model.training().points().iter_rows().zip(model.training().responses()) {
            let p = model.predict(u);
            worst_mean = worst_mean.max((p.mean - y).abs() / (1.0 + y.abs()));
            worst_var = worst_var.max(p.variance / scale);
        }
        // Far from the data the variance approaches sigma2 (1 + 1 / 1'R^-1 1).
        let far = model.predict(&[50.0, -50.0]);
        let expect = scale * (1.0 + 1.0 / model.one_rinv_one());
        ensure((far.variance - expect).abs() <= 1e-9 * expect, || {
            format!("seed {seed}: far variance {} vs {expect}", far.variance)
        })?;
    }
    ensure(worst_mean <= 1e-6, || format!("mean misfit at data {worst_mean:e}"))?;
    ensure(worst_var <= 1e-6, || format!("relative variance at data {worst_var:e}"))?;
    Ok(format!("max misfit {worst_mean:.1e}, max var/sigma2 {worst_var:.1e}"))
}

pub fn gradient_vs_fd() -> Check {
    let model = fitted(20, 3, 7, |u| wavy(u) + 0.4 * u[2].powi(3) - u[2]);
    let mut rng = RngStream::new(99, 5).rng();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let g = model.mean_gradient(&u);
        let mut fd = vec![0.0; 3];
        for i in 0..3 {
            let h = 1e-5 * (1.0 + u[i].abs());
            let (mut a, mut b) = (u.clone(), u.clone());
            a[i] += h;
            b[i] -= h;
            fd[i] = (model.predict_mean(&a) - model.predict_mean(&b)) / (2.0 * h);
        }
        let diff = learning::norm(&g.iter().zip(&fd).map(|(x, y)| x - y).collect::<Vec<_>>());
        let rel = diff / learning::norm(&fd).max(1e-3);
        worst = worst.max(rel);
    }
    ensure(worst <= 1e-4, || format!("worst relative gradient error {worst:e}"))?;
    Ok(format!("100 probes, worst relative error {worst:.1e}"))
}

pub fn pso_sphere() -> Check {
    let params = PsoParams::default();
    let hits = (0..100u64)
        .filter(|&s| {
            let out = minimize(|u| u.iter().map(|v| v * v).sum(), 2, &params, RngStream::new(s, 1)).unwrap();
            learning::norm(&out.best) <= 1e-3
        })
        .count();
    ensure(hits >= 95, || format!("{hits}/100 trials reached |u*| <= 1e-3"))?;
    Ok(format!("{hits}/100 trials"))
}

pub fn context(variant: Variant, doe: SampleMatrix, p: f64, r: f64) -> ObjectiveContext {
    ObjectiveContext {
        variant,
        delta: 1e-3,
        delta0: 1e-8,
        p,
        r_c: 3.0,
        r,
        r_d: 0.5,
        lambda: 0.5,
        alpha_s: learning::alpha_s(doe.cols()),
        u_lim: 6.0,
        doe_points: doe,
    }
}

pub fn objective_ordering() -> Check {
    let model = fitted(12, 2, 3, |u| four_branch(u[0], u[1]));
    let doe = model.training().points().clone();
    let p = learning::penalty_coefficient(model.training().responses(), 2);
    let mut rng = RngStream::new(4, 4).rng();
    for _ in 0..2000 {
        let u = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let r = rng.gen_range(0.5..3.0);
        let pred = model.predict(&u);
        let b = context(Variant::Basic, doe.clone(), p, r).evaluate(&u, &pred);
        let pe = context(Variant::Penalty, doe.clone(), p, r).evaluate(&u, &pred);
        let d = context(Variant::Density, doe.clone(), p, r).evaluate(&u, &pred);
        ensure(b <= pe && pe <= d, || format!("ordering broken at {u:?}: {b} {pe} {d}"))?;
    }
    Ok("2000 random points".into())
}

pub fn density_index_shape() -> Check {
    for dim in [2usize, 6, 10, 20] {
        let a = learning::alpha_s(dim);
        for &(r_d, lambda) in &[(0.5, 0.5), (0.1, 0.5), (0.5, 0.2)] {
            let knee = lambda / (r_d * a);
            let below = learning::density_index_at(knee * (1.0 - 1e-12), a, r_d, lambda);
            let above = learning::density_index_at(knee * (1.0 + 1e-12), a, r_d, lambda);
            ensure((below - above).abs() <= 1e-9 * r_d, || format!("jump at the knee for dim {dim}"))?;
            let mut last = f64::INFINITY;
            for i in 0..=400 {
                let d = learning::density_index_at(i as f64 * 0.05, a, r_d, lambda);
                ensure(d <= last + 1e-15 && d > 0.0 && d <= r_d, || format!("not monotone at |u|={}", i as f64 * 0.05))?;
                last = d;
            }
        }
    }
    Ok("continuous at the knee, non-increasing, within (0, r_d]".into())
}

pub fn closed_forms() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    ensure(close(cov_of_pf(0.01, 10_000), (0.99f64 / 100.0).sqrt()), || "cov".into())?;
    // Base objective |mu - delta| / sigma with mu = 1.4, sigma = 0.5, delta = 0.
    let doe = SampleMatrix::from_rows(&[vec![5.0, 5.0]]).unwrap();
    let mut c = context(Variant::Basic, doe.clone(), 0.0, 3.0);
    c.delta = 0.0;
    let pred = cfak_core::Prediction { mean: 1.4, variance: 0.25 };
    ensure(close(c.evaluate(&[0.1, 0.2], &pred), 2.8), || "base objective".into())?;
    // Penalty coefficient: alpha_s (max - min) / 4 with N_D = 2.
    ensure(close(learning::penalty_coefficient(&[-2.0, 3.0, 6.0], 2), 2.0), || "penalty coefficient".into())?;
    // Radius: mean norm of the initial design, then max norm of additions capped at r_c.
    let init = SampleMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 1.0]]).unwrap();
    ensure(close(learning::update_radius(&init, &init, 9.0), 3.0), || "initial radius".into())?;
    let mut grown = init.clone();
    grown.push_row(&[0.0, 2.5]);
    ensure(close(learning::update_radius(&grown, &init, 9.0), 2.5), || "grown radius".into())?;
    ensure(close(learning::update_radius(&grown, &init, 2.0), 2.0), || "capped radius".into())?;
    // Density index: r_d inside the knee, lambda / (alpha_s |u|) outside.
    ensure(close(learning::density_index_at(1.0, 1.0, 0.5, 0.5), 0.5), || "d_c inner".into())?;
    ensure(close(learning::density_index_at(4.0, 1.0, 0.5, 0.5), 0.125), || "d_c outer".into())?;
    Ok("cov, base objective, p, r, d_c".into())
}

pub fn stage_separation() -> Check {
    let bench = make("four_branch", &BenchmarkParams::default()).unwrap();
    let mut cfg = MethodConfig::for_benchmark(Method::CfakC, &bench);
    cfg.mc_budget = 100_000;
    cfg.n_mc_init = 100_000;
    let r = driver::run_single(&bench, &cfg, 3).map_err(|e| e.to_string())?;
    ensure(r.log.mc_draws == 0, || format!("{} MC samples drawn during construction", r.log.mc_draws))?;
    ensure(r.estimate.n_mc == 100_000, || "stage 2 did not classify the population".into())?;
    Ok(format!("0 population draws during {} additions", r.log.accepted()))
}

pub fn determinism() -> Check {
    let bench = make("parabolic", &BenchmarkParams::default()).unwrap();
    let mut cfg = MethodConfig::for_benchmark(Method::CfakC, &bench);
    cfg.mc_budget = 200_000;
    cfg.n_mc_init = 200_000;
    let show = |r: &driver::RunResult| {
        let entries: Vec<String> = r.log.entries.iter().map(|e| format!("{:?}", (e.candidate.clone(), e.u_value, e.accepted))).collect();
        format!("{:?} {} {} {:?}", r.estimate, r.n_g, r.n_pred, entries)
    };
    let a = driver::run_single(&bench, &cfg, 11).map_err(|e| e.to_string())?;
    let b = driver::run_single(&bench, &cfg, 11).map_err(|e| e.to_string())?;
    ensure(show(&a) == show(&b), || "reruns differ".into())?;
    cfg.parallel = true;
    let c = driver::run_single(&bench, &cfg, 11).map_err(|e| e.to_string())?;
    ensure(show(&a) == show(&c), || "parallel stage 2 differs from serial".into())?;
    Ok("serial rerun and parallel stage 2 identical".into())
}

pub fn truss_mechanics() -> Check {
    let m = TrussModel::new();
    let (a1, a2, e1, e2) = (2.1e-3, 0.9e-3, 2.0e11, 2.2e11);
    let p = [4.3e4, 5.9e4, 5.1e4, 6.2e4, 4.4e4, 5.6e4];
    let sol = m.solve(a1, a2, e1, e2, &p).map_err(|e| e.to_string())?;
    let total: f64 = p.iter().sum();
    let vert = sol.reactions[1] + sol.reactions[2];
    ensure((vert - total).abs() <= 1e-8 * total && sol.reactions[0].abs() <= 1e-8 * total, || {
        format!("reactions {:?} vs load {total}", sol.reactions)
    })?;
    let mut sum = vec![0.0; sol.displacements.len()];
    for i in 0..6 {
        let mut unit = [0.0; 6];
        unit[i] = p[i];
        let s = m.solve(a1, a2, e1, e2, &unit).map_err(|e| e.to_string())?;
        for (acc, d) in sum.iter_mut().zip(&s.displacements) {
            *acc += d;
        }
    }
    let scale = sol.displacements.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let err = sum.iter().zip(&sol.displacements).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    ensure(err <= 1e-10 * scale, || format!("superposition error {err:e}"))?;
    let d = sol.midspan_deflection();
    let doubled = m.solve_deflection(a1, a2, e1, e2, &p.map(|v| 2.0 * v)).unwrap();
    ensure((doubled - 2.0 * d).abs() <= 1e-10 * d.abs(), || "load doubling".into())?;
    let c = 1.7;
    let stiff = m.solve_deflection(c * a1, c * a2, e1, e2, &p).unwrap();
    ensure((stiff - d / c).abs() <= 1e-10 * d.abs(), || "stiffness scaling".into())?;
    Ok(format!("equilibrium, superposition ({err:.1e}), scaling"))
}

/// Independent two-pass implementation of the run aggregation.
fn oracle(pf: &[f64], refs: &[f64]) -> (f64, f64, f64) {
    let n = pf.len() as f64;
    let m = pf.iter().sum::<f64>() / n;
    let sd = (pf.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / n).sqrt();
    let eps = pf.iter().zip(refs).map(|(p, r)| ((p - r) / r).abs()).sum::<f64>() / n;
    (m, sd, eps)
}

pub fn aggregation_oracle() -> Check {
    let mut rng = RngStream::new(5, 8).rng();
    for trial in 0..200 {
        let n = rng.gen_range(1..60);
        let pf: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-5..1e-2)).collect();
        let r = rng.gen_range(1e-5..1e-2);
        let runs: Vec<RunSummary> =
            pf.iter().map(|&p| RunSummary { pf: p, n_g: 10.0, n_pred: 1.0, wall_ms: 1.0 }).collect();
        let s = aggregate(&runs, &PfRef::Scalar(r)).map_err(|e| e.to_string())?;
        let (m, sd, eps) = oracle(&pf, &vec![r; n]);
        let tol = |x: f64| 1e-10 * x.abs().max(1e-12);
        ensure((s.pf_mean - m).abs() <= tol(m) && (s.pf_std - sd).abs() <= tol(m), || format!("trial {trial}: moments"))?;
        ensure((s.avg_rel_error.unwrap() - eps).abs() <= 1e-10 * eps.max(1e-12), || format!("trial {trial}: avg error"))?;
        ensure(s.rel_error.unwrap() <= s.avg_rel_error.unwrap() + 1e-12, || format!("trial {trial}: triangle"))?;
        let mut rev = runs.clone();
        rev.reverse();
        let t = aggregate(&rev, &PfRef::Scalar(r)).unwrap();
        ensure((t.pf_mean - s.pf_mean).abs() <= tol(m), || format!("trial {trial}: order dependence"))?;
        let refs: Vec<f64> = (0..n).map(|_| rng.gen_range(1e-5..1e-2)).collect();
        let per = aggregate(&runs, &PfRef::PerRun(refs.clone())).unwrap();
        let (_, _, eps) = oracle(&pf, &refs);
        ensure((per.avg_rel_error.unwrap() - eps).abs() <= 1e-10 * eps, || format!("trial {trial}: per-run error"))?;
    }
    Ok("200 synthetic run sets".into())
}

/// Stage-2 count against a brute-force pass over explicit population rows.
pub fn stage2_oracle() -> Check {
    let model = fitted(25, 2, 21, |u| four_branch(u[0], u[1]));
    let pop = McPopulation::new(2, RngStream::new(21, -1));
    let bench = make("four_branch", &BenchmarkParams::default()).unwrap();
    let mut cfg = MethodConfig::for_benchmark(Method::CfakC, &bench);
    cfg.n_mc_init = 150_000;
    cfg.mc_budget = 150_000;
    let est = driver::estimate_pf(driver::surrogate_classifier(&model), &pop, &cfg).map_err(|e| e.to_string())?;
    let rows = pop.rows(0, 150_000);
    let brute = rows.iter_rows().filter(|u| model.predict(u).mean < 0.0).count();
    ensure(est.n_fail == brute, || format!("{} vs brute force {brute}", est.n_fail))?;
    Ok(format!("{brute} failures in 150000 rows"))
}

pub const ALL: &[(&str, fn() -> Check)] = &[
    ("kriging interpolation", kriging_interpolation),
    ("gradient vs finite differences", gradient_vs_fd),
    ("pso sphere", pso_sphere),
    ("objective ordering", objective_ordering),
    ("density index", density_index_shape),
    ("closed forms", closed_forms),
    ("stage separation", stage_separation),
    ("determinism", determinism),
    ("truss mechanics", truss_mechanics),
    ("aggregation oracle", aggregation_oracle),
    ("stage-2 oracle", stage2_oracle),
];
