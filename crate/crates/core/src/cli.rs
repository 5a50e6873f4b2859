//! Experiment configuration and the `run`, `grid` and `list` commands.
//!
//! A config is a JSON document; only `benchmark` and `method` are required:
//!
//! ```json
//! {
//!   "benchmark": "truss",
//!   "params": { "v_max": 0.14 },
//!   "method": "cfak_c",
//!   "n_runs": 5,
//!   "seed_base": 100,
//!   "out_dir": "out/truss",
//!   "overrides": { "doe_budget": 400, "pso": { "n_swarm": 60 } },
//!   "grid": { "lower": -6.0, "upper": 6.0, "resolution": 201 }
//! }
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::benchmarks::{self, Benchmark, BenchmarkParams};
use crate::driver::{self, ConstructionLog, Method, MethodConfig, RunResult, Surrogate};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, PfRef, RunStats, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRequest {
    #[serde(default = "GridRequest::default_lower")]
    pub lower: f64,
    #[serde(default = "GridRequest::default_upper")]
    pub upper: f64,
    #[serde(default = "GridRequest::default_resolution")]
    pub resolution: usize,
}

impl GridRequest {
    fn default_lower() -> f64 {
        -6.0
    }
    fn default_upper() -> f64 {
        6.0
    }
    fn default_resolution() -> usize {
        201
    }
}

impl Default for GridRequest {
    fn default() -> Self {
        GridRequest { lower: -6.0, upper: 6.0, resolution: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: String,
    #[serde(default)]
    pub params: BenchmarkParams,
    pub method: Method,
    #[serde(default = "default_runs")]
    pub n_runs: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Explicit seeds; takes precedence over `seed_base` and `n_runs`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    /// Partial method settings merged over the benchmark defaults.
    #[serde(default)]
    pub overrides: Map<String, Value>,
    #[serde(default)]
    pub grid: Option<GridRequest>,
}

fn default_runs() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Command-line flags that override config fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Flags {
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub seed_base: Option<u64>,
    pub runs: Option<usize>,
}

/// Parses a config document, reporting the offending field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("config field `{path}`: {}", e.into_inner()))
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

impl ExperimentConfig {
    pub fn benchmark(&self) -> Result<Benchmark> {
        benchmarks::make(&self.benchmark, &self.params)
    }

    /// Benchmark defaults for the method, with `overrides` applied.
    pub fn method_config(&self, bench: &Benchmark) -> Result<MethodConfig> {
        let mut value = serde_json::to_value(MethodConfig::for_benchmark(self.method, bench))?;
        merge(&mut value, &Value::Object(self.overrides.clone()));
        let cfg: MethodConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("config field `overrides.{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seeds(&self, flags: &Flags) -> Vec<u64> {
        let base = flags.seed_base.unwrap_or(self.seed_base);
        match (&self.seeds, flags.runs, flags.seed_base) {
            (Some(s), None, None) => s.clone(),
            _ => {
                let n = flags.runs.unwrap_or(self.n_runs);
                (0..n as u64).map(|i| base + i).collect()
            }
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Reference used for a run's row: the same-population value when present.
fn run_reference(r: &RunResult, bench: &Benchmark) -> Option<f64> {
    r.same_population.map(|e| e.pf).or(bench.reference.map(|x| x.pf))
}

pub fn runs_csv(results: &[(u64, Result<RunResult>)], bench: &Benchmark) -> String {
    let mut out = String::from("seed,status,pf,n_mc,n_fail,cov,pf_ref,n_g,n_pred,doe_size\n");
    for (seed, res) in results {
        match res {
            Ok(r) => {
                let e = &r.estimate;
                let _ = writeln!(
                    out,
                    "{seed},ok,{},{},{},{},{},{},{},{}",
                    num(e.pf),
                    e.n_mc,
                    e.n_fail,
                    num(e.cov),
                    opt_num(run_reference(r, bench)),
                    r.n_g,
                    r.n_pred,
                    r.doe_size
                );
            }
            Err(err) => {
                let kind = match err {
                    Error::BudgetExhausted { .. } => "budget_exhausted",
                    _ => "error",
                };
                let _ = writeln!(out, "{seed},{kind},,,,,,,,");
            }
        }
    }
    out
}

pub fn log_csv(log: &ConstructionLog, dim: usize) -> String {
    let mut out = String::from("iteration,accepted,forced,duplicate,u_value,objective,r,p,g_value,n_pred");
    for j in 1..=dim {
        let _ = write!(out, ",u{j}");
    }
    out.push('\n');
    for e in &log.entries {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            e.iteration,
            e.accepted as u8,
            e.forced as u8,
            e.duplicate as u8,
            num(e.u_value),
            num(e.objective),
            num(e.r),
            num(e.p),
            opt_num(e.g_value),
            e.n_pred
        );
        for v in &e.candidate {
            let _ = write!(out, ",{}", num(*v));
        }
        out.push('\n');
    }
    out
}

fn summaries(ok: &[&RunResult]) -> Vec<RunSummary> {
    ok.iter()
        .map(|r| RunSummary { pf: r.estimate.pf, n_g: r.n_g as f64, n_pred: r.n_pred as f64, wall_ms: r.wall_ms })
        .collect()
}

/// Aggregate statistics document for the successful runs.
pub fn stats_json(results: &[(u64, Result<RunResult>)], bench: &Benchmark, method: Method) -> Result<Value> {
    let ok: Vec<&RunResult> = results.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    let mut doc = json!({
        "benchmark": bench.to_string(),
        "method": method.name(),
        "n_seeds": results.len(),
        "n_failed": results.len() - ok.len(),
        "pf_ref": bench.reference.map(|r| r.pf),
        "std_convention": "population (divide by n)",
    });
    if ok.is_empty() {
        return Ok(doc);
    }
    let rows = summaries(&ok);
    let reference = match bench.reference {
        Some(r) => PfRef::Scalar(r.pf),
        None => PfRef::Unknown,
    };
    let stats: RunStats = aggregate(&rows, &reference)?;
    doc["stats"] = serde_json::to_value(&stats)?;
    let same: Option<Vec<f64>> = ok.iter().map(|r| r.same_population.map(|e| e.pf)).collect();
    if let Some(refs) = same {
        if refs.iter().all(|&r| r > 0.0) {
            let s = aggregate(&rows, &PfRef::PerRun(refs.clone()))?;
            let mean_ref = refs.iter().sum::<f64>() / refs.len() as f64;
            doc["stats_same_population"] = serde_json::to_value(&s)?;
            doc["same_population_pf_mean"] = json!(mean_ref);
            doc["same_population_rel_error"] = json!((s.pf_mean - mean_ref).abs() / mean_ref);
        }
    }
    Ok(doc)
}

/// Outcome of `run`, for callers that want more than the exit code.
pub struct RunReport {
    pub out_dir: PathBuf,
    pub results: Vec<(u64, Result<RunResult>)>,
    pub stats: Value,
}

/// Executes every seed, then writes all outputs from this thread.
pub fn execute_run(config: &ExperimentConfig, flags: &Flags) -> Result<RunReport> {
    let bench = config.benchmark()?;
    let cfg = config.method_config(&bench)?;
    let seeds = config.seeds(flags);
    if seeds.is_empty() {
        return Err(Error::Config("no seeds to run".into()));
    }
    let out_dir = flags.out.clone().unwrap_or_else(|| config.out_dir.clone());
    let results = driver::run_method(&bench, &cfg, &seeds, flags.jobs.max(1))?;
    let results: Vec<(u64, Result<RunResult>)> = seeds.into_iter().zip(results).collect();

    fs::create_dir_all(&out_dir)?;
    fs::write(out_dir.join("runs.csv"), runs_csv(&results, &bench))?;
    let mut timing = String::from("seed,wall_ms,construction_ms\n");
    for (seed, res) in &results {
        match res {
            Ok(r) => {
                let _ = writeln!(timing, "{seed},{:.3},{:.3}", r.wall_ms, r.log.wall_ms);
                if cfg.method != Method::Mcs {
                    fs::write(out_dir.join(format!("log_{seed}.csv")), log_csv(&r.log, bench.dim()))?;
                }
            }
            Err(e) => {
                let _ = writeln!(timing, "{seed},,");
                if let Error::BudgetExhausted { log, .. } = e {
                    fs::write(out_dir.join(format!("log_{seed}.csv")), log_csv(log, bench.dim()))?;
                }
            }
        }
    }
    fs::write(out_dir.join("timing.csv"), timing)?;
    let stats = stats_json(&results, &bench, cfg.method)?;
    fs::write(out_dir.join("stats.json"), serde_json::to_string_pretty(&stats)? + "\n")?;
    Ok(RunReport { out_dir, results, stats })
}

pub fn cmd_run(config_path: &Path, flags: &Flags) -> i32 {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute_run(&config, flags) {
        Ok(report) => {
            let failed: Vec<_> = report.results.iter().filter(|(_, r)| r.is_err()).collect();
            for (seed, r) in &failed {
                if let Err(e) = r {
                    eprintln!("seed {seed} failed: {e}");
                }
            }
            println!("wrote {}", report.out_dir.display());
            if failed.len() == report.results.len() {
                EXIT_RUNTIME
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::UnknownBenchmark { .. }
        | Error::InvalidParameter(_)
        | Error::InvalidArgument(_)
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Builds a surrogate for the config's first seed and samples it on a
/// regular lattice.
pub fn execute_grid(config: &ExperimentConfig, flags: &Flags) -> Result<(PathBuf, Surrogate)> {
    let bench = config.benchmark()?;
    if bench.dim() != 2 {
        return Err(Error::Config(format!("grid output needs a 2-D benchmark; {} has {} inputs", bench, bench.dim())));
    }
    let cfg = config.method_config(&bench)?;
    let grid = config.grid.clone().unwrap_or_default();
    if grid.resolution < 2 || !(grid.upper > grid.lower) {
        return Err(Error::Config("grid needs resolution >= 2 and upper > lower".into()));
    }
    let seed = *config.seeds(flags).first().ok_or_else(|| Error::Config("no seeds".into()))?;
    let lsf = |u: &[f64]| bench.eval_u(u);
    let surrogate = match cfg.method {
        Method::CfakB | Method::CfakP | Method::CfakC => driver::build_surrogate(lsf, 2, &cfg, seed)?,
        Method::AkmcsU => {
            let pop = crate::probspace::McPopulation::new(2, crate::probspace::RngStream::new(seed, -1));
            driver::run_akmcs(lsf, 2, &cfg, seed, &pop)?.0
        }
        Method::Mcs => return Err(Error::Config("grid output needs a surrogate method".into())),
    };
    let out_dir = flags.out.clone().unwrap_or_else(|| config.out_dir.clone());
    fs::create_dir_all(&out_dir)?;

    let mut text = String::from("u1,u2,mu,sigma,g_true\n");
    let n = grid.resolution;
    let step = (grid.upper - grid.lower) / (n - 1) as f64;
    for i in 0..n {
        let u1 = grid.lower + step * i as f64;
        for j in 0..n {
            let u2 = grid.lower + step * j as f64;
            let p = surrogate.model.predict(&[u1, u2]);
            let g = bench.eval_u(&[u1, u2]).unwrap_or(f64::NAN);
            let _ = writeln!(text, "{},{},{},{},{}", num(u1), num(u2), num(p.mean), num(p.std()), num(g));
        }
    }
    fs::write(out_dir.join("grid.csv"), text)?;

    let mut doe = String::from("index,u1,u2,g,initial\n");
    let train = surrogate.model.training();
    for (i, (u, g)) in train.points().iter_rows().zip(train.responses()).enumerate() {
        let init = (i < surrogate.log.n_doe_init) as u8;
        let _ = writeln!(doe, "{i},{},{},{},{init}", num(u[0]), num(u[1]), num(*g));
    }
    fs::write(out_dir.join("doe.csv"), doe)?;
    Ok((out_dir, surrogate))
}

pub fn cmd_grid(config_path: &Path, flags: &Flags) -> i32 {
    let result = load_config(config_path).and_then(|c| execute_grid(&c, flags));
    match result {
        Ok((dir, _)) => {
            println!("wrote {}", dir.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// The registry with one line per configured case.
pub fn list_text() -> String {
    let p = BenchmarkParams::default;
    let cases: Vec<BenchmarkParams> = vec![p()];
    let mut out = String::new();
    for id in benchmarks::IDS {
        let variants: Vec<BenchmarkParams> = match id {
            "modified_two_branch" => vec![BenchmarkParams { k: 3.4, ..p() }, BenchmarkParams { k: 3.9, ..p() }],
            "oscillator" => vec![BenchmarkParams { case: 1, ..p() }, BenchmarkParams { case: 2, ..p() }],
            "truss" => vec![BenchmarkParams { v_max: 0.11, ..p() }, BenchmarkParams { v_max: 0.14, ..p() }],
            "high_dim" => [20, 40, 60, 100].iter().map(|&dim| BenchmarkParams { dim, ..p() }).collect(),
            _ => cases.clone(),
        };
        for params in variants {
            let b = benchmarks::make(id, &params).expect("registry entries are valid");
            let d = b.defaults;
            let _ = write!(
                out,
                "{:<34} dim={:<3} r_c={:.1} r_d={:.2} lambda={:.2} delta={:.3} n_doe_init={} n_mc={}",
                b.to_string(),
                b.dim(),
                d.r_c,
                d.r_d,
                d.lambda,
                d.delta,
                d.n_doe_init,
                d.n_mc
            );
            if d.stop_at_budget {
                let _ = write!(out, " doe_budget={}", d.doe_budget);
            }
            if let Some(r) = b.reference {
                let _ = write!(out, " pf_ref={:.4e}", r.pf);
            }
            out.push('\n');
        }
    }
    out
}

pub fn cmd_list() -> i32 {
    print!("{}", list_text());
    EXIT_OK
}
