//! Run configuration and orchestration behind the `yamabe-lab` binary.
//!
//! A config is a list of `key=value` items separated by whitespace or
//! newlines; `#` starts a comment. Bare words name the command
//! (`compute`, `sweep`, `verify`, `all`) or a builtin model, so the one-line
//! form `hemisphere n=3 lambda=0.5` is a complete compute config.
//!
//! Keys: `command`, `model`, `model_file`, `n`, `lambda`, `lambda_grid`
//! (`start:stop:step` or a comma list), `a`, `b`, `L`, `l`, `t_cut`,
//! `fiber_quotient_order`, `suite`, `mesh_nodes`, `max_iterations`,
//! `restarts`, `tolerance`, `refinement_levels`, `seed`, `output`.
//! A later item overrides an earlier one.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use crate::geometry::{
    capped_neck, cylinder, hemi_cylinder, hemisphere, model_from_text, projective_space, quotient_product,
    round_sphere, schoen_product, sphere_minus_cap, unit_ball, Fiber, ModelManifold,
};
use crate::harness::{init_thread_pool, run_suite, write_outputs, CheckOptions, Suite, SweepTable};
use crate::solver::{lambda_sweep, minimize_energy, refine_and_extrapolate, SolverOptions, YamabeEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Compute,
    Sweep,
    Verify,
    /// The full verification suite (same as `verify suite=all`).
    All,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "compute" => Some(Command::Compute),
            "sweep" => Some(Command::Sweep),
            "verify" => Some(Command::Verify),
            "all" => Some(Command::All),
            _ => None,
        }
    }
}

pub const BUILTINS: [&str; 11] = [
    "round_sphere",
    "hemisphere",
    "projective_space",
    "sphere_minus_cap",
    "unit_ball",
    "cylinder",
    "hemi_cylinder",
    "schoen_product",
    "quotient_product",
    "capped_neck",
    "capped_neck_half",
];

const CLOSED_BUILTINS: [&str; 5] = ["round_sphere", "projective_space", "schoen_product", "quotient_product", "capped_neck"];

const KEYS: [&str; 20] = [
    "command",
    "model",
    "model_file",
    "n",
    "lambda",
    "lambda_grid",
    "a",
    "b",
    "L",
    "l",
    "t_cut",
    "fiber_quotient_order",
    "suite",
    "mesh_nodes",
    "max_iterations",
    "restarts",
    "tolerance",
    "refinement_levels",
    "seed",
    "output",
];

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSource {
    Builtin(String),
    File(PathBuf),
}

/// Builtin parameters; each applies only to the builtins that take it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModelParams {
    pub big_l: Option<f64>,
    pub l: Option<f64>,
    pub t_cut: Option<f64>,
    pub fiber_quotient_order: Option<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelSource>,
    pub n: usize,
    pub lambda: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub weights: Option<(f64, f64)>,
    pub params: ModelParams,
    pub suite: Suite,
    pub solver: SolverOptions,
    pub output: PathBuf,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{0}")]
    Semantic(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("cannot write outputs: {0}")]
    Io(#[from] std::io::Error),
}

struct Token {
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut start: Option<usize> = None;
        let chars: Vec<char> = line.chars().collect();
        for i in 0..=chars.len() {
            let ws = i == chars.len() || chars[i].is_whitespace();
            match (ws, start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push(Token { text: chars[s..i].iter().collect(), line: li + 1, col: s + 1 });
                    start = None;
                }
                _ => {}
            }
        }
    }
    // merge `key = value`, `key= value` and `key =value`
    let mut merged: Vec<Token> = Vec::new();
    for t in out {
        let join = merged.last().is_some_and(|p: &Token| p.text.ends_with('=')) || t.text.starts_with('=');
        match merged.last_mut() {
            Some(p) if join => p.text.push_str(&t.text),
            _ => merged.push(t),
        }
    }
    merged
}

fn suggest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::jaro_winkler(word, c), c))
        .filter(|(s, _)| *s > 0.6)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts.as_slice() else {
            return Err(format!("grid `{s}` must be start:stop:step"));
        };
        let (a, b, h) = (num(a)?, num(b)?, num(h)?);
        if !(h > 0.0) || !(b >= a) {
            return Err(format!("grid `{s}` needs step > 0 and stop >= start"));
        }
        let steps = ((b - a) / h + 1e-9).floor() as usize;
        let mut g: Vec<f64> = (0..=steps).map(|i| a + i as f64 * h).collect();
        // snap the last point onto `stop` when the step divides the range
        if let Some(last) = g.last_mut() {
            if (*last - b).abs() < 1e-9 * h.max(1.0) {
                *last = b;
            }
        }
        Ok(g)
    } else {
        s.split(',').map(num).collect()
    }
}

fn parse_value<T: std::str::FromStr>(t: &Token, key: &str, v: &str) -> std::result::Result<T, ConfigError> {
    v.parse::<T>().map_err(|_| ConfigError::Parse {
        line: t.line,
        col: t.col + key.len() + 1,
        message: format!("invalid value `{v}` for `{key}`"),
    })
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let mut command = None;
    let mut model = None;
    let mut n = 3usize;
    let mut lambda = None;
    let mut grid = None;
    let (mut a, mut b) = (None, None);
    let mut params = ModelParams::default();
    let mut suite = Suite::All;
    let mut solver = SolverOptions::default();
    let mut output = PathBuf::from("yamabe-out");

    for t in tokenize(text) {
        let Some((key, raw)) = t.text.split_once('=') else {
            let w = t.text.as_str();
            if let Some(c) = Command::parse(w) {
                command = Some(c);
            } else if BUILTINS.contains(&w) {
                model = Some(ModelSource::Builtin(w.to_string()));
            } else {
                let hint = suggest(w, BUILTINS.iter().copied().chain(["compute", "sweep", "verify", "all"]))
                    .map(|s| format!("; did you mean `{s}`?"))
                    .unwrap_or_default();
                return Err(ConfigError::Parse {
                    line: t.line,
                    col: t.col,
                    message: format!("unknown command or model `{w}`{hint}"),
                });
            }
            continue;
        };
        let v = raw.trim_matches('"');
        if v.is_empty() {
            return Err(ConfigError::Parse { line: t.line, col: t.col, message: format!("missing value for `{key}`") });
        }
        match key {
            "command" => {
                command = Some(Command::parse(v).ok_or_else(|| ConfigError::Parse {
                    line: t.line,
                    col: t.col + key.len() + 1,
                    message: format!("unknown command `{v}`"),
                })?)
            }
            "model" => {
                if !BUILTINS.contains(&v) {
                    let hint = suggest(v, BUILTINS).map(|s| format!("; did you mean `{s}`?")).unwrap_or_default();
                    return Err(ConfigError::Parse {
                        line: t.line,
                        col: t.col + key.len() + 1,
                        message: format!("unknown builtin model `{v}`{hint}"),
                    });
                }
                model = Some(ModelSource::Builtin(v.to_string()));
            }
            "model_file" => model = Some(ModelSource::File(PathBuf::from(v))),
            "n" => n = parse_value(&t, key, v)?,
            "lambda" => lambda = Some(parse_value(&t, key, v)?),
            "lambda_grid" => {
                grid = Some(parse_grid(v).map_err(|message| ConfigError::Parse {
                    line: t.line,
                    col: t.col + key.len() + 1,
                    message,
                })?)
            }
            "a" => a = Some(parse_value(&t, key, v)?),
            "b" => b = Some(parse_value(&t, key, v)?),
            "L" => params.big_l = Some(parse_value(&t, key, v)?),
            "l" => params.l = Some(parse_value(&t, key, v)?),
            "t_cut" => params.t_cut = Some(parse_value(&t, key, v)?),
            "fiber_quotient_order" => params.fiber_quotient_order = Some(parse_value(&t, key, v)?),
            "suite" => {
                suite = v.parse().map_err(|e: crate::Error| ConfigError::Parse {
                    line: t.line,
                    col: t.col + key.len() + 1,
                    message: e.to_string(),
                })?
            }
            "mesh_nodes" => solver.mesh_nodes = parse_value(&t, key, v)?,
            "max_iterations" => solver.max_iterations = parse_value(&t, key, v)?,
            "restarts" => solver.restarts = parse_value(&t, key, v)?,
            "tolerance" => solver.tolerance = parse_value(&t, key, v)?,
            "refinement_levels" => solver.refinement_levels = parse_value(&t, key, v)?,
            "seed" => {
                solver.seed = match v.strip_prefix("0x") {
                    Some(hex) => u64::from_str_radix(hex, 16).map_err(|_| ConfigError::Parse {
                        line: t.line,
                        col: t.col + key.len() + 1,
                        message: format!("invalid value `{v}` for `seed`"),
                    })?,
                    None => parse_value(&t, key, v)?,
                }
            }
            "output" => output = PathBuf::from(v),
            _ => {
                let hint = suggest(key, KEYS).map(|s| format!("; did you mean `{s}`?")).unwrap_or_default();
                return Err(ConfigError::Parse { line: t.line, col: t.col, message: format!("unknown key `{key}`{hint}") });
            }
        }
    }

    let command = command.unwrap_or(if grid.is_some() { Command::Sweep } else { Command::Compute });
    let weights = match (a, b) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(ConfigError::Semantic("`a` and `b` must be given together".into())),
    };
    let cfg = RunConfig { command, model, n, lambda, lambda_grid: grid, weights, params, suite, solver, output };
    validate(&cfg)?;
    Ok(cfg)
}

fn semantic(msg: impl Into<String>) -> ConfigError {
    ConfigError::Semantic(msg.into())
}

fn validate(c: &RunConfig) -> std::result::Result<(), ConfigError> {
    if c.n < 3 {
        return Err(semantic(format!("dimension n = {} must be at least 3", c.n)));
    }
    c.solver.validate().map_err(|e| semantic(e.to_string()))?;
    let mut lambdas: Vec<f64> = c.lambda.into_iter().collect();
    lambdas.extend(c.lambda_grid.iter().flatten());
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(semantic(format!("λ = {l} is outside [0, 1]")));
    }
    if let Some((a, b)) = c.weights {
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(semantic(format!("weights (a, b) = ({a}, {b}) must be non-negative and not both zero")));
        }
        if c.lambda.is_some() || c.lambda_grid.is_some() {
            return Err(semantic("give either λ or the weights (a, b), not both"));
        }
    }
    if let Some(k) = c.params.fiber_quotient_order {
        if k != 1 && k != 2 {
            return Err(semantic(format!("fiber_quotient_order must be 1 or 2 (got {k})")));
        }
    }
    match c.command {
        Command::Compute | Command::Sweep => {
            let Some(model) = &c.model else {
                return Err(semantic("compute and sweep need a model (builtin name or model_file)"));
            };
            if c.command == Command::Sweep && c.lambda_grid.is_none() {
                return Err(semantic("sweep needs lambda_grid"));
            }
            if c.command == Command::Compute && c.lambda_grid.is_some() {
                return Err(semantic("compute takes a single λ; use sweep for lambda_grid"));
            }
            if let ModelSource::Builtin(name) = model {
                check_params(name, &c.params)?;
                let closed = CLOSED_BUILTINS.contains(&name.as_str());
                let zero_a = lambdas.contains(&0.0) || c.weights.is_some_and(|(a, _)| a == 0.0);
                if closed && zero_a {
                    return Err(semantic(format!(
                        "`{name}` has no boundary: λ = 0 (a = 0) leaves the constraint unreachable"
                    )));
                }
            }
        }
        Command::Verify | Command::All => {}
    }
    Ok(())
}

fn check_params(name: &str, p: &ModelParams) -> std::result::Result<(), ConfigError> {
    let takes: &[&str] = match name {
        "sphere_minus_cap" => &["t_cut"],
        "cylinder" | "hemi_cylinder" | "capped_neck" | "capped_neck_half" => &["l"],
        "schoen_product" | "quotient_product" => &["L", "fiber_quotient_order"],
        _ => &[],
    };
    let given = [
        ("L", p.big_l.is_some()),
        ("l", p.l.is_some()),
        ("t_cut", p.t_cut.is_some()),
        ("fiber_quotient_order", p.fiber_quotient_order.is_some()),
    ];
    for (k, set) in given {
        if set && !takes.contains(&k) {
            return Err(semantic(format!("parameter `{k}` does not apply to `{name}`")));
        }
    }
    for k in takes {
        let set = given.iter().any(|(g, s)| g == k && *s);
        if !set && *k != "fiber_quotient_order" {
            return Err(semantic(format!("`{name}` needs parameter `{k}`")));
        }
    }
    Ok(())
}

/// Builds a builtin model; parameters must already be validated.
pub fn build_builtin(name: &str, n: usize, p: &ModelParams) -> crate::Result<ModelManifold> {
    let need = |v: Option<f64>, k: &str| v.ok_or_else(|| crate::Error::InvalidArgument(format!("`{name}` needs `{k}`")));
    let m = match name {
        "round_sphere" => round_sphere(n)?,
        "hemisphere" => hemisphere(n)?,
        "projective_space" => projective_space(n)?,
        "sphere_minus_cap" => sphere_minus_cap(n, need(p.t_cut, "t_cut")?)?,
        "unit_ball" => unit_ball(n)?,
        "cylinder" => cylinder(n, need(p.l, "l")?)?,
        "hemi_cylinder" => hemi_cylinder(n, need(p.l, "l")?)?,
        "schoen_product" => schoen_product(n, need(p.big_l, "L")?)?,
        "quotient_product" => quotient_product(n, need(p.big_l, "L")?)?,
        "capped_neck" => capped_neck(n, need(p.l, "l")?, false)?,
        "capped_neck_half" => capped_neck(n, need(p.l, "l")?, true)?,
        _ => return Err(crate::Error::InvalidArgument(format!("unknown builtin `{name}`"))),
    };
    match p.fiber_quotient_order {
        Some(2) if m.fiber() == Fiber::Sphere => m.with_fiber(Fiber::Projective),
        Some(1) if m.fiber() == Fiber::Projective => {
            let mut s = m.with_fiber(Fiber::Sphere)?;
            if name == "quotient_product" {
                s = schoen_product(n, need(p.big_l, "L")?)?;
            }
            Ok(s)
        }
        _ => Ok(m),
    }
}

fn load_model(c: &RunConfig) -> Result<(String, ModelManifold), RunError> {
    match c.model.as_ref() {
        Some(ModelSource::Builtin(name)) => Ok((name.clone(), build_builtin(name, c.n, &c.params)?)),
        Some(ModelSource::File(path)) => {
            let text = std::fs::read_to_string(path)?;
            let m = model_from_text(&text)?;
            let name = path.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
            Ok((name, m))
        }
        None => Err(ConfigError::Semantic("no model given".into()).into()),
    }
}

/// Column layout of `results.csv` for `compute` and `sweep`.
pub const ESTIMATE_CSV_HEADER: &str = "model,n,lambda,a,b,mesh,value,residual,iterations,extrapolated,status,runtime_ms";

fn estimate_row(s: &mut String, model: &str, n: usize, lambda: Option<f64>, est: &crate::Result<YamabeEstimate>, ms: f64) {
    let lam = lambda.map(|l| l.to_string()).unwrap_or_default();
    match est {
        Ok(e) => {
            let status = if e.converged { "converged" } else { "inconclusive" };
            let ext = e.extrapolated_value.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{model},{n},{lam},{},{},{},{},{:e},{},{ext},{status},{ms:.3}",
                e.a, e.b, e.mesh_nodes, e.value, e.euler_lagrange_residual, e.iterations
            );
        }
        Err(_) => {
            let (a, b) = lambda.map(|l| (l.to_string(), (1.0 - l).to_string())).unwrap_or_default();
            let _ = writeln!(s, "{model},{n},{lam},{a},{b},,,,,,inconclusive,{ms:.3}");
        }
    }
}

fn estimate_json(lambda: Option<f64>, est: &crate::Result<YamabeEstimate>) -> serde_json::Value {
    match est {
        Ok(e) => json!({
            "lambda": lambda,
            "a": e.a,
            "b": e.b,
            "value": e.value,
            "extrapolated_value": e.extrapolated_value,
            "observed_order": e.observed_order,
            "level_values": e.level_values,
            "mesh_nodes": e.mesh_nodes,
            "mesh_level": e.mesh_level,
            "euler_lagrange_residual": e.euler_lagrange_residual,
            "converged": e.converged,
            "iterations": e.iterations,
            "monotone_refinement": e.monotone_refinement,
            "upper_bound": e.upper_bound,
        }),
        Err(err) => json!({ "lambda": lambda, "error": err.to_string() }),
    }
}

/// Outcome of [`execute`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// 0 if every verdict passed (or every estimate converged), 2 otherwise.
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn listing(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    v.sort();
    v
}

/// Runs a validated config and writes its artifacts.
pub fn execute(c: &RunConfig) -> Result<RunSummary, RunError> {
    init_thread_pool();
    std::fs::create_dir_all(&c.output)?;
    match c.command {
        Command::Verify | Command::All => {
            let suite = if c.command == Command::All { Suite::All } else { c.suite };
            let bundle = run_suite(suite, c.n, &CheckOptions { solver: c.solver });
            write_outputs(&c.output, &bundle.reports, &bundle.tables)?;
            let failed = bundle.reports.iter().filter(|r| !r.passed()).count();
            Ok(RunSummary {
                exit_code: if failed == 0 { 0 } else { 2 },
                files: listing(&c.output),
                message: format!("{} checks, {} not passed", bundle.reports.len(), failed),
            })
        }
        Command::Compute => {
            let (name, m) = load_model(c)?;
            let (a, b) = c.weights.unwrap_or_else(|| {
                let l = c.lambda.unwrap_or(1.0);
                (l, 1.0 - l)
            });
            let lambda = if c.weights.is_some() { None } else { Some(c.lambda.unwrap_or(1.0)) };
            let start = Instant::now();
            let est = if c.solver.refinement_levels > 1 {
                refine_and_extrapolate(&m, a, b, &c.solver)
            } else {
                minimize_energy(&m, a, b, &c.solver)
            };
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let mut csv = format!("{ESTIMATE_CSV_HEADER}\n");
            estimate_row(&mut csv, &name, c.n, lambda, &est, ms);
            std::fs::write(c.output.join("results.csv"), csv)?;
            let doc = json!({ "model": name, "n": c.n, "estimate": estimate_json(lambda, &est) });
            std::fs::write(c.output.join("report.json"), serde_json::to_string_pretty(&doc).expect("json"))?;
            let (code, message) = match &est {
                Ok(e) => {
                    let mut tsv = String::from("t\tu\n");
                    for seg in &e.minimizer.segments {
                        for (t, u) in seg.t.iter().zip(&seg.u) {
                            let _ = writeln!(tsv, "{t}\t{u}");
                        }
                    }
                    std::fs::write(c.output.join("minimizer.tsv"), tsv)?;
                    (if e.converged { 0 } else { 2 }, format!("Y = {}", e.best_value()))
                }
                Err(err) => (2, format!("solver error: {err}")),
            };
            Ok(RunSummary { exit_code: code, files: listing(&c.output), message })
        }
        Command::Sweep => {
            let (name, m) = load_model(c)?;
            let grid = c.lambda_grid.clone().unwrap_or_default();
            let start = Instant::now();
            let points = lambda_sweep(&m, &grid, &c.solver)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let mut csv = format!("{ESTIMATE_CSV_HEADER}\n");
            let mut rows = Vec::new();
            let mut all_ok = true;
            for p in &points {
                estimate_row(&mut csv, &name, c.n, Some(p.lambda), &p.estimate, ms);
                match &p.estimate {
                    Ok(e) => {
                        all_ok &= e.converged;
                        rows.push((p.lambda, e.value, e.euler_lagrange_residual));
                    }
                    Err(_) => all_ok = false,
                }
            }
            std::fs::write(c.output.join("results.csv"), csv)?;
            let doc = json!({
                "model": name,
                "n": c.n,
                "points": points.iter().map(|p| estimate_json(Some(p.lambda), &p.estimate)).collect::<Vec<_>>(),
            });
            std::fs::write(c.output.join("report.json"), serde_json::to_string_pretty(&doc).expect("json"))?;
            let table = SweepTable { name: format!("{name}_lambda_sweep"), x_label: "lambda".into(), rows };
            std::fs::write(c.output.join(format!("{}.tsv", table.name)), table.to_tsv())?;
            Ok(RunSummary {
                exit_code: if all_ok { 0 } else { 2 },
                files: listing(&c.output),
                message: format!("{} sweep points", points.len()),
            })
        }
    }
}

/// Runs a config, reporting errors on stderr. Exit status: 0 if everything
/// passed, 2 if a verdict failed or was inconclusive, 1 on execution error.
pub fn run(c: &RunConfig) -> i32 {
    match execute(c) {
        Ok(s) => {
            eprintln!("{}", s.message);
            s.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line_builtin() {
        let c = parse_config("hemisphere n=3 lambda=0.5").unwrap();
        assert_eq!(c.command, Command::Compute);
        assert_eq!(c.model, Some(ModelSource::Builtin("hemisphere".into())));
        assert_eq!(c.lambda, Some(0.5));
        assert_eq!(c.n, 3);
    }

    #[test]
    fn key_value_file_with_comments() {
        let text = "# sweep\ncommand = sweep\nmodel=schoen_product\nL = 20\nlambda_grid=0.1:1:0.1\nseed=0x10\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.command, Command::Sweep);
        assert_eq!(c.params.big_l, Some(20.0));
        assert_eq!(c.lambda_grid.as_ref().unwrap().len(), 10);
        assert_eq!(c.solver.seed, 16);
    }

    #[test]
    fn lambda_out_of_range() {
        assert!(matches!(parse_config("hemisphere lambda=1.5"), Err(ConfigError::Semantic(_))));
    }

    #[test]
    fn unknown_key_suggestion() {
        let err = parse_config("schoen_product L=5\n  fibre=2").unwrap_err();
        match err {
            ConfigError::Parse { line, col, message } => {
                assert_eq!((line, col), (2, 3));
                assert!(message.contains("fiber_quotient_order"), "{message}");
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn closed_model_at_lambda_zero() {
        let err = parse_config("round_sphere lambda=0").unwrap_err();
        assert!(matches!(err, ConfigError::Semantic(_)));
        assert!(parse_config("hemisphere lambda=0").is_ok());
    }

    #[test]
    fn parameter_checks() {
        assert!(parse_config("schoen_product lambda=1").is_err());
        assert!(parse_config("hemisphere L=3").is_err());
        assert!(parse_config("hemisphere a=1").is_err());
        assert!(parse_config("bogus").is_err());
        assert!(parse_config("hemisphere n=x").is_err());
    }

    #[test]
    fn grid_arithmetic() {
        let g = parse_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(parse_grid("0.1,0.5").unwrap(), vec![0.1, 0.5]);
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn fiber_order_switches_product() {
        let p = ModelParams { big_l: Some(5.0), fiber_quotient_order: Some(2), ..Default::default() };
        let m = build_builtin("schoen_product", 3, &p).unwrap();
        assert_eq!(m.fiber(), Fiber::Projective);
        assert_eq!(m, quotient_product(3, 5.0).unwrap());
    }
}
