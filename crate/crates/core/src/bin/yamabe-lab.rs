use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use yamabe_lab::cli::{parse_config, run};

#[derive(Parser)]
#[command(name = "yamabe-lab", version, about = "Generalized Yamabe constants of symmetric model manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate one Y_{a,b} value.
    Compute(Common),
    /// Estimate Y_λ along a λ grid.
    Sweep(Common),
    /// Run the inequality checks.
    Verify(Common),
    /// Run every check.
    All(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (key=value items); flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin model name.
    #[arg(long)]
    model: Option<String>,
    /// Model file in the TOML model format.
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// `start:stop:step` or a comma list.
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Circle length of product models.
    #[arg(long = "L")]
    big_l: Option<f64>,
    /// Neck or cylinder length.
    #[arg(long = "l")]
    l: Option<f64>,
    #[arg(long)]
    t_cut: Option<f64>,
    #[arg(long)]
    fiber_quotient_order: Option<u32>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    mesh_nodes: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    refinement_levels: Option<usize>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn config_text(command: &str, c: &Common) -> std::io::Result<String> {
    let mut s = match &c.config {
        Some(p) => std::fs::read_to_string(p)? + "\n",
        None => String::new(),
    };
    s.push_str(&format!("command={command}\n"));
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            s.push_str(&format!("{k}=\"{v}\"\n"));
        }
    };
    put("model", c.model.clone());
    put("model_file", c.model_file.as_ref().map(|p| p.display().to_string()));
    put("n", c.n.map(|v| v.to_string()));
    put("lambda", c.lambda.map(|v| v.to_string()));
    put("lambda_grid", c.lambda_grid.clone());
    put("a", c.a.map(|v| v.to_string()));
    put("b", c.b.map(|v| v.to_string()));
    put("L", c.big_l.map(|v| v.to_string()));
    put("l", c.l.map(|v| v.to_string()));
    put("t_cut", c.t_cut.map(|v| v.to_string()));
    put("fiber_quotient_order", c.fiber_quotient_order.map(|v| v.to_string()));
    put("suite", c.suite.clone());
    put("mesh_nodes", c.mesh_nodes.map(|v| v.to_string()));
    put("max_iterations", c.max_iterations.map(|v| v.to_string()));
    put("restarts", c.restarts.map(|v| v.to_string()));
    put("tolerance", c.tolerance.map(|v| v.to_string()));
    put("refinement_levels", c.refinement_levels.map(|v| v.to_string()));
    put("seed", c.seed.clone());
    put("output", c.out.as_ref().map(|p| p.display().to_string()));
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Cmd::Compute(c) => ("compute", c),
        Cmd::Sweep(c) => ("sweep", c),
        Cmd::Verify(c) => ("verify", c),
        Cmd::All(c) => ("all", c),
    };
    let text = match config_text(name, common) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config: {e}");
            return ExitCode::from(1);
        }
    };
    match parse_config(&text) {
        Ok(cfg) => ExitCode::from(run(&cfg) as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
