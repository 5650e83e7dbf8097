use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::checks::*;
use crate::error::{Error, Result};
use crate::geometry::hemisphere;

/// Named groups of checks run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Sphere,
    Reflection,
    Cut,
    Combining,
    Covering,
    Kobayashi,
    Boundary,
    Monotonicity,
    Escobar,
    Schoen,
    Main,
}

impl Suite {
    pub const NAMES: [&'static str; 12] = [
        "all",
        "sphere",
        "reflection",
        "cut",
        "combining",
        "covering",
        "kobayashi",
        "boundary",
        "monotonicity",
        "escobar",
        "schoen",
        "main",
    ];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Suite::All,
            Suite::Sphere,
            Suite::Reflection,
            Suite::Cut,
            Suite::Combining,
            Suite::Covering,
            Suite::Kobayashi,
            Suite::Boundary,
            Suite::Monotonicity,
            Suite::Escobar,
            Suite::Schoen,
            Suite::Main,
        ];
        Self::NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| all[i])
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`; expected one of {}", Self::NAMES.join(", "))))
    }
}

/// Sizes the global rayon pool from `YAMABE_LAB_THREADS` when set.
/// Results do not depend on the thread count.
pub fn init_thread_pool() {
    if let Some(k) = std::env::var("YAMABE_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool that was already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
    }
}

type Job = Box<dyn Fn() -> Bundle + Send + Sync>;

fn jobs(suite: Suite, n: usize, opts: CheckOptions) -> Vec<Job> {
    let mut v: Vec<Job> = Vec::new();
    if suite.includes(Suite::Sphere) {
        v.push(Box::new(move || check_sphere_oracle(n, &opts)));
    }
    if suite.includes(Suite::Reflection) {
        v.push(Box::new(move || check_reflection(n, &opts)));
    }
    if suite.includes(Suite::Cut) {
        for l in [0.5, 1.0] {
            v.push(Box::new(move || check_cut_lemma(n, l, &opts).expect("λ is positive")));
        }
    }
    if suite.includes(Suite::Combining) {
        v.push(Box::new(move || check_combining_function(1000, 10_000, opts.solver.seed)));
    }
    if suite.includes(Suite::Covering) {
        for l in [0.25, 0.5, 0.75, 1.0] {
            for big_l in [5.0, 10.0, 20.0] {
                v.push(Box::new(move || check_covering(n, l, big_l, &opts)));
            }
        }
        v.push(Box::new(move || check_circle_covering(n, 1.0, 5.0, 3, &opts)));
    }
    if suite.includes(Suite::Kobayashi) {
        v.push(Box::new(move || check_kobayashi_decay(n, 1.0, &[5.0, 10.0, 20.0, 40.0], &opts)));
    }
    if suite.includes(Suite::Boundary) {
        for l in [0.0, 0.5, 1.0] {
            v.push(Box::new(move || check_boundary_connected_sum(n, l, &[5.0, 10.0, 20.0, 40.0], &opts)));
        }
    }
    if suite.includes(Suite::Monotonicity) {
        v.push(Box::new(move || match hemisphere(n) {
            Ok(h) => check_continuity_and_monotonicity(&h, "hemisphere", &[0.0, 0.25, 0.5, 1.0, 2.0], 0.01, &opts),
            Err(_) => Bundle::default(),
        }));
    }
    if suite.includes(Suite::Escobar) {
        v.push(Box::new(move || check_escobar_closed_form(n, &[0.0, 0.25, 0.5, 0.75, 1.0], &opts)));
    }
    if suite.includes(Suite::Schoen) {
        v.push(Box::new(move || check_schoen_limit(n, &[2.0, 5.0, 10.0, 20.0, 30.0], 1.0, &opts)));
    }
    if suite.includes(Suite::Main) {
        v.push(Box::new(move || check_main_theorem_instance(n, &[0.0, 0.5, 1.0], &opts)));
    }
    v
}

/// Runs a suite. Jobs run in parallel; the output order is fixed by the
/// job list, so reports are identical across runs and thread counts.
pub fn run_suite(suite: Suite, n: usize, opts: &CheckOptions) -> Bundle {
    let list = jobs(suite, n, *opts);
    let parts: Vec<Bundle> = list
        .par_iter()
        .map(|job| {
            let start = Instant::now();
            let mut b = job();
            let ms = start.elapsed().as_secs_f64() * 1e3;
            for r in &mut b.reports {
                r.runtime_ms = ms;
            }
            b
        })
        .collect();
    let mut out = Bundle::default();
    for p in parts {
        out.reports.extend(p.reports);
        out.tables.extend(p.tables);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert!(name.parse::<Suite>().is_ok());
        }
        assert!("spheres".parse::<Suite>().is_err());
    }
}
