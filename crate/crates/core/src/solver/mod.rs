//! Constrained minimization of the energy over rotationally symmetric fields.
//!
//! The scale-invariant quotient `Q(u) = E(c(u)·u)`, with `c(u)` the scale that
//! puts `u` on the constraint surface, is minimized by preconditioned
//! projected gradient descent. The preconditioner is the tridiagonal H¹-type
//! metric of the mesh; steps follow Barzilai–Borwein with a non-monotone
//! Armijo safeguard, and every iterate is clamped to `u ≥ 0` and renormalized.

mod closed_form;

pub use closed_form::{closed_form_hemisphere, closed_form_sphere, HemisphereClosedForm};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional::{check_weights, normalizing_scale, DiscretizedField, Mesh, SymTridiag};
use crate::geometry::{EndCondition, ModelManifold};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRule {
    pub initial_step: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    /// Length of the non-monotone window.
    pub memory: usize,
}

impl Default for StepRule {
    fn default() -> Self {
        Self { initial_step: 0.5, armijo: 1e-4, shrink: 0.5, max_backtracks: 40, memory: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Nodes per segment on the coarsest grid.
    pub mesh_nodes: usize,
    pub max_iterations: usize,
    pub step_rule: StepRule,
    pub restarts: usize,
    pub seed: u64,
    /// Relative dual-norm stopping tolerance on the Euler–Lagrange residual.
    pub tolerance: f64,
    pub refinement_levels: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mesh_nodes: 257,
            max_iterations: 4_000,
            step_rule: StepRule::default(),
            restarts: 4,
            seed: 0x5eed,
            tolerance: 1e-8,
            refinement_levels: 3,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_nodes < 16 {
            return Err(Error::InvalidArgument(format!("mesh_nodes = {} < 16", self.mesh_nodes)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        let s = &self.step_rule;
        if !(s.initial_step > 0.0 && s.armijo > 0.0 && s.armijo < 1.0 && s.shrink > 0.0 && s.shrink < 1.0) {
            return Err(Error::InvalidArgument("step rule parameters out of range".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct YamabeEstimate {
    /// Discrete infimum: `energy(minimizer).total` with the constraint equal to 1.
    pub value: f64,
    pub minimizer: DiscretizedField,
    pub a: f64,
    pub b: f64,
    /// Refinement level (0 is the coarsest grid).
    pub mesh_level: usize,
    /// Nodes per segment at this level.
    pub mesh_nodes: usize,
    pub euler_lagrange_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Richardson value, present after a refinement study.
    pub extrapolated_value: Option<f64>,
    pub observed_order: Option<f64>,
    /// Values at each refinement level, coarsest first.
    pub level_values: Vec<f64>,
    /// False if refinement produced an increase (a sign of local-minimum capture).
    pub monotone_refinement: bool,
    /// Always true: the symmetric reduction can only overestimate the infimum.
    pub upper_bound: bool,
}

impl YamabeEstimate {
    /// Extrapolated value when available, the raw value otherwise.
    pub fn best_value(&self) -> f64 {
        self.extrapolated_value.unwrap_or(self.value)
    }
}

struct Run {
    u: Vec<f64>,
    value: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

struct Normalized {
    u: Vec<f64>,
    value: f64,
}

fn project(mesh: &Mesh, a: f64, b: f64, mut u: Vec<f64>) -> Option<Normalized> {
    for (v, &pin) in u.iter_mut().zip(mesh.pinned()) {
        if pin || !(*v > 0.0) {
            *v = 0.0;
        }
    }
    let ev = mesh.evaluate(&u);
    let (ai, bb) = (a * ev.interior_mass, b * ev.boundary_mass);
    if !(ai > 0.0 || bb > 0.0) {
        return None;
    }
    let c = normalizing_scale(ai, bb, mesh.p, mesh.q).ok()?;
    u.iter_mut().for_each(|v| *v *= c);
    let e = ev.gradient_term + ev.curvature_term + ev.boundary_term;
    Some(Normalized { u, value: c * c * e })
}

/// Gradient state at a normalized iterate.
struct GradientState {
    /// Projected gradient of the quotient.
    g: Vec<f64>,
    /// Preconditioned gradient `P⁻¹g`.
    z: Vec<f64>,
    /// Constraint gradient `a∇I + b∇B`.
    c: Vec<f64>,
    /// Lagrange multiplier `2E/D`.
    mu: f64,
    residual: f64,
}

impl GradientState {
    fn at(mesh: &Mesh, pc: &SymTridiag, a: f64, b: f64, u: &[f64]) -> Self {
        let m = u.len();
        let (mut g, mut di, mut db) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let ev = mesh.evaluate_with_gradients(u, &mut g, &mut di, &mut db);
        let e = ev.gradient_term + ev.curvature_term + ev.boundary_term;
        let d = mesh.p * a * ev.interior_mass + mesh.q * b * ev.boundary_mass;
        let mu = 2.0 * e / d;
        let mut c = vec![0.0; m];
        for i in 0..m {
            c[i] = a * di[i] + b * db[i];
            g[i] -= mu * c[i];
            if mesh.pinned()[i] {
                g[i] = 0.0;
                c[i] = 0.0;
            } else if u[i] <= 0.0 && g[i] > 0.0 {
                g[i] = 0.0;
            }
        }
        let mut z = g.clone();
        pc.solve(&mut z);
        let gz = dot(&g, &z);
        let upu = dot(&pc.apply(u), u);
        Self { g, z, c, mu, residual: (gz.max(0.0) / upu).sqrt() }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Residual level below which a Newton step on the Lagrangian is attempted.
const NEWTON_THRESHOLD: f64 = 1e-3;

/// Newton direction on the constraint tangent space: solves the bordered
/// system `[H c; cᵀ 0][δ; ν] = [−g; 0]` by two tridiagonal solves.
fn newton_direction(mesh: &Mesh, a: f64, b: f64, u: &[f64], st: &GradientState) -> Option<Vec<f64>> {
    let h = mesh.lagrangian_hessian(u, st.mu, a, b);
    let mut x1 = st.g.clone();
    h.solve(&mut x1);
    let mut x2 = st.c.clone();
    h.solve(&mut x2);
    let cx2 = dot(&st.c, &x2);
    if !(cx2.abs() > 0.0) {
        return None;
    }
    let nu = dot(&st.c, &x1) / cx2;
    let d: Vec<f64> = x1.iter().zip(&x2).map(|(p, r)| -p + nu * r).collect();
    (d.iter().all(|v| v.is_finite()) && dot(&st.g, &d) < 0.0).then_some(d)
}

fn descend(mesh: &Mesh, a: f64, b: f64, u0: Vec<f64>, opts: &SolverOptions) -> Option<Run> {
    let rule = opts.step_rule;
    let pc = mesh.preconditioner();
    let start = project(mesh, a, b, u0)?;
    let mut u = start.u;
    let mut q = start.value;
    let mut st = GradientState::at(mesh, &pc, a, b, &u);
    let mut prev: Option<(Vec<f64>, GradientState)> = None;
    let mut history = vec![q];
    let mut step = rule.initial_step;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if st.residual <= opts.tolerance {
            return Some(Run { u, value: q, residual: st.residual, iterations, converged: true });
        }
        let mut next = None;
        if st.residual < NEWTON_THRESHOLD {
            if let Some(d) = newton_direction(mesh, a, b, &u, &st) {
                let mut alpha = 1.0;
                for _ in 0..4 {
                    let trial: Vec<f64> = u.iter().zip(&d).map(|(x, dx)| x + alpha * dx).collect();
                    if let Some(t) = project(mesh, a, b, trial) {
                        if t.value <= q + 1e-13 * q.abs() {
                            next = Some(t);
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
        }
        if next.is_none() {
            if let Some((pu, ps)) = &prev {
                let sy: f64 = (0..u.len()).map(|i| (u[i] - pu[i]) * (st.g[i] - ps.g[i])).sum();
                let yy: f64 = (0..u.len()).map(|i| (st.g[i] - ps.g[i]) * (st.z[i] - ps.z[i])).sum();
                step = if sy > 0.0 && yy > 0.0 { (sy / yy).clamp(1e-6, 1e6) } else { rule.initial_step };
            }
            let gz = dot(&st.g, &st.z);
            let reference = history.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut alpha = step;
            let mut last_trial = None;
            for _ in 0..=rule.max_backtracks {
                let trial: Vec<f64> = u.iter().zip(&st.z).map(|(x, d)| x - alpha * d).collect();
                if let Some(t) = project(mesh, a, b, trial) {
                    if t.value <= reference - rule.armijo * alpha * gz {
                        next = Some(t);
                        break;
                    }
                    last_trial = Some(t);
                }
                alpha *= rule.shrink;
            }
            if next.is_none() {
                // Round-off floor: accept a flat step only if it lowers the residual.
                let t = last_trial.filter(|t| t.value <= q + 1e-12 * q.abs())?;
                let ts = GradientState::at(mesh, &pc, a, b, &t.u);
                if ts.residual >= st.residual {
                    break;
                }
                next = Some(t);
            }
        }
        let t = next.unwrap();
        let new_state = GradientState::at(mesh, &pc, a, b, &t.u);
        prev = Some((std::mem::replace(&mut u, t.u), std::mem::replace(&mut st, new_state)));
        q = t.value;
        history.push(q);
        if history.len() > rule.memory {
            history.remove(0);
        }
        iterations += 1;
    }
    Some(Run { u, value: q, residual: st.residual, iterations, converged: st.residual <= opts.tolerance })
}

/// Starting profiles: constant, a bubble at mid-span, a profile
/// concentrated at the boundary, then seeded random smooth fields.
fn initial_profile(model: &ModelManifold, mesh: &Mesh, index: usize, seed: u64) -> Vec<f64> {
    let pos = mesh.dof_positions();
    let (t0, t1) = model.span();
    let width = (t1 - t0) / 10.0;
    let n = model.dimension() as f64;
    match index {
        0 => vec![1.0; pos.len()],
        1 => {
            let mid = 0.5 * (t0 + t1);
            pos.iter().map(|t| 1e-3 + (1.0 / ((t - mid) / width).cosh()).powf(0.5 * (n - 2.0))).collect()
        }
        2 => {
            let ends = model.ends();
            let at_start = ends[0] == EndCondition::Boundary || ends[1] != EndCondition::Boundary;
            let at_finish = ends[1] == EndCondition::Boundary;
            pos.iter()
                .map(|t| {
                    let mut v = 1e-3;
                    if at_start {
                        v += (-(t - t0) / width).exp();
                    }
                    if at_finish {
                        v += (-(t1 - t) / width).exp();
                    }
                    v
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
            let mut v: Vec<f64> = (0..pos.len()).map(|_| rng.gen_range(0.2..1.2)).collect();
            for _ in 0..4 {
                let w = v.clone();
                for i in 1..v.len().saturating_sub(1) {
                    v[i] = 0.25 * w[i - 1] + 0.5 * w[i] + 0.25 * w[i + 1];
                }
            }
            v
        }
    }
}

fn check_reachable(model: &ModelManifold, a: f64, b: f64) -> Result<()> {
    check_weights(a, b)?;
    if a == 0.0 && !model.has_boundary() {
        return Err(Error::ConstraintUnreachable);
    }
    Ok(())
}

fn better(x: &Run, y: &Run) -> bool {
    let tol = 1e-12 * x.value.abs().max(y.value.abs()).max(1.0);
    if (x.value - y.value).abs() > tol {
        x.value < y.value
    } else {
        x.residual < y.residual
    }
}

fn estimate_from(mesh: &Mesh, a: f64, b: f64, run: Run, level: usize) -> YamabeEstimate {
    YamabeEstimate {
        value: run.value,
        minimizer: DiscretizedField::from_dofs(mesh, &run.u),
        a,
        b,
        mesh_level: level,
        mesh_nodes: mesh.grids()[0].len(),
        euler_lagrange_residual: run.residual,
        converged: run.converged,
        iterations: run.iterations,
        extrapolated_value: None,
        observed_order: None,
        level_values: vec![run.value],
        monotone_refinement: true,
        upper_bound: true,
    }
}

fn minimize_on(
    model: &ModelManifold,
    mesh: &Mesh,
    a: f64,
    b: f64,
    opts: &SolverOptions,
    warm: Option<&DiscretizedField>,
) -> Result<Run> {
    let mut starts: Vec<Vec<f64>> = (0..opts.restarts).map(|i| initial_profile(model, mesh, i, opts.seed)).collect();
    if let Some(w) = warm {
        starts.insert(0, resample(mesh, w)?);
    }
    let runs: Vec<Option<Run>> = starts.into_par_iter().map(|u0| descend(mesh, a, b, u0, opts)).collect();
    let mut best: Option<Run> = None;
    for r in runs.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| better(&r, b)) {
            best = Some(r);
        }
    }
    best.ok_or(Error::ZeroField)
}

/// Interpolates `field` onto the grid of `mesh` segment by segment.
fn resample(mesh: &Mesh, field: &DiscretizedField) -> Result<Vec<f64>> {
    if field.segments.len() != mesh.grids().len() {
        return Err(Error::GridMismatch("warm start has a different segment count".into()));
    }
    let values: Vec<Vec<f64>> = mesh
        .grids()
        .iter()
        .zip(&field.segments)
        .map(|(grid, s)| {
            grid.iter()
                .map(|&t| {
                    let i = s.t.partition_point(|&x| x <= t).clamp(1, s.t.len() - 1);
                    let w = ((t - s.t[i - 1]) / (s.t[i] - s.t[i - 1])).clamp(0.0, 1.0);
                    s.u[i - 1] * (1.0 - w) + s.u[i] * w
                })
                .collect()
        })
        .collect();
    Ok(mesh.gather_first(&values))
}

/// Discrete infimum of the energy over `{a∫u^p + b∫_∂u^q = 1}` on a uniform
/// grid of `opts.mesh_nodes` nodes per segment.
pub fn minimize_energy(model: &ModelManifold, a: f64, b: f64, opts: &SolverOptions) -> Result<YamabeEstimate> {
    minimize_energy_from(model, a, b, opts, None)
}

/// As [`minimize_energy`], adding `warm` to the set of starting profiles.
pub fn minimize_energy_from(
    model: &ModelManifold,
    a: f64,
    b: f64,
    opts: &SolverOptions,
    warm: Option<&DiscretizedField>,
) -> Result<YamabeEstimate> {
    opts.validate()?;
    check_reachable(model, a, b)?;
    let mesh = Mesh::uniform(model, opts.mesh_nodes - 1)?;
    let run = minimize_on(model, &mesh, a, b, opts, warm)?;
    Ok(estimate_from(&mesh, a, b, run, 0))
}

/// Richardson value assuming second-order convergence.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

/// Observed order from three successive halvings, if the differences are
/// of one sign and non-degenerate.
pub fn observed_order(v: &[f64]) -> Option<f64> {
    if v.len() < 3 {
        return None;
    }
    let k = v.len();
    let (d1, d2) = (v[k - 3] - v[k - 2], v[k - 2] - v[k - 1]);
    let scale = v[k - 1].abs().max(1.0);
    if d1 * d2 <= 0.0 || d2.abs() < 1e-14 * scale {
        return None;
    }
    Some((d1 / d2).log2())
}

/// Minimizes on `refinement_levels` grids with doubling cell counts, warm
/// starting each level from the previous minimizer.
pub fn refine_and_extrapolate(model: &ModelManifold, a: f64, b: f64, opts: &SolverOptions) -> Result<YamabeEstimate> {
    opts.validate()?;
    if opts.refinement_levels < 2 {
        return Err(Error::InvalidArgument("refinement needs at least two levels".into()));
    }
    check_reachable(model, a, b)?;
    let cells0 = opts.mesh_nodes - 1;
    let mut values = Vec::with_capacity(opts.refinement_levels);
    let mut converged = true;
    let mut current: Option<YamabeEstimate> = None;
    for level in 0..opts.refinement_levels {
        let mesh = Mesh::uniform(model, cells0 << level)?;
        let run = match &current {
            None => minimize_on(model, &mesh, a, b, opts, None)?,
            Some(prev) => {
                let single = SolverOptions { restarts: 1, ..*opts };
                let warm = resample(&mesh, &prev.minimizer)?;
                descend(&mesh, a, b, warm, &single).ok_or(Error::ZeroField)?
            }
        };
        converged &= run.converged;
        values.push(run.value);
        current = Some(estimate_from(&mesh, a, b, run, level));
    }
    let mut est = current.unwrap();
    let k = values.len();
    est.extrapolated_value = Some(richardson(values[k - 2], values[k - 1]));
    est.observed_order = observed_order(&values);
    est.monotone_refinement = values.windows(2).all(|w| w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
    est.converged = converged;
    est.level_values = values;
    Ok(est)
}

/// One point of a λ-sweep; solver errors are kept per point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub estimate: Result<YamabeEstimate>,
}

/// Estimates `Y_λ = Y_{λ,1−λ}` along `grid`, ordered by λ. Every point is
/// solved from the standard starts (in parallel), then a forward pass tries
/// the neighbour's minimizer as a warm start and keeps it if lower.
pub fn lambda_sweep(model: &ModelManifold, grid: &[f64], opts: &SolverOptions) -> Result<Vec<SweepPoint>> {
    opts.validate()?;
    if let Some(l) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidArgument(format!("λ = {l} is outside [0, 1]")));
    }
    let mut lambdas = grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let mut points: Vec<SweepPoint> = lambdas
        .par_iter()
        .map(|&l| SweepPoint { lambda: l, estimate: minimize_energy(model, l, 1.0 - l, opts) })
        .collect();
    for i in 1..points.len() {
        let warm = match &points[i - 1].estimate {
            Ok(e) => e.minimizer.clone(),
            Err(_) => continue,
        };
        let l = points[i].lambda;
        if let Ok(cur) = &points[i].estimate {
            let single = SolverOptions { restarts: 1, ..*opts };
            let mesh = Mesh::uniform(model, opts.mesh_nodes - 1)?;
            let u0 = resample(&mesh, &warm)?;
            if let Some(run) = descend(&mesh, l, 1.0 - l, u0, &single) {
                if run.value < cur.value - 1e-12 * cur.value.abs().max(1.0) {
                    points[i].estimate = Ok(estimate_from(&mesh, l, 1.0 - l, run, 0));
                }
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{constraint, energy};
    use crate::geometry::{cylinder, hemisphere, round_sphere};

    fn quick() -> SolverOptions {
        SolverOptions { mesh_nodes: 129, ..Default::default() }
    }

    #[test]
    fn sphere_value_and_invariants() {
        let m = round_sphere(3).unwrap();
        let est = minimize_energy(&m, 1.0, 0.0, &quick()).unwrap();
        let exact = closed_form_sphere(3);
        assert!(est.converged, "residual {}", est.euler_lagrange_residual);
        assert!((est.value - exact).abs() < 0.01 * exact, "{} vs {exact}", est.value);
        assert!(est.value >= exact - 1e-9);
        let e = energy(&m, &est.minimizer).unwrap();
        assert!((e.total - est.value).abs() < 1e-9 * est.value);
        assert!((constraint(&m, &est.minimizer, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hemisphere_endpoints_are_exact() {
        let m = hemisphere(3).unwrap();
        for l in [0.0, 0.5, 1.0] {
            let est = minimize_energy(&m, l, 1.0 - l, &quick()).unwrap();
            let cf = closed_form_hemisphere(3, l).unwrap();
            assert!(est.value <= cf.upper_bound() * (1.0 + 1e-4), "λ={l}: {} vs {:?}", est.value, cf);
            if l == 0.0 || l == 1.0 {
                let exact = cf.upper_bound();
                assert!((est.value - exact).abs() < 1e-3 * exact, "λ={l}: {} vs {exact}", est.value);
            }
        }
    }

    #[test]
    fn short_cylinder_below_constant_bound() {
        let m = cylinder(3, 0.1).unwrap();
        let est = minimize_energy(&m, 1.0, 0.0, &quick()).unwrap();
        let bound = 2.0 * (4.0 * std::f64::consts::PI * 0.1f64).powf(2.0 / 3.0);
        assert!(est.value <= bound * (1.0 + 1e-9));
    }

    #[test]
    fn closed_model_at_zero_lambda_is_an_error() {
        let m = round_sphere(3).unwrap();
        assert_eq!(minimize_energy(&m, 0.0, 1.0, &quick()), Err(Error::ConstraintUnreachable));
    }

    #[test]
    fn refinement_is_monotone() {
        let m = cylinder(3, 10.0).unwrap();
        let opts = SolverOptions { mesh_nodes: 33, refinement_levels: 3, ..Default::default() };
        let est = refine_and_extrapolate(&m, 1.0, 0.0, &opts).unwrap();
        assert!(est.monotone_refinement, "{:?}", est.level_values);
    }

    #[test]
    fn options_are_validated() {
        let m = round_sphere(3).unwrap();
        let bad = SolverOptions { mesh_nodes: 8, ..Default::default() };
        assert!(matches!(minimize_energy(&m, 1.0, 0.0, &bad), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn richardson_and_order() {
        let v: Vec<f64> = (0..3).map(|k| 1.0 + 0.5 * 0.25f64.powi(k)).collect();
        assert!((richardson(v[1], v[2]) - 1.0).abs() < 1e-14);
        assert!((observed_order(&v).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(observed_order(&[1.0, 1.0, 1.0]), None);
    }
}
