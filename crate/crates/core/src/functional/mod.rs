//! The Yamabe-type energy, the mixed constraint and their discrete evaluation.

mod mesh;

pub use mesh::Mesh;
pub(crate) use mesh::SymTridiag;

use crate::error::{Error, Result};
use crate::geometry::ModelManifold;

/// Piecewise-linear field values on one segment's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentField {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

/// A test function sampled per segment. Values are interpolated linearly
/// between nodes; shared junction nodes must agree.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedField {
    pub segments: Vec<SegmentField>,
}

impl DiscretizedField {
    /// Samples `g` on a uniform grid of `cells` cells per segment.
    pub fn from_fn<G: Fn(f64) -> f64>(model: &ModelManifold, cells: usize, g: G) -> Result<Self> {
        let mesh = Mesh::uniform(model, cells)?;
        Ok(Self::from_grid_fn(&mesh, g))
    }

    pub fn constant(model: &ModelManifold, cells: usize, c: f64) -> Result<Self> {
        Self::from_fn(model, cells, |_| c)
    }

    pub(crate) fn from_grid_fn<G: Fn(f64) -> f64>(mesh: &Mesh, g: G) -> Self {
        let segments = mesh
            .grids()
            .iter()
            .map(|t| SegmentField { t: t.clone(), u: t.iter().map(|&x| g(x)).collect() })
            .collect();
        Self { segments }
    }

    pub(crate) fn from_dofs(mesh: &Mesh, u: &[f64]) -> Self {
        let segments = mesh
            .grids()
            .iter()
            .zip(mesh.scatter(u))
            .map(|(t, u)| SegmentField { t: t.clone(), u })
            .collect();
        Self { segments }
    }

    /// Builds the mesh this field lives on and its dof vector.
    pub(crate) fn assemble(&self, model: &ModelManifold) -> Result<(Mesh, Vec<f64>)> {
        if self.segments.len() != model.segments().len() {
            return Err(Error::GridMismatch(format!(
                "field has {} segments, model has {}",
                self.segments.len(),
                model.segments().len()
            )));
        }
        for s in &self.segments {
            if s.t.len() != s.u.len() {
                return Err(Error::GridMismatch("node and value counts differ".into()));
            }
            if let Some(v) = s.u.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::InvalidField(format!("value {v} is negative or not finite")));
            }
        }
        let mesh = Mesh::from_grids(model, self.segments.iter().map(|s| s.t.clone()).collect())?;
        let values: Vec<Vec<f64>> = self.segments.iter().map(|s| s.u.clone()).collect();
        let u = mesh.gather(&values)?;
        if mesh.pinned().iter().zip(&u).any(|(&p, &v)| p && v != 0.0) {
            return Err(Error::InvalidField("field must vanish at a truncated end".into()));
        }
        Ok((mesh, u))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.segments.iter_mut().for_each(|s| s.u.iter_mut().for_each(|v| *v *= c));
        out
    }

    /// Linear interpolation at `t` (first segment containing it).
    pub fn value_at(&self, t: f64) -> Option<f64> {
        for s in &self.segments {
            let (lo, hi) = (s.t[0], s.t[s.t.len() - 1]);
            if t >= lo && t <= hi {
                let i = s.t.partition_point(|&x| x <= t).clamp(1, s.t.len() - 1);
                let (t0, t1) = (s.t[i - 1], s.t[i]);
                let w = (t - t0) / (t1 - t0);
                return Some(s.u[i - 1] * (1.0 - w) + s.u[i] * w);
            }
        }
        None
    }

    pub fn max_value(&self) -> f64 {
        self.segments.iter().flat_map(|s| s.u.iter().cloned()).fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.segments.iter().map(|s| s.t.len()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub gradient_term: f64,
    pub curvature_term: f64,
    pub boundary_term: f64,
    pub total: f64,
    /// `∫ u^p dV`.
    pub interior_mass: f64,
    /// `∫_∂ u^q dA`.
    pub boundary_mass: f64,
}

impl From<mesh::Evaluation> for EnergyBreakdown {
    fn from(ev: mesh::Evaluation) -> Self {
        Self {
            gradient_term: ev.gradient_term,
            curvature_term: ev.curvature_term,
            boundary_term: ev.boundary_term,
            total: ev.gradient_term + ev.curvature_term + ev.boundary_term,
            interior_mass: ev.interior_mass,
            boundary_mass: ev.boundary_mass,
        }
    }
}

/// Sobolev exponents `(p, q) = (2n/(n−2), 2(n−1)/(n−2))`.
pub fn exponents(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (2.0 * nf / (nf - 2.0), 2.0 * (nf - 1.0) / (nf - 2.0))
}

/// Energy of `u`: gradient, curvature and boundary mean-curvature parts.
pub fn energy(model: &ModelManifold, u: &DiscretizedField) -> Result<EnergyBreakdown> {
    let (mesh, v) = u.assemble(model)?;
    Ok(mesh.evaluate(&v).into())
}

/// `a·∫u^p + b·∫_∂u^q`.
pub fn constraint(model: &ModelManifold, u: &DiscretizedField, a: f64, b: f64) -> Result<f64> {
    check_weights(a, b)?;
    let e = energy(model, u)?;
    Ok(a * e.interior_mass + b * e.boundary_mass)
}

/// `∫u² dV`.
pub fn l2_mass(model: &ModelManifold, u: &DiscretizedField) -> Result<f64> {
    let (mesh, v) = u.assemble(model)?;
    Ok(mesh.l2_mass(&v))
}

pub(crate) fn check_weights(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 || a + b == 0.0 {
        return Err(Error::BadWeights { a, b });
    }
    Ok(())
}

/// The scale `c > 0` with `a·I·c^p + b·B·c^q = 1`.
pub(crate) fn normalizing_scale(a_i: f64, b_b: f64, p: f64, q: f64) -> Result<f64> {
    if a_i <= 0.0 && b_b <= 0.0 {
        return Err(Error::ZeroField);
    }
    if b_b <= 0.0 {
        return Ok(a_i.powf(-1.0 / p));
    }
    if a_i <= 0.0 {
        return Ok(b_b.powf(-1.0 / q));
    }
    // g is convex and increasing; Newton from the right converges monotonically.
    let g = |c: f64| a_i * c.powf(p) + b_b * c.powf(q) - 1.0;
    let dg = |c: f64| p * a_i * c.powf(p - 1.0) + q * b_b * c.powf(q - 1.0);
    let mut c = a_i.powf(-1.0 / p).min(b_b.powf(-1.0 / q));
    for _ in 0..200 {
        let step = g(c) / dg(c);
        let next = c - step;
        if !(next > 0.0) {
            c *= 0.5;
            continue;
        }
        c = next;
        if step.abs() <= 1e-15 * c {
            break;
        }
    }
    Ok(c)
}

/// Rescales `u` so that `a·∫u^p + b·∫_∂u^q = 1`.
pub fn normalize(model: &ModelManifold, u: &DiscretizedField, a: f64, b: f64) -> Result<DiscretizedField> {
    check_weights(a, b)?;
    let (mesh, v) = u.assemble(model)?;
    if a == 0.0 && !mesh.has_boundary_mass() {
        return Err(Error::ConstraintUnreachable);
    }
    let e = mesh.evaluate(&v);
    if e.interior_mass == 0.0 && e.boundary_mass == 0.0 {
        return Err(Error::ZeroField);
    }
    let c = normalizing_scale(a * e.interior_mass, b * e.boundary_mass, mesh.p, mesh.q)?;
    if a * e.interior_mass == 0.0 && b * e.boundary_mass == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(u.scaled(c))
}

/// Lower bound for `∫u²` of any `u` satisfying the λ-constraint, from
/// Hölder on the interior term: `∫u² ≤ V^{2/n}(∫u^p)^{2/p}` with
/// `∫u^p ≤ 1/λ`. Returned as the upper bound `V^{2/n}·λ^{−2/p}`; infinite for λ = 0.
pub fn holder_mass_bound(model: &ModelManifold, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} is outside [0, 1]")));
    }
    let n = model.dimension() as f64;
    let (p, _) = exponents(model.dimension());
    if lambda == 0.0 {
        return Ok(f64::INFINITY);
    }
    let vol = crate::geometry::volume(model);
    Ok(vol.powf(2.0 / n) * lambda.powf(-2.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hemisphere, round_sphere, schoen_product, unit_ball};
    use crate::numeric::sphere_area;
    use std::f64::consts::PI;

    #[test]
    fn constant_on_sphere_has_exact_curvature_energy() {
        let m = round_sphere(3).unwrap();
        let u = DiscretizedField::constant(&m, 64, 1.0).unwrap();
        let e = energy(&m, &u).unwrap();
        let vol = sphere_area(3);
        assert!(e.gradient_term.abs() < 1e-14);
        assert!((e.curvature_term - 6.0 * vol).abs() < 1e-10 * vol);
        assert!((e.interior_mass - vol).abs() < 1e-10);
        assert_eq!(e.boundary_mass, 0.0);
    }

    #[test]
    fn hemisphere_constant_has_no_boundary_energy() {
        let m = hemisphere(3).unwrap();
        let u = DiscretizedField::constant(&m, 32, 2.0).unwrap();
        let e = energy(&m, &u).unwrap();
        assert_eq!(e.boundary_term, 0.0);
        assert!((e.boundary_mass - 4.0 * PI * 16.0).abs() < 1e-10);
    }

    #[test]
    fn ball_boundary_term() {
        // unit ball: H = 1 on the unit sphere, R = 0
        let m = unit_ball(3).unwrap();
        let u = DiscretizedField::constant(&m, 32, 1.0).unwrap();
        let e = energy(&m, &u).unwrap();
        assert!(e.curvature_term.abs() < 1e-12);
        assert!((e.boundary_term - 4.0 * 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn energy_is_quadratic_and_constraint_homogeneous() {
        let m = hemisphere(4).unwrap();
        let u = DiscretizedField::from_fn(&m, 40, |t| 1.0 + t.sin()).unwrap();
        let c = 1.7;
        let e1 = energy(&m, &u).unwrap();
        let e2 = energy(&m, &u.scaled(c)).unwrap();
        assert!((e2.total - c * c * e1.total).abs() < 1e-10 * e2.total.abs());
        let (p, q) = exponents(4);
        assert!((e2.interior_mass - c.powf(p) * e1.interior_mass).abs() < 1e-10 * e2.interior_mass);
        assert!((e2.boundary_mass - c.powf(q) * e1.boundary_mass).abs() < 1e-10 * e2.boundary_mass);
    }

    #[test]
    fn normalize_hits_the_constraint() {
        let m = hemisphere(3).unwrap();
        let u = DiscretizedField::from_fn(&m, 50, |t| 0.3 + t).unwrap();
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.4, 0.6)] {
            let v = normalize(&m, &u, a, b).unwrap();
            assert!((constraint(&m, &v, a, b).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_model_rejects_pure_boundary_constraint() {
        let m = schoen_product(3, 5.0).unwrap();
        let u = DiscretizedField::constant(&m, 10, 1.0).unwrap();
        assert_eq!(normalize(&m, &u, 0.0, 1.0), Err(Error::ConstraintUnreachable));
        assert!(matches!(normalize(&m, &u, -1.0, 1.0), Err(Error::BadWeights { .. })));
        assert_eq!(normalize(&m, &u.scaled(0.0), 1.0, 0.0), Err(Error::ZeroField));
    }

    #[test]
    fn holder_bound_holds_for_normalized_fields() {
        let m = hemisphere(3).unwrap();
        let u = DiscretizedField::from_fn(&m, 80, |t| 1.0 + 3.0 * t * t).unwrap();
        let v = normalize(&m, &u, 1.0, 0.0).unwrap();
        assert!(l2_mass(&m, &v).unwrap() <= holder_mass_bound(&m, 1.0).unwrap());
    }

    #[test]
    fn rejects_negative_values() {
        let m = hemisphere(3).unwrap();
        let u = DiscretizedField::from_fn(&m, 8, |t| t - 0.5).unwrap();
        assert!(matches!(energy(&m, &u), Err(Error::InvalidField(_))));
    }
}
