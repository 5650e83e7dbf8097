//! Symmetric model manifolds: warped products `dt² + f(t)²·g_fiber` over an
//! interval, glued from segments, with exact curvature and measure data.

mod builders;
mod format;
mod warp;

pub use builders::*;
pub use format::{model_from_text, model_to_text};
pub use warp::{CubicSpline, Warp};

use crate::error::{Error, Result};
use crate::numeric::{integrate, sphere_area};

const JUNCTION_TOL: f64 = 1e-9;

/// Fiber of a warped segment. Quotient fibers are represented purely by
/// scaling their measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fiber {
    /// Round `S^{n−1}`.
    Sphere,
    /// `RP^{n−1}`: half the fiber area.
    Projective,
    /// Round hemisphere `S^{n−1}_+`: half the fiber area plus a totally
    /// geodesic side boundary swept by the equator `S^{n−2}`.
    HalfSphere,
}

impl Fiber {
    pub fn quotient_order(self) -> u32 {
        match self {
            Fiber::Sphere => 1,
            Fiber::Projective | Fiber::HalfSphere => 2,
        }
    }

    pub fn has_side_boundary(self) -> bool {
        self == Fiber::HalfSphere
    }

    pub fn name(self) -> &'static str {
        match self {
            Fiber::Sphere => "sphere",
            Fiber::Projective => "projective",
            Fiber::HalfSphere => "half_sphere",
        }
    }
}

/// One warped-product piece `dt² + f(t)²·g_fiber` on `[t_a, t_b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedSegment {
    pub n: usize,
    pub warp: Warp,
    pub domain: (f64, f64),
    pub fiber: Fiber,
}

impl WarpedSegment {
    pub fn new(n: usize, warp: Warp, domain: (f64, f64), fiber: Fiber) -> Result<Self> {
        let seg = Self { n, warp, domain, fiber };
        seg.validate()?;
        Ok(seg)
    }

    pub fn fiber_quotient_order(&self) -> u32 {
        self.fiber.quotient_order()
    }

    pub fn length(&self) -> f64 {
        self.domain.1 - self.domain.0
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if self.n < 3 {
            return Err(Error::InvalidModel(format!("dimension {} < 3", self.n)));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidModel(format!("empty domain [{a}, {b}]")));
        }
        // positivity on the open domain, sampled densely
        let samples = 257;
        for k in 1..samples {
            let t = a + (b - a) * k as f64 / samples as f64;
            let f = self.warp.value(t);
            if !(f > 0.0) {
                return Err(Error::InvalidModel(format!("warp is not positive at t = {t} (f = {f})")));
            }
        }
        Ok(())
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain;
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if t < a - slack || t > b + slack {
            return Err(Error::OutOfDomain { t, lo: a, hi: b });
        }
        Ok(())
    }

    /// Area of the fiber over `t`: `ω_{n−1}·f^{n−1}/order`.
    pub fn fiber_area(&self, t: f64) -> f64 {
        sphere_area(self.n - 1) * self.warp.value(t).powi(self.n as i32 - 1)
            / self.fiber.quotient_order() as f64
    }

    /// Density (per unit t) of the side boundary of a half-sphere fiber.
    pub fn side_boundary_density(&self, t: f64) -> f64 {
        if self.fiber.has_side_boundary() {
            sphere_area(self.n - 2) * self.warp.value(t).powi(self.n as i32 - 2)
        } else {
            0.0
        }
    }

    /// `R(t)·f(t)^{n−1}` in a division-free form, finite at poles.
    pub(crate) fn curvature_density(&self, t: f64) -> f64 {
        let n = self.n as i32;
        let [f, d1, d2, _] = self.warp.jet(t);
        (n - 1) as f64 * (-2.0 * d2 * f.powi(n - 2) + (n - 2) as f64 * (1.0 - d1 * d1) * f.powi(n - 3))
    }
}

/// Scalar curvature of the warped segment at `t`:
/// `R = (n−1)·[−2f″/f + (n−2)(1 − f′²)/f²]`.
///
/// At a smooth pole (`f = 0`, `|f′| = 1`, `f″ = 0`) the analytic limit
/// `−n(n−1)·f′·f‴` is returned.
pub fn scalar_curvature(seg: &WarpedSegment, t: f64) -> Result<f64> {
    seg.check_domain(t)?;
    let n = seg.n as f64;
    let [f, d1, d2, d3] = seg.warp.jet(t);
    let scale = 1.0 + seg.length();
    if f.abs() <= 1e-13 * scale {
        if (d1.abs() - 1.0).abs() > 1e-8 || d2.abs() > 1e-8 {
            return Err(Error::NotTwiceDifferentiable(t));
        }
        return Ok(-n * (n - 1.0) * d1 * d3);
    }
    Ok((n - 1.0) * (-2.0 * d2 / f + (n - 2.0) * (1.0 - d1 * d1) / (f * f)))
}

/// Condition imposed at one of the two ends of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndCondition {
    /// A genuine boundary component (the end fiber).
    Boundary,
    /// The warp closes smoothly at a pole.
    SmoothCap,
    /// The end is identified with the partner end (0 = start, 1 = finish).
    PeriodicJoin { partner: usize },
    /// The end fiber is identified with itself by the antipodal map.
    ReflectionQuotient,
    /// The model continues beyond this end but every admissible field vanishes
    /// there; used to truncate half-infinite cylinders.
    Truncated,
}

impl EndCondition {
    pub fn name(self) -> &'static str {
        match self {
            EndCondition::Boundary => "boundary",
            EndCondition::SmoothCap => "smooth_cap",
            EndCondition::PeriodicJoin { .. } => "periodic_join",
            EndCondition::ReflectionQuotient => "reflection_quotient",
            EndCondition::Truncated => "truncated",
        }
    }
}

/// Which end of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EndSide {
    Start,
    Finish,
}

impl EndSide {
    pub fn index(self) -> usize {
        match self {
            EndSide::Start => 0,
            EndSide::Finish => 1,
        }
    }
}

/// Segments glued end to end, two end conditions, and the multiplicity of
/// the covering this model is the base of.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelManifold {
    segments: Vec<WarpedSegment>,
    ends: [EndCondition; 2],
    covering_multiplicity: u32,
}

impl ModelManifold {
    pub fn new(segments: Vec<WarpedSegment>, ends: [EndCondition; 2], covering_multiplicity: u32) -> Result<Self> {
        let m = Self { segments, ends, covering_multiplicity };
        m.validate()?;
        Ok(m)
    }

    pub fn segments(&self) -> &[WarpedSegment] {
        &self.segments
    }

    pub fn ends(&self) -> [EndCondition; 2] {
        self.ends
    }

    pub fn end(&self, side: EndSide) -> EndCondition {
        self.ends[side.index()]
    }

    pub fn covering_multiplicity(&self) -> u32 {
        self.covering_multiplicity
    }

    pub fn dimension(&self) -> usize {
        self.segments[0].n
    }

    pub fn fiber(&self) -> Fiber {
        self.segments[0].fiber
    }

    pub fn span(&self) -> (f64, f64) {
        (self.segments[0].domain.0, self.segments.last().unwrap().domain.1)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.ends[0], EndCondition::PeriodicJoin { .. })
    }

    /// True if some boundary measure exists (boundary ends or side faces).
    pub fn has_boundary(&self) -> bool {
        self.fiber().has_side_boundary() || self.ends.contains(&EndCondition::Boundary)
    }

    /// Segment containing `t` (the left one at junctions).
    pub fn segment_at(&self, t: f64) -> Result<&WarpedSegment> {
        let (a, b) = self.span();
        self.segments
            .iter()
            .find(|s| t <= s.domain.1)
            .filter(|_| t >= a - 1e-12)
            .ok_or(Error::OutOfDomain { t, lo: a, hi: b })
    }

    /// Same model with every segment's fiber replaced.
    pub fn with_fiber(&self, fiber: Fiber) -> Result<Self> {
        let segments = self.segments.iter().map(|s| WarpedSegment { fiber, ..s.clone() }).collect();
        let k = if fiber == Fiber::Projective { self.covering_multiplicity.max(2) } else { self.covering_multiplicity };
        Self::new(segments, self.ends, k)
    }

    fn end_jet(&self, side: EndSide) -> (&WarpedSegment, [f64; 4]) {
        match side {
            EndSide::Start => {
                let s = &self.segments[0];
                (s, s.warp.jet(s.domain.0))
            }
            EndSide::Finish => {
                let s = self.segments.last().unwrap();
                (s, s.warp.jet(s.domain.1))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let first = self.segments.first().ok_or_else(|| Error::InvalidModel("no segments".into()))?;
        for s in &self.segments {
            s.validate()?;
            if s.n != first.n || s.fiber != first.fiber {
                return Err(Error::InvalidModel(
                    "all segments must share the dimension and the fiber".into(),
                ));
            }
        }
        if self.covering_multiplicity == 0 {
            return Err(Error::InvalidModel("covering multiplicity must be at least 1".into()));
        }
        for w in self.segments.windows(2) {
            let (l, r) = (&w[0], &w[1]);
            if (l.domain.1 - r.domain.0).abs() > JUNCTION_TOL {
                return Err(Error::InvalidModel(format!(
                    "segments are not contiguous: {} vs {}",
                    l.domain.1, r.domain.0
                )));
            }
            let (fl, fr) = (l.warp.value(l.domain.1), r.warp.value(r.domain.0));
            if (fl - fr).abs() > JUNCTION_TOL * (1.0 + fl.abs()) {
                return Err(Error::RadiusMismatch { left: fl, right: fr });
            }
        }
        let periodic = self.ends.iter().filter(|e| matches!(e, EndCondition::PeriodicJoin { .. })).count();
        match periodic {
            0 => {}
            2 => {
                if self.ends[0] != (EndCondition::PeriodicJoin { partner: 1 })
                    || self.ends[1] != (EndCondition::PeriodicJoin { partner: 0 })
                {
                    return Err(Error::InvalidModel("periodic ends must name each other as partners".into()));
                }
                let (_, a) = self.end_jet(EndSide::Start);
                let (_, b) = self.end_jet(EndSide::Finish);
                if (a[0] - b[0]).abs() > JUNCTION_TOL || (a[1] - b[1]).abs() > 1e-6 {
                    return Err(Error::InvalidModel(
                        "periodic join requires matching warp values and slopes".into(),
                    ));
                }
            }
            _ => return Err(Error::InvalidModel("a periodic join needs both ends".into())),
        }
        for side in [EndSide::Start, EndSide::Finish] {
            let (seg, [f, d1, d2, _]) = self.end_jet(side);
            let scale = 1.0 + seg.length();
            match self.end(side) {
                EndCondition::SmoothCap => {
                    if f.abs() > 1e-9 * scale || (d1.abs() - 1.0).abs() > 1e-6 || d2.abs() > 1e-6 {
                        return Err(Error::InvalidModel(format!(
                            "smooth cap needs f → 0, |f′| → 1, f″ → 0 (got f = {f}, f′ = {d1}, f″ = {d2})"
                        )));
                    }
                }
                EndCondition::ReflectionQuotient => {
                    if !(f > 0.0) || d1.abs() > 1e-9 {
                        return Err(Error::InvalidModel(
                            "reflection quotient needs a totally geodesic end fiber (f > 0, f′ = 0)".into(),
                        ));
                    }
                }
                EndCondition::Boundary | EndCondition::Truncated => {
                    if !(f > 0.0) {
                        return Err(Error::InvalidModel("boundary end must have positive radius".into()));
                    }
                }
                EndCondition::PeriodicJoin { .. } => {}
            }
        }
        Ok(())
    }
}

/// Mean curvature (average of principal curvatures, outward normal) of a
/// boundary end: `H = s·f′/f` with `s = +1` at the finish end and `−1` at the start.
pub fn boundary_mean_curvature(m: &ModelManifold, side: EndSide) -> Result<f64> {
    if m.end(side) != EndCondition::Boundary {
        return Err(Error::NotABoundary);
    }
    let (_, [f, d1, _, _]) = m.end_jet(side);
    let s = match side {
        EndSide::Start => -1.0,
        EndSide::Finish => 1.0,
    };
    Ok(s * d1 / f)
}

pub fn fiber_area(seg: &WarpedSegment, t: f64) -> Result<f64> {
    seg.check_domain(t)?;
    Ok(seg.fiber_area(t))
}

const QUAD_PANELS: usize = 256;

/// Riemannian volume of the model.
pub fn volume(m: &ModelManifold) -> f64 {
    m.segments
        .iter()
        .map(|s| integrate(|t| s.fiber_area(t), s.domain.0, s.domain.1, QUAD_PANELS))
        .sum()
}

/// Total boundary area: boundary end fibers plus side faces of half-sphere fibers.
pub fn boundary_area(m: &ModelManifold) -> f64 {
    let mut area = 0.0;
    for side in [EndSide::Start, EndSide::Finish] {
        if m.end(side) == EndCondition::Boundary {
            let (seg, jet) = m.end_jet(side);
            area += sphere_area(seg.n - 1) * jet[0].powi(seg.n as i32 - 1) / seg.fiber.quotient_order() as f64;
        }
    }
    if m.fiber().has_side_boundary() {
        area += m
            .segments
            .iter()
            .map(|s| integrate(|t| s.side_boundary_density(t), s.domain.0, s.domain.1, QUAD_PANELS))
            .sum::<f64>();
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn curvature_examples() {
        let s3 = round_sphere(3).unwrap();
        let r = scalar_curvature(&s3.segments()[0], PI / 4.0).unwrap();
        assert!((r - 6.0).abs() < 1e-12);
        let cyl = cylinder(3, 2.0).unwrap();
        assert!((scalar_curvature(&cyl.segments()[0], 0.7).unwrap() - 2.0).abs() < 1e-15);
        let ball = unit_ball(4).unwrap();
        assert!(scalar_curvature(&ball.segments()[0], 0.5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn curvature_at_poles_uses_limit() {
        let s4 = round_sphere(4).unwrap();
        assert!((scalar_curvature(&s4.segments()[0], 0.0).unwrap() - 12.0).abs() < 1e-12);
        assert!((scalar_curvature(&s4.segments()[0], PI).unwrap() - 12.0).abs() < 1e-9);
        let ball = unit_ball(3).unwrap();
        assert_eq!(scalar_curvature(&ball.segments()[0], 0.0).unwrap(), 0.0);
        let s = &s4.segments()[0];
        assert!(matches!(scalar_curvature(s, 4.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn sphere_curvature_constant_at_all_nodes() {
        for n in 3..=6 {
            let m = round_sphere(n).unwrap();
            let target = (n * (n - 1)) as f64;
            for k in 1..512 {
                let t = PI * k as f64 / 512.0;
                assert!((scalar_curvature(&m.segments()[0], t).unwrap() - target).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mean_curvature_examples() {
        let ball = unit_ball(3).unwrap();
        assert!((boundary_mean_curvature(&ball, EndSide::Finish).unwrap() - 1.0).abs() < 1e-15);
        let hemi = hemisphere(4).unwrap();
        assert_eq!(boundary_mean_curvature(&hemi, EndSide::Finish).unwrap(), 0.0);
        let cyl = cylinder(3, 1.0).unwrap();
        assert_eq!(boundary_mean_curvature(&cyl, EndSide::Start).unwrap(), 0.0);
        assert_eq!(boundary_mean_curvature(&cyl, EndSide::Finish).unwrap(), 0.0);
        assert_eq!(boundary_mean_curvature(&hemi, EndSide::Start), Err(Error::NotABoundary));
        let cap = sphere_minus_cap(3, PI / 3.0).unwrap();
        let h = boundary_mean_curvature(&cap, EndSide::Finish).unwrap();
        assert!((h - (PI / 3.0).cos() / (PI / 3.0).sin()).abs() < 1e-14);
    }

    #[test]
    fn closed_form_volumes() {
        assert!(rel(volume(&round_sphere(3).unwrap()), 2.0 * PI * PI) < 1e-10);
        let h = hemisphere(3).unwrap();
        assert!(rel(volume(&h), PI * PI) < 1e-10);
        assert!(rel(boundary_area(&h), 4.0 * PI) < 1e-10);
        let q = quotient_product(3, 5.0).unwrap();
        assert!(rel(volume(&q), 2.0 * PI * 5.0) < 1e-12);
        assert_eq!(boundary_area(&q), 0.0);
        for n in 3..=6 {
            assert!(rel(volume(&round_sphere(n).unwrap()), sphere_area(n)) < 1e-10);
        }
        let hc = hemi_cylinder(3, 2.0).unwrap();
        // two half-disc ends of area 2π each and a side strip 2π·2
        assert!(rel(boundary_area(&hc), 2.0 * 2.0 * PI + 2.0 * PI * 2.0) < 1e-12);
    }

    #[test]
    fn rejects_bad_models() {
        let seg = WarpedSegment::new(3, Warp::Constant { radius: 1.0 }, (0.0, 1.0), Fiber::Sphere).unwrap();
        assert!(ModelManifold::new(vec![seg.clone()], [EndCondition::SmoothCap, EndCondition::Boundary], 1).is_err());
        assert!(ModelManifold::new(
            vec![seg.clone()],
            [EndCondition::PeriodicJoin { partner: 1 }, EndCondition::Boundary],
            1
        )
        .is_err());
        let other = WarpedSegment::new(3, Warp::Constant { radius: 2.0 }, (1.0, 2.0), Fiber::Sphere).unwrap();
        assert!(matches!(
            ModelManifold::new(vec![seg, other], [EndCondition::Boundary; 2], 1),
            Err(Error::RadiusMismatch { .. })
        ));
        assert!(WarpedSegment::new(2, Warp::unit_sine(), (0.0, 1.0), Fiber::Sphere).is_err());
        assert!(WarpedSegment::new(3, Warp::unit_sine(), (0.0, 4.0), Fiber::Sphere).is_err());
    }
}
