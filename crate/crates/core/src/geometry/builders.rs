//! Canonical model constructors and covering unwraps.

use std::f64::consts::PI;

use super::{EndCondition, Fiber, ModelManifold, Warp, WarpedSegment};
use crate::error::{Error, Result};

use EndCondition::*;

fn single(n: usize, warp: Warp, domain: (f64, f64), fiber: Fiber, ends: [EndCondition; 2], k: u32) -> Result<ModelManifold> {
    ModelManifold::new(vec![WarpedSegment::new(n, warp, domain, fiber)?], ends, k)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite (got {v})")))
    }
}

/// Round unit `S^n`: `f = sin t` on `[0, π]`, capped at both poles.
pub fn round_sphere(n: usize) -> Result<ModelManifold> {
    single(n, Warp::unit_sine(), (0.0, PI), Fiber::Sphere, [SmoothCap, SmoothCap], 1)
}

/// Round hemisphere `S^n_+` with its totally geodesic equator as boundary.
pub fn hemisphere(n: usize) -> Result<ModelManifold> {
    single(n, Warp::unit_sine(), (0.0, PI / 2.0), Fiber::Sphere, [SmoothCap, Boundary], 1)
}

/// Round `RP^n`: the hemisphere with its equator closed up antipodally.
pub fn projective_space(n: usize) -> Result<ModelManifold> {
    single(n, Warp::unit_sine(), (0.0, PI / 2.0), Fiber::Sphere, [SmoothCap, ReflectionQuotient], 2)
}

/// `S^n` with the polar cap `{t > t_cut}` removed.
pub fn sphere_minus_cap(n: usize, t_cut: f64) -> Result<ModelManifold> {
    if !(t_cut > 0.0 && t_cut < PI) {
        return Err(Error::InvalidArgument(format!("t_cut must lie in (0, π) (got {t_cut})")));
    }
    single(n, Warp::unit_sine(), (0.0, t_cut), Fiber::Sphere, [SmoothCap, Boundary], 1)
}

/// Flat unit ball `B^n` (conformal to the hemisphere).
pub fn unit_ball(n: usize) -> Result<ModelManifold> {
    single(n, Warp::Linear { slope: 1.0, offset: 0.0 }, (0.0, 1.0), Fiber::Sphere, [SmoothCap, Boundary], 1)
}

/// Product cylinder `[0, l] × S^{n−1}` with both ends as boundary.
pub fn cylinder(n: usize, l: f64) -> Result<ModelManifold> {
    positive("l", l)?;
    single(n, Warp::Constant { radius: 1.0 }, (0.0, l), Fiber::Sphere, [Boundary, Boundary], 1)
}

/// Hemi-cylinder `[0, l] × S^{n−1}_+`.
pub fn hemi_cylinder(n: usize, l: f64) -> Result<ModelManifold> {
    positive("l", l)?;
    single(n, Warp::Constant { radius: 1.0 }, (0.0, l), Fiber::HalfSphere, [Boundary, Boundary], 1)
}

/// `S^{n−1} × S^1` with round fibers and circle length `big_l`.
pub fn schoen_product(n: usize, big_l: f64) -> Result<ModelManifold> {
    positive("L", big_l)?;
    let ends = [PeriodicJoin { partner: 1 }, PeriodicJoin { partner: 0 }];
    single(n, Warp::Constant { radius: 1.0 }, (0.0, big_l), Fiber::Sphere, ends, 1)
}

/// `RP^{n−1} × S^1`, doubly covered by [`schoen_product`].
pub fn quotient_product(n: usize, big_l: f64) -> Result<ModelManifold> {
    positive("L", big_l)?;
    let ends = [PeriodicJoin { partner: 1 }, PeriodicJoin { partner: 0 }];
    single(n, Warp::Constant { radius: 1.0 }, (0.0, big_l), Fiber::Projective, ends, 2)
}

/// Joins two cores by a neck `[0, l] × fiber` of matching radius.
///
/// Each core must end (at its finish) in a boundary face; `core_b` is
/// attached reversed so that its start becomes the finish of the result.
pub fn glued_neck(core_a: &ModelManifold, core_b: &ModelManifold, l: f64) -> Result<ModelManifold> {
    positive("l", l)?;
    for core in [core_a, core_b] {
        if core.ends()[1] != Boundary || core.is_periodic() {
            return Err(Error::InvalidModel("a core must end in a boundary face to be glued".into()));
        }
    }
    if core_a.dimension() != core_b.dimension() || core_a.fiber() != core_b.fiber() {
        return Err(Error::InvalidModel("cores must share dimension and fiber".into()));
    }
    let (_, a_end) = core_a.span();
    let ra = core_a.segments().last().unwrap().warp.value(a_end);
    let (_, b_end) = core_b.span();
    let rb = core_b.segments().last().unwrap().warp.value(b_end);
    if (ra - rb).abs() > 1e-9 * (1.0 + ra.abs()) {
        return Err(Error::RadiusMismatch { left: ra, right: rb });
    }
    let n = core_a.dimension();
    let fiber = core_a.fiber();
    let mut segments = core_a.segments().to_vec();
    segments.push(WarpedSegment::new(n, Warp::Constant { radius: ra }, (a_end, a_end + l), fiber)?);
    let pivot = a_end + l + b_end;
    for s in core_b.segments().iter().rev() {
        let domain = (pivot - s.domain.1, pivot - s.domain.0);
        segments.push(WarpedSegment::new(n, s.warp.reflected(pivot), domain, fiber)?);
    }
    ModelManifold::new(segments, [core_a.ends()[0], core_b.ends()[0]], 1)
}

/// The standard connected-sum neck: two round hemispherical caps joined by a
/// unit cylinder of length `l`. With `half = true` every piece carries the
/// half-sphere fiber (a boundary connected sum).
pub fn capped_neck(n: usize, l: f64, half: bool) -> Result<ModelManifold> {
    let mut cap = hemisphere(n)?;
    if half {
        cap = cap.with_fiber(Fiber::HalfSphere)?;
    }
    glued_neck(&cap, &cap, l)
}

/// Neck segment index of a glued model: the unique constant-warp segment
/// strictly between two other segments (or the only constant segment).
pub fn neck_segment(m: &ModelManifold) -> Option<usize> {
    let segs = m.segments();
    let interior: Vec<usize> = (0..segs.len())
        .filter(|&i| matches!(segs[i].warp, Warp::Constant { .. }) && i > 0 && i + 1 < segs.len())
        .collect();
    if interior.len() == 1 {
        return Some(interior[0]);
    }
    let constants: Vec<usize> =
        (0..segs.len()).filter(|&i| matches!(segs[i].warp, Warp::Constant { .. })).collect();
    (constants.len() == 1).then(|| constants[0])
}

/// Unwraps the circle factor of a periodic model `k` times.
pub fn circle_unwrap(m: &ModelManifold, k: u32) -> Result<ModelManifold> {
    if !m.is_periodic() {
        return Err(Error::IncompatibleCovering("circle unwrap needs periodic ends".into()));
    }
    if k == 0 {
        return Err(Error::IncompatibleCovering("k must be at least 1".into()));
    }
    let (a, b) = m.span();
    let period = b - a;
    let mut segments: Vec<WarpedSegment> = Vec::new();
    for copy in 0..k {
        let dt = period * copy as f64;
        for s in m.segments() {
            let domain = (s.domain.0 + dt, s.domain.1 + dt);
            let warp = s.warp.shifted(dt);
            if let Some(last) = segments.last_mut() {
                if let (Warp::Constant { radius: r0 }, Warp::Constant { radius: r1 }) = (&last.warp, &warp) {
                    if r0 == r1 {
                        last.domain.1 = domain.1;
                        continue;
                    }
                }
            }
            segments.push(WarpedSegment { domain, warp, ..s.clone() });
        }
    }
    ModelManifold::new(segments, m.ends(), m.covering_multiplicity())
}

/// Unwraps a `k`-fold covering: the projective fiber for `k = 2`, otherwise
/// the circle factor of a periodic model.
pub fn covering_unwrap(m: &ModelManifold, k: u32) -> Result<ModelManifold> {
    if m.fiber() == Fiber::Projective {
        if k == 2 {
            let segments = m.segments().iter().map(|s| WarpedSegment { fiber: Fiber::Sphere, ..s.clone() }).collect();
            let ends = match m.ends() {
                [ReflectionQuotient, e] | [e, ReflectionQuotient] => {
                    return Err(Error::IncompatibleCovering(format!(
                        "fiber unwrap of a model with a reflection-quotient end ({}) is not a warped product",
                        e.name()
                    )))
                }
                e => e,
            };
            return ModelManifold::new(segments, ends, (m.covering_multiplicity() / 2).max(1));
        }
        if !m.is_periodic() {
            return Err(Error::IncompatibleCovering(format!("projective fiber admits only k = 2 (got {k})")));
        }
    }
    if m.is_periodic() {
        return circle_unwrap(m, k);
    }
    Err(Error::IncompatibleCovering("model has neither a projective fiber nor a circle factor".into()))
}

#[cfg(test)]
mod tests {
    use super::super::{boundary_area, volume};
    use super::*;

    #[test]
    fn builder_shapes() {
        let s = round_sphere(3).unwrap();
        assert_eq!(s.segments().len(), 1);
        assert_eq!(s.ends(), [SmoothCap, SmoothCap]);
        let p = schoen_product(3, 4.0).unwrap();
        assert_eq!(p.segments()[0].warp, Warp::Constant { radius: 1.0 });
        assert!(p.is_periodic());
        let q = quotient_product(3, 4.0).unwrap();
        assert_eq!(q.segments()[0].fiber_quotient_order(), 2);
        assert_eq!(q.covering_multiplicity(), 2);
        assert!(cylinder(3, 0.0).is_err());
        assert!(sphere_minus_cap(3, 4.0).is_err());
    }

    #[test]
    fn unwraps() {
        let q = quotient_product(3, 7.0).unwrap();
        let c = covering_unwrap(&q, 2).unwrap();
        assert_eq!(c, schoen_product(3, 7.0).unwrap());
        assert!((volume(&c) - 2.0 * volume(&q)).abs() < 1e-12);
        let s = schoen_product(3, 2.5).unwrap();
        let c3 = covering_unwrap(&s, 3).unwrap();
        assert_eq!(c3, schoen_product(3, 7.5).unwrap());
        assert!(covering_unwrap(&hemisphere(3).unwrap(), 2).is_err());
        assert!(covering_unwrap(&q, 3).is_ok());
        assert!(covering_unwrap(&projective_space(3).unwrap(), 2).is_err());
    }

    #[test]
    fn necks() {
        let m = capped_neck(3, 10.0, false).unwrap();
        assert_eq!(m.segments().len(), 3);
        assert_eq!(neck_segment(&m), Some(1));
        assert_eq!(m.ends(), [SmoothCap, SmoothCap]);
        let (a, b) = m.span();
        assert!((b - a - (PI + 10.0)).abs() < 1e-12);
        let v = volume(&m);
        assert!((v - (2.0 * PI * PI + 4.0 * PI * 10.0)).abs() < 1e-9);
        let h = capped_neck(3, 10.0, true).unwrap();
        assert!((volume(&h) - v / 2.0).abs() < 1e-9);
        // side boundary: two unit hemispheres of S² (area 2π each) plus a 2π·10 strip
        assert!((boundary_area(&h) - (4.0 * PI + 20.0 * PI)).abs() < 1e-9);
        let small = sphere_minus_cap(3, 1.0).unwrap();
        assert!(matches!(glued_neck(&small, &hemisphere(3).unwrap(), 1.0), Err(Error::RadiusMismatch { .. })));
    }
}
