//! Test-function constructions: reflection, covering lifts, the combining
//! function, best-slice search and the cut-and-extend test function.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::functional::{constraint, energy, DiscretizedField, SegmentField};
use crate::geometry::{covering_unwrap, neck_segment, EndCondition, ModelManifold, Warp, WarpedSegment};
use crate::numeric::linear_fit;

/// Extends a field on the hemisphere `[0, π/2]` evenly across the equator to
/// the round sphere `[0, π]`. The grid is mirrored, so every cell has an
/// exact mirror image.
pub fn reflect_extend(u: &DiscretizedField) -> Result<DiscretizedField> {
    let [seg] = u.segments.as_slice() else {
        return Err(Error::GridMismatch("expected a single hemisphere segment".into()));
    };
    let last = *seg.t.last().unwrap();
    if seg.t[0].abs() > 1e-12 || (last - FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!("hemisphere grid spans [{}, {last}]", seg.t[0])));
    }
    let m = seg.t.len();
    let mut t = seg.t.clone();
    let mut v = seg.u.clone();
    *t.last_mut().unwrap() = FRAC_PI_2;
    for i in (0..m - 1).rev() {
        t.push(std::f64::consts::PI - seg.t[i]);
        v.push(seg.u[i]);
    }
    *t.last_mut().unwrap() = std::f64::consts::PI;
    Ok(DiscretizedField { segments: vec![SegmentField { t, u: v }] })
}

/// Lifts `u` to the `k`-fold cover of `m` (see [`covering_unwrap`]): the lift
/// repeats `u` on every fundamental domain.
pub fn lift_to_cover(m: &ModelManifold, u: &DiscretizedField, k: u32) -> Result<(ModelManifold, DiscretizedField)> {
    let cover = covering_unwrap(m, k)?;
    if u.segments.len() != m.segments().len() {
        return Err(Error::GridMismatch("field does not match the base model".into()));
    }
    if !m.is_periodic() {
        // fiber unwrap: same base, same values
        return Ok((cover, u.clone()));
    }
    let (t0, t1) = m.span();
    let period = t1 - t0;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for j in 0..k {
        let shift = period * j as f64;
        for s in &u.segments {
            for (&t, &v) in s.t.iter().zip(&s.u) {
                let x = t + shift;
                if points.last().is_none_or(|&(p, _)| x > p + 1e-12 * (1.0 + x.abs())) {
                    points.push((x, v));
                }
            }
        }
    }
    let segments = cover
        .segments()
        .iter()
        .map(|seg| {
            let (a, b) = seg.domain;
            let tol = 1e-9 * (1.0 + b.abs());
            let (t, v): (Vec<f64>, Vec<f64>) =
                points.iter().filter(|(x, _)| *x >= a - tol && *x <= b + tol).cloned().unzip();
            let mut t = t;
            *t.first_mut().unwrap() = a;
            *t.last_mut().unwrap() = b;
            SegmentField { t, u: v }
        })
        .collect();
    Ok((cover, DiscretizedField { segments }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombiningInputs {
    pub y1: f64,
    pub y2: f64,
    pub n: usize,
    pub alpha: f64,
}

/// Exponent `s = (n−2)/(n−1)` of the combining function.
pub fn combining_exponent(n: usize) -> f64 {
    (n as f64 - 2.0) / (n as f64 - 1.0)
}

/// `f(α) = Y1·α^s + Y2·(1−α)^s`, the energy lower bound of a field whose
/// constraint mass splits as `α : 1−α` between two pieces.
pub fn combining_function(ci: CombiningInputs) -> Result<f64> {
    if ci.n < 3 || !(ci.y1 >= 0.0 && ci.y2 >= 0.0) || !(0.0..=1.0).contains(&ci.alpha) {
        return Err(Error::InvalidArgument(format!("{ci:?}")));
    }
    let s = combining_exponent(ci.n);
    Ok(ci.y1 * ci.alpha.powf(s) + ci.y2 * (1.0 - ci.alpha).powf(s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceSearchResult {
    /// Position of the best slice measured from the neck start, in `[0, l]`.
    pub t_l: f64,
    /// Model coordinate of the slice.
    pub position: f64,
    /// `(|f′|² + f²)·|fiber|` at the slice.
    pub slice_integral: f64,
    /// `(1/l)∫_neck (|f′|² + f²)·|fiber|`, which bounds the minimum.
    pub neck_average: f64,
    /// Constant of an `A/l` fit, filled in by family studies.
    pub fitted_a: Option<f64>,
    pub neck_length: f64,
}

/// Finds the neck slice minimizing `(|f′|² + f²)·|fiber|`.
///
/// Slopes at a node are the mean of the squared slopes of the adjacent
/// cells; the neck average is the trapezoid-weighted mean of the same nodal
/// values, so `slice_integral ≤ neck_average` holds exactly.
pub fn best_slice(m: &ModelManifold, f: &DiscretizedField) -> Result<SliceSearchResult> {
    let k = neck_segment(m).ok_or(Error::NoNeck)?;
    if f.segments.len() != m.segments().len() {
        return Err(Error::GridMismatch("field does not match the model".into()));
    }
    let seg = &m.segments()[k];
    let SegmentField { t, u } = &f.segments[k];
    if t.len() < 2 {
        return Err(Error::GridMismatch("neck needs at least one cell".into()));
    }
    let slopes: Vec<f64> = (0..t.len() - 1).map(|i| ((u[i + 1] - u[i]) / (t[i + 1] - t[i])).powi(2)).collect();
    let values: Vec<f64> = (0..t.len())
        .map(|i| {
            let d = match i {
                0 => slopes[0],
                i if i == t.len() - 1 => slopes[i - 1],
                i => 0.5 * (slopes[i - 1] + slopes[i]),
            };
            (d + u[i] * u[i]) * seg.fiber_area(t[i])
        })
        .collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let l = seg.domain.1 - seg.domain.0;
    let mut integral = 0.0;
    for i in 0..t.len() - 1 {
        integral += 0.5 * (t[i + 1] - t[i]) * (values[i] + values[i + 1]);
    }
    Ok(SliceSearchResult {
        t_l: t[best] - seg.domain.0,
        position: t[best],
        slice_integral: values[best],
        neck_average: integral / l,
        fitted_a: None,
        neck_length: l,
    })
}

/// Least-squares fit of `y ≈ A·x^{−β}` on log–log axes; returns `(A, β)`.
/// Requires at least two strictly positive points.
pub fn fit_power_decay(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 || pts.len() != x.len() {
        return None;
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, intercept) = linear_fit(&lx, &ly);
    Some((intercept.exp(), -slope))
}

/// The cut-and-extend test function: two components, each a part of the
/// glued model plus a unit cylinder on which the field decays linearly from
/// the slice trace to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct KobayashiExtension {
    pub components: Vec<ModelManifold>,
    pub fields: Vec<DiscretizedField>,
    /// Value of the field at the cut.
    pub slice_trace: f64,
}

impl KobayashiExtension {
    pub fn energy(&self) -> Result<f64> {
        self.components.iter().zip(&self.fields).map(|(m, u)| Ok(energy(m, u)?.total)).sum()
    }

    pub fn constraint(&self, a: f64, b: f64) -> Result<f64> {
        self.components.iter().zip(&self.fields).map(|(m, u)| constraint(m, u, a, b)).sum()
    }
}

const DECAY_CELLS: usize = 8;

/// Cuts `m_bar` at neck position `t_l` (from the neck start) and attaches a
/// unit cylinder to each cut face, extending `f_l` by `(1−s)·f̃` there.
pub fn kobayashi_test_function(m_bar: &ModelManifold, f_l: &DiscretizedField, t_l: f64) -> Result<KobayashiExtension> {
    let k = neck_segment(m_bar).ok_or(Error::NoNeck)?;
    if f_l.segments.len() != m_bar.segments().len() {
        return Err(Error::GridMismatch("field does not match the model".into()));
    }
    let neck = &m_bar.segments()[k];
    let (s0, s1) = neck.domain;
    let l = s1 - s0;
    if !(t_l >= -1e-12 && t_l <= l + 1e-12) || k == 0 || k + 1 == m_bar.segments().len() {
        return Err(Error::SliceOutsideNeck { t: t_l, lo: 0.0, hi: l });
    }
    let cut = (s0 + t_l).clamp(s0, s1);
    let nf = &f_l.segments[k];
    let trace = f_l.value_at(cut).unwrap();
    let tol = 1e-12 * (1.0 + cut.abs());
    let (n, fiber, radius) = (neck.n, neck.fiber, neck.warp.value(cut));
    let cyl = |a: f64, b: f64| WarpedSegment::new(n, Warp::Constant { radius }, (a, b), fiber);

    // left piece: everything up to the cut, then the decay cylinder
    let mut segs_a: Vec<WarpedSegment> = m_bar.segments()[..k].to_vec();
    let mut field_a: Vec<SegmentField> = f_l.segments[..k].to_vec();
    if cut > s0 + tol {
        let (mut t, mut u): (Vec<f64>, Vec<f64>) =
            nf.t.iter().zip(&nf.u).filter(|(x, _)| **x < cut - tol).map(|(x, v)| (*x, *v)).unzip();
        t.push(cut);
        u.push(trace);
        segs_a.push(cyl(s0, cut)?);
        field_a.push(SegmentField { t, u });
    }
    segs_a.push(cyl(cut, cut + 1.0)?);
    field_a.push(decay(cut, 1.0, trace));

    let mut segs_b = vec![cyl(cut - 1.0, cut)?];
    let mut field_b = vec![decay(cut, -1.0, trace)];
    if cut < s1 - tol {
        let (mut t, mut u): (Vec<f64>, Vec<f64>) =
            nf.t.iter().zip(&nf.u).filter(|(x, _)| **x > cut + tol).map(|(x, v)| (*x, *v)).unzip();
        t.insert(0, cut);
        u.insert(0, trace);
        segs_b.push(cyl(cut, s1)?);
        field_b.push(SegmentField { t, u });
    }
    segs_b.extend_from_slice(&m_bar.segments()[k + 1..]);
    field_b.extend_from_slice(&f_l.segments[k + 1..]);

    let ends = m_bar.ends();
    let mult = m_bar.covering_multiplicity();
    let a = ModelManifold::new(segs_a, [ends[0], EndCondition::Truncated], mult)?;
    let b = ModelManifold::new(segs_b, [EndCondition::Truncated, ends[1]], mult)?;
    Ok(KobayashiExtension {
        components: vec![a, b],
        fields: vec![DiscretizedField { segments: field_a }, DiscretizedField { segments: field_b }],
        slice_trace: trace,
    })
}

/// Linear decay from `trace` at `cut` to zero at `cut + dir`.
fn decay(cut: f64, dir: f64, trace: f64) -> SegmentField {
    let (mut t, mut u): (Vec<f64>, Vec<f64>) = (0..=DECAY_CELLS)
        .map(|i| {
            let s = i as f64 / DECAY_CELLS as f64;
            (cut + dir * s, trace * (1.0 - s))
        })
        .unzip();
    if dir < 0.0 {
        t.reverse();
        u.reverse();
    }
    SegmentField { t, u }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{normalize, Mesh};
    use crate::geometry::{capped_neck, hemisphere, quotient_product, round_sphere, schoen_product};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reflection_doubles_everything() {
        let h = hemisphere(3).unwrap();
        let s = round_sphere(3).unwrap();
        let u = DiscretizedField::from_fn(&h, 64, |t| 1.0 + t * t).unwrap();
        let v = reflect_extend(&u).unwrap();
        let (eh, es) = (energy(&h, &u).unwrap(), energy(&s, &v).unwrap());
        assert!((es.total - 2.0 * eh.total).abs() < 1e-10 * es.total);
        assert!((es.interior_mass - 2.0 * eh.interior_mass).abs() < 1e-10 * es.interior_mass);
        let c = reflect_extend(&DiscretizedField::constant(&h, 8, 3.0).unwrap()).unwrap();
        assert!(c.segments[0].u.iter().all(|&x| x == 3.0));
    }

    #[test]
    fn lifts_scale_by_k() {
        let q = quotient_product(3, 4.0).unwrap();
        let u = DiscretizedField::from_fn(&q, 40, |t| 2.0 + (t * std::f64::consts::FRAC_PI_2).cos()).unwrap();
        let (cover, lift) = lift_to_cover(&q, &u, 2).unwrap();
        let (e0, e1) = (energy(&q, &u).unwrap(), energy(&cover, &lift).unwrap());
        assert!((e1.total - 2.0 * e0.total).abs() < 1e-10 * e1.total);

        let s = schoen_product(3, 2.0).unwrap();
        let u = DiscretizedField::from_fn(&s, 40, |t| 2.0 + (t * std::f64::consts::PI).cos()).unwrap();
        let (cover, lift) = lift_to_cover(&s, &u, 3).unwrap();
        let (e0, e1) = (energy(&s, &u).unwrap(), energy(&cover, &lift).unwrap());
        assert!((e1.total - 3.0 * e0.total).abs() < 1e-10 * e1.total);
        assert!((e1.interior_mass - 3.0 * e0.interior_mass).abs() < 1e-10 * e1.interior_mass);
        let v = normalize(&s, &u, 1.0, 0.0).unwrap();
        let (_, lv) = lift_to_cover(&s, &v, 3).unwrap();
        assert!((constraint(&cover, &lv, 1.0, 0.0).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn combining_examples() {
        let f = |y1, y2, n, alpha| combining_function(CombiningInputs { y1, y2, n, alpha }).unwrap();
        assert_eq!(f(2.0, 5.0, 4, 0.0), 5.0);
        assert_eq!(f(2.0, 5.0, 4, 1.0), 2.0);
        assert!((f(1.0, 1.0, 3, 0.5) - 2f64.sqrt()).abs() < 1e-15);
        assert!(combining_function(CombiningInputs { y1: -1.0, y2: 1.0, n: 3, alpha: 0.5 }).is_err());
    }

    /// Brute force over splits of a fixed field: the energy of a field whose
    /// constraint mass is α, in a problem where constants are optimal, equals
    /// `α^{2/q}·Y`. A competing exponent `2/p` would undercut it.
    #[test]
    fn combining_exponent_from_scaling() {
        let h = hemisphere(3).unwrap();
        let u = DiscretizedField::constant(&h, 16, 1.0).unwrap();
        let y = energy(&h, &normalize(&h, &u, 0.0, 1.0).unwrap()).unwrap().total;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let alpha: f64 = rng.gen_range(0.01..1.0);
            let v = normalize(&h, &u, 0.0, 1.0 / alpha).unwrap();
            let e = energy(&h, &v).unwrap().total;
            assert!((e - alpha.powf(combining_exponent(3)) * y).abs() < 1e-10 * y);
            assert!(e < alpha.powf(2.0 / 6.0) * y);
        }
    }

    #[test]
    fn slice_of_constant_field() {
        let m = capped_neck(3, 6.0, false).unwrap();
        let u = DiscretizedField::constant(&m, 30, 2.0).unwrap();
        let r = best_slice(&m, &u).unwrap();
        assert_eq!(r.t_l, 0.0);
        assert!((r.slice_integral - 4.0 * 4.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(r.slice_integral <= r.neck_average + 1e-12);
        assert_eq!(best_slice(&hemisphere(3).unwrap(), &DiscretizedField::constant(&hemisphere(3).unwrap(), 4, 1.0).unwrap()), Err(Error::NoNeck));
    }

    #[test]
    fn extension_keeps_energy_and_adds_decay() {
        let m = capped_neck(3, 5.0, false).unwrap();
        let u = DiscretizedField::from_fn(&m, 50, |t| 1.0 + 0.1 * t).unwrap();
        let r = best_slice(&m, &u).unwrap();
        let ext = kobayashi_test_function(&m, &u, r.t_l).unwrap();
        let e = energy(&m, &u).unwrap();
        let tr = ext.slice_trace;
        let fiber = 4.0 * std::f64::consts::PI;
        // two unit cylinders: c_n·tr²·|fiber| + R·tr²·|fiber|/3 each
        let extra = 2.0 * tr * tr * fiber * (8.0 + 2.0 / 3.0);
        assert!((ext.energy().unwrap() - e.total - extra).abs() < 1e-9 * e.total);
        assert!(ext.constraint(1.0, 0.0).unwrap() >= e.interior_mass);
        for (c, f) in ext.components.iter().zip(&ext.fields) {
            Mesh::from_grids(c, f.segments.iter().map(|s| s.t.clone()).collect()).unwrap();
        }
        assert!(matches!(kobayashi_test_function(&m, &u, 7.0), Err(Error::SliceOutsideNeck { .. })));
    }

    #[test]
    fn zero_trace_adds_nothing() {
        let m = capped_neck(3, 4.0, true).unwrap();
        let (s0, s1) = m.segments()[1].domain;
        let mid = 0.5 * (s0 + s1);
        let u = DiscretizedField::from_fn(&m, 40, |t| (t - mid).abs()).unwrap();
        let ext = kobayashi_test_function(&m, &u, mid - s0).unwrap();
        assert_eq!(ext.slice_trace, 0.0);
        let e = energy(&m, &u).unwrap().total;
        assert!((ext.energy().unwrap() - e).abs() < 1e-10 * e);
    }

    #[test]
    fn power_fit_recovers_exponent() {
        let x = [5.0, 10.0, 20.0, 40.0];
        let y: Vec<f64> = x.iter().map(|l| 3.0 / l).collect();
        let (a, beta) = fit_power_decay(&x, &y).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (beta - 1.0).abs() < 1e-12);
        assert_eq!(fit_power_decay(&x, &[1.0, 0.0, 1.0, 1.0]), None);
    }
}
