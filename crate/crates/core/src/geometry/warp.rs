//! Warp functions `f(t)` of warped-product metrics `dt² + f(t)²·g_fiber`.

use crate::error::{Error, Result};
use crate::numeric::solve_tridiagonal;

/// Clamped cubic spline through `(t_i, f_i)` with prescribed end slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    start_slope: f64,
    end_slope: f64,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, start_slope: f64, end_slope: f64) -> Result<Self> {
        let m = knots.len();
        if m < 2 || values.len() != m {
            return Err(Error::InvalidModel(
                "spline needs at least two knots and one value per knot".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("spline knots must be strictly increasing".into()));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("spline data must be finite".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        diag[0] = 2.0 * h[0];
        sup[0] = h[0];
        rhs[0] = 6.0 * ((values[1] - values[0]) / h[0] - start_slope);
        for i in 1..m - 1 {
            sub[i] = h[i - 1];
            diag[i] = 2.0 * (h[i - 1] + h[i]);
            sup[i] = h[i];
            rhs[i] = 6.0
                * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        sub[m - 1] = h[m - 2];
        diag[m - 1] = 2.0 * h[m - 2];
        rhs[m - 1] = 6.0 * (end_slope - (values[m - 1] - values[m - 2]) / h[m - 2]);
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs);
        Ok(Self { knots, values, start_slope, end_slope, second: rhs })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end_slopes(&self) -> (f64, f64) {
        (self.start_slope, self.end_slope)
    }

    fn interval(&self, t: f64) -> usize {
        let m = self.knots.len();
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            i if i >= m => m - 2,
            i => i - 1,
        }
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let i = self.interval(t);
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let a = t1 - t;
        let b = t - t0;
        let f = m0 * a.powi(3) / (6.0 * h)
            + m1 * b.powi(3) / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b;
        let d1 = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0)
            + (y1 / h - m1 * h / 6.0);
        let d2 = m0 * a / h + m1 * b / h;
        let d3 = (m1 - m0) / h;
        [f, d1, d2, d3]
    }

    fn map_t(&self, map: impl Fn(f64) -> f64, reverse: bool) -> Self {
        let mut knots: Vec<f64> = self.knots.iter().map(|&t| map(t)).collect();
        let mut values = self.values.clone();
        let mut second = self.second.clone();
        let (mut s0, mut s1) = (self.start_slope, self.end_slope);
        if reverse {
            knots.reverse();
            values.reverse();
            second.reverse();
            (s0, s1) = (-s1, -s0);
        }
        Self { knots, values, start_slope: s0, end_slope: s1, second }
    }
}

/// Warp profile of one segment. All variants are C² on their domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Warp {
    /// `f(t) = radius`
    Constant { radius: f64 },
    /// `f(t) = radius·sin((t − shift)/radius)`: a round sphere of the given radius.
    Sine { radius: f64, shift: f64 },
    /// `f(t) = offset + slope·t`
    Linear { slope: f64, offset: f64 },
    Spline(CubicSpline),
}

impl Warp {
    pub fn unit_sine() -> Self {
        Warp::Sine { radius: 1.0, shift: 0.0 }
    }

    /// `[f, f′, f″, f‴]` at `t`.
    pub fn jet(&self, t: f64) -> [f64; 4] {
        match self {
            Warp::Constant { radius } => [*radius, 0.0, 0.0, 0.0],
            Warp::Sine { radius, shift } => {
                let (s, c) = snapped_sin_cos((t - shift) / radius);
                [radius * s, c, -s / radius, -c / (radius * radius)]
            }
            Warp::Linear { slope, offset } => [offset + slope * t, *slope, 0.0, 0.0],
            Warp::Spline(s) => s.eval(t),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.jet(t)[1]
    }

    /// The warp `t ↦ f(t − dt)`.
    pub fn shifted(&self, dt: f64) -> Self {
        match self {
            Warp::Constant { .. } => self.clone(),
            Warp::Sine { radius, shift } => Warp::Sine { radius: *radius, shift: shift + dt },
            Warp::Linear { slope, offset } => Warp::Linear { slope: *slope, offset: offset - slope * dt },
            Warp::Spline(s) => Warp::Spline(s.map_t(|t| t + dt, false)),
        }
    }

    /// The warp `t ↦ f(pivot − t)`.
    pub fn reflected(&self, pivot: f64) -> Self {
        match self {
            Warp::Constant { .. } => self.clone(),
            Warp::Sine { radius, shift } => Warp::Sine {
                radius: *radius,
                shift: pivot - shift - std::f64::consts::PI * radius,
            },
            Warp::Linear { slope, offset } => Warp::Linear { slope: -slope, offset: offset + slope * pivot },
            Warp::Spline(s) => Warp::Spline(s.map_t(|t| pivot - t, true)),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Warp::Constant { .. } => "constant",
            Warp::Sine { .. } => "sine",
            Warp::Linear { .. } => "linear",
            Warp::Spline(_) => "spline",
        }
    }

    /// Flat parameter list used by the model text format.
    ///
    /// spline: `[start_slope, end_slope, t0, f0, t1, f1, ...]`
    pub fn params(&self) -> Vec<f64> {
        match self {
            Warp::Constant { radius } => vec![*radius],
            Warp::Sine { radius, shift } => vec![*radius, *shift],
            Warp::Linear { slope, offset } => vec![*slope, *offset],
            Warp::Spline(s) => {
                let mut v = vec![s.start_slope, s.end_slope];
                for (t, f) in s.knots.iter().zip(&s.values) {
                    v.push(*t);
                    v.push(*f);
                }
                v
            }
        }
    }

    pub fn from_params(tag: &str, params: &[f64]) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidModel(format!("warp `{tag}`: {msg}"));
        match tag {
            "constant" => match params {
                [r] if *r > 0.0 => Ok(Warp::Constant { radius: *r }),
                _ => Err(bad("expects [radius > 0]")),
            },
            "sine" => match params {
                [r] if *r > 0.0 => Ok(Warp::Sine { radius: *r, shift: 0.0 }),
                [r, s] if *r > 0.0 => Ok(Warp::Sine { radius: *r, shift: *s }),
                _ => Err(bad("expects [radius > 0, shift]")),
            },
            "linear" => match params {
                [a] => Ok(Warp::Linear { slope: *a, offset: 0.0 }),
                [a, b] => Ok(Warp::Linear { slope: *a, offset: *b }),
                _ => Err(bad("expects [slope, offset]")),
            },
            "spline" => {
                if params.len() < 6 || !params.len().is_multiple_of(2) {
                    return Err(bad("expects [start_slope, end_slope, t0, f0, t1, f1, ...]"));
                }
                let (knots, values) = params[2..].chunks(2).map(|c| (c[0], c[1])).unzip();
                Ok(Warp::Spline(CubicSpline::new(knots, values, params[0], params[1])?))
            }
            other => Err(Error::InvalidModel(format!(
                "unknown warp `{other}` (expected constant, sine, linear or spline)"
            ))),
        }
    }
}

/// `sin_cos` that returns exact values at integer multiples of π/2, so that
/// equators are exactly totally geodesic and poles exactly closed.
fn snapped_sin_cos(x: f64) -> (f64, f64) {
    use std::f64::consts::FRAC_PI_2;
    let k = (x / FRAC_PI_2).round();
    if (x - k * FRAC_PI_2).abs() <= 1e-14 * x.abs().max(1.0) {
        match (k as i64).rem_euclid(4) {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        x.sin_cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spline_reproduces_cubic() {
        let p = |t: f64| 1.0 + 0.5 * t - 0.25 * t * t + 0.1 * t.powi(3);
        let dp = |t: f64| 0.5 - 0.5 * t + 0.3 * t * t;
        let knots: Vec<f64> = (0..9).map(|i| i as f64 * 0.4).collect();
        let values = knots.iter().map(|&t| p(t)).collect();
        let s = CubicSpline::new(knots.clone(), values, dp(0.0), dp(3.2)).unwrap();
        for t in [0.1, 0.77, 1.9, 3.1] {
            let j = s.eval(t);
            assert!((j[0] - p(t)).abs() < 1e-12);
            assert!((j[1] - dp(t)).abs() < 1e-11);
            assert!((j[2] - (-0.5 + 0.6 * t)).abs() < 1e-10);
            assert!((j[3] - 0.6).abs() < 1e-9);
        }
    }

    #[test]
    fn reflection_and_shift_are_consistent() {
        let w = Warp::Sine { radius: 1.0, shift: 0.0 };
        let r = w.reflected(5.0);
        for t in [3.0, 3.5, 4.2] {
            assert!((r.value(t) - w.value(5.0 - t)).abs() < 1e-14);
            assert!((r.slope(t) + w.slope(5.0 - t)).abs() < 1e-14);
        }
        let l = Warp::Linear { slope: 2.0, offset: 1.0 };
        assert!((l.shifted(1.5).value(2.0) - l.value(0.5)).abs() < 1e-15);
        assert!((l.reflected(3.0).value(1.0) - l.value(2.0)).abs() < 1e-15);
        let knots = vec![0.0, 0.5, 1.0, 1.5];
        let vals = knots.iter().map(|t: &f64| 1.0 + t.sin()).collect();
        let sp = Warp::Spline(CubicSpline::new(knots, vals, 1.0, 1.5f64.cos()).unwrap());
        let rs = sp.reflected(PI);
        for t in [PI - 1.4, PI - 0.3] {
            assert!((rs.value(t) - sp.value(PI - t)).abs() < 1e-13);
            assert!((rs.slope(t) + sp.slope(PI - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn params_round_trip() {
        let knots = vec![0.0, 1.0, 2.0];
        let s = Warp::Spline(CubicSpline::new(knots, vec![1.0, 1.2, 1.0], 0.0, 0.0).unwrap());
        for w in [Warp::Constant { radius: 2.0 }, Warp::unit_sine(), Warp::Linear { slope: 1.0, offset: 0.0 }, s] {
            let back = Warp::from_params(w.tag(), &w.params()).unwrap();
            assert_eq!(back, w);
        }
    }
}
