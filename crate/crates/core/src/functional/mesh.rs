//! Assembled quadrature for piecewise-linear fields on a model grid.
//!
//! Every integral is evaluated with five-point Gauss–Legendre per cell on the
//! piecewise-linear interpolant, so the discrete energy is (to quadrature
//! accuracy) the true energy of an H¹ test function. Nested grids therefore
//! give non-increasing discrete infima.

use crate::error::{Error, Result};
use crate::geometry::{boundary_mean_curvature, EndCondition, EndSide, ModelManifold};
use crate::numeric::{solve_cyclic_tridiagonal, solve_tridiagonal, sphere_area, GAUSS5};

#[derive(Clone, Debug)]
struct QuadPoint {
    xi: f64,
    vol: f64,
    curv: f64,
    side: f64,
}

#[derive(Clone, Debug)]
struct Cell {
    left: usize,
    right: usize,
    stiff: f64,
    quad: [QuadPoint; 5],
}

/// Point contribution at a node: boundary faces and metric kinks.
#[derive(Clone, Debug)]
struct PointTerm {
    dof: usize,
    /// Coefficient of u² in the energy.
    energy: f64,
    /// Weight of u^q in the boundary mass.
    mass: f64,
    is_boundary: bool,
}

/// Values of every functional and, optionally, their gradients.
#[derive(Clone, Debug, Default)]
pub(crate) struct Evaluation {
    pub gradient_term: f64,
    pub curvature_term: f64,
    pub boundary_term: f64,
    pub interior_mass: f64,
    pub boundary_mass: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    model: ModelManifold,
    pub(crate) p: f64,
    pub(crate) q: f64,
    grids: Vec<Vec<f64>>,
    node_dof: Vec<Vec<usize>>,
    ndof: usize,
    pinned: Vec<bool>,
    cells: Vec<Cell>,
    points: Vec<PointTerm>,
    periodic: bool,
    has_boundary_mass: bool,
}

impl Mesh {
    /// Uniform grid with `cells` cells on every segment.
    pub fn uniform(model: &ModelManifold, cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("a segment needs at least one cell".into()));
        }
        let grids = model
            .segments()
            .iter()
            .map(|s| {
                let (a, b) = s.domain;
                (0..=cells)
                    .map(|i| if i == cells { b } else { a + (b - a) * i as f64 / cells as f64 })
                    .collect()
            })
            .collect();
        Self::from_grids(model, grids)
    }

    /// Grid given explicitly per segment (strictly increasing, spanning the domain).
    pub fn from_grids(model: &ModelManifold, grids: Vec<Vec<f64>>) -> Result<Self> {
        let segs = model.segments();
        if grids.len() != segs.len() {
            return Err(Error::GridMismatch(format!(
                "{} grids for {} segments",
                grids.len(),
                segs.len()
            )));
        }
        for (g, s) in grids.iter().zip(segs) {
            if g.len() < 2 || g.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::GridMismatch("grid nodes must be strictly increasing".into()));
            }
            let tol = 1e-9 * (1.0 + s.domain.1.abs());
            if (g[0] - s.domain.0).abs() > tol || (g[g.len() - 1] - s.domain.1).abs() > tol {
                return Err(Error::GridMismatch(format!(
                    "grid [{}, {}] does not span segment [{}, {}]",
                    g[0],
                    g[g.len() - 1],
                    s.domain.0,
                    s.domain.1
                )));
            }
        }
        let n = model.dimension();
        let nf = n as f64;
        let p = 2.0 * nf / (nf - 2.0);
        let q = 2.0 * (nf - 1.0) / (nf - 2.0);
        let grad_coef = 4.0 * (nf - 1.0) / (nf - 2.0);
        let periodic = model.is_periodic();

        let mut node_dof = Vec::with_capacity(grids.len());
        let mut next = 0usize;
        for (k, g) in grids.iter().enumerate() {
            let mut d = Vec::with_capacity(g.len());
            for i in 0..g.len() {
                if i == 0 && k > 0 {
                    d.push(next - 1);
                } else {
                    d.push(next);
                    next += 1;
                }
            }
            node_dof.push(d);
        }
        let mut ndof = next;
        if periodic {
            let last = node_dof.last_mut().unwrap();
            *last.last_mut().unwrap() = 0;
            ndof -= 1;
        }

        let mut cells = Vec::new();
        for ((g, d), s) in grids.iter().zip(&node_dof).zip(segs) {
            let scale = sphere_area(n - 1) / s.fiber_quotient_order() as f64;
            for i in 0..g.len() - 1 {
                let (t0, h) = (g[i], g[i + 1] - g[i]);
                let quad = GAUSS5.map(|(xi, w)| {
                    let t = t0 + h * xi;
                    let wh = w * h;
                    QuadPoint {
                        xi,
                        vol: wh * s.fiber_area(t),
                        curv: wh * scale * s.curvature_density(t),
                        side: wh * s.side_boundary_density(t),
                    }
                });
                let vol: f64 = quad.iter().map(|qp| qp.vol).sum();
                cells.push(Cell { left: d[i], right: d[i + 1], stiff: grad_coef * vol / (h * h), quad });
            }
        }

        let mut points = Vec::new();
        let mut pinned = vec![false; ndof];
        let end_dof = |side: EndSide| match side {
            EndSide::Start => node_dof[0][0],
            EndSide::Finish => *node_dof.last().unwrap().last().unwrap(),
        };
        let kink = |left: &crate::geometry::WarpedSegment, right: &crate::geometry::WarpedSegment, tl: f64, tr: f64| {
            let [f, dl, _, _] = left.warp.jet(tl);
            let dr = right.warp.slope(tr);
            2.0 * (nf - 1.0) * (dl - dr) / f * left.fiber_area(tl)
        };
        for side in [EndSide::Start, EndSide::Finish] {
            let seg = if side == EndSide::Start { &segs[0] } else { segs.last().unwrap() };
            let t = if side == EndSide::Start { seg.domain.0 } else { seg.domain.1 };
            match model.end(side) {
                EndCondition::Boundary => {
                    let h = boundary_mean_curvature(model, side)?;
                    let area = seg.fiber_area(t);
                    points.push(PointTerm {
                        dof: end_dof(side),
                        energy: 2.0 * (nf - 1.0) * h * area,
                        mass: area,
                        is_boundary: true,
                    });
                }
                EndCondition::Truncated => pinned[end_dof(side)] = true,
                _ => {}
            }
        }
        for (k, w) in segs.windows(2).enumerate() {
            let e = kink(&w[0], &w[1], w[0].domain.1, w[1].domain.0);
            if e != 0.0 {
                points.push(PointTerm { dof: node_dof[k + 1][0], energy: e, mass: 0.0, is_boundary: false });
            }
        }
        if periodic {
            let last = segs.last().unwrap();
            let e = kink(last, &segs[0], last.domain.1, segs[0].domain.0);
            if e != 0.0 {
                points.push(PointTerm { dof: 0, energy: e, mass: 0.0, is_boundary: false });
            }
        }
        let has_boundary_mass = model.has_boundary();
        Ok(Self { model: model.clone(), p, q, grids, node_dof, ndof, pinned, cells, points, periodic, has_boundary_mass })
    }

    pub fn model(&self) -> &ModelManifold {
        &self.model
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn grids(&self) -> &[Vec<f64>] {
        &self.grids
    }

    pub(crate) fn pinned(&self) -> &[bool] {
        &self.pinned
    }

    pub(crate) fn has_boundary_mass(&self) -> bool {
        self.has_boundary_mass
    }

    /// Node position of every dof (first occurrence).
    pub fn dof_positions(&self) -> Vec<f64> {
        let mut pos = vec![f64::NAN; self.ndof];
        for (g, d) in self.grids.iter().zip(&self.node_dof) {
            for (t, &k) in g.iter().zip(d) {
                if pos[k].is_nan() {
                    pos[k] = *t;
                }
            }
        }
        pos
    }

    /// Gathers a per-segment field into the dof vector, checking continuity.
    pub fn gather(&self, segs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if segs.len() != self.grids.len() || segs.iter().zip(&self.grids).any(|(u, g)| u.len() != g.len()) {
            return Err(Error::GridMismatch("field values do not match the grid".into()));
        }
        let mut out = vec![f64::NAN; self.ndof];
        for (u, d) in segs.iter().zip(&self.node_dof) {
            for (&v, &k) in u.iter().zip(d) {
                if out[k].is_nan() {
                    out[k] = v;
                } else if (out[k] - v).abs() > 1e-12 * (1.0 + v.abs()) {
                    return Err(Error::InvalidField(format!(
                        "values disagree at a shared node ({} vs {v})",
                        out[k]
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Gathers per-segment values, taking the first value at shared nodes.
    pub(crate) fn gather_first(&self, segs: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![f64::NAN; self.ndof];
        for (u, d) in segs.iter().zip(&self.node_dof) {
            for (&v, &k) in u.iter().zip(d) {
                if out[k].is_nan() {
                    out[k] = v;
                }
            }
        }
        out
    }

    /// Scatters a dof vector into per-segment node values.
    pub fn scatter(&self, u: &[f64]) -> Vec<Vec<f64>> {
        self.node_dof.iter().map(|d| d.iter().map(|&k| u[k]).collect()).collect()
    }

    pub(crate) fn evaluate(&self, u: &[f64]) -> Evaluation {
        let mut ev = Evaluation::default();
        let (p, q) = (self.p, self.q);
        for c in &self.cells {
            let (ul, ur) = (u[c.left], u[c.right]);
            ev.gradient_term += c.stiff * (ur - ul) * (ur - ul);
            for qp in &c.quad {
                let v = ul + (ur - ul) * qp.xi;
                let a = v.abs();
                ev.curvature_term += qp.curv * v * v;
                ev.interior_mass += qp.vol * a.powf(p);
                if qp.side != 0.0 {
                    ev.boundary_mass += qp.side * a.powf(q);
                }
            }
        }
        for pt in &self.points {
            let v = u[pt.dof];
            if pt.is_boundary {
                ev.boundary_term += pt.energy * v * v;
            } else {
                ev.curvature_term += pt.energy * v * v;
            }
            ev.boundary_mass += pt.mass * v.abs().powf(q);
        }
        ev
    }

    /// Evaluation together with the gradients of the energy, the interior
    /// mass and the boundary mass.
    pub(crate) fn evaluate_with_gradients(
        &self,
        u: &[f64],
        de: &mut [f64],
        di: &mut [f64],
        db: &mut [f64],
    ) -> Evaluation {
        de.iter_mut().chain(di.iter_mut()).chain(db.iter_mut()).for_each(|x| *x = 0.0);
        let mut ev = Evaluation::default();
        let (p, q) = (self.p, self.q);
        for c in &self.cells {
            let (ul, ur) = (u[c.left], u[c.right]);
            let du = ur - ul;
            ev.gradient_term += c.stiff * du * du;
            de[c.left] -= 2.0 * c.stiff * du;
            de[c.right] += 2.0 * c.stiff * du;
            for qp in &c.quad {
                let v = ul + du * qp.xi;
                let a = v.abs();
                let (wl, wr) = (1.0 - qp.xi, qp.xi);
                ev.curvature_term += qp.curv * v * v;
                let ge = 2.0 * qp.curv * v;
                de[c.left] += ge * wl;
                de[c.right] += ge * wr;
                let ap = a.powf(p - 1.0);
                ev.interior_mass += qp.vol * ap * a;
                let gi = qp.vol * p * ap * v.signum();
                di[c.left] += gi * wl;
                di[c.right] += gi * wr;
                if qp.side != 0.0 {
                    let aq = a.powf(q - 1.0);
                    ev.boundary_mass += qp.side * aq * a;
                    let gb = qp.side * q * aq * v.signum();
                    db[c.left] += gb * wl;
                    db[c.right] += gb * wr;
                }
            }
        }
        for pt in &self.points {
            let v = u[pt.dof];
            if pt.is_boundary {
                ev.boundary_term += pt.energy * v * v;
            } else {
                ev.curvature_term += pt.energy * v * v;
            }
            de[pt.dof] += 2.0 * pt.energy * v;
            if pt.mass != 0.0 {
                let aq = v.abs().powf(q - 1.0);
                ev.boundary_mass += pt.mass * aq * v.abs();
                db[pt.dof] += pt.mass * q * aq * v.signum();
            }
        }
        ev
    }

    /// ∫u² dV.
    pub(crate) fn l2_mass(&self, u: &[f64]) -> f64 {
        self.cells
            .iter()
            .map(|c| {
                c.quad
                    .iter()
                    .map(|qp| {
                        let v = u[c.left] + (u[c.right] - u[c.left]) * qp.xi;
                        qp.vol * v * v
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// The H¹-type metric `grad + |curvature| + volume` used to precondition
    /// descent directions. Returns a solver closure.
    pub(crate) fn preconditioner(&self) -> SymTridiag {
        let m = self.ndof;
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m]; // off[i] couples i and i+1 (mod m when periodic)
        for c in &self.cells {
            diag[c.left] += c.stiff;
            diag[c.right] += c.stiff;
            let mut lumped_l = 0.0;
            let mut lumped_r = 0.0;
            for qp in &c.quad {
                let w = qp.vol + qp.curv.abs() + qp.side;
                lumped_l += w * (1.0 - qp.xi);
                lumped_r += w * qp.xi;
            }
            diag[c.left] += lumped_l;
            diag[c.right] += lumped_r;
            let (lo, hi) = (c.left.min(c.right), c.left.max(c.right));
            if hi == lo + 1 {
                off[lo] -= c.stiff;
            } else {
                off[hi] -= c.stiff; // periodic wrap: couples m-1 and 0
            }
        }
        for pt in &self.points {
            diag[pt.dof] += pt.energy.abs() + pt.mass;
        }
        let scale = diag.iter().cloned().fold(0.0, f64::max);
        for d in diag.iter_mut() {
            *d += 1e-12 * scale;
        }
        self.pinned_identity(diag, off)
    }

    /// Hessian of `E − μ(a·I + b·B)` at `u`.
    pub(crate) fn lagrangian_hessian(&self, u: &[f64], mu: f64, a: f64, b: f64) -> SymTridiag {
        let m = self.ndof;
        let (p, q) = (self.p, self.q);
        let (ci, cb) = (mu * a * p * (p - 1.0), mu * b * q * (q - 1.0));
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m];
        for c in &self.cells {
            let (ul, ur) = (u[c.left], u[c.right]);
            let (mut hll, mut hlr, mut hrr) = (2.0 * c.stiff, -2.0 * c.stiff, 2.0 * c.stiff);
            for qp in &c.quad {
                let v = (ul + (ur - ul) * qp.xi).abs();
                let mut w = 2.0 * qp.curv - ci * qp.vol * v.powf(p - 2.0);
                if qp.side != 0.0 {
                    w -= cb * qp.side * v.powf(q - 2.0);
                }
                let (fl, fr) = (1.0 - qp.xi, qp.xi);
                hll += w * fl * fl;
                hlr += w * fl * fr;
                hrr += w * fr * fr;
            }
            diag[c.left] += hll;
            diag[c.right] += hrr;
            let (lo, hi) = (c.left.min(c.right), c.left.max(c.right));
            if hi == lo + 1 {
                off[lo] += hlr;
            } else {
                off[hi] += hlr;
            }
        }
        for pt in &self.points {
            diag[pt.dof] += 2.0 * pt.energy;
            if pt.mass != 0.0 {
                diag[pt.dof] -= cb * pt.mass * u[pt.dof].abs().powf(q - 2.0);
            }
        }
        self.pinned_identity(diag, off)
    }

    fn pinned_identity(&self, mut diag: Vec<f64>, mut off: Vec<f64>) -> SymTridiag {
        let m = self.ndof;
        for (k, &pin) in self.pinned.iter().enumerate() {
            if pin {
                diag[k] = 1.0;
                if k + 1 < m || self.periodic {
                    off[k] = 0.0;
                }
                if k > 0 {
                    off[k - 1] = 0.0;
                } else if self.periodic {
                    off[m - 1] = 0.0;
                }
            }
        }
        SymTridiag { diag, off, periodic: self.periodic }
    }
}

pub(crate) struct SymTridiag {
    diag: Vec<f64>,
    off: Vec<f64>,
    periodic: bool,
}

impl SymTridiag {
    /// Solves `A x = rhs` in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let m = self.diag.len();
        let mut sub = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for i in 0..m.saturating_sub(1) {
            sup[i] = self.off[i];
            sub[i + 1] = self.off[i];
        }
        if self.periodic && m > 1 {
            let c = self.off[m - 1];
            solve_cyclic_tridiagonal(&sub, &self.diag, &sup, c, c, rhs);
        } else {
            solve_tridiagonal(&sub, &self.diag, &sup, rhs);
        }
    }
}

impl SymTridiag {
    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.diag.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..m.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        if self.periodic && m > 1 {
            y[m - 1] += self.off[m - 1] * x[0];
            y[0] += self.off[m - 1] * x[m - 1];
        }
        y
    }
}
