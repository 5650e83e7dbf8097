//! Small numerical kernels shared by the geometry, functional and solver code.

use std::f64::consts::PI;

/// Five-point Gauss–Legendre rule on [0, 1] as (abscissa, weight) pairs.
pub const GAUSS5: [(f64, f64); 5] = [
    (0.046_910_077_030_668_004, 0.118_463_442_528_094_54),
    (0.230_765_344_947_158_45, 0.239_314_335_249_683_23),
    (0.5, 0.284_444_444_444_444_44),
    (0.769_234_655_052_841_6, 0.239_314_335_249_683_23),
    (0.953_089_922_969_332, 0.118_463_442_528_094_54),
];

/// Area of the unit round sphere S^k (so `sphere_area(2) = 4π`).
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area(k - 2),
    }
}

/// Composite Gauss–Legendre integral of `f` over [a, b] with `panels` panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + h * k as f64;
        for &(x, w) in GAUSS5.iter() {
            acc += w * f(lo + h * x);
        }
    }
    acc * h
}

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `sub[i]` couples row i to i-1 (sub[0] unused), `sup[i]` couples row i to i+1.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        c[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i];
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i + 1] * rhs[i + 1];
    }
}

/// Solves a cyclic tridiagonal system: as [`solve_tridiagonal`] plus the corner
/// couplings `corner_low` (row n-1, column 0) and `corner_high` (row 0, column n-1).
/// Uses the Sherman–Morrison correction; the matrix is assumed symmetric positive definite.
pub fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    corner_low: f64,
    corner_high: f64,
    rhs: &mut [f64],
) {
    let n = diag.len();
    if n < 3 {
        // dense fallback for degenerate sizes
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] += diag[i];
            if i + 1 < n {
                a[i][i + 1] += sup[i];
                a[i + 1][i] += sub[i + 1];
            }
        }
        if n == 2 {
            a[1][0] += corner_low;
            a[0][1] += corner_high;
        }
        dense_solve(a, rhs);
        return;
    }
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= corner_low * corner_high / gamma;
    solve_tridiagonal(sub, &d, sup, rhs);
    let mut z = vec![0.0; n];
    z[0] = gamma;
    z[n - 1] = corner_low;
    solve_tridiagonal(sub, &d, sup, &mut z);
    let fact = (rhs[0] + corner_high * rhs[n - 1] / gamma)
        / (1.0 + z[0] + corner_high * z[n - 1] / gamma);
    for i in 0..n {
        rhs[i] -= fact * z[i];
    }
}

fn dense_solve(mut a: Vec<Vec<f64>>, rhs: &mut [f64]) {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= a[row][k] * rhs[k];
        }
        rhs[row] = s / a[row][row];
    }
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 / 3.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gauss_is_exact_for_degree_nine() {
        let v = integrate(|x| x.powi(9), 0.0, 1.0, 1);
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cyclic_matches_dense() {
        let n = 7;
        let sub: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let sup: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * (i + 1) as f64).collect();
        let diag = vec![4.0; n];
        let (cl, ch) = (-0.5, -0.5);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        // b = A x
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] += diag[i] * x[i];
            if i > 0 {
                b[i] += sub[i] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += sup[i] * x[i + 1];
            }
        }
        b[n - 1] += cl * x[0];
        b[0] += ch * x[n - 1];
        solve_cyclic_tridiagonal(&sub, &diag, &sup, cl, ch, &mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
