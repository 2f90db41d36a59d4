//! Second-order finite-difference stencils on the cell-centered grid.
//!
//! The first and last nodes sit half a cell away from the boundary. Under
//! [`Closure::Dirichlet`] the boundary value 0 enters as ghost data at offset
//! `h/2`, which gives a three-point stencil on the nodes `{-h/2, 0, h}`; these
//! are exactly the rows the implicit solvers assemble, so stenciled residuals
//! and solver output agree to rounding.

use ndarray::Array2;

use super::{SpaceTimeField, SpaceTimeGrid};
use crate::error::{Error, Result};

/// How the stencil treats the first and last nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Homogeneous Dirichlet data at `x = 0, 1` used as ghost values
    /// (for `u` and for `v = a m`).
    #[default]
    Dirichlet,
    /// One-sided second-order differences from interior nodes only
    /// (for fields with no boundary condition, such as `m` or `p`).
    Extrapolate,
}

/// Tridiagonal row `(lower, diag, upper)` of the first-derivative stencil at node `i`.
///
/// Only meaningful for [`Closure::Dirichlet`]; the one-sided extrapolating
/// stencils are wider than three points.
pub fn d1_row(i: usize, n: usize, h: f64) -> (f64, f64, f64) {
    if i == 0 {
        (0.0, 1.0 / h, 1.0 / (3.0 * h))
    } else if i == n - 1 {
        (-1.0 / (3.0 * h), -1.0 / h, 0.0)
    } else {
        (-0.5 / h, 0.0, 0.5 / h)
    }
}

/// Tridiagonal row of the second-derivative stencil at node `i` (Dirichlet closure).
pub fn d2_row(i: usize, n: usize, h: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    if i == 0 {
        (0.0, -4.0 / h2, 4.0 / (3.0 * h2))
    } else if i == n - 1 {
        (4.0 / (3.0 * h2), -4.0 / h2, 0.0)
    } else {
        (1.0 / h2, -2.0 / h2, 1.0 / h2)
    }
}

fn apply_row(f: &[f64], i: usize, (lo, di, up): (f64, f64, f64)) -> f64 {
    let n = f.len();
    let mut s = di * f[i];
    if i > 0 {
        s += lo * f[i - 1];
    }
    if i + 1 < n {
        s += up * f[i + 1];
    }
    s
}

/// First derivative of a spatial profile.
pub fn d1(f: &[f64], h: f64, closure: Closure) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| match closure {
            Closure::Extrapolate if i == 0 => (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            Closure::Extrapolate if i == n - 1 => {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            }
            _ => apply_row(f, i, d1_row(i, n, h)),
        })
        .collect()
}

/// Second derivative of a spatial profile.
pub fn d2(f: &[f64], h: f64, closure: Closure) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    (0..n)
        .map(|i| match closure {
            Closure::Extrapolate if i == 0 => {
                (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
            }
            Closure::Extrapolate if i == n - 1 => {
                (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2
            }
            _ => apply_row(f, i, d2_row(i, n, h)),
        })
        .collect()
}

/// `(f_x, f_xx)` with the Dirichlet closure.
pub fn spatial_derivatives(f: &SpaceTimeField) -> (SpaceTimeField, SpaceTimeField) {
    spatial_derivatives_with(f, Closure::Dirichlet)
}

pub fn spatial_derivatives_with(
    f: &SpaceTimeField,
    closure: Closure,
) -> (SpaceTimeField, SpaceTimeField) {
    let g = *f.grid();
    let h = g.h();
    let mut fx = SpaceTimeField::zeros(&g);
    let mut fxx = SpaceTimeField::zeros(&g);
    for k in 0..=g.n_t() {
        let col = f.slice(k);
        fx.set_slice(k, &d1(&col, h, closure));
        fxx.set_slice(k, &d2(&col, h, closure));
    }
    (fx, fxx)
}

/// Finite-difference weights (Fornberg's recursion) for derivatives `0..=order`
/// at `z` from the nodes `xs`. Returns `w[d][j]`.
pub fn fornberg_weights(z: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Stencil window `[start, start + width)` for the `order`-th time derivative at level `k`.
fn time_window(k: usize, n_levels: usize, order: usize) -> (usize, usize) {
    let centered = if order <= 2 { 3 } else { 5 };
    let half = centered / 2;
    if k >= half && k + half < n_levels {
        (k - half, centered)
    } else {
        let width = order + 2;
        let start = if k < half { 0 } else { n_levels - width };
        (start, width)
    }
}

/// `order`-th time derivative (1..=3), second order everywhere including `t = 0, T`.
pub fn time_derivative(f: &SpaceTimeField, order: usize) -> Result<SpaceTimeField> {
    if !(1..=3).contains(&order) {
        return Err(crate::error::invalid("order", format!("{order} not in 1..=3")));
    }
    let g = *f.grid();
    if g.n_t() < order + 2 {
        return Err(Error::GridTooCoarse(format!(
            "time derivative of order {order} needs n_t >= {}, got {}",
            order + 2,
            g.n_t()
        )));
    }
    let n_levels = g.n_t() + 1;
    let dt = g.dt();
    let src = f.values();
    let mut out = Array2::zeros(src.dim());
    for k in 0..n_levels {
        let (start, width) = time_window(k, n_levels, order);
        let nodes: Vec<f64> = (start..start + width).map(|j| j as f64 - k as f64).collect();
        let w = fornberg_weights(0.0, &nodes, order);
        let scale = dt.powi(order as i32);
        for (j, &wj) in w[order].iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            let coeff = wj / scale;
            let mut dst = out.column_mut(k);
            dst.scaled_add(coeff, &src.column(start + j));
        }
    }
    SpaceTimeField::from_array(&g, out)
}

/// Samples `f` at the grid nodes.
pub fn sample_profile(grid: &SpaceTimeGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..grid.n_x()).map(|i| f(grid.x(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use std::f64::consts::PI;

    fn max_err(a: &[f64], b: &[f64], skip: usize) -> f64 {
        let n = a.len();
        (skip..n - skip).fold(0.0, |m, i| f64::max(m, (a[i] - b[i]).abs()))
    }

    #[test]
    fn fornberg_matches_central_weights() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        let b = fornberg_weights(0.0, &[-0.5, 0.0, 1.0], 2);
        let rows = (d1_row(0, 8, 1.0), d2_row(0, 8, 1.0));
        assert!((b[1][1] - rows.0 .1).abs() < 1e-14 && (b[1][2] - rows.0 .2).abs() < 1e-14);
        assert!((b[2][1] - rows.1 .1).abs() < 1e-14 && (b[2][2] - rows.1 .2).abs() < 1e-14);
    }

    #[test]
    fn linear_and_quadratic_exactness() {
        let g = build_grid(16, 2, 1.0).unwrap();
        let lin = sample_profile(&g, |x| x);
        let fx = d1(&lin, g.h(), Closure::Extrapolate);
        let fxx = d2(&lin, g.h(), Closure::Extrapolate);
        assert!(fx.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(fxx.iter().all(|v| v.abs() < 1e-9));
        let quad = sample_profile(&g, |x| x * x);
        assert!(d2(&quad, g.h(), Closure::Extrapolate)
            .iter()
            .all(|v| (v - 2.0).abs() < 1e-9));
        // the Dirichlet closure is exact for quadratics vanishing at both ends
        let bubble = sample_profile(&g, |x| x * (1.0 - x));
        let bx = d1(&bubble, g.h(), Closure::Dirichlet);
        let bxx = d2(&bubble, g.h(), Closure::Dirichlet);
        for i in 0..16 {
            assert!((bx[i] - (1.0 - 2.0 * g.x(i))).abs() < 1e-11);
            assert!((bxx[i] + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constants_annihilated_in_the_interior() {
        let c = vec![3.5; 12];
        let fx = d1(&c, 0.1, Closure::Dirichlet);
        let fxx = d2(&c, 0.1, Closure::Dirichlet);
        assert!(fx[1..11].iter().all(|&v| v == 0.0));
        assert!(fxx[1..11].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_second_derivative_is_second_order() {
        let err = |n: usize| {
            let g = build_grid(n, 2, 1.0).unwrap();
            let f = sample_profile(&g, |x| (PI * x).sin());
            let exact = sample_profile(&g, |x| -PI * PI * (PI * x).sin());
            max_err(&d2(&f, g.h(), Closure::Dirichlet), &exact, 1)
        };
        let ratio = err(64) / err(128);
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn time_derivatives_of_polynomials() {
        let g = build_grid(4, 8, 1.0).unwrap();
        let t1 = SpaceTimeField::from_fn(&g, |_, t| t);
        let t2 = SpaceTimeField::from_fn(&g, |_, t| t * t);
        let t3 = SpaceTimeField::from_fn(&g, |_, t| t * t * t);
        assert!(time_derivative(&t1, 1).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(time_derivative(&t2, 2).unwrap().values().iter().all(|v| (v - 2.0).abs() < 1e-10));
        assert!(time_derivative(&t3, 3).unwrap().values().iter().all(|v| (v - 6.0).abs() < 1e-8));
        let coarse = build_grid(4, 3, 1.0).unwrap();
        assert!(time_derivative(&SpaceTimeField::zeros(&coarse), 2).is_err());
    }

    #[test]
    fn exponential_time_derivative_is_second_order() {
        let err = |n_t: usize| {
            let g = build_grid(4, n_t, 1.0).unwrap();
            let f = SpaceTimeField::from_fn(&g, |_, t| t.exp());
            let d = time_derivative(&f, 1).unwrap();
            (0..=n_t).fold(0.0, |m, k| f64::max(m, (d.get(0, k) - g.t(k).exp()).abs()))
        };
        let ratio = err(32) / err(64);
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }
}
