use super::{check_optional, column_or_zero, max_ratio, Tridiagonal};
use crate::domain::stencil::{d1_row, d2_row, Closure};
use crate::domain::{
    spatial_derivatives, spatial_derivatives_with, time_derivative, DegenerateCoefficient,
    SpaceTimeField, SpaceTimeGrid,
};
use crate::error::{Error, Result};

/// Forward problem `m_t - (a m)_xx + c1 m_x = b m + G`, `a m = 0` on the boundary, `m(0) = m0`.
///
/// Solved through `v = a m`, which satisfies
/// `v_t - a v_xx + c1 v_x - (c1 a_x / a + b) v = a G` with `v = 0` on the boundary.
#[derive(Debug, Clone)]
pub struct FpLinearProblem {
    pub coefficient: DegenerateCoefficient,
    pub grid: SpaceTimeGrid,
    pub drift: SpaceTimeField,
    pub reaction: SpaceTimeField,
    pub source: SpaceTimeField,
    pub initial: Vec<f64>,
}

impl FpLinearProblem {
    pub fn new(coefficient: DegenerateCoefficient, grid: SpaceTimeGrid) -> Self {
        Self {
            coefficient,
            grid,
            drift: SpaceTimeField::zeros(&grid),
            reaction: SpaceTimeField::zeros(&grid),
            source: SpaceTimeField::zeros(&grid),
            initial: vec![0.0; grid.n_x()],
        }
    }

    pub fn with_drift(mut self, drift: SpaceTimeField) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_reaction(mut self, reaction: SpaceTimeField) -> Self {
        self.reaction = reaction;
        self
    }

    pub fn with_source(mut self, source: SpaceTimeField) -> Self {
        self.source = source;
        self
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Self {
        self.initial = initial;
        self
    }

    /// `max |c1| / sqrt(a)` and where it is attained.
    pub fn drift_bound(&self) -> (f64, (usize, usize)) {
        max_ratio(&self.drift, &self.coefficient.sample(&self.grid), 0.5)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.coefficient.validate()?;
        let g = self.grid;
        if *self.drift.grid() != g || *self.reaction.grid() != g || *self.source.grid() != g {
            return Err(Error::GridMismatch("FP problem data"));
        }
        if self.initial.len() != g.n_x() {
            return Err(Error::ShapeMismatch {
                expected: (g.n_x(), 1),
                found: (self.initial.len(), 1),
            });
        }
        if !self.initial.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("initial data"));
        }
        if !self.drift.is_finite() || !self.reaction.is_finite() || !self.source.is_finite() {
            return Err(Error::NonFinite("FP coefficients"));
        }
        Ok(())
    }

    /// `I + dt (-a D2 + c1 D1 - (c1 a_x/a + b))` at time level `k`.
    fn step_matrix(&self, a: &[f64], log_da: &[f64], k: usize) -> Tridiagonal {
        let n = self.grid.n_x();
        let (h, dt) = (self.grid.h(), self.grid.dt());
        let mut m = Tridiagonal::with_size(n);
        for i in 0..n {
            let c = self.drift.get(i, k);
            let zeroth = c * log_da[i] + self.reaction.get(i, k);
            let (l2, c2, u2) = d2_row(i, n, h);
            let (l1, c1, u1) = d1_row(i, n, h);
            m.lower[i] = dt * (-a[i] * l2 + c * l1);
            m.diag[i] = 1.0 + dt * (-a[i] * c2 + c * c1 - zeroth);
            m.upper[i] = dt * (-a[i] * u2 + c * u1);
        }
        m
    }
}

fn log_derivative(p: &FpLinearProblem) -> Vec<f64> {
    p.grid
        .nodes()
        .iter()
        .map(|&x| p.coefficient.log_derivative(x))
        .collect()
}

/// Forward implicit Euler on `v = a m`; returns `m = v / a` with `m(0) = m0` exactly.
pub fn solve_fp_linear(
    p: &FpLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    p.validate()?;
    check_optional(&p.source, rhs_extra)?;
    let g = p.grid;
    let n = g.n_x();
    let dt = g.dt();
    let a = p.coefficient.sample(&g);
    let lda = log_derivative(p);
    let mut m = SpaceTimeField::zeros(&g);
    m.set_slice(0, &p.initial);
    let mut prev: Vec<f64> = p.initial.iter().zip(&a).map(|(m, a)| a * m).collect();
    for k in 1..=g.n_t() {
        let extra = column_or_zero(rhs_extra, k, n);
        let rhs: Vec<f64> = (0..n)
            .map(|i| prev[i] + dt * a[i] * (p.source.get(i, k) + extra[i]))
            .collect();
        let v = p
            .step_matrix(&a, &lda, k)
            .solve(&rhs)
            .map_err(|row| Error::SingularSystem { time_index: k, row })?;
        if !v.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("FP solution"));
        }
        let col: Vec<f64> = v.iter().zip(&a).map(|(v, a)| v / a).collect();
        m.set_slice(k, &col);
        prev = v;
    }
    Ok(m)
}

/// Residual of the discrete `v`-scheme evaluated on `v = a m`, in `v` units.
///
/// Column `k >= 1` holds `(v^k - v^{k-1})/dt - a D2 v^k + c1 D1 v^k - (c1 a_x/a + b) v^k - a (G + extra)`;
/// column 0 holds the initial mismatch `a (m^0 - m0)`.
pub fn fp_scheme_residual(
    m: &SpaceTimeField,
    p: &FpLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    p.validate()?;
    m.check_same_grid(&p.source)?;
    check_optional(m, rhs_extra)?;
    let g = p.grid;
    let n = g.n_x();
    let dt = g.dt();
    let a = p.coefficient.sample(&g);
    let lda = log_derivative(p);
    let v = m.mul_profile(&a)?;
    let mut r = SpaceTimeField::zeros(&g);
    let init: Vec<f64> = (0..n).map(|i| a[i] * (m.get(i, 0) - p.initial[i])).collect();
    r.set_slice(0, &init);
    for k in 1..=g.n_t() {
        let extra = column_or_zero(rhs_extra, k, n);
        let mv = p.step_matrix(&a, &lda, k).apply(&v.slice(k));
        let col: Vec<f64> = (0..n)
            .map(|i| {
                (mv[i] - v.get(i, k - 1)) / dt - a[i] * (p.source.get(i, k) + extra[i])
            })
            .collect();
        r.set_slice(k, &col);
    }
    Ok(r)
}

/// `m_t - (a m)_xx + c1 m_x - b m - G - extra` with second-order stencils.
///
/// `(a m)_xx` is stenciled on the product field with the Dirichlet closure, `m_x`
/// with the one-sided closure since `m` itself carries no boundary condition.
pub fn apply_fp_operator(
    m: &SpaceTimeField,
    p: &FpLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    m.check_same_grid(&p.source)?;
    check_optional(m, rhs_extra)?;
    let a = p.coefficient.sample(&p.grid);
    let mt = time_derivative(m, 1)?;
    let (_, vxx) = spatial_derivatives(&m.mul_profile(&a)?);
    let (mx, _) = spatial_derivatives_with(m, Closure::Extrapolate);
    let mut r = mt
        .sub(&vxx)?
        .add(&p.drift.mul(&mx)?)?
        .sub(&p.reaction.mul(m)?)?
        .sub(&p.source)?;
    if let Some(e) = rhs_extra {
        r = r.sub(e)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn zero_data_gives_bit_exact_zero() {
        let g = build_grid(16, 8, 1.0).unwrap();
        let p = FpLinearProblem::new(DegenerateCoefficient::default(), g);
        let m = solve_fp_linear(&p, None).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scheme_residual_vanishes_on_output() {
        let g = build_grid(48, 16, 0.5).unwrap();
        let c = DegenerateCoefficient::default();
        let drift = SpaceTimeField::from_fn(&g, |x, _| 0.4 * x * (1.0 - x));
        let reaction = SpaceTimeField::from_fn(&g, |x, t| 0.2 * (x + t));
        let src = SpaceTimeField::from_fn(&g, |x, t| (3.0 * x).sin() * (1.0 - t));
        let p = FpLinearProblem::new(c, g)
            .with_drift(drift)
            .with_reaction(reaction)
            .with_source(src)
            .with_initial(g.nodes().iter().map(|x| 1.0 + x).collect());
        let m = solve_fp_linear(&p, None).unwrap();
        let r = fp_scheme_residual(&m, &p, None).unwrap();
        assert!(r.max_abs() < 1e-11, "{}", r.max_abs());
    }

    #[test]
    fn divergence_of_bubble_product() {
        // a m = 3 x (1-x)  =>  (a m)_xx = -6
        let g = build_grid(16, 8, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let m = SpaceTimeField::from_fn(&g, |_, _| 3.0);
        let src = SpaceTimeField::from_fn(&g, |_, _| 6.0);
        let p = FpLinearProblem::new(c, g).with_source(src);
        let r = apply_fp_operator(&m, &p, None).unwrap();
        assert!(r.max_abs() < 1e-9, "{}", r.max_abs());
    }

    #[test]
    fn stationary_state_is_held() {
        // (a m)_xx = G with a m = x(1-x) sin(pi x)-like profile, m_t = 0
        let g = build_grid(128, 32, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let pi = std::f64::consts::PI;
        let mstar = |x: f64| 2.0 + (pi * x).cos();
        // v = a m, v_xx = a'' m + 2 a' m' + a m''
        let gsrc = move |x: f64| {
            let (a, ax, axx) = (x * (1.0 - x), 1.0 - 2.0 * x, -2.0);
            let (m, mx, mxx) = (mstar(x), -pi * (pi * x).sin(), -pi * pi * (pi * x).cos());
            -(axx * m + 2.0 * ax * mx + a * mxx)
        };
        let p = FpLinearProblem::new(c, g)
            .with_source(SpaceTimeField::from_fn(&g, move |x, _| gsrc(x)))
            .with_initial(g.nodes().iter().map(|&x| mstar(x)).collect());
        let m = solve_fp_linear(&p, None).unwrap();
        let drift = (0..g.n_x()).fold(0.0, |acc, i| {
            f64::max(acc, (c.a(g.x(i)) * (m.get(i, g.n_t()) - mstar(g.x(i)))).abs())
        });
        assert!(drift < 1e-3, "{drift}");
    }
}
