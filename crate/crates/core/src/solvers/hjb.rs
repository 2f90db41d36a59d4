use super::{check_optional, column_or_zero, max_ratio, Tridiagonal};
use crate::domain::stencil::{d1_row, d2_row};
use crate::domain::{
    spatial_derivatives, time_derivative, DegenerateCoefficient, SpaceTimeField, SpaceTimeGrid,
};
use crate::error::{Error, Result};

/// Backward problem `u_t + a u_xx + d1 u_x = F`, `u = 0` on the boundary, `u(T) = h`.
#[derive(Debug, Clone)]
pub struct HjbLinearProblem {
    pub coefficient: DegenerateCoefficient,
    pub grid: SpaceTimeGrid,
    pub drift: SpaceTimeField,
    pub source: SpaceTimeField,
    pub terminal: Vec<f64>,
}

impl HjbLinearProblem {
    /// Zero drift, zero source, zero terminal data.
    pub fn new(coefficient: DegenerateCoefficient, grid: SpaceTimeGrid) -> Self {
        Self {
            coefficient,
            grid,
            drift: SpaceTimeField::zeros(&grid),
            source: SpaceTimeField::zeros(&grid),
            terminal: vec![0.0; grid.n_x()],
        }
    }

    pub fn with_drift(mut self, drift: SpaceTimeField) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_source(mut self, source: SpaceTimeField) -> Self {
        self.source = source;
        self
    }

    pub fn with_terminal(mut self, terminal: Vec<f64>) -> Self {
        self.terminal = terminal;
        self
    }

    /// `max |d1| / sqrt(a)` over the grid and where it is attained.
    pub fn drift_bound(&self) -> (f64, (usize, usize)) {
        max_ratio(&self.drift, &self.coefficient.sample(&self.grid), 0.5)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.coefficient.validate()?;
        if *self.drift.grid() != self.grid || *self.source.grid() != self.grid {
            return Err(Error::GridMismatch("HJB problem data"));
        }
        if self.terminal.len() != self.grid.n_x() {
            return Err(Error::ShapeMismatch {
                expected: (self.grid.n_x(), 1),
                found: (self.terminal.len(), 1),
            });
        }
        if !self.terminal.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("terminal data"));
        }
        if !self.drift.is_finite() || !self.source.is_finite() {
            return Err(Error::NonFinite("HJB coefficients"));
        }
        Ok(())
    }

    /// `I - dt (a D2 + d1^k D1)` at time level `k`.
    fn step_matrix(&self, a: &[f64], k: usize) -> Tridiagonal {
        let n = self.grid.n_x();
        let (h, dt) = (self.grid.h(), self.grid.dt());
        let mut m = Tridiagonal::with_size(n);
        for i in 0..n {
            let b = self.drift.get(i, k);
            let (l2, c2, u2) = d2_row(i, n, h);
            let (l1, c1, u1) = d1_row(i, n, h);
            m.lower[i] = -dt * (a[i] * l2 + b * l1);
            m.diag[i] = 1.0 - dt * (a[i] * c2 + b * c1);
            m.upper[i] = -dt * (a[i] * u2 + b * u1);
        }
        m
    }
}

/// Backward implicit Euler. `rhs_extra` is added to the source (used for coupling terms).
pub fn solve_hjb_linear(
    p: &HjbLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    p.validate()?;
    check_optional(&p.source, rhs_extra)?;
    let g = p.grid;
    let n = g.n_x();
    let dt = g.dt();
    let a = p.coefficient.sample(&g);
    let mut u = SpaceTimeField::zeros(&g);
    u.set_slice(g.n_t(), &p.terminal);
    let mut next = p.terminal.clone();
    for k in (0..g.n_t()).rev() {
        let extra = column_or_zero(rhs_extra, k, n);
        let rhs: Vec<f64> = (0..n)
            .map(|i| next[i] - dt * (p.source.get(i, k) + extra[i]))
            .collect();
        let cur = p
            .step_matrix(&a, k)
            .solve(&rhs)
            .map_err(|row| Error::SingularSystem { time_index: k, row })?;
        if !cur.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("HJB solution"));
        }
        u.set_slice(k, &cur);
        next = cur;
    }
    Ok(u)
}

/// Residual of the discrete scheme itself: zero (to rounding) on solver output.
///
/// Column `k < n_t` holds `(u^{k+1}-u^k)/dt + a D2 u^k + d1 D1 u^k - F^k - extra^k`;
/// column `n_t` holds the terminal mismatch.
pub fn hjb_scheme_residual(
    u: &SpaceTimeField,
    p: &HjbLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    p.validate()?;
    u.check_same_grid(&p.source)?;
    check_optional(u, rhs_extra)?;
    let g = p.grid;
    let n = g.n_x();
    let dt = g.dt();
    let a = p.coefficient.sample(&g);
    let mut r = SpaceTimeField::zeros(&g);
    for k in 0..g.n_t() {
        let extra = column_or_zero(rhs_extra, k, n);
        let mu = p.step_matrix(&a, k).apply(&u.slice(k));
        let col: Vec<f64> = (0..n)
            .map(|i| (u.get(i, k + 1) - mu[i]) / dt - p.source.get(i, k) - extra[i])
            .collect();
        r.set_slice(k, &col);
    }
    let term: Vec<f64> = (0..n).map(|i| u.get(i, g.n_t()) - p.terminal[i]).collect();
    r.set_slice(g.n_t(), &term);
    Ok(r)
}

/// `u_t + a u_xx + d1 u_x - F - extra` with second-order stencils in space and time.
pub fn apply_hjb_operator(
    u: &SpaceTimeField,
    p: &HjbLinearProblem,
    rhs_extra: Option<&SpaceTimeField>,
) -> Result<SpaceTimeField> {
    u.check_same_grid(&p.source)?;
    check_optional(u, rhs_extra)?;
    let a = p.coefficient.sample(&p.grid);
    let ut = time_derivative(u, 1)?;
    let (ux, uxx) = spatial_derivatives(u);
    let mut r = ut
        .add(&uxx.mul_profile(&a)?)?
        .add(&p.drift.mul(&ux)?)?
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
        let p = HjbLinearProblem::new(DegenerateCoefficient::WrightFischer, g);
        let u = solve_hjb_linear(&p, None).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_step_scheme_residual_vanishes() {
        let g = build_grid(32, 4, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let drift = SpaceTimeField::from_fn(&g, |x, t| 0.3 * (x * (1.0 - x)).sqrt() * (1.0 + t));
        let p = HjbLinearProblem::new(c, g)
            .with_terminal(c.sample(&g))
            .with_drift(drift);
        let u = solve_hjb_linear(&p, None).unwrap();
        let r = hjb_scheme_residual(&u, &p, None).unwrap();
        assert!(r.max_abs() < 1e-12, "{}", r.max_abs());
    }

    #[test]
    fn stationary_bubble_has_zero_operator_residual() {
        let g = build_grid(16, 8, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let src = SpaceTimeField::from_fn(&g, |x, _| -2.0 * x * (1.0 - x));
        let p = HjbLinearProblem::new(c, g).with_source(src);
        let u = SpaceTimeField::from_fn(&g, |x, _| x * (1.0 - x));
        let r = apply_hjb_operator(&u, &p, None).unwrap();
        assert!(r.max_abs() < 1e-10);
    }

    #[test]
    fn maximum_principle() {
        let g = build_grid(64, 32, 1.0).unwrap();
        for c in [DegenerateCoefficient::WrightFischer, DegenerateCoefficient::default()] {
            let h: Vec<f64> = g
                .nodes()
                .iter()
                .map(|x| c.a(*x) * (1.0 + (9.0 * x).sin()).max(0.0))
                .collect();
            let scale = h.iter().cloned().fold(0.0, f64::max);
            let u = solve_hjb_linear(&HjbLinearProblem::new(c, g).with_terminal(h), None).unwrap();
            assert!(u.values().iter().all(|&v| v >= -f64::EPSILON * scale));
        }
    }
}
