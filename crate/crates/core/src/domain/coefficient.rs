use serde::{Deserialize, Serialize};

use super::SpaceTimeGrid;
use crate::error::{invalid, Result};

/// Diffusion coefficient `a(x)` on `[0,1]`, positive in the interior.
///
/// All evaluators are closed-form; none of them differentiates numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DegenerateCoefficient {
    /// `a(x) = x^beta (1-x)^delta` with `beta, delta >= 2`.
    Power { beta: f64, delta: f64 },
    /// `a(x) = x (1-x)`.
    WrightFischer,
    /// `a(x) = gamma^2 x^2 / 2`, degenerate at `x = 0` only.
    QuadraticOil { gamma: f64 },
    /// `a(x) = 1`; non-degenerate reference case.
    Uniform,
}

impl Default for DegenerateCoefficient {
    fn default() -> Self {
        DegenerateCoefficient::Power {
            beta: 2.0,
            delta: 2.0,
        }
    }
}

impl DegenerateCoefficient {
    pub fn power(beta: f64, delta: f64) -> Result<Self> {
        let c = DegenerateCoefficient::Power { beta, delta };
        c.validate()?;
        Ok(c)
    }

    pub fn quadratic_oil(gamma: f64) -> Result<Self> {
        let c = DegenerateCoefficient::QuadraticOil { gamma };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DegenerateCoefficient::Power { beta, delta } => {
                if !(beta.is_finite() && beta >= 2.0) {
                    return Err(invalid("beta", format!("{beta} must be >= 2")));
                }
                if !(delta.is_finite() && delta >= 2.0) {
                    return Err(invalid("delta", format!("{delta} must be >= 2")));
                }
            }
            DegenerateCoefficient::QuadraticOil { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(invalid("gamma", format!("{gamma} must be positive")));
                }
            }
            DegenerateCoefficient::WrightFischer | DegenerateCoefficient::Uniform => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DegenerateCoefficient::Power { .. } => "power",
            DegenerateCoefficient::WrightFischer => "wright_fischer",
            DegenerateCoefficient::QuadraticOil { .. } => "quadratic_oil",
            DegenerateCoefficient::Uniform => "uniform",
        }
    }

    /// `a(x)`.
    pub fn a(&self, x: f64) -> f64 {
        match *self {
            DegenerateCoefficient::Power { beta, delta } => x.powf(beta) * (1.0 - x).powf(delta),
            DegenerateCoefficient::WrightFischer => x * (1.0 - x),
            DegenerateCoefficient::QuadraticOil { gamma } => 0.5 * gamma * gamma * x * x,
            DegenerateCoefficient::Uniform => 1.0,
        }
    }

    /// `a_x(x)`.
    pub fn a_x(&self, x: f64) -> f64 {
        match *self {
            DegenerateCoefficient::Power { beta, delta } => {
                let y = 1.0 - x;
                beta * x.powf(beta - 1.0) * y.powf(delta) - delta * x.powf(beta) * y.powf(delta - 1.0)
            }
            DegenerateCoefficient::WrightFischer => 1.0 - 2.0 * x,
            DegenerateCoefficient::QuadraticOil { gamma } => gamma * gamma * x,
            DegenerateCoefficient::Uniform => 0.0,
        }
    }

    /// `a_xx(x)`.
    pub fn a_xx(&self, x: f64) -> f64 {
        match *self {
            DegenerateCoefficient::Power { beta, delta } => {
                let y = 1.0 - x;
                beta * (beta - 1.0) * x.powf(beta - 2.0) * y.powf(delta)
                    - 2.0 * beta * delta * x.powf(beta - 1.0) * y.powf(delta - 1.0)
                    + delta * (delta - 1.0) * x.powf(beta) * y.powf(delta - 2.0)
            }
            DegenerateCoefficient::WrightFischer => -2.0,
            DegenerateCoefficient::QuadraticOil { gamma } => gamma * gamma,
            DegenerateCoefficient::Uniform => 0.0,
        }
    }

    /// `(a, a_x)` at `x`; at the endpoints these are the limit values.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        (self.a(x), self.a_x(x))
    }

    /// Logarithmic derivative `a_x / a` for `x` in the open interval.
    ///
    /// Evaluated from the closed form (e.g. `beta/x - delta/(1-x)`), never as the
    /// quotient of two small numbers.
    pub fn log_derivative(&self, x: f64) -> f64 {
        match *self {
            DegenerateCoefficient::Power { beta, delta } => beta / x - delta / (1.0 - x),
            DegenerateCoefficient::WrightFischer => 1.0 / x - 1.0 / (1.0 - x),
            DegenerateCoefficient::QuadraticOil { .. } => 2.0 / x,
            DegenerateCoefficient::Uniform => 0.0,
        }
    }

    /// Whether `a` vanishes at both endpoints.
    pub fn degenerates_at_both_ends(&self) -> bool {
        matches!(
            self,
            DegenerateCoefficient::Power { .. } | DegenerateCoefficient::WrightFischer
        )
    }

    /// `max_i |a_x(x_i)| / sqrt(a(x_i))` over the grid nodes, with the node index.
    pub fn derivative_bound(&self, grid: &SpaceTimeGrid) -> (f64, usize) {
        (0..grid.n_x())
            .map(|i| {
                let x = grid.x(i);
                (self.a_x(x).abs() / self.a(x).sqrt(), i)
            })
            .fold((0.0, 0), |acc, v| if v.0 > acc.0 { v } else { acc })
    }

    /// `a` sampled at the grid nodes.
    pub fn sample(&self, grid: &SpaceTimeGrid) -> Vec<f64> {
        (0..grid.n_x()).map(|i| self.a(grid.x(i))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn wright_fischer_midpoint() {
        let (a, ax) = DegenerateCoefficient::WrightFischer.eval(0.5);
        assert_eq!(a, 0.25);
        assert_eq!(ax, 0.0);
    }

    #[test]
    fn power_values() {
        let c = DegenerateCoefficient::power(2.0, 2.0).unwrap();
        assert_eq!(c.a(0.5), 0.0625);
        assert_eq!(c.eval(0.0), (0.0, 0.0));
        assert_eq!(c.eval(1.0), (0.0, 0.0));
    }

    #[test]
    fn rejects_small_exponents() {
        assert!(DegenerateCoefficient::power(1.5, 2.0).is_err());
        assert!(DegenerateCoefficient::power(2.0, 1.0).is_err());
        assert!(DegenerateCoefficient::quadratic_oil(0.0).is_err());
    }

    #[test]
    fn vanishes_monotonically_at_endpoints() {
        for c in [
            DegenerateCoefficient::WrightFischer,
            DegenerateCoefficient::power(2.0, 2.0).unwrap(),
            DegenerateCoefficient::power(3.0, 2.5).unwrap(),
        ] {
            let left: Vec<f64> = (1..=5).map(|k| c.a(k as f64 * 1e-3)).collect();
            assert!(left.windows(2).all(|w| w[0] < w[1]), "{c:?}");
            let right: Vec<f64> = (1..=5).map(|k| c.a(1.0 - k as f64 * 1e-3)).collect();
            assert!(right.windows(2).all(|w| w[0] < w[1]), "{c:?}");
            assert_eq!(c.a(0.0), 0.0);
            assert_eq!(c.a(1.0), 0.0);
            assert!(c.a(1e-3) > 0.0);
        }
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let cases = [
            DegenerateCoefficient::WrightFischer,
            DegenerateCoefficient::power(2.0, 2.0).unwrap(),
            DegenerateCoefficient::power(2.5, 3.0).unwrap(),
            DegenerateCoefficient::quadratic_oil(0.7).unwrap(),
        ];
        for c in cases {
            for &x in &[0.1, 0.33, 0.5, 0.81] {
                let e = 1e-6;
                let fd1 = (c.a(x + e) - c.a(x - e)) / (2.0 * e);
                assert!((fd1 - c.a_x(x)).abs() < 1e-8, "{c:?} a_x at {x}");
                let e = 1e-4;
                let fd2 = (c.a(x + e) - 2.0 * c.a(x) + c.a(x - e)) / (e * e);
                assert!((fd2 - c.a_xx(x)).abs() < 1e-6, "{c:?} a_xx at {x}");
                assert!((c.log_derivative(x) - c.a_x(x) / c.a(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn derivative_bound_finite_for_admissible_power() {
        let c = DegenerateCoefficient::power(2.0, 2.0).unwrap();
        let mut last = 0.0;
        for n in [32, 64, 128, 256] {
            let (b, _) = c.derivative_bound(&build_grid(n, 2, 1.0).unwrap());
            assert!(b.is_finite());
            // a_x / sqrt(a) -> 2 at the endpoints for beta = delta = 2
            assert!(b <= 2.0 + 1e-12);
            assert!(b >= last);
            last = b;
        }
    }
}
