use serde::Serialize;

use super::MfgSolution;
use crate::domain::stencil::Closure;
use crate::domain::{
    spatial_derivatives, spatial_derivatives_with, DegenerateCoefficient, SpaceTimeField,
    SpaceTimeGrid,
};
use crate::error::{Error, Result};

/// Lower-order coefficients of both systems.
///
/// The nonlinear system reads
/// `u_t + a u_xx - (p/2) u_x^2 + d m = F`, `m_t - (a m)_xx - (p m u_x)_x = G`;
/// the linearized one
/// `u_t + a u_xx + d1 u_x = d2 m + F`, `m_t - (a m)_xx + c1 m_x = b m + c2 u_x + rho u_xx + G`.
#[derive(Debug, Clone)]
pub struct MfgCoefficients {
    pub p: SpaceTimeField,
    pub d: SpaceTimeField,
    pub d1: SpaceTimeField,
    pub d2: SpaceTimeField,
    pub c1: SpaceTimeField,
    pub c2: SpaceTimeField,
    pub b: SpaceTimeField,
    pub rho: SpaceTimeField,
}

impl MfgCoefficients {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        let z = SpaceTimeField::zeros(grid);
        Self {
            p: z.clone(),
            d: z.clone(),
            d1: z.clone(),
            d2: z.clone(),
            c1: z.clone(),
            c2: z.clone(),
            b: z.clone(),
            rho: z,
        }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        self.p.grid()
    }

    pub(crate) fn check_grid(&self, grid: &SpaceTimeGrid) -> Result<()> {
        let all = [
            &self.p, &self.d, &self.d1, &self.d2, &self.c1, &self.c2, &self.b, &self.rho,
        ];
        if all.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch("MFG coefficients"));
        }
        if all.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite("MFG coefficients"));
        }
        Ok(())
    }

    /// True when the two equations do not talk to each other.
    pub fn is_decoupled(&self) -> bool {
        [&self.d2, &self.c2, &self.rho]
            .iter()
            .all(|f| f.values().iter().all(|&v| v == 0.0))
    }
}

/// One measured bound: `value = max ratio` and the node `(x, t)` attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    pub value: f64,
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }

    /// Entries that are non-finite or exceed `limit`.
    pub fn exceeding(&self, limit: f64) -> Vec<&BoundEntry> {
        self.entries
            .iter()
            .filter(|e| !(e.value.is_finite() && e.value <= limit))
            .collect()
    }
}

fn ratio_entry(
    name: &'static str,
    f: &SpaceTimeField,
    a: &[f64],
    power: f64,
    grid: &SpaceTimeGrid,
) -> BoundEntry {
    let mut best = (0.0, 0, 0);
    for ((i, k), v) in f.values().indexed_iter() {
        let r = v.abs() / a[i].powf(power);
        if r > best.0 || r.is_nan() {
            best = (r, i, k);
        }
    }
    BoundEntry {
        name,
        value: best.0,
        x: grid.x(best.1),
        t: grid.t(best.2),
    }
}

/// Node ratios `|d1|/√a`, `|c1|/√a`, `|a_x|/√a`, `|d2|/a`, `|p|/√a`, `|d|/a`
/// and sup norms of `b`, `c2`, `rho`.
pub fn check_coefficient_bounds(
    coeffs: &MfgCoefficients,
    c: &DegenerateCoefficient,
    grid: &SpaceTimeGrid,
) -> Result<BoundReport> {
    coeffs.check_grid(grid)?;
    let a = c.sample(grid);
    let ones = vec![1.0; grid.n_x()];
    let ax = SpaceTimeField::from_fn(grid, |x, _| c.a_x(x));
    let entries = vec![
        ratio_entry("d1/sqrt(a)", &coeffs.d1, &a, 0.5, grid),
        ratio_entry("c1/sqrt(a)", &coeffs.c1, &a, 0.5, grid),
        ratio_entry("a_x/sqrt(a)", &ax, &a, 0.5, grid),
        ratio_entry("d2/a", &coeffs.d2, &a, 1.0, grid),
        ratio_entry("p/sqrt(a)", &coeffs.p, &a, 0.5, grid),
        ratio_entry("d/a", &coeffs.d, &a, 1.0, grid),
        ratio_entry("sup|b|", &coeffs.b, &ones, 1.0, grid),
        ratio_entry("sup|c2|", &coeffs.c2, &ones, 1.0, grid),
        ratio_entry("sup|rho|", &coeffs.rho, &ones, 1.0, grid),
    ];
    Ok(BoundReport { entries })
}

/// Differences `u = u2 - u1`, `m = m2 - m1` and the coefficients of the linear
/// system they satisfy.
#[derive(Debug, Clone)]
pub struct DifferenceSystem {
    pub u: SpaceTimeField,
    pub m: SpaceTimeField,
    pub coeffs: MfgCoefficients,
}

/// Coefficients of the linearized system satisfied by the difference of two
/// nonlinear solutions sharing `p`, `d`, `F`, `G`.
///
/// Signs follow the linearized system as written on [`MfgCoefficients`]:
/// `d1 = -(p/2)(u1_x + u2_x)`, `d2 = -d`, `c1 = -p u1_x`, `b = p u1_xx + p_x u1_x`,
/// `c2 = p_x m2 + p m2_x`, `rho = p m2`.
pub fn form_difference_coefficients(
    sol1: &MfgSolution,
    sol2: &MfgSolution,
    p: &SpaceTimeField,
    d: &SpaceTimeField,
) -> Result<DifferenceSystem> {
    let grid = *sol1.u.grid();
    for f in [&sol1.m, &sol2.u, &sol2.m, p, d] {
        if *f.grid() != grid {
            return Err(Error::GridMismatch("solutions passed to the difference system"));
        }
    }
    let (u1x, u1xx) = spatial_derivatives(&sol1.u);
    let (u2x, _) = spatial_derivatives(&sol2.u);
    let (m2x, _) = spatial_derivatives_with(&sol2.m, Closure::Extrapolate);
    let (px, _) = spatial_derivatives_with(p, Closure::Extrapolate);

    let d1 = p.zip_with(&u1x.add(&u2x)?, |p, s| -0.5 * p * s)?;
    let c1 = p.zip_with(&u1x, |p, ux| -p * ux)?;
    let b = p.mul(&u1xx)?.add(&px.mul(&u1x)?)?;
    let c2 = px.mul(&sol2.m)?.add(&p.mul(&m2x)?)?;
    let rho = p.mul(&sol2.m)?;
    let coeffs = MfgCoefficients {
        p: p.clone(),
        d: d.clone(),
        d1,
        d2: d.scaled(-1.0),
        c1,
        c2,
        b,
        rho,
    };
    Ok(DifferenceSystem {
        u: sol2.u.sub(&sol1.u)?,
        m: sol2.m.sub(&sol1.m)?,
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn zero_coefficients_have_zero_ratios_except_a_x() {
        let g = build_grid(16, 4, 1.0).unwrap();
        let c = DegenerateCoefficient::default();
        let r = check_coefficient_bounds(&MfgCoefficients::zeros(&g), &c, &g).unwrap();
        for e in &r.entries {
            if e.name != "a_x/sqrt(a)" {
                assert_eq!(e.value, 0.0, "{}", e.name);
            }
        }
        assert!(r.get("a_x/sqrt(a)").unwrap() <= 2.0);
    }

    #[test]
    fn sqrt_a_drift_has_unit_ratio() {
        let g = build_grid(16, 4, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let mut co = MfgCoefficients::zeros(&g);
        co.d1 = SpaceTimeField::from_fn(&g, |x, _| c.a(x).sqrt());
        let r = check_coefficient_bounds(&co, &c, &g).unwrap();
        assert!((r.get("d1/sqrt(a)").unwrap() - 1.0).abs() < 1e-15);
    }
}
