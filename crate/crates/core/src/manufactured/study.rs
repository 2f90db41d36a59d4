use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::catalog::{Forcing, ManufacturedCase};
use crate::domain::SpaceTimeGrid;
use crate::error::{Error, Result};
use crate::mfg::IterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Space,
    Time,
}

/// Observed convergence order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Zero error at every level.
    Exact,
    Observed(f64),
    /// The case has no such field.
    NotApplicable,
}

impl Order {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        match *self {
            Order::Exact | Order::NotApplicable => true,
            Order::Observed(q) => (lo..=hi).contains(&q),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Order::Exact => f.write_str("exact"),
            Order::NotApplicable => f.write_str("n/a"),
            Order::Observed(q) => write!(f, "{q:.3}"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Order::Exact => s.serialize_str("exact"),
            Order::NotApplicable => s.serialize_str("n/a"),
            Order::Observed(q) => s.serialize_f64(q),
        }
    }
}

/// Errors at or below this are rounding, not discretization error.
pub const ROUNDING_FLOOR: f64 = 1e-12;

/// Least-squares slope of `log err` against `log step`; [`Order::Exact`] when every
/// error is at rounding level.
pub fn fit_order(steps: &[f64], errs: &[f64]) -> Order {
    if errs.iter().all(|&e| e <= ROUNDING_FLOOR) {
        return Order::Exact;
    }
    if errs.iter().any(|&e| !(e > 0.0)) || steps.len() < 2 {
        return Order::Observed(f64::NAN);
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    Order::Observed(ols_slope(&xs, &ys))
}

pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    ols(xs, ys).0
}

/// `(slope, intercept)` of the least-squares line through `(xs, ys)`.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderLevel {
    pub n_x: usize,
    pub n_t: usize,
    /// Max-node error of `u`.
    pub err_u: f64,
    /// Max-node error of `a m`, the variable the FP solver actually computes.
    pub err_m: f64,
    /// Max-node error of `m` itself; near a degenerate end it carries a factor `1/a(h/2)`.
    pub err_m_raw: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub axis: Axis,
    pub levels: Vec<LadderLevel>,
    pub order_u: Order,
    pub order_m: Order,
}

impl LadderReport {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.order_u.within(lo, hi) && self.order_m.within(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub tag: super::EquationTag,
    pub space: LadderReport,
    pub time: LadderReport,
}

fn check_ladder(grids: &[SpaceTimeGrid], axis: Axis) -> Result<()> {
    if grids.len() < 3 {
        return Err(Error::DegenerateLadder(format!(
            "{} levels, need at least 3",
            grids.len()
        )));
    }
    for w in grids.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ok = match axis {
            Axis::Space => b.n_x() == 2 * a.n_x() && b.n_t() == a.n_t(),
            Axis::Time => b.n_t() == 2 * a.n_t() && b.n_x() == a.n_x(),
        } && a.horizon() == b.horizon();
        if !ok {
            return Err(Error::DegenerateLadder(format!(
                "{axis:?} ladder must halve one step at a time: {}x{} -> {}x{}",
                a.n_x(),
                a.n_t(),
                b.n_x(),
                b.n_t()
            )));
        }
    }
    Ok(())
}

/// Solves `case` on every grid of a halving ladder and fits the observed orders.
///
/// Space ladders use [`Forcing::TimeConsistent`] and time ladders
/// [`Forcing::SpaceConsistent`], so each ladder sees only the error it measures.
pub fn run_ladder(
    case: &ManufacturedCase,
    grids: &[SpaceTimeGrid],
    axis: Axis,
    cfg: &IterConfig,
) -> Result<LadderReport> {
    check_ladder(grids, axis)?;
    let forcing = match axis {
        Axis::Space => Forcing::TimeConsistent,
        Axis::Time => Forcing::SpaceConsistent,
    };
    let levels = grids
        .par_iter()
        .map(|g| {
            let (u, m, sweeps) = case.solve(g, forcing, cfg)?;
            let err_u = u.sub(&case.sample_u(g))?.max_abs();
            let a = case.coefficient.sample(g);
            let dm = m.sub(&case.sample_m(g))?;
            let err_m = dm.mul_profile(&a)?.max_abs();
            let err_m_raw = dm.max_abs();
            Ok(LadderLevel {
                n_x: g.n_x(),
                n_t: g.n_t(),
                err_u,
                err_m,
                err_m_raw,
                sweeps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps: Vec<f64> = grids
        .iter()
        .map(|g| match axis {
            Axis::Space => g.h(),
            Axis::Time => g.dt(),
        })
        .collect();
    let order = |present: bool, errs: Vec<f64>| {
        if present {
            fit_order(&steps, &errs)
        } else {
            Order::NotApplicable
        }
    };
    Ok(LadderReport {
        axis,
        order_u: order(case.u.is_some(), levels.iter().map(|l| l.err_u).collect()),
        order_m: order(case.m.is_some(), levels.iter().map(|l| l.err_m).collect()),
        levels,
    })
}

/// Default ladders: `n_x` in {64, 128, 256} at `n_t = 512`, and `n_t` in
/// {128, 256, 512} at `n_x = 256`.
pub fn default_ladders(horizon: f64) -> Result<(Vec<SpaceTimeGrid>, Vec<SpaceTimeGrid>)> {
    let space = [64, 128, 256]
        .iter()
        .map(|&n| SpaceTimeGrid::new(n, 512, horizon))
        .collect::<Result<Vec<_>>>()?;
    let time = [128, 256, 512]
        .iter()
        .map(|&n| SpaceTimeGrid::new(256, n, horizon))
        .collect::<Result<Vec<_>>>()?;
    Ok((space, time))
}

/// Space and time convergence orders of one case.
pub fn convergence_study(
    case: &ManufacturedCase,
    space_ladder: &[SpaceTimeGrid],
    time_ladder: &[SpaceTimeGrid],
    cfg: &IterConfig,
) -> Result<ConvergenceReport> {
    Ok(ConvergenceReport {
        case: case.id.to_string(),
        tag: case.tag,
        space: run_ladder(case, space_ladder, Axis::Space, cfg)?,
        time: run_ladder(case, time_ladder, Axis::Time, cfg)?,
    })
}
