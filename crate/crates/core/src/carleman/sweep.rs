use rayon::prelude::*;
use serde::Serialize;

use super::evaluate::{
    evaluate_fp_carleman, evaluate_hjb_carleman, evaluate_mfg_carleman, CarlemanReport,
};
use super::weight::{CarlemanParams, OVERFLOW_EXPONENT};
use crate::domain::{DegenerateCoefficient, SpaceTimeField};
use crate::error::{invalid, Result};

/// Read-only solution data a sweep evaluates on.
#[derive(Debug, Clone, Copy)]
pub enum CarlemanBundle<'a> {
    Hjb {
        u: &'a SpaceTimeField,
        f: &'a SpaceTimeField,
        coefficient: &'a DegenerateCoefficient,
    },
    Fp {
        m: &'a SpaceTimeField,
        g: &'a SpaceTimeField,
        coefficient: &'a DegenerateCoefficient,
    },
    Mfg {
        u: &'a SpaceTimeField,
        m: &'a SpaceTimeField,
        f: &'a SpaceTimeField,
        g: &'a SpaceTimeField,
        coefficient: &'a DegenerateCoefficient,
    },
}

impl CarlemanBundle<'_> {
    pub fn evaluate(&self, p: &CarlemanParams) -> Result<CarlemanReport> {
        match *self {
            CarlemanBundle::Hjb { u, f, coefficient } => evaluate_hjb_carleman(u, f, p, coefficient),
            CarlemanBundle::Fp { m, g, coefficient } => evaluate_fp_carleman(m, g, p, coefficient),
            CarlemanBundle::Mfg {
                u,
                m,
                f,
                g,
                coefficient,
            } => evaluate_mfg_carleman(u, m, f, g, p, coefficient),
        }
    }

    fn horizon(&self) -> f64 {
        match *self {
            CarlemanBundle::Hjb { u, .. } | CarlemanBundle::Mfg { u, .. } => u.grid().horizon(),
            CarlemanBundle::Fp { m, .. } => m.grid().horizon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub s: f64,
    pub lambda: f64,
    pub overflow: bool,
    /// `None` for overflow cells.
    pub report: Option<CarlemanReport>,
}

impl SweepCell {
    pub fn ratio(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    /// Largest ratio over the upper half of the s values.
    pub max_upper: Option<f64>,
    /// Median ratio over all admitted s values.
    pub median: Option<f64>,
    /// `max_upper / median`; values at most 2 read as a bounded constant.
    pub indicator: Option<f64>,
    /// `(ratio(s_max) - ratio(s_med)) / ratio(s_med)`.
    pub relative_increase: Option<f64>,
    /// Heuristic `s0`: smallest s after which consecutive ratios vary by under 50%;
    /// `None` when no tail of at least two values qualifies.
    pub s0_heuristic: Option<f64>,
    pub overflow_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub s_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    /// Row-major: all s for the first lambda, then the next.
    pub cells: Vec<SweepCell>,
    pub summaries: Vec<LambdaSummary>,
}

impl SweepTable {
    pub fn cell(&self, s_index: usize, lambda_index: usize) -> &SweepCell {
        &self.cells[lambda_index * self.s_values.len() + s_index]
    }

    pub fn overflow_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        self.cells.iter().filter(|c| c.overflow).count() as f64 / self.cells.len() as f64
    }
}

fn median(v: &[f64]) -> f64 {
    let mut w = v.to_vec();
    w.sort_by(f64::total_cmp);
    let n = w.len();
    if n % 2 == 1 {
        w[n / 2]
    } else {
        0.5 * (w[n / 2 - 1] + w[n / 2])
    }
}

fn quotient(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn summarize(lambda: f64, s: &[f64], ratios: &[Option<f64>]) -> LambdaSummary {
    let overflow_cells = ratios.iter().filter(|r| r.is_none()).count();
    let pts: Vec<(f64, f64)> = s
        .iter()
        .zip(ratios)
        .filter_map(|(s, r)| r.map(|r| (*s, r)))
        .collect();
    if pts.is_empty() {
        return LambdaSummary {
            lambda,
            max_upper: None,
            median: None,
            indicator: None,
            relative_increase: None,
            s0_heuristic: None,
            overflow_cells,
        };
    }
    let n = pts.len();
    let rs: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let max_upper = rs[n / 2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let med = median(&rs);
    let r_mid = rs[(n - 1) / 2];
    let r_top = rs[n - 1];

    let mut s0 = None;
    for start in 0..n.saturating_sub(1) {
        let stable = rs[start..]
            .windows(2)
            .all(|w| quotient((w[1] - w[0]).abs(), w[0].abs()) < 0.5);
        if stable {
            s0 = Some(pts[start].0);
            break;
        }
    }
    LambdaSummary {
        lambda,
        max_upper: Some(max_upper),
        median: Some(med),
        indicator: Some(quotient(max_upper, med)),
        relative_increase: Some(quotient(r_top - r_mid, r_mid)),
        s0_heuristic: s0,
        overflow_cells,
    }
}

/// Evaluates the bundle on every `(s, lambda)` pair. Cells whose weight exponent
/// `2 s phi(T)` exceeds the overflow limit are kept in the table but not evaluated.
pub fn sweep_parameters(
    bundle: &CarlemanBundle<'_>,
    s_list: &[f64],
    lambda_list: &[f64],
) -> Result<SweepTable> {
    if s_list.is_empty() || lambda_list.is_empty() {
        return Err(invalid("s_list/lambda_list", "must be non-empty"));
    }
    let mut s_values = s_list.to_vec();
    s_values.sort_by(f64::total_cmp);
    let params: Vec<CarlemanParams> = lambda_list
        .iter()
        .flat_map(|&l| s_values.iter().map(move |&s| CarlemanParams::new(s, l)))
        .collect::<Result<_>>()?;
    let horizon = bundle.horizon();
    let cells: Vec<SweepCell> = params
        .par_iter()
        .map(|p| {
            let overflow = p.log_weight(horizon) > OVERFLOW_EXPONENT;
            let report = if overflow {
                None
            } else {
                Some(bundle.evaluate(p)?)
            };
            Ok(SweepCell {
                s: p.s,
                lambda: p.lambda,
                overflow,
                report,
            })
        })
        .collect::<Result<_>>()?;
    let summaries = lambda_list
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let row = &cells[j * s_values.len()..(j + 1) * s_values.len()];
            let ratios: Vec<Option<f64>> = row.iter().map(SweepCell::ratio).collect();
            summarize(l, &s_values, &ratios)
        })
        .collect();
    Ok(SweepTable {
        s_values,
        lambda_values: lambda_list.to_vec(),
        cells,
        summaries,
    })
}
