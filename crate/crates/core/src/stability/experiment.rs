use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formulas::{optimal_s, theoretical_theta};
use crate::domain::stencil::sample_profile;
use crate::domain::{
    build_grid, time_derivative, weighted_norm, DegenerateCoefficient, NormKind,
    SpaceTimeField, SpaceTimeGrid,
};
use crate::error::{invalid, Error, Result};
use crate::manufactured::ols;
use crate::mfg::{solve_nonlinear_mfg, IterConfig, MfgData, MfgSolution};

/// Rungs whose discrepancy falls below this are treated as zero.
const DEGENERATE_D: f64 = 1e-14;

/// Spatial data profile, always a multiple of `a(x) / a(1/2)` so that every
/// weighted norm is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataProfile {
    Zero,
    /// `amplitude * a(x) / a(1/2)`.
    Bump { amplitude: f64 },
    /// `amplitude * a(x) / a(1/2) * sin(mode pi x)`.
    Sine { amplitude: f64, mode: u32 },
}

impl DataProfile {
    pub fn eval(&self, c: &DegenerateCoefficient, x: f64) -> f64 {
        let shape = c.a(x) / c.a(0.5);
        match *self {
            DataProfile::Zero => 0.0,
            DataProfile::Bump { amplitude } => amplitude * shape,
            DataProfile::Sine { amplitude, mode } => {
                amplitude * shape * (mode as f64 * std::f64::consts::PI * x).sin()
            }
        }
    }

    pub fn sample(&self, c: &DegenerateCoefficient, g: &SpaceTimeGrid) -> Vec<f64> {
        sample_profile(g, |x| self.eval(c, x))
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        let amp = match *self {
            DataProfile::Zero => return Ok(()),
            DataProfile::Bump { amplitude } | DataProfile::Sine { amplitude, .. } => amplitude,
        };
        if !amp.is_finite() {
            return Err(invalid(name, "amplitude must be finite"));
        }
        if let DataProfile::Sine { mode: 0, .. } = self {
            return Err(invalid(name, "sine mode must be at least 1"));
        }
        Ok(())
    }
}

/// Nonlinear backward-problem setup: `p = kappa_p a`, `d = kappa_d a` (time
/// independent), zero sources, base data `(m0, h)` and a perturbation direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSpec {
    pub coefficient: DegenerateCoefficient,
    pub horizon: f64,
    pub n_x: usize,
    pub n_t: usize,
    pub kappa_p: f64,
    pub kappa_d: f64,
    /// Carleman `lambda` used for `theta` and `s*`.
    pub lambda: f64,
    pub initial: DataProfile,
    pub terminal: DataProfile,
    pub perturb_initial: DataProfile,
    pub perturb_terminal: DataProfile,
    pub iteration: IterConfig,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            coefficient: DegenerateCoefficient::default(),
            horizon: 1.0,
            n_x: 64,
            n_t: 64,
            kappa_p: 1.0,
            kappa_d: 1.0,
            lambda: 1.0,
            initial: DataProfile::Bump { amplitude: 1.0 },
            terminal: DataProfile::Sine {
                amplitude: 0.5,
                mode: 1,
            },
            perturb_initial: DataProfile::Sine {
                amplitude: 1.0,
                mode: 1,
            },
            perturb_terminal: DataProfile::Sine {
                amplitude: 1.0,
                mode: 2,
            },
            iteration: IterConfig {
                tol: 1e-11,
                ..IterConfig::default()
            },
        }
    }
}

impl ProblemSpec {
    pub fn with_grid(mut self, n_x: usize, n_t: usize) -> Self {
        self.n_x = n_x;
        self.n_t = n_t;
        self
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        build_grid(self.n_x, self.n_t, self.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficient.validate()?;
        self.grid()?;
        self.iteration.validate()?;
        for (name, v) in [("kappa_p", self.kappa_p), ("kappa_d", self.kappa_d)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive and finite"));
        }
        self.initial.validate("initial")?;
        self.terminal.validate("terminal")?;
        self.perturb_initial.validate("perturb_initial")?;
        self.perturb_terminal.validate("perturb_terminal")
    }

    /// `(p, d) = (kappa_p a, kappa_d a)`.
    pub fn coefficient_fields(&self, g: &SpaceTimeGrid) -> (SpaceTimeField, SpaceTimeField) {
        let c = self.coefficient;
        (
            SpaceTimeField::from_fn(g, |x, _| self.kappa_p * c.a(x)),
            SpaceTimeField::from_fn(g, |x, _| self.kappa_d * c.a(x)),
        )
    }

    /// Solves with data `(m0 + eps dm0, h + eps dh)`, returning the best iterate
    /// even when the iteration did not converge.
    pub fn solve_unchecked(&self, eps: f64) -> Result<MfgSolution> {
        let g = self.grid()?;
        let c = self.coefficient;
        let mut data = MfgData::new(c, g);
        let add = |base: &DataProfile, dir: &DataProfile| -> Vec<f64> {
            sample_profile(&g, |x| base.eval(&c, x) + eps * dir.eval(&c, x))
        };
        data.initial = add(&self.initial, &self.perturb_initial);
        data.terminal = add(&self.terminal, &self.perturb_terminal);
        let (p, d) = self.coefficient_fields(&g);
        solve_nonlinear_mfg(&p, &d, &data, &self.iteration)
    }

    /// [`ProblemSpec::solve_unchecked`], failing on non-convergence.
    pub fn solve(&self, eps: f64) -> Result<MfgSolution> {
        let sol = self.solve_unchecked(eps)?;
        if !sol.converged {
            return Err(Error::NotConverged(format!(
                "eps = {eps:e}: {:?} after {} sweeps, residual {:e}",
                sol.termination,
                sol.sweeps(),
                sol.residual
            )));
        }
        Ok(sol)
    }
}

/// Base and perturbed solutions.
pub fn generate_pair(spec: &ProblemSpec, eps: f64) -> Result<(MfgSolution, MfgSolution)> {
    spec.validate()?;
    Ok((spec.solve(0.0)?, spec.solve(eps)?))
}

fn differences(a: &MfgSolution, b: &MfgSolution) -> Result<(SpaceTimeField, SpaceTimeField)> {
    Ok((b.u.sub(&a.u)?, b.m.sub(&a.m)?))
}

/// `||u(t_k)||_{1/a} + ||m(t_k)||_a`: the error measured at an intermediate time.
fn weak_error(u: &SpaceTimeField, m: &SpaceTimeField, k: usize, c: &DegenerateCoefficient) -> Result<f64> {
    let g = u.grid();
    Ok(weighted_norm(&u.slice(k), NormKind::L2InvA, c, g)?
        + weighted_norm(&m.slice(k), NormKind::L2A, c, g)?)
}

/// `||u(t_k)||_{1,1/a} + ||m(t_k)||_{1,a}`.
fn strong_norm(u: &[f64], m: &[f64], c: &DegenerateCoefficient, g: &SpaceTimeGrid) -> Result<f64> {
    Ok(weighted_norm(u, NormKind::H1InvA, c, g)? + weighted_norm(m, NormKind::H1aDiv, c, g)?)
}

/// Final-data discrepancy `D0 = ||u2(T) - u1(T)||_{1,1/a} + ||m2(T) - m1(T)||_{1,a}`.
pub fn compute_data_norm_d0(pair: (&MfgSolution, &MfgSolution), c: &DegenerateCoefficient) -> Result<f64> {
    let (du, dm) = differences(pair.0, pair.1)?;
    let n = du.grid().n_t();
    strong_norm(&du.slice(n), &dm.slice(n), c, du.grid())
}

fn time_derivative_sum(u: &SpaceTimeField, m: &SpaceTimeField, k: usize, order: usize, c: &DegenerateCoefficient) -> Result<f64> {
    let g = *u.grid();
    let mut total = strong_norm(&u.slice(k), &m.slice(k), c, &g)?;
    for j in 1..=order {
        let ut = time_derivative(u, j)?;
        let mt = time_derivative(m, j)?;
        total += strong_norm(&ut.slice(k), &mt.slice(k), c, &g)?;
    }
    Ok(total)
}

/// `D = sum_{k<=order} ||d_t^k u(T)||_{1,1/a} + ||d_t^k m(T)||_{1,a}` of the difference.
pub fn compute_data_norm_d(
    pair: (&MfgSolution, &MfgSolution),
    c: &DegenerateCoefficient,
    order: usize,
) -> Result<f64> {
    let (du, dm) = differences(pair.0, pair.1)?;
    final_discrepancy(&du, &dm, c, order)
}

/// [`compute_data_norm_d`] on given difference fields.
pub fn final_discrepancy(
    du: &SpaceTimeField,
    dm: &SpaceTimeField,
    c: &DegenerateCoefficient,
    order: usize,
) -> Result<f64> {
    du.check_same_grid(dm)?;
    time_derivative_sum(du, dm, du.grid().n_t(), order, c)
}

/// A-priori bound `M`: the larger over the pair of `||u(0)||_{1,1/a}` and `||m(0)||_{1,a}`,
/// with time derivatives up to `order` summed in.
pub fn a_priori_bound(pair: (&MfgSolution, &MfgSolution), c: &DegenerateCoefficient, order: usize) -> Result<f64> {
    let mut best: f64 = 0.0;
    for s in [pair.0, pair.1] {
        let g = *s.u.grid();
        let mut bu = weighted_norm(&s.u.slice(0), NormKind::H1InvA, c, &g)?;
        let mut bm = weighted_norm(&s.m.slice(0), NormKind::H1aDiv, c, &g)?;
        for j in 1..=order {
            bu += weighted_norm(&time_derivative(&s.u, j)?.slice(0), NormKind::H1InvA, c, &g)?;
            bm += weighted_norm(&time_derivative(&s.m, j)?.slice(0), NormKind::H1aDiv, c, &g)?;
        }
        best = best.max(bu).max(bm);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityKind {
    Holder,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRecord {
    pub epsilon: f64,
    /// `D0` (Hölder) or `D` (logarithmic).
    pub discrepancy: f64,
    pub err: f64,
    /// `D0^theta + D0` or `(ln 1/D)^{-alpha}`.
    pub envelope: f64,
    /// `err / envelope`.
    pub ratio: f64,
    /// Largest `ratio` over this and all earlier (larger-eps) rungs.
    pub running_c: f64,
    pub optimal_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityResult {
    pub kind: StabilityKind,
    pub t0: f64,
    pub grid: SpaceTimeGrid,
    /// Hölder exponent (Hölder runs).
    pub theta: Option<f64>,
    /// Logarithmic exponent (log runs).
    pub alpha: Option<f64>,
    pub m_bound: f64,
    pub records: Vec<StabilityRecord>,
    pub dropped: Vec<f64>,
    /// Least-squares slope and intercept of `ln err` against `ln discrepancy`.
    pub slope: f64,
    pub intercept: f64,
    /// `max err / envelope` over the ladder.
    pub c_fit: f64,
    /// `running_c(last) / running_c(first) - 1`.
    pub c_fit_variation: f64,
    /// `max ratio / min ratio`: how far the observed rate beats the envelope.
    pub ratio_spread: f64,
    pub envelope_holds: bool,
    pub c_fit_stable: bool,
    pub warnings: Vec<String>,
}

fn check_ladder(eps: &[f64]) -> Result<()> {
    let nonzero: Vec<f64> = eps.iter().copied().filter(|e| *e != 0.0).collect();
    if nonzero.len() < 4 {
        return Err(Error::DegenerateLadder(format!(
            "need at least 4 nonzero amplitudes, got {}",
            nonzero.len()
        )));
    }
    if eps.iter().any(|e| !e.is_finite() || *e < 0.0) {
        return Err(invalid("epsilon_ladder", "amplitudes must be finite and nonnegative"));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("epsilon_ladder", "must be strictly decreasing"));
    }
    let span = (nonzero[0] / nonzero[nonzero.len() - 1]).log10();
    if span < 2.0 - 1e-9 {
        return Err(invalid(
            "epsilon_ladder",
            format!("must span at least 2 decades, spans {span:.2}"),
        ));
    }
    Ok(())
}

struct Rung {
    epsilon: f64,
    discrepancy: f64,
    err: f64,
}

type Solved = (f64, f64, MfgSolution);

fn run_rungs(
    spec: &ProblemSpec,
    eps: &[f64],
    measure: impl Fn(&MfgSolution, &MfgSolution) -> Result<(f64, f64)> + Sync,
) -> Result<(MfgSolution, Vec<Result<Solved>>)> {
    let base = spec.solve(0.0)?;
    let out = eps
        .par_iter()
        .map(|&e| {
            let s = spec.solve(e)?;
            let (d, err) = measure(&base, &s)?;
            Ok((d, err, s))
        })
        .collect();
    Ok((base, out))
}

struct Header {
    kind: StabilityKind,
    t0: f64,
    grid: SpaceTimeGrid,
    theta: Option<f64>,
    alpha: Option<f64>,
    m_bound: f64,
}

fn assemble(
    head: Header,
    rungs: Vec<Rung>,
    mut warnings: Vec<String>,
    envelope: impl Fn(f64) -> f64,
    s_of: impl Fn(f64) -> Result<f64>,
    tolerance: impl Fn(f64) -> bool,
) -> Result<StabilityResult> {
    let mut dropped = vec![];
    let mut records = vec![];
    let mut running: f64 = 0.0;
    for r in rungs {
        if !(r.discrepancy > DEGENERATE_D) || r.err == 0.0 {
            warnings.push(format!(
                "rung eps = {:e} dropped: discrepancy {:e}, err {:e}",
                r.epsilon, r.discrepancy, r.err
            ));
            warn!("stability rung eps = {:e} dropped", r.epsilon);
            dropped.push(r.epsilon);
            continue;
        }
        let env = envelope(r.discrepancy);
        let ratio = r.err / env;
        running = running.max(ratio);
        records.push(StabilityRecord {
            epsilon: r.epsilon,
            discrepancy: r.discrepancy,
            err: r.err,
            envelope: env,
            ratio,
            running_c: running,
            optimal_s: s_of(r.discrepancy)?,
        });
    }
    if records.len() < 2 {
        return Err(Error::DegenerateLadder(format!(
            "{:?} ladder at t0 = {}: fewer than 2 usable rungs",
            head.kind, head.t0
        )));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.discrepancy.ln()).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.err.ln()).collect();
    let (slope, intercept) = ols(&xs, &ys);
    let c_fit = running;
    let variation = records[records.len() - 1].running_c / records[0].running_c - 1.0;
    let (lo, hi) = records.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.ratio), hi.max(r.ratio))
    });
    let envelope_holds = records
        .iter()
        .all(|r| r.err <= c_fit * r.envelope * (1.0 + 1e-12));
    Ok(StabilityResult {
        kind: head.kind,
        t0: head.t0,
        grid: head.grid,
        theta: head.theta,
        alpha: head.alpha,
        m_bound: head.m_bound,
        records,
        dropped,
        slope,
        intercept,
        c_fit,
        c_fit_variation: variation,
        ratio_spread: hi / lo,
        envelope_holds,
        c_fit_stable: tolerance(variation),
        warnings,
    })
}

/// Hölder experiment at `t0 in (0, T)`: per rung, `D0` at `T` against the weak error at
/// `t0`. `C_fit` is declared stable when the running maximum of `err / (D0^theta + D0)`
/// grows by at most 50% down the ladder.
pub fn run_holder_experiment(spec: &ProblemSpec, t0: f64, eps: &[f64]) -> Result<StabilityResult> {
    spec.validate()?;
    check_ladder(eps)?;
    let g = spec.grid()?;
    if !(t0 > 0.0 && t0 < g.horizon()) {
        return Err(invalid("t0", format!("{t0} not in (0, T)")));
    }
    let k0 = g.time_index(t0).ok_or_else(|| {
        invalid("t0", format!("{t0} is not a time level of the grid (dt = {})", g.dt()))
    })?;
    let theta = theoretical_theta(t0, g.horizon(), spec.lambda)?;
    let c = spec.coefficient;
    let (base, raw) = run_rungs(spec, eps, |a, b| {
        let d0 = compute_data_norm_d0((a, b), &c)?;
        let (du, dm) = differences(a, b)?;
        Ok((d0, weak_error(&du, &dm, k0, &c)?))
    })?;
    let mut rungs = vec![];
    let mut m_bound: f64 = 0.0;
    for (e, r) in eps.iter().zip(raw) {
        let (d, err, s) = r?;
        m_bound = m_bound.max(a_priori_bound((&base, &s), &c, 0)?);
        rungs.push(Rung {
            epsilon: *e,
            discrepancy: d,
            err,
        });
    }
    let (horizon, lambda) = (g.horizon(), spec.lambda);
    let head = Header {
        kind: StabilityKind::Holder,
        t0,
        grid: g,
        theta: Some(theta),
        alpha: None,
        m_bound,
    };
    assemble(
        head,
        rungs,
        base.warnings.clone(),
        |d| d.powf(theta) + d,
        |d| optimal_s(m_bound.max(f64::MIN_POSITIVE), d, t0, horizon, lambda),
        |v| v.abs() <= 0.5,
    )
}

/// Logarithmic experiment at `t0 = 0` with exponent `alpha in (0, 1)`: per rung, `D`
/// (time derivatives up to order 2 at `T`) against the weak error at `t = 0`.
/// Every rung must have `D < 1`. `C_fit` is declared stable when its running maximum
/// grows by less than a factor 10 down the ladder.
pub fn run_log_experiment(spec: &ProblemSpec, alpha: f64, eps: &[f64]) -> Result<StabilityResult> {
    spec.validate()?;
    check_ladder(eps)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} not in (0, 1)")));
    }
    let g = spec.grid()?;
    let c = spec.coefficient;
    let (base, raw) = run_rungs(spec, eps, |a, b| {
        let d = compute_data_norm_d((a, b), &c, 2)?;
        let (du, dm) = differences(a, b)?;
        Ok((d, weak_error(&du, &dm, 0, &c)?))
    })?;
    let mut rungs = vec![];
    let mut m_bound: f64 = 0.0;
    for (e, r) in eps.iter().zip(raw) {
        let (d, err, s) = r?;
        if d >= 1.0 {
            return Err(invalid(
                "epsilon_ladder",
                format!("rung eps = {e:e} gives D = {d:.4} >= 1; shrink eps"),
            ));
        }
        m_bound = m_bound.max(a_priori_bound((&base, &s), &c, 2)?);
        rungs.push(Rung {
            epsilon: *e,
            discrepancy: d,
            err,
        });
    }
    let head = Header {
        kind: StabilityKind::Log,
        t0: 0.0,
        grid: g,
        theta: None,
        alpha: Some(alpha),
        m_bound,
    };
    assemble(
        head,
        rungs,
        base.warnings.clone(),
        |d| (1.0 / d).ln().powf(-alpha),
        |d| Ok((1.0 / d).ln().powf(alpha)),
        |v| v + 1.0 < 10.0,
    )
}
