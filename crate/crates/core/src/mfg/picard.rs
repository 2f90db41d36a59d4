use serde::{Deserialize, Serialize};

use super::coefficients::{check_coefficient_bounds, BoundReport, MfgCoefficients};
use crate::domain::stencil::Closure;
use crate::domain::{
    spatial_derivatives, spatial_derivatives_with, DegenerateCoefficient, SpaceTimeField,
    SpaceTimeGrid,
};
use crate::error::{invalid, Error, Result};
use crate::solvers::{
    fp_scheme_residual, hjb_scheme_residual, solve_fp_linear, solve_hjb_linear, FpLinearProblem,
    HjbLinearProblem,
};

/// Bound ratios above this are logged as hypothesis warnings on the solution.
const BOUND_WARN_LIMIT: f64 = 1e3;

/// Picard iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterConfig {
    pub max_sweeps: usize,
    /// Relaxation weight on the new iterate, in `(0, 1]`.
    pub damping: f64,
    /// Tolerance on the max coupled scheme residual.
    pub tol: f64,
    /// Abort once the residual exceeds this multiple of the best seen.
    pub divergence_factor: f64,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            damping: 0.5,
            tol: 1e-9,
            divergence_factor: 10.0,
        }
    }
}

impl IterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(invalid("max_sweeps", "must be at least 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping", format!("{} not in (0, 1]", self.damping)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", format!("{} must be positive", self.tol)));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(invalid("divergence_factor", "must exceed 1"));
        }
        Ok(())
    }
}

/// Data shared by both systems: `a`, grid, sources `F` and `G`, `m(0) = m0`, `u(T) = h`.
#[derive(Debug, Clone)]
pub struct MfgData {
    pub coefficient: DegenerateCoefficient,
    pub grid: SpaceTimeGrid,
    pub hjb_source: SpaceTimeField,
    pub fp_source: SpaceTimeField,
    pub initial: Vec<f64>,
    pub terminal: Vec<f64>,
}

impl MfgData {
    /// Zero sources and zero data.
    pub fn new(coefficient: DegenerateCoefficient, grid: SpaceTimeGrid) -> Self {
        Self {
            coefficient,
            grid,
            hjb_source: SpaceTimeField::zeros(&grid),
            fp_source: SpaceTimeField::zeros(&grid),
            initial: vec![0.0; grid.n_x()],
            terminal: vec![0.0; grid.n_x()],
        }
    }

    fn hjb(&self) -> HjbLinearProblem {
        HjbLinearProblem::new(self.coefficient, self.grid)
            .with_source(self.hjb_source.clone())
            .with_terminal(self.terminal.clone())
    }

    fn fp(&self) -> FpLinearProblem {
        FpLinearProblem::new(self.coefficient, self.grid)
            .with_source(self.fp_source.clone())
            .with_initial(self.initial.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxSweeps,
    Diverged,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct MfgSolution {
    pub u: SpaceTimeField,
    pub m: SpaceTimeField,
    /// Max coupled scheme residual after each sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub termination: Termination,
    /// Residual of the returned iterate.
    pub residual: f64,
    pub bounds: BoundReport,
    pub warnings: Vec<String>,
}

impl MfgSolution {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }
}

/// Max scheme residuals `(HJB, FP)` of `(u, m)` for the linearized system.
/// The FP part is measured in `v = a m` units.
pub fn linearized_residual(
    u: &SpaceTimeField,
    m: &SpaceTimeField,
    coeffs: &MfgCoefficients,
    data: &MfgData,
) -> Result<(f64, f64)> {
    let (hjb, fp) = linear_problems(coeffs, data);
    let (ux, uxx) = spatial_derivatives(u);
    let rh = hjb_scheme_residual(u, &hjb, Some(&coeffs.d2.mul(m)?))?;
    let rf = fp_scheme_residual(m, &fp, Some(&fp_coupling(coeffs, &ux, &uxx)?))?;
    Ok((rh.max_abs(), rf.max_abs()))
}

fn linear_problems(coeffs: &MfgCoefficients, data: &MfgData) -> (HjbLinearProblem, FpLinearProblem) {
    let hjb = data.hjb().with_drift(coeffs.d1.clone());
    let fp = data
        .fp()
        .with_drift(coeffs.c1.clone())
        .with_reaction(coeffs.b.clone());
    (hjb, fp)
}

fn fp_coupling(
    coeffs: &MfgCoefficients,
    ux: &SpaceTimeField,
    uxx: &SpaceTimeField,
) -> Result<SpaceTimeField> {
    coeffs.c2.mul(ux)?.add(&coeffs.rho.mul(uxx)?)
}

fn initial_guess(data: &MfgData) -> Result<(SpaceTimeField, SpaceTimeField)> {
    Ok((
        SpaceTimeField::zeros(&data.grid),
        SpaceTimeField::from_profile(&data.grid, &data.initial)?,
    ))
}

fn bound_warnings(bounds: &BoundReport) -> Vec<String> {
    bounds
        .exceeding(BOUND_WARN_LIMIT)
        .into_iter()
        .map(|e| {
            format!(
                "hypothesis ratio {} = {:e} at (x, t) = ({}, {})",
                e.name, e.value, e.x, e.t
            )
        })
        .collect()
}

/// Shared damped Gauss-Seidel loop. `sweep` maps the current iterate to an
/// undamped candidate and its coupled residual.
fn picard(
    cfg: &IterConfig,
    init: (SpaceTimeField, SpaceTimeField),
    bounds: BoundReport,
    mut sweep: impl FnMut(&SpaceTimeField, &SpaceTimeField) -> Result<(SpaceTimeField, SpaceTimeField, f64)>,
) -> Result<MfgSolution> {
    cfg.validate()?;
    let mut warnings = bound_warnings(&bounds);
    for w in &warnings {
        log::warn!("{w}");
    }
    let (mut u, mut m) = init;
    let mut residuals = Vec::new();
    let mut best: Option<(SpaceTimeField, SpaceTimeField, f64)> = None;
    let mut termination = Termination::MaxSweeps;
    for _ in 0..cfg.max_sweeps {
        let (uc, mc, r) = sweep(&u, &m)?;
        residuals.push(r);
        if !r.is_finite() || !uc.is_finite() || !mc.is_finite() {
            termination = Termination::NonFinite;
            break;
        }
        let best_r = best.as_ref().map_or(f64::INFINITY, |b| b.2);
        if r <= cfg.tol {
            best = Some((uc, mc, r));
            termination = Termination::Converged;
            break;
        }
        if r > cfg.divergence_factor * best_r {
            termination = Termination::Diverged;
            break;
        }
        let th = cfg.damping;
        u = uc.zip_with(&u, |new, old| th * new + (1.0 - th) * old)?;
        m = mc.zip_with(&m, |new, old| th * new + (1.0 - th) * old)?;
        if r < best_r {
            best = Some((uc, mc, r));
        }
    }
    let (u, m, residual) = match best {
        Some(b) => b,
        None => {
            return Err(Error::NotConverged(format!(
                "no finite iterate produced ({termination:?})"
            )))
        }
    };
    if termination != Termination::Converged {
        warnings.push(format!(
            "Picard stopped ({termination:?}) after {} sweeps; best residual {residual:e}",
            residuals.len()
        ));
    }
    Ok(MfgSolution {
        u,
        m,
        residuals,
        converged: termination == Termination::Converged,
        termination,
        residual,
        bounds,
        warnings,
    })
}

/// Damped Picard iteration on the linearized system: HJB backward with `m` frozen,
/// then FP forward with the new `u`. Bound violations are recorded, not fatal.
pub fn solve_linearized_mfg(
    coeffs: &MfgCoefficients,
    data: &MfgData,
    cfg: &IterConfig,
) -> Result<MfgSolution> {
    coeffs.check_grid(&data.grid)?;
    let bounds = check_coefficient_bounds(coeffs, &data.coefficient, &data.grid)?;
    let (hjb, fp) = linear_problems(coeffs, data);
    picard(cfg, initial_guess(data)?, bounds, |_, m| {
        let uc = solve_hjb_linear(&hjb, Some(&coeffs.d2.mul(m)?))?;
        let (ux, uxx) = spatial_derivatives(&uc);
        let coupling = fp_coupling(coeffs, &ux, &uxx)?;
        let mc = solve_fp_linear(&fp, Some(&coupling))?;
        let rh = hjb_scheme_residual(&uc, &hjb, Some(&coeffs.d2.mul(&mc)?))?.max_abs();
        let rf = fp_scheme_residual(&mc, &fp, Some(&coupling))?.max_abs();
        Ok((uc, mc, rh.max(rf)))
    })
}

struct Nonlinear<'a> {
    p: &'a SpaceTimeField,
    d: &'a SpaceTimeField,
    px: SpaceTimeField,
    data: &'a MfgData,
}

impl Nonlinear<'_> {
    /// HJB linearized about `u_old`: drift `-p u_old_x`, source `F - d m - (p/2) u_old_x^2`.
    fn hjb(&self, u_old: &SpaceTimeField, m: &SpaceTimeField) -> Result<HjbLinearProblem> {
        let (ux, _) = spatial_derivatives(u_old);
        let drift = self.p.zip_with(&ux, |p, ux| -p * ux)?;
        let half_sq = self.p.zip_with(&ux, |p, ux| 0.5 * p * ux * ux)?;
        let source = self.data.hjb_source.sub(&self.d.mul(m)?)?.sub(&half_sq)?;
        Ok(self.data.hjb().with_drift(drift).with_source(source))
    }

    /// FP with drift `-p u_x` and reaction `(p u_x)_x = p_x u_x + p u_xx`.
    fn fp(&self, u: &SpaceTimeField) -> Result<FpLinearProblem> {
        let (ux, uxx) = spatial_derivatives(u);
        let drift = self.p.zip_with(&ux, |p, ux| -p * ux)?;
        let reaction = self.px.mul(&ux)?.add(&self.p.mul(&uxx)?)?;
        Ok(self.data.fp().with_drift(drift).with_reaction(reaction))
    }

    fn residual(&self, u: &SpaceTimeField, m: &SpaceTimeField) -> Result<(f64, f64)> {
        let rh = hjb_scheme_residual(u, &self.hjb(u, m)?, None)?.max_abs();
        let rf = fp_scheme_residual(m, &self.fp(u)?, None)?.max_abs();
        Ok((rh, rf))
    }
}

fn nonlinear<'a>(
    p: &'a SpaceTimeField,
    d: &'a SpaceTimeField,
    data: &'a MfgData,
) -> Result<Nonlinear<'a>> {
    for f in [p, d, &data.hjb_source, &data.fp_source] {
        if *f.grid() != data.grid {
            return Err(Error::GridMismatch("nonlinear MFG data"));
        }
    }
    if !p.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite("p or d"));
    }
    let (px, _) = spatial_derivatives_with(p, Closure::Extrapolate);
    Ok(Nonlinear { p, d, px, data })
}

/// Max fully nonlinear scheme residuals `(HJB, FP)` of `(u, m)`.
pub fn nonlinear_residual(
    u: &SpaceTimeField,
    m: &SpaceTimeField,
    p: &SpaceTimeField,
    d: &SpaceTimeField,
    data: &MfgData,
) -> Result<(f64, f64)> {
    nonlinear(p, d, data)?.residual(u, m)
}

/// Damped Picard iteration on the nonlinear system. The quadratic term is
/// expanded about the previous iterate (`|u_x|^2 ≈ 2 u_old_x u_x - |u_old_x|^2`)
/// and the FP drift uses the freshly computed `u`.
pub fn solve_nonlinear_mfg(
    p: &SpaceTimeField,
    d: &SpaceTimeField,
    data: &MfgData,
    cfg: &IterConfig,
) -> Result<MfgSolution> {
    let nl = nonlinear(p, d, data)?;
    let mut bound_coeffs = MfgCoefficients::zeros(&data.grid);
    bound_coeffs.p = p.clone();
    bound_coeffs.d = d.clone();
    let bounds = check_coefficient_bounds(&bound_coeffs, &data.coefficient, &data.grid)?;
    picard(cfg, initial_guess(data)?, bounds, |u, m| {
        let uc = solve_hjb_linear(&nl.hjb(u, m)?, None)?;
        let mc = solve_fp_linear(&nl.fp(&uc)?, None)?;
        let (rh, rf) = nl.residual(&uc, &mc)?;
        Ok((uc, mc, rh.max(rf)))
    })
}
