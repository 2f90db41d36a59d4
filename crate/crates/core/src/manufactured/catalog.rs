use serde::Serialize;

use super::jet::{CoefShape, Jet, SpaceFactor, TimeFactor};
use crate::domain::stencil::Closure;
use crate::domain::{
    spatial_derivatives, spatial_derivatives_with, DegenerateCoefficient, SpaceTimeField,
    SpaceTimeGrid,
};
use crate::error::{Error, Result};
use crate::mfg::{solve_linearized_mfg, solve_nonlinear_mfg, IterConfig, MfgCoefficients, MfgData};
use crate::solvers::{solve_fp_linear, solve_hjb_linear, FpLinearProblem, HjbLinearProblem};

/// Which equation a case is manufactured for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationTag {
    LinearHjb,
    LinearFp,
    LinearizedMfg,
    NonlinearMfg,
}

impl EquationTag {
    pub const ALL: [EquationTag; 4] = [
        EquationTag::LinearHjb,
        EquationTag::LinearFp,
        EquationTag::LinearizedMfg,
        EquationTag::NonlinearMfg,
    ];

    fn has_u(self) -> bool {
        self != EquationTag::LinearFp
    }

    fn has_m(self) -> bool {
        self != EquationTag::LinearHjb
    }
}

/// `tau(t) * a(x) * g(x)`; vanishes wherever `a` does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparableField {
    pub time: TimeFactor,
    pub space: SpaceFactor,
}

/// How sources are sampled on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Forcing {
    /// Closed-form sources at the nodes.
    Continuous,
    /// The analytic time derivative is replaced by the one-step difference quotient
    /// of the analytic field that implicit Euler uses, so only the spatial error remains.
    TimeConsistent,
    /// The spatial operators are replaced by the stencils the solvers use, applied to
    /// the sampled analytic fields, so only the time error remains.
    SpaceConsistent,
}

/// Closed-form fields, coefficients and sources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManufacturedCase {
    pub id: &'static str,
    pub tag: EquationTag,
    pub coefficient: DegenerateCoefficient,
    pub u: Option<SeparableField>,
    pub m: Option<SeparableField>,
    pub p: CoefShape,
    pub d: CoefShape,
    pub d1: CoefShape,
    pub d2: CoefShape,
    pub c1: CoefShape,
    pub c2: CoefShape,
    pub b: CoefShape,
    pub rho: CoefShape,
}

const fn sep(time: TimeFactor, space: SpaceFactor) -> Option<SeparableField> {
    Some(SeparableField { time, space })
}

const DECAY: TimeFactor = TimeFactor::Exp { rate: -1.0 };
const SLOW_DECAY: TimeFactor = TimeFactor::Exp { rate: -0.5 };
const GROWTH: TimeFactor = TimeFactor::Exp { rate: 0.5 };
const QUAD: TimeFactor = TimeFactor::Quadratic { c: 1.0 };
const ONE: SpaceFactor = SpaceFactor::Affine { c0: 1.0, c1: 0.0 };
const RAMP: SpaceFactor = SpaceFactor::Affine { c0: 1.0, c1: 1.0 };
const HALF_RAMP: SpaceFactor = SpaceFactor::Affine { c0: 1.0, c1: 0.5 };
const WAVE: SpaceFactor = SpaceFactor::CosPi { c0: 0.0, k: 1.0 };
const BUMP: SpaceFactor = SpaceFactor::CosPi { c0: 2.0, k: 1.0 };
const Z: CoefShape = CoefShape::Zero;

fn blank(id: &'static str, tag: EquationTag, c: DegenerateCoefficient) -> ManufacturedCase {
    ManufacturedCase {
        id,
        tag,
        coefficient: c,
        u: None,
        m: None,
        p: Z,
        d: Z,
        d1: Z,
        d2: Z,
        c1: Z,
        c2: Z,
        b: Z,
        rho: Z,
    }
}

fn a(kappa: f64) -> CoefShape {
    CoefShape::A { kappa }
}

/// Every catalog profile for coefficient `c`, excluding the zero profile.
pub fn catalog(c: DegenerateCoefficient) -> Vec<ManufacturedCase> {
    use EquationTag::*;
    vec![
        ManufacturedCase {
            u: sep(DECAY, ONE),
            ..blank("decay-bubble", LinearHjb, c)
        },
        ManufacturedCase {
            u: sep(DECAY, RAMP),
            d1: a(0.5),
            ..blank("drift-bubble", LinearHjb, c)
        },
        ManufacturedCase {
            u: sep(QUAD, WAVE),
            d1: a(-0.3),
            ..blank("wave", LinearHjb, c)
        },
        ManufacturedCase {
            m: sep(DECAY, HALF_RAMP),
            ..blank("fp-decay", LinearFp, c)
        },
        ManufacturedCase {
            m: sep(QUAD, SpaceFactor::Exp { c: 0.5 }),
            c1: a(0.4),
            b: CoefShape::Const { kappa: 0.2 },
            ..blank("fp-drift", LinearFp, c)
        },
        ManufacturedCase {
            m: sep(SLOW_DECAY, BUMP),
            c1: a(-0.3),
            b: CoefShape::Linear { kappa: -0.1 },
            ..blank("fp-wave", LinearFp, c)
        },
        ManufacturedCase {
            u: sep(DECAY, ONE),
            m: sep(DECAY, HALF_RAMP),
            d1: a(0.2),
            d2: a(0.3),
            c1: a(0.2),
            c2: CoefShape::Linear { kappa: 0.3 },
            b: CoefShape::Const { kappa: 0.1 },
            rho: a(0.2),
            ..blank("coupled-decay", LinearizedMfg, c)
        },
        ManufacturedCase {
            u: sep(QUAD, WAVE),
            m: sep(SLOW_DECAY, BUMP),
            d1: a(-0.3),
            d2: a(-0.4),
            c1: a(-0.3),
            c2: CoefShape::Const { kappa: 0.2 },
            b: CoefShape::Linear { kappa: -0.1 },
            rho: a(0.3),
            ..blank("coupled-wave", LinearizedMfg, c)
        },
        ManufacturedCase {
            u: sep(GROWTH, RAMP),
            m: sep(QUAD, RAMP),
            d1: a(0.5),
            d2: a(0.2),
            c1: a(0.4),
            c2: CoefShape::Linear { kappa: -0.2 },
            b: CoefShape::Const { kappa: 0.2 },
            rho: a(-0.2),
            ..blank("coupled-growth", LinearizedMfg, c)
        },
        ManufacturedCase {
            u: sep(DECAY, ONE),
            m: sep(DECAY, HALF_RAMP),
            p: a(0.5),
            d: a(0.3),
            ..blank("nl-decay", NonlinearMfg, c)
        },
        ManufacturedCase {
            u: sep(QUAD, WAVE),
            m: sep(SLOW_DECAY, BUMP),
            p: a(0.4),
            d: a(0.2),
            ..blank("nl-wave", NonlinearMfg, c)
        },
        ManufacturedCase {
            u: sep(GROWTH, RAMP),
            m: sep(QUAD, RAMP),
            p: a(0.3),
            d: a(-0.3),
            ..blank("nl-growth", NonlinearMfg, c)
        },
    ]
}

/// Looks up a profile for `tag`. The id `"zero"` is valid for every tag.
pub fn make_case(id: &str, c: DegenerateCoefficient, tag: EquationTag) -> Result<ManufacturedCase> {
    c.validate()?;
    if id == "zero" {
        let mut z = blank("zero", tag, c);
        let zero = SeparableField {
            time: TimeFactor::Quadratic { c: 0.0 },
            space: SpaceFactor::Affine { c0: 0.0, c1: 0.0 },
        };
        z.u = tag.has_u().then_some(zero);
        z.m = tag.has_m().then_some(zero);
        return Ok(z);
    }
    catalog(c)
        .into_iter()
        .find(|k| k.id == id && k.tag == tag)
        .ok_or_else(|| Error::UnknownProfile(format!("{id} ({tag:?})")))
}

impl ManufacturedCase {
    fn a_jet(&self, x: f64) -> Jet {
        let c = &self.coefficient;
        Jet::new(c.a(x), c.a_x(x), c.a_xx(x))
    }

    fn field_jet(&self, f: &Option<SeparableField>, x: f64, t: f64) -> (Jet, f64) {
        match f {
            None => (Jet::ZERO, 0.0),
            Some(f) => {
                let ag = self.a_jet(x).product(f.space.jet(x));
                (ag.scale(f.time.value(t)), f.time.deriv(t, 1) * ag.v)
            }
        }
    }

    /// `x`-jet of `u` and `u_t`.
    pub fn u_jet(&self, x: f64, t: f64) -> (Jet, f64) {
        self.field_jet(&self.u, x, t)
    }

    pub fn m_jet(&self, x: f64, t: f64) -> (Jet, f64) {
        self.field_jet(&self.m, x, t)
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.u_jet(x, t).0.v
    }

    pub fn m(&self, x: f64, t: f64) -> f64 {
        self.m_jet(x, t).0.v
    }

    /// `k`-th time derivative of `u` at `(x, t)`.
    pub fn u_time_deriv(&self, x: f64, t: f64, k: u32) -> f64 {
        self.u.map_or(0.0, |f| {
            f.time.deriv(t, k) * self.coefficient.a(x) * f.space.jet(x).v
        })
    }

    pub fn m_time_deriv(&self, x: f64, t: f64, k: u32) -> f64 {
        self.m.map_or(0.0, |f| {
            f.time.deriv(t, k) * self.coefficient.a(x) * f.space.jet(x).v
        })
    }

    /// `(value, x-derivative)` of a coefficient shape.
    pub fn shape(&self, s: CoefShape, x: f64) -> (f64, f64) {
        match s {
            CoefShape::Zero => (0.0, 0.0),
            CoefShape::Const { kappa } => (kappa, 0.0),
            CoefShape::Linear { kappa } => (kappa * x, kappa),
            CoefShape::A { kappa } => (kappa * self.coefficient.a(x), kappa * self.coefficient.a_x(x)),
        }
    }

    fn coef(&self, s: CoefShape, x: f64) -> f64 {
        self.shape(s, x).0
    }

    /// Closed-form HJB source `F(x, t)`.
    pub fn hjb_source(&self, x: f64, t: f64) -> f64 {
        let a = self.coefficient.a(x);
        let (u, ut) = self.u_jet(x, t);
        let (m, _) = self.m_jet(x, t);
        match self.tag {
            EquationTag::NonlinearMfg => {
                let p = self.coef(self.p, x);
                ut + a * u.d2 - 0.5 * p * u.d1 * u.d1 + self.coef(self.d, x) * m.v
            }
            _ => ut + a * u.d2 + self.coef(self.d1, x) * u.d1 - self.coef(self.d2, x) * m.v,
        }
    }

    /// Closed-form FP source `G(x, t)`, with `(a m)_xx = a_xx m + 2 a_x m_x + a m_xx`.
    pub fn fp_source(&self, x: f64, t: f64) -> f64 {
        let (u, _) = self.u_jet(x, t);
        let (m, mt) = self.m_jet(x, t);
        let am = self.a_jet(x).product(m);
        match self.tag {
            EquationTag::NonlinearMfg => {
                let (p, px) = self.shape(self.p, x);
                let flux_x = px * m.v * u.d1 + p * m.d1 * u.d1 + p * m.v * u.d2;
                mt - am.d2 - flux_x
            }
            _ => {
                mt - am.d2 + self.coef(self.c1, x) * m.d1
                    - self.coef(self.b, x) * m.v
                    - self.coef(self.c2, x) * u.d1
                    - self.coef(self.rho, x) * u.d2
            }
        }
    }

    /// `(F, G)` rebuilt from point values of the fields, `a` and the coefficients by
    /// central differences (step 1e-6 for first, 1e-4 for second derivatives).
    pub fn finite_difference_sources(&self, x: f64, t: f64) -> (f64, f64) {
        let case = self;
        const H1: f64 = 1e-6;
        const H2: f64 = 1e-4;
        let a = |x: f64| case.coefficient.a(x);
        let d1 = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + H1) - f(x - H1)) / (2.0 * H1);
        let d2 = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + H2) - 2.0 * f(x) + f(x - H2)) / (H2 * H2);
        let u = |x: f64| case.u(x, t);
        let m = |x: f64| case.m(x, t);
        let am = |x: f64| a(x) * case.m(x, t);
        let ut = d1(&|s| case.u(x, s), t);
        let mt = d1(&|s| case.m(x, s), t);
        let (ux, uxx, mx, amxx) = (d1(&u, x), d2(&u, x), d1(&m, x), d2(&am, x));
        let k = |s: CoefShape, x: f64| case.coef(s, x);
        match case.tag {
            EquationTag::NonlinearMfg => {
                let p = k(case.p, x);
                let px = d1(&|y| k(case.p, y), x);
                let flux_x = px * m(x) * ux + p * mx * ux + p * m(x) * uxx;
                (
                    ut + a(x) * uxx - 0.5 * p * ux * ux + k(case.d, x) * m(x),
                    mt - amxx - flux_x,
                )
            }
            _ => (
                ut + a(x) * uxx + k(case.d1, x) * ux - k(case.d2, x) * m(x),
                mt - amxx + k(case.c1, x) * mx
                    - k(case.b, x) * m(x)
                    - k(case.c2, x) * ux
                    - k(case.rho, x) * uxx,
            ),
        }
    }

    pub fn sample_u(&self, g: &SpaceTimeGrid) -> SpaceTimeField {
        SpaceTimeField::from_fn(g, |x, t| self.u(x, t))
    }

    pub fn sample_m(&self, g: &SpaceTimeGrid) -> SpaceTimeField {
        SpaceTimeField::from_fn(g, |x, t| self.m(x, t))
    }

    fn sample_shape(&self, g: &SpaceTimeGrid, s: CoefShape) -> SpaceTimeField {
        SpaceTimeField::from_fn(g, |x, _| self.coef(s, x))
    }

    pub fn mfg_coefficients(&self, g: &SpaceTimeGrid) -> MfgCoefficients {
        MfgCoefficients {
            p: self.sample_shape(g, self.p),
            d: self.sample_shape(g, self.d),
            d1: self.sample_shape(g, self.d1),
            d2: self.sample_shape(g, self.d2),
            c1: self.sample_shape(g, self.c1),
            c2: self.sample_shape(g, self.c2),
            b: self.sample_shape(g, self.b),
            rho: self.sample_shape(g, self.rho),
        }
    }

    /// Sources `(F, G)` on the grid.
    pub fn sources(&self, g: &SpaceTimeGrid, forcing: Forcing) -> (SpaceTimeField, SpaceTimeField) {
        if forcing == Forcing::SpaceConsistent {
            return self.discrete_space_sources(g);
        }
        let mut f = SpaceTimeField::from_fn(g, |x, t| self.hjb_source(x, t));
        let mut gs = SpaceTimeField::from_fn(g, |x, t| self.fp_source(x, t));
        if forcing == Forcing::TimeConsistent {
            let dt = g.dt();
            for i in 0..g.n_x() {
                let x = g.x(i);
                for k in 0..=g.n_t() {
                    let t = g.t(k);
                    if k < g.n_t() {
                        let diff = (self.u(x, g.t(k + 1)) - self.u(x, t)) / dt;
                        f.set(i, k, f.get(i, k) - self.u_jet(x, t).1 + diff);
                    }
                    if k > 0 {
                        let diff = (self.m(x, t) - self.m(x, g.t(k - 1))) / dt;
                        gs.set(i, k, gs.get(i, k) - self.m_jet(x, t).1 + diff);
                    }
                }
            }
        }
        (f, gs)
    }

    /// Sources whose spatial part is the discrete operator of the solvers applied to
    /// the sampled fields; time derivatives stay analytic.
    fn discrete_space_sources(&self, g: &SpaceTimeGrid) -> (SpaceTimeField, SpaceTimeField) {
        let co = self.mfg_coefficients(g);
        let a = self.coefficient.sample(g);
        let lda: Vec<f64> = g.nodes().iter().map(|&x| self.coefficient.log_derivative(x)).collect();
        let u = self.sample_u(g);
        let m = self.sample_m(g);
        let v = m.mul_profile(&a).expect("same grid");
        let (ux, uxx) = spatial_derivatives(&u);
        let (vx, vxx) = spatial_derivatives(&v);
        let (px, _) = spatial_derivatives_with(&co.p, Closure::Extrapolate);
        let nonlinear = self.tag == EquationTag::NonlinearMfg;
        let mut f = SpaceTimeField::zeros(g);
        let mut gs = SpaceTimeField::zeros(g);
        for k in 0..=g.n_t() {
            let t = g.t(k);
            for i in 0..g.n_x() {
                let x = g.x(i);
                let at = |fld: &SpaceTimeField| fld.get(i, k);
                let (c1, b, hjb_space) = if nonlinear {
                    let p = at(&co.p);
                    (
                        -p * at(&ux),
                        at(&px) * at(&ux) + p * at(&uxx),
                        a[i] * at(&uxx) - 0.5 * p * at(&ux) * at(&ux) + at(&co.d) * at(&m),
                    )
                } else {
                    (
                        at(&co.c1),
                        at(&co.b),
                        a[i] * at(&uxx) + at(&co.d1) * at(&ux) - at(&co.d2) * at(&m),
                    )
                };
                f.set(i, k, self.u_jet(x, t).1 + hjb_space);
                let coupling = if nonlinear {
                    0.0
                } else {
                    at(&co.c2) * at(&ux) + at(&co.rho) * at(&uxx)
                };
                let v_space = -a[i] * at(&vxx) + c1 * at(&vx) - (c1 * lda[i] + b) * at(&v);
                gs.set(i, k, self.m_jet(x, t).1 + v_space / a[i] - coupling);
            }
        }
        (f, gs)
    }

    /// Coupled-solver data: sources, `m(0)` and `u(T)` from the analytic fields.
    pub fn data(&self, g: &SpaceTimeGrid, forcing: Forcing) -> MfgData {
        let (f, gs) = self.sources(g, forcing);
        MfgData {
            coefficient: self.coefficient,
            grid: *g,
            hjb_source: f,
            fp_source: gs,
            initial: g.nodes().iter().map(|&x| self.m(x, 0.0)).collect(),
            terminal: g.nodes().iter().map(|&x| self.u(x, g.horizon())).collect(),
        }
    }

    pub fn hjb_problem(&self, g: &SpaceTimeGrid, forcing: Forcing) -> HjbLinearProblem {
        let data = self.data(g, forcing);
        HjbLinearProblem::new(self.coefficient, *g)
            .with_drift(self.sample_shape(g, self.d1))
            .with_source(data.hjb_source)
            .with_terminal(data.terminal)
    }

    pub fn fp_problem(&self, g: &SpaceTimeGrid, forcing: Forcing) -> FpLinearProblem {
        let data = self.data(g, forcing);
        FpLinearProblem::new(self.coefficient, *g)
            .with_drift(self.sample_shape(g, self.c1))
            .with_reaction(self.sample_shape(g, self.b))
            .with_source(data.fp_source)
            .with_initial(data.initial)
    }

    /// Runs the solver matching the tag. Returns `(u, m, sweeps)`; absent fields are zero.
    pub fn solve(
        &self,
        g: &SpaceTimeGrid,
        forcing: Forcing,
        cfg: &IterConfig,
    ) -> Result<(SpaceTimeField, SpaceTimeField, usize)> {
        let zero = SpaceTimeField::zeros(g);
        match self.tag {
            EquationTag::LinearHjb => {
                Ok((solve_hjb_linear(&self.hjb_problem(g, forcing), None)?, zero, 1))
            }
            EquationTag::LinearFp => {
                Ok((zero, solve_fp_linear(&self.fp_problem(g, forcing), None)?, 1))
            }
            EquationTag::LinearizedMfg | EquationTag::NonlinearMfg => {
                let data = self.data(g, forcing);
                let co = self.mfg_coefficients(g);
                let sol = if self.tag == EquationTag::LinearizedMfg {
                    solve_linearized_mfg(&co, &data, cfg)?
                } else {
                    solve_nonlinear_mfg(&co.p, &co.d, &data, cfg)?
                };
                if !sol.converged {
                    return Err(Error::NotConverged(format!(
                        "{} on {}x{}: {:?}, residual {:e}",
                        self.id,
                        g.n_x(),
                        g.n_t(),
                        sol.termination,
                        sol.residual
                    )));
                }
                let sweeps = sol.sweeps();
                Ok((sol.u, sol.m, sweeps))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_bubble_spot_value() {
        let c = make_case("decay-bubble", DegenerateCoefficient::WrightFischer, EquationTag::LinearHjb)
            .unwrap();
        assert!((c.hjb_source(0.5, 0.0) + 0.75).abs() < 1e-15);
    }

    #[test]
    fn catalog_has_three_per_tag() {
        let all = catalog(DegenerateCoefficient::default());
        for tag in EquationTag::ALL {
            assert!(all.iter().filter(|c| c.tag == tag).count() >= 3);
        }
    }

    #[test]
    fn unknown_and_zero_profiles() {
        let c = DegenerateCoefficient::WrightFischer;
        assert!(make_case("nope", c, EquationTag::LinearFp).is_err());
        assert!(make_case("decay-bubble", c, EquationTag::LinearFp).is_err());
        let z = make_case("zero", c, EquationTag::NonlinearMfg).unwrap();
        for (x, t) in [(0.3, 0.1), (0.9, 0.7)] {
            assert_eq!(z.hjb_source(x, t), 0.0);
            assert_eq!(z.fp_source(x, t), 0.0);
        }
    }

    #[test]
    fn boundary_values_vanish_exactly() {
        for c in [DegenerateCoefficient::WrightFischer, DegenerateCoefficient::default()] {
            for case in catalog(c) {
                for t in [0.0, 0.3, 1.0] {
                    for x in [0.0, 1.0] {
                        assert_eq!(case.u(x, t), 0.0, "{}", case.id);
                        assert_eq!(c.a(x) * case.m(x, t), 0.0, "{}", case.id);
                    }
                }
            }
        }
    }

    #[test]
    fn sources_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for c in [DegenerateCoefficient::WrightFischer, DegenerateCoefficient::default()] {
            for case in catalog(c) {
                for _ in 0..100 {
                    let x = rng.gen_range(0.05..0.95);
                    let t = rng.gen_range(0.05..0.95);
                    let (f, g) = case.finite_difference_sources(x, t);
                    let (fe, ge) = (case.hjb_source(x, t), case.fp_source(x, t));
                    assert!((f - fe).abs() <= 1e-6 * fe.abs().max(1.0), "{} F at ({x}, {t}): {f} vs {fe}", case.id);
                    assert!((g - ge).abs() <= 1e-6 * ge.abs().max(1.0), "{} G at ({x}, {t}): {g} vs {ge}", case.id);
                }
            }
        }
    }
}
