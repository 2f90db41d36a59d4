use serde::Serialize;

use super::weight::{CarlemanParams, OVERFLOW_EXPONENT};
use crate::domain::stencil::{d1, d2, Closure};
use crate::domain::{
    weighted_norm_sq, DegenerateCoefficient, NormKind, SpaceTimeField, SpaceTimeGrid,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Hjb,
    Fp,
    Mfg,
}

/// The four nonnegative pieces of one estimate, in units of `e^{2 s phi(T)}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Components {
    pub lhs: f64,
    pub rhs_source: f64,
    pub rhs_t: f64,
    pub rhs_0: f64,
}

impl Components {
    fn add(self, o: Components) -> Components {
        Components {
            lhs: self.lhs + o.lhs,
            rhs_source: self.rhs_source + o.rhs_source,
            rhs_t: self.rhs_t + o.rhs_t,
            rhs_0: self.rhs_0 + o.rhs_0,
        }
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_source + self.rhs_t + self.rhs_0
    }

    /// `lhs / rhs`, with `0/0 = 0`.
    pub fn ratio(&self) -> f64 {
        let r = self.rhs();
        if r > 0.0 {
            self.lhs / r
        } else if self.lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Both sides of a Carleman inequality evaluated on a discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanReport {
    pub estimate: Estimate,
    pub params: CarlemanParams,
    pub lhs: f64,
    pub rhs_source: f64,
    pub rhs_t: f64,
    pub rhs_0: f64,
    pub ratio: f64,
    /// `2 s phi(T)`: the components above are the true integrals times `e^{-log_scale}`.
    pub log_scale: f64,
    pub overflow: bool,
    /// Per-equation pieces of the coupled estimate.
    pub hjb: Option<Components>,
    pub fp: Option<Components>,
}

impl CarlemanReport {
    fn build(
        estimate: Estimate,
        params: &CarlemanParams,
        horizon: f64,
        c: Components,
        hjb: Option<Components>,
        fp: Option<Components>,
    ) -> Self {
        let log_scale = params.log_weight(horizon);
        Self {
            estimate,
            params: *params,
            lhs: c.lhs,
            rhs_source: c.rhs_source,
            rhs_t: c.rhs_t,
            rhs_0: c.rhs_0,
            ratio: c.ratio(),
            log_scale,
            overflow: log_scale > OVERFLOW_EXPONENT,
            hjb,
            fp,
        }
    }

    pub fn components(&self) -> Components {
        Components {
            lhs: self.lhs,
            rhs_source: self.rhs_source,
            rhs_t: self.rhs_t,
            rhs_0: self.rhs_0,
        }
    }
}

fn check(fields: &[&SpaceTimeField]) -> Result<()> {
    let g = fields[0].grid();
    for f in fields {
        if f.grid() != g {
            return Err(Error::GridMismatch("Carleman inputs"));
        }
        if !f.is_finite() {
            return Err(Error::NonFinite("Carleman inputs"));
        }
    }
    Ok(())
}

/// Six-point Gauss-Legendre rule on `[0, 1]`.
const GAUSS: [(f64, f64); 6] = [
    (0.033_765_242_898_423_975, 0.085_662_246_189_584_87),
    (0.169_395_306_766_867_76, 0.180_380_786_524_069_47),
    (0.380_690_406_958_401_5, 0.233_956_967_286_345_69),
    (0.619_309_593_041_598_5, 0.233_956_967_286_345_69),
    (0.830_604_693_233_132_2, 0.180_380_786_524_069_47),
    (0.966_234_757_101_576, 0.085_662_246_189_584_87),
];

/// Relative weight `e^{2 s (phi(t) - phi(T))}`.
fn rel_weight(p: &CarlemanParams, t: f64, horizon: f64) -> f64 {
    (2.0 * p.s * (p.phi(t) - p.phi(horizon))).exp()
}

/// Integrates `sum_i density(phi(t), lerp_i(t))` over `Q`. Fields are linear in
/// time on each step; the weight and `phi` are resolved by Gauss points, since
/// the weight can change by many e-folds within one step at large `s`.
fn space_time_integral(
    g: &SpaceTimeGrid,
    params: &CarlemanParams,
    levels: &[Vec<Vec<f64>>],
    mut density: impl FnMut(f64, &[f64], &[f64]) -> f64,
) -> f64 {
    let (h, dt, horizon) = (g.h(), g.dt(), g.horizon());
    let nf = levels[0].len();
    let mut lo = vec![0.0; nf];
    let mut hi = vec![0.0; nf];
    let mut total = 0.0;
    for k in 0..g.n_t() {
        let (a, b) = (&levels[k], &levels[k + 1]);
        for (xi, wq) in GAUSS {
            let t = g.t(k) + xi * dt;
            let phi = params.phi(t);
            let w = wq * dt * h * rel_weight(params, t, horizon);
            if w == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for i in 0..g.n_x() {
                for j in 0..nf {
                    lo[j] = (1.0 - xi) * a[j][i] + xi * b[j][i];
                    hi[j] = (b[j][i] - a[j][i]) / dt;
                }
                acc += density(phi, &lo, &hi);
            }
            total += w * acc;
        }
    }
    total
}

fn hjb_components(
    u: &SpaceTimeField,
    f: &SpaceTimeField,
    params: &CarlemanParams,
    c: &DegenerateCoefficient,
) -> Result<Components> {
    let g = *u.grid();
    let (h, horizon) = (g.h(), g.horizon());
    let a = c.sample(&g);
    let (s, l) = (params.s, params.lambda);
    let levels: Vec<Vec<Vec<f64>>> = (0..=g.n_t())
        .map(|k| {
            let uk = u.slice(k);
            let ux = d1(&uk, h, Closure::Dirichlet);
            let uxx = d2(&uk, h, Closure::Dirichlet);
            vec![uk, ux, uxx, f.slice(k), a.clone()]
        })
        .collect();
    let lhs = space_time_integral(&g, params, &levels, |phi, v, dv| {
        let (um, ux, uxx, a) = (v[0], v[1], v[2], v[4]);
        dv[0] * dv[0] / a
            + a * uxx * uxx
            + s * l * phi * ux * ux
            + (s * l * phi).powi(2) * um * um / a
    });
    let src = space_time_integral(&g, params, &levels, |phi, v, _| {
        s * phi * v[3] * v[3] / v[4]
    });
    let bracket = |k: usize, phi: f64| -> Result<f64> {
        let prof = u.slice(k);
        let l2 = weighted_norm_sq(&prof, NormKind::L2InvA, c, &g)?;
        let h1 = weighted_norm_sq(&prof, NormKind::H1InvA, c, &g)?;
        Ok(s * (s * l * phi * l2 + h1))
    };
    Ok(Components {
        lhs,
        rhs_source: src,
        rhs_t: bracket(g.n_t(), params.phi(horizon))?,
        rhs_0: bracket(0, 1.0)? * rel_weight(params, 0.0, horizon),
    })
}

fn fp_components(
    m: &SpaceTimeField,
    gsrc: &SpaceTimeField,
    params: &CarlemanParams,
    c: &DegenerateCoefficient,
) -> Result<Components> {
    let g = *m.grid();
    let (h, horizon) = (g.h(), g.horizon());
    let a = c.sample(&g);
    let (s, l) = (params.s, params.lambda);
    let levels: Vec<Vec<Vec<f64>>> = (0..=g.n_t())
        .map(|k| {
            let mk = m.slice(k);
            let v: Vec<f64> = mk.iter().zip(&a).map(|(m, a)| a * m).collect();
            let vx = d1(&v, h, Closure::Dirichlet);
            let vxx = d2(&v, h, Closure::Dirichlet);
            vec![mk, vx, vxx, gsrc.slice(k), a.clone()]
        })
        .collect();
    let lhs = space_time_integral(&g, params, &levels, |phi, v, dv| {
        let (mm, vx, vxx, a) = (v[0], v[1], v[2], v[4]);
        (a * vxx * vxx + a * dv[0] * dv[0]) / (s * phi)
            + l * vx * vx
            + s * l * l * phi * a * mm * mm
    });
    let src = space_time_integral(&g, params, &levels, |_, v, _| v[4] * v[3] * v[3]);
    let pieces = |k: usize| -> Result<(f64, f64)> {
        let prof = m.slice(k);
        let l2a = weighted_norm_sq(&prof, NormKind::L2A, c, &g)?;
        let v: Vec<f64> = prof.iter().zip(&a).map(|(m, a)| a * m).collect();
        let vx = d1(&v, h, Closure::Dirichlet);
        Ok((l2a, h * vx.iter().map(|x| x * x).sum::<f64>()))
    };
    let (l2t, divt) = pieces(g.n_t())?;
    let (l20, div0) = pieces(0)?;
    Ok(Components {
        lhs,
        rhs_source: src,
        rhs_t: s * l * (params.phi(horizon) * l2t + divt),
        rhs_0: (s * l * l20 + div0) * rel_weight(params, 0.0, horizon),
    })
}

/// HJB estimate: `u_t + a u_xx + d1 u_x = F`, the drift being absorbed into `C`.
pub fn evaluate_hjb_carleman(
    u: &SpaceTimeField,
    f: &SpaceTimeField,
    params: &CarlemanParams,
    c: &DegenerateCoefficient,
) -> Result<CarlemanReport> {
    check(&[u, f])?;
    let comp = hjb_components(u, f, params, c)?;
    Ok(CarlemanReport::build(
        Estimate::Hjb,
        params,
        u.grid().horizon(),
        comp,
        None,
        None,
    ))
}

/// FP estimate for `m_t - (a m)_xx + c1 m_x = G`.
pub fn evaluate_fp_carleman(
    m: &SpaceTimeField,
    g: &SpaceTimeField,
    params: &CarlemanParams,
    c: &DegenerateCoefficient,
) -> Result<CarlemanReport> {
    check(&[m, g])?;
    let comp = fp_components(m, g, params, c)?;
    Ok(CarlemanReport::build(
        Estimate::Fp,
        params,
        m.grid().horizon(),
        comp,
        None,
        None,
    ))
}

/// Coupled estimate: both left sides against the `F` and `G` source terms plus
/// all four boundary brackets. Coupling terms stay on the left, absorbed into `C`.
pub fn evaluate_mfg_carleman(
    u: &SpaceTimeField,
    m: &SpaceTimeField,
    f: &SpaceTimeField,
    g: &SpaceTimeField,
    params: &CarlemanParams,
    c: &DegenerateCoefficient,
) -> Result<CarlemanReport> {
    check(&[u, m, f, g])?;
    let hc = hjb_components(u, f, params, c)?;
    let fc = fp_components(m, g, params, c)?;
    Ok(CarlemanReport::build(
        Estimate::Mfg,
        params,
        u.grid().horizon(),
        hc.add(fc),
        Some(hc),
        Some(fc),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn zero_solution_reports_zero() {
        let g = build_grid(16, 8, 1.0).unwrap();
        let z = SpaceTimeField::zeros(&g);
        let p = CarlemanParams::new(2.0, 2.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        for r in [
            evaluate_hjb_carleman(&z, &z, &p, &c).unwrap(),
            evaluate_fp_carleman(&z, &z, &p, &c).unwrap(),
            evaluate_mfg_carleman(&z, &z, &z, &z, &p, &c).unwrap(),
        ] {
            assert_eq!(r.components(), Components::default());
            assert_eq!(r.ratio, 0.0);
        }
    }

    #[test]
    fn quadratic_homogeneity() {
        let g = build_grid(32, 16, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let u = SpaceTimeField::from_fn(&g, |x, t| (-t).exp() * x * (1.0 - x));
        let f = SpaceTimeField::from_fn(&g, |x, t| -3.0 * (-t).exp() * x * (1.0 - x));
        let p = CarlemanParams::new(2.0, 2.0).unwrap();
        let r1 = evaluate_hjb_carleman(&u, &f, &p, &c).unwrap();
        let r2 = evaluate_hjb_carleman(&u.scaled(2.0), &f.scaled(2.0), &p, &c).unwrap();
        assert!((r2.lhs - 4.0 * r1.lhs).abs() <= 1e-12 * r2.lhs);
        assert!((r2.rhs_t - 4.0 * r1.rhs_t).abs() <= 1e-12 * r2.rhs_t);
        assert!((r2.ratio - r1.ratio).abs() <= 1e-12 * r1.ratio);
    }

    #[test]
    fn coupled_report_is_sum_of_scalar_reports() {
        let g = build_grid(24, 12, 1.0).unwrap();
        let c = DegenerateCoefficient::default();
        let u = SpaceTimeField::from_fn(&g, |x, t| (1.0 + t) * x * x * (1.0 - x));
        let m = SpaceTimeField::from_fn(&g, |x, t| (2.0 - t) * (3.0 * x).cos());
        let f = SpaceTimeField::from_fn(&g, |x, t| x - t);
        let gs = SpaceTimeField::from_fn(&g, |x, t| x * t);
        let p = CarlemanParams::new(3.0, 1.5).unwrap();
        let h = evaluate_hjb_carleman(&u, &f, &p, &c).unwrap();
        let fp = evaluate_fp_carleman(&m, &gs, &p, &c).unwrap();
        let mfg = evaluate_mfg_carleman(&u, &m, &f, &gs, &p, &c).unwrap();
        let sum = h.components().add(fp.components());
        for (a, b) in [
            (mfg.lhs, sum.lhs),
            (mfg.rhs_source, sum.rhs_source),
            (mfg.rhs_t, sum.rhs_t),
            (mfg.rhs_0, sum.rhs_0),
        ] {
            assert!((a - b).abs() <= 1e-14 * b.abs());
        }
        assert_eq!(mfg.hjb, Some(h.components()));
        assert_eq!(mfg.fp, Some(fp.components()));
    }

    proptest::proptest! {
        #[test]
        fn components_nonnegative(seed in 0u64..1000, s in 0.5f64..20.0, l in 0.2f64..3.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = build_grid(12, 6, 1.0).unwrap();
            let mut rand_field = || {
                let vals = ndarray::Array2::from_shape_fn((12, 7), |_| rng.gen_range(-1.0..1.0));
                SpaceTimeField::from_array(&g, vals).unwrap()
            };
            let (u, m, f, gs) = (rand_field(), rand_field(), rand_field(), rand_field());
            let p = CarlemanParams::new(s, l).unwrap();
            let c = DegenerateCoefficient::WrightFischer;
            let r = evaluate_mfg_carleman(&u, &m, &f, &gs, &p, &c).unwrap();
            for v in [r.lhs, r.rhs_source, r.rhs_t, r.rhs_0] {
                proptest::prop_assert!(v >= 0.0 && v.is_finite());
            }
            proptest::prop_assert!(r.ratio.is_finite());
        }
    }
}
