use serde::{Deserialize, Serialize};

use super::stencil::{d1, Closure};
use super::{DegenerateCoefficient, SpaceTimeGrid};
use crate::error::{Error, Result};

/// The weighted spaces the estimates are phrased in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    /// `‖f‖²_{1/a} = ∫ f²/a`.
    #[serde(rename = "L2_inv_a")]
    L2InvA,
    /// `‖f‖²_{1,1/a} = ‖f‖²_{1/a} + ∫ f_x²`.
    #[serde(rename = "H1_inv_a")]
    H1InvA,
    /// Seminorm `∫ a f_xx²`.
    #[serde(rename = "H2_inv_a")]
    H2InvA,
    /// `‖f‖²_a = ∫ a f²`.
    #[serde(rename = "L2_a")]
    L2A,
    /// `‖f‖²_{1,a} = ‖f‖²_a + ∫ ((a f)_x)²`.
    #[serde(rename = "H1a_div")]
    H1aDiv,
    #[serde(rename = "L2_plain")]
    L2Plain,
}

impl NormKind {
    pub const ALL: [NormKind; 6] = [
        NormKind::L2InvA,
        NormKind::H1InvA,
        NormKind::H2InvA,
        NormKind::L2A,
        NormKind::H1aDiv,
        NormKind::L2Plain,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            NormKind::L2InvA => "L2_inv_a",
            NormKind::H1InvA => "H1_inv_a",
            NormKind::H2InvA => "H2_inv_a",
            NormKind::L2A => "L2_a",
            NormKind::H1aDiv => "H1a_div",
            NormKind::L2Plain => "L2_plain",
        }
    }
}

fn midpoint(h: f64, it: impl Iterator<Item = f64>) -> f64 {
    h * it.sum::<f64>()
}

/// Squared norm of a spatial profile by the midpoint rule on the cell-centered nodes.
pub fn weighted_norm_sq(
    f: &[f64],
    kind: NormKind,
    c: &DegenerateCoefficient,
    grid: &SpaceTimeGrid,
) -> Result<f64> {
    if f.len() != grid.n_x() {
        return Err(Error::ShapeMismatch {
            expected: (grid.n_x(), 1),
            found: (f.len(), 1),
        });
    }
    if f.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("weighted norm input"));
    }
    let h = grid.h();
    let a = c.sample(grid);
    let val = match kind {
        NormKind::L2InvA => midpoint(h, f.iter().zip(&a).map(|(v, a)| v * v / a)),
        NormKind::L2A => midpoint(h, f.iter().zip(&a).map(|(v, a)| a * v * v)),
        NormKind::L2Plain => midpoint(h, f.iter().map(|v| v * v)),
        NormKind::H1InvA => {
            let fx = d1(f, h, Closure::Dirichlet);
            midpoint(h, f.iter().zip(&a).map(|(v, a)| v * v / a))
                + midpoint(h, fx.iter().map(|v| v * v))
        }
        NormKind::H2InvA => {
            let fxx = super::stencil::d2(f, h, Closure::Dirichlet);
            midpoint(h, fxx.iter().zip(&a).map(|(v, a)| a * v * v))
        }
        NormKind::H1aDiv => {
            let af: Vec<f64> = f.iter().zip(&a).map(|(v, a)| a * v).collect();
            let afx = d1(&af, h, Closure::Dirichlet);
            midpoint(h, f.iter().zip(&a).map(|(v, a)| a * v * v))
                + midpoint(h, afx.iter().map(|v| v * v))
        }
    };
    Ok(val)
}

/// Norm (square root of [`weighted_norm_sq`]).
pub fn weighted_norm(
    f: &[f64],
    kind: NormKind,
    c: &DegenerateCoefficient,
    grid: &SpaceTimeGrid,
) -> Result<f64> {
    weighted_norm_sq(f, kind, c, grid).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;
    use proptest::prelude::*;

    #[test]
    fn bubble_in_inverse_weight() {
        let g = build_grid(256, 2, 1.0).unwrap();
        let c = DegenerateCoefficient::WrightFischer;
        let f: Vec<f64> = g.nodes().iter().map(|x| x * (1.0 - x)).collect();
        let v = weighted_norm_sq(&f, NormKind::L2InvA, &c, &g).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-4);
        let one = vec![1.0; 256];
        let v = weighted_norm_sq(&one, NormKind::L2A, &c, &g).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-4);
    }

    #[test]
    fn zero_and_nan() {
        let g = build_grid(8, 2, 1.0).unwrap();
        let c = DegenerateCoefficient::default();
        for kind in NormKind::ALL {
            assert_eq!(weighted_norm(&[0.0; 8], kind, &c, &g).unwrap(), 0.0);
        }
        let mut f = vec![0.0; 8];
        f[3] = f64::NAN;
        assert!(weighted_norm(&f, NormKind::L2Plain, &c, &g).is_err());
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let perr = |n: usize| {
            let g = build_grid(n, 2, 1.0).unwrap();
            let f: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
            let c = DegenerateCoefficient::Uniform;
            (weighted_norm_sq(&f, NormKind::L2Plain, &c, &g).unwrap() - 0.2).abs()
        };
        let r = perr(32) / perr(64);
        assert!((3.8..=4.2).contains(&r), "ratio {r}");
    }

    proptest! {
        #[test]
        fn scaling_and_monotonicity(
            vals in proptest::collection::vec(-5.0f64..5.0, 16),
            s in -10.0f64..10.0,
        ) {
            let g = build_grid(16, 2, 1.0).unwrap();
            let c = DegenerateCoefficient::WrightFischer;
            let f: Vec<f64> = vals.iter().zip(c.sample(&g)).map(|(v, a)| v * a).collect();
            let sf: Vec<f64> = f.iter().map(|v| s * v).collect();
            for kind in NormKind::ALL {
                let n = weighted_norm(&f, kind, &c, &g).unwrap();
                let ns = weighted_norm(&sf, kind, &c, &g).unwrap();
                prop_assert!((ns - s.abs() * n).abs() <= 1e-12 * (1.0 + ns));
            }
            let l2 = weighted_norm(&f, NormKind::L2InvA, &c, &g).unwrap();
            let h1 = weighted_norm(&f, NormKind::H1InvA, &c, &g).unwrap();
            prop_assert!(h1 >= l2);
            let l2a = weighted_norm(&f, NormKind::L2A, &c, &g).unwrap();
            let h1a = weighted_norm(&f, NormKind::H1aDiv, &c, &g).unwrap();
            prop_assert!(h1a >= l2a);
        }
    }
}
