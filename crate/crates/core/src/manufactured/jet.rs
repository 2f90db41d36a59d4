use serde::Serialize;

/// Value with its first two `x`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet { v: 0.0, d1: 0.0, d2: 0.0 };

    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet::new(c * self.v, c * self.d1, c * self.d2)
    }

    /// Leibniz rule.
    pub fn product(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

/// Time factor `tau(t)` of a separable field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFactor {
    /// `e^{rate t}`.
    Exp { rate: f64 },
    /// `1 + c t^2`.
    Quadratic { c: f64 },
    /// `cos(w t)`.
    Cos { w: f64 },
}

impl TimeFactor {
    /// `k`-th derivative, `k <= 3`.
    pub fn deriv(&self, t: f64, k: u32) -> f64 {
        match *self {
            TimeFactor::Exp { rate } => rate.powi(k as i32) * (rate * t).exp(),
            TimeFactor::Quadratic { c } => match k {
                0 => 1.0 + c * t * t,
                1 => 2.0 * c * t,
                2 => 2.0 * c,
                _ => 0.0,
            },
            TimeFactor::Cos { w } => {
                let (s, co) = (w * t).sin_cos();
                let wk = w.powi(k as i32);
                match k % 4 {
                    0 => wk * co,
                    1 => -wk * s,
                    2 => -wk * co,
                    _ => wk * s,
                }
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.deriv(t, 0)
    }
}

/// Smooth spatial factor `g(x)` multiplying `a(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFactor {
    /// `c0 + c1 x`.
    Affine { c0: f64, c1: f64 },
    /// `c0 + cos(k pi x)`.
    CosPi { c0: f64, k: f64 },
    /// `e^{c x}`.
    Exp { c: f64 },
}

impl SpaceFactor {
    pub fn jet(&self, x: f64) -> Jet {
        match *self {
            SpaceFactor::Affine { c0, c1 } => Jet::new(c0 + c1 * x, c1, 0.0),
            SpaceFactor::CosPi { c0, k } => {
                let w = k * std::f64::consts::PI;
                let (s, c) = (w * x).sin_cos();
                Jet::new(c0 + c, -w * s, -w * w * c)
            }
            SpaceFactor::Exp { c } => {
                let e = (c * x).exp();
                Jet::new(e, c * e, c * c * e)
            }
        }
    }
}

/// Spatial shape of a lower-order coefficient: `kappa * basis(x)`, constant in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "basis", rename_all = "snake_case")]
pub enum CoefShape {
    Zero,
    Const { kappa: f64 },
    /// `kappa * x`.
    Linear { kappa: f64 },
    /// `kappa * a(x)`.
    A { kappa: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // x^2 * x^3 = x^5
        let x = 0.7;
        let f = Jet::new(x * x, 2.0 * x, 2.0);
        let g = Jet::new(x * x * x, 3.0 * x * x, 6.0 * x);
        let p = f.product(g);
        assert!((p.v - x.powi(5)).abs() < 1e-15);
        assert!((p.d1 - 5.0 * x.powi(4)).abs() < 1e-14);
        assert!((p.d2 - 20.0 * x.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn time_factor_derivatives_by_differences() {
        let h = 1e-5;
        for tf in [
            TimeFactor::Exp { rate: -0.7 },
            TimeFactor::Quadratic { c: 0.5 },
            TimeFactor::Cos { w: 1.3 },
        ] {
            for k in 1..=3 {
                let t = 0.4;
                let fd = (tf.deriv(t + h, k - 1) - tf.deriv(t - h, k - 1)) / (2.0 * h);
                assert!((fd - tf.deriv(t, k)).abs() < 1e-8, "{tf:?} k={k}");
            }
        }
    }
}
