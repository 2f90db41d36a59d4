use crate::error::{invalid, Result};

fn check_times(t0: f64, horizon: f64, lambda: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("T", "must be positive and finite"));
    }
    if !(0.0..horizon).contains(&t0) {
        return Err(invalid("t0", "must lie in [0, T)"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", "must be positive and finite"));
    }
    Ok(())
}

/// `3 phi(T) + alpha(t0)`.
fn denominator(t0: f64, horizon: f64, lambda: f64) -> f64 {
    3.0 * (lambda * horizon).exp() + (lambda * t0).exp_m1()
}

/// Hölder exponent `theta = alpha(t0) / (3 phi(T) + alpha(t0))`, `alpha(t0) = e^{lambda t0} - 1`.
pub fn theoretical_theta(t0: f64, horizon: f64, lambda: f64) -> Result<f64> {
    check_times(t0, horizon, lambda)?;
    Ok((lambda * t0).exp_m1() / denominator(t0, horizon, lambda))
}

/// Carleman parameter balancing the a-priori bound `M` against the data size `D0`:
/// zero when `M <= D0`, else `2 ln(M / D0) / (3 phi(T) + alpha(t0))`.
pub fn optimal_s(m_bound: f64, d0: f64, t0: f64, horizon: f64, lambda: f64) -> Result<f64> {
    check_times(t0, horizon, lambda)?;
    if !(m_bound > 0.0 && m_bound.is_finite()) {
        return Err(invalid("M", "must be positive and finite"));
    }
    if !(d0 > 0.0 && d0.is_finite()) {
        return Err(invalid("D0", "must be positive and finite"));
    }
    if m_bound <= d0 {
        return Ok(0.0);
    }
    Ok(2.0 * (m_bound / d0).ln() / denominator(t0, horizon, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;

    // (t0, T, lambda, M, D0, theta, s) evaluated at 50 digits.
    const LATTICE: [(f64, f64, f64, f64, f64, f64, f64); 20] = [
        (0.0, 1.0, 1.0, 1000.0, 1.0, 0.0, 1.694_147_434_520_686_2),
        (0.5, 1.0, 1.0, std::f64::consts::E, 1.0, 0.073_688_459_311_369_9, 0.227_180_647_959_460_67),
        (0.5, 1.0, 1.0, 1e6, 1.0, 0.073_688_459_311_369_9, 3.138_616_640_449_093_7),
        (0.25, 1.0, 1.0, 10.0, 1.0, 0.033_656_803_141_548_75, 0.545_709_282_608_087_8),
        (0.75, 1.0, 1.0, 10.0, 1.0, 0.120_472_242_162_896_02, 0.496_683_231_509_820_34),
        (0.1, 1.0, 2.0, 100.0, 1.0, 0.009_889_097_326_343_113, 0.411_385_807_042_783_6),
        (0.9, 1.0, 2.0, 100.0, 2.0, 0.185_534_101_737_601_53, 0.287_471_028_187_241_5),
        (0.5, 2.0, 0.5, 1e4, 3.0, 0.033_656_803_141_548_75, 1.922_467_632_802_213_7),
        (1.0, 2.0, 0.5, 2.0, 1.0, 0.073_688_459_311_369_9, 0.157_469_625_610_881_65),
        (1.5, 2.0, 0.5, 50.0, 0.1, 0.120_472_242_162_896_02, 1.340_533_143_501_687_6),
        (0.01, 1.0, 3.0, 1e8, 1.0, 0.000_505_158_673_758_506_1, 0.611_098_936_437_295_6),
        (0.3, 0.5, 4.0, 7.0, 1.0, 0.094_747_821_244_237_6, 0.158_932_289_276_678_07),
        (0.2, 3.0, 0.3, 100.0, 0.001, 0.008_310_642_320_908_964, 3.094_603_788_601_520_9),
        (2.9, 3.0, 0.3, 5.0, 2.0, 0.158_219_840_918_708_06, 0.209_062_281_781_152_32),
        (0.05, 0.1, 10.0, 1e10, 1.0, 0.073_688_459_311_369_9, 5.231_027_734_081_823),
        (0.6, 1.0, 1.0, 1.0, 1.0, 0.091_580_936_964_840_26, 0.0),
        (0.0, 2.0, 2.0, 1.0, 5.0, 0.0, 0.0),
        (0.4, 1.0, 1.5, 3.0, 0.5, 0.057_623_051_927_222_03, 0.251_172_090_669_566_3),
        (0.8, 1.0, 0.1, 1e12, 0.01, 0.024_504_846_427_923_123, 18.969_161_463_517_967),
        (0.5, 1.0, 1.0, 0.5, 1.0, 0.073_688_459_311_369_9, 0.0),
    ];

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300) || a == b
    }

    #[test]
    fn matches_high_precision_lattice() {
        for (t0, t, l, m, d, theta, s) in LATTICE {
            let th = theoretical_theta(t0, t, l).unwrap();
            let so = optimal_s(m, d, t0, t, l).unwrap();
            assert!(close(th, theta), "theta({t0},{t},{l}) = {th}, want {theta}");
            assert!(close(so, s), "s({m},{d},{t0},{t},{l}) = {so}, want {s}");
        }
    }

    #[test]
    fn theta_boundary_and_monotonicity() {
        assert_eq!(theoretical_theta(0.0, 1.0, 1.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for i in 1..50 {
            let th = theoretical_theta(i as f64 / 50.0, 1.0, 1.3).unwrap();
            assert!(th > prev && th < 1.0);
            prev = th;
        }
    }

    #[test]
    fn optimal_s_is_continuous_at_the_branch() {
        assert_eq!(optimal_s(1.0, 1.0, 0.5, 1.0, 1.0).unwrap(), 0.0);
        let s = optimal_s(1.0 + 1e-12, 1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(s > 0.0 && s < 1e-11);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(theoretical_theta(1.0, 1.0, 1.0).is_err());
        assert!(theoretical_theta(-0.1, 1.0, 1.0).is_err());
        assert!(theoretical_theta(0.5, 1.0, 0.0).is_err());
        assert!(optimal_s(0.0, 1.0, 0.5, 1.0, 1.0).is_err());
        assert!(optimal_s(1.0, 0.0, 0.5, 1.0, 1.0).is_err());
    }
}
