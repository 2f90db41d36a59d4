use crate::domain::stencil::{d2, Closure};
use crate::domain::{DegenerateCoefficient, SpaceTimeGrid};

/// Max-norm of `T^{-1} A T - Ã` over the unit basis of grid fields, where
/// `A u = a D2 u`, `Ã u = D2 (a u)` and `T u = a u`.
pub fn isomorphism_residual(c: &DegenerateCoefficient, grid: &SpaceTimeGrid) -> f64 {
    let n = grid.n_x();
    let h = grid.h();
    let a = c.sample(grid);
    let mut worst = 0.0_f64;
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let te: Vec<f64> = e.iter().zip(&a).map(|(v, a)| a * v).collect();
        let dte = d2(&te, h, Closure::Dirichlet);
        for i in 0..n {
            let ate = a[i] * dte[i];
            let lhs = ate / a[i];
            worst = worst.max((lhs - dte[i]).abs());
        }
        e[j] = 0.0;
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn identity_holds_to_rounding() {
        for n in [32, 64, 128] {
            let g = build_grid(n, 2, 1.0).unwrap();
            assert!(isomorphism_residual(&DegenerateCoefficient::WrightFischer, &g) < 1e-10);
            assert!(isomorphism_residual(&DegenerateCoefficient::default(), &g) < 1e-10);
        }
        let g = build_grid(16, 2, 1.0).unwrap();
        assert_eq!(isomorphism_residual(&DegenerateCoefficient::Uniform, &g), 0.0);
    }
}
