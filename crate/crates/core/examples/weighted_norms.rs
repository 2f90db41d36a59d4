//! Degenerate coefficients on a cell-centered grid and the weighted norms.
use degenmfg::domain::{build_grid, weighted_norm_sq, DegenerateCoefficient, NormKind};

fn main() -> degenmfg::Result<()> {
    let grid = build_grid(256, 4, 1.0)?;
    let families = [
        DegenerateCoefficient::WrightFischer,
        DegenerateCoefficient::Power { beta: 2.0, delta: 2.0 },
        DegenerateCoefficient::QuadraticOil { gamma: 1.0 },
    ];
    let bubble: Vec<f64> = grid.nodes().iter().map(|x| x * (1.0 - x)).collect();
    for c in families {
        c.validate()?;
        let (bound, i) = c.derivative_bound(&grid);
        println!("{}: max |a_x|/sqrt(a) = {bound:.4} at x = {:.4}", c.name(), grid.x(i));
        for kind in NormKind::ALL {
            let v = weighted_norm_sq(&bubble, kind, &c, &grid)?;
            println!("  |x(1-x)|^2 in {:<8} = {v:.6}", kind.tag());
        }
    }
    println!("(Wright-Fischer L2_inv_a value should be close to 1/6 = {:.6})", 1.0 / 6.0);
    Ok(())
}
