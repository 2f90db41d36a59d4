//! Both sides of the Carleman estimates on a manufactured solution, swept over (s, lambda).
use degenmfg::carleman::{sweep_parameters, weight_at, CarlemanBundle, CarlemanParams};
use degenmfg::domain::{build_grid, DegenerateCoefficient, SpaceTimeField};
use degenmfg::manufactured::{make_case, EquationTag};

fn main() -> degenmfg::Result<()> {
    let w = weight_at(&CarlemanParams::new(2.0, 1.0)?, 1.0);
    println!("weight e^(2 s phi(1)) at s=2, lambda=1: {:.4} (overflow: {})", w.weight, w.overflow);

    let c = DegenerateCoefficient::WrightFischer;
    let case = make_case("coupled-wave", c, EquationTag::LinearizedMfg)?;
    let s_list = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    for n in [64, 128] {
        let g = build_grid(n, n, 1.0)?;
        let (u, m) = (case.sample_u(&g), case.sample_m(&g));
        let f = SpaceTimeField::from_fn(&g, |x, t| case.hjb_source(x, t));
        let gs = SpaceTimeField::from_fn(&g, |x, t| case.fp_source(x, t));
        let bundle = CarlemanBundle::Mfg { u: &u, m: &m, f: &f, g: &gs, coefficient: &c };
        let table = sweep_parameters(&bundle, &s_list, &[1.0, 2.0, 3.0])?;
        println!("n = {n}");
        for (j, l) in table.lambda_values.iter().enumerate() {
            let ratios: Vec<String> = (0..s_list.len())
                .map(|i| table.cell(i, j).ratio().map_or("overflow".into(), |r| format!("{r:.4}")))
                .collect();
            let sm = &table.summaries[j];
            println!(
                "  lambda {l}: ratios [{}], indicator {:.3}, s0 (heuristic) {:?}",
                ratios.join(", "),
                sm.indicator.unwrap_or(f64::NAN),
                sm.s0_heuristic
            );
        }
    }
    Ok(())
}
