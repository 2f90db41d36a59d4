//! Observed space and time orders on the manufactured catalog.
use degenmfg::domain::DegenerateCoefficient;
use degenmfg::manufactured::{catalog, convergence_study, default_ladders};
use degenmfg::mfg::IterConfig;

fn main() -> degenmfg::Result<()> {
    let (space, time) = default_ladders(1.0)?;
    let cfg = IterConfig::default();
    for c in [DegenerateCoefficient::WrightFischer, DegenerateCoefficient::default()] {
        println!("{}", c.name());
        for case in catalog(c) {
            let r = convergence_study(&case, &space, &time, &cfg)?;
            println!(
                "  {:<15} space u {:>6} m {:>6} | time u {:>6} m {:>6}",
                case.id,
                r.space.order_u.to_string(),
                r.space.order_m.to_string(),
                r.time.order_u.to_string(),
                r.time.order_m.to_string()
            );
        }
    }
    Ok(())
}
