//! Logarithmic stability at t0 = 0: error of the initial state against
//! D = sum of time derivatives of the final-data discrepancy.
use degenmfg::stability::{run_log_experiment, ProblemSpec};

fn main() -> degenmfg::Result<()> {
    let ladder = [5e-3, 5e-4, 5e-5, 5e-6];
    for n in [64, 128] {
        let spec = ProblemSpec::default().with_grid(n, n);
        let r = run_log_experiment(&spec, 0.5, &ladder)?;
        println!(
            "n = {n}: M = {:.4}, C_fit = {:.4e}, running C_fit growth {:.3}x, slope {:.4}",
            r.m_bound,
            r.c_fit,
            1.0 + r.c_fit_variation,
            r.slope
        );
        for rec in &r.records {
            println!(
                "  eps {:.0e}: D {:.4e}  err(0) {:.4e}  (ln 1/D)^-1/2 {:.4}",
                rec.epsilon, rec.discrepancy, rec.err, rec.envelope
            );
        }
    }
    Ok(())
}
