//! Hölder stability of the backward problem: error at t0 against the final-data
//! discrepancy D0, compared with the envelope D0^theta + D0.
use degenmfg::stability::{run_holder_experiment, theoretical_theta, ProblemSpec};

fn main() -> degenmfg::Result<()> {
    let spec = ProblemSpec::default();
    let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    for t0 in [0.25, 0.5, 0.75] {
        let r = run_holder_experiment(&spec, t0, &ladder)?;
        println!(
            "t0 = {t0}: theta = {:.4} (check {:.4}), slope = {:.4}, C_fit = {:.4e}, stable = {}",
            r.theta.unwrap_or(f64::NAN),
            theoretical_theta(t0, spec.horizon, spec.lambda)?,
            r.slope,
            r.c_fit,
            r.c_fit_stable
        );
        for rec in &r.records {
            println!(
                "  eps {:.0e}: D0 {:.4e}  err {:.4e}  err/envelope {:.4e}  s* {:.3}",
                rec.epsilon, rec.discrepancy, rec.err, rec.ratio, rec.optimal_s
            );
        }
    }
    Ok(())
}
