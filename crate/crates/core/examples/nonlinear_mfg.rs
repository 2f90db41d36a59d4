//! Nonlinear MFG solve by damped Picard iteration, then the linearized system
//! satisfied by the difference of two solutions.
use degenmfg::mfg::{check_coefficient_bounds, form_difference_coefficients, linearized_residual, MfgData};
use degenmfg::stability::ProblemSpec;

fn main() -> degenmfg::Result<()> {
    let spec = ProblemSpec::default();
    let g = spec.grid()?;
    let base = spec.solve(0.0)?;
    println!(
        "base solve: {:?} after {} sweeps, residual {:.2e}",
        base.termination,
        base.sweeps(),
        base.residual
    );
    for (k, r) in base.residuals.iter().enumerate().step_by(5) {
        println!("  sweep {:3}: {r:.3e}", k + 1);
    }

    let pert = spec.solve(1e-2)?;
    let (p, d) = spec.coefficient_fields(&g);
    let diff = form_difference_coefficients(&base, &pert, &p, &d)?;
    let bounds = check_coefficient_bounds(&diff.coeffs, &spec.coefficient, &g)?;
    println!("difference-system coefficient bounds:");
    for e in &bounds.entries {
        println!("  {:<12} {:.3e} at (x, t) = ({:.3}, {:.3})", e.name, e.value, e.x, e.t);
    }
    let mut data = MfgData::new(spec.coefficient, g);
    data.initial = diff.m.slice(0);
    data.terminal = diff.u.slice(g.n_t());
    let (rh, rf) = linearized_residual(&diff.u, &diff.m, &diff.coeffs, &data)?;
    println!("difference satisfies the linearized system: residual HJB {rh:.2e}, FP {rf:.2e}");
    Ok(())
}
