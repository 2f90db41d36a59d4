//! Implicit Euler solves of the linear HJB (backward) and Fokker-Planck (forward)
//! equations against closed-form solutions.
use degenmfg::domain::{build_grid, DegenerateCoefficient};
use degenmfg::manufactured::{make_case, EquationTag, Forcing};
use degenmfg::solvers::{isomorphism_residual, solve_fp_linear, solve_hjb_linear};

fn main() -> degenmfg::Result<()> {
    let c = DegenerateCoefficient::WrightFischer;
    println!("operator identity residual: {:.2e}", isomorphism_residual(&c, &build_grid(64, 2, 1.0)?));
    for n in [32, 64, 128] {
        let g = build_grid(n, 4 * n, 1.0)?;
        let hjb = make_case("drift-bubble", c, EquationTag::LinearHjb)?;
        let u = solve_hjb_linear(&hjb.hjb_problem(&g, Forcing::Continuous), None)?;
        let eu = u.sub(&hjb.sample_u(&g))?.max_abs();

        let fp = make_case("fp-drift", c, EquationTag::LinearFp)?;
        let m = solve_fp_linear(&fp.fp_problem(&g, Forcing::Continuous), None)?;
        let am = |f: &degenmfg::domain::SpaceTimeField| f.mul_profile(&c.sample(&g));
        let em = am(&m)?.sub(&am(&fp.sample_m(&g))?)?.max_abs();
        println!("n_x = {n:4}, n_t = {:4}: max|u - u*| = {eu:.3e}, max|a(m - m*)| = {em:.3e}", 4 * n);
    }
    Ok(())
}
