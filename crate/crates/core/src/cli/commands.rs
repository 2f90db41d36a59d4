use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{config_hash, BundleSource, Command, RunConfig};
use super::output::{num, Artifacts};
use super::{Args, CliError, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_OVERFLOW};
use crate::carleman::{sweep_parameters, CarlemanBundle};
use crate::domain::{build_grid, weighted_norm, NormKind, SpaceTimeField, SpaceTimeGrid};
use crate::manufactured::{catalog, convergence_study, make_case, EquationTag};
use crate::mfg::{check_coefficient_bounds, MfgCoefficients};
use crate::solvers::isomorphism_residual;
use crate::stability::{generate_pair, run_holder_experiment, run_log_experiment, StabilityResult};

/// Result of one command before it is wrapped with provenance.
struct Report {
    result: Value,
    units: Value,
    grids: Vec<SpaceTimeGrid>,
    exit: i32,
}

pub fn execute(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.display().to_string(),
        source: e,
    })?;
    let cfg = RunConfig::parse(&text)?;
    cfg.validate(args.command)?;
    let hash = config_hash(&text)?;
    let out = Artifacts::create(&args.out)?;
    let report = match args.command {
        Command::Solve => solve(&cfg, &out)?,
        Command::VerifyCarleman => verify_carleman(&cfg, &out)?,
        Command::StabilityHolder => stability(&cfg, &out, true)?,
        Command::StabilityLog => stability(&cfg, &out, false)?,
        Command::Convergence => convergence(&cfg, &out)?,
        Command::CoeffCheck => coeff_check(&cfg, &out)?,
    };
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "command": args.command.name(),
        "exit_code": report.exit,
        "provenance": {
            "config_sha256": hash,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "grids": report.grids,
            "seed": cfg.seed,
            "timestamp_unix": timestamp,
        },
        "config": cfg,
        "units": report.units,
        "result": report.result,
    });
    out.json("result.json", &doc)?;
    Ok(report.exit)
}

fn tagged(value: f64, norm: NormKind) -> Value {
    json!({ "value": value, "norm": norm.tag() })
}

fn solve(cfg: &RunConfig, out: &Artifacts) -> Result<Report, CliError> {
    let spec = &cfg.problem;
    let g = spec.grid()?;
    let c = spec.coefficient;
    let sol = spec.solve_unchecked(cfg.solve.epsilon)?;
    let norm = |f: &SpaceTimeField, k: usize, kind| weighted_norm(&f.slice(k), kind, &c, &g);
    let mut rows = vec![];
    for k in 0..=g.n_t() {
        rows.push(vec![
            num(g.t(k)),
            num(norm(&sol.u, k, NormKind::L2InvA)?),
            num(norm(&sol.u, k, NormKind::H1InvA)?),
            num(norm(&sol.m, k, NormKind::L2A)?),
            num(norm(&sol.m, k, NormKind::H1aDiv)?),
        ]);
    }
    out.csv(
        "norms.csv",
        &["t", "u_norm", "u_norm_h1", "m_norm", "m_norm_h1"],
        &["time", "L2_inv_a", "H1_inv_a", "L2_a", "H1a_div"],
        &rows,
    )?;
    let res_rows: Vec<Vec<String>> = sol
        .residuals
        .iter()
        .enumerate()
        .map(|(i, r)| vec![(i + 1).to_string(), num(*r)])
        .collect();
    out.csv("residuals.csv", &["sweep", "residual"], &["count", "max_abs_scheme_residual"], &res_rows)?;
    let n = g.n_t();
    let result = json!({
        "converged": sol.converged,
        "termination": sol.termination,
        "sweeps": sol.sweeps(),
        "residual": sol.residual,
        "epsilon": cfg.solve.epsilon,
        "norms": {
            "u_initial": tagged(norm(&sol.u, 0, NormKind::L2InvA)?, NormKind::L2InvA),
            "u_initial_h1": tagged(norm(&sol.u, 0, NormKind::H1InvA)?, NormKind::H1InvA),
            "u_terminal": tagged(norm(&sol.u, n, NormKind::L2InvA)?, NormKind::L2InvA),
            "m_initial": tagged(norm(&sol.m, 0, NormKind::L2A)?, NormKind::L2A),
            "m_terminal": tagged(norm(&sol.m, n, NormKind::L2A)?, NormKind::L2A),
            "m_terminal_h1": tagged(norm(&sol.m, n, NormKind::H1aDiv)?, NormKind::H1aDiv),
        },
        "bounds": sol.bounds,
        "warnings": sol.warnings,
    });
    let units = json!({
        "residual": "max abs scheme residual (HJB units; FP in a*m units)",
        "epsilon": "dimensionless perturbation amplitude",
        "bounds.value": "dimensionless ratio named by bounds.name",
        "bounds.x": "space",
        "bounds.t": "time",
    });
    Ok(Report {
        result,
        units,
        grids: vec![g],
        exit: if sol.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
    })
}

fn verify_carleman(cfg: &RunConfig, out: &Artifacts) -> Result<Report, CliError> {
    let spec = &cfg.problem;
    let g = spec.grid()?;
    let c = spec.coefficient;
    let sec = &cfg.carleman;
    let zero = SpaceTimeField::zeros(&g);
    let (u, m, f, gs, tag, source) = match sec.bundle {
        BundleSource::Manufactured => {
            let case = make_case(&sec.case, c, sec.tag)?;
            (
                case.sample_u(&g),
                case.sample_m(&g),
                SpaceTimeField::from_fn(&g, |x, t| case.hjb_source(x, t)),
                SpaceTimeField::from_fn(&g, |x, t| case.fp_source(x, t)),
                sec.tag,
                format!("manufactured:{}", sec.case),
            )
        }
        BundleSource::Difference => {
            let (a, b) = generate_pair(spec, sec.epsilon)?;
            (
                b.u.sub(&a.u)?,
                b.m.sub(&a.m)?,
                zero.clone(),
                zero.clone(),
                EquationTag::LinearizedMfg,
                format!("difference:eps={:e}", sec.epsilon),
            )
        }
    };
    let bundle = match tag {
        EquationTag::LinearHjb => CarlemanBundle::Hjb { u: &u, f: &f, coefficient: &c },
        EquationTag::LinearFp => CarlemanBundle::Fp { m: &m, g: &gs, coefficient: &c },
        _ => CarlemanBundle::Mfg {
            u: &u,
            m: &m,
            f: &f,
            g: &gs,
            coefficient: &c,
        },
    };
    let table = sweep_parameters(&bundle, &sec.s_list, &sec.lambda_list)?;
    let rows: Vec<Vec<String>> = table
        .cells
        .iter()
        .map(|cell| {
            let r = cell.report.as_ref();
            let get = |f: fn(&crate::carleman::CarlemanReport) -> f64| r.map_or(String::new(), |r| num(f(r)));
            vec![
                num(cell.lambda),
                num(cell.s),
                cell.overflow.to_string(),
                get(|r| r.ratio),
                get(|r| r.lhs),
                get(|r| r.rhs_source),
                get(|r| r.rhs_t),
                get(|r| r.rhs_0),
                get(|r| r.log_scale),
            ]
        })
        .collect();
    out.csv(
        "carleman_sweep.csv",
        &["lambda", "s", "overflow", "ratio", "lhs", "rhs_source", "rhs_t", "rhs_0", "log_scale"],
        &["1", "1", "bool", "1", "exp(log_scale)", "exp(log_scale)", "exp(log_scale)", "exp(log_scale)", "1"],
        &rows,
    )?;
    let overflow = table.overflow_fraction();
    let result = json!({
        "source": source,
        "estimate": tag,
        "overflow_fraction": overflow,
        "summaries": table.summaries,
        "cells": table.cells,
        "s0_note": "s0_heuristic is a heuristic: smallest s after which consecutive ratios change by under 50%",
    });
    let units = json!({
        "ratio": "1 (lhs / (rhs_source + rhs_t + rhs_0))",
        "lhs, rhs_source, rhs_t, rhs_0": "weighted integrals divided by exp(log_scale), log_scale = 2 s phi(T)",
        "hjb norms": "u: L2_inv_a and H1_inv_a brackets; F: L2_inv_a weighted by s phi",
        "fp norms": "m: L2_a and (a m)_x in L2_plain brackets; G: L2_a",
        "indicator": "1 (max ratio over upper half of s / median ratio)",
    });
    Ok(Report {
        result,
        units,
        grids: vec![g],
        exit: if overflow > 0.5 { EXIT_OVERFLOW } else { EXIT_OK },
    })
}

fn stability_rows(r: &StabilityResult) -> Vec<Vec<String>> {
    r.records
        .iter()
        .map(|x| {
            vec![
                num(x.epsilon),
                num(x.discrepancy),
                num(x.err),
                num(x.envelope),
                num(x.ratio),
                num(x.running_c),
                num(x.optimal_s),
                num(x.discrepancy.ln()),
                num(x.err.ln()),
            ]
        })
        .collect()
}

fn stability(cfg: &RunConfig, out: &Artifacts, holder: bool) -> Result<Report, CliError> {
    let spec = &cfg.problem;
    let (r, file, d_units, env_units) = if holder {
        let t0 = cfg.stability.t0.unwrap_or_default();
        (
            run_holder_experiment(spec, t0, &cfg.holder_ladder())?,
            "holder.csv",
            "H1_inv_a(u)+H1a_div(m) at T",
            "D0^theta + D0",
        )
    } else {
        let alpha = cfg.stability.alpha.unwrap_or_default();
        (
            run_log_experiment(spec, alpha, &cfg.log_ladder())?,
            "log.csv",
            "sum_k<=2 H1_inv_a(d_t^k u)+H1a_div(d_t^k m) at T",
            "ln(1/D)^-alpha",
        )
    };
    out.csv(
        file,
        &["epsilon", "discrepancy", "err", "envelope", "ratio", "running_c", "s", "ln_discrepancy", "ln_err"],
        &["1", d_units, "L2_inv_a(u)+L2_a(m) at t0", env_units, "1", "1", "1", "1", "1"],
        &stability_rows(&r),
    )?;
    let units = json!({
        "discrepancy": d_units,
        "err": "L2_inv_a(u) + L2_a(m) at t0",
        "envelope": env_units,
        "ratio, running_c, c_fit, ratio_spread": "1 (err / envelope)",
        "m_bound": "max of H1_inv_a(u(0)) and H1a_div(m(0)) over the pair",
        "slope": "1 (d ln err / d ln discrepancy)",
        "t0, grid.horizon": "time",
    });
    Ok(Report {
        result: serde_json::to_value(&r)?,
        units,
        grids: vec![r.grid],
        exit: EXIT_OK,
    })
}

fn convergence(cfg: &RunConfig, out: &Artifacts) -> Result<Report, CliError> {
    let c = cfg.problem.coefficient;
    let horizon = cfg.problem.horizon;
    let sec = &cfg.convergence;
    let cases = if sec.cases.is_empty() {
        catalog(c)
    } else {
        sec.cases
            .iter()
            .map(|r| make_case(&r.id, c, r.tag))
            .collect::<crate::Result<Vec<_>>>()?
    };
    let space: Vec<SpaceTimeGrid> = sec
        .space_n_x
        .iter()
        .map(|&n| build_grid(n, sec.space_n_t, horizon))
        .collect::<crate::Result<_>>()?;
    let time: Vec<SpaceTimeGrid> = sec
        .time_n_t
        .iter()
        .map(|&n| build_grid(sec.time_n_x, n, horizon))
        .collect::<crate::Result<_>>()?;
    let mut reports = vec![];
    let mut rows = vec![];
    for case in &cases {
        let r = convergence_study(case, &space, &time, &cfg.problem.iteration)?;
        for ladder in [&r.space, &r.time] {
            for l in &ladder.levels {
                rows.push(vec![
                    r.case.clone(),
                    serde_json::to_value(r.tag)?.as_str().unwrap_or_default().to_string(),
                    serde_json::to_value(ladder.axis)?.as_str().unwrap_or_default().to_string(),
                    l.n_x.to_string(),
                    l.n_t.to_string(),
                    num(l.err_u),
                    num(l.err_m),
                    num(l.err_m_raw),
                    l.sweeps.to_string(),
                ]);
            }
        }
        reports.push(r);
    }
    out.csv(
        "convergence.csv",
        &["case", "tag", "axis", "n_x", "n_t", "err_u", "err_am", "err_m", "sweeps"],
        &["", "", "", "count", "count", "max_abs", "max_abs", "max_abs", "count"],
        &rows,
    )?;
    let units = json!({
        "err_u": "max abs nodal error of u",
        "err_m": "max abs nodal error of a*m",
        "err_m_raw": "max abs nodal error of m",
        "order_u, order_m": "1 (least-squares slope of ln err against ln h or ln dt; \"exact\" below the rounding floor)",
    });
    let mut grids = space;
    grids.extend(time);
    Ok(Report {
        result: json!({ "reports": reports }),
        units,
        grids,
        exit: EXIT_OK,
    })
}

/// Largest relative gap between closed-form and finite-difference sources.
const SOURCE_TOL: f64 = 1e-6;

fn coeff_check(cfg: &RunConfig, out: &Artifacts) -> Result<Report, CliError> {
    let spec = &cfg.problem;
    let c = spec.coefficient;
    let g = spec.grid()?;
    let mut iso = vec![];
    for &n in &cfg.coeff_check.n_x {
        let gi = build_grid(n, 2, spec.horizon)?;
        iso.push((n, isomorphism_residual(&c, &gi)));
    }
    out.csv(
        "isomorphism.csv",
        &["n_x", "residual"],
        &["count", "max_abs"],
        &iso.iter().map(|(n, r)| vec![n.to_string(), num(*r)]).collect::<Vec<_>>(),
    )?;
    let (db, db_node) = c.derivative_bound(&g);
    let (p, d) = spec.coefficient_fields(&g);
    let mut coeffs = MfgCoefficients::zeros(&g);
    coeffs.p = p;
    coeffs.d = d;
    let bounds = check_coefficient_bounds(&coeffs, &c, &g)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut sources = vec![];
    for case in catalog(c) {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.coeff_check.samples {
            let x = rng.gen_range(0.05..0.95);
            let t = spec.horizon * rng.gen_range(0.05..0.95);
            let (f, gs) = case.finite_difference_sources(x, t);
            let (fe, ge) = (case.hjb_source(x, t), case.fp_source(x, t));
            worst = worst
                .max((f - fe).abs() / fe.abs().max(1.0))
                .max((gs - ge).abs() / ge.abs().max(1.0));
        }
        sources.push(json!({
            "case": case.id,
            "tag": case.tag,
            "max_relative_gap": worst,
            "pass": worst <= SOURCE_TOL,
        }));
    }
    let result = json!({
        "isomorphism": iso.iter().map(|(n, r)| json!({"n_x": n, "residual": r})).collect::<Vec<_>>(),
        "a_x_over_sqrt_a": { "value": db, "x": g.x(db_node) },
        "bounds": bounds,
        "source_check": {
            "samples_per_case": cfg.coeff_check.samples,
            "tolerance": SOURCE_TOL,
            "cases": sources,
        },
    });
    let units = json!({
        "isomorphism.residual": "max abs, dimensionless",
        "a_x_over_sqrt_a": "dimensionless ratio",
        "bounds.value": "dimensionless ratio named by bounds.name",
        "max_relative_gap": "1 (|fd - exact| / max(|exact|, 1))",
    });
    Ok(Report {
        result,
        units,
        grids: vec![g],
        exit: EXIT_OK,
    })
}
