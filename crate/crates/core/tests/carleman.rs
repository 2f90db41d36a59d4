use degenmfg::carleman::{evaluate_fp_carleman, evaluate_hjb_carleman, evaluate_mfg_carleman, CarlemanParams};
use degenmfg::domain::{build_grid, DegenerateCoefficient, SpaceTimeField};
use degenmfg::manufactured::{make_case, EquationTag, Forcing};
use degenmfg::mfg::IterConfig;
use degenmfg::stability::{generate_pair, ProblemSpec};

fn hjb_ratio(n: usize, s: f64, lambda: f64) -> f64 {
    let c = DegenerateCoefficient::WrightFischer;
    let case = make_case("decay-bubble", c, EquationTag::LinearHjb).unwrap();
    let g = build_grid(n, n, 1.0).unwrap();
    let f = SpaceTimeField::from_fn(&g, |x, t| case.hjb_source(x, t));
    let p = CarlemanParams::new(s, lambda).unwrap();
    evaluate_hjb_carleman(&case.sample_u(&g), &f, &p, &c).unwrap().ratio
}

#[test]
fn decay_bubble_ratio_matches_fine_grid() {
    let fine = hjb_ratio(256, 2.0, 2.0);
    let coarse = hjb_ratio(64, 2.0, 2.0);
    assert!(fine > 0.0 && fine.is_finite());
    assert!((coarse - fine).abs() <= 1e-3 * fine, "{coarse} vs {fine}");
}

#[test]
fn ratio_decreases_in_s() {
    let r: Vec<f64> = [1.0, 2.0, 4.0, 8.0].iter().map(|s| hjb_ratio(64, *s, 2.0)).collect();
    assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
}

#[test]
fn solved_fp_ratio_is_grid_stable() {
    let c = DegenerateCoefficient::Power { beta: 2.0, delta: 2.0 };
    let case = make_case("fp-decay", c, EquationTag::LinearFp).unwrap();
    let p = CarlemanParams::new(4.0, 2.0).unwrap();
    let ratio = |n: usize| {
        let g = build_grid(n, n, 1.0).unwrap();
        let (_, m, _) = case.solve(&g, Forcing::Continuous, &IterConfig::default()).unwrap();
        let src = SpaceTimeField::from_fn(&g, |x, t| case.fp_source(x, t));
        evaluate_fp_carleman(&m, &src, &p, &c).unwrap().ratio
    };
    let (a, b) = (ratio(64), ratio(128));
    assert!((a - b).abs() <= 0.1 * b, "{a} vs {b}");
}

#[test]
fn difference_bundle_has_no_source_term() {
    let spec = ProblemSpec::default().with_grid(32, 32);
    let (a, b) = generate_pair(&spec, 1e-2).unwrap();
    let du = b.u.sub(&a.u).unwrap();
    let dm = b.m.sub(&a.m).unwrap();
    let zero = SpaceTimeField::zeros(&spec.grid().unwrap());
    let p = CarlemanParams::new(4.0, 1.0).unwrap();
    let r = evaluate_mfg_carleman(&du, &dm, &zero, &zero, &p, &spec.coefficient).unwrap();
    assert_eq!(r.rhs_source, 0.0);
    assert!(r.lhs > 0.0 && r.rhs_t > 0.0 && r.ratio.is_finite());
}
