use hjm_levy::existence_classifier::{classify, estimate_rho, log_grid, ClassifierOptions, Verdict};
use hjm_levy::levy_model::{assumption_report, Evaluation};
use hjm_levy::*;
use proptest::prelude::*;

fn model(spec: LevyMeasureSpec) -> LevyModel {
    LevyModel::new(0.0, 0.0, spec).unwrap()
}

fn closed_form_families() -> Vec<LevyMeasureSpec> {
    vec![
        LevyMeasureSpec::truncated_stable(0.3).unwrap(),
        LevyMeasureSpec::truncated_stable(1.0).unwrap(),
        LevyMeasureSpec::truncated_stable(1.7).unwrap(),
        LevyMeasureSpec::log_power_density(0.5).unwrap(),
        LevyMeasureSpec::log_power_density(2.0).unwrap(),
        LevyMeasureSpec::uniform(1.5, 0.2, 3.0).unwrap(),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn u_nu_closed_form_matches_quadrature_on_log_grid() {
    let xs: Vec<f64> = (0..20).map(|k| 10f64.powf(-0.3 * k as f64) * 0.45).collect();
    for spec in closed_form_families() {
        assert!(spec.has_closed_form_u());
        for &x in &xs {
            let closed = spec.u_nu(x);
            let quad = spec.u_nu_with(x, Evaluation::Quadrature);
            assert!(rel(closed, quad) < 1e-8, "{spec:?} x={x}: {closed} vs {quad}");
        }
    }
}

#[test]
fn u_nu_of_log_power_density() {
    let spec = LevyMeasureSpec::log_power_density(2.0).unwrap();
    for x in [1e-3f64, 1e-2, 0.1, 0.3] {
        let expected = x / (1.0 / x).ln().powi(2);
        assert!(rel(spec.u_nu(x), expected) < 1e-12);
    }
    assert_eq!(LevyMeasureSpec::zero().u_nu(0.5), 0.0);
}

#[test]
fn moment_examples() {
    let m = LevyMeasureSpec::truncated_stable(1.0).unwrap().moment_integrals();
    assert_eq!(m.small_first, Moment::Infinite);
    let m = LevyMeasureSpec::log_modified(2.0).unwrap().moment_integrals();
    assert!(m.small_first.is_finite());
    let m = LevyMeasureSpec::zero().moment_integrals();
    assert_eq!(m.small_first.value(), 0.0);
    assert_eq!(m.tail_first.value(), 0.0);
}

#[test]
fn assumption_examples() {
    let wide = model(LevyMeasureSpec::uniform(1.0, -2.0, 1.0).unwrap());
    let r = validate_assumptions(&wide, &VolatilitySurface::Constant(1.0), &InitialCurve::Constant(0.03), 1.0).unwrap();
    assert!(!r.a2_ok);
    let ts = model(LevyMeasureSpec::truncated_stable(1.5).unwrap());
    let r = validate_assumptions(&ts, &VolatilitySurface::Constant(1.0), &InitialCurve::Constant(0.03), 1.0).unwrap();
    assert!(r.a2_ok && r.a4_ok);
    assert!(rel(r.a4_small_square.value(), 2.0) < 1e-10);
    let r = validate_assumptions(&ts, &VolatilitySurface::Constant(1.0), &InitialCurve::Constant(0.0), 1.0).unwrap();
    assert!(!r.a1_ok);
}

#[test]
fn lipschitz_when_square_integrable() {
    let e = LaplaceExponent::new(LevyModel::new(0.1, 0.0, LevyMeasureSpec::uniform(1.0, 0.5, 4.0).unwrap()).unwrap())
        .unwrap();
    let bound = e.jsecond(0.0);
    for k in 0..200 {
        let z1 = 0.05 * k as f64;
        let z2 = z1 * 1.7 + 0.3;
        assert!((e.jprime(z1) - e.jprime(z2)).abs() <= bound * (z2 - z1) * (1.0 + 1e-12));
    }
}

#[test]
fn jsecond_blows_up_without_square_integrability() {
    // y^{-2.5} on [1, ∞): ∫ y ν finite, ∫ y² ν infinite
    let spec = LevyMeasureSpec::user_density(|y: f64| y.powf(-2.5), 1.0, f64::INFINITY).unwrap();
    let e = LaplaceExponent::new(model(spec)).unwrap();
    let values: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&z| e.jsecond(z)).collect();
    assert!(values.windows(2).all(|w| w[1] > 2.0 * w[0]), "{values:?}");
}

#[test]
fn first_moment_equivalence_for_density_families() {
    let specs = [
        LevyMeasureSpec::truncated_stable(0.5).unwrap(),
        LevyMeasureSpec::truncated_stable(1.0).unwrap(),
        LevyMeasureSpec::truncated_stable(1.5).unwrap(),
        LevyMeasureSpec::log_modified(0.5).unwrap(),
        LevyMeasureSpec::log_modified(2.0).unwrap(),
    ];
    for spec in specs {
        let finite = spec.moment_integrals().small_first.is_finite();
        let est = estimate_rho(&model(spec.clone()), &ClassifierOptions::default().x_grid).unwrap();
        assert_eq!(est.m_integral_divergent, !finite, "{spec:?}");
    }
}

#[test]
fn structural_rules_ignore_lower_bound_and_horizon() {
    let gaussian = LevyModel::new(0.0, 0.5, LevyMeasureSpec::truncated_stable(0.5).unwrap()).unwrap();
    let negative = model(LevyMeasureSpec::uniform(1.0, -0.5, 0.5).unwrap());
    let opts = ClassifierOptions::default();
    for m in [&gaussian, &negative] {
        for (lo, t_star) in [(0.1, 0.5), (0.5, 1.0), (1.0, 3.0)] {
            assert_eq!(classify(m, (lo, 1.0), t_star, &opts).unwrap().verdict, Verdict::NotExists);
        }
    }
}

#[test]
fn classify_is_deterministic() {
    let m = model(LevyMeasureSpec::log_modified(0.5).unwrap());
    let opts = ClassifierOptions::default();
    let a = classify(&m, (1.0, 1.0), 1.0, &opts).unwrap();
    let b = classify(&m, (1.0, 1.0), 1.0, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tauber_index_on_short_grid() {
    let xs = log_grid(1e-1, 1e-6, 4);
    for p in [0.3, 0.7, 1.3, 1.7] {
        let est = estimate_rho(&model(LevyMeasureSpec::truncated_stable(p).unwrap()), &xs).unwrap();
        assert!((est.rho_hat - (2.0 - p)).abs() < 0.02);
    }
}

fn family() -> impl Strategy<Value = LevyMeasureSpec> {
    prop_oneof![
        (0.05f64..1.95).prop_map(|p| LevyMeasureSpec::truncated_stable(p).unwrap()),
        (0.1f64..3.0).prop_map(|g| LevyMeasureSpec::log_modified(g).unwrap()),
        (0.1f64..3.0).prop_map(|g| LevyMeasureSpec::log_power_density(g).unwrap()),
        (0.1f64..2.0, 0.0f64..0.5, 0.6f64..3.0).prop_map(|(c, a, b)| LevyMeasureSpec::uniform(c, a, b).unwrap()),
        proptest::collection::vec((0.01f64..3.0, 0.01f64..3.0), 1..4).prop_map(|atoms| {
            let (p, m) = atoms.into_iter().unzip();
            LevyMeasureSpec::atoms(p, m).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn u_nu_is_nondecreasing_and_bounded(spec in family(), x1 in 1e-6f64..1.0, x2 in 1e-6f64..1.0) {
        let (lo, hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        let (ulo, uhi) = (spec.u_nu(lo), spec.u_nu(hi));
        prop_assert!(ulo <= uhi * (1.0 + 1e-12));
        let small_square = spec.moment_integrals().small_square.value();
        prop_assert!(uhi <= small_square * (1.0 + 1e-10));
    }

    #[test]
    fn support_check_is_monotone_in_lambda_bar(lower in -2.0f64..-0.05, l1 in 0.1f64..5.0, l2 in 0.1f64..5.0) {
        let m = model(LevyMeasureSpec::uniform(1.0, lower, 1.0).unwrap());
        let (small, big) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let f0 = InitialCurve::Constant(0.03);
        let at_big = assumption_report(&m, big, &f0, 1.0, String::new()).a2_ok;
        let at_small = assumption_report(&m, small, &f0, 1.0, String::new()).a2_ok;
        prop_assert!(!at_big || at_small);
    }

    #[test]
    fn jprime_monotone_and_convex(spec in family(), drift in -1.0f64..1.0, z1 in 0.0f64..200.0, z2 in 0.0f64..200.0) {
        let e = LaplaceExponent::new(LevyModel::new(drift, 0.0, spec).unwrap()).unwrap();
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let scale = e.jprime(hi).abs().max(1.0);
        prop_assert!(e.jprime(lo) <= e.jprime(hi) + 1e-12 * scale);
        prop_assert!(e.jsecond(lo) >= 0.0);
    }
}
