use hjm_levy::*;
use proptest::prelude::*;

fn grid(n: usize) -> TriangularGrid {
    TriangularGrid::new(n, 1.0).unwrap()
}

#[test]
fn poisson_jump_count_has_the_right_mean() {
    let model = LevyModel::new(0.0, 0.0, LevyMeasureSpec::atoms(vec![0.3], vec![2.0]).unwrap()).unwrap();
    let sim = PathSimulator::new(&model, 1.0, 1e-3).unwrap();
    let n = 10_000;
    let total: usize = (0..n).map(|k| sim.simulate(k, 0).jump_count()).sum();
    let mean = total as f64 / n as f64;
    // Poisson(2): standard error sqrt(2/n)
    assert!((mean - 2.0).abs() < 3.0 * (2.0 / n as f64).sqrt(), "mean {mean}");
}

#[test]
fn gaussian_part_and_negative_jumps_are_refused() {
    let q = LevyModel::new(0.0, 0.3, LevyMeasureSpec::zero()).unwrap();
    assert!(matches!(PathSimulator::new(&q, 1.0, 0.01), Err(Error::OutsideExistenceRegime(_))));
    let neg = LevyModel::new(0.0, 0.0, LevyMeasureSpec::uniform(1.0, -0.5, 0.5).unwrap()).unwrap();
    assert!(matches!(PathSimulator::new(&neg, 1.0, 0.01), Err(Error::OutsideExistenceRegime(_))));
    let ok = LevyModel::drift_only(0.1);
    assert!(PathSimulator::new(&ok, 1.0, 0.0).is_err());
}

#[test]
fn path_and_field_are_reproducible() {
    let model = LevyModel::new(0.2, 0.0, LevyMeasureSpec::truncated_stable(0.5).unwrap()).unwrap();
    let lam = VolatilitySurface::Constant(0.5);
    let f0 = InitialCurve::Constant(0.04);
    let p1 = simulate_path(&model, 1.0, 99, 1e-3).unwrap();
    let p2 = simulate_path(&model, 1.0, 99, 1e-3).unwrap();
    assert_eq!(p1, p2);
    let a1 = a_field(&p1, &lam, &f0, &grid(30)).unwrap();
    let a2 = a_field(&p2, &lam, &f0, &grid(30)).unwrap();
    assert_eq!(a1.values(), a2.values());
    let other = simulate_path(&model, 1.0, 100, 1e-3).unwrap();
    assert_ne!(p1.jump_times, other.jump_times);
}

#[test]
fn path_csv_has_one_row_per_jump() {
    let path = JumpPath::from_jumps(0.0, 1.0, vec![0.25, 0.5], vec![0.1, 0.2]).unwrap();
    let mut buf = Vec::new();
    path.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), ["time,size", "0.25,0.1", "0.5,0.2"]);
}

/// `f0(T) e^{λ b t} ∏ (1 + λ Y_k)`, independent of the library's log-sum evaluation.
fn product_form(path: &JumpPath, lam: f64, f0: f64, t: f64) -> f64 {
    let mut v = f0 * (lam * path.effective_drift() * t).exp();
    for (s, y) in path.jump_times.iter().zip(&path.jump_sizes) {
        if *s <= t {
            v *= 1.0 + lam * y;
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_volatility_field_matches_product_form(seed in 0u64..10_000, p in 0.1f64..0.9, lam in 0.1f64..2.0) {
        let model = LevyModel::new(0.1, 0.0, LevyMeasureSpec::truncated_stable(p).unwrap()).unwrap();
        let path = simulate_path(&model, 1.0, seed, 1e-2).unwrap();
        let g = grid(25);
        let a = a_field(&path, &VolatilitySurface::Constant(lam), &InitialCurve::Constant(0.05), &g).unwrap();
        for (i, j) in g.nodes() {
            let expected = product_form(&path, lam, 0.05, g.time(i));
            let got = a.get(i, j);
            prop_assert!((got - expected).abs() <= 1e-12 * expected, "({i},{j}): {got} vs {expected}");
        }
        prop_assert!(a.min() > 0.0 && a.max().is_finite());
    }

    #[test]
    fn halving_the_cutoff_is_a_small_change(seed in 0u64..10_000, p in 0.1f64..0.9) {
        let model = LevyModel::new(0.0, 0.0, LevyMeasureSpec::truncated_stable(p).unwrap()).unwrap();
        let eps = 0.02;
        let fine_sim = PathSimulator::new(&model, 1.0, eps / 2.0).unwrap();
        let fine = fine_sim.simulate(seed, 0);
        let coarse = fine_sim.coarsen(&fine, eps).unwrap();
        let lam = 0.8;
        let g = grid(20);
        let surface = VolatilitySurface::Constant(lam);
        let f0 = InitialCurve::Constant(0.05);
        let a_fine = a_field(&fine, &surface, &f0, &g).unwrap();
        let a_coarse = a_field(&coarse, &surface, &f0, &g).unwrap();
        // ∫_0^ε y^{-p} dy
        let first = eps.powf(1.0 - p) / (1.0 - p);
        let bound = 2.0 * first * lam;
        for (x, y) in a_fine.values().iter().zip(a_coarse.values()) {
            prop_assert!((x.ln() - y.ln()).abs() <= bound);
        }
    }
}
