use fluxlab::moduli::*;

fn annulus(a: f64, b: f64, radii: usize, cells: usize, p: f64) -> ModulusSolution {
    let grid = GridSpec::cube(2.0, cells, 2).unwrap();
    let fam = SurfaceFamily::concentric_spheres(2, a, b, radii, 4.0 / cells as f64).unwrap();
    estimate_modulus(&fam, &grid, p, SolverOptions::default()).unwrap()
}

#[test]
fn annulus_benchmark_p2() {
    let t = std::time::Instant::now();
    let s = annulus(1.0, 2.0, 64, 200, 2.0);
    let exact = annulus_modulus(2, 2.0, 1.0, 2.0);
    eprintln!("primal {} dual {} gap {} iters {} in {:?}", s.primal, s.dual, s.gap, s.iterations, t.elapsed());
    assert_eq!(s.status, SolverStatus::Converged);
    assert!(s.gap <= 1e-4 * s.primal);
    assert!(s.slacks.iter().all(|v| *v >= -1e-6));
    assert!(s.rho.iter().all(|v| *v >= 0.0));
    assert!((s.primal - exact).abs() <= 0.02 * exact, "{} vs {exact}", s.primal);
}

#[test]
fn refinement_trend_toward_closed_form() {
    let exact = annulus_modulus(2, 2.0, 1.0, 2.0);
    let errs: Vec<f64> = [50, 100, 200]
        .iter()
        .map(|&c| (annulus(1.0, 2.0, 64, c, 2.0).primal - exact).abs())
        .collect();
    eprintln!("{errs:?}");
    assert!(errs.windows(2).all(|w| w[1] <= w[0] * 1.0001), "{errs:?}");
}

#[test]
fn single_sphere_decreases_under_refinement() {
    let vals: Vec<f64> = [10, 20, 40, 80]
        .iter()
        .map(|&c| annulus(1.3, 1.3, 1, c, 2.0).primal)
        .collect();
    eprintln!("{vals:?}");
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn p3_dilation_matches_transformed_closed_form() {
    // Dilating by λ maps [a, b] to [λa, λb]; for n = 2, p = 3 the closed form
    // is (1/a - 1/b) / (4π²), so the modulus scales by 1/λ.
    let (a, b, lam) = (0.5, 1.0, 1.8);
    let fam = SurfaceFamily::concentric_spheres(2, a, b, 64, 0.01).unwrap();
    let base = estimate_modulus(&fam, &GridSpec::cube(1.0, 200, 2).unwrap(), 3.0, SolverOptions::default()).unwrap();
    let big = estimate_modulus(&fam.dilated(lam), &GridSpec::cube(lam, 200, 2).unwrap(), 3.0, SolverOptions::default()).unwrap();
    let exact = annulus_modulus(2, 3.0, lam * a, lam * b);
    assert!((exact - (1.0 / (lam * a) - 1.0 / (lam * b)) / (4.0 * std::f64::consts::PI.powi(2))).abs() < 1e-15);
    assert!((big.primal - exact).abs() <= 0.02 * exact, "{} vs {exact}", big.primal);
    assert!((big.primal * lam / base.primal - 1.0).abs() < 1e-3);
}

#[test]
fn monotone_and_subadditive() {
    let grid = GridSpec::cube(2.0, 80, 2).unwrap();
    let h = 0.05;
    let inner = SurfaceFamily::concentric_spheres(2, 1.0, 1.5, 17, h).unwrap();
    let outer = SurfaceFamily::concentric_spheres(2, 1.5, 2.0, 17, h).unwrap();
    let whole = inner.union(&outer);
    let dup = inner.union(&inner);
    let solve = |f: &SurfaceFamily| estimate_modulus(f, &grid, 2.0, SolverOptions::default()).unwrap();
    let sols = vec![solve(&inner), solve(&outer), solve(&whole), solve(&dup)];
    let report = check_monotone_subadditive(&sols, &[(0, 2), (1, 2), (0, 3), (3, 0)], &[(0, 1, 2)]);
    assert!(report.all_hold, "{report:?}");
    assert!(sols[0].estimate() < sols[2].estimate());
    assert!((sols[0].estimate() - sols[3].estimate()).abs() <= sols[0].gap + sols[3].gap + 1e-6);
}

#[test]
fn p1_gives_certified_bracket() {
    let s = annulus(1.0, 2.0, 8, 24, 1.0);
    assert!(s.dual <= s.primal + 1e-9);
    assert!(s.slacks.iter().all(|v| *v >= -1e-6));
}
