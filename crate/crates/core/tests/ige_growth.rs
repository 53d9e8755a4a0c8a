use igac::dynamics::{estimate_lambda_j, integrate_geodesic_with, integrate_jacobi, IntegratorOptions};
use igac::ige::{fit_growth, volume_series, GrowthModel};
use igac::ManifoldModel;

fn opts() -> IntegratorOptions {
    IntegratorOptions {
        max_step: 0.1,
        ..IntegratorOptions::with_tol(1e-10)
    }
}

#[test]
fn log_rate_counts_expanding_factors() {
    for k in 1..=3 {
        let m = ManifoldModel::exponential_product(k);
        let x0 = vec![1.0; k];
        let v0 = vec![1.0; k];
        let traj = integrate_geodesic_with(&m, &x0, &v0, 100.0, &opts()).unwrap();
        let s = volume_series(&m, &traj, 16).unwrap();
        let fit = fit_growth(&s, s.default_window()).unwrap();
        assert_eq!(fit.selected, GrowthModel::Logarithmic, "k = {k}");
        assert!(
            (fit.c_ig() - k as f64).abs() < 0.05 * k as f64,
            "k = {k}: c_IG = {}",
            fit.c_ig()
        );
        assert!(fit.chosen().r2 >= fit.linear.r2);
    }
}

#[test]
fn matched_runs_discriminate() {
    let integ = ManifoldModel::integrable();
    let chaos = ManifoldModel::chaotic();
    let a = integrate_geodesic_with(&integ, &[1.0, 1.0], &[1.0, 1.0], 100.0, &opts()).unwrap();
    let b = integrate_geodesic_with(&chaos, &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], 100.0, &opts()).unwrap();
    let sa = volume_series(&integ, &a, 16).unwrap();
    let sb = volume_series(&chaos, &b, 16).unwrap();
    assert_eq!(fit_growth(&sa, sa.default_window()).unwrap().selected, GrowthModel::Logarithmic);
    let fb = fit_growth(&sb, sb.default_window()).unwrap();
    assert_eq!(fb.selected, GrowthModel::Linear);
    assert!(fb.k_ig() > 0.0);
    assert!(fb.linear.r2 >= fb.logarithmic.r2);

    // Monotone exploration on both expanding runs.
    for s in [&sa, &sb] {
        assert!(s.explored.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn chaotic_scale_coordinate_tracks_closed_form() {
    // On the Gaussian block, starting horizontally at σ = 1 with dμ/dτ = 1,
    // σ(τ) = sech(τ/√2).
    let m = ManifoldModel::chaotic();
    let traj = integrate_geodesic_with(&m, &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], 100.0, &opts()).unwrap();
    for (t, x) in traj.tau.iter().zip(&traj.coords) {
        let want = -(t / std::f64::consts::SQRT_2).cosh().ln();
        assert!((x[2].ln() - want).abs() < 1e-5 * want.abs().max(1.0), "tau {t}");
    }
}

#[test]
fn chaotic_jacobi_exponent_is_positive() {
    let m = ManifoldModel::chaotic();
    let traj = integrate_geodesic_with(&m, &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], 40.0, &opts()).unwrap();
    let traj = integrate_jacobi(&m, &traj, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
    let est = estimate_lambda_j(&traj, (4.0, 40.0)).unwrap();
    assert!(est.lambda_j > 0.1, "{est:?}");
}
