use igac::dynamics::{integrate_geodesic, integrate_geodesic_with, integrate_jacobi, IntegratorOptions};
use igac::geometry::{christoffel_fd, riemann};
use igac::{Interval, ManifoldModel};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// A curved, non-diagonal metric with no closed-form geometry.
fn warped() -> ManifoldModel {
    ManifoldModel::custom(
        "warped",
        &["x", "y"],
        vec![Interval::REAL, Interval::REAL],
        |p| {
            let (x, y) = (p[0], p[1]);
            DMatrix::from_row_slice(2, 2, &[1.0 + x * x, 0.5 * x * y, 0.5 * x * y, 1.0 + y * y])
        },
    )
    .unwrap()
}

fn models() -> Vec<ManifoldModel> {
    vec![ManifoldModel::integrable(), ManifoldModel::chaotic(), ManifoldModel::gaussian(), warped()]
}

fn point(model: &ManifoldModel, raw: &[f64]) -> Vec<f64> {
    model
        .domain()
        .iter()
        .zip(raw)
        .map(|(d, r)| if d.lo == 0.0 { 0.3 + r.abs() } else { *r })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_bianchi_identity(raw in prop::collection::vec(-2.0f64..2.0, 3), which in 0usize..4) {
        let m = &models()[which];
        let p = point(m, &raw[..m.dim()]);
        let r = riemann(m, &p, 1e-4).unwrap();
        let n = m.dim();
        let scale = r.as_slice().iter().fold(1.0f64, |a, b| a.max(b.abs()));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = r.get(a, b, c, d) + r.get(a, c, d, b) + r.get(a, d, b, c);
                        prop_assert!(s.abs() < 1e-6 * scale, "{s}");
                    }
                }
            }
        }
    }

    #[test]
    fn riemann_antisymmetry(raw in prop::collection::vec(-2.0f64..2.0, 3), which in 0usize..4) {
        let m = &models()[which];
        let p = point(m, &raw[..m.dim()]);
        let r = riemann(m, &p, 1e-4).unwrap();
        let g = m.metric(&p).unwrap();
        let n = m.dim();
        // R_abcd = -R_bacd once the first index is lowered.
        let lower = |a: usize, b: usize, c: usize, d: usize| (0..n).map(|e| g[(a, e)] * r.get(e, b, c, d)).sum::<f64>();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = lower(a, b, c, d) + lower(b, a, c, d);
                        prop_assert!(s.abs() < 1e-5, "{s}");
                    }
                }
            }
        }
    }

    #[test]
    fn metric_compatibility(raw in prop::collection::vec(-2.0f64..2.0, 3), which in 0usize..4) {
        let m = &models()[which];
        let p = point(m, &raw[..m.dim()]);
        let n = m.dim();
        let gamma = christoffel_fd(m, &p, 1e-4).unwrap();
        let g = m.metric(&p).unwrap();
        for k in 0..n {
            let h = 1e-5 * p[k].abs().max(1.0);
            let mut q = p.clone();
            q[k] += h;
            let gp = m.metric(&q).unwrap();
            q[k] = p[k] - h;
            let gm = m.metric(&q).unwrap();
            let dg = (gp - gm) / (2.0 * h);
            for i in 0..n {
                for j in 0..n {
                    let mut rhs = 0.0;
                    for l in 0..n {
                        rhs += gamma.get(l, k, i) * g[(l, j)] + gamma.get(l, k, j) * g[(i, l)];
                    }
                    prop_assert!((dg[(i, j)] - rhs).abs() < 1e-5 * g.amax().max(1.0) * 10.0);
                }
            }
        }
    }

    #[test]
    fn geodesics_are_time_reversible(
        raw in prop::collection::vec(-1.5f64..1.5, 3),
        vel in prop::collection::vec(-1.0f64..1.0, 3),
        which in 0usize..3,
    ) {
        let m = &models()[which];
        let x0 = point(m, &raw[..m.dim()]);
        let v0 = &vel[..m.dim()];
        let fwd = integrate_geodesic(m, &x0, v0, 3.0, 1e-11).unwrap();
        let back_v: Vec<f64> = fwd.final_velocity().iter().map(|v| -v).collect();
        let back = integrate_geodesic(m, fwd.final_coords(), &back_v, 3.0, 1e-11).unwrap();
        for (a, b) in back.final_coords().iter().zip(&x0) {
            prop_assert!((a - b).abs() < 1e-6 * b.abs().max(1.0), "{a} vs {b}");
        }
        prop_assert!(fwd.speed_drift() < 1e-8 * fwd.speed[0].max(1.0));
    }

    #[test]
    fn jacobi_fields_superpose(
        ja in prop::collection::vec(-1.0f64..1.0, 3),
        jb in prop::collection::vec(-1.0f64..1.0, 3),
        da in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let m = ManifoldModel::chaotic();
        let opts = IntegratorOptions { max_step: 0.1, ..IntegratorOptions::with_tol(1e-11) };
        let traj = integrate_geodesic_with(&m, &[1.0, 0.0, 1.0], &[0.5, 0.3, 0.2], 4.0, &opts).unwrap();
        let zero = [0.0; 3];
        let a = integrate_jacobi(&m, &traj, &ja, &da).unwrap();
        let b = integrate_jacobi(&m, &traj, &jb, &zero).unwrap();
        let sum_j: Vec<f64> = ja.iter().zip(&jb).map(|(x, y)| x + y).collect();
        let s = integrate_jacobi(&m, &traj, &sum_j, &da).unwrap();
        let (a, b, s) = (a.jacobi.unwrap(), b.jacobi.unwrap(), s.jacobi.unwrap());
        for ((x, y), z) in a.iter().zip(&b).zip(&s) {
            for i in 0..3 {
                let want = x.field[i] + y.field[i];
                prop_assert!((z.field[i] - want).abs() < 1e-7 * want.abs().max(1.0));
            }
        }
    }
}

#[test]
fn flat_jacobi_fields_are_affine() {
    let m = ManifoldModel::euclidean(3);
    let traj = integrate_geodesic(&m, &[0.0, 1.0, -1.0], &[0.3, -0.2, 1.0], 10.0, 1e-10).unwrap();
    let traj = integrate_jacobi(&m, &traj, &[1.0, 0.0, 2.0], &[0.5, -1.0, 0.25]).unwrap();
    for (t, j) in traj.tau.iter().zip(traj.jacobi.as_ref().unwrap()) {
        let want = [1.0 + 0.5 * t, -t, 2.0 + 0.25 * t];
        for i in 0..3 {
            assert!((j.field[i] - want[i]).abs() < 1e-9 * want[i].abs().max(1.0));
        }
    }
}

#[test]
fn integrable_jacobi_growth_is_at_most_linear() {
    let m = ManifoldModel::integrable();
    let opts = IntegratorOptions { max_step: 0.1, ..IntegratorOptions::with_tol(1e-10) };
    let traj = integrate_geodesic_with(&m, &[1.0, 1.0], &[1.0, 1.0], 30.0, &opts).unwrap();
    // A unit-norm initial spread across the flow.
    let traj = integrate_jacobi(&m, &traj, &[0.0, 0.0], &[1.0, -1.0]).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = traj
        .tau
        .iter()
        .zip(traj.jacobi.as_ref().unwrap())
        .filter(|(t, _)| **t >= 10.0)
        .map(|(t, j)| (t.ln(), j.norm.ln()))
        .unzip();
    let fit = igac::stats::fit_line(&x, &y).unwrap();
    assert!((fit.slope - 1.0).abs() < 0.02, "{}", fit.slope);
}
