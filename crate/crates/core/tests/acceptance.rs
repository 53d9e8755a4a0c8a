//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::time::{Duration, Instant};

use igac::dynamics::{
    estimate_lambda_j, integrate_geodesic, integrate_geodesic_with, integrate_jacobi,
    IntegratorOptions, Termination,
};
use igac::geometry::{christoffel_fd, curvature, riemann};
use igac::ige::{compare_rates, fit_growth, volume_series, GrowthModel};
use igac::manifold::{fisher_metric_closed_form, fisher_metric_quadrature, QuadSpec};
use igac::spinchain::{
    analyze, build_hamiltonian_real, spectrum, ChainSpec, Sector, UnfoldOptions, Verdict,
    VerdictOptions,
};
use igac::stats::ks_distance;
use igac::{Family, Interval, ManifoldModel, ParamPoint};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances, pinned.
const METRIC_REL_TOL: f64 = 1e-5;
const METRIC_TIME: Duration = Duration::from_secs(10);
const FLAT_SCALAR_TOL: f64 = 1e-6;
const CHAOTIC_SCALAR_TOL: f64 = 1e-4;
const CURVATURE_TIME: Duration = Duration::from_secs(30);
const GEODESIC_TOL: f64 = 1e-6;
const SPEED_TOL: f64 = 1e-8;
const ROUND_TRIP_TOL: f64 = 1e-6;
const JACOBI_REL_TOL: f64 = 1e-3;
const LAMBDA_REL_TOL: f64 = 0.02;
const FLAT_LAMBDA_MAX: f64 = 0.05;
const C_IG_REL_TOL: f64 = 0.05;
const LINEAR_R2_MIN: f64 = 0.999;
const IGE_TIME: Duration = Duration::from_secs(120);
const KS_MARGIN_MIN: f64 = 0.03;
const LSD_TIME: Duration = Duration::from_secs(300);
const INVARIANT_TIME: Duration = Duration::from_secs(600);

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:<4} {name}: {detail}");
    }
}

/// Same metric as `model`, but with no closed-form connection or
/// curvature, so every derivative goes through finite differences.
fn opaque(model: &ManifoldModel) -> ManifoldModel {
    let inner = model.clone();
    let names: Vec<&str> = model.coord_names().iter().map(String::as_str).collect();
    ManifoldModel::custom(
        format!("{}_fd", model.name()),
        &names,
        model.domain().to_vec(),
        move |x| inner.metric(x).expect("point checked by caller"),
    )
    .unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, domain: &[Interval]) -> Vec<f64> {
    domain
        .iter()
        .map(|d| {
            if d.lo == 0.0 {
                rng.random_range(0.3..4.0)
            } else {
                rng.random_range(-3.0..3.0)
            }
        })
        .collect()
}

fn metric_fidelity(r: &mut Report) {
    let start = Instant::now();
    let grid = [0.4, 0.9, 1.6, 2.5, 3.7];
    let loc = [-2.0, -0.5, 0.0, 1.0, 2.5];
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut check = |family: Family, theta: Vec<f64>| {
        let p = ParamPoint::new(theta);
        let q = fisher_metric_quadrature(family, &p, &QuadSpec::default()).unwrap();
        let c = fisher_metric_closed_form(family, &p).unwrap();
        for i in 0..c.nrows() {
            for j in 0..c.ncols() {
                let scale = c[(i, i)].abs().max(c[(j, j)].abs());
                worst = worst.max((q.metric[(i, j)] - c[(i, j)]).abs() / scale);
            }
        }
        points += 1;
    };
    for a in grid {
        for b in grid {
            check(Family::CompositeIntegrable, vec![a, b]);
        }
    }
    for a in grid {
        for m in loc {
            for s in grid {
                check(Family::CompositeChaotic, vec![a, m, s]);
            }
        }
    }
    let t = start.elapsed();
    r.line(
        "1",
        "metric fidelity",
        worst < METRIC_REL_TOL && t < METRIC_TIME,
        format!("{points} points, max rel err {worst:.2e} (< {METRIC_REL_TOL:e}), {t:.2?}"),
    );
}

fn curvature_signs(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let integ = opaque(&ManifoldModel::integrable());
    let chaos = opaque(&ManifoldModel::chaotic());
    let mut flat_max: f64 = 0.0;
    let mut chaos_dev: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..50 {
        let p = random_point(&mut rng, integ.domain());
        match curvature(&integ, &p, None) {
            Ok(c) => flat_max = flat_max.max(c.scalar.abs()),
            Err(_) => errors += 1,
        }
        let p = random_point(&mut rng, chaos.domain());
        match curvature(&chaos, &p, None) {
            Ok(c) => chaos_dev = chaos_dev.max((c.scalar + 1.0).abs()),
            Err(_) => errors += 1,
        }
    }
    let t = start.elapsed();
    r.line(
        "2",
        "curvature signs",
        errors == 0 && flat_max < FLAT_SCALAR_TOL && chaos_dev < CHAOTIC_SCALAR_TOL && t < CURVATURE_TIME,
        format!(
            "50+50 points (finite differences), integrable max|R| {flat_max:.2e} (< {FLAT_SCALAR_TOL:e}), \
             chaotic max|R+1| {chaos_dev:.2e} (< {CHAOTIC_SCALAR_TOL:e}), {errors} errors, {t:.2?}"
        ),
    );
}

fn geodesic_correctness(r: &mut Report) {
    let integ = ManifoldModel::integrable();
    let chaos = ManifoldModel::chaotic();
    let tol = 1e-10;

    let mut sol_err: f64 = 0.0;
    for (mu0, v) in [(1.0, 1.0), (0.5, -0.7), (2.0, 0.3)] {
        let traj = integrate_geodesic(&integ, &[mu0, 1.0], &[mu0 * v, 0.0], 1.0, tol).unwrap();
        let want = mu0 * v.exp();
        sol_err = sol_err.max((traj.final_coords()[0] - want).abs() / want);
    }

    let mut drift: f64 = 0.0;
    let mut trip: f64 = 0.0;
    for (m, x0, v0) in [
        (&integ, vec![1.0, 2.0], vec![0.8, -1.1]),
        (&chaos, vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]),
        (&chaos, vec![0.7, -1.0, 2.0], vec![-0.3, 0.5, 0.9]),
    ] {
        let fwd = integrate_geodesic(m, &x0, &v0, 10.0, tol).unwrap();
        drift = drift.max(fwd.speed_drift());
        let back_v: Vec<f64> = fwd.final_velocity().iter().map(|v| -v).collect();
        let back = integrate_geodesic(m, fwd.final_coords(), &back_v, 10.0, tol).unwrap();
        for (a, b) in back.final_coords().iter().zip(&x0) {
            trip = trip.max((a - b).abs());
        }
    }
    r.line(
        "3",
        "geodesic correctness",
        sol_err < GEODESIC_TOL && drift < SPEED_TOL && trip < ROUND_TRIP_TOL,
        format!(
            "mu(1) rel err {sol_err:.2e} (< {GEODESIC_TOL:e}), speed drift {drift:.2e} (< {SPEED_TOL:e}), \
             round trip {trip:.2e} (< {ROUND_TRIP_TOL:e})"
        ),
    );
}

fn jacobi_lyapunov(r: &mut Report) {
    let g = ManifoldModel::gaussian();
    let opts = IntegratorOptions {
        max_step: 0.05,
        ..IntegratorOptions::with_tol(1e-11)
    };
    // Unit speed: 2 (dσ)² / σ² = 1.
    let traj = integrate_geodesic_with(&g, &[0.0, 1.0], &[0.0, FRAC_1_SQRT_2], 30.0, &opts).unwrap();
    let jac = integrate_jacobi(&g, &traj, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
    let short = integrate_geodesic_with(&g, &[0.0, 1.0], &[0.0, FRAC_1_SQRT_2], 5.0, &opts).unwrap();
    let short = integrate_jacobi(&g, &short, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
    let want = SQRT_2 * (5.0 / SQRT_2).sinh();
    let j_err = (short.jacobi.as_ref().unwrap().last().unwrap().norm - want).abs() / want;
    let lam = estimate_lambda_j(&jac, (10.0, 30.0)).unwrap().lambda_j;
    let lam_err = (lam - FRAC_1_SQRT_2).abs() / FRAC_1_SQRT_2;

    // Flat manifolds: a displaced field with no initial spread.
    let mut flat_lams = Vec::new();
    for (m, x0, v0, j0) in [
        (ManifoldModel::euclidean(2), vec![0.0, 0.0], vec![1.0, 0.5], vec![1.0, 0.0]),
        (ManifoldModel::integrable(), vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]),
    ] {
        let t = integrate_geodesic_with(&m, &x0, &v0, 30.0, &opts).unwrap();
        let j = integrate_jacobi(&m, &t, &j0, &[0.0, 0.0]).unwrap();
        flat_lams.push(estimate_lambda_j(&j, (10.0, 30.0)).unwrap().lambda_j);
    }
    let flat_max = flat_lams.iter().fold(0.0_f64, |a, b| a.max(b.abs()));

    // Informational: linearly growing field J = τ e₁.
    let e = ManifoldModel::euclidean(2);
    let t = integrate_geodesic_with(&e, &[0.0, 0.0], &[1.0, 0.0], 30.0, &opts).unwrap();
    let j = integrate_jacobi(&e, &t, &[0.0, 0.0], &[0.0, 1.0]).unwrap();
    let linear_lam = estimate_lambda_j(&j, (10.0, 30.0)).unwrap().lambda_j;

    r.line(
        "4",
        "Jacobi / Lyapunov",
        j_err < JACOBI_REL_TOL && lam_err < LAMBDA_REL_TOL && flat_max < FLAT_LAMBDA_MAX,
        format!(
            "|J(5)| rel err {j_err:.2e} (< {JACOBI_REL_TOL:e}), lambda_J {lam:.5} rel err {lam_err:.2e} \
             (< {LAMBDA_REL_TOL}), flat max|lambda_J| {flat_max:.2e} (< {FLAT_LAMBDA_MAX}); \
             info: J(0)=0 flat field gives {linear_lam:.4}"
        ),
    );
}

fn ige_dichotomy(r: &mut Report) {
    let opts = IntegratorOptions {
        max_step: 0.1,
        ..IntegratorOptions::with_tol(1e-10)
    };
    let tau_max = 100.0;
    let window = (tau_max / 10.0, tau_max);

    let start = Instant::now();
    let integ = ManifoldModel::integrable();
    let traj = integrate_geodesic_with(&integ, &[1.0, 1.0], &[1.0, 1.0], tau_max, &opts).unwrap();
    let s = volume_series(&integ, &traj, 16).unwrap();
    let fit = fit_growth(&s, window).unwrap();
    let t_integ = start.elapsed();
    let c = fit.c_ig();
    let integ_ok = fit.selected == GrowthModel::Logarithmic
        && (c - 2.0).abs() / 2.0 < C_IG_REL_TOL
        && t_integ < IGE_TIME;

    let start = Instant::now();
    let chaos = ManifoldModel::chaotic();
    let traj = integrate_geodesic_with(&chaos, &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0], tau_max, &opts)
        .unwrap();
    let completed = traj.termination == Termination::Completed;
    let s = volume_series(&chaos, &traj, 16).unwrap();
    let cfit = fit_growth(&s, window).unwrap();
    let t_chaos = start.elapsed();
    let chaos_ok = completed
        && cfit.selected == GrowthModel::Linear
        && cfit.k_ig() > 0.0
        && cfit.linear.r2 > LINEAR_R2_MIN
        && t_chaos < IGE_TIME;

    // Informational: Jacobi exponent on the same run.
    let j0 = [0.0, 0.0, 0.0];
    let dj0 = [0.0, 0.0, 1.0];
    let jac = integrate_jacobi(&chaos, &traj, &j0, &dj0).unwrap();
    let lam = estimate_lambda_j(&jac, window).unwrap().lambda_j;
    let cmp = compare_rates(&cfit, lam).unwrap();

    r.line(
        "5",
        "IGE dichotomy",
        integ_ok && chaos_ok,
        format!(
            "integrable: {:?}, c_IG {c:.4} (2 ± {C_IG_REL_TOL}), {t_integ:.2?}; chaotic: {:?}, K_IG {:.4}, \
             r2 {:.7} (> {LINEAR_R2_MIN}), completed {completed}, {t_chaos:.2?}; \
             info: lambda_J {lam:.4}, K_IG/lambda_J {:.4}",
            fit.selected,
            cfit.selected,
            cfit.k_ig(),
            cfit.linear.r2,
            cmp.ratio.unwrap_or(f64::NAN),
        ),
    );
}

fn lsd_run(n: usize) -> (bool, String, Duration) {
    let start = Instant::now();
    let u = UnfoldOptions::default();
    let v = VerdictOptions::default();
    let reg = analyze(&ChainSpec::new(n, 0.0, 2.0, Sector::ReflectionEven), &u, &v).unwrap();
    let cha = analyze(&ChainSpec::new(n, 1.0, 1.0, Sector::ReflectionEven), &u, &v).unwrap();
    let t = start.elapsed();
    let m_reg = reg.ks_wigner - reg.ks_poisson;
    let m_cha = cha.ks_poisson - cha.ks_wigner;
    let ok = reg.verdict == Verdict::PoissonLike
        && cha.verdict == Verdict::WignerLike
        && m_reg >= KS_MARGIN_MIN
        && m_cha >= KS_MARGIN_MIN;
    let detail = format!(
        "n={n}: H(0,2) {} (KS P {:.4}, W {:.4}, margin {m_reg:.4}); H(1,1) {} (KS P {:.4}, W {:.4}, \
         margin {m_cha:.4}); margins >= {KS_MARGIN_MIN}, {t:.2?}",
        reg.verdict.name(),
        reg.ks_poisson,
        reg.ks_wigner,
        cha.verdict.name(),
        cha.ks_poisson,
        cha.ks_wigner,
    );
    (ok, detail, t)
}

fn spin_chain_lsd(r: &mut Report) {
    let (ok11, d11, t11) = lsd_run(11);
    r.line("6", "spin-chain LSD", ok11 && t11 < LSD_TIME, d11);
    let (ok12, d12, t12) = lsd_run(12);
    r.line("6b", "spin-chain LSD (larger chain)", ok12 && t12 < LSD_TIME, d12);
}

/// First Bianchi identity and metric compatibility on finite-difference
/// geometry, plus the spin-chain and sampling invariants.
fn structural_invariants(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bianchi: f64 = 0.0;
    let mut compat: f64 = 0.0;
    for base in [ManifoldModel::integrable(), ManifoldModel::chaotic()] {
        let m = opaque(&base);
        let n = m.dim();
        for _ in 0..20 {
            let p = random_point(&mut rng, m.domain());
            let rt = riemann(&m, &p, 1e-4).unwrap();
            let scale = rt.as_slice().iter().fold(1.0_f64, |a, b| a.max(b.abs()));
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let s = rt.get(a, b, c, d) + rt.get(a, c, d, b) + rt.get(a, d, b, c);
                            bianchi = bianchi.max(s.abs() / scale);
                        }
                    }
                }
            }
            // ∂_k g_ij = Γ^l_ki g_lj + Γ^l_kj g_il
            let gamma = christoffel_fd(&m, &p, 1e-4).unwrap();
            let g = m.metric(&p).unwrap();
            let h = 1e-5;
            for k in 0..n {
                let mut q = p.clone();
                q[k] += h * p[k].abs().max(1.0);
                let gp = m.metric(&q).unwrap();
                q[k] = p[k] - h * p[k].abs().max(1.0);
                let gm = m.metric(&q).unwrap();
                let dg: DMatrix<f64> = (gp - gm) / (2.0 * h * p[k].abs().max(1.0));
                for i in 0..n {
                    for j in 0..n {
                        let mut rhs = 0.0;
                        for l in 0..n {
                            rhs += gamma.get(l, k, i) * g[(l, j)] + gamma.get(l, k, j) * g[(i, l)];
                        }
                        let scale = g.amax() / p.iter().fold(1.0_f64, |a, b| a.min(b.abs().max(0.1)));
                        compat = compat.max((dg[(i, j)] - rhs).abs() / scale);
                    }
                }
            }
        }
    }

    let mut trace: f64 = 0.0;
    let mut union: f64 = 0.0;
    for n in 1..=8 {
        let (hx, hy) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let h = build_hamiltonian_real(&ChainSpec::new(n, hx, hy, Sector::Full)).unwrap();
        trace = trace.max(h.trace().abs());
        let full = spectrum(&ChainSpec::new(n, hx, hy, Sector::Full)).unwrap();
        let mut both = spectrum(&ChainSpec::new(n, hx, hy, Sector::ReflectionEven)).unwrap();
        both.extend(spectrum(&ChainSpec::new(n, hx, hy, Sector::ReflectionOdd)).unwrap());
        both.sort_by(f64::total_cmp);
        for (a, b) in both.iter().zip(&full) {
            union = union.max((a - b).abs());
        }
        assert_eq!(both.len(), full.len());
    }

    let mut ks_worst: f64 = 0.0;
    for (family, theta) in [
        (Family::Exponential, vec![1.7]),
        (Family::WignerDyson, vec![0.6]),
        (Family::Gaussian, vec![-0.4, 2.2]),
    ] {
        let p = ParamPoint::new(theta);
        let xs: Vec<f64> = family.sample(&p, 20_000, 99).unwrap().into_iter().map(|x| x[0]).collect();
        let d = ks_distance(&xs, |x| family.cdf(&p, x).unwrap());
        ks_worst = ks_worst.max(d);
    }

    let t = start.elapsed();
    r.line(
        "7",
        "structural invariants",
        bianchi < 1e-6 && compat < 1e-6 && trace < 1e-12 && union < 1e-9 && ks_worst < 0.02 && t < INVARIANT_TIME,
        format!(
            "Bianchi {bianchi:.2e} (< 1e-6), compatibility {compat:.2e} (< 1e-6), |tr H| {trace:.1e} (< 1e-12), \
             sector union {union:.1e} (< 1e-9), sampling KS {ks_worst:.4} (< 0.02), {t:.2?}"
        ),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    metric_fidelity(&mut r);
    curvature_signs(&mut r);
    geodesic_correctness(&mut r);
    jacobi_lyapunov(&mut r);
    ige_dichotomy(&mut r);
    spin_chain_lsd(&mut r);
    structural_invariants(&mut r);
    if r.failures > 0 {
        println!("acceptance: {} criterion line(s) failed", r.failures);
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
