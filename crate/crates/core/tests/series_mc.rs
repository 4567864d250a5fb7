//! Monte Carlo checks of the series sampler against closed forms.

use ftsm_core::charfn::{cf_fsm, cf_ts};
use ftsm_core::exec::{map_indexed, Execution};
use ftsm_core::kernel::KernelParams;
use ftsm_core::measure::{ts_variance, InnerMeasure};
use ftsm_core::series::{FbmApprox, ProcessKind, SeriesSimulator, TailCorrection};
use ftsm_core::stats::{covariance_se, mean_se};
use num_complex::Complex64;

const Z: f64 = 4.0;

/// Mean and variance of X_t from the cumulants of the TS characteristic function.
fn ts_moments(rho: &InnerMeasure, alpha: f64, t: f64) -> (f64, f64) {
    let e = 1e-4;
    let l = |y: f64| cf_ts(y, t, rho, alpha).unwrap().ln();
    let (lp, l0, lm) = (l(e), Complex64::new(0.0, 0.0), l(-e));
    let mean = ((lp - lm) / (2.0 * e)).im;
    let var = -((lp - 2.0 * l0 + lm) / (e * e)).re;
    (mean, var)
}

fn samples(sim: &SeriesSimulator, kind: ProcessKind, reps: u64, seed: u64) -> Vec<Vec<f64>> {
    map_indexed(reps, Execution::Auto, |r| {
        let d = sim.driver(seed, r).unwrap();
        sim.simulate(kind, &d).unwrap().values
    })
}

fn column(paths: &[Vec<f64>], j: usize) -> Vec<f64> {
    paths.iter().map(|p| p[j]).collect()
}

fn assert_within(label: &str, est: f64, se: f64, want: f64) {
    let z = (est - want) / se;
    assert!(z.abs() <= Z, "{label}: estimate {est} ± {se}, expected {want}, z = {z:.2}");
}

#[test]
fn ts_mean_and_variance_match_the_characteristic_function() {
    // one-sided ρ exercises the ζ(1/α) drift term, ρ₂ the Γ(1−α)∫xρ term
    let cases = [
        (InnerMeasure::new([(1.0, 1.0)]).unwrap(), 0.7),
        (InnerMeasure::new([(1.0, 1.0)]).unwrap(), 1.6),
        (InnerMeasure::new([(1.0, 1.0)]).unwrap(), 1.0),
        (InnerMeasure::rho2(1.6).unwrap(), 1.6),
        (InnerMeasure::new([(2.0, 0.3), (-0.5, 1.0)]).unwrap(), 1.3),
    ];
    for (k, (rho, alpha)) in cases.into_iter().enumerate() {
        let params = KernelParams::new(1.0 / alpha, alpha).unwrap();
        let sim = SeriesSimulator::new(params, rho.clone(), 2.0, vec![0.0, 1.0, 2.0], 400, TailCorrection::Gaussian)
            .unwrap();
        let paths = samples(&sim, ProcessKind::Ts, 10_000, 100 + k as u64);
        for (j, t) in [(1, 1.0), (2, 2.0)] {
            let x = column(&paths, j);
            let (mean, var) = ts_moments(&rho, alpha, t);
            let (m, se) = mean_se(&x);
            assert_within(&format!("mean case {k} t={t}"), m, se, mean);
            let centred: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
            let (v, vse) = mean_se(&centred);
            assert_within(&format!("variance case {k} t={t}"), v, vse, var);
            assert!((var - t * ts_variance(&rho, alpha).unwrap()).abs() < 1e-4 * var);
        }
    }
}

#[test]
fn short_truncation_with_gaussian_tail_keeps_the_moments() {
    let rho = InnerMeasure::new([(1.0, 1.0), (-0.4, 2.0)]).unwrap();
    let alpha = 1.4;
    let params = KernelParams::new(0.9, alpha).unwrap();
    let sim = SeriesSimulator::new(params, rho.clone(), 1.0, vec![0.0, 0.5, 1.0], 5, TailCorrection::Gaussian).unwrap();
    let paths = samples(&sim, ProcessKind::Ftsm, 20_000, 7);
    let var = ts_variance(&rho, alpha).unwrap();
    let g2 = 2.0 * params.g_exponent();
    for (j, t) in [(1, 0.5f64), (2, 1.0)] {
        let x = column(&paths, j);
        let (m, se) = mean_se(&x);
        assert_within("mean", m, se, 0.0);
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (v, vse) = mean_se(&sq);
        assert_within("second moment", v, vse, t.powf(g2) * var);
    }
}

#[test]
fn ftsm_covariance_and_stationary_increments() {
    let rho = InnerMeasure::rho2(1.6).unwrap();
    let params = KernelParams::new(0.8, 1.6).unwrap();
    let grid = vec![0.0, 0.25, 0.5, 1.0];
    let sim = SeriesSimulator::new(params, rho.clone(), 1.0, grid.clone(), 600, TailCorrection::Gaussian).unwrap();
    let paths = samples(&sim, ProcessKind::Ftsm, 20_000, 8);
    let var = ts_variance(&rho, 1.6).unwrap();
    for j in 1..grid.len() {
        let (m, se) = mean_se(&column(&paths, j));
        assert_within("mean", m, se, 0.0);
        for k in j..grid.len() {
            let (c, se) = covariance_se(&column(&paths, j), &column(&paths, k));
            assert_within("covariance", c, se, params.fbm_covariance(grid[j], grid[k]) * var);
        }
    }
    // E[(L_1 − L_{0.5})²] = 0.5^{2G}·Var(X_1)
    let inc: Vec<f64> = paths.iter().map(|p| (p[3] - p[2]).powi(2)).collect();
    let (m, se) = mean_se(&inc);
    assert_within("increment", m, se, 0.5f64.powf(2.0 * params.g_exponent()) * var);
}

#[test]
fn fsm_is_self_similar_and_matches_its_marginal() {
    let rho = InnerMeasure::rho1();
    let (h_idx, alpha) = (0.8, 1.6);
    let params = KernelParams::new(h_idx, alpha).unwrap();
    let scale = 3.0;
    let reps = 10_000;
    let base = SeriesSimulator::new(params, rho.clone(), 1.0, vec![0.0, 0.5], 300, TailCorrection::Gaussian).unwrap();
    let wide =
        SeriesSimulator::new(params, rho.clone(), scale, vec![0.0, 0.5 * scale], 300, TailCorrection::Gaussian).unwrap();
    // the same driver seeds on [0, T] and [0, cT]: every term scales by c^H
    let a = column(&samples(&base, ProcessKind::Fsm, reps, 31), 1);
    let b: Vec<f64> = column(&samples(&wide, ProcessKind::Fsm, reps, 31), 1)
        .iter()
        .map(|v| v * scale.powf(-h_idx))
        .collect();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
    }
    let ecf = |x: &[f64], y: f64| -> Complex64 {
        x.iter().map(|v| Complex64::new(0.0, y * v).exp()).sum::<Complex64>() / x.len() as f64
    };
    let mut gap: f64 = 0.0;
    let mut oracle_gap: f64 = 0.0;
    for k in 0..=40 {
        let y = -2.0 + 0.1 * k as f64;
        gap = gap.max((ecf(&a, y) - ecf(&b, y)).norm());
        oracle_gap = oracle_gap.max((ecf(&a, y) - cf_fsm(y, 0.5, &params, &rho).unwrap()).norm());
    }
    assert!(gap <= 0.03, "self-similarity gap {gap}");
    assert!(oracle_gap <= 0.03, "marginal gap {oracle_gap}");
    println!("self-similarity gap {gap:.2e}, marginal gap {oracle_gap:.4}");
}

#[test]
fn fbm_approximation_variance_holds_off_the_unit_horizon() {
    let params = KernelParams::new(0.8, 1.6).unwrap();
    let grid = vec![0.0, 1.0, 2.0];
    let f = FbmApprox::new(params, 2_000, grid.clone()).unwrap();
    let paths = map_indexed(10_000, Execution::Auto, |r| f.simulate(5, r).values);
    let g2 = 2.0 * params.g_exponent();
    for j in 1..grid.len() {
        let sq: Vec<f64> = paths.iter().map(|p| p[j] * p[j]).collect();
        let (v, se) = mean_se(&sq);
        assert_within("variance", v, se, grid[j].powf(g2));
    }
    let (c, se) = covariance_se(&column(&paths, 1), &column(&paths, 2));
    assert_within("covariance", c, se, params.fbm_covariance(1.0, 2.0));
}
