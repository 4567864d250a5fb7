//! Pass/fail checks of sampled paths and deterministic probes against closed forms.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{
    cf_fsm, cf_ftsm, cf_rescaled_long, cf_rescaled_short, cf_ts, codifference, codifference_asymptotic_constant,
};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::kernel::{KernelParams, Regime};
use crate::measure::{ts_variance, InnerMeasure, SignedMoment};
use crate::series::{FbmApprox, Path, ProcessKind, SeriesSimulator, TailCorrection};
use crate::special::gamma_real;
use crate::stats::{
    bonferroni_threshold, bootstrap_se, covariance_se, kurtosis_se, mean, mean_se, ols_slope, skew_kurt, skewness_se,
};

/// How `passed` is decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "limit")]
pub enum PassRule {
    /// |z_score| ≤ limit.
    ZScore(f64),
    /// |estimate − theoretical| ≤ limit.
    Absolute(f64),
    /// |estimate − theoretical| ≤ limit·|theoretical|.
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub theoretical: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub rule: PassRule,
    pub passed: bool,
    pub n_reps: u64,
    pub runtime_s: f64,
    pub seed: u64,
    pub params: String,
}

impl VerificationReport {
    #[allow(clippy::too_many_arguments)]
    fn new(
        name: impl Into<String>,
        theoretical: f64,
        estimate: f64,
        std_error: f64,
        rule: PassRule,
        n_reps: u64,
        seed: u64,
        params: String,
        started: Instant,
    ) -> Self {
        let z_score = if std_error > 0.0 { (estimate - theoretical) / std_error } else { 0.0 };
        let gap = (estimate - theoretical).abs();
        let passed = match rule {
            PassRule::ZScore(limit) => z_score.abs() <= limit && estimate.is_finite(),
            PassRule::Absolute(limit) => gap <= limit,
            PassRule::Relative(limit) => gap <= limit * theoretical.abs(),
        };
        Self {
            name: name.into(),
            theoretical,
            estimate,
            std_error,
            z_score,
            rule,
            passed,
            n_reps,
            runtime_s: started.elapsed().as_secs_f64(),
            seed,
            params,
        }
    }
}

/// Kernel parameters with an inner measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: KernelParams,
    pub rho: InnerMeasure,
}

impl Model {
    pub fn new(params: KernelParams, rho: InnerMeasure) -> Self {
        Self { params, rho }
    }

    fn label(&self) -> String {
        format!("H={} alpha={} rho={}", self.params.hurst(), self.params.alpha(), self.rho)
    }

    fn ts_variance(&self) -> Result<f64> {
        ts_variance(&self.rho, self.params.alpha())
    }
}

/// Monte Carlo settings shared by the sampling checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub n_reps: u64,
    pub seed: u64,
    pub n_terms: usize,
    pub tail: TailCorrection,
    pub exec: Execution,
    /// Per-check z threshold before any family-wise adjustment.
    pub z: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { n_reps: 10_000, seed: 7, n_terms: 600, tail: TailCorrection::Gaussian, exec: Execution::Auto, z: 4.0 }
    }
}

impl McOptions {
    pub fn with_reps(self, n_reps: u64) -> Self {
        Self { n_reps, ..self }
    }
}

/// Samples `opts.n_reps` paths of `kind` on `grid` with horizon `grid.last()`.
pub fn simulate_paths(model: &Model, kind: ProcessKind, grid: &[f64], opts: &McOptions) -> Result<Vec<Path>> {
    let horizon = *grid.last().ok_or_else(|| Error::InvalidParams("time grid is empty".into()))?;
    let sim = SeriesSimulator::new(model.params, model.rho.clone(), horizon, grid.to_vec(), opts.n_terms, opts.tail)?;
    try_map_indexed(opts.n_reps, opts.exec, |r| {
        let d = sim.driver(opts.seed, r)?;
        sim.simulate(kind, &d)
    })
}

fn column(paths: &[Path], j: usize) -> Vec<f64> {
    paths.iter().map(|p| p.values[j]).collect()
}

/// Empirical covariance at every ordered pair of positive grid points against
/// ½(t^{2G} + s^{2G} − |t−s|^{2G})·Var(X₁), Bonferroni-adjusted over the pairs.
pub fn check_covariance(model: &Model, grid: &[f64], opts: &McOptions) -> Result<Vec<VerificationReport>> {
    if opts.n_reps < 100 {
        return Err(Error::InvalidParams("covariance check needs at least 100 replications".into()));
    }
    let started = Instant::now();
    let paths = simulate_paths(model, ProcessKind::Ftsm, grid, opts)?;
    let var = model.ts_variance()?;
    let idx: Vec<usize> = (0..grid.len()).filter(|&j| grid[j] > 0.0).collect();
    let threshold = bonferroni_threshold(opts.z, idx.len() * idx.len());
    let mut out = Vec::new();
    for &j in &idx {
        for &k in &idx {
            let (c, se) = covariance_se(&column(&paths, j), &column(&paths, k));
            out.push(VerificationReport::new(
                format!("covariance(t={}, s={})", grid[j], grid[k]),
                model.params.fbm_covariance(grid[j], grid[k]) * var,
                c,
                se,
                PassRule::ZScore(threshold),
                opts.n_reps,
                opts.seed,
                model.label(),
                started,
            ));
        }
    }
    Ok(out)
}

/// Mean of Σ|ΔL|² over N equal steps of [0,T] against N^{1−2G}T^{2G}·Var(X₁) for
/// each N, plus the fitted log–log exponent against 1−2G (tolerance `slope_tol`).
/// All N must divide the largest, so coarser sums reuse the finest paths.
pub fn check_quadratic_variation(
    model: &Model,
    horizon: f64,
    ns: &[usize],
    slope_tol: f64,
    opts: &McOptions,
) -> Result<Vec<VerificationReport>> {
    if model.params.regime() == Regime::Rough {
        return Err(Error::Regime("quadratic variation decay concerns H ≥ 1/α".into()));
    }
    let n_max = *ns.iter().max().ok_or_else(|| Error::InvalidParams("no step counts given".into()))?;
    if ns.len() < 2 || ns.iter().any(|&n| n == 0 || n_max % n != 0) {
        return Err(Error::InvalidParams("step counts must be at least two divisors of the largest".into()));
    }
    let started = Instant::now();
    let grid: Vec<f64> = (0..=n_max).map(|k| horizon * k as f64 / n_max as f64).collect();
    let paths = simulate_paths(model, ProcessKind::Ftsm, &grid, opts)?;
    let var = model.ts_variance()?;
    let g2 = 2.0 * model.params.g_exponent();
    let threshold = bonferroni_threshold(opts.z, ns.len());
    let mut out = Vec::new();
    let (mut xs, mut ys, mut rel) = (Vec::new(), Vec::new(), Vec::new());
    for &n in ns {
        let stride = n_max / n;
        let qv: Vec<f64> = paths
            .iter()
            .map(|p| {
                let sq: Vec<f64> = (0..n).map(|k| (p.values[(k + 1) * stride] - p.values[k * stride]).powi(2)).collect();
                crate::stats::pairwise_sum(&sq)
            })
            .collect();
        let (m, se) = mean_se(&qv);
        let want = (n as f64).powf(1.0 - g2) * horizon.powf(g2) * var;
        out.push(VerificationReport::new(
            format!("quadratic_variation(N={n})"),
            want,
            m,
            se,
            PassRule::ZScore(threshold),
            opts.n_reps,
            opts.seed,
            model.label(),
            started,
        ));
        xs.push((n as f64).ln());
        ys.push(m.ln());
        rel.push(se / m);
    }
    let slope = ols_slope(&xs, &ys);
    let mx = mean(&xs);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let se = xs.iter().zip(&rel).map(|(x, r)| ((x - mx) / sxx * r).powi(2)).sum::<f64>().sqrt();
    out.push(VerificationReport::new(
        "quadratic_variation_exponent",
        1.0 - g2,
        slope,
        se,
        PassRule::Absolute(slope_tol),
        opts.n_reps,
        opts.seed,
        model.label(),
        started,
    ));
    Ok(out)
}

/// ½((t+h)^{2G} − 2t^{2G} + (t−h)^{2G})·Var(X₁) = Cov(L_h, L_{t+h} − L_t).
pub fn lrd_covariance(params: &KernelParams, h: f64, t: f64, var: f64) -> f64 {
    let g2 = 2.0 * params.g_exponent();
    0.5 * ((t + h).powf(g2) - 2.0 * t.powf(g2) + (t - h).abs().powf(g2)) * var
}

/// Monte Carlo Cov(L_h, L_{t+h} − L_t) at each `ts` against the closed form, and the
/// log–log slope of the closed form over `fit_range` against 2(G−1) (tolerance `slope_tol`).
pub fn check_lrd_slope(
    model: &Model,
    h: f64,
    ts: &[f64],
    fit_range: (f64, f64),
    slope_tol: f64,
    opts: &McOptions,
) -> Result<Vec<VerificationReport>> {
    if !(h > 0.0) || ts.iter().any(|&t| !(t >= h)) {
        return Err(Error::InvalidParams("lag h must be positive and every t ≥ h".into()));
    }
    let started = Instant::now();
    let var = model.ts_variance()?;
    let mut grid: Vec<f64> = vec![0.0, h];
    for &t in ts {
        grid.push(t);
        grid.push(t + h);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let at = |x: f64| grid.iter().position(|&g| g == x).expect("point is on the grid");
    let paths = simulate_paths(model, ProcessKind::Ftsm, &grid, opts)?;
    let threshold = bonferroni_threshold(opts.z, ts.len());
    let mut out = Vec::new();
    let first = column(&paths, at(h));
    for &t in ts {
        let (i0, i1) = (at(t), at(t + h));
        let inc: Vec<f64> = paths.iter().map(|p| p.values[i1] - p.values[i0]).collect();
        let (c, se) = covariance_se(&first, &inc);
        out.push(VerificationReport::new(
            format!("lrd_covariance(h={h}, t={t})"),
            lrd_covariance(&model.params, h, t, var),
            c,
            se,
            PassRule::ZScore(threshold),
            opts.n_reps,
            opts.seed,
            model.label(),
            started,
        ));
    }
    let (lo, hi) = fit_range;
    let pts: Vec<f64> = (0..50).map(|k| lo * (hi / lo).powf(k as f64 / 49.0)).collect();
    let xs: Vec<f64> = pts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|&t| lrd_covariance(&model.params, h, t, var).abs().ln()).collect();
    let g = model.params.g_exponent();
    out.push(VerificationReport::new(
        "lrd_slope",
        2.0 * (g - 1.0),
        ols_slope(&xs, &ys),
        0.0,
        PassRule::Absolute(slope_tol),
        0,
        opts.seed,
        model.label(),
        started,
    ));
    let sign = lrd_covariance(&model.params, h, hi, var).signum();
    let want = if g > 0.5 { 1.0 } else if g < 0.5 { -1.0 } else { 0.0 };
    out.push(VerificationReport::new(
        "lrd_sign",
        want,
        if g == 0.5 { 0.0 } else { sign },
        0.0,
        PassRule::Absolute(0.0),
        0,
        opts.seed,
        model.label(),
        started,
    ));
    Ok(out)
}

/// Exact skewness and excess kurtosis of h^{−G}L_h from the cumulants
/// κ_n = Γ(n−α)∫xⁿρ·C_{H,α,n}·h^{n(H−1/α)+1}; `None` where Kⁿ is not integrable.
pub fn exact_shape(model: &Model, h: f64) -> Result<(Option<f64>, Option<f64>)> {
    let p = &model.params;
    let alpha = p.alpha();
    let var = model.ts_variance()?;
    let skew = if p.lp_integrable(3.0) {
        let k3 = gamma_real(3.0 - alpha)? * model.rho.signed_weighted_moment(SignedMoment::Power(3.0)) * p.kernel_lp_const(3.0)?;
        Some(k3 / var.powf(1.5) / h.sqrt())
    } else {
        None
    };
    let kurt = if p.lp_integrable(4.0) {
        let k4 = gamma_real(4.0 - alpha)? * model.rho.abs_moment(4.0) * p.kernel_lp_const(4.0)?;
        Some(k4 / (var * var) / h)
    } else {
        None
    };
    Ok((skew, kurt))
}

/// Sample moments of h^{−G}L_h for each h. Per h: variance against Var(X₁), skewness
/// and excess kurtosis against their exact values. At the largest h both shape
/// statistics must also be within `opts.z` SE of 0. Last, |kurtosis| must not
/// increase significantly between consecutive h: an increase counts only when it
/// exceeds `opts.z` standard errors of the difference.
pub fn check_long_time_gaussianity(model: &Model, hs: &[f64], opts: &McOptions) -> Result<Vec<VerificationReport>> {
    if hs.is_empty() || hs.iter().any(|&h| !(h >= 1.0)) || hs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("scales h must be increasing and at least 1".into()));
    }
    let var = model.ts_variance()?;
    let g = model.params.g_exponent();
    let mut out = Vec::new();
    let mut kurts = Vec::new();
    for (k, &h) in hs.iter().enumerate() {
        let started = Instant::now();
        let sub = McOptions { seed: opts.seed.wrapping_add(k as u64), ..*opts };
        let paths = simulate_paths(model, ProcessKind::Ftsm, &[0.0, h], &sub)?;
        let x: Vec<f64> = paths.iter().map(|p| p.values[1] * h.powf(-g)).collect();
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let (m2, m2_se) = mean_se(&sq);
        let (skew, kurt) = skew_kurt(&x);
        let (skew_se, kurt_se) = if x.len() >= 5000 {
            (skewness_se(&x), kurtosis_se(&x))
        } else {
            let s = |v: &[f64]| skew_kurt(v).0;
            let k4 = |v: &[f64]| skew_kurt(v).1;
            (bootstrap_se(&x, s, 400, sub.seed), bootstrap_se(&x, k4, 400, sub.seed ^ 1))
        };
        let (exact_skew, exact_kurt) = exact_shape(model, h)?;
        let z = PassRule::ZScore(opts.z);
        let report = |name: String, th: f64, est: f64, se: f64| {
            VerificationReport::new(name, th, est, se, z, sub.n_reps, sub.seed, model.label(), started)
        };
        out.push(report(format!("scaled_second_moment(h={h})"), var, m2, m2_se));
        if let Some(s) = exact_skew {
            out.push(report(format!("skewness(h={h})"), s, skew, skew_se));
        }
        if let Some(k) = exact_kurt {
            out.push(report(format!("excess_kurtosis(h={h})"), k, kurt, kurt_se));
        }
        if k + 1 == hs.len() {
            out.push(report(format!("gaussian_skewness(h={h})"), 0.0, skew, skew_se));
            out.push(report(format!("gaussian_kurtosis(h={h})"), 0.0, kurt, kurt_se));
        }
        kurts.push((h, kurt.abs(), kurt_se));
    }
    let started = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    for w in kurts.windows(2) {
        let (a, b) = (w[0], w[1]);
        worst = worst.max((b.1 - a.1) / a.2.hypot(b.2));
    }
    if kurts.len() > 1 {
        out.push(VerificationReport::new(
            "kurtosis_decreasing",
            0.0,
            worst.max(0.0),
            1.0,
            PassRule::Absolute(opts.z),
            opts.n_reps,
            opts.seed,
            model.label(),
            started,
        ));
    }
    Ok(out)
}

/// Sup over `ys` of |empirical CF − oracle| at time t (horizon t); the oracle is
/// the TS CF for `ProcessKind::Ts` and the fTSm CF otherwise.
pub fn check_empirical_cf(
    kind: ProcessKind,
    model: &Model,
    t: f64,
    ys: &[f64],
    tol: f64,
    opts: &McOptions,
) -> Result<VerificationReport> {
    if !matches!(kind, ProcessKind::Ts | ProcessKind::Ftsm) {
        return Err(Error::Unsupported(format!("empirical CF check is defined for ts and ftsm, not {kind}")));
    }
    let started = Instant::now();
    let paths = simulate_paths(model, kind, &[0.0, t], opts)?;
    let x = column(&paths, 1);
    let n = x.len() as f64;
    let mut gap: f64 = 0.0;
    let mut band: f64 = 0.0;
    for &y in ys {
        let terms: Vec<Complex64> = x.iter().map(|v| Complex64::new(0.0, y * v).exp()).collect();
        let re: Vec<f64> = terms.iter().map(|c| c.re).collect();
        let im: Vec<f64> = terms.iter().map(|c| c.im).collect();
        let ecf = Complex64::new(mean(&re), mean(&im));
        let oracle = match kind {
            ProcessKind::Ts => cf_ts(y, t, &model.rho, model.params.alpha())?,
            _ => cf_ftsm(y, t, &model.params, &model.rho)?,
        };
        gap = gap.max((ecf - oracle).norm());
        // E|e^{iyX} − φ|² = 1 − |φ|²
        band = band.max(((1.0 - ecf.norm_sqr()).max(0.0) / n).sqrt());
    }
    Ok(VerificationReport::new(
        format!("empirical_cf({kind}, t={t})"),
        0.0,
        gap,
        band,
        PassRule::Absolute(tol),
        opts.n_reps,
        opts.seed,
        model.label(),
        started,
    ))
}

/// Variogram exponent of paths on a common uniform grid from 0: the slope of
/// ln E|L_{t+δ} − L_t|² against ln δ over dyadic lags, judged against 2G.
/// The standard error comes from the spread of the slope across ten batches of paths.
pub fn estimate_holder_roughness(paths: &[Path], tol: f64) -> Result<VerificationReport> {
    let started = Instant::now();
    let first = paths.first().ok_or_else(|| Error::InvalidParams("no paths given".into()))?;
    let prov = &first.provenance;
    let params = KernelParams::new(prov.hurst, prov.alpha)?;
    if params.regime() == Regime::Rough || first.unbounded_regime {
        return Err(Error::Regime("variogram exponent is estimated for H ≥ 1/α only".into()));
    }
    let grid = &first.grid;
    let m = grid.len() - 1;
    if m < 8 || grid[0] != 0.0 || paths.iter().any(|p| p.grid != *grid) {
        return Err(Error::InvalidParams("paths must share a uniform grid from 0 with at least 8 steps".into()));
    }
    let dt = grid[1];
    let mut lags = vec![1usize];
    while lags.last().unwrap() * 8 <= m {
        lags.push(lags.last().unwrap() * 2);
    }
    let slope_of = |set: &[Path]| -> f64 {
        let xs: Vec<f64> = lags.iter().map(|&k| (k as f64 * dt).ln()).collect();
        let ys: Vec<f64> = lags
            .iter()
            .map(|&k| {
                let sq: Vec<f64> =
                    set.iter().flat_map(|p| (0..=m - k).map(move |j| (p.values[j + k] - p.values[j]).powi(2))).collect();
                mean(&sq).ln()
            })
            .collect();
        ols_slope(&xs, &ys)
    };
    let slope = slope_of(paths);
    let batches = 10.min(paths.len());
    let size = paths.len() / batches;
    let se = if batches >= 2 && size >= 1 {
        let parts: Vec<f64> = (0..batches).map(|b| slope_of(&paths[b * size..(b + 1) * size])).collect();
        (crate::stats::variance(&parts) / batches as f64).sqrt()
    } else {
        0.0
    };
    Ok(VerificationReport::new(
        format!("variogram_exponent(steps={m})"),
        2.0 * params.g_exponent(),
        slope,
        se,
        PassRule::Absolute(tol),
        paths.len() as u64,
        prov.seed,
        format!("H={} alpha={} rho={}", prov.hurst, prov.alpha, prov.rho),
        started,
    ))
}

/// Variance at each positive grid time and covariance at each pair for the
/// fBm approximation with N terms, against ½(t^{2G} + s^{2G} − |t−s|^{2G}).
pub fn check_fbm_approx(
    params: &KernelParams,
    n_terms: usize,
    grid: &[f64],
    opts: &McOptions,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let fbm = FbmApprox::new(*params, n_terms, grid.to_vec())?;
    let paths: Vec<Path> = crate::exec::map_indexed(opts.n_reps, opts.exec, |r| fbm.simulate(opts.seed, r));
    let idx: Vec<usize> = (0..grid.len()).filter(|&j| grid[j] > 0.0).collect();
    let pairs = idx.len() * (idx.len() + 1) / 2;
    let threshold = bonferroni_threshold(opts.z, pairs);
    let label = format!("H={} alpha={} N={n_terms}", params.hurst(), params.alpha());
    let mut out = Vec::new();
    for (a, &j) in idx.iter().enumerate() {
        for &k in &idx[a..] {
            // second moments about the known zero mean
            let prod: Vec<f64> = paths.iter().map(|p| p.values[j] * p.values[k]).collect();
            let (c, se) = mean_se(&prod);
            let name = if j == k { format!("fbm_variance(t={})", grid[j]) } else { format!("fbm_covariance(t={}, s={})", grid[j], grid[k]) };
            out.push(VerificationReport::new(
                name,
                params.fbm_covariance(grid[j], grid[k]),
                c,
                se,
                PassRule::ZScore(threshold),
                opts.n_reps,
                opts.seed,
                label.clone(),
                started,
            ));
        }
    }
    Ok(out)
}

/// |cf_rescaled_short(y,t,h) − cf_fsm(y,t)| ≤ tol.
pub fn check_short_time_limit(model: &Model, y: f64, t: f64, h: f64, tol: f64) -> Result<VerificationReport> {
    let started = Instant::now();
    let gap = (cf_rescaled_short(y, t, &model.params, &model.rho, h)? - cf_fsm(y, t, &model.params, &model.rho)?).norm();
    Ok(VerificationReport::new(
        format!("short_time_cf_gap(y={y}, t={t}, h={h})"),
        0.0,
        gap,
        0.0,
        PassRule::Absolute(tol),
        0,
        0,
        model.label(),
        started,
    ))
}

/// |cf_rescaled_long(y,h) − exp(−y²Var(X₁)/2)| ≤ tol.
pub fn check_long_time_limit(model: &Model, y: f64, h: f64, tol: f64) -> Result<VerificationReport> {
    let started = Instant::now();
    let gauss = (-0.5 * y * y * model.ts_variance()?).exp();
    let gap = (cf_rescaled_long(y, &model.params, &model.rho, h)? - Complex64::new(gauss, 0.0)).norm();
    Ok(VerificationReport::new(
        format!("long_time_cf_gap(y={y}, h={h})"),
        0.0,
        gap,
        0.0,
        PassRule::Absolute(tol),
        0,
        0,
        model.label(),
        started,
    ))
}

/// Log–log slope of |codifference(θ₁,θ₂,t)| over `points` log-spaced t in
/// `range` against 2(G−1), and codifference/t^{2(G−1)} at the right end against
/// the asymptotic constant (relative tolerance `ratio_tol`).
pub fn check_codifference(
    model: &Model,
    theta: (f64, f64),
    range: (f64, f64),
    points: usize,
    slope_tol: f64,
    ratio_tol: f64,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let (lo, hi) = range;
    let e = 2.0 * (model.params.g_exponent() - 1.0);
    let ts: Vec<f64> = (0..points).map(|k| lo * (hi / lo).powf(k as f64 / (points - 1) as f64)).collect();
    let vals = ts
        .iter()
        .map(|&t| codifference(theta.0, theta.1, t, &model.params, &model.rho))
        .collect::<Result<Vec<Complex64>>>()?;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|c| c.norm().ln()).collect();
    let slope = VerificationReport::new(
        format!("codifference_slope(t in [{lo}, {hi}])"),
        e,
        ols_slope(&xs, &ys),
        0.0,
        PassRule::Absolute(slope_tol),
        0,
        0,
        model.label(),
        started,
    );
    let c = codifference_asymptotic_constant(theta.0, theta.1, &model.params, &model.rho)?;
    let scaled = vals[points - 1] / hi.powf(e);
    let ratio = VerificationReport::new(
        format!("codifference_ratio(t={hi})"),
        1.0,
        1.0 + (scaled - c).norm() / c.norm(),
        0.0,
        PassRule::Relative(ratio_tol),
        0,
        0,
        model.label(),
        started,
    );
    Ok(vec![slope, ratio])
}

/// Named groups of checks at their default sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Covariance,
    Qv,
    Lrd,
    Gauss,
    Cf,
    Holder,
    Fbm,
    /// Deterministic scaling-limit and codifference probes.
    Limits,
    /// Every Monte Carlo suite above; `Limits` is run separately.
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "covariance" => Suite::Covariance,
            "qv" => Suite::Qv,
            "lrd" => Suite::Lrd,
            "gauss" => Suite::Gauss,
            "cf" => Suite::Cf,
            "holder" => Suite::Holder,
            "fbm" => Suite::Fbm,
            "limits" => Suite::Limits,
            "all" => Suite::All,
            other => return Err(Error::InvalidParams(format!("unknown suite {other:?}"))),
        })
    }
}

/// The (0.8, 1.6) model with ρ₂ or ρ₁.
pub fn reference_model(rho2: bool) -> Model {
    let params = KernelParams::new(0.8, 1.6).expect("reference parameters are admissible");
    let rho = if rho2 { InnerMeasure::rho2(1.6).expect("valid α") } else { InnerMeasure::rho1() };
    Model::new(params, rho)
}

/// Runs `suite` at its default sizes.
pub fn run_suite(suite: Suite, seed: u64, exec: Execution) -> Result<Vec<VerificationReport>> {
    let base = McOptions { seed, exec, ..McOptions::default() };
    let mut out = Vec::new();
    let run = |s: Suite| suite == s || (suite == Suite::All && s != Suite::Limits);
    if run(Suite::Covariance) {
        let grid = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        out.extend(check_covariance(&reference_model(true), &grid, &base.with_reps(20_000))?);
    }
    if run(Suite::Qv) {
        let ns = [16, 32, 64, 128, 256, 512];
        out.extend(check_quadratic_variation(&reference_model(true), 1.0, &ns, 0.05, &base.with_reps(1_000))?);
    }
    if run(Suite::Lrd) {
        out.extend(check_lrd_slope(&reference_model(true), 1.0, &[2.0, 8.0, 32.0], (10.0, 1e3), 0.1, &base.with_reps(20_000))?);
    }
    if run(Suite::Gauss) {
        let opts = McOptions { n_terms: 2_000, ..base.with_reps(50_000) };
        out.extend(check_long_time_gaussianity(&reference_model(false), &[1.0, 10.0, 1e3], &opts)?);
    }
    if run(Suite::Cf) {
        let ys: Vec<f64> = (0..=60).map(|k| -3.0 + 0.1 * k as f64).collect();
        let opts = base.with_reps(50_000);
        let model = reference_model(true);
        out.push(check_empirical_cf(ProcessKind::Ftsm, &model, 1.0, &ys, 0.02, &opts)?);
        let levy = Model::new(KernelParams::new(1.0 / 1.6, 1.6)?, model.rho.clone());
        out.push(check_empirical_cf(ProcessKind::Ts, &levy, 1.0, &ys, 0.02, &opts)?);
    }
    if run(Suite::Holder) {
        let model = reference_model(true);
        let opts = base.with_reps(1_000);
        for steps in [64usize, 256] {
            let grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
            let paths = simulate_paths(&model, ProcessKind::Ftsm, &grid, &opts)?;
            out.push(estimate_holder_roughness(&paths, 0.05)?);
        }
        let (a, b) = (out[out.len() - 2].estimate, out[out.len() - 1].estimate);
        out.push(VerificationReport::new(
            "variogram_refinement(64 -> 256)",
            0.0,
            b - a,
            0.0,
            PassRule::Absolute(0.05),
            opts.n_reps,
            seed,
            model.label(),
            Instant::now(),
        ));
    }
    if run(Suite::Fbm) {
        let params = KernelParams::new(0.8, 1.6)?;
        out.extend(check_fbm_approx(&params, 10_000, &[0.0, 0.25, 0.5, 1.0], &base.with_reps(10_000))?);
    }
    if run(Suite::Limits) {
        let model = reference_model(false);
        out.push(check_short_time_limit(&model, 1.0, 1.0, 1e-3, 1e-3)?);
        out.push(check_long_time_limit(&model, 1.0, 1e5, 1e-3)?);
        out.extend(check_codifference(&model, (1.0, -1.0), (10.0, 1e3), 9, 0.1, 0.05)?);
    }
    Ok(out)
}
