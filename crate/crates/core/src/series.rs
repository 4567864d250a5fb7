//! Shot-noise series simulation: frozen random drivers and coupled sample
//! paths of the TS Lévy process, fTSm, fSm, their short-time difference, and
//! the finite-sum fBm approximation.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, KernelTable, Regime};
use crate::measure::{is_alpha_one, series_constants, v_sampling_weights, InnerMeasure, SeriesConstants};
use crate::quad::{integrate, integrate_singular, QuadOptions};
use crate::rng::{stream_rng, Stream};
use crate::special::{riemann_zeta, EULER_GAMMA};

/// Process generated from a driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Ts,
    Ftsm,
    Fsm,
    FbmApprox,
    CoupledDiff,
}

impl std::fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProcessKind::Ts => "ts",
            ProcessKind::Ftsm => "ftsm",
            ProcessKind::Fsm => "fsm",
            ProcessKind::FbmApprox => "fbm_approx",
            ProcessKind::CoupledDiff => "coupled_diff",
        };
        f.write_str(s)
    }
}

/// Treatment of the terms beyond the truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCorrection {
    /// Plain truncated sum.
    None,
    /// Adds a Gaussian process with the exact conditional mean and covariance
    /// of the discarded terms given Γ_n.
    #[default]
    Gaussian,
}

/// The five frozen random sequences of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesDriver {
    pub gamma_arrivals: Vec<f64>,
    pub exp_marks: Vec<f64>,
    pub unif_marks: Vec<f64>,
    pub v_marks: Vec<f64>,
    pub times: Vec<f64>,
    pub n_terms: usize,
    pub horizon: f64,
    pub alpha: f64,
    pub seed: u64,
    pub rep: u64,
}

/// Driver for replication 0 of `seed`.
pub fn make_driver(seed: u64, horizon: f64, n_terms: usize, rho: &InnerMeasure, alpha: f64) -> Result<SeriesDriver> {
    make_driver_rep(seed, 0, horizon, n_terms, rho, alpha)
}

/// Driver for replication `rep`; every sequence comes from its own labelled stream.
pub fn make_driver_rep(
    seed: u64,
    rep: u64,
    horizon: f64,
    n_terms: usize,
    rho: &InnerMeasure,
    alpha: f64,
) -> Result<SeriesDriver> {
    if n_terms == 0 {
        return Err(Error::InvalidParams("n_terms must be at least 1".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams(format!("horizon T = {horizon} must be positive")));
    }
    let weights = v_sampling_weights(rho, alpha)?;
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for (_, p) in &weights {
        acc += p;
        cdf.push(acc);
    }

    let mut g = stream_rng(seed, rep, Stream::Gamma);
    let mut arrival = 0.0;
    let gamma_arrivals = (0..n_terms)
        .map(|_| {
            let e: f64 = g.sample(Exp1);
            arrival += e;
            arrival
        })
        .collect();
    let mut e = stream_rng(seed, rep, Stream::Exp);
    let exp_marks = (0..n_terms).map(|_| e.sample(Exp1)).collect();
    let mut u = stream_rng(seed, rep, Stream::Unif);
    let unif_marks = (0..n_terms).map(|_| 1.0 - u.random::<f64>()).collect();
    let mut v = stream_rng(seed, rep, Stream::V);
    let v_marks = (0..n_terms)
        .map(|_| {
            let x = v.random::<f64>() * acc;
            let j = cdf.partition_point(|&c| c <= x).min(weights.len() - 1);
            weights[j].0
        })
        .collect();
    let mut tt = stream_rng(seed, rep, Stream::Times);
    let times = (0..n_terms).map(|_| horizon * tt.random::<f64>()).collect();

    Ok(SeriesDriver {
        gamma_arrivals,
        exp_marks,
        unif_marks,
        v_marks,
        times,
        n_terms,
        horizon,
        alpha,
        seed,
        rep,
    })
}

/// Where a path came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub rep: u64,
    pub hurst: f64,
    pub alpha: f64,
    pub horizon: f64,
    pub n_terms: usize,
    pub tail: TailCorrection,
    pub rho: String,
}

/// One sampled path on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProcessKind,
    pub provenance: Provenance,
    /// Set in the rough regime, where paths are a.s. unbounded on every interval.
    pub unbounded_regime: bool,
    /// Heuristic size of the neglected terms: a(n)·t_max^{H−1/α}, the clip level
    /// at the last arrival times the root-mean-square kernel on [0, t_max].
    pub tail_bound: f64,
}

fn check_grid(grid: &[f64], horizon: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("time grid is empty".into()));
    }
    if !(grid[0] >= 0.0) {
        return Err(Error::InvalidParams(format!("grid starts at {} < 0", grid[0])));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("grid must be strictly increasing".into()));
    }
    let last = grid[grid.len() - 1];
    if last > horizon * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!("grid ends at {last} beyond the horizon T = {horizon}")));
    }
    Ok(())
}

/// Lower Cholesky factor of the covariance on the positive grid points.
fn cholesky(points: &[f64], cov: impl Fn(f64, f64) -> f64) -> Result<DMatrix<f64>> {
    let m = points.len();
    let base = DMatrix::from_fn(m, m, |i, j| cov(points[i], points[j]));
    let scale = (0..m).map(|i| base[(i, i)]).fold(0.0, f64::max);
    // fine grids with G near 1 are nearly singular; retry with a small ridge
    for jitter in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut a = base.clone();
        for i in 0..m {
            a[(i, i)] += jitter * scale;
        }
        if let Some(c) = a.cholesky() {
            return Ok(c.unpack());
        }
    }
    Err(Error::Numerical("covariance matrix of the remainder is not positive definite".into()))
}

/// Σ_{i ≤ n} i^{−s}.
fn harmonic(n: usize, s: f64) -> f64 {
    let terms: Vec<f64> = (1..=n).rev().map(|i| (i as f64).powf(-s)).collect();
    crate::stats::pairwise_sum(&terms)
}

/// Chebyshev interpolant on [lo, hi].
#[derive(Debug, Clone)]
struct Cheb {
    lo: f64,
    hi: f64,
    coef: Vec<f64>,
}

impl Cheb {
    fn fit(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let thetas: Vec<f64> = (0..n).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n as f64).collect();
        let vals = thetas
            .iter()
            .map(|th| f(0.5 * (lo + hi) + 0.5 * (hi - lo) * th.cos()))
            .collect::<Result<Vec<f64>>>()?;
        let mut coef: Vec<f64> = (0..n)
            .map(|k| 2.0 / n as f64 * vals.iter().zip(&thetas).map(|(v, th)| v * (k as f64 * th).cos()).sum::<f64>())
            .collect();
        coef[0] *= 0.5;
        Ok(Self { lo, hi, coef })
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn eval(&self, x: f64) -> f64 {
        let u = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coef[1..].iter().rev() {
            let b0 = c + 2.0 * u * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coef[0] + u * b1 - b2
    }
}

/// Moments of the discarded tempered terms as functions of the clip level a.
///
/// With Z = E·U^{1/α}·|V| and F(y) = P(Z ≤ y), F_s(y) = E[sgn V; Z ≤ y]:
/// variance rate m^α[a^{2−α}/(2−α) − (2/α)∫_0^a (y^{1−α} − a^{−α}y)F(y)dy] and
/// signed rate m^α ∫_0^a (y^{−α} − a^{−α})/α · F_s(y) dy.
#[derive(Debug, Clone)]
pub(crate) struct TemperedTail {
    alpha: f64,
    m_alpha: f64,
    /// (|x|, probability, sign) of the V distribution
    atoms: Vec<(f64, f64, f64)>,
    symmetric: bool,
}

impl TemperedTail {
    pub(crate) fn new(rho: &InnerMeasure, alpha: f64) -> Result<Self> {
        let atoms = v_sampling_weights(rho, alpha)?
            .into_iter()
            .map(|(x, p)| (x.abs(), p, x.signum()))
            .collect();
        Ok(Self { alpha, m_alpha: rho.abs_moment(alpha), atoms, symmetric: rho.is_symmetric() })
    }

    /// P(E·U^{1/α} ≤ c) = ∫_0^∞ (1 − exp(−c e^{z/α})) e^{−z} dz.
    fn q(&self, c: f64) -> f64 {
        if c <= 0.0 {
            return 0.0;
        }
        let a = self.alpha;
        let f = |z: f64| -(-c * (z / a).exp()).exp_m1() * (-z).exp();
        let knee = (a * (1.0 / c).ln()).max(0.0);
        let opts = QuadOptions::new(1e-300, 1e-13);
        let head = if knee > 0.0 { integrate(f, 0.0, knee, opts).value } else { 0.0 };
        head + integrate(f, knee, knee + 40.0, opts).value
    }

    fn cdf(&self, y: f64) -> f64 {
        self.atoms.iter().map(|&(x, p, _)| p * self.q(y / x)).sum()
    }

    fn signed_cdf(&self, y: f64) -> f64 {
        self.atoms.iter().map(|&(x, p, s)| s * p * self.q(y / x)).sum()
    }

    pub(crate) fn variance_rate(&self, a: f64) -> f64 {
        let al = self.alpha;
        let opts = QuadOptions::new(1e-300, 1e-11);
        let inner = integrate(|y| (y.powf(1.0 - al) - a.powf(-al) * y) * self.cdf(y), 0.0, a, opts).value;
        self.m_alpha * (a.powf(2.0 - al) / (2.0 - al) - 2.0 / al * inner)
    }

    pub(crate) fn signed_rate(&self, a: f64) -> f64 {
        if self.symmetric {
            return 0.0;
        }
        let al = self.alpha;
        let left = if al > 1.0 { 1.0 - al } else { -0.05 };
        let opts = QuadOptions::new(1e-300, 1e-11);
        let v = integrate_singular(
            |y, _, _| (y.powf(-al) - a.powf(-al)) / al * self.signed_cdf(y),
            0.0,
            a,
            left,
            0.0,
            opts,
        )
        .value;
        self.m_alpha * v
    }
}

/// Variance and signed rates tabulated in ln a over the likely range of Γ_n.
#[derive(Debug, Clone)]
struct TailTable {
    tail: TemperedTail,
    variance: Cheb,
    signed: Option<Cheb>,
}

impl TailTable {
    fn new(tail: TemperedTail, a_lo: f64, a_hi: f64) -> Result<Self> {
        let (lo, hi) = (a_lo.ln(), a_hi.ln());
        let variance = Cheb::fit(lo, hi, 32, |x| Ok(tail.variance_rate(x.exp())))?;
        let signed = if tail.symmetric { None } else { Some(Cheb::fit(lo, hi, 32, |x| Ok(tail.signed_rate(x.exp())))?) };
        Ok(Self { tail, variance, signed })
    }

    fn rates(&self, a: f64) -> (f64, f64) {
        let x = a.ln();
        if !self.variance.contains(x) {
            return (self.tail.variance_rate(a), self.tail.signed_rate(a));
        }
        (self.variance.eval(x), self.signed.as_ref().map_or(0.0, |c| c.eval(x)))
    }
}

/// Generates coupled paths on a fixed grid from drivers.
#[derive(Debug)]
pub struct SeriesSimulator {
    params: KernelParams,
    rho: InnerMeasure,
    consts: SeriesConstants,
    table: KernelTable,
    grid: Vec<f64>,
    tpow: Vec<f64>,
    /// ∫_0^t K(t,s) ds on the grid
    shape: Vec<f64>,
    n_terms: usize,
    tail: TailCorrection,
    /// m(ρ)(α/T)^{−1/α}
    scale: f64,
    /// Σ_{i ≤ n} a(i)
    centering: f64,
    tail_table: OnceLock<Result<TailTable>>,
    chol_levy: OnceLock<Result<DMatrix<f64>>>,
    chol_frac: OnceLock<Result<DMatrix<f64>>>,
}

impl SeriesSimulator {
    pub fn new(
        params: KernelParams,
        rho: InnerMeasure,
        horizon: f64,
        grid: Vec<f64>,
        n_terms: usize,
        tail: TailCorrection,
    ) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidParams("n_terms must be at least 1".into()));
        }
        let alpha = params.alpha();
        let consts = series_constants(&rho, alpha, horizon)?;
        check_grid(&grid, horizon)?;
        let d = params.excess();
        let levy = params.regime() == Regime::Levy;
        let tpow = grid.iter().map(|&t| if levy || t == 0.0 { 1.0 } else { t.powf(d) }).collect();
        let shape = grid.iter().map(|&t| params.kernel_primitive(t)).collect::<Result<Vec<f64>>>()?;
        let scale = consts.m_rho * (alpha / horizon).powf(-1.0 / alpha);
        let centering = scale * harmonic(n_terms, 1.0 / alpha);
        Ok(Self {
            table: KernelTable::new(params),
            params,
            rho,
            consts,
            grid,
            tpow,
            shape,
            n_terms,
            tail,
            scale,
            centering,
            tail_table: OnceLock::new(),
            chol_levy: OnceLock::new(),
            chol_frac: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn rho(&self) -> &InnerMeasure {
        &self.rho
    }

    pub fn consts(&self) -> &SeriesConstants {
        &self.consts
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn horizon(&self) -> f64 {
        self.consts.horizon
    }

    /// Driver for replication `rep` matching this simulator's horizon and truncation.
    pub fn driver(&self, seed: u64, rep: u64) -> Result<SeriesDriver> {
        make_driver_rep(seed, rep, self.horizon(), self.n_terms, &self.rho, self.params.alpha())
    }

    /// Dispatches on `kind`; `CoupledDiff` and `FbmApprox` need extra inputs and are rejected.
    pub fn simulate(&self, kind: ProcessKind, driver: &SeriesDriver) -> Result<Path> {
        match kind {
            ProcessKind::Ts => self.simulate_ts(driver),
            ProcessKind::Ftsm => self.simulate_ftsm(driver),
            ProcessKind::Fsm => self.simulate_fsm(driver),
            other => Err(Error::Unsupported(format!("{other} is not generated by SeriesSimulator::simulate"))),
        }
    }

    pub fn simulate_ts(&self, driver: &SeriesDriver) -> Result<Path> {
        self.check_driver(driver)?;
        let coef = self.tempered_jumps(driver, 1.0);
        let mut values = self.indicator_sum(&coef, &driver.times);
        let rate = self.consts.z_t - self.consts.k_prime * self.centering / self.horizon();
        for (v, &t) in values.iter_mut().zip(&self.grid) {
            *v += rate * t;
        }
        if self.tail == TailCorrection::Gaussian {
            let (mean_rate, var_rate) = self.tempered_remainder_rates(driver)?;
            self.add_remainder(&mut values, driver, mean_rate, var_rate, true)?;
        }
        Ok(self.path(values, ProcessKind::Ts, driver))
    }

    pub fn simulate_ftsm(&self, driver: &SeriesDriver) -> Result<Path> {
        self.check_driver(driver)?;
        let coef = self.tempered_jumps(driver, 1.0);
        let mut values = self.kernel_sum(&coef, &driver.times);
        let rate = self.consts.z_t - self.consts.k_prime * self.centering / self.horizon();
        for (v, &c) in values.iter_mut().zip(&self.shape) {
            *v += rate * c;
        }
        if self.tail == TailCorrection::Gaussian {
            let (mean_rate, var_rate) = self.tempered_remainder_rates(driver)?;
            self.add_remainder(&mut values, driver, mean_rate, var_rate, false)?;
        }
        Ok(self.path(values, ProcessKind::Ftsm, driver))
    }

    pub fn simulate_fsm(&self, driver: &SeriesDriver) -> Result<Path> {
        self.check_driver(driver)?;
        let alpha = self.params.alpha();
        let symmetric = self.rho.is_symmetric();
        if is_alpha_one(alpha) && !symmetric {
            return Err(Error::InvalidMeasure("fractional stable motion with α = 1 needs a symmetric ρ".into()));
        }
        let coef: Vec<f64> = driver
            .gamma_arrivals
            .iter()
            .zip(&driver.v_marks)
            .map(|(&g, &v)| self.consts.arrival_scale(g) * v.signum())
            .collect();
        let mut values = self.kernel_sum(&coef, &driver.times);
        let kp = self.consts.k_prime;
        let t = self.horizon();
        if alpha > 1.0 && !symmetric {
            let rate = kp * (self.scale * riemann_zeta(1.0 / alpha)? - self.centering) / t;
            for (v, &c) in values.iter_mut().zip(&self.shape) {
                *v += rate * c;
            }
        }
        if self.tail == TailCorrection::Gaussian {
            let g_n = driver.gamma_arrivals[self.n_terms - 1];
            let s = 1.0 / alpha;
            let var_rate = self.scale * self.scale * g_n.powf(1.0 - 2.0 * s) / (2.0 * s - 1.0) / t;
            let mean_rate = if symmetric {
                0.0
            } else if alpha > 1.0 {
                kp * self.centering_gap(g_n) / t
            } else {
                kp * self.scale * g_n.powf(1.0 - s) / (s - 1.0) / t
            };
            self.add_remainder(&mut values, driver, mean_rate, var_rate, false)?;
        }
        Ok(self.path(values, ProcessKind::Fsm, driver))
    }

    /// Σ[(a(Γ_i) − h^{−1/α}E_iU_i^{1/α}|V_i|) ∨ 0]·sgn(V_i)·K(t,T_i) for symmetric ρ:
    /// the gap between the fSm series and the h-rescaled fTSm series.
    pub fn coupled_short_time_diff(&self, driver: &SeriesDriver, h: f64) -> Result<Path> {
        self.check_driver(driver)?;
        if !self.rho.is_symmetric() {
            return Err(Error::Unsupported("the coupled short-time difference is implemented for symmetric ρ only".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParams(format!("h = {h} must be positive")));
        }
        let zoom = h.powf(-1.0 / self.params.alpha());
        let coef: Vec<f64> = (0..self.n_terms)
            .map(|i| {
                let a = self.consts.arrival_scale(driver.gamma_arrivals[i]);
                let z = driver.exp_marks[i] * driver.unif_marks[i].powf(1.0 / self.params.alpha()) * driver.v_marks[i].abs();
                (a - zoom * z).max(0.0) * driver.v_marks[i].signum()
            })
            .collect();
        let values = self.kernel_sum(&coef, &driver.times);
        Ok(self.path(values, ProcessKind::CoupledDiff, driver))
    }

    fn check_driver(&self, driver: &SeriesDriver) -> Result<()> {
        if driver.n_terms != self.n_terms || driver.horizon != self.horizon() || driver.alpha != self.params.alpha() {
            return Err(Error::InvalidParams(format!(
                "driver (n = {}, T = {}, α = {}) does not match the simulator (n = {}, T = {}, α = {})",
                driver.n_terms,
                driver.horizon,
                driver.alpha,
                self.n_terms,
                self.horizon(),
                self.params.alpha()
            )));
        }
        Ok(())
    }

    /// (a(Γ_i) ∧ E_iU_i^{1/α}|V_i|)·sgn(V_i), with the marks scaled by `zoom`.
    fn tempered_jumps(&self, driver: &SeriesDriver, zoom: f64) -> Vec<f64> {
        let inv = 1.0 / self.params.alpha();
        (0..self.n_terms)
            .map(|i| {
                let a = self.consts.arrival_scale(driver.gamma_arrivals[i]);
                let z = zoom * driver.exp_marks[i] * driver.unif_marks[i].powf(inv) * driver.v_marks[i].abs();
                a.min(z) * driver.v_marks[i].signum()
            })
            .collect()
    }

    fn indicator_sum(&self, coef: &[f64], times: &[f64]) -> Vec<f64> {
        self.grid
            .iter()
            .map(|&t| {
                let terms: Vec<f64> = coef.iter().zip(times).map(|(&c, &s)| if s <= t { c } else { 0.0 }).collect();
                crate::stats::pairwise_sum(&terms)
            })
            .collect()
    }

    fn kernel_sum(&self, coef: &[f64], times: &[f64]) -> Vec<f64> {
        self.grid
            .iter()
            .zip(&self.tpow)
            .map(|(&t, &tp)| {
                if t == 0.0 {
                    return 0.0;
                }
                let terms: Vec<f64> = coef.iter().zip(times).map(|(&c, &s)| c * self.table.kernel(tp, t, s)).collect();
                crate::stats::pairwise_sum(&terms)
            })
            .collect()
    }

    /// D_n = ∫_{Γ_n}^∞ a(r) dr − Σ_{i>n} a(i), read through ζ when both diverge:
    /// the expected discarded clip levels net of their centering, per unit k′.
    fn centering_gap(&self, g_n: f64) -> f64 {
        let alpha = self.params.alpha();
        let n = self.n_terms;
        if is_alpha_one(alpha) {
            return self.scale * (harmonic(n, 1.0) - EULER_GAMMA - g_n.ln());
        }
        let s = 1.0 / alpha;
        let zeta = riemann_zeta(s).unwrap_or(f64::NAN);
        self.centering - self.scale * (zeta + g_n.powf(1.0 - s) / (1.0 - s))
    }

    /// Mean and variance per unit time of the discarded TS terms given Γ_n.
    fn tempered_remainder_rates(&self, driver: &SeriesDriver) -> Result<(f64, f64)> {
        let g_n = driver.gamma_arrivals[self.n_terms - 1];
        let a = self.consts.arrival_scale(g_n);
        let table = self
            .tail_table
            .get_or_init(|| {
                let n = self.n_terms as f64;
                let spread = 10.0 * n.sqrt() + 10.0;
                let g_lo = (n - spread).max(1e-3 * n);
                let g_hi = n + spread;
                let tail = TemperedTail::new(&self.rho, self.params.alpha())?;
                TailTable::new(tail, self.consts.arrival_scale(g_hi), self.consts.arrival_scale(g_lo))
            })
            .as_ref()
            .map_err(Clone::clone)?;
        let (var_rate, signed_rate) = table.rates(a);
        let mean_rate = self.consts.k_prime * self.centering_gap(g_n) / self.horizon() - signed_rate;
        Ok((mean_rate, var_rate.max(0.0)))
    }

    fn add_remainder(
        &self,
        values: &mut [f64],
        driver: &SeriesDriver,
        mean_rate: f64,
        var_rate: f64,
        indicator: bool,
    ) -> Result<()> {
        let start = self.grid.partition_point(|&t| t <= 0.0);
        let points = &self.grid[start..];
        if points.is_empty() {
            return Ok(());
        }
        let brownian = indicator || self.params.regime() == Regime::Levy;
        let chol = if brownian {
            self.chol_levy.get_or_init(|| cholesky(points, f64::min))
        } else {
            self.chol_frac.get_or_init(|| cholesky(points, |t, s| self.params.fbm_covariance(t, s)))
        }
        .as_ref()
        .map_err(Clone::clone)?;
        let mut rng = stream_rng(driver.seed, driver.rep, Stream::Remainder);
        let z = DVector::from_fn(points.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let noise = chol * z;
        let sd = var_rate.sqrt();
        for (k, v) in values[start..].iter_mut().enumerate() {
            let shape = if indicator { points[k] } else { self.shape[start + k] };
            *v += mean_rate * shape + sd * noise[k];
        }
        Ok(())
    }

    fn path(&self, values: Vec<f64>, kind: ProcessKind, driver: &SeriesDriver) -> Path {
        let t_max = *self.grid.last().expect("grid is non-empty");
        let a_n = self.scale * (self.n_terms as f64).powf(-1.0 / self.params.alpha());
        let rms = if self.params.regime() == Regime::Levy || t_max == 0.0 { 1.0 } else { t_max.powf(self.params.excess()) };
        Path {
            grid: self.grid.clone(),
            values,
            kind,
            provenance: Provenance {
                seed: driver.seed,
                rep: driver.rep,
                hurst: self.params.hurst(),
                alpha: self.params.alpha(),
                horizon: self.horizon(),
                n_terms: self.n_terms,
                tail: if kind == ProcessKind::CoupledDiff { TailCorrection::None } else { self.tail },
                rho: self.rho.to_string(),
            },
            unbounded_regime: kind != ProcessKind::Ts && self.params.regime() == Regime::Rough,
            tail_bound: a_n * rms,
        }
    }
}

/// (2αN/((2+α)T))^{−1/2} Σ_{i ≤ N} E_iU_i^{1/α}ε_iK(t,T_i) with Rademacher ε_i and
/// T_i uniform on [0,T]; its covariance tends to that of fBm with index G.
#[derive(Debug)]
pub struct FbmApprox {
    params: KernelParams,
    table: KernelTable,
    grid: Vec<f64>,
    tpow: Vec<f64>,
    horizon: f64,
    n_terms: usize,
}

impl FbmApprox {
    /// The horizon is the last grid point.
    pub fn new(params: KernelParams, n_terms: usize, grid: Vec<f64>) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        let horizon = *grid.last().ok_or_else(|| Error::InvalidParams("time grid is empty".into()))?;
        if !(horizon > 0.0) {
            return Err(Error::InvalidParams("the grid must reach a positive time".into()));
        }
        check_grid(&grid, horizon)?;
        let levy = params.regime() == Regime::Levy;
        let tpow = grid.iter().map(|&t| if levy || t == 0.0 { 1.0 } else { t.powf(params.excess()) }).collect();
        Ok(Self { table: KernelTable::new(params), params, grid, tpow, horizon, n_terms })
    }

    /// Scale h = 2αN/((2+α)T) of the normalization.
    pub fn norm_scale(&self) -> f64 {
        let a = self.params.alpha();
        2.0 * a * self.n_terms as f64 / ((2.0 + a) * self.horizon)
    }

    pub fn simulate(&self, seed: u64, rep: u64) -> Path {
        let inv = 1.0 / self.params.alpha();
        let mut e = stream_rng(seed, rep, Stream::Exp);
        let mut u = stream_rng(seed, rep, Stream::Unif);
        let mut sg = stream_rng(seed, rep, Stream::Sign);
        let mut tt = stream_rng(seed, rep, Stream::Times);
        let norm = self.norm_scale().powf(-0.5);
        let (coef, times): (Vec<f64>, Vec<f64>) = (0..self.n_terms)
            .map(|_| {
                let ex: f64 = e.sample(Exp1);
                let un = 1.0 - u.random::<f64>();
                let eps = if sg.random::<bool>() { 1.0 } else { -1.0 };
                (norm * ex * un.powf(inv) * eps, self.horizon * tt.random::<f64>())
            })
            .unzip();
        let values = self
            .grid
            .iter()
            .zip(&self.tpow)
            .map(|(&t, &tp)| {
                if t == 0.0 {
                    return 0.0;
                }
                let terms: Vec<f64> = coef.iter().zip(&times).map(|(&c, &s)| c * self.table.kernel(tp, t, s)).collect();
                crate::stats::pairwise_sum(&terms)
            })
            .collect();
        Path {
            grid: self.grid.clone(),
            values,
            kind: ProcessKind::FbmApprox,
            provenance: Provenance {
                seed,
                rep,
                hurst: self.params.hurst(),
                alpha: self.params.alpha(),
                horizon: self.horizon,
                n_terms: self.n_terms,
                tail: TailCorrection::None,
                rho: "rademacher".into(),
            },
            unbounded_regime: self.params.regime() == Regime::Rough,
            tail_bound: 0.0,
        }
    }
}

/// Convenience wrapper: one fBm-approximation path for replication 0.
pub fn simulate_fbm_approx(seed: u64, params: KernelParams, n_terms: usize, grid: Vec<f64>) -> Result<Path> {
    Ok(FbmApprox::new(params, n_terms, grid)?.simulate(seed, 0))
}
