//! Numerical quadrature: global adaptive Gauss–Kronrod (21 points), endpoint
//! power substitutions, and fixed Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_715_617_838_405,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn gk21<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = V::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integral and error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub abs_err: f64,
}

/// Global adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Returns the best estimate even when the tolerance is not met within
/// `max_intervals`; callers inspect `abs_err` when it matters.
pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Estimate<V> {
    if a == b {
        return Estimate { value: V::zero(), abs_err: 0.0 };
    }
    let (v, e) = gk21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, err: e });
    let mut total = v;
    let mut total_err = e;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.norm()) && heap.len() < opts.max_intervals {
        let worst = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, m);
        let (v2, e2) = gk21(&mut f, m, worst.b);
        total = total - worst.value + v1 + v2;
        total_err = total_err - worst.err + e1 + e2;
        heap.push(Segment { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Segment { a: m, b: worst.b, value: v2, err: e2 });
    }
    // re-sum to shed accumulated rounding from the running updates
    let mut value = V::zero();
    let mut err = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        err += s.err;
    }
    Estimate { value, abs_err: err }
}

/// Like [`integrate`] but fails when the requested tolerance is not met.
pub fn integrate_checked<V: QuadValue, F: FnMut(f64) -> V>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<V> {
    let est = integrate(f, a, b, opts);
    let target = opts.abs_tol.max(opts.rel_tol * est.value.norm());
    if est.abs_err > 10.0 * target {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] stalled at error {:.3e} (target {:.3e})",
            est.abs_err, target
        )));
    }
    Ok(est.value)
}

/// Integrates `f` over `[a, b]` when `f` behaves like `(x−a)^left_exp` near `a`
/// and `(b−x)^right_exp` near `b`. Negative exponents (> −1) are removed by
/// the substitution x − a = L·y^q with q = 1/(1+exp), applied on each half.
///
/// `f` receives `(x, x − a, b − x)`; the distance to the nearer endpoint is
/// exact rather than recomputed from `x`.
pub fn integrate_singular<V: QuadValue, F: FnMut(f64, f64, f64) -> V>(
    mut f: F,
    a: f64,
    b: f64,
    left_exp: f64,
    right_exp: f64,
    opts: QuadOptions,
) -> Estimate<V> {
    let half = 0.5 * (b - a);
    let left = power_side(|off| f(a + off, off, b - (a + off)), half, left_exp, opts);
    let right = power_side(|off| f(b - off, (b - off) - a, off), half, right_exp, opts);
    Estimate { value: left.value + right.value, abs_err: left.abs_err + right.abs_err }
}

/// ∫_0^len g(off) d(off) with the power substitution off = len·y^q.
fn power_side<V: QuadValue, G: FnMut(f64) -> V>(mut g: G, len: f64, exp: f64, opts: QuadOptions) -> Estimate<V> {
    let q = if exp < 0.0 { 1.0 / (1.0 + exp) } else { 1.0 };
    integrate(
        |y| {
            let yq1 = if q == 1.0 { 1.0 } else { y.powf(q - 1.0) };
            let off = len * y * yq1;
            if off <= 0.0 {
                return V::zero();
            }
            g(off) * (len * q * yq1)
        },
        0.0,
        1.0,
        opts,
    )
}

/// Fixed Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(&self, mut f: F, a: f64, b: f64) -> V {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = V::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + h * x) * *w;
        }
        acc * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
