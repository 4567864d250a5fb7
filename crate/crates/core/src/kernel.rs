//! The Volterra kernel K_{H,α}(t,s), its constants, and a fast tabulated form.
//!
//! With d = H − 1/α and v = s/t the kernel factors as K(t,s) = t^d K(1,v).
//! Substituting u = s/x in the defining integrals gives
//!
//! * d > 0: K(1,v) = c d v^d ∫_v^1 x^{−1−2d}(1−x)^{d−1} dx
//! * d < 0: K(1,v) = c [v^{−d}(1−v)^d − d v^d ∫_v^1 x^{−1−2d}(1−x)^d dx]
//!
//! and in both regimes ∂_t K(t,s) = c d (t−s)^{d−1} (t/s)^d.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_checked, integrate_singular, QuadOptions};
use crate::special::gamma_real;

/// Below this |G − ½| the kernel is taken to be the indicator of [0,t].
pub const LEVY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    LongMemory,
    Levy,
    Rough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    hurst: f64,
    alpha: f64,
    regime: Regime,
    d: f64,
    c: f64,
}

/// Kernel value; the exact kernel diverges at s = 0 (H ≠ 1/α) and at s = t (H < 1/α).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    Infinite,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, KernelValue::Infinite)
    }
}

fn beta_opts() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 2e-15, max_intervals: 400 }
}

impl KernelParams {
    pub fn new(hurst: f64, alpha: f64) -> Result<Self> {
        crate::measure::check_alpha(alpha)?;
        if !hurst.is_finite() {
            return Err(Error::InvalidParams(format!("H = {hurst} is not finite")));
        }
        let d = hurst - 1.0 / alpha;
        if !(d > -0.5 && d < 0.5) {
            return Err(Error::InvalidParams(format!(
                "H = {hurst} outside (1/α−1/2, 1/α+1/2) = ({:.6}, {:.6})",
                1.0 / alpha - 0.5,
                1.0 / alpha + 0.5
            )));
        }
        let regime = if d.abs() < LEVY_TOL {
            Regime::Levy
        } else if d > 0.0 {
            Regime::LongMemory
        } else {
            Regime::Rough
        };
        let c = if regime == Regime::Levy { 1.0 } else { c_norm_raw(d + 0.5)? };
        Ok(Self { hurst, alpha, regime, d, c })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// d = H − 1/α (zero in the Lévy regime).
    pub fn excess(&self) -> f64 {
        if self.regime == Regime::Levy {
            0.0
        } else {
            self.d
        }
    }

    /// G = H − 1/α + ½.
    pub fn g_exponent(&self) -> f64 {
        self.excess() + 0.5
    }

    /// c_{H,α}; undefined in the Lévy regime where the kernel is an indicator.
    pub fn c_norm(&self) -> Result<f64> {
        if self.regime == Regime::Levy {
            return Err(Error::Regime("c_{H,α} is bypassed at H = 1/α; the kernel is the indicator".into()));
        }
        Ok(self.c)
    }

    /// K(t,·) ∈ L^p([0,t]) iff 1/α − 1/p < H < 1/α + 1/p.
    pub fn lp_integrable(&self, p: f64) -> bool {
        p > 0.0 && self.excess().abs() < 1.0 / p
    }

    /// K(1,v) for v ∈ (0,1), by quadrature of the unit-interval forms.
    pub fn unit_profile(&self, v: f64) -> f64 {
        self.unit_profile_split(v, 1.0 - v)
    }

    /// K(1,v) given both v and w = 1 − v; pass an exact w when v is close to 1.
    pub fn unit_profile_split(&self, v: f64, w: f64) -> f64 {
        let d = self.d;
        match self.regime {
            Regime::Levy => 1.0,
            Regime::LongMemory => self.c * d * v.powf(d) * beta_tail(v, w, -1.0 - 2.0 * d, d - 1.0),
            Regime::Rough => {
                let head = v.powf(-d) * w.powf(d);
                self.c * (head - d * v.powf(d) * beta_tail(v, w, -1.0 - 2.0 * d, d))
            }
        }
    }

    /// K_{H,α}(t,s).
    pub fn kernel_eval(&self, t: f64, s: f64) -> Result<KernelValue> {
        if !(t > 0.0) || !t.is_finite() || !s.is_finite() {
            return Err(Error::Domain(format!("kernel needs t > 0 and finite s, got t = {t}, s = {s}")));
        }
        if s < 0.0 || s > t {
            return Ok(KernelValue::Finite(0.0));
        }
        let v = s / t;
        Ok(match self.regime {
            Regime::Levy => KernelValue::Finite(1.0),
            Regime::LongMemory if s == 0.0 => KernelValue::Infinite,
            Regime::LongMemory if v >= 1.0 => KernelValue::Finite(0.0),
            Regime::Rough if s == 0.0 || v >= 1.0 => KernelValue::Infinite,
            _ => KernelValue::Finite(t.powf(self.d) * self.unit_profile_split(v, (t - s) / t)),
        })
    }

    /// ∂_t K(t,s) for 0 < s < t.
    pub fn kernel_time_derivative(&self, t: f64, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < t) {
            return Err(Error::Domain(format!("time derivative needs 0 < s < t, got t = {t}, s = {s}")));
        }
        if self.regime == Regime::Levy {
            return Ok(0.0);
        }
        let d = self.d;
        Ok(self.c * d * (t - s).powf(d - 1.0) * (t / s).powf(d))
    }

    /// K(t2,s) − K(t1,s) for 0 < s < t2 and t1 < t2, computed without
    /// subtracting two kernel values when s < t1.
    pub fn kernel_increment(&self, t1: f64, t2: f64, s: f64) -> Result<f64> {
        if !(t1 < t2 && s > 0.0 && s < t2) {
            return Err(Error::Domain(format!("increment needs t1 < t2, 0 < s < t2; got {t1}, {t2}, {s}")));
        }
        if self.regime == Regime::Levy {
            return Ok(if s > t1 { 1.0 } else { 0.0 });
        }
        if s >= t1 {
            return self
                .kernel_eval(t2, s)?
                .finite()
                .ok_or_else(|| Error::Numerical("kernel increment hit a divergence".into()));
        }
        // y = (u − s)^d turns c d s^{−d} ∫ (u−s)^{d−1} u^d du into c s^{−d} ∫ (y^{1/d} + s)^d dy
        let d = self.d;
        let y1 = (t1 - s).powf(d);
        let y2 = (t2 - s).powf(d);
        let inv = 1.0 / d;
        let val = integrate_checked(|y: f64| (y.powf(inv) + s).powf(d), y1, y2, QuadOptions::new(0.0, 1e-13))?;
        Ok(self.c * s.powf(-d) * val)
    }

    /// C_{H,α,p} = ∫_0^1 K(1,v)^p dv.
    pub fn kernel_lp_const(&self, p: f64) -> Result<f64> {
        if !self.lp_integrable(p) {
            return Err(Error::Domain(format!(
                "K(t,·) is not in L^{p} for H = {}, α = {}",
                self.hurst, self.alpha
            )));
        }
        if self.regime == Regime::Levy {
            return Ok(1.0);
        }
        let pd = p * self.d;
        let (left, right) = if self.d > 0.0 { (-pd, pd) } else { (pd, pd) };
        let est = integrate_singular(
            |v: f64, _, w: f64| self.unit_profile_split(v, w).powf(p),
            0.0,
            1.0,
            left,
            right,
            QuadOptions::new(1e-14, 1e-12),
        );
        Ok(est.value)
    }

    /// k_t = ∫_0^t K(t,s) ds = C_{H,α,1} t^{d+1}.
    pub fn kernel_primitive(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("primitive needs t ≥ 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(self.kernel_lp_const(1.0)? * t.powf(self.excess() + 1.0))
    }

    /// ∫_0^{t∧s} K(t,u)K(s,u) du by quadrature.
    pub fn inner_product(&self, t: f64, s: f64) -> Result<f64> {
        if !(t > 0.0 && s > 0.0) {
            return Err(Error::Domain(format!("inner product needs t, s > 0, got {t}, {s}")));
        }
        if self.regime == Regime::Levy {
            return Ok(t.min(s));
        }
        let m = t.min(s);
        let d = self.d;
        let left = -2.0 * d.abs();
        let right = match self.regime {
            Regime::Rough if t == s => 2.0 * d,
            Regime::Rough => d,
            _ => 0.0,
        };
        let (td, sd) = (t.powf(d), s.powf(d));
        let est = integrate_singular(
            |u: f64, _, rest: f64| {
                // rest = m − u exactly; t − u and s − u follow without cancellation
                let kt = self.unit_profile_split(u / t, ((t - m) + rest) / t);
                let ks = self.unit_profile_split(u / s, ((s - m) + rest) / s);
                td * kt * sd * ks
            },
            0.0,
            m,
            left,
            right,
            QuadOptions::new(1e-13, 1e-11),
        );
        Ok(est.value)
    }

    /// Closed form ½(t^{2G} + s^{2G} − |t−s|^{2G}).
    pub fn fbm_covariance(&self, t: f64, s: f64) -> f64 {
        let g2 = 2.0 * self.g_exponent();
        0.5 * (t.abs().powf(g2) + s.abs().powf(g2) - (t - s).abs().powf(g2))
    }

    /// Regularized kernel K^{n,ε}(t,s) = K^n(t,s) + ε with its time derivative.
    pub fn regularized_kernel(&self, n: u32, eps: f64, t: f64, s: f64) -> Result<(f64, f64)> {
        if self.regime != Regime::LongMemory {
            return Err(Error::Regime("regularized kernel requires H > 1/α".into()));
        }
        if n == 0 || eps < 0.0 {
            return Err(Error::Domain(format!("regularized kernel needs n ≥ 1 and ε ≥ 0, got {n}, {eps}")));
        }
        if !(s > 0.0 && s <= t) {
            return Err(Error::Domain(format!("regularized kernel needs 0 < s ≤ t, got t = {t}, s = {s}")));
        }
        let d = self.d;
        let shift = 1.0 / n as f64;
        let int = integrate_checked(
            |u: f64| (u + shift - s).powf(d - 1.0) * u.powf(d),
            s,
            t,
            QuadOptions::new(0.0, 1e-13),
        )?;
        let value = self.c * d * s.powf(-d) * int + eps;
        let deriv = self.c * d * (t + shift - s).powf(d - 1.0) * (t / s).powf(d);
        Ok((value, deriv))
    }
}

fn c_norm_raw(g: f64) -> Result<f64> {
    let num = g * (1.0 - 2.0 * g) * gamma_real(0.5 - g)?;
    let den = gamma_real(2.0 - 2.0 * g)? * gamma_real(g + 0.5)?;
    let r = num / den;
    if !(r > 0.0) {
        return Err(Error::Numerical(format!("c_{{H,α}} radicand {r} is not positive")));
    }
    Ok(r.sqrt())
}

/// ∫_v^1 x^a (1−x)^b dx for v ∈ (0,1), w = 1 − v, b > −1.
fn beta_tail(v: f64, w: f64, a: f64, b: f64) -> f64 {
    let top = if v >= 0.5 { w } else { 0.5 };
    // upper piece: y = (1−x)^{b+1} removes the endpoint singularity
    let bp = b + 1.0;
    let inv = 1.0 / bp;
    let upper = integrate(|y: f64| (1.0 - y.powf(inv)).powf(a), 0.0, top.powf(bp), beta_opts()).value / bp;
    if v >= 0.5 {
        return upper;
    }
    // lower piece in log scale: x = e^z
    let lower = integrate(|z: f64| ((a + 1.0) * z + b * (-z.exp()).ln_1p()).exp(), v.ln(), 0.5f64.ln(), beta_opts()).value;
    upper + lower
}

const CHEB_DEG: usize = 20;
const PANELS: usize = 48;

/// Piecewise Chebyshev approximation of K(1,·) on dyadic panels refined
/// towards both endpoints; ~1e−12 relative accuracy.
#[derive(Debug, Clone)]
pub struct KernelTable {
    params: KernelParams,
    left: Vec<[f64; CHEB_DEG + 1]>,
    right: Vec<[f64; CHEB_DEG + 1]>,
}

impl KernelTable {
    pub fn new(params: KernelParams) -> Self {
        if params.regime == Regime::Levy {
            return Self { params, left: Vec::new(), right: Vec::new() };
        }
        let n = CHEB_DEG + 1;
        let thetas: Vec<f64> = (0..n).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n as f64).collect();
        let fit = |f: &dyn Fn(f64) -> f64| -> [f64; CHEB_DEG + 1] {
            let vals: Vec<f64> = thetas.iter().map(|th| f(th.cos())).collect();
            let mut c = [0.0; CHEB_DEG + 1];
            for (k, ck) in c.iter_mut().enumerate() {
                let s: f64 = vals.iter().zip(&thetas).map(|(v, th)| v * (k as f64 * th).cos()).sum();
                *ck = 2.0 * s / n as f64;
            }
            c[0] *= 0.5;
            c
        };
        let mut left = Vec::with_capacity(PANELS);
        let mut right = Vec::with_capacity(PANELS);
        for k in 1..=PANELS {
            let lo = 2f64.powi(-(k as i32) - 1);
            left.push(fit(&|xi: f64| params.unit_profile(lo * (1.5 + 0.5 * xi))));
            right.push(fit(&|xi: f64| {
                let w = lo * (1.5 + 0.5 * xi);
                params.unit_profile_split(1.0 - w, w)
            }));
        }
        Self { params, left, right }
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// K(1,v) for v ∈ (0,1).
    #[inline]
    pub fn unit(&self, v: f64) -> f64 {
        self.unit_split(v, 1.0 - v)
    }

    /// K(1,v) with w = 1 − v supplied by the caller.
    #[inline]
    pub fn unit_split(&self, v: f64, w: f64) -> f64 {
        if self.params.regime == Regime::Levy {
            return 1.0;
        }
        if v < 0.5 {
            return match panel(v) {
                Some((k, xi)) => clenshaw(&self.left[k], xi),
                None if v > 0.0 => self.params.unit_profile_split(v, w),
                None => self.params.unit_profile_split(f64::MIN_POSITIVE, 1.0),
            };
        }
        match panel(w) {
            Some((k, xi)) => clenshaw(&self.right[k], xi),
            None if w > 0.0 => self.params.unit_profile_split(v, w),
            None => match self.params.regime {
                Regime::LongMemory => 0.0,
                _ => self.params.unit_profile_split(1.0, f64::MIN_POSITIVE),
            },
        }
    }

    /// K(t,s) given t^d precomputed; zero when s ∉ [0,t]. Divergent points
    /// (s = 0, or s = t in the rough regime) are replaced by the value at the
    /// nearest representable interior point.
    #[inline]
    pub fn kernel(&self, t_pow_d: f64, t: f64, s: f64) -> f64 {
        if s > t || s < 0.0 {
            return 0.0;
        }
        if self.params.regime == Regime::Levy {
            return 1.0;
        }
        t_pow_d * self.unit_split(s / t, (t - s) / t)
    }
}

/// Panel index and local coordinate in [−1,1) for x ∈ [2^{−PANELS−1}, ½).
#[inline]
fn panel(x: f64) -> Option<(usize, f64)> {
    let bits = x.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let k = -e - 1;
    if k < 1 || k > PANELS as i64 {
        return None;
    }
    let mant = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1023u64 << 52));
    Some(((k - 1) as usize, 2.0 * mant - 3.0))
}

#[inline]
fn clenshaw(c: &[f64; CHEB_DEG + 1], x: f64) -> f64 {
    let x2 = 2.0 * x;
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c[1..].iter().rev() {
        let b0 = ck + x2 * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}
