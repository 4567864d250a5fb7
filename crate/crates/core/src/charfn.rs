//! Exponent functions, marginal characteristic functions, codifference and
//! covariation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelParams, Regime};
use crate::measure::{check_alpha, is_alpha_one, InnerMeasure};
use crate::quad::{integrate, integrate_singular, QuadOptions};
use crate::special::{gamma_real, principal_power_one_minus_is};

const I: Complex64 = Complex64::new(0.0, 1.0);
const SERIES_CUTOFF: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    /// Lévy exponent of TS(α,ρ;0) per unit atom.
    Phi,
    /// Exponent without the compensating linear term for α ≤ 1.
    Psi,
    /// Stable exponent of the associated α-stable process.
    Varphi,
    /// Varphi with the α = 1 drift dropped (symmetric ρ).
    VarphiTilde,
    /// ∫_0^∞ (e^{ius} − 1 − ius) s^{−α−1} e^{−s} ds by quadrature.
    Vartheta,
}

/// Exponent value at s for stability index α.
pub fn exponent(kind: ExponentKind, s: f64, alpha: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !s.is_finite() {
        return Err(Error::Domain(format!("exponent argument {s} is not finite")));
    }
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one = is_alpha_one(alpha);
    Ok(match kind {
        ExponentKind::Phi if one => phi_one(s),
        ExponentKind::Phi => gamma_real(-alpha)? * power_minus_linear(s, alpha),
        ExponentKind::Psi if one => Complex64::new(0.5 * s.mul_add(s, 1.0).ln() - s * s.atan(), 0.0),
        ExponentKind::Psi if alpha < 1.0 => gamma_real(-alpha)? * (principal_power_one_minus_is(s, alpha) - 1.0),
        ExponentKind::Psi => gamma_real(-alpha)? * power_minus_linear(s, alpha),
        ExponentKind::Varphi if one => {
            let a = s.abs();
            Complex64::new(-std::f64::consts::FRAC_PI_2 * a, -s * a.ln() + s)
        }
        ExponentKind::VarphiTilde if one => Complex64::new(-std::f64::consts::FRAC_PI_2 * s.abs(), 0.0),
        ExponentKind::Varphi | ExponentKind::VarphiTilde => stable_exponent(s, alpha)?,
        ExponentKind::Vartheta => vartheta(s, alpha),
    })
}

/// Γ(−α)(−is)^α, the exponent of the α-stable limit for α ≠ 1.
fn stable_exponent(s: f64, alpha: f64) -> Result<Complex64> {
    let half = std::f64::consts::FRAC_PI_2 * alpha;
    let scale = gamma_real(-alpha)? * s.abs().powf(alpha);
    Ok(Complex64::new(scale * half.cos(), -s.signum() * scale * half.sin()))
}

/// (1−is)^α − 1 + iαs, with a binomial series for small |s|.
fn power_minus_linear(s: f64, alpha: f64) -> Complex64 {
    if s.abs() < SERIES_CUTOFF {
        let z = Complex64::new(0.0, -s);
        let mut coef = alpha * (alpha - 1.0) / 2.0;
        let mut zk = z * z;
        let mut acc = zk * coef;
        for k in 3..60 {
            coef *= (alpha - (k - 1) as f64) / k as f64;
            zk *= z;
            let term = zk * coef;
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        return acc;
    }
    principal_power_one_minus_is(s, alpha) - 1.0 + I * (alpha * s)
}

/// (1−is)ln(1−is) + is.
fn phi_one(s: f64) -> Complex64 {
    let z = Complex64::new(0.0, -s);
    if s.abs() < SERIES_CUTOFF {
        // Σ_{k≥2} (−1)^k z^k / (k(k−1))
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zk = z;
        for k in 2..80 {
            zk *= z;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = zk * (sign / (k * (k - 1)) as f64);
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        return acc;
    }
    (1.0 + z) * (1.0 + z).ln() - z
}

/// e^{ix} − 1 − ix.
fn expm1_minus_linear(x: f64) -> Complex64 {
    if x.abs() < 0.5 {
        let ix = Complex64::new(0.0, x);
        let mut term = ix * ix * 0.5;
        let mut acc = term;
        for k in 3..40 {
            term = term * ix / k as f64;
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        return acc;
    }
    Complex64::new(x.cos() - 1.0, x.sin() - x)
}

fn vartheta(u: f64, alpha: f64) -> Complex64 {
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 4000 };
    let f = |s: f64| expm1_minus_linear(u * s) * (s.powf(-alpha - 1.0) * (-s).exp());
    // s = y^q on (0,1) flattens the s^{1−α} behaviour at the origin
    let q = (1.0 / (2.0 - alpha)).max(1.0);
    let head = integrate(
        |y: f64| {
            if y <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let yq1 = y.powf(q - 1.0);
            f(y * yq1) * (q * yq1)
        },
        0.0,
        1.0,
        opts,
    )
    .value;
    let tail = integrate(f, 1.0, 60.0, opts).value;
    head + tail
}

/// Σ_j w_j exponent(kind, y x_j, α).
fn measure_exponent(kind: ExponentKind, y: f64, rho: &InnerMeasure, alpha: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in rho.atoms() {
        acc += exponent(kind, y * a.x, alpha)? * a.w;
    }
    Ok(acc)
}

fn require_symmetric_at_one(rho: &InnerMeasure, alpha: f64) -> Result<()> {
    if is_alpha_one(alpha) && !rho.is_symmetric() {
        return Err(Error::Unsupported("α = 1 stable pathways require a symmetric ρ".into()));
    }
    Ok(())
}

/// Endpoint exponents for ∫_0^1 g(K(1,v)) dv with g growing at most quadratically.
fn profile_exponents(params: &KernelParams) -> (f64, f64) {
    let d = params.excess();
    match params.regime() {
        Regime::LongMemory => (-2.0 * d, 0.0),
        Regime::Rough => (2.0 * d, 2.0 * d),
        Regime::Levy => (0.0, 0.0),
    }
}

/// ∫_0^1 f(K(1,v)) dv with singularity-aware quadrature; `f` receives K(1,v).
fn integrate_over_profile<F: FnMut(f64) -> Complex64>(params: &KernelParams, mut f: F, opts: QuadOptions) -> Complex64 {
    if params.regime() == Regime::Levy {
        return f(1.0);
    }
    let (l, r) = profile_exponents(params);
    integrate_singular(
        |v: f64, _, w: f64| f(params.unit_profile_split(v, w)),
        0.0,
        1.0,
        l,
        r,
        opts,
    )
    .value
}

fn cf_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 2000 }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be ≥ 0, got {t}")))
    }
}

/// E[e^{iyX_t}] for the TS Lévy process.
pub fn cf_ts(y: f64, t: f64, rho: &InnerMeasure, alpha: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok((measure_exponent(ExponentKind::Phi, y, rho, alpha)? * t).exp())
}

/// Log of the fTSm marginal CF, Σ_j w_j ∫_0^t φ(y x_j K(t,s)) ds.
pub fn log_cf_ftsm(y: f64, t: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<Complex64> {
    check_time(t)?;
    let alpha = params.alpha();
    if y == 0.0 || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let td = t.powf(params.excess());
    let gamma = if is_alpha_one(alpha) { 0.0 } else { gamma_real(-alpha)? };
    let one = is_alpha_one(alpha);
    let integral = integrate_over_profile(
        params,
        |k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in rho.atoms() {
                let s = y * a.x * td * k;
                let e = if one { phi_one(s) } else { gamma * power_minus_linear(s, alpha) };
                acc += e * a.w;
            }
            acc
        },
        cf_opts(),
    );
    Ok(integral * t)
}

/// E[e^{iyL^H_t}] for fTSm.
pub fn cf_ftsm(y: f64, t: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<Complex64> {
    Ok(log_cf_ftsm(y, t, params, rho)?.exp())
}

/// E[e^{iyL^{H,α}_t}] for fSm: exp[C_{H,α,α} t^{αH} Σ w φ̃(yx)].
pub fn cf_fsm(y: f64, t: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<Complex64> {
    check_time(t)?;
    let alpha = params.alpha();
    require_symmetric_at_one(rho, alpha)?;
    let c_alpha = params.kernel_lp_const(alpha)?;
    let e = measure_exponent(ExponentKind::VarphiTilde, y, rho, alpha)?;
    Ok((e * (c_alpha * t.powf(alpha * params.hurst()))).exp())
}

/// Rescaled short-time CF exp[Σ_j w_j ∫_0^t h ψ(y x_j h^{−1/α} K(t,s)) ds].
pub fn cf_rescaled_short(y: f64, t: f64, params: &KernelParams, rho: &InnerMeasure, h: f64) -> Result<Complex64> {
    check_time(t)?;
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h must be positive, got {h}")));
    }
    let alpha = params.alpha();
    if y == 0.0 || t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let scale = y * h.powf(-1.0 / alpha) * t.powf(params.excess());
    let mut err = None;
    let integral = integrate_over_profile(
        params,
        |k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in rho.atoms() {
                match exponent(ExponentKind::Psi, scale * a.x * k, alpha) {
                    Ok(e) => acc += e * a.w,
                    Err(e) => err = Some(e),
                }
            }
            acc
        },
        cf_opts(),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok((integral * (h * t)).exp())
}

/// Rescaled long-time CF of h^{−G}L^H_h: exp[h Σ_j w_j ∫_0^1 ϑ(h^{−1/2} y x_j K(1,s)) ds].
pub fn cf_rescaled_long(y: f64, params: &KernelParams, rho: &InnerMeasure, h: f64) -> Result<Complex64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("h must be positive, got {h}")));
    }
    let alpha = params.alpha();
    check_alpha(alpha)?;
    if y == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let scale = y / h.sqrt();
    let integral = integrate_over_profile(
        params,
        |k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in rho.atoms() {
                acc += vartheta(scale * a.x * k, alpha) * a.w;
            }
            acc
        },
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-10, max_intervals: 2000 },
    );
    Ok((integral * h).exp())
}

/// Codifference of X = L_{t+1} − L_t and Y = L_1 − L_0.
pub fn codifference(theta1: f64, theta2: f64, t: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<Complex64> {
    let alpha = params.alpha();
    let gamma = if is_alpha_one(alpha) { 0.0 } else { gamma_real(-alpha)? };
    let one = is_alpha_one(alpha);
    codifference_with(theta1, theta2, t, params, rho, |s| if one { phi_one(s) } else { gamma * power_minus_linear(s, alpha) })
}

/// Codifference with an arbitrary exponent in place of φ_α.
pub fn codifference_with<F: Fn(f64) -> Complex64>(
    theta1: f64,
    theta2: f64,
    t: f64,
    params: &KernelParams,
    rho: &InnerMeasure,
    phi: F,
) -> Result<Complex64> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::Domain(format!("codifference needs t ≥ 1, got {t}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    if theta1 == 0.0 || theta2 == 0.0 || params.regime() == Regime::Levy {
        return Ok(zero);
    }
    // for s > 1 only the X increment is nonzero, so its contributions cancel
    let (l, r) = profile_exponents(params);
    let mut err = None;
    let est = integrate_singular(
        |s: f64, _, w: f64| {
            let dk = match params.kernel_increment(t, t + 1.0, s) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    return zero;
                }
            };
            let k1 = params.unit_profile_split(s, w);
            let (a, b) = (theta1 * dk, theta2 * k1);
            let mut acc = zero;
            for at in rho.atoms() {
                acc += (phi(at.x * a) + phi(at.x * b) - phi(at.x * (a + b))) * at.w;
            }
            acc
        },
        0.0,
        1.0,
        l,
        r,
        QuadOptions { abs_tol: 1e-16, rel_tol: 1e-10, max_intervals: 2000 },
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(est.value)
}

/// Large-t constant C(θ₁,θ₂) with codifference(θ₁,θ₂,t) ~ C t^{2(G−1)}:
/// C = −i c d π θ₁ / (Γ(α) sin πα) Σ_j w_j x_j ∫_0^1 ((1 − i x_j θ₂ K(1,s))^{α−1} − 1) s^{−d} ds.
pub fn codifference_asymptotic_constant(theta1: f64, theta2: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<Complex64> {
    let alpha = params.alpha();
    if is_alpha_one(alpha) {
        return Err(Error::Unsupported("codifference constant is not available at α = 1".into()));
    }
    let zero = Complex64::new(0.0, 0.0);
    if params.regime() == Regime::Levy || theta1 == 0.0 || theta2 == 0.0 {
        return Ok(zero);
    }
    let d = params.excess();
    let c = params.c_norm()?;
    let (l, _) = profile_exponents(params);
    let r = if params.regime() == Regime::Rough { d } else { 0.0 };
    let est = integrate_singular(
        |s: f64, _, w: f64| {
            let k = params.unit_profile_split(s, w);
            let mut acc = zero;
            for a in rho.atoms() {
                acc += (principal_power_one_minus_is(a.x * theta2 * k, alpha - 1.0) - 1.0) * (a.w * a.x);
            }
            acc * s.powf(-d)
        },
        0.0,
        1.0,
        l,
        r,
        QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_intervals: 2000 },
    );
    let pi = std::f64::consts::PI;
    let pref = -I * (c * d * pi * theta1 / (gamma_real(alpha)? * (pi * alpha).sin()));
    Ok(pref * est.value)
}

/// τ(L_t, L_s) = ‖L_t‖^α + ‖L_s‖^α − ‖L_t − L_s‖^α for symmetric fSm values, α ∈ (1,2).
pub fn covariation_tau(t: f64, s: f64, params: &KernelParams, rho: &InnerMeasure) -> Result<f64> {
    let alpha = params.alpha();
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Regime(format!("covariation needs α ∈ (1,2), got {alpha}")));
    }
    if !rho.is_symmetric() {
        return Err(Error::Regime("covariation needs a symmetric ρ".into()));
    }
    if !(0.0 <= s && s <= t) {
        return Err(Error::Domain(format!("covariation needs 0 ≤ s ≤ t, got t = {t}, s = {s}")));
    }
    let sigma = -gamma_real(-alpha)? * (std::f64::consts::FRAC_PI_2 * alpha).cos() * rho.abs_moment(alpha);
    let c = params.kernel_lp_const(alpha)?;
    let ah = alpha * params.hurst();
    Ok(sigma * c * (t.powf(ah) + s.powf(ah) - (t - s).powf(ah)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::ts_variance;
    use approx::assert_relative_eq;

    const KINDS: [ExponentKind; 5] = [
        ExponentKind::Phi,
        ExponentKind::Psi,
        ExponentKind::Varphi,
        ExponentKind::VarphiTilde,
        ExponentKind::Vartheta,
    ];

    #[test]
    fn exponents_vanish_at_zero() {
        for k in KINDS {
            for a in [0.5, 1.0, 1.6] {
                assert_eq!(exponent(k, 0.0, a).unwrap(), Complex64::new(0.0, 0.0));
            }
        }
        assert!(exponent(ExponentKind::Phi, 1.0, 2.0).is_err());
    }

    #[test]
    fn phi_symmetry_and_sign() {
        for s in [0.01, 0.2, 0.3, 1.0, 7.0, 40.0] {
            for a in [0.3, 1.0, 1.4] {
                let p = exponent(ExponentKind::Phi, s, a).unwrap();
                let m = exponent(ExponentKind::Phi, -s, a).unwrap();
                assert!(p.re <= 0.0);
                assert!((p - m.conj()).norm() < 1e-14 * (1.0 + p.norm()));
            }
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        for a in [0.4, 1.0, 1.6] {
            let below = exponent(ExponentKind::Phi, SERIES_CUTOFF * (1.0 - 1e-15), a).unwrap();
            let above = exponent(ExponentKind::Phi, SERIES_CUTOFF * (1.0 + 1e-15), a).unwrap();
            assert!((below - above).norm() < 1e-14, "α={a}: {below} vs {above}");
        }
    }

    #[test]
    fn vartheta_equals_phi() {
        for a in [0.4, 0.9, 1.0, 1.3, 1.6, 1.9] {
            for s in [0.5, 1.0, 3.0, -2.0, 1e-3] {
                let v = exponent(ExponentKind::Vartheta, s, a).unwrap();
                let p = exponent(ExponentKind::Phi, s, a).unwrap();
                assert!((v - p).norm() < 1e-9 * (1.0 + p.norm()), "α={a} s={s}: {v} vs {p}");
            }
        }
    }

    #[test]
    fn psi_equals_phi_above_one() {
        for s in [0.5, 1.0, 3.0] {
            let p = exponent(ExponentKind::Phi, s, 1.6).unwrap();
            let q = exponent(ExponentKind::Psi, s, 1.6).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn psi_closed_forms_below_one() {
        // ψ_α differs from φ_α by the linear compensator i α Γ(−α) s
        let (a, s) = (0.7, 2.0);
        let p = exponent(ExponentKind::Phi, s, a).unwrap();
        let q = exponent(ExponentKind::Psi, s, a).unwrap();
        let lin = I * (a * s * gamma_real(-a).unwrap());
        assert!((p - q - lin).norm() < 1e-13);
        let one = exponent(ExponentKind::Psi, 2.0, 1.0).unwrap();
        assert_relative_eq!(one.re, 0.5 * 5f64.ln() - 2.0 * 2f64.atan(), max_relative = 1e-14);
    }

    #[test]
    fn short_time_limit_of_psi() {
        // h ψ(h^{−1/α} s) → φ̃(s) as h → 0
        for a in [0.6, 1.5] {
            let s = 1.3;
            let target = exponent(ExponentKind::Varphi, s, a).unwrap();
            // the leading correction is O(h^{1−1/α}) for α > 1
            let h: f64 = 1e-18;
            let approx = exponent(ExponentKind::Psi, h.powf(-1.0 / a) * s, a).unwrap() * h;
            assert!((approx - target).norm() < 1e-3 * target.norm(), "α={a}: {approx} vs {target}");
        }
    }

    #[test]
    fn stable_exponent_has_nonpositive_real_part() {
        for a in [0.3, 0.8, 1.2, 1.9] {
            for s in [-3.0, 0.5, 2.0] {
                let v = exponent(ExponentKind::Varphi, s, a).unwrap();
                assert!(v.re < 0.0);
                let w = exponent(ExponentKind::Varphi, -s, a).unwrap();
                assert!((v - w.conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn ts_cf_properties() {
        let rho = InnerMeasure::rho2(1.6).unwrap();
        assert_eq!(cf_ts(0.0, 1.0, &rho, 1.6).unwrap(), Complex64::new(1.0, 0.0));
        for i in -50..=50 {
            let y = i as f64 / 10.0;
            assert!(cf_ts(y, 1.0, &rho, 1.6).unwrap().norm() <= 1.0 + 1e-12);
        }
        let e = 1e-3;
        let lc = |y: f64| measure_exponent(ExponentKind::Phi, y, &rho, 1.6).unwrap().re;
        let curv = -(lc(e) - 2.0 * lc(0.0) + lc(-e)) / (e * e);
        assert_relative_eq!(curv, ts_variance(&rho, 1.6).unwrap(), max_relative = 1e-4);
    }

    #[test]
    fn ftsm_cf_properties() {
        let rho = InnerMeasure::rho1();
        let levy = KernelParams::new(1.0 / 1.6, 1.6).unwrap();
        for y in [0.3, 1.0, 2.5] {
            let a = cf_ftsm(y, 1.3, &levy, &rho).unwrap();
            let b = cf_ts(y, 1.3, &rho, 1.6).unwrap();
            assert!((a - b).norm() < 1e-8);
        }
        let p = KernelParams::new(0.8, 1.6).unwrap();
        assert_eq!(cf_ftsm(0.0, 1.0, &p, &rho).unwrap(), Complex64::new(1.0, 0.0));
        let t = 1.7;
        let e = 1e-3;
        let lc = |y: f64| log_cf_ftsm(y, t, &p, &rho).unwrap().re;
        let curv = -(lc(e) - 2.0 * lc(0.0) + lc(-e)) / (e * e);
        let want = t.powf(2.0 * p.g_exponent()) * ts_variance(&rho, 1.6).unwrap();
        assert_relative_eq!(curv, want, max_relative = 1e-4);
    }

    #[test]
    fn fsm_cf_examples() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho1();
        assert_eq!(cf_fsm(0.0, 1.0, &p, &rho).unwrap(), Complex64::new(1.0, 0.0));
        let (y, t, h): (f64, f64, f64) = (0.7, 1.3, 2.5);
        let a = cf_fsm(h.powf(-0.8) * y, h * t, &p, &rho).unwrap();
        let b = cf_fsm(y, t, &p, &rho).unwrap();
        assert!((a - b).norm() < 1e-10);
        let v = cf_fsm(1.0, 1.0, &p, &rho).unwrap();
        let c = p.kernel_lp_const(1.6).unwrap();
        let want = (c * gamma_real(-1.6).unwrap() * (0.8 * std::f64::consts::PI).cos() * 2.0).exp();
        assert!(v.im.abs() < 1e-15 && v.re < 1.0);
        assert_relative_eq!(v.re, want, max_relative = 1e-12);
        let asym = InnerMeasure::new([(1.0, 1.0)]).unwrap();
        let p1 = KernelParams::new(1.2, 1.0).unwrap();
        assert!(cf_fsm(1.0, 1.0, &p1, &asym).is_err());
    }

    #[test]
    fn rescaled_short_at_unit_h_is_ftsm() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho1();
        let a = cf_rescaled_short(1.0, 1.0, &p, &rho, 1.0).unwrap();
        let b = cf_ftsm(1.0, 1.0, &p, &rho).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert_eq!(cf_rescaled_short(0.0, 1.0, &p, &rho, 0.1).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rescaled_long_at_unit_h_is_ftsm_at_one() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho2(1.6).unwrap();
        let a = cf_rescaled_long(0.8, &p, &rho, 1.0).unwrap();
        let b = cf_ftsm(0.8, 1.0, &p, &rho).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn codifference_gaussian_probe() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho1();
        let g2 = gamma_real(0.4).unwrap();
        let quad = |s: f64| Complex64::new(-g2 * s * s / 2.0, 0.0);
        for t in [1.0, 3.0, 20.0] {
            let (th1, th2) = (0.7, -1.3);
            let cd = codifference_with(th1, th2, t, &p, &rho, quad).unwrap();
            let g = 2.0 * p.g_exponent();
            let cov = 0.5 * ((t + 1.0).powf(g) - 2.0 * t.powf(g) + (t - 1.0).powf(g)) * ts_variance(&rho, 1.6).unwrap();
            assert_relative_eq!(cd.re, th1 * th2 * cov, max_relative = 1e-8);
        }
        assert_eq!(codifference(0.0, 1.0, 2.0, &p, &rho).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(codifference(1.0, 0.0, 2.0, &p, &rho).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn codifference_constant_linearity() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho2(1.6).unwrap();
        let a = codifference_asymptotic_constant(1.0, -0.7, &p, &rho).unwrap();
        let b = codifference_asymptotic_constant(2.0, -0.7, &p, &rho).unwrap();
        assert!((b - a * 2.0).norm() < 1e-12 * a.norm());
        assert_eq!(codifference_asymptotic_constant(1.0, 0.0, &p, &rho).unwrap(), Complex64::new(0.0, 0.0));
        let q = KernelParams::new(1.2, 1.0).unwrap();
        assert!(codifference_asymptotic_constant(1.0, 1.0, &q, &InnerMeasure::rho1()).is_err());
    }

    #[test]
    fn covariation_examples() {
        let p = KernelParams::new(0.8, 1.6).unwrap();
        let rho = InnerMeasure::rho1();
        assert_eq!(covariation_tau(1.0, 0.0, &p, &rho).unwrap(), 0.0);
        let full = covariation_tau(1.5, 1.5, &p, &rho).unwrap();
        let sigma = -gamma_real(-1.6).unwrap() * (0.8 * std::f64::consts::PI).cos() * 2.0;
        assert_relative_eq!(full, 2.0 * p.kernel_lp_const(1.6).unwrap() * 1.5f64.powf(1.28) * sigma, max_relative = 1e-12);
        let f = |t: f64, s: f64| t.powf(1.28) + s.powf(1.28) - (t - s).powf(1.28);
        let r = covariation_tau(2.0, 1.5, &p, &rho).unwrap() / covariation_tau(1.0, 0.5, &p, &rho).unwrap();
        assert_relative_eq!(r, f(2.0, 1.5) / f(1.0, 0.5), max_relative = 1e-8);
        assert!(covariation_tau(1.0, 0.5, &KernelParams::new(1.6, 0.7).unwrap(), &rho).is_err());
    }
}
