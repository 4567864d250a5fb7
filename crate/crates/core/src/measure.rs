//! Finite discrete inner measures and the scalar constants derived from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma_real, riemann_zeta, EULER_GAMMA};

/// Tolerance on weights when matching an atom with its mirror image.
const SYMMETRY_WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// Finite discrete measure on ℝ∖{0}. Atoms are kept sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerMeasure {
    atoms: Vec<Atom>,
    symmetric: bool,
}

impl InnerMeasure {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = atoms.into_iter().map(|(x, w)| Atom { x, w }).collect();
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("at least one atom is required".into()));
        }
        for a in &atoms {
            if !a.x.is_finite() || a.x == 0.0 {
                return Err(Error::InvalidMeasure(format!("atom location {} must be finite and nonzero", a.x)));
            }
            if !a.w.is_finite() || a.w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom weight {} must be finite and positive", a.w)));
            }
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        if atoms.windows(2).any(|p| p[0].x == p[1].x) {
            return Err(Error::InvalidMeasure("atom locations must be distinct".into()));
        }
        let symmetric = detect_symmetry(&atoms);
        Ok(Self { atoms, symmetric })
    }

    /// ρ₁ = δ₋₁ + δ₁.
    pub fn rho1() -> Self {
        Self::new([(-1.0, 1.0), (1.0, 1.0)]).expect("preset is valid")
    }

    /// ρ₂ = 0.5^{−α} δ₋₀.₅ + δ₁.
    pub fn rho2(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new([(-0.5, 0.5f64.powf(-alpha)), (1.0, 1.0)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Returns the measure with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|a| (a.x, a.w * c)))
    }

    /// Σ w |x|^p.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.atoms.iter().map(|a| a.w * a.x.abs().powf(p)).sum()
    }

    /// Σ w x |x|^{p−1}, or Σ w x ln|x| for the log variant.
    pub fn signed_weighted_moment(&self, kind: SignedMoment) -> f64 {
        if self.symmetric {
            return 0.0;
        }
        match kind {
            SignedMoment::Power(p) => self.atoms.iter().map(|a| a.w * a.x * a.x.abs().powf(p - 1.0)).sum(),
            SignedMoment::Log => self.atoms.iter().map(|a| a.w * a.x * a.x.abs().ln()).sum(),
        }
    }
}

impl fmt::Display for InnerMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|a| format!("{}:{}", a.x, a.w)).collect();
        write!(f, "{}", parts.join(","))
    }
}

fn detect_symmetry(atoms: &[Atom]) -> bool {
    let n = atoms.len();
    (0..n).all(|i| {
        let a = atoms[i];
        let b = atoms[n - 1 - i];
        a.x == -b.x && (a.w - b.w).abs() <= SYMMETRY_WEIGHT_TOL * a.w.max(b.w)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignedMoment {
    Power(f64),
    Log,
}

/// A measure given by name or by atoms; `rho2` depends on α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasureSpec {
    Rho1,
    Rho2 { alpha: Option<f64> },
    Atoms(Vec<(f64, f64)>),
}

impl MeasureSpec {
    pub fn resolve(&self, alpha: f64) -> Result<InnerMeasure> {
        match self {
            MeasureSpec::Rho1 => Ok(InnerMeasure::rho1()),
            MeasureSpec::Rho2 { alpha: a } => InnerMeasure::rho2(a.unwrap_or(alpha)),
            MeasureSpec::Atoms(v) => InnerMeasure::new(v.iter().copied()),
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = Error;

    /// Accepts `rho1`, `rho2`, `rho2(1.6)`, `x:w,x:w,...` or `{x=..,w=..},...`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        if lower == "rho1" {
            return Ok(MeasureSpec::Rho1);
        }
        if lower == "rho2" {
            return Ok(MeasureSpec::Rho2 { alpha: None });
        }
        if let Some(inner) = lower.strip_prefix("rho2(").and_then(|r| r.strip_suffix(')')) {
            let a = inner.trim().parse::<f64>().map_err(|_| Error::InvalidMeasure(format!("bad rho2 argument '{inner}'")))?;
            return Ok(MeasureSpec::Rho2 { alpha: Some(a) });
        }
        let bad = || Error::InvalidMeasure(format!("cannot parse measure '{s}'"));
        let mut atoms = Vec::new();
        if t.contains('{') {
            for chunk in t.split('}').map(str::trim).filter(|c| !c.is_empty()) {
                let body = chunk.trim_start_matches(',').trim().strip_prefix('{').ok_or_else(bad)?;
                let (mut x, mut w) = (None, None);
                for kv in body.split(',') {
                    let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                    let v = v.trim().parse::<f64>().map_err(|_| bad())?;
                    match k.trim() {
                        "x" => x = Some(v),
                        "w" => w = Some(v),
                        _ => return Err(bad()),
                    }
                }
                atoms.push((x.ok_or_else(bad)?, w.ok_or_else(bad)?));
            }
        } else {
            for pair in t.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (x, w) = pair.split_once(':').ok_or_else(bad)?;
                atoms.push((x.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?));
            }
        }
        if atoms.is_empty() {
            return Err(bad());
        }
        Ok(MeasureSpec::Atoms(atoms))
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Rho1 => write!(f, "rho1"),
            MeasureSpec::Rho2 { alpha: None } => write!(f, "rho2"),
            MeasureSpec::Rho2 { alpha: Some(a) } => write!(f, "rho2({a})"),
            MeasureSpec::Atoms(v) => {
                let parts: Vec<String> = v.iter().map(|(x, w)| format!("{x}:{w}")).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("alpha = {alpha} outside (0, 2)")))
    }
}

/// True when α is treated as exactly 1 (log branches).
pub(crate) fn is_alpha_one(alpha: f64) -> bool {
    (alpha - 1.0).abs() < 1e-12
}

/// Constants of the shot-noise series on horizon T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConstants {
    pub m_rho: f64,
    pub k_prime: f64,
    pub z_t: f64,
    pub alpha: f64,
    pub horizon: f64,
}

impl SeriesConstants {
    /// a(r) = m(ρ)(α r / T)^{−1/α}, the clip level at Poisson arrival r.
    pub fn arrival_scale(&self, r: f64) -> f64 {
        self.m_rho * (self.alpha * r / self.horizon).powf(-1.0 / self.alpha)
    }
}

/// m(ρ), k′ and the drift z_T of the TS series.
///
/// For α ≠ 1, z_T = m(ρ)(α/T)^{−1/α} ζ(1/α) k′ / T − Γ(1−α)∫xρ(dx), which makes
/// the series mean zero for every α ∈ (0,1)∪(1,2). For α = 1,
/// z_T = (ln(m(ρ)T) + 2γ)∫xρ(dx) − ∫x ln|x| ρ(dx).
pub fn series_constants(rho: &InnerMeasure, alpha: f64, horizon: f64) -> Result<SeriesConstants> {
    check_alpha(alpha)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidParams(format!("horizon T = {horizon} must be positive")));
    }
    let m_alpha = rho.abs_moment(alpha);
    let m_rho = m_alpha.powf(1.0 / alpha);
    if rho.is_symmetric() {
        return Ok(SeriesConstants { m_rho, k_prime: 0.0, z_t: 0.0, alpha, horizon });
    }
    let k_prime = rho.signed_weighted_moment(SignedMoment::Power(alpha)) / m_alpha;
    let first = rho.signed_weighted_moment(SignedMoment::Power(1.0));
    let z_t = if is_alpha_one(alpha) {
        ((m_rho * horizon).ln() + 2.0 * EULER_GAMMA) * first - rho.signed_weighted_moment(SignedMoment::Log)
    } else {
        let head = m_rho * (alpha / horizon).powf(-1.0 / alpha) * riemann_zeta(1.0 / alpha)? * k_prime / horizon;
        head - gamma_real(1.0 - alpha)? * first
    };
    Ok(SeriesConstants { m_rho, k_prime, z_t, alpha, horizon })
}

/// Short-time drift: (b_{h,α}, b).
pub fn short_time_drift(rho: &InnerMeasure, alpha: f64, h: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("h = {h} must be positive")));
    }
    let first = rho.signed_weighted_moment(SignedMoment::Power(1.0));
    if first == 0.0 || alpha > 1.0 && !is_alpha_one(alpha) {
        return Ok((0.0, 0.0));
    }
    if is_alpha_one(alpha) {
        return Ok((-(1.0 + h.ln()) * first, 0.0));
    }
    let b = gamma_real(1.0 - alpha)? * first;
    Ok((h * b, b))
}

/// Γ(2−α)∫x²ρ(dx), the variance of the TS process at time 1.
pub fn ts_variance(rho: &InnerMeasure, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(gamma_real(2.0 - alpha)? * rho.abs_moment(2.0))
}

/// Distribution of V: atoms with probabilities w|x|^α / m(ρ)^α.
pub fn v_sampling_weights(rho: &InnerMeasure, alpha: f64) -> Result<Vec<(f64, f64)>> {
    check_alpha(alpha)?;
    let total = rho.abs_moment(alpha);
    Ok(rho.atoms().iter().map(|a| (a.x, a.w * a.x.abs().powf(alpha) / total)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn validation() {
        assert!(InnerMeasure::new([]).is_err());
        assert!(InnerMeasure::new([(0.0, 1.0)]).is_err());
        assert!(InnerMeasure::new([(1.0, 0.0)]).is_err());
        assert!(InnerMeasure::new([(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(InnerMeasure::new([(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn moments() {
        let r1 = InnerMeasure::rho1();
        assert_eq!(r1.abs_moment(1.6), 2.0);
        assert_eq!(r1.abs_moment(0.0), 2.0);
        let r2 = InnerMeasure::rho2(1.2).unwrap();
        assert_relative_eq!(r2.abs_moment(2.0), 0.5f64.powf(-1.2) * 0.25 + 1.0, max_relative = 1e-15);
        assert_eq!(r1.signed_weighted_moment(SignedMoment::Power(1.3)), 0.0);
        let r2 = InnerMeasure::rho2(1.6).unwrap();
        assert_relative_eq!(
            r2.signed_weighted_moment(SignedMoment::Power(1.0)),
            1.0 - 0.5f64.powf(-1.6) * 0.5,
            max_relative = 1e-15
        );
        let one = InnerMeasure::new([(1.0, 1.0)]).unwrap();
        assert_eq!(one.signed_weighted_moment(SignedMoment::Log), 0.0);
    }

    #[test]
    fn constants_examples() {
        let c = series_constants(&InnerMeasure::rho1(), 1.6, 3.0).unwrap();
        assert_eq!((c.k_prime, c.z_t), (0.0, 0.0));
        let r2 = InnerMeasure::rho2(1.6).unwrap();
        let c = series_constants(&r2, 1.6, 1.0).unwrap();
        assert_relative_eq!(c.m_rho.powf(1.6), 2.0, max_relative = 1e-14);
        assert_relative_eq!(c.m_rho, 2f64.powf(1.0 / 1.6), max_relative = 1e-14);
        let one = InnerMeasure::new([(1.0, 1.0)]).unwrap();
        let c = series_constants(&one, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.z_t, 2.0 * EULER_GAMMA, max_relative = 1e-15);
    }

    #[test]
    fn drift_examples() {
        assert_eq!(short_time_drift(&InnerMeasure::rho2(1.5).unwrap(), 1.5, 0.3).unwrap(), (0.0, 0.0));
        assert_eq!(short_time_drift(&InnerMeasure::rho1(), 0.7, 0.3).unwrap(), (0.0, 0.0));
        let one = InnerMeasure::new([(1.0, 1.0)]).unwrap();
        let (bh, b) = short_time_drift(&one, 0.7, 0.1).unwrap();
        let g = 2.991_568_987_687_590_7; // Γ(0.3)
        assert_relative_eq!(bh, 0.1 * g, max_relative = 1e-12);
        assert_relative_eq!(b, g, max_relative = 1e-12);
    }

    #[test]
    fn variance_and_weights() {
        assert_relative_eq!(ts_variance(&InnerMeasure::rho1(), 1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            ts_variance(&InnerMeasure::rho1(), 1.6).unwrap(),
            2.0 * 2.218_159_543_757_688_1,
            max_relative = 1e-12
        );
        let w = v_sampling_weights(&InnerMeasure::rho2(1.3).unwrap(), 1.3).unwrap();
        assert_relative_eq!(w[0].1, 0.5, max_relative = 1e-14);
        assert_eq!(w[0].0, -0.5);
        let single = v_sampling_weights(&InnerMeasure::new([(2.0, 3.0)]).unwrap(), 0.4).unwrap();
        assert_eq!(single, vec![(2.0, 1.0)]);
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("rho1".parse::<MeasureSpec>().unwrap(), MeasureSpec::Rho1);
        assert_eq!("rho2(1.6)".parse::<MeasureSpec>().unwrap(), MeasureSpec::Rho2 { alpha: Some(1.6) });
        let a: MeasureSpec = "-1:2, 0.5:1".parse().unwrap();
        assert_eq!(a, MeasureSpec::Atoms(vec![(-1.0, 2.0), (0.5, 1.0)]));
        let b: MeasureSpec = "{x=-1, w=2}, {x=0.5, w=1}".parse().unwrap();
        assert_eq!(a, b);
        assert!("nonsense".parse::<MeasureSpec>().is_err());
        let round: MeasureSpec = a.to_string().parse().unwrap();
        assert_eq!(round, a);
    }

    fn arb_measure() -> impl Strategy<Value = InnerMeasure> {
        prop::collection::btree_map(1i32..40, 0.1f64..5.0, 1..5).prop_map(|m| {
            InnerMeasure::new(m.into_iter().map(|(k, w)| ((k as f64 - 20.5) / 4.0, w))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn symmetric_measures_have_zero_drifts(xs in prop::collection::btree_map(1i32..20, 0.1f64..5.0, 1..4),
                                               alpha in 0.05f64..1.95, h in 0.01f64..10.0) {
            let atoms = xs.iter().flat_map(|(&k, &w)| [(k as f64 / 3.0, w), (-(k as f64) / 3.0, w)]);
            let rho = InnerMeasure::new(atoms).unwrap();
            prop_assert!(rho.is_symmetric());
            let c = series_constants(&rho, alpha, 1.7).unwrap();
            prop_assert_eq!((c.k_prime, c.z_t), (0.0, 0.0));
            prop_assert_eq!(short_time_drift(&rho, alpha, h).unwrap(), (0.0, 0.0));
            let w = v_sampling_weights(&rho, alpha).unwrap();
            let n = w.len();
            for i in 0..n {
                prop_assert!((w[i].1 - w[n - 1 - i].1).abs() < 1e-14);
            }
        }

        #[test]
        fn homogeneity(rho in arb_measure(), alpha in 0.05f64..1.95, c in 0.1f64..10.0) {
            let scaled = rho.scaled(c).unwrap();
            let a = series_constants(&rho, alpha, 1.0).unwrap();
            let b = series_constants(&scaled, alpha, 1.0).unwrap();
            prop_assert!((b.m_rho.powf(alpha) - c * a.m_rho.powf(alpha)).abs() <= 1e-12 * b.m_rho.powf(alpha));
            let wa = v_sampling_weights(&rho, alpha).unwrap();
            let wb = v_sampling_weights(&scaled, alpha).unwrap();
            for (p, q) in wa.iter().zip(&wb) {
                prop_assert!((p.1 - q.1).abs() < 1e-13);
            }
            prop_assert!((wa.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-14);
            prop_assert!(ts_variance(&rho, alpha).unwrap() > 0.0);
            prop_assert!((a.m_rho.powf(alpha) - rho.abs_moment(alpha)).abs() <= 1e-12 * rho.abs_moment(alpha));
        }
    }
}
