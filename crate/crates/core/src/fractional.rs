//! Closed forms for the power damping `f(s) = a·sᶿ`.
//!
//! The ratio `q(s) = f(s)/√s = a·s^{θ-½}` crosses 1 at the critical point
//! `c = a^{2/(1-2θ)}` (for `θ ≠ ½`). The shape of `φ` depends on `θ`:
//!
//! * `θ < ½`: `φ` increases, so `m* = φ(s₀)`.
//! * `θ = ½`: `φ(s) = φ(1)·√s` with a constant ratio `a`.
//! * `½ < θ < 1`: `φ` increases up to `c`, decreases to a minimum at `s_m`,
//!   then increases again. It returns to the value `φ(c)` at `s_b`.
//! * `θ = 1`: `φ` peaks at `1/a` for `s = 1/a²` and tends to `1/(2a)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mode_analysis::RESONANCE_RTOL;
use crate::spectrum::SpectrumSpec;

const S_HI_LIMIT: f64 = 1e30;
const ROOT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FractionalError {
    #[error("theta must lie in [0, 1], got {0}")]
    Domain(f64),
    #[error("a must be positive and finite, got {0}")]
    InvalidCoefficient(f64),
    #[error("no sign change of h below s = {limit:e} (a = {a}, theta = {theta})")]
    Bracket { a: f64, theta: f64, limit: f64 },
    #[error("root check failed: |h({s})| = {residual:e}")]
    Residual { s: f64, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalAnalysis {
    pub a: f64,
    pub theta: f64,
    pub s0: f64,
    /// Largest eigenvalue of a bounded spectrum.
    #[serde(rename = "sM")]
    pub s_max: Option<f64>,
    pub m_star: f64,
    pub resonant: bool,
    /// Local minimizer of `φ` beyond the critical point.
    pub s_m: Option<f64>,
    /// Larger root of `φ(s) = φ(c)`.
    pub s_b: Option<f64>,
    #[serde(rename = "subdamped_C")]
    pub subdamped_c: Option<f64>,
    /// `a^{2/(1-2θ)}`, absent for `θ = ½`.
    pub critical_point: Option<f64>,
}

fn check(a: f64, theta: f64) -> Result<(), FractionalError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(FractionalError::Domain(theta));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(FractionalError::InvalidCoefficient(a));
    }
    Ok(())
}

/// `q(s) = a·s^{θ-½}`.
pub fn ratio(a: f64, theta: f64, s: f64) -> f64 {
    a * s.powf(theta - 0.5)
}

/// `φ(s)` for `f = a·sᶿ`, as `√s·min(q, 1/(q + √(q²-1)))`.
pub fn phi_power(a: f64, theta: f64, s: f64) -> f64 {
    let q = ratio(a, theta, s);
    let r = s.sqrt();
    if q <= 1.0 {
        r * q
    } else {
        r / (q + ((q - 1.0) * (q + 1.0)).sqrt())
    }
}

/// `a^{2/(1-2θ)}`, the unique `s` with `f(s) = √s`.
pub fn critical_point(a: f64, theta: f64) -> Option<f64> {
    (theta != 0.5).then(|| a.powf(2.0 / (1.0 - 2.0 * theta)))
}

/// `h(s) = s - 2a^{(2-2θ)/(1-2θ)}sᶿ + a^{2/(1-2θ)}`, zero where `φ(s) = φ(c)`.
pub fn h_sb(a: f64, theta: f64, s: f64) -> f64 {
    let e = 1.0 - 2.0 * theta;
    s - 2.0 * a.powf((2.0 - 2.0 * theta) / e) * s.powf(theta) + a.powf(2.0 / e)
}

fn bisect(mut lo: f64, mut hi: f64, positive_above: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 0.25 * ROOT_RTOL * ROOT_RTOL * hi {
            break;
        }
        if positive_above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of `φ` on `(c, ∞)` for `½ < θ < 1`.
///
/// Solves `d ln φ / d ln s = ½ - (θ-½)·q/√(q²-1) = 0` in `x = ln s`; the left
/// side increases from `-∞` at `c` to `1 - θ`.
pub fn find_s_m(a: f64, theta: f64) -> Result<f64, FractionalError> {
    check(a, theta)?;
    if !(theta > 0.5 && theta < 1.0) {
        return Err(FractionalError::Domain(theta));
    }
    let slope = |x: f64| {
        let q = a * ((theta - 0.5) * x).exp();
        0.5 - (theta - 0.5) * q / ((q - 1.0) * (q + 1.0)).sqrt()
    };
    let bracket_err = FractionalError::Bracket {
        a,
        theta,
        limit: S_HI_LIMIT,
    };
    // ln c, finite even when c itself under- or overflows
    let x0 = 2.0 * a.ln() / (1.0 - 2.0 * theta);
    let mut width = 1.0;
    while slope(x0 + width) <= 0.0 {
        width *= 2.0;
        if x0 + width > S_HI_LIMIT.ln() {
            return Err(bracket_err);
        }
    }
    let s_m = bisect(x0, x0 + width, |x| slope(x) > 0.0).exp();
    if s_m > 0.0 && s_m.is_finite() {
        Ok(s_m)
    } else {
        Err(bracket_err)
    }
}

/// Larger root `s_b` of [`h_sb`], bracketed from `s_m` upward.
pub fn find_s_b(a: f64, theta: f64) -> Result<f64, FractionalError> {
    let lo = find_s_m(a, theta)?;
    let h = |s: f64| h_sb(a, theta, s);
    let mut hi = 2.0 * lo;
    while h(hi) <= 0.0 {
        hi *= 2.0;
        if hi > S_HI_LIMIT {
            return Err(FractionalError::Bracket {
                a,
                theta,
                limit: S_HI_LIMIT,
            });
        }
    }
    let s_b = bisect(lo, hi, |s| h(s) > 0.0);
    let residual = h(s_b).abs();
    if residual > 1e-10 * s_b {
        return Err(FractionalError::Residual { s: s_b, residual });
    }
    let c = critical_point(a, theta).unwrap_or(1.0);
    let rc = h(c).abs();
    if rc > 1e-10 * c {
        return Err(FractionalError::Residual { s: c, residual: rc });
    }
    Ok(s_b)
}

/// Case analysis of `f(s) = a·sᶿ` on `spec`, with resonance decided
/// at relative tolerance `tol` on the ratio.
pub fn analyze_fractional_with(
    a: f64,
    theta: f64,
    spec: &SpectrumSpec,
    tol: f64,
) -> Result<FractionalAnalysis, FractionalError> {
    check(a, theta)?;
    let eig = spec.eigenvalues();
    let s0 = spec.s0();
    let s_max = (!spec.is_unbounded()).then(|| spec.s_max());
    let c = critical_point(a, theta);
    let q0 = ratio(a, theta, s0);
    let critical_at = |s: f64| (ratio(a, theta, s) - 1.0).abs() <= tol;
    let sharp = |ell: f64| (ell < 1.0).then(|| ((1.0 + ell) / (1.0 - ell)).sqrt());
    let mut out = FractionalAnalysis {
        a,
        theta,
        s0,
        s_max,
        m_star: phi_power(a, theta, s0),
        resonant: false,
        s_m: None,
        s_b: None,
        subdamped_c: None,
        critical_point: c,
    };
    if theta < 0.5 {
        out.resonant = critical_at(s0);
        if !out.resonant && q0 < 1.0 {
            let g = s0.powf(0.5 - theta);
            out.subdamped_c = Some(((g + a) / (g - a)).sqrt());
        }
    } else if theta == 0.5 {
        out.m_star = if a <= 1.0 {
            a * s0.sqrt()
        } else {
            s0.sqrt() / (a + ((a - 1.0) * (a + 1.0)).sqrt())
        };
        out.resonant = (a - 1.0).abs() <= tol;
        if !out.resonant {
            out.subdamped_c = sharp(a);
        }
    } else if theta < 1.0 {
        let c = c.unwrap_or(1.0);
        // for θ near 1, s_b can exceed the bracket limit; every eigenvalue
        // then lies below it
        let s_b = match find_s_b(a, theta) {
            Ok(s_b) => Some(s_b),
            Err(FractionalError::Bracket { .. }) => None,
            Err(e) => return Err(e),
        };
        out.s_m = match find_s_m(a, theta) {
            Ok(s_m) => Some(s_m),
            Err(FractionalError::Bracket { .. }) => None,
            Err(e) => return Err(e),
        };
        out.s_b = s_b;
        let s_b = s_b.unwrap_or(f64::INFINITY);
        out.m_star = eig
            .iter()
            .fold(f64::INFINITY, |m, &s| m.min(phi_power(a, theta, s)));
        out.resonant = critical_at(s0) && !eig.iter().any(|&s| s > c && !critical_at(s) && s < s_b);
        if let Some(sm) = s_max {
            if !out.resonant {
                out.subdamped_c = sharp(ratio(a, theta, sm));
            }
        }
    } else {
        out.m_star = match s_max {
            None => phi_power(a, theta, s0).min(0.5 / a),
            Some(sm) => phi_power(a, theta, s0).min(phi_power(a, theta, sm)),
        };
        out.resonant = s_max.is_some() && eig.iter().all(|&s| critical_at(s));
        if let Some(sm) = s_max {
            if !out.resonant {
                out.subdamped_c = sharp(ratio(a, theta, sm));
            }
        }
    }
    if out.resonant {
        out.m_star = match c {
            Some(_) => a.powf(1.0 / (1.0 - 2.0 * theta)),
            None => s0.sqrt(),
        };
    }
    Ok(out)
}

pub fn analyze_fractional(
    a: f64,
    theta: f64,
    spec: &SpectrumSpec,
) -> Result<FractionalAnalysis, FractionalError> {
    analyze_fractional_with(a, theta, spec, RESONANCE_RTOL)
}
