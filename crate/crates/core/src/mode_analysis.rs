//! Per-frequency decay rates and the spectral quantities of the generator.
//!
//! For each eigenvalue `s` of `A` the damped oscillator `ü + 2f(s)u̇ + su = 0`
//! has characteristic roots `λ±` and decays at rate `φ(s) = -Re λ₊`.
//! The spectral bound of the generator is `σ* = -m*` with `m* = inf φ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::damping::DampingSpec;
use crate::error::Error;
use crate::partition::{self, PartitionParams, Region};
use crate::spectrum::{self, SpectrumError, SpectrumSpec, StructuralConstants};

/// Relative tie tolerance on `f² - s` for critical damping.
pub const CRITICAL_RTOL: f64 = 1e-12;
/// Default relative tolerance for the resonance test.
pub const RESONANCE_RTOL: f64 = 1e-9;
/// Tolerance for merging points of `Σ ∪ Λ`.
pub const UNION_TOL: f64 = 1e-12;

/// `f² - s`, evaluated as a product to limit cancellation near `f = √s`.
pub fn discriminant(s: f64, f: f64) -> f64 {
    let r = s.sqrt();
    (f - r) * (f + r)
}

/// The decay rate of the mode `s` under damping value `f`.
pub fn phi(s: f64, f: f64) -> f64 {
    if f * f <= s {
        f
    } else {
        // f - √(f² - s) without cancellation
        s / (f + discriminant(s, f).sqrt())
    }
}

/// Roots `(λ₊, λ₋)` of `λ² + 2fλ + s = 0`, `λ₊` being the one closer to 0.
pub fn lambdas(s: f64, f: f64) -> (Complex64, Complex64) {
    let d = discriminant(s, f);
    if d.abs() <= CRITICAL_RTOL * s.max(1.0) {
        let l = Complex64::new(-f, 0.0);
        (l, l)
    } else if d < 0.0 {
        let w = (-d).sqrt();
        (Complex64::new(-f, w), Complex64::new(-f, -w))
    } else {
        let rho = d.sqrt();
        (
            Complex64::new(-s / (f + rho), 0.0),
            Complex64::new(-f - rho, 0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingClass {
    Underdamped,
    Critical,
    Overdamped,
}

pub fn classify(s: f64, f: f64) -> DampingClass {
    let d = discriminant(s, f);
    if d.abs() <= CRITICAL_RTOL * s.max(1.0) {
        DampingClass::Critical
    } else if d < 0.0 {
        DampingClass::Underdamped
    } else {
        DampingClass::Overdamped
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub s: f64,
    pub f_s: f64,
    pub phi_s: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub damping_class: DampingClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

impl ModeRecord {
    pub fn new(s: f64, f_s: f64) -> Self {
        let (lambda_plus, lambda_minus) = lambdas(s, f_s);
        Self {
            s,
            f_s,
            phi_s: phi(s, f_s),
            lambda_plus,
            lambda_minus,
            damping_class: classify(s, f_s),
            region: None,
        }
    }
}

/// Limit of `φ(s)` as `s → ∞` along an unbounded tail, when it is finite.
///
/// Constant damping `a` gives `a`; `a·s` gives `1/(2a)`; every other power
/// diverges.
pub fn tail_phi_limit(spec: &SpectrumSpec, f: &DampingSpec) -> Result<Option<f64>, SpectrumError> {
    if !spec.is_unbounded() {
        return Ok(None);
    }
    let (a, theta) = f.family().ok_or(SpectrumError::RejectedTail)?;
    Ok(if theta == 0.0 {
        Some(a)
    } else if theta == 1.0 {
        Some(1.0 / (2.0 * a))
    } else {
        None
    })
}

/// A spectrum paired with a damping that satisfies the structural hypotheses.
#[derive(Debug, Clone)]
pub struct DampedSystem {
    spec: SpectrumSpec,
    damping: DampingSpec,
    f_values: Vec<f64>,
    structural: StructuralConstants,
    m_star: f64,
}

impl DampedSystem {
    pub fn new(spec: SpectrumSpec, damping: DampingSpec) -> Result<Self, SpectrumError> {
        let f_values = spectrum::damping_values(&spec, &damping)?;
        let structural = spectrum::structural_from_values(&spec, &damping, &f_values);
        // sequential fold over the sorted list: reproducible bit for bit
        let mut m_star = spec
            .eigenvalues()
            .iter()
            .zip(&f_values)
            .fold(f64::INFINITY, |m, (&s, &fs)| m.min(phi(s, fs)));
        if let Some(limit) = tail_phi_limit(&spec, &damping)? {
            m_star = m_star.min(limit);
        }
        Ok(Self {
            spec,
            damping,
            f_values,
            structural,
            m_star,
        })
    }

    pub fn spec(&self) -> &SpectrumSpec {
        &self.spec
    }

    pub fn damping(&self) -> &DampingSpec {
        &self.damping
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spec.eigenvalues()
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    /// `(s, f(s))` for every eigenvalue, in increasing order of `s`.
    pub fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.spec
            .eigenvalues()
            .iter()
            .copied()
            .zip(self.f_values.iter().copied())
    }

    pub fn structural(&self) -> &StructuralConstants {
        &self.structural
    }

    pub fn m_star(&self) -> f64 {
        self.m_star
    }

    pub fn phi_values(&self) -> Vec<f64> {
        self.modes().map(|(s, f)| phi(s, f)).collect()
    }

    /// First eigenvalue that is critically damped and realizes `m*`.
    pub fn resonance(&self, tol: f64) -> Option<f64> {
        let m = self.m_star;
        self.modes()
            .find(|&(s, f)| {
                let r = s.sqrt();
                (f - r).abs() <= tol * r && (phi(s, f) - m).abs() <= tol * m
            })
            .map(|(s, _)| s)
    }

    /// The set `Λ` of limits `-1/(2 lim f(s)/s)` along `s → ∞`.
    pub fn lambda_set(&self) -> Vec<f64> {
        match (self.spec.is_unbounded(), self.damping.family()) {
            (true, Some((a, 1.0))) => vec![-1.0 / (2.0 * a)],
            _ => Vec::new(),
        }
    }
}

pub fn compute_m_star(spec: &SpectrumSpec, f: &DampingSpec) -> Result<f64, SpectrumError> {
    Ok(DampedSystem::new(spec.clone(), f.clone())?.m_star())
}

pub fn compute_lambda_set(spec: &SpectrumSpec, f: &DampingSpec) -> Result<Vec<f64>, SpectrumError> {
    if spec.is_unbounded() && f.family().is_none() {
        return Err(SpectrumError::RejectedTail);
    }
    Ok(match (spec.is_unbounded(), f.family()) {
        (true, Some((a, 1.0))) => vec![-1.0 / (2.0 * a)],
        _ => Vec::new(),
    })
}

pub fn detect_resonance(
    spec: &SpectrumSpec,
    f: &DampingSpec,
    tol: f64,
) -> Result<(bool, Option<f64>), SpectrumError> {
    let s_star = DampedSystem::new(spec.clone(), f.clone())?.resonance(tol);
    Ok((s_star.is_some(), s_star))
}

/// Everything known about the decay of one system.
///
/// `rate_norm` is the exponent of `‖S(t)‖`; the energy `‖·‖²` decays at
/// `rate_energy = 2 m*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub m_star: f64,
    pub sigma_star: f64,
    pub rate_norm: f64,
    pub rate_energy: f64,
    pub resonant: bool,
    pub s_star: Option<f64>,
    #[serde(rename = "Lambda")]
    pub lambda_set: Vec<f64>,
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub ell: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub f_inf: f64,
    pub ssdg: bool,
    pub modes: Vec<ModeRecord>,
}

impl DecayReport {
    pub fn structural(&self) -> StructuralConstants {
        StructuralConstants {
            f_inf: self.f_inf,
            l: self.l,
            ell: self.ell,
        }
    }

    /// `σ(𝔸) = Σ ∪ Λ` with coincident points merged.
    pub fn generator_spectrum(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        let candidates = self
            .modes
            .iter()
            .flat_map(|m| [m.lambda_plus, m.lambda_minus])
            .chain(self.lambda_set.iter().map(|&l| Complex64::new(l, 0.0)));
        for z in candidates {
            if !out
                .iter()
                .any(|w| (z - w).norm() <= UNION_TOL * z.norm().max(1.0))
            {
                out.push(z);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub resonance_tol: f64,
    pub k: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            resonance_tol: RESONANCE_RTOL,
            k: None,
            epsilon: None,
        }
    }
}

/// Builds the full report; regions use the parameters the certificate uses.
pub fn analyze(system: &DampedSystem, opts: &AnalysisOptions) -> Result<DecayReport, Error> {
    let s_star = system.resonance(opts.resonance_tol);
    let params: PartitionParams = partition::resolve_params(system, s_star.is_some(), opts)?;
    let regions = partition::assign_regions(system, &params);
    let modes = system
        .modes()
        .zip(regions.regions())
        .map(|((s, f), &region)| ModeRecord {
            region: Some(region),
            ..ModeRecord::new(s, f)
        })
        .collect();
    let m = system.m_star();
    let structural = system.structural();
    Ok(DecayReport {
        m_star: m,
        sigma_star: -m,
        rate_norm: m,
        rate_energy: 2.0 * m,
        resonant: s_star.is_some(),
        s_star,
        lambda_set: system.lambda_set(),
        ell: structural.ell,
        l: structural.l,
        f_inf: structural.f_inf,
        ssdg: s_star.is_none(),
        modes,
    })
}
