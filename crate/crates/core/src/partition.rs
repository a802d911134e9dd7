//! Splitting of the spectrum by the damping ratio `f(s)/√s`:
//!
//! | region | ratio                     |
//! |--------|---------------------------|
//! | 0      | `> K`                     |
//! | 1      | `≤ 1 - ε`                 |
//! | 2      | `∈ [1 + ε, K]`            |
//! | 3      | `∈ (1 - ε, 1 + ε)`        |
//!
//! and the choice of `K` and `ε` under which each region's energy estimate
//! holds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mode_analysis::{phi, AnalysisOptions, DampedSystem};

/// Upper limit (exclusive) on `ε` for the near-critical estimate.
pub const EPSILON_CAP: f64 = 1.0 / 16.0;
/// `ε*` used for resonant systems.
pub const RESONANT_EPSILON: f64 = 1.0 / 32.0;
const BISECTION_STEPS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PartitionError {
    #[error("K must be >= 2, got {0}")]
    InvalidK(f64),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("admissible epsilon requested for a resonant system")]
    ResonantInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Zero,
    One,
    Two,
    Three,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Zero, Region::One, Region::Two, Region::Three];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Region> {
        Region::ALL.get(i).copied()
    }
}

impl Serialize for Region {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_u8(self.index() as u8)
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let i = u8::deserialize(de)?;
        Region::from_index(i as usize)
            .ok_or_else(|| serde::de::Error::custom(format!("region index {i} out of range")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
}

impl PartitionParams {
    pub fn new(k: f64, epsilon: f64) -> Result<Self, PartitionError> {
        if !(k.is_finite() && k >= 2.0) {
            return Err(PartitionError::InvalidK(k));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(PartitionError::InvalidEpsilon(epsilon));
        }
        Ok(Self { k, epsilon })
    }

    pub fn region_of(&self, ratio: f64) -> Region {
        let eps = self.epsilon;
        if ratio > self.k {
            Region::Zero
        } else if ratio <= 1.0 - eps {
            Region::One
        } else if ratio >= 1.0 + eps {
            Region::Two
        } else {
            Region::Three
        }
    }
}

/// `f(s)/√s`.
pub fn damping_ratio(s: f64, f: f64) -> f64 {
    f / s.sqrt()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionAssignment(Vec<Region>);

impl RegionAssignment {
    pub fn regions(&self) -> &[Region] {
        &self.0
    }

    /// Indices of the eigenvalues in `region`.
    pub fn members(&self, region: Region) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == region)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_empty(&self, region: Region) -> bool {
        !self.0.contains(&region)
    }
}

pub fn assign_regions(system: &DampedSystem, params: &PartitionParams) -> RegionAssignment {
    RegionAssignment(
        system
            .modes()
            .map(|(s, f)| params.region_of(damping_ratio(s, f)))
            .collect(),
    )
}

fn k_conditions_hold(k: f64, l: f64, m: f64) -> bool {
    k >= l * l && k * k.sqrt() - 0.5 * m >= m && k >= 20.0 * m * m
}

/// Smallest `K ∈ {2, 4, 8, …}` with `K ≥ L²`, `K√K - m*/2 ≥ m*` and
/// `K ≥ 20 m*²`.
pub fn admissible_k(l: f64, m_star: f64) -> f64 {
    let mut k: f64 = 2.0;
    while !k_conditions_hold(k, l, m_star) && k.is_finite() {
        k *= 2.0;
    }
    k
}

pub fn admissible_k_for(system: &DampedSystem) -> f64 {
    admissible_k(system.structural().l, system.m_star())
}

/// `m₃ = min φ` over the near-critical band `|f/√s - 1| < ε`; `+∞` if empty.
pub fn m3(system: &DampedSystem, epsilon: f64) -> f64 {
    system
        .modes()
        .filter(|&(s, f)| {
            let r = damping_ratio(s, f);
            r > 1.0 - epsilon && r < 1.0 + epsilon
        })
        .fold(f64::INFINITY, |m, (s, f)| m.min(phi(s, f)))
}

fn epsilon_ok(system: &DampedSystem, m_star: f64, eps: f64) -> bool {
    let m = m3(system, eps);
    m.is_infinite() || m * (1.0 - 4.0 * eps.sqrt()) >= m_star
}

/// Largest `ε < 1/16` with `m₃(ε)(1 - 4√ε) ≥ m*`, by bisection.
///
/// `Ok(None)` means no `ε > 0` on the bisection grid works.
pub fn admissible_epsilon(
    system: &DampedSystem,
    m_star: f64,
    resonant: bool,
) -> Result<Option<f64>, PartitionError> {
    if resonant {
        return Err(PartitionError::ResonantInput);
    }
    let top = f64::from_bits(EPSILON_CAP.to_bits() - 1);
    if epsilon_ok(system, m_star, top) {
        return Ok(Some(top));
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if epsilon_ok(system, m_star, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo > 0.0).then_some(lo))
}

/// `K` and `ε` used for reports and certificates, honouring overrides.
pub fn resolve_params(
    system: &DampedSystem,
    resonant: bool,
    opts: &AnalysisOptions,
) -> Result<PartitionParams, PartitionError> {
    let k = opts.k.unwrap_or_else(|| admissible_k_for(system));
    let epsilon = match opts.epsilon {
        Some(e) => e,
        None if resonant => RESONANT_EPSILON,
        None => admissible_epsilon(system, system.m_star(), false)?.unwrap_or(RESONANT_EPSILON),
    };
    PartitionParams::new(k, epsilon)
}
