//! Finite spectra of the elastic operator and the structural hypotheses on
//! the damping (`inf f > 0`, `sup f(s)/s < ∞`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::damping::{DampingSpec, EvalError};

/// Relative tolerance under which two eigenvalues are the same point.
pub const DEDUP_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("spectrum must contain at least one eigenvalue")]
    Empty,
    #[error("eigenvalues must be finite and positive, got {0}")]
    NonPositive(f64),
    #[error("invalid spectrum parameter: {0}")]
    InvalidParameter(String),
    #[error("structural hypothesis violated at s = {s}: {source}")]
    Structural { s: f64, source: EvalError },
    #[error("an unbounded (power) tail requires constant or power damping, not an expression")]
    RejectedTail,
}

/// Behaviour of `σ(A)` beyond the listed eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    /// Bounded operator: the list is the whole spectrum.
    #[default]
    None,
    /// The spectrum is unbounded above.
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    eigenvalues: Vec<f64>,
    tail: Tail,
}

impl SpectrumSpec {
    /// Sorts, merges values within [`DEDUP_RTOL`] and validates positivity.
    pub fn new(values: &[f64]) -> Result<Self, SpectrumError> {
        if values.is_empty() {
            return Err(SpectrumError::Empty);
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(SpectrumError::NonPositive(bad));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut eigenvalues: Vec<f64> = Vec::with_capacity(sorted.len());
        for v in sorted {
            match eigenvalues.last() {
                Some(&last) if v - last <= DEDUP_RTOL * v => {}
                _ => eigenvalues.push(v),
            }
        }
        Ok(Self {
            eigenvalues,
            tail: Tail::None,
        })
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_unbounded(&self) -> bool {
        self.tail == Tail::Power
    }

    /// Minimum of the spectrum.
    pub fn s0(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest listed eigenvalue.
    pub fn s_max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn make_spectrum(values: &[f64]) -> Result<SpectrumSpec, SpectrumError> {
    SpectrumSpec::new(values)
}

fn check_generator(length: f64, n_modes: usize) -> Result<(), SpectrumError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(SpectrumError::InvalidParameter(format!(
            "length must be positive, got {length}"
        )));
    }
    if n_modes == 0 {
        return Err(SpectrumError::InvalidParameter(
            "need at least one mode".into(),
        ));
    }
    Ok(())
}

fn laplacian_values(length: f64, n_modes: usize) -> Vec<f64> {
    (1..=n_modes)
        .map(|k| {
            let w = k as f64 * PI / length;
            w * w
        })
        .collect()
}

/// Dirichlet Laplacian on `(0, length)`: `s_k = (kπ/length)²`.
pub fn laplacian_1d(length: f64, n_modes: usize) -> Result<SpectrumSpec, SpectrumError> {
    check_generator(length, n_modes)?;
    Ok(SpectrumSpec::new(&laplacian_values(length, n_modes))?.with_tail(Tail::Power))
}

/// Hinged beam: `s_k = (kπ/length)⁴`, the square of the Laplacian's.
pub fn bilaplacian_1d(length: f64, n_modes: usize) -> Result<SpectrumSpec, SpectrumError> {
    check_generator(length, n_modes)?;
    let values: Vec<f64> = laplacian_values(length, n_modes)
        .into_iter()
        .map(|s| s * s)
        .collect();
    Ok(SpectrumSpec::new(&values)?.with_tail(Tail::Power))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

/// `n` samples of `[min, max]`, used to stand in for a continuous spectrum.
pub fn grid(min: f64, max: f64, n: usize, scale: GridScale) -> Result<SpectrumSpec, SpectrumError> {
    if !(min > 0.0 && max >= min && max.is_finite()) || n == 0 {
        return Err(SpectrumError::InvalidParameter(format!(
            "grid needs 0 < min <= max and n >= 1, got min={min}, max={max}, n={n}"
        )));
    }
    let values: Vec<f64> = if n == 1 {
        vec![min]
    } else {
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                match scale {
                    GridScale::Linear => min + (max - min) * x,
                    GridScale::Log => (min.ln() + (max.ln() - min.ln()) * x).exp(),
                }
            })
            .collect()
    };
    SpectrumSpec::new(&values)
}

/// `inf f`, `sup f(s)/s` and `sup f(s)/√s` over the spectrum.
///
/// `ell` is `+∞` when the damping outgrows `√s` along an unbounded tail;
/// it serializes as `null` in that case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralConstants {
    pub f_inf: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub ell: f64,
}

impl StructuralConstants {
    pub fn is_subdamped(&self) -> bool {
        self.ell < 1.0
    }
}

/// Evaluates `f` on every eigenvalue, enforcing positivity.
pub fn damping_values(spec: &SpectrumSpec, f: &DampingSpec) -> Result<Vec<f64>, SpectrumError> {
    if spec.is_unbounded() && f.family().is_none() {
        return Err(SpectrumError::RejectedTail);
    }
    spec.eigenvalues()
        .iter()
        .map(|&s| {
            f.eval(s)
                .map_err(|source| SpectrumError::Structural { s, source })
        })
        .collect()
}

pub(crate) fn structural_from_values(
    spec: &SpectrumSpec,
    f: &DampingSpec,
    values: &[f64],
) -> StructuralConstants {
    let mut f_inf = f64::INFINITY;
    let mut l: f64 = 0.0;
    let mut ell: f64 = 0.0;
    for (&s, &fs) in spec.eigenvalues().iter().zip(values) {
        f_inf = f_inf.min(fs);
        l = l.max(fs / s);
        ell = ell.max(fs / s.sqrt());
    }
    if spec.is_unbounded() {
        if let Some((a, theta)) = f.family() {
            // f(s)/s = a s^(θ-1) and f(s)/√s = a s^(θ-½) as s → ∞.
            if theta == 1.0 {
                l = l.max(a);
            }
            if theta == 0.5 {
                ell = ell.max(a);
            } else if theta > 0.5 {
                ell = f64::INFINITY;
            }
            if theta == 0.0 {
                f_inf = f_inf.min(a);
            }
        }
    }
    StructuralConstants { f_inf, l, ell }
}

pub fn check_structural(
    spec: &SpectrumSpec,
    f: &DampingSpec,
) -> Result<StructuralConstants, SpectrumError> {
    let values = damping_values(spec, f)?;
    Ok(structural_from_values(spec, f, &values))
}
