//! Per-mode Lyapunov functionals `F` and dissipation terms `G`.
//!
//! Writing `E = s u² + v²` for the energy of one mode, every region has a
//! functional with
//!
//! ```text
//! dF/dt + 2·rate·F + 2G = 0,    G ≥ 0,    lo·E ≤ F ≤ hi·E
//! ```
//!
//! along trajectories, which gives `E(t) ≤ (hi/lo)·E(0)·e^{-2·rate·t}`.
//! `rate` is `m*` in regions 0 to 2 and `m₃(1 - 4√ε)` in region 3.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::damping::DampingSpec;
use crate::error::Result;
use crate::mode_analysis::{AnalysisOptions, DampedSystem};
use crate::partition::{self, damping_ratio, PartitionParams, Region, RESONANT_EPSILON};
use crate::propagator::{propagate_scaled, Mat2, ModeMatrix};
use crate::spectrum::SpectrumSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("mode s = {s} has ratio {ratio}, which lies in region {found:?}, not {expected:?}")]
    RegionMismatch {
        s: f64,
        ratio: f64,
        expected: Region,
        found: Region,
    },
}

/// Coefficients of one mode: `u` and its velocity `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub s: f64,
    pub f_s: f64,
    pub u: f64,
    pub v: f64,
}

impl ModeState {
    pub fn energy(&self) -> f64 {
        self.s * self.u * self.u + self.v * self.v
    }

    /// State at time `t` from the closed-form propagator.
    pub fn evolve(&self, t: f64) -> ModeState {
        let mm = ModeMatrix {
            s: self.s,
            f_s: self.f_s,
        };
        let z = propagate_scaled(self.s, self.f_s, t)
            .unscaled()
            .apply(mm.to_energy_coords(self.u, self.v));
        let (u, v) = mm.from_energy_coords(z);
        ModeState { u, v, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub region: Region,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub params: PartitionParams,
    pub m_ref: f64,
}

/// Decay rate certified by the functional of `region`.
pub fn region_rate(region: Region, params: &PartitionParams, m_ref: f64) -> f64 {
    match region {
        Region::Three => m_ref * (1.0 - 4.0 * params.epsilon.sqrt()),
        _ => m_ref,
    }
}

/// `(F, G)` without the region membership check.
pub fn functional(region: Region, st: &ModeState, epsilon: f64, m: f64) -> (f64, f64) {
    let ModeState { s, f_s: f, u, v } = *st;
    let e = s * u * u + v * v;
    match region {
        Region::Zero => {
            let g = f - 0.5 * m;
            let w = m * u + v;
            (
                e + 2.0 * m * m * u * u + 4.0 * m * u * v,
                m * (s - 2.0 * m * g) * u * u + 2.0 * (g - m) * w * w,
            )
        }
        Region::One => {
            let w = f * u + v;
            (
                e + 2.0 * f * u * v,
                (f - m) * (s - f * f) * u * u + (f - m) * w * w,
            )
        }
        Region::Two => (
            e + 2.0 * (f * f - s) * u * u + 2.0 * f * u * v,
            (s * f + m * s - 2.0 * m * f * f) * u * u + (f - m) * v * v + 2.0 * (s - m * f) * u * v,
        ),
        Region::Three => {
            let r = epsilon.sqrt();
            let a = 1.0 + 4.0 * r;
            let b = 1.0 - 4.0 * r;
            let c = 1.0 - 16.0 * epsilon;
            let p = a * s * f - m * b * s - 8.0 * m * r * c * f * f;
            (
                e + 2.0 * a * f * u * v + 8.0 * r * a * f * f * u * u,
                p * u * u + b * (f - m) * v * v + 2.0 * c * f * (f - m) * u * v,
            )
        }
    }
}

/// Evaluates `E`, `F` and `G` for a mode of `region`.
pub fn eval_f_g(
    state: &ModeState,
    region: Region,
    params: &PartitionParams,
    m_ref: f64,
) -> Result<LyapunovSample, LyapunovError> {
    let ratio = damping_ratio(state.s, state.f_s);
    let found = params.region_of(ratio);
    if found != region {
        return Err(LyapunovError::RegionMismatch {
            s: state.s,
            ratio,
            expected: region,
            found,
        });
    }
    let (f, g) = functional(region, state, params.epsilon, m_ref);
    Ok(LyapunovSample {
        region,
        e: state.energy(),
        f,
        g,
        params: *params,
        m_ref,
    })
}

/// Max over `t_grid` of `|dF/dt + 2·rate·F + 2G|`.
///
/// `dF/dt` is the fourth-order central difference with step `h`; points
/// closer than `2h` to the origin are moved to `2h`.
pub fn verify_identity(
    state0: &ModeState,
    region: Region,
    params: &PartitionParams,
    m_ref: f64,
    t_grid: &[f64],
    h: f64,
) -> f64 {
    let rate = region_rate(region, params, m_ref);
    let eps = params.epsilon;
    let big_f = |t: f64| functional(region, &state0.evolve(t), eps, m_ref).0;
    t_grid
        .iter()
        .map(|&t| {
            let t = t.max(2.0 * h);
            let (f, g) = functional(region, &state0.evolve(t), eps, m_ref);
            let df = (big_f(t - 2.0 * h) - 8.0 * big_f(t - h) + 8.0 * big_f(t + h)
                - big_f(t + 2.0 * h))
                / (12.0 * h);
            (df + 2.0 * rate * f + 2.0 * g).abs()
        })
        .fold(0.0, f64::max)
}

/// `[lo, hi]` with `lo·E ≤ F ≤ hi·E` on the region.
pub fn equivalence_bracket(region: Region, params: &PartitionParams) -> (f64, f64) {
    let eps = params.epsilon;
    match region {
        Region::Zero => (0.5, 1.5),
        Region::One => (eps, 2.0 - eps),
        Region::Two => (eps / 3.0, 3.0 * params.k * params.k),
        Region::Three => (eps, 8.0),
    }
}

/// Constant of the energy estimate `E(t) ≤ C·E(0)·e^{-2·rate·t}`.
pub fn lemma_constant(region: Region, params: &PartitionParams) -> f64 {
    let eps = params.epsilon;
    match region {
        Region::Zero => 3.0,
        Region::One => (2.0 - eps) / eps,
        Region::Two => 9.0 * params.k * params.k / eps,
        Region::Three => 8.0 / eps,
    }
}

/// `m*` for regions 0 to 2, `m₃(ε)` for region 3.
pub fn reference_rate(system: &DampedSystem, region: Region, params: &PartitionParams) -> f64 {
    match region {
        Region::Three => partition::m3(system, params.epsilon),
        _ => system.m_star(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub region: Region,
    pub worst_ratio: f64,
    pub constant: f64,
    pub rate: f64,
    pub n_modes: usize,
    pub n_trials: usize,
    /// No eigenvalue in the region; the estimate holds trivially.
    pub vacuous: bool,
    pub pass: bool,
}

fn trial_rng(seed: u64, region: Region, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((region.index() as u64) << 32) | trial as u64);
    rng
}

/// Worst `E_region(t)·e^{2·rate·t}/E_region(0)` over random data supported
/// on the region, compared with [`lemma_constant`] up to `rel_tol`.
pub fn verify_lemma(
    system: &DampedSystem,
    params: &PartitionParams,
    region: Region,
    n_trials: usize,
    t_grid: &[f64],
    seed: u64,
    rel_tol: f64,
) -> LemmaOutcome {
    let members = partition::assign_regions(system, params).members(region);
    let constant = lemma_constant(region, params);
    let m_ref = reference_rate(system, region, params);
    let rate = region_rate(region, params, m_ref);
    if members.is_empty() {
        return LemmaOutcome {
            region,
            worst_ratio: 0.0,
            constant,
            rate: if rate.is_finite() { rate } else { 0.0 },
            n_modes: 0,
            n_trials,
            vacuous: true,
            pass: true,
        };
    }
    let eig = system.eigenvalues();
    let fv = system.f_values();
    // e^{rate·t}·P_s(t); the exponent is ≤ 0 because rate ≤ φ(s) on the region
    let weighted: Vec<Vec<Mat2>> = members
        .iter()
        .map(|&i| {
            t_grid
                .iter()
                .map(|&t| {
                    let p = propagate_scaled(eig[i], fv[i], t);
                    p.matrix.scale((p.log_scale + rate * t).exp())
                })
                .collect()
        })
        .collect();
    let worst = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, region, trial);
            let z0: Vec<[f64; 2]> = members
                .iter()
                .map(|_| [rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)])
                .collect();
            let e0: f64 = z0.iter().map(|z| z[0] * z[0] + z[1] * z[1]).sum();
            if e0 == 0.0 {
                return 0.0;
            }
            (0..t_grid.len())
                .map(|k| {
                    let et: f64 = weighted
                        .iter()
                        .zip(&z0)
                        .map(|(row, &z)| {
                            let w = row[k].apply(z);
                            w[0] * w[0] + w[1] * w[1]
                        })
                        .sum();
                    et / e0
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    LemmaOutcome {
        region,
        worst_ratio: worst,
        constant,
        rate,
        n_modes: members.len(),
        n_trials,
        vacuous: false,
        pass: worst <= constant * (1.0 + rel_tol),
    }
}

/// Constants of `‖S(t)‖ ≤ C_norm·(1+t)^{poly_factor}·e^{-rate_norm·t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub rate_norm: f64,
    #[serde(rename = "C_norm")]
    pub c_norm: f64,
    #[serde(rename = "C_energy")]
    pub c_energy: f64,
    pub poly_factor: u8,
    #[serde(rename = "sharp_subdamped_C")]
    pub sharp_subdamped_c: Option<f64>,
    #[serde(rename = "K_used")]
    pub k_used: f64,
    pub eps_used: f64,
}

impl CertifiedBound {
    /// `ln` of the bound at time `t`.
    pub fn log_bound(&self, t: f64) -> f64 {
        self.c_norm.ln() + f64::from(self.poly_factor) * t.ln_1p() - self.rate_norm * t
    }
}

/// `√((1+ℓ)/(1-ℓ))`, the attained constant of a subdamped system.
pub fn sharp_subdamped_constant(ell: f64) -> Option<f64> {
    (ell < 1.0).then(|| ((1.0 + ell) / (1.0 - ell)).sqrt())
}

/// Certificate for `system`. `opts.k` and `opts.epsilon` override the
/// admissible choices.
pub fn certify(system: &DampedSystem, opts: &AnalysisOptions) -> Result<CertifiedBound> {
    let m = system.m_star();
    let k = opts
        .k
        .unwrap_or_else(|| partition::admissible_k_for(system));
    let resonant = system.resonance(opts.resonance_tol).is_some();
    let eps = match opts.epsilon {
        Some(e) => Some(e),
        None if resonant => None,
        None => partition::admissible_epsilon(system, m, false)?,
    };
    let (c_energy, poly_factor, eps_used) = match eps {
        Some(e) if !resonant => (9.0 * k * k / e, 0, e),
        other => {
            let e = other.unwrap_or(RESONANT_EPSILON);
            (9.0 * k * k / e * (8.0 * m * e.sqrt()).exp(), 1, e)
        }
    };
    PartitionParams::new(k, eps_used)?;
    Ok(CertifiedBound {
        rate_norm: m,
        c_norm: c_energy.sqrt(),
        c_energy,
        poly_factor,
        sharp_subdamped_c: sharp_subdamped_constant(system.structural().ell),
        k_used: k,
        eps_used,
    })
}

pub fn certified_constant(spec: &SpectrumSpec, f: &DampingSpec) -> Result<CertifiedBound> {
    let system = DampedSystem::new(spec.clone(), f.clone())?;
    certify(&system, &AnalysisOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::make_spectrum;

    fn system(values: &[f64], f: DampingSpec) -> DampedSystem {
        DampedSystem::new(make_spectrum(values).unwrap(), f).unwrap()
    }

    fn scale(st: &ModeState, m: f64) -> f64 {
        (st.s + st.f_s * st.f_s + m * m + 1.0) * (st.f_s + m + 1.0) * (st.u * st.u + st.v * st.v)
    }

    fn random_state(rng: &mut ChaCha8Rng, s: f64, f: f64) -> ModeState {
        ModeState {
            s,
            f_s: f,
            u: rng.gen_range(-1.0..=1.0),
            v: rng.gen_range(-1.0..=1.0),
        }
    }

    #[test]
    fn zero_state_is_trivial() {
        let p = PartitionParams::new(2.0, 0.25).unwrap();
        let st = ModeState {
            s: 4.0,
            f_s: 0.5,
            u: 0.0,
            v: 0.0,
        };
        let smp = eval_f_g(&st, Region::One, &p, 0.5).unwrap();
        assert_eq!((smp.e, smp.f, smp.g), (0.0, 0.0, 0.0));
        assert_eq!(
            verify_identity(&st, Region::One, &p, 0.5, &[0.0, 1.0, 2.0], 1e-4),
            0.0
        );
    }

    #[test]
    fn region_one_example() {
        let p = PartitionParams::new(2.0, 0.25).unwrap();
        let st = ModeState {
            s: 4.0,
            f_s: 0.5,
            u: 1.0,
            v: 0.0,
        };
        let smp = eval_f_g(&st, Region::One, &p, 0.5).unwrap();
        assert_eq!((smp.e, smp.f, smp.g), (4.0, 4.0, 0.0));
    }

    #[test]
    fn region_mismatch_is_reported() {
        let p = PartitionParams::new(2.0, 0.25).unwrap();
        let st = ModeState {
            s: 1.0,
            f_s: 1.0,
            u: 1.0,
            v: 0.0,
        };
        let err = eval_f_g(&st, Region::One, &p, 1.0).unwrap_err();
        assert!(matches!(
            err,
            LyapunovError::RegionMismatch {
                found: Region::Three,
                ..
            }
        ));
    }

    #[test]
    fn g0_is_nonnegative_for_strong_damping() {
        // ratio 10 lies above K = 2; G₀ vanishes in the u² term when m = φ(s)
        let sys = system(&[1.0], DampingSpec::constant(10.0).unwrap());
        let m = sys.m_star();
        let p = PartitionParams::new(2.0, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let st = random_state(&mut rng, 1.0, 10.0);
            let smp = eval_f_g(&st, Region::Zero, &p, m).unwrap();
            assert!(smp.g >= -1e-12 * scale(&st, m));
        }
    }

    fn random_system(rng: &mut ChaCha8Rng) -> DampedSystem {
        let n = rng.gen_range(1..40);
        let values: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
            .collect();
        let a = 10f64.powf(rng.gen_range(-1.5..1.5));
        let theta = rng.gen_range(0.0..=1.0);
        system(&values, DampingSpec::power(a, theta).unwrap())
    }

    #[test]
    fn dissipation_is_nonnegative_and_brackets_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let sys = random_system(&mut rng);
            let k = partition::admissible_k_for(&sys);
            let eps = rng.gen_range(0.001..0.0625);
            let p = PartitionParams::new(k, eps).unwrap();
            let asg = partition::assign_regions(&sys, &p);
            for ((s, f), &region) in sys.modes().zip(asg.regions()) {
                let m = reference_rate(&sys, region, &p);
                let (lo, hi) = equivalence_bracket(region, &p);
                for _ in 0..20 {
                    let st = random_state(&mut rng, s, f);
                    let smp = eval_f_g(&st, region, &p, m).unwrap();
                    assert!(smp.g >= -1e-12 * scale(&st, m), "{region:?} s={s} f={f}");
                    assert!(smp.f >= lo * smp.e * (1.0 - 1e-12) - 1e-300);
                    assert!(smp.f <= hi * smp.e * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn region_one_and_two_brackets_for_large_epsilon() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let eps = rng.gen_range(0.01..0.99);
            let k = rng.gen_range(2.0..30.0);
            let p = PartitionParams::new(k, eps).unwrap();
            let s = 10f64.powf(rng.gen_range(-2.0..2.0));
            let (region, ratio) = if rng.gen_bool(0.5) {
                (Region::One, rng.gen_range(0.0..=1.0 - eps))
            } else {
                (Region::Two, rng.gen_range(1.0 + eps..=k))
            };
            if ratio == 0.0 {
                continue;
            }
            let st = random_state(&mut rng, s, ratio * s.sqrt());
            let (lo, hi) = equivalence_bracket(region, &p);
            let smp = eval_f_g(&st, region, &p, 0.0).unwrap();
            assert!(smp.f >= lo * smp.e * (1.0 - 1e-12));
            assert!(smp.f <= hi * smp.e * (1.0 + 1e-12));
        }
    }

    #[test]
    fn varrho_is_positive() {
        for i in 1..1000 {
            let e = i as f64 / 1000.0;
            assert!(2.0 * e * (6.0 - e - 3.0 * e * e) / (3.0 * (3.0 - e)) > 0.0);
        }
    }

    #[test]
    fn near_critical_bracket_quantity_is_positive() {
        for i in 1..1000 {
            let e = 0.0625 * i as f64 / 1000.0;
            let r = e.sqrt();
            let q = (1.0 - e) / ((1.0 + e) * (1.0 + e)) + 8.0 * r * (1.0 + 4.0 * r)
                - (1.0 + 4.0 * r) * (1.0 + 4.0 * r) / (1.0 - e);
            assert!(q > 0.0, "eps = {e}");
        }
    }

    #[test]
    fn identity_holds_along_trajectories() {
        let pend = ModeState {
            s: 1.0,
            f_s: 1.0,
            u: 1.0,
            v: 0.0,
        };
        let p3 = PartitionParams::new(2.0, 0.05).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| 0.5 * i as f64).collect();
        let r = verify_identity(&pend, Region::Three, &p3, 1.0, &grid, 1e-4);
        let f0 = functional(Region::Three, &pend, 0.05, 1.0).0;
        assert!(r <= 1e-6 * f0, "{r}");

        let st = ModeState {
            s: 1.0,
            f_s: 2.0,
            u: 0.0,
            v: 1.0,
        };
        let p2 = PartitionParams::new(2.0, 0.5).unwrap();
        let m = crate::mode_analysis::phi(1.0, 2.0);
        let r = verify_identity(&st, Region::Two, &p2, m, &grid, 1e-4);
        let f0 = functional(Region::Two, &st, 0.5, m).0;
        assert!(r <= 1e-6 * f0, "{r}");
    }

    #[test]
    fn gronwall_bound_along_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid: Vec<f64> = (0..=200).map(|i| 0.25 * i as f64).collect();
        for _ in 0..100 {
            let sys = random_system(&mut rng);
            let p = PartitionParams::new(partition::admissible_k_for(&sys), 0.03).unwrap();
            let asg = partition::assign_regions(&sys, &p);
            for ((s, f), &region) in sys.modes().zip(asg.regions()) {
                let m = reference_rate(&sys, region, &p);
                let rate = region_rate(region, &p, m);
                let st0 = random_state(&mut rng, s, f);
                let f0 = functional(region, &st0, p.epsilon, m).0;
                for &t in &grid {
                    let ft = functional(region, &st0.evolve(t), p.epsilon, m).0;
                    let bound = f0 * (-2.0 * rate * t).exp();
                    assert!(
                        ft <= bound * (1.0 + 1e-9) + 1e-300,
                        "{region:?} s={s} f={f} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn lemma_one_example() {
        let sys = system(&[1.0, 4.0, 9.0], DampingSpec::constant(0.4).unwrap());
        let p = PartitionParams::new(2.0, 0.5).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 0.1 * i as f64).collect();
        let out = verify_lemma(&sys, &p, Region::One, 1000, &grid, 7, 1e-10);
        assert!(!out.vacuous && out.pass);
        assert!(out.worst_ratio <= 3.0 && out.worst_ratio > 1.0);
    }

    #[test]
    fn lemma_zero_example() {
        // with admissible K the strongly damped mode s = 0.01 sits in region 2
        let sys = system(&[0.01], DampingSpec::constant(1.0).unwrap());
        let p = PartitionParams::new(partition::admissible_k_for(&sys), 0.25).unwrap();
        let grid: Vec<f64> = (0..=400).map(|i| 0.25 * i as f64).collect();
        let out = verify_lemma(&sys, &p, Region::Zero, 200, &grid, 7, 1e-10);
        assert!(out.vacuous && out.pass && out.worst_ratio <= 3.0);

        // f = s: K = 8 and region 0 holds every s > 64
        let sys = system(
            &[100.0, 400.0, 1000.0],
            DampingSpec::power(1.0, 1.0).unwrap(),
        );
        let p = PartitionParams::new(partition::admissible_k_for(&sys), 0.25).unwrap();
        let grid: Vec<f64> = (0..=2000)
            .map(|i| 1e-3 * i as f64 + 1e-6 * (i * i) as f64)
            .collect();
        let out = verify_lemma(&sys, &p, Region::Zero, 500, &grid, 7, 1e-10);
        assert_eq!(out.n_modes, 3);
        assert!(out.pass && out.worst_ratio >= 1.0, "{out:?}");
    }

    #[test]
    fn empty_region_is_vacuous() {
        let sys = system(&[1.0, 4.0, 9.0], DampingSpec::constant(0.4).unwrap());
        let p = PartitionParams::new(2.0, 0.5).unwrap();
        let out = verify_lemma(&sys, &p, Region::Zero, 10, &[0.0, 1.0], 7, 1e-10);
        assert!(out.vacuous && out.pass);
        assert_eq!(out.worst_ratio, 0.0);
    }

    #[test]
    fn lemma_runs_are_deterministic() {
        let sys = system(&[0.3, 1.0, 2.0, 5.0], DampingSpec::constant(0.7).unwrap());
        let p = PartitionParams::new(2.0, 0.2).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| 0.3 * i as f64).collect();
        let a = verify_lemma(&sys, &p, Region::One, 64, &grid, 11, 1e-10);
        let b = verify_lemma(&sys, &p, Region::One, 64, &grid, 11, 1e-10);
        assert_eq!(a, b);
    }

    #[test]
    fn certificate_examples() {
        let spec = make_spectrum(&[1.0, 4.0, 9.0]).unwrap();
        let f = DampingSpec::constant(0.5).unwrap();
        let opts = AnalysisOptions {
            k: Some(2.0),
            epsilon: Some(1.0 / 32.0),
            ..Default::default()
        };
        let sys = DampedSystem::new(spec.clone(), f.clone()).unwrap();
        let c = certify(&sys, &opts).unwrap();
        assert_eq!(c.c_energy, 1152.0);
        assert!((c.c_norm - 33.941_125_496_954_28).abs() < 1e-12);
        assert_eq!(c.poly_factor, 0);
        assert_eq!(c.rate_norm, 0.5);
        let sharp = c.sharp_subdamped_c.unwrap();
        assert!((sharp - 3f64.sqrt()).abs() < 1e-15);

        let pend = certified_constant(
            &make_spectrum(&[1.0]).unwrap(),
            &DampingSpec::constant(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(pend.poly_factor, 1);
        assert_eq!(pend.rate_norm, 1.0);
        assert_eq!(pend.eps_used, RESONANT_EPSILON);
        let expect = 9.0 * pend.k_used * pend.k_used * 32.0 * (8.0 * (1.0f64 / 32.0).sqrt()).exp();
        assert!((pend.c_energy - expect).abs() <= 1e-12 * expect);
        assert!(pend.sharp_subdamped_c.is_none());
    }
}
