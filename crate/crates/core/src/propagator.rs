//! Exact single-mode propagators of the damped oscillator.
//!
//! A mode with eigenvalue `s` is written in energy coordinates
//! `(x, y) = (√s·u, u̇)`, so that `x² + y²` is its contribution to the
//! energy and the generator restricted to the mode is
//!
//! ```text
//! M = [  0    √s ]
//!     [ -√s  -2f ]
//! ```
//!
//! With `N = M + f·I` one has `N² = (f² - s)·I`, hence
//! `exp(tM) = e^{-ft} (C(t)·I + S(t)·N)` where `C, S` are the cosine/sine
//! (or cosh/sinh) pair of `√(f² - s)·t`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mode_analysis::{discriminant, DampedSystem};

/// Below this value of `|f² - s|·t²` the `C, S` pair is summed as a series.
const SERIES_BAND: f64 = 1.0;
const SERIES_TERMS: usize = 14;

/// Row-major 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        Mat2::new(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.a11.abs() + self.a12.abs()).max(self.a21.abs() + self.a22.abs())
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        (self.a11 - o.a11)
            .abs()
            .max((self.a12 - o.a12).abs())
            .max((self.a21 - o.a21).abs())
            .max((self.a22 - o.a22).abs())
    }

    /// Both singular values `(σ_max, σ_min)`.
    ///
    /// Uses `σ_max,min = (‖(a11+a22, a12-a21)‖ ± ‖(a11-a22, a12+a21)‖)/2`,
    /// which involves no subtraction of squares.
    pub fn singular_values(&self) -> (f64, f64) {
        let p = (self.a11 + self.a22).hypot(self.a12 - self.a21);
        let q = (self.a11 - self.a22).hypot(self.a12 + self.a21);
        (0.5 * (p + q), 0.5 * (p - q).abs())
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values().0
    }
}

/// The generator of one mode, `[[0, √s], [-√s, -2f]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub s: f64,
    pub f_s: f64,
}

impl ModeMatrix {
    pub fn matrix(&self) -> Mat2 {
        let r = self.s.sqrt();
        Mat2::new(0.0, r, -r, -2.0 * self.f_s)
    }

    /// `(x, y) = (√s·u, v)`.
    pub fn to_energy_coords(&self, u: f64, v: f64) -> [f64; 2] {
        [self.s.sqrt() * u, v]
    }

    pub fn from_energy_coords(&self, z: [f64; 2]) -> (f64, f64) {
        (z[0] / self.s.sqrt(), z[1])
    }
}

/// `P(t) = exp(t·M)` for one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagator2 {
    pub t: f64,
    pub matrix: Mat2,
}

/// `P(t) = e^{log_scale}·matrix` with `matrix` of moderate size, so that
/// decay far below the `f64` range is still representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPropagator {
    pub log_scale: f64,
    pub matrix: Mat2,
}

impl ScaledPropagator {
    pub fn unscaled(&self) -> Mat2 {
        self.matrix.scale(self.log_scale.exp())
    }

    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.matrix.max_singular_value().ln()
    }

    pub fn norm(&self) -> f64 {
        self.log_scale.exp() * self.matrix.max_singular_value()
    }
}

fn cs_series(x: f64, t: f64) -> (f64, f64) {
    // C = Σ x^k/(2k)!,  S = t·Σ x^k/(2k+1)!,  x = (f² - s)t²
    let mut c = 0.0;
    let mut sn = 0.0;
    let mut term_c = 1.0;
    let mut term_s = 1.0;
    for k in 0..SERIES_TERMS {
        c += term_c;
        sn += term_s;
        let k2 = 2.0 * k as f64;
        term_c *= x / ((k2 + 1.0) * (k2 + 2.0));
        term_s *= x / ((k2 + 2.0) * (k2 + 3.0));
    }
    (c, t * sn)
}

/// Closed-form propagator in scaled form.
pub fn propagate_scaled(s: f64, f: f64, t: f64) -> ScaledPropagator {
    debug_assert!(s > 0.0 && f > 0.0 && t >= 0.0);
    let r = s.sqrt();
    let d = discriminant(s, f);
    let x = d * t * t;
    let combine = |c: f64, sn: f64| Mat2::new(c + sn * f, sn * r, -sn * r, c - sn * f);
    if x.abs() <= SERIES_BAND {
        let (c, sn) = cs_series(x, t);
        ScaledPropagator {
            log_scale: -f * t,
            matrix: combine(c, sn),
        }
    } else if d < 0.0 {
        let w = (-d).sqrt();
        let (sin, cos) = (w * t).sin_cos();
        ScaledPropagator {
            log_scale: -f * t,
            matrix: combine(cos, sin / w),
        }
    } else {
        // e^{-ft}(cosh ρt·I + sinh ρt/ρ·N) = e^{-φt}·[...], ρt > 1 here
        let rho = d.sqrt();
        let phi = s / (f + rho);
        let e = (-2.0 * rho * t).exp();
        let fr = f + rho;
        let inv = 0.5 / rho;
        let b = (1.0 - e) * inv;
        ScaledPropagator {
            log_scale: -phi * t,
            matrix: Mat2::new((fr - e * phi) * inv, b * r, -b * r, (e * fr - phi) * inv),
        }
    }
}

/// `exp(t·M_s)` from the closed forms.
pub fn propagate(s: f64, f: f64, t: f64) -> Propagator2 {
    Propagator2 {
        t,
        matrix: propagate_scaled(s, f, t).unscaled(),
    }
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm2(a: &Mat2) -> Mat2 {
    let norm = a.norm_inf();
    let mut squarings = 0;
    let mut scaled = *a;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as i32;
        scaled = a.scale((-squarings as f64).exp2());
    }
    let mut sum = Mat2::IDENTITY;
    let mut term = Mat2::IDENTITY;
    for k in 1..=30 {
        term = term.mul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
        if term.norm_inf() <= 1e-18 * sum.norm_inf() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// Independent reference for [`propagate`]: `expm2(t·M_s)`.
pub fn expm_oracle(s: f64, f: f64, t: f64) -> Propagator2 {
    let m = ModeMatrix { s, f_s: f }.matrix().scale(t);
    Propagator2 {
        t,
        matrix: expm2(&m),
    }
}

/// `‖P_s(t)‖`, the largest singular value.
pub fn mode_norm(s: f64, f: f64, t: f64) -> f64 {
    propagate_scaled(s, f, t).norm()
}

/// `ln ‖P_s(t)‖`, finite even when the norm underflows.
pub fn mode_log_norm(s: f64, f: f64, t: f64) -> f64 {
    propagate_scaled(s, f, t).log_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub t: f64,
    /// `N(t) = ‖S(t)‖ = max_s ‖P_s(t)‖`.
    pub n: f64,
    pub log_n: f64,
    pub argmax_s: f64,
}

/// `N(t)` and its maximizing eigenvalue at each time.
pub fn envelope(system: &DampedSystem, times: &[f64]) -> Vec<EnvelopePoint> {
    times
        .par_iter()
        .map(|&t| {
            let mut best = EnvelopePoint {
                t,
                n: 0.0,
                log_n: f64::NEG_INFINITY,
                argmax_s: system.eigenvalues()[0],
            };
            for (s, f) in system.modes() {
                let log_n = mode_log_norm(s, f, t);
                if log_n > best.log_n {
                    best.log_n = log_n;
                    best.argmax_s = s;
                }
            }
            best.n = best.log_n.exp();
            best
        })
        .collect()
}

/// CSV with header `t,N,argmax_s`, 17 significant digits.
pub fn write_envelope_csv<W: Write>(mut w: W, points: &[EnvelopePoint]) -> std::io::Result<()> {
    writeln!(w, "t,N,argmax_s")?;
    for p in points {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", p.t, p.n, p.argmax_s)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::DampingSpec;
    use crate::mode_analysis::lambdas;
    use crate::spectrum::make_spectrum;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_at_zero() {
        assert_eq!(propagate(1.0, 1.0, 0.0).matrix, Mat2::IDENTITY);
        assert_eq!(expm_oracle(1.0, 1.0, 0.0).matrix, Mat2::IDENTITY);
        for (s, f) in [(1.0, 0.1), (4.0, 7.0), (1e6, 1e3)] {
            assert_eq!(propagate(s, f, 0.0).matrix, Mat2::IDENTITY);
            assert_eq!(mode_norm(s, f, 0.0), 1.0);
        }
    }

    #[test]
    fn matches_oracle_spot_checks() {
        let p = propagate(2.0, 1.0, 1.0).matrix;
        let q = expm_oracle(2.0, 1.0, 1.0).matrix;
        assert!(p.max_abs_diff(&q) <= 1e-11);
        for (s, f) in [
            (1.0, 1.0),
            (3.0, 2.0),
            (1.0, 0.5),
            (0.01, 1.0),
            (100.0, 0.3),
        ] {
            let p = propagate(s, f, 1.0).matrix;
            let q = expm_oracle(s, f, 1.0).matrix;
            assert!(p.max_abs_diff(&q) <= 1e-11, "s={s} f={f}");
        }
    }

    #[test]
    fn liouville() {
        let q = expm_oracle(1.0, 10.0, 1.0).matrix;
        assert!((q.det() / (-20f64).exp() - 1.0).abs() < 1e-8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let s = 10f64.powf(rng.gen_range(-2.0..4.0));
            let f = s.sqrt() * 10f64.powf(rng.gen_range(-1.5..1.5));
            // det = e^{-2ft} emerges from cancellation; keep it above e^{-10}
            let t = rng.gen_range(0.0..(5.0 / f).min(20.0));
            let p = propagate_scaled(s, f, t);
            // det P = e^{2 log_scale} det(matrix)
            let log_det = 2.0 * p.log_scale + p.matrix.det().ln();
            assert!(
                (log_det + 2.0 * f * t).abs() <= 1e-9 * (1.0 + 2.0 * f * t),
                "s={s} f={f} t={t}"
            );
        }
    }

    #[test]
    fn mode_matrix_structure() {
        let m = ModeMatrix { s: 3.0, f_s: 2.0 }.matrix();
        assert_eq!(m.trace(), -4.0);
        assert!((m.det() - 3.0).abs() < 1e-15);
        // eigenvalues of M are λ±: λ² - tr λ + det = 0
        let (lp, lm) = lambdas(3.0, 2.0);
        for l in [lp, lm] {
            assert!((l * l - m.trace() * l + m.det()).norm() < 1e-12);
        }
    }

    #[test]
    fn spectral_mapping() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let s = 10f64.powf(rng.gen_range(-2.0..3.0));
            let f = s.sqrt() * 10f64.powf(rng.gen_range(-1.0..1.0));
            let t = rng.gen_range(0.0..5.0);
            let p = propagate(s, f, t).matrix;
            let (lp, lm) = lambdas(s, f);
            let (ep, em) = ((lp * t).exp(), (lm * t).exp());
            // both are roots of μ² - tr(P) μ + det(P)
            for mu in [ep, em] {
                let res = (mu * mu - p.trace() * mu + p.det()).norm();
                assert!(res <= 1e-9, "s={s} f={f} t={t} res={res}");
            }
        }
    }

    #[test]
    fn contraction_and_dissipation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2000 {
            let s = 10f64.powf(rng.gen_range(-2.0..4.0));
            let f = s.sqrt() * 10f64.powf(rng.gen_range(-2.0..2.0));
            let t = rng.gen_range(0.0..20.0);
            assert!(mode_norm(s, f, t) <= 1.0 + 1e-14);
            let z = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let e = |t: f64| {
                let w = propagate(s, f, t).matrix.apply(z);
                w[0] * w[0] + w[1] * w[1]
            };
            let h = 1e-6;
            assert!(e(t + h) <= e(t) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn subdamped_peak() {
        let a: f64 = 0.5;
        let t0 = std::f64::consts::PI / 3f64.sqrt();
        let peak = ((1.0 + a) / (1.0 - a)).sqrt() * (-a * t0).exp();
        let n = mode_norm(1.0, a, t0);
        assert!((n - peak).abs() <= 1e-12 * peak, "{n} vs {peak}");
    }

    #[test]
    fn critical_norm_closed_form() {
        // e^{t}·P(t) = I + t(M + I) for s = f = 1; its largest singular value is t + √(1+t²)
        for t in [0.5f64, 2.0, 10.0] {
            let want = (t + (1.0 + t * t).sqrt()) * (-t).exp();
            let got = mode_norm(1.0, 1.0, t);
            assert!((got - want).abs() <= 1e-13 * want);
            let oracle = expm_oracle(1.0, 1.0, t).matrix.max_singular_value();
            assert!((got - oracle).abs() <= 1e-11);
        }
    }

    #[test]
    fn log_norm_survives_underflow() {
        let ln = mode_log_norm(1.0, 5.0, 2e4);
        assert!(ln.is_finite() && ln < -700.0 * 2.0);
        assert_eq!(mode_norm(1.0, 5.0, 2e4), 0.0);
        let ln = mode_log_norm(4.0, 1.0, 1e4);
        assert!((ln / 1e4 + 1.0).abs() < 1e-3);
    }

    #[test]
    fn singular_values_of_known_matrices() {
        let (hi, lo) = Mat2::new(3.0, 0.0, 0.0, -2.0).singular_values();
        assert_eq!((hi, lo), (3.0, 2.0));
        let (hi, lo) = Mat2::new(1.0, 1.0, 1.0, 1.0).singular_values();
        assert!((hi - 2.0).abs() < 1e-15 && lo.abs() < 1e-15);
        let (hi, lo) = Mat2::new(0.0, 1.0, -1.0, 0.0).singular_values();
        assert_eq!((hi, lo), (1.0, 1.0));
    }

    #[test]
    fn envelope_examples() {
        let sys = DampedSystem::new(
            make_spectrum(&[1.0]).unwrap(),
            DampingSpec::constant(1.0).unwrap(),
        )
        .unwrap();
        let env = envelope(&sys, &[0.0]);
        assert_eq!(env[0].n, 1.0);
        assert_eq!(env[0].argmax_s, 1.0);

        let sys = DampedSystem::new(
            make_spectrum(&[1.0, 4.0, 9.0]).unwrap(),
            DampingSpec::constant(0.5).unwrap(),
        )
        .unwrap();
        let times: Vec<f64> = (0..1000).map(|i| 40.0 * i as f64 / 999.0).collect();
        for p in envelope(&sys, &times) {
            assert!(
                p.n <= 3f64.sqrt() * (-0.5 * p.t).exp() * (1.0 + 1e-12),
                "t={}",
                p.t
            );
        }
    }

    #[test]
    fn envelope_is_submultiplicative() {
        let sys = DampedSystem::new(
            make_spectrum(&[1.0, 4.0]).unwrap(),
            crate::damping::parse_damping("0.3 + s/5").unwrap(),
        )
        .unwrap();
        let times: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64).collect();
        let env = envelope(&sys, &times);
        for i in 0..env.len() {
            for j in 0..env.len() - i {
                let n_sum = env[i + j].n;
                assert!(n_sum <= env[i].n * env[j].n + 1e-10);
            }
        }
    }

    #[test]
    fn envelope_csv_format() {
        let pts = [EnvelopePoint {
            t: 0.1,
            n: 1.0,
            log_n: 0.0,
            argmax_s: 4.0,
        }];
        let mut out = Vec::new();
        write_envelope_csv(&mut out, &pts).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "t,N,argmax_s\n1.0000000000000001e-1,1.0000000000000000e0,4.0000000000000000e0\n"
        );
    }
}
