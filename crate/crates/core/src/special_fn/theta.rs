//! Theta functions with rational characteristics, summed as q-series.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted `Im(tau)`. Closer to the real axis the nome tends to one
/// and the series needs more terms than the truncation policy allows.
pub const MIN_IM_TAU: f64 = 0.05;

/// Modular parameter of the elliptic curve `C / (Z + tau Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulus {
    tau: C64,
    nome: C64,
}

impl Modulus {
    pub fn new(tau: C64) -> Result<Self> {
        if !(tau.im >= MIN_IM_TAU) {
            return Err(Error::InvalidModulus { im_tau: tau.im, floor: MIN_IM_TAU });
        }
        let nome = (C64::i() * 2.0 * PI * tau).exp();
        Ok(Self { tau, nome })
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    /// `q = exp(2 pi i tau)`.
    pub fn nome(&self) -> C64 {
        self.nome
    }

    /// The modulus `k * tau`, used by the intertwiner thetas.
    pub fn scaled(&self, k: usize) -> Result<Self> {
        Self::new(self.tau * k as f64)
    }
}

/// Stopping rule for the symmetric q-series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// A ring of terms is negligible once its magnitude drops below
    /// `abs_floor` times the largest term seen so far.
    pub abs_floor: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { abs_floor: 1e-16, max_terms: 500 }
    }
}

impl TruncationPolicy {
    pub fn new(abs_floor: f64, max_terms: usize) -> Result<Self> {
        if !(abs_floor > 0.0) || max_terms < 3 {
            return Err(Error::InvalidPlan(format!(
                "truncation policy needs abs_floor > 0 and max_terms >= 3, got {abs_floor} and {max_terms}"
            )));
        }
        Ok(Self { abs_floor, max_terms })
    }
}

/// Characteristic `[a; b]` with `a, b` in `(1/den) Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Characteristic {
    a_num: i64,
    b_num: i64,
    den: i64,
}

impl Characteristic {
    /// The odd theta function `[1/2; 1/2]`.
    pub const ODD: Characteristic = Characteristic { a_num: 1, b_num: 1, den: 2 };

    pub fn new(a_num: i64, b_num: i64, den: i64) -> Self {
        assert!(den > 0, "characteristic denominator must be positive");
        Self { a_num, b_num, den }
    }

    pub fn a(&self) -> f64 {
        self.a_num as f64 / self.den as f64
    }

    pub fn b(&self) -> f64 {
        self.b_num as f64 / self.den as f64
    }

    pub fn denominator(&self) -> i64 {
        self.den
    }
}

/// `deriv`-th z-derivative of `theta[a; b](z | tau)`.
pub fn theta_char(chr: Characteristic, z: C64, m: &Modulus, deriv: u32) -> Result<C64> {
    theta_char_with(chr, z, m, deriv, &TruncationPolicy::default())
}

pub fn theta_char_with(
    chr: Characteristic,
    z: C64,
    m: &Modulus,
    deriv: u32,
    policy: &TruncationPolicy,
) -> Result<C64> {
    let all = theta_char_derivs(chr, z, m, deriv as usize, policy)?;
    Ok(all[deriv as usize])
}

/// All derivatives of orders `0..=max_order` from one pass over the series.
///
/// Each term is `exp(pi i n^2 tau + 2 pi i n (z + b))` with `n = j + a`, so its
/// k-th derivative is the same exponential times `(2 pi i n)^k`.
pub fn theta_char_derivs(
    chr: Characteristic,
    z: C64,
    m: &Modulus,
    max_order: usize,
    policy: &TruncationPolicy,
) -> Result<Vec<C64>> {
    let a = chr.a();
    let shifted = z + chr.b();
    let tau = m.tau();
    let two_pi_i = C64::new(0.0, 2.0 * PI);

    let mut sums = vec![C64::new(0.0, 0.0); max_order + 1];
    let mut running_max = 0.0f64;

    let add_term = |j: i64, sums: &mut [C64]| -> f64 {
        let n = j as f64 + a;
        let base = (C64::new(0.0, PI) * n * n * tau + two_pi_i * n * shifted).exp();
        let factor = two_pi_i * n;
        let mut term = base;
        let mut mag = 0.0f64;
        for s in sums.iter_mut() {
            *s += term;
            mag = mag.max(term.norm());
            term *= factor;
        }
        mag
    };

    let first = add_term(0, &mut sums);
    running_max = running_max.max(first);
    for ring in 1..=policy.max_terms as i64 {
        let ring_mag = add_term(ring, &mut sums) + add_term(-ring, &mut sums);
        running_max = running_max.max(ring_mag);
        if !ring_mag.is_finite() {
            return Err(Error::TruncationFailure { max_terms: policy.max_terms });
        }
        if ring_mag <= policy.abs_floor * running_max {
            return Ok(sums);
        }
    }
    Err(Error::TruncationFailure { max_terms: policy.max_terms })
}

/// Derivatives `0..=max_order` of the odd theta `theta[1/2; 1/2]`, accurate
/// relative to the value near the lattice zeros.
///
/// The argument is reduced to `z0 = z - s - t tau` in the cell around the
/// nearest lattice point and the sine series
/// `-2 sum_k (-1)^k exp(pi i (k + 1/2)^2 tau) sin((2k + 1) pi z0)` is summed
/// there. The quasi-periodicity factor `(-1)^(s+t) exp(-pi i t^2 tau - 2 pi i t z0)`
/// is applied with the Leibniz rule.
pub fn odd_theta_derivs(z: C64, m: &Modulus, max_order: usize, policy: &TruncationPolicy) -> Result<Vec<C64>> {
    let tau = m.tau();
    let t = (z.im / tau.im).round();
    let s = (z - tau * t).re.round();
    let z0 = z - s - tau * t;
    let i_pi = C64::new(0.0, PI);

    let mut local = vec![C64::new(0.0, 0.0); max_order + 1];
    let mut running_max = 0.0f64;
    let mut converged = false;
    for k in 0..policy.max_terms {
        let w = (2 * k + 1) as f64 * PI;
        let half = k as f64 + 0.5;
        let sign = if k % 2 == 0 { -2.0 } else { 2.0 };
        let coeff = (i_pi * half * half * tau).exp() * sign;
        let (sn, cs) = ((w * z0).sin(), (w * z0).cos());
        let mut mag = 0.0f64;
        let mut scale = 1.0f64;
        for (j, slot) in local.iter_mut().enumerate() {
            let wave = match j % 4 {
                0 => sn,
                1 => cs,
                2 => -sn,
                _ => -cs,
            };
            let term = coeff * wave * scale;
            *slot += term;
            mag = mag.max((coeff * scale).norm() * (1.0 + wave.norm()));
            scale *= w;
        }
        if !mag.is_finite() {
            return Err(Error::TruncationFailure { max_terms: policy.max_terms });
        }
        running_max = running_max.max(mag);
        if k > 0 && mag <= policy.abs_floor * running_max {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::TruncationFailure { max_terms: policy.max_terms });
    }
    if t == 0.0 && s == 0.0 {
        return Ok(local);
    }

    let parity = if (s + t).rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    let factor = (-i_pi * t * t * tau - 2.0 * i_pi * t * z0).exp() * parity;
    let rate = -2.0 * i_pi * t;
    let mut out = vec![C64::new(0.0, 0.0); max_order + 1];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut binom = 1.0f64;
        let mut acc = C64::new(0.0, 0.0);
        for (i, li) in local.iter().enumerate().take(j + 1) {
            acc += li * rate.powu((j - i) as u32) * binom;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        *slot = factor * acc;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Plain summation over a fixed window, independent of the ring logic.
    fn brute(chr: Characteristic, z: C64, tau: C64, window: i64) -> C64 {
        (-window..=window)
            .map(|j| {
                let n = j as f64 + chr.a();
                (C64::new(0.0, PI) * n * n * tau + C64::new(0.0, 2.0 * PI) * n * (z + chr.b())).exp()
            })
            .sum()
    }

    #[test]
    fn odd_theta_vanishes_at_origin() {
        let m = Modulus::new(C64::i()).unwrap();
        let v = theta_char(Characteristic::ODD, c(0.0, 0.0), &m, 0).unwrap();
        assert!(v.norm() < 1e-15, "{v}");
    }

    #[test]
    fn odd_theta_is_odd() {
        let m = Modulus::new(C64::i()).unwrap();
        let z = c(0.3, 0.1);
        let p = theta_char(Characteristic::ODD, z, &m, 0).unwrap();
        let q = theta_char(Characteristic::ODD, -z, &m, 0).unwrap();
        assert!((p + q).norm() < 1e-15);
    }

    #[test]
    fn unit_shift_multiplies_by_character() {
        let m = Modulus::new(C64::i()).unwrap();
        let chr = Characteristic::new(1, 3, 6);
        let z = c(0.21, -0.13);
        let lhs = theta_char(chr, z + 1.0, &m, 0).unwrap();
        let rhs = (C64::i() * 2.0 * PI / 6.0).exp() * theta_char(chr, z, &m, 0).unwrap();
        assert!((lhs - rhs).norm() < 1e-14 * rhs.norm().max(1.0));
    }

    #[test]
    fn matches_brute_force_window() {
        let m = Modulus::new(C64::i()).unwrap();
        let v = theta_char(Characteristic::ODD, c(0.3, 0.0), &m, 0).unwrap();
        let b = brute(Characteristic::ODD, c(0.3, 0.0), C64::i(), 60);
        assert!((v - b).norm() < 1e-14, "{v} vs {b}");

        let tau = c(0.3, 0.8);
        let m = Modulus::new(tau).unwrap();
        let chr = Characteristic::new(-1, 1, 6);
        let z = c(-0.35, 0.4);
        let v = theta_char(chr, z, &m, 0).unwrap();
        let b = brute(chr, z, tau, 60);
        assert!((v - b).norm() < 1e-14 * b.norm().max(1.0));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Modulus::new(c(0.3, 0.8)).unwrap();
        let z = c(0.17, -0.22);
        let h = 1e-5;
        let pol = TruncationPolicy::default();
        let d = theta_char_derivs(Characteristic::ODD, z, &m, 3, &pol).unwrap();
        for (k, dk) in d.iter().enumerate().skip(1) {
            let fwd = theta_char_derivs(Characteristic::ODD, z + h, &m, 3, &pol).unwrap()[k - 1];
            let bwd = theta_char_derivs(Characteristic::ODD, z - h, &m, 3, &pol).unwrap()[k - 1];
            let fd = (fwd - bwd) / (2.0 * h);
            assert!((fd - dk).norm() < 1e-7 * dk.norm().max(1.0), "order {k}");
        }
    }

    #[test]
    fn rejects_small_imaginary_part() {
        assert!(matches!(Modulus::new(c(0.0, 0.01)), Err(Error::InvalidModulus { .. })));
    }

    #[test]
    fn reports_truncation_failure() {
        let m = Modulus::new(c(0.0, MIN_IM_TAU)).unwrap();
        let pol = TruncationPolicy::new(1e-16, 3).unwrap();
        let r = theta_char_with(Characteristic::ODD, c(0.1, 0.0), &m, 0, &pol);
        assert_eq!(r, Err(Error::TruncationFailure { max_terms: 3 }));
    }

    #[test]
    fn sine_series_matches_exponential_series() {
        let policy = TruncationPolicy::default();
        for tau in [c(0.0, 1.0), c(0.3, 0.8), c(-0.45, 0.6)] {
            let m = Modulus::new(tau).unwrap();
            for z in [c(0.2, 0.1), c(1.7, -0.3), c(-0.6, 1.9), c(2.3, 2.2)] {
                let a = odd_theta_derivs(z, &m, 4, &policy).unwrap();
                let b = theta_char_derivs(Characteristic::ODD, z, &m, 4, &policy).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).norm() <= 1e-12 * (1.0 + y.norm()), "{tau} {z}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn sine_series_is_relatively_accurate_near_lattice_zeros() {
        let tau = c(0.3, 0.8);
        let m = Modulus::new(tau).unwrap();
        let policy = TruncationPolicy::default();
        let d = odd_theta_derivs(c(0.0, 0.0), &m, 3, &policy).unwrap();
        for lattice in [c(0.0, 0.0), c(1.0, 0.0), tau, tau * 2.0 - 1.0] {
            for eps in [c(1e-9, 2e-9), c(-3e-7, 1e-7)] {
                let z = lattice + eps;
                let v = odd_theta_derivs(z, &m, 0, &policy).unwrap()[0];
                let (sn, tn) = ((lattice.re - lattice.im / tau.im * tau.re).round(), (lattice.im / tau.im).round());
                let eps = z - sn - tau * tn;
                let sign = if (sn + tn).rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
                let local = d[1] * eps + d[3] * eps * eps * eps / 6.0;
                let expected = local * sign * (C64::new(0.0, -PI) * tn * tn * tau - C64::new(0.0, 2.0 * PI) * tn * eps).exp();
                assert!((v - expected).norm() <= 1e-14 * expected.norm(), "{lattice} {eps}: {v} vs {expected}");
            }
        }
    }
}
