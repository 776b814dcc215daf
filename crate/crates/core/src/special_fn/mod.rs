//! Scalar kernel: odd theta function, Kronecker function, first Eisenstein
//! function and Weierstrass `wp`, in the rational, trigonometric and elliptic
//! cases.
//!
//! All three cases share one shape. With `theta` the odd "theta" of the case
//! (`z`, `sinh z` or the genuine odd theta function),
//!
//! ```text
//! phi(eta, z) = theta'(0) theta(eta + z) / (theta(eta) theta(z))
//! E1(z)       = theta'(z) / theta(z)
//! ```
//!
//! and `wp = -E1' + const`. Arguments at which a denominator theta vanishes are
//! rejected with [`Error::SingularArgument`].

mod theta;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use theta::{
    odd_theta_derivs, theta_char, theta_char_derivs, theta_char_with, Characteristic, Modulus,
    TruncationPolicy, MIN_IM_TAU,
};

/// Threshold below which a denominator theta value counts as a pole.
pub const DELTA_SING: f64 = 1e-6;

/// Highest supported derivative order of `wp`.
pub const MAX_WP_ORDER: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CaseKind {
    Rational,
    Trigonometric,
    Elliptic(Modulus),
}

impl CaseKind {
    pub fn elliptic(tau: C64) -> Result<Self> {
        Ok(CaseKind::Elliptic(Modulus::new(tau)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::Rational => "rational",
            CaseKind::Trigonometric => "trigonometric",
            CaseKind::Elliptic(_) => "elliptic",
        }
    }

    pub fn modulus(&self) -> Option<&Modulus> {
        match self {
            CaseKind::Elliptic(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(self, CaseKind::Elliptic(_))
    }
}

/// Evaluator for one case, with the theta constants cached.
///
/// `sampling_margin`, when positive, additionally rejects every pole argument
/// whose distance to the singular lattice is below the margin. The identity
/// sampler uses this to keep accepted points well conditioned.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    case: CaseKind,
    policy: TruncationPolicy,
    theta_prime0: C64,
    wp_shift: C64,
    sampling_margin: f64,
}

impl Kernel {
    pub fn new(case: CaseKind) -> Result<Self> {
        Self::with_policy(case, TruncationPolicy::default())
    }

    pub fn with_policy(case: CaseKind, policy: TruncationPolicy) -> Result<Self> {
        let (theta_prime0, wp_shift) = match &case {
            CaseKind::Elliptic(m) => {
                let d = odd_theta_derivs(C64::new(0.0, 0.0), m, 3, &policy)?;
                (d[1], d[3] / (3.0 * d[1]))
            }
            _ => (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        };
        Ok(Self { case, policy, theta_prime0, wp_shift, sampling_margin: 0.0 })
    }

    pub fn with_sampling_margin(mut self, margin: f64) -> Self {
        self.sampling_margin = margin;
        self
    }

    /// Same kernel with only the pole-value guard active.
    pub fn relaxed(&self) -> Self {
        Self { sampling_margin: 0.0, ..*self }
    }

    pub fn case(&self) -> &CaseKind {
        &self.case
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn sampling_margin(&self) -> f64 {
        self.sampling_margin
    }

    pub fn theta_prime0(&self) -> C64 {
        self.theta_prime0
    }

    /// Odd theta of the case: `z`, `sinh z`, or `theta[1/2; 1/2](z | tau)`.
    pub fn theta(&self, z: C64) -> Result<C64> {
        match &self.case {
            CaseKind::Rational => Ok(z),
            CaseKind::Trigonometric => Ok(z.sinh()),
            CaseKind::Elliptic(m) => Ok(odd_theta_derivs(z, m, 0, &self.policy)?[0]),
        }
    }

    /// Derivatives `0..=max_order` of the odd theta of the case.
    pub fn theta_derivs(&self, z: C64, max_order: usize) -> Result<Vec<C64>> {
        match &self.case {
            CaseKind::Rational => {
                let mut v = vec![C64::new(0.0, 0.0); max_order + 1];
                v[0] = z;
                if max_order >= 1 {
                    v[1] = C64::new(1.0, 0.0);
                }
                Ok(v)
            }
            CaseKind::Trigonometric => {
                let (s, c) = (z.sinh(), z.cosh());
                Ok((0..=max_order).map(|k| if k % 2 == 0 { s } else { c }).collect())
            }
            CaseKind::Elliptic(m) => odd_theta_derivs(z, m, max_order, &self.policy),
        }
    }

    /// Distance from `x` to the nearest pole of the case
    /// (`0`, `i pi Z`, or the lattice `Z + tau Z`).
    pub fn lattice_distance(&self, x: C64) -> f64 {
        match &self.case {
            CaseKind::Rational => x.norm(),
            CaseKind::Trigonometric => {
                let k = (x.im / PI).round();
                C64::new(x.re, x.im - k * PI).norm()
            }
            CaseKind::Elliptic(m) => {
                let tau = m.tau();
                let t = x.im / tau.im;
                let s = x.re - t * tau.re;
                let (t0, s0) = (t.round(), s.round());
                let mut best = f64::INFINITY;
                for dt in -1..=1 {
                    for ds in -1..=1 {
                        let p = C64::new(s0 + ds as f64, 0.0) + tau * (t0 + dt as f64);
                        best = best.min((x - p).norm());
                    }
                }
                best
            }
        }
    }

    /// Theta value at a pole argument, after both guards.
    pub fn pole_theta(&self, x: C64, context: &'static str) -> Result<C64> {
        if self.sampling_margin > 0.0 && self.lattice_distance(x) < self.sampling_margin {
            return Err(Error::singular(context, x));
        }
        let t = self.theta(x)?;
        if t.norm() < DELTA_SING || !t.is_finite() {
            return Err(Error::singular(context, x));
        }
        Ok(t)
    }

    /// Kronecker function `phi(eta, z)`.
    pub fn kronecker(&self, eta: C64, z: C64) -> Result<C64> {
        let te = self.pole_theta(eta, "kronecker eta")?;
        let tz = self.pole_theta(z, "kronecker z")?;
        match &self.case {
            CaseKind::Rational => Ok(1.0 / eta + 1.0 / z),
            CaseKind::Trigonometric => Ok(eta.cosh() / te + z.cosh() / tz),
            CaseKind::Elliptic(_) => Ok(self.theta_prime0 * self.theta(eta + z)? / (te * tz)),
        }
    }

    /// First Eisenstein function `E1(z)`.
    pub fn e1(&self, z: C64) -> Result<C64> {
        let t = self.pole_theta(z, "E1")?;
        match &self.case {
            CaseKind::Rational => Ok(1.0 / z),
            CaseKind::Trigonometric => Ok(z.cosh() / t),
            CaseKind::Elliptic(_) => Ok(self.theta_derivs(z, 1)?[1] / t),
        }
    }

    /// `order`-th derivative of the Weierstrass function.
    pub fn wp(&self, z: C64, order: u32) -> Result<C64> {
        if order > MAX_WP_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let t = self.pole_theta(z, "wp")?;
        match &self.case {
            CaseKind::Rational => {
                let k = order as i32;
                let fact: f64 = (1..=k + 1).map(f64::from).product();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                Ok(sign * fact / z.powi(k + 2))
            }
            CaseKind::Trigonometric => {
                let c = z.cosh() / t;
                Ok(eval_poly(&csch2_derivative_poly(order), c))
            }
            CaseKind::Elliptic(_) => {
                let n = order as usize + 2;
                let d = self.theta_derivs(z, n)?;
                let logd = log_derivatives(&d);
                let mut v = -logd[n];
                if order == 0 {
                    v += self.wp_shift;
                }
                Ok(v)
            }
        }
    }

    /// Section `exp(2 pi i a2 z / N) phi(z, (hbar + a1 + a2 tau) / N)` used by
    /// the Baxter-Belavin matrix.
    pub fn phi_section(&self, a1: i64, a2: i64, n: usize, hbar: C64, z: C64) -> Result<C64> {
        let m = self.case.modulus().ok_or(Error::UnsupportedCase {
            what: "section function",
            case: self.case.name(),
        })?;
        let nf = n as f64;
        let arg = (hbar + a1 as f64 + m.tau() * a2 as f64) / nf;
        let pref = (C64::new(0.0, 2.0 * PI) * a2 as f64 * z / nf).exp();
        Ok(pref * self.kronecker(z, arg)?)
    }
}

/// Derivatives of `log f` of orders `0..len` (index 0 unused) from the
/// derivatives of `f`, via `f^(n) = sum_k C(n-1, k) (log f)^(k+1) f^(n-1-k)`.
fn log_derivatives(d: &[C64]) -> Vec<C64> {
    let n_max = d.len() - 1;
    let mut l = vec![C64::new(0.0, 0.0); n_max + 1];
    for n in 1..=n_max {
        let mut acc = d[n];
        let mut binom = 1.0f64;
        for k in 0..n - 1 {
            acc -= binom * l[k + 1] * d[n - 1 - k];
            binom = binom * (n - 1 - k) as f64 / (k + 1) as f64;
        }
        l[n] = acc / d[0];
    }
    l
}

/// Coefficients (ascending powers of `c = coth z`) of the `order`-th
/// derivative of `1/sinh^2 z = c^2 - 1`, using `dc/dz = 1 - c^2`.
fn csch2_derivative_poly(order: u32) -> Vec<f64> {
    let mut p = vec![-1.0, 0.0, 1.0];
    for _ in 0..order {
        let dp: Vec<f64> = (1..p.len()).map(|k| k as f64 * p[k]).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (k, &a) in dp.iter().enumerate() {
            next[k] += a;
            next[k + 2] -= a;
        }
        p = next;
    }
    p
}

fn eval_poly(coeffs: &[f64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

pub fn kronecker(case: CaseKind, eta: C64, z: C64) -> Result<C64> {
    Kernel::new(case)?.kronecker(eta, z)
}

pub fn eisenstein_e1(case: CaseKind, z: C64) -> Result<C64> {
    Kernel::new(case)?.e1(z)
}

pub fn weierstrass_p(case: CaseKind, z: C64, deriv_order: u32) -> Result<C64> {
    Kernel::new(case)?.wp(z, deriv_order)
}

pub fn phi_section(a1: i64, a2: i64, n: usize, hbar: C64, z: C64, m: Modulus) -> Result<C64> {
    Kernel::new(CaseKind::Elliptic(m))?.phi_section(a1, a2, n, hbar, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cases() -> Vec<CaseKind> {
        vec![
            CaseKind::Rational,
            CaseKind::Trigonometric,
            CaseKind::elliptic(C64::i()).unwrap(),
            CaseKind::elliptic(c(0.3, 0.8)).unwrap(),
        ]
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn rational_values() {
        assert_eq!(kronecker(CaseKind::Rational, c(2.0, 0.0), c(4.0, 0.0)).unwrap(), c(0.75, 0.0));
        assert_eq!(eisenstein_e1(CaseKind::Rational, c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(weierstrass_p(CaseKind::Rational, c(2.0, 0.0), 0).unwrap(), c(0.25, 0.0));
    }

    #[test]
    fn kronecker_vanishes_on_antidiagonal() {
        let k = Kernel::new(CaseKind::elliptic(C64::i()).unwrap()).unwrap();
        let h = c(0.17, 0.05);
        assert!(k.kronecker(h, -h).unwrap().norm() < 1e-13);
    }

    #[test]
    fn kronecker_product_gives_wp_difference() {
        let k = Kernel::new(CaseKind::elliptic(C64::i()).unwrap()).unwrap();
        let (eta, z) = (c(0.21, -0.08), c(-0.13, 0.31));
        let lhs = k.kronecker(eta, z).unwrap() * k.kronecker(eta, -z).unwrap();
        let rhs = k.wp(eta, 0).unwrap() - k.wp(z, 0).unwrap();
        assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn parities() {
        let z = c(0.3, 0.2);
        let w = c(0.4, 0.1);
        for case in cases() {
            let k = Kernel::new(case).unwrap();
            assert!(close(k.e1(-z).unwrap(), -k.e1(z).unwrap(), 1e-13));
            assert!(close(k.wp(-w, 0).unwrap(), k.wp(w, 0).unwrap(), 1e-13));
            assert!(close(k.wp(-w, 1).unwrap(), -k.wp(w, 1).unwrap(), 1e-13));
            assert!(close(k.theta(-z).unwrap(), -k.theta(z).unwrap(), 1e-14));
        }
    }

    #[test]
    fn e1_is_ratio_of_theta_series() {
        let m = Modulus::new(C64::i()).unwrap();
        let k = Kernel::new(CaseKind::Elliptic(m)).unwrap();
        let z = c(0.3, 0.0);
        let ratio = theta_char(Characteristic::ODD, z, &m, 1).unwrap()
            / theta_char(Characteristic::ODD, z, &m, 0).unwrap();
        assert!(close(k.e1(z).unwrap(), ratio, 1e-14));
    }

    #[test]
    fn wp_derivatives_match_central_differences() {
        let h = 1e-5;
        let z = c(0.35, 0.0);
        for case in cases() {
            let k = Kernel::new(case).unwrap();
            for order in 1..=MAX_WP_ORDER {
                let fd = (k.wp(z + h, order - 1).unwrap() - k.wp(z - h, order - 1).unwrap()) / (2.0 * h);
                let d = k.wp(z, order).unwrap();
                assert!(
                    (fd - d).norm() < 1e-7 * d.norm().max(1.0),
                    "{} order {order}: {d} vs {fd}",
                    case.name()
                );
            }
        }
    }

    #[test]
    fn wp_is_minus_e1_derivative_plus_constant() {
        let k = Kernel::new(CaseKind::elliptic(c(0.3, 0.8)).unwrap()).unwrap();
        let h = 1e-5;
        let z1 = c(0.2, 0.1);
        let z2 = c(-0.31, 0.27);
        let de = |z: C64| (k.e1(z + h).unwrap() - k.e1(z - h).unwrap()) / (2.0 * h);
        let c1 = k.wp(z1, 0).unwrap() + de(z1);
        let c2 = k.wp(z2, 0).unwrap() + de(z2);
        assert!((c1 - c2).norm() < 1e-7);
    }

    #[test]
    fn unsupported_order() {
        let k = Kernel::new(CaseKind::Rational).unwrap();
        assert_eq!(k.wp(c(1.0, 0.0), 7), Err(Error::UnsupportedOrder(7)));
    }

    #[test]
    fn singular_arguments_are_rejected() {
        for case in cases() {
            let k = Kernel::new(case).unwrap();
            assert!(matches!(k.kronecker(c(0.2, 0.0), c(0.0, 0.0)), Err(Error::SingularArgument { .. })));
            assert!(matches!(k.e1(c(1e-8, 0.0)), Err(Error::SingularArgument { .. })));
        }
        let k = Kernel::new(CaseKind::elliptic(c(0.3, 0.8)).unwrap()).unwrap();
        assert!(k.kronecker(c(0.2, 0.0), c(1.3, 0.8)).is_err());
        let k = Kernel::new(CaseKind::Trigonometric).unwrap();
        assert!(k.e1(c(0.0, PI)).is_err());
    }

    #[test]
    fn sampling_margin_uses_lattice_distance() {
        let k = Kernel::new(CaseKind::elliptic(C64::i()).unwrap()).unwrap().with_sampling_margin(1e-3);
        assert!(k.kronecker(c(0.3, 0.0), c(1.0 + 5e-4, 1.0)).is_err());
        assert!(k.relaxed().kronecker(c(0.3, 0.0), c(1.0 + 5e-4, 1.0)).is_ok());
        assert!((k.lattice_distance(c(2.0, 3.0 + 1e-3)) - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn sections() {
        let m = Modulus::new(C64::i()).unwrap();
        let k = Kernel::new(CaseKind::Elliptic(m)).unwrap();
        let (h, z) = (c(0.3, 0.0), c(0.2, 0.0));
        assert!(close(phi_section(0, 0, 1, h, z, m).unwrap(), k.kronecker(z, h).unwrap(), 1e-15));
        assert!(close(phi_section(0, 0, 2, h, z, m).unwrap(), k.kronecker(z, c(0.15, 0.0)).unwrap(), 1e-15));
        let direct = (C64::new(0.0, PI) * z).exp() * k.kronecker(z, (h + 1.0 + C64::i()) / 2.0).unwrap();
        assert!(close(phi_section(1, 1, 2, h, z, m).unwrap(), direct, 1e-15));
    }

    #[test]
    fn csch2_polynomials() {
        assert_eq!(csch2_derivative_poly(0), vec![-1.0, 0.0, 1.0]);
        // d/dz (c^2 - 1) = 2c (1 - c^2) = 2c - 2c^3
        assert_eq!(csch2_derivative_poly(1), vec![0.0, 2.0, 0.0, -2.0]);
    }
}
