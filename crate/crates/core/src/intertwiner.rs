//! IRF-Vertex intertwiner `g(z, u)`, residues at `z = 0`, and operators with
//! dynamical shifts conditioned on tensor legs.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::rmatrices::DynVector;
use crate::special_fn::{theta_char_with, Characteristic, Kernel};
use crate::tensor_alg::{embed, ComplexMatrix, TensorOperator};

/// Radii used by [`g_breve_residue`] and the residue checks.
pub const RESIDUE_RADII: (f64, f64) = (1e-4, 5e-5);

/// Largest accepted disagreement between the two single-radius estimates,
/// relative to the size of the result.
pub const RESIDUE_AGREEMENT: f64 = 1e-6;

fn elliptic_modulus(kernel: &Kernel) -> Result<crate::special_fn::Modulus> {
    kernel.case().modulus().copied().ok_or(Error::UnsupportedCase {
        what: "intertwiner",
        case: kernel.case().name(),
    })
}

/// The intertwining matrix
///
/// ```text
/// g_ij(z, u) = θ[1/2 - i/N, N/2](z + N u_j - Σ_m u_m | Nτ) / Π_{k≠j} ϑ(u_k - u_j)
/// ```
///
/// with `i, j = 1..N`. The second characteristic `N/2` equals `1/2` mod 1
/// for odd `N` and `0` for even `N`; with `1/2` at even `N` the matrix is
/// degenerate for all `z`.
pub fn g_matrix(kernel: &Kernel, n: usize, z: C64, u: &DynVector) -> Result<ComplexMatrix> {
    let m = elliptic_modulus(kernel)?;
    if u.len() != n {
        return Err(Error::InvalidDynVector(format!("expected {n} components, got {}", u.len())));
    }
    let mn = m.scaled(n)?;
    let sum = u.sum();
    let ni = n as i64;
    let mut denoms = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = C64::new(1.0, 0.0);
        for k in (0..n).filter(|&k| k != j) {
            d *= kernel.pole_theta(u.diff(k, j), "intertwiner denominator")?;
        }
        denoms.push(d);
    }
    let mut g = ComplexMatrix::zeros(n);
    for i in 1..=n {
        let chr = Characteristic::new(ni - 2 * i as i64, ni * ni, 2 * ni);
        for (j, d) in denoms.iter().enumerate() {
            let arg = z + u.values()[j] * n as f64 - sum;
            let v = theta_char_with(chr, arg, &mn, 0, kernel.policy())?;
            g.set(i - 1, j, v / d);
        }
    }
    Ok(g)
}

/// `g(z, u)^{-1}`. The determinant vanishes with `ϑ(z)`, so `z` is guarded
/// like a pole argument.
pub fn g_inverse(kernel: &Kernel, n: usize, z: C64, u: &DynVector) -> Result<ComplexMatrix> {
    kernel.pole_theta(z, "intertwiner inverse")?;
    g_matrix(kernel, n, z, u)?.inverse()
}

/// Residue at 0 of a function with a simple pole there.
///
/// At each radius `r` the estimate `(r f(r) - r f(-r)) / 2` removes the even
/// part of `z f(z)`; the two estimates are then combined by Richardson
/// extrapolation in `r^2`. Returns the extrapolated value and the difference
/// between the single-radius estimates.
pub fn two_radius_residue(
    f: impl Fn(C64) -> Result<ComplexMatrix>,
    r1: f64,
    r2: f64,
) -> Result<(ComplexMatrix, f64)> {
    let estimate = |r: f64| -> Result<ComplexMatrix> {
        let rc = C64::new(r, 0.0);
        let plus = f(rc)?;
        let minus = f(-rc)?;
        Ok((&plus - &minus).scale(C64::new(r / 2.0, 0.0)))
    };
    let a = estimate(r1)?;
    let b = estimate(r2)?;
    let (w1, w2) = (r1 * r1, r2 * r2);
    let extrapolated = (&b.scale(C64::new(w1, 0.0)) - &a.scale(C64::new(w2, 0.0)))
        .scale(C64::new(1.0 / (w1 - w2), 0.0));
    let diff = (&a - &b).max_abs();
    Ok((extrapolated, diff))
}

/// `ǧ(u) = Res_{z=0} g^{-1}(z, u)`.
pub fn g_breve_residue(kernel: &Kernel, n: usize, u: &DynVector) -> Result<ComplexMatrix> {
    let (r1, r2) = RESIDUE_RADII;
    let (res, diff) = two_radius_residue(|z| g_matrix(kernel, n, z, u)?.inverse(), r1, r2)?;
    if !res.is_finite() || diff > RESIDUE_AGREEMENT * (1.0 + res.max_abs()) {
        return Err(Error::ExtrapolationUnstable { difference: diff });
    }
    Ok(res)
}

/// A dynamical shift `u → u + amount · e_k` conditioned on the basis state
/// `k` of `leg`, as in `u + ħ^{(leg)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynShift {
    pub leg: usize,
    pub amount: C64,
}

impl DynShift {
    pub fn new(leg: usize, amount: C64) -> Self {
        Self { leg, amount }
    }
}

/// `Σ_k builder(u + Σ_t s_t e_{k_t})` on `act_legs`, times the projectors
/// `E_{k_t k_t}` on the conditioning legs, summed over all index tuples `k`.
///
/// Conditioning legs may repeat (two shifts on the same leg select the same
/// basis state) and may coincide with acting legs, in which case the
/// projector stands to the right of the operator.
pub fn embed_with_dyn_shifts<F>(
    builder: F,
    act_legs: &[usize],
    shifts: &[DynShift],
    u: &DynVector,
    n_legs: usize,
) -> Result<TensorOperator>
where
    F: Fn(&DynVector) -> Result<TensorOperator>,
{
    let leg_dim = u.len();
    for s in shifts {
        if s.leg == 0 || s.leg > n_legs {
            return Err(Error::LegOutOfRange { leg: s.leg, n_legs });
        }
    }
    if shifts.is_empty() {
        return embed(&builder(u)?, act_legs, n_legs);
    }
    let d = leg_dim.pow(n_legs as u32);
    let digit = |index: usize, leg: usize| (index / leg_dim.pow((n_legs - leg) as u32)) % leg_dim;
    let mut out = ComplexMatrix::zeros(d);
    let mut ks = vec![0usize; shifts.len()];
    loop {
        let consistent = shifts.iter().zip(&ks).all(|(s, &k)| {
            shifts.iter().zip(&ks).all(|(t, &l)| t.leg != s.leg || k == l)
        });
        if consistent {
            let mut shifted = u.clone();
            for (s, &k) in shifts.iter().zip(&ks) {
                shifted = shifted.shifted(k, s.amount);
            }
            let op = embed(&builder(&shifted)?, act_legs, n_legs)?;
            for col in 0..d {
                if shifts.iter().zip(&ks).all(|(s, &k)| digit(col, s.leg) == k) {
                    for row in 0..d {
                        let v = op.matrix().get(row, col);
                        if v.re != 0.0 || v.im != 0.0 {
                            out.set(row, col, out.get(row, col) + v);
                        }
                    }
                }
            }
        }
        let mut t = 0;
        loop {
            if t == ks.len() {
                return TensorOperator::new(n_legs, leg_dim, out);
            }
            ks[t] += 1;
            if ks[t] < leg_dim {
                break;
            }
            ks[t] = 0;
            t += 1;
        }
    }
}

/// Single-leg form: `Σ_k builder(u + shift e_k)` on `act_leg` tensored with
/// `E_kk` on `cond_leg`.
pub fn embed_with_dyn_shift<F>(
    builder: F,
    act_leg: usize,
    cond_leg: usize,
    shift: C64,
    u: &DynVector,
    n_legs: usize,
) -> Result<TensorOperator>
where
    F: Fn(&DynVector) -> Result<ComplexMatrix>,
{
    if act_leg == cond_leg {
        return Err(Error::DuplicateLeg(act_leg));
    }
    embed_with_dyn_shifts(
        |v| TensorOperator::new(1, v.len(), builder(v)?),
        &[act_leg],
        &[DynShift::new(cond_leg, shift)],
        u,
        n_legs,
    )
}
