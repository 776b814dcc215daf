//! Residual evaluators for every catalog entry, and the operator pieces they
//! are assembled from.
//!
//! Each identity is evaluated as printed: both sides are built with all their
//! argument shifts and compared by [`residual_norm`]. Legs are numbered from 1
//! and `z[a - 1]` is the spectral parameter of leg `a`.

use num_complex::Complex64 as C64;

use super::{EvalCtx, SamplePoint};
use crate::error::{Error, Result};
use crate::intertwiner::{
    embed_with_dyn_shifts, g_breve_residue, g_inverse, g_matrix, two_radius_residue, DynShift,
    RESIDUE_RADII,
};
use crate::rmatrices::{
    acf, bb_with_convention, bh, degenerate_o, diagonal_two_leg, felder, twist_rbar, DynVector,
};
use crate::tensor_alg::{embed, matrix_residual, residual_norm, ComplexMatrix, TensorOperator};

type Op = TensorOperator;

/// Common translation applied to both spectral parameters in the gauge check.
pub const GAUGE_SHIFT: C64 = C64 { re: 0.1, im: 0.05 };

/// Pole distance below which the residue radii are scaled down.
pub const RESIDUE_POLE_SCALE: f64 = 0.1;

/// Planck constants of the small-`ħ` scaling test.
pub const SMALL_HBARS: (f64, f64) = (1e-4, 5e-5);

fn minus(op: &Op) -> Op {
    op.scale(C64::new(-1.0, 0.0))
}

fn scalar(n_legs: usize, leg_dim: usize, v: C64) -> Op {
    Op::identity(n_legs, leg_dim).scale(v)
}

fn scalar_residual(lhs: C64, rhs: C64) -> f64 {
    let d = (lhs - rhs).norm();
    if d.is_nan() {
        f64::INFINITY
    } else {
        d / (1.0 + rhs.norm())
    }
}

fn product(ops: &[&Op]) -> Result<Op> {
    Op::product(ops)
}

fn shifts(list: &[(usize, C64)]) -> Vec<DynShift> {
    list.iter().map(|&(leg, amount)| DynShift::new(leg, amount)).collect()
}

// ---------------------------------------------------------------- scalar

pub fn fay(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let k = &ctx.kernel;
    let (h, e, z, w) = (p.hbar, p.eta, p.z[0], p.z[1]);
    let lhs = k.kronecker(h, z)? * k.kronecker(e, w)?;
    let rhs = k.kronecker(h - e, z)? * k.kronecker(e, z + w)? + k.kronecker(e - h, w)? * k.kronecker(h, z + w)?;
    Ok(scalar_residual(lhs, rhs))
}

pub fn fay_degeneration_e1(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let k = &ctx.kernel;
    let (e, z, w) = (p.eta, p.z[0], p.z[1]);
    let lhs = k.kronecker(e, z)? * k.kronecker(e, w)?;
    let rhs = k.kronecker(e, z + w)? * (k.e1(e)? + k.e1(z)? + k.e1(w)? - k.e1(z + w + e)?);
    Ok(scalar_residual(lhs, rhs))
}

pub fn fay_degeneration_wp(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let k = &ctx.kernel;
    let (h, z) = (p.hbar, p.z[0]);
    let lhs = k.kronecker(h, z)? * k.kronecker(h, -z)?;
    Ok(scalar_residual(lhs, k.wp(h, 0)? - k.wp(z, 0)?))
}

/// The four equal expressions of the scalar ratio statement, the last one
/// being the theta ratio.
pub fn scalar_ratios(ctx: &EvalCtx, p: &SamplePoint) -> Result<[C64; 4]> {
    let k = &ctx.kernel;
    let (h, e) = (p.hbar, p.eta);
    let (z1, z2, z3) = (p.z[0], p.z[1], p.z[2]);
    let f = |a: C64, b: C64| k.kronecker(a, b);
    let t = |x: C64| k.pole_theta(x, "theta ratio");
    let r1 = f(h, z2 + e)? * f(e, z3 + h)? / (f(h, z1 + e)? * f(e, z2 + h)?);
    let r2 = f(h - e, z2 + e)? * f(e, z3 + h)? / (f(h - e, z1 + e)? * f(e, z1 + h)?);
    let r3 = f(e - h, z3 + h)? * f(h, z3 + e)? / (f(e - h, z2 + h)? * f(h, z1 + e)?);
    let r4 = t(z1 + e)? * t(z2 + h)? * t(z3 + e + h)? / (t(z1 + h + e)? * t(z2 + e)? * t(z3 + h)?);
    Ok([r1, r2, r3, r4])
}

pub fn scalar_ratio(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let r = scalar_ratios(ctx, p)?;
    Ok(r[..3].iter().map(|&x| scalar_residual(x, r[3])).fold(0.0, f64::max))
}

// ---------------------------------------------------------------- Baxter-Belavin

fn bb2(ctx: &EvalCtx, h: C64, z: C64) -> Result<Op> {
    bb_with_convention(&ctx.kernel, ctx.convention, ctx.n, h, z)
}

/// `R^ħ_ab = R(ħ, z_a - z_b)` on legs `a, b` of `n_legs`.
fn bb_legs(ctx: &EvalCtx, z: &[C64], a: usize, b: usize, h: C64, n_legs: usize) -> Result<Op> {
    embed(&bb2(ctx, h, z[a - 1] - z[b - 1])?, &[a, b], n_legs)
}

pub fn bb_unitarity(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z) = (p.hbar, p.z[0] - p.z[1]);
    let lhs = bb2(ctx, h, z)?.matmul(&embed(&bb2(ctx, h, -z)?, &[2, 1], 2)?)?;
    let k = &ctx.kernel;
    residual_norm(&lhs, &scalar(2, ctx.n, k.wp(h, 0)? - k.wp(z, 0)?))
}

pub fn bb_skew(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z) = (p.hbar, p.z[0] - p.z[1]);
    residual_norm(&bb2(ctx, h, z)?, &minus(&embed(&bb2(ctx, -h, -z)?, &[2, 1], 2)?))
}

pub fn bb_qybe(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let r = |a, b| bb_legs(ctx, &p.z, a, b, p.hbar, 3);
    let (r12, r13, r23) = (r(1, 2)?, r(1, 3)?, r(2, 3)?);
    residual_norm(&product(&[&r12, &r13, &r23])?, &product(&[&r23, &r13, &r12])?)
}

pub fn bb_aybe(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, e) = (p.hbar, p.eta);
    let r = |a, b, x| bb_legs(ctx, &p.z, a, b, x, 3);
    let lhs = r(1, 2, h)?.matmul(&r(2, 3, e)?)?;
    let rhs = r(1, 3, e)?.matmul(&r(1, 2, h - e)?)?.add(&r(2, 3, e - h)?.matmul(&r(1, 3, h)?)?)?;
    residual_norm(&lhs, &rhs)
}

pub fn bb_cubic(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, e) = (p.hbar, p.eta);
    let r = |a, b, x| bb_legs(ctx, &p.z, a, b, x, 3);
    let lhs = product(&[&r(1, 2, e)?, &r(1, 3, h)?, &r(2, 3, e)?])?
        .sub(&product(&[&r(2, 3, h)?, &r(1, 3, e)?, &r(1, 2, h)?])?)?;
    let k = &ctx.kernel;
    let rhs = r(1, 3, h + e)?.scale(k.wp(e, 0)? - k.wp(h, 0)?);
    residual_norm(&lhs, &rhs)
}

/// `R12 R23 R31 + R13 R32 R21` for the Baxter-Belavin matrix.
pub fn bb_cubic_sum_lhs(ctx: &EvalCtx, z: &[C64], h: C64) -> Result<Op> {
    let r = |a, b| bb_legs(ctx, z, a, b, h, 3);
    product(&[&r(1, 2)?, &r(2, 3)?, &r(3, 1)?])?.add(&product(&[&r(1, 3)?, &r(3, 2)?, &r(2, 1)?])?)
}

pub fn bb_cubic_sum(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let lhs = bb_cubic_sum_lhs(ctx, &p.z, p.hbar)?;
    residual_norm(&lhs, &scalar(3, ctx.n, -ctx.kernel.wp(p.hbar, 1)?))
}

// ---------------------------------------------------------------- Felder

/// `R^F_ab(ħ, z_a - z_b | u + shifts)` on legs `a, b`.
pub fn felder_legs(
    ctx: &EvalCtx,
    z: &[C64],
    (a, b): (usize, usize),
    h: C64,
    shift: &[(usize, C64)],
    u: &DynVector,
    n_legs: usize,
) -> Result<Op> {
    let za = z[a - 1] - z[b - 1];
    embed_with_dyn_shifts(|v| felder(&ctx.kernel, ctx.n, h, za, v), &[a, b], &shifts(shift), u, n_legs)
}

pub fn felder_unitarity(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z, k) = (p.hbar, p.z[0] - p.z[1], &ctx.kernel);
    let lhs = felder(k, ctx.n, h, z, &p.u)?.matmul(&embed(&felder(k, ctx.n, h, -z, &p.u)?, &[2, 1], 2)?)?;
    residual_norm(&lhs, &scalar(2, ctx.n, k.wp(h, 0)? - k.wp(z, 0)?))
}

pub fn felder_skew(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z, k) = (p.hbar, p.z[0] - p.z[1], &ctx.kernel);
    let rhs = minus(&embed(&felder(k, ctx.n, -h, -z, &p.u)?, &[2, 1], 2)?);
    residual_norm(&felder(k, ctx.n, h, z, &p.u)?, &rhs)
}

/// Both sides of the Gervais-Neveu-Felder equation
/// `R12(u) R13(u + ħ^(2)) R23(u) = R23(u + ħ^(1)) R13(u) R12(u + ħ^(3))`.
pub fn felder_gnf_sides(ctx: &EvalCtx, z: &[C64], h: C64, u: &DynVector) -> Result<(Op, Op)> {
    let f = |legs, s: &[(usize, C64)]| felder_legs(ctx, z, legs, h, s, u, 3);
    let lhs = product(&[&f((1, 2), &[])?, &f((1, 3), &[(2, h)])?, &f((2, 3), &[])?])?;
    let rhs = product(&[&f((2, 3), &[(1, h)])?, &f((1, 3), &[])?, &f((1, 2), &[(3, h)])?])?;
    Ok((lhs, rhs))
}

pub fn felder_gnf(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (l, r) = felder_gnf_sides(ctx, &p.z, p.hbar, &p.u)?;
    residual_norm(&l, &r)
}

/// Weight-zero property: conjugation by the joint shift `P_1^ħ P_2^ħ` leaves
/// the matrix unchanged, and every nonzero component maps the basis pair
/// `(k, l)` to a permutation of itself.
pub fn felder_weight_zero(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, n) = (p.hbar, ctx.n);
    let z = [p.z[0], p.z[1]];
    let plain = felder(&ctx.kernel, n, h, z[0] - z[1], &p.u)?;
    let conj = felder_legs(ctx, &z, (1, 2), h, &[(1, h), (2, h)], &p.u, 2)?;
    let mut stray = 0.0f64;
    let m = plain.matrix();
    for r in 0..n * n {
        for c in 0..n * n {
            let (ri, rj, ci, cj) = (r / n, r % n, c / n, c % n);
            let same = (ri == ci && rj == cj) || (ri == cj && rj == ci);
            if !same {
                stray = stray.max(m.get(r, c).norm());
            }
        }
    }
    Ok(residual_norm(&conj, &plain)?.max(stray / (1.0 + m.max_abs())))
}

/// `g_leg(z, u + shifts)` or its inverse, on `n_legs` legs.
pub fn g_legs(
    ctx: &EvalCtx,
    z: C64,
    leg: usize,
    shift: &[(usize, C64)],
    inverse: bool,
    u: &DynVector,
    n_legs: usize,
) -> Result<Op> {
    let (k, n) = (&ctx.kernel, ctx.n);
    embed_with_dyn_shifts(
        |v| {
            let m = if inverse { g_inverse(k, n, z, v)? } else { g_matrix(k, n, z, v)? };
            Op::new(1, n, m)
        },
        &[leg],
        &shifts(shift),
        u,
        n_legs,
    )
}

/// Both sides of the transformed cubic identity for Felder's matrix. The
/// right side carries `R^F_13(ħ + η | u)`.
pub fn felder_transformed_cubic_sides(
    ctx: &EvalCtx,
    z: &[C64],
    h: C64,
    e: C64,
    u: &DynVector,
) -> Result<(Op, Op)> {
    let f = |legs, x, s: &[(usize, C64)]| felder_legs(ctx, z, legs, x, s, u, 3);
    let g = |leg: usize, s: &[(usize, C64)], inv| g_legs(ctx, z[leg - 1], leg, s, inv, u, 3);
    let first = product(&[
        &f((1, 2), e, &[])?,
        &g(3, &[(1, h), (2, e)], false)?,
        &f((1, 3), h, &[(2, e)])?,
        &g(1, &[(3, h), (2, e)], true)?,
        &f((2, 3), e, &[])?,
    ])?;
    let second = product(&[
        &g(3, &[(2, h), (1, e)], false)?,
        &f((2, 3), h, &[(1, e)])?,
        &g(2, &[(3, h), (1, e)], true)?,
        &f((1, 3), e, &[])?,
        &g(2, &[(1, h), (3, e)], false)?,
        &f((1, 2), h, &[(3, e)])?,
        &g(1, &[(2, h), (3, e)], true)?,
    ])?;
    let k = &ctx.kernel;
    let rhs = product(&[
        &g(2, &[(1, e)], true)?,
        &g(3, &[(1, h), (1, e)], false)?,
        &f((1, 3), h + e, &[])?,
        &g(1, &[(3, h), (3, e)], true)?,
        &g(2, &[(3, e)], false)?,
    ])?
    .scale(k.wp(e, 0)? - k.wp(h, 0)?);
    Ok((first.sub(&second)?, rhs))
}

pub fn felder_transformed_cubic(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (l, r) = felder_transformed_cubic_sides(ctx, &p.z, p.hbar, p.eta, &p.u)?;
    residual_norm(&l, &r)
}

/// `R12^ħ R23^η - R13^η R12^{ħ-η} - R23^{η-ħ} R13^ħ` for Felder's matrix.
pub fn felder_aybe_defect(ctx: &EvalCtx, z: &[C64], h: C64, e: C64, u: &DynVector) -> Result<Op> {
    let f = |legs, x| felder_legs(ctx, z, legs, x, &[], u, 3);
    product(&[&f((1, 2), h)?, &f((2, 3), e)?])?
        .sub(&product(&[&f((1, 3), e)?, &f((1, 2), h - e)?])?)?
        .sub(&product(&[&f((2, 3), e - h)?, &f((1, 3), h)?])?)
}

/// Closed form of the rational defect:
/// `Σ_{i≠j} u_ij^{-2} (E_ij⊗E_jj⊗E_ji + E_ii⊗E_ij⊗E_ji + E_ij⊗E_ji⊗E_ii
///  - E_ii⊗E_ii⊗E_jj - E_ii⊗E_jj⊗E_jj - E_ii⊗E_jj⊗E_ii)`.
pub fn rational_defect_closed_form(u: &DynVector) -> Result<Op> {
    let n = u.len();
    let e = |i, j| ComplexMatrix::e_ij(n, i, j);
    let mut acc = Op::zeros(3, n);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let w = 1.0 / (u.diff(i, j) * u.diff(i, j));
            let plus = [[(i, j), (j, j), (j, i)], [(i, i), (i, j), (j, i)], [(i, j), (j, i), (i, i)]];
            let minus = [[(i, i), (i, i), (j, j)], [(i, i), (j, j), (j, j)], [(i, i), (j, j), (i, i)]];
            for (terms, sign) in [(plus, 1.0), (minus, -1.0)] {
                for t in terms {
                    let f = Op::tensor(&[&e(t[0].0, t[0].1), &e(t[1].0, t[1].1), &e(t[2].0, t[2].1)])?;
                    acc = acc.add(&f.scale(w * sign))?;
                }
            }
        }
    }
    Ok(acc)
}

/// Compares the rational defect with its closed form and with the defect at
/// a second, independent choice of spectral parameters and Planck constants
/// (`z[3..6]`, `z[6]`, `z[7]`).
pub fn felder_rational_defect(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let d1 = felder_aybe_defect(ctx, &p.z[0..3], p.hbar, p.eta, &p.u)?;
    let d2 = felder_aybe_defect(ctx, &p.z[3..6], p.z[6], p.z[7], &p.u)?;
    let closed = rational_defect_closed_form(&p.u)?;
    Ok(residual_norm(&d1, &closed)?.max(residual_norm(&d2, &d1)?))
}

// ---------------------------------------------------------------- IRF-Vertex

/// `g2(z2, u) g1(z1, u - ħ^(2)) R^F12 = R^B12 g1(z1, u) g2(z2, u - ħ^(1))`.
pub fn irf_vertex(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2, u) = (p.hbar, p.z[0], p.z[1], &p.u);
    let g = |z, leg, s: &[(usize, C64)]| g_legs(ctx, z, leg, s, false, u, 2);
    let lhs = product(&[&g(z2, 2, &[])?, &g(z1, 1, &[(2, -h)])?, &felder(&ctx.kernel, ctx.n, h, z1 - z2, u)?])?;
    let rhs = product(&[&bb2(ctx, h, z1 - z2)?, &g(z1, 1, &[])?, &g(z2, 2, &[(1, -h)])?])?;
    residual_norm(&lhs, &rhs)
}

/// The two conjugation forms of the IRF-Vertex relation:
/// `g2 g1(u-ħ^(2)) R^F g2^{-1}(u-ħ^(1)) g1^{-1} = R^B` and
/// `g1 g2(u+ħ^(1)) R^F g1^{-1}(u+ħ^(2)) g2^{-1} = R^B`.
pub fn irf_vertex_rewritten(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2, u) = (p.hbar, p.z[0], p.z[1], &p.u);
    let g = |z, leg, s: &[(usize, C64)], inv| g_legs(ctx, z, leg, s, inv, u, 2);
    let f = felder(&ctx.kernel, ctx.n, h, z1 - z2, u)?;
    let b = bb2(ctx, h, z1 - z2)?;
    let a = product(&[&g(z2, 2, &[], false)?, &g(z1, 1, &[(2, -h)], false)?, &f, &g(z2, 2, &[(1, -h)], true)?, &g(z1, 1, &[], true)?])?;
    let c = product(&[&g(z1, 1, &[], false)?, &g(z2, 2, &[(1, h)], false)?, &f, &g(z1, 1, &[(2, h)], true)?, &g(z2, 2, &[], true)?])?;
    Ok(residual_norm(&a, &b)?.max(residual_norm(&c, &b)?))
}

/// `(ϑ(ħ)/ϑ'(0)) Σ_k g_ik(z) φ(z, ħ - u_kj) = g_ij(z + Nħ) Π_{m≠j} ϑ(u_mj)/ϑ(u_mj - ħ)`.
pub fn hasegawa(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, n, h, z, u) = (&ctx.kernel, ctx.n, p.hbar, p.z[0], &p.u);
    let g = g_matrix(k, n, z, u)?;
    let g_shift = g_matrix(k, n, z + h * n as f64, u)?;
    let pref = k.pole_theta(h, "hasegawa prefactor")? / k.theta_prime0();
    let mut lhs = ComplexMatrix::zeros(n);
    let mut rhs = ComplexMatrix::zeros(n);
    for j in 0..n {
        let mut factor = C64::new(1.0, 0.0);
        for m in (0..n).filter(|&m| m != j) {
            factor *= k.theta(u.diff(m, j))? / k.pole_theta(u.diff(m, j) - h, "hasegawa")?;
        }
        let phis = (0..n).map(|l| k.kronecker(z, h - u.diff(l, j))).collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            let s: C64 = (0..n).map(|l| g.get(i, l) * phis[l]).sum();
            lhs.set(i, j, s * pref);
            rhs.set(i, j, g_shift.get(i, j) * factor);
        }
    }
    Ok(matrix_residual(&lhs, &rhs))
}

/// `det g(z, u) Π_{j>k} ϑ(u_j - u_k) / ϑ(z)`.
pub fn det_g_ratio(ctx: &EvalCtx, z: C64, u: &DynVector) -> Result<C64> {
    let k = &ctx.kernel;
    let mut prod = C64::new(1.0, 0.0);
    for j in 0..u.len() {
        for l in 0..j {
            prod *= k.theta(u.diff(j, l))?;
        }
    }
    Ok(g_matrix(k, ctx.n, z, u)?.determinant() * prod / k.pole_theta(z, "determinant ratio")?)
}

/// Largest relative spread of [`det_g_ratio`] over all sampled `z`.
pub fn det_g(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let r0 = det_g_ratio(ctx, p.z[0], &p.u)?;
    if r0.norm() == 0.0 || !r0.is_finite() {
        return Err(Error::singular("determinant ratio", p.z[0]));
    }
    let mut worst = 0.0f64;
    for &z in &p.z[1..] {
        worst = worst.max((det_g_ratio(ctx, z, &p.u)? - r0).norm() / r0.norm());
    }
    Ok(worst)
}

/// `ǧ2(0, u) R^B12(ħ, z) = g1(z + ħ) O12 g2^{-1}(ħ) g1^{-1}(z)` with
/// `O = Σ E_ii ⊗ E_ji`.
pub fn matrix_theta(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, n, h, z, u) = (&ctx.kernel, ctx.n, p.hbar, p.z[0], &p.u);
    let lift = |m: ComplexMatrix, leg| embed(&Op::new(1, n, m)?, &[leg], 2);
    let lhs = lift(g_breve_residue(k, n, u)?, 2)?.matmul(&bb2(ctx, h, z)?)?;
    let rhs = product(&[
        &lift(g_matrix(k, n, z + h, u)?, 1)?,
        &degenerate_o(n),
        &lift(g_inverse(k, n, h, u)?, 2)?,
        &lift(g_inverse(k, n, z, u)?, 1)?,
    ])?;
    residual_norm(&lhs, &rhs)
}

// ---------------------------------------------------------------- twist

fn rbar_legs(
    ctx: &EvalCtx,
    h: C64,
    z: C64,
    legs: [usize; 2],
    shift: &[(usize, C64)],
    u: &DynVector,
) -> Result<Op> {
    embed_with_dyn_shifts(|v| twist_rbar(&ctx.kernel, ctx.n, h, z, v, false), &legs, &shifts(shift), u, 2)
}

pub fn twist_inverse(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, n, h, z, u) = (&ctx.kernel, ctx.n, p.hbar, p.z[0], &p.u);
    let r = twist_rbar(k, n, h, z, u, false)?;
    let ri = twist_rbar(k, n, h, z, u, true)?;
    let a = residual_norm(&r.matmul(&ri)?, &Op::identity(2, n))?;
    Ok(a.max(residual_norm(&r.inverse()?, &ri)?))
}

/// `R^ACF = R̄12(ħ, z1 | u - ħ^(2)) R^F12 R̄21^{-1}(ħ, z2 | u - ħ^(1))`.
pub fn twist_relation_shifted(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2, u) = (p.hbar, p.z[0], p.z[1], &p.u);
    let x = rbar_legs(ctx, h, z1, [1, 2], &[(2, -h)], u)?;
    let y = rbar_legs(ctx, h, z2, [2, 1], &[(1, -h)], u)?.inverse()?;
    let lhs = product(&[&x, &felder(&ctx.kernel, ctx.n, h, z1 - z2, u)?, &y])?;
    residual_norm(&lhs, &acf(&ctx.kernel, ctx.n, h, z1, z2, u)?)
}

/// `R^ACF = R̄21(-ħ, z2 + ħ | u + ħ^(1)) R^F12 R̄12^{-1}(-ħ, z1 + ħ | u + ħ^(2))`.
pub fn twist_relation_reflected(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2, u) = (p.hbar, p.z[0], p.z[1], &p.u);
    let x = rbar_legs(ctx, -h, z2 + h, [2, 1], &[(1, h)], u)?;
    let y = rbar_legs(ctx, -h, z1 + h, [1, 2], &[(2, h)], u)?.inverse()?;
    let lhs = product(&[&x, &felder(&ctx.kernel, ctx.n, h, z1 - z2, u)?, &y])?;
    residual_norm(&lhs, &acf(&ctx.kernel, ctx.n, h, z1, z2, u)?)
}

/// `R̄12(ħ, z | u) = g1^{-1}(z + ħ, u + ħ^(2)) g1(z, u)`.
pub fn twist_from_intertwiner(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z, u) = (p.hbar, p.z[0], &p.u);
    let lhs = g_legs(ctx, z + h, 1, &[(2, h)], false, u, 2)?.inverse()?.matmul(&g_legs(ctx, z, 1, &[], false, u, 2)?)?;
    residual_norm(&lhs, &twist_rbar(&ctx.kernel, ctx.n, h, z, u, false)?)
}

// ---------------------------------------------------------------- ACF

/// `R^ħ_ab(x, y) = R^ACF(ħ, x, y | u)` on legs `a, b` of `n_legs`.
fn acf_legs(ctx: &EvalCtx, (a, b): (usize, usize), h: C64, x: C64, y: C64, u: &DynVector, n_legs: usize) -> Result<Op> {
    embed(&acf(&ctx.kernel, ctx.n, h, x, y, u)?, &[a, b], n_legs)
}

pub fn acf_scalar(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let k = &ctx.kernel;
    let (h, z1, z2) = (p.hbar, p.z[0], p.z[1]);
    let v = acf(k, 1, h, z1, z2, &p.u)?.matrix().get(0, 0);
    let rho = k.kronecker(h, z1 - z2)? * k.kronecker(h, z2)? / k.kronecker(h, z1)?;
    Ok(scalar_residual(v, rho))
}

pub fn acf_unitarity(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, h, z1, z2) = (&ctx.kernel, p.hbar, p.z[0], p.z[1]);
    let lhs = acf(k, ctx.n, h, z1, z2, &p.u)?.matmul(&acf_legs(ctx, (2, 1), h, z2, z1, &p.u, 2)?)?;
    residual_norm(&lhs, &scalar(2, ctx.n, k.wp(h, 0)? - k.wp(z1 - z2, 0)?))
}

/// `R12^ħ(z1, z2) = -R21^{-ħ}(z2 + ħ, z1 + ħ)`.
pub fn acf_skew(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2) = (p.hbar, p.z[0], p.z[1]);
    let rhs = minus(&acf_legs(ctx, (2, 1), -h, z2 + h, z1 + h, &p.u, 2)?);
    residual_norm(&acf(&ctx.kernel, ctx.n, h, z1, z2, &p.u)?, &rhs)
}

/// Sides of the semi-dynamical Yang-Baxter equation
/// `R12(z1,z2) R13(z1-ħ,z3-ħ) R23(z2,z3) = R23(z2-ħ,z3-ħ) R13(z1,z3) R12(z1-ħ,z2-ħ)`.
pub fn acf_sdybe_sides(ctx: &EvalCtx, z: &[C64], h: C64, u: &DynVector) -> Result<(Op, Op)> {
    let (z1, z2, z3) = (z[0], z[1], z[2]);
    let r = |legs, x, y| acf_legs(ctx, legs, h, x, y, u, 3);
    let lhs = product(&[&r((1, 2), z1, z2)?, &r((1, 3), z1 - h, z3 - h)?, &r((2, 3), z2, z3)?])?;
    let rhs = product(&[&r((2, 3), z2 - h, z3 - h)?, &r((1, 3), z1, z3)?, &r((1, 2), z1 - h, z2 - h)?])?;
    Ok((lhs, rhs))
}

pub fn acf_sdybe(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (l, r) = acf_sdybe_sides(ctx, &p.z, p.hbar, &p.u)?;
    residual_norm(&l, &r)
}

/// The shifted associative Yang-Baxter equation
/// `R12^ħ(z1+η, z2+η) R23^η(z2+ħ, z3+ħ) = R13^η(z1+ħ, z3+ħ) R12^{ħ-η}(z1+η, z2+η)
///  + R23^{η-ħ}(z2+ħ, z3+ħ) R13^ħ(z1+η, z3+η)`.
pub fn acf_aybe(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, e, u) = (p.hbar, p.eta, &p.u);
    let (z1, z2, z3) = (p.z[0], p.z[1], p.z[2]);
    let r = |legs, x, a, b| acf_legs(ctx, legs, x, a, b, u, 3);
    let lhs = r((1, 2), h, z1 + e, z2 + e)?.matmul(&r((2, 3), e, z2 + h, z3 + h)?)?;
    let rhs = r((1, 3), e, z1 + h, z3 + h)?
        .matmul(&r((1, 2), h - e, z1 + e, z2 + e)?)?
        .add(&r((2, 3), e - h, z2 + h, z3 + h)?.matmul(&r((1, 3), h, z1 + e, z3 + e)?)?)?;
    residual_norm(&lhs, &rhs)
}

/// Left side of the cubic identity
/// `R12^η(z1,z2) R13^ħ(z1-ħ,z3-ħ) R23^η(z2,z3) - R23^ħ(z2-ħ,z3-ħ) R13^η(z1,z3) R12^ħ(z1-ħ,z2-ħ)`.
pub fn acf_cubic_lhs(ctx: &EvalCtx, z: &[C64], h: C64, e: C64, u: &DynVector) -> Result<Op> {
    let (z1, z2, z3) = (z[0], z[1], z[2]);
    let r = |legs, x, a, b| acf_legs(ctx, legs, x, a, b, u, 3);
    product(&[&r((1, 2), e, z1, z2)?, &r((1, 3), h, z1 - h, z3 - h)?, &r((2, 3), e, z2, z3)?])?
        .sub(&product(&[&r((2, 3), h, z2 - h, z3 - h)?, &r((1, 3), e, z1, z3)?, &r((1, 2), h, z1 - h, z2 - h)?])?)
}

pub fn acf_cubic(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, e) = (p.hbar, p.eta);
    let lhs = acf_cubic_lhs(ctx, &p.z, h, e, &p.u)?;
    let k = &ctx.kernel;
    let rhs = acf_legs(ctx, (1, 3), h + e, p.z[0] - h, p.z[2] - h, &p.u, 3)?.scale(k.wp(e, 0)? - k.wp(h, 0)?);
    residual_norm(&lhs, &rhs)
}

/// `R12(z1,z2) R23(z2,z3) R31(z3,z1) + R13(z1,z3) R32(z3,z2) R21(z2,z1)`.
pub fn acf_cubic_sum_lhs(ctx: &EvalCtx, z: &[C64], h: C64, u: &DynVector) -> Result<Op> {
    let r = |a: usize, b: usize| acf_legs(ctx, (a, b), h, z[a - 1], z[b - 1], u, 3);
    product(&[&r(1, 2)?, &r(2, 3)?, &r(3, 1)?])?.add(&product(&[&r(1, 3)?, &r(3, 2)?, &r(2, 1)?])?)
}

pub fn acf_cubic_sum(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let lhs = acf_cubic_sum_lhs(ctx, &p.z, p.hbar, &p.u)?;
    residual_norm(&lhs, &scalar(3, ctx.n, -ctx.kernel.wp(p.hbar, 1)?))
}

fn guard_acf_generic(ctx: &EvalCtx, args: &[C64], u: &DynVector) -> Result<()> {
    let k = &ctx.kernel;
    for &a in args {
        k.pole_theta(a, "acf argument")?;
    }
    for i in 0..u.len() {
        for j in (0..u.len()).filter(|&j| j != i) {
            k.pole_theta(u.diff(i, j), "acf dynamical argument")?;
        }
    }
    Ok(())
}

/// `Res_{z2=0} R^ACF(ħ, z1, z2 | u)` by two-radius extrapolation, and the
/// disagreement of the single-radius estimates.
///
/// The radii shrink in proportion once the nearer of the other poles
/// `z2 = z1, z1 + ħ` comes closer than [`RESIDUE_POLE_SCALE`].
pub fn acf_residue_at_origin(ctx: &EvalCtx, h: C64, z1: C64, u: &DynVector) -> Result<(ComplexMatrix, f64)> {
    guard_acf_generic(ctx, &[h, z1, z1 + h], u)?;
    let relaxed = ctx.kernel.relaxed();
    let nearest = relaxed.lattice_distance(z1).min(relaxed.lattice_distance(z1 + h));
    let shrink = (nearest / RESIDUE_POLE_SCALE).min(1.0);
    let (r1, r2) = (RESIDUE_RADII.0 * shrink, RESIDUE_RADII.1 * shrink);
    two_radius_residue(|x| Ok(acf(&relaxed, ctx.n, h, z1, x, u)?.into_matrix()), r1, r2)
}

/// Entrywise absolute deviation of the residue at `z2 = 0` from `Σ E_ii ⊗ E_ji`.
pub fn acf_residue(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (res, _) = acf_residue_at_origin(ctx, p.hbar, p.z[0], &p.u)?;
    let o = degenerate_o(ctx.n);
    Ok((&res - o.matrix()).max_abs())
}

/// `max|ħ R^ACF - 1|` at the two small Planck constants, and their ratio.
pub fn acf_small_hbar_norms(ctx: &EvalCtx, z1: C64, z2: C64, u: &DynVector) -> Result<(f64, f64)> {
    guard_acf_generic(ctx, &[z1, z2, z1 - z2], u)?;
    let relaxed = ctx.kernel.relaxed();
    let id = ComplexMatrix::identity(ctx.n * ctx.n);
    let norm = |h: f64| -> Result<f64> {
        let r = acf(&relaxed, ctx.n, C64::new(h, 0.0), z1, z2, u)?;
        Ok((&r.matrix().scale(C64::new(h, 0.0)) - &id).max_abs())
    };
    Ok((norm(SMALL_HBARS.0)?, norm(SMALL_HBARS.1)?))
}

/// `|ratio - 2|` for the linear vanishing of `ħ R^ACF - 1` as `ħ → 0`.
pub fn acf_small_hbar(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (a, b) = acf_small_hbar_norms(ctx, p.z[0], p.z[1], &p.u)?;
    if b == 0.0 {
        return Err(Error::singular("small-hbar scaling", p.z[0]));
    }
    Ok((a / b - 2.0).abs())
}

/// `g1(z1+ħ) g2(z2) R^ACF12(ħ, z1, z2) g2^{-1}(z2+ħ) g1^{-1}(z1)`.
pub fn gauge_lhs(ctx: &EvalCtx, h: C64, z1: C64, z2: C64, u: &DynVector) -> Result<Op> {
    let (k, n) = (&ctx.kernel, ctx.n);
    let lift = |m: ComplexMatrix, leg| embed(&Op::new(1, n, m)?, &[leg], 2);
    product(&[
        &lift(g_matrix(k, n, z1 + h, u)?, 1)?,
        &lift(g_matrix(k, n, z2, u)?, 2)?,
        &acf(k, n, h, z1, z2, u)?,
        &lift(g_inverse(k, n, z2 + h, u)?, 2)?,
        &lift(g_inverse(k, n, z1, u)?, 1)?,
    ])
}

/// Gauge equivalence with the Baxter-Belavin matrix, at `(z1, z2)` and at the
/// translated pair `(z1 + c, z2 + c)`.
pub fn gauge(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, z1, z2) = (p.hbar, p.z[0], p.z[1]);
    let b = bb2(ctx, h, z1 - z2)?;
    let a = residual_norm(&gauge_lhs(ctx, h, z1, z2, &p.u)?, &b)?;
    let c = residual_norm(&gauge_lhs(ctx, h, z1 + GAUGE_SHIFT, z2 + GAUGE_SHIFT, &p.u)?, &b)?;
    Ok(a.max(c))
}

// ---------------------------------------------------------------- Burban-Henrich

pub fn bh_skew(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, h, z) = (&ctx.kernel, p.hbar, p.z[0] - p.z[1]);
    let rhs = minus(&embed(&bh(k, ctx.n, -h, -z, &p.u)?, &[2, 1], 2)?);
    residual_norm(&bh(k, ctx.n, h, z, &p.u)?, &rhs)
}

/// `R12 R21 = Σ E_ii ⊗ E_jj (℘(ħ - u_ij) - ℘(z))`.
pub fn bh_unitarity_defect(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (k, h, z, u) = (&ctx.kernel, p.hbar, p.z[0] - p.z[1], &p.u);
    let lhs = bh(k, ctx.n, h, z, u)?.matmul(&embed(&bh(k, ctx.n, h, -z, u)?, &[2, 1], 2)?)?;
    let wz = k.wp(z, 0)?;
    let rhs = diagonal_two_leg(ctx.n, |i, j| Ok(k.wp(h - u.diff(i, j), 0)? - wz))?;
    residual_norm(&lhs, &rhs)
}

pub fn bh_aybe(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    let (h, e, u) = (p.hbar, p.eta, &p.u);
    let r = |a: usize, b: usize, x| embed(&bh(&ctx.kernel, ctx.n, x, p.z[a - 1] - p.z[b - 1], u)?, &[a, b], 3);
    let lhs = r(1, 2, h)?.matmul(&r(2, 3, e)?)?;
    let rhs = r(1, 3, e)?.matmul(&r(1, 2, h - e)?)?.add(&r(2, 3, e - h)?.matmul(&r(1, 3, h)?)?)?;
    residual_norm(&lhs, &rhs)
}

// ---------------------------------------------------------------- n-th order

/// Which matrix enters the n-th order identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NordFamily {
    BaxterBelavin,
    Acf,
}

/// `Σ R_{a i1} R_{i1 i2} ... R_{i_{n-1} a}` over all orderings
/// `(i1, ..., i_{n-1})` of `{1..n} \ {a}`, with `n = z.len()`.
///
/// Products sharing a prefix are computed once.
pub fn nord_sum(ctx: &EvalCtx, family: NordFamily, z: &[C64], h: C64, u: &DynVector, a: usize) -> Result<Op> {
    let n_legs = z.len();
    let pair = |x: usize, y: usize| -> Result<Op> {
        match family {
            NordFamily::BaxterBelavin => bb2(ctx, h, z[x - 1] - z[y - 1]),
            NordFamily::Acf => acf(&ctx.kernel, ctx.n, h, z[x - 1], z[y - 1], u),
        }
    };
    let mut ops = vec![vec![None; n_legs + 1]; n_legs + 1];
    for (x, row) in ops.iter_mut().enumerate().skip(1) {
        for y in (1..=n_legs).filter(|&y| y != x) {
            row[y] = Some(pair(x, y)?);
        }
    }
    let get = |x: usize, y: usize| ops[x][y].as_ref().expect("pair built above");
    let mut total = Op::zeros(n_legs, ctx.n);
    let rest: Vec<usize> = (1..=n_legs).filter(|&x| x != a).collect();
    for &first in &rest {
        let start = embed(get(a, first), &[a, first], n_legs)?;
        let remaining: Vec<usize> = rest.iter().copied().filter(|&x| x != first).collect();
        nord_extend(&start, first, &remaining, a, &get, &mut total)?;
    }
    Ok(total)
}

fn nord_extend<'a>(
    prefix: &Op,
    last: usize,
    remaining: &[usize],
    a: usize,
    get: &impl Fn(usize, usize) -> &'a Op,
    total: &mut Op,
) -> Result<()> {
    if remaining.is_empty() {
        *total = total.add(&prefix.mul_embedded(get(last, a), &[last, a])?)?;
        return Ok(());
    }
    for (idx, &next) in remaining.iter().enumerate() {
        let extended = prefix.mul_embedded(get(last, next), &[last, next])?;
        let mut rest = remaining.to_vec();
        rest.remove(idx);
        nord_extend(&extended, next, &rest, a, get, total)?;
    }
    Ok(())
}

fn nord(ctx: &EvalCtx, p: &SamplePoint, family: NordFamily) -> Result<f64> {
    let order = ctx.order.ok_or_else(|| Error::InvalidPlan("n-th order check needs an order".into()))?;
    let z = &p.z[..order];
    let sum = nord_sum(ctx, family, z, p.hbar, &p.u, 1)?;
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = scalar(order, ctx.n, ctx.kernel.wp(p.hbar, order as u32 - 2)? * sign);
    residual_norm(&sum, &rhs)
}

pub fn nord_bb(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    nord(ctx, p, NordFamily::BaxterBelavin)
}

pub fn nord_acf(ctx: &EvalCtx, p: &SamplePoint) -> Result<f64> {
    nord(ctx, p, NordFamily::Acf)
}

/// Evaluates every constituent of the n-th order sum without forming the
/// products, for point rejection.
pub fn nord_guard(ctx: &EvalCtx, p: &SamplePoint, family: NordFamily) -> Result<()> {
    let order = ctx.order.ok_or_else(|| Error::InvalidPlan("n-th order check needs an order".into()))?;
    ctx.kernel.wp(p.hbar, order as u32 - 2)?;
    for x in 0..order {
        for y in (0..order).filter(|&y| y != x) {
            match family {
                NordFamily::BaxterBelavin => {
                    bb2(ctx, p.hbar, p.z[x] - p.z[y])?;
                }
                NordFamily::Acf => {
                    acf(&ctx.kernel, ctx.n, p.hbar, p.z[x], p.z[y], &p.u)?;
                }
            }
        }
    }
    Ok(())
}

pub fn nord_bb_guard(ctx: &EvalCtx, p: &SamplePoint) -> Result<()> {
    nord_guard(ctx, p, NordFamily::BaxterBelavin)
}

pub fn nord_acf_guard(ctx: &EvalCtx, p: &SamplePoint) -> Result<()> {
    nord_guard(ctx, p, NordFamily::Acf)
}

/// Number of index sequences admitted by the adjacent-distinctness reading of
/// the n-th order sum (`i_c ≠ a` and consecutive indices distinct), as
/// opposed to the `(n-1)!` orderings summed here.
pub fn adjacent_distinct_count(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    (n - 1) * (n - 2).pow((n - 2) as u32)
}
