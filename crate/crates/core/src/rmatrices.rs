//! R-matrix families as explicit two-leg operators.
//!
//! Every constructor takes a [`Kernel`], which fixes the case (rational,
//! trigonometric or elliptic) and caches the theta constants. Dynamical
//! families take a [`DynVector`] `u` and use `u_ij = u_i - u_j`.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::{CaseKind, Kernel, DELTA_SING};
use crate::tensor_alg::{heisenberg_t, ComplexMatrix, TensorOperator};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dynamical parameters `u = (u_1, ..., u_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynVector(Vec<C64>);

impl DynVector {
    /// Validates that no difference `u_i - u_j` lies within
    /// [`DELTA_SING`] of a pole of the kernel's case.
    pub fn new(values: Vec<C64>, kernel: &Kernel) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDynVector("empty vector".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDynVector(format!("non-finite component {v}")));
        }
        for i in 0..values.len() {
            for j in 0..i {
                let d = kernel.lattice_distance(values[i] - values[j]);
                if d <= DELTA_SING {
                    return Err(Error::InvalidDynVector(format!(
                        "u_{} - u_{} is {d:e} away from a pole",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }

    pub fn diff(&self, i: usize, j: usize) -> C64 {
        self.0[i] - self.0[j]
    }

    pub fn sum(&self) -> C64 {
        self.0.iter().sum()
    }

    /// `u + amount · e_k` (0-based `k`). The result is not revalidated;
    /// constructors guard their own arguments.
    pub fn shifted(&self, k: usize, amount: C64) -> Self {
        let mut v = self.0.clone();
        v[k] += amount;
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    BaxterBelavin,
    Felder,
    Acf,
    BurbanHenrich,
    TwistRbar,
    TwistRbarInv,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::BaxterBelavin => "BaxterBelavin",
            Family::Felder => "Felder",
            Family::Acf => "ACF",
            Family::BurbanHenrich => "BurbanHenrich",
            Family::TwistRbar => "TwistRbar",
            Family::TwistRbarInv => "TwistRbarInv",
        }
    }

    pub fn admits(&self, case: &CaseKind) -> bool {
        match self {
            Family::Acf => true,
            Family::Felder => !matches!(case, CaseKind::Trigonometric),
            _ => case.is_elliptic(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A family together with its rank and case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrixSpec {
    pub family: Family,
    pub n: usize,
    pub case: CaseKind,
}

impl RMatrixSpec {
    pub fn new(family: Family, n: usize, case: CaseKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::ShapeMismatch("rank N must be at least 1".into()));
        }
        if !family.admits(&case) {
            return Err(Error::UnsupportedCase { what: family.name(), case: case.name() });
        }
        Ok(Self { family, n, case })
    }
}

fn require(kernel: &Kernel, family: Family) -> Result<()> {
    if family.admits(kernel.case()) {
        Ok(())
    } else {
        Err(Error::UnsupportedCase { what: family.name(), case: kernel.case().name() })
    }
}

fn check_rank(n: usize, u: &DynVector) -> Result<()> {
    if u.len() != n {
        return Err(Error::InvalidDynVector(format!("expected {n} components, got {}", u.len())));
    }
    Ok(())
}

/// Accumulates coefficients of `E_ij ⊗ E_kl`.
struct TwoLeg {
    n: usize,
    m: ComplexMatrix,
}

impl TwoLeg {
    fn new(n: usize) -> Self {
        Self { n, m: ComplexMatrix::zeros(n * n) }
    }

    fn add(&mut self, (i, j): (usize, usize), (k, l): (usize, usize), v: C64) {
        let (r, c) = (i * self.n + k, j * self.n + l);
        let old = self.m.get(r, c);
        self.m.set(r, c, old + v);
    }

    fn finish(self, scale: C64) -> Result<TensorOperator> {
        TensorOperator::new(2, self.n, self.m.scale(scale))
    }
}

/// Normalization of the Baxter-Belavin matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BbConvention {
    /// `(1/N) Σ_a φ_a(z) T_a ⊗ T_{-a}` with the sections at `ħ`.
    AsPrinted,
    /// `N · R^{Nħ}(z)`, the normalization used elsewhere in the literature.
    RescaledPlanck,
}

/// Baxter-Belavin R-matrix `(1/N) Σ_a φ_a^ħ(z) T_a ⊗ T_{-a}`.
pub fn bb(kernel: &Kernel, n: usize, hbar: C64, z: C64) -> Result<TensorOperator> {
    require(kernel, Family::BaxterBelavin)?;
    let mut m = ComplexMatrix::zeros(n * n);
    for a1 in 0..n as i64 {
        for a2 in 0..n as i64 {
            let f = kernel.phi_section(a1, a2, n, hbar, z)?;
            let t = heisenberg_t(a1, a2, n).kron(&heisenberg_t(-a1, -a2, n));
            m = &m + &t.scale(f);
        }
    }
    TensorOperator::new(2, n, m.scale(C64::new(1.0 / n as f64, 0.0)))
}

pub fn bb_with_convention(
    kernel: &Kernel,
    convention: BbConvention,
    n: usize,
    hbar: C64,
    z: C64,
) -> Result<TensorOperator> {
    match convention {
        BbConvention::AsPrinted => bb(kernel, n, hbar, z),
        BbConvention::RescaledPlanck => {
            Ok(bb(kernel, n, hbar * n as f64, z)?.scale(C64::new(n as f64, 0.0)))
        }
    }
}

/// Felder's dynamical R-matrix
/// `Σ_{i≠j} E_ii⊗E_jj φ(ħ, u_ij) + Σ_{i≠j} E_ij⊗E_ji φ(z, -u_ij) + φ(ħ, z) Σ_i E_ii⊗E_ii`.
pub fn felder(kernel: &Kernel, n: usize, hbar: C64, z: C64, u: &DynVector) -> Result<TensorOperator> {
    require(kernel, Family::Felder)?;
    check_rank(n, u)?;
    let mut r = TwoLeg::new(n);
    let diag = kernel.kronecker(hbar, z)?;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                r.add((i, i), (i, i), diag);
            } else {
                let uij = u.diff(i, j);
                r.add((i, i), (j, j), kernel.kronecker(hbar, uij)?);
                r.add((i, j), (j, i), kernel.kronecker(z, -uij)?);
            }
        }
    }
    r.finish(ONE)
}

/// The semi-dynamical ACF R-matrix `R(ħ, z1, z2 | u)`.
///
/// Off-diagonal part
/// `E_ii⊗E_jj φ(ħ,-u_ij) + E_ij⊗E_ji φ(z1-z2,-u_ij) - E_ij⊗E_jj φ(z1+ħ,-u_ij) + E_jj⊗E_ij φ(z2,-u_ij)`
/// summed over `i ≠ j`, and `E_ii⊗E_ii (E1(ħ) + E1(z1-z2) + E1(z2) - E1(z1+ħ))`.
pub fn acf(kernel: &Kernel, n: usize, hbar: C64, z1: C64, z2: C64, u: &DynVector) -> Result<TensorOperator> {
    require(kernel, Family::Acf)?;
    check_rank(n, u)?;
    let mut r = TwoLeg::new(n);
    let z12 = z1 - z2;
    let diag = kernel.e1(hbar)? + kernel.e1(z12)? + kernel.e1(z2)? - kernel.e1(z1 + hbar)?;
    for i in 0..n {
        r.add((i, i), (i, i), diag);
        for j in 0..n {
            if i == j {
                continue;
            }
            let m = -u.diff(i, j);
            r.add((i, i), (j, j), kernel.kronecker(hbar, m)?);
            r.add((i, j), (j, i), kernel.kronecker(z12, m)?);
            r.add((i, j), (j, j), -kernel.kronecker(z1 + hbar, m)?);
            r.add((j, j), (i, j), kernel.kronecker(z2, m)?);
        }
    }
    r.finish(ONE)
}

/// Burban-Henrich R-matrix `Σ_{ij} E_ij ⊗ E_ji φ(z, ħ - u_ij)`.
pub fn bh(kernel: &Kernel, n: usize, hbar: C64, z: C64, u: &DynVector) -> Result<TensorOperator> {
    require(kernel, Family::BurbanHenrich)?;
    check_rank(n, u)?;
    let mut r = TwoLeg::new(n);
    for i in 0..n {
        for j in 0..n {
            r.add((i, j), (j, i), kernel.kronecker(z, hbar - u.diff(i, j))?);
        }
    }
    r.finish(ONE)
}

/// Twist matrix `R̄(ħ, z | u)` relating the ACF and Felder matrices, or its
/// closed-form inverse.
///
/// ```text
/// R̄    = c [ Σ_{i≠j} E_ii⊗E_jj φ(ħ,-u_ij) - Σ_{i≠j} E_ij⊗E_jj φ(z+ħ,-u_ij) - φ(z+ħ,-ħ) Σ_i E_ii⊗E_ii ]
/// R̄^-1 = c [ Σ_{ij} E_ii⊗E_jj φ(ħ,u_ij-ħ) + Σ_{ij} E_ij⊗E_jj φ(z,ħ-u_ij) ]
/// ```
///
/// with `c = ϑ(ħ)/ϑ'(0)`.
pub fn twist_rbar(
    kernel: &Kernel,
    n: usize,
    hbar: C64,
    z: C64,
    u: &DynVector,
    inverse: bool,
) -> Result<TensorOperator> {
    let family = if inverse { Family::TwistRbarInv } else { Family::TwistRbar };
    require(kernel, family)?;
    check_rank(n, u)?;
    let c = kernel.pole_theta(hbar, "twist prefactor")? / kernel.theta_prime0();
    let mut r = TwoLeg::new(n);
    for i in 0..n {
        for j in 0..n {
            let uij = u.diff(i, j);
            if inverse {
                r.add((i, i), (j, j), kernel.kronecker(hbar, uij - hbar)?);
                r.add((i, j), (j, j), kernel.kronecker(z, hbar - uij)?);
            } else if i == j {
                r.add((i, i), (i, i), -kernel.kronecker(z + hbar, -hbar)?);
            } else {
                r.add((i, i), (j, j), kernel.kronecker(hbar, -uij)?);
                r.add((i, j), (j, j), -kernel.kronecker(z + hbar, -uij)?);
            }
        }
    }
    r.finish(c)
}

/// `O = Σ_{ij} E_ii ⊗ E_ji`, the residue of the ACF matrix at `z2 = 0`.
pub fn degenerate_o(n: usize) -> TensorOperator {
    let mut r = TwoLeg::new(n);
    for i in 0..n {
        for j in 0..n {
            r.add((i, i), (j, i), ONE);
        }
    }
    r.finish(ONE).expect("square by construction")
}

/// `Σ_{ij} E_ii ⊗ E_jj · f(i, j)`.
pub fn diagonal_two_leg(n: usize, mut f: impl FnMut(usize, usize) -> Result<C64>) -> Result<TensorOperator> {
    let mut r = TwoLeg::new(n);
    for i in 0..n {
        for j in 0..n {
            r.add((i, i), (j, j), f(i, j)?);
        }
    }
    r.finish(ONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_alg::{permutation_p, residual_norm};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn elliptic() -> Kernel {
        Kernel::new(CaseKind::elliptic(C64::i()).unwrap()).unwrap()
    }

    fn uvec(k: &Kernel, n: usize) -> DynVector {
        let vals = [c(0.13, -0.21), c(-0.27, 0.05), c(0.31, 0.19), c(-0.05, -0.33)];
        DynVector::new(vals[..n].to_vec(), k).unwrap()
    }

    fn swap(r: &TensorOperator) -> TensorOperator {
        let p = permutation_p(r.leg_dim());
        TensorOperator::product(&[&p, r, &p]).unwrap()
    }

    fn scalar_identity(n: usize, v: C64) -> TensorOperator {
        TensorOperator::identity(2, n).scale(v)
    }

    #[test]
    fn dyn_vector_rejects_coincident_entries() {
        let k = elliptic();
        let r = DynVector::new(vec![c(0.1, 0.0), c(1.1, 1.0)], &k);
        assert!(matches!(r, Err(Error::InvalidDynVector(_))));
        assert!(DynVector::new(vec![], &k).is_err());
        assert!(DynVector::new(vec![c(0.1, 0.0), c(0.3, 0.0)], &k).is_ok());
    }

    #[test]
    fn spec_admissibility() {
        let ell = CaseKind::elliptic(C64::i()).unwrap();
        assert!(RMatrixSpec::new(Family::Acf, 2, CaseKind::Trigonometric).is_ok());
        assert!(RMatrixSpec::new(Family::Felder, 2, CaseKind::Rational).is_ok());
        assert!(RMatrixSpec::new(Family::Felder, 2, CaseKind::Trigonometric).is_err());
        assert!(RMatrixSpec::new(Family::BaxterBelavin, 2, CaseKind::Rational).is_err());
        assert!(RMatrixSpec::new(Family::BurbanHenrich, 3, ell).is_ok());
        let k = Kernel::new(CaseKind::Rational).unwrap();
        assert!(matches!(bb(&k, 2, c(0.1, 0.0), c(0.2, 0.0)), Err(Error::UnsupportedCase { .. })));
    }

    #[test]
    fn rank_one_reductions() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        let u = uvec(&k, 1);
        let phi = k.kronecker(h, z).unwrap();
        for r in [bb(&k, 1, h, z).unwrap(), felder(&k, 1, h, z, &u).unwrap(), bh(&k, 1, h, z, &u).unwrap()] {
            assert!((r.matrix().get(0, 0) - phi).norm() < 1e-13 * phi.norm());
        }
        let (z1, z2) = (c(0.3, -0.1), c(-0.12, 0.22));
        let rho = k.kronecker(h, z1 - z2).unwrap() * k.kronecker(h, z2).unwrap() / k.kronecker(h, z1).unwrap();
        let a = acf(&k, 1, h, z1, z2, &u).unwrap().matrix().get(0, 0);
        assert!((a - rho).norm() < 1e-12 * rho.norm());
    }

    #[test]
    fn baxter_belavin_unitarity_and_skew_symmetry() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        for n in [2, 3] {
            let r12 = bb(&k, n, h, z).unwrap();
            let r21 = swap(&bb(&k, n, h, -z).unwrap());
            let rhs = scalar_identity(n, k.wp(h, 0).unwrap() - k.wp(z, 0).unwrap());
            assert!(residual_norm(&r12.matmul(&r21).unwrap(), &rhs).unwrap() < 1e-12);
            let skew = swap(&bb(&k, n, -h, -z).unwrap()).scale(C64::new(-1.0, 0.0));
            assert!(residual_norm(&r12, &skew).unwrap() < 1e-12);
        }
    }

    #[test]
    fn rescaled_convention_breaks_unitarity() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        let r12 = bb_with_convention(&k, BbConvention::RescaledPlanck, 2, h, z).unwrap();
        let r21 = swap(&bb_with_convention(&k, BbConvention::RescaledPlanck, 2, h, -z).unwrap());
        let rhs = scalar_identity(2, k.wp(h, 0).unwrap() - k.wp(z, 0).unwrap());
        assert!(residual_norm(&r12.matmul(&r21).unwrap(), &rhs).unwrap() > 1e-3);
    }

    #[test]
    fn felder_unitarity_and_skew_symmetry() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        let u = uvec(&k, 2);
        let r12 = felder(&k, 2, h, z, &u).unwrap();
        let r21 = swap(&felder(&k, 2, h, -z, &u).unwrap());
        let rhs = scalar_identity(2, k.wp(h, 0).unwrap() - k.wp(z, 0).unwrap());
        assert!(residual_norm(&r12.matmul(&r21).unwrap(), &rhs).unwrap() < 1e-12);
        let skew = swap(&felder(&k, 2, -h, -z, &u).unwrap()).scale(C64::new(-1.0, 0.0));
        assert!(residual_norm(&r12, &skew).unwrap() < 1e-12);
    }

    #[test]
    fn acf_skew_symmetry() {
        for case in [CaseKind::Rational, CaseKind::Trigonometric, CaseKind::elliptic(C64::i()).unwrap()] {
            let k = Kernel::new(case).unwrap();
            let u = uvec(&k, 2);
            let (h, z1, z2) = (c(0.21, 0.07), c(0.3, -0.1), c(-0.12, 0.22));
            let r = acf(&k, 2, h, z1, z2, &u).unwrap();
            let skew = swap(&acf(&k, 2, -h, z2 + h, z1 + h, &u).unwrap()).scale(C64::new(-1.0, 0.0));
            assert!(residual_norm(&r, &skew).unwrap() < 1e-12, "{}", case.name());
        }
    }

    #[test]
    fn burban_henrich_unitarity_defect() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        let u = uvec(&k, 2);
        let lhs = bh(&k, 2, h, z, &u).unwrap().matmul(&swap(&bh(&k, 2, h, -z, &u).unwrap())).unwrap();
        let wz = k.wp(z, 0).unwrap();
        let rhs = diagonal_two_leg(2, |i, j| Ok(k.wp(h - u.diff(i, j), 0)? - wz)).unwrap();
        assert!(residual_norm(&lhs, &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn twist_inverse_matches_linear_solve() {
        let k = elliptic();
        let (h, z) = (c(0.21, 0.07), c(-0.17, 0.12));
        for n in [2, 3] {
            let u = uvec(&k, n);
            let r = twist_rbar(&k, n, h, z, &u, false).unwrap();
            let ri = twist_rbar(&k, n, h, z, &u, true).unwrap();
            let id = TensorOperator::identity(2, n);
            assert!(residual_norm(&r.matmul(&ri).unwrap(), &id).unwrap() < 1e-12);
            assert!(residual_norm(&r.inverse().unwrap(), &ri).unwrap() < 1e-11);
        }
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let k = elliptic();
        let u = uvec(&k, 2);
        assert!(matches!(felder(&k, 3, c(0.1, 0.0), c(0.2, 0.0), &u), Err(Error::InvalidDynVector(_))));
    }
}
