//! Dense complex matrices, the finite Heisenberg basis and tensor-leg
//! bookkeeping.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Pivot ratio above which an inversion is reported as ill-conditioned.
pub const PIVOT_WARN_RATIO: f64 = 1e12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Square dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim || dim == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} entries do not form a square matrix of dimension {dim}",
                entries.len()
            )));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        Ok(Self(m))
    }

    /// Standard basis matrix `E_ij` of size `n` (0-based indices).
    pub fn e_ij(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.0[(i, j)] = ONE;
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (k, &v) in values.iter().enumerate() {
            m.0[(k, k)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.0[(row, col)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<C64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.is_finite())
    }

    pub fn determinant(&self) -> C64 {
        self.0.clone().lu().determinant()
    }

    /// Inverse by LU decomposition with partial pivoting.
    ///
    /// A pivot ratio above [`PIVOT_WARN_RATIO`] is logged as a conditioning
    /// warning; an exactly vanishing or non-finite pivot is an error.
    pub fn inverse(&self) -> Result<Self> {
        let lu = self.0.clone().lu();
        let pivots = lu.u().diagonal();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for p in pivots.iter() {
            lo = lo.min(p.norm());
            hi = hi.max(p.norm());
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::SingularMatrix);
        }
        if hi / lo > PIVOT_WARN_RATIO {
            log::warn!("ill-conditioned inversion: pivot ratio {:e}", hi / lo);
        }
        lu.try_inverse().map(Self).ok_or(Error::SingularMatrix)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Operator on `leg_dim^n_legs`, leg 1 being the slowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorOperator {
    n_legs: usize,
    leg_dim: usize,
    matrix: ComplexMatrix,
}

impl TensorOperator {
    pub fn new(n_legs: usize, leg_dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        let expected = checked_pow(leg_dim, n_legs)?;
        if leg_dim == 0 || n_legs == 0 || matrix.dim() != expected {
            return Err(Error::ShapeMismatch(format!(
                "matrix of dimension {} does not act on {n_legs} legs of dimension {leg_dim}",
                matrix.dim()
            )));
        }
        Ok(Self { n_legs, leg_dim, matrix })
    }

    pub fn identity(n_legs: usize, leg_dim: usize) -> Self {
        Self { n_legs, leg_dim, matrix: ComplexMatrix::identity(leg_dim.pow(n_legs as u32)) }
    }

    pub fn zeros(n_legs: usize, leg_dim: usize) -> Self {
        Self { n_legs, leg_dim, matrix: ComplexMatrix::zeros(leg_dim.pow(n_legs as u32)) }
    }

    /// `A_1 ⊗ A_2 ⊗ ...` for single-leg factors of equal dimension.
    pub fn tensor(factors: &[&ComplexMatrix]) -> Result<Self> {
        let leg_dim = factors.first().map(|f| f.dim()).ok_or_else(|| {
            Error::ShapeMismatch("tensor product of no factors".into())
        })?;
        if factors.iter().any(|f| f.dim() != leg_dim) {
            return Err(Error::ShapeMismatch("tensor factors differ in dimension".into()));
        }
        let mut m = ComplexMatrix::identity(1);
        for f in factors {
            m = m.kron(f);
        }
        Self::new(factors.len(), leg_dim, m)
    }

    pub fn n_legs(&self) -> usize {
        self.n_legs
    }

    pub fn leg_dim(&self) -> usize {
        self.leg_dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n_legs != other.n_legs || self.leg_dim != other.leg_dim {
            return Err(Error::ShapeMismatch(format!(
                "{} legs of dimension {} vs {} legs of dimension {}",
                self.n_legs, self.leg_dim, other.n_legs, other.leg_dim
            )));
        }
        Ok(())
    }

    fn with_matrix(&self, matrix: ComplexMatrix) -> Self {
        Self { n_legs: self.n_legs, leg_dim: self.leg_dim, matrix }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix * &other.matrix))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.with_matrix(self.matrix.scale(s))
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(self.with_matrix(self.matrix.inverse()?))
    }

    /// Product of a chain of operators, left to right.
    pub fn product(ops: &[&TensorOperator]) -> Result<Self> {
        let (first, rest) = ops
            .split_first()
            .ok_or_else(|| Error::ShapeMismatch("product of no operators".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, op| acc.matmul(op))
    }

    /// `self · embed(op, legs, n)` without materializing the embedded operator.
    pub fn mul_embedded(&self, op: &TensorOperator, legs: &[usize]) -> Result<Self> {
        let layout = LegLayout::new(op, legs, self.n_legs, self.leg_dim)?;
        let d = self.dim();
        let kd = op.dim();
        let src = self.matrix.as_dmatrix();
        let opm = op.matrix.as_dmatrix();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for &base in &layout.bases {
            for b in 0..kd {
                let col = base + layout.offsets[b];
                for a in 0..kd {
                    let w = opm[(a, b)];
                    if w != ZERO {
                        out.column_mut(col).axpy(w, &src.column(base + layout.offsets[a]), ONE);
                    }
                }
            }
        }
        Ok(self.with_matrix(ComplexMatrix(out)))
    }
}

/// Index bookkeeping for placing a k-leg operator on chosen legs of n.
struct LegLayout {
    /// Offset contributed by each multi-index of the embedded legs.
    offsets: Vec<usize>,
    /// Offset contributed by each multi-index of the remaining legs.
    bases: Vec<usize>,
}

impl LegLayout {
    fn new(op: &TensorOperator, legs: &[usize], n: usize, leg_dim: usize) -> Result<Self> {
        if op.leg_dim != leg_dim {
            return Err(Error::ShapeMismatch(format!(
                "leg dimension {} vs {leg_dim}",
                op.leg_dim
            )));
        }
        if legs.len() != op.n_legs || legs.len() > n {
            return Err(Error::ShapeMismatch(format!(
                "{} target legs for a {}-leg operator on {n} legs",
                legs.len(),
                op.n_legs
            )));
        }
        let mut seen = vec![false; n + 1];
        for &l in legs {
            if l == 0 || l > n {
                return Err(Error::LegOutOfRange { leg: l, n_legs: n });
            }
            if seen[l] {
                return Err(Error::DuplicateLeg(l));
            }
            seen[l] = true;
        }
        let stride = |leg: usize| leg_dim.pow((n - leg) as u32);
        let offsets = multi_index_offsets(&legs.iter().map(|&l| stride(l)).collect::<Vec<_>>(), leg_dim);
        let others: Vec<usize> = (1..=n).filter(|l| !seen[*l]).map(stride).collect();
        let bases = multi_index_offsets(&others, leg_dim);
        Ok(Self { offsets, bases })
    }
}

/// All sums `Σ_t digit_t · strides[t]`, the first stride varying slowest.
fn multi_index_offsets(strides: &[usize], leg_dim: usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in strides {
        out = out.iter().flat_map(|&o| (0..leg_dim).map(move |d| o + d * s)).collect();
    }
    out
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(|| Error::ShapeMismatch(format!("{base}^{exp} overflows")))
}

/// Places `op` on `target_legs` of an `n`-leg space, identity elsewhere.
/// The i-th leg of `op` goes to `target_legs[i]`, so `embed(R, [2, 1], 2)`
/// is `R_21`.
pub fn embed(op: &TensorOperator, target_legs: &[usize], n: usize) -> Result<TensorOperator> {
    let layout = LegLayout::new(op, target_legs, n, op.leg_dim)?;
    let d = checked_pow(op.leg_dim, n)?;
    let mut out = ComplexMatrix::zeros(d);
    let kd = op.dim();
    for &base in &layout.bases {
        for a in 0..kd {
            for b in 0..kd {
                let v = op.matrix.get(a, b);
                if v != ZERO {
                    out.set(base + layout.offsets[a], base + layout.offsets[b], v);
                }
            }
        }
    }
    TensorOperator::new(n, op.leg_dim, out)
}

/// Single-leg convenience wrapper around [`embed`].
pub fn embed_matrix(m: &ComplexMatrix, leg: usize, n: usize) -> Result<TensorOperator> {
    embed(&TensorOperator::new(1, m.dim(), m.clone())?, &[leg], n)
}

/// `max |lhs - rhs| / (1 + max |rhs|)`.
pub fn residual_norm(lhs: &TensorOperator, rhs: &TensorOperator) -> Result<f64> {
    lhs.same_shape(rhs)?;
    Ok(matrix_residual(&lhs.matrix, &rhs.matrix))
}

/// Relative sup-norm residual of two plain matrices of equal size.
pub fn matrix_residual(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    let diff = lhs
        .0
        .iter()
        .zip(rhs.0.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) });
    diff / (1.0 + rhs.max_abs())
}

fn rem(a: i64, n: usize) -> usize {
    a.rem_euclid(n as i64) as usize
}

/// `T_a = exp(pi i a1 a2 / N) Q^a1 Λ^a2` with the clock matrix
/// `Q = diag(exp(2 pi i k / N))` and the shift `Λ_{k, k+1 mod N} = 1`.
///
/// The phase uses the integers as given; shifting a component by `N` changes
/// `T` by a sign.
pub fn heisenberg_t(a1: i64, a2: i64, n: usize) -> ComplexMatrix {
    let nf = n as f64;
    let phase = C64::from_polar(1.0, PI * (a1 * a2) as f64 / nf);
    let (p, s) = (rem(a1, n), rem(a2, n));
    let mut m = ComplexMatrix::zeros(n);
    for k in 0..n {
        let clock = C64::from_polar(1.0, 2.0 * PI * (k * p) as f64 / nf);
        m.set(k, (k + s) % n, phase * clock);
    }
    m
}

/// `kappa_{a,b} = exp(pi i (b1 a2 - b2 a1) / N)`, so that
/// `T_a T_b = kappa_{a,b} T_{a+b}`.
pub fn kappa(alpha: (i64, i64), beta: (i64, i64), n: usize) -> C64 {
    C64::from_polar(1.0, PI * (beta.0 * alpha.1 - beta.1 * alpha.0) as f64 / n as f64)
}

/// Permutation operator `P = Σ E_ij ⊗ E_ji`.
pub fn permutation_p(n: usize) -> TensorOperator {
    let mut m = ComplexMatrix::zeros(n * n);
    for i in 0..n {
        for j in 0..n {
            m.set(i * n + j, j * n + i, ONE);
        }
    }
    TensorOperator { n_legs: 2, leg_dim: n, matrix: m }
}

/// `P = (1/N) Σ_a T_a ⊗ T_{-a}`, the Heisenberg-basis form of [`permutation_p`].
pub fn permutation_p_heisenberg(n: usize) -> TensorOperator {
    let mut m = ComplexMatrix::zeros(n * n);
    for a1 in 0..n as i64 {
        for a2 in 0..n as i64 {
            m = &m + &heisenberg_t(a1, a2, n).kron(&heisenberg_t(-a1, -a2, n));
        }
    }
    TensorOperator { n_legs: 2, leg_dim: n, matrix: m.scale(C64::new(1.0 / n as f64, 0.0)) }
}
