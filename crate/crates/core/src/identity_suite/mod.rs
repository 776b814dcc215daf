//! Executable catalog of R-matrix identities and the sampling engine that
//! evaluates them at random non-singular points.
//!
//! A run is organized in cells: one check at one rank `N`, one case, one
//! modulus and (for the n-th order identities) one order. Every cell draws its
//! points from its own seeded generator, so reports do not depend on the
//! order or concurrency in which cells are processed.

mod catalog;
pub mod checks;
mod report;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use catalog::{catalog, find_check};
pub use report::{CheckReport, ReportFormat, ReportHeader, SuiteReport};

use crate::error::{Error, Result};
use crate::rmatrices::{bb_with_convention, BbConvention, DynVector, Family};
use crate::special_fn::{CaseKind, Kernel, DELTA_SING, MAX_WP_ORDER, MIN_IM_TAU};
use crate::tensor_alg::{embed, residual_norm, TensorOperator};

/// Default relative tolerance of a check.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default lattice-distance margin for accepted sample points.
pub const SAMPLING_MARGIN: f64 = 1e-3;

/// Evaluation case without its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    Rational,
    Trigonometric,
    Elliptic,
}

impl CaseTag {
    pub const ALL: [CaseTag; 3] = [CaseTag::Rational, CaseTag::Trigonometric, CaseTag::Elliptic];

    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::Rational => "rational",
            CaseTag::Trigonometric => "trigonometric",
            CaseTag::Elliptic => "elliptic",
        }
    }

    /// The kernel case, with `tau` required for the elliptic case.
    pub fn kind(&self, tau: Option<C64>) -> Result<CaseKind> {
        match (self, tau) {
            (CaseTag::Rational, _) => Ok(CaseKind::Rational),
            (CaseTag::Trigonometric, _) => Ok(CaseKind::Trigonometric),
            (CaseTag::Elliptic, Some(t)) => CaseKind::elliptic(t),
            (CaseTag::Elliptic, None) => Err(Error::InvalidPlan("elliptic case needs a modulus".into())),
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rational" | "rat" => Ok(CaseTag::Rational),
            "trigonometric" | "trig" => Ok(CaseTag::Trigonometric),
            "elliptic" | "ell" => Ok(CaseTag::Elliptic),
            other => Err(Error::InvalidPlan(format!("unknown case {other:?}"))),
        }
    }
}

/// Sampling and grid configuration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    /// Accepted points per cell.
    pub count: usize,
    /// Range of the real part of every sampled variable.
    pub re_range: (f64, f64),
    /// Range of the imaginary part of every sampled variable.
    pub im_range: (f64, f64),
    pub taus: Vec<C64>,
    pub ns: Vec<usize>,
    pub cases: Vec<CaseTag>,
    /// Orders `n` of the n-th order identities.
    pub orders: Vec<usize>,
    pub max_rejects: usize,
    /// Minimal lattice distance of every pole argument at accepted points.
    pub sampling_margin: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            seed: 0,
            count: 20,
            re_range: (-0.4, 0.4),
            im_range: (-0.4, 0.4),
            taus: vec![C64::new(0.0, 1.0), C64::new(0.3, 0.8)],
            ns: vec![1, 2, 3],
            cases: CaseTag::ALL.to_vec(),
            orders: vec![3, 4, 5],
            max_rejects: 10_000,
            sampling_margin: SAMPLING_MARGIN,
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        for (name, (lo, hi)) in [("real", self.re_range), ("imaginary", self.im_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("{name} range [{lo}, {hi}] is empty"));
            }
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return bad("rank list must be nonempty and positive".into());
        }
        if self.cases.is_empty() {
            return bad("case list is empty".into());
        }
        if self.cases.contains(&CaseTag::Elliptic) && self.taus.is_empty() {
            return bad("elliptic case requested without a modulus".into());
        }
        if let Some(t) = self.taus.iter().find(|t| !(t.im >= MIN_IM_TAU) || !t.re.is_finite()) {
            return bad(format!("modulus {t} has Im(tau) below {MIN_IM_TAU}"));
        }
        let max_order = MAX_WP_ORDER as usize + 2;
        if let Some(o) = self.orders.iter().find(|&&o| !(3..=max_order).contains(&o)) {
            return bad(format!("order {o} outside 3..={max_order}"));
        }
        if !(self.sampling_margin >= 0.0) {
            return bad("sampling margin must be nonnegative".into());
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> C64 {
        let re = rng.random_range(self.re_range.0..self.re_range.1);
        let im = rng.random_range(self.im_range.0..self.im_range.1);
        C64::new(re, im)
    }
}

/// One evaluation point. `z[a - 1]` is the spectral parameter of leg `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub z: Vec<C64>,
    pub hbar: C64,
    pub eta: C64,
    pub u: DynVector,
}

/// One cell of the run grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub n: usize,
    pub case: CaseTag,
    pub tau: Option<C64>,
    pub order: Option<usize>,
}

/// Evaluation context of a cell.
#[derive(Debug, Clone)]
pub struct EvalCtx {
    pub kernel: Kernel,
    pub n: usize,
    pub order: Option<usize>,
    pub convention: BbConvention,
    pub target: Target,
}

impl EvalCtx {
    pub fn new(target: Target, convention: BbConvention, sampling_margin: f64) -> Result<Self> {
        let kernel = Kernel::new(target.case.kind(target.tau)?)?.with_sampling_margin(sampling_margin);
        Ok(Self { kernel, n: target.n, order: target.order, convention, target })
    }
}

/// Residual of a check at a point.
pub type Evaluator = fn(&EvalCtx, &SamplePoint) -> Result<f64>;

/// Cheap admissibility test run before the evaluator during sampling.
pub type Guard = fn(&EvalCtx, &SamplePoint) -> Result<()>;

/// Which ranks a check runs at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankRule {
    /// Every rank of the plan.
    Any,
    /// Only `N = 1`, when the plan includes it.
    OnlyOne,
    /// Independent of the rank; runs once per case and modulus.
    Scalar,
}

/// A catalog entry.
#[derive(Clone)]
pub struct IdentityCheck {
    pub id: &'static str,
    /// The identity in plain formula notation.
    pub paper_eq: &'static str,
    pub families: &'static [Family],
    /// Tensor legs of the operators compared; `0` for scalar identities and
    /// the order `n` for the n-th order identities.
    pub n_legs: usize,
    pub cases: &'static [CaseTag],
    pub ranks: RankRule,
    /// Number of sampled spectral parameters (`None`: the order).
    pub n_z: Option<usize>,
    pub tolerance: f64,
    /// The tolerance belongs to a non-relative metric and is not replaced by
    /// a run-wide tolerance.
    pub fixed_tolerance: bool,
    pub uses_orders: bool,
    pub evaluator: Evaluator,
    pub guard: Option<Guard>,
    pub note: &'static str,
}

impl fmt::Debug for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdentityCheck")
            .field("id", &self.id)
            .field("paper_eq", &self.paper_eq)
            .field("families", &self.families)
            .field("cases", &self.cases)
            .finish_non_exhaustive()
    }
}

impl IdentityCheck {
    pub fn n_z_for(&self, order: Option<usize>) -> usize {
        self.n_z.or(order).unwrap_or(3)
    }

    pub fn n_legs_for(&self, order: Option<usize>) -> usize {
        if self.uses_orders {
            order.unwrap_or(self.n_legs)
        } else {
            self.n_legs
        }
    }

    /// Tolerance in effect when a run-wide tolerance `tol` is requested.
    pub fn effective_tolerance(&self, tol: Option<f64>) -> f64 {
        match tol {
            Some(t) if !self.fixed_tolerance => t,
            _ => self.tolerance,
        }
    }

    /// Cells of this check under `plan`, in report order.
    pub fn targets(&self, plan: &SamplePlan) -> Vec<Target> {
        let ns: Vec<usize> = match self.ranks {
            RankRule::Any => plan.ns.clone(),
            RankRule::OnlyOne => plan.ns.iter().copied().filter(|&n| n == 1).collect(),
            RankRule::Scalar => vec![1],
        };
        let orders: Vec<Option<usize>> =
            if self.uses_orders { plan.orders.iter().map(|&o| Some(o)).collect() } else { vec![None] };
        let mut out = Vec::new();
        for case in CaseTag::ALL.iter().filter(|c| self.cases.contains(c) && plan.cases.contains(c)) {
            let taus: Vec<Option<C64>> =
                if *case == CaseTag::Elliptic { plan.taus.iter().map(|&t| Some(t)).collect() } else { vec![None] };
            for &n in &ns {
                for &tau in &taus {
                    for &order in &orders {
                        out.push(Target { n, case: *case, tau, order });
                    }
                }
            }
        }
        out
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn cell_seed(seed: u64, id: &str, t: &Target) -> u64 {
    let (re, im) = t.tau.map_or((0, 0), |c| (c.re.to_bits(), c.im.to_bits()));
    [fnv1a(id), t.n as u64, t.case as u64, re, im, t.order.unwrap_or(0) as u64]
        .iter()
        .fold(splitmix(seed), |acc, &v| splitmix(acc ^ v))
}

/// Whether an evaluation error marks the point as inadmissible.
fn is_rejection(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularArgument { .. }
            | Error::SingularMatrix
            | Error::ExtrapolationUnstable { .. }
            | Error::InvalidDynVector(_)
    )
}

fn draw_point(plan: &SamplePlan, ctx: &EvalCtx, n_z: usize, rng: &mut ChaCha8Rng) -> Result<SamplePoint> {
    let z = (0..n_z).map(|_| plan.draw(rng)).collect();
    let hbar = plan.draw(rng);
    let eta = plan.draw(rng);
    let values: Vec<C64> = (0..ctx.n).map(|_| plan.draw(rng)).collect();
    let margin = ctx.kernel.sampling_margin().max(DELTA_SING);
    for i in 0..values.len() {
        for j in 0..i {
            if ctx.kernel.lattice_distance(values[i] - values[j]) <= margin {
                return Err(Error::InvalidDynVector("components too close".into()));
            }
        }
    }
    Ok(SamplePoint { z, hbar, eta, u: DynVector::new(values, &ctx.kernel)? })
}

/// Draws points until `plan.count` are accepted, returning each accepted
/// point with its residual. A point is accepted when the guard and the
/// evaluator succeed under the sampling margin.
fn sample_and_evaluate(
    plan: &SamplePlan,
    check: &IdentityCheck,
    ctx: &EvalCtx,
) -> Result<Vec<(SamplePoint, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(plan.seed, check.id, &ctx.target));
    let n_z = check.n_z_for(ctx.order);
    let mut accepted = Vec::with_capacity(plan.count);
    let mut rejects = 0usize;
    while accepted.len() < plan.count {
        let attempt = draw_point(plan, ctx, n_z, &mut rng).and_then(|p| {
            if let Some(guard) = check.guard {
                guard(ctx, &p)?;
            }
            let r = (check.evaluator)(ctx, &p)?;
            Ok((p, r))
        });
        match attempt {
            Ok(pr) => accepted.push(pr),
            Err(e) if is_rejection(&e) => {
                rejects += 1;
                if rejects >= plan.max_rejects {
                    return Err(Error::SamplingExhausted { check: check.id.to_string(), rejects });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(accepted)
}

/// Deterministic admissible sample points of `check` in the cell of `ctx`.
pub fn sample_points(plan: &SamplePlan, check: &IdentityCheck, ctx: &EvalCtx) -> Result<Vec<SamplePoint>> {
    plan.validate()?;
    Ok(sample_and_evaluate(plan, check, ctx)?.into_iter().map(|(p, _)| p).collect())
}

fn aggregate(check: &IdentityCheck, ctx: &EvalCtx, results: Vec<Result<f64>>, tol: f64) -> CheckReport {
    let mut failed_points = Vec::new();
    let mut max = None::<f64>;
    let mut sum = 0.0;
    let mut ok = 0usize;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(v) => {
                let v = if v.is_nan() { f64::INFINITY } else { *v };
                max = Some(max.map_or(v, |m| m.max(v)));
                sum += v;
                ok += 1;
            }
            Err(e) => failed_points.push(report::FailedPoint { index: i, error: e.to_string() }),
        }
    }
    let mean = (ok > 0).then(|| sum / ok as f64);
    let pass = failed_points.is_empty() && max.is_some_and(|m| m < tol);
    let t = ctx.target;
    CheckReport {
        id: check.id.to_string(),
        paper_eq: check.paper_eq.to_string(),
        n: t.n,
        case: t.case,
        tau: t.tau.map(|c| [c.re, c.im]),
        order: t.order,
        samples: results.len(),
        max_residual: max,
        mean_residual: mean,
        tolerance: tol,
        pass,
        note: check_note(check, t.order),
        failed_points,
    }
}

fn check_note(check: &IdentityCheck, order: Option<usize>) -> String {
    match order {
        Some(n) if check.uses_orders => format!(
            "{} summed orderings: {}; adjacent-distinct sequences: {}",
            check.note,
            (1..n).product::<usize>(),
            checks::adjacent_distinct_count(n)
        ),
        _ => check.note.to_string(),
    }
}

/// Evaluates `check` at `points`; evaluation errors are recorded per point.
pub fn run_check(check: &IdentityCheck, ctx: &EvalCtx, points: &[SamplePoint], tol: f64) -> CheckReport {
    let results = par_map(points, |p| (check.evaluator)(ctx, p));
    aggregate(check, ctx, results, tol)
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Runs `f` on a pool of `threads` workers (`0`: one per core).
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidPlan(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs `f` on the calling thread.
#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}

/// Picks the Baxter-Belavin normalization under which unitarity
/// `R12(z) R21(-z) = ℘(ħ) - ℘(z)` holds at a fixed elliptic test point.
pub fn pin_bb_convention() -> Result<(BbConvention, String)> {
    let kernel = Kernel::new(CaseKind::elliptic(C64::new(0.0, 1.0))?)?;
    let (n, h, z) = (2, C64::new(0.13, 0.07), C64::new(0.31, -0.12));
    let rhs = TensorOperator::identity(2, n).scale(kernel.wp(h, 0)? - kernel.wp(z, 0)?);
    for (convention, text) in [
        (BbConvention::AsPrinted, "(1/N) Σ_a φ_a(z) T_a ⊗ T_-a with sections at ħ"),
        (BbConvention::RescaledPlanck, "N R^{Nħ}(z)"),
    ] {
        let r12 = bb_with_convention(&kernel, convention, n, h, z)?;
        let r21 = embed(&bb_with_convention(&kernel, convention, n, h, -z)?, &[2, 1], 2)?;
        if residual_norm(&r12.matmul(&r21)?, &rhs)? < 1e-10 {
            let note = format!(
                "Baxter-Belavin normalization {text}; pinned by R12(z) R21(-z) = ℘(ħ) - ℘(z) at N = 2"
            );
            return Ok((convention, note));
        }
    }
    Err(Error::InvalidPlan("no Baxter-Belavin normalization satisfies unitarity".into()))
}

/// Runs the selected checks (all when `ids` is empty) over their grids.
/// `tol` replaces each check's default tolerance except for fixed metrics.
pub fn run_suite(plan: &SamplePlan, ids: &[String], tol: Option<f64>) -> Result<SuiteReport> {
    let (note, checks) = evaluate_suite(plan, ids, tol)?;
    Ok(SuiteReport::new(note, checks))
}

/// The check reports of [`run_suite`] with the normalization note, without
/// the run header.
pub fn evaluate_suite(plan: &SamplePlan, ids: &[String], tol: Option<f64>) -> Result<(String, Vec<CheckReport>)> {
    plan.validate()?;
    let all = catalog();
    let selected: Vec<&IdentityCheck> = if ids.is_empty() {
        all.iter().collect()
    } else {
        ids.iter()
            .map(|id| all.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCheck(id.clone())))
            .collect::<Result<_>>()?
    };
    let (convention, note) = pin_bb_convention()?;
    let cells: Vec<(&IdentityCheck, Target)> =
        selected.iter().flat_map(|c| c.targets(plan).into_iter().map(move |t| (*c, t))).collect();
    let reports = par_map(&cells, |(check, target)| -> Result<CheckReport> {
        let ctx = EvalCtx::new(*target, convention, plan.sampling_margin)?;
        let tol = check.effective_tolerance(tol);
        let evaluated = sample_and_evaluate(plan, check, &ctx)?;
        Ok(aggregate(check, &ctx, evaluated.into_iter().map(|(_, r)| Ok(r)).collect(), tol))
    });
    Ok((note, reports.into_iter().collect::<Result<_>>()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(id: &str, n: usize, case: CaseTag) -> (IdentityCheck, EvalCtx) {
        let check = find_check(id).unwrap().clone();
        let tau = (case == CaseTag::Elliptic).then(|| C64::new(0.0, 1.0));
        let t = Target { n, case, tau, order: None };
        (check, EvalCtx::new(t, BbConvention::AsPrinted, SAMPLING_MARGIN).unwrap())
    }

    #[test]
    fn sampling_is_deterministic() {
        let plan = SamplePlan { count: 5, seed: 11, ..SamplePlan::default() };
        let (check, c) = ctx("UNIT-BB", 2, CaseTag::Elliptic);
        assert_eq!(sample_points(&plan, &check, &c).unwrap(), sample_points(&plan, &check, &c).unwrap());
        let other = SamplePlan { seed: 12, ..plan.clone() };
        assert_ne!(sample_points(&plan, &check, &c).unwrap(), sample_points(&other, &check, &c).unwrap());
    }

    #[test]
    fn accepted_points_reverify() {
        let plan = SamplePlan { count: 10, seed: 3, ..SamplePlan::default() };
        let (check, c) = ctx("AYBE-ACF", 2, CaseTag::Trigonometric);
        for p in sample_points(&plan, &check, &c).unwrap() {
            assert!((check.evaluator)(&c, &p).is_ok());
        }
    }

    #[test]
    fn exhausted_sampling_is_reported() {
        let plan = SamplePlan { count: 3, max_rejects: 5, re_range: (0.0, 1e-5), im_range: (0.0, 1e-5), ..SamplePlan::default() };
        let (check, c) = ctx("UNIT-BB", 2, CaseTag::Elliptic);
        assert!(matches!(sample_points(&plan, &check, &c), Err(Error::SamplingExhausted { .. })));
    }

    #[test]
    fn per_point_errors_are_recorded() {
        let (check, c) = ctx("FAY", 1, CaseTag::Elliptic);
        let u = DynVector::new(vec![C64::new(0.0, 0.0)], &c.kernel).unwrap();
        let zero = C64::new(0.0, 0.0);
        let p = SamplePoint { z: vec![zero, zero], hbar: C64::new(0.1, 0.0), eta: C64::new(0.2, 0.0), u };
        let rep = run_check(&check, &c, &[p], 1e-9);
        assert!(!rep.pass);
        assert_eq!(rep.failed_points.len(), 1);
    }

    #[test]
    fn plan_validation() {
        assert!(SamplePlan { count: 0, ..SamplePlan::default() }.validate().is_err());
        assert!(SamplePlan { taus: vec![C64::new(0.0, 0.01)], ..SamplePlan::default() }.validate().is_err());
        assert!(SamplePlan { orders: vec![2], ..SamplePlan::default() }.validate().is_err());
        assert!(SamplePlan::default().validate().is_ok());
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let plan = SamplePlan { count: 1, ..SamplePlan::default() };
        assert!(matches!(run_suite(&plan, &["NOSUCH".into()], None), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn convention_is_pinned() {
        let (conv, note) = pin_bb_convention().unwrap();
        assert_eq!(conv, BbConvention::AsPrinted);
        assert!(note.contains("Baxter-Belavin"));
    }

    #[test]
    fn scalar_checks_run_once_per_modulus() {
        let plan = SamplePlan::default();
        assert_eq!(find_check("FAY").unwrap().targets(&plan).len(), 4);
        assert_eq!(find_check("SCAL-ACF").unwrap().targets(&plan).len(), 4);
        assert_eq!(find_check("NORD-BB").unwrap().targets(&plan).len(), 3 * 2 * 3);
    }
}
