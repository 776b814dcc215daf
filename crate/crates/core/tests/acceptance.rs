//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::time::Instant;

use num_complex::Complex64 as C64;
use ybx_core::identity_suite::checks::{
    acf_cubic_lhs, acf_cubic_sum_lhs, acf_sdybe_sides, bb_cubic_sum_lhs, felder_gnf_sides,
    felder_transformed_cubic_sides, gauge_lhs, nord_sum, NordFamily, GAUGE_SHIFT,
};
use ybx_core::identity_suite::{
    evaluate_suite, find_check, pin_bb_convention, run_suite, sample_points, with_threads, CaseTag,
    CheckReport, EvalCtx, SamplePlan, SamplePoint, Target,
};
use ybx_core::tensor_alg::residual_norm;
use ybx_core::{Error, Result};

const SEED: u64 = 20_240_611;
const TAU_I: C64 = C64 { re: 0.0, im: 1.0 };
const TAU_2: C64 = C64 { re: 0.3, im: 0.8 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn plan(count: usize, ns: &[usize], cases: &[CaseTag]) -> SamplePlan {
    SamplePlan {
        seed: SEED,
        count,
        ns: ns.to_vec(),
        cases: cases.to_vec(),
        taus: vec![TAU_I, TAU_2],
        ..SamplePlan::default()
    }
}

fn ids(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Summary of reports: all pass, worst residual, and the failing cells.
fn summarize(reports: &[CheckReport]) -> Outcome {
    let worst = reports.iter().filter_map(|r| r.max_residual).fold(0.0f64, f64::max);
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} N={} {} {:?} order={:?} max={:?}", r.id, r.n, r.case, r.tau, r.order, r.max_residual))
        .collect();
    Outcome {
        pass: failed.is_empty() && !reports.is_empty(),
        detail: if failed.is_empty() {
            format!("{} cells, worst residual {worst:.2e}", reports.len())
        } else {
            format!("failing cells: {}", failed.join("; "))
        },
    }
}

fn suite(p: &SamplePlan, list: &[&str], tol: Option<f64>) -> Result<Vec<CheckReport>> {
    Ok(evaluate_suite(p, &ids(list), tol)?.1)
}

/// Sample points of `id` in one cell together with the cell's context.
fn cell_points(id: &str, p: &SamplePlan, target: Target) -> Result<(EvalCtx, Vec<SamplePoint>)> {
    let (convention, _) = pin_bb_convention()?;
    let ctx = EvalCtx::new(target, convention, p.sampling_margin)?;
    let check = find_check(id).expect("catalog id");
    let pts = sample_points(p, check, &ctx)?;
    Ok((ctx, pts))
}

/// Largest value of `f` over points, skipping points where a substituted
/// argument is singular. Returns the worst value and the number skipped.
fn worst_over(pts: &[SamplePoint], mut f: impl FnMut(&SamplePoint) -> Result<f64>) -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for p in pts {
        match f(p) {
            Ok(v) => worst = worst.max(if v.is_nan() { f64::INFINITY } else { v }),
            Err(Error::SingularArgument { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((worst, skipped))
}

fn targets(ns: &[usize], cases: &[CaseTag]) -> Vec<Target> {
    let mut out = Vec::new();
    for &case in cases {
        let taus = if case == CaseTag::Elliptic { vec![Some(TAU_I), Some(TAU_2)] } else { vec![None] };
        for &n in ns {
            for &tau in &taus {
                out.push(Target { n, case, tau, order: None });
            }
        }
    }
    out
}

fn scalar_kernel() -> Result<Outcome> {
    let start = Instant::now();
    let reports = suite(&plan(200, &[1], &CaseTag::ALL), &["FAY", "FAYDEG-1", "FAYDEG-2", "SCALRATIO"], Some(1e-10))?;
    let secs = start.elapsed().as_secs_f64();
    let mut out = summarize(&reports);
    out.pass &= reports.len() == 16 && secs < 5.0;
    out.detail = format!("{}; {secs:.2} s (limit 5 s)", out.detail);
    Ok(out)
}

fn baxter_belavin() -> Result<Outcome> {
    let list = ["UNIT-BB", "SKEW-BB", "QYBE-BB", "AYBE-BB", "CUBIC-BB", "CUBSUM-BB"];
    let report = run_suite(&plan(50, &[1, 2, 3], &[CaseTag::Elliptic]), &ids(&list), Some(1e-9))?;
    let mut out = summarize(&report.checks);
    let named = report.header.convention_note.contains("Baxter-Belavin");
    out.pass &= named && report.checks.len() == list.len() * 3 * 2;
    out.detail = format!("{}; convention: {}", out.detail, report.header.convention_note);
    Ok(out)
}

fn theorem_one() -> Result<Outcome> {
    let p = plan(50, &[1, 2, 3], &CaseTag::ALL);
    let reports = suite(&p, &["AYBE-ACF", "CUBIC-ACF"], Some(1e-9))?;
    let mut out = summarize(&reports);
    out.pass &= reports.len() == 2 * 3 * 4;
    let (mut sdybe, mut cubsum, mut skipped) = (0.0f64, 0.0f64, 0);
    for t in targets(&[1, 2, 3], &CaseTag::ALL) {
        let (ctx, pts) = cell_points("CUBIC-ACF", &p, t)?;
        let (a, s1) = worst_over(&pts, |q| {
            let (l, r) = acf_sdybe_sides(&ctx, &q.z, q.hbar, &q.u)?;
            residual_norm(&acf_cubic_lhs(&ctx, &q.z, q.hbar, q.hbar, &q.u)?, &l.sub(&r)?)
        })?;
        let (b, s2) = worst_over(&pts, |q| {
            residual_norm(&acf_cubic_lhs(&ctx, &q.z, q.hbar, -q.hbar, &q.u)?, &acf_cubic_sum_lhs(&ctx, &q.z, q.hbar, &q.u)?)
        })?;
        sdybe = sdybe.max(a);
        cubsum = cubsum.max(b);
        skipped += s1 + s2;
    }
    out.pass &= sdybe < 1e-9 && cubsum < 1e-9;
    out.detail = format!("{}; η=ħ vs SDYBE {sdybe:.2e}, η=-ħ vs CUBSUM {cubsum:.2e} ({skipped} skipped)", out.detail);
    Ok(out)
}

fn theorem_two() -> Result<Outcome> {
    let p = plan(50, &[2, 3], &[CaseTag::Elliptic]);
    let reports = suite(&p, &["GAUGE-ACF", "TWIST-G"], Some(1e-9))?;
    let mut out = summarize(&reports);
    let mut shift = 0.0f64;
    for t in targets(&[2, 3], &[CaseTag::Elliptic]) {
        let (ctx, pts) = cell_points("GAUGE-ACF", &p, t)?;
        let (w, _) = worst_over(&pts, |q| {
            let (z1, z2) = (q.z[0], q.z[1]);
            let base = gauge_lhs(&ctx, q.hbar, z1, z2, &q.u)?;
            residual_norm(&gauge_lhs(&ctx, q.hbar, z1 + GAUGE_SHIFT, z2 + GAUGE_SHIFT, &q.u)?, &base)
        })?;
        shift = shift.max(w);
    }
    out.pass &= shift < 1e-9 && reports.len() == 8;
    out.detail = format!("{}; shift by c = 0.1+0.05i changes the gauge side by {shift:.2e}", out.detail);
    Ok(out)
}

fn higher_order() -> Result<Outcome> {
    let p = SamplePlan { orders: vec![3, 4, 5], ..plan(20, &[2], &CaseTag::ALL) };
    let reports = suite(&p, &["NORD-BB", "NORD-ACF"], Some(1e-8))?;
    let mut out = summarize(&reports);
    out.pass &= reports.len() == 3 * 2 + 3 * 4;
    let mut term = 0.0f64;
    for t in targets(&[2], &CaseTag::ALL) {
        let t3 = Target { order: Some(3), ..t };
        let (ctx, pts) = cell_points("NORD-ACF", &p, t3)?;
        let (w, _) = worst_over(&pts, |q| {
            residual_norm(&nord_sum(&ctx, NordFamily::Acf, &q.z[..3], q.hbar, &q.u, 1)?, &acf_cubic_sum_lhs(&ctx, &q.z, q.hbar, &q.u)?)
        })?;
        term = term.max(w);
        if t.case == CaseTag::Elliptic {
            let (ctx, pts) = cell_points("NORD-BB", &p, t3)?;
            let (w, _) = worst_over(&pts, |q| {
                residual_norm(&nord_sum(&ctx, NordFamily::BaxterBelavin, &q.z[..3], q.hbar, &q.u, 1)?, &bb_cubic_sum_lhs(&ctx, &q.z, q.hbar)?)
            })?;
            term = term.max(w);
        }
    }
    out.pass &= term < 1e-13;
    out.detail = format!("{}; n=3 sum vs cubic sum {term:.2e}", out.detail);
    Ok(out)
}

fn irf_vertex() -> Result<Outcome> {
    let p = plan(50, &[2, 3], &[CaseTag::Elliptic]);
    let mut reports = suite(&p, &["IRFV", "TWIST-REL-1", "TWIST-REL-2", "HASEGAWA", "MATTHETA"], Some(1e-9))?;
    reports.extend(suite(&p, &["DETG"], Some(1e-10))?);
    let out = summarize(&reports);
    Ok(Outcome { pass: out.pass && reports.len() == 6 * 4, ..out })
}

fn felder() -> Result<Outcome> {
    let p = plan(50, &[2, 3], &[CaseTag::Elliptic]);
    let mut reports = suite(&p, &["UNIT-F", "SKEW-F", "GNF-F", "WEIGHT0-F", "TCUBIC-F"], Some(1e-9))?;
    reports.extend(suite(&plan(50, &[2, 3], &[CaseTag::Rational]), &["RATDEF-F"], Some(1e-12))?);
    let mut out = summarize(&reports);
    let (mut gnf, mut diag) = (0.0f64, 0.0f64);
    for t in targets(&[2, 3], &[CaseTag::Elliptic]) {
        let (ctx, pts) = cell_points("TCUBIC-F", &p, t)?;
        let (a, _) = worst_over(&pts, |q| {
            let (l, r) = felder_transformed_cubic_sides(&ctx, &q.z, q.hbar, q.hbar, &q.u)?;
            residual_norm(&l, &r)
        })?;
        let (b, _) = worst_over(&pts, |q| {
            let (l, r) = felder_gnf_sides(&ctx, &q.z, q.hbar, &q.u)?;
            residual_norm(&l, &r)
        })?;
        diag = diag.max(a);
        gnf = gnf.max(b);
    }
    out.pass &= diag < 1e-9 && gnf < 1e-9 && reports.len() == 5 * 4 + 2;
    out.detail = format!("{}; ħ=η transformed cubic {diag:.2e}, GNF at the same points {gnf:.2e}", out.detail);
    Ok(out)
}

fn burban_henrich() -> Result<Outcome> {
    let reports = suite(&plan(50, &[2, 3], &[CaseTag::Elliptic]), &["AYBE-BH", "SKEW-BH", "UNITDEF-BH"], Some(1e-9))?;
    let out = summarize(&reports);
    Ok(Outcome { pass: out.pass && reports.len() == 3 * 4, ..out })
}

fn limits() -> Result<Outcome> {
    let reports = suite(&plan(20, &[1, 2, 3], &CaseTag::ALL), &["RES-ACF", "HBAR0-ACF"], None)?;
    let out = summarize(&reports);
    let ratio = reports.iter().filter(|r| r.id == "HBAR0-ACF").filter_map(|r| r.max_residual).fold(0.0f64, f64::max);
    let residue = reports.iter().filter(|r| r.id == "RES-ACF").filter_map(|r| r.max_residual).fold(0.0f64, f64::max);
    Ok(Outcome {
        pass: out.pass && reports.len() == 2 * 3 * 4,
        detail: format!("{}; max |ratio-2| {ratio:.2e} (limit 0.05), residue deviation {residue:.2e} (limit 1e-8)", out.detail),
    })
}

fn determinism() -> Result<Outcome> {
    let p = SamplePlan { seed: SEED, ..SamplePlan::default() };
    let start = Instant::now();
    let one = with_threads(1, || run_suite(&p, &[], None))??;
    let secs = start.elapsed().as_secs_f64();
    let eight = with_threads(8, || run_suite(&p, &[], None))??;
    let same = one.payload_json() == eight.payload_json();
    let failed: Vec<String> = one
        .checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} N={} {} order={:?} max={:?}", c.id, c.n, c.case, c.order, c.max_residual))
        .collect();
    Ok(Outcome {
        pass: same && secs < 60.0,
        detail: format!(
            "payloads identical across 1 and 8 threads: {same}; full default suite {} cells in {secs:.1} s (limit 60 s); cells over tolerance: {}",
            one.checks.len(),
            if failed.is_empty() { "none".to_string() } else { failed.join(", ") }
        ),
    })
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("scalar kernel", scalar_kernel),
        ("Baxter-Belavin", baxter_belavin),
        ("ACF associative and cubic", theorem_one),
        ("gauge and twist by the intertwiner", theorem_two),
        ("higher-order identities", higher_order),
        ("IRF-Vertex", irf_vertex),
        ("Felder", felder),
        ("Burban-Henrich", burban_henrich),
        ("limits and residues", limits),
        ("determinism and runtime", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        if !out.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
