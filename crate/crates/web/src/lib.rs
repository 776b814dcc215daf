//! Browser bindings for the ybx demo page.
//!
//! Each exported function has a plain Rust counterpart returning
//! `Result<_, String>`, which the native tests exercise.

use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;
use ybx_core::identity_suite::{catalog, evaluate_suite, CaseTag, SamplePlan};
use ybx_core::rmatrices::{acf, bb, bh, felder, DynVector, Family};
use ybx_core::special_fn::{CaseKind, Kernel};

fn case_kind(case: &str, tau: C64) -> Result<CaseKind, String> {
    let tag: CaseTag = case.parse().map_err(|e: ybx_core::Error| e.to_string())?;
    tag.kind(Some(tau)).map_err(|e| e.to_string())
}

/// `log10 |φ(η, z)|` on a `size × size` grid over the square
/// `|Re z|, |Im z| ≤ half_width`, row by row from the top. Singular grid
/// points give `NaN`.
pub fn kronecker_field(case: &str, tau: C64, eta: C64, half_width: f64, size: usize) -> Result<Vec<f64>, String> {
    if half_width.is_nan() || half_width <= 0.0 || size == 0 || size > 1024 {
        return Err("grid needs a positive half width and 1..=1024 points per side".into());
    }
    let kernel = Kernel::new(case_kind(case, tau)?).map_err(|e| e.to_string())?;
    let step = if size > 1 { 2.0 * half_width / (size - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let z = C64::new(-half_width + col as f64 * step, half_width - row as f64 * step);
            out.push(kernel.kronecker(eta, z).map_or(f64::NAN, |v| v.norm().log10()));
        }
    }
    Ok(out)
}

/// JSON array of the check reports of `id` at one rank, case and modulus.
pub fn scan_check_json(id: &str, n: usize, case: &str, tau: C64, seed: u64, samples: usize) -> Result<String, String> {
    let plan = SamplePlan {
        seed,
        count: samples,
        ns: vec![n],
        cases: vec![case.parse().map_err(|e: ybx_core::Error| e.to_string())?],
        taus: vec![tau],
        ..SamplePlan::default()
    };
    let (_, checks) = evaluate_suite(&plan, &[id.to_string()], None).map_err(|e| e.to_string())?;
    serde_json::to_string(&checks).map_err(|e| e.to_string())
}

/// Entry moduli of an R-matrix as an `N² × N²` row-major array, with the
/// dynamical parameters `u_k = k (0.17 + 0.06i)`.
pub fn rmatrix_moduli(family: &str, n: usize, case: &str, tau: C64, hbar: C64, z1: C64, z2: C64) -> Result<Vec<f64>, String> {
    if n == 0 || n > 6 {
        return Err("rank must be between 1 and 6".into());
    }
    let kernel = Kernel::new(case_kind(case, tau)?).map_err(|e| e.to_string())?;
    let u = DynVector::new((0..n).map(|k| C64::new(0.17, 0.06) * k as f64).collect(), &kernel)
        .map_err(|e| e.to_string())?;
    let op = match family {
        "BaxterBelavin" => bb(&kernel, n, hbar, z1 - z2),
        "Felder" => felder(&kernel, n, hbar, z1 - z2, &u),
        "ACF" => acf(&kernel, n, hbar, z1, z2, &u),
        "BurbanHenrich" => bh(&kernel, n, hbar, z1 - z2, &u),
        other => return Err(format!("unknown family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    Ok(op.matrix().to_row_major().iter().map(|v| v.norm()).collect())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = checkIds)]
pub fn check_ids() -> Vec<String> {
    catalog().iter().map(|c| c.id.to_string()).collect()
}

#[wasm_bindgen(js_name = familyNames)]
pub fn family_names() -> Vec<String> {
    [Family::BaxterBelavin, Family::Felder, Family::Acf, Family::BurbanHenrich]
        .iter()
        .map(|f| f.name().to_string())
        .collect()
}

#[wasm_bindgen(js_name = kroneckerField)]
pub fn kronecker_field_js(
    case: &str,
    tau_re: f64,
    tau_im: f64,
    eta_re: f64,
    eta_im: f64,
    half_width: f64,
    size: usize,
) -> Result<Vec<f64>, JsError> {
    kronecker_field(case, C64::new(tau_re, tau_im), C64::new(eta_re, eta_im), half_width, size).map_err(js)
}

#[wasm_bindgen(js_name = scanCheck)]
pub fn scan_check_js(
    id: &str,
    n: usize,
    case: &str,
    tau_re: f64,
    tau_im: f64,
    seed: u32,
    samples: usize,
) -> Result<String, JsError> {
    scan_check_json(id, n, case, C64::new(tau_re, tau_im), seed.into(), samples).map_err(js)
}

#[wasm_bindgen(js_name = rmatrixModuli)]
#[allow(clippy::too_many_arguments)]
pub fn rmatrix_moduli_js(
    family: &str,
    n: usize,
    case: &str,
    tau_re: f64,
    tau_im: f64,
    hbar_re: f64,
    hbar_im: f64,
    z1_re: f64,
    z1_im: f64,
    z2_re: f64,
    z2_im: f64,
) -> Result<Vec<f64>, JsError> {
    rmatrix_moduli(
        family,
        n,
        case,
        C64::new(tau_re, tau_im),
        C64::new(hbar_re, hbar_im),
        C64::new(z1_re, z1_im),
        C64::new(z2_re, z2_im),
    )
    .map_err(js)
}
