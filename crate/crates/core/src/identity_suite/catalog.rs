use std::sync::OnceLock;

use super::checks as c;
use super::{CaseTag, Evaluator, Guard, IdentityCheck, RankRule, DEFAULT_TOLERANCE};
use crate::rmatrices::Family;

const ALL: &[CaseTag] = &CaseTag::ALL;
const ELL: &[CaseTag] = &[CaseTag::Elliptic];
const RAT: &[CaseTag] = &[CaseTag::Rational];
const RAT_ELL: &[CaseTag] = &[CaseTag::Rational, CaseTag::Elliptic];

const BB: &[Family] = &[Family::BaxterBelavin];
const F: &[Family] = &[Family::Felder];
const ACF: &[Family] = &[Family::Acf];
const BH: &[Family] = &[Family::BurbanHenrich];
const IRF: &[Family] = &[Family::Felder, Family::BaxterBelavin];
const TWIST: &[Family] = &[Family::TwistRbar, Family::TwistRbarInv];
const TWIST_F: &[Family] = &[Family::TwistRbar, Family::Felder, Family::Acf];
const GAUGE: &[Family] = &[Family::Acf, Family::BaxterBelavin];
const NONE: &[Family] = &[];

struct Entry {
    id: &'static str,
    eq: &'static str,
    families: &'static [Family],
    n_legs: usize,
    cases: &'static [CaseTag],
    n_z: usize,
    eval: Evaluator,
}

impl Entry {
    fn check(self) -> IdentityCheck {
        IdentityCheck {
            id: self.id,
            paper_eq: self.eq,
            families: self.families,
            n_legs: self.n_legs,
            cases: self.cases,
            ranks: if self.n_legs == 0 { RankRule::Scalar } else { RankRule::Any },
            n_z: Some(self.n_z),
            tolerance: if self.n_legs == 0 { 1e-10 } else { DEFAULT_TOLERANCE },
            fixed_tolerance: false,
            uses_orders: false,
            evaluator: self.eval,
            guard: None,
            note: "",
        }
    }
}

fn e(
    id: &'static str,
    eq: &'static str,
    families: &'static [Family],
    n_legs: usize,
    cases: &'static [CaseTag],
    n_z: usize,
    eval: Evaluator,
) -> IdentityCheck {
    Entry { id, eq, families, n_legs, cases, n_z, eval }.check()
}

fn nord(id: &'static str, eq: &'static str, families: &'static [Family], cases: &'static [CaseTag], eval: Evaluator, guard: Guard) -> IdentityCheck {
    IdentityCheck {
        n_legs: 5,
        n_z: None,
        tolerance: 1e-8,
        uses_orders: true,
        guard: Some(guard),
        note: "sum over orderings of {1..n} without a = 1;",
        ..e(id, eq, families, 5, cases, 0, eval)
    }
}

fn build() -> Vec<IdentityCheck> {
    vec![
        e("FAY", "φ(ħ,z)φ(η,w) = φ(ħ-η,z)φ(η,z+w) + φ(η-ħ,w)φ(ħ,z+w)", NONE, 0, ALL, 2, c::fay),
        e("FAYDEG-1", "φ(η,z)φ(η,w) = φ(η,z+w)(E1(η) + E1(z) + E1(w) - E1(z+w+η))", NONE, 0, ALL, 2, c::fay_degeneration_e1),
        e("FAYDEG-2", "φ(ħ,z)φ(ħ,-z) = ℘(ħ) - ℘(z)", NONE, 0, ALL, 1, c::fay_degeneration_wp),
        e(
            "SCALRATIO",
            "φ(ħ,z2+η)φ(η,z3+ħ)/(φ(ħ,z1+η)φ(η,z2+ħ)) = φ(ħ-η,z2+η)φ(η,z3+ħ)/(φ(ħ-η,z1+η)φ(η,z1+ħ)) = φ(η-ħ,z3+ħ)φ(ħ,z3+η)/(φ(η-ħ,z2+ħ)φ(ħ,z1+η)) = ϑ(z1+η)ϑ(z2+ħ)ϑ(z3+η+ħ)/(ϑ(z1+ħ+η)ϑ(z2+η)ϑ(z3+ħ))",
            NONE, 0, ALL, 3, c::scalar_ratio,
        ),
        e("UNIT-BB", "R12(ħ,z) R21(ħ,-z) = (℘(ħ) - ℘(z)) 1⊗1", BB, 2, ELL, 2, c::bb_unitarity),
        e("SKEW-BB", "R12(ħ,z) = -R21(-ħ,-z)", BB, 2, ELL, 2, c::bb_skew),
        e("QYBE-BB", "R12 R13 R23 = R23 R13 R12, R_ab = R(ħ,z_a-z_b)", BB, 3, ELL, 3, c::bb_qybe),
        e("AYBE-BB", "R12^ħ R23^η = R13^η R12^{ħ-η} + R23^{η-ħ} R13^ħ", BB, 3, ELL, 3, c::bb_aybe),
        e("CUBIC-BB", "R12^η R13^ħ R23^η - R23^ħ R13^η R12^ħ = (℘(η) - ℘(ħ)) R13^{ħ+η}", BB, 3, ELL, 3, c::bb_cubic),
        e("CUBSUM-BB", "R12 R23 R31 + R13 R32 R21 = -℘'(ħ) 1", BB, 3, ELL, 3, c::bb_cubic_sum),
        e("UNIT-F", "R^F12(ħ,z|u) R^F21(ħ,-z|u) = (℘(ħ) - ℘(z)) 1⊗1", F, 2, RAT_ELL, 2, c::felder_unitarity),
        e("SKEW-F", "R^F12(ħ,z|u) = -R^F21(-ħ,-z|u)", F, 2, RAT_ELL, 2, c::felder_skew),
        e("GNF-F", "R12(u) R13(u+ħ^(2)) R23(u) = R23(u+ħ^(1)) R13(u) R12(u+ħ^(3))", F, 3, RAT_ELL, 3, c::felder_gnf),
        IdentityCheck {
            note: "joint shift P_1^ħ P_2^ħ conjugation plus off-block component weight",
            ..e("WEIGHT0-F", "P_1^ħ P_2^ħ R^F12(u) (P_1^ħ P_2^ħ)^{-1} = R^F12(u)", F, 2, RAT_ELL, 2, c::felder_weight_zero)
        },
        IdentityCheck {
            note: "right side carries R^F13(ħ+η|u)",
            ..e(
                "TCUBIC-F",
                "R12^η G3(u+ħ^(1)+η^(2)) R13^ħ(u+η^(2)) G1^{-1}(u+ħ^(3)+η^(2)) R23^η - G3(u+ħ^(2)+η^(1)) R23^ħ(u+η^(1)) G2^{-1}(u+ħ^(3)+η^(1)) R13^η G2(u+ħ^(1)+η^(3)) R12^ħ(u+η^(3)) G1^{-1}(u+ħ^(2)+η^(3)) = (℘(η) - ℘(ħ)) G2^{-1}(u+η^(1)) G3(u+ħ^(1)+η^(1)) R13^{ħ+η} G1^{-1}(u+ħ^(3)+η^(3)) G2(u+η^(3)), G_a = g_a(z_a)",
                F, 3, ELL, 3, c::felder_transformed_cubic,
            )
        },
        IdentityCheck {
            tolerance: 1e-12,
            note: "compared with the closed form and with a second setting of z, ħ, η",
            ..e(
                "RATDEF-F",
                "R12^ħ R23^η - R13^η R12^{ħ-η} - R23^{η-ħ} R13^ħ = Σ_{i≠j} u_ij^{-2} (E_ij⊗E_jj⊗E_ji + E_ii⊗E_ij⊗E_ji + E_ij⊗E_ji⊗E_ii - E_ii⊗E_ii⊗E_jj - E_ii⊗E_jj⊗E_jj - E_ii⊗E_jj⊗E_ii)",
                F, 3, RAT, 8, c::felder_rational_defect,
            )
        },
        e("IRFV", "g2(z2,u) g1(z1,u-ħ^(2)) R^F12(ħ,z1-z2|u) = R^B12(ħ,z1-z2) g1(z1,u) g2(z2,u-ħ^(1))", IRF, 2, ELL, 2, c::irf_vertex),
        e(
            "IRFV-REWRITE",
            "g2 g1(u-ħ^(2)) R^F12 g2^{-1}(u-ħ^(1)) g1^{-1} = g1 g2(u+ħ^(1)) R^F12 g1^{-1}(u+ħ^(2)) g2^{-1} = R^B12",
            IRF, 2, ELL, 2, c::irf_vertex_rewritten,
        ),
        e("UNIT-ACF", "R12^ħ(z1,z2) R21^ħ(z2,z1) = (℘(ħ) - ℘(z1-z2)) 1⊗1", ACF, 2, ALL, 2, c::acf_unitarity),
        e("SKEW-ACF", "R12^ħ(z1,z2) = -R21^{-ħ}(z2+ħ,z1+ħ)", ACF, 2, ALL, 2, c::acf_skew),
        e("SDYBE-ACF", "R12(z1,z2) R13(z1-ħ,z3-ħ) R23(z2,z3) = R23(z2-ħ,z3-ħ) R13(z1,z3) R12(z1-ħ,z2-ħ)", ACF, 3, ALL, 3, c::acf_sdybe),
        e(
            "AYBE-ACF",
            "R12^ħ(z1+η,z2+η) R23^η(z2+ħ,z3+ħ) = R13^η(z1+ħ,z3+ħ) R12^{ħ-η}(z1+η,z2+η) + R23^{η-ħ}(z2+ħ,z3+ħ) R13^ħ(z1+η,z3+η)",
            ACF, 3, ALL, 3, c::acf_aybe,
        ),
        e(
            "CUBIC-ACF",
            "R12^η(z1,z2) R13^ħ(z1-ħ,z3-ħ) R23^η(z2,z3) - R23^ħ(z2-ħ,z3-ħ) R13^η(z1,z3) R12^ħ(z1-ħ,z2-ħ) = (℘(η) - ℘(ħ)) R13^{ħ+η}(z1-ħ,z3-ħ)",
            ACF, 3, ALL, 3, c::acf_cubic,
        ),
        e("CUBSUM-ACF", "R12(z1,z2) R23(z2,z3) R31(z3,z1) + R13(z1,z3) R32(z3,z2) R21(z2,z1) = -℘'(ħ) 1", ACF, 3, ALL, 3, c::acf_cubic_sum),
        IdentityCheck {
            ranks: RankRule::OnlyOne,
            ..e("SCAL-ACF", "R^ACF(ħ,z1,z2) = φ(ħ,z1-z2)φ(ħ,z2)/φ(ħ,z1) at N = 1", ACF, 2, ALL, 2, c::acf_scalar)
        },
        IdentityCheck {
            tolerance: 1e-8,
            fixed_tolerance: true,
            note: "absolute entrywise deviation; two-radius extrapolation at r = 1e-4, 5e-5",
            ..e("RES-ACF", "Res_{z2=0} R^ACF(ħ,z1,z2|u) = Σ_ij E_ii⊗E_ji", ACF, 2, ALL, 1, c::acf_residue)
        },
        IdentityCheck {
            tolerance: 0.05,
            fixed_tolerance: true,
            note: "residual is |ratio - 2| of max|ħR - 1| at ħ = 1e-4 and 5e-5",
            ..e("HBAR0-ACF", "ħ R^ACF(ħ,z1,z2|u) = 1⊗1 + O(ħ)", ACF, 2, ALL, 2, c::acf_small_hbar)
        },
        IdentityCheck {
            note: "also evaluated at z1 + c, z2 + c with c = 0.1+0.05i",
            ..e("GAUGE-ACF", "g1(z1+ħ) g2(z2) R^ACF12(ħ,z1,z2) g2^{-1}(z2+ħ) g1^{-1}(z1) = R^B12(ħ,z1-z2)", GAUGE, 2, ELL, 2, c::gauge)
        },
        e("TWIST-INV", "R̄12(ħ,z|u) R̄12^{-1}(ħ,z|u) = 1⊗1", TWIST, 2, ELL, 1, c::twist_inverse),
        e("TWIST-REL-1", "R^ACF12(ħ,z1,z2) = R̄12(ħ,z1|u-ħ^(2)) R^F12(ħ,z1-z2|u) R̄21^{-1}(ħ,z2|u-ħ^(1))", TWIST_F, 2, ELL, 2, c::twist_relation_shifted),
        IdentityCheck {
            note: "reflected form from the shifted relation and skew-symmetry; the unshifted reading R̄21(ħ,z2|u) R^F R̄12^{-1}(ħ,z1|u) differs at O(1)",
            ..e("TWIST-REL-2", "R^ACF12(ħ,z1,z2) = R̄21(-ħ,z2+ħ|u+ħ^(1)) R^F12(ħ,z1-z2|u) R̄12^{-1}(-ħ,z1+ħ|u+ħ^(2))", TWIST_F, 2, ELL, 2, c::twist_relation_reflected)
        },
        e("TWIST-G", "R̄12(ħ,z|u) = g1^{-1}(z+ħ,u+ħ^(2)) g1(z,u)", &[Family::TwistRbar], 2, ELL, 1, c::twist_from_intertwiner),
        e(
            "HASEGAWA",
            "(ϑ(ħ)/ϑ'(0)) Σ_k g_ik(z) φ(z,ħ-u_kj) = g_ij(z+Nħ) Π_{m≠j} ϑ(u_mj)/ϑ(u_mj-ħ)",
            NONE, 1, ELL, 1, c::hasegawa,
        ),
        IdentityCheck {
            tolerance: 1e-10,
            note: "relative spread of the ratio over 10 values of z",
            ..e("DETG", "det g(z,u) = c(u, τ) ϑ(z) / Π_{j>k} ϑ(u_j-u_k)", NONE, 1, ELL, 10, c::det_g)
        },
        e("MATTHETA", "ǧ2(0,u) R^B12(ħ,z) = g1(z+ħ) O12 g2^{-1}(ħ) g1^{-1}(z), O = Σ_ij E_ii⊗E_ji", BB, 2, ELL, 1, c::matrix_theta),
        e("AYBE-BH", "R12^ħ(u) R23^η(u) = R13^η(u) R12^{ħ-η}(u) + R23^{η-ħ}(u) R13^ħ(u)", BH, 3, ELL, 3, c::bh_aybe),
        e("SKEW-BH", "R12(ħ,z|u) = -R21(-ħ,-z|u)", BH, 2, ELL, 2, c::bh_skew),
        e("UNITDEF-BH", "R12(ħ,z|u) R21(ħ,-z|u) = Σ_ij E_ii⊗E_jj (℘(ħ-u_ij) - ℘(z))", BH, 2, ELL, 2, c::bh_unitarity_defect),
        nord(
            "NORD-BB",
            "Σ_{(i1..i_{n-1})} R_{a i1} R_{i1 i2} ... R_{i_{n-1} a} = (-1)^n ℘^{(n-2)}(ħ) 1",
            BB, ELL, c::nord_bb, c::nord_bb_guard,
        ),
        nord(
            "NORD-ACF",
            "Σ_{(i1..i_{n-1})} R_{a i1}(z_a,z_i1) R_{i1 i2}(z_i1,z_i2) ... R_{i_{n-1} a}(z_i_{n-1},z_a) = (-1)^n ℘^{(n-2)}(ħ) 1",
            ACF, ALL, c::nord_acf, c::nord_acf_guard,
        ),
    ]
}

/// The full identity catalog, in report order.
pub fn catalog() -> &'static [IdentityCheck] {
    static CATALOG: OnceLock<Vec<IdentityCheck>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

pub fn find_check(id: &str) -> Option<&'static IdentityCheck> {
    catalog().iter().find(|c| c.id == id)
}
