use num_complex::Complex64 as C64;
use ybx_web::{check_ids, family_names, kronecker_field, rmatrix_moduli, scan_check_json};

const TAU: C64 = C64 { re: 0.0, im: 1.0 };

#[test]
fn kronecker_field_marks_the_pole() {
    let eta = C64::new(0.13, 0.05);
    let f = kronecker_field("elliptic", TAU, eta, 0.5, 5).unwrap();
    assert_eq!(f.len(), 25);
    assert!(f[12].is_nan());
    assert_eq!(f.iter().filter(|v| v.is_nan()).count(), 1);
    let rational = kronecker_field("rational", TAU, eta, 0.5, 5).unwrap();
    let z = C64::new(-0.5, 0.5);
    assert!((rational[0] - (1.0 / eta + 1.0 / z).norm().log10()).abs() < 1e-14);
    assert!(kronecker_field("elliptic", TAU, eta, 0.5, 0).is_err());
    assert!(kronecker_field("hyperbolic", TAU, eta, 0.5, 5).is_err());
}

#[test]
fn scan_reports_a_pass() {
    let json = scan_check_json("AYBE-ACF", 2, "trigonometric", TAU, 5, 4).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v[0]["id"], "AYBE-ACF");
    assert_eq!(v[0]["pass"], true);
    assert!(scan_check_json("NOSUCH", 2, "elliptic", TAU, 5, 4).is_err());
}

#[test]
fn rmatrix_moduli_have_the_right_shape() {
    let (h, z1, z2) = (C64::new(0.11, 0.04), C64::new(0.3, 0.1), C64::new(-0.1, 0.2));
    for family in family_names() {
        let m = rmatrix_moduli(&family, 2, "elliptic", TAU, h, z1, z2).unwrap();
        assert_eq!(m.len(), 16, "{family}");
        assert!(m.iter().all(|x| x.is_finite()));
    }
    let acf = rmatrix_moduli("ACF", 3, "rational", TAU, h, z1, z2).unwrap();
    assert_eq!(acf.iter().filter(|x| **x > 0.0).count(), 3 + 4 * 3 * 2);
    assert!(rmatrix_moduli("BaxterBelavin", 2, "rational", TAU, h, z1, z2).is_err());
    assert!(check_ids().len() >= 30);
}
