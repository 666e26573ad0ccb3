use super::*;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub(crate) fn bernoulli_like() -> CurveSpec {
    CurveSpec::Lemniscate {
        roots: vec![c(1.0, 0.0), c(-1.0, 0.0)],
        level: 2.0,
    }
}

#[test]
fn unit_circle_samples() {
    let sc = sample_curve(&CurveSpec::unit_circle(), 64).unwrap();
    for j in 0..64 {
        let t = sc.params[j];
        assert!((sc.z[j] - C::from_polar(1.0, t)).norm() < 1e-15);
        assert!((sc.speed[j] - 1.0).abs() < 1e-15);
        assert!((sc.curvature[j] - 1.0).abs() < 1e-14);
    }
}

#[test]
fn ellipse_closed_form_and_normal() {
    let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
    for j in 0..128 {
        let t = sc.params[j];
        assert!((sc.z[j] - c(2.0 * t.cos(), t.sin())).norm() < 1e-15);
    }
    assert!((sc.normal[0] - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn lemniscate_trace_stays_on_level_set() {
    let sc = sample_curve(&bernoulli_like(), 256).unwrap();
    let worst = sc
        .z
        .iter()
        .map(|z| ((z * z - 1.0).norm() - 2.0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "{worst}");
    assert!((geometry::winding_number(&sc.z, c(0.0, 0.0)) - 1.0).abs() < 1e-10);
    assert!(sc.signed_area() > 0.0);
}

#[test]
fn lemniscate_velocity_matches_spectral_derivative() {
    // finite-difference check of the analytic velocity on the traced nodes
    let sc = sample_curve(&bernoulli_like(), 1024).unwrap();
    let n = sc.len();
    let h = sc.h();
    for j in (0..n).step_by(37) {
        let fd = (sc.z[(j + 1) % n] - sc.z[(j + n - 1) % n]) / (2.0 * h);
        assert!((fd - sc.velocity[j]).norm() < 1e-4 * sc.speed[j]);
    }
}

#[test]
fn non_jordan_lemniscate_is_rejected() {
    let spec = CurveSpec::Lemniscate {
        roots: vec![c(1.0, 0.0), c(-1.0, 0.0)],
        level: 0.5,
    };
    assert!(matches!(sample_curve(&spec, 128), Err(Error::JordanViolation(_))));
    assert!(matches!(check_jordan(&spec, 128).unwrap(), JordanStatus::NotJordan(_)));
}

#[test]
fn jordan_examples() {
    let z = CurveSpec::Lemniscate { roots: vec![c(0.0, 0.0)], level: 0.7 };
    assert_eq!(check_jordan(&z, 64).unwrap(), JordanStatus::Jordan);
    assert_eq!(check_jordan(&bernoulli_like(), 128).unwrap(), JordanStatus::Jordan);
    assert!(check_jordan(&CurveSpec::unit_circle(), 64).is_err());
}

#[test]
fn node_count_must_be_power_of_two() {
    assert!(sample_curve(&CurveSpec::unit_circle(), 8).is_err());
    assert!(sample_curve(&CurveSpec::unit_circle(), 96).is_err());
}

#[test]
fn invalid_specs() {
    assert!(sample_curve(&CurveSpec::Ellipse { a: 1.0, b: 2.0 }, 64).is_err());
    assert!(sample_curve(&CurveSpec::Circle { center: c(0.0, 0.0), radius: 0.0 }, 64).is_err());
    let bad = RationalFn::polynomial(Poly::from_real(&[0.0, 1.0, 1.0]));
    assert!(sample_curve(&CurveSpec::RationalMap { map: bad }, 64).is_err());
}

#[test]
fn point_location_examples() {
    let circle = sample_curve(&CurveSpec::unit_circle(), 64).unwrap();
    assert_eq!(point_location(&circle, c(0.0, 0.0), 1e-9).unwrap(), Location::Interior);
    assert_eq!(point_location(&circle, c(2.0, 0.0), 1e-9).unwrap(), Location::Exterior);
    assert_eq!(point_location(&circle, c(1.0, 0.0), 1e-9).unwrap(), Location::Boundary);
    let lem = sample_curve(&bernoulli_like(), 256).unwrap();
    assert_eq!(point_location(&lem, c(1.0, 0.0), 1e-9).unwrap(), Location::Interior);
    assert_eq!(point_location(&lem, c(0.0, 0.9), 1e-9).unwrap(), Location::Interior);
    assert_eq!(point_location(&lem, c(0.0, 1.2), 1e-9).unwrap(), Location::Exterior);
}

#[test]
fn univalence_examples() {
    assert!(check_univalent(&RationalFn::identity(), 1.1).univalent);
    let good = RationalFn::polynomial(Poly::from_real(&[0.0, 1.0, 0.4]));
    assert!(check_univalent(&good, 1.1).univalent);
    let bad = RationalFn::polynomial(Poly::from_real(&[0.0, 1.0, 1.0]));
    let u = check_univalent(&bad, 1.05);
    assert!(!u.univalent);
    assert!(u.reason.unwrap().contains("derivative vanishes"));
    let pole = RationalFn::new(Poly::from_real(&[0.0, 1.0]), Poly::from_real(&[-1.02, 1.0])).unwrap();
    assert!(!check_univalent(&pole, 1.05).univalent);
}

#[test]
fn arclength_converges_spectrally() {
    for spec in [CurveSpec::unit_circle(), CurveSpec::Ellipse { a: 2.0, b: 1.0 }] {
        let reference = sample_curve(&spec, 1024).unwrap().arclength();
        let l32 = sample_curve(&spec, 32).unwrap().arclength();
        let l64 = sample_curve(&spec, 64).unwrap().arclength();
        let l128 = sample_curve(&spec, 128).unwrap().arclength();
        let e32 = (l32 - reference).abs();
        let e64 = (l64 - reference).abs();
        let e128 = (l128 - reference).abs();
        assert!(e64 <= 1e-3 * e32.max(1e-300) || e64 < 1e-13, "{e32} {e64}");
        assert!(e128 < 1e-13, "{e128}");
    }
}

#[test]
fn reversing_twice_is_identity() {
    let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 64).unwrap();
    assert_eq!(sc.reversed().normalize_orientation(), sc);
    assert_eq!(sc.clone().normalize_orientation(), sc);
}

#[test]
fn csv_export_has_header_and_rows() {
    let sc = sample_curve(&CurveSpec::unit_circle(), 16).unwrap();
    let mut buf = Vec::new();
    sc.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,re_z,im_z,re_dz,im_dz,kappa\n"));
    assert_eq!(text.lines().count(), 17);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn winding_matches_classification(x in -3.0f64..3.0, y in -2.0f64..2.0) {
            let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
            let z = C::new(x, y);
            let w = geometry::winding_number(&sc.z, z);
            match point_location(&sc, z, 1e-9) {
                Ok(Location::Interior) => prop_assert!((w - 1.0).abs() < 1e-9),
                Ok(Location::Exterior) => prop_assert!(w.abs() < 1e-9),
                _ => {}
            }
        }
    }
}
