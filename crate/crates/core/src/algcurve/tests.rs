use super::*;
use crate::curve::{sample_curve, CurveSpec, Location};
use crate::rational::RationalFn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn circle_q() -> HermitianBivarPoly {
    // zw - 1
    HermitianBivarPoly::new(vec![vec![c(-1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap()
}

fn ellipse_q() -> HermitianBivarPoly {
    complexify(&RealBivarPoly::ellipse(2.0, 1.0))
}

fn lemniscate_q() -> HermitianBivarPoly {
    // (z² - 1)(w² - 1) - 4
    HermitianBivarPoly::new(vec![
        vec![c(-3.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        vec![c(0.0, 0.0); 3],
        vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    ])
    .unwrap()
}

fn limacon() -> RationalFn {
    RationalFn::polynomial(crate::poly::Poly::from_real(&[0.0, 1.0, 0.4]))
}

/// degree 3 fixture: ζ + 0.2ζ² + 0.3/(ζ - 4)
fn cubic_map() -> RationalFn {
    RationalFn::new(
        crate::poly::Poly::from_real(&[0.3, -4.0, 0.2, 0.2]),
        crate::poly::Poly::from_real(&[-4.0, 1.0]),
    )
    .unwrap()
}

fn assert_q_eq(q: &HermitianBivarPoly, expect: &[(usize, usize, C)], tol: f64) {
    let d = q.coeffs().len();
    for j in 0..d {
        for k in 0..d {
            let e = expect
                .iter()
                .find(|(a, b, _)| *a == j && *b == k)
                .map(|t| t.2)
                .unwrap_or_default();
            assert!((q.coeff(j, k) - e).norm() < tol, "c[{j}][{k}] = {} != {e}", q.coeff(j, k));
        }
    }
}

#[test]
fn complexify_circle() {
    let p = RealBivarPoly::new(vec![vec![-1.0, 0.0, 1.0], vec![], vec![1.0]]).unwrap();
    assert_q_eq(&complexify(&p), &[(0, 0, c(-1.0, 0.0)), (1, 1, c(1.0, 0.0))], 1e-15);
}

#[test]
fn complexify_ellipse_matches_expansion() {
    // (z+w)²/16 - (z-w)²/4 - 1 = -3/16 z² + 5/8 zw - 3/16 w² - 1
    let q = ellipse_q();
    assert_q_eq(
        &q,
        &[
            (0, 0, c(-1.0, 0.0)),
            (2, 0, c(-3.0 / 16.0, 0.0)),
            (0, 2, c(-3.0 / 16.0, 0.0)),
            (1, 1, c(5.0 / 8.0, 0.0)),
        ],
        1e-15,
    );
    let p = RealBivarPoly::ellipse(2.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let (x, y) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let z = c(x, y);
        assert!((q.eval(z, z.conj()) - p.eval(x, y)).norm() < 1e-12);
    }
}

#[test]
fn complexify_bernoulli_lemniscate() {
    // (x²+y²)² - 2(x²-y²) -> z²w² - (z² + w²)
    let p = RealBivarPoly::new(vec![vec![0.0, 0.0, 2.0, 0.0, 1.0], vec![], vec![-2.0, 0.0, 2.0], vec![], vec![1.0]]).unwrap();
    assert_q_eq(
        &complexify(&p),
        &[(2, 2, c(1.0, 0.0)), (2, 0, c(-1.0, 0.0)), (0, 2, c(-1.0, 0.0))],
        1e-14,
    );
}

#[test]
fn symmetry_examples() {
    assert!(symmetry_check(&circle_q()));
    let bad = HermitianBivarPoly::new(vec![vec![c(0.0, -1.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
    assert!(!symmetry_check(&bad));
    assert!(symmetry_check(&ellipse_q()));
    let skew = RealBivarPoly::new(vec![vec![0.3, -1.0, 2.0, 0.5], vec![1.5, 0.0, -0.7], vec![0.0, 2.2], vec![-1.1]]).unwrap();
    assert!(symmetry_check(&complexify(&skew)));
}

#[test]
fn json_shapes() {
    let q = circle_q();
    let s = serde_json::to_string(&q).unwrap();
    assert_eq!(s, "[[[-1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]");
    let back: HermitianBivarPoly = serde_json::from_str(&s).unwrap();
    assert_eq!(back, q);
    let p: RealBivarPoly = serde_json::from_str("[[-1,0,1],[],[1]]").unwrap();
    assert_eq!(p.total_degree(), 2);
    assert!(serde_json::from_str::<RealBivarPoly>("[[0,0],[0]]").is_err());
}

#[test]
fn circle_branch_points() {
    let b = branch_points(&circle_q()).unwrap();
    assert!(b.branch.is_empty());
    assert_eq!(b.exceptional.len(), 1);
    assert!(b.exceptional[0].norm() < 1e-15);
}

#[test]
fn ellipse_branch_points_are_foci() {
    let b = branch_points(&ellipse_q()).unwrap();
    let mut re: Vec<f64> = b.branch.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    assert_eq!(re.len(), 2);
    assert!((re[0] + 3f64.sqrt()).abs() < 1e-10 && (re[1] - 3f64.sqrt()).abs() < 1e-10, "{re:?}");
    assert!(b.branch.iter().all(|z| z.im.abs() < 1e-10));
    assert!(b.exceptional.is_empty());
    assert!(b.branch_residuals.iter().all(|r| *r < 1e-8));
}

#[test]
fn lemniscate_branch_points_give_double_roots() {
    let q = lemniscate_q();
    let b = branch_points(&q).unwrap();
    assert_eq!(b.branch.len(), 4);
    for z in &b.branch {
        let s = schwarz_values(&q, *z).unwrap();
        let f = s.finite();
        // either a double finite root or both values at infinity
        assert!(f.is_empty() || (f.len() == 2 && (f[0] - f[1]).norm() < 1e-6), "{z}: {f:?}");
    }
    let mut ex: Vec<f64> = b.exceptional.iter().map(|z| z.re).collect();
    ex.sort_by(f64::total_cmp);
    assert!((ex[0] + 1.0).abs() < 1e-12 && (ex[1] - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_discriminant() {
    // (w - z)² has a repeated factor in w
    let q = HermitianBivarPoly::new(vec![
        vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    ])
    .unwrap();
    assert!(matches!(branch_points(&q), Err(Error::DegenerateDiscriminant)));
}

#[test]
fn branch_point_csv() {
    let mut buf = Vec::new();
    branch_points(&lemniscate_q()).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("re,im,type,residual\n"));
    assert_eq!(text.lines().filter(|l| l.contains(",exceptional,")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.contains(",branch,")).count(), 4);
}

#[test]
fn schwarz_value_examples() {
    let s = schwarz_values(&circle_q(), c(2.0, 0.0)).unwrap();
    assert_eq!(s.len(), 1);
    assert!(s.contains(c(0.5, 0.0), 1e-15));
    let s = schwarz_values(&lemniscate_q(), c(0.0, 0.0)).unwrap();
    assert!(s.contains(c(0.0, 3f64.sqrt()), 1e-14) && s.contains(c(0.0, -(3f64.sqrt())), 1e-14));
    let q = ellipse_q();
    let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 64).unwrap();
    for z in &sc.z {
        assert!(schwarz_values(&q, *z).unwrap().contains(z.conj(), 1e-10));
        assert!(acr_values(&q, *z).unwrap().contains(*z, 1e-10));
    }
    // at the exceptional point the single value is infinite
    let s = schwarz_values(&circle_q(), c(0.0, 0.0)).unwrap();
    assert_eq!(s.values, vec![Projective::Infinity]);
}

#[test]
fn acr_examples() {
    let q = circle_q();
    assert!(acr_values(&q, c(2.0, 0.0)).unwrap().contains(c(0.5, 0.0), 1e-15));
    assert!(acr_values(&q, c(0.0, 0.5)).unwrap().contains(c(0.0, 2.0), 1e-15));
}

fn circle_path(center: C, r: f64, start_angle: f64, turns: f64, pts: usize) -> Vec<C> {
    (0..=pts)
        .map(|k| center + C::from_polar(r, start_angle + TAU * turns * k as f64 / pts as f64))
        .collect()
}

use std::f64::consts::TAU;

#[test]
fn circle_has_no_monodromy() {
    let q = circle_q();
    let b = branch_points(&q).unwrap();
    let z0 = c(2.0, 0.0);
    let path = circle_path(c(0.0, 0.0), 2.0, 0.0, 1.0, 64);
    let w = continue_branch(&q, &path, 0.5.into(), &b).unwrap();
    assert!((w - 1.0 / z0).norm() < 1e-12);
}

#[test]
fn ellipse_branch_swap_and_order_two() {
    let q = ellipse_q();
    let b = branch_points(&q).unwrap();
    let s3 = 3f64.sqrt();
    let once = circle_path(c(s3, 0.0), 2.0 - s3, 0.0, 1.0, 256);
    let w = continue_branch(&q, &once, c(2.0, 0.0), &b).unwrap();
    assert!((w - c(14.0 / 3.0, 0.0)).norm() < 1e-10, "{w}");
    let twice = circle_path(c(s3, 0.0), 2.0 - s3, 0.0, 2.0, 512);
    let w2 = continue_branch(&q, &twice, c(2.0, 0.0), &b).unwrap();
    assert!((w2 - 2.0).norm() < 1e-10, "{w2}");
    let mut back = once.clone();
    back.reverse();
    let there = continue_branch(&q, &once, c(14.0 / 3.0, 0.0), &b).unwrap();
    let and_back = continue_branch(&q, &back, there, &b).unwrap();
    assert!((and_back - 14.0 / 3.0).norm() < 1e-8);
}

#[test]
fn path_near_branch_point_is_refused() {
    let q = ellipse_q();
    let b = branch_points(&q).unwrap();
    let path = vec![c(1.0, 0.0), c(2.5, 0.0)];
    let w0 = schwarz_values(&q, c(1.0, 0.0)).unwrap().finite()[0];
    assert!(matches!(continue_branch(&q, &path, w0, &b), Err(Error::PathTooCloseToBranch { .. })));
    assert!(continue_branch(&q, &path, c(100.0, 0.0), &b).is_err());
}

fn reciprocity_trial(q: &HermitianBivarPoly, seed: u64) {
    let rep = reciprocity_trials(q, 1000, seed, 1e-8, 3.0).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.related_pairs >= 400, "{}", rep.related_pairs);
}

#[test]
fn reciprocity_holds_on_random_pairs() {
    reciprocity_trial(&circle_q(), 11);
    reciprocity_trial(&ellipse_q(), 12);
    reciprocity_trial(&lemniscate_q(), 13);
    assert!(reciprocity_check(&circle_q(), c(2.0, 0.0), c(0.5, 0.0), 1e-12).unwrap());
    assert_eq!(reciprocity_memberships(&ellipse_q(), c(0.3, 0.2), c(2.5, -1.0), 1e-8).unwrap(), (false, false));
}

#[test]
fn rdomain_reflection_examples() {
    let id = RationalFn::identity();
    let r = rdomain_reflections(&id, c(2.0, 0.0)).unwrap();
    assert_eq!(r.len(), 1);
    assert!(r.contains(c(0.5, 0.0), 1e-15));
    let phi = limacon();
    for k in 0..16 {
        let t = phi.eval(C::from_polar(1.0, TAU * k as f64 / 16.0));
        assert!(rdomain_reflections(&phi, t).unwrap().contains(t, 1e-10));
    }
    let sc = sample_curve(&CurveSpec::RationalMap { map: phi.clone() }, 512).unwrap();
    let r = rdomain_reflections(&phi, c(5.0, 0.0)).unwrap();
    assert_eq!(r.len(), 2);
    for v in r.finite() {
        assert_eq!(point_location(&sc, v, 1e-9).unwrap(), Location::Interior);
    }
    // t = φ(∞) = ∞ is not finite; a rational map with finite value at infinity
    let m = cubic_map();
    let r = rdomain_reflections(&m, c(0.7, 0.1)).unwrap();
    assert_eq!(r.len(), 3);
}

use crate::curve::point_location;

#[test]
fn trapping_on_rdomains() {
    let rep = trapping_check(&RationalFn::identity(), 50, 3).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
    let rep = trapping_check(&limacon(), 100, 4).unwrap();
    assert_eq!((rep.sample_pass, rep.boundary_pass), (100, 100), "{:?}", rep.failures);
    let rep = trapping_check(&cubic_map(), 100, 5).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
}

#[test]
fn ellipse_trapping_is_reversed() {
    let q = ellipse_q();
    let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 1024).unwrap();
    let ext = trapping_check_q(&q, &sc, Location::Exterior, 100, 6).unwrap();
    assert!(ext.sample_pass < ext.samples, "exterior trapping should fail somewhere");
    let int = trapping_check_q(&q, &sc, Location::Interior, 100, 7).unwrap();
    assert!(int.passed(), "{:?}", int.failures);
}

#[test]
fn implicitize_circle() {
    let r = 1.5;
    let q = implicitize_rdomain(&RationalFn::polynomial(crate::poly::Poly::from_real(&[0.0, r]))).unwrap();
    // normalized: zw/r² - 1 up to a real factor
    let s = q.coeff(1, 1).re;
    assert_q_eq(&q, &[(1, 1, c(s, 0.0)), (0, 0, c(-s * r * r, 0.0))], 1e-12);
}

#[test]
fn implicitized_curves_agree_with_parametric_reflection() {
    for map in [limacon(), cubic_map()] {
        let q = implicitize_rdomain(&map).unwrap();
        assert!(symmetry_check(&q));
        assert_eq!(q.w_degree(), map.degree());
        let sc = sample_curve(&CurveSpec::RationalMap { map: map.clone() }, 256).unwrap();
        assert!(boundary_residual(&q, &sc) < 1e-8, "{}", boundary_residual(&q, &sc));
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 200 {
            let t = c(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            if point_location(&sc, t, 1e-6).unwrap() != Location::Exterior {
                continue;
            }
            let a = acr_values(&q, t).unwrap();
            let b = rdomain_reflections(&map, t).unwrap();
            let h = a.hausdorff(&b);
            assert!(h < 1e-7, "{t}: {h}");
            checked += 1;
        }
    }
}

#[test]
fn decomplexify_inverts_complexify() {
    let p = RealBivarPoly::new(vec![vec![0.3, -1.0, 2.0, 0.5], vec![1.5, 0.0, -0.7], vec![0.0, 2.2], vec![-1.1]]).unwrap();
    let back = decomplexify(&complexify(&p));
    for j in 0..4 {
        for k in 0..4 {
            assert!((back.coeff(j, k) - p.coeff(j, k)).abs() < 1e-14);
        }
    }
}
