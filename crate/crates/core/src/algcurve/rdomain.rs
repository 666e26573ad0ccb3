//! Quadrature-type domains `Ω = φ(D)` for a rational map `φ` univalent on the
//! closed unit disk. Their reflection is explicit:
//! `R(φ(ζ)) = φ(1/conj ζ)`, and `Q` comes from eliminating `ζ` between
//! `z = φ(ζ)` and `w = φ#(1/ζ)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::branch::{hadamard, interpolate_on_circle, BranchPointSet};
use super::{acr_values, branch_points, projective_roots, HermitianBivarPoly, ReflectionSet};
use crate::curve::geometry::distance_to_polygon;
use crate::curve::{check_univalent, point_location, sample_curve, CurveSpec, Location, SampledCurve, DEFAULT_UNIVALENCE_MARGIN};
use crate::error::{Error, Result};
use crate::poly::{sylvester_resultant, Poly, Projective};
use crate::rational::RationalFn;

type C = Complex64;

/// Nodes used for the boundary polygon in trapping checks.
const TRAP_NODES: usize = 1024;

/// `{R(t)} = {φ(1/conj ζ) : φ(ζ) = t}`, preimages counted with multiplicity;
/// a preimage at infinity contributes `φ(0)`.
pub fn rdomain_reflections(map: &RationalFn, t: C) -> Result<ReflectionSet> {
    let n = map.degree();
    let p = map.num().padded(n + 1);
    let q = map.den().padded(n + 1);
    let c: Vec<C> = p.iter().zip(&q).map(|(a, b)| a - t * b).collect();
    let scale: f64 = p.iter().zip(&q).map(|(a, b)| a.norm() + t.norm() * b.norm()).fold(0.0, f64::max);
    if c.iter().all(|x| x.norm() <= 1e-14 * scale) {
        return Err(Error::DegenerateSolve(t));
    }
    let (pre, condition) = projective_roots(&c).ok_or(Error::DegenerateSolve(t))?;
    let values = pre
        .iter()
        .map(|zeta| match zeta {
            Projective::Infinity => map.eval_projective(Projective::Finite(C::new(0.0, 0.0))),
            Projective::Finite(s) if s.norm() == 0.0 => map.value_at_infinity(),
            Projective::Finite(s) => map.eval_projective(Projective::Finite(1.0 / s.conj())),
        })
        .collect();
    Ok(ReflectionSet { base: t, values, condition })
}

/// Points to keep away from when sampling: critical values of `φ` (where the
/// preimages of `t` collide) as branch points, and the `t` for which some
/// reflection is infinite as exceptional points.
pub fn rdomain_branch_points(map: &RationalFn, eps: f64) -> BranchPointSet {
    let mut branch = Vec::new();
    let mut branch_residuals = Vec::new();
    let dn = map.derivative_numerator();
    for c in map.critical_points() {
        if let Projective::Finite(v) = map.eval_projective(Projective::Finite(c)) {
            branch.push(v);
            branch_residuals.push(dn.relative_residual(c));
        }
    }
    let mut exceptional = Vec::new();
    let mut exceptional_residuals = Vec::new();
    // R(t) = ∞ when a preimage ζ has 1/conj ζ at a pole of φ
    let mut pole_images: Vec<Projective> = map
        .poles()
        .iter()
        .filter(|p| p.norm() > 0.0)
        .map(|p| Projective::Finite(1.0 / p.conj()))
        .collect();
    if map.value_at_infinity().is_infinite() {
        pole_images.push(Projective::Finite(C::new(0.0, 0.0)));
    }
    for s in pole_images {
        if let Projective::Finite(v) = map.eval_projective(s) {
            exceptional.push(v);
            exceptional_residuals.push(0.0);
        }
    }
    BranchPointSet {
        branch,
        exceptional,
        branch_residuals,
        exceptional_residuals,
        eps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapFailure {
    /// "exterior", "interior" or "boundary"
    pub kind: String,
    pub point: C,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappingReport {
    pub seed: u64,
    pub sample_side: Location,
    pub expected_side: Location,
    pub samples: usize,
    pub sample_pass: usize,
    pub boundary_samples: usize,
    pub boundary_pass: usize,
    pub failures: Vec<TrapFailure>,
}

impl TrappingReport {
    pub fn passed(&self) -> bool {
        self.sample_pass == self.samples && self.boundary_pass == self.boundary_samples
    }
}

/// Uniform points in the disk of twice the curve's radius about its centroid,
/// on the requested side and at least `eps` from the curve and from `bps`.
fn sample_side(sc: &SampledCurve, side: Location, count: usize, bps: &BranchPointSet, rng: &mut ChaCha8Rng) -> Result<Vec<C>> {
    let center = sc.z.iter().sum::<C>() / sc.len() as f64;
    let rmax = sc.z.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let eps = bps.eps;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000 * count.max(1) {
            return Err(Error::InvalidInput(format!("could not place {count} samples on the {side:?} side")));
        }
        let r = 2.0 * rmax * rng.random::<f64>().sqrt();
        let t = center + C::from_polar(r, TAU * rng.random::<f64>());
        if distance_to_polygon(&sc.z, t) < eps || bps.distance(t) < eps {
            continue;
        }
        if point_location(sc, t, 0.0)? == side {
            out.push(t);
        }
    }
    Ok(out)
}

fn opposite(side: Location) -> Location {
    match side {
        Location::Interior => Location::Exterior,
        Location::Exterior => Location::Interior,
        Location::Boundary => Location::Boundary,
    }
}

/// Checks every value of `reflect(t)` for the sampled points lands on
/// `expect`, and that boundary nodes reflect to themselves once with the
/// remaining values on `expect`. The boundary part only runs when sampling the
/// exterior.
#[allow(clippy::too_many_arguments)]
fn run_trapping(
    sc: &SampledCurve,
    bps: &BranchPointSet,
    side: Location,
    samples: usize,
    seed: u64,
    reflect: impl Fn(C) -> Result<ReflectionSet>,
) -> Result<TrappingReport> {
    let expect = opposite(side);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-8 * sc.diameter();
    let kind = |l: Location| format!("{l:?}").to_lowercase();
    let mut failures = Vec::new();
    let pts = sample_side(sc, side, samples, bps, &mut rng)?;
    let mut sample_pass = 0;
    for &t in &pts {
        let set = reflect(t)?;
        let mut bad = None;
        for v in &set.values {
            match v {
                Projective::Infinity => bad = Some("reflection at infinity".to_string()),
                Projective::Finite(v) => {
                    let loc = point_location(sc, *v, tol)?;
                    if loc != expect {
                        bad = Some(format!("reflection {v} is {}", kind(loc)));
                    }
                }
            }
            if bad.is_some() {
                break;
            }
        }
        match bad {
            None => sample_pass += 1,
            Some(detail) => failures.push(TrapFailure { kind: kind(side), point: t, detail }),
        }
    }
    let mut boundary_pass = 0;
    let boundary_samples = if side == Location::Exterior { samples } else { 0 };
    for _ in 0..boundary_samples {
        let j = rng.random_range(0..sc.len());
        let t = sc.z[j];
        let set = reflect(t)?;
        let mut on_curve = 0;
        let mut bad = None;
        for v in &set.values {
            match v {
                Projective::Infinity => bad = Some("reflection at infinity".to_string()),
                Projective::Finite(v) => {
                    if (v - t).norm() <= tol {
                        on_curve += 1;
                        continue;
                    }
                    let loc = point_location(sc, *v, tol)?;
                    if loc != expect {
                        bad = Some(format!("reflection {v} is {}", kind(loc)));
                    }
                }
            }
        }
        if bad.is_none() && on_curve != 1 {
            bad = Some(format!("{on_curve} reflections coincide with the node"));
        }
        match bad {
            None => boundary_pass += 1,
            Some(detail) => failures.push(TrapFailure {
                kind: "boundary".into(),
                point: t,
                detail,
            }),
        }
    }
    Ok(TrappingReport {
        seed,
        sample_side: side,
        expected_side: expect,
        samples,
        sample_pass,
        boundary_samples,
        boundary_pass,
        failures,
    })
}

/// Trapping for the R-domain `φ(D)`: exterior points reflect into `Ω`, and a
/// boundary node reflects once to itself and otherwise into `Ω`.
pub fn trapping_check(map: &RationalFn, samples: usize, seed: u64) -> Result<TrappingReport> {
    let u = check_univalent(map, DEFAULT_UNIVALENCE_MARGIN);
    if !u.univalent {
        return Err(Error::InvalidInput(format!(
            "map is not univalent: {}",
            u.reason.unwrap_or_default()
        )));
    }
    let sc = sample_curve(&CurveSpec::RationalMap { map: map.clone() }, TRAP_NODES)?;
    let bps = rdomain_branch_points(map, 1e-3 * sc.diameter());
    run_trapping(&sc, &bps, Location::Exterior, samples, seed, |t| rdomain_reflections(map, t))
}

/// Trapping through the algebraic reflection of `Q`: points sampled on `side`
/// of `sc` must reflect to the other side.
pub fn trapping_check_q(q: &HermitianBivarPoly, sc: &SampledCurve, side: Location, samples: usize, seed: u64) -> Result<TrappingReport> {
    if side == Location::Boundary {
        return Err(Error::InvalidInput("sample side must be interior or exterior".into()));
    }
    let bps = branch_points(q)?.with_eps(1e-3 * sc.diameter());
    run_trapping(sc, &bps, side, samples, seed, |t| acr_values(q, t))
}

/// `Q` with `Q(φ(ζ), φ#(1/ζ)) = 0`, from the resultant in `ζ` of
/// `z q(ζ) - p(ζ)` and `w q̃(ζ) - p̃(ζ)`, `p̃(ζ) = ζ^n p#(1/ζ)`. The resultant is
/// sampled on an `(n+1) x (n+1)` torus grid and interpolated, then the complex
/// phase is fixed so the coefficients are Hermitian.
pub fn implicitize_rdomain(map: &RationalFn) -> Result<HermitianBivarPoly> {
    let n = map.degree();
    if n == 0 {
        return Err(Error::InvalidInput("constant map".into()));
    }
    let p = Poly::new(map.num().padded(n + 1));
    let q = Poly::new(map.den().padded(n + 1));
    let pt = map.num().conj_coeffs().reversed(n);
    let qt = map.den().conj_coeffs().reversed(n);
    let rho = (0..64)
        .map(|k| map.eval(C::from_polar(1.0, TAU * k as f64 / 64.0)).norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let m = n + 1;
    let pts: Vec<C> = (0..m).map(|j| C::from_polar(rho, TAU * j as f64 / m as f64)).collect();
    let mut worst_rel: f64 = 0.0;
    let mut grid = vec![vec![C::new(0.0, 0.0); m]; m];
    for (a, &z) in pts.iter().enumerate() {
        let f: Vec<C> = (0..=n).map(|k| z * q.coeffs()[k] - p.coeffs()[k]).collect();
        for (b, &w) in pts.iter().enumerate() {
            let g: Vec<C> = (0..=n)
                .map(|k| w * qt.coeffs().get(k).copied().unwrap_or_default() - pt.coeffs().get(k).copied().unwrap_or_default())
                .collect();
            let r = sylvester_resultant(&f, &g);
            worst_rel = worst_rel.max(r.norm() / hadamard(&f, &g));
            grid[a][b] = r;
        }
    }
    if worst_rel < 1e-12 {
        return Err(Error::EliminationDegenerate);
    }
    // interpolate along w for each z, then along z for each w-power
    let rows: Vec<Vec<C>> = grid.iter().map(|r| interpolate_on_circle(r, rho)).collect();
    let mut coeffs = vec![vec![C::new(0.0, 0.0); m]; m];
    for k in 0..m {
        let col: Vec<C> = rows.iter().map(|r| r[k]).collect();
        for (j, c) in interpolate_on_circle(&col, rho).into_iter().enumerate() {
            coeffs[j][k] = c;
        }
    }
    let raw = HermitianBivarPoly::new(coeffs).map_err(|_| Error::EliminationDegenerate)?;
    // raw = λ · hermitian; λ/conj(λ) = c_jk / conj(c_kj) at the largest entry
    let (mut bj, mut bk, mut big) = (0, 0, 0.0);
    for (j, row) in raw.coeffs().iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            if c.norm() > big {
                (bj, bk, big) = (j, k, c.norm());
            }
        }
    }
    let ratio = raw.coeff(bj, bk) / raw.coeff(bk, bj).conj();
    let lambda = C::from_polar(1.0, 0.5 * ratio.arg());
    let phased: Vec<Vec<C>> = raw
        .coeffs()
        .iter()
        .map(|r| r.iter().map(|c| c / lambda).collect())
        .collect();
    Ok(HermitianBivarPoly::new(phased)?.normalized().symmetrized())
}

/// `max_j |Q(z_j, conj z_j)|` relative to `Σ |c_jk| |z_j|^{j+k}`.
pub fn boundary_residual(q: &HermitianBivarPoly, sc: &SampledCurve) -> f64 {
    sc.z.iter().map(|z| q.relative_residual(*z, z.conj())).fold(0.0, f64::max)
}
