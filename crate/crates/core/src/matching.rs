//! The matching problem: `f` holomorphic inside, `g` holomorphic outside with
//! `g(∞) = 0`, and `f = conj(g)` on the curve. Lemniscate pairs `(R, c²/R)`
//! are constructed and verified; on ellipses and R-domains the absence of
//! pairs is probed numerically.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algcurve::{complexify, decomplexify, trapping_check, trapping_check_q, HermitianBivarPoly, RealBivarPoly, TrappingReport};
use crate::cauchy::HilbertOperator;
use crate::curve::{check_jordan, point_location, sample_curve, CurveSpec, JordanStatus, Location, SampledCurve};
use crate::error::{Error, MelnikovCondition, Result};
use crate::linalg::singular_values_complex;
use crate::poly::{Poly, Projective};
use crate::potential::{assemble_pi, band_fixed_modes, DensityGrid};
use crate::rational::RationalFn;

type C = Complex64;

/// Node count for the Jordan and root-location checks in [`melnikov_pair`].
const CONSTRUCTION_NODES: usize = 256;

/// Largest residual accepted before building powers of a pair.
pub const POWER_PRECONDITION: f64 = 1e-8;

/// Smallest Gram singular value accepted as linear independence.
pub const GRAM_TOL: f64 = 1e-10;

/// Refinement levels used by [`nonexistence_evidence`].
pub const EVIDENCE_LEVELS: [usize; 3] = [128, 256, 512];

/// Trigonometric degree of the random trial densities and of the band searched
/// for fixed modes.
pub const EVIDENCE_DEGREE: usize = 8;

/// Band residual below which a mode counts as a fixed point.
pub const FIXED_MODE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingPair {
    pub f: RationalFn,
    pub g: RationalFn,
    pub curve: CurveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub curve_id: String,
    pub n: usize,
    /// `max_j |f(z_j) - conj g(z_j)|`
    pub boundary_residual: f64,
    /// `‖Πf - f‖_∞` on the samples
    pub fixed_residual_f: f64,
    pub fixed_residual_g: f64,
}

impl MatchReport {
    pub fn worst(&self) -> f64 {
        self.boundary_residual.max(self.fixed_residual_f).max(self.fixed_residual_g)
    }
}

/// Curve `{|R| = c}`, as a lemniscate spec when `R` is a polynomial.
fn level_spec(r: &RationalFn, c: f64) -> CurveSpec {
    if r.is_polynomial() && r.num().degree() >= 1 {
        let lead = r.num().leading() / r.den().leading();
        CurveSpec::Lemniscate {
            roots: r.num().roots(),
            level: c / lead.norm(),
        }
    } else {
        CurveSpec::LevelCurve {
            func: r.clone(),
            level: c,
        }
    }
}

/// The pair `(R, c²/R)` on `{|R| = c}` after checking that the curve is
/// Jordan, `R(∞) = ∞`, the poles of `R` lie outside and its zeros inside.
pub fn melnikov_pair(r: &RationalFn, c: f64) -> Result<MatchingPair> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidInput(format!("level must be positive, got {c}")));
    }
    if let Projective::Finite(v) = r.value_at_infinity() {
        return Err(Error::ConditionViolated {
            condition: MelnikovCondition::FiniteAtInfinity,
            point: v,
        });
    }
    let spec = level_spec(r, c);
    if let JordanStatus::NotJordan(why) = check_jordan(&spec, CONSTRUCTION_NODES)? {
        return Err(Error::NotJordan(why));
    }
    let sc = sample_curve(&spec, CONSTRUCTION_NODES)?;
    let tol = 1e-8 * sc.diameter();
    for p in r.poles() {
        if point_location(&sc, p, tol)? != Location::Exterior {
            return Err(Error::ConditionViolated {
                condition: MelnikovCondition::PoleInside,
                point: p,
            });
        }
    }
    for z in r.zeros() {
        if point_location(&sc, z, tol)? != Location::Interior {
            return Err(Error::ConditionViolated {
                condition: MelnikovCondition::ZeroOutside,
                point: z,
            });
        }
    }
    Ok(MatchingPair {
        f: r.clone(),
        g: r.reciprocal_scaled(C::new(c * c, 0.0)),
        curve: spec,
    })
}

fn sampled(sc: &SampledCurve, f: &RationalFn) -> DensityGrid {
    DensityGrid::from_fn(sc, |z, _| f.eval(z))
}

fn report_on(pair: &MatchingPair, sc: &SampledCurve, hop: &HilbertOperator) -> Result<MatchReport> {
    let fs = sampled(sc, &pair.f);
    let gs = sampled(sc, &pair.g);
    Ok(MatchReport {
        curve_id: sc.id.clone(),
        n: sc.len(),
        boundary_residual: fs.max_diff(&gs.conj()),
        fixed_residual_f: hop.pi(&fs)?.max_diff(&fs),
        fixed_residual_g: hop.pi(&gs)?.max_diff(&gs),
    })
}

/// Boundary and fixed-point residuals of `pair` at `n` nodes, with `Π` built
/// as `H + conj H conj`.
pub fn verify_matching(pair: &MatchingPair, n: usize) -> Result<MatchReport> {
    let sc = sample_curve(&pair.curve, n)?;
    let hop = HilbertOperator::new(&sc);
    report_on(pair, &sc, &hop)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyRow {
    pub k: u32,
    pub boundary_residual: f64,
    pub fixed_point_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub curve_id: String,
    pub n: usize,
    pub rows: Vec<FamilyRow>,
    /// smallest singular value of the Gram matrix of the normalized `f^k`
    pub gram_min_singular: f64,
    pub independent: bool,
    #[serde(skip)]
    pub pairs: Vec<MatchingPair>,
}

impl FamilyReport {
    /// Columns `k, boundary_residual, fixed_point_residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "boundary_residual", "fixed_point_residual"])?;
        for r in &self.rows {
            wr.write_record(&[
                r.k.to_string(),
                r.boundary_residual.to_string(),
                r.fixed_point_residual.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Powers `(f^k, g^k)`, `k = 1..=n_max`, each verified at `n` nodes.
/// Fails with `VerificationFailed` if the input or any power has a residual
/// above [`POWER_PRECONDITION`].
pub fn power_family(pair: &MatchingPair, n_max: u32, n: usize) -> Result<FamilyReport> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let sc = sample_curve(&pair.curve, n)?;
    let hop = HilbertOperator::new(&sc);
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    let mut cols = Vec::new();
    for k in 1..=n_max {
        let pk = if k == 1 {
            pair.clone()
        } else {
            MatchingPair {
                f: pair.f.pow(k),
                g: pair.g.pow(k),
                curve: pair.curve.clone(),
            }
        };
        let rep = report_on(&pk, &sc, &hop)?;
        let fixed = rep.fixed_residual_f.max(rep.fixed_residual_g);
        if !(rep.worst() < POWER_PRECONDITION) {
            return Err(Error::VerificationFailed { k, residual: rep.worst() });
        }
        rows.push(FamilyRow {
            k,
            boundary_residual: rep.boundary_residual,
            fixed_point_residual: fixed,
        });
        let fs = sampled(&sc, &pk.f);
        let norm = fs.l2_norm();
        cols.push(fs.values.iter().map(|v| v / norm).collect::<Vec<C>>());
        pairs.push(pk);
    }
    let m = cols.len();
    let gram = DMatrix::from_fn(m, m, |a, b| cols[a].iter().zip(&cols[b]).map(|(x, y)| x.conj() * y).sum::<C>());
    let gram_min_singular = singular_values_complex(&gram)?
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(FamilyReport {
        curve_id: sc.id.clone(),
        n,
        rows,
        gram_min_singular,
        independent: gram_min_singular > GRAM_TOL,
        pairs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DichotomyCase {
    /// `H(conj f) = 0`
    Vanishing,
    /// `conj(H conj f)` is a fixed point of `Π` at both resolutions
    PersistentFixedPoint,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub n: usize,
    /// `‖H conj f‖_∞`
    pub h_conj_norm: f64,
    /// `‖ΠF - F‖_∞ / ‖F‖_∞` for `F = conj(H conj f)` at `n` and `2n`
    pub fixed_residuals: [f64; 2],
    pub case: DichotomyCase,
}

/// Either `H(conj f)` vanishes or `conj(H conj f)` is a non-trivial fixed
/// point of `Π` at `n` and `2n` nodes, both to `tol`.
pub fn dichotomy_check(pair: &MatchingPair, n: usize, tol: f64) -> Result<DichotomyReport> {
    let mut h_norm = 0.0;
    let mut fixed = [0.0; 2];
    for (i, m) in [n, 2 * n].into_iter().enumerate() {
        let sc = sample_curve(&pair.curve, m)?;
        let hop = HilbertOperator::new(&sc);
        let hc = hop.h(&sampled(&sc, &pair.f).conj())?;
        if i == 0 {
            h_norm = hc.max_norm();
        }
        let big_f = hc.conj();
        let scale = big_f.max_norm();
        fixed[i] = if scale == 0.0 {
            f64::INFINITY
        } else {
            hop.pi(&big_f)?.max_diff(&big_f) / scale
        };
    }
    let case = if h_norm < tol {
        DichotomyCase::Vanishing
    } else if fixed.iter().all(|r| *r < tol) {
        DichotomyCase::PersistentFixedPoint
    } else {
        DichotomyCase::Neither
    };
    Ok(DichotomyReport {
        n,
        h_conj_norm: h_norm,
        fixed_residuals: fixed,
        case,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvidenceLevel {
    pub n: usize,
    /// smallest relative residual over the trial densities at this `n`
    pub min_trial_residual: f64,
    /// band modes with residual below [`FIXED_MODE_TOL`]
    pub fixed_modes: usize,
    pub smallest_band_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonexistenceEvidence {
    /// always `"EVIDENCE"`: discretization cannot prove absence
    pub label: &'static str,
    pub curve_id: String,
    pub seed: u64,
    pub trials: usize,
    pub degree: usize,
    /// `min over trials` of `min over N` of `‖ΠF - F‖ / ‖F‖`
    pub residual_floor: f64,
    pub trial_residuals: Vec<f64>,
    pub levels: Vec<EvidenceLevel>,
    /// fixed modes present at every level
    pub persistent_fixed_modes: usize,
    pub trapping: Option<TrappingReport>,
}

/// Real mean-free trigonometric density of degree `<= degree` in the curve
/// parameter, unit discrete ℓ² norm, as coefficient pairs `(a_k, b_k)`.
fn random_real_trig(rng: &mut ChaCha8Rng, degree: usize) -> Vec<(f64, f64)> {
    let coeffs: Vec<(f64, f64)> = (0..degree)
        .map(|_| (StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = coeffs.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
    coeffs.into_iter().map(|(a, b)| (a / norm, b / norm)).collect()
}

fn trig_density(sc: &SampledCurve, coeffs: &[(f64, f64)]) -> DensityGrid {
    DensityGrid::from_fn(sc, |_, t| {
        let v: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let kt = (k + 1) as f64 * t;
                a * kt.cos() + b * kt.sin()
            })
            .sum();
        C::new(v, 0.0)
    })
}

/// Refinement study of fixed points of `Π` on `spec`: random trial densities,
/// a band-limited mode search and, for ellipses and rational-map images, the
/// reflection trapping check.
pub fn nonexistence_evidence(spec: &CurveSpec, trials: usize, seed: u64) -> Result<NonexistenceEvidence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities: Vec<Vec<(f64, f64)>> = (0..trials).map(|_| random_real_trig(&mut rng, EVIDENCE_DEGREE)).collect();
    let per_level: Vec<(String, Vec<f64>, EvidenceLevel)> = EVIDENCE_LEVELS
        .par_iter()
        .map(|&n| -> Result<_> {
            let sc = sample_curve(spec, n)?;
            let pi = assemble_pi(&sc);
            let res: Vec<f64> = densities
                .iter()
                .map(|c| {
                    let f = trig_density(&sc, c);
                    pi.apply(&f).map(|pf| {
                        pf.zip_with(&f, |a, b| a - b).l2_norm() / f.l2_norm()
                    })
                })
                .collect::<Result<_>>()?;
            let modes = band_fixed_modes(&pi, EVIDENCE_DEGREE)?;
            let level = EvidenceLevel {
                n,
                min_trial_residual: res.iter().copied().fold(f64::INFINITY, f64::min),
                fixed_modes: modes.count_below(FIXED_MODE_TOL),
                smallest_band_residual: modes.residuals.first().copied().unwrap_or(f64::NAN),
            };
            Ok((sc.id.clone(), res, level))
        })
        .collect::<Result<_>>()?;
    let trial_residuals: Vec<f64> = (0..trials)
        .map(|i| per_level.iter().map(|(_, r, _)| r[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let trapping = match spec {
        CurveSpec::Ellipse { a, b } => {
            let q = complexify(&RealBivarPoly::ellipse(*a, *b));
            let sc = sample_curve(spec, 1024)?;
            Some(trapping_check_q(&q, &sc, Location::Interior, 100, seed)?)
        }
        CurveSpec::RationalMap { map } if map.degree() >= 2 => Some(trapping_check(map, 100, seed)?),
        _ => None,
    };
    Ok(NonexistenceEvidence {
        label: "EVIDENCE",
        curve_id: per_level[0].0.clone(),
        seed,
        trials,
        degree: EVIDENCE_DEGREE,
        residual_floor: trial_residuals.iter().copied().fold(f64::INFINITY, f64::min),
        trial_residuals,
        persistent_fixed_modes: per_level.iter().map(|(_, _, l)| l.fixed_modes).min().unwrap_or(0),
        levels: per_level.into_iter().map(|(_, _, l)| l).collect(),
        trapping,
    })
}

/// Real form `P(x, y)` of the lemniscate `|p|² = c²`, from
/// `Q(z, w) = p(z) p#(w) - c²` where `p#` has conjugated coefficients.
pub fn lemniscate_real_form(p: &Poly, c: f64) -> Result<RealBivarPoly> {
    let a = p.coeffs();
    let n = p.degree();
    let q = HermitianBivarPoly::new(
        (0..=n)
            .map(|j| {
                (0..=n)
                    .map(|k| a[j] * a[k].conj() - if j == 0 && k == 0 { C::new(c * c, 0.0) } else { C::new(0.0, 0.0) })
                    .collect()
            })
            .collect(),
    )?;
    Ok(decomplexify(&q))
}

/// Largest deviation of the degree-`2n` part of `real` from
/// `|a_n|² (x² + y²)^n`, relative to `|a_n|²`.
pub fn leading_form_deviation(real: &RealBivarPoly, p: &Poly) -> f64 {
    let n = p.degree();
    let lead = p.leading().norm_sqr();
    let mut worst: f64 = 0.0;
    for j in 0..=2 * n {
        let k = 2 * n - j;
        let expect = if j % 2 == 0 { binomial(n, j / 2) * lead } else { 0.0 };
        worst = worst.max((real.coeff(j, k) - expect).abs() / lead);
    }
    worst
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
