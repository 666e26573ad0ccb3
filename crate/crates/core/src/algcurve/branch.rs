//! Branch points of the Schwarz function and continuation of its branches.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use super::{projective_roots, HermitianBivarPoly};
use crate::curve::geometry::distance_to_segment;
use crate::error::{Error, Result};
use crate::poly::{sylvester_resultant, Poly};

type C = Complex64;

/// Default exclusion radius relative to the scale of the point set.
pub const DEFAULT_EXCLUSION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPointType {
    /// root of the discriminant
    Branch,
    /// root of the leading coefficient `a_n`, where a value escapes to infinity
    Exceptional,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPointSet {
    pub branch: Vec<C>,
    pub exceptional: Vec<C>,
    /// relative polynomial residuals, same order as `branch` then `exceptional`
    pub branch_residuals: Vec<f64>,
    pub exceptional_residuals: Vec<f64>,
    /// paths must stay at least this far from every listed point
    pub eps: f64,
}

impl BranchPointSet {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Branch and exceptional points together.
    pub fn obstacles(&self) -> impl Iterator<Item = &C> {
        self.branch.iter().chain(&self.exceptional)
    }

    pub fn distance(&self, z: C) -> f64 {
        self.obstacles().map(|b| (b - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Columns `re, im, type, residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["re", "im", "type", "residual"])?;
        let rows = self
            .branch
            .iter()
            .zip(&self.branch_residuals)
            .map(|(z, r)| (z, "branch", r))
            .chain(self.exceptional.iter().zip(&self.exceptional_residuals).map(|(z, r)| (z, "exceptional", r)));
        for (z, kind, r) in rows {
            wr.write_record(&[z.re.to_string(), z.im.to_string(), kind.to_string(), r.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Coefficients of a polynomial of degree `< m` from its values at
/// `rho * e^{2πik/m}`.
pub(crate) fn interpolate_on_circle(values: &[C], rho: f64) -> Vec<C> {
    let m = values.len();
    (0..m)
        .map(|k| {
            let s: C = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * C::from_polar(1.0, -TAU * (j * k % m) as f64 / m as f64))
                .sum();
            s / (m as f64 * rho.powi(k as i32))
        })
        .collect()
}

/// Hadamard bound on the Sylvester determinant of `f` and `g`.
pub(crate) fn hadamard(f: &[C], g: &[C]) -> f64 {
    let nf = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let ng = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    nf.powi(g.len() as i32 - 1) * ng.powi(f.len() as i32 - 1)
}

/// Discriminant of `Q` in `w` as a polynomial in `z`: the resultant of `Q` and
/// `∂Q/∂w` (nominal degrees `n`, `n-1`), sampled on a circle, interpolated and
/// divided by `a_n`.
fn discriminant(q: &HermitianBivarPoly) -> Result<Poly> {
    let n = q.w_degree();
    if n == 1 {
        return Ok(Poly::one());
    }
    let m = (2 * n - 1) * q.z_degree() + 1;
    let rho = 1.0;
    let mut worst_rel: f64 = 0.0;
    let values: Vec<C> = (0..m)
        .map(|j| {
            let z = C::from_polar(rho, TAU * j as f64 / m as f64);
            let f = q.coeffs_in_w(z);
            let g: Vec<C> = f.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
            let r = sylvester_resultant(&f, &g);
            worst_rel = worst_rel.max(r.norm() / hadamard(&f, &g));
            r
        })
        .collect();
    if worst_rel < 1e-11 {
        return Err(Error::DegenerateDiscriminant);
    }
    let res = Poly::new(interpolate_on_circle(&values, rho)).trimmed(1e-12);
    let an = q.a(n).trimmed(1e-14);
    let (quot, rem) = res.div_rem(&an)?;
    if rem.max_abs_coeff() > 1e-8 * res.max_abs_coeff() {
        return Err(Error::DegenerateDiscriminant);
    }
    let d = quot.trimmed(1e-11);
    if d.is_zero() {
        return Err(Error::DegenerateDiscriminant);
    }
    Ok(d)
}

/// Branch points (discriminant roots) and exceptional points (roots of `a_n`).
/// The exclusion radius defaults to `1e-3 * max(1, max |point|)`; callers with
/// a curve at hand set it from the curve diameter via [`BranchPointSet::with_eps`].
pub fn branch_points(q: &HermitianBivarPoly) -> Result<BranchPointSet> {
    let n = q.w_degree();
    let d = discriminant(q)?;
    let branch = d.roots_with_tol(1e-11);
    let an = q.a(n);
    let exceptional = an.roots();
    let branch_residuals = branch.iter().map(|b| d.relative_residual(*b)).collect();
    let exceptional_residuals = exceptional.iter().map(|b| an.relative_residual(*b)).collect();
    let scale = branch.iter().chain(&exceptional).map(|z| z.norm()).fold(1.0, f64::max);
    Ok(BranchPointSet {
        branch,
        exceptional,
        branch_residuals,
        exceptional_residuals,
        eps: DEFAULT_EXCLUSION * scale,
    })
}

/// Nearest over second-nearest root distance must be below this for a step to
/// be accepted.
const AMBIGUITY_RATIO: f64 = 0.5;

/// Continues the root `w_start` of `Q(path[0], ·)` along the polyline `path`.
pub fn continue_branch(q: &HermitianBivarPoly, path: &[C], w_start: C, bps: &BranchPointSet) -> Result<C> {
    let Some(&z0) = path.first() else {
        return Err(Error::InvalidInput("empty path".into()));
    };
    let res = q.relative_residual(z0, w_start);
    if !(res <= 1e-8) {
        return Err(Error::InvalidInput(format!(
            "w_start = {w_start} is not a root of Q({z0}, w) (relative residual {res:e})"
        )));
    }
    for seg in path.windows(2) {
        for b in bps.obstacles() {
            let d = distance_to_segment(seg[0], seg[1], *b);
            if d < bps.eps {
                return Err(Error::PathTooCloseToBranch {
                    point: *b,
                    distance: d,
                    radius: bps.eps,
                });
            }
        }
    }
    let scale = path.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let h_min = 1e-12 * scale;
    let mut w = w_start;
    let mut prev: Option<(C, C)> = None;
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let dir = (b - a) / len;
        let mut s = 0.0;
        let mut h = len;
        while s < len {
            let z = a + dir * s;
            h = h.min(len - s).min(0.25 * bps.distance(z));
            loop {
                let z_new = if s + h >= len { b } else { a + dir * (s + h) };
                let slope = prev.map_or(C::new(0.0, 0.0), |(zp, wp)| (w - wp) / (z - zp));
                let pred = w + slope * (z_new - z);
                let roots = projective_roots(&q.coeffs_in_w(z_new))
                    .map(|(v, _)| v.into_iter().filter_map(|r| r.finite()).collect::<Vec<_>>())
                    .unwrap_or_default();
                let mut dist: Vec<(f64, C)> = roots.iter().map(|r| ((r - pred).norm(), *r)).collect();
                dist.sort_by(|x, y| x.0.total_cmp(&y.0));
                let accept = match dist.len() {
                    0 => false,
                    1 => true,
                    _ => dist[0].0 < AMBIGUITY_RATIO * dist[1].0,
                };
                if accept {
                    prev = Some((z, w));
                    w = dist[0].1;
                    s += h;
                    h *= 1.5;
                    break;
                }
                h *= 0.5;
                if h < h_min {
                    return Err(Error::MonodromyAmbiguity { at: z_new, step: h });
                }
            }
        }
    }
    Ok(w)
}
