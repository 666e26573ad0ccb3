//! Level sets `{|R(z)| = c}` of rational functions.
//!
//! A component of a non-critical level set is traced by following the
//! argument of `R`: along the component `R(z(s)) = R(z0) e^{is}`, so `z` solves
//! `dz/ds = i R(z) / R'(z)`. Each step is an RK4 predictor followed by Newton
//! correction onto the exact target value, which keeps every node on the level
//! set to rounding error and makes the resulting parametrization analytic.

use num_complex::Complex64;
use std::f64::consts::TAU;

use super::geometry::{distance_to_polygon, first_self_intersection, signed_area};
use crate::error::{Error, Result};
use crate::rational::RationalFn;

type C = Complex64;

/// One traced component of a level set.
#[derive(Debug, Clone)]
pub struct LevelComponent {
    /// nodes, `steps_per_turn * |winding|` of them
    pub points: Vec<C>,
    /// net count of zeros minus poles enclosed
    pub winding: i64,
}

/// Outcome of the grid-seeded Jordan test.
#[derive(Debug, Clone, PartialEq)]
pub enum JordanStatus {
    Jordan,
    NotJordan(String),
}

impl JordanStatus {
    pub fn is_jordan(&self) -> bool {
        matches!(self, JordanStatus::Jordan)
    }
}

pub(crate) struct Tracer<'a> {
    f: &'a RationalFn,
    df: RationalFn,
    scale: f64,
}

impl<'a> Tracer<'a> {
    pub(crate) fn new(f: &'a RationalFn) -> Self {
        let mut pts: Vec<C> = f.zeros();
        pts.extend(f.poles());
        let scale = pts.iter().map(|z| z.norm()).fold(1.0, f64::max);
        Self {
            f,
            df: f.derivative(),
            scale,
        }
    }

    fn velocity(&self, z: C, speed: f64) -> Result<C> {
        let d = self.df.eval(z);
        let v = self.f.eval(z);
        if !(d.norm() * self.scale > 1e-10 * v.norm()) || !d.is_finite() {
            return Err(Error::TraceFailure(format!(
                "derivative vanishes near {z} (critical level?)"
            )));
        }
        Ok(C::new(0.0, speed) * v / d)
    }

    /// Newton iteration for `R(z) = target`.
    pub(crate) fn correct(&self, mut z: C, target: C) -> Result<C> {
        for _ in 0..30 {
            let r = self.f.eval(z) - target;
            if r.norm() <= 4e-15 * target.norm() {
                return Ok(z);
            }
            let d = self.df.eval(z);
            if d.norm() == 0.0 || !d.is_finite() {
                break;
            }
            let step = r / d;
            z -= step;
            if step.norm() <= 1e-16 * self.scale.max(z.norm()) {
                return Ok(z);
            }
        }
        let r = (self.f.eval(z) - target).norm();
        if r <= 1e-11 * target.norm() {
            return Ok(z);
        }
        Err(Error::TraceFailure(format!(
            "Newton correction stalled near {z} (residual {r:e})"
        )))
    }

    /// Moves from `z` (with `R(z) = target0`) by `ds` in argument, `speed`
    /// turns of arg R per unit parameter.
    pub(crate) fn step(&self, z: C, target0: C, ds: f64, speed: f64, substeps: usize) -> Result<C> {
        let h = ds / substeps as f64;
        let mut z = z;
        let mut s = 0.0;
        for _ in 0..substeps {
            let k1 = self.velocity(z, speed)?;
            let k2 = self.velocity(z + k1 * (h / 2.0), speed)?;
            let k3 = self.velocity(z + k2 * (h / 2.0), speed)?;
            let k4 = self.velocity(z + k3 * h, speed)?;
            z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            s += h;
            z = self.correct(z, target0 * C::from_polar(1.0, speed * s))?;
        }
        Ok(z)
    }

    /// Pulls a point near the level set onto `|R| = level` along the gradient of `log|R|`.
    pub(crate) fn project(&self, mut z: C, level: f64) -> Result<C> {
        let lc = level.ln();
        for _ in 0..50 {
            let v = self.f.eval(z);
            let g = (self.df.eval(z) / v).conj();
            let e = v.norm().ln() - lc;
            if e.abs() < 1e-15 {
                return Ok(z);
            }
            if g.norm() == 0.0 || !g.is_finite() {
                break;
            }
            z -= g * (e / g.norm_sqr());
        }
        let e = (self.f.eval(z).norm().ln() - lc).abs();
        if e < 1e-12 {
            Ok(z)
        } else {
            Err(Error::TraceFailure(format!("could not project seed {z} onto the level set")))
        }
    }
}

/// Traces the component through `z0` (already on the level set) with
/// `steps_per_turn` nodes per full turn of `arg R`.
pub fn trace_component(f: &RationalFn, z0: C, steps_per_turn: usize) -> Result<LevelComponent> {
    let tracer = Tracer::new(f);
    let target0 = f.eval(z0);
    let max_turns = f.num().degree() + f.den().degree() + 1;
    let ds = TAU / steps_per_turn as f64;
    let substeps = (256 / steps_per_turn).max(1);
    let mut pts = vec![z0];
    let mut z = z0;
    let mut min_step = f64::INFINITY;
    for turn in 1..=max_turns {
        for k in 0..steps_per_turn {
            let s0 = ((turn - 1) * steps_per_turn + k) as f64 * ds;
            let znew = tracer.step(z, target0 * C::from_polar(1.0, s0), ds, 1.0, substeps)?;
            min_step = min_step.min((znew - z).norm());
            z = znew;
            pts.push(z);
        }
        if (z - z0).norm() < 1e-6 * min_step {
            pts.pop();
            let mut winding = turn as i64;
            if signed_area(&pts) < 0.0 {
                winding = -winding;
            }
            return Ok(LevelComponent { points: pts, winding });
        }
    }
    Err(Error::TraceFailure(format!(
        "component through {z0} did not close after {max_turns} turns"
    )))
}

/// A box guaranteed (for polynomials) or expected (for rational functions) to
/// contain the level set.
fn bounding_box(f: &RationalFn, level: f64) -> (C, f64) {
    let mut pts = f.zeros();
    pts.extend(f.poles());
    let center = if pts.is_empty() {
        C::new(0.0, 0.0)
    } else {
        pts.iter().sum::<C>() / pts.len() as f64
    };
    let spread = pts.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let dp = f.num().degree() as i32;
    let dq = f.den().degree() as i32;
    let reach = if dp > dq {
        let lead = (f.num().leading() / f.den().leading()).norm();
        (level / lead).powf(1.0 / (dp - dq) as f64)
    } else {
        2.0 * spread + 1.0
    };
    (center, 1.1 * (spread + reach) + 1e-3)
}

/// Grid-seeded component count of `{|f| = level}`, resolution-bounded by the
/// grid of `grid x grid` cells; each seed not already on a traced component is
/// traced in full.
pub fn level_components(f: &RationalFn, level: f64, grid: usize, steps_per_turn: usize) -> Result<Vec<LevelComponent>> {
    if !(level > 0.0) {
        return Err(Error::InvalidInput(format!("level must be positive, got {level}")));
    }
    let (center, half) = bounding_box(f, level);
    let cell = 2.0 * half / grid as f64;
    let node = |i: usize, j: usize| center + C::new(-half + i as f64 * cell, -half + j as f64 * cell);
    let lc = level.ln();
    let val = |z: C| f.eval(z).norm().ln() - lc;
    let tracer = Tracer::new(f);
    let mut comps: Vec<LevelComponent> = Vec::new();
    for j in 0..=grid {
        let mut prev = val(node(0, j));
        for i in 1..=grid {
            let cur = val(node(i, j));
            if prev.is_finite() && cur.is_finite() && (prev > 0.0) != (cur > 0.0) {
                let (a, b) = (node(i - 1, j), node(i, j));
                let seed = a + (b - a) * (prev / (prev - cur));
                let z0 = tracer.project(seed, level)?;
                let known = comps
                    .iter()
                    .any(|c| distance_to_polygon(&c.points, z0) < 0.1 * cell);
                if !known {
                    comps.push(trace_component(f, z0, steps_per_turn)?);
                }
            }
            prev = cur;
        }
    }
    Ok(comps)
}

/// Jordan test for the level set `{|f| = level}` at grid resolution `n`.
pub fn check_jordan_level(f: &RationalFn, level: f64, n: usize) -> Result<JordanStatus> {
    let grid = (n / 2).clamp(32, 512);
    let comps = level_components(f, level, grid, n.max(64))?;
    match comps.len() {
        0 => Ok(JordanStatus::NotJordan("no component found on the grid".into())),
        1 => {
            let c = &comps[0];
            if let Some((i, j)) = first_self_intersection(&c.points) {
                return Ok(JordanStatus::NotJordan(format!("traced component self-intersects at edges {i}, {j}")));
            }
            Ok(JordanStatus::Jordan)
        }
        k => {
            let w: Vec<i64> = comps.iter().map(|c| c.winding).collect();
            Ok(JordanStatus::NotJordan(format!("{k} components (windings {w:?})")))
        }
    }
}

/// Bisection for the smallest level at which the level set is Jordan, between
/// `lo` (not Jordan) and `hi` (Jordan). Resolution-bounded like the Jordan test.
pub fn empirical_jordan_threshold(f: &RationalFn, mut lo: f64, mut hi: f64, n: usize, iters: usize) -> Result<f64> {
    let ok = |c: f64| -> Result<bool> {
        match check_jordan_level(f, c, n) {
            Ok(s) => Ok(s.is_jordan()),
            // tracing stalls right at a critical level; treat as not Jordan
            Err(Error::TraceFailure(_)) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if ok(lo)? || !ok(hi)? {
        return Err(Error::InvalidInput("threshold bracket does not straddle the transition".into()));
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    fn z2m1() -> RationalFn {
        RationalFn::polynomial(Poly::from_real(&[-1.0, 0.0, 1.0]))
    }

    #[test]
    fn identity_level_is_circle() {
        let f = RationalFn::identity();
        for &c in &[0.3, 1.0, 5.0] {
            assert_eq!(check_jordan_level(&f, c, 64).unwrap(), JordanStatus::Jordan);
        }
    }

    #[test]
    fn z2_minus_1_component_counts() {
        // grid-seeded component count: 1 at c = 2, 2 at c = 1/2
        let f = z2m1();
        assert_eq!(level_components(&f, 2.0, 64, 128).unwrap().len(), 1);
        let two = level_components(&f, 0.5, 64, 128).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|c| c.winding == 1));
        assert!(matches!(check_jordan_level(&f, 0.5, 128).unwrap(), JordanStatus::NotJordan(_)));
    }

    #[test]
    fn traced_points_lie_on_level() {
        let f = z2m1();
        let comps = level_components(&f, 2.0, 64, 128).unwrap();
        assert_eq!(comps[0].winding, 2);
        for z in &comps[0].points {
            assert!((f.eval(*z).norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_for_z2_minus_1_is_critical_value() {
        // |p(0)| = 1 is the only critical value
        let t = empirical_jordan_threshold(&z2m1(), 0.5, 2.0, 256, 16).unwrap();
        assert!((t - 1.0).abs() < 2e-2, "{t}");
    }
}
