//! Analytic Jordan curves and their equispaced-parameter traces.
//!
//! Every [`SampledCurve`] is counterclockwise with outward normal
//! `-i z'/|z'|`; all kernel signs downstream rely on that convention.

pub mod geometry;
pub mod level;

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::RationalFn;
use geometry::{distance_to_polygon, first_self_intersection, signed_area, winding_number};
pub use level::{check_jordan_level, empirical_jordan_threshold, JordanStatus};
use level::Tracer;

type C = Complex64;

/// Default radius out to which rational maps must stay univalent.
pub const DEFAULT_UNIVALENCE_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveSpec {
    Circle { center: C, radius: f64 },
    /// `a cos t + i b sin t`, `a >= b`
    Ellipse { a: f64, b: f64 },
    /// `{|p(z)| = level}` for the monic `p` with the given zeros
    Lemniscate { roots: Vec<C>, level: f64 },
    /// `{|R(z)| = level}` for a rational `R` with `R(inf) = inf`
    LevelCurve { func: RationalFn, level: f64 },
    /// `phi(|zeta| = 1)` for `phi` univalent near the closed unit disk
    RationalMap { map: RationalFn },
}

impl CurveSpec {
    pub fn unit_circle() -> Self {
        CurveSpec::Circle {
            center: C::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CurveSpec::Circle { radius, .. } if !(*radius > 0.0) => {
                Err(Error::InvalidInput(format!("circle radius must be positive, got {radius}")))
            }
            CurveSpec::Ellipse { a, b } if !(*b > 0.0 && a >= b) => {
                Err(Error::InvalidInput(format!("ellipse needs a >= b > 0, got a={a}, b={b}")))
            }
            CurveSpec::Lemniscate { roots, level } if roots.is_empty() || !(*level > 0.0) => Err(
                Error::InvalidInput("lemniscate needs at least one root and a positive level".into()),
            ),
            CurveSpec::LevelCurve { func, level } => {
                if !(*level > 0.0) {
                    return Err(Error::InvalidInput("level must be positive".into()));
                }
                if !func.value_at_infinity().is_infinite() {
                    return Err(Error::InvalidInput("level-curve function must have R(inf) = inf".into()));
                }
                Ok(())
            }
            CurveSpec::RationalMap { map } => {
                let u = check_univalent(map, DEFAULT_UNIVALENCE_MARGIN);
                if u.univalent {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "map is not univalent near the closed disk: {}",
                        u.reason.unwrap_or_default()
                    )))
                }
            }
            _ => Ok(()),
        }
    }

    /// The rational function whose level set this is, for lemniscate variants.
    pub fn level_function(&self) -> Option<(RationalFn, f64)> {
        match self {
            CurveSpec::Lemniscate { roots, level } => {
                Some((RationalFn::polynomial(Poly::from_roots(roots)), *level))
            }
            CurveSpec::LevelCurve { func, level } => Some((func.clone(), *level)),
            _ => None,
        }
    }

    pub fn id(&self) -> String {
        match self {
            CurveSpec::Circle { center, radius } => format!("circle(c={center},r={radius})"),
            CurveSpec::Ellipse { a, b } => format!("ellipse(a={a},b={b})"),
            CurveSpec::Lemniscate { roots, level } => {
                let r: Vec<String> = roots.iter().map(|z| z.to_string()).collect();
                format!("lemniscate(roots=[{}],c={level})", r.join(";"))
            }
            CurveSpec::LevelCurve { func, level } => {
                format!("level_curve(num=[{}],den=[{}],c={level})", func.num(), func.den())
            }
            CurveSpec::RationalMap { map } => format!("rational_map(num=[{}],den=[{}])", map.num(), map.den()),
        }
    }
}

/// Equispaced-parameter trace of a closed analytic curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub id: String,
    pub params: Vec<f64>,
    pub z: Vec<C>,
    /// dz/dt
    pub velocity: Vec<C>,
    /// d²z/dt²
    pub acceleration: Vec<C>,
    pub speed: Vec<f64>,
    pub normal: Vec<C>,
    pub curvature: Vec<f64>,
}

impl SampledCurve {
    /// Builds the derived quantities from positions and derivatives. The input
    /// orientation is kept as given.
    pub fn from_parts(id: String, z: Vec<C>, velocity: Vec<C>, acceleration: Vec<C>) -> Self {
        let n = z.len();
        let params = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let speed: Vec<f64> = velocity.iter().map(|v| v.norm()).collect();
        let normal = velocity
            .iter()
            .zip(&speed)
            .map(|(v, s)| C::new(0.0, -1.0) * v / *s)
            .collect();
        let curvature = velocity
            .iter()
            .zip(&acceleration)
            .zip(&speed)
            .map(|((v, a), s)| (a * v.conj()).im / (s * s * s))
            .collect();
        Self {
            id,
            params,
            z,
            velocity,
            acceleration,
            speed,
            normal,
            curvature,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Parameter step `2π/N`.
    pub fn h(&self) -> f64 {
        TAU / self.len() as f64
    }

    /// Largest distance between consecutive nodes, measured along the parametrization.
    pub fn node_spacing(&self) -> f64 {
        self.h() * self.speed.iter().cloned().fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.z {
            for b in &self.z {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    pub fn arclength(&self) -> f64 {
        self.h() * self.speed.iter().sum::<f64>()
    }

    /// Area enclosed, from the trapezoidal rule for `(1/2) Im ∮ conj(z) dz`.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.h()
            * self
                .z
                .iter()
                .zip(&self.velocity)
                .map(|(z, v)| (z.conj() * v).im)
                .sum::<f64>()
    }

    /// The same curve traversed backwards, `t -> -t`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let idx = |j: usize| (n - j) % n;
        let z = (0..n).map(|j| self.z[idx(j)]).collect();
        let v = (0..n).map(|j| -self.velocity[idx(j)]).collect();
        let a = (0..n).map(|j| self.acceleration[idx(j)]).collect();
        Self::from_parts(self.id.clone(), z, v, a)
    }

    /// Trigonometric interpolation onto `factor` times as many nodes.
    pub fn upsample(&self, factor: usize) -> Self {
        let up = |v: &[C]| crate::spectral::upsample(v, factor);
        Self::from_parts(self.id.clone(), up(&self.z), up(&self.velocity), up(&self.acceleration))
    }

    /// Counterclockwise version of this curve.
    pub fn normalize_orientation(self) -> Self {
        if self.signed_area() < 0.0 {
            self.reversed()
        } else {
            self
        }
    }

    /// Writes columns `t, re_z, im_z, re_dz, im_dz, kappa`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "re_z", "im_z", "re_dz", "im_dz", "kappa"])?;
        for j in 0..self.len() {
            let (z, v) = (self.z[j], self.velocity[j]);
            wr.write_record(&[
                self.params[j].to_string(),
                z.re.to_string(),
                z.im.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                self.curvature[j].to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn check_node_count(n: usize) -> Result<()> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "node count must be a power of two >= 16, got {n}"
        )));
    }
    Ok(())
}

/// Samples `spec` at `n` equispaced parameter values.
pub fn sample_curve(spec: &CurveSpec, n: usize) -> Result<SampledCurve> {
    check_node_count(n)?;
    spec.validate()?;
    let ts: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let (z, v, a) = match spec {
        CurveSpec::Circle { center, radius } => {
            let e: Vec<C> = ts.iter().map(|&t| C::from_polar(*radius, t)).collect();
            (
                e.iter().map(|e| center + e).collect(),
                e.iter().map(|e| C::new(0.0, 1.0) * e).collect(),
                e.iter().map(|e| -e).collect(),
            )
        }
        CurveSpec::Ellipse { a, b } => {
            let z: Vec<C> = ts.iter().map(|t| C::new(a * t.cos(), b * t.sin())).collect();
            (
                z.clone(),
                ts.iter().map(|t| C::new(-a * t.sin(), b * t.cos())).collect(),
                z.iter().map(|z| -z).collect(),
            )
        }
        CurveSpec::RationalMap { map } => {
            let d1 = map.derivative();
            let d2 = d1.derivative();
            let zeta: Vec<C> = ts.iter().map(|&t| C::from_polar(1.0, t)).collect();
            (
                zeta.iter().map(|&s| map.eval(s)).collect(),
                zeta.iter().map(|&s| d1.eval(s) * C::new(0.0, 1.0) * s).collect(),
                zeta.iter().map(|&s| -d2.eval(s) * s * s - d1.eval(s) * s).collect(),
            )
        }
        CurveSpec::Lemniscate { .. } | CurveSpec::LevelCurve { .. } => {
            let (f, level) = spec.level_function().expect("lemniscate variant");
            match check_jordan_level(&f, level, n)? {
                JordanStatus::Jordan => {}
                JordanStatus::NotJordan(why) => return Err(Error::JordanViolation(why)),
            }
            trace_level_curve(&f, level, n)?
        }
    };
    let sc = SampledCurve::from_parts(spec.id(), z, v, a).normalize_orientation();
    validate_trace(&sc)?;
    Ok(sc)
}

/// Nodes of `{|f| = level}` with `f(z(t)) = f(z0) e^{i d t}`, where `d` is the
/// winding of `arg f` along the (Jordan) curve.
fn trace_level_curve(f: &RationalFn, level: f64, n: usize) -> Result<(Vec<C>, Vec<C>, Vec<C>)> {
    // start at the preimage of +level with the largest real part
    let eq = f.num().clone() - f.den().scale(C::new(level, 0.0));
    let z0 = eq
        .roots()
        .into_iter()
        .filter(|z| (f.eval(*z).norm() - level).abs() < 1e-8 * level)
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .ok_or_else(|| Error::TraceFailure("no preimage of the level on the curve".into()))?;
    let tracer = Tracer::new(f);
    let z0 = tracer.correct(z0, C::new(level, 0.0))?;
    let turns = level::trace_component(f, z0, 64)?.winding.abs() as f64;
    let target0 = C::new(level, 0.0);
    let dt = TAU / n as f64;
    let substeps = ((256.0 * turns.abs()) as usize / n).max(1);
    let mut z = Vec::with_capacity(n);
    z.push(z0);
    for j in 1..n {
        let t0 = (j - 1) as f64 * dt;
        let prev = z[j - 1];
        let next = tracer.step(prev, target0 * C::from_polar(1.0, turns * t0), dt, turns, substeps)?;
        z.push(next);
    }
    let df = f.derivative();
    let d2f = df.derivative();
    let mut vel = Vec::with_capacity(n);
    let mut acc = Vec::with_capacity(n);
    for &p in &z {
        let (r, r1, r2) = (f.eval(p), df.eval(p), d2f.eval(p));
        let v = C::new(0.0, turns) * r / r1;
        vel.push(v);
        acc.push(C::new(0.0, turns) * (C::new(1.0, 0.0) - r * r2 / (r1 * r1)) * v);
    }
    Ok((z, vel, acc))
}

fn validate_trace(sc: &SampledCurve) -> Result<()> {
    let scale = sc.z.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let min_speed = sc.speed.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_speed > 1e-10 * scale) {
        return Err(Error::CuspDetected { min_speed });
    }
    if let Some((i, j)) = first_self_intersection(&sc.z) {
        return Err(Error::JordanViolation(format!("edges {i} and {j} of the node polygon intersect")));
    }
    if signed_area(&sc.z) <= 0.0 {
        return Err(Error::JordanViolation("node polygon is not counterclockwise".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Interior,
    Exterior,
    Boundary,
}

/// Classifies `z` against the node polygon of `sc`.
pub fn point_location(sc: &SampledCurve, z: C, tol: f64) -> Result<Location> {
    if distance_to_polygon(&sc.z, z) < tol {
        return Ok(Location::Boundary);
    }
    let w = winding_number(&sc.z, z);
    let k = w.round();
    if (w - k).abs() > 1e-6 {
        return Err(Error::AmbiguousLocation { point: z, winding: w });
    }
    match k as i64 {
        1 => Ok(Location::Interior),
        0 => Ok(Location::Exterior),
        _ => Err(Error::AmbiguousLocation { point: z, winding: w }),
    }
}

/// Jordan test for a lemniscate spec at resolution `n`.
pub fn check_jordan(spec: &CurveSpec, n: usize) -> Result<JordanStatus> {
    let (f, level) = spec
        .level_function()
        .ok_or_else(|| Error::InvalidInput("Jordan test applies to lemniscate specs".into()))?;
    if !(level > 0.0) {
        return Err(Error::InvalidInput("level must be positive".into()));
    }
    check_jordan_level(&f, level, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Univalence {
    pub univalent: bool,
    pub reason: Option<String>,
    /// grid minimum of |phi'| on the closed disk of radius `margin`
    pub min_derivative: f64,
}

impl Univalence {
    fn fail(reason: String, min_derivative: f64) -> Self {
        Self {
            univalent: false,
            reason: Some(reason),
            min_derivative,
        }
    }
}

/// Univalence of `map` on the closed disk `|zeta| <= margin`: no poles, no
/// critical points, and a simple boundary image winding once around images of
/// interior points.
pub fn check_univalent(map: &RationalFn, margin: f64) -> Univalence {
    if !(margin > 1.0) {
        return Univalence::fail(format!("margin must exceed 1, got {margin}"), f64::NAN);
    }
    if map.degree() == 0 {
        return Univalence::fail("constant map".into(), 0.0);
    }
    if let Some(p) = map.poles().into_iter().find(|p| p.norm() <= margin) {
        return Univalence::fail(format!("pole at {p} inside |zeta| <= {margin}"), f64::NAN);
    }
    let d1 = map.derivative();
    let (nr, na) = (32, 128);
    let mut min_d = f64::INFINITY;
    for i in 0..=nr {
        let r = margin * i as f64 / nr as f64;
        for k in 0..na {
            let s = C::from_polar(r, TAU * k as f64 / na as f64);
            min_d = min_d.min(d1.eval(s).norm());
            if i == 0 {
                break;
            }
        }
    }
    if let Some(c) = map.critical_points().into_iter().find(|c| c.norm() <= margin) {
        return Univalence::fail(format!("derivative vanishes at {c}"), min_d);
    }
    if !(min_d > 1e-12) {
        return Univalence::fail(format!("grid minimum of |phi'| is {min_d:e}"), min_d);
    }
    let m = 1024;
    let image: Vec<C> = (0..m)
        .map(|k| map.eval(C::from_polar(margin, TAU * k as f64 / m as f64)))
        .collect();
    if let Some((i, j)) = first_self_intersection(&image) {
        return Univalence::fail(format!("boundary image self-intersects (edges {i}, {j})"), min_d);
    }
    let probes = std::iter::once(C::new(0.0, 0.0)).chain((0..16).flat_map(|k| {
        let th = PI * k as f64 / 8.0;
        [C::from_polar(0.5 * margin, th), C::from_polar(0.9 * margin, th)]
    }));
    for s in probes {
        let w = winding_number(&image, map.eval(s));
        if (w - 1.0).abs() > 1e-6 {
            return Univalence::fail(format!("boundary image winds {w:.3} times around phi({s})"), min_d);
        }
    }
    Univalence {
        univalent: true,
        reason: None,
        min_derivative: min_d,
    }
}

#[cfg(test)]
pub(crate) mod tests;
