//! The complexified curve `Q(z, w) = P((z+w)/2, (z-w)/2i)`, its Schwarz
//! function `S` (roots in `w` of `Q(z, w) = 0`) and the anticonformal
//! reflection `R = conj S`.

mod branch;
mod rdomain;
#[cfg(test)]
mod tests;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, Projective};

pub use branch::{branch_points, continue_branch, BranchPointSet, BranchPointType};
pub use rdomain::{
    boundary_residual, implicitize_rdomain, rdomain_branch_points, rdomain_reflections, trapping_check,
    trapping_check_q, TrapFailure, TrappingReport,
};

type C = Complex64;

/// Relative size below which the leading coefficient `a_n(z)` counts as zero,
/// sending one Schwarz value to infinity.
pub const INFINITE_ROOT_TOL: f64 = 1e-12;

/// `P(x, y) = Σ c[j][k] x^j y^k` with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct RealBivarPoly {
    coeffs: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for RealBivarPoly {
    type Error = Error;
    fn try_from(c: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(c)
    }
}

impl From<RealBivarPoly> for Vec<Vec<f64>> {
    fn from(p: RealBivarPoly) -> Self {
        p.coeffs
    }
}

impl RealBivarPoly {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient in P".into()));
        }
        if coeffs.iter().flatten().all(|c| *c == 0.0) {
            return Err(Error::InvalidInput("P is identically zero".into()));
        }
        Ok(Self { coeffs })
    }

    /// Coefficient of `x^j y^k` (zero outside the stored range).
    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs.get(j).and_then(|r| r.get(k)).copied().unwrap_or(0.0)
    }

    pub fn total_degree(&self) -> usize {
        let mut d = 0;
        for (j, row) in self.coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if *c != 0.0 {
                    d = d.max(j + k);
                }
            }
        }
        d
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * x + row.iter().rev().fold(0.0, |a, c| a * y + c))
    }

    /// `x²/a² + y²/b² - 1`
    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(vec![vec![-1.0, 0.0, 1.0 / (b * b)], vec![], vec![1.0 / (a * a)]]).expect("nonzero")
    }
}

/// `Q(z, w) = Σ c[j][k] z^j w^k`, stored as a square array.
///
/// Hermitian symmetry `c[j][k] = conj(c[k][j])` is expected of curves built by
/// [`complexify`] or [`implicitize_rdomain`]; [`symmetry_check`] tests it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<C>>", into = "Vec<Vec<C>>")]
pub struct HermitianBivarPoly {
    coeffs: Vec<Vec<C>>,
}

impl TryFrom<Vec<Vec<C>>> for HermitianBivarPoly {
    type Error = Error;
    fn try_from(c: Vec<Vec<C>>) -> Result<Self> {
        Self::new(c)
    }
}

impl From<HermitianBivarPoly> for Vec<Vec<C>> {
    fn from(p: HermitianBivarPoly) -> Self {
        p.coeffs
    }
}

fn zero() -> C {
    C::new(0.0, 0.0)
}

impl HermitianBivarPoly {
    /// Pads ragged input to a square array. Fails if `Q` vanishes or has no `w`
    /// dependence.
    pub fn new(coeffs: Vec<Vec<C>>) -> Result<Self> {
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient in Q".into()));
        }
        let dim = coeffs.len().max(coeffs.iter().map(|r| r.len()).max().unwrap_or(0));
        let mut sq = vec![vec![zero(); dim]; dim];
        for (j, row) in coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                sq[j][k] = *c;
            }
        }
        let q = Self { coeffs: sq }.trimmed();
        if q.max_abs() == 0.0 {
            return Err(Error::InvalidInput("Q is identically zero".into()));
        }
        if q.w_degree() == 0 {
            return Err(Error::InvalidInput("Q does not depend on w".into()));
        }
        Ok(q)
    }

    fn trimmed(mut self) -> Self {
        let mut dim = self.coeffs.len();
        while dim > 1
            && self.coeffs[dim - 1].iter().all(|c| *c == zero())
            && self.coeffs.iter().all(|r| r[dim - 1] == zero())
        {
            dim -= 1;
        }
        self.coeffs.truncate(dim);
        self.coeffs.iter_mut().for_each(|r| r.truncate(dim));
        self
    }

    pub fn coeffs(&self) -> &[Vec<C>] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize, k: usize) -> C {
        self.coeffs.get(j).and_then(|r| r.get(k)).copied().unwrap_or(zero())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Degree `n` in `w`: the number of Schwarz values.
    pub fn w_degree(&self) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&k| self.coeffs.iter().any(|r| r[k] != zero()))
            .unwrap_or(0)
    }

    pub fn z_degree(&self) -> usize {
        (0..self.coeffs.len())
            .rev()
            .find(|&j| self.coeffs[j].iter().any(|c| *c != zero()))
            .unwrap_or(0)
    }

    /// `a_k(z)`, the coefficient of `w^k`.
    pub fn a(&self, k: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|r| r.get(k).copied().unwrap_or(zero())).collect())
    }

    pub fn eval(&self, z: C, w: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(zero(), |acc, row| acc * z + row.iter().rev().fold(zero(), |a, c| a * w + c))
    }

    /// `Σ |c_jk| |z|^j |w|^k`, the scale for relative residuals.
    pub fn eval_abs(&self, z: C, w: C) -> f64 {
        let (rz, rw) = (z.norm(), w.norm());
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * rz + row.iter().rev().fold(0.0, |a, c| a * rw + c.norm()))
    }

    pub fn relative_residual(&self, z: C, w: C) -> f64 {
        let s = self.eval_abs(z, w);
        if s == 0.0 {
            0.0
        } else {
            self.eval(z, w).norm() / s
        }
    }

    /// Coefficients of `Q(z, ·)` in ascending powers of `w`, length `n + 1`.
    pub fn coeffs_in_w(&self, z: C) -> Vec<C> {
        let n = self.w_degree();
        (0..=n)
            .map(|k| self.coeffs.iter().rev().fold(zero(), |acc, r| acc * z + r[k]))
            .collect()
    }

    /// `c[j][k] -> conj(c[k][j])`
    pub fn conj_transpose(&self) -> Self {
        let d = self.coeffs.len();
        Self {
            coeffs: (0..d).map(|j| (0..d).map(|k| self.coeffs[k][j].conj()).collect()).collect(),
        }
    }

    /// Average with the conjugate transpose, which makes the symmetry exact.
    pub fn symmetrized(&self) -> Self {
        let t = self.conj_transpose();
        let d = self.coeffs.len();
        Self {
            coeffs: (0..d)
                .map(|j| (0..d).map(|k| (self.coeffs[j][k] + t.coeffs[j][k]) * 0.5).collect())
                .collect(),
        }
    }

    /// Same curve with coefficients scaled to unit maximum modulus.
    pub fn normalized(&self) -> Self {
        let s = self.max_abs();
        Self {
            coeffs: self.coeffs.iter().map(|r| r.iter().map(|c| c / s).collect()).collect(),
        }
    }
}

type Biv = Vec<Vec<C>>;

fn biv_mul(a: &Biv, b: &Biv) -> Biv {
    let d = a.len() + b.len() - 1;
    let mut out = vec![vec![zero(); d]; d];
    for (i, ra) in a.iter().enumerate() {
        for (j, ca) in ra.iter().enumerate() {
            if *ca == zero() {
                continue;
            }
            for (k, rb) in b.iter().enumerate() {
                for (l, cb) in rb.iter().enumerate() {
                    out[i + k][j + l] += ca * cb;
                }
            }
        }
    }
    out
}

fn biv_powers(base: &Biv, d: usize) -> Vec<Biv> {
    let mut out = vec![vec![vec![C::new(1.0, 0.0)]]];
    for k in 1..=d {
        let next = biv_mul(&out[k - 1], base);
        out.push(next);
    }
    out
}

/// `Q(z, w) = P((z+w)/2, (z-w)/2i)`, expanded coefficientwise and symmetrized.
pub fn complexify(p: &RealBivarPoly) -> HermitianBivarPoly {
    let d = p.total_degree();
    let half = C::new(0.5, 0.0);
    let x = vec![vec![zero(), half], vec![half, zero()]];
    let y = vec![vec![zero(), C::new(0.0, 0.5)], vec![C::new(0.0, -0.5), zero()]];
    let xp = biv_powers(&x, d);
    let yp = biv_powers(&y, d);
    let mut q = vec![vec![zero(); d + 1]; d + 1];
    for j in 0..=d {
        for k in 0..=(d - j) {
            let c = p.coeff(j, k);
            if c == 0.0 {
                continue;
            }
            let term = biv_mul(&xp[j], &yp[k]);
            for (a, row) in term.iter().enumerate() {
                for (b, t) in row.iter().enumerate() {
                    q[a][b] += t * c;
                }
            }
        }
    }
    HermitianBivarPoly::new(q)
        .expect("complexification of a nonzero real polynomial")
        .symmetrized()
}

/// `P(x, y) = Q(x + iy, x - iy)`, the inverse of [`complexify`]. Imaginary
/// parts left by rounding are dropped; they vanish exactly for Hermitian `Q`.
pub fn decomplexify(q: &HermitianBivarPoly) -> RealBivarPoly {
    let d = q.coeffs().len() - 1;
    let one = C::new(1.0, 0.0);
    // in (x, y): z = x + iy, w = x - iy
    let z = vec![vec![zero(), C::new(0.0, 1.0)], vec![one, zero()]];
    let w = vec![vec![zero(), C::new(0.0, -1.0)], vec![one, zero()]];
    let zp = biv_powers(&z, d);
    let wp = biv_powers(&w, d);
    let mut out = vec![vec![0.0; 2 * d + 1]; 2 * d + 1];
    for j in 0..=d {
        for k in 0..=d {
            let c = q.coeff(j, k);
            if c == zero() {
                continue;
            }
            let term = biv_mul(&zp[j], &wp[k]);
            for (a, row) in term.iter().enumerate() {
                for (b, t) in row.iter().enumerate() {
                    out[a][b] += (t * c).re;
                }
            }
        }
    }
    RealBivarPoly::new(out).expect("nonzero Q")
}

/// Coefficient matrix equals its conjugate transpose to `1e-12` relative.
pub fn symmetry_check(q: &HermitianBivarPoly) -> bool {
    let t = q.conj_transpose();
    let s = q.max_abs();
    q.coeffs
        .iter()
        .flatten()
        .zip(t.coeffs.iter().flatten())
        .all(|(a, b)| (a - b).norm() <= 1e-12 * s)
}

/// The `n` values of a multivalued function at `base`, with relative condition
/// numbers (infinite for multiple roots and for values at infinity).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectionSet {
    pub base: C,
    pub values: Vec<Projective>,
    pub condition: Vec<f64>,
}

impl ReflectionSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn finite(&self) -> Vec<C> {
        self.values.iter().filter_map(|v| v.finite()).collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            base: self.base,
            values: self.values.iter().map(|v| v.conj()).collect(),
            condition: self.condition.clone(),
        }
    }

    /// Whether some finite value lies within `tol * max(1, |target|)` of `target`.
    pub fn contains(&self, target: C, tol: f64) -> bool {
        let r = tol * target.norm().max(1.0);
        self.finite().iter().any(|v| (v - target).norm() <= r)
    }

    /// Hausdorff distance between the finite values, after checking both sets
    /// have the same number of infinite values.
    pub fn hausdorff(&self, other: &ReflectionSet) -> f64 {
        let inf = |s: &ReflectionSet| s.values.iter().filter(|v| v.is_infinite()).count();
        if inf(self) != inf(other) {
            return f64::INFINITY;
        }
        let (a, b) = (self.finite(), other.finite());
        let one_way = |x: &[C], y: &[C]| {
            x.iter()
                .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(&a, &b).max(one_way(&b, &a))
    }
}

/// Relative condition of a simple root `w` of `Σ c_k w^k`.
fn root_condition(c: &[C], w: C) -> f64 {
    let p = Poly::new(c.to_vec());
    let d = p.derivative().eval(w).norm();
    let r = w.norm();
    let s = c.iter().rev().fold(0.0, |acc, ck| acc * r + ck.norm());
    if d == 0.0 {
        f64::INFINITY
    } else {
        s / (d * r.max(1.0))
    }
}

/// Roots of `Σ c_k w^k` with nominal degree `c.len() - 1`; leading
/// coefficients below `INFINITE_ROOT_TOL` relative send roots to infinity.
pub(crate) fn projective_roots(c: &[C]) -> Option<(Vec<Projective>, Vec<f64>)> {
    let n = c.len() - 1;
    let p = Poly::new(c.to_vec()).trimmed(INFINITE_ROOT_TOL);
    if p.is_zero() {
        return None;
    }
    let roots = p.roots_with_tol(INFINITE_ROOT_TOL);
    let mut values: Vec<Projective> = roots.iter().map(|&w| Projective::Finite(w)).collect();
    let mut cond: Vec<f64> = roots.iter().map(|&w| root_condition(c, w)).collect();
    for _ in roots.len()..n {
        values.push(Projective::Infinity);
        cond.push(f64::INFINITY);
    }
    Some((values, cond))
}

/// All `n` values of `S(z)`: the roots of `Q(z, ·)`.
pub fn schwarz_values(q: &HermitianBivarPoly, z: C) -> Result<ReflectionSet> {
    let c = q.coeffs_in_w(z);
    let (values, condition) = projective_roots(&c)
        .ok_or_else(|| Error::InvalidInput(format!("Q({z}, w) vanishes identically in w")))?;
    Ok(ReflectionSet { base: z, values, condition })
}

/// `{R(z)} = conj {S(z)}`.
pub fn acr_values(q: &HermitianBivarPoly, z: C) -> Result<ReflectionSet> {
    Ok(schwarz_values(q, z)?.conj())
}

/// Both memberships `z1 ∈ {R(z2)}` and `z2 ∈ {R(z1)}` at relative tolerance `tol`.
pub fn reciprocity_memberships(q: &HermitianBivarPoly, z1: C, z2: C, tol: f64) -> Result<(bool, bool)> {
    Ok((acr_values(q, z2)?.contains(z1, tol), acr_values(q, z1)?.contains(z2, tol)))
}

/// `z1 ∈ {R(z2)}` exactly when `z2 ∈ {R(z1)}`.
pub fn reciprocity_check(q: &HermitianBivarPoly, z1: C, z2: C, tol: f64) -> Result<bool> {
    let (a, b) = reciprocity_memberships(q, z1, z2, tol)?;
    Ok(a == b)
}

/// Points closer than this to a branch or exceptional point are not sampled.
const RECIPROCITY_EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocityFailure {
    pub z1: C,
    pub z2: C,
    pub forward: bool,
    pub backward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocityReport {
    pub seed: u64,
    pub pairs: usize,
    /// pairs with `z2` drawn from the reflections of `z1`, so both memberships hold
    pub related_pairs: usize,
    pub tol: f64,
    pub failures: Vec<ReciprocityFailure>,
}

impl ReciprocityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Biconditional test on `pairs` seeded pairs in the square `|Re|, |Im| <= half_width`.
/// Every other pair takes `z2` among the reflections of `z1`; the rest are
/// independent draws, which almost never satisfy either membership.
pub fn reciprocity_trials(q: &HermitianBivarPoly, pairs: usize, seed: u64, tol: f64, half_width: f64) -> Result<ReciprocityReport> {
    use rand::{Rng, SeedableRng};
    let b = branch::branch_points(q)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        C::new(rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width))
    };
    let mut failures = Vec::new();
    let (mut done, mut related) = (0, 0);
    while done < pairs {
        let z1 = draw(&mut rng);
        if b.distance(z1) < RECIPROCITY_EXCLUSION {
            continue;
        }
        let set = acr_values(q, z1)?.finite();
        let pick = done % 2 == 0 && !set.is_empty();
        let z2 = if pick { set[rng.random_range(0..set.len())] } else { draw(&mut rng) };
        if b.distance(z2) < RECIPROCITY_EXCLUSION {
            continue;
        }
        let (forward, backward) = reciprocity_memberships(q, z1, z2, tol)?;
        if forward != backward || (pick && !forward) {
            failures.push(ReciprocityFailure { z1, z2, forward, backward });
        }
        related += pick as usize;
        done += 1;
    }
    Ok(ReciprocityReport {
        seed,
        pairs,
        related_pairs: related,
        tol,
        failures,
    })
}
