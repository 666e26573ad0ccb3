//! Dense univariate polynomials over `Complex64`.
//!
//! Coefficients are stored in ascending degree order, `c[k]` multiplying `z^k`.
//! All roots are found at once from the eigenvalues of the companion matrix and
//! then polished with a couple of Newton steps.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C = Complex64;

/// A value on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Projective {
    Finite(C),
    Infinity,
}

impl Projective {
    pub fn finite(self) -> Option<C> {
        match self {
            Projective::Finite(z) => Some(z),
            Projective::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Projective::Infinity)
    }

    pub fn conj(self) -> Self {
        match self {
            Projective::Finite(z) => Projective::Finite(z.conj()),
            Projective::Infinity => Projective::Infinity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<C>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients. Trailing exact zeros
    /// are kept; use [`Poly::trimmed`] to drop negligible leading terms.
    pub fn new(coeffs: Vec<C>) -> Self {
        if coeffs.is_empty() {
            return Self::zero();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![C::new(0.0, 0.0)],
        }
    }

    pub fn constant(c: C) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(C::new(1.0, 0.0))
    }

    /// `z`
    pub fn identity() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `c * z^k`
    pub fn monomial(c: C, k: usize) -> Self {
        let mut coeffs = vec![C::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    /// Monic polynomial with the given zeros.
    pub fn from_roots(roots: &[C]) -> Self {
        roots.iter().fold(Self::one(), |acc, &r| {
            acc * Poly::new(vec![-r, C::new(1.0, 0.0)])
        })
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Nominal degree: index of the last exactly nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != C::new(0.0, 0.0))
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C::new(0.0, 0.0))
    }

    pub fn leading(&self) -> C {
        self.coeffs[self.degree()]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops leading coefficients whose modulus is below `rel_tol` times the
    /// largest coefficient modulus.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return Self::zero();
        }
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.norm() > rel_tol * scale)
            .unwrap_or(0);
        Self::new(self.coeffs[..=keep].to_vec())
    }

    /// Same polynomial scaled so the largest coefficient has modulus one.
    pub fn normalized(&self) -> Self {
        let s = self.max_abs_coeff();
        if s == 0.0 {
            return self.clone();
        }
        self.scale(C::new(1.0 / s, 0.0))
    }

    pub fn eval(&self, z: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficientwise conjugate, i.e. `z -> conj(p(conj z))`.
    pub fn conj_coeffs(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc * self.clone())
    }

    /// Coefficient vector padded with zeros to length `len`.
    pub fn padded(&self, len: usize) -> Vec<C> {
        let mut v = self.coeffs.clone();
        v.resize(len.max(v.len()), C::new(0.0, 0.0));
        v
    }

    /// `z^d p(1/z)` for `d >= degree`.
    pub fn reversed(&self, d: usize) -> Self {
        let mut v = self.padded(d + 1);
        v.truncate(d + 1);
        v.reverse();
        Self::new(v)
    }

    /// Long division by `divisor`. Returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let d = divisor.trimmed(1e-14);
        if d.is_zero() {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        }
        let dd = d.degree();
        let lead = d.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![C::new(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
        }
        rem.truncate(dd.max(1));
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// Relative backward residual `|p(z)| / sum_k |c_k| |z|^k`.
    pub fn relative_residual(&self, z: C) -> f64 {
        let r = z.norm();
        let denom = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm());
        if denom == 0.0 {
            return 0.0;
        }
        self.eval(z).norm() / denom
    }

    /// All roots of the polynomial after trimming leading coefficients below
    /// `1e-14` relative. A constant polynomial has no roots.
    pub fn roots(&self) -> Vec<C> {
        self.roots_with_tol(1e-14)
    }

    pub fn roots_with_tol(&self, rel_tol: f64) -> Vec<C> {
        let p = self.trimmed(rel_tol);
        companion_roots(&p)
    }
}

fn companion_roots(p: &Poly) -> Vec<C> {
    let n = p.degree();
    if n == 0 {
        return Vec::new();
    }
    let c = &p.coeffs()[..=n];
    // zeros at the origin come off exactly
    let low = c.iter().position(|x| *x != C::new(0.0, 0.0)).unwrap_or(0);
    let mut roots = vec![C::new(0.0, 0.0); low];
    let c = &c[low..];
    let m = c.len() - 1;
    if m == 0 {
        return roots;
    }
    if m == 1 {
        roots.push(-c[0] / c[1]);
        return roots;
    }
    let lead = c[m];
    let mut comp = DMatrix::<C>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..m {
        comp[(i, m - 1)] = -c[i] / lead;
    }
    let eig = match crate::linalg::eigenvalues_complex(&comp) {
        Ok(e) => e,
        Err(_) => return roots_by_deflation(c, roots),
    };
    let reduced = Poly::new(c.to_vec());
    let dp = reduced.derivative();
    roots.extend(eig.iter().map(|&z0| polish(&reduced, &dp, z0)));
    roots
}

/// Fallback when the eigensolver fails: Newton from spread starting points with deflation.
fn roots_by_deflation(c: &[C], mut roots: Vec<C>) -> Vec<C> {
    let mut p = Poly::new(c.to_vec());
    let full = p.clone();
    let dfull = full.derivative();
    while p.degree() > 0 {
        let dp = p.derivative();
        let mut z = C::from_polar(1.0, 0.4 + roots.len() as f64);
        for _ in 0..200 {
            let d = dp.eval(z);
            if d.norm() == 0.0 {
                z += C::new(0.1, 0.1);
                continue;
            }
            let step = p.eval(z) / d;
            z -= step;
            if step.norm() <= 1e-15 * z.norm().max(1.0) {
                break;
            }
        }
        z = polish(&full, &dfull, z);
        roots.push(z);
        p = p.div_rem(&Poly::new(vec![-z, C::new(1.0, 0.0)])).map(|(q, _)| q).unwrap_or_else(|_| Poly::zero());
    }
    roots
}

/// A few guarded Newton steps; a step is kept only if it lowers the residual.
pub(crate) fn polish(p: &Poly, dp: &Poly, z0: C) -> C {
    let mut z = z0;
    let mut res = p.eval(z).norm();
    for _ in 0..3 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - p.eval(z) / d;
        let r = p.eval(cand).norm();
        if r < res {
            z = cand;
            res = r;
        } else {
            break;
        }
    }
    z
}

/// Resultant of two polynomials given by nominal coefficient vectors, as the
/// determinant of their Sylvester matrix.
///
/// Nominal degrees are `f.len() - 1` and `g.len() - 1` even if the leading
/// coefficients vanish; this keeps the value polynomial in any parameters the
/// coefficients depend on. Each input is scaled to unit maximum coefficient
/// before the determinant and the scale is restored afterwards.
pub fn sylvester_resultant(f: &[C], g: &[C]) -> C {
    assert!(!f.is_empty() && !g.is_empty(), "empty coefficient vector");
    let m = f.len() - 1;
    let n = g.len() - 1;
    if m == 0 {
        return f[0].powu(n as u32);
    }
    if n == 0 {
        return g[0].powu(m as u32);
    }
    let sf = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let sg = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if sf == 0.0 || sg == 0.0 {
        return C::new(0.0, 0.0);
    }
    let size = m + n;
    let mut s = DMatrix::<C>::zeros(size, size);
    // rows hold descending coefficients, shifted
    for i in 0..n {
        for (j, c) in f.iter().rev().enumerate() {
            s[(i, i + j)] = c / sf;
        }
    }
    for i in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            s[(n + i, i + j)] = c / sg;
        }
    }
    s.determinant() * sf.powi(n as i32) * sg.powi(m as i32)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == C::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let a = self.padded(len);
        let b = rhs.padded(len);
        Poly::new(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![C::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::from_real(&[-3.0, 0.0, 1.0]);
        let r = sorted(p.roots());
        assert!((r[0] - c(-3f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!((r[1] - c(3f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_from_roots_round_trip() {
        let zs = vec![c(1.0, 2.0), c(-0.5, 0.1), c(0.0, -1.0), c(2.0, 0.0)];
        let p = Poly::from_roots(&zs);
        let r = p.roots();
        for z in &zs {
            let best = r.iter().map(|x| (x - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "{z} missing, {best}");
        }
    }

    #[test]
    fn zero_roots_are_exact() {
        let p = Poly::from_real(&[0.0, 0.0, 1.0, 1.0]);
        let r = p.roots();
        assert_eq!(r.len(), 3);
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn trimming_drops_tiny_leading_terms() {
        let p = Poly::from_real(&[1.0, 2.0, 1e-20]);
        assert_eq!(p.trimmed(1e-14).degree(), 1);
        assert_eq!(p.roots().len(), 1);
    }

    #[test]
    fn division_is_exact_for_factors() {
        let a = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 1.0)]);
        let b = Poly::from_roots(&[c(-1.0, 0.5)]);
        let (q, r) = (&a * &b).div_rem(&b).unwrap();
        assert!(r.max_abs_coeff() < 1e-14);
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn resultant_vanishes_on_common_root() {
        let f = Poly::from_roots(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let g = Poly::from_roots(&[c(1.0, 0.0), c(-3.0, 0.0)]);
        assert!(sylvester_resultant(f.coeffs(), g.coeffs()).norm() < 1e-12);
    }

    #[test]
    fn resultant_matches_product_of_root_differences() {
        // res(f, g) = prod_{i,j} (a_i - b_j) for monic f, g
        let a = [c(1.0, 0.5), c(-2.0, 0.0)];
        let b = [c(0.0, 1.0), c(3.0, -1.0), c(0.5, 0.5)];
        let f = Poly::from_roots(&a);
        let g = Poly::from_roots(&b);
        let mut expected = c(1.0, 0.0);
        for x in &a {
            for y in &b {
                expected *= x - y;
            }
        }
        let got = sylvester_resultant(f.coeffs(), g.coeffs());
        assert!((got - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn reversed_polynomial() {
        let p = Poly::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(p.reversed(3).coeffs(), Poly::from_real(&[0.0, 3.0, 2.0, 1.0]).coeffs());
    }
}
