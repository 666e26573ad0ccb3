use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{sylvester_resultant, Poly, Projective};

type C = Complex64;

/// Rational function `p / q` with coprime numerator and denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: Poly,
    #[serde(default = "Poly::one")]
    den: Poly,
}

impl TryFrom<RationalRepr> for RationalFn {
    type Error = Error;
    fn try_from(r: RationalRepr) -> Result<Self> {
        RationalFn::new(r.num, r.den)
    }
}

impl From<RationalFn> for RationalRepr {
    fn from(r: RationalFn) -> Self {
        RationalRepr {
            num: r.num,
            den: r.den,
        }
    }
}

/// Below this the normalized resultant of `p` and `q` counts as zero.
const COPRIME_TOL: f64 = 1e-12;

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let num = num.trimmed(1e-15);
        let den = den.trimmed(1e-15);
        if den.is_zero() {
            return Err(Error::InvalidInput("denominator is identically zero".into()));
        }
        if den.degree() > 0 && !num.is_zero() {
            let res = sylvester_resultant(
                &num.normalized().coeffs()[..=num.degree()],
                &den.normalized().coeffs()[..=den.degree()],
            );
            if res.norm() < COPRIME_TOL {
                return Err(Error::InvalidInput(format!(
                    "numerator and denominator share a zero (|resultant| = {:e})",
                    res.norm()
                )));
            }
        }
        Ok(Self { num, den })
    }

    pub fn polynomial(p: Poly) -> Self {
        Self {
            num: p.trimmed(1e-15),
            den: Poly::one(),
        }
    }

    pub fn identity() -> Self {
        Self::polynomial(Poly::identity())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// `max(deg p, deg q)`
    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    pub fn eval(&self, z: C) -> C {
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn eval_projective(&self, z: Projective) -> Projective {
        match z {
            Projective::Finite(z) => {
                let d = self.den.eval(z);
                if d == C::new(0.0, 0.0) {
                    Projective::Infinity
                } else {
                    Projective::Finite(self.num.eval(z) / d)
                }
            }
            Projective::Infinity => self.value_at_infinity(),
        }
    }

    pub fn value_at_infinity(&self) -> Projective {
        let (dp, dq) = (self.num.degree(), self.den.degree());
        if dp > dq {
            Projective::Infinity
        } else if dp < dq || self.num.is_zero() {
            Projective::Finite(C::new(0.0, 0.0))
        } else {
            Projective::Finite(self.num.leading() / self.den.leading())
        }
    }

    /// Numerator of the derivative, `p'q - pq'`.
    pub fn derivative_numerator(&self) -> Poly {
        &self.num.derivative() * &self.den - &self.num * &self.den.derivative()
    }

    pub fn derivative(&self) -> RationalFn {
        RationalFn {
            num: self.derivative_numerator().trimmed(1e-15),
            den: &self.den * &self.den,
        }
    }

    pub fn eval_derivative(&self, z: C) -> C {
        let q = self.den.eval(z);
        (self.num.derivative().eval(z) * q - self.num.eval(z) * self.den.derivative().eval(z))
            / (q * q)
    }

    pub fn zeros(&self) -> Vec<C> {
        self.num.roots()
    }

    pub fn poles(&self) -> Vec<C> {
        self.den.roots()
    }

    pub fn critical_points(&self) -> Vec<C> {
        self.derivative_numerator().roots_with_tol(1e-13)
    }

    /// `phi#(z) = conj(phi(conj z))`
    pub fn conj_reflect(&self) -> RationalFn {
        RationalFn {
            num: self.num.conj_coeffs(),
            den: self.den.conj_coeffs(),
        }
    }

    pub fn scale(&self, s: C) -> RationalFn {
        RationalFn {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    /// `s / self`
    pub fn reciprocal_scaled(&self, s: C) -> RationalFn {
        RationalFn {
            num: self.den.scale(s),
            den: self.num.clone(),
        }
    }

    pub fn pow(&self, k: u32) -> RationalFn {
        RationalFn {
            num: self.num.pow(k),
            den: self.den.pow(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_common_factor() {
        let p = Poly::from_roots(&[C::new(1.0, 0.0), C::new(2.0, 0.0)]);
        let q = Poly::from_roots(&[C::new(1.0, 0.0)]);
        assert!(RationalFn::new(p, q).is_err());
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(RationalFn::new(Poly::one(), Poly::zero()).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = RationalFn::new(
            Poly::from_real(&[0.3, 1.0, 0.2, 0.2]),
            Poly::from_real(&[-4.0, 1.0]),
        )
        .unwrap();
        let z = C::new(0.3, -0.7);
        let h = 1e-6;
        let fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
        assert!((fd - f.eval_derivative(z)).norm() < 1e-8);
        assert!((f.derivative().eval(z) - f.eval_derivative(z)).norm() < 1e-12);
    }

    #[test]
    fn value_at_infinity_cases() {
        let id = RationalFn::identity();
        assert!(id.value_at_infinity().is_infinite());
        let g = id.reciprocal_scaled(C::new(4.0, 0.0));
        assert_eq!(g.value_at_infinity(), Projective::Finite(C::new(0.0, 0.0)));
    }

    #[test]
    fn json_shape_is_pairs() {
        let f = RationalFn::polynomial(Poly::from_real(&[0.0, 1.0, 0.4]));
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"num":[[0.0,0.0],[1.0,0.0],[0.4,0.0]],"den":[[1.0,0.0]]}"#);
        let back: RationalFn = serde_json::from_str(r#"{"num":[[0,0],[1,0]]}"#).unwrap();
        assert_eq!(back, RationalFn::identity());
    }
}
