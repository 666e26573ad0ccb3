//! Fixtures shared by the benchmarks.

use dlplab_core::algcurve::{complexify, HermitianBivarPoly, RealBivarPoly};
use dlplab_core::{CurveSpec, Poly, RationalFn};

pub fn ellipse() -> CurveSpec {
    CurveSpec::Ellipse { a: 2.0, b: 1.0 }
}

pub fn limacon() -> CurveSpec {
    CurveSpec::RationalMap {
        map: RationalFn::polynomial(Poly::from_real(&[0.0, 1.0, 0.4])),
    }
}

pub fn ellipse_q() -> HermitianBivarPoly {
    complexify(&RealBivarPoly::ellipse(2.0, 1.0))
}

/// `(x² + y²)² - 2(x² - y²) - 3`, the lemniscate `|z² - 1| = 2`
pub fn lemniscate_q() -> HermitianBivarPoly {
    complexify(&RealBivarPoly::new(vec![vec![-3.0, 0.0, 2.0, 0.0, 1.0], vec![], vec![-2.0, 0.0, 2.0], vec![], vec![1.0]]).expect("nonzero"))
}
