pub mod algcurve;
pub mod cauchy;
pub mod curve;
pub mod error;
mod linalg;
pub mod matching;
mod spectral;
pub mod potential;
pub mod poly;
pub mod rational;
pub mod sphere;

pub use error::{Error, Result};
pub use poly::{Poly, Projective};
pub use curve::{CurveSpec, Location, SampledCurve};
pub use matching::MatchingPair;
pub use potential::DensityGrid;
pub use rational::RationalFn;
