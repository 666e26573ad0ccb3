//! Cauchy integrals and the boundary operator `H`.
//!
//! For a density `F` on the curve, `f(z) = (1/2πi) ∫ F(ζ)/(ζ - z) dζ` has
//! interior and exterior boundary values `f_i = F/2 + PV`, `f_e = -F/2 + PV`.
//! `H` maps `F` to `f_i`. The principal value is split into the periodic
//! Hilbert kernel `½cot((t_k - t_j)/2)`, applied exactly on the trigonometric
//! interpolant, plus a smooth remainder handled by the trapezoidal rule.
//!
//! The double layer operator factors as `Π F = H F + conj(H conj F)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::potential::{boundary_gap, distance_to_nodes, BoundaryOperator, DensityGrid, OperatorMatrix, OperatorTag};

type C = Complex64;

/// Circulant of the discrete periodic Hilbert transform: `½ sign(m)` on
/// Fourier mode `m`, zero on the constant and Nyquist modes.
fn hilbert_circulant(n: usize) -> Vec<C> {
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|d| {
            let s: f64 = (1..n / 2).map(|m| (m as f64 * d as f64 * h).sin()).sum();
            C::new(0.0, s / n as f64)
        })
        .collect()
}

/// Dense matrix of `H`.
pub fn assemble_h(sc: &SampledCurve) -> BoundaryOperator {
    let n = sc.len();
    let h = sc.h();
    let circ = hilbert_circulant(n);
    let w = C::new(0.0, -h / (2.0 * PI)); // h / (2πi)
    let rows: Vec<Vec<C>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let zj = sc.z[j];
            (0..n)
                .map(|k| {
                    let smooth = if k == j {
                        sc.acceleration[j] / (sc.velocity[j] * 2.0)
                    } else {
                        let dt = (k as f64 - j as f64) * h;
                        sc.velocity[k] / (sc.z[k] - zj) - 0.5 / (0.5 * dt).tan()
                    };
                    let mut v = circ[(j + n - k) % n] + w * smooth;
                    if k == j {
                        v += 0.5;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let flat: Vec<C> = rows.into_iter().flatten().collect();
    BoundaryOperator {
        tag: OperatorTag::H,
        matrix: OperatorMatrix::Complex(DMatrix::from_row_slice(n, n, &flat)),
        curve_id: sc.id.clone(),
        quadrature: "trigonometric Hilbert kernel plus trapezoidal remainder",
    }
}

/// Assembled `H` with the derived boundary-value maps.
pub struct HilbertOperator {
    op: BoundaryOperator,
}

impl HilbertOperator {
    pub fn new(sc: &SampledCurve) -> Self {
        Self { op: assemble_h(sc) }
    }

    pub fn operator(&self) -> &BoundaryOperator {
        &self.op
    }

    /// `f_i = H F`.
    pub fn h(&self, f: &DensityGrid) -> Result<DensityGrid> {
        self.op.apply(f)
    }

    /// `H̃ F = conj(H conj F)`.
    pub fn h_tilde(&self, f: &DensityGrid) -> Result<DensityGrid> {
        Ok(self.op.apply(&f.conj())?.conj())
    }

    /// `(f_i, f_e)`.
    pub fn boundary_values(&self, f: &DensityGrid) -> Result<(DensityGrid, DensityGrid)> {
        let fi = self.h(f)?;
        let fe = fi.zip_with(f, |a, b| a - b);
        Ok((fi, fe))
    }

    /// `Π F = H F + H̃ F`.
    pub fn pi(&self, f: &DensityGrid) -> Result<DensityGrid> {
        let a = self.h(f)?;
        let b = self.h_tilde(f)?;
        Ok(a.zip_with(&b, |x, y| x + y))
    }
}

pub fn cauchy_boundary_values(sc: &SampledCurve, f: &DensityGrid) -> Result<(DensityGrid, DensityGrid)> {
    f.check_len(sc)?;
    HilbertOperator::new(sc).boundary_values(f)
}

pub fn hilbert_h(sc: &SampledCurve, f: &DensityGrid) -> Result<DensityGrid> {
    f.check_len(sc)?;
    HilbertOperator::new(sc).h(f)
}

pub fn pi_via_hilbert(sc: &SampledCurve, f: &DensityGrid) -> Result<DensityGrid> {
    f.check_len(sc)?;
    HilbertOperator::new(sc).pi(f)
}

/// Trapezoidal Cauchy integral at a point at least the boundary gap away.
pub fn cauchy_eval(sc: &SampledCurve, f: &DensityGrid, z: C) -> Result<C> {
    f.check_len(sc)?;
    let delta = boundary_gap(sc);
    let d = distance_to_nodes(sc, z);
    if d < delta {
        return Err(Error::TooCloseToBoundary {
            distance: d,
            threshold: delta,
        });
    }
    let s: C = f
        .values
        .iter()
        .zip(sc.z.iter().zip(&sc.velocity))
        .map(|(fk, (zk, vk))| fk * vk / (zk - z))
        .sum();
    Ok(s * C::new(0.0, -sc.h() / (2.0 * PI)))
}

/// Distances `gap * m`, `m = 1..=JUMP_STENCIL`, used to extrapolate to the curve.
const JUMP_STENCIL: usize = 8;

/// Refinement of curve and density before the off-curve evaluations.
const JUMP_UPSAMPLE: usize = 8;

fn extrapolate_to_zero(ds: &[f64], vals: &[C]) -> C {
    // Lagrange interpolation evaluated at 0
    let mut acc = C::new(0.0, 0.0);
    for (i, (&di, &vi)) in ds.iter().zip(vals).enumerate() {
        let mut l = 1.0;
        for (j, &dj) in ds.iter().enumerate() {
            if j != i {
                l *= dj / (dj - di);
            }
        }
        acc += vi * l;
    }
    acc
}

/// Largest violation of `f_i - f_e = F` over every `stride`-th node, with both
/// limits extrapolated from off-curve evaluations along the normal. The
/// evaluations use the trigonometric interpolants of curve and density on a
/// finer grid, so the stencil can start a few fine node spacings from the curve.
/// Only meaningful where the stencil stays clear of the rest of the curve.
pub fn jump_check(sc: &SampledCurve, f: &DensityGrid, stride: usize) -> Result<f64> {
    f.check_len(sc)?;
    let coarse = sc;
    let sc = &coarse.upsample(JUMP_UPSAMPLE);
    let fine = DensityGrid::new(crate::spectral::upsample(&f.values, JUMP_UPSAMPLE))?;
    let gap = boundary_gap(sc) * 1.01;
    let ds: Vec<f64> = (1..=JUMP_STENCIL).map(|m| gap * m as f64).collect();
    let mut worst: f64 = 0.0;
    for j in (0..coarse.len()).step_by(stride.max(1)) {
        let nrm = coarse.normal[j];
        let z = coarse.z[j];
        let inner: Vec<C> = ds
            .iter()
            .map(|d| cauchy_eval(sc, &fine, z - nrm * *d))
            .collect::<Result<_>>()?;
        let outer: Vec<C> = ds
            .iter()
            .map(|d| cauchy_eval(sc, &fine, z + nrm * *d))
            .collect::<Result<_>>()?;
        let jump = extrapolate_to_zero(&ds, &inner) - extrapolate_to_zero(&ds, &outer);
        worst = worst.max((jump - f.values[j]).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{sample_curve, CurveSpec};
    use crate::potential::assemble_pi;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn circle_modes() {
        let sc = sample_curve(&CurveSpec::unit_circle(), 64).unwrap();
        let op = HilbertOperator::new(&sc);
        let fwd = DensityGrid::from_fn(&sc, |_, t| C::from_polar(1.0, t));
        let back = DensityGrid::from_fn(&sc, |_, t| C::from_polar(1.0, -t));
        assert!(op.h(&fwd).unwrap().max_diff(&fwd) < 1e-13);
        let (fi, fe) = op.boundary_values(&back).unwrap();
        assert!(fi.max_norm() < 1e-13);
        // exterior boundary value of the Cauchy integral of e^{-it} is -e^{-it}
        assert!(fe.max_diff(&back.map(|v| -v)) < 1e-13);
        let one = DensityGrid::constant(64, c(1.0, 0.0));
        assert!(op.h(&one).unwrap().max_diff(&one) < 1e-13);
    }

    #[test]
    fn analytic_data_is_reproduced_on_ellipse() {
        let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
        let op = HilbertOperator::new(&sc);
        let inside = DensityGrid::from_fn(&sc, |z, _| (z * 0.3).exp() + z * z);
        assert!(op.h(&inside).unwrap().max_diff(&inside) < 1e-12);
        let outside = DensityGrid::from_fn(&sc, |z, _| 1.0 / (z - 0.5) + 1.0 / (z * z));
        let (fi, fe) = op.boundary_values(&outside).unwrap();
        assert!(fi.max_norm() < 1e-12, "{}", fi.max_norm());
        assert!(fe.max_diff(&outside.map(|v| -v)) < 1e-12);
    }

    #[test]
    fn pi_factors_through_h() {
        let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
        let f = DensityGrid::from_fn(&sc, |_, t| c((2.0 * t).cos() + 0.3 * t.sin(), (5.0 * t).cos()));
        let direct = assemble_pi(&sc).apply(&f).unwrap();
        let via = pi_via_hilbert(&sc, &f).unwrap();
        assert!(direct.max_diff(&via) < 1e-10, "{}", direct.max_diff(&via));
    }

    #[test]
    fn off_curve_evaluation() {
        let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
        let f = DensityGrid::from_fn(&sc, |z, _| z * z * z);
        let z = c(0.4, -0.3);
        assert!((cauchy_eval(&sc, &f, z).unwrap() - z * z * z).norm() < 1e-12);
        assert!(cauchy_eval(&sc, &f, c(5.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(cauchy_eval(&sc, &f, c(2.0, 0.001)).is_err());
    }

    #[test]
    fn jump_relation_by_extrapolation() {
        let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 512).unwrap();
        let f = DensityGrid::from_fn(&sc, |_, t| c((2.0 * t).cos(), t.sin() + 0.5 * (3.0 * t).cos()));
        let err = jump_check(&sc, &f, 16).unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn h_and_h_tilde_are_idempotent_on_smooth_densities() {
        use rand::SeedableRng;
        let sc = sample_curve(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 256).unwrap();
        let op = HilbertOperator::new(&sc);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = DensityGrid::random_trig(256, 16, &mut rng);
            let hf = op.h(&f).unwrap();
            assert!(op.h(&hf).unwrap().max_diff(&hf) < 1e-7 * f.max_norm());
            let tf = op.h_tilde(&f).unwrap();
            assert!(op.h_tilde(&tf).unwrap().max_diff(&tf) < 1e-7 * f.max_norm());
        }
    }

    #[test]
    fn lemniscate_pair_is_fixed() {
        let sc = sample_curve(&crate::curve::tests::bernoulli_like(), 512).unwrap();
        let op = HilbertOperator::new(&sc);
        let f = DensityGrid::from_fn(&sc, |z, _| z * z - 1.0);
        assert!(op.pi(&f).unwrap().max_diff(&f) < 1e-8);
        let ht = op.h_tilde(&f).unwrap();
        assert!(op.h(&ht).unwrap().max_norm() < 1e-8);
        let one = DensityGrid::constant(512, c(1.0, 0.0));
        assert!(op.pi(&one).unwrap().max_diff(&one.map(|v| v * 2.0)) < 1e-10);
    }
}
