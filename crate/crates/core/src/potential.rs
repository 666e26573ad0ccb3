//! Double layer potential on a sampled curve.
//!
//! With the `1/π` scaling, the potential of a density `F` is
//! `u(z) = (1/π) ∫ F(ζ) ∂/∂N_ζ log|z - ζ| ds_ζ`, and its interior boundary
//! values define `Π = I + 2K`. The Nyström matrix uses the periodic trapezoidal
//! rule. On a smooth curve the kernel
//!
//! ```text
//! ∂/∂N_ζ log|z - ζ| ds_ζ = Im( z'(t) / (z(t) - z) ) dt
//! ```
//!
//! is continuous on the diagonal with limit `Im(z''/z') / 2 = κ|z'| / 2`, so no
//! special quadrature is needed.

use std::io::{Read, Write};

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::SampledCurve;
use crate::error::{Error, Result};

type C = Complex64;

/// Densities closer than this many node spacings to the curve are not evaluated.
pub const BOUNDARY_GAP_FACTOR: f64 = 5.0;

/// Condition estimate above which a Dirichlet solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Complex density sampled at the nodes of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub values: Vec<C>,
}

impl DensityGrid {
    pub fn new(values: Vec<C>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("density value {k} is not finite")));
        }
        Ok(Self { values })
    }

    /// Samples `f(z_j, t_j)` at the nodes of `sc`.
    pub fn from_fn(sc: &SampledCurve, f: impl Fn(C, f64) -> C) -> Self {
        Self {
            values: sc.z.iter().zip(&sc.params).map(|(&z, &t)| f(z, t)).collect(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        Self { values: vec![c; n] }
    }

    /// Random trigonometric polynomial `Σ_{|k| <= degree} c_k e^{ikt}` with
    /// standard complex normal coefficients.
    pub fn random_trig<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Self {
        let d = degree as i64;
        let coeffs: Vec<(i64, C)> = (-d..=d)
            .map(|k| (k, C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
            .collect();
        let values = (0..n)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n as f64;
                coeffs.iter().map(|(k, c)| c * C::from_polar(1.0, *k as f64 * t)).sum()
            })
            .collect();
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> C {
        self.values.iter().sum::<C>() / self.len() as f64
    }

    pub fn max_diff(&self, other: &DensityGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn zip_with(&self, other: &DensityGrid, f: impl Fn(C, C) -> C) -> DensityGrid {
        DensityGrid {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(C) -> C) -> DensityGrid {
        DensityGrid {
            values: self.values.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn check_len(&self, sc: &SampledCurve) -> Result<()> {
        if self.len() != sc.len() {
            return Err(Error::DensityMismatch {
                expected: sc.len(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Columns `index, re, im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "re", "im"])?;
        for (k, v) in self.values.iter().enumerate() {
            wr.write_record(&[k.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut values = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidInput(format!("bad density CSV row {row}")))
            };
            let idx = field(0)? as usize;
            if idx != row {
                return Err(Error::InvalidInput(format!("density CSV row {row} has index {idx}")));
            }
            values.push(C::new(field(1)?, field(2)?));
        }
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorTag {
    Pi,
    K,
    J,
    H,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C>),
}

/// Dense discretization of a boundary operator on a particular curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperator {
    pub tag: OperatorTag,
    pub matrix: OperatorMatrix,
    pub curve_id: String,
    pub quadrature: &'static str,
}

impl BoundaryOperator {
    pub fn n(&self) -> usize {
        match &self.matrix {
            OperatorMatrix::Real(m) => m.nrows(),
            OperatorMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn apply(&self, f: &DensityGrid) -> Result<DensityGrid> {
        if f.len() != self.n() {
            return Err(Error::DensityMismatch {
                expected: self.n(),
                got: f.len(),
            });
        }
        let values = match &self.matrix {
            OperatorMatrix::Real(m) => {
                let re = m * DVector::from_iterator(f.len(), f.values.iter().map(|v| v.re));
                let im = m * DVector::from_iterator(f.len(), f.values.iter().map(|v| v.im));
                re.iter().zip(im.iter()).map(|(&a, &b)| C::new(a, b)).collect()
            }
            OperatorMatrix::Complex(m) => {
                let v = m * DVector::from_column_slice(&f.values);
                v.iter().copied().collect()
            }
        };
        Ok(DensityGrid { values })
    }

    pub fn real_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.matrix {
            OperatorMatrix::Real(m) => Some(m),
            OperatorMatrix::Complex(_) => None,
        }
    }

    fn derived(&self, tag: OperatorTag, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> Result<Self> {
        let m = self
            .real_matrix()
            .filter(|_| self.tag == OperatorTag::Pi)
            .ok_or_else(|| Error::InvalidInput("expected an assembled Pi operator".into()))?;
        Ok(Self {
            tag,
            matrix: OperatorMatrix::Real(f(m)),
            curve_id: self.curve_id.clone(),
            quadrature: self.quadrature,
        })
    }

    /// `K = (Π - I)/2` from an assembled `Π`.
    pub fn k_from_pi(&self) -> Result<Self> {
        self.derived(OperatorTag::K, |m| (m - DMatrix::identity(m.nrows(), m.ncols())) * 0.5)
    }

    /// `J = Π/2` from an assembled `Π`.
    pub fn j_from_pi(&self) -> Result<Self> {
        self.derived(OperatorTag::J, |m| m * 0.5)
    }
}

/// `Im(z'_k / (z_k - z_j))` off the diagonal and its limit `Im(z''/z')/2` on it.
fn dlp_kernel_row(sc: &SampledCurve, j: usize) -> Vec<f64> {
    let zj = sc.z[j];
    (0..sc.len())
        .map(|k| {
            if k == j {
                0.5 * (sc.acceleration[j] / sc.velocity[j]).im
            } else {
                (sc.velocity[k] / (sc.z[k] - zj)).im
            }
        })
        .collect()
}

/// Nyström matrix of the interior boundary-value operator `Π = I + A`,
/// `A_jk = (2/N) Im(z'_k/(z_k - z_j))`.
pub fn assemble_pi(sc: &SampledCurve) -> BoundaryOperator {
    let n = sc.len();
    let w = 2.0 / n as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row = dlp_kernel_row(sc, j);
            row.iter_mut().for_each(|x| *x *= w);
            row[j] += 1.0;
            row
        })
        .collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    BoundaryOperator {
        tag: OperatorTag::Pi,
        matrix: OperatorMatrix::Real(DMatrix::from_row_slice(n, n, &flat)),
        curve_id: sc.id.clone(),
        quadrature: "periodic trapezoidal Nystrom",
    }
}

pub fn assemble_k(sc: &SampledCurve) -> BoundaryOperator {
    assemble_pi(sc).k_from_pi().expect("freshly assembled Pi")
}

pub fn assemble_j(sc: &SampledCurve) -> BoundaryOperator {
    assemble_pi(sc).j_from_pi().expect("freshly assembled Pi")
}

/// Minimum distance from `z` to the curve nodes.
pub fn distance_to_nodes(sc: &SampledCurve, z: C) -> f64 {
    sc.z.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min)
}

/// Near-boundary exclusion radius.
pub fn boundary_gap(sc: &SampledCurve) -> f64 {
    BOUNDARY_GAP_FACTOR * sc.node_spacing()
}

/// Trapezoidal value of the double layer potential at an off-curve point.
pub fn double_layer_eval(sc: &SampledCurve, f: &DensityGrid, z: C) -> Result<C> {
    f.check_len(sc)?;
    let delta = boundary_gap(sc);
    let d = distance_to_nodes(sc, z);
    if d < delta {
        return Err(Error::TooCloseToBoundary {
            distance: d,
            threshold: delta,
        });
    }
    let w = 2.0 / sc.len() as f64;
    Ok(f.values
        .iter()
        .zip(sc.z.iter().zip(&sc.velocity))
        .map(|(fk, (zk, vk))| fk * (vk / (zk - z)).im)
        .sum::<C>()
        * w)
}

/// LU-factored `Π` for repeated Dirichlet solves.
pub struct DirichletSolver {
    pi: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    pub condition: f64,
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl DirichletSolver {
    pub fn new(pi: &BoundaryOperator) -> Result<Self> {
        let m = pi
            .real_matrix()
            .filter(|_| pi.tag == OperatorTag::Pi)
            .ok_or_else(|| Error::InvalidInput("Dirichlet solve needs the Pi operator".into()))?
            .clone();
        let lu = m.clone().lu();
        let condition = match lu.try_inverse() {
            Some(inv) => norm1(&m) * norm1(&inv),
            None => f64::INFINITY,
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SolveSingular { condition });
        }
        Ok(Self { pi: m, lu, condition })
    }

    fn solve_real(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.lu.solve(b).expect("nonsingular after condition check");
        // one step of iterative refinement
        let r = b - &self.pi * &x;
        if let Some(dx) = self.lu.solve(&r) {
            x += dx;
        }
        x
    }

    pub fn solve(&self, f: &DensityGrid) -> Result<DensityGrid> {
        let n = self.pi.nrows();
        if f.len() != n {
            return Err(Error::DensityMismatch { expected: n, got: f.len() });
        }
        let re = self.solve_real(&DVector::from_iterator(n, f.values.iter().map(|v| v.re)));
        let im = self.solve_real(&DVector::from_iterator(n, f.values.iter().map(|v| v.im)));
        DensityGrid::new(re.iter().zip(im.iter()).map(|(&a, &b)| C::new(a, b)).collect())
    }
}

/// Density whose double layer potential has boundary values `f`.
pub fn solve_dirichlet(sc: &SampledCurve, f: &DensityGrid) -> Result<DensityGrid> {
    f.check_len(sc)?;
    DirichletSolver::new(&assemble_pi(sc))?.solve(f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub curve_id: String,
    pub n: usize,
    pub tol_fixed: f64,
    /// all eigenvalues of Π, sorted by |λ - 1|
    pub eigenvalues: Vec<C>,
    /// eigenvalues with |λ - 1| < tol_fixed
    pub near_fixed_count: usize,
    pub eigenvalue_near_two: C,
    /// smallest singular values of Π - I, ascending
    pub smallest_singular_values: Vec<f64>,
}

impl SpectrumReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "re", "im", "dist_to_one"])?;
        for (k, l) in self.eigenvalues.iter().enumerate() {
            wr.write_record(&[
                k.to_string(),
                l.re.to_string(),
                l.im.to_string(),
                (l - 1.0).norm().to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Number of smallest singular values of `Π - I` kept in a [`SpectrumReport`].
const REPORTED_SINGULAR_VALUES: usize = 8;

/// Dense nonsymmetric eigenvalues of `Π` plus the small singular values of `Π - I`.
pub fn spectrum(op: &BoundaryOperator, tol_fixed: f64) -> Result<SpectrumReport> {
    let m = op
        .real_matrix()
        .filter(|_| op.tag == OperatorTag::Pi)
        .ok_or_else(|| Error::InvalidInput("spectrum expects the Pi operator".into()))?;
    let n = m.nrows();
    let mut eigenvalues = crate::linalg::eigenvalues_real(m)?;
    eigenvalues.sort_by(|a, b| (a - 1.0).norm().total_cmp(&(b - 1.0).norm()));
    let near_fixed_count = eigenvalues.iter().filter(|l| (*l - 1.0).norm() < tol_fixed).count();
    let eigenvalue_near_two = *eigenvalues
        .iter()
        .min_by(|a, b| (*a - 2.0).norm().total_cmp(&(*b - 2.0).norm()))
        .ok_or_else(|| Error::EigSolverFailure("empty spectrum".into()))?;
    let shifted = m - DMatrix::identity(n, n);
    let mut sv = crate::linalg::singular_values(&shifted)?;
    sv.sort_by(f64::total_cmp);
    sv.truncate(REPORTED_SINGULAR_VALUES);
    Ok(SpectrumReport {
        curve_id: op.curve_id.clone(),
        n,
        tol_fixed,
        eigenvalues,
        near_fixed_count,
        eigenvalue_near_two,
        smallest_singular_values: sv,
    })
}

/// Real trigonometric basis `cos(kt), sin(kt)`, `k = 1..=bandwidth`, sampled at
/// the parameter nodes and orthonormal in the discrete inner product.
pub fn trig_basis(n: usize, bandwidth: usize) -> DMatrix<f64> {
    assert!(2 * bandwidth < n, "bandwidth must be below Nyquist");
    let s = (2.0 / n as f64).sqrt();
    DMatrix::from_fn(n, 2 * bandwidth, |j, c| {
        let t = std::f64::consts::TAU * j as f64 / n as f64;
        let k = (c / 2 + 1) as f64;
        if c % 2 == 0 {
            s * (k * t).cos()
        } else {
            s * (k * t).sin()
        }
    })
}

/// Fixed-point modes of `Π` restricted to non-constant trigonometric densities
/// of degree at most `bandwidth` in the curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandModes {
    pub n: usize,
    pub bandwidth: usize,
    /// singular values of `(Π - I) B`, ascending; equal to the minimal relative
    /// ℓ² residuals `‖(Π-I)v‖/‖v‖` over the band
    pub residuals: Vec<f64>,
    /// coefficient vectors (in the `cos, sin` basis) of the modes, same order
    #[serde(skip)]
    pub coefficients: Vec<Vec<f64>>,
}

impl BandModes {
    pub fn count_below(&self, tol: f64) -> usize {
        self.residuals.iter().filter(|r| **r < tol).count()
    }
}

pub fn band_fixed_modes(op: &BoundaryOperator, bandwidth: usize) -> Result<BandModes> {
    let m = op
        .real_matrix()
        .filter(|_| op.tag == OperatorTag::Pi)
        .ok_or_else(|| Error::InvalidInput("band modes need the Pi operator".into()))?;
    let n = m.nrows();
    let b = trig_basis(n, bandwidth);
    let r = (m - DMatrix::identity(n, n)) * &b;
    let svd = r
        .try_svd(false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigSolverFailure("band SVD did not converge".into()))?;
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    Ok(BandModes {
        n,
        bandwidth,
        residuals: order.iter().map(|&i| svd.singular_values[i]).collect(),
        coefficients: order.iter().map(|&i| vt.row(i).iter().copied().collect()).collect(),
    })
}
