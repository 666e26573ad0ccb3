//! Trigonometric interpolation of periodic node data.

use num_complex::Complex64;
use rustfft::FftPlanner;

type C = Complex64;

/// Values of the trigonometric interpolant of `values` on `factor` times as
/// many equispaced nodes. The Nyquist coefficient is split evenly between
/// `±N/2` so real data stays real.
pub fn upsample(values: &[C], factor: usize) -> Vec<C> {
    let n = values.len();
    let m = n * factor;
    if factor <= 1 || n == 0 {
        return values.to_vec();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut spec = values.to_vec();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut fine = vec![C::new(0.0, 0.0); m];
    let half = n / 2;
    fine[..half].copy_from_slice(&spec[..half]);
    for k in half + 1..n {
        fine[m - n + k] = spec[k];
    }
    if n % 2 == 0 {
        fine[half] = spec[half] * 0.5;
        fine[m - half] = spec[half] * 0.5;
    } else {
        fine[half] = spec[half];
    }
    planner.plan_fft_inverse(m).process(&mut fine);
    let s = 1.0 / n as f64;
    fine.iter_mut().for_each(|v| *v *= s);
    fine
}
