//! Interpolation on uniform grids.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::real::Real;

/// Four-point Lagrange interpolation of `values` at fractional index `pos`.
///
/// Samples outside `0..values.len()` are taken as zero, so the interpolant
/// decays to zero one cell beyond either end.
pub fn cubic_at<T: Real>(values: &[T], pos: T) -> T {
    let n = values.len() as isize;
    let floor = pos.floor();
    let i = match floor.to_isize() {
        Some(i) => i,
        None => return T::zero(),
    };
    if i < -2 || i > n {
        return T::zero();
    }
    let t = pos - floor;
    let at = |k: isize| {
        if (0..n).contains(&k) {
            values[k as usize]
        } else {
            T::zero()
        }
    };
    let (f0, f1, f2, f3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let one = T::one();
    let two = T::of(2.0);
    let six = T::of(6.0);
    let tm1 = t - one;
    let tp1 = t + one;
    let tm2 = t - two;
    -f0 * t * tm1 * tm2 / six + f1 * tp1 * tm1 * tm2 / two - f2 * tp1 * t * tm2 / two
        + f3 * tp1 * t * tm1 / six
}

/// Band-limited (trigonometric) interpolation of a periodic real sequence onto
/// `factor` times as many points: output `j` sits at input position `j / factor`.
pub fn refine_periodic<T: Real>(values: &[T], factor: usize, planner: &mut FftPlanner<T>) -> Vec<T> {
    let n = values.len();
    if factor <= 1 {
        return values.to_vec();
    }
    let m = n * factor;
    let mut spectrum: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
    planner.plan_fft_forward(n).process(&mut spectrum);

    let zero = Complex::new(T::zero(), T::zero());
    let mut padded = vec![zero; m];
    let half = n / 2;
    padded[..half].copy_from_slice(&spectrum[..half]);
    padded[m - half + 1..].copy_from_slice(&spectrum[half + 1..]);
    let nyquist = spectrum[half] * T::of(0.5);
    padded[half] = nyquist;
    padded[m - half] = nyquist;

    planner.plan_fft_inverse(m).process(&mut padded);
    let scale = T::of_usize(n).recip();
    padded.into_iter().map(|c| c.re * scale).collect()
}
