//! Wigner function of a pure state and its axis marginals.
//!
//! `W(x, p) = 1/(2 pi) int conj(psi(x + beta hbar/2)) psi(x - beta hbar/2) exp(i beta p) dbeta`.
//!
//! With `y = beta hbar / 2` restricted to grid offsets `y = m dx`, each row is
//! a single FFT over `m`. The resulting momentum grid has spacing
//! `pi hbar / (n dx)`, half the spacing of the unitary Fourier grid, and is
//! centered so that `p = 0` is node `n / 2`.

use ndarray::Array2;
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::quasi::{SignedDensity1D, SignedDensity2D};
use crate::real::Real;
use crate::state::{Grid1D, WaveFunction};

/// Largest tolerated imaginary residue, relative to the peak of `|Re W|`.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-8;

/// Momentum grid of [`wigner`] for a given position grid.
pub fn wigner_momentum_grid<T: Real>(x_grid: &Grid1D<T>, hbar: T) -> Result<Grid1D<T>> {
    let n = x_grid.len();
    let dp = T::PI() * hbar / (T::of_usize(n) * x_grid.dx());
    Grid1D::centered(dp, n)
}

pub fn wigner<T: Real>(psi: &WaveFunction<T>) -> Result<SignedDensity2D<T>> {
    wigner_with_residue(psi).map(|(w, _)| w)
}

/// Like [`wigner`], also returning the discarded imaginary residue
/// `max |Im W| / max |Re W|`.
pub fn wigner_with_residue<T: Real>(psi: &WaveFunction<T>) -> Result<(SignedDensity2D<T>, T)> {
    let grid = *psi.grid();
    let n = grid.len();
    let half = n / 2;
    let amps = psi.amplitudes();
    let p_grid = wigner_momentum_grid(&grid, psi.hbar())?;
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let scale = grid.dx() / (T::PI() * psi.hbar());

    let zero = Complex::new(T::zero(), T::zero());
    let mut values = Array2::<T>::zeros((n, n));
    let mut buf = vec![zero; n];
    let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
    let (mut max_re, mut max_im) = (T::zero(), T::zero());

    for (k, mut row) in values.outer_iter_mut().enumerate() {
        buf.iter_mut().for_each(|c| *c = zero);
        // offsets m in [-n/2, n/2) with both k + m and k - m on the grid
        let reach = k.min(n - 1 - k).min(half);
        for m in 0..=reach {
            let plus = amps[k + m];
            let minus = amps[k - m];
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            buf[m] = plus.conj() * minus * sign;
            if m > 0 && m < half {
                buf[n - m] = minus.conj() * plus * sign;
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (w, c) in row.iter_mut().zip(&buf) {
            *w = c.re * scale;
            max_re = max_re.max(w.abs());
            max_im = max_im.max((c.im * scale).abs());
        }
    }

    let residue = if max_re > T::zero() {
        max_im / max_re
    } else {
        T::zero()
    };
    let limit = T::tol(IMAGINARY_RESIDUE_LIMIT);
    if residue.f64() > limit {
        return Err(Error::NumericalIntegrity {
            residue: residue.f64(),
            limit,
        });
    }
    Ok((SignedDensity2D::new(grid, p_grid, values)?, residue))
}

/// Position marginal `dp * sum_j W(x, p_j)`.
pub fn marginal_x<T: Real>(w: &SignedDensity2D<T>) -> Result<SignedDensity1D<T>> {
    let dp = w.p_grid().dx();
    let values = w.values().outer_iter().map(|row| row.sum() * dp).collect();
    SignedDensity1D::new(*w.x_grid(), values)
}

/// Momentum marginal `dx * sum_i W(x_i, p)`.
pub fn marginal_p<T: Real>(w: &SignedDensity2D<T>) -> Result<SignedDensity1D<T>> {
    let dx = w.x_grid().dx();
    let values = w.values().columns().into_iter().map(|col| col.sum() * dx).collect();
    SignedDensity1D::new(*w.p_grid(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fock_state, gaussian_state};
    use std::f64::consts::{FRAC_1_PI, PI};

    fn grid() -> Grid1D<f64> {
        Grid1D::new(-12.0, 12.0, 1024).unwrap()
    }

    #[test]
    fn origin_values() {
        let g = grid();
        let coherent = gaussian_state(&g, 0.0, 0.0, 0.5f64.sqrt(), 1.0).unwrap();
        let w = wigner(&coherent).unwrap();
        assert!((w.values()[[512, 512]] - FRAC_1_PI).abs() < 1e-4);
        let w1 = wigner(&fock_state(&g, 1, 1.0).unwrap()).unwrap();
        assert!((w1.values()[[512, 512]] + FRAC_1_PI).abs() < 1e-4);
    }

    #[test]
    fn momentum_grid_layout() {
        let g = grid();
        let pg = wigner_momentum_grid(&g, 2.0).unwrap();
        assert_eq!(pg.point(512), 0.0);
        assert!((pg.dx() - PI * 2.0 / 24.0).abs() < 1e-14);
    }

    #[test]
    fn residue_is_tiny_and_mass_is_one() {
        let g = grid();
        let psi = gaussian_state(&g, 1.0, 0.7, 0.9, 0.8).unwrap();
        let (w, residue) = wigner_with_residue(&psi).unwrap();
        assert!(residue < 1e-10, "{residue}");
        assert!((w.total_mass() - 1.0).abs() < 1e-6);
        assert!((w.square_integral() * 2.0 * PI * 0.8 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn marginals_of_shifted_gaussian() {
        let g = grid();
        let (x0, p0, sigma) = (-0.5, 1.25, 0.7);
        let psi = gaussian_state(&g, x0, p0, sigma, 1.0).unwrap();
        let w = wigner(&psi).unwrap();
        let mx = marginal_x(&w).unwrap();
        let l1: f64 = mx
            .values()
            .iter()
            .zip(psi.density())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * g.dx();
        assert!(l1 < 1e-5, "{l1}");
        let mp = marginal_p(&w).unwrap();
        assert!((mp.total_mass() - 1.0).abs() < 1e-6);
        assert!((mp.expectation(|p| p) - p0).abs() < 1e-3);
    }

    #[test]
    fn symmetric_state_has_even_marginal() {
        let g = grid();
        let w = wigner(&fock_state(&g, 2, 1.0).unwrap()).unwrap();
        let mx = marginal_x(&w).unwrap();
        let v = mx.values();
        for k in 1..1024 {
            assert!((v[k] - v[1024 - k]).abs() < 1e-8);
        }
    }

    #[test]
    fn single_precision_wigner() {
        let g = Grid1D::<f32>::new(-12.0, 12.0, 256).unwrap();
        let psi = fock_state(&g, 1, 1.0f32).unwrap();
        let w = wigner(&psi).unwrap();
        assert!((w.total_mass() - 1.0).abs() < 1e-3);
        assert!(w.negative_volume() > 0.05);
    }
}
