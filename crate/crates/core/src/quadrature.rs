//! Quadrature distributions `Prob_Z` for `Z = a X + b P`, computed from the
//! state alone through the fractional Fourier transform.
//!
//! With `u = x / sqrt(hbar)` and `v = p / sqrt(hbar)`, `Z = r sqrt(hbar) (U cos t + V sin t)`
//! where `r = |(a, b)|` and `t = atan2(b, a)`. Since `x` and `p` share the
//! factor `sqrt(hbar)`, the rotation angle is the same in physical units and
//! the rotated state can be computed on the original position grid.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasi::{ProbabilityDensity1D, SignedDensity1D};
use crate::real::Real;
use crate::state::WaveFunction;

/// Angles this close to `0` or `pi` use the exact identity or parity map.
pub const SPECIAL_ANGLE_TOL: f64 = 1e-6;

/// Rotated states with edge amplitude above this have left the grid.
const ROTATED_EDGE_LIMIT: f64 = 1e-6;

/// Linear observable `z = a x + b p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub a: f64,
    pub b: f64,
}

impl QuadratureSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let spec = Self { a, b };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) || (self.a == 0.0 && self.b == 0.0) {
            return Err(Error::Degenerate(format!(
                "observable {} x + {} p is degenerate",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn angle(&self) -> f64 {
        self.b.atan2(self.a)
    }

    pub fn magnitude(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// `count` unit directions `(cos t, sin t)` at `t = k pi / count`.
    pub fn sweep(count: usize) -> Vec<Self> {
        (0..count)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / count as f64;
                let (s, c) = t.sin_cos();
                // exact zeros on the axes
                let round = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
                Self { a: round(c), b: round(s) }
            })
            .collect()
    }
}

/// Fractional Fourier transform by angle `theta`: `exp(-i theta (H - 1/2))`
/// with `H = (X^2 + P^2) / (2 hbar)`, so `theta = pi/2` is the unitary
/// Fourier transform with momentum read on the position axis.
///
/// Uses the three-shear factorization
/// `exp(-i tan(t/2) X^2 / 2hbar) exp(-i sin(t) hbar k^2 / 2) exp(-i tan(t/2) X^2 / 2hbar)`
/// for `|t| <= pi/2`, composing two half-angle steps beyond that.
pub fn frft<T: Real>(psi: &WaveFunction<T>, theta: f64) -> Result<WaveFunction<T>> {
    use std::f64::consts::{PI, TAU};
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    if t.abs() < SPECIAL_ANGLE_TOL {
        return Ok(psi.clone());
    }
    if (PI - t.abs()).abs() < SPECIAL_ANGLE_TOL && psi.grid().is_symmetric() {
        return parity(psi);
    }
    let mut planner = FftPlanner::new();
    if t.abs() <= PI / 2.0 {
        shear_rotation(psi, t, &mut planner)
    } else {
        let half = shear_rotation(psi, t / 2.0, &mut planner)?;
        shear_rotation(&half, t / 2.0, &mut planner)
    }
}

fn parity<T: Real>(psi: &WaveFunction<T>) -> Result<WaveFunction<T>> {
    let a = psi.amplitudes();
    let n = a.len();
    let flipped = (0..n).map(|k| a[(n - k) % n]).collect();
    WaveFunction::new(*psi.grid(), flipped, psi.hbar())
}

fn shear_rotation<T: Real>(
    psi: &WaveFunction<T>,
    theta: f64,
    planner: &mut FftPlanner<T>,
) -> Result<WaveFunction<T>> {
    let grid = *psi.grid();
    let n = grid.len();
    let hbar = psi.hbar();
    let shear = T::of((theta / 2.0).tan());
    let drift = T::of(theta.sin());
    let two = T::of(2.0);

    let chirp: Vec<Complex<T>> = grid
        .points()
        .map(|x| Complex::from_polar(T::one(), -shear * x * x / (two * hbar)))
        .collect();
    let mut buf: Vec<Complex<T>> = psi
        .amplitudes()
        .iter()
        .zip(&chirp)
        .map(|(a, c)| a * c)
        .collect();

    planner.plan_fft_forward(n).process(&mut buf);
    let dk = T::TAU() / (T::of_usize(n) * grid.dx());
    for (m, c) in buf.iter_mut().enumerate() {
        let signed = if m < n / 2 {
            T::of_usize(m)
        } else {
            -T::of_usize(n - m)
        };
        let k = signed * dk;
        *c = *c * Complex::from_polar(T::one(), -drift * hbar * k * k / two);
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let norm = T::of_usize(n).recip();
    let global = Complex::from_polar(norm, T::of(theta / 2.0));
    let amps = buf
        .into_iter()
        .zip(&chirp)
        .map(|(a, c)| a * c * global)
        .collect();
    WaveFunction::new(grid, amps, hbar)
}

/// Distribution of `Z = a X + b P` in state `psi`, on the position grid scaled
/// by `|(a, b)|`.
pub fn quadrature_distribution<T: Real>(
    psi: &WaveFunction<T>,
    spec: QuadratureSpec,
) -> Result<ProbabilityDensity1D<T>> {
    spec.validate()?;
    let rotated = frft(psi, spec.angle())?;
    if rotated.edge_amplitude().f64() > T::tol(ROTATED_EDGE_LIMIT) {
        return Err(Error::Domain(format!(
            "state rotated by {:.4} rad leaves the grid (edge amplitude {:.2e})",
            spec.angle(),
            rotated.edge_amplitude().f64()
        )));
    }
    let r = T::of(spec.magnitude());
    let z_grid = psi.grid().scaled(r)?;
    let values = rotated.density().into_iter().map(|d| d / r).collect();
    ProbabilityDensity1D::new(SignedDensity1D::new(z_grid, values)?)
}

/// `Prob(p < Z <= q)`.
pub fn interval_probability<T: Real>(dist: &ProbabilityDensity1D<T>, p: T, q: T) -> Result<T> {
    if !(p <= q) {
        return Err(Error::Argument(format!("empty interval ({p}, {q}]")));
    }
    Ok(dist.cdf_at(q) - dist.cdf_at(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fock_state, fourier_state, gaussian_state, Fixture, Grid1D};
    use std::f64::consts::PI;

    fn grid() -> Grid1D<f64> {
        Grid1D::new(-12.0, 12.0, 1024).unwrap()
    }

    fn gaussian_density(z: f64, var: f64) -> f64 {
        (-z * z / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    /// Continuous Fourier transform of the samples by direct summation.
    fn direct_fourier(psi: &WaveFunction<f64>, p: f64) -> Complex<f64> {
        let hbar = psi.hbar();
        let sum: Complex<f64> = psi
            .grid()
            .points()
            .zip(psi.amplitudes())
            .map(|(x, a)| a * Complex::from_polar(1.0, -p * x / hbar))
            .sum();
        sum * psi.grid().dx() / (2.0 * PI * hbar).sqrt()
    }

    #[test]
    fn identity_and_unitarity() {
        let g = grid();
        let psi = Fixture::GaussCat { x0: 2.0, sigma: 0.8 }.build(&g, 1.0).unwrap();
        let same = frft(&psi, 0.0).unwrap();
        assert!(same.l2_distance(&psi).unwrap() < 1e-10);
        for theta in [0.3, -1.1, 2.0, 3.0, PI, -2.5] {
            let r = frft(&psi, theta).unwrap();
            assert!((r.norm_squared() - 1.0).abs() < 1e-8, "{theta}");
        }
    }

    #[test]
    fn eigenstates_pick_up_phases() {
        let g = grid();
        for n in 0..4 {
            let psi = fock_state(&g, n, 1.0).unwrap();
            let theta = 0.7;
            let rotated = frft(&psi, theta).unwrap();
            let phase = Complex::from_polar(1.0, -(n as f64) * theta);
            let overlap = psi.inner_product(&rotated).unwrap();
            assert!((overlap - phase).norm() < 1e-8, "n={n}: {overlap}");
        }
    }

    #[test]
    fn quarter_turn_is_fourier_transform() {
        let g = grid();
        for hbar in [1.0, 0.6] {
            let psi = gaussian_state(&g, 1.0, 0.5, 0.8, hbar).unwrap();
            let rotated = frft(&psi, PI / 2.0).unwrap();
            let reference: Vec<Complex<f64>> = g.points().map(|p| direct_fourier(&psi, p)).collect();
            let reference = WaveFunction::new(g, reference, hbar).unwrap();
            let l2 = rotated.l2_distance(&reference).unwrap();
            assert!(l2 < 1e-6, "hbar={hbar}: {l2}");

            // the FFT route agrees with the direct sum on its own nodes
            let phi = fourier_state(&psi).unwrap();
            for (p, a) in phi.grid().points().zip(phi.amplitudes()).step_by(37) {
                assert!((a - direct_fourier(&psi, p)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn rotations_compose() {
        let g = grid();
        let psi = Fixture::FockCat { m: 0, n: 3 }.build(&g, 1.0).unwrap();
        let (t1, t2) = (PI / 5.0, PI / 7.0);
        let twice = frft(&frft(&psi, t1).unwrap(), t2).unwrap();
        let once = frft(&psi, t1 + t2).unwrap();
        assert!(twice.l2_distance(&once).unwrap() < 1e-5);
        let half_turns = frft(&frft(&psi, PI / 2.0).unwrap(), PI / 2.0).unwrap();
        let flip = frft(&psi, PI).unwrap();
        assert!(half_turns.l2_distance(&flip).unwrap() < 1e-8);
    }

    #[test]
    fn axis_distributions() {
        let g = grid();
        let psi = gaussian_state(&g, 0.0, 0.0, 0.9, 1.0).unwrap();
        let position = quadrature_distribution(&psi, QuadratureSpec::new(1.0, 0.0).unwrap()).unwrap();
        let l1: f64 = position
            .values()
            .iter()
            .zip(psi.density())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * g.dx();
        assert!(l1 < 1e-6);

        let momentum = quadrature_distribution(&psi, QuadratureSpec::new(0.0, 1.0).unwrap()).unwrap();
        let var = 1.0 / (4.0 * 0.81);
        let l1: f64 = momentum
            .grid()
            .points()
            .zip(momentum.values())
            .map(|(p, d)| (d - gaussian_density(p, var)).abs())
            .sum::<f64>()
            * momentum.grid().dx();
        assert!(l1 < 1e-4, "{l1}");
    }

    #[test]
    fn diagonal_quadrature_of_ground_state() {
        let g = grid();
        let psi = fock_state(&g, 0, 1.0).unwrap();
        let d = quadrature_distribution(&psi, QuadratureSpec::new(1.0, 1.0).unwrap()).unwrap();
        assert!((d.grid().dx() - 2f64.sqrt() * g.dx()).abs() < 1e-14);
        let l1: f64 = d
            .grid()
            .points()
            .zip(d.values())
            .map(|(z, v)| (v - gaussian_density(z, 1.0)).abs())
            .sum::<f64>()
            * d.grid().dx();
        assert!(l1 < 1e-3, "{l1}");
    }

    #[test]
    fn degenerate_spec() {
        assert!(matches!(QuadratureSpec::new(0.0, 0.0), Err(Error::Degenerate(_))));
        let g = grid();
        let psi = fock_state(&g, 0, 1.0).unwrap();
        let spec = QuadratureSpec { a: 0.0, b: 0.0 };
        assert!(quadrature_distribution(&psi, spec).is_err());
    }

    #[test]
    fn intervals() {
        let g = grid();
        let psi = fock_state(&g, 0, 1.0).unwrap();
        let d = quadrature_distribution(&psi, QuadratureSpec::new(1.0, 0.0).unwrap()).unwrap();
        let (lo, hi) = (d.grid().x_min(), d.grid().last());
        assert!((interval_probability(&d, lo, hi).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(interval_probability(&d, 0.3, 0.3).unwrap(), 0.0);
        assert!((interval_probability(&d, 0.0, hi).unwrap() - 0.5).abs() < 1e-4);
        assert!(matches!(interval_probability(&d, 1.0, 0.0), Err(Error::Argument(_))));
        let (p, q, s) = (-0.7, 0.2, 1.3);
        let split = interval_probability(&d, p, q).unwrap() + interval_probability(&d, q, s).unwrap();
        assert!((split - interval_probability(&d, p, s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn sweep_has_exact_axes() {
        let sweep = QuadratureSpec::sweep(12);
        assert_eq!(sweep.len(), 12);
        assert_eq!(sweep[0], QuadratureSpec { a: 1.0, b: 0.0 });
        assert_eq!(sweep[6].a, 0.0);
        assert_eq!(sweep[6].b, 1.0);
    }
}
