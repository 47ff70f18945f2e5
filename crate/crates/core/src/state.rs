//! Discretized one-particle states on a uniform grid.
//!
//! A [`WaveFunction`] is always normalized (`dx * sum |psi_k|^2 = 1`) at
//! construction. The "nice state" requirement (smooth, compactly supported)
//! is approximated by requiring negligible amplitude on the outermost 5% of
//! the grid on each side, see [`WaveFunction::edge_amplitude`].

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Amplitude bound on the outer 5% of the grid for a state to count as nice.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-12;

/// Uniform grid `x_k = x_min + k * dx`, `k = 0..n_points`, `dx = (x_max - x_min) / n_points`.
///
/// The right endpoint is excluded, which makes the grid periodic-compatible
/// for radix-2 FFTs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Config("grid endpoints must be finite".into()));
        }
        if !(x_min < x_max) {
            return Err(Error::Config(format!(
                "empty grid interval [{x_min}, {x_max}]"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size {n_points} is not a power of two >= 16"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid with `n_points` nodes at spacing `dx` whose node `n_points / 2` sits at zero.
    pub fn centered(dx: T, n_points: usize) -> Result<Self> {
        let half = T::of_usize(n_points / 2) * dx;
        Self::new(-half, half, n_points)
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::of_usize(self.n_points)
    }

    #[inline]
    pub fn point(&self, k: usize) -> T {
        self.x_min + T::of_usize(k) * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |k| self.x_min + T::of_usize(k) * dx)
    }

    /// Last node, `x_max - dx`.
    pub fn last(&self) -> T {
        self.point(self.n_points - 1)
    }

    /// Fractional index of `x`: `(x - x_min) / dx`.
    #[inline]
    pub fn position(&self, x: T) -> T {
        (x - self.x_min) / self.dx()
    }

    /// True when `x_min = -x_max`, so that node `k` mirrors node `n - k`.
    pub fn is_symmetric(&self) -> bool {
        let scale = self.x_max.abs().max(T::one());
        (self.x_min + self.x_max).abs() <= T::of(1e-12).max(T::epsilon() * T::of(8.0)) * scale
    }

    /// Grid with every node scaled by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.x_min * factor, self.x_max * factor, self.n_points)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.x_min == other.x_min && self.x_max == other.x_max
    }

    /// Momentum grid conjugate to this one under the unitary FFT:
    /// spacing `2 pi hbar / (n dx)`, range `[-pi hbar / dx, pi hbar / dx)`.
    pub fn fourier_conjugate(&self, hbar: T) -> Result<Self> {
        let p_max = T::PI() * hbar / self.dx();
        Self::new(-p_max, p_max, self.n_points)
    }

    /// Grid of `factor * n_points` nodes covering the same interval.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_points * factor)
    }
}

/// Normalized complex amplitudes on a [`Grid1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction<T> {
    grid: Grid1D<T>,
    amplitudes: Vec<Complex<T>>,
    hbar: T,
}

impl<T: Real> WaveFunction<T> {
    /// Wraps amplitudes that are already normalized; fails if they are not.
    pub fn new(grid: Grid1D<T>, amplitudes: Vec<Complex<T>>, hbar: T) -> Result<Self> {
        check_hbar(hbar)?;
        if amplitudes.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} amplitudes on a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        let psi = Self {
            grid,
            amplitudes,
            hbar,
        };
        let deviation = (psi.norm_squared() - T::one()).abs().f64();
        if deviation > T::tol(1e-9) {
            return Err(Error::Invariant(format!(
                "wavefunction norm deviates from 1 by {deviation:.3e}"
            )));
        }
        Ok(psi)
    }

    /// Normalizes once, then validates.
    pub fn normalized(grid: Grid1D<T>, mut amplitudes: Vec<Complex<T>>, hbar: T) -> Result<Self> {
        check_hbar(hbar)?;
        let norm2 = grid.dx() * amplitudes.iter().map(|c| c.norm_sqr()).sum::<T>();
        if !(norm2.f64() > 1e-24) || !norm2.is_finite() {
            return Err(Error::Degenerate(format!(
                "cannot normalize a state with squared norm {norm2}"
            )));
        }
        let inv = norm2.sqrt().recip();
        for a in amplitudes.iter_mut() {
            *a = *a * inv;
        }
        Self::new(grid, amplitudes, hbar)
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn norm_squared(&self) -> T {
        self.grid.dx() * self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<T>()
    }

    /// Position density `|psi(x_k)|^2`.
    pub fn density(&self) -> Vec<T> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Largest `|psi|` on the outermost 5% of grid points on either side.
    pub fn edge_amplitude(&self) -> T {
        let n = self.amplitudes.len();
        let band = (n / 20).max(1);
        self.amplitudes[..band]
            .iter()
            .chain(&self.amplitudes[n - band..])
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    pub fn is_nice(&self) -> bool {
        self.edge_amplitude().f64() < T::tol(EDGE_AMPLITUDE_LIMIT)
    }

    /// `dx * sum conj(self_k) * other_k`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.check_compatible(other)?;
        let sum: Complex<T> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v);
        Ok(sum * self.grid.dx())
    }

    /// `sqrt(dx * sum |self_k - other_k|^2)`.
    pub fn l2_distance(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        let s: T = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.grid.dx()).sqrt())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Domain("states live on different grids".into()));
        }
        if self.hbar != other.hbar {
            return Err(Error::Domain("states use different hbar".into()));
        }
        Ok(())
    }

    fn require_nice(self, what: &str) -> Result<Self> {
        if self.is_nice() {
            Ok(self)
        } else {
            Err(Error::Domain(format!(
                "{what} does not decay on the grid (edge amplitude {:.3e})",
                self.edge_amplitude().f64()
            )))
        }
    }
}

fn check_hbar<T: Real>(hbar: T) -> Result<()> {
    if hbar > T::zero() && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("hbar must be positive, got {hbar}")))
    }
}

/// `psi(x) = (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / (4 sigma^2) + i p0 x / hbar)`.
///
/// Requires `[x0 - 8 sigma, x0 + 8 sigma]` inside the grid.
pub fn gaussian_state<T: Real>(
    grid: &Grid1D<T>,
    x0: T,
    p0: T,
    sigma: T,
    hbar: T,
) -> Result<WaveFunction<T>> {
    check_hbar(hbar)?;
    if !(sigma > T::zero()) {
        return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
    }
    let reach = T::of(8.0) * sigma;
    if x0 - reach < grid.x_min() || x0 + reach > grid.x_max() {
        return Err(Error::Domain(format!(
            "gaussian support [{}, {}] overflows the grid [{}, {}]",
            x0 - reach,
            x0 + reach,
            grid.x_min(),
            grid.x_max()
        )));
    }
    let prefactor = (T::TAU() * sigma * sigma).powf(T::of(-0.25));
    let four_var = T::of(4.0) * sigma * sigma;
    let amps = grid
        .points()
        .map(|x| {
            let envelope = prefactor * (-(x - x0).powi(2) / four_var).exp();
            Complex::from_polar(envelope, p0 * x / hbar)
        })
        .collect();
    WaveFunction::normalized(*grid, amps, hbar)
}

/// Highest oscillator level the catalog will build.
pub const MAX_FOCK_LEVEL: usize = 20;

/// Harmonic oscillator eigenstate `psi_n(x) ~ H_n(x / sqrt(hbar)) exp(-x^2 / (2 hbar))`
/// (unit mass and frequency).
pub fn fock_state<T: Real>(grid: &Grid1D<T>, n: usize, hbar: T) -> Result<WaveFunction<T>> {
    check_hbar(hbar)?;
    if n > MAX_FOCK_LEVEL {
        return Err(Error::Domain(format!(
            "Fock level {n} exceeds the supported maximum {MAX_FOCK_LEVEL}"
        )));
    }
    // Local wavelength near the turning point must be resolved.
    let k_max = (T::of_usize(2 * n + 1) / hbar).sqrt();
    if k_max * grid.dx() > T::of(0.5) {
        return Err(Error::Domain(format!(
            "grid spacing {} cannot resolve Fock level {n}",
            grid.dx()
        )));
    }
    let scale = hbar.sqrt();
    let amps = grid
        .points()
        .map(|x| {
            let value = hermite_function(n, x / scale) / scale.sqrt();
            Complex::new(value, T::zero())
        })
        .collect();
    WaveFunction::normalized(*grid, amps, hbar)?.require_nice(&format!("Fock level {n}"))
}

/// Normalized Hermite function by the three-term recurrence
/// `phi_{k+1} = sqrt(2/(k+1)) xi phi_k - sqrt(k/(k+1)) phi_{k-1}`.
fn hermite_function<T: Real>(n: usize, xi: T) -> T {
    let mut prev = T::PI().powf(T::of(-0.25)) * (-xi * xi / T::of(2.0)).exp();
    if n == 0 {
        return prev;
    }
    let mut cur = T::SQRT_2() * xi * prev;
    for k in 1..n {
        let kf = T::of_usize(k);
        let next = (T::of(2.0) / (kf + T::one())).sqrt() * xi * cur
            - (kf / (kf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `c1 psi1 + c2 psi2`, renormalized.
pub fn superpose<T: Real>(
    psi1: &WaveFunction<T>,
    psi2: &WaveFunction<T>,
    c1: Complex<T>,
    c2: Complex<T>,
) -> Result<WaveFunction<T>> {
    psi1.check_compatible(psi2)?;
    let amps: Vec<Complex<T>> = psi1
        .amplitudes
        .iter()
        .zip(&psi2.amplitudes)
        .map(|(a, b)| c1 * a + c2 * b)
        .collect();
    let norm2 = psi1.grid.dx() * amps.iter().map(|c| c.norm_sqr()).sum::<T>();
    if norm2.f64() < T::tol(1e-12) {
        return Err(Error::Degenerate(format!(
            "superposition cancels (squared norm {:.3e})",
            norm2.f64()
        )));
    }
    WaveFunction::normalized(psi1.grid, amps, psi1.hbar)
}

/// Momentum representation `psi_hat(p) = (2 pi hbar)^(-1/2) int psi(x) exp(-i p x / hbar) dx`
/// on [`Grid1D::fourier_conjugate`].
pub fn fourier_state<T: Real>(psi: &WaveFunction<T>) -> Result<WaveFunction<T>> {
    let grid = psi.grid();
    let n = grid.len();
    let hbar = psi.hbar();
    let p_grid = grid.fourier_conjugate(hbar)?;

    let mut buf: Vec<Complex<T>> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let scale = grid.dx() / (T::TAU() * hbar).sqrt();
    let x_min = grid.x_min();
    let amps = buf
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let p = p_grid.point(j);
            c * Complex::from_polar(scale, -p * x_min / hbar)
        })
        .collect();
    WaveFunction::new(p_grid, amps, hbar)
}

/// Named test states, written `gauss:x0,p0,sigma`, `fock:n`, `fock-cat:m,n`
/// (equal-weight superposition of two levels) or `gauss-cat:x0,sigma`
/// (gaussians at `+x0` and `-x0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Fixture {
    Gauss { x0: f64, p0: f64, sigma: f64 },
    Fock { n: usize },
    FockCat { m: usize, n: usize },
    GaussCat { x0: f64, sigma: f64 },
}

impl Fixture {
    pub fn build<T: Real>(&self, grid: &Grid1D<T>, hbar: T) -> Result<WaveFunction<T>> {
        let one = Complex::new(T::one(), T::zero());
        match *self {
            Fixture::Gauss { x0, p0, sigma } => {
                gaussian_state(grid, T::of(x0), T::of(p0), T::of(sigma), hbar)
            }
            Fixture::Fock { n } => fock_state(grid, n, hbar),
            Fixture::FockCat { m, n } => {
                superpose(&fock_state(grid, m, hbar)?, &fock_state(grid, n, hbar)?, one, one)
            }
            Fixture::GaussCat { x0, sigma } => {
                let (x0, sigma) = (T::of(x0), T::of(sigma));
                let right = gaussian_state(grid, x0, T::zero(), sigma, hbar)?;
                let left = gaussian_state(grid, -x0, T::zero(), sigma, hbar)?;
                superpose(&right, &left, one, one)
            }
        }
    }

    /// States used by verification sweeps and the acceptance suite.
    pub fn catalog() -> Vec<Fixture> {
        vec![
            Fixture::Gauss {
                x0: 0.0,
                p0: 0.0,
                sigma: 1.0,
            },
            Fixture::Gauss {
                x0: 1.0,
                p0: -0.5,
                sigma: 0.8,
            },
            Fixture::Fock { n: 0 },
            Fixture::Fock { n: 1 },
            Fixture::Fock { n: 2 },
            Fixture::Fock { n: 3 },
            Fixture::FockCat { m: 0, n: 1 },
            Fixture::GaussCat {
                x0: 2.0,
                sigma: std::f64::consts::FRAC_1_SQRT_2,
            },
        ]
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Gauss { x0, p0, sigma } => write!(f, "gauss:{x0},{p0},{sigma}"),
            Fixture::Fock { n } => write!(f, "fock:{n}"),
            Fixture::FockCat { m, n } => write!(f, "fock-cat:{m},{n}"),
            Fixture::GaussCat { x0, sigma } => write!(f, "gauss-cat:{x0},{sigma}"),
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Config(format!("bad fixture '{s}': {why}"));
        let (name, args) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let args: Vec<&str> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::trim).collect()
        };
        let reals = |count: usize| -> Result<Vec<f64>> {
            if args.len() != count {
                return Err(bad(&format!("expected {count} parameters")));
            }
            args.iter()
                .map(|a| {
                    a.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| bad(&format!("'{a}' is not a finite number")))
                })
                .collect()
        };
        let levels = |count: usize| -> Result<Vec<usize>> {
            if args.len() != count {
                return Err(bad(&format!("expected {count} parameters")));
            }
            args.iter()
                .map(|a| a.parse::<usize>().map_err(|_| bad(&format!("'{a}' is not a level"))))
                .collect()
        };
        match name {
            "gauss" => {
                let v = reals(3)?;
                Ok(Fixture::Gauss {
                    x0: v[0],
                    p0: v[1],
                    sigma: v[2],
                })
            }
            "fock" => Ok(Fixture::Fock { n: levels(1)?[0] }),
            "fock-cat" => {
                let v = levels(2)?;
                Ok(Fixture::FockCat { m: v[0], n: v[1] })
            }
            "gauss-cat" => {
                let v = reals(2)?;
                Ok(Fixture::GaussCat {
                    x0: v[0],
                    sigma: v[1],
                })
            }
            _ => Err(bad("unknown fixture name")),
        }
    }
}

impl TryFrom<String> for Fixture {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Fixture> for String {
    fn from(f: Fixture) -> Self {
        f.to_string()
    }
}
