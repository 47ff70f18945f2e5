//! Signed (quasiprobability) densities on grids.
//!
//! A quasiprobability distribution is a real-valued, countably additive set
//! function with total mass one. On a finite grid it reduces to a density
//! whose Riemann sum is one and whose values may be negative. Images under
//! linear maps `(x, p) -> a x + b p` are computed by [`pushforward_linear`];
//! when the input is a Wigner function they are ordinary probability
//! densities and can be promoted with [`SignedDensity1D::to_probability`].

use ndarray::Array2;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::interp::{cubic_at, refine_periodic};
use crate::real::Real;
use crate::state::Grid1D;

/// Number of nodes on the output axis of [`pushforward_linear`].
pub const PUSHFORWARD_BINS: usize = 1024;

/// Cells with `|W|` below this fraction of the peak are outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Default negativity tolerance for [`SignedDensity1D::to_probability`],
/// relative to the peak value.
pub const DEFAULT_NEGATIVITY_TOL: f64 = 1e-6;

/// Band-limited refinement applied along `p` before interpolating rows.
const ROW_REFINEMENT: usize = 4;

fn check_mass(mass: f64, what: &str, base_tol: f64, tol: f64) -> Result<()> {
    let tol = tol.max(base_tol);
    if (mass - 1.0).abs() > tol || !mass.is_finite() {
        return Err(Error::Invariant(format!(
            "{what} has total mass {mass:.12}, expected 1 within {tol:.0e}"
        )));
    }
    Ok(())
}

/// Real-valued density on a 1D grid with unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDensity1D<T> {
    grid: Grid1D<T>,
    values: Vec<T>,
}

impl<T: Real> SignedDensity1D<T> {
    pub fn new(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("density has non-finite values".into()));
        }
        let d = Self { grid, values };
        check_mass(d.total_mass().f64(), "1D density", 1e-6, T::TOL_FLOOR)?;
        Ok(d)
    }

    /// Divides `values` by their Riemann sum, then validates.
    pub fn normalized(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        let mass = grid.dx() * values.iter().copied().sum::<T>();
        if !(mass.abs().f64() > 1e-300) || !mass.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize mass {mass}")));
        }
        Self::new(grid, values.into_iter().map(|v| v / mass).collect())
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `dz * sum values`.
    pub fn total_mass(&self) -> T {
        self.grid.dx() * self.values.iter().copied().sum::<T>()
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Cubic interpolation between nodes, zero beyond the grid.
    pub fn value_at(&self, z: T) -> T {
        cubic_at(&self.values, self.grid.position(z))
    }

    /// `dz * sum F(z_k) d_k`.
    pub fn expectation<F: Fn(T) -> T>(&self, f: F) -> T {
        self.grid.dx()
            * self
                .grid
                .points()
                .zip(&self.values)
                .map(|(z, &d)| f(z) * d)
                .sum::<T>()
    }

    /// Promotes to a probability density if the most negative value is above
    /// `-tol * peak`. Negative values are clamped to zero and the result is
    /// renormalized; the clamped mass is returned alongside.
    pub fn to_probability(&self, tol: f64) -> Result<(ProbabilityDensity1D<T>, T)> {
        let peak = self.max_value().max(T::zero());
        let min = self.min_value();
        let dz = self.grid.dx();
        let negative_mass = dz
            * self
                .values
                .iter()
                .map(|&v| (-v).max(T::zero()))
                .sum::<T>();
        if min < -(T::of(tol) * peak) {
            return Err(Error::Negativity {
                mass: negative_mass.f64(),
                min: min.f64(),
            });
        }
        if negative_mass == T::zero() {
            return Ok((ProbabilityDensity1D::new(self.clone())?, negative_mass));
        }
        let clamped: Vec<T> = self.values.iter().map(|&v| v.max(T::zero())).collect();
        let density = SignedDensity1D::normalized(self.grid, clamped)?;
        Ok((ProbabilityDensity1D::new(density)?, negative_mass))
    }
}

/// Nonnegative density with unit mass, with a cached piecewise-linear CDF.
///
/// Node `k` carries the mass `d_k * dz` spread uniformly over the cell
/// `[z_k - dz/2, z_k + dz/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDensity1D<T> {
    density: SignedDensity1D<T>,
    /// `cdf[k]` is the mass of cells `0..=k`.
    cdf: Vec<T>,
}

impl<T: Real> ProbabilityDensity1D<T> {
    pub fn new(density: SignedDensity1D<T>) -> Result<Self> {
        if let Some(v) = density.values.iter().find(|&&v| v < T::zero()) {
            return Err(Error::Invariant(format!(
                "probability density has negative value {v}"
            )));
        }
        let total: T = density.values.iter().copied().sum();
        let mut acc = T::zero();
        let cdf = density
            .values
            .iter()
            .map(|&v| {
                acc = acc + v;
                acc / total
            })
            .collect();
        Ok(Self { density, cdf })
    }

    pub fn from_values(grid: Grid1D<T>, values: Vec<T>) -> Result<Self> {
        Self::new(SignedDensity1D::new(grid, values)?)
    }

    pub fn as_signed(&self) -> &SignedDensity1D<T> {
        &self.density
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.density.grid
    }

    pub fn values(&self) -> &[T] {
        &self.density.values
    }

    pub fn expectation<F: Fn(T) -> T>(&self, f: F) -> T {
        self.density.expectation(f)
    }

    /// Lowest and highest reachable outcome: the outer cell edges.
    pub fn support(&self) -> (T, T) {
        let half = self.grid().dx() / T::of(2.0);
        (self.grid().x_min() - half, self.grid().last() + half)
    }

    /// Probability of `(-inf, z]`.
    pub fn cdf_at(&self, z: T) -> T {
        let grid = self.grid();
        let u = grid.position(z) + T::of(0.5);
        if u <= T::zero() {
            return T::zero();
        }
        let k = match u.floor().to_usize() {
            Some(k) if k < self.cdf.len() => k,
            _ => return T::one(),
        };
        let before = if k == 0 { T::zero() } else { self.cdf[k - 1] };
        before + (self.cdf[k] - before) * (u - u.floor())
    }

    /// Inverse-CDF draw, linear within cells.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u = T::of(rng.random::<f64>());
        let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        let before = if k == 0 { T::zero() } else { self.cdf[k - 1] };
        let width = self.cdf[k] - before;
        let frac = if width > T::zero() {
            ((u - before) / width).min(T::one())
        } else {
            T::of(0.5)
        };
        let grid = self.grid();
        grid.point(k) + (frac - T::of(0.5)) * grid.dx()
    }
}

/// Real-valued density on an `x` by `p` grid, stored row-major (`values[[i, j]]`
/// is the value at `(x_i, p_j)`).
#[derive(Debug, Clone, PartialEq)]
pub struct SignedDensity2D<T> {
    x_grid: Grid1D<T>,
    p_grid: Grid1D<T>,
    values: Array2<T>,
}

impl<T: Real> SignedDensity2D<T> {
    pub fn new(x_grid: Grid1D<T>, p_grid: Grid1D<T>, values: Array2<T>) -> Result<Self> {
        if values.dim() != (x_grid.len(), p_grid.len()) {
            return Err(Error::Domain(format!(
                "values have shape {:?}, grids are {} x {}",
                values.dim(),
                x_grid.len(),
                p_grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("density has non-finite values".into()));
        }
        let d = Self {
            x_grid,
            p_grid,
            values,
        };
        check_mass(d.total_mass().f64(), "2D density", 1e-6, T::TOL_FLOOR)?;
        Ok(d)
    }

    pub fn normalized(x_grid: Grid1D<T>, p_grid: Grid1D<T>, values: Array2<T>) -> Result<Self> {
        let mass = x_grid.dx() * p_grid.dx() * values.iter().copied().sum::<T>();
        if !(mass.abs().f64() > 1e-300) || !mass.is_finite() {
            return Err(Error::Degenerate(format!("cannot normalize mass {mass}")));
        }
        Self::new(x_grid, p_grid, values.mapv(|v| v / mass))
    }

    pub fn x_grid(&self) -> &Grid1D<T> {
        &self.x_grid
    }

    pub fn p_grid(&self) -> &Grid1D<T> {
        &self.p_grid
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn cell_area(&self) -> T {
        self.x_grid.dx() * self.p_grid.dx()
    }

    pub fn total_mass(&self) -> T {
        self.cell_area() * self.values.iter().copied().sum::<T>()
    }

    /// `-sum min(0, W) dx dp`.
    pub fn negative_volume(&self) -> T {
        self.cell_area()
            * self
                .values
                .iter()
                .map(|&v| (-v).max(T::zero()))
                .sum::<T>()
    }

    /// `sum W^2 dx dp`.
    pub fn square_integral(&self) -> T {
        self.cell_area() * self.values.iter().map(|&v| v * v).sum::<T>()
    }

    /// `sum F(a x_i + b p_j) W_ij dx dp`.
    pub fn expectation_linear<F: Fn(T) -> T>(&self, a: T, b: T, f: F) -> T {
        let xs: Vec<T> = self.x_grid.points().collect();
        let ps: Vec<T> = self.p_grid.points().collect();
        let sum: T = self
            .values
            .outer_iter()
            .zip(&xs)
            .map(|(row, &x)| {
                row.iter()
                    .zip(&ps)
                    .map(|(&w, &p)| f(a * x + b * p) * w)
                    .sum::<T>()
            })
            .sum();
        sum * self.cell_area()
    }

    /// Index box `(i_lo, i_hi, j_lo, j_hi)` (inclusive) of cells with
    /// `|W| > SUPPORT_THRESHOLD * max |W|`, widened by two cells.
    pub fn support_box(&self) -> (usize, usize, usize, usize) {
        let peak = self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let limit = peak * T::of(SUPPORT_THRESHOLD);
        let (nx, np) = self.values.dim();
        let (mut i_lo, mut i_hi, mut j_lo, mut j_hi) = (nx - 1, 0, np - 1, 0);
        for ((i, j), v) in self.values.indexed_iter() {
            if v.abs() > limit {
                i_lo = i_lo.min(i);
                i_hi = i_hi.max(i);
                j_lo = j_lo.min(j);
                j_hi = j_hi.max(j);
            }
        }
        if i_lo > i_hi {
            return (0, nx - 1, 0, np - 1);
        }
        (
            i_lo.saturating_sub(2),
            (i_hi + 2).min(nx - 1),
            j_lo.saturating_sub(2),
            (j_hi + 2).min(np - 1),
        )
    }
}

/// Image of `w` under `(x, p) -> z = a x + b p`: the line integral
/// `w_z(z) = int int W(x, p) delta(z - a x - b p) dx dp`.
///
/// The output grid has [`PUSHFORWARD_BINS`] nodes spanning the projection of
/// the support box. The integral along each line is a Riemann sum over
/// whichever axis keeps the integrand best resolved:
///
/// - `a^2 dx >= b^2 dp`: sum over `p_j`, cubic interpolation along `x`;
/// - otherwise: sum over `x_i`, with each row first refined along `p` by
///   band-limited interpolation and then interpolated cubically.
///
/// The result is rescaled to the input's total mass.
///
/// The `p` refinement treats rows as periodic trigonometric polynomials, which
/// holds for Wigner functions computed on the FFT-conjugate momentum grid.
pub fn pushforward_linear<T: Real>(w: &SignedDensity2D<T>, a: T, b: T) -> Result<SignedDensity1D<T>> {
    if !(a.is_finite() && b.is_finite()) || (a == T::zero() && b == T::zero()) {
        return Err(Error::Degenerate(format!(
            "observable {a} x + {b} p is degenerate"
        )));
    }
    let (xg, pg) = (w.x_grid(), w.p_grid());
    let (dx, dp) = (xg.dx(), pg.dx());
    let (i_lo, i_hi, j_lo, j_hi) = w.support_box();
    let corners = [
        (xg.point(i_lo), pg.point(j_lo)),
        (xg.point(i_lo), pg.point(j_hi)),
        (xg.point(i_hi), pg.point(j_lo)),
        (xg.point(i_hi), pg.point(j_hi)),
    ];
    let zs = corners.iter().map(|&(x, p)| a * x + b * p);
    let z_min = zs.clone().fold(T::infinity(), T::min);
    let z_max = zs.fold(T::neg_infinity(), T::max);
    let z_grid = Grid1D::new(z_min, z_max, PUSHFORWARD_BINS)?;
    let z_points: Vec<T> = z_grid.points().collect();
    let mut out = vec![T::zero(); PUSHFORWARD_BINS];

    if a * a * dx >= b * b * dp {
        let weight = dp / a.abs();
        let rows = i_lo..=i_hi;
        for j in j_lo..=j_hi {
            let column: Vec<T> = rows.clone().map(|i| w.values[[i, j]]).collect();
            let p = pg.point(j);
            let offset = T::of_usize(i_lo);
            for (acc, &z) in out.iter_mut().zip(&z_points) {
                let x = (z - b * p) / a;
                *acc = *acc + cubic_at(&column, xg.position(x) - offset);
            }
        }
        out.iter_mut().for_each(|v| *v = *v * weight);
    } else {
        let weight = dx / b.abs();
        let factor = T::of_usize(ROW_REFINEMENT);
        let mut planner = FftPlanner::new();
        for i in i_lo..=i_hi {
            let row: Vec<T> = w.values.row(i).to_vec();
            let fine = refine_periodic(&row, ROW_REFINEMENT, &mut planner);
            let x = xg.point(i);
            for (acc, &z) in out.iter_mut().zip(&z_points) {
                let p = (z - a * x) / b;
                *acc = *acc + cubic_at(&fine, pg.position(p) * factor);
            }
        }
        out.iter_mut().for_each(|v| *v = *v * weight);
    }
    // the quadrature is not exactly conservative for rough inputs
    let raw = z_grid.dx() * out.iter().copied().sum::<T>();
    if !(raw.abs().f64() > 1e-12) {
        return Err(Error::Degenerate(format!("image has vanishing mass {raw}")));
    }
    let scale = w.total_mass() / raw;
    SignedDensity1D::new(z_grid, out.into_iter().map(|v| v * scale).collect())
}

/// `int |a(z) - b(z)| dz`, evaluated on the nodes of `a` with `b`
/// interpolated cubically, plus the mass of `b` lying outside the span of `a`.
pub fn l1_distance<T: Real>(a: &SignedDensity1D<T>, b: &SignedDensity1D<T>) -> T {
    let ga = a.grid();
    let inside: T = ga
        .points()
        .zip(a.values())
        .map(|(z, &v)| (v - b.value_at(z)).abs())
        .sum::<T>()
        * ga.dx();
    let half = ga.dx() / T::of(2.0);
    let (lo, hi) = (ga.x_min() - half, ga.last() + half);
    let outside: T = b
        .grid()
        .points()
        .zip(b.values())
        .filter(|(z, _)| *z < lo || *z > hi)
        .map(|(_, v)| v.abs())
        .sum::<T>()
        * b.grid().dx();
    inside + outside
}
