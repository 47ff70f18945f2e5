//! Skeptic's bets: nonnegative functions of the outcome with unit expectation
//! under the forecast.

use serde::{Deserialize, Serialize};

use crate::ProbabilityDensity1D;

/// Default tolerance on `|int f dmu - 1|`.
pub const BET_INTEGRAL_TOL: f64 = 1e-6;

/// Real statistic `F` of the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `F(z) = z`
    Identity,
    /// `F(z) = z^2`
    Square,
}

impl Statistic {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Statistic::Identity => z,
            Statistic::Square => z * z,
        }
    }

    /// Smallest and largest value of `F` on `[lo, hi]`.
    pub fn range(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Statistic::Identity => (lo, hi),
            Statistic::Square => {
                let top = (lo * lo).max(hi * hi);
                if lo <= 0.0 && hi >= 0.0 {
                    (0.0, top)
                } else {
                    ((lo * lo).min(hi * hi), top)
                }
            }
        }
    }

    /// Largest `|F(z) - center|` over the reachable outcomes of `mu`.
    pub fn deviation_bound(&self, mu: &ProbabilityDensity1D, center: f64) -> f64 {
        let (lo, hi) = mu.support();
        let (f_lo, f_hi) = self.range(lo, hi);
        (center - f_lo).max(f_hi - center)
    }
}

impl std::str::FromStr for Statistic {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "identity" | "z" => Ok(Statistic::Identity),
            "square" | "z2" | "z^2" => Ok(Statistic::Square),
            _ => Err(crate::Error::Config(format!("unknown statistic {s:?}"))),
        }
    }
}

/// A bet `f_n`, evaluable at any outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bet {
    /// `f = 1`
    Unit,
    /// `f(r) = 1 + slope (F(r) - center)`
    Affine {
        statistic: Statistic,
        slope: f64,
        center: f64,
    },
    /// Piecewise linear through `(z_min + k dz, values[k])`, constant beyond
    /// the end nodes.
    Tabulated {
        z_min: f64,
        dz: f64,
        values: Vec<f64>,
    },
}

/// Why a bet is not admissible against a forecast.
#[derive(Debug, Clone, PartialEq)]
pub enum BetViolation {
    Negative { at: f64, value: f64 },
    Integral { integral: f64, tol: f64 },
    NotFinite,
}

impl std::fmt::Display for BetViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BetViolation::Negative { at, value } => {
                write!(f, "bet is negative ({value:.3e}) at z = {at:.6}")
            }
            BetViolation::Integral { integral, tol } => {
                write!(f, "bet integrates to {integral:.9} against the forecast (tolerance {tol:.0e})")
            }
            BetViolation::NotFinite => write!(f, "bet has non-finite parameters"),
        }
    }
}

impl Bet {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Bet::Unit => 1.0,
            Bet::Affine {
                statistic,
                slope,
                center,
            } => 1.0 + slope * (statistic.apply(r) - center),
            Bet::Tabulated { z_min, dz, values } => {
                let u = (r - z_min) / dz;
                if u <= 0.0 {
                    return values[0];
                }
                let last = values.len() - 1;
                if u >= last as f64 {
                    return values[last];
                }
                let k = u.floor() as usize;
                let t = u - k as f64;
                values[k] * (1.0 - t) + values[k + 1] * t
            }
        }
    }

    /// `int f dmu` as a Riemann sum over the forecast's nodes.
    pub fn integral(&self, mu: &ProbabilityDensity1D) -> f64 {
        match self {
            Bet::Unit => 1.0,
            Bet::Affine {
                statistic,
                slope,
                center,
            } => 1.0 + slope * (mu.expectation(|z| statistic.apply(z)) - center),
            Bet::Tabulated { .. } => mu.expectation(|z| self.eval(z)),
        }
    }

    /// Smallest value over the reachable outcomes of `mu`, with its location.
    fn minimum(&self, mu: &ProbabilityDensity1D) -> (f64, f64) {
        let (lo, hi) = mu.support();
        match self {
            Bet::Unit => (lo, 1.0),
            Bet::Affine {
                statistic, slope, ..
            } => {
                // f is monotone in F, so the minimum sits where F is extreme
                let (f_lo, f_hi) = statistic.range(lo, hi);
                let target = if *slope >= 0.0 { f_lo } else { f_hi };
                let at = match statistic {
                    Statistic::Identity => target,
                    Statistic::Square if target == 0.0 => 0.0,
                    Statistic::Square if lo * lo == target => lo,
                    Statistic::Square => hi,
                };
                (at, self.eval(at))
            }
            // piecewise linear: extremes sit on its own nodes or the ends
            Bet::Tabulated { z_min, dz, values } => (0..values.len())
                .map(|k| z_min + k as f64 * dz)
                .filter(|z| (lo..=hi).contains(z))
                .chain([lo, hi])
                .map(|z| (z, self.eval(z)))
                .fold((lo, f64::INFINITY), |acc, (z, v)| if v < acc.1 { (z, v) } else { acc }),
        }
    }

    /// Outcome on the forecast grid where the bet pays most (first such node).
    pub fn argmax(&self, mu: &ProbabilityDensity1D) -> f64 {
        mu.grid()
            .points()
            .fold((0.0, f64::NEG_INFINITY), |acc, z| {
                let v = self.eval(z);
                if v > acc.1 {
                    (z, v)
                } else {
                    acc
                }
            })
            .0
    }

    fn is_finite(&self) -> bool {
        match self {
            Bet::Unit => true,
            Bet::Affine { slope, center, .. } => slope.is_finite() && center.is_finite(),
            Bet::Tabulated { z_min, dz, values } => {
                z_min.is_finite()
                    && dz.is_finite()
                    && *dz > 0.0
                    && !values.is_empty()
                    && values.iter().all(|v| v.is_finite())
            }
        }
    }
}

/// Checks that `f >= 0` wherever the outcome can land and that
/// `|int f dmu - 1| <= tol`.
pub fn validate_bet(f: &Bet, mu: &ProbabilityDensity1D, tol: f64) -> Result<(), BetViolation> {
    if !f.is_finite() {
        return Err(BetViolation::NotFinite);
    }
    let (at, value) = f.minimum(mu);
    if value < 0.0 {
        return Err(BetViolation::Negative { at, value });
    }
    let integral = f.integral(mu);
    if !((integral - 1.0).abs() <= tol) {
        return Err(BetViolation::Integral { integral, tol });
    }
    Ok(())
}

/// `2 * 1[r > median]`, with one transition node weighted so the integral
/// is exactly one.
pub fn median_bet(mu: &ProbabilityDensity1D) -> Bet {
    let grid = mu.grid();
    let dz = grid.dx();
    let mass: Vec<f64> = mu.values().iter().map(|v| v * dz).collect();
    let mut upper: f64 = mass.iter().sum::<f64>();
    let mut values = vec![2.0; mass.len()];
    for (k, &m) in mass.iter().enumerate() {
        upper -= m;
        // nodes above k carry 2 * upper; node k needs c with 2 upper + c m = 1
        if 2.0 * upper <= 1.0 {
            let c = if m > 0.0 { ((1.0 - 2.0 * upper) / m).clamp(0.0, 2.0) } else { 0.0 };
            values[k] = c;
            break;
        }
        values[k] = 0.0;
    }
    Bet::Tabulated {
        z_min: grid.x_min(),
        dz,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{fock_state, quadrature_distribution, Grid1D, QuadratureSpec};

    fn mu() -> ProbabilityDensity1D {
        let g = Grid1D::new(-12.0, 12.0, 1024).unwrap();
        let psi = fock_state(&g, 0, 1.0).unwrap();
        quadrature_distribution(&psi, QuadratureSpec::new(1.0, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn unit_bet_is_valid() {
        assert_eq!(validate_bet(&Bet::Unit, &mu(), BET_INTEGRAL_TOL), Ok(()));
    }

    #[test]
    fn median_bet_is_valid_and_pays_two() {
        let mu = mu();
        let bet = median_bet(&mu);
        assert_eq!(validate_bet(&bet, &mu, 1e-12), Ok(()));
        assert_eq!(bet.eval(bet.argmax(&mu)), 2.0);
        // oracle: median of a symmetric density is 0
        assert_eq!(bet.eval(-0.5), 0.0);
        assert_eq!(bet.eval(0.5), 2.0);
    }

    #[test]
    fn identity_bet_goes_negative() {
        let bet = Bet::Affine {
            statistic: Statistic::Identity,
            slope: 1.0,
            center: 1.0,
        };
        match validate_bet(&bet, &mu(), BET_INTEGRAL_TOL) {
            Err(BetViolation::Negative { value, .. }) => assert!(value < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_center_bet_has_wrong_integral() {
        let bet = Bet::Affine {
            statistic: Statistic::Square,
            slope: 0.01,
            center: 0.0,
        };
        assert!(matches!(
            validate_bet(&bet, &mu(), BET_INTEGRAL_TOL),
            Err(BetViolation::Integral { .. })
        ));
    }

    #[test]
    fn square_bet_checks_interior_minimum() {
        let g = Grid1D::new(-3.0, 3.0, 16).unwrap();
        let mu = ProbabilityDensity1D::from_values(g, vec![1.0 / 6.0; 16]).unwrap();
        let bet = Bet::Affine {
            statistic: Statistic::Square,
            slope: -1.0,
            center: 1e3,
        };
        let (at, _) = bet.minimum(&mu);
        assert!(at.abs() > 2.0);
        let bet = Bet::Affine {
            statistic: Statistic::Square,
            slope: 1.0,
            center: 1.0,
        };
        assert_eq!(bet.minimum(&mu), (0.0, 0.0));
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let bet = Bet::Tabulated {
            z_min: 0.0,
            dz: 1.0,
            values: vec![0.0, 2.0, 1.0],
        };
        assert_eq!(bet.eval(-5.0), 0.0);
        assert_eq!(bet.eval(0.25), 0.5);
        assert_eq!(bet.eval(1.5), 1.5);
        assert_eq!(bet.eval(9.0), 1.0);
    }

    #[test]
    fn statistic_ranges() {
        assert_eq!(Statistic::Square.range(-2.0, 1.0), (0.0, 4.0));
        assert_eq!(Statistic::Square.range(1.0, 3.0), (1.0, 9.0));
        assert_eq!(Statistic::Identity.range(-2.0, 1.0), (-2.0, 1.0));
    }
}
