use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bet::{median_bet, Bet, Statistic};
use super::engine::{run_protocol1, run_protocol2, RunSeed};
use super::lab::Lab;
use super::transcript::Transcript;
use super::{Experimenter, Forecaster, Prepared, QuasiForecaster, Reality, RealityView, Skeptic};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::state::Fixture;
use crate::{ProbabilityDensity1D, SignedDensity2D};

/// Cycles through `states` and `quads` independently: round `n` uses
/// `states[(n - 1) % len]` and `quads[(n - 1) % len]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub states: Vec<Fixture>,
    pub quads: Vec<QuadratureSpec>,
}

/// Experimenter behaviour is fully described by its schedule.
pub type ExperimenterSpec = Schedule;

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() || self.quads.is_empty() {
            return Err(Error::Config("schedule needs at least one state and one observable".into()));
        }
        self.quads.iter().try_for_each(QuadratureSpec::validate)
    }

    fn at<V: Copy>(items: &[V], round: usize) -> V {
        items[(round - 1) % items.len()]
    }

    /// Distinct `(state, observable)` pairs met in the first `rounds` rounds.
    pub fn pairs(&self, rounds: usize) -> Vec<(Fixture, QuadratureSpec)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for n in 1..=rounds {
            let (s, q) = (Self::at(&self.states, n), Self::at(&self.quads, n));
            if seen.insert((s.to_string(), q.a.to_bits(), q.b.to_bits())) {
                out.push((s, q));
            }
            if n >= self.states.len() * self.quads.len() {
                break;
            }
        }
        out
    }
}

impl Experimenter for Schedule {
    fn prepare(&mut self, round: usize) -> Result<Fixture> {
        Ok(Self::at(&self.states, round))
    }

    fn choose_observable(&mut self, round: usize) -> Result<QuadratureSpec> {
        Ok(Self::at(&self.quads, round))
    }
}

/// Announces the distribution for `claim`, or for the prepared state when
/// `claim` is `None`.
pub struct ClaimForecaster<'a> {
    pub lab: &'a Lab,
    pub claim: Option<Fixture>,
}

impl Forecaster for ClaimForecaster<'_> {
    fn forecast(
        &mut self,
        _round: usize,
        state: &Prepared,
        quad: QuadratureSpec,
    ) -> Result<Arc<ProbabilityDensity1D>> {
        self.lab.quadrature(&self.claim.unwrap_or(state.fixture), quad)
    }
}

/// Announces the Wigner function of `claim`, or of the prepared state when
/// `claim` is `None`.
pub struct WignerForecaster<'a> {
    pub lab: &'a Lab,
    pub claim: Option<Fixture>,
}

impl QuasiForecaster for WignerForecaster<'_> {
    fn forecast(&mut self, _round: usize, state: &Prepared) -> Result<Arc<SignedDensity2D>> {
        self.lab.wigner(&self.claim.unwrap_or(state.fixture))
    }
}

/// Never bets: `f = 1`.
pub struct UnitSkeptic;

impl Skeptic for UnitSkeptic {
    fn bet(&mut self, _round: usize, _forecast: &ProbabilityDensity1D) -> Result<Bet> {
        Ok(Bet::Unit)
    }

    fn settle(&mut self, _r: f64) {}
}

/// Doubles or loses everything on the outcome exceeding the median.
pub struct MedianSkeptic;

impl Skeptic for MedianSkeptic {
    fn bet(&mut self, _round: usize, forecast: &ProbabilityDensity1D) -> Result<Bet> {
        Ok(median_bet(forecast))
    }

    fn settle(&mut self, _r: f64) {}
}

/// Mixture of linear bets `1 + lambda (F(r) - E F)` over
/// `lambda = +-2^-k / C`, `k = 0..depth`, started with equal capital.
///
/// The announced bet is the capital-weighted average, so Skeptic's capital
/// is the average of the component capitals. Tracks component capitals in
/// log space.
#[derive(Debug, Clone)]
pub struct LlnSkeptic {
    statistic: Statistic,
    bound: f64,
    lambdas: Vec<f64>,
    log_caps: Vec<f64>,
    center: f64,
}

impl LlnSkeptic {
    pub fn new(statistic: Statistic, bound: f64, depth: usize) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Config(format!("bound must be positive, got {bound}")));
        }
        if depth == 0 {
            return Err(Error::Config("mixture depth must be at least 1".into()));
        }
        let lambdas: Vec<f64> = (0..depth)
            .flat_map(|k| {
                let l = 0.5f64.powi(k as i32) / bound;
                [l, -l]
            })
            .collect();
        Ok(Self {
            statistic,
            bound,
            log_caps: vec![0.0; lambdas.len()],
            lambdas,
            center: 0.0,
        })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    fn slope(&self) -> f64 {
        let top = self.log_caps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (num, den) = self
            .lambdas
            .iter()
            .zip(&self.log_caps)
            .fold((0.0, 0.0), |(num, den), (l, c)| {
                let w = (c - top).exp();
                (num + w * l, den + w)
            });
        num / den
    }
}

impl Skeptic for LlnSkeptic {
    fn bet(&mut self, _round: usize, forecast: &ProbabilityDensity1D) -> Result<Bet> {
        let f = self.statistic;
        let center = forecast.expectation(|z| f.apply(z));
        let excess = f.deviation_bound(forecast, center);
        if excess > self.bound {
            return Err(Error::BoundViolation {
                excess,
                bound: self.bound,
            });
        }
        self.center = center;
        Ok(Bet::Affine {
            statistic: f,
            slope: self.slope(),
            center,
        })
    }

    fn settle(&mut self, r: f64) {
        let d = self.statistic.apply(r) - self.center;
        for (c, l) in self.log_caps.iter_mut().zip(&self.lambdas) {
            *c += (1.0 + l * d).ln();
        }
    }
}

/// Samples the true distribution of the observable in the prepared state,
/// whatever was forecast.
pub struct FaithfulReality<'a> {
    pub lab: &'a Lab,
}

impl Reality for FaithfulReality<'_> {
    fn outcome(&mut self, view: &RealityView<'_>, rng: &mut dyn rand::RngCore) -> Result<f64> {
        Ok(self.lab.quadrature(&view.state.fixture, view.quad)?.sample(rng))
    }
}

/// Faithful sample plus a constant offset.
pub struct ShiftedReality<'a> {
    pub lab: &'a Lab,
    pub delta: f64,
}

impl Reality for ShiftedReality<'_> {
    fn outcome(&mut self, view: &RealityView<'_>, rng: &mut dyn rand::RngCore) -> Result<f64> {
        Ok(self.lab.quadrature(&view.state.fixture, view.quad)?.sample(rng) + self.delta)
    }
}

/// Answers wherever the bet pays most.
pub struct ArgmaxReality;

impl Reality for ArgmaxReality {
    fn outcome(&mut self, view: &RealityView<'_>, _rng: &mut dyn rand::RngCore) -> Result<f64> {
        Ok(view.bet.argmax(view.forecast))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForecasterSpec {
    Honest,
    Claim { state: Fixture },
}

/// Bound `C` for the mixture strategy: a number, or the smallest bound that
/// covers every forecast of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Auto,
    Fixed(f64),
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Auto => s.serialize_str("auto"),
            Bound::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Bound::Fixed(v)),
            Repr::Text(t) if t == "auto" => Ok(Bound::Auto),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "bound must be a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SkepticSpec {
    Unit,
    Median,
    Lln {
        statistic: Statistic,
        bound: Bound,
        depth: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RealitySpec {
    Faithful,
    Shifted { delta: f64 },
    Argmax,
}

/// Everything needed to replay a run, given a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSetup {
    pub protocol: u8,
    pub rounds: usize,
    pub experimenter: Schedule,
    pub forecaster: ForecasterSpec,
    pub skeptic: SkepticSpec,
    pub reality: RealitySpec,
}

impl ProtocolSetup {
    pub fn validate(&self) -> Result<()> {
        if self.protocol != 1 && self.protocol != 2 {
            return Err(Error::Config(format!("unknown protocol {}", self.protocol)));
        }
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if let SkepticSpec::Lln { bound, depth, .. } = self.skeptic {
            if depth == 0 {
                return Err(Error::Config("mixture depth must be at least 1".into()));
            }
            if let Bound::Fixed(c) = bound {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("bound must be positive, got {c}")));
                }
            }
        }
        if let RealitySpec::Shifted { delta } = self.reality {
            if !delta.is_finite() {
                return Err(Error::Config("shift must be finite".into()));
            }
        }
        self.experimenter.validate()
    }

    fn claim(&self) -> Option<Fixture> {
        match &self.forecaster {
            ForecasterSpec::Honest => None,
            ForecasterSpec::Claim { state } => Some(*state),
        }
    }

    /// The forecast the run will see for a given state and observable.
    pub fn forecast_for(&self, lab: &Lab, state: &Fixture, quad: QuadratureSpec) -> Result<Arc<ProbabilityDensity1D>> {
        let shown = self.claim().unwrap_or(*state);
        if self.protocol == 1 {
            lab.quadrature(&shown, quad)
        } else {
            lab.derive(&lab.wigner(&shown)?, quad)
        }
    }

    /// Largest `|F(z) - E F|` over all forecasts of the run.
    pub fn required_bound(&self, lab: &Lab, statistic: Statistic) -> Result<f64> {
        let mut c: f64 = 0.0;
        for (state, quad) in self.experimenter.pairs(self.rounds) {
            let mu = self.forecast_for(lab, &state, quad)?;
            let mean = mu.expectation(|z| statistic.apply(z));
            c = c.max(statistic.deviation_bound(&mu, mean));
        }
        Ok(c)
    }

    /// The mixture bound this setup resolves to, if Skeptic uses one.
    pub fn resolved_bound(&self, lab: &Lab) -> Result<Option<f64>> {
        match self.skeptic {
            SkepticSpec::Lln {
                bound: Bound::Fixed(c),
                ..
            } => Ok(Some(c)),
            SkepticSpec::Lln {
                bound: Bound::Auto,
                statistic,
                ..
            } => Ok(Some(self.required_bound(lab, statistic)?)),
            _ => Ok(None),
        }
    }

    pub fn run(&self, lab: &Lab, seed: RunSeed) -> Result<Transcript> {
        self.validate()?;
        let bound = self.resolved_bound(lab)?;
        self.run_with_bound(lab, seed, bound)
    }

    /// As [`run`](Self::run) with an already resolved mixture bound; lets
    /// Monte Carlo batches resolve it once.
    pub fn run_with_bound(&self, lab: &Lab, seed: RunSeed, bound: Option<f64>) -> Result<Transcript> {
        let mut experimenter = self.experimenter.clone();
        let mut skeptic: Box<dyn Skeptic> = match self.skeptic {
            SkepticSpec::Unit => Box::new(UnitSkeptic),
            SkepticSpec::Median => Box::new(MedianSkeptic),
            SkepticSpec::Lln {
                statistic, depth, ..
            } => {
                let c = bound.ok_or_else(|| Error::Argument("mixture bound not resolved".into()))?;
                Box::new(LlnSkeptic::new(statistic, c, depth)?)
            }
        };
        let mut reality: Box<dyn Reality + '_> = match self.reality {
            RealitySpec::Faithful => Box::new(FaithfulReality { lab }),
            RealitySpec::Shifted { delta } => Box::new(ShiftedReality { lab, delta }),
            RealitySpec::Argmax => Box::new(ArgmaxReality),
        };
        let claim = self.claim();
        let mut t = if self.protocol == 1 {
            let mut f = ClaimForecaster { lab, claim };
            run_protocol1(lab, &mut experimenter, &mut f, &mut *skeptic, &mut *reality, self.rounds, seed)?
        } else {
            let mut f = WignerForecaster { lab, claim };
            run_protocol2(lab, &mut experimenter, &mut f, &mut *skeptic, &mut *reality, self.rounds, seed)?
        };
        t.config = serde_json::to_value(self).map_err(|e| Error::Io(e.to_string()))?;
        Ok(t)
    }
}
