//! Sequential measurement-testing games.
//!
//! Four players take turns each round. The Experimenter prepares a state and
//! picks an observable `z = a x + b p`, a forecaster announces what the theory
//! predicts, Skeptic stakes a bet `f_n` with unit expected payoff under the
//! forecast, and Reality reveals the outcome `r_n`. Skeptic's capital follows
//! `K_n = K_{n-1} f_n(r_n)` with `K_0 = 1`.
//!
//! In [`run_protocol1`] the forecaster sees the observable and announces a
//! probability density for it. In [`run_protocol2`] the forecaster commits to
//! a phase-space quasiprobability density before the observable is chosen;
//! the engine derives the forecast for `z` itself.
//!
//! Everything here is `f64`.

mod bet;
mod engine;
mod lab;
mod montecarlo;
mod strategies;
mod transcript;

pub use bet::{median_bet, validate_bet, Bet, BetViolation, Statistic, BET_INTEGRAL_TOL};
pub use engine::{run_protocol1, run_protocol2, RunSeed};
pub use lab::{commitment_hash, density_hash, Lab};
pub use montecarlo::{run_many, run_rng};
pub use strategies::{
    ArgmaxReality, Bound, ClaimForecaster, ExperimenterSpec, FaithfulReality, ForecasterSpec,
    LlnSkeptic, MedianSkeptic, ProtocolSetup, RealitySpec, Schedule, ShiftedReality, SkepticSpec,
    UnitSkeptic, WignerForecaster,
};
pub use transcript::{discrepancy_statistic, Round, Summary, Transcript};

use std::sync::Arc;

use crate::error::Result;
use crate::quadrature::QuadratureSpec;
use crate::state::Fixture;
use crate::{ProbabilityDensity1D, SignedDensity2D, WaveFunction};

/// The state prepared for a round.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub fixture: Fixture,
    pub psi: Arc<WaveFunction>,
}

pub trait Experimenter {
    fn prepare(&mut self, round: usize) -> Result<Fixture>;
    fn choose_observable(&mut self, round: usize) -> Result<QuadratureSpec>;
}

/// Announces the distribution of the observable (protocol 1).
pub trait Forecaster {
    fn forecast(
        &mut self,
        round: usize,
        state: &Prepared,
        quad: QuadratureSpec,
    ) -> Result<Arc<ProbabilityDensity1D>>;
}

/// Announces a phase-space density without knowing the observable
/// (protocol 2).
pub trait QuasiForecaster {
    fn forecast(&mut self, round: usize, state: &Prepared) -> Result<Arc<SignedDensity2D>>;
}

pub trait Skeptic {
    fn bet(&mut self, round: usize, forecast: &ProbabilityDensity1D) -> Result<Bet>;
    /// Called once the outcome is known.
    fn settle(&mut self, r: f64);
}

/// What Reality sees before answering.
pub struct RealityView<'a> {
    pub round: usize,
    pub state: &'a Prepared,
    pub quad: QuadratureSpec,
    pub forecast: &'a ProbabilityDensity1D,
    pub bet: &'a Bet,
}

pub trait Reality {
    fn outcome(&mut self, view: &RealityView<'_>, rng: &mut dyn rand::RngCore) -> Result<f64>;
}
