use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bet::{validate_bet, BET_INTEGRAL_TOL};
use super::lab::Lab;
use super::transcript::{Round, Transcript};
use super::{Experimenter, Forecaster, Prepared, QuasiForecaster, Reality, RealityView, Skeptic};
use crate::error::{Error, Result};
use crate::ProbabilityDensity1D;

/// Seed plus ChaCha stream; distinct streams give independent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RunSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn blame(player: &'static str, round: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::ProtocolViolation { .. } => e,
        other => Error::ProtocolViolation {
            player,
            round,
            reason: other.to_string(),
        },
    }
}

/// Monotone stamps for ordering moves within a run.
#[derive(Default)]
struct Clock(u64);

impl Clock {
    fn tick(&mut self) -> u64 {
        self.0 += 1;
        self.0
    }
}

/// Steps 3 to 5, shared by both protocols: bet, outcome, capital update.
#[allow(clippy::too_many_arguments)]
fn settle_round(
    n: usize,
    state: &Prepared,
    quad: crate::QuadratureSpec,
    forecast: &ProbabilityDensity1D,
    skeptic: &mut dyn Skeptic,
    reality: &mut dyn Reality,
    rng: &mut ChaCha8Rng,
    log_k: &mut f64,
) -> Result<(crate::protocol::Bet, f64, bool)> {
    let bet = skeptic.bet(n, forecast).map_err(blame("Skeptic", n))?;
    validate_bet(&bet, forecast, BET_INTEGRAL_TOL).map_err(|v| Error::ProtocolViolation {
        player: "Skeptic",
        round: n,
        reason: v.to_string(),
    })?;
    let view = RealityView {
        round: n,
        state,
        quad,
        forecast,
        bet: &bet,
    };
    let raw = reality.outcome(&view, rng).map_err(blame("Reality", n))?;
    if !raw.is_finite() {
        return Err(Error::ProtocolViolation {
            player: "Reality",
            round: n,
            reason: format!("outcome {raw} is not finite"),
        });
    }
    let (lo, hi) = forecast.support();
    let r = raw.clamp(lo, hi);
    *log_k += bet.eval(r).ln();
    skeptic.settle(r);
    Ok((bet, r, r != raw))
}

fn empty(protocol: u8, seed: RunSeed) -> Transcript {
    Transcript {
        protocol,
        seed: seed.seed,
        stream: seed.stream,
        config: serde_json::Value::Null,
        rounds: Vec::new(),
        forfeited_by_forecaster: None,
    }
}

/// Quantum measurement protocol: each round the Experimenter announces a
/// state and an observable, the forecaster its distribution, Skeptic a bet
/// against it, and Reality the outcome.
pub fn run_protocol1(
    lab: &Lab,
    experimenter: &mut dyn Experimenter,
    forecaster: &mut dyn Forecaster,
    skeptic: &mut dyn Skeptic,
    reality: &mut dyn Reality,
    rounds: usize,
    seed: RunSeed,
) -> Result<Transcript> {
    if rounds == 0 {
        return Err(Error::Argument("a run needs at least one round".into()));
    }
    let mut rng = seed.rng();
    let mut clock = Clock::default();
    let mut t = empty(1, seed);
    let mut log_k = 0.0;
    for n in 1..=rounds {
        let fixture = experimenter.prepare(n).map_err(blame("Experimenter", n))?;
        let quad = experimenter
            .choose_observable(n)
            .and_then(|q| q.validate().map(|_| q))
            .map_err(blame("Experimenter", n))?;
        let quad_seq = clock.tick();
        let state = Prepared {
            fixture,
            psi: lab.state(&fixture).map_err(blame("Experimenter", n))?,
        };
        let mu = forecaster
            .forecast(n, &state, quad)
            .map_err(blame("Forecaster", n))?;
        let commit_seq = clock.tick();
        let forecast_hash = lab.commit1d(&mu);
        let (bet, r, clipped) =
            settle_round(n, &state, quad, &mu, skeptic, reality, &mut rng, &mut log_k)?;
        t.rounds.push(Round {
            n,
            state_spec: fixture,
            forecast_hash,
            a: quad.a,
            b: quad.b,
            bet_descriptor: bet,
            r,
            log_capital: log_k,
            clipped,
            commit_seq,
            quad_seq,
            forecast: Some(mu),
            quasi_forecast: None,
        });
    }
    Ok(t)
}

/// Wigner-style protocol: the forecaster commits to a phase-space density
/// before the observable is chosen, and Skeptic bets against its image
/// under `(x, p) -> a x + b p`.
///
/// If an image fails to be a probability density the forecaster forfeits:
/// the round is recorded in `forfeited_by_forecaster` and the run stops.
pub fn run_protocol2(
    lab: &Lab,
    experimenter: &mut dyn Experimenter,
    forecaster: &mut dyn QuasiForecaster,
    skeptic: &mut dyn Skeptic,
    reality: &mut dyn Reality,
    rounds: usize,
    seed: RunSeed,
) -> Result<Transcript> {
    if rounds == 0 {
        return Err(Error::Argument("a run needs at least one round".into()));
    }
    let mut rng = seed.rng();
    let mut clock = Clock::default();
    let mut t = empty(2, seed);
    let mut log_k = 0.0;
    for n in 1..=rounds {
        let fixture = experimenter.prepare(n).map_err(blame("Experimenter", n))?;
        let state = Prepared {
            fixture,
            psi: lab.state(&fixture).map_err(blame("Experimenter", n))?,
        };
        let w = forecaster.forecast(n, &state).map_err(blame("Forecaster", n))?;
        let forecast_hash = lab.commit(&w);
        let commit_seq = clock.tick();
        let quad = experimenter
            .choose_observable(n)
            .and_then(|q| q.validate().map(|_| q))
            .map_err(blame("Experimenter", n))?;
        let quad_seq = clock.tick();
        if lab.commit(&w) != forecast_hash {
            return Err(Error::Invariant(format!(
                "round {n}: forecast changed between commitment and derivation"
            )));
        }
        let mu = match lab.derive(&w, quad) {
            Ok(mu) => mu,
            Err(Error::Negativity { .. }) => {
                t.forfeited_by_forecaster = Some(n);
                break;
            }
            Err(e) => return Err(e),
        };
        let (bet, r, clipped) =
            settle_round(n, &state, quad, &mu, skeptic, reality, &mut rng, &mut log_k)?;
        t.rounds.push(Round {
            n,
            state_spec: fixture,
            forecast_hash,
            a: quad.a,
            b: quad.b,
            bet_descriptor: bet,
            r,
            log_capital: log_k,
            clipped,
            commit_seq,
            quad_seq,
            forecast: Some(mu),
            quasi_forecast: Some(w),
        });
    }
    Ok(t)
}
