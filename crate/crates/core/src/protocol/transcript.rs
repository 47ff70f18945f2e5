use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bet::{Bet, Statistic};
use crate::error::{Error, Result};
use crate::state::Fixture;
use crate::{ProbabilityDensity1D, SignedDensity2D};

/// Largest allowed gap between the two routes to a protocol-2 forecast mean.
const ROUTE_AGREEMENT: f64 = 1e-5;

/// JSON has no infinities; a bankrupt capital is written as `"-inf"`.
mod log_capital {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::NEG_INFINITY {
            "-inf".serialize(s)
        } else {
            v.serialize(s)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("bad log capital {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Round {
    pub n: usize,
    pub state_spec: Fixture,
    pub forecast_hash: String,
    pub a: f64,
    pub b: f64,
    pub bet_descriptor: Bet,
    pub r: f64,
    #[serde(with = "log_capital")]
    pub log_capital: f64,
    /// Reality's answer fell outside the forecast's support and was clipped.
    pub clipped: bool,
    /// Order stamps: the forecast commitment and the observable announcement.
    pub commit_seq: u64,
    pub quad_seq: u64,
    #[serde(skip)]
    pub forecast: Option<Arc<ProbabilityDensity1D>>,
    #[serde(skip)]
    pub quasi_forecast: Option<Arc<SignedDensity2D>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub protocol: u8,
    pub seed: u64,
    pub stream: u64,
    pub config: serde_json::Value,
    pub rounds: Vec<Round>,
    /// Round in which the protocol-2 forecast failed to yield a probability
    /// density; the run stops there.
    pub forfeited_by_forecaster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub protocol: u8,
    pub rounds: usize,
    #[serde(with = "log_capital")]
    pub final_log_capital: f64,
    #[serde(with = "log_capital")]
    pub max_log_capital: f64,
    pub clipped_rounds: usize,
    pub forfeited_by_forecaster: Option<usize>,
    pub seed: u64,
    pub stream: u64,
    pub config: serde_json::Value,
}

impl Transcript {
    /// `log K_N`; zero for an empty transcript.
    pub fn final_log_capital(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.log_capital)
    }

    /// `log sup_n K_n`, including `K_0 = 1`.
    pub fn max_log_capital(&self) -> f64 {
        self.rounds.iter().map(|r| r.log_capital).fold(0.0, f64::max)
    }

    pub fn log_capitals(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.log_capital).collect()
    }

    pub fn summary(&self) -> Summary {
        Summary {
            protocol: self.protocol,
            rounds: self.rounds.len(),
            final_log_capital: self.final_log_capital(),
            max_log_capital: self.max_log_capital(),
            clipped_rounds: self.rounds.iter().filter(|r| r.clipped).count(),
            forfeited_by_forecaster: self.forfeited_by_forecaster,
            seed: self.seed,
            stream: self.stream,
            config: self.config.clone(),
        }
    }

    /// One JSON object per round.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> Result<()> {
        for r in &self.rounds {
            serde_json::to_writer(&mut *out, r).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(text: &str) -> Result<Vec<Round>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Io(e.to_string())))
            .collect()
    }

    /// Checks `K_0 = 1`, `log K_n - log K_{n-1} = log f_n(r_n)` bit for bit,
    /// and the commitment ordering of protocol 2.
    pub fn check(&self) -> Result<()> {
        let mut log_k = 0.0;
        for (i, r) in self.rounds.iter().enumerate() {
            if r.n != i + 1 {
                return Err(Error::Invariant(format!("round {} recorded as {}", i + 1, r.n)));
            }
            log_k += r.bet_descriptor.eval(r.r).ln();
            if log_k.to_bits() != r.log_capital.to_bits() {
                return Err(Error::Invariant(format!(
                    "round {}: log capital {} does not follow from the bet ({log_k})",
                    r.n, r.log_capital
                )));
            }
            if self.protocol == 2 && r.commit_seq >= r.quad_seq {
                return Err(Error::Invariant(format!(
                    "round {}: forecast committed after the observable was announced",
                    r.n
                )));
            }
        }
        Ok(())
    }
}

/// `D_N = (1/N) sum_{n <= N} (F(r_n) - E_n F)` for `N = 1..`, where `E_n F`
/// is the forecast mean of `F`.
///
/// For protocol 2 the forecast mean is also computed as the phase-space
/// integral of `F(a x + b p) W(x, p)`; the two must agree to within `1e-5`.
/// Needs the in-memory forecasts, which transcripts read back from disk lack.
pub fn discrepancy_statistic(t: &Transcript, f: Statistic) -> Result<Vec<f64>> {
    let mut means: HashMap<(String, u64, u64), f64> = HashMap::new();
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(t.rounds.len());
    for r in &t.rounds {
        let key = (r.forecast_hash.clone(), r.a.to_bits(), r.b.to_bits());
        let mean = match means.get(&key) {
            Some(&m) => m,
            None => {
                let mu = r.forecast.as_ref().ok_or_else(|| {
                    Error::Argument(format!("round {} has no forecast attached", r.n))
                })?;
                let m = mu.expectation(|z| f.apply(z));
                if t.protocol == 2 {
                    let w = r.quasi_forecast.as_ref().ok_or_else(|| {
                        Error::Argument(format!("round {} has no phase-space forecast", r.n))
                    })?;
                    let m2 = w.expectation_linear(r.a, r.b, |z| f.apply(z));
                    if !((m - m2).abs() < ROUTE_AGREEMENT) {
                        return Err(Error::NumericalIntegrity {
                            residue: (m - m2).abs(),
                            limit: ROUTE_AGREEMENT,
                        });
                    }
                }
                means.insert(key, m);
                m
            }
        };
        sum += f.apply(r.r) - mean;
        out.push(sum / out.len().saturating_add(1) as f64);
    }
    Ok(out)
}
