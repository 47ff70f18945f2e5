use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::{quadrature_distribution, QuadratureSpec};
use crate::quasi::{pushforward_linear, DEFAULT_NEGATIVITY_TOL};
use crate::state::Fixture;
use crate::wigner::wigner;
use crate::{Grid1D, ProbabilityDensity1D, SignedDensity2D, WaveFunction};

type QuadKey = (String, u64, u64);

/// Shared, thread-safe cache of everything derived from fixtures on one grid.
///
/// All cached values are pure functions of their keys, so sharing a lab
/// between runs never changes results.
#[derive(Debug)]
pub struct Lab {
    grid: Grid1D,
    hbar: f64,
    states: Mutex<HashMap<String, Arc<WaveFunction>>>,
    quads: Mutex<HashMap<QuadKey, Arc<ProbabilityDensity1D>>>,
    wigners: Mutex<HashMap<String, Arc<SignedDensity2D>>>,
    commitments: Mutex<HashMap<usize, (Arc<SignedDensity2D>, String)>>,
    commitments1d: Mutex<HashMap<usize, (Arc<ProbabilityDensity1D>, String)>>,
    derived: Mutex<HashMap<QuadKey, Arc<ProbabilityDensity1D>>>,
}

fn key(name: String, quad: QuadratureSpec) -> QuadKey {
    (name, quad.a.to_bits(), quad.b.to_bits())
}

fn cached<K, V, F>(map: &Mutex<HashMap<K, Arc<V>>>, k: K, make: F) -> Result<Arc<V>>
where
    K: std::hash::Hash + Eq,
    F: FnOnce() -> Result<V>,
{
    if let Some(v) = map.lock().unwrap().get(&k) {
        return Ok(v.clone());
    }
    let v = Arc::new(make()?);
    Ok(map.lock().unwrap().entry(k).or_insert(v).clone())
}

/// Keyed by address; the stored `Arc` keeps the address from being reused.
fn hash_once<V>(map: &Mutex<HashMap<usize, (Arc<V>, String)>>, v: &Arc<V>, hash: fn(&V) -> String) -> String {
    let addr = Arc::as_ptr(v) as usize;
    if let Some((_, h)) = map.lock().unwrap().get(&addr) {
        return h.clone();
    }
    let h = hash(v);
    map.lock().unwrap().entry(addr).or_insert((v.clone(), h)).1.clone()
}

impl Lab {
    pub fn new(grid: Grid1D, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Config(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            grid,
            hbar,
            states: Mutex::default(),
            quads: Mutex::default(),
            wigners: Mutex::default(),
            commitments: Mutex::default(),
            commitments1d: Mutex::default(),
            derived: Mutex::default(),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn state(&self, fixture: &Fixture) -> Result<Arc<WaveFunction>> {
        cached(&self.states, fixture.to_string(), || {
            fixture.build(&self.grid, self.hbar)
        })
    }

    /// Distribution of `quad` in the fixture's state, by the spectral route.
    pub fn quadrature(&self, fixture: &Fixture, quad: QuadratureSpec) -> Result<Arc<ProbabilityDensity1D>> {
        cached(&self.quads, key(fixture.to_string(), quad), || {
            quadrature_distribution(&*self.state(fixture)?, quad)
        })
    }

    pub fn wigner(&self, fixture: &Fixture) -> Result<Arc<SignedDensity2D>> {
        cached(&self.wigners, fixture.to_string(), || {
            wigner(&*self.state(fixture)?)
        })
    }

    /// Commitment hash of a phase-space forecast, computed once per allocation.
    pub fn commit(&self, w: &Arc<SignedDensity2D>) -> String {
        hash_once(&self.commitments, w, commitment_hash)
    }

    /// Hash of a one-dimensional forecast, computed once per allocation.
    pub fn commit1d(&self, mu: &Arc<ProbabilityDensity1D>) -> String {
        hash_once(&self.commitments1d, mu, density_hash)
    }

    /// `to_probability(pushforward_linear(w, a, b))`, memoized by the
    /// commitment hash of `w`.
    pub fn derive(&self, w: &Arc<SignedDensity2D>, quad: QuadratureSpec) -> Result<Arc<ProbabilityDensity1D>> {
        let hash = self.commit(w);
        cached(&self.derived, key(hash, quad), || {
            let image = pushforward_linear(&**w, quad.a, quad.b)?;
            Ok(image.to_probability(DEFAULT_NEGATIVITY_TOL)?.0)
        })
    }
}

/// SHA-256 over both grids and all values, little-endian, as hex.
pub fn commitment_hash(w: &SignedDensity2D) -> String {
    let mut h = Sha256::new();
    for g in [w.x_grid(), w.p_grid()] {
        h.update(g.x_min().to_le_bytes());
        h.update(g.x_max().to_le_bytes());
        h.update((g.len() as u64).to_le_bytes());
    }
    for v in w.values().iter() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// SHA-256 of a one-dimensional forecast.
pub fn density_hash(mu: &ProbabilityDensity1D) -> String {
    let mut h = Sha256::new();
    let g = mu.grid();
    h.update(g.x_min().to_le_bytes());
    h.update(g.x_max().to_le_bytes());
    h.update((g.len() as u64).to_le_bytes());
    for v in mu.values() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}
