//! Replayable randomness and the renewal structure of catastrophe times.
//!
//! Every random quantity of the model is a pure function of
//! `(seed, replica, lane, index)`: a ChaCha8 keystream is keyed by the seed,
//! the 64-bit stream id selects `(replica, lane)` and the word position
//! selects the index. Two processes fed from the same [`EnvStream`] therefore
//! see identical catastrophe bits and identical uniforms, whatever order they
//! query them in and whichever thread they run on.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_open_unit, Error, Result};

/// Name of the generator recorded in run manifests.
pub const GENERATOR_NAME: &str = "chacha8-counter/v1 (rand_chacha 0.9; stream = 4*replica + lane, word = 2*index)";

const LANE_BERNOULLI: u64 = 0;
const LANE_UNIFORM: u64 = 1;
const LANE_AUX: u64 = 2;
const LANES: u64 = 4;

/// Bits of the uniform index reserved for the site.
const SITE_BITS: u32 = 32;
/// Largest time the uniform lane can address (word positions are 68 bits).
pub const MAX_UNIFORM_TIME: u64 = (1 << 34) - 1;
const AUX_LANE_SHIFT: u32 = 40;

/// Maps 64 random bits to `(k + 1/2) / 2^52`, which never rounds to 0 or 1.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((bits >> 12) as f64 + 0.5) * SCALE
}

/// Model parameters shared by a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Probability of a normal (non-catastrophe) step.
    pub p: f64,
    /// Number of sites.
    pub n: usize,
    /// Horizon.
    pub t_max: u64,
    pub seed: u64,
}

impl Params {
    pub fn new(p: f64, n: usize, t_max: u64, seed: u64) -> Result<Self> {
        check_open_unit("p", p)?;
        if n == 0 {
            return Err(Error::invalid("n", n, "site count must be at least 1"));
        }
        Ok(Params { p, n, t_max, seed })
    }

    pub fn stream(&self) -> EnvStream {
        EnvStream::new(self.seed, self.p).expect("p validated on construction")
    }
}

/// Seed-addressable source of the catastrophe bits `B_t` and uniforms `U_t(site)`.
#[derive(Clone)]
pub struct EnvStream {
    seed: u64,
    p: f64,
    replica: u64,
    base: ChaCha8Rng,
}

impl std::fmt::Debug for EnvStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvStream")
            .field("seed", &self.seed)
            .field("p", &self.p)
            .field("replica", &self.replica)
            .finish()
    }
}

impl EnvStream {
    pub fn new(seed: u64, p: f64) -> Result<Self> {
        check_open_unit("p", p)?;
        Ok(EnvStream {
            seed,
            p,
            replica: 0,
            base: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn replica_index(&self) -> u64 {
        self.replica
    }

    /// Independent stream sharing this seed, addressed by replica index.
    pub fn replica(&self, index: u64) -> EnvStream {
        assert!(index < u64::MAX / LANES, "replica index {index} out of range");
        EnvStream {
            replica: index,
            ..self.clone()
        }
    }

    /// Same seed and replica with a different normal-step probability.
    pub fn with_p(&self, p: f64) -> Result<EnvStream> {
        check_open_unit("p", p)?;
        Ok(EnvStream { p, ..self.clone() })
    }

    fn rng_at(&self, lane: u64, word: u128) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(self.replica * LANES + lane);
        rng.set_word_pos(word);
        rng
    }

    /// Catastrophe indicator `B_t`: `true` (normal step) with probability `p`.
    ///
    /// # Panics
    /// If `t == 0`; the bits are indexed from 1.
    pub fn bernoulli_at(&self, t: u64) -> bool {
        assert!(t >= 1, "B_t is indexed from t = 1");
        let mut rng = self.rng_at(LANE_BERNOULLI, 2 * t as u128);
        open_unit(rng.next_u64()) < self.p
    }

    /// `B_1, ..., B_{t_max}` in one pass. Agrees with [`Self::bernoulli_at`].
    pub fn bernoulli_bits(&self, t_max: u64) -> Vec<bool> {
        if t_max == 0 {
            return Vec::new();
        }
        let mut rng = self.rng_at(LANE_BERNOULLI, 2);
        (0..t_max).map(|_| open_unit(rng.next_u64()) < self.p).collect()
    }

    /// Uniform `U_t(site)` on the open interval `(0,1)`.
    ///
    /// # Panics
    /// If `t == 0` or `site == 0`.
    pub fn uniform_at(&self, t: u64, site: u64) -> f64 {
        assert!(t >= 1, "U_t is indexed from t = 1");
        assert!(site >= 1, "sites are indexed from 1");
        self.uniform_raw(t, site)
    }

    fn uniform_raw(&self, t: u64, site: u64) -> f64 {
        let mut rng = self.rng_at(LANE_UNIFORM, uniform_word(t, site));
        open_unit(rng.next_u64())
    }

    /// Fills `out[i]` with `U_t(i + 1)`. Row `t = 0` is the dedicated
    /// sub-stream used for i.i.d. uniform initial configurations.
    pub fn fill_uniform_row(&self, t: u64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        // sites of one row occupy consecutive words
        let _ = uniform_word(t, out.len() as u64);
        let mut rng = self.rng_at(LANE_UNIFORM, uniform_word(t, 1));
        for slot in out.iter_mut() {
            *slot = open_unit(rng.next_u64());
        }
    }

    /// The `t = 0` uniform for `site`, used to draw i.i.d. initial fields.
    pub fn initial_uniform(&self, site: u64) -> f64 {
        assert!(site >= 1, "sites are indexed from 1");
        self.uniform_raw(0, site)
    }

    /// Auxiliary sequential generator, disjoint from the `B` and `U` lanes.
    /// Different `lane` values give non-overlapping sequences.
    pub fn aux_rng(&self, lane: u64) -> ChaCha8Rng {
        assert!(lane < 1 << (68 - AUX_LANE_SHIFT), "aux lane {lane} out of range");
        self.rng_at(LANE_AUX, (lane as u128) << AUX_LANE_SHIFT)
    }

    /// Runs `f` on replicas `0..count` in parallel; results are in replica order.
    pub fn replicas<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(EnvStream) -> T + Sync + Send,
    {
        (0..count)
            .into_par_iter()
            .map(|r| f(self.replica(r)))
            .collect()
    }
}

fn uniform_word(t: u64, site: u64) -> u128 {
    assert!(t <= MAX_UNIFORM_TIME, "time {t} beyond the uniform lane");
    assert!((1..=1 << SITE_BITS).contains(&site), "site {site} out of range");
    let index = ((t as u128) << SITE_BITS) | (site - 1) as u128;
    2 * index
}

/// Catastrophe times `T_1 < T_2 < ...` up to a horizon, with `T_0 = 0` implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewalTrace {
    horizon: u64,
    times: Vec<u64>,
}

impl RenewalTrace {
    /// Trace of the bits `B_1, ..., B_len`; a `false` bit is a catastrophe.
    pub fn from_bits(bits: &[bool]) -> Self {
        let times = bits
            .iter()
            .zip(1u64..)
            .filter(|(&b, _)| !b)
            .map(|(_, s)| s)
            .collect();
        RenewalTrace {
            horizon: bits.len() as u64,
            times,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    pub fn first_catastrophe(&self) -> Option<u64> {
        self.times.first().copied()
    }

    fn check(&self, t: u64) -> Result<()> {
        if t > self.horizon {
            Err(Error::BeyondHorizon {
                t,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    /// `N(t)`, the number of catastrophes in `[1, t]`.
    pub fn count(&self, t: u64) -> Result<u64> {
        self.check(t)?;
        Ok(self.times.partition_point(|&s| s <= t) as u64)
    }

    /// `T_{N(t)}`, the last catastrophe time at or before `t` (0 if none).
    pub fn last_catastrophe(&self, t: u64) -> Result<u64> {
        let k = self.count(t)? as usize;
        Ok(if k == 0 { 0 } else { self.times[k - 1] })
    }

    /// `t + 1 - T_{N(t)}`, in `1..=t+1`.
    pub fn age(&self, t: u64) -> Result<u64> {
        Ok(t + 1 - self.last_catastrophe(t)?)
    }
}

/// All catastrophe times of `stream` in `[1, t_max]`.
pub fn build_trace(stream: &EnvStream, t_max: u64) -> RenewalTrace {
    RenewalTrace::from_bits(&stream.bernoulli_bits(t_max))
}

/// Law of the age at time `t`: `(1-p) p^(k-1)` for `k <= t`, `p^t` for `k = t+1`.
pub fn pmf_age(k: u64, p: f64, t: u64) -> Result<f64> {
    if k == 0 || k > t + 1 {
        return Err(Error::Domain(format!(
            "age {k} outside 1..={} at t = {t}",
            t + 1
        )));
    }
    Ok(if k <= t {
        (1.0 - p) * powu(p, k - 1)
    } else {
        powu(p, t)
    })
}

pub(crate) fn powu(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(n as f64),
    }
}
