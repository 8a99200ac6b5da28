//! Mixing chains `Θ_t(u)`.
//!
//! For a fixed level `u`, `Θ_t(u)` is the de Finetti mixing variable of the
//! indicators `1{η_t(n) <= u}`. Each model variant updates it with one of two
//! maps depending on the catastrophe bit; the variants are exposed as
//! [`ChainKernel`] trait objects registered by name.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::analytic::upow;
use crate::env::{EnvStream, RenewalTrace};
use crate::error::{Error, Result};

/// State of a mixing chain at level `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaState {
    pub u: f64,
    pub theta: f64,
    pub t: u64,
}

impl ThetaState {
    /// `Θ_0(u) = u`, the value for an i.i.d. uniform start.
    pub fn start(u: f64) -> Self {
        ThetaState { u, theta: u, t: 0 }
    }
}

/// (max,rand): `uΘ` on a normal step, `u` on a catastrophe.
pub fn step_maxrand(state: ThetaState, b: bool) -> ThetaState {
    let theta = if b { state.u * state.theta } else { state.u };
    ThetaState {
        theta,
        t: state.t + 1,
        ..state
    }
}

/// (max,min): `uΘ` on a normal step, `u + (1-u)Θ` on a catastrophe.
pub fn step_maxmin(state: ThetaState, b: bool) -> ThetaState {
    let theta = if b {
        state.u * state.theta
    } else {
        state.u + (1.0 - state.u) * state.theta
    };
    ThetaState {
        theta,
        t: state.t + 1,
        ..state
    }
}

/// Erdős system: `uΘ` on a normal step, `1 - u + uΘ` on a catastrophe.
pub fn step_erdos(state: ThetaState, b: bool) -> ThetaState {
    let theta = if b {
        state.u * state.theta
    } else {
        1.0 - state.u + state.u * state.theta
    };
    ThetaState {
        theta,
        t: state.t + 1,
        ..state
    }
}

/// One of the interchangeable chain update rules.
pub trait ChainKernel: Send + Sync {
    fn name(&self) -> &'static str;

    fn step(&self, state: ThetaState, b: bool) -> ThetaState;
}

pub struct MaxRandChain;
pub struct MaxMinChain;
pub struct ErdosChain;

impl ChainKernel for MaxRandChain {
    fn name(&self) -> &'static str {
        "maxrand"
    }

    fn step(&self, state: ThetaState, b: bool) -> ThetaState {
        step_maxrand(state, b)
    }
}

impl ChainKernel for MaxMinChain {
    fn name(&self) -> &'static str {
        "maxmin"
    }

    fn step(&self, state: ThetaState, b: bool) -> ThetaState {
        step_maxmin(state, b)
    }
}

impl ChainKernel for ErdosChain {
    fn name(&self) -> &'static str {
        "erdos"
    }

    fn step(&self, state: ThetaState, b: bool) -> ThetaState {
        step_erdos(state, b)
    }
}

static KERNELS: [&dyn ChainKernel; 3] = [&MaxRandChain, &MaxMinChain, &ErdosChain];

/// All registered chain kernels.
pub fn chain_kernels() -> &'static [&'static dyn ChainKernel] {
    &KERNELS
}

/// Looks up a chain kernel by name.
pub fn chain_kernel(name: &str) -> Result<&'static dyn ChainKernel> {
    KERNELS
        .iter()
        .copied()
        .find(|k| k.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "chain",
            name: name.to_owned(),
            known: KERNELS.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "),
        })
}

/// Trajectory `Θ_0 = u, Θ_1, ..., Θ_{t_max}` driven by the stream's bits.
pub fn run_chain(kernel: &dyn ChainKernel, u: f64, t_max: u64, stream: &EnvStream) -> Vec<f64> {
    let mut state = ThetaState::start(u);
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(state.theta);
    for b in stream.bernoulli_bits(t_max) {
        state = kernel.step(state, b);
        out.push(state.theta);
    }
    out
}

/// `Θ_t(u) = u^(t + 1 - T_{N(t)})` for the (max,rand) chain.
pub fn closed_form_theta(u: f64, trace: &RenewalTrace, t: u64) -> Result<f64> {
    Ok(upow(u, trace.age(t)?))
}

/// Draws `G` with `P(G = k) = (1-p) p^(k-1)`, `k >= 1`.
pub fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let failures = Geometric::new(1.0 - p)
        .expect("1 - p lies in (0,1)")
        .sample(rng);
    failures.saturating_add(1)
}

/// Draws from the stationary law `u^G` of the (max,rand) chain.
pub fn sample_stationary_theta<R: Rng + ?Sized>(u: f64, p: f64, rng: &mut R) -> f64 {
    upow(u, sample_geometric(p, rng))
}

/// Smallest `K` with `(1-u)^(K+1) < tol`.
pub fn maxmin_series_cutoff(u: f64, tol: f64) -> u64 {
    let mut k = 0u64;
    let mut tail = 1.0 - u;
    while tail >= tol {
        tail *= 1.0 - u;
        k += 1;
    }
    k
}

/// Partial sums `S_0, ..., S_K` of `Σ_k u^(T_k) ((1-u)/u)^k`, with
/// `T_k = G_0 + ... + G_k` for i.i.d. geometric `G_i`, stopped at the
/// first `K` whose certified tail `(1-u)^(K+1)` is below `tol`.
pub fn theta_infinity_partial_sums<R: Rng + ?Sized>(
    u: f64,
    p: f64,
    tol: f64,
    rng: &mut R,
) -> Vec<f64> {
    let cutoff = maxmin_series_cutoff(u, tol);
    let mut sums = Vec::with_capacity(cutoff as usize + 1);
    // term_k = term_{k-1} * u^(G_k - 1) * (1-u)
    let mut term = upow(u, sample_geometric(p, rng));
    let mut sum = term;
    sums.push(sum);
    for _ in 0..cutoff {
        term *= upow(u, sample_geometric(p, rng) - 1) * (1.0 - u);
        sum += term;
        sums.push(sum);
    }
    sums
}

/// One draw of the (max,min) limit `Θ_∞(u)` with truncation error below `tol`.
pub fn theta_infinity_maxmin<R: Rng + ?Sized>(u: f64, p: f64, tol: f64, rng: &mut R) -> f64 {
    *theta_infinity_partial_sums(u, p, tol, rng)
        .last()
        .expect("series has at least one term")
}
