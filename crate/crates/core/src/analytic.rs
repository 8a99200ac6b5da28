//! Closed-form laws of the model.
//!
//! All functions here are pure. Preconditions on `u` and `p` (open unit
//! interval) are checked with `debug_assert!`; callers facing user input
//! validate first.

use std::fmt;
use std::str::FromStr;

use crate::env::powu;
use crate::error::{Error, Result};

/// A value in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::Domain(format!("{value} is not a probability")))
        }
    }

    /// Clamps tiny round-off excursions outside `[0,1]`.
    fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Time horizon: a finite step count or the stationary limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

impl FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "INFINITY" => Ok(Horizon::Infinite),
            other => other
                .parse::<u64>()
                .map(Horizon::Finite)
                .map_err(|_| Error::invalid("t", other, "expected a nonnegative integer or `inf`")),
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Finite(t) => write!(f, "{t}"),
            Horizon::Infinite => f.write_str("inf"),
        }
    }
}

#[inline]
fn debug_check(u: f64, p: f64) {
    debug_assert!(u > 0.0 && u < 1.0, "u = {u} outside (0,1)");
    debug_assert!(p > 0.0 && p < 1.0, "p = {p} outside (0,1)");
}

/// `u^k` by left-to-right repeated multiplication (`u^0 = 1`).
///
/// The chain iteration produces exactly this sequence of roundings, so
/// closed forms computed with it agree bit-for-bit with simulated chains.
pub fn upow(u: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut acc = u;
    for _ in 1..k {
        acc *= u;
    }
    acc
}

/// Time-`t` marginal CDF of a site started from i.i.d. uniforms:
/// `u(1-p)(1-(up)^t)/(1-up) + u^(t+1) p^t`.
pub fn phi_t(u: f64, p: f64, t: u64) -> Probability {
    debug_check(u, p);
    let up = u * p;
    let value = u * (1.0 - p) * (1.0 - powu(up, t)) / (1.0 - up) + u * powu(u, t) * powu(p, t);
    Probability::clamped(value)
}

/// Stationary marginal CDF `u(1-p)/(1-up)`.
pub fn phi(u: f64, p: f64) -> Probability {
    debug_check(u, p);
    Probability::clamped(u * (1.0 - p) / (1.0 - u * p))
}

/// Marginal CDF at the given horizon.
pub fn phi_at(u: f64, p: f64, horizon: Horizon) -> Probability {
    match horizon {
        Horizon::Finite(t) => phi_t(u, p, t),
        Horizon::Infinite => phi(u, p),
    }
}

/// `P(η_t(1) <= u_1, ..., η_t(n) <= u_n) = φ_t(u_1 ⋯ u_n)`.
pub fn joint_cdf(us: &[f64], p: f64, horizon: Horizon) -> Result<Probability> {
    if us.is_empty() {
        return Err(Error::Domain("joint CDF needs at least one level".into()));
    }
    if let Some(&bad) = us.iter().find(|&&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::Domain(format!("level {bad} outside (0,1)")));
    }
    let product = us.iter().product::<f64>();
    Ok(phi_at(product, p, horizon))
}

/// Stationary covariance of `1{η(1) <= u1}` and `1{η(2) <= u2}`.
pub fn indicator_cov(u1: f64, u2: f64, p: f64) -> f64 {
    debug_check(u1, p);
    debug_check(u2, p);
    // pairwise products keep the result exactly symmetric in (u1, u2)
    let prod = u1 * u2;
    let complements = (1.0 - u1) * (1.0 - u2);
    let singles = (1.0 - u1 * p) * (1.0 - u2 * p);
    (1.0 - p) * p * prod * complements / ((1.0 - prod * p) * singles)
}

/// The unique `k >= 1` with `u^k <= x < u^(k-1)`.
///
/// Starts from `ceil(ln x / ln u)` and corrects against powers computed by
/// [`upow`], so jump points produced by repeated multiplication classify
/// exactly.
pub fn k_index(x: f64, u: f64) -> u64 {
    debug_assert!(x > 0.0 && x < 1.0, "x = {x} outside (0,1)");
    debug_assert!(u > 0.0 && u < 1.0, "u = {u} outside (0,1)");
    let guess = (x.ln() / u.ln()).ceil();
    let mut k = if guess.is_finite() && guess >= 1.0 {
        guess as u64
    } else {
        1
    };
    while upow(u, k) > x {
        k += 1;
    }
    while k > 1 && upow(u, k - 1) <= x {
        k -= 1;
    }
    k
}

/// CDF of the stationary mixing variable `u^G`: `F(x) = p^(k(x)-1)`.
///
/// Extended by 0 below the unit interval and 1 above it.
pub fn stationary_theta_cdf(x: f64, u: f64, p: f64) -> Probability {
    debug_check(u, p);
    if x <= 0.0 {
        return Probability(0.0);
    }
    if x >= 1.0 {
        return Probability(1.0);
    }
    Probability::clamped(powu(p, k_index(x, u) - 1))
}

/// Number of terms `K` with certified geometric tail `p^K < tol`.
pub fn pgf_terms(p: f64, tol: f64) -> u64 {
    debug_assert!(tol > 0.0);
    if tol >= 1.0 {
        return 1;
    }
    let mut k = (tol.ln() / p.ln()).ceil().max(1.0) as u64;
    while powu(p, k) >= tol {
        k += 1;
    }
    k
}

fn pgf_series(s: f64, u: f64, p: f64, tol: f64, shift: u64) -> f64 {
    debug_check(u, p);
    debug_assert!((0.0..=1.0).contains(&s), "s = {s} outside [0,1]");
    if s == 0.0 {
        // every exponent u^k is positive
        return 0.0;
    }
    let terms = pgf_terms(p, tol);
    let mut exponent = upow(u, 1 + shift);
    let mut weight = 1.0 - p;
    let mut sum = 0.0;
    for _ in 0..terms {
        sum += weight * s.powf(exponent);
        exponent *= u;
        weight *= p;
    }
    sum
}

/// Generating function `E(s^Θ)` of the stationary mixing variable `Θ = u^G`,
/// truncated with absolute error below `tol`.
pub fn theta_pgf(s: f64, u: f64, p: f64, tol: f64) -> f64 {
    pgf_series(s, u, p, tol, 0)
}

/// `E(s^(uΘ))` for `Θ = u^G`, i.e. the series with every exponent shifted by one.
pub fn theta_pgf_shifted(s: f64, u: f64, p: f64, tol: f64) -> f64 {
    pgf_series(s, u, p, tol, 1)
}
