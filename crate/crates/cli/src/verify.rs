//! Verification suites, registered by name and selected with `verify <suite>`.
//!
//! Each suite runs a Monte Carlo or identity check against the closed-form
//! laws and reports one line per check. Thresholds are fixed here; flags
//! only change the model parameters, replica counts and seeds.

use std::fmt;

use catastrophe_core::analytic::{indicator_cov, phi, phi_t, theta_pgf, theta_pgf_shifted};
use catastrophe_core::chain::{closed_form_theta, run_chain, theta_infinity_maxmin, MaxMinChain, MaxRandChain};
use catastrophe_core::env::{build_trace, pmf_age, EnvStream};
use catastrophe_core::field::{
    couple_run, init_stationary_field, simulate, step_maxrand_field, InitialConfig, MaxRandModel,
};
use catastrophe_core::stats::{
    binomial_se, count_values, indicator_cov_est, ks_distance, ks_two_sample, pmf_compare, EmpiricalCdf,
};

use crate::error::CliError;

/// Flags shared by all suites; `None` selects the suite's default.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub p: Option<f64>,
    pub u: Option<f64>,
    pub u2: Option<f64>,
    pub t: Option<u64>,
    pub steps: Option<u64>,
    pub reps: Option<u64>,
    pub sites: Option<usize>,
    pub seed: Option<u64>,
}

pub const DEFAULT_SEED: u64 = 42;
/// Frequencies must land within this many standard errors.
pub const SE_MULTIPLIER: f64 = 3.0;

fn open_unit(name: &str, value: Option<f64>, default: f64) -> Result<f64, CliError> {
    let v = value.unwrap_or(default);
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must lie in (0,1), got {v}")))
    }
}

fn positive<T: PartialOrd + Default + fmt::Display + Copy>(name: &str, value: Option<T>, default: T) -> Result<T, CliError> {
    let v = value.unwrap_or(default);
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must be positive, got {v}")))
    }
}

/// One pass/fail line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured < limit`.
    pub fn below(label: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            limit,
            passed: measured < limit,
        }
    }

    /// Passes when `|measured - expected| <= k * se`; reports the deviation.
    pub fn within_se(label: impl Into<String>, measured: f64, expected: f64, se: f64) -> Self {
        let dev = (measured - expected).abs();
        let limit = SE_MULTIPLIER * se;
        Check {
            label: format!("{} (measured {measured:.6}, expected {expected:.6})", label.into()),
            measured: dev,
            limit,
            passed: dev <= limit,
        }
    }

    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Check {
            label: label.into(),
            measured: if ok { 0.0 } else { 1.0 },
            limit: 1.0,
            passed: ok,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (limit {:.3e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.label,
            self.measured,
            self.limit
        )
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub settings: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} [{}]", self.suite, self.settings)?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub trait VerifySuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, opts: &VerifyOptions) -> Result<SuiteReport, CliError>;
}

struct Prop1;
struct Thm1;
struct Thm2;
struct Stationarity;
struct ChainEq;
struct Pgf;
struct MaxMinLimit;
struct Cov;

static SUITES: [&dyn VerifySuite; 8] = [
    &Prop1,
    &Thm1,
    &Thm2,
    &Stationarity,
    &ChainEq,
    &Pgf,
    &MaxMinLimit,
    &Cov,
];

pub fn suites() -> &'static [&'static dyn VerifySuite] {
    &SUITES
}

pub fn suite(name: &str) -> Result<&'static dyn VerifySuite, CliError> {
    SUITES.iter().copied().find(|s| s.name() == name).ok_or_else(|| {
        let known: Vec<&str> = SUITES.iter().map(|s| s.name()).collect();
        CliError::usage(format!("unknown suite `{name}` (known: {})", known.join(", ")))
    })
}

fn frequency(xs: &[f64], u: f64) -> f64 {
    xs.iter().filter(|&&x| x <= u).count() as f64 / xs.len() as f64
}

fn stream(seed: u64, p: f64) -> EnvStream {
    EnvStream::new(seed, p).expect("p validated")
}

impl VerifySuite for Prop1 {
    fn name(&self) -> &'static str {
        "prop1"
    }

    fn summary(&self) -> &'static str {
        "age t+1-T_N(t) has the law of min(G, t+1)"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let p = open_unit("p", o.p, 0.7)?;
        let t = positive("t", o.t, 50)?;
        let reps = positive("reps", o.reps, 100_000)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let ages = stream(seed, p).replicas(reps, |s| build_trace(&s, t).age(t).expect("t within horizon"));
        let err = pmf_compare(&count_values(ages), |k| pmf_age(k, p, t).unwrap_or(0.0))?;
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("p={p} t={t} reps={reps} seed={seed}"),
            checks: vec![Check::below("max |empirical - pmf| of age", err, 0.005)],
        })
    }
}

impl VerifySuite for Thm1 {
    fn name(&self) -> &'static str {
        "thm1"
    }

    fn summary(&self) -> &'static str {
        "marginal and joint CDFs from an i.i.d. uniform start follow φ_t"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let p = open_unit("p", o.p, 0.9)?;
        let u1 = open_unit("u", o.u, 0.5)?;
        let u2 = open_unit("u2", o.u2, 0.7)?;
        let t = o.t.unwrap_or(20);
        let reps = positive("reps", o.reps, 10_000)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let fields = stream(seed, p).replicas(reps, |s| {
            simulate(&MaxRandModel, &InitialConfig::IidUniform, 2, t, &s)
                .expect("valid settings")
                .into_values()
        });
        let first: Vec<f64> = fields.iter().map(|f| f[0]).collect();
        let mut checks = Vec::new();
        for i in 1..=9 {
            let u = i as f64 / 10.0;
            let q = phi_t(u, p, t).get();
            checks.push(Check::within_se(
                format!("P(η_t(1) <= {u})"),
                frequency(&first, u),
                q,
                binomial_se(q, reps),
            ));
        }
        let joint = fields.iter().filter(|f| f[0] <= u1 && f[1] <= u2).count() as f64 / reps as f64;
        let q = phi_t(u1 * u2, p, t).get();
        checks.push(Check::within_se(
            format!("P(η_t(1) <= {u1}, η_t(2) <= {u2})"),
            joint,
            q,
            binomial_se(q, reps),
        ));
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("p={p} t={t} reps={reps} seed={seed}"),
            checks,
        })
    }
}

impl VerifySuite for Thm2 {
    fn name(&self) -> &'static str {
        "thm2"
    }

    fn summary(&self) -> &'static str {
        "coupled runs merge at the first catastrophe; arbitrary starts converge to φ"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let p = open_unit("p", o.p, 0.9)?;
        let reps = positive("reps", o.reps, 10_000)?;
        let sites = positive("sites", o.sites, 10)?;
        let steps = positive("steps", o.steps, 50)?;
        let t = positive("t", o.t, 200)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let root = stream(seed, p);
        let tail_at = 10u64.min(steps);
        let runs = root.replicas(reps, |s| {
            let run = couple_run(&InitialConfig::Constant(0.01), &InitialConfig::IidUniform, sites, steps, &s)
                .expect("valid settings");
            let late = run.trace.first_catastrophe().is_none_or(|t1| t1 > tail_at);
            (run.merged_after_first_catastrophe(), late)
        });
        let merged = runs.iter().all(|r| r.0);
        let late = runs.iter().filter(|r| r.1).count() as f64 / reps as f64;
        let q = p.powi(tail_at as i32);

        let converged = root.replicas(reps, |s| {
            simulate(&MaxRandModel, &InitialConfig::Constant(0.01), 1, t, &s.replica(s.replica_index() + reps))
                .expect("valid settings")
                .values()[0]
        });
        let ks = ks_distance(&EmpiricalCdf::new(&converged), |u| phi(u, p).get());
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("p={p} reps={reps} sites={sites} steps={steps} t={t} seed={seed}"),
            checks: vec![
                Check::holds("fields identical for all t >= T_1 in every run", merged),
                Check::within_se(format!("P(T_1 > {tail_at})"), late, q, binomial_se(q, reps)),
                Check::below(format!("KS of η_{t}(1) from constant(0.01) vs φ"), ks, 0.02),
            ],
        })
    }
}

impl VerifySuite for Stationarity {
    fn name(&self) -> &'static str {
        "stationarity"
    }

    fn summary(&self) -> &'static str {
        "p u φ(u) + (1-p) u = φ(u), and one step preserves the stationary field"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let p = open_unit("p", o.p, 0.9)?;
        let reps = positive("reps", o.reps, 100_000)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let residual = (1..=999)
            .map(|i| {
                let u = i as f64 / 1000.0;
                let f = phi(u, p).get();
                (p * u * f + (1.0 - p) * u - f).abs()
            })
            .fold(0.0, f64::max);
        let stepped = stream(seed, p).replicas(reps, |s| {
            let mut f = init_stationary_field(1, &s);
            step_maxrand_field(&mut f, &s);
            f.values()[0]
        });
        let mut checks = vec![Check::below("max stationarity residual on 999-point grid", residual, 1e-12)];
        for u in [0.25, 0.5, 0.75] {
            let q = phi(u, p).get();
            checks.push(Check::within_se(
                format!("P(η_1(1) <= {u}) from stationary start"),
                frequency(&stepped, u),
                q,
                binomial_se(q, reps),
            ));
        }
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("p={p} reps={reps} seed={seed}"),
            checks,
        })
    }
}

impl VerifySuite for ChainEq {
    fn name(&self) -> &'static str {
        "chain-eq"
    }

    fn summary(&self) -> &'static str {
        "iterated (max,rand) chain equals u^(t+1-T_N(t)) bit for bit"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let p = open_unit("p", o.p, 0.7)?;
        let u = open_unit("u", o.u, 0.5)?;
        let u2 = open_unit("u2", o.u2, 0.8)?;
        let steps = o.steps.unwrap_or(1000);
        let reps = positive("reps", o.reps, 1)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let results = stream(seed, p).replicas(reps, |s| {
            let trace = build_trace(&s, steps);
            let path = run_chain(&MaxRandChain, u, steps, &s);
            let mismatches = path
                .iter()
                .zip(0..)
                .filter(|&(&theta, t)| closed_form_theta(u, &trace, t).ok() != Some(theta))
                .count();
            let product_err = (0..=steps)
                .map(|t| {
                    let a = closed_form_theta(u, &trace, t).unwrap_or(f64::NAN)
                        * closed_form_theta(u2, &trace, t).unwrap_or(f64::NAN);
                    let b = closed_form_theta(u * u2, &trace, t).unwrap_or(f64::NAN);
                    (a - b).abs()
                })
                .fold(0.0, f64::max);
            (mismatches, product_err)
        });
        let mismatches: usize = results.iter().map(|r| r.0).sum();
        let product_err = results.iter().map(|r| r.1).fold(0.0, f64::max);
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("p={p} u={u} steps={steps} reps={reps} seed={seed}"),
            checks: vec![
                Check::holds(format!("iteration == closed form ({mismatches} mismatches)"), mismatches == 0),
                Check::below(format!("|Θ_t({u})Θ_t({u2}) - Θ_t({})|", u * u2), product_err, 1e-12),
            ],
        })
    }
}

impl VerifySuite for Pgf {
    fn name(&self) -> &'static str {
        "pgf"
    }

    fn summary(&self) -> &'static str {
        "E(s^Θ) = (1-p) s^u + p E(s^(uΘ)) for the stationary Θ = u^G"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        const TOL: f64 = 1e-12;
        let us = match o.u {
            Some(_) => vec![open_unit("u", o.u, 0.5)?],
            None => vec![0.3, 0.5, 0.9],
        };
        let ps = match o.p {
            Some(_) => vec![open_unit("p", o.p, 0.5)?],
            None => vec![0.3, 0.5, 0.9],
        };
        let mut residual: f64 = 0.0;
        let mut boundary: f64 = 0.0;
        for &u in &us {
            for &p in &ps {
                for i in 1..=9 {
                    let s = i as f64 / 10.0;
                    let lhs = theta_pgf(s, u, p, TOL);
                    let rhs = (1.0 - p) * s.powf(u) + p * theta_pgf_shifted(s, u, p, TOL);
                    residual = residual.max((lhs - rhs).abs());
                }
                boundary = boundary
                    .max((theta_pgf(1.0, u, p, TOL) - 1.0).abs())
                    .max(theta_pgf(0.0, u, p, TOL).abs());
            }
        }
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("u in {us:?}, p in {ps:?}, tol={TOL}"),
            checks: vec![
                Check::below("max stationarity residual over s = 0.1..0.9", residual, 1e-10),
                Check::below("max boundary error at s = 0, 1", boundary, TOL),
            ],
        })
    }
}

impl VerifySuite for MaxMinLimit {
    fn name(&self) -> &'static str {
        "maxmin-limit"
    }

    fn summary(&self) -> &'static str {
        "long-run (max,min) chain vs truncated series for Θ_∞"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let u = open_unit("u", o.u, 0.5)?;
        let p = open_unit("p", o.p, 0.5)?;
        let reps = positive("reps", o.reps, 10_000)?;
        let steps = o.steps.unwrap_or(500);
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let root = stream(seed, p);
        let chain = root.replicas(reps, |s| *run_chain(&MaxMinChain, u, steps, &s).last().expect("nonempty"));
        let series = root.replicas(reps, |s| theta_infinity_maxmin(u, p, 1e-12, &mut s.aux_rng(1)));
        let ks = ks_two_sample(&EmpiricalCdf::from_vec(chain), &EmpiricalCdf::from_vec(series));
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("u={u} p={p} reps={reps} steps={steps} seed={seed}"),
            checks: vec![Check::below("two-sample KS, chain vs series", ks, 0.02)],
        })
    }
}

impl VerifySuite for Cov {
    fn name(&self) -> &'static str {
        "cov"
    }

    fn summary(&self) -> &'static str {
        "stationary indicator covariance: closed form, φ identity and Monte Carlo"
    }

    fn run(&self, o: &VerifyOptions) -> Result<SuiteReport, CliError> {
        let u1 = open_unit("u", o.u, 0.5)?;
        let u2 = open_unit("u2", o.u2, 0.7)?;
        let p = open_unit("p", o.p, 0.5)?;
        let reps = positive("reps", o.reps, 100_000)?;
        let seed = o.seed.unwrap_or(DEFAULT_SEED);
        let exact = indicator_cov(u1, u2, p);
        let via_phi = phi(u1 * u2, p).get() - phi(u1, p).get() * phi(u2, p).get();
        let pairs = stream(seed, p).replicas(reps, |s| {
            let f = init_stationary_field(2, &s);
            (f.values()[0], f.values()[1])
        });
        let est = indicator_cov_est(&pairs, u1, u2)?;
        Ok(SuiteReport {
            suite: self.name(),
            settings: format!("u1={u1} u2={u2} p={p} reps={reps} seed={seed}"),
            checks: vec![
                Check::below("|closed form - (φ(u1u2) - φ(u1)φ(u2))|", (exact - via_phi).abs(), 1e-12),
                Check::holds("covariance is strictly positive", exact > 0.0),
                Check::within_se("Monte Carlo covariance", est.value, exact, est.std_err),
            ],
        })
    }
}
