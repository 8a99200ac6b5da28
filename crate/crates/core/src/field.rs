//! Site-field simulators.
//!
//! The infinite line of sites is truncated to `n` sites; every update reads
//! its randomness from an [`EnvStream`], so two fields stepped with the same
//! stream are coupled. Model variants implement [`FieldModel`] and are
//! selected by name through [`field_model`].

use std::str::FromStr;

use rand::Rng;

use crate::chain::sample_geometric;
use crate::env::{build_trace, EnvStream, RenewalTrace};
use crate::error::{check_open_unit, Error, Result};

/// Aux lane used by [`init_stationary_field`].
pub const AUX_LANE_STATIONARY_INIT: u64 = 0;

/// Fitness values of `n` sites at time `t`, each strictly inside `(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessField {
    values: Vec<f64>,
    t: u64,
}

impl FitnessField {
    pub fn new(values: Vec<f64>, t: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("n", 0, "site count must be at least 1"));
        }
        for &v in &values {
            check_open_unit("fitness", v)?;
        }
        Ok(FitnessField { values, t })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

/// Initial configuration of a field.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    /// I.i.d. uniforms from the `t = 0` row of the stream.
    IidUniform,
    Constant(f64),
    Explicit(Vec<f64>),
    /// Draw from the stationary law: one geometric age `A` per field, each
    /// site the max of `A` fresh uniforms.
    Stationary,
}

impl FromStr for InitialConfig {
    type Err = Error;

    /// `uniform`, `stationary`, `constant:C` or `explicit:v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("init", s, "expected uniform, stationary, constant:C or explicit:v1,v2,...");
        match s.split_once(':') {
            None => match s {
                "uniform" | "iid_uniform" | "iid-uniform" => Ok(InitialConfig::IidUniform),
                "stationary" => Ok(InitialConfig::Stationary),
                _ => Err(bad()),
            },
            Some(("constant", c)) => {
                let c: f64 = c.trim().parse().map_err(|_| bad())?;
                check_open_unit("constant", c)?;
                Ok(InitialConfig::Constant(c))
            }
            Some(("explicit", list)) => {
                let values = list
                    .split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(InitialConfig::Explicit(values))
            }
            Some(_) => Err(bad()),
        }
    }
}

/// Field at time 0 for the given configuration.
pub fn init_field(cfg: &InitialConfig, n: usize, stream: &EnvStream) -> Result<FitnessField> {
    if n == 0 {
        return Err(Error::invalid("n", 0, "site count must be at least 1"));
    }
    match cfg {
        InitialConfig::IidUniform => {
            let mut values = vec![0.0; n];
            stream.fill_uniform_row(0, &mut values);
            FitnessField::new(values, 0)
        }
        InitialConfig::Constant(c) => FitnessField::new(vec![*c; n], 0),
        InitialConfig::Explicit(values) => {
            if values.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: values.len(),
                });
            }
            FitnessField::new(values.clone(), 0)
        }
        InitialConfig::Stationary => Ok(init_stationary_field(n, stream)),
    }
}

/// Stationary field: sites are conditionally i.i.d. with CDF `u^A` given a
/// single geometric age `A` shared by the whole field.
pub fn init_stationary_field(n: usize, stream: &EnvStream) -> FitnessField {
    let mut rng = stream.aux_rng(AUX_LANE_STATIONARY_INIT);
    let age = sample_geometric(stream.p(), &mut rng);
    let values = (0..n)
        .map(|_| {
            (0..age)
                .map(|_| crate::env::open_unit(rng.random::<u64>()))
                .fold(0.0, f64::max)
        })
        .collect();
    FitnessField { values, t: 0 }
}

/// (max,rand) update: on a normal step every site keeps the max of its value
/// and `U_{t+1}(site)`; on a catastrophe every site becomes `U_{t+1}(site)`.
pub fn step_maxrand_field(field: &mut FitnessField, stream: &EnvStream) {
    let next = field.t + 1;
    if stream.bernoulli_at(next) {
        max_with_row(field, stream, next);
    } else {
        stream.fill_uniform_row(next, &mut field.values);
    }
    field.t = next;
}

/// (max,min) update: as (max,rand) on normal steps, pointwise min with the
/// fresh uniforms on a catastrophe.
pub fn step_maxmin_field(field: &mut FitnessField, stream: &EnvStream) {
    let next = field.t + 1;
    if stream.bernoulli_at(next) {
        max_with_row(field, stream, next);
    } else {
        let mut row = vec![0.0; field.values.len()];
        stream.fill_uniform_row(next, &mut row);
        for (v, u) in field.values.iter_mut().zip(row) {
            *v = v.min(u);
        }
    }
    field.t = next;
}

fn max_with_row(field: &mut FitnessField, stream: &EnvStream, t: u64) {
    let mut row = vec![0.0; field.values.len()];
    stream.fill_uniform_row(t, &mut row);
    for (v, u) in field.values.iter_mut().zip(row) {
        *v = v.max(u);
    }
}

/// Bak-Sneppen update on a ring: the least fit site (lowest index on ties)
/// and its two neighbours get `U_{t+1}(site)`. Returns the refreshed indices.
pub fn bak_sneppen_step(field: &mut FitnessField, stream: &EnvStream) -> Result<[usize; 3]> {
    let n = field.values.len();
    if n < 3 {
        return Err(Error::invalid("n", n, "Bak-Sneppen ring needs at least 3 sites"));
    }
    let mut argmin = 0;
    for (i, &v) in field.values.iter().enumerate().skip(1) {
        if v < field.values[argmin] {
            argmin = i;
        }
    }
    let next = field.t + 1;
    let refreshed = [(argmin + n - 1) % n, argmin, (argmin + 1) % n];
    for &i in &refreshed {
        field.values[i] = stream.uniform_at(next, i as u64 + 1);
    }
    field.t = next;
    Ok(refreshed)
}

/// A site-field dynamics selectable at runtime.
pub trait FieldModel: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the dynamics reads the catastrophe bits.
    fn has_catastrophes(&self) -> bool {
        true
    }

    fn min_sites(&self) -> usize {
        1
    }

    fn step(&self, field: &mut FitnessField, stream: &EnvStream) -> Result<()>;
}

pub struct MaxRandModel;
pub struct MaxMinModel;
pub struct BakSneppenModel;

impl FieldModel for MaxRandModel {
    fn name(&self) -> &'static str {
        "maxrand"
    }

    fn step(&self, field: &mut FitnessField, stream: &EnvStream) -> Result<()> {
        step_maxrand_field(field, stream);
        Ok(())
    }
}

impl FieldModel for MaxMinModel {
    fn name(&self) -> &'static str {
        "maxmin"
    }

    fn step(&self, field: &mut FitnessField, stream: &EnvStream) -> Result<()> {
        step_maxmin_field(field, stream);
        Ok(())
    }
}

impl FieldModel for BakSneppenModel {
    fn name(&self) -> &'static str {
        "baksneppen"
    }

    fn has_catastrophes(&self) -> bool {
        false
    }

    fn min_sites(&self) -> usize {
        3
    }

    fn step(&self, field: &mut FitnessField, stream: &EnvStream) -> Result<()> {
        bak_sneppen_step(field, stream).map(|_| ())
    }
}

static MODELS: [&dyn FieldModel; 3] = [&MaxRandModel, &MaxMinModel, &BakSneppenModel];

pub fn field_models() -> &'static [&'static dyn FieldModel] {
    &MODELS
}

pub fn field_model(name: &str) -> Result<&'static dyn FieldModel> {
    MODELS
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::UnknownName {
            kind: "model",
            name: name.to_owned(),
            known: MODELS.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "),
        })
}

/// Initializes a field and runs `steps` updates of `model`.
pub fn simulate(
    model: &dyn FieldModel,
    cfg: &InitialConfig,
    n: usize,
    steps: u64,
    stream: &EnvStream,
) -> Result<FitnessField> {
    if n < model.min_sites() {
        return Err(Error::invalid("n", n, "too few sites for this model"));
    }
    let mut field = init_field(cfg, n, stream)?;
    for _ in 0..steps {
        model.step(&mut field, stream)?;
    }
    Ok(field)
}

/// Two (max,rand) fields driven by the identical stream.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub a: Vec<FitnessField>,
    pub b: Vec<FitnessField>,
    pub trace: RenewalTrace,
    /// First `t` with `a[t] == b[t]` exactly.
    pub first_agreement: Option<u64>,
}

impl CoupledRun {
    /// Whether the fields are identical at every `t >= T_1` (vacuous when no
    /// catastrophe occurred within the horizon).
    pub fn merged_after_first_catastrophe(&self) -> bool {
        match self.trace.first_catastrophe() {
            None => true,
            Some(t1) => self.a[t1 as usize..]
                .iter()
                .zip(&self.b[t1 as usize..])
                .all(|(x, y)| x.values == y.values),
        }
    }
}

/// Runs two (max,rand) fields from `cfg_a` and `cfg_b` on the same stream.
pub fn couple_run(
    cfg_a: &InitialConfig,
    cfg_b: &InitialConfig,
    n: usize,
    t_max: u64,
    stream: &EnvStream,
) -> Result<CoupledRun> {
    let mut fa = init_field(cfg_a, n, stream)?;
    let mut fb = init_field(cfg_b, n, stream)?;
    let mut a = Vec::with_capacity(t_max as usize + 1);
    let mut b = Vec::with_capacity(t_max as usize + 1);
    a.push(fa.clone());
    b.push(fb.clone());
    for _ in 0..t_max {
        step_maxrand_field(&mut fa, stream);
        step_maxrand_field(&mut fb, stream);
        a.push(fa.clone());
        b.push(fb.clone());
    }
    let first_agreement = a
        .iter()
        .zip(&b)
        .position(|(x, y)| x.values == y.values)
        .map(|t| t as u64);
    Ok(CoupledRun {
        a,
        b,
        trace: build_trace(stream, t_max),
        first_agreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_distance, EmpiricalCdf};

    fn stream(seed: u64, p: f64) -> EnvStream {
        EnvStream::new(seed, p).unwrap()
    }

    #[test]
    fn init_configs() {
        let s = stream(1, 0.5);
        let c = init_field(&InitialConfig::Constant(0.5), 3, &s).unwrap();
        assert_eq!(c.values(), &[0.5, 0.5, 0.5]);
        let e = init_field(&InitialConfig::Explicit(vec![0.1, 0.9]), 2, &s).unwrap();
        assert_eq!(e.values(), &[0.1, 0.9]);
        assert_eq!(
            init_field(&InitialConfig::Explicit(vec![0.1, 0.9]), 3, &s),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        );
        assert!(init_field(&InitialConfig::Constant(1.0), 3, &s).is_err());
        assert!(init_field(&InitialConfig::IidUniform, 0, &s).is_err());
    }

    #[test]
    fn parse_initial_config() {
        assert_eq!("uniform".parse::<InitialConfig>().unwrap(), InitialConfig::IidUniform);
        assert_eq!("constant:0.01".parse::<InitialConfig>().unwrap(), InitialConfig::Constant(0.01));
        assert_eq!(
            "explicit:0.1,0.9".parse::<InitialConfig>().unwrap(),
            InitialConfig::Explicit(vec![0.1, 0.9])
        );
        assert_eq!("stationary".parse::<InitialConfig>().unwrap(), InitialConfig::Stationary);
        assert!("constant:2".parse::<InitialConfig>().is_err());
        assert!("gaussian".parse::<InitialConfig>().is_err());
    }

    #[test]
    fn iid_uniform_init_is_uniform() {
        let s = stream(2, 0.5);
        let f = init_field(&InitialConfig::IidUniform, 100_000, &s).unwrap();
        let d = ks_distance(&EmpiricalCdf::new(f.values()), |x| x);
        assert!(d < 0.01, "{d}");
    }

    #[test]
    fn maxrand_step_branches() {
        for seed in 0..50 {
            let s = stream(seed, 0.5);
            let mut f = init_field(&InitialConfig::IidUniform, 64, &s).unwrap();
            let before = f.clone();
            step_maxrand_field(&mut f, &s);
            assert_eq!(f.t(), 1);
            if s.bernoulli_at(1) {
                assert!(f.values().iter().zip(before.values()).all(|(a, b)| a >= b));
            } else {
                let fresh: Vec<f64> = (1..=64).map(|i| s.uniform_at(1, i)).collect();
                assert_eq!(f.values(), fresh.as_slice());
            }
        }
    }

    #[test]
    fn maxmin_step_branches() {
        for seed in 0..50 {
            let s = stream(seed, 0.5);
            let mut a = init_field(&InitialConfig::IidUniform, 32, &s).unwrap();
            let mut b = a.clone();
            let before = a.clone();
            step_maxmin_field(&mut a, &s);
            step_maxrand_field(&mut b, &s);
            if s.bernoulli_at(1) {
                assert_eq!(a, b);
            } else {
                assert!(a.values().iter().zip(before.values()).all(|(x, y)| x <= y));
            }
        }
    }

    #[test]
    fn maxmin_consecutive_catastrophes_never_increase() {
        // find a stream whose first two steps are both catastrophes
        let s = (0..)
            .map(|seed| stream(seed, 0.5))
            .find(|s| !s.bernoulli_at(1) && !s.bernoulli_at(2))
            .unwrap();
        let mut f = init_field(&InitialConfig::IidUniform, 50, &s).unwrap();
        let v0 = f.clone();
        step_maxmin_field(&mut f, &s);
        let v1 = f.clone();
        step_maxmin_field(&mut f, &s);
        for i in 0..50 {
            assert!(v1.values()[i] <= v0.values()[i]);
            assert!(f.values()[i] <= v1.values()[i]);
        }
    }

    #[test]
    fn bak_sneppen_small_ring_refreshes_everything() {
        let s = stream(4, 0.5);
        let mut f = init_field(&InitialConfig::IidUniform, 3, &s).unwrap();
        for _ in 0..20 {
            let mut idx = bak_sneppen_step(&mut f, &s).unwrap();
            idx.sort_unstable();
            assert_eq!(idx, [0, 1, 2]);
            let t = f.t();
            let fresh: Vec<f64> = (1..=3).map(|i| s.uniform_at(t, i)).collect();
            assert_eq!(f.values(), fresh.as_slice());
        }
        let mut tiny = init_field(&InitialConfig::Constant(0.5), 2, &s).unwrap();
        assert!(bak_sneppen_step(&mut tiny, &s).is_err());
    }

    #[test]
    fn bak_sneppen_refreshes_min_and_neighbours() {
        let s = stream(5, 0.5);
        let mut f = init_field(&InitialConfig::Explicit(vec![0.5, 0.2, 0.9, 0.2, 0.7]), 5, &s).unwrap();
        assert_eq!(bak_sneppen_step(&mut f, &s).unwrap(), [0, 1, 2]);
        let mut g = init_field(&InitialConfig::Explicit(vec![0.1, 0.6, 0.9, 0.8, 0.7]), 5, &s).unwrap();
        assert_eq!(bak_sneppen_step(&mut g, &s).unwrap(), [4, 0, 1]);
        let mut big = init_field(&InitialConfig::IidUniform, 40, &s).unwrap();
        for _ in 0..200 {
            let idx = bak_sneppen_step(&mut big, &s).unwrap();
            let mut set = idx.to_vec();
            set.sort_unstable();
            set.dedup();
            assert_eq!(set.len(), 3);
        }
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(field_model("maxrand").unwrap().name(), "maxrand");
        assert!(!field_model("baksneppen").unwrap().has_catastrophes());
        assert_eq!(field_models().len(), 3);
        assert!(field_model("sandpile").is_err());
        let s = stream(1, 0.5);
        assert!(simulate(&BakSneppenModel, &InitialConfig::IidUniform, 2, 1, &s).is_err());
    }

    #[test]
    fn zero_steps_returns_initial_field() {
        let s = stream(3, 0.9);
        let init = init_field(&InitialConfig::IidUniform, 10, &s).unwrap();
        for m in field_models() {
            assert_eq!(simulate(*m, &InitialConfig::IidUniform, 10, 0, &s).unwrap(), init);
        }
    }

    #[test]
    fn coupling_identical_configs_agree_at_zero() {
        let s = stream(6, 0.9);
        let run = couple_run(&InitialConfig::IidUniform, &InitialConfig::IidUniform, 5, 10, &s).unwrap();
        assert_eq!(run.first_agreement, Some(0));
    }

    #[test]
    fn coupling_merges_by_first_catastrophe() {
        for seed in 0..200 {
            let s = stream(seed, 0.8);
            let run = couple_run(&InitialConfig::Constant(0.01), &InitialConfig::IidUniform, 8, 40, &s).unwrap();
            assert!(run.merged_after_first_catastrophe());
            if let Some(t1) = run.trace.first_catastrophe() {
                assert!(run.first_agreement.unwrap() <= t1);
            }
        }
    }

    #[test]
    fn stationary_init_shares_one_age() {
        // given the age A, every site is a max of A uniforms: with p tiny,
        // A = 1 almost surely and sites are plain uniforms
        let s = stream(12, 1e-9);
        let f = init_stationary_field(50_000, &s);
        let d = ks_distance(&EmpiricalCdf::new(f.values()), |x| x);
        assert!(d < 0.01, "{d}");
        assert!(f.values().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
