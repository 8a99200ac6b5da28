//! Empirical validation kit: ECDFs, Kolmogorov-Smirnov distances,
//! histograms and a few estimators with standard errors.
//!
//! Everything here is a deterministic function of its input samples.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn sort_floats(xs: &mut [f64]) {
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Right-continuous empirical CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Self {
        Self::from_vec(samples.to_vec())
    }

    pub fn from_vec(mut samples: Vec<f64>) -> Self {
        sort_floats(&mut samples);
        EmpiricalCdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&s| s <= x)
    }

    fn count_lt(&self, x: f64) -> usize {
        self.sorted.partition_point(|&s| s < x)
    }

    fn frac(&self, count: usize) -> f64 {
        if self.sorted.is_empty() {
            0.0
        } else {
            count as f64 / self.sorted.len() as f64
        }
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.frac(self.count_le(x))
    }

    /// Fraction of samples `< x`, the left limit at `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.frac(self.count_lt(x))
    }

    /// Distinct sample values with `(#< v, #<= v)`.
    fn distinct(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            let v = *self.sorted.get(i)?;
            let start = i;
            while i < self.sorted.len() && self.sorted[i] == v {
                i += 1;
            }
            Some((v, start, i))
        })
    }
}

/// Fraction of samples `<= x`.
pub fn ecdf_eval(cdf: &EmpiricalCdf, x: f64) -> f64 {
    cdf.eval(x)
}

/// One-sample KS statistic against a continuous target CDF: the sup over
/// sample points of `|F_n(x) - F(x)|` and `|F_n(x-) - F(x)|`.
pub fn ks_distance<F: Fn(f64) -> f64>(cdf: &EmpiricalCdf, target: F) -> f64 {
    cdf.distinct()
        .map(|(x, lt, le)| {
            let f = target(x);
            (cdf.frac(le) - f).abs().max((cdf.frac(lt) - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Exact `sup_x |F_n(x) - F(x)|` for a target that may jump.
///
/// Both sides are compared at every sample point and every listed jump
/// point, on the right (value at `x`) and on the left (value just below `x`).
/// When `jumps` contains every discontinuity of `target` in the range of
/// interest this is the true sup distance.
pub fn ks_distance_with_jumps<F: Fn(f64) -> f64>(cdf: &EmpiricalCdf, target: F, jumps: &[f64]) -> f64 {
    let mut points: Vec<f64> = cdf.distinct().map(|(v, _, _)| v).collect();
    points.extend_from_slice(jumps);
    sort_floats(&mut points);
    points.dedup();
    points
        .iter()
        .map(|&x| {
            let right = (cdf.eval(x) - target(x)).abs();
            let left = (cdf.eval_left(x) - target(x.next_down())).abs();
            right.max(left)
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    let (xs, ys) = (a.samples(), b.samples());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((a.frac(i) - b.frac(j)).abs());
    }
    d
}

/// Fixed-width bin counts on `[lo, hi]`; samples outside are counted, not dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: Vec<u64>,
    /// Samples counted in some bin.
    pub total: u64,
    /// Samples below `lo`, above `hi`, or NaN.
    pub overflow: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid("range", format!("[{lo}, {hi}]"), "need finite lo < hi"));
        }
        if bins == 0 {
            return Err(Error::invalid("bins", bins, "need at least one bin"));
        }
        Ok(Histogram {
            lo,
            hi,
            bins: vec![0; bins],
            total: 0,
            overflow: 0,
        })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins.len() as f64
    }

    /// `[lo + i w, lo + (i+1) w)`; the last edge is `hi` exactly.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let n = self.bins.len();
        let w = self.width();
        let left = self.lo + i as f64 * w;
        let right = if i + 1 == n { self.hi } else { self.lo + (i + 1) as f64 * w };
        (left, right)
    }

    pub fn add(&mut self, x: f64) {
        if !(x >= self.lo && x <= self.hi) {
            self.overflow += 1;
            return;
        }
        let n = self.bins.len();
        let mut i = (((x - self.lo) / (self.hi - self.lo)) * n as f64) as usize;
        i = i.min(n - 1);
        // guard against rounding in the index computation
        while i > 0 && x < self.edges(i).0 {
            i -= 1;
        }
        while i + 1 < n && x >= self.edges(i + 1).0 {
            i += 1;
        }
        self.bins[i] += 1;
        self.total += 1;
    }

    /// Every sample seen, in range or not.
    pub fn samples_seen(&self) -> u64 {
        self.total + self.overflow
    }
}

/// Builds a histogram of `samples` with `bins` equal bins on `[lo, hi]`.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    let mut h = Histogram::new(lo, hi, bins)?;
    for &x in samples {
        h.add(x);
    }
    Ok(h)
}

/// An estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    /// `|value - target| <= k * std_err`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_err
    }
}

/// Sample mean with standard error `s / sqrt(n)`.
pub fn mean_estimate(xs: &[f64]) -> Result<Estimate> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value: mean,
        std_err: (var / n).sqrt(),
    })
}

/// Standard error of a frequency estimate of probability `q` from `n` trials.
pub fn binomial_se(q: f64, n: u64) -> f64 {
    (q * (1.0 - q) / n as f64).sqrt()
}

/// Covariance of the indicators `1{x1 <= u1}` and `1{x2 <= u2}`.
///
/// The estimate uses the `N-1` denominator; the standard error is the
/// plug-in `sd(z)/sqrt(N)` with `z_i = (a_i - ā)(b_i - b̄)`.
pub fn indicator_cov_est(pairs: &[(f64, f64)], u1: f64, u2: f64) -> Result<Estimate> {
    if pairs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: pairs.len(),
        });
    }
    let n = pairs.len() as f64;
    let ind = |x: f64, u: f64| if x <= u { 1.0 } else { 0.0 };
    let ma = pairs.iter().map(|&(a, _)| ind(a, u1)).sum::<f64>() / n;
    let mb = pairs.iter().map(|&(_, b)| ind(b, u2)).sum::<f64>() / n;
    let z: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| (ind(a, u1) - ma) * (ind(b, u2) - mb))
        .collect();
    let value = z.iter().sum::<f64>() / (n - 1.0);
    let zbar = z.iter().sum::<f64>() / n;
    let zvar = z.iter().map(|v| (v - zbar).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value,
        std_err: (zvar / n).sqrt(),
    })
}

/// `max_k |count_k / total - pmf(k)|` over the observed `k`.
pub fn pmf_compare<F: Fn(u64) -> f64>(counts: &BTreeMap<u64, u64>, pmf: F) -> Result<f64> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    Ok(counts
        .iter()
        .map(|(&k, &c)| (c as f64 / total as f64 - pmf(k)).abs())
        .fold(0.0, f64::max))
}

/// Tallies integer observations.
pub fn count_values<I: IntoIterator<Item = u64>>(values: I) -> BTreeMap<u64, u64> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts
}
