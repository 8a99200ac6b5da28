//! Data behind the two figures: the fitness histogram after a long run and
//! the time-4 versus stationary marginal CDFs.

use catastrophe_core::analytic::{phi, phi_t};
use catastrophe_core::env::{build_trace, EnvStream, RenewalTrace};
use catastrophe_core::field::{simulate, FitnessField, InitialConfig, MaxRandModel};
use catastrophe_core::stats::{histogram, ks_distance, EmpiricalCdf, Histogram};

use crate::output::{fmt_float, CsvTable, Grid};

pub const FIG1_P: f64 = 0.9;
pub const FIG1_SITES: usize = 10_000;
pub const FIG1_STEPS: u64 = 1000;
pub const FIG1_BINS: usize = 50;

pub const FIG2_P: f64 = 0.9;
pub const FIG2_T: u64 = 4;
pub const FIG2_GRID: Grid = Grid {
    lo: 0.001,
    hi: 0.999,
    count: 999,
};

#[derive(Debug, Clone)]
pub struct Fig1 {
    pub seed: u64,
    pub field: FitnessField,
    pub trace: RenewalTrace,
    pub histogram: Histogram,
    /// `t + 1 - T_{N(t)}` at the final time.
    pub age: u64,
    /// KS distance of the final field against its conditional law `u^age`.
    pub ks_given_age: f64,
}

/// (max,rand) run from i.i.d. uniforms at the figure settings.
pub fn fig1(seed: u64) -> Fig1 {
    let stream = EnvStream::new(seed, FIG1_P).expect("figure p is valid");
    let field = simulate(&MaxRandModel, &InitialConfig::IidUniform, FIG1_SITES, FIG1_STEPS, &stream)
        .expect("figure settings are valid");
    let trace = build_trace(&stream, FIG1_STEPS);
    let age = trace.age(FIG1_STEPS).expect("within horizon");
    let histogram = histogram(field.values(), 0.0, 1.0, FIG1_BINS).expect("valid bins");
    let exponent = age as f64;
    let ks_given_age = ks_distance(&EmpiricalCdf::new(field.values()), |x| x.powf(exponent));
    Fig1 {
        seed,
        field,
        trace,
        histogram,
        age,
        ks_given_age,
    }
}

/// Histogram with the flat (uniform) baseline and the expected counts
/// under the conditional law `u^age`.
pub fn fig1_table(fig: &Fig1) -> CsvTable {
    let h = &fig.histogram;
    let n = h.bins.len();
    let total = (h.total + h.overflow) as f64;
    let a = fig.age as f64;
    let mut table = CsvTable::new(&["bin_lo", "bin_hi", "count", "uniform_baseline", "expected_given_age"]);
    for i in 0..n {
        let (lo, hi) = h.edges(i);
        table.push_cells(&[
            fmt_float(lo),
            fmt_float(hi),
            h.bins[i].to_string(),
            fmt_float(total / n as f64),
            fmt_float(total * (hi.powf(a) - lo.powf(a))),
        ]);
    }
    table
}

/// Rows `(u, φ_4(u), φ(u))` on the 999-point grid at `p = 0.9`.
pub fn fig2_rows() -> Vec<[f64; 3]> {
    FIG2_GRID
        .points()
        .into_iter()
        .map(|u| [u, phi_t(u, FIG2_P, FIG2_T).get(), phi(u, FIG2_P).get()])
        .collect()
}

pub fn fig2_table(rows: &[[f64; 3]]) -> CsvTable {
    let mut table = CsvTable::new(&["u", "phi_4", "phi_inf"]);
    for row in rows {
        table.push_floats(row);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig2_reference_point() {
        let rows = fig2_rows();
        assert_eq!(rows.len(), 999);
        let mid = rows[499];
        assert!((mid[0] - 0.5).abs() < 1e-12);
        assert!((mid[1] - 0.107684).abs() < 1e-6);
        assert!((mid[2] - 0.05 / 0.55).abs() < 1e-6);
        assert!(rows.iter().all(|r| r[1] >= r[2]));
    }
}
