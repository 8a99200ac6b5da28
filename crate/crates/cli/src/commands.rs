use std::path::{Path, PathBuf};

use catastrophe_core::analytic::{
    indicator_cov, joint_cdf, phi_at, stationary_theta_cdf, theta_pgf, Horizon,
};
use catastrophe_core::env::{build_trace, EnvStream};
use catastrophe_core::field::{field_model, simulate, InitialConfig};
use catastrophe_core::stats::histogram;

use crate::args::{AnalyticLaw, Command, FigureArgs, FigureKind, SimulateArgs, UPoints, VerifyArgs};
use crate::error::{CliError, ExitStatus};
use crate::figures;
use crate::output::{fmt_float, with_suffix, write_outputs, CatastropheRecord, CsvTable, Grid, RunManifest};
use crate::verify::{self, VerifyOptions};

pub fn dispatch(command: Command, argv: &[String]) -> Result<ExitStatus, CliError> {
    match command {
        Command::Analytic { law } => cmd_analytic(law, argv),
        Command::Simulate(args) => cmd_simulate(args, argv),
        Command::Verify(args) => cmd_verify(args),
        Command::Figure(args) => cmd_figure(args, argv),
    }
}

fn check_open(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!("--{name} must lie in (0,1), got {v}")))
    }
}

fn check_grid_open(name: &str, grid: &Grid) -> Result<Vec<f64>, CliError> {
    let points = grid.points();
    for &x in &points {
        check_open(name, x)?;
    }
    Ok(points)
}

fn parse_horizon(t: &str) -> Result<Horizon, CliError> {
    t.parse().map_err(|e: catastrophe_core::Error| CliError::usage(e.to_string()))
}

fn u_points(points: &UPoints) -> Result<Vec<f64>, CliError> {
    match (points.u, &points.u_grid) {
        (Some(u), None) => Ok(vec![check_open("u", u)?]),
        (None, Some(grid)) => check_grid_open("u-grid", grid),
        _ => Err(CliError::usage("give exactly one of --u or --u-grid")),
    }
}

/// Prints to stdout, or writes the file plus a manifest naming it.
fn emit(table: &CsvTable, out: Option<&Path>, manifest: RunManifest) -> Result<(), CliError> {
    match out {
        None => {
            print!("{}", table.render());
            Ok(())
        }
        Some(path) => {
            let mut manifest = manifest;
            let manifest_path = path.with_extension("manifest.json");
            write_outputs(&mut manifest, &manifest_path, &[(path.to_path_buf(), table)])?;
            Ok(())
        }
    }
}

fn cmd_analytic(law: AnalyticLaw, argv: &[String]) -> Result<ExitStatus, CliError> {
    let manifest = RunManifest::new(argv);
    match law {
        AnalyticLaw::Phi { p, t, points, out } => {
            let p = check_open("p", p)?;
            let horizon = parse_horizon(&t)?;
            let mut table = CsvTable::new(&["u", "phi"]);
            for u in u_points(&points)? {
                table.push_floats(&[u, phi_at(u, p, horizon).get()]);
            }
            let manifest = manifest.param("law", "phi").param("p", p).param("t", horizon.to_string());
            emit(&table, out.as_deref(), manifest)?;
        }
        AnalyticLaw::Cov { p, u1, u2, u2_grid, out } => {
            let p = check_open("p", p)?;
            let u1 = check_open("u1", u1)?;
            let u2s = match (u2, u2_grid) {
                (Some(u2), None) => vec![check_open("u2", u2)?],
                (None, Some(grid)) => check_grid_open("u2-grid", &grid)?,
                _ => return Err(CliError::usage("give exactly one of --u2 or --u2-grid")),
            };
            let mut table = CsvTable::new(&["u1", "u2", "cov"]);
            for u2 in u2s {
                table.push_floats(&[u1, u2, indicator_cov(u1, u2, p)]);
            }
            emit(&table, out.as_deref(), manifest.param("law", "cov").param("p", p))?;
        }
        AnalyticLaw::Staircase { p, u, x, x_grid, out } => {
            let p = check_open("p", p)?;
            let u = check_open("u", u)?;
            let xs = match (x, x_grid) {
                (Some(x), None) => vec![check_open("x", x)?],
                (None, Some(grid)) => check_grid_open("x-grid", &grid)?,
                _ => return Err(CliError::usage("give exactly one of --x or --x-grid")),
            };
            let mut table = CsvTable::new(&["x", "F"]);
            for x in xs {
                table.push_floats(&[x, stationary_theta_cdf(x, u, p).get()]);
            }
            let manifest = manifest.param("law", "staircase").param("p", p).param("u", u);
            emit(&table, out.as_deref(), manifest)?;
        }
        AnalyticLaw::Joint { p, t, us, out } => {
            let p = check_open("p", p)?;
            let horizon = parse_horizon(&t)?;
            for &u in &us {
                check_open("us", u)?;
            }
            let value = joint_cdf(&us, p, horizon)?;
            let mut table = CsvTable::new(&["product", "joint_cdf"]);
            table.push_floats(&[us.iter().product(), value.get()]);
            let manifest = manifest
                .param("law", "joint")
                .param("p", p)
                .param("t", horizon.to_string())
                .param("us", &us);
            emit(&table, out.as_deref(), manifest)?;
        }
        AnalyticLaw::Pgf { p, u, s_grid, tol, out } => {
            let p = check_open("p", p)?;
            let u = check_open("u", u)?;
            if tol.is_nan() || tol <= 0.0 {
                return Err(CliError::usage(format!("--tol must be positive, got {tol}")));
            }
            let mut table = CsvTable::new(&["s", "pgf"]);
            for s in s_grid.points() {
                if !(0.0..=1.0).contains(&s) {
                    return Err(CliError::usage(format!("s = {s} outside [0,1]")));
                }
                table.push_floats(&[s, theta_pgf(s, u, p, tol)]);
            }
            let manifest = manifest.param("law", "pgf").param("p", p).param("u", u).param("tol", tol);
            emit(&table, out.as_deref(), manifest)?;
        }
    }
    Ok(ExitStatus::Success)
}

fn cmd_simulate(args: SimulateArgs, argv: &[String]) -> Result<ExitStatus, CliError> {
    let model = field_model(&args.model).map_err(|e| CliError::usage(e.to_string()))?;
    let p = check_open("p", args.p)?;
    if args.sites < model.min_sites() {
        return Err(CliError::usage(format!(
            "model {} needs at least {} sites",
            model.name(),
            model.min_sites()
        )));
    }
    if args.bins == 0 {
        return Err(CliError::usage("--bins must be positive"));
    }
    let init: InitialConfig = args.init.parse().map_err(|e: catastrophe_core::Error| CliError::usage(e.to_string()))?;
    let stream = EnvStream::new(args.seed, p)?;
    let field = simulate(model, &init, args.sites, args.steps, &stream)?;
    let hist = histogram(field.values(), 0.0, 1.0, args.bins)?;

    let mut hist_table = CsvTable::new(&["bin_lo", "bin_hi", "count"]);
    for (i, &count) in hist.bins.iter().enumerate() {
        let (lo, hi) = hist.edges(i);
        hist_table.push_cells(&[fmt_float(lo), fmt_float(hi), count.to_string()]);
    }
    let mut field_table = CsvTable::new(&["site", "fitness"]);
    for (i, &v) in field.values().iter().enumerate() {
        field_table.push_cells(&[(i + 1).to_string(), fmt_float(v)]);
    }

    let mut manifest = RunManifest::new(argv)
        .param("model", model.name())
        .param("p", p)
        .param("sites", args.sites)
        .param("steps", args.steps)
        .param("seed", args.seed)
        .param("init", &args.init)
        .param("bins", args.bins);
    if model.has_catastrophes() {
        manifest.catastrophes = Some(CatastropheRecord::from_trace(&build_trace(&stream, args.steps)));
    }
    manifest.result("histogram_total", hist.total);
    manifest.result("histogram_overflow", hist.overflow);

    let prefix = &args.out_prefix;
    write_outputs(
        &mut manifest,
        &with_suffix(prefix, "manifest.json"),
        &[
            (with_suffix(prefix, "histogram.csv"), &hist_table),
            (with_suffix(prefix, "field.csv"), &field_table),
        ],
    )?;
    Ok(ExitStatus::Success)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitStatus, CliError> {
    if args.list {
        for s in verify::suites() {
            println!("{:<14} {}", s.name(), s.summary());
        }
        return Ok(ExitStatus::Success);
    }
    let name = args.suite.as_deref().ok_or_else(|| CliError::usage("missing suite name"))?;
    let suite = verify::suite(name)?;
    let opts = VerifyOptions {
        p: args.p,
        u: args.u,
        u2: args.u2,
        t: args.t,
        steps: args.steps,
        reps: args.reps,
        sites: args.sites,
        seed: args.seed,
    };
    let report = suite.run(&opts)?;
    println!("{report}");
    Ok(if report.passed() {
        ExitStatus::Success
    } else {
        ExitStatus::VerificationFailed
    })
}

fn cmd_figure(args: FigureArgs, argv: &[String]) -> Result<ExitStatus, CliError> {
    let prefix: PathBuf = args.out_prefix;
    match args.which {
        FigureKind::Fig1 => {
            let fig = figures::fig1(args.seed);
            let table = figures::fig1_table(&fig);
            let mut manifest = RunManifest::new(argv)
                .param("figure", "fig1")
                .param("model", "maxrand")
                .param("p", figures::FIG1_P)
                .param("sites", figures::FIG1_SITES)
                .param("steps", figures::FIG1_STEPS)
                .param("seed", args.seed)
                .param("init", "uniform")
                .param("bins", figures::FIG1_BINS);
            manifest.catastrophes = Some(CatastropheRecord::from_trace(&fig.trace));
            manifest.result("ks_given_age", fig.ks_given_age);
            write_outputs(
                &mut manifest,
                &with_suffix(&prefix, "manifest.json"),
                &[(with_suffix(&prefix, "histogram.csv"), &table)],
            )?;
        }
        FigureKind::Fig2 => {
            let rows = figures::fig2_rows();
            let table = figures::fig2_table(&rows);
            let max_gap = rows.iter().map(|r| r[1] - r[2]).fold(f64::NEG_INFINITY, f64::max);
            let mut manifest = RunManifest::new(argv)
                .param("figure", "fig2")
                .param("p", figures::FIG2_P)
                .param("t", figures::FIG2_T)
                .param("grid", "0.001:0.999:999");
            manifest.result("max_gap_phi4_minus_phi", max_gap);
            write_outputs(
                &mut manifest,
                &with_suffix(&prefix, "manifest.json"),
                &[(with_suffix(&prefix, "csv"), &table)],
            )?;
        }
    }
    Ok(ExitStatus::Success)
}
