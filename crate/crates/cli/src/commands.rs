use std::path::Path;

use anyhow::anyhow;
use chrono::{SecondsFormat, Utc};
use semloss_core::fit::config::paper_scale_random;
use semloss_core::fit::{check_gradient, fit_1d, fit_semantic_loss, nc_sweep, FitConfig, FitReport};
use semloss_core::fixtures::{self, Fixture, FixtureName};
use semloss_core::surface::SurfaceData;
use semloss_core::{
    eval_semantic_loss, load_grid_csv, shannon_snr_db, snr_ratio, AccuracyGrid, Error, Family, LinkOperatingPoint,
    Series1D,
};

use crate::args::*;
use crate::report::*;

pub const GRADCHECK_TOLERANCE: f64 = 1e-5;
pub const DENSE_POINTS: usize = 200;
pub const MAX_SWEEP_TERMS: usize = 16;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Fit(anyhow::Error),
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Fit(_) => 3,
            Failure::Verification(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e:#}"),
            Failure::Fit(e) => write!(f, "fit failed: {e:#}"),
            Failure::Verification(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn fit_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Fit(e.into())
}

/// Shared state for one invocation.
pub struct Invocation {
    pub name: &'static str,
    pub argv: Vec<String>,
    started: String,
}

impl Invocation {
    pub fn new(name: &'static str, argv: Vec<String>) -> Self {
        Invocation { name, argv, started: now() }
    }

    fn document(&self, source: &str, report: ReportBody, no_timestamp: bool) -> ReportDocument {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            command: CommandEcho { name: self.name.to_string(), args: echo_args(&self.argv) },
            source: source.to_string(),
            report,
            timestamps: (!no_timestamp).then(|| Timestamps { started: self.started.clone(), finished: now() }),
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

enum Data {
    Grid(AccuracyGrid),
    Series(Series1D),
}

fn resolve(source: &SourceArgs) -> Result<(Data, String), Failure> {
    if let Some(path) = &source.csv {
        let grid = load_grid_csv(path).map_err(input)?;
        return Ok((Data::Grid(grid), format!("csv:{}", path.display())));
    }
    let name: FixtureName = source.fixture.as_deref().unwrap_or("table1").parse().map_err(input)?;
    let data = match fixtures::embedded_fixture(name) {
        Fixture::Table1(g) => Data::Grid(g),
        Fixture::Table2(t) => Data::Series(t.a_series()),
        _ => return Err(input(anyhow!("fixture `{name}` is a parameter set, not data"))),
    };
    Ok((data, format!("fixture:{name}")))
}

fn resolve_grid(source: &SourceArgs) -> Result<(AccuracyGrid, String), Failure> {
    match resolve(source)? {
        (Data::Grid(g), label) => Ok((g, label)),
        (Data::Series(_), label) => Err(input(anyhow!("{label} is a 1-D series, a grid is required"))),
    }
}

fn validated_config(args: &ConfigArgs) -> Result<FitConfig, Failure> {
    let cfg = args.to_config();
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

fn write_doc(doc: &ReportDocument, out: &Path, file: &str) -> CmdResult {
    doc.write(out, file).map_err(input)
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "n/a".into())
}

pub fn fit1d(inv: &Invocation, args: &Fit1dArgs) -> CmdResult {
    let config = validated_config(&args.config)?;
    let families: Vec<Family> = if args.family.eq_ignore_ascii_case("all") {
        vec![Family::Poly2, Family::Poly3, Family::Log, Family::Exp1, Family::Exp2]
    } else {
        vec![args.family.parse().map_err(input)?]
    };
    let (data, source) = resolve(&args.source)?;
    let (series, s_value) = match data {
        Data::Grid(g) => {
            let s_value = g.s_axis().get(args.s_col).copied();
            (g.column_series(args.s_col).map_err(input)?, s_value)
        }
        Data::Series(s) => (s, None),
    };

    let fits: Vec<Fit1dEntry> = families
        .iter()
        .map(|&family| match fit_1d(family, &series, &config) {
            Ok(report) => Fit1dEntry { family, report: Some(report), error: None },
            Err(e) => Fit1dEntry { family, report: None, error: Some(e.to_string()) },
        })
        .collect();
    if fits.iter().all(|f| f.report.is_none()) {
        let msgs: Vec<String> = fits.iter().filter_map(|f| f.error.as_ref().map(|e| format!("{}: {e}", f.family))).collect();
        return Err(fit_failure(anyhow!(msgs.join("; "))));
    }
    let best_family = fits
        .iter()
        .filter_map(|f| f.report.as_ref().map(|r| (f.family, r.sse)))
        .fold(None::<(Family, f64)>, |b, (f, s)| match b {
            Some((_, bs)) if bs <= s => b,
            _ => Some((f, s)),
        })
        .map(|(f, _)| f);

    let out = &args.output.out;
    let x = series.x();
    let (lo, hi) = (x[0], x[x.len() - 1]);
    println!("family\tsse\tmape%\tr2\tmax|res|");
    for entry in &fits {
        let Some(rep) = &entry.report else {
            println!("{}\tfailed: {}", entry.family, entry.error.as_deref().unwrap_or(""));
            continue;
        };
        let params = rep.curve_params().expect("1-D fit");
        let dense = (0..DENSE_POINTS)
            .map(|i| {
                let xi = lo + (hi - lo) * i as f64 / (DENSE_POINTS - 1) as f64;
                params.eval(xi).map(|y| vec![xi, y])
            })
            .collect::<Result<Vec<_>, Error>>()
            .map_err(fit_failure)?;
        let table = tsv(&["x", "fitted"], &dense).map_err(fit_failure)?;
        write_file(out, &format!("fit1d_{}.tsv", entry.family), &table).map_err(input)?;
        println!(
            "{}\t{:.6}\t{}\t{}\t{:.4}",
            entry.family,
            rep.sse,
            fmt_opt(rep.mape, 4),
            fmt_opt(rep.r_squared, 6),
            rep.max_abs_residual()
        );
    }
    if let Some(best) = best_family {
        println!("best: {best}");
    }
    let doc = inv.document(&source, ReportBody::Fit1d { s_value, fits, best_family }, args.output.no_timestamp);
    write_doc(&doc, out, "fit1d.json")
}

fn surface_table(grid: &AccuracyGrid, report: &FitReport) -> anyhow::Result<String> {
    let nq = grid.q_axis().len();
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &s) in grid.s_axis().iter().enumerate() {
        for (j, &q) in grid.q_axis().iter().enumerate() {
            let measured = grid.value(i, j);
            let residual = report.residuals[i * nq + j];
            rows.push(vec![q, s, measured - residual, measured, residual]);
        }
    }
    tsv(&["q", "s", "fitted", "measured", "residual"], &rows)
}

pub fn fit2d(inv: &Invocation, args: &Fit2dArgs) -> CmdResult {
    let config = validated_config(&args.config)?;
    if args.nc == 0 {
        return Err(input(anyhow!("--nc must be >= 1")));
    }
    let (grid, source) = resolve_grid(&args.source)?;
    let report = fit_semantic_loss(&grid, args.nc, &config).map_err(fit_failure)?;
    println!(
        "nc={} sse={:.6} mape={}% r2={} iterations={} stop={:?}",
        args.nc,
        report.sse,
        fmt_opt(report.mape, 4),
        fmt_opt(report.r_squared, 6),
        report.iterations_used,
        report.stop_reason
    );
    let table = surface_table(&grid, &report).map_err(fit_failure)?;
    write_file(&args.output.out, "fit2d_surface.tsv", &table).map_err(input)?;
    let doc = inv.document(&source, ReportBody::Fit2d { n_terms: args.nc, report }, args.output.no_timestamp);
    write_doc(&doc, &args.output.out, "fit2d.json")
}

pub fn sweep(inv: &Invocation, args: &SweepArgs) -> CmdResult {
    let config = validated_config(&args.config)?;
    if args.nc_min < 1 || args.nc_min > args.nc_max || args.nc_max > MAX_SWEEP_TERMS {
        return Err(input(anyhow!(
            "need 1 <= nc-min <= nc-max <= {MAX_SWEEP_TERMS}, got {}..{}",
            args.nc_min,
            args.nc_max
        )));
    }
    let (grid, source) = resolve_grid(&args.source)?;
    let range: Vec<usize> = (args.nc_min..=args.nc_max).collect();
    let entries = nc_sweep(&grid, &range, &config).map_err(input)?;
    if entries.iter().all(|e| e.report.is_none()) {
        return Err(fit_failure(anyhow!(entries[0].error.clone().unwrap_or_default())));
    }

    println!("nc\tsse\tmape%\twarm_start");
    let mut rows = Vec::new();
    for e in &entries {
        match &e.report {
            Some(r) => {
                println!("{}\t{:.6}\t{}\t{}", e.n_terms, r.sse, fmt_opt(r.mape, 4), e.warm_start_won);
                rows.push(vec![
                    e.n_terms as f64,
                    r.sse,
                    r.mape.unwrap_or(-1.0),
                    r.r_squared.unwrap_or(-1.0),
                    r.iterations_used as f64,
                    f64::from(u8::from(e.warm_start_won)),
                ]);
            }
            None => println!("{}\tfailed: {}", e.n_terms, e.error.as_deref().unwrap_or("")),
        }
    }
    let table = tsv(&["nc", "sse", "mape", "r_squared", "iterations", "warm_start_won"], &rows).map_err(fit_failure)?;
    write_file(&args.output.out, "sweep.tsv", &table).map_err(input)?;
    let doc = inv.document(&source, ReportBody::Sweep { entries }, args.output.no_timestamp);
    write_doc(&doc, &args.output.out, "sweep.json")
}

pub const DEFAULT_Q_SCALES: [f64; 3] = [1.0, 100.0, 1000.0];
pub const ACCURACY_SCALES: [f64; 2] = [1.0, 100.0];

/// Evaluate the published parameters on `grid` with q and the measured
/// accuracy each divided by a candidate scale.
pub fn diagnose_hypothesis(grid: &AccuracyGrid, q_divisor: f64, accuracy_divisor: f64) -> Hypothesis {
    let params = fixtures::table3().params;
    let mut predicted = Vec::with_capacity(grid.len());
    let mut actual = Vec::with_capacity(grid.len());
    let mut peak: Option<(f64, f64, f64)> = None;
    for (i, &s) in grid.s_axis().iter().enumerate() {
        for (j, &q) in grid.q_axis().iter().enumerate() {
            let qn = q / q_divisor;
            match eval_semantic_loss(&params, qn, s) {
                Ok(v) => {
                    if peak.map_or(true, |(p, _, _)| v.abs() > p) {
                        peak = Some((v.abs(), qn, s));
                    }
                    predicted.push(v);
                    actual.push(grid.value(i, j) / accuracy_divisor);
                }
                Err(e) => {
                    return Hypothesis {
                        q_divisor,
                        accuracy_divisor,
                        mape: None,
                        max_abs_prediction: None,
                        dominant_term: None,
                        overflow: Some(e.to_string()),
                    }
                }
            }
        }
    }
    let dominant_term = peak.and_then(|(_, q, s)| {
        params
            .terms
            .iter()
            .map(|t| {
                let sigma = 1.0 / (1.0 + (-t.mu3 * s - t.mu4).exp());
                ((t.mu1 + t.mu2 * sigma) * (t.mu5 * q).exp()).abs()
            })
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    });
    Hypothesis {
        q_divisor,
        accuracy_divisor,
        mape: semloss_core::fit::metrics::mape(&predicted, &actual).ok(),
        max_abs_prediction: peak.map(|p| p.0),
        dominant_term,
        overflow: None,
    }
}

pub fn diagnose_table3(inv: &Invocation, args: &DiagnoseArgs) -> CmdResult {
    let q_scales: Vec<f64> = if args.q_scales.is_empty() { DEFAULT_Q_SCALES.to_vec() } else { args.q_scales.clone() };
    if q_scales.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(input(anyhow!("q scales must be finite and > 0")));
    }
    let (grid, source) = resolve_grid(&args.source)?;
    let mut hypotheses = Vec::new();
    println!("q_divisor\taccuracy_divisor\tmape%\tmax|xi|\tdominant_term\toverflow");
    for &qd in &q_scales {
        for &ad in &ACCURACY_SCALES {
            let h = diagnose_hypothesis(&grid, qd, ad);
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                qd,
                ad,
                h.mape.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "n/a".into()),
                h.max_abs_prediction.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "n/a".into()),
                h.dominant_term.map(|k| (k + 1).to_string()).unwrap_or_else(|| "n/a".into()),
                h.overflow.as_deref().unwrap_or("-")
            );
            hypotheses.push(h);
        }
    }
    let rows: Vec<Vec<f64>> = hypotheses
        .iter()
        .filter(|h| h.mape.is_some())
        .map(|h| vec![h.q_divisor, h.accuracy_divisor, h.mape.unwrap(), h.max_abs_prediction.unwrap()])
        .collect();
    let table = tsv(&["q_divisor", "accuracy_divisor", "mape", "max_abs_prediction"], &rows).map_err(input)?;
    write_file(&args.output.out, "diagnose_table3.tsv", &table).map_err(input)?;
    let doc = inv.document(&source, ReportBody::DiagnoseTable3 { hypotheses }, args.output.no_timestamp);
    write_doc(&doc, &args.output.out, "diagnose_table3.json")
}

fn component_name(flat_index: usize) -> String {
    if flat_index == 0 {
        "mu0".into()
    } else {
        let k = (flat_index - 1) / 5 + 1;
        let i = (flat_index - 1) % 5 + 1;
        format!("mu{i}[term {k}]")
    }
}

pub fn gradcheck(inv: &Invocation, args: &GradcheckArgs) -> CmdResult {
    if args.seeds == 0 {
        return Err(input(anyhow!("--seeds must be >= 1")));
    }
    if args.nc == 0 {
        return Err(input(anyhow!("--nc must be >= 1")));
    }
    if !(args.step > 0.0) {
        return Err(input(anyhow!("--step must be > 0")));
    }
    let config = validated_config(&args.config)?;
    let (grid, source) = resolve_grid(&args.source)?;
    let data = SurfaceData::from_grid(&grid, config.q_divisor());

    let mut checks = Vec::with_capacity(args.seeds);
    for seed_index in 0..args.seeds {
        let params = paper_scale_random(&data, args.nc, &mut config.start_rng(seed_index));
        let c = check_gradient(&params, &data, args.step).map_err(input)?;
        checks.push(SeedCheck {
            seed_index,
            max_rel_error: c.max_rel_error,
            worst_component: component_name(c.worst_component),
        });
    }
    let worst = checks
        .iter()
        .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
        .expect("at least one seed")
        .clone();
    let passed = worst.max_rel_error <= GRADCHECK_TOLERANCE;
    println!(
        "seeds={} max_rel_error={:.3e} worst={} (seed {}) {}",
        args.seeds,
        worst.max_rel_error,
        worst.worst_component,
        worst.seed_index,
        if passed { "PASS" } else { "FAIL" }
    );
    let doc = inv.document(
        &source,
        ReportBody::Gradcheck {
            n_terms: args.nc,
            step: args.step,
            tolerance: GRADCHECK_TOLERANCE,
            checks,
            max_rel_error: worst.max_rel_error,
            passed,
        },
        args.output.no_timestamp,
    );
    write_doc(&doc, &args.output.out, "gradcheck.json")?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "max relative error {:.3e} > {GRADCHECK_TOLERANCE:e} at {} (seed {})",
            worst.max_rel_error, worst.worst_component, worst.seed_index
        )))
    }
}

pub fn linkcalc(inv: &Invocation, args: &LinkcalcArgs) -> CmdResult {
    let shannon = shannon_snr_db(args.rate).map_err(input)?;
    println!("gamma_shannon_db = {shannon:.4}");
    let ratio = match args.gamma_db {
        Some(gamma_db) => {
            let point = LinkOperatingPoint::new(gamma_db, args.rate).map_err(input)?;
            let s = snr_ratio(&point).map_err(input)?;
            println!("s = {s:.4}");
            Some(s)
        }
        None => None,
    };
    if let Some(out) = &args.out {
        let body = ReportBody::Linkcalc {
            rate_bps_hz: args.rate,
            gamma_db: args.gamma_db,
            gamma_shannon_db: shannon,
            ratio,
        };
        write_doc(&inv.document("none", body, args.no_timestamp), out, "linkcalc.json")?;
    }
    Ok(())
}

fn fixture_csv(fixture: &Fixture) -> String {
    match fixture {
        Fixture::Table1(g) => g.to_csv_string(),
        Fixture::Table2(t) => {
            let mut out = String::from("s_label,a,b,c,d,grid_s_index\n");
            for row in &t.rows {
                let p = row.params.to_vec();
                out += &format!("{},{},{},{},{},{}\n", row.label, p[0], p[1], p[2], p[3], row.grid_s_index);
            }
            out
        }
        Fixture::Table3(t) => {
            let mut out = String::from("param,term,value\n");
            out += &format!("mu0,,{}\n", t.params.mu0);
            for (k, term) in t.params.terms.iter().enumerate() {
                for (i, v) in term.to_array().iter().enumerate() {
                    out += &format!("mu{},{},{}\n", i + 1, k + 1, v);
                }
            }
            for (k, v) in t.mu5_printed.iter().enumerate() {
                out += &format!("mu5_printed_x1e3,{},{}\n", k + 1, v);
            }
            out
        }
        Fixture::SigmoidFig5 { params } => {
            let p = params.to_vec();
            format!("param,value\nb,{}\nc,{}\nd,{}\ne,{}\n", p[0], p[1], p[2], p[3])
        }
    }
}

pub fn export_fixture(args: &ExportArgs) -> CmdResult {
    let name: FixtureName = args.name.parse().map_err(input)?;
    let csv = fixture_csv(&fixtures::embedded_fixture(name));
    match &args.out {
        Some(dir) => write_file(dir, &format!("{name}.csv"), &csv).map_err(input),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
