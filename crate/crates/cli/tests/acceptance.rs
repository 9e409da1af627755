//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion outside `KNOWN_UNATTAINABLE` fails.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semloss_cli::report::{ReportBody, ReportDocument};
use semloss_core::fixtures::{table1, table2, SIGMOID_FIG5};
use semloss_core::{shannon_snr_db, snr_ratio, Family, LinkOperatingPoint};

/// Criteria that evaluate published constants which do not satisfy the
/// stated bound; they are still run and reported.
const KNOWN_UNATTAINABLE: &[&str] = &["6a"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn semloss(args: &[&str]) -> (Output, Duration) {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_semloss")).args(args).output().expect("binary runs");
    (out, t.elapsed())
}

fn doc(dir: &Path, file: &str) -> ReportDocument {
    serde_json::from_str(&fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

fn within(d: Duration, secs: u64) -> bool {
    d <= Duration::from_secs(secs)
}

fn c1(dir: &Path) -> Outcome {
    let (out, took) = semloss(&["gradcheck", "--seeds", "200", "--fixture", "table1", "--out", dir.to_str().unwrap()]);
    let ReportBody::Gradcheck { max_rel_error, passed, .. } = doc(dir, "gradcheck.json").report else {
        unreachable!()
    };
    Outcome {
        id: "1",
        pass: out.status.success() && passed && max_rel_error <= 1e-5 && within(took, 10),
        detail: format!("gradient check, 200 draws: max rel err {max_rel_error:.3e} (<= 1e-5), {took:.1?} (< 10 s)"),
    }
}

fn run_fit2d(dir: &Path) -> (Output, Duration) {
    semloss(&["fit2d", "--fixture", "table1", "--nc", "4", "--no-timestamp", "--out", dir.to_str().unwrap()])
}

fn run_sweep(dir: &Path) -> (Output, Duration) {
    semloss(&["sweep", "--nc-min", "1", "--nc-max", "4", "--no-timestamp", "--out", dir.to_str().unwrap()])
}

fn c2(dir: &Path, took: Duration, ok: bool) -> Outcome {
    let ReportBody::Fit2d { report, .. } = doc(dir, "fit2d.json").report else { unreachable!() };
    let mape = report.mape.unwrap_or(f64::INFINITY);
    Outcome {
        id: "2",
        pass: ok && mape <= 0.5 && within(took, 60),
        detail: format!("surface fit, 4 terms: MAPE {mape:.4}% (<= 0.5%), {took:.1?} (< 60 s)"),
    }
}

fn c3(dir: &Path, took: Duration, ok: bool) -> Outcome {
    let ReportBody::Sweep { entries } = doc(dir, "sweep.json").report else { unreachable!() };
    let reports: Vec<_> = entries.iter().filter_map(|e| e.report.as_ref()).collect();
    let sse: Vec<f64> = reports.iter().map(|r| r.sse).collect();
    let mape: Vec<f64> = reports.iter().map(|r| r.mape.unwrap_or(f64::INFINITY)).collect();
    let monotone = sse.len() == 4 && sse.windows(2).all(|w| w[1] <= w[0]);
    let improves = mape.len() == 4 && mape[3] < mape[0];
    Outcome {
        id: "3",
        pass: ok && monotone && improves && within(took, 240),
        detail: format!(
            "term-count sweep 1..4: SSE {} non-increasing={monotone}, MAPE(4) {:.4}% < MAPE(1) {:.4}%, {took:.1?} (< 4 min)",
            sse.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" > "),
            mape.get(3).copied().unwrap_or(f64::NAN),
            mape.first().copied().unwrap_or(f64::NAN),
        ),
    }
}

fn c4(dir: &Path) -> Outcome {
    let (out, took) = semloss(&["fit1d", "--fixture", "table1", "--s-col", "0", "--no-timestamp", "--out", dir.to_str().unwrap()]);
    let ReportBody::Fit1d { fits, .. } = doc(dir, "fit1d.json").report else { unreachable!() };
    let sse = |fam: Family| {
        fits.iter()
            .find(|f| f.family == fam)
            .and_then(|f| f.report.as_ref())
            .map_or(f64::INFINITY, |r| r.sse)
    };
    let exp2 = sse(Family::Exp2);
    let others = [Family::Poly2, Family::Poly3, Family::Log, Family::Exp1];
    let best_other = others.iter().map(|&f| sse(f)).fold(f64::INFINITY, f64::min);
    Outcome {
        id: "4",
        pass: out.status.success() && others.iter().all(|&f| exp2 < sse(f)) && within(took, 10),
        detail: format!("model ranking at s=0.41: exp2 SSE {exp2:.4} < best other {best_other:.4}, {took:.1?} (< 10 s)"),
    }
}

fn c5() -> Outcome {
    let t = Instant::now();
    let grid = table1();
    let mut worst = 0.0f64;
    for row in &table2().rows {
        let col = grid.column_series(row.grid_s_index).unwrap();
        for (&q, &y) in col.x().iter().zip(col.y()) {
            worst = worst.max((row.params.eval(q).unwrap() - y).abs());
        }
    }
    let spot = table2().rows[0].params.eval(10.0).unwrap();
    let took = t.elapsed();
    Outcome {
        id: "5",
        pass: worst <= 0.5 && (spot - 81.93).abs() < 0.01 && within(took, 1),
        detail: format!("published exp2 rows vs grid: max |dev| {worst:.4} (<= 0.5), row 1 at q=10 -> {spot:.4}, {took:.1?}"),
    }
}

fn c6(dir: &Path) -> [Outcome; 2] {
    let t = Instant::now();
    let series = table2().a_series();
    let mut worst = 0.0f64;
    let mut published_sse = 0.0;
    for (&x, &y) in series.x().iter().zip(series.y()) {
        let r = SIGMOID_FIG5.eval(x).unwrap() - y;
        worst = worst.max(r.abs());
        published_sse += r * r;
    }
    let a = Outcome {
        id: "6a",
        pass: worst <= 1.0 && within(t.elapsed(), 1),
        detail: format!("published sigmoid vs a-column: max |dev| {worst:.4} (<= 1.0)"),
    };
    let (out, took) = semloss(&["fit1d", "--fixture", "table2", "--family", "sigmoid", "--no-timestamp", "--out", dir.to_str().unwrap()]);
    let ReportBody::Fit1d { fits, .. } = doc(dir, "fit1d.json").report else { unreachable!() };
    let own = fits[0].report.as_ref().map_or(f64::INFINITY, |r| r.sse);
    let b = Outcome {
        id: "6b",
        pass: out.status.success() && own <= published_sse && within(took, 1),
        detail: format!("own sigmoid fit SSE {own:.4} <= published {published_sse:.4}, {took:.1?} (< 1 s)"),
    };
    [a, b]
}

fn c7() -> Outcome {
    let t = Instant::now();
    let (cli, _) = semloss(&["linkcalc", "--rate", "2"]);
    let printed = String::from_utf8_lossy(&cli.stdout).into_owned();
    let zero = shannon_snr_db(1.0).unwrap();
    let two = shannon_snr_db(2.0).unwrap();
    let oracle = 10.0 * 3f64.log10();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rate = loop {
            let r = rng.gen_range(0.05..8.0);
            if (r - 1.0f64).abs() > 1e-3 {
                break r;
            }
        };
        let (g1, g2, k) = (rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0), rng.gen_range(-5.0..5.0));
        let s = |g: f64| snr_ratio(&LinkOperatingPoint::new(g, rate).unwrap()).unwrap();
        let scale = s(g1).abs() + s(g2).abs() + 1.0;
        worst = worst
            .max((s(g1 + g2) - s(g1) - s(g2)).abs() / scale)
            .max((s(k * g1) - k * s(g1)).abs() / (k.abs() * scale));
    }
    let took = t.elapsed();
    Outcome {
        id: "7",
        pass: zero == 0.0
            && (two - 4.7712).abs() <= 1e-4
            && (two - oracle).abs() <= 1e-12
            && printed.starts_with("gamma_shannon_db = 4.7712")
            && worst <= 1e-12
            && within(took, 1),
        detail: format!("link math: gamma_sh(1) = {zero}, gamma_sh(2) = {two:.6}, linearity over 1000 draws {worst:.1e}, {took:.1?}"),
    }
}

fn c9(a: &Path, b: &Path, extra: Duration) -> Outcome {
    let (f, tf) = run_fit2d(b);
    let (s, ts) = run_sweep(b);
    let same = |file: &str| fs::read(a.join(file)).unwrap() == fs::read(b.join(file)).unwrap();
    let total = extra + tf + ts;
    Outcome {
        id: "9",
        pass: f.status.success() && s.status.success() && same("fit2d.json") && same("sweep.json") && within(total, 300),
        detail: format!(
            "repeat runs byte-identical: fit2d.json {}, sweep.json {}, {total:.1?} total (< 5 min)",
            same("fit2d.json"),
            same("sweep.json")
        ),
    }
}

fn main() {
    let root = tempfile::tempdir().unwrap();
    let dir = |name: &str| {
        let d = root.path().join(name);
        fs::create_dir_all(&d).unwrap();
        d
    };

    let mut outcomes = vec![c1(&dir("c1"))];
    let first = dir("first");
    let (f, tf) = run_fit2d(&first);
    outcomes.push(c2(&first, tf, f.status.success()));
    let (s, ts) = run_sweep(&first);
    outcomes.push(c3(&first, ts, s.status.success()));
    outcomes.push(c4(&dir("c4")));
    outcomes.push(c5());
    outcomes.extend(c6(&dir("c6")));
    outcomes.push(c7());
    outcomes.push(c9(&first, &dir("second"), tf + ts));

    let mut unexpected = 0;
    for o in &outcomes {
        if o.id == "9" {
            println!("criterion 8   N/A          out of scope: published surface parameters, transmission chain, classifier accuracy generation");
        }
        let known = KNOWN_UNATTAINABLE.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {:<3} {tag:<12} {}", o.id, o.detail);
    }

    if unexpected > 0 {
        println!("{unexpected} criterion/criteria failed");
        std::process::exit(1);
    }
}
