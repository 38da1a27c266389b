//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! `cargo test -p nomarch --test acceptance`

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nomarch::config::{FitMethod, InputFormat, RunConfig};
use nomarch::formats::ModelFile;
use nomarch::ingest::{parse_german_credit, GERMAN_RISK};
use nomarch::pipeline;
use nomarch_core::projection::anchors;
use nomarch_core::{
    compute_rss, decode_dummy, distance_summary, encode_dummy, fit_aa, fit_ada, hamming_matrix, project_simplex,
    AaOptions, AdaInit, BinaryMatrix, DistanceMatrix, Matrix, NominalTable, Outcome, Point, SimplexLs,
    VariableSchema,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: &str = "7";

struct Check {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Check {
    Check { id, pass, detail }
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/german.data")
}

/// Runs the binary, panicking with its stderr on failure.
fn nomarch(args: &[&str]) -> Duration {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_nomarch")).args(args).env_remove("NOMARCH_THREADS").output().unwrap();
    assert!(o.status.success(), "nomarch {args:?}: {}", String::from_utf8_lossy(&o.stderr));
    t.elapsed()
}

fn german_run(out: &Path, method: &str, threads: &str) -> Duration {
    let input = fixture();
    let common = [
        "--input",
        input.to_str().unwrap(),
        "--format",
        "german-credit",
        "--out",
        out.to_str().unwrap(),
        "--threads",
        threads,
    ];
    let mut fit = vec!["fit", "--method", method, "--k", "10", "--restarts", "20", "--seed", SEED];
    fit.extend(common);
    let took = nomarch(&fit);
    let mut report = vec!["report"];
    report.extend(common);
    nomarch(&report);
    took
}

/// `(histogram, Total)` from the single method row of summary.csv.
fn summary(out: &Path) -> (BTreeMap<u32, usize>, u64) {
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let hist = (1..at("Total"))
        .map(|c| (header[c].parse().unwrap(), row[c].parse().unwrap()))
        .filter(|&(_, n)| n > 0)
        .collect();
    (hist, row[at("Total")].parse().unwrap())
}

fn ac1_ac2(ada: &Path, aa: &Path, fit_time: Duration) -> Vec<Check> {
    let (hist, total) = summary(ada);
    let profiles = fs::read_to_string(ada.join("profiles.csv")).unwrap();
    let mut lines = profiles.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let risk = header.iter().position(|h| *h == GERMAN_RISK).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let bad = rows.iter().filter(|r| r[risk] == "Bad").count();
    let rel = (total as f64 - 612.0).abs() / 612.0;
    let shape = rows.len() == 10 && header.len() == 6 && rows.iter().all(|r| r.len() == 6);
    let pass = total >= 600 && rel <= 0.04 && (2..=4).contains(&bad) && fit_time < Duration::from_secs(300) && shape;
    let ac1 = check(
        "AC1",
        pass,
        format!(
            "seed {SEED}: Total {total} (need >= 600 and within 4% of 612: off by {:.2}%), histogram {hist:?}, \
             {bad} Bad profiles (need 2-4), {} profiles x {} columns, fit {:.1}s (< 300s)",
            rel * 100.0,
            rows.len(),
            header.len(),
            fit_time.as_secs_f64()
        ),
    );
    let (aa_hist, aa_total) = summary(aa);
    let coverage = fs::read_to_string(aa.join("summary.csv")).unwrap();
    let flag = coverage.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    let ac2 = check(
        "AC2",
        total >= aa_total,
        format!("ADA Total {total} vs binarized AA Total {aa_total} (histogram {aa_hist:?}, coverage {flag})"),
    );
    vec![ac1, ac2]
}

fn seg_rss(x: &Matrix, i: usize, j: usize) -> f64 {
    let (a, b) = (x.row(i), x.row(j));
    x.iter_rows()
        .map(|p| {
            let d: Vec<f64> = a.iter().zip(b).map(|(u, v)| u - v).collect();
            let len2: f64 = d.iter().map(|v| v * v).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (p.iter().zip(b).zip(&d).map(|((p, b), d)| (p - b) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
            };
            p.iter().zip(a).zip(b).map(|((p, a), b)| (p - (t * a + (1.0 - t) * b)).powi(2)).sum::<f64>()
        })
        .sum()
}

fn random_nominal(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> (Vec<usize>, NominalTable) {
    let n = rng.random_range(4..=max_rows);
    let mut widths = Vec::new();
    while widths.iter().sum::<usize>() + 2 <= max_cols && widths.len() < 4 {
        let room = max_cols - widths.iter().sum::<usize>();
        widths.push(rng.random_range(2..=room.min(4)));
        if rng.random_bool(0.3) {
            break;
        }
    }
    let schemas = widths
        .iter()
        .enumerate()
        .map(|(v, &w)| VariableSchema::new(format!("v{v}"), (0..w).map(|c| format!("c{c}")).collect()).unwrap())
        .collect();
    let codes = (0..n).map(|_| widths.iter().map(|&w| rng.random_range(0..w)).collect()).collect();
    (widths, NominalTable::from_codes(schemas, codes, None).unwrap())
}

fn ac3() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut local, mut zero_swaps, mut worst_gap) = (0, 0, 0.0f64);
    for case in 0..30 {
        let (_, table) = random_nominal(&mut rng, 12, 8);
        let x = encode_dummy(&table).unwrap().values().clone();
        let n = x.rows();
        let model = fit_ada(&x, 2, &AdaInit::Auto(AaOptions { restarts: 3, seed: case, ..AaOptions::default() }))
            .unwrap();
        let (a, b) = (model.indices[0], model.indices[1]);
        let mut ok = true;
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            for j in i + 1..n {
                let r = seg_rss(&x, i, j);
                if r < best.0 {
                    best = (r, i, j);
                }
                let neighbour = [i, j].iter().any(|v| *v == a || *v == b) && (i, j) != (a.min(b), a.max(b));
                if neighbour && r < model.rss - 1e-9 {
                    ok = false;
                }
            }
        }
        ok &= (seg_rss(&x, a, b) - model.rss).abs() <= 1e-9;
        worst_gap = worst_gap.max(model.rss - best.0);
        local += ok as usize;
        let restart = fit_ada(&x, 2, &AdaInit::User(vec![best.1, best.2])).unwrap();
        zero_swaps += (restart.swap_steps == 0) as usize;
    }
    let took = t.elapsed();
    check(
        "AC3",
        local == 30 && zero_swaps == 30 && took < Duration::from_secs(10),
        format!(
            "{local}/30 locally optimal, {zero_swaps}/30 zero swaps from the global best, \
             largest gap to the global best {worst_gap:.3e}, {:.2}s (< 10s)",
            took.as_secs_f64()
        ),
    )
}

fn objective(v: &Matrix, w: &[f64], b: &[f64]) -> f64 {
    (0..b.len()).map(|d| ((0..v.rows()).map(|j| w[j] * v[(j, d)]).sum::<f64>() - b[d]).powi(2)).sum()
}

/// Grid minimum at step 1/500; the last two weights vary along a line, where
/// the objective is a convex quadratic, so only the grid points around its
/// minimizer are evaluated.
fn grid_min(v: &Matrix, b: &[f64]) -> f64 {
    const N: usize = 500;
    let k = v.rows();
    if k == 1 {
        return objective(v, &[1.0], b);
    }
    fn rec(v: &Matrix, b: &[f64], u: &mut [usize], pos: usize, left: usize, best: &mut f64) {
        let k = u.len();
        if pos + 2 == k {
            let mut f = |t: usize, u: &mut [usize]| {
                u[k - 2] = t;
                u[k - 1] = left - t;
                let w: Vec<f64> = u.iter().map(|&c| c as f64 / N as f64).collect();
                let val = objective(v, &w, b);
                *best = best.min(val);
                val
            };
            let (f0, f1) = (f(0, u), f(left, u));
            if left >= 2 {
                let mid = left / 2;
                let fm = f(mid, u);
                let (t1, tm) = (left as f64, mid as f64);
                let denom = -tm * -t1 * (tm - t1);
                let a = (t1 * (fm - f0) + tm * (f0 - f1)) / denom;
                let bq = (t1 * t1 * (f0 - fm) + tm * tm * (f1 - f0)) / denom;
                if a > 0.0 {
                    let t = (-bq / (2.0 * a)).clamp(0.0, t1);
                    f(t.floor() as usize, u);
                    f((t.ceil() as usize).min(left), u);
                }
            }
            return;
        }
        for c in 0..=left {
            u[pos] = c;
            rec(v, b, u, pos + 1, left - c, best);
        }
    }
    let mut best = f64::INFINITY;
    rec(v, b, &mut vec![0; k], 0, N, &mut best);
    best
}

fn ac4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut matched, mut feasible, mut worst) = (0, 0, 0.0f64);
    for _ in 0..100 {
        let (m, k) = (rng.random_range(1..=8), rng.random_range(1..=4));
        let v = Matrix::from_vec(k, m, (0..k * m).map(|_| rng.random_range(-1.0..2.0)).collect()).unwrap();
        let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.5..2.5)).collect();
        let sol = SimplexLs::new(v.clone()).unwrap().solve(&b).unwrap();
        let w = sol.weights.as_slice();
        feasible += (w.iter().all(|&x| x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= 1e-8) as usize;
        let gap = (objective(&v, w, &b) - grid_min(&v, &b)).abs();
        worst = worst.max(gap);
        matched += (gap <= 1e-4) as usize;
    }
    check(
        "AC4",
        matched == 100 && feasible == 100,
        format!("{matched}/100 within 1e-4 of the grid optimum (largest gap {worst:.2e}), {feasible}/100 feasible"),
    )
}

fn ac5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut monotone = 0;
    let mut worst_rise = f64::NEG_INFINITY;
    for run in 0..50 {
        let (n, m) = (rng.random_range(8..40), rng.random_range(2..10));
        let k = rng.random_range(1..=5.min(n));
        let x = Matrix::from_vec(n, m, (0..n * m).map(|_| rng.random_bool(0.4) as u8 as f64).collect()).unwrap();
        let model = fit_aa(&x, k, &AaOptions { restarts: 1, seed: run, ..AaOptions::default() }).unwrap();
        let rise = model.rss_history.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        worst_rise = worst_rise.max(rise);
        monotone += (rise <= 1e-9) as usize;
    }

    let mut rows = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    while rows.len() < 53 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        if a + b <= 1.0 {
            rows.push(vec![a, b]);
        }
    }
    let x = Matrix::from_rows(&rows).unwrap();
    let tri = fit_aa(&x, 3, &AaOptions::default()).unwrap();
    let recovery = rows[..3]
        .iter()
        .map(|v| tri.archetypes.iter_rows().map(|z| (z[0] - v[0]).hypot(z[1] - v[1])).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let rss = compute_rss(&x, &tri.alpha, &tri.archetypes).unwrap();
    check(
        "AC5",
        monotone == 50 && recovery <= 0.05 && rss <= 1e-3,
        format!(
            "{monotone}/50 runs non-increasing (largest step {worst_rise:.2e}), triangle vertices within \
             {recovery:.2e} (<= 0.05), rss {rss:.2e}"
        ),
    )
}

fn ac6() -> Check {
    let table = parse_german_credit(&fs::read_to_string(fixture()).unwrap()).unwrap();
    let x = encode_dummy(&table).unwrap();
    let widths: Vec<usize> = x.groups().iter().map(|g| g.len).collect();
    let exact = x
        .values()
        .iter_rows()
        .enumerate()
        .filter(|(i, row)| {
            let back = decode_dummy(row, table.schemas()).unwrap();
            back.iter().zip(table.codes(*i)).all(|(o, &c)| *o == Outcome::One(c))
        })
        .count();
    check(
        "AC6",
        exact == 1000 && x.n_rows() == 1000 && x.n_cols() == 25 && widths == [10, 5, 4, 4, 2],
        format!("{exact}/1000 rows round-trip, encoded {}x{}, group widths {widths:?}", x.n_rows(), x.n_cols()),
    )
}

/// A symmetric distance matrix with zero diagonal whose off-diagonal pairs
/// realise the given histogram.
fn from_histogram(k: usize, hist: &[(u32, usize)]) -> DistanceMatrix {
    let mut pairs = hist.iter().filter(|(d, _)| *d > 0).flat_map(|&(d, c)| std::iter::repeat_n(d, c / 2));
    let mut data = vec![0; k * k];
    for i in 0..k {
        for j in i + 1..k {
            let d = pairs.next().expect("histogram covers every pair");
            data[i * k + j] = d;
            data[j * k + i] = d;
        }
    }
    DistanceMatrix::new(k, data).unwrap()
}

fn ac7() -> Check {
    let ada = from_histogram(10, &[(0, 10), (4, 8), (6, 46), (8, 28), (10, 8)]);
    let (hist, total) = distance_summary(&ada).unwrap();
    let aa_total = distance_summary(&from_histogram(10, &[(0, 10), (4, 12), (6, 42), (8, 28), (10, 8)])).unwrap().1;
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut even = 0;
    for _ in 0..200 {
        let (widths, table) = random_nominal(&mut rng, 12, 14);
        let x = encode_dummy(&table).unwrap();
        let h = hamming_matrix(&BinaryMatrix::from_f64(x.values()).unwrap());
        let g = widths.len() as u32;
        let (hs, t) = distance_summary(&h).unwrap();
        let ok = (0..h.k()).all(|i| h.row(i).iter().all(|&d| d % 2 == 0 && d <= 2 * g))
            && hs.keys().all(|d| d % 2 == 0)
            && t % 2 == 0;
        even += ok as usize;
    }
    let want: BTreeMap<u32, usize> = [(0, 10), (4, 8), (6, 46), (8, 28), (10, 8)].into();
    check(
        "AC7",
        total == 612 && hist == want && aa_total == 604 && even == 200,
        format!("ADA histogram gives Total {total} (612), AA gives {aa_total} (604), evenness {even}/200"),
    )
}

fn ac8(ada_out: &Path) -> Check {
    let mut flat = true;
    for k in 1..=12 {
        let a = anchors(k);
        let vertices = project_simplex(&Matrix::identity(k)).unwrap();
        flat &= vertices == a;
        let uniform = project_simplex(&Matrix::from_vec(1, k, vec![1.0 / k as f64; k]).unwrap()).unwrap()[0];
        if k > 1 {
            flat &= uniform.dist(Point { x: 0.0, y: 0.0 }) <= 1e-12;
        }
    }

    let config = RunConfig::new(fixture(), InputFormat::GermanCredit, FitMethod::Ada);
    let data = pipeline::load(&config).unwrap();
    let path = ada_out.join("model.json");
    let file: ModelFile = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let fitted = pipeline::restore(&data, &file, &path).unwrap();
    let risk = data.color_var(&config).unwrap();
    let layout = pipeline::layout(&data, &fitted, risk).unwrap();
    let alpha = fitted.alpha();
    let bad: Vec<usize> = (0..alpha.rows()).filter(|&i| layout.color_labels[i] == "Bad").collect();
    let k = alpha.cols();
    let bad_weight: Vec<f64> = (0..k).map(|j| bad.iter().map(|&i| alpha[(i, j)]).sum::<f64>()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| bad_weight[b].total_cmp(&bad_weight[a]).then(a.cmp(&b)));
    let centre = bad.iter().fold(Point { x: 0.0, y: 0.0 }, |p, &i| Point {
        x: p.x + layout.points[i].x / bad.len() as f64,
        y: p.y + layout.points[i].y / bad.len() as f64,
    });
    let mean_dist = |set: &[usize]| set.iter().map(|&j| centre.dist(layout.anchors[j])).sum::<f64>() / set.len() as f64;
    let (near, rest) = (mean_dist(&order[..3]), mean_dist(&order[3..]));
    let labels: Vec<&str> = order[..3].iter().map(|&j| layout.anchor_labels[j].as_str()).collect();
    check(
        "AC8",
        flat && near < rest,
        format!(
            "vertex/uniform projections exact: {flat}; {} Bad rows centred at ({:.3}, {:.3}), mean distance {near:.3} \
             to anchors of archetypoids {labels:?} vs {rest:.3} to the other 7",
            bad.len(),
            centre.x,
            centre.y
        ),
    )
}

fn ac9(t1: &Path, scratch: &Path) -> Check {
    let t8 = scratch.join("threads-8");
    let again = scratch.join("threads-1-again");
    german_run(&t8, "ada", "8");
    german_run(&again, "ada", "1");
    let same = |f: &str| {
        let a = fs::read(t1.join(f)).unwrap();
        a == fs::read(t8.join(f)).unwrap() && a == fs::read(again.join(f)).unwrap()
    };
    let (p, s) = (same("profiles.csv"), same("summary.csv"));
    check("AC9", p && s, format!("profiles.csv identical: {p}, summary.csv identical: {s} (threads 1, 8, 1)"))
}

fn main() {
    let scratch = tempfile::tempdir().unwrap();
    let ada = scratch.path().join("ada");
    let aa = scratch.path().join("aa");
    let fit_time = german_run(&ada, "ada", "1");
    german_run(&aa, "aa", "1");

    let mut checks = ac1_ac2(&ada, &aa, fit_time);
    checks.extend([ac3(), ac4(), ac5(), ac6(), ac7(), ac8(&ada), ac9(&ada, scratch.path())]);
    checks.sort_by_key(|c| c.id);

    for c in &checks {
        println!("{} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
