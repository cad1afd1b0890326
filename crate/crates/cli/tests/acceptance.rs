//! End-to-end acceptance checks. Runs without the libtest harness so each
//! criterion prints exactly one PASS or FAIL line; the process fails if any
//! criterion does.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tdaband::confidence::{
    concentration_band, conservative_band, default_subsample_size, density_bootstrap, density_grid,
    density_hoeffding, lambert_lhs, lambert_solve, shells_band, subsample_band, Method,
};
use tdaband::datasets::{generate, GeneratorSpec, Shape};
use tdaband::density::{default_grid, hoeffding_band, hoeffding_tail, KernelSpec};
use tdaband::metrics::bottleneck_brute_force;
use tdaband::persistence::betti_from_diagram;
use tdaband::{
    betti_at, bottleneck, hausdorff, lower_star_filtration, reduce, rips_filtration, sup_distance, DensityParams,
    GridField, GridGeometry, PersistenceDiagram, PersistencePair, PointCloud,
};
use tdaband_cli::experiment::{cases, run_case, Case, Experiment, Settings};

const SEEDS: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    let coords: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    PointCloud::new(dim, coords).unwrap()
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut mismatches = 0;
    let mut checks = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let dim = rng.random_range(1..=3);
        let cloud = random_cloud(&mut rng, n, dim);
        let filtration = rips_filtration(&cloud, f64::INFINITY, 2).unwrap();
        let diagram = reduce(&filtration).unwrap();
        let mut values = filtration.values();
        values.dedup();
        for &v in &values {
            for p in 0..=2 {
                checks += 1;
                if betti_at(&filtration, v, p) != betti_from_diagram(&diagram, v, p) {
                    mismatches += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(30),
        format!("{checks} Betti checks, {mismatches} mismatches, {:.1}s", elapsed.as_secs_f64()),
    )
}

fn random_diagram(rng: &mut ChaCha8Rng) -> PersistenceDiagram {
    let k = rng.random_range(0..=6);
    let mut pairs: Vec<PersistencePair> = (0..k)
        .map(|_| {
            let b: f64 = rng.random_range(0.0..4.0);
            PersistencePair::new(0, b, b + rng.random_range(0.0..2.0))
        })
        .collect();
    if rng.random_bool(0.3) {
        pairs.push(PersistencePair::new(0, rng.random_range(0.0..1.0), f64::INFINITY));
    }
    PersistenceDiagram::new(pairs)
}

fn ac2() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    let mut axiom_failures = 0;
    for _ in 0..500 {
        let (a, b, c) = (random_diagram(&mut rng), random_diagram(&mut rng), random_diagram(&mut rng));
        let ab = bottleneck(&a, &b, 0);
        let brute = bottleneck_brute_force(&a, &b, 0);
        let err = if ab.is_infinite() || brute.is_infinite() {
            if ab == brute { 0.0 } else { f64::INFINITY }
        } else {
            (ab - brute).abs()
        };
        worst = worst.max(err);
        let ba = bottleneck(&b, &a, 0);
        let (ac, bc) = (bottleneck(&a, &c, 0), bottleneck(&b, &c, 0));
        let symmetric = ab == ba || (ab - ba).abs() <= 1e-12;
        let triangle = ac <= ab + bc + 1e-12;
        if bottleneck(&a, &a, 0) != 0.0 || !(ab >= 0.0) || !symmetric || !triangle {
            axiom_failures += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && axiom_failures == 0 && elapsed < Duration::from_secs(60),
        format!(
            "max |fast - brute| = {worst:.2e}, {axiom_failures} axiom failures, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn ac3() -> Outcome {
    let mut rng = rng(3);
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..1000 {
        let (rx, ry) = (rng.random_range(2..=8), rng.random_range(2..=8));
        let geometry = GridGeometry::new(vec![
            tdaband::Axis::new(0.0, 1.0, rx).unwrap(),
            tdaband::Axis::new(0.0, 1.0, ry).unwrap(),
        ])
        .unwrap();
        let f: Vec<f64> = (0..rx * ry).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scale: f64 = rng.random_range(0.0..0.5);
        let g: Vec<f64> = f.iter().map(|v| v + scale * rng.random_range(-1.0..1.0)).collect();
        let f = GridField::new(geometry.clone(), f).unwrap();
        let g = GridField::new(geometry, g).unwrap();
        let sup = sup_distance(&f, &g).unwrap();
        let df = reduce(&lower_star_filtration(&f).unwrap()).unwrap();
        let dg = reduce(&lower_star_filtration(&g).unwrap()).unwrap();
        for p in 0..=1 {
            let w = bottleneck(&df, &dg, p);
            if w > sup {
                violations += 1;
            }
            if sup > 0.0 {
                worst_ratio = worst_ratio.max(w / sup);
            }
        }
    }
    outcome(
        violations == 0,
        format!("2000 comparisons, {violations} violations, max W/sup = {worst_ratio:.3}"),
    )
}

fn settings(seed: u64) -> Settings {
    Settings {
        seed,
        ..Settings::default()
    }
}

fn case_with(experiment: Experiment, seed: u64, index: usize, keep: &[Method]) -> Case {
    let mut case = cases(experiment, &settings(seed)).unwrap().swap_remove(index);
    case.rips_methods.retain(|m| keep.contains(m));
    case.density_methods.retain(|m| keep.contains(m));
    case
}

fn exactly_one_each(map: &std::collections::BTreeMap<String, usize>) -> bool {
    map.iter().all(|(k, &v)| match k.as_str() {
        "H0" | "H1" => v == 1,
        _ => v == 0,
    })
}

fn ac4() -> Outcome {
    let start = Instant::now();
    let (mut sub, mut conc) = (0, 0);
    let (mut sub_c, mut conc_c) = (Vec::new(), Vec::new());
    for seed in 0..SEEDS {
        let case = case_with(Experiment::Ex4_1, seed, 0, &[Method::Subsample, Method::Concentration]);
        let run = run_case(&case, &settings(seed)).unwrap();
        let s = &run.summary.methods["subsample"];
        let c = &run.summary.methods["concentration"];
        sub += exactly_one_each(&s.significant) as usize;
        conc += exactly_one_each(&c.significant) as usize;
        sub_c.push(s.c);
        conc_c.push(c.c);
    }
    let elapsed = start.elapsed();
    outcome(
        sub >= 18 && conc >= 18 && elapsed < Duration::from_secs(300),
        format!(
            "exactly one H0 and one H1: subsample {sub}/20 (median c {:.3}), concentration {conc}/20 (median c {:.3}), {:.0}s",
            median(&sub_c),
            median(&conc_c),
            elapsed.as_secs_f64()
        ),
    )
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn ac5() -> Outcome {
    let (mut shells, mut conc) = (0, 0);
    for seed in 0..SEEDS {
        let case = case_with(Experiment::Ex4_2, seed, 0, &[Method::Shells, Method::Concentration]);
        let run = run_case(&case, &settings(seed)).unwrap();
        shells += (run.summary.methods["shells"].significant_in(1) >= 1) as usize;
        conc += (run.summary.methods["concentration"].significant_in(1) >= 1) as usize;
    }
    outcome(
        shells >= 14 && conc <= 6,
        format!("loop significant: shells {shells}/20, concentration {conc}/20"),
    )
}

fn ac6() -> Outcome {
    let (mut density, mut lost) = (0, 0);
    for seed in 0..SEEDS {
        let case = case_with(
            Experiment::Ex4_4,
            seed,
            0,
            &[Method::Concentration, Method::DensityBootstrap],
        );
        assert_eq!(case.spec.outliers.map(|o| o.count), Some(25));
        let run = run_case(&case, &settings(seed)).unwrap();
        density += (run.summary.methods["density_bootstrap"].significant_in(1) >= 1) as usize;
        lost += (run.summary.methods["concentration"].significant_in(1) == 0) as usize;
    }
    outcome(
        density >= 14 && lost >= 14,
        format!("density bootstrap keeps the loop {density}/20, concentration loses it {lost}/20"),
    )
}

fn ac7() -> Outcome {
    let mut hits = 0;
    let mut intervals = Vec::new();
    for seed in 0..SEEDS {
        let case = case_with(Experiment::Bart, seed, 0, &[Method::DensityBootstrap]);
        assert_eq!(case.options.bootstrap_reps, 300);
        let run = run_case(&case, &settings(seed)).unwrap();
        let count = run.summary.count.expect("count interval");
        if count.lo <= 5 && count.hi >= 3 {
            hits += 1;
        }
        intervals.push(format!("[{},{}]", count.lo, count.hi));
    }
    intervals.sort();
    intervals.dedup();
    outcome(
        hits >= 14,
        format!("interval meets [3,5] in {hits}/20; intervals seen {}", intervals.join(" ")),
    )
}

fn circle(n: usize, seed: u64) -> PointCloud {
    generate(&GeneratorSpec::new(Shape::UniformCircle { radius: 1.0 }, n, seed)).unwrap()
}

fn ac8() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases_run = 0;
    let alphas = [0.01, 0.05, 0.2];
    for rho in [0.05, 1.0 / (2.0 * PI), 1.0] {
        for n in [100, 500, 2000] {
            for &a in &alphas {
                let t = lambert_solve(rho, n, 1, a).unwrap();
                worst = worst.max((lambert_lhs(t, rho, n, 1) - a).abs());
                cases_run += 1;
            }
        }
    }
    for n in [200, 400, 800] {
        let cloud = circle(n, n as u64);
        let p = DensityParams::with_default_radius(n, 1).unwrap();
        for bw in [0.01, 0.05, p.radius.powf(0.25)] {
            for &a in &alphas {
                let band = shells_band(&cloud, &p, a, false, 0, Some(bw)).unwrap();
                worst = worst.max(band.diagnostics["residual"].as_f64().unwrap().abs());
                cases_run += 1;
            }
        }
    }
    for n in [250, 500, 1000] {
        for h in [0.2, 0.3, 0.5] {
            let k = KernelSpec::gaussian(h, 2).unwrap();
            for &a in &alphas {
                let delta = hoeffding_band(n, &k, 2.0, a).unwrap();
                worst = worst.max((hoeffding_tail(n, &k, 2.0, delta) - a).abs());
                cases_run += 1;
            }
        }
    }

    let cloud = circle(300, 8);
    let p = DensityParams::with_default_radius(300, 1).unwrap();
    let k = KernelSpec::gaussian(0.3, 2).unwrap();
    let grid = default_grid(&cloud, &k, 32).unwrap();
    let b = default_subsample_size(cloud.len());
    let mut monotone_failures = Vec::new();
    let mut prev: Vec<f64> = Vec::new();
    for a in [0.01, 0.02, 0.05, 0.1, 0.2, 0.5] {
        let now = vec![
            subsample_band(&cloud, b, 200, a, 1).unwrap().c,
            concentration_band(&cloud, &p, a, false, 1).unwrap().c,
            concentration_band(&cloud, &p, a, true, 1).unwrap().c,
            conservative_band(&cloud, &p, a).unwrap().c,
            shells_band(&cloud, &p, a, false, 1, None).unwrap().c,
            shells_band(&cloud, &p, a, true, 1, None).unwrap().c,
            density_hoeffding(cloud.len(), &k, &grid, a).unwrap().c,
            density_grid(cloud.len(), &k, &grid, a).unwrap().c,
            density_bootstrap(&cloud, &k, &grid, a, 100, 1).unwrap().c,
        ];
        for (i, (x, y)) in now.iter().zip(&prev).enumerate() {
            if x > y {
                monotone_failures.push(format!("band {i} at alpha {a}"));
            }
        }
        prev = now;
    }
    outcome(
        worst <= 1e-8 && monotone_failures.is_empty(),
        format!(
            "{cases_run} solves, max residual {worst:.2e}; monotone in alpha: {}",
            if monotone_failures.is_empty() { "yes".to_string() } else { monotone_failures.join(", ") }
        ),
    )
}

fn ac9() -> Outcome {
    let reference = {
        let m = 20_000;
        let pts: Vec<[f64; 2]> = (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        PointCloud::from_points(&pts).unwrap()
    };
    let n = 500;
    let p = DensityParams::with_default_radius(n, 1).unwrap();
    let b = default_subsample_size(n);
    let mut covered = [0usize; 3];
    for sim in 0..100u64 {
        let cloud = circle(n, 10_000 + sim);
        let h = hausdorff(&cloud, &reference).unwrap();
        let bands = [
            subsample_band(&cloud, b, 500, 0.05, sim).unwrap().c,
            concentration_band(&cloud, &p, 0.05, false, sim).unwrap().c,
            shells_band(&cloud, &p, 0.05, false, sim, None).unwrap().c,
        ];
        for (k, c) in bands.iter().enumerate() {
            covered[k] += (h <= *c) as usize;
        }
    }
    outcome(
        covered.iter().all(|&k| k >= 95),
        format!(
            "H <= c in subsample {}/100, concentration {}/100, shells {}/100",
            covered[0], covered[1], covered[2]
        ),
    )
}

fn cli(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_tdaband"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run tdaband");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn ac10() -> Outcome {
    let script: Vec<Vec<&str>> = vec![
        vec!["generate", "--kind", "uniform_circle", "--n", "300", "--seed", "7", "--out", "pts.csv"],
        vec!["generate", "--kind", "truncated_normal_circle+outliers", "--n", "200", "--seed", "3", "--out", "tn.csv"],
        vec!["diagram", "pts.csv", "--out", "rips.csv", "--plot", "rips.svg"],
        vec!["diagram", "pts.csv", "--kind", "density", "--h", "0.3", "--grid-res", "32", "--out", "dens.csv", "--plot", "dens.svg"],
        vec!["band", "pts.csv", "--method", "subsample", "--alpha", "0.05", "--seed", "1", "--out", "sub.json"],
        vec!["band", "pts.csv", "--method", "concentration", "--d", "1", "--out", "conc.json"],
        vec!["band", "pts.csv", "--method", "concentration", "--split", "--seed", "4", "--out", "conc_split.json"],
        vec!["band", "pts.csv", "--method", "shells", "--out", "shells.json"],
        vec!["band", "pts.csv", "--method", "conservative", "--out", "cons.json"],
        vec!["band", "pts.csv", "--method", "density_bootstrap", "--B", "50", "--grid-res", "32", "--seed", "2", "--out", "boot.json"],
        vec!["band", "pts.csv", "--method", "density_hoeffding", "--out", "hoef.json"],
        vec!["band", "pts.csv", "--method", "density_grid", "--out", "grid.json"],
        vec!["classify", "rips.csv", "sub.json", "--threshold", "0.1", "--out", "cls.json", "--plot", "cls.svg"],
        vec!["experiment", "ex4_1", "--n", "150", "--reps", "50", "--B", "30", "--grid-res", "24", "--seed", "5", "--out", "ex"],
        vec!["experiment", "bart", "--n", "300", "--B", "30", "--grid-res", "128", "--seed", "5", "--out", "bart"],
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("ex")).unwrap();
        fs::create_dir(dir.path().join("bart")).unwrap();
        let mut record = Vec::new();
        for args in &script {
            let (code, stdout) = cli(args, dir.path());
            record.push((args.join(" "), code, stdout));
        }
        let files = [snapshot(dir.path()), snapshot(&dir.path().join("ex")), snapshot(&dir.path().join("bart"))];
        runs.push((record, files));
    }
    let failed: Vec<&String> = runs[0].0.iter().filter(|(_, code, _)| *code != 0).map(|(a, _, _)| a).collect();
    let stdout_same = runs[0].0 == runs[1].0;
    let files_same = runs[0].1 == runs[1].1;
    let file_count: usize = runs[0].1.iter().map(Vec::len).sum();
    outcome(
        failed.is_empty() && stdout_same && files_same,
        format!(
            "{} commands, {file_count} output files; nonzero exits {:?}; stdout identical {stdout_same}; files identical {files_same}",
            script.len(),
            failed
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("AC1 persistence matches rank-based Betti numbers", ac1),
        ("AC2 bottleneck matches exhaustive matching", ac2),
        ("AC3 diagram stability under sup-norm perturbation", ac3),
        ("AC4 uniform circle: one component and one loop", ac4),
        ("AC5 truncated normal circle: shells vs concentration", ac5),
        ("AC6 circle with outliers: density vs distance", ac6),
        ("AC7 claw density: bootstrap count interval", ac7),
        ("AC8 solver residuals and monotonicity in alpha", ac8),
        ("AC9 coverage of the distance-based bands", ac9),
        ("AC10 CLI determinism", ac10),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let mut failures = 0;
    for (name, check) in criteria {
        let id = name.split_whitespace().next().unwrap();
        if !only.is_empty() && !only.iter().any(|o| o == id) {
            continue;
        }
        let result = check();
        println!("{} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        failures += (!result.pass) as usize;
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
