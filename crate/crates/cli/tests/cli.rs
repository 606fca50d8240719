use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rfpca::io::{read_model_json, read_trajectories_csv};
use rfpca::ManifoldSpec;
use tempfile::TempDir;

fn rfpca(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfpca")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = rfpca(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(dir: &Path, manifold: &str, n: usize, seed: u64, out: &str) {
    ok(dir, &["simulate", "--manifold", manifold, "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", out]);
}

fn read_csv(path: &Path, spec: &ManifoldSpec) -> Vec<rfpca::TrajectorySample> {
    read_trajectories_csv(fs::File::open(path).unwrap(), spec).unwrap()
}

/// Parses rows `K value FVE ...` below a header line.
fn table(stdout: &str, header: &str) -> Vec<Vec<f64>> {
    stdout
        .lines()
        .skip_while(|l| !l.starts_with(header))
        .skip(1)
        .take_while(|l| l.split(' ').next().is_some_and(|w| w.parse::<usize>().is_ok()))
        .map(|l| l.split(' ').map(|w| w.parse().unwrap()).collect())
        .collect()
}

fn selected_k(stdout: &str) -> usize {
    let line = stdout.lines().find(|l| l.starts_with("K* ")).unwrap();
    line.split(' ').nth(1).unwrap().parse().unwrap()
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [a.path(), b.path()] {
        simulate(dir, "so3", 60, 11, "d.csv");
        ok(dir, &["fit", "--manifold", "so3", "--input", "d.csv", "--out", "m.json"]);
        ok(dir, &["reconstruct", "--model", "m.json", "--K", "3", "--out", "r.csv"]);
    }
    for file in ["d.csv", "d.truth.json", "m.json", "r.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs between runs");
    }
}

#[test]
fn sphere_pipeline_reports_expected_fve() {
    let dir = TempDir::new().unwrap();
    let mut hits = 0;
    let mut first = Vec::new();
    for seed in 1..=5 {
        let csv = format!("d{seed}.csv");
        let json = format!("m{seed}.json");
        simulate(dir.path(), "sphere:2", 100, seed, &csv);
        let fit = ok(dir.path(), &["fit", "--manifold", "sphere:2", "--input", &csv, "--out", &json]);
        let rows = table(&fit, "K eigenvalue FVE");
        assert_eq!(rows.len(), 10);
        let fve1 = 100.0 * rows[0][2];
        first.push(fve1);
        hits += usize::from(selected_k(&fit) == 3);

        let fve = ok(dir.path(), &["fve", "--model", &json, "--input", &csv]);
        let rows = table(&fve, "K U_R FVE_R");
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0][2], 0.0);
        assert!((100.0 * rows[1][2] - fve1).abs() < 1e-6);
        assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1] + 1e-12));
    }
    assert!((71.0..=77.0).contains(&first[0]), "seed 1: FVE_1 = {}", first[0]);
    let mean = first.iter().sum::<f64>() / first.len() as f64;
    assert!((71.0..=77.0).contains(&mean), "mean FVE_1 = {mean} over {first:?}");
    assert!(hits >= 4, "K* = 3 in only {hits} of 5 seeds");
}

#[test]
fn l2_baseline_columns_trail_the_riemannian_ones() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "sphere:2", 100, 3, "d.csv");
    ok(dir.path(), &["fit", "--manifold", "sphere:2", "--input", "d.csv", "--out", "m.json"]);
    for chart in ["ambient", "lonlat"] {
        let out =
            ok(dir.path(), &["fve", "--model", "m.json", "--input", "d.csv", "--baseline", "l2", "--l2-chart", chart]);
        let rows = table(&out, "K U_R FVE_R U_L FVE_L");
        assert_eq!(rows.len(), 11);
        assert!(rows[1][4] < rows[1][2], "{chart}: {:?}", rows[1]);
    }
}

#[test]
fn zero_components_reproduce_the_mean() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "sphere:2", 40, 5, "d.csv");
    ok(dir.path(), &["fit", "--manifold", "sphere:2", "--input", "d.csv", "--out", "m.json"]);
    ok(dir.path(), &["reconstruct", "--model", "m.json", "--K", "0", "--out", "r.csv"]);
    let model = read_model_json(fs::File::open(dir.path().join("m.json")).unwrap()).unwrap();
    let curves = read_csv(&dir.path().join("r.csv"), &model.spec);
    assert_eq!(curves.len(), 40);
    for c in &curves {
        for (p, mu) in c.points.iter().zip(&model.mean_curve) {
            assert!(model.spec.distance(&p.coords, &mu.coords) < 1e-12);
        }
    }
}

#[test]
fn full_rank_reconstruction_recovers_rank_limited_data() {
    let dir = TempDir::new().unwrap();
    for (manifold, spec) in [("sphere:2", ManifoldSpec::sphere(2).unwrap()), ("so3", ManifoldSpec::so3())] {
        ok(
            dir.path(),
            &["simulate", "--manifold", manifold, "--n", "50", "--seed", "9", "--components", "2", "--out", "d.csv"],
        );
        ok(dir.path(), &["fit", "--manifold", manifold, "--input", "d.csv", "--kmax", "10", "--out", "m.json"]);
        ok(dir.path(), &["reconstruct", "--model", "m.json", "--K", "10", "--out", "r.csv"]);
        let data = read_csv(&dir.path().join("d.csv"), &spec);
        let back = read_csv(&dir.path().join("r.csv"), &spec);
        for (x, y) in data.iter().zip(&back) {
            assert_eq!(x.subject_id, y.subject_id);
            for (p, q) in x.points.iter().zip(&y.points) {
                let d = spec.distance(&p.coords, &q.coords);
                assert!(d < 1e-5, "{manifold} {}: {d}", x.subject_id);
            }
        }
    }
}

#[test]
fn every_emitted_csv_reingests() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "sphere:2", 30, 2, "d.csv");
    ok(d, &["fit", "--manifold", "sphere:2", "--input", "d.csv", "--out", "m.json"]);
    ok(d, &["reconstruct", "--model", "m.json", "--K", "2", "--out", "r.csv"]);
    ok(d, &["reconstruct", "--model", "m.json", "--mode", "1", "--scale", "1", "--out", "mode.csv"]);
    for file in ["r.csv", "mode.csv"] {
        ok(d, &["fit", "--manifold", "sphere:2", "--input", file, "--kmax", "2", "--out", "again.json"]);
    }
    let modes = read_csv(&d.join("mode.csv"), &ManifoldSpec::sphere(2).unwrap());
    let ids: Vec<&str> = modes.iter().map(|s| s.subject_id.as_str()).collect();
    assert_eq!(ids, ["mode1_minus", "mean", "mode1_plus"]);

    let mut counts = String::from("id,t,c1,c2,c3\n");
    for s in 0..12 {
        for t in 0..10 {
            counts.push_str(&format!("p{s:02},{t},{},{},{}\n", 5 + t + s, 20 - t, 3 + (s * t) % 4));
        }
    }
    fs::write(d.join("counts.csv"), counts).unwrap();
    ok(d, &["compositional", "--counts", "counts.csv", "--bandwidth", "2", "--grid", "12", "--out", "comp.csv"]);
    ok(
        d,
        &["fit", "--manifold", "sphere:2", "--input", "comp.csv", "--compositional", "--kmax", "3", "--out", "c.json"],
    );
    ok(d, &["reconstruct", "--model", "c.json", "--K", "3", "--out", "cr.csv"]);
    ok(d, &["fit", "--manifold", "sphere:2", "--input", "cr.csv", "--kmax", "2", "--out", "c2.json"]);
    let comp = fs::read_to_string(d.join("cr.composition.csv")).unwrap();
    assert!(comp.starts_with("id,t,y1,y2,y3\n"));
    for line in comp.lines().skip(1) {
        let y: Vec<f64> = line.split(',').skip(2).map(|w| w.parse().unwrap()).collect();
        assert!(y.iter().all(|&v| v >= 0.0));
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn assert_failure(dir: &Path, args: &[&str], code: i32, kind: &str) {
    let out = rfpca(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with(&format!("error: kind={kind} ")), "{stderr}");
}

#[test]
fn failures_map_to_exit_codes_with_one_stderr_line() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    simulate(d, "sphere:2", 10, 1, "d.csv");
    assert_failure(d, &["fit", "--manifold", "sphere:2", "--input", "missing.csv", "--out", "m.json"], 4, "Io");
    assert_failure(d, &["fit", "--manifold", "torus", "--input", "d.csv", "--out", "m.json"], 2, "UsageError");
    assert_failure(
        d,
        &["fit", "--manifold", "sphere:2", "--input", "d.csv", "--gamma", "1.5", "--out", "m.json"],
        2,
        "GammaOutOfRange",
    );
    assert_failure(d, &["fit", "--manifold", "so3", "--input", "d.csv", "--out", "m.json"], 2, "DimensionMismatch");
    assert_failure(d, &["frobnicate"], 2, "UsageError");

    fs::write(d.join("far.csv"), "id,t,x1,x2,x3\na,0,1,0,0\na,1,0.5,0,0\n").unwrap();
    let out = rfpca(d, &["fit", "--manifold", "sphere:2", "--input", "far.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(d.join("bad.json"), "{not json").unwrap();
    let out = rfpca(d, &["reconstruct", "--model", "bad.json", "--out", "r.csv"]);
    assert_ne!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
