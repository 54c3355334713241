use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nearfocus"))
}

fn scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str =
    "radius_m = 0.5\nlength_m = 3.0\nfrequency_hz = 1e9\nmethod = \"hybrid\"\nw_max_a = 0.05\ncut_half_extent_m = 0.3\n";

#[test]
fn run_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "s.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run("run", &s, &a, &["--threads", "1"]).status.success());
    assert!(run("run", &s, &b, &["--threads", "4"]).status.success());
    for f in ["weights.csv", "weights.json", "cut.csv", "metrics.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["tool"], "nearfocus");
    assert_eq!(m["command"], "run");
    assert_eq!(m["threads"], 1);
    assert_eq!(m["scenario"]["kernel"], "dipole_approx");
    assert!(m["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["analytic_resolutions"][0]["selected"], "41*pi^2/128");
}

#[test]
fn single_dipole_uses_full_amplitude() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "d.toml",
        "geometry = \"dipole\"\nfocal_y_m = 0.6\ngrid = \"none\"\nw_max_a = 0.1\np0_w = 1.0\nr0_ohm = 50.0\n",
    );
    let out = dir.path().join("o");
    assert!(run("run", &s, &out, &[]).status.success());
    let w = fs::read_to_string(out.join("weights.csv")).unwrap();
    let row: Vec<f64> = w
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - 0.1).abs() < 1e-15);
    assert_eq!(json(&out.join("weights.json"))["regime"], "cp");
}

#[test]
fn mesh_regimes_follow_the_amplitude_bound() {
    let dir = tempfile::tempdir().unwrap();
    let area = 2.0 * std::f64::consts::PI * 10.0 / 2000.0;
    for (w_m, regime) in [(0.002, "cp"), (0.008, "hybrid"), (0.02, "tr")] {
        let s = scenario(
            dir.path(),
            "m.toml",
            &format!(
                "aperture = \"mesh\"\nradius_m = 1.0\nlength_m = 10.0\nw_max_a = {w_m}\nreference_area_m2 = {area}\ngrid = \"none\"\n"
            ),
        );
        let out = dir.path().join(regime);
        let o = run("run", &s, &out, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let w = json(&out.join("weights.json"));
        assert_eq!(w["regime"], regime);
        assert!(w["total_power_w"].as_f64().unwrap() <= 1.0 + 1e-9);
    }
}

#[test]
fn validate_reports_pass_and_fail() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "v.toml",
        "method = \"tr\"\nanalytic_reference = \"tr_ratio\"\n",
    );
    let out = dir.path().join("ok");
    let o = run("validate", &s, &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(json(&out.join("validation.json"))["passed"], true);

    let s = scenario(
        dir.path(),
        "z.toml",
        "method = \"tr\"\nanalytic_reference = \"tr_ratio\"\nvalidate_tolerance = 0.0\n",
    );
    let out = dir.path().join("strict");
    let o = run("validate", &s, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&out.join("validation.json"));
    assert_eq!(v["passed"], false);
    assert!(v["deviation"].as_f64().unwrap() > 0.0);
    assert_eq!(json(&out.join("manifest.json"))["passed"], false);
}

#[test]
fn errors_are_structured() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("bogus_key = 1\n", "parse"),
        ("focal_x_m = 5.0\n", "invalid_scenario"),
        ("frequency_hz = -1.0\n", "invalid_scenario"),
        (
            "geometry = \"dipole\"\ngrid = \"cut\"\ncut_half_extent_m = 0.1\n",
            "field",
        ),
    ];
    for (i, (body, kind)) in cases.iter().enumerate() {
        let s = scenario(dir.path(), &format!("e{i}.toml"), body);
        let o = run("run", &s, &dir.path().join("o"), &[]);
        assert_eq!(o.status.code(), Some(2), "{body}");
        let err: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["error"], *kind, "{body}");
        assert!(err["message"].as_str().unwrap().len() > 3);
    }
    let o = run(
        "run",
        &dir.path().join("missing.toml"),
        &dir.path().join("o"),
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "read");
}

#[test]
fn scenario_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(dir.path(), "s.toml", SMALL);
    let out = dir.path().join("env");
    let o = bin()
        .arg("layout")
        .env("NEARFOCUS_SCENARIO", &s)
        .env("NEARFOCUS_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("layout.csv")).unwrap();
    let m = json(&out.join("manifest.json"));
    let count = m["layout"]["count"].as_u64().unwrap() as usize;
    assert_eq!(text.lines().count(), count + 1);
    assert_eq!(
        count,
        (m["layout"]["rings"].as_u64().unwrap() * m["layout"]["per_ring"].as_u64().unwrap())
            as usize
    );
}

#[test]
fn analytic_curves_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "a.toml",
        "analytic_curve = \"ez_cp_axis\"\ncurve_points = 51\n",
    );
    let out = dir.path().join("a");
    assert!(run("analytic", &s, &out, &[]).status.success());
    let text = fs::read_to_string(out.join("profile.csv")).unwrap();
    assert_eq!(text.lines().count(), 52);
    assert_eq!(text.lines().next().unwrap(), "offset_lambda,value");

    let s = scenario(dir.path(), "b.toml", "analytic_curve = \"ez_trans\"\n");
    let out = dir.path().join("b");
    assert!(run("analytic", &s, &out, &[]).status.success());
    let rows: Vec<Vec<f64>> = fs::read_to_string(out.join("profile.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let centre = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!((centre[1] - std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn plane_run_writes_contour() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(
        dir.path(),
        "p.toml",
        &format!("{SMALL}grid = \"plane\"\nplane_half_u_m = 0.3\nplane_half_v_m = 0.3\nplane_step_m = 0.01\n"),
    );
    let out = dir.path().join("p");
    let o = run("run", &s, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("fieldmap.csv").exists());
    assert!(out.join("contour.csv").exists());
    let m = json(&out.join("metrics.json"));
    assert_eq!(m["contour_closed"], true);
    assert!(m["width_3db_lambda"].as_f64().unwrap() > 0.2);
}
