use std::fs;
use std::process::{Command, Output};

fn gifs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gifs")).args(args).output().expect("run gifs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(table: &str, key: &str) -> String {
    table
        .lines()
        .find_map(|l| l.strip_prefix(key).filter(|r| r.starts_with(' ')).map(|r| r.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in\n{table}"))
}

#[test]
fn dim_main_closed() {
    let o = gifs(&["dim", "--fixture", "main", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "affinity_dim"), "2.000000000");
}

#[test]
fn dim_boundary_with_disjointness() {
    let o = gifs(&["dim", "--fixture", "boundary", "--method", "closed", "--assert-disjoint"]);
    assert_eq!(o.status.code(), Some(0));
    let t = stdout(&o);
    assert!(field(&t, "affinity_dim").starts_with("1.16749"));
    assert_eq!(field(&t, "lower_affinity_dim"), "1.000000000");
    assert_eq!(field(&t, "hausdorff_bounds"), format!("[1.000000000, {}]", field(&t, "affinity_dim")));
}

#[test]
fn dim_spectral_and_json() {
    let o = gifs(&["dim", "--fixture", "main", "--method", "spectral", "--tol", "1e-6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["affinity_dim"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(v["method"], "spectral_iter");
}

#[test]
fn exit_codes() {
    // not strongly connected
    assert_eq!(gifs(&["dim", "--fixture", "boundary-full"]).status.code(), Some(2));
    assert_eq!(gifs(&["dim", "--fixture", "nope"]).status.code(), Some(1));
    assert_eq!(gifs(&["dim"]).status.code(), Some(1));
    assert_eq!(gifs(&["dim", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(gifs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gifs(&["--help"]).status.code(), Some(0));
}

#[test]
fn non_uniform_closed_form_is_a_hypothesis_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(
        &path,
        r#"{"space":{"real":1},"vertices":["a"],
            "edges":[{"from":"a","to":"a","linear":["1/2"],"translate":["0"]},
                     {"from":"a","to":"a","linear":["1/3"],"translate":["1"]}]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(gifs(&["dim", p, "--method", "closed"]).status.code(), Some(2));
    let o = gifs(&["dim", p, "--method", "spectral"]);
    assert_eq!(o.status.code(), Some(0));
    // Moran equation (1/2)^s + (1/3)^s = 1
    let s: f64 = field(&stdout(&o), "affinity_dim").parse().unwrap();
    assert!((0.5f64.powf(s) + (1.0f64 / 3.0).powf(s) - 1.0).abs() < 1e-6);
}

#[test]
fn graph_of_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dot");
    let o = gifs(&["graph", "--fixture", "boundary", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = fs::read_to_string(out).unwrap();
    assert_eq!(dot.lines().filter(|l| l.contains(" -> ")).count(), 10);
    assert_eq!(dot.lines().filter(|l| !l.contains(" -> ") && l.ends_with(';')).count(), 5);
}

#[test]
fn boxcount_main() {
    let o = gifs(&["boxcount", "--fixture", "main", "--depth", "9", "--resolution", "4..9"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "m,count,slope");
    assert_eq!(rows.len(), 7);
    let slope: f64 = rows[6].rsplit(',').next().unwrap().parse().unwrap();
    assert!((1.85..=2.05).contains(&slope), "{slope}");
    assert_eq!(gifs(&["boxcount", "--fixture", "main", "--resolution", "9..4"]).status.code(), Some(1));
}

#[test]
fn render_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for p in [&a, &b] {
        let o = gifs(&["render", "--fixture", "main", "--depth", "8", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let bytes = fs::read(&a).unwrap();
    assert!(bytes.starts_with(b"P6\n800 512\n255\n"));
    assert_eq!(bytes, fs::read(&b).unwrap());
    let c = dir.path().join("c.ppm");
    let o = gifs(&["render", "--fixture", "boundary", "--depth", "6", "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn attract_and_dual_csv() {
    let o = gifs(&["attract", "--fixture", "main", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(0));
    // header plus 17 + 5 boxes
    assert_eq!(stdout(&o).lines().count(), 1 + 22);
    let o = gifs(&["dual", "--fixture", "main"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("vertex,x0_a,x0_b,x0_c,x0_d,x1_a,x1_b,x1_c,x1_d\n"));
    assert!(csv.contains("b,1,0,2,1,1,0,2,1\n"));
    let narrow = gifs(&["dual", "--fixture", "main", "--window", "-1,1,0"]);
    assert_eq!(narrow.status.code(), Some(0));
    assert!(stdout(&narrow).lines().count() < csv.lines().count());
    assert_eq!(gifs(&["dual", "--fixture", "main", "--window", "1"]).status.code(), Some(1));
}

#[test]
fn verify_single_criteria_and_negative_control() {
    let o = gifs(&["verify", "--criterion", "1", "--criterion", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let bad = gifs(&["verify", "--criterion", "5", "--lambda-residue", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("[FAIL]"));
}
