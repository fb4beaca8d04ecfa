use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irp_core::io;
use irp_core::{Customer, Instance, Point};

fn irp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irp")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const GEOMETRY: &str = "\
# depot then customers: id x y base demand
0 50 50
1 10 20 12
2 80 15 7
3 60 90 10
4 25 70 15
";

fn write_geometry(dir: &Path) -> PathBuf {
    let path = dir.join("sites.txt");
    fs::write(&path, GEOMETRY).unwrap();
    path
}

fn instance_with(n: usize, horizon: usize) -> Instance {
    Instance {
        name: format!("n{n}"),
        vehicle_cap: 10,
        horizon,
        depot: Point::new(0.0, 0.0),
        customers: (0..n)
            .map(|k| Customer {
                id: k as u32 + 1,
                x: (k as f64 * 1.7).cos() * (5.0 + k as f64),
                y: (k as f64 * 1.7).sin() * (5.0 + k as f64),
                storage_cap: 12,
                initial_inventory: 0,
                demands: (0..horizon).map(|t| 1 + ((k + t) % 3) as i64).collect(),
            })
            .collect(),
    }
}

fn write_instance(dir: &Path, name: &str, inst: &Instance) -> PathBuf {
    let path = dir.join(name);
    io::write_instance(&path, inst).unwrap();
    path
}

#[test]
fn generate_writes_instance() {
    let dir = tempfile::tempdir().unwrap();
    let geo = write_geometry(dir.path());
    let out = dir.path().join("inst.json");
    let args = [
        "generate", "--geometry", path_str(&geo), "--scenario", "a", "--periods", "12", "--seed", "4",
        "--capacity", "40", "--out", path_str(&out),
    ];
    let res = irp(&args);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let inst = io::read_instance(&out).unwrap();
    assert_eq!(inst.num_customers(), 4);
    assert_eq!(inst.horizon, 12);
    assert_eq!(inst.customers.iter().map(|c| c.demands.len()).sum::<usize>(), 48);
    assert_eq!(inst.name, "sites-a");
    inst.ensure_valid().unwrap();

    let first = fs::read(&out).unwrap();
    assert_eq!(code(&irp(&args)), 0);
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn generate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let geo = write_geometry(dir.path());
    let out = dir.path().join("inst.json");
    let res = irp(&[
        "generate", "--geometry", path_str(&geo), "--scenario", "b", "--periods", "0", "--seed", "1",
        "--capacity", "40", "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("horizon must be ≥ 1"), "{}", stderr(&res));
    assert!(!out.exists());

    let res = irp(&[
        "generate", "--geometry", "/definitely/missing.txt", "--scenario", "a", "--periods", "5",
        "--capacity", "40", "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 1);
    assert!(stderr(&res).contains("missing.txt"));

    let res = irp(&[
        "generate", "--geometry", path_str(&geo), "--scenario", "z", "--periods", "5", "--capacity", "40",
        "--out", path_str(&out),
    ]);
    assert_eq!(code(&res), 2);
    assert_eq!(code(&irp(&["generate", "--bogus"])), 2);
}

#[test]
fn solve_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "tiny.json", &instance_with(3, 5));
    let run = |out: &Path| {
        irp(&[
            "solve", "--instance", path_str(&inst), "--refpoints", "3", "--vrp", "savings", "--seed", "2",
            "--out", path_str(out),
        ])
    };
    let a = dir.path().join("a");
    let res = run(&a);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let line = stdout(&res);
    assert!(line.starts_with("steps=") && line.contains(" evaluations=") && line.contains(" size="), "{line}");
    let bundle = io::read_bundle(&a).unwrap();
    assert!(!bundle.archive.is_empty());
    assert_eq!(bundle.config.ref_point_count, 3);
    assert!(line.trim_end().ends_with(&format!("size={}", bundle.archive.len())));
    let csv = fs::read_to_string(a.join(io::ARCHIVE_FILE)).unwrap();
    assert!(csv.starts_with("inventory,distance,pi_1,pi_2,pi_3\n"));

    let b = dir.path().join("b");
    assert_eq!(code(&run(&b)), 0);
    assert_eq!(fs::read(a.join(io::ARCHIVE_FILE)).unwrap(), fs::read(b.join(io::ARCHIVE_FILE)).unwrap());
}

#[test]
fn solve_budget_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "mid.json", &instance_with(5, 12));
    let out = dir.path().join("run");
    let res = irp(&[
        "--threads", "2", "solve", "--instance", path_str(&inst), "--refpoints", "5", "--vrp", "rtr",
        "--seed", "1", "--out", path_str(&out), "--max-steps", "1",
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(stdout(&res).starts_with("steps=1 "));
}

#[test]
fn solve_errors() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "tiny.json", &instance_with(2, 4));
    let out = dir.path().join("run");
    let res = irp(&["solve", "--instance", path_str(&inst), "--refpoints", "4", "--out", path_str(&out)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("reference point count must be odd ≥ 3"), "{}", stderr(&res));

    let mut bad = instance_with(2, 4);
    bad.customers[1].demands[0] = 11;
    let bad = write_instance(dir.path(), "bad.json", &bad);
    let res = irp(&["solve", "--instance", path_str(&bad), "--refpoints", "3", "--out", path_str(&out)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("exceeds"), "{}", stderr(&res));

    let garbled = dir.path().join("garbled.json");
    fs::write(&garbled, "{\"name\": 3").unwrap();
    let res = irp(&["solve", "--instance", path_str(&garbled), "--refpoints", "3", "--out", path_str(&out)]);
    assert_eq!(code(&res), 2);

    let res = irp(&["solve", "--instance", "/no/such/file.json", "--refpoints", "3", "--out", path_str(&out)]);
    assert_eq!(code(&res), 1);
}

#[test]
fn enumerate_front() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_instance(dir.path(), "one.json", &instance_with(1, 6));
    let out = dir.path().join("front.csv");
    let res = irp(&["enumerate", "--instance", path_str(&one), "--max-freq", "4", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(stdout(&res).starts_with("evaluations=4 "));

    let four = write_instance(dir.path(), "four.json", &instance_with(4, 6));
    let res = irp(&["enumerate", "--instance", path_str(&four), "--max-freq", "4", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(stdout(&res).starts_with("evaluations=256 "));
    let front = io::parse_archive(&fs::read_to_string(&out).unwrap()).unwrap();
    let objs: Vec<_> = front.objectives().collect();
    assert!(objs.iter().all(|a| !objs.iter().any(|b| b.dominates(a))));

    let ten = write_instance(dir.path(), "ten.json", &instance_with(10, 6));
    let res = irp(&["enumerate", "--instance", path_str(&ten), "--max-freq", "4", "--out", path_str(&out)]);
    assert_eq!(code(&res), 2);
}

#[test]
fn vrp_solve_outputs_routes() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("p.json");
    fs::write(
        &problem,
        r#"{"depot":{"x":0,"y":0},"vehicleCap":10,"stops":[
            {"id":1,"load":4,"x":5,"y":0},{"id":2,"load":4,"x":5,"y":1},
            {"id":3,"load":4,"x":-5,"y":0},{"id":4,"load":4,"x":-5,"y":-1}]}"#,
    )
    .unwrap();
    let mut totals = Vec::new();
    for solver in ["savings", "rtr", "exact"] {
        let res = irp(&["vrp-solve", "--problem", path_str(&problem), "--vrp", solver]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        let v: serde_json::Value = serde_json::from_str(&stdout(&res)).unwrap();
        assert_eq!(v["routes"].as_array().unwrap().len(), 2);
        totals.push(v["totalDistance"].as_f64().unwrap());
    }
    assert!(totals[1] <= totals[0] && totals[2] <= totals[1] + 1e-9);

    let out = dir.path().join("sol.json");
    assert_eq!(code(&irp(&["vrp-solve", "--problem", path_str(&problem), "--out", path_str(&out)])), 0);
    assert!(out.exists());

    fs::write(&problem, r#"{"depot":{"x":0,"y":0},"vehicleCap":3,"stops":[{"id":1,"load":4,"x":1,"y":1}]}"#).unwrap();
    assert_eq!(code(&irp(&["vrp-solve", "--problem", path_str(&problem)])), 2);
}
