use std::path::Path;
use std::process::{Command, Output};

fn torusforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torusforge")).args(args).output().unwrap()
}

fn write_mesh(path: &Path, vertices: usize, tris: &[[u32; 3]]) {
    let mut text = format!("# vertices={vertices}\ni,j,k\n");
    for t in tris {
        text.push_str(&format!("{},{},{}\n", t[0], t[1], t[2]));
    }
    std::fs::write(path, text).unwrap();
}

fn torus_grid(n: u32, m: u32) -> Vec<[u32; 3]> {
    let id = |i: u32, j: u32| (i % n) * m + j % m;
    (0..n)
        .flat_map(|i| {
            (0..m).flat_map(move |j| [[id(i, j), id(i + 1, j), id(i + 1, j + 1)], [id(i, j), id(i + 1, j + 1), id(i, j + 1)]])
        })
        .collect()
}

fn report(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn sample_then_k2_mesh_fails_naming_components() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = torusforge(&["sample", "--dim", "3", "--output-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cloud = dir.path().join("cloud.csv");
    let out = torusforge(&["mesh", "--cloud", cloud.to_str().unwrap(), "--k", "2", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("disconnected") && err.contains("sizes ["), "{err}");
}

#[test]
fn validate_reports_moebius_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("moebius.csv");
    write_mesh(&path, 5, &(0..5).map(|i| [i, (i + 1) % 5, (i + 2) % 5]).collect::<Vec<_>>());
    let out = torusforge(&["validate", "--mesh", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&out);
    assert_eq!(r["orientable"], false);
    assert!(r["orientation_conflict"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn validate_torus_and_torus_minus_a_face() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.csv");
    let tris = torus_grid(7, 5);
    write_mesh(&path, 35, &tris);
    let out = torusforge(&["validate", "--mesh", path.to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&out);
    assert_eq!((r["euler_characteristic"].as_i64(), r["boundary_edges"].as_u64()), (Some(0), Some(0)));

    write_mesh(&path, 35, &tris[1..]);
    let out = torusforge(&["validate", "--mesh", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(&out);
    assert_eq!(r["boundary_edges"].as_u64(), Some(3));
    assert_eq!(r["euler_characteristic"].as_i64(), Some(-1));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(torusforge(&["sample", "--dim", "5"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"k": 8, "bogus": 1}"#).unwrap();
    let out = torusforge(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"k": 0}"#).unwrap();
    assert_eq!(torusforge(&["sample", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn run_writes_every_artifact_and_exports_reload() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = torusforge(&["--threads", "2", "run", "--dim", "3", "--seed", "5", "--output-dir", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = report(&out);
    for a in manifest["artifacts"].as_array().unwrap() {
        assert!(dir.path().join(a.as_str().unwrap()).exists(), "{a}");
    }
    let validation: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("validation.json")).unwrap()).unwrap();
    assert_eq!(validation["euler_characteristic"], 0);

    // The OBJ validates on its own; export and project accept the saved cloud.
    let obj = dir.path().join("mesh.obj");
    assert!(torusforge(&["validate", "--mesh", obj.to_str().unwrap()]).status.success());
    let cloud = dir.path().join("cloud.csv");
    let mesh = dir.path().join("mesh.csv");
    let sub = dir.path().join("again");
    let out = torusforge(&[
        "export",
        "--mesh",
        mesh.to_str().unwrap(),
        "--cloud",
        cloud.to_str().unwrap(),
        "--format",
        "ply",
        "--projection",
        "pca",
        "--output-dir",
        sub.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(sub.join("mesh.ply").exists() && !sub.join("mesh.obj").exists());
    let out = torusforge(&["project", "--cloud", cloud.to_str().unwrap(), "--output-dir", sub.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(sub.join("projected.csv")).unwrap().lines().count(), 2001);
}
