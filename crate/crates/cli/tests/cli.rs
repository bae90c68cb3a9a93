use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qebt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qebt")).args(args).env_remove("QEBT_TOL").output().expect("run qebt")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn write(&self, name: &str, body: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    }
}

#[test]
fn classify_identity() {
    let f = Files::new();
    let id = f.write("id.json", r#"{"t":[0,0,0],"lambda":[1,1,1]}"#);
    let v = json(&qebt(&["classify", &id]));
    assert_eq!(v["cp"], true);
    assert_eq!(v["ebt"], false);
    assert_eq!(v["geometry"]["kind"], "full");
}

#[test]
fn classify_is_reproducible_with_seventeen_digits() {
    let f = Files::new();
    let ch = f.write("c.json", r#"{"matrix":[[1,0,0,0],[0.2,0.1,0,0],[0.3,0,0.2,0],[0,0,0,0.35]]}"#);
    let a = qebt(&["classify", &ch]);
    let b = qebt(&["classify", &ch]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let value = text.split("\"min_choi_eig\":").nth(1).unwrap().split(',').next().unwrap();
    let mantissa = value.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
    assert_eq!(mantissa.len(), 17);
}

#[test]
fn tolerance_from_environment() {
    let f = Files::new();
    // min Choi eigenvalue of about -5e-7: boundary under a loose tolerance only
    let ch = f.write("near.json", r#"{"t":[0,0,0],"lambda":[1.000001,1,1]}"#);
    let strict = json(&qebt(&["classify", &ch]));
    assert_eq!(strict["cp"], false);
    let loose = Command::new(env!("CARGO_BIN_EXE_qebt")).args(["classify", &ch]).env("QEBT_TOL", "1e-5").output().unwrap();
    assert_eq!(json(&loose)["cp"], true);
    let bad = Command::new(env!("CARGO_BIN_EXE_qebt")).args(["classify", &ch]).env("QEBT_TOL", "abc").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn invalid_channel_exits_two_with_schema() {
    let f = Files::new();
    let bad = f.write("bad.json", r#"{"t":[0,0,0],"lambda":[1,1,1],"matrix":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#);
    let out = qebt(&["classify", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"lambda\":[l1,l2,l3]"));
    let missing = qebt(&["classify", "/nonexistent/channel.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn canonical_and_choi() {
    let f = Files::new();
    let ch = f.write("c.json", r#"{"t":[0.2,0.3,0],"lambda":[0.1,0.2,0.35]}"#);
    let c = json(&qebt(&["canonical", &ch]));
    let l: Vec<f64> = c["lambda"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((l[0] - 0.35).abs() < 1e-12 && (l[2] - 0.1).abs() < 1e-12);
    assert_eq!(c["rot_out"].as_array().unwrap().len(), 3);
    let dep = f.write("dep.json", r#"{"t":[0,0,0],"lambda":[0,0,0]}"#);
    let choi = json(&qebt(&["choi", &dep]));
    for e in choi["eigenvalues"].as_array().unwrap() {
        assert!((e.as_f64().unwrap() - 0.25).abs() < 1e-15);
    }
}

#[test]
fn holevo_build_then_verify() {
    let f = Files::new();
    let out = qebt(&["holevo-build", "--cq", "0.1", "0.2", "-0.3", "0.4"]);
    let ens = f.write("e.json", &json(&out).to_string());
    let ch = f.write("c.json", r#"{"t":[0.1,0.2,-0.3],"lambda":[0,0,0.4]}"#);
    assert_eq!(json(&qebt(&["holevo-verify", &ens, &ch]))["matches"], true);
    let other = f.write("o.json", r#"{"t":[0.1,0.2,-0.3],"lambda":[0,0,0.3]}"#);
    assert_eq!(json(&qebt(&["holevo-verify", &ens, &other]))["matches"], false);

    let qc = qebt(&["holevo-build", "--qc", "0.6", "0.1", "-0.2", "0.15"]);
    let qc_ens = f.write("q.json", &json(&qc).to_string());
    let qc_ch = f.write("qc.json", r#"{"matrix":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0.2,0.2,-0.4,0.3]]}"#);
    assert_eq!(json(&qebt(&["holevo-verify", &qc_ens, &qc_ch]))["matches"], true);

    assert_eq!(qebt(&["holevo-build", "--cq", "0.9", "0", "0.5", "0.5"]).status.code(), Some(2));
    let broken = f.write("b.json", r#"{"items":[{"w":[0,0,1],"u0":0.7,"u":[0,0,0.5]}]}"#);
    assert_eq!(qebt(&["holevo-verify", &broken, &ch]).status.code(), Some(2));
}

#[test]
fn decompose_paths() {
    let f = Files::new();
    let unital = f.write("u.json", r#"{"t":[0,0,0],"lambda":[0.3,0.2,0.1]}"#);
    let v = json(&qebt(&["decompose", &unital]));
    assert_eq!(v["method"], "constructive");
    let w: f64 = v["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-12);

    let generic = f.write("g.json", r#"{"t":[0.3,0.25,0.1],"lambda":[0.35,0.2,0.1]}"#);
    assert_eq!(qebt(&["decompose", &generic, "--constructive-only"]).status.code(), Some(3));
    let v = json(&qebt(&["decompose", &generic, "--candidates", "300"]));
    assert_eq!(v["method"], "numeric");
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);

    let id = f.write("id.json", r#"{"t":[0,0,0],"lambda":[1,1,1]}"#);
    assert_eq!(qebt(&["decompose", &id]).status.code(), Some(2));
}

#[test]
fn region_outputs() {
    let out = qebt(&["region", "--t", "0.4,0.3,0", "--l3", "0.15", "--lens", "--rays", "16"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lp,lm"));
    let pts: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 16);
    assert!((pts[0].0 - pts[4].1).abs() < 1e-9, "lens symmetric under swap");

    let f = Files::new();
    let path = f.0.path().join("scan.csv");
    let out = qebt(&["region", "--t", "0.2,0.3,0", "--l3", "0.35", "--scan", "--resolution", "21", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let scan = std::fs::read_to_string(&path).unwrap();
    assert!(scan.starts_with("lp,lm,m11,m22,detm,region,cp,ebt\n"));
    assert_eq!(scan.lines().count(), 21 * 21 + 1);
    assert!(scan.lines().skip(1).filter(|l| l.ends_with(",true,true") || l.ends_with(",true,false")).all(|l| l.contains(",++,")));

    let poly = json(&qebt(&["region", "--polytope", "octahedron"]));
    assert_eq!(poly["vertices"].as_array().unwrap().len(), 6);
    assert_eq!(poly["facets"].as_array().unwrap().len(), 8);
    let corners = json(&qebt(&["region", "--polytope", "corner_tetrahedra"]));
    assert_eq!(corners.as_array().unwrap().len(), 4);

    assert_eq!(qebt(&["region", "--t", "0,0,0.9", "--l3", "0.3", "--scan"]).status.code(), Some(2));
    assert_eq!(qebt(&["region", "--t", "0.9,0.9,0", "--l3", "0", "--boundary"]).status.code(), Some(2));
    assert_eq!(qebt(&["region", "--t", "0,0,0", "--l3", "0"]).status.code(), Some(2));
}

#[test]
fn selftest_passes_and_is_seeded() {
    let a = qebt(&["selftest", "--samples", "2000", "--seed", "7", "--jobs", "2"]);
    let b = qebt(&["selftest", "--samples", "2000", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["passed"], true);
    assert_eq!(v["samples"], 2000);
    assert!(String::from_utf8_lossy(&a.stderr).starts_with("PASS"));
}
