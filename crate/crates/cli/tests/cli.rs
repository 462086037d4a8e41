use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectralpairs"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SPECTRUM: &str = r#"{
  "kind": "spectrum",
  "model": {
    "fiber": {"kind": "circle", "length": 1.0},
    "segments": [{"kind": "flat_tube", "rho": 1.0, "t_range": [0.0, 2.0]}],
    "ends": ["dirichlet", "dirichlet"],
    "marker": [[0.0, 0.5]]
  },
  "grid": {"spacing": 0.05, "nodes": 41, "fiber_nodes": 4},
  "solver": {"count": 6}
}"#;

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", r#"{"kind": "group", "group": {"p": 7, "n": 1, "r": 1}}"#);
    assert_eq!(bin().arg("validate").arg(&good).status().unwrap().code(), Some(0));
    let bad = write(dir.path(), "bad.json", r#"{"kind": "group", "group": {"p": 7, "n": 1, "r": 1}, "extra": 1}"#);
    assert_eq!(bin().arg("validate").arg(&bad).status().unwrap().code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{");
    assert_eq!(bin().arg("run").arg(&broken).status().unwrap().code(), Some(2));
}

#[test]
fn spectrum_run_and_plot_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "spectrum.json", SPECTRUM);
    let mut bytes = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let status = bin().args(["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]).status().unwrap();
        assert_eq!(status.code(), Some(0));
        assert!(out.join("manifest.json").exists());
        let csv = out.join("spectrum.csv");
        let status = bin().args(["plot", csv.to_str().unwrap(), "--kind", "spectrum"]).status().unwrap();
        assert_eq!(status.code(), Some(0));
        bytes.push((
            std::fs::read(&csv).unwrap(),
            std::fs::read(out.join("spectrum.json")).unwrap(),
            std::fs::read(out.join("spectrum.svg")).unwrap(),
        ));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn plot_of_wrong_table_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "x.csv", "a,b\n1,2\n");
    assert_eq!(bin().args(["plot", p.to_str().unwrap(), "--kind", "pinch"]).status().unwrap().code(), Some(2));
}
