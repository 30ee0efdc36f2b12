use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn genlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genlab")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn validate_bounds_default_writes_manifest_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlab(&["validate-bounds", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("validate-bounds.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["trials"], "10000");
    assert_eq!(manifest["seed"], 0);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(dir.path().join("bound_validation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# manifest {}", manifest["hash"].as_str().unwrap()));
    assert_eq!(
        lines.next().unwrap(),
        "trial,selected,empirical_risk,expected_risk,threshold,margin,worst_margin,violated"
    );
    assert_eq!(lines.count(), 10_000);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "trials = 10\n# note\nbogus_key = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = genlab(&["validate-bounds", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bogus_key") && err.contains("run.cfg:3"), "{err}");
    assert!(!out.exists());
}

#[test]
fn bad_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["validate-bounds", "--delta", "1.5"][..],
        &["bound-report", "--bits", "12"],
        &["evidence-sweep", "--x-low", "2", "--x-high", "1"],
        &["validate-bounds", "--no-such-flag", "1"],
    ] {
        let mut a = args.to_vec();
        let out = out_arg(dir.path());
        a.extend(["--out", &out]);
        assert_eq!(genlab(&a).status.code(), Some(2), "{args:?}");
    }
    assert!(csv_files(dir.path()).is_empty());
}

#[test]
fn runtime_failure_exits_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlab(&["capacity", "--n", "25", "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity failed"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "trials = 10\nn = 50\n").unwrap();
    let o =
        genlab(&["validate-bounds", "--config", cfg.to_str().unwrap(), "--trials", "7", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let m: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("validate-bounds.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["trials"], "7");
    assert_eq!(m["config"]["n"], "50");
}

#[test]
fn reruns_are_byte_identical() {
    let runs = [
        &["evidence-sweep", "--repeats", "3", "--n", "20", "--seed", "11"][..],
        &["bound-report", "--n", "2000", "--bits", "8"],
        &["benign-overfit", "--n", "12", "--degree", "40", "--target", "structured", "--x-low", "-2.5"],
        &["double-descent", "--n", "20", "--seeds", "2", "--test-n", "50"],
        &["capacity", "--n", "6", "--restarts", "5", "--bound-n", "2000"],
        &["allsizes", "--n-min", "10", "--n-max", "20", "--repeats", "3"],
    ];
    for args in runs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let mut full = args.to_vec();
            let out = out_arg(d.path());
            full.extend(["--out", &out, "--svg"]);
            let o = genlab(&full);
            assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
        let names = csv_files(a.path());
        assert!(!names.is_empty());
        assert_eq!(names, csv_files(b.path()));
        for n in names.iter().chain(
            fs::read_dir(a.path())
                .unwrap()
                .filter_map(|e| {
                    let n = e.unwrap().file_name().to_string_lossy().into_owned();
                    (n.ends_with(".svg") || n.ends_with(".artifact")).then_some(n)
                })
                .collect::<Vec<_>>()
                .iter(),
        ) {
            assert_eq!(fs::read(a.path().join(n)).unwrap(), fs::read(b.path().join(n)).unwrap(), "{args:?} {n}");
        }
    }
}

#[test]
fn seed_changes_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    genlab(&["evidence-sweep", "--repeats", "2", "--n", "10", "--out", &out_arg(a.path())]);
    genlab(&["evidence-sweep", "--repeats", "2", "--n", "10", "--seed", "1", "--out", &out_arg(b.path())]);
    let read = |d: &Path| fs::read_to_string(d.join("evidence.csv")).unwrap();
    assert_ne!(read(a.path()), read(b.path()));
}

#[test]
fn svg_only_when_requested() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert!(genlab(&["evidence-sweep", "--repeats", "2", "--n", "10", "--out", &out]).status.success());
    assert!(!dir.path().join("evidence.svg").exists());
    assert!(genlab(&["evidence-sweep", "--repeats", "2", "--n", "10", "--out", &out, "--svg"]).status.success());
    let svg = fs::read_to_string(dir.path().join("evidence.svg")).unwrap();
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
}

#[test]
fn bound_report_artifact_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = genlab(&["bound-report", "--n", "5000", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let bytes = fs::read(dir.path().join("bound_report.artifact")).unwrap();
    assert_eq!(&bytes[..8], b"GENLABQ\0");
    let artifact = genlab_core::CompressedArtifact::from_bytes(&bytes).unwrap();
    assert_eq!(artifact.parameter_count, 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("complexity term"));
}
