use std::process::Command;

fn smalleig() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smalleig"))
}

#[test]
fn sweep_exits_zero_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "refine = 2\nN = 8\nout = ignored\n").unwrap();
    let status = smalleig()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--refine", "0", "--N", "1,2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("config_hash,n,N,d,genus,dof,status,eigenvalues"));
    assert_eq!(lines.count(), 2);
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn paper_literal_and_lumped_variants_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = smalleig()
        .args(["sweep", "--refine", "0", "--N", "1", "--testfn", "paper-literal", "--mass", "lumped", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["testfn"], "paper-literal");
    assert_eq!(json["rows"][0]["report"]["variant"], "paper-literal");
}

#[test]
fn invalid_input_exits_nonzero() {
    let out = smalleig().args(["sweep", "--N", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = smalleig().args(["converge", "--refine", "1", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refine >= 2"));
}

#[test]
fn help_documents_csv_columns() {
    let out = smalleig().args(["sweep", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("CSV columns") && text.contains("certificate_holds"));
    for cmd in ["build", "sweep", "converge", "corollary", "oracle-check"] {
        assert!(smalleig().args([cmd, "--help"]).output().unwrap().status.success());
    }
}

#[test]
fn oracle_check_and_build_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = smalleig().args(["oracle-check", "--refine", "1", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let out = smalleig().args(["build", "--refine", "0", "--N", "2", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let mesh = std::fs::read(dir.path().join("cover_n2_N2.hypmesh")).unwrap();
    let parsed = smalleig_core::hypmesh::parse(mesh.as_slice()).unwrap();
    assert_eq!(parsed.deck.unwrap().0, 6);
}
