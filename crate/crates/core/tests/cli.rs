use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn mdcrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdcrt"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn hnf_and_snf() {
    let o = mdcrt(&["hnf", "[[2,4],[1,3]]"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "h = [[2,0],[0,1]]\nu = [[1,2],[1,3]]\n");
    let o = mdcrt(&["snf", "[[4,0],[0,6]]"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("lambda = [[2,0],[0,12]]\n"));
}

#[test]
fn malformed_literal_exits_2() {
    let o = mdcrt(&["hnf", "[[1,2],[3,x]]"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset"));
}

#[test]
fn singular_hnf_exits_2() {
    assert_eq!(mdcrt(&["hnf", "[[1,2],[2,4]]"]).status.code(), Some(2));
}

#[test]
fn gcld_and_lcrm() {
    assert_eq!(
        stdout(&mdcrt(&["gcld", "[[4,0],[0,4]]", "[[6,0],[0,6]]"])),
        "[[2,0],[0,2]]\n"
    );
    assert_eq!(
        stdout(&mdcrt(&["lcrm", "[[3,1],[2,2]]", "[[2,2],[1,3]]"])),
        "[[4,0],[0,4]]\n"
    );
}

#[test]
fn crt_consistent_and_inconsistent() {
    let ok = config(
        "modulus = [[3,1],[2,2]]\nmodulus = [[2,2],[1,3]]\nremainder = [2,1]\nremainder = [2,1]\n",
    );
    let o = mdcrt(&["crt", ok.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "value = [2,1]\nlcrm = [[4,0],[0,4]]\n");

    let bad = config(
        "modulus = [[2,0],[0,2]]\nmodulus = [[4,0],[0,4]]\nremainder = [1,0]\nremainder = [0,0]\n",
    );
    assert_eq!(
        mdcrt(&["crt", bad.path().to_str().unwrap()]).status.code(),
        Some(3)
    );
}

#[test]
fn bad_config_exits_2() {
    let c = config("modulus = [[1,0],[0,1]]\nfrobnicate = 3\n");
    assert_eq!(
        mdcrt(&["crt", c.path().to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        mdcrt(&["crt", "/nonexistent/config.cfg"]).status.code(),
        Some(2)
    );
}

#[test]
fn robust_single_shot() {
    let text = std::fs::read_to_string(shipped("fig2_nondiag.cfg"))
        .unwrap()
        .replace("f = centroid", "f = [100,200]");
    let c = config(&text);
    let o = mdcrt(&["robust", c.path().to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("anchor = 0\n"));
    assert!(out.contains("tau_bound_sq = 9081/4\n"));
    assert!(out.contains("tau_bound_f = 47.647"));
    assert!(out.contains("region_cardinality = "));

    let o = mdcrt(&["multistage", c.path().to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("delta_final_sq = 444969/4\n"));
    assert!(out.contains("tau_bound_sq = 25225/4\n"));
}

#[test]
fn simulate_csv_and_jobs_determinism() {
    let cfg = shipped("fig3.cfg");
    let run = |jobs: &str| {
        let o = mdcrt(&[
            "simulate",
            &cfg,
            "--trials",
            "20",
            "--jobs",
            jobs,
            "--reconstructor",
            "multistage",
        ]);
        assert!(o.status.success());
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    let mut lines = one.lines();
    assert_eq!(
        lines.next(),
        Some("tau,mean_error,success_rate,trials,reconstructor,seed")
    );
    assert_eq!(lines.count(), 10);
}

#[test]
fn simulate_raw_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("raw.csv");
    let o = mdcrt(&[
        "robust",
        &shipped("fig2_diag.cfg"),
        "--sweep",
        "--trials",
        "3",
        "--raw",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("tau,trial,err_norm,success\n"));
    assert_eq!(text.lines().count(), 1 + 17 + 1 + 17 * 3);
}

#[test]
fn svp_search_and_drange() {
    let o = mdcrt(&["svp-search", "--prime", "3257"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("\n3257,3730,61.073726,57,"));
    let o = mdcrt(&["svp-search", "--range", "2", "20"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 8);
    assert_eq!(
        mdcrt(&["svp-search", "--prime", "9"]).status.code(),
        Some(2)
    );

    let o = mdcrt(&["drange", "--q", "10", "--dim", "2"]);
    assert_eq!(
        stdout(&o),
        "q,members,product,range\n10,8 9 5 7,2520,6350400\n"
    );
}

#[test]
fn unsupported_dimension_exits_4() {
    let c = config("modulus = [[2,0,0],[0,2,0],[0,0,2]]\nmodulus = [[3,0,0],[0,3,0],[0,0,3]]\ntau = 1\ntrials = 2\n");
    let o = mdcrt(&["simulate", c.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}
