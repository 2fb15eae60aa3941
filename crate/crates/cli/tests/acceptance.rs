mod common;

use common::{code, read, run};

#[test]
fn verify_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [("a", Some("1")), ("b", Some("1")), ("c", Some("4")), ("d", None)];
    let mut reports = Vec::new();
    let mut codes = Vec::new();
    for (name, threads) in runs {
        let out = dir.path().join(name);
        let o = run(&["verify"], &out, threads);
        codes.push(code(&o));
        reports.push((read(&out.join("report.json")), String::from_utf8(o.stdout).unwrap()));
    }
    let identical = reports.windows(2).all(|w| w[0] == w[1]);
    let pass = identical && codes.iter().all(|c| *c == 0);
    println!(
        "acceptance 8 [{}] verify on bundled config: exit codes {codes:?}, reports identical across reruns and LDP_MAX_THREADS 1/4/unset: {identical}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}
