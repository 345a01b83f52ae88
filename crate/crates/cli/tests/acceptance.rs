//! Acceptance: rerunning the comparison with an identical config and seed
//! must reproduce the output files byte for byte.

use std::fs;
use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_situbandit"))
}

const CONFIG: &str = "\
[environment]
seed = 11
clusters = 6
critical_clusters = 2
situations = 60
docs_per_situation = 12
dud_docs = 3
trials = 2000
list_size = 5
seeds = 4, 9
checkpoint_interval = 500

[policy.exploit]
policy = exploit

[policy.greedy05]
policy = eps_greedy
epsilon = 0.5

[policy.contextual]
policy = contextual
threshold_b = 2.4

[sweep]
sample_per_cluster = 8
b_min = 0
b_max = 3
b_step = 0.25
";

fn run_everything(dir: &Path) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let config = dir.join("run.conf");
    fs::write(&config, CONFIG).unwrap();
    let out = dir.join("out");

    let status = binary()
        .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(["--seed", "123"])
        .status()
        .unwrap();
    assert!(status.success());
    let status = binary()
        .args(["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());

    (
        fs::read(out.join("comparison.csv")).unwrap(),
        fs::read(out.join("summary.txt")).unwrap(),
        fs::read(out.join("sweep.csv")).unwrap(),
    )
}

#[test]
fn criterion_8_reruns_are_byte_identical() {
    let first_dir = tempfile::tempdir().unwrap();
    let second_dir = tempfile::tempdir().unwrap();
    let first = run_everything(first_dir.path());
    let second = run_everything(second_dir.path());
    let pass = first == second;
    println!(
        "acceptance 8 (determinism): {} — comparison.csv {} bytes, summary.txt {} bytes, sweep.csv {} bytes, reruns identical: {}",
        if pass { "PASS" } else { "FAIL" },
        first.0.len(),
        first.1.len(),
        first.2.len(),
        pass
    );
    assert!(pass, "criterion 8 failed: outputs differ between reruns");
}
