//! Driver behaviour: exit codes, flag/config precedence, stable listings.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilmetry"))
}

#[test]
fn help_exits_zero_and_documents_flags() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["qi", "cone", "foliation", "lift", "ballbox", "triangle", "list"] {
        assert!(text.contains(sub), "--help missing subcommand {sub}");
    }
    let qi_help = bin().args(["qi", "--help"]).output().unwrap();
    assert!(qi_help.status.success());
    let text = String::from_utf8_lossy(&qi_help.stdout);
    for flag in ["--group", "--map", "--metric", "--seed", "--samples", "--claim", "--out", "--config", "--pairs", "--radius", "--triples"] {
        assert!(text.contains(flag), "qi --help missing {flag}");
    }
}

#[test]
fn unknown_flags_are_hard_errors() {
    let out = bin().args(["qi", "--frobnicate", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_is_a_usage_error() {
    let out = bin()
        .args(["qi", "--group", "heisenberg3", "--map", "shear(abs)"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed"), "stderr was: {err}");
}

#[test]
fn unknown_group_is_a_usage_error() {
    let out = bin()
        .args(["qi", "--group", "so3", "--map", "shear(abs)", "--seed", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn violated_claim_exits_two() {
    let out = bin()
        .args([
            "qi",
            "--group",
            "heisenberg3",
            "--map",
            "shear(abs)",
            "--seed",
            "3",
            "--samples",
            "500",
            "--claim",
            "0.01,0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "kind = \"triangle\"\ngroup = \"heisenberg3\"\nseed = 5\nsamples = 100\n",
    )
    .unwrap();
    let base = bin()
        .args(["triangle", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(base.status.success());
    // Overriding the group changes the estimate to the abelian value 1.
    let over = bin()
        .args([
            "triangle",
            "--config",
            config.to_str().unwrap(),
            "--group",
            "abelian(3)",
        ])
        .output()
        .unwrap();
    assert!(over.status.success());
    let text = String::from_utf8_lossy(&over.stdout);
    assert!(
        text.contains("M_hat = 1.0000000000000000e0"),
        "override did not take effect: {text}"
    );
}

#[test]
fn config_kind_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(&config, "kind = \"qi\"\nseed = 5\n").unwrap();
    let out = bin()
        .args(["triangle", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn list_is_stable_and_contains_builtins() {
    let a = bin().arg("list").output().unwrap();
    let b = bin().arg("list").output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("heisenberg3"));
    assert!(text.contains("quaternion_heisenberg"));
    // Group rows are alphabetically ordered.
    let idx = |needle: &str| text.find(needle).unwrap();
    assert!(idx("abelian") < idx("filiform3"));
    assert!(idx("filiform3") < idx("heisenberg3"));
    assert!(idx("heisenberg3") < idx("quaternion_heisenberg"));
}

#[test]
fn cone_writes_decreasing_sup_distances() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cone.csv");
    let out = bin()
        .args([
            "cone",
            "--group",
            "heisenberg3",
            "--map",
            "shear(abs)",
            "--scales",
            "1,0.1,0.01",
            "--seed",
            "7",
            "--grid",
            "200",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let sups: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sups.len(), 3);
    assert!(sups[0] > sups[1] && sups[1] > sups[2]);
}

#[test]
fn foliation_reports_positive_diameter_for_the_conjugate() {
    let out = bin()
        .args([
            "foliation",
            "--map",
            "Flambda:2",
            "--z",
            "4+4i",
            "--t-max",
            "1e6",
            "--samples",
            "401",
            "--seed",
            "7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let row = text
        .lines()
        .find(|l| l.starts_with("1.0000000000000000e0,"))
        .expect("csv row");
    let diameter: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert!(diameter > 0.0);
}

#[test]
fn lift_subcommand_checks_curl() {
    let out = bin()
        .args([
            "lift",
            "--planar",
            "paper_example",
            "--seed",
            "1",
            "--grid",
            "6",
            "--radius",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("max |curl|"));
}

#[test]
fn qi_with_koranyi_metric_and_conjugate_map() {
    let out = bin()
        .args([
            "qi",
            "--group",
            "heisenberg3",
            "--map",
            "Flambda:2",
            "--metric",
            "koranyi",
            "--seed",
            "11",
            "--samples",
            "2000",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    // Forward and inverse rows both present.
    assert!(text.contains("forward,"));
    assert!(text.contains("inverse,"));
}
