mod common;

use common::*;

#[test]
fn golden_outputs_match() {
    let failures: Vec<String> = golden_cases()
        .iter()
        .filter_map(|c| check_golden(c).err())
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn exit_codes() {
    for (what, args, code) in exit_code_cases() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        assert_eq!(
            out.status.code(),
            Some(code),
            "{what}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        if code != 0 {
            assert!(!out.stderr.is_empty(), "{what}: no message on stderr");
        }
    }
}

#[test]
fn identical_trace_scores_three() {
    let perfect = format!("<think>{REF_0001}</think><answer>B</answer>");
    let out = run(&[
        "score", "--gen", &perfect, "--ref", REF_0001, "--answer", "b.",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["total"], 3.0);
    assert_eq!(v["config"]["k_ref"], 2);
}

#[test]
fn inputs_can_come_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("gen.txt");
    let reference = dir.path().join("ref.txt");
    std::fs::write(&gen, format!("<think>{GEN_0001}</think><answer>B</answer>")).unwrap();
    std::fs::write(&reference, REF_0001).unwrap();
    let inline = run(&[
        "score",
        "--gen",
        &format!("<think>{GEN_0001}</think><answer>B</answer>"),
        "--ref",
        REF_0001,
        "--answer",
        "B",
    ]);
    let from_files = run(&[
        "score",
        "--gen",
        &format!("@{}", gen.display()),
        "--ref",
        &format!("@{}", reference.display()),
        "--answer",
        "B",
    ]);
    assert!(inline.status.success());
    assert_eq!(inline.stdout, from_files.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let sim = fixture("sim_samples.jsonl");
    let out = run(&[
        "--output",
        path.to_str().unwrap(),
        "simulate",
        "--samples",
        &sim,
        "--iterations",
        "5",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn simulate_is_deterministic() {
    let sim = fixture("sim_samples.jsonl");
    let args = [
        "--seed",
        "11",
        "simulate",
        "--samples",
        &sim,
        "--iterations",
        "15",
        "--reward-variant",
        "no_process",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn reward_group_matches_recomputed_advantages() {
    use procreward_core::dataset::{load_rollouts, load_samples};
    use procreward_core::{standardize_advantages, total_reward, RewardConfig};

    let samples = load_samples(fixture("samples_valid.jsonl")).unwrap();
    let rollouts = load_rollouts(fixture("rollouts_valid.jsonl")).unwrap();
    let out = run(&[
        "reward-group",
        "--rollouts",
        &fixture("rollouts_valid.jsonl"),
        "--samples",
        &fixture("samples_valid.jsonl"),
    ]);
    let lines: Vec<serde_json::Value> = out
        .stdout
        .split(|&b| b == b'\n')
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_slice(l).unwrap())
        .collect();
    let candidates: Vec<&serde_json::Value> = lines
        .iter()
        .filter(|v| v["record"] == "candidate")
        .collect();

    let mut k = 0;
    for rec in &rollouts {
        let sample = samples.iter().find(|s| s.id == rec.sample_id).unwrap();
        let rewards: Vec<f64> = rec
            .candidates
            .iter()
            .map(|c| {
                total_reward(&c.output_text, sample, &RewardConfig::default())
                    .unwrap()
                    .total
            })
            .collect();
        for a in standardize_advantages(&rewards, 1e-8).unwrap() {
            let printed = candidates[k]["advantage"].as_f64().unwrap();
            assert!(
                (printed - a).abs() <= 1e-11 * a.abs().max(1.0),
                "{printed} vs {a}"
            );
            k += 1;
        }
    }
    assert_eq!(k, candidates.len());
    let equal_group = lines.iter().rfind(|v| v["record"] == "group").unwrap();
    assert_eq!(equal_group["surrogate"], 0.0);
}

#[test]
fn ratio_mode_is_echoed() {
    let args = |mode: &'static str| {
        run(&[
            "--ratio-mode",
            mode,
            "reward-group",
            "--rollouts",
            &fixture("rollouts_valid.jsonl"),
            "--samples",
            &fixture("samples_valid.jsonl"),
        ])
    };
    for mode in ["sequence", "token_mean"] {
        let text = String::from_utf8(args(mode).stdout).unwrap();
        assert!(text
            .lines()
            .filter(|l| l.contains("\"record\":\"group\""))
            .all(|l| l.contains(&format!("\"ratio_mode\":\"{mode}\""))));
    }
}
