#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

pub fn fixture(name: &str) -> String {
    root()
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procreward"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

pub const REF_0001: &str = "The boy holds a glass above the counter. His fingers loosen around the glass. The glass falls toward the tiled floor. The glass will shatter on the floor.";
pub const GEN_0001: &str = "I watch the boy closely. The boy holds a glass above the counter. His fingers loosen. The glass falls and will shatter on the floor.";

pub struct GoldenCase {
    pub name: &'static str,
    pub args: Vec<String>,
}

fn case(name: &'static str, args: &[&str]) -> GoldenCase {
    GoldenCase {
        name,
        args: args.iter().map(|a| a.to_string()).collect(),
    }
}

pub fn golden_cases() -> Vec<GoldenCase> {
    let perfect = format!("<think>{REF_0001}</think><answer>B</answer>");
    let samples = fixture("samples_valid.jsonl");
    let rollouts = fixture("rollouts_valid.jsonl");
    let sim = fixture("sim_samples.jsonl");
    vec![
        case(
            "score_identical.json",
            &[
                "score", "--gen", &perfect, "--ref", REF_0001, "--answer", "B",
            ],
        ),
        case(
            "score_malformed.json",
            &[
                "score",
                "--gen",
                "<think>The glass falls.",
                "--ref",
                REF_0001,
                "--answer",
                "B",
            ],
        ),
        case(
            "score_batch.jsonl",
            &[
                "score-batch",
                "--samples",
                &samples,
                "--outputs",
                &fixture("outputs_valid.jsonl"),
            ],
        ),
        case(
            "align_fixture.txt",
            &["align", "--ref", REF_0001, "--gen", GEN_0001],
        ),
        case(
            "align_identity.txt",
            &["align", "--ref", REF_0001, "--gen", REF_0001],
        ),
        case(
            "align_k1.txt",
            &[
                "--k-ref",
                "1",
                "--k-target",
                "1",
                "align",
                "--ref",
                REF_0001,
                "--gen",
                GEN_0001,
            ],
        ),
        case(
            "reward_group.jsonl",
            &[
                "reward-group",
                "--rollouts",
                &rollouts,
                "--samples",
                &samples,
            ],
        ),
        case(
            "reward_group_token_mean.jsonl",
            &[
                "--ratio-mode",
                "token_mean",
                "reward-group",
                "--rollouts",
                &rollouts,
                "--samples",
                &samples,
            ],
        ),
        case(
            "simulate_sdtw.csv",
            &["simulate", "--samples", &sim, "--iterations", "25"],
        ),
        case(
            "simulate_naive_dtw.csv",
            &[
                "simulate",
                "--samples",
                &sim,
                "--iterations",
                "25",
                "--reward-variant",
                "naive_dtw",
            ],
        ),
        case(
            "simulate_zero_iterations.csv",
            &["simulate", "--samples", &sim, "--iterations", "0"],
        ),
        case("oracle_check.txt", &["oracle-check", "--trials", "200"]),
    ]
}

/// Runs a golden case and compares stdout byte-for-byte. With
/// `UPDATE_GOLDEN=1` the golden file is rewritten instead.
pub fn check_golden(c: &GoldenCase) -> Result<(), String> {
    let args: Vec<&str> = c.args.iter().map(String::as_str).collect();
    let out = run(&args);
    if !out.status.success() {
        return Err(format!(
            "{}: exit {:?}: {}",
            c.name,
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let path = root().join("fixtures/golden").join(c.name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != out.stdout {
        return Err(format!(
            "{}: output differs from golden\n--- got ---\n{}",
            c.name,
            String::from_utf8_lossy(&out.stdout)
        ));
    }
    Ok(())
}

/// (description, args, expected exit code)
pub fn exit_code_cases() -> Vec<(&'static str, Vec<String>, i32)> {
    let samples = fixture("samples_valid.jsonl");
    let rollouts = fixture("rollouts_valid.jsonl");
    let sim = fixture("sim_samples.jsonl");
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        (
            "score ok",
            own(&[
                "score",
                "--gen",
                "<think>a.</think><answer>A</answer>",
                "--ref",
                "a.",
                "--answer",
                "A",
            ]),
            0,
        ),
        (
            "score malformed",
            own(&["score", "--gen", "no tags", "--ref", "a.", "--answer", "A"]),
            0,
        ),
        (
            "score missing file",
            own(&[
                "score",
                "--gen",
                "@/nonexistent/gen.txt",
                "--ref",
                "a.",
                "--answer",
                "A",
            ]),
            2,
        ),
        (
            "score empty reference",
            own(&["score", "--gen", "x", "--ref", "  ", "--answer", "A"]),
            2,
        ),
        (
            "score bad alpha",
            own(&[
                "--alpha", "-1", "score", "--gen", "x", "--ref", "a.", "--answer", "A",
            ]),
            2,
        ),
        (
            "score unknown flag",
            own(&[
                "score", "--gen", "x", "--ref", "a.", "--answer", "A", "--bogus",
            ]),
            2,
        ),
        (
            "score-batch ok",
            own(&[
                "score-batch",
                "--samples",
                &samples,
                "--outputs",
                &fixture("outputs_valid.jsonl"),
            ]),
            0,
        ),
        (
            "score-batch unknown sample",
            own(&[
                "score-batch",
                "--samples",
                &samples,
                "--outputs",
                &fixture("outputs_unknown_sample.jsonl"),
            ]),
            2,
        ),
        (
            "score-batch duplicate id",
            own(&[
                "score-batch",
                "--samples",
                &fixture("samples_duplicate_id.jsonl"),
                "--outputs",
                &fixture("outputs_valid.jsonl"),
            ]),
            2,
        ),
        (
            "align ok",
            own(&["align", "--ref", "a b.", "--gen", "a b."]),
            0,
        ),
        (
            "align empty reference",
            own(&["align", "--ref", "", "--gen", "a b."]),
            2,
        ),
        (
            "align bad k",
            own(&["--k-ref", "0", "align", "--ref", "a.", "--gen", "a."]),
            2,
        ),
        (
            "reward-group ok",
            own(&[
                "reward-group",
                "--rollouts",
                &rollouts,
                "--samples",
                &samples,
            ]),
            0,
        ),
        (
            "reward-group unknown sample",
            own(&[
                "reward-group",
                "--rollouts",
                &fixture("rollouts_unknown_sample.jsonl"),
                "--samples",
                &samples,
            ]),
            2,
        ),
        (
            "reward-group length mismatch",
            own(&[
                "reward-group",
                "--rollouts",
                &fixture("rollouts_length_mismatch.jsonl"),
                "--samples",
                &samples,
            ]),
            2,
        ),
        (
            "reward-group bad epsilon",
            own(&[
                "--epsilon",
                "1.5",
                "reward-group",
                "--rollouts",
                &rollouts,
                "--samples",
                &samples,
            ]),
            2,
        ),
        (
            "reward-group bad ratio mode",
            own(&[
                "--ratio-mode",
                "tokens",
                "reward-group",
                "--rollouts",
                &rollouts,
                "--samples",
                &samples,
            ]),
            2,
        ),
        (
            "simulate ok",
            own(&["simulate", "--samples", &sim, "--iterations", "2"]),
            0,
        ),
        (
            "simulate missing samples",
            own(&["simulate", "--samples", "/nonexistent.jsonl"]),
            2,
        ),
        (
            "simulate bad group size",
            own(&["simulate", "--samples", &sim, "--group-size", "1"]),
            2,
        ),
        (
            "simulate bad variant",
            own(&["simulate", "--samples", &sim, "--reward-variant", "dtw"]),
            2,
        ),
        (
            "oracle-check ok",
            own(&["oracle-check", "--trials", "50"]),
            0,
        ),
        (
            "oracle-check zero trials",
            own(&["oracle-check", "--trials", "0"]),
            2,
        ),
        (
            "oracle-check too large",
            own(&["oracle-check", "--max-n", "9"]),
            2,
        ),
        (
            "oracle-check injected fault",
            own(&["oracle-check", "--trials", "50", "--inject-fault"]),
            1,
        ),
        (
            "output to unwritable path",
            own(&[
                "--output",
                "/nonexistent/dir/out.json",
                "score",
                "--gen",
                "x",
                "--ref",
                "a.",
                "--answer",
                "A",
            ]),
            2,
        ),
    ]
}
