use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use procreward_core::alignment::{
    brute_force_sdtw, subsequence_dtw, AlignmentConfig, BRUTE_FORCE_MAX_COLS, BRUTE_FORCE_MAX_ROWS,
};
use procreward_core::similarity::CostMatrix;

use crate::args::{OracleArgs, Shared};
use crate::CliError;

const TOLERANCE: f64 = 1e-12;

pub fn run(shared: &Shared, args: &OracleArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    if !(1..=BRUTE_FORCE_MAX_ROWS).contains(&args.max_n) {
        return Err(CliError::usage(format!(
            "--max-n must lie in 1..={BRUTE_FORCE_MAX_ROWS}"
        )));
    }
    if !(1..=BRUTE_FORCE_MAX_COLS).contains(&args.max_m) {
        return Err(CliError::usage(format!(
            "--max-m must lie in 1..={BRUTE_FORCE_MAX_COLS}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(shared.seed);
    let mut mismatches = 0usize;
    let mut max_diff = 0.0f64;
    for trial in 0..args.trials {
        let n = rng.gen_range(1..=args.max_n);
        let m = rng.gen_range(1..=args.max_m);
        let data: Vec<f64> = (0..n * m)
            .map(|_| f64::from(rng.gen_range(0..=10u8)) / 10.0)
            .collect();
        let costs = CostMatrix::new(n, m, data).map_err(|e| CliError::internal(e.to_string()))?;
        let cfg = AlignmentConfig {
            k_ref: trial / 3 % 3 + 1,
            k_target: trial % 3 + 1,
        };
        let mut fast = subsequence_dtw(&costs, cfg)
            .map_err(|e| CliError::internal(e.to_string()))?
            .distance;
        if args.inject_fault {
            fast += 1e-3;
        }
        let slow = brute_force_sdtw(&costs, cfg).map_err(|e| CliError::internal(e.to_string()))?;
        let diff = (fast - slow).abs();
        max_diff = max_diff.max(diff);
        if diff.is_nan() || diff > TOLERANCE {
            mismatches += 1;
            if mismatches <= 5 {
                eprintln!(
                    "mismatch in trial {trial}: {n}x{m}, k_ref={}, k_target={}: dp={fast} brute={slow}",
                    cfg.k_ref, cfg.k_target
                );
            }
        }
    }

    println!(
        "oracle-check seed={} trials={} max_n={} max_m={}",
        shared.seed, args.trials, args.max_n, args.max_m
    );
    println!("mismatches: {mismatches}");
    println!("max_abs_diff: {max_diff:e}");
    if mismatches > 0 {
        println!("result: FAIL");
        return Err(CliError::internal(format!(
            "{mismatches} of {} trials disagree",
            args.trials
        )));
    }
    println!("result: PASS");
    Ok(())
}
