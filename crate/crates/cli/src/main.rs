mod args;
mod commands;
mod oracle;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// Failure carrying its exit status: 2 for bad input or flags, 1 for anything
/// that goes wrong after the input was accepted.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<procreward_core::Error> for CliError {
    fn from(e: procreward_core::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::validate_shared(&cli.shared).and_then(|()| match cli.command {
        Command::Score {
            generated,
            reference,
            answer,
        } => commands::score(&cli.shared, &generated, &reference, &answer),
        Command::ScoreBatch { samples, outputs } => {
            commands::score_batch(&cli.shared, &samples, &outputs)
        }
        Command::Align {
            reference,
            generated,
        } => commands::align(&cli.shared, &reference, &generated),
        Command::RewardGroup { rollouts, samples } => {
            commands::reward_group(&cli.shared, &rollouts, &samples)
        }
        Command::Simulate {
            samples,
            reward_variant,
            iterations,
            group_size,
            learning_rate,
            temperature,
            answer_accuracy,
        } => commands::simulate(
            &cli.shared,
            &samples,
            commands::SimFlags {
                reward_variant,
                iterations,
                group_size,
                learning_rate,
                temperature,
                answer_accuracy,
            },
        ),
        Command::OracleCheck(args) => oracle::run(&cli.shared, &args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
