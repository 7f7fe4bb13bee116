//! The `ecrank` command-line pipeline: generation, a_p data, sums, training,
//! evaluation and hyperparameter search over the core library.

pub mod cli;
pub mod config;
pub mod data;
pub mod learn;
pub mod prep;

use anyhow::Result;

use cli::{Cli, Command};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Gen(a) => prep::cmd_gen(a),
        Command::Aps(a) => prep::cmd_aps(a),
        Command::Sums(a) => prep::cmd_sums(a),
        Command::Train(a) => learn::cmd_train(&a.opts),
        Command::Eval(a) => learn::cmd_eval(a),
        Command::Cutoffs(a) => learn::cmd_cutoffs(a),
        Command::Search(a) => learn::cmd_search(a),
    }
}

/// 3 for numerical failures (diverging training), 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let numerical = err
        .chain()
        .any(|c| matches!(c.downcast_ref::<ecrank_core::Error>(), Some(ecrank_core::Error::NonfiniteLoss { .. })));
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}
