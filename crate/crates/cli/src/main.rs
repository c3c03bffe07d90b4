// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod error;
mod init;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cache::GnCache;
use crate::commands::{CommandOutput, Context};
use crate::config::{Cli, ExperimentConfig, Format};
use crate::error::{CliError, Result};
use crate::output::{unix_now, Envelope};

fn write_file(path: &std::path::Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn execute(cfg: &ExperimentConfig, ctx: &mut Context) -> Result<CommandOutput> {
    let out = commands::run(&cfg.command, &cfg.params, ctx)?;
    // a cache that cannot be written only costs time on the next run
    if let Err(e) = ctx.cache.save() {
        eprintln!("warning: constants cache not saved: {e}");
    }
    Ok(out)
}

fn main() -> ExitCode {
    let started = unix_now();
    let cli = Cli::parse();
    let json = cli.json;
    let mut ctx = Context {
        cache: GnCache::open(),
        seed: 0,
    };
    let cfg = cli.resolve();
    let result = cfg.as_ref().map_err(clone_err).and_then(|cfg| {
        ctx.seed = cfg.seed;
        execute(cfg, &mut ctx)
    });
    let envelope = Envelope::new(cfg.as_ref().ok(), started, &ctx.cache.used);
    match result {
        Ok(out) => {
            let env = envelope.ok(out.payload);
            let cfg = cfg.as_ref().expect("resolved");
            let written = match (&cfg.output.path, cfg.output.format) {
                (Some(p), Format::Csv) => out.table.write_csv(p),
                (Some(p), Format::Json) => write_file(p, &(env.to_json() + "\n")),
                (None, _) => Ok(()),
            };
            if let Err(e) = written {
                return fail(&env.failed(&e), &e, json);
            }
            if json {
                println!("{}", env.to_json());
            } else {
                print!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let env = envelope.failed(&e);
            if let Ok(ExperimentConfig { output, .. }) = &cfg {
                if let (Some(p), Format::Json) = (&output.path, output.format) {
                    let _ = write_file(p, &(env.to_json() + "\n"));
                }
            }
            fail(&env, &e, json)
        }
    }
}

fn fail(env: &Envelope, e: &CliError, json: bool) -> ExitCode {
    if json {
        println!("{}", env.to_json());
    } else {
        eprintln!("error [{}]: {e}", e.category());
    }
    ExitCode::from(e.exit_code() as u8)
}

/// Config errors are reported once; the copy feeds the envelope.
fn clone_err(e: &CliError) -> CliError {
    match e {
        CliError::Core(c) => CliError::Core(c.clone()),
        other => CliError::Usage(other.to_string()),
    }
}
