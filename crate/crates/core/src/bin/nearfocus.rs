use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nearfocus::scenario::{self, RunOptions, ScenarioError};

#[derive(Parser)]
#[command(
    name = "nearfocus",
    version,
    about = "Near-field focusing inside cylindrical and rectangular apertures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for excitation weights and evaluate the focused field.
    Run(Common),
    /// Compare the numeric field against a closed-form reference.
    Validate(Common),
    /// Sample a closed-form curve.
    Analytic(Common),
    /// Write the element or patch layout.
    Layout(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long, env = "NEARFOCUS_SCENARIO")]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, env = "NEARFOCUS_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "NEARFOCUS_THREADS", default_value_t = 0)]
    threads: usize,
    /// Seed for the optimality oracle.
    #[arg(long, env = "NEARFOCUS_SEED", default_value_t = 0)]
    seed: u64,
}

fn fail(e: &ScenarioError) -> ExitCode {
    let doc = json!({"error": e.kind(), "message": e.to_string()});
    eprintln!("{doc}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, c) = match &cli.command {
        Command::Run(c) => ("run", c),
        Command::Validate(c) => ("validate", c),
        Command::Analytic(c) => ("analytic", c),
        Command::Layout(c) => ("layout", c),
    };
    let threads = if c.threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        c.threads
    };
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    let s = match scenario::load_scenario(&c.scenario) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let opts = RunOptions {
        seed: c.seed,
        threads,
        scenario_path: Some(c.scenario.clone()),
    };
    let result = match name {
        "run" => scenario::cmd_run(&s, &c.out, &opts).map(|o| {
            println!(
                "{}",
                json!({"regime": o.weights.regime, "e_focus_abs": o.report.e_focus.norm(), "metrics": o.metrics})
            );
            true
        }),
        "validate" => scenario::cmd_validate(&s, &c.out, &opts).map(|r| {
            println!(
                "{}: {} (deviation {:.4e}, tolerance {:.4e})",
                r.reference,
                if r.passed { "PASS" } else { "FAIL" },
                r.deviation,
                r.tolerance
            );
            r.passed
        }),
        "analytic" => scenario::cmd_analytic(&s, &c.out, &opts).map(|p| {
            println!("{} samples written", p.values.len());
            true
        }),
        _ => scenario::cmd_layout(&s, &c.out, &opts).map(|n| {
            println!("{n} sources written");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(&e),
    }
}
