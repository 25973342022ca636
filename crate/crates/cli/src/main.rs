use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multibgk_cli::config::{parse_method, ConfigError, ScenarioConfig};
use multibgk_cli::presets::preset;
use multibgk_cli::run::{output_base, run_scenario, Overrides, EXIT_OK, EXIT_PARSE};

#[derive(Parser)]
#[command(
    name = "multibgk",
    version,
    about = "Multi-species BGK moment relaxation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one or more scenarios and verify the trajectory.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario 1, 2 or 3.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3), conflicts_with = "config")]
    example: Option<u8>,
    /// Scenario file; repeat to run several in parallel.
    #[arg(long)]
    config: Vec<PathBuf>,
    /// `be` or `rk4`.
    #[arg(long)]
    method: Option<String>,
    /// Step size in seconds; chosen from the relaxation spectrum if omitted.
    #[arg(long)]
    dt: Option<f64>,
    /// Final time in seconds; 40 slowest relaxation times if omitted.
    #[arg(long)]
    t_final: Option<f64>,
    /// Knudsen number.
    #[arg(long)]
    eps: Option<f64>,
    /// Output directory; each scenario writes into its own subdirectory.
    #[arg(long, env = "MULTIBGK_OUT")]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> Vec<Result<ScenarioConfig, ConfigError>> {
    if let Some(id) = args.example {
        return vec![preset(id).ok_or_else(|| ConfigError::Invalid(format!("no example {id}")))];
    }
    args.config
        .iter()
        .map(|p| ScenarioConfig::from_path(p))
        .collect()
}

fn run(args: RunArgs) -> i32 {
    if args.example.is_none() && args.config.is_empty() {
        eprintln!("error: give --example N or at least one --config PATH");
        return EXIT_PARSE;
    }
    let method = match args.method.as_deref().map(parse_method).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PARSE;
        }
    };
    let overrides = Overrides {
        method,
        dt: args.dt,
        t_final: args.t_final,
        eps: args.eps,
    };

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut jobs = Vec::new();
    let mut code = EXIT_OK;
    for loaded in load(&args) {
        match loaded.and_then(|c| overrides.apply(&c)) {
            Ok(cfg) => {
                let count = seen.entry(cfg.name.clone()).or_insert(0);
                *count += 1;
                let sub = if *count == 1 {
                    cfg.name.clone()
                } else {
                    format!("{}-{count}", cfg.name)
                };
                let dir = output_base(args.out.as_deref(), &cfg).join(sub);
                jobs.push((cfg, dir));
            }
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(EXIT_PARSE);
            }
        }
    }

    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(cfg, dir)| s.spawn(move || run_scenario(cfg, dir)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    });

    for ((cfg, dir), (c, result)) in jobs.iter().zip(results) {
        match result {
            Ok(o) => {
                let failures = o.report.failures();
                let status = if failures.is_empty() {
                    "all monitors pass".to_string()
                } else {
                    format!("FAILED: {}", failures.join(", "))
                };
                println!(
                    "{}: {} steps ({} recorded) to t = {:e} s in {:.3} s, {status}; results in {}",
                    cfg.name,
                    o.integrator.steps(),
                    o.trajectory.times.len(),
                    o.integrator.t_final,
                    o.elapsed.as_secs_f64(),
                    dir.display()
                );
            }
            Err(e) => eprintln!("{}: error: {e}", cfg.name),
        }
        code = code.max(c);
    }
    code
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_PARSE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let code = match cli.command {
        Command::Run(args) => run(args),
    };
    ExitCode::from(code as u8)
}
