use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use secjam_core::harness::{self, Method, RunManifest};
use secjam_core::{BoundMode, Error};

#[derive(Parser)]
#[command(name = "secjam", version, about = "Secrecy energy efficiency experiments for a movable-antenna UAV jammer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every requested method and write its artifacts.
    Run(RunArgs),
    /// Check a scenario file without optimizing.
    Validate {
        /// Scenario file; the bundled table1 scenario when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Repeat `run` for each value of one scenario key.
    Sweep {
        /// Dotted key, e.g. `p_j` or `solver.max_outer`.
        #[arg(long)]
        key: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file; the bundled table1 scenario when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Comma-separated subset of proposed, fixed, direct, eve_oriented.
    #[arg(long, value_delimiter = ',', default_value = "proposed,fixed,direct,eve_oriented")]
    methods: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// nominal, path-only or rigorous.
    #[arg(long)]
    bound_mode: Option<String>,
    #[arg(long)]
    max_outer: Option<u64>,
    #[arg(long)]
    eps_th: Option<f64>,
    /// Extra `key=value` overrides into the scenario document.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest, Error> {
        let methods = self.methods.iter().map(|m| m.trim().parse()).collect::<Result<Vec<Method>, _>>()?;
        let bound_mode = self.bound_mode.as_deref().map(str::parse::<BoundMode>).transpose()?;
        let mut overrides = BTreeMap::new();
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::schema(pair.as_str(), "override must look like key=value"))?;
            overrides.insert(k.trim().to_string(), v.trim().to_string());
        }
        if let Some(n) = self.max_outer {
            overrides.insert("solver.max_outer".into(), n.to_string());
        }
        if let Some(e) = self.eps_th {
            overrides.insert("solver.eps_th".into(), e.to_string());
        }
        Ok(RunManifest {
            scenario: self.scenario.clone(),
            methods,
            seed: self.seed,
            out: self.out.clone(),
            bound_mode,
            overrides,
        })
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(harness::exit_code(e) as u8)
}

fn report(outcome: &harness::ExperimentOutcome) {
    for run in &outcome.runs {
        match &run.result {
            Ok(r) => println!(
                "{:<13} SEE {:.6e} bit/Hz/J  secrecy {:.4}  energy {:.2} J  {} iterations",
                run.method.as_str(),
                r.report.see,
                r.report.sum_secrecy,
                r.report.total_energy,
                r.trace.iterations.len() - 1
            ),
            Err(e) => println!("{:<13} failed: {e}", run.method.as_str()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { scenario } => {
            let r = match &scenario {
                Some(p) => harness::validate(p),
                None => harness::validate_str(harness::TABLE1_JSON),
            };
            println!("{r}");
            if r.is_valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Run(args) => {
            let manifest = match args.manifest() {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            match harness::run_experiment(&manifest) {
                Ok(outcome) => {
                    report(&outcome);
                    println!("artifacts in {}", manifest.out.display());
                    if outcome.failed() {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => fail(&e),
            }
        }
        Command::Sweep { key, values, run } => {
            let manifest = match run.manifest() {
                Ok(m) => m,
                Err(e) => return fail(&e),
            };
            let mut code = 0;
            for (value, result) in harness::sweep(&manifest, &key, &values) {
                println!("{key} = {value}");
                match result {
                    Ok(outcome) => {
                        report(&outcome);
                        if outcome.failed() {
                            code = code.max(2);
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        code = code.max(harness::exit_code(&e));
                    }
                }
            }
            ExitCode::from(code as u8)
        }
    }
}
