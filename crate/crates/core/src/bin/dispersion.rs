use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dispersion_core::greedy::{knapsack_curve, mwis_curve, DegreeMode, InstanceRecord};
use dispersion_core::harness::config::{RunConfig, OUT_DIR_ENV};
use dispersion_core::harness::pipelines::run_experiment;
use dispersion_core::harness::report::{load_summary, render};
use dispersion_core::harness::suites;
use dispersion_core::Error;

#[derive(Parser)]
#[command(
    name = "dispersion",
    version,
    about = "Run and verify piecewise-utility configuration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline named in a JSON config and write its report.
    Run {
        config: PathBuf,
        /// Base output directory when the config names none.
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite: `all`, `c<id>`, or a criterion name.
    Verify { suite: String },
    /// Print the utility curve of a knapsack or MWIS instance file as JSON.
    ExtractCurve {
        instance_file: PathBuf,
        #[arg(long)]
        family: String,
        /// Upper end of the parameter domain.
        #[arg(long = "B", default_value_t = 10.0)]
        b: f64,
        /// MWIS degree rule: residual or original.
        #[arg(long, default_value = "residual")]
        degree: String,
    },
    /// Print a previously written run report.
    Report { run_dir: PathBuf },
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let mut v = match RunConfig::from_file(&config) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            if v.raw.output_dir.is_none() {
                if let Some(out) = out {
                    v.raw.output_dir = Some(out.to_string_lossy().into_owned());
                }
            }
            let dir = v.run_dir();
            match run_experiment(&v, &dir) {
                Ok(s) => {
                    print!("{}", render(&s));
                    println!("report written to {}", dir.display());
                    verdict(s.all_pass)
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { suite } => {
            let Some(selected) = suites::select(&suite) else {
                eprintln!(
                    "unknown suite `{suite}`; expected one of: {} or c1..c13",
                    suites::suite_names().join(", ")
                );
                return ExitCode::from(2);
            };
            let mut ok = true;
            for c in selected {
                let o = suites::run(c);
                println!("{}", o.line());
                ok &= !o.blocking();
            }
            verdict(ok)
        }
        Command::ExtractCurve {
            instance_file,
            family,
            b,
            degree,
        } => {
            let text = match std::fs::read_to_string(&instance_file) {
                Ok(t) => t,
                Err(e) => return fail(e.into()),
            };
            let rec: InstanceRecord = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => {
                    return fail(Error::Config {
                        field: "<instance>".into(),
                        message: e.to_string(),
                    })
                }
            };
            let mode = match degree.as_str() {
                "residual" => DegreeMode::Residual,
                "original" => DegreeMode::Original,
                other => {
                    return fail(Error::Config {
                        field: "degree".into(),
                        message: format!("unknown degree rule `{other}`"),
                    })
                }
            };
            let curve = match family.as_str() {
                "knapsack" => rec.to_knapsack().and_then(|i| knapsack_curve(&i, b)),
                "mwis" => rec.to_mwis().and_then(|i| mwis_curve(&i, b, mode)),
                other => Err(Error::UnknownFamily(other.into())),
            };
            match curve {
                Ok(c) => {
                    println!("{}", serde_json::to_string_pretty(&c).expect("curves serialize"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Report { run_dir } => match load_summary(&run_dir) {
            Ok(s) => {
                print!("{}", render(&s));
                verdict(s.all_pass)
            }
            Err(e) => fail(e),
        },
    }
}
