use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gkforge::cli::{calibrate, check_file, load, render_calibration, resolve, with_thread_cap, Overrides};
use gkforge::gkcore::KappaChoice;

#[derive(Parser)]
#[command(name = "gkforge", version, about = "Build and check generalized Kähler structures from potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario and cover in a file.
    Check {
        file: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Replace every residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// `auto`, `0.5` or `1`.
        #[arg(long, value_parser = parse_kappa)]
        kappa: Option<KappaChoice>,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit the torsion coefficient and Schouten constant per scenario.
    Calibrate { file: PathBuf },
}

fn parse_kappa(s: &str) -> Result<KappaChoice, String> {
    match s {
        "auto" => Ok(KappaChoice::Auto),
        "0.5" => Ok(KappaChoice::Fixed(0.5)),
        "1" | "1.0" => Ok(KappaChoice::Fixed(1.0)),
        _ => Err(format!("expected auto, 0.5 or 1, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Check {
            file,
            samples,
            seed,
            tol,
            kappa,
            json,
        } => {
            let ov = Overrides { samples, seed, tol, kappa };
            match with_thread_cap(|| check_file(&file, &ov)).and_then(|r| r) {
                Err(e) => {
                    eprintln!("gkforge: {e}");
                    2
                }
                Ok(report) => {
                    print!("{}", report.render_text());
                    match json.map(|p| std::fs::write(&p, report.to_json()).map_err(|e| (p, e))) {
                        Some(Err((p, e))) => {
                            eprintln!("gkforge: cannot write {}: {e}", p.display());
                            2
                        }
                        _ => report.exit_code(),
                    }
                }
            }
        }
        Command::Calibrate { file } => {
            let rows = with_thread_cap(|| {
                let loaded = resolve(&load(&file)?, &Overrides::default())?;
                calibrate(&loaded)
            })
            .and_then(|r| r);
            match rows {
                Ok(rows) => {
                    print!("{}", render_calibration(&rows));
                    0
                }
                Err(e) => {
                    eprintln!("gkforge: {e}");
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
