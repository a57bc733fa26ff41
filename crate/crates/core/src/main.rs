use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use emgauge::config::RunConfig;
use emgauge::diagnostics::monitors::gauge_monitors;
use emgauge::evolution::EvolutionState;
use emgauge::families::generate;
use emgauge::initial_data::{build_cauchy, constraint_residuals};
use emgauge::io::plot::{plot_csv, PlotOptions};
use emgauge::io::snapshot::load_dataset;
use emgauge::run::run_until;
use emgauge::verify::run_all;
use emgauge::{Error, Result};

/// Outer layers excluded from the data residual norms.
const CHECK_SKIP_LAYERS: usize = 2;

#[derive(Parser)]
#[command(name = "emgauge", version, about = "Einstein-Maxwell evolution in wave and Lorenz gauge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data to t_end.
    Run { config: PathBuf },
    /// Report constraint and gauge residuals of the initial data.
    CheckData {
        config: PathBuf,
        /// Use a saved data set instead of generating one from the configuration.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the pointwise oracle checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Plot time-series columns as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "t")]
        x: String,
        #[arg(long = "y", required = true)]
        ys: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        title: Option<String>,
        /// γ of the −1−γ decay guide.
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            if let Some(w) = cfg.boundary_warning() {
                eprintln!("warning: {w}");
            }
            let stop = Arc::new(AtomicBool::new(false));
            let flag = Arc::clone(&stop);
            ctrlc::set_handler(move || flag.store(true, Ordering::Relaxed))
                .map_err(|e| Error::Argument(format!("cannot install the interrupt handler: {e}")))?;
            let summary = run_until(&cfg, &stop)?;
            println!(
                "{} steps, t = {}, {}; output in {}",
                summary.steps,
                summary.state.t,
                summary.termination.describe(),
                cfg.output_dir.display()
            );
            Ok(summary.termination.exit_code())
        }
        Command::CheckData { config, data } => {
            let cfg = RunConfig::load(&config)?;
            let data = match data {
                Some(path) => load_dataset(&path, Some(&cfg.grid()?))?,
                None => generate(&cfg.family_params(), &cfg.grid()?)?,
            };
            let prof = cfg.profile();
            let constraints = constraint_residuals(&data, &prof, CHECK_SKIP_LAYERS)?.norms;
            let (u, v) = build_cauchy(&data)?;
            let state = EvolutionState { t: 0.0, u, v };
            let gauge = gauge_monitors(&data.grid, &state, &prof, CHECK_SKIP_LAYERS)?;
            let report = json!({
                "family": cfg.family.name(),
                "n": data.grid.n,
                "dx": data.grid.dx,
                "constraints": constraints,
                "gauge": gauge,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(0)
        }
        Command::Verify { seed } => {
            let checks = run_all(seed);
            for c in &checks {
                println!("{c}");
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 3 })
        }
        Command::Plot {
            csv,
            x,
            ys,
            out,
            linear,
            title,
            gamma,
        } => {
            if !(gamma > 0.0 && gamma < 0.5) {
                return Err(Error::Argument("gamma must lie in (0, 1/2)".into()));
            }
            let opts = PlotOptions {
                title: title.unwrap_or_else(|| csv.display().to_string()),
                x_label: x.clone(),
                log_log: !linear,
                guide_gamma: (!linear).then_some(gamma),
            };
            plot_csv(&csv, &x, &ys, &out, &opts)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}
