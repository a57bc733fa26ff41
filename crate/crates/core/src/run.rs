//! Run orchestration: initial data, the step loop, diagnostics cadence and outputs.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::config::RunConfig;
use crate::diagnostics::{evaluate, DiagnosticsConfig, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionState, Evolver};
use crate::families::generate;
use crate::grid::Grid;
use crate::initial_data::build_cauchy;
use crate::io::snapshot::{load_state, save_dataset, save_state};
use crate::io::timeseries::TimeseriesWriter;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const FINAL_SNAPSHOT: &str = "final.snap";
pub const INITIAL_DATA_FILE: &str = "initial_data.snap";

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// A non-finite value appeared.
    BlowUp(String),
    /// The hyperbolicity guard or metric invertibility failed.
    Guard(String),
    /// Stopped on request before t_end.
    Interrupted,
}

impl Termination {
    pub fn describe(&self) -> String {
        match self {
            Termination::Completed => "t_end reached".into(),
            Termination::BlowUp(m) => format!("blow-up: {m}"),
            Termination::Guard(m) => format!("guard violation: {m}"),
            Termination::Interrupted => "interrupted".into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Termination::Completed => 0,
            Termination::Interrupted => 130,
            _ => 3,
        }
    }

    fn from_error(e: Error) -> std::result::Result<Self, Error> {
        match e {
            Error::BlowUp { .. } => Ok(Termination::BlowUp(e.to_string())),
            Error::Guard { .. } | Error::DegenerateMetric(_) => Ok(Termination::Guard(e.to_string())),
            other => Err(other),
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub termination: Termination,
    pub records: Vec<DiagnosticsRecord>,
    pub state: EvolutionState,
    pub grid: Grid,
    pub timeseries: PathBuf,
}

/// Grid and state at the start of the run, from a restart snapshot or the configured family.
pub fn initial_state(cfg: &RunConfig) -> Result<(Grid, EvolutionState)> {
    let grid = cfg.grid()?;
    if let Some(path) = &cfg.restart_from {
        return load_state(path, Some(&grid));
    }
    let data = generate(&cfg.family_params(), &grid)?;
    let (u, v) = build_cauchy(&data)?;
    Ok((grid, EvolutionState { t: 0.0, u, v }))
}

fn diagnostics_config(cfg: &RunConfig) -> DiagnosticsConfig {
    DiagnosticsConfig {
        profile: cfg.profile(),
        energy_order: cfg.n_max,
        shell_bins: cfg.shell_bins,
        frame: cfg.frame_monitors,
    }
}

/// Runs to `t_end`, writing the echoed config, the time series and snapshots.
///
/// Blow-up and guard violations end the run early and are reported in the summary,
/// not as errors.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    run_until(cfg, &AtomicBool::new(false))
}

/// As [`run`], stopping after the current step once `stop` is set.
pub fn run_until(cfg: &RunConfig, stop: &AtomicBool) -> Result<RunSummary> {
    cfg.validate()?;
    cfg.echo()?;
    let dir = &cfg.output_dir;
    let ts_path = dir.join(TIMESERIES_FILE);
    let mut header = DiagnosticsRecord::header(cfg.n_max, cfg.shell_bins);
    header.push("status".into());
    let mut writer = TimeseriesWriter::create(&ts_path, &header)?;
    let start = match &cfg.restart_from {
        Some(path) => load_state(path, Some(&cfg.grid()?)),
        None => generate(&cfg.family_params(), &cfg.grid()?).and_then(|data| {
            save_dataset(&dir.join(INITIAL_DATA_FILE), &data)?;
            let (u, v) = build_cauchy(&data)?;
            Ok((data.grid, EvolutionState { t: 0.0, u, v }))
        }),
    };
    let (grid, mut state) = match start {
        Ok(s) => s,
        Err(e) => {
            writer.finish(&format!("rejected initial data: {e}"))?;
            return Err(e);
        }
    };
    let mut evolver = Evolver::new(grid.clone(), cfg.scheme())?;
    let dcfg = diagnostics_config(cfg);
    let mut records = Vec::new();
    let mut steps = 0usize;
    let tol = 1e-12 * cfg.t_end.max(1.0);

    let outcome = (|| -> Result<bool> {
        record(&evolver, &state, &dcfg, cfg.t_end - state.t <= tol, &mut records, &mut writer)?;
        while cfg.t_end - state.t > tol {
            if stop.load(Ordering::Relaxed) {
                if steps % cfg.diag_every != 0 {
                    record(&evolver, &state, &dcfg, true, &mut records, &mut writer)?;
                }
                return Ok(false);
            }
            let dt = evolver.stable_dt(&state).min(cfg.t_end - state.t);
            evolver.step(&mut state, dt)?;
            steps += 1;
            let done = cfg.t_end - state.t <= tol;
            if done || steps % cfg.diag_every == 0 {
                record(&evolver, &state, &dcfg, done, &mut records, &mut writer)?;
            }
            if cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0 {
                save_state(&dir.join(format!("step_{steps:07}.snap")), &grid, &state)?;
            }
        }
        Ok(true)
    })();
    let termination = match outcome {
        Ok(true) => Termination::Completed,
        Ok(false) => Termination::Interrupted,
        Err(e) => match Termination::from_error(e) {
            Ok(t) => t,
            Err(e) => {
                writer.finish(&format!("error: {e}"))?;
                return Err(e);
            }
        },
    };
    writer.finish(&termination.describe())?;
    save_state(&dir.join(FINAL_SNAPSHOT), &grid, &state)?;
    Ok(RunSummary {
        steps,
        termination,
        records,
        state,
        grid,
        timeseries: ts_path,
    })
}

fn record(
    evolver: &Evolver,
    state: &EvolutionState,
    dcfg: &DiagnosticsConfig,
    last: bool,
    records: &mut Vec<DiagnosticsRecord>,
    writer: &mut TimeseriesWriter,
) -> Result<()> {
    let rec = evaluate(evolver, state, dcfg)?;
    let mut row = rec.values();
    row.push(if last { 1.0 } else { 0.0 });
    writer.push(row)?;
    records.push(rec);
    Ok(())
}
