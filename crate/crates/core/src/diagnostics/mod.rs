//! Everything measured along a run: weighted energies, gauge residuals, frame monitors
//! and shell sup norms.

pub mod decay;
pub mod energy;
pub mod monitors;
pub mod weight;
pub mod zfields;

use serde::Serialize;

use crate::error::Result;
use crate::evolution::{EvolutionState, Evolver};
use energy::EnergyRecord;
use monitors::{FrameMonitors, GaugeNorms, ShellSups};
use weight::WeightProfile;

/// One diagnostic time slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: EnergyRecord,
    pub gauge: GaugeNorms,
    pub frame: FrameMonitors,
    pub shells: ShellSups,
    /// max |u| and |v| over the grid
    pub max_field: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsConfig {
    pub profile: WeightProfile,
    pub energy_order: usize,
    pub shell_bins: usize,
    pub frame: bool,
}

pub fn evaluate(evolver: &Evolver, state: &EvolutionState, cfg: &DiagnosticsConfig) -> Result<DiagnosticsRecord> {
    let grid = &evolver.grid;
    let energy = energy::energy(evolver, state, cfg.energy_order, &cfg.profile)?;
    let gauge = monitors::gauge_monitors(grid, state, &cfg.profile, 0)?;
    let frame = if cfg.frame {
        monitors::frame_monitors(grid, state)?
    } else {
        FrameMonitors::default()
    };
    Ok(DiagnosticsRecord {
        t: state.t,
        energy,
        gauge,
        frame,
        shells: monitors::shell_sups(grid, state, cfg.shell_bins),
        max_field: state.max_abs(),
    })
}

impl DiagnosticsRecord {
    /// Column names matching [`DiagnosticsRecord::values`].
    pub fn header(energy_order: usize, shell_bins: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        for k in 0..=energy_order {
            h.push(format!("E{k}"));
        }
        for k in 0..=energy_order {
            h.push(format!("flux{k}"));
        }
        h.extend(
            ["wave_gauge_sup", "wave_gauge_l2", "lorenz_sup", "lorenz_l2", "dH_TU", "dH_full", "H_LT", "ZH_LL", "max_field"]
                .map(String::from),
        );
        for b in 0..shell_bins {
            h.push(format!("A_shell{b}"));
        }
        for b in 0..shell_bins {
            h.push(format!("h_shell{b}"));
        }
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        v.extend(&self.energy.total);
        v.extend(&self.energy.flux);
        v.extend([
            self.gauge.wave_sup,
            self.gauge.wave_l2,
            self.gauge.lorenz_sup,
            self.gauge.lorenz_l2,
            self.frame.dh_tu,
            self.frame.dh_full,
            self.frame.h_lt,
            self.frame.zh_ll,
            self.max_field,
        ]);
        v.extend(&self.shells.potential);
        v.extend(&self.shells.metric);
        v
    }
}
