//! Run configuration: a flat JSON object with defaults and range checks.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::energy::N_MAX;
use crate::diagnostics::weight::WeightProfile;
use crate::error::{Error, Result};
use crate::evolution::{Mode, SchemeParams};
use crate::families::{Family, FamilyParams};
use crate::grid::{Boundary, Grid};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "EMGAUGE_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub family: Family,
    pub epsilon: f64,
    pub width: f64,
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub cfl: f64,
    pub sigma: f64,
    pub order: usize,
    pub boundary: Boundary,
    pub gamma: f64,
    pub mu: f64,
    /// Highest commutation order in the energy.
    pub n_max: usize,
    pub t_end: f64,
    /// Steps between diagnostic rows.
    pub diag_every: usize,
    /// Steps between snapshots; 0 writes only the final state.
    pub snapshot_every: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Fixed time step overriding the CFL rule.
    pub dt: Option<f64>,
    pub freeze_metric: bool,
    pub shell_bins: usize,
    /// Include null-frame monitors in the diagnostics.
    pub frame_monitors: bool,
    pub restart_from: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: Family::Flat,
            epsilon: 1e-3,
            width: 1.0,
            n: 32,
            half_width: 8.0,
            cfl: 0.25,
            sigma: 0.1,
            order: 4,
            boundary: Boundary::Sommerfeld,
            gamma: 0.25,
            mu: 0.25,
            n_max: 1,
            t_end: 1.0,
            diag_every: 10,
            snapshot_every: 0,
            output_dir: PathBuf::from("output"),
            seed: 0,
            dt: None,
            freeze_metric: false,
            shell_bins: 8,
            frame_monitors: true,
            restart_from: None,
        }
    }
}

const KNOWN_KEYS: [&str; 23] = [
    "family",
    "epsilon",
    "width",
    "n",
    "L",
    "cfl",
    "sigma",
    "order",
    "boundary",
    "gamma",
    "mu",
    "n_max",
    "t_end",
    "diag_every",
    "snapshot_every",
    "output_dir",
    "seed",
    "dt",
    "freeze_metric",
    "shell_bins",
    "frame_monitors",
    "restart_from",
    "comment",
];

impl RunConfig {
    /// Parses and validates a JSON document, applying the output-directory override.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("configuration must be a JSON object".into()))?;
        let mut unknown: Vec<&str> = obj
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            unknown.sort_unstable();
            return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
        }
        let mut obj = obj.clone();
        obj.remove("comment");
        let mut cfg: RunConfig = serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| Error::Config(e.to_string()))?;
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        self.grid()?;
        self.scheme().validate()?;
        self.family_params().validate()?;
        WeightProfile::new(self.gamma, self.mu)?;
        if self.n_max > N_MAX {
            return fail(format!("diagnostics: n_max = {} exceeds the supported {N_MAX}", self.n_max));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return fail(format!("schedule: t_end must be finite and non-negative, got {}", self.t_end));
        }
        if self.diag_every == 0 {
            return fail("schedule: diag_every must be at least 1".into());
        }
        if self.shell_bins == 0 {
            return fail("diagnostics: shell_bins must be at least 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.half_width, self.order, self.boundary)
    }

    pub fn scheme(&self) -> SchemeParams {
        SchemeParams {
            cfl: self.cfl,
            sigma: self.sigma,
            dt: self.dt,
            mode: if self.freeze_metric { Mode::FrozenMetric } else { Mode::Full },
        }
    }

    pub fn family_params(&self) -> FamilyParams {
        FamilyParams {
            family: self.family,
            epsilon: self.epsilon,
            width: self.width,
        }
    }

    pub fn profile(&self) -> WeightProfile {
        WeightProfile {
            gamma: self.gamma,
            mu: self.mu,
        }
    }

    /// Writes the fully materialized configuration as `config.json` in the output directory.
    pub fn echo(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.output_dir).map_err(|e| Error::io(&self.output_dir, e))?;
        let path = self.output_dir.join("config.json");
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Radius outside of which the initial data vanish (to round-off for Gaussian families).
    pub fn data_radius(&self) -> f64 {
        match self.family {
            Family::Flat => 0.0,
            Family::Maxwell => 2.0 * self.width,
            Family::Conformal | Family::Tt => 6.0 * self.width,
        }
    }

    /// Warning text when the outer boundary is causally connected to the data before t_end.
    pub fn boundary_warning(&self) -> Option<String> {
        let need = self.t_end + self.data_radius();
        (self.boundary == Boundary::Sommerfeld && self.family != Family::Flat && self.half_width < need).then(|| {
            format!(
                "L = {} is below t_end + data radius = {need}; boundary effects reach the measured region",
                self.half_width
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_materializes_defaults() {
        let c = RunConfig::from_json(r#"{"family": "flat", "n": 32, "t_end": 1}"#).unwrap();
        assert_eq!(c.cfl, 0.25);
        assert_eq!(c.sigma, 0.1);
        assert_eq!(c.gamma, 0.25);
        assert_eq!(c.mu, 0.25);
        assert_eq!(c.n, 32);
    }

    #[test]
    fn unknown_keys_are_listed_together() {
        let e = RunConfig::from_json(r#"{"family": "flat", "colour": 1, "alpha": 2}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("alpha") && msg.contains("colour"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn range_violations_are_rejected() {
        for bad in [r#"{"gamma": 0.5}"#, r#"{"cfl": 1.5}"#, r#"{"sigma": -0.1}"#, r#"{"n": 4}"#, r#"{"n_max": 3}"#] {
            assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig {
            output_dir: dir.path().to_path_buf(),
            family: Family::Tt,
            dt: Some(0.05),
            ..Default::default()
        };
        let path = c.echo().unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
