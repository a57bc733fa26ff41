//! Snapshots, diagnostic time series and quick-look plots.

pub mod plot;
pub mod snapshot;
pub mod timeseries;
