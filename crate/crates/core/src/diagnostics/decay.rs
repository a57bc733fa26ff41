//! Log-log decay-rate fits of shell sup norms against 1 + t + |q|.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted exponent p in sup ~ (1 + t + |q|)^p.
    pub exponent: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub samples: usize,
}

/// Least-squares slope of ln(value) against ln(1 + t + |q|) for samples with t in `window`.
pub fn decay_fit(series: &[(f64, f64)], q: f64, window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= window.0 && *t <= window.1 && *v > 0.0 && v.is_finite())
        .map(|(t, v)| ((1.0 + t + q.abs()).ln(), v.ln()))
        .collect();
    let n = pts.len();
    if n < MIN_SAMPLES {
        return Err(Error::Fit(format!("{n} usable samples in the window, need {MIN_SAMPLES}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("degenerate abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(DecayFit {
        exponent: slope,
        stderr,
        samples: n,
    })
}

/// Slope of ln(err) against ln(h) (a convergence order when h is the grid spacing).
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let nf = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}
