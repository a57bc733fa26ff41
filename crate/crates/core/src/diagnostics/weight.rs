//! The q-dependent weight w(q), q = r − t, and its derivative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub gamma: f64,
    pub mu: f64,
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile { gamma: 0.25, mu: 0.25 }
    }
}

impl WeightProfile {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::Config(format!("gamma = {gamma} must lie in (0, 1/2)")));
        }
        if !(mu > 0.0 && mu < 0.5) {
            return Err(Error::Config(format!("mu = {mu} must lie in (0, 1/2)")));
        }
        Ok(WeightProfile { gamma, mu })
    }

    /// (w, w′) at q.
    #[inline]
    pub fn weight(&self, q: f64) -> (f64, f64) {
        if q > 0.0 {
            let b = 1.0 + q;
            let e = 2.0 * self.gamma;
            (1.0 + b.powf(1.0 + e), (1.0 + e) * b.powf(e))
        } else {
            let b = 1.0 - q;
            let e = -2.0 * self.mu;
            (1.0 + b.powf(e), -e * b.powf(e - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let p = WeightProfile::default();
        assert_eq!(p.weight(0.0).0, 2.0);
        assert!((p.weight(1.0).0 - (1.0 + 2f64.powf(1.5))).abs() < 1e-14);
        assert!((p.weight(-1.0).0 - (1.0 + 2f64.powf(-0.5))).abs() < 1e-14);
    }

    #[test]
    fn continuity_at_the_cone() {
        let p = WeightProfile::new(0.1, 0.4).unwrap();
        assert!((p.weight(1e-12).0 - 2.0).abs() < 1e-10);
        assert!((p.weight(-1e-12).0 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = WeightProfile::new(0.2, 0.3).unwrap();
        for q in [-7.0, -1.5, -0.2, 0.3, 2.0, 9.0] {
            let h = 1e-6;
            let fd = (p.weight(q + h).0 - p.weight(q - h).0) / (2.0 * h);
            assert!((fd - p.weight(q).1).abs() < 1e-7, "q = {q}");
        }
    }

    #[test]
    fn open_intervals_are_enforced() {
        assert!(WeightProfile::new(0.5, 0.25).is_err());
        assert!(WeightProfile::new(0.25, 0.0).is_err());
    }
}
