//! Weighted commuted energies Σ_{|I|≤N} (‖√w ∂Z^I h‖ + ‖√w ∂Z^I A‖) and tangential fluxes.

use rayon::prelude::*;
use serde::Serialize;

use super::weight::WeightProfile;
use super::zfields::{apply_z_with, jet_gradients, state_jet, Jet, VectorFieldId};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionState, Evolver, NF};
use crate::grid::Grid;
use crate::tensor::SYM_WEIGHT;

/// Largest supported commutation order.
pub const N_MAX: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    /// E_k for k = 0..=N.
    pub total: Vec<f64>,
    /// Metric part of E_k.
    pub metric: Vec<f64>,
    /// Potential part of E_k.
    pub potential: Vec<f64>,
    /// Σ_{|I|≤k} ∫ |∂̄Z^I(h, A)|² w′ at the current time.
    pub flux: Vec<f64>,
}

/// Per multi-index contributions: (‖√w ∂Z^Ih‖, ‖√w ∂Z^IA‖, flux integral).
fn contribution(grid: &Grid, t: f64, prof: &WeightProfile, jet: &Jet<NF>, grad0: &[[[f64; NF]; 3]]) -> (f64, f64, f64) {
    let (h2, a2, flux) = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = grid.position(p);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let (w, wp) = prof.weight(r - t);
            let vol = grid.volume_weight(p);
            let dt = &jet.levels[1][p];
            let g = &grad0[p];
            let mut eh = 0.0;
            let mut ea = 0.0;
            for c in 0..NF {
                let s = dt[c] * dt[c] + g[0][c] * g[0][c] + g[1][c] * g[1][c] + g[2][c] * g[2][c];
                if c < 10 {
                    eh += SYM_WEIGHT[c] * s;
                } else {
                    ea += s;
                }
            }
            let mut tang = 0.0;
            if r > 2.0 * grid.dx {
                let om = [x[0] / r, x[1] / r, x[2] / r];
                for c in 0..NF {
                    let radial = om[0] * g[0][c] + om[1] * g[1][c] + om[2] * g[2][c];
                    let l = dt[c] + radial;
                    let mut s = l * l;
                    for i in 0..3 {
                        let b = g[i][c] - om[i] * radial;
                        s += b * b;
                    }
                    tang += if c < 10 { SYM_WEIGHT[c] } else { 1.0 } * s;
                }
            } else {
                tang = eh + ea;
            }
            (vol * w * eh, vol * w * ea, vol * wp * tang)
        })
        .collect::<Vec<_>>()
        .into_iter()
        // sequential sum keeps the result independent of the thread count
        .fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    (h2.sqrt(), a2.sqrt(), flux)
}

/// E_k for k ≤ `order`, summing over ordered multi-indices of the 11 vector fields.
pub fn energy(evolver: &Evolver, state: &EvolutionState, order: usize, prof: &WeightProfile) -> Result<EnergyRecord> {
    if order > N_MAX {
        return Err(Error::Config(format!("energy order {order} exceeds N_max = {N_MAX}")));
    }
    let grid = &evolver.grid;
    let t = state.t;
    let base = state_jet(evolver, state, order + 1)?;
    let base_grads = jet_gradients(grid, &base, order + 1);
    let mut metric = vec![0.0; order + 1];
    let mut potential = vec![0.0; order + 1];
    let mut flux = vec![0.0; order + 1];
    let mut add = |k: usize, c: (f64, f64, f64)| {
        metric[k] += c.0;
        potential[k] += c.1;
        flux[k] += c.2;
    };
    add(0, contribution(grid, t, prof, &base, &base_grads[0]));
    if order >= 1 {
        for z1 in VectorFieldId::ALL {
            let j1 = apply_z_with(grid, t, z1, &base, &base_grads);
            let g1 = jet_gradients(grid, &j1, j1.order());
            add(1, contribution(grid, t, prof, &j1, &g1[0]));
            if order >= 2 {
                for z2 in VectorFieldId::ALL {
                    // Z^{(z2, z1)}: z1 acts first
                    let j2 = apply_z_with(grid, t, z2, &j1, &g1);
                    let g2 = jet_gradients(grid, &j2, 1);
                    add(2, contribution(grid, t, prof, &j2, &g2[0]));
                }
            }
        }
    }
    // cumulative sums over |I| ≤ k
    for k in 1..=order {
        metric[k] += metric[k - 1];
        potential[k] += potential[k - 1];
        flux[k] += flux[k - 1];
    }
    let total = metric.iter().zip(&potential).map(|(a, b)| a + b).collect();
    Ok(EnergyRecord {
        t,
        total,
        metric,
        potential,
        flux,
    })
}
