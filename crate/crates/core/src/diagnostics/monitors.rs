//! Gauge residuals, null-frame monitors of H = g⁻¹ − m⁻¹ and shell-wise sup norms.

use rayon::prelude::*;
use serde::Serialize;

use super::weight::WeightProfile;
use super::zfields::VectorFieldId;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionState, NF};
use crate::frame::{family_projector, weighted_square, FrameFamily, FramePoint};
use crate::grid::Grid;
use crate::tensor::{inverse_sym4, mat_mul, metric_matrix, Mat4, SymTensor2, ETA};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GaugeNorms {
    pub wave_sup: f64,
    pub wave_l2: f64,
    pub lorenz_sup: f64,
    pub lorenz_l2: f64,
}

struct PointGeometry {
    gi: Mat4,
    d: [Mat4; 4],
    da: Mat4,
}

fn geometry(grid: &Grid, state: &EvolutionState, p: usize) -> std::result::Result<PointGeometry, f64> {
    let u = &state.u[p];
    let h = SymTensor2(u[..10].try_into().expect("10"));
    let (gi10, _) = inverse_sym4(&metric_matrix(&h)).ok_or(f64::NAN)?;
    let gi = SymTensor2(gi10).matrix();
    let grad = grid.gradient(&state.u, p);
    let v = &state.v[p];
    let src = [v, &grad[0], &grad[1], &grad[2]];
    let d = src.map(|c| SymTensor2(c[..10].try_into().expect("10")).matrix());
    let da = src.map(|c| -> [f64; 4] { c[10..14].try_into().expect("4") });
    Ok(PointGeometry { gi, d, da })
}

/// F̂^λ = g^{λμ}g^{αβ}(∂_αh_{μβ} − ½∂_μh_{αβ}) and div_gA = g^{αλ}∂_λA_α − F̂^θA_θ at a point.
fn gauge_point(geo: &PointGeometry, a: &[f64]) -> ([f64; 4], f64) {
    let PointGeometry { gi, d, da } = geo;
    let mut lower = [0.0; 4];
    for (mu, l) in lower.iter_mut().enumerate() {
        let mut s = 0.0;
        for al in 0..4 {
            for be in 0..4 {
                s += gi[al][be] * (d[al][mu][be] - 0.5 * d[mu][al][be]);
            }
        }
        *l = s;
    }
    let fhat: [f64; 4] = std::array::from_fn(|l| (0..4).map(|m| gi[l][m] * lower[m]).sum());
    let mut div = 0.0;
    for al in 0..4 {
        for l in 0..4 {
            div += gi[al][l] * da[l][al];
        }
    }
    for th in 0..4 {
        div -= fhat[th] * a[th];
    }
    (fhat, div)
}

/// Pointwise wave-gauge vector and Lorenz scalar.
pub fn gauge_fields(grid: &Grid, state: &EvolutionState) -> Result<Vec<([f64; 4], f64)>> {
    let out: Vec<std::result::Result<([f64; 4], f64), (usize, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let geo = geometry(grid, state, p).map_err(|v| (p, v))?;
            Ok(gauge_point(&geo, &state.u[p][10..14]))
        })
        .collect();
    out.into_iter()
        .map(|r| {
            r.map_err(|(p, v)| {
                Error::DegenerateMetric(format!("singular metric at {:?} (−g^00 = {v})", grid.position(p)))
            })
        })
        .collect()
}

/// Sup and weighted L² norms of the gauge residuals, skipping `skip` outer layers.
pub fn gauge_monitors(grid: &Grid, state: &EvolutionState, prof: &WeightProfile, skip: usize) -> Result<GaugeNorms> {
    let fields = gauge_fields(grid, state)?;
    let mut n = GaugeNorms::default();
    for (p, (fhat, div)) in fields.iter().enumerate() {
        if grid.layer(p) < skip {
            continue;
        }
        let x = grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w = prof.weight(r - state.t).0 * grid.volume_weight(p);
        let f2: f64 = fhat.iter().map(|x| x * x).sum();
        n.wave_sup = n.wave_sup.max(f2.sqrt());
        n.wave_l2 += w * f2;
        n.lorenz_sup = n.lorenz_sup.max(div.abs());
        n.lorenz_l2 += w * div * div;
    }
    n.wave_l2 = n.wave_l2.sqrt();
    n.lorenz_l2 = n.lorenz_l2.sqrt();
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FrameMonitors {
    /// sup |∂H|_{𝒯𝒰}
    pub dh_tu: f64,
    /// sup |∂H| (full norm) over the same region, for comparison
    pub dh_full: f64,
    /// sup |H|_{𝓛𝒯}/(1+|q|)
    pub h_lt: f64,
    /// sup over the 11 fields of |ZH|_{𝓛𝓛}/(1+|q|)
    pub zh_ll: f64,
}

/// Null-frame monitors of H lowered with m, over the exterior region r > 2Δx.
pub fn frame_monitors(grid: &Grid, state: &EvolutionState) -> Result<FrameMonitors> {
    let t = state.t;
    let r_mask = 2.0 * grid.dx;
    let per_point: Vec<std::result::Result<FrameMonitors, (usize, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = grid.position(p);
            let pt = match FramePoint::new(t, x, r_mask) {
                Ok(pt) => pt,
                Err(_) => return Ok(FrameMonitors::default()),
            };
            if state.u[p][..10].iter().all(|&c| c == 0.0) && state.v[p][..10].iter().all(|&c| c == 0.0) {
                let grad = grid.gradient(&state.u, p);
                if grad.iter().all(|g| g[..10].iter().all(|&c| c == 0.0)) {
                    return Ok(FrameMonitors::default());
                }
            }
            let geo = geometry(grid, state, p).map_err(|v| (p, v))?;
            let gi = geo.gi;
            // H^{μν} lowered: H_{μν} = η_μ η_ν H^{μν}
            let lower = |m: &Mat4| -> Mat4 { std::array::from_fn(|a| std::array::from_fn(|b| ETA[a] * ETA[b] * m[a][b])) };
            let hdev: Mat4 = std::array::from_fn(|a| std::array::from_fn(|b| gi[a][b] - if a == b { ETA[a] } else { 0.0 }));
            let h_low = lower(&hdev);
            // ∂_λH^{μν} = −g^{μα} ∂_λh_{αβ} g^{βν}
            let dh_low: [Mat4; 4] = std::array::from_fn(|l| {
                let m = mat_mul(&mat_mul(&gi, &geo.d[l]), &gi);
                lower(&m.map(|r| r.map(|x| -x)))
            });
            // rank-3 tensor with the derivative slot last
            let mut p3 = vec![0.0; 64];
            for a in 0..4 {
                for b in 0..4 {
                    for (l, dl) in dh_low.iter().enumerate() {
                        p3[16 * a + 4 * b + l] = dl[a][b];
                    }
                }
            }
            let pl = family_projector(FrameFamily::L, &pt);
            let pt_ = family_projector(FrameFamily::T, &pt);
            let pu = family_projector(FrameFamily::U, &pt);
            let dh_tu = weighted_square(&p3, 3, &[pt_, pu]).max(0.0).sqrt();
            let dh_full = p3.iter().map(|x| x * x).sum::<f64>().sqrt();
            let flat2 = |m: &Mat4| -> Vec<f64> { m.iter().flat_map(|r| r.iter().copied()).collect() };
            let q1 = 1.0 + pt.q.abs();
            let h_lt = weighted_square(&flat2(&h_low), 2, &[pl, pt_]).max(0.0).sqrt() / q1;
            let mut zh_ll: f64 = 0.0;
            for z in VectorFieldId::ALL {
                let (a, _, b, _) = z.coefficients(t, &x);
                let zh: Mat4 = std::array::from_fn(|m| {
                    std::array::from_fn(|n| {
                        a * dh_low[0][m][n] + b[0] * dh_low[1][m][n] + b[1] * dh_low[2][m][n] + b[2] * dh_low[3][m][n]
                    })
                });
                zh_ll = zh_ll.max(weighted_square(&flat2(&zh), 2, &[pl, pl]).max(0.0).sqrt() / q1);
            }
            Ok(FrameMonitors {
                dh_tu,
                dh_full,
                h_lt,
                zh_ll,
            })
        })
        .collect();
    let mut out = FrameMonitors::default();
    for r in per_point {
        let m = r.map_err(|(p, v)| {
            Error::DegenerateMetric(format!("singular metric at {:?} (−g^00 = {v})", grid.position(p)))
        })?;
        out.dh_tu = out.dh_tu.max(m.dh_tu);
        out.dh_full = out.dh_full.max(m.dh_full);
        out.h_lt = out.h_lt.max(m.h_lt);
        out.zh_ll = out.zh_ll.max(m.zh_ll);
    }
    Ok(out)
}

/// Shell-wise sup norms in |q|-bins [b, b+1), skipping the two outermost layers.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ShellSups {
    /// sup |A| (Euclidean over the four components) per bin.
    pub potential: Vec<f64>,
    /// sup |h| (Frobenius) per bin.
    pub metric: Vec<f64>,
}

pub const SHELL_SKIP_LAYERS: usize = 2;

pub fn shell_sups(grid: &Grid, state: &EvolutionState, bins: usize) -> ShellSups {
    let mut s = ShellSups {
        potential: vec![0.0; bins],
        metric: vec![0.0; bins],
    };
    for p in 0..grid.len() {
        if grid.layer(p) < SHELL_SKIP_LAYERS {
            continue;
        }
        let x = grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let b = (r - state.t).abs().floor() as usize;
        if b >= bins {
            continue;
        }
        let u = &state.u[p];
        let a = u[10..NF].iter().map(|x| x * x).sum::<f64>().sqrt();
        let h = SymTensor2(u[..10].try_into().expect("10")).norm();
        s.potential[b] = s.potential[b].max(a);
        s.metric[b] = s.metric[b].max(h);
    }
    s
}
