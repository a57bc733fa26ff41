//! Method-of-lines evolution of u = (h_{μν}, A_β) and v = ∂_t u with classical RK4.
//!
//! The spatial operator uses the grid's stencil tables, Kreiss–Oliger dissipation on
//! both u and v, and an outgoing-radiation condition on the outermost layer of
//! non-periodic grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::rhs::sources;
use crate::tensor::{inverse_sym4, metric_matrix, Mat4, SymTensor2, SYM_PAIRS};

/// Number of evolved components per point: 10 for h, 4 for A.
pub const NF: usize = 14;
pub type Fields = Vec<[f64; NF]>;

/// Smallest admissible −g^{00}.
pub const GUARD_MIN: f64 = 0.5;

/// Index pairs of the six spatial second derivatives in storage order.
pub const HESSIAN_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Metric and potential evolve together.
    #[default]
    Full,
    /// The metric perturbation is held fixed and only A evolves on it.
    FrozenMetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub cfl: f64,
    pub sigma: f64,
    /// Fixed time step; when absent the step follows the CFL rule.
    pub dt: Option<f64>,
    pub mode: Mode,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            cfl: 0.25,
            sigma: 0.1,
            dt: None,
            mode: Mode::Full,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl = {} must lie in (0, 1)", self.cfl)));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::Config(format!("sigma = {} must lie in [0, 1]", self.sigma)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt = {dt} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub u: Fields,
    pub v: Fields,
}

impl EvolutionState {
    pub fn zeros(grid: &Grid) -> Self {
        EvolutionState {
            t: 0.0,
            u: vec![[0.0; NF]; grid.len()],
            v: vec![[0.0; NF]; grid.len()],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .flat_map(|x| x.iter())
            .fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_abs_h(&self) -> f64 {
        self.u
            .iter()
            .flat_map(|x| x[..10].iter())
            .fold(0.0, |a, x| a.max(x.abs()))
    }
}

/// Gradient and spatial Hessian of a point-major field.
pub fn spatial_derivs<const K: usize>(
    f: &[[f64; K]],
    grid: &Grid,
) -> Result<(Vec<[[f64; K]; 3]>, Vec<[[f64; K]; 6]>)> {
    if f.len() != grid.len() {
        return Err(Error::State(format!(
            "field has {} points, grid has {}",
            f.len(),
            grid.len()
        )));
    }
    Ok((0..grid.len())
        .into_par_iter()
        .map(|p| {
            let d1 = grid.gradient(f, p);
            let d2 = HESSIAN_PAIRS.map(|(a, b)| grid.diff2(f, p, a, b));
            (d1, d2)
        })
        .unzip())
}

/// Point data for the pointwise acceleration.
pub struct PointJet<'a> {
    pub u: &'a [f64; NF],
    pub v: &'a [f64; NF],
    pub du: &'a [[f64; NF]; 3],
    pub dv: &'a [[f64; NF]; 3],
    pub ddu: &'a [[f64; NF]; 6],
}

/// ∂_t v from g^{αβ}∂_α∂_βu = RHS with the mixed term taken from ∂_iv.
///
/// Returns the offending −g^{00} on a guard violation.
#[inline]
pub fn second_time_derivative(pj: &PointJet, frozen: bool) -> std::result::Result<[f64; NF], f64> {
    let h = SymTensor2(pj.u[..10].try_into().expect("10"));
    let g = metric_matrix(&h);
    let (gi10, _) = inverse_sym4(&g).ok_or(f64::NAN)?;
    let gi = SymTensor2(gi10).matrix();
    let lapse2 = -gi[0][0];
    if !(lapse2 >= GUARD_MIN) {
        return Err(lapse2);
    }
    let sym = |c: &[f64]| -> Mat4 { SymTensor2(c[..10].try_into().expect("10")).matrix() };
    let d: [Mat4; 4] = [sym(pj.v), sym(&pj.du[0]), sym(&pj.du[1]), sym(&pj.du[2])];
    let da: Mat4 = [
        pj.v[10..14].try_into().expect("4"),
        pj.du[0][10..14].try_into().expect("4"),
        pj.du[1][10..14].try_into().expect("4"),
        pj.du[2][10..14].try_into().expect("4"),
    ];
    let (f, j) = sources(&gi, &g, &d, &da);
    let mut out = [0.0; NF];
    let first = if frozen { 10 } else { 0 };
    let inv = 1.0 / lapse2;
    for c in first..NF {
        let rhs = if c < 10 { f[c] } else { j[c - 10] };
        let mut s = -rhs;
        for i in 0..3 {
            s += 2.0 * gi[0][i + 1] * pj.dv[i][c];
        }
        for (k, &(a, b)) in HESSIAN_PAIRS.iter().enumerate() {
            let w = if a == b { 1.0 } else { 2.0 };
            s += w * gi[a + 1][b + 1] * pj.ddu[k][c];
        }
        out[c] = s * inv;
    }
    Ok(out)
}

/// Right-hand side of the semi-discrete system.
pub struct Evolver {
    pub grid: Grid,
    pub params: SchemeParams,
    plane_deps: Vec<Vec<usize>>,
    scratch: Option<Box<Scratch>>,
}

struct Scratch {
    u1: Fields,
    v1: Fields,
    ku: Fields,
    kv: Fields,
    acc_u: Fields,
    acc_v: Fields,
}

impl Evolver {
    pub fn new(grid: Grid, params: SchemeParams) -> Result<Self> {
        params.validate()?;
        let plane_deps = (0..grid.n).map(|k| grid.support(k)).collect();
        Ok(Evolver {
            grid,
            params,
            plane_deps,
            scratch: None,
        })
    }

    /// Δt from the CFL rule with characteristic-speed estimate 1 + 4 max|h|.
    pub fn stable_dt(&self, state: &EvolutionState) -> f64 {
        match self.params.dt {
            Some(dt) => dt,
            None => self.params.cfl * self.grid.dx / (1.0 + 4.0 * state.max_abs_h()),
        }
    }

    /// Writes (∂_tu, ∂_tv) into `du`, `dv`.
    pub fn rates(&self, t: f64, u: &[[f64; NF]], v: &[[f64; NF]], du: &mut [[f64; NF]], dv: &mut [[f64; NF]], sigma: f64) -> Result<()> {
        let grid = &self.grid;
        let n = grid.n;
        let plane = n * n;
        let frozen = self.params.mode == Mode::FrozenMetric;
        let first = if frozen { 10 } else { 0 };
        let flat_metric = frozen && u.par_iter().chain(v.par_iter()).all(|x| x[..10].iter().all(|&c| c == 0.0));
        if flat_metric {
            self.flat_potential_rates(u, v, du, dv, sigma);
            return Ok(());
        }
        let active: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|k| {
                let r = k * plane..(k + 1) * plane;
                u[r.clone()].iter().chain(&v[r]).any(|x| x[first..].iter().any(|&c| c != 0.0))
            })
            .collect();

        let results: Vec<Result<()>> = du
            .par_chunks_mut(plane)
            .zip(dv.par_chunks_mut(plane))
            .enumerate()
            .map(|(k, (du_pl, dv_pl))| {
                if !self.plane_deps[k].iter().any(|&kk| active[kk]) {
                    for (o, src) in du_pl.iter_mut().zip(&v[k * plane..(k + 1) * plane]) {
                        *o = if frozen { [0.0; NF] } else { *src };
                    }
                    dv_pl.fill([0.0; NF]);
                    return Ok(());
                }
                for (local, (dout, vout)) in du_pl.iter_mut().zip(dv_pl.iter_mut()).enumerate() {
                    let p = k * plane + local;
                    self.point_rates(t, u, v, p, frozen, dout, vout)?;
                    if sigma > 0.0 {
                        let qu = grid.dissipate(u, p);
                        let qv = grid.dissipate(v, p);
                        for c in first..NF {
                            dout[c] += sigma * qu[c];
                            vout[c] += sigma * qv[c];
                        }
                    }
                }
                Ok(())
            })
            .collect();
        results.into_iter().collect()
    }

    /// Frozen flat metric: □A = 0 on the four potential components only.
    fn flat_potential_rates(&self, u: &[[f64; NF]], v: &[[f64; NF]], du: &mut [[f64; NF]], dv: &mut [[f64; NF]], sigma: f64) {
        let grid = &self.grid;
        let n = grid.n;
        let plane = n * n;
        let pick = |f: &[[f64; NF]]| -> Vec<[f64; 4]> { f.par_iter().map(|x| [x[10], x[11], x[12], x[13]]).collect() };
        let ua = pick(u);
        let va = pick(v);
        let active: Vec<bool> = (0..n)
            .into_par_iter()
            .map(|k| {
                let r = k * plane..(k + 1) * plane;
                ua[r.clone()].iter().chain(&va[r]).any(|x| x.iter().any(|&c| c != 0.0))
            })
            .collect();
        du.par_chunks_mut(plane)
            .zip(dv.par_chunks_mut(plane))
            .enumerate()
            .for_each(|(k, (du_pl, dv_pl))| {
                du_pl.fill([0.0; NF]);
                dv_pl.fill([0.0; NF]);
                if !self.plane_deps[k].iter().any(|&kk| active[kk]) {
                    return;
                }
                for (local, (dout, vout)) in du_pl.iter_mut().zip(dv_pl.iter_mut()).enumerate() {
                    let p = k * plane + local;
                    let (mut ru, mut rv) = if grid.on_boundary(p) {
                        let x = grid.position(p);
                        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                        let gu = grid.gradient(&ua, p);
                        let gv = grid.gradient(&va, p);
                        let radial = |g: &[[f64; 4]; 3], c: usize| x[0] * g[0][c] + x[1] * g[1][c] + x[2] * g[2][c];
                        (
                            std::array::from_fn::<f64, 4, _>(|c| -(radial(&gu, c) + ua[p][c]) / r),
                            std::array::from_fn::<f64, 4, _>(|c| -(radial(&gv, c) + va[p][c]) / r),
                        )
                    } else {
                        let mut lap = [0.0; 4];
                        for a in 0..3 {
                            let d2 = grid.diff2(&ua, p, a, a);
                            for c in 0..4 {
                                lap[c] += d2[c];
                            }
                        }
                        (va[p], lap)
                    };
                    if sigma > 0.0 {
                        let qu = grid.dissipate(&ua, p);
                        let qv = grid.dissipate(&va, p);
                        for c in 0..4 {
                            ru[c] += sigma * qu[c];
                            rv[c] += sigma * qv[c];
                        }
                    }
                    dout[10..].copy_from_slice(&ru);
                    vout[10..].copy_from_slice(&rv);
                }
            });
    }

    #[allow(clippy::too_many_arguments)]
    #[inline]
    fn point_rates(
        &self,
        t: f64,
        u: &[[f64; NF]],
        v: &[[f64; NF]],
        p: usize,
        frozen: bool,
        dout: &mut [f64; NF],
        vout: &mut [f64; NF],
    ) -> Result<()> {
        let grid = &self.grid;
        let first = if frozen { 10 } else { 0 };
        if grid.on_boundary(p) {
            // outgoing condition ∂_tφ + ∂_rφ + φ/r = 0 for both u and v
            let x = grid.position(p);
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            let gu = grid.gradient(u, p);
            let gv = grid.gradient(v, p);
            *dout = [0.0; NF];
            *vout = [0.0; NF];
            for c in first..NF {
                let mut ru = 0.0;
                let mut rv = 0.0;
                for a in 0..3 {
                    ru += x[a] * gu[a][c];
                    rv += x[a] * gv[a][c];
                }
                dout[c] = -(ru + u[p][c]) / r;
                vout[c] = -(rv + v[p][c]) / r;
            }
            return Ok(());
        }
        *dout = v[p];
        if frozen {
            dout[..10].fill(0.0);
        }
        let du = grid.gradient(u, p);
        let dvv = grid.gradient(v, p);
        let ddu = HESSIAN_PAIRS.map(|(a, b)| grid.diff2(u, p, a, b));
        let pj = PointJet {
            u: &u[p],
            v: &v[p],
            du: &du,
            dv: &dvv,
            ddu: &ddu,
        };
        match second_time_derivative(&pj, frozen) {
            Ok(a) => {
                *vout = a;
                Ok(())
            }
            Err(value) => Err(Error::Guard {
                t,
                index: p,
                x: grid.position(p),
                value,
            }),
        }
    }

    /// ∂_tv without dissipation, used for time jets in diagnostics.
    pub fn acceleration(&self, t: f64, u: &[[f64; NF]], v: &[[f64; NF]]) -> Result<Fields> {
        let mut du = vec![[0.0; NF]; u.len()];
        let mut dv = vec![[0.0; NF]; u.len()];
        self.rates(t, u, v, &mut du, &mut dv, 0.0)?;
        Ok(dv)
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&mut self, state: &mut EvolutionState, dt: f64) -> Result<()> {
        let len = self.grid.len();
        if state.u.len() != len || state.v.len() != len {
            return Err(Error::State("state size does not match the grid".into()));
        }
        let mut s = self.scratch.take().unwrap_or_else(|| {
            let z = vec![[0.0; NF]; len];
            Box::new(Scratch {
                u1: z.clone(),
                v1: z.clone(),
                ku: z.clone(),
                kv: z.clone(),
                acc_u: z.clone(),
                acc_v: z,
            })
        });
        let sigma = self.params.sigma;
        let t0 = state.t;
        let result = (|| -> Result<()> {
            let Scratch {
                u1,
                v1,
                ku,
                kv,
                acc_u,
                acc_v,
            } = &mut *s;
            let stages = [(0.0, 1.0 / 6.0), (0.5, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 6.0)];
            for (stage, &(c, b)) in stages.iter().enumerate() {
                if stage == 0 {
                    self.rates(t0, &state.u, &state.v, ku, kv, sigma)?;
                } else {
                    axpy(u1, &state.u, c * dt, ku);
                    axpy(v1, &state.v, c * dt, kv);
                    self.rates(t0 + c * dt, u1, v1, ku, kv, sigma)?;
                }
                if stage == 0 {
                    scale_into(acc_u, b * dt, ku);
                    scale_into(acc_v, b * dt, kv);
                } else {
                    accumulate(acc_u, b * dt, ku);
                    accumulate(acc_v, b * dt, kv);
                }
            }
            accumulate(&mut state.u, 1.0, acc_u);
            accumulate(&mut state.v, 1.0, acc_v);
            Ok(())
        })();
        self.scratch = Some(s);
        result?;
        state.t = t0 + dt;
        self.check_finite(state)
    }

    fn check_finite(&self, state: &EvolutionState) -> Result<()> {
        let bad = state
            .u
            .par_iter()
            .zip(state.v.par_iter())
            .position_first(|(a, b)| a.iter().chain(b.iter()).any(|x| !x.is_finite()));
        if let Some(p) = bad {
            let field = state.u[p]
                .iter()
                .chain(state.v[p].iter())
                .position(|x| !x.is_finite())
                .unwrap_or(0);
            return Err(Error::BlowUp {
                t: state.t,
                index: p,
                x: self.grid.position(p),
                field,
            });
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        self.grid.boundary == Boundary::Periodic
    }
}

fn axpy(out: &mut [[f64; NF]], x: &[[f64; NF]], a: f64, y: &[[f64; NF]]) {
    out.par_iter_mut().zip(x.par_iter().zip(y.par_iter())).for_each(|(o, (x, y))| {
        for c in 0..NF {
            o[c] = x[c] + a * y[c];
        }
    });
}

fn scale_into(out: &mut [[f64; NF]], a: f64, y: &[[f64; NF]]) {
    out.par_iter_mut().zip(y.par_iter()).for_each(|(o, y)| {
        for c in 0..NF {
            o[c] = a * y[c];
        }
    });
}

fn accumulate(out: &mut [[f64; NF]], a: f64, y: &[[f64; NF]]) {
    out.par_iter_mut().zip(y.par_iter()).for_each(|(o, y)| {
        for c in 0..NF {
            o[c] += a * y[c];
        }
    });
}

/// Storage slot of h_{μν} within the evolved component vector.
pub fn h_slot(mu: usize, nu: usize) -> usize {
    crate::tensor::SYM_INDEX[mu][nu]
}

/// Storage slot of A_β within the evolved component vector.
pub fn a_slot(beta: usize) -> usize {
    10 + beta
}

/// Component names in storage order.
pub fn component_names() -> [String; NF] {
    std::array::from_fn(|c| {
        if c < 10 {
            let (a, b) = SYM_PAIRS[c];
            format!("h{a}{b}")
        } else {
            format!("A{}", c - 10)
        }
    })
}
