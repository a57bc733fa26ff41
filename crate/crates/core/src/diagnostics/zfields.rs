//! Translations, Lorentz rotations and scaling applied to grid fields through time jets.
//!
//! A jet of order k stores ∂_t^j u for j = 0..=k on the grid. A vector field
//! Z = a ∂_t + b^i ∂_i maps a jet of order k to one of order k − 1:
//!
//! (Zu)^{(j)} = a u^{(j+1)} + j a_t u^{(j)} + b^i ∂_i u^{(j)} + j b^i_t ∂_i u^{(j−1)}
//!
//! (the coefficients are at most linear in t).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{EvolutionState, Evolver};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VectorFieldId {
    /// ∂_α
    Translation(usize),
    /// Ω_{αβ} = −x_α∂_β + x_β∂_α, α < β
    Rotation(usize, usize),
    /// t∂_t + x^i∂_i
    Scaling,
}

impl VectorFieldId {
    pub const ALL: [VectorFieldId; 11] = [
        VectorFieldId::Translation(0),
        VectorFieldId::Translation(1),
        VectorFieldId::Translation(2),
        VectorFieldId::Translation(3),
        VectorFieldId::Rotation(0, 1),
        VectorFieldId::Rotation(0, 2),
        VectorFieldId::Rotation(0, 3),
        VectorFieldId::Rotation(1, 2),
        VectorFieldId::Rotation(1, 3),
        VectorFieldId::Rotation(2, 3),
        VectorFieldId::Scaling,
    ];

    pub fn name(&self) -> String {
        match self {
            VectorFieldId::Translation(a) => format!("d{a}"),
            VectorFieldId::Rotation(a, b) => format!("omega{a}{b}"),
            VectorFieldId::Scaling => "scaling".into(),
        }
    }

    /// Constant c_Z in [□, Z] = c_Z □.
    pub fn commutator_constant(&self) -> f64 {
        match self {
            VectorFieldId::Scaling => 2.0,
            _ => 0.0,
        }
    }

    /// (a, ∂_ta, b, ∂_tb) at (t, x).
    #[inline]
    pub fn coefficients(&self, t: f64, x: &[f64; 3]) -> (f64, f64, [f64; 3], [f64; 3]) {
        let mut b = [0.0; 3];
        let mut bt = [0.0; 3];
        match *self {
            VectorFieldId::Translation(0) => (1.0, 0.0, b, bt),
            VectorFieldId::Translation(i) => {
                b[i - 1] = 1.0;
                (0.0, 0.0, b, bt)
            }
            VectorFieldId::Rotation(0, i) => {
                b[i - 1] = t;
                bt[i - 1] = 1.0;
                (x[i - 1], 0.0, b, bt)
            }
            VectorFieldId::Rotation(i, j) => {
                b[i - 1] = x[j - 1];
                b[j - 1] = -x[i - 1];
                (0.0, 0.0, b, bt)
            }
            VectorFieldId::Scaling => (t, 1.0, *x, bt),
        }
    }
}

/// ∂_t^j u for j = 0..=order, each a point-major grid field.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<const K: usize> {
    pub levels: Vec<Vec<[f64; K]>>,
}

impl<const K: usize> Jet<K> {
    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Time jet of the evolved fields up to `order` ≤ 3, using the evolution equation.
///
/// The third derivative is the directional derivative of the acceleration along (v, ∂_tv),
/// taken by a central difference.
pub fn state_jet(evolver: &Evolver, state: &EvolutionState, order: usize) -> Result<Jet<14>> {
    if order > 3 {
        return Err(Error::Config(format!("time jets above order 3 are not supported (asked {order})")));
    }
    let mut levels = vec![state.u.clone()];
    if order >= 1 {
        levels.push(state.v.clone());
    }
    if order >= 2 {
        levels.push(evolver.acceleration(state.t, &state.u, &state.v)?);
    }
    if order >= 3 {
        let scale = state.max_abs().max(1e-300);
        let delta = 1e-3 / scale.max(1.0);
        let shifted = |s: f64| -> Result<Vec<[f64; 14]>> {
            let u: Vec<[f64; 14]> = levels[0]
                .par_iter()
                .zip(levels[1].par_iter())
                .map(|(u, v)| std::array::from_fn(|c| u[c] + s * v[c]))
                .collect();
            let v: Vec<[f64; 14]> = levels[1]
                .par_iter()
                .zip(levels[2].par_iter())
                .map(|(v, a)| std::array::from_fn(|c| v[c] + s * a[c]))
                .collect();
            evolver.acceleration(state.t + s, &u, &v)
        };
        let plus = shifted(delta)?;
        let minus = shifted(-delta)?;
        levels.push(
            plus.par_iter()
                .zip(minus.par_iter())
                .map(|(a, b)| std::array::from_fn(|c| (a[c] - b[c]) / (2.0 * delta)))
                .collect(),
        );
    }
    Ok(Jet { levels })
}

/// Spatial gradients of the first `count` jet levels.
pub fn jet_gradients<const K: usize>(grid: &Grid, jet: &Jet<K>, count: usize) -> Vec<Vec<[[f64; K]; 3]>> {
    jet.levels[..count]
        .iter()
        .map(|f| (0..grid.len()).into_par_iter().map(|p| grid.gradient(f, p)).collect())
        .collect()
}

/// Applies Z to a jet of order ≥ 1, returning a jet one order lower.
pub fn apply_z<const K: usize>(grid: &Grid, t: f64, z: VectorFieldId, jet: &Jet<K>) -> Result<Jet<K>> {
    let k = jet.order();
    if k == 0 {
        return Err(Error::Config("vector field applied to a jet of order 0".into()));
    }
    let grads = jet_gradients(grid, jet, k);
    Ok(apply_z_with(grid, t, z, jet, &grads))
}

/// As [`apply_z`] with precomputed gradients of levels 0..order.
pub fn apply_z_with<const K: usize>(
    grid: &Grid,
    t: f64,
    z: VectorFieldId,
    jet: &Jet<K>,
    grads: &[Vec<[[f64; K]; 3]>],
) -> Jet<K> {
    let k = jet.order();
    let levels = (0..k)
        .map(|j| {
            let jf = j as f64;
            (0..grid.len())
                .into_par_iter()
                .map(|p| {
                    let x = grid.position(p);
                    let (a, at, b, bt) = z.coefficients(t, &x);
                    let mut out = [0.0; K];
                    for c in 0..K {
                        let mut s = a * jet.levels[j + 1][p][c] + jf * at * jet.levels[j][p][c];
                        for i in 0..3 {
                            s += b[i] * grads[j][p][i][c];
                            if j > 0 {
                                s += jf * bt[i] * grads[j - 1][p][i][c];
                            }
                        }
                        out[c] = s;
                    }
                    out
                })
                .collect()
        })
        .collect();
    Jet { levels }
}

/// Z^I = Z^{ι₁}⋯Z^{ι_k}: the last index acts first.
pub fn apply_multi<const K: usize>(grid: &Grid, t: f64, index: &[VectorFieldId], jet: &Jet<K>) -> Result<Jet<K>> {
    let mut cur = jet.clone();
    for &z in index.iter().rev() {
        cur = apply_z(grid, t, z, &cur)?;
    }
    Ok(cur)
}

/// Analytic space-time function with its first three time derivatives.
pub trait TestField: Sync {
    /// ∂_t^j u at (t, x) for j ≤ 3.
    fn time_derivative(&self, j: usize, t: f64, x: &[f64; 3]) -> f64;
}

/// u = sin(t + 0.3)·sin(x¹)·cos(x²/2)·cos(0.3x³), with □u = −0.34u.
pub struct SeparableWave;

impl SeparableWave {
    pub const BOX_COEFF: f64 = -0.34;
}

impl TestField for SeparableWave {
    fn time_derivative(&self, j: usize, t: f64, x: &[f64; 3]) -> f64 {
        let ph = t + 0.3;
        let tp = match j % 4 {
            0 => ph.sin(),
            1 => ph.cos(),
            2 => -ph.sin(),
            _ => -ph.cos(),
        };
        tp * x[0].sin() * (0.5 * x[1]).cos() * (0.3 * x[2]).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResult {
    /// sup |□(Zu) − Z(□u) − c_Z □u| over the interior.
    pub residual: f64,
    /// Least-squares coefficient of □u in □(Zu) − Z(□u).
    pub c_fit: f64,
}

/// Evaluates the commutator defect of Z on an analytic field at time `t` with stencils.
///
/// Points within `skip` layers of a non-periodic face are excluded.
pub fn commutator_check(grid: &Grid, t: f64, z: VectorFieldId, field: &dyn TestField, skip: usize) -> Result<CommutatorResult> {
    let jet: Jet<1> = Jet {
        levels: (0..=3)
            .map(|j| grid.sample(|x| [field.time_derivative(j, t, &x)]))
            .collect(),
    };
    let laplace = |f: &Vec<[f64; 1]>| -> Vec<f64> {
        (0..grid.len())
            .into_par_iter()
            .map(|p| (0..3).map(|a| grid.diff2(f, p, a, a)[0]).sum())
            .collect()
    };
    // □(Zu)
    let zu = apply_z(grid, t, z, &jet)?;
    let lap_zu = laplace(&zu.levels[0]);
    // □u as a jet of order 1
    let box_u: Jet<1> = Jet {
        levels: (0..2)
            .map(|j| {
                let lap = laplace(&jet.levels[j]);
                jet.levels[j + 2].iter().zip(lap).map(|(utt, l)| [-utt[0] + l]).collect()
            })
            .collect(),
    };
    let z_box = apply_z(grid, t, z, &box_u)?;
    let c = z.commutator_constant();
    let mut residual: f64 = 0.0;
    let (mut num, mut den) = (0.0, 0.0);
    for p in 0..grid.len() {
        if grid.layer(p) < skip {
            continue;
        }
        let box_zu = -zu.levels[2][p][0] + lap_zu[p];
        let defect = box_zu - z_box.levels[0][p][0];
        let bu = box_u.levels[0][p][0];
        residual = residual.max((defect - c * bu).abs());
        num += defect * bu;
        den += bu * bu;
    }
    Ok(CommutatorResult {
        residual,
        c_fit: if den > 0.0 { num / den } else { 0.0 },
    })
}
