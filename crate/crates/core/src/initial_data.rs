//! Geometric initial-data sets, their gauge-compatible Cauchy data and constraint residuals.
//!
//! Spatial symmetric 3-tensors use the layout 11, 12, 13, 22, 23, 33.

use rayon::prelude::*;

use crate::diagnostics::weight::WeightProfile;
use crate::error::{Error, Result};
use crate::evolution::{Fields, NF};
use crate::grid::Grid;

pub const SYM3_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
pub const SYM3_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub type Sym3 = [f64; 6];

#[inline]
pub fn sym3_matrix(s: &Sym3) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| s[SYM3_INDEX[i][j]]))
}

/// Inverse of a symmetric positive-definite 3×3 matrix, `None` unless positive definite.
pub fn sym3_inverse(s: &Sym3) -> Option<Sym3> {
    let [a, b, c, d, e, f] = *s;
    // leading minors
    let m2 = a * d - b * b;
    let det = a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
    if !(a > 0.0 && m2 > 0.0 && det > 0.0) {
        return None;
    }
    let inv = 1.0 / det;
    Some([
        (d * f - e * e) * inv,
        (c * e - b * f) * inv,
        (b * e - c * d) * inv,
        (a * f - c * c) * inv,
        (b * c - a * e) * inv,
        (a * d - b * b) * inv,
    ])
}

/// Data at one point: ḡ_ij, K_ij, Ā_i, Ā₀, Ē^i and the lapse N̄ (the shift is zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPoint {
    pub gbar: Sym3,
    pub k: Sym3,
    pub a: [f64; 3],
    pub a0: f64,
    pub e: [f64; 3],
    pub lapse: f64,
}

impl Default for DataPoint {
    fn default() -> Self {
        DataPoint {
            gbar: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
            k: [0.0; 6],
            a: [0.0; 3],
            a0: 0.0,
            e: [0.0; 3],
            lapse: 1.0,
        }
    }
}

/// Exact spatial gradients, `x[l]` holding ∂_l of the corresponding field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DataGradients {
    pub gbar: [Sym3; 3],
    pub lapse: [f64; 3],
    pub a: [[f64; 3]; 3],
    pub a0: [f64; 3],
}

/// Initial-data set on a grid. When `gradients` is present, Cauchy data and
/// Christoffel symbols use them instead of stencils.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub grid: Grid,
    pub points: Vec<DataPoint>,
    pub gradients: Option<Vec<DataGradients>>,
}

impl DataSet {
    pub fn flat(grid: &Grid) -> Self {
        DataSet {
            grid: grid.clone(),
            points: vec![DataPoint::default(); grid.len()],
            gradients: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.grid.len() {
            return Err(Error::Data(format!(
                "data has {} points, grid has {}",
                self.points.len(),
                self.grid.len()
            )));
        }
        if let Some(g) = &self.gradients {
            if g.len() != self.grid.len() {
                return Err(Error::Data("gradient table size mismatch".into()));
            }
        }
        for (p, d) in self.points.iter().enumerate() {
            let finite = d.gbar.iter().chain(&d.k).chain(&d.a).chain(&d.e).all(|x| x.is_finite())
                && d.a0.is_finite()
                && d.lapse.is_finite();
            if !finite {
                return Err(Error::Data(format!("non-finite value at {:?}", self.grid.position(p))));
            }
            if !(d.lapse > 0.0) {
                return Err(Error::Data(format!(
                    "lapse {} <= 0 at {:?}",
                    d.lapse,
                    self.grid.position(p)
                )));
            }
            if sym3_inverse(&d.gbar).is_none() {
                return Err(Error::Data(format!(
                    "spatial metric not positive definite at {:?}",
                    self.grid.position(p)
                )));
            }
        }
        Ok(())
    }

    /// Exact gradients when supplied, stencil gradients otherwise.
    pub fn gradients(&self) -> Vec<DataGradients> {
        if let Some(g) = &self.gradients {
            return g.clone();
        }
        let grid = &self.grid;
        let gb: Vec<Sym3> = self.points.iter().map(|d| d.gbar).collect();
        let misc: Vec<[f64; 5]> = self
            .points
            .iter()
            .map(|d| [d.lapse, d.a[0], d.a[1], d.a[2], d.a0])
            .collect();
        (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let dg = grid.gradient(&gb, p);
                let dm = grid.gradient(&misc, p);
                DataGradients {
                    gbar: dg,
                    lapse: [dm[0][0], dm[1][0], dm[2][0]],
                    a: std::array::from_fn(|l| [dm[l][1], dm[l][2], dm[l][3]]),
                    a0: [dm[0][4], dm[1][4], dm[2][4]],
                }
            })
            .collect()
    }
}

/// Cauchy data (h, ∂_th, A, ∂_tA) at t = 0 satisfying the initial gauge conditions.
pub fn build_cauchy(data: &DataSet) -> Result<(Fields, Fields)> {
    data.validate()?;
    let grads = data.gradients();
    let out: Vec<([f64; NF], [f64; NF])> = data
        .points
        .par_iter()
        .zip(grads.par_iter())
        .map(|(d, dd)| cauchy_point(d, dd))
        .collect();
    Ok(out.into_iter().unzip())
}

fn cauchy_point(d: &DataPoint, dd: &DataGradients) -> ([f64; NF], [f64; NF]) {
    let gi = sym3_inverse(&d.gbar).expect("validated");
    let gim = sym3_matrix(&gi);
    let n = d.lapse;
    let mut u = [0.0; NF];
    let mut v = [0.0; NF];
    // h_00 = 1 − N², h_0i = 0, h_ij = ḡ_ij − δ_ij
    u[0] = 1.0 - n * n;
    for (s, &(i, j)) in SYM3_PAIRS.iter().enumerate() {
        let slot = crate::tensor::SYM_INDEX[i + 1][j + 1];
        u[slot] = d.gbar[s] - if i == j { 1.0 } else { 0.0 };
        v[slot] = -2.0 * n * d.k[s];
    }
    let tr_k: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| gim[i][j] * d.k[SYM3_INDEX[i][j]])
        .sum();
    v[0] = 2.0 * n * n * n * tr_k;
    for l in 0..3 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += gim[i][j]
                    * (dd.gbar[j][SYM3_INDEX[i][l]] - 0.5 * dd.gbar[l][SYM3_INDEX[i][j]]);
            }
        }
        v[l + 1] = n * n * s - n * dd.lapse[l];
    }
    u[10] = d.a0;
    u[11..14].copy_from_slice(&d.a);
    let mut div_a = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            div_a += gim[i][j] * dd.a[i][j];
        }
    }
    v[10] = n * n * div_a;
    for i in 0..3 {
        let mut lowered = 0.0;
        for j in 0..3 {
            lowered += d.e[j] * d.gbar[SYM3_INDEX[j][i]];
        }
        v[11 + i] = dd.a0[i] + n * lowered;
    }
    (u, v)
}

/// Christoffel symbols Γ^k_ij of ḡ, stored as `[k][sym3 slot of ij]`.
fn christoffels(gi: &[[f64; 3]; 3], dg: &[Sym3; 3]) -> [Sym3; 3] {
    std::array::from_fn(|k| {
        std::array::from_fn(|s| {
            let (i, j) = SYM3_PAIRS[s];
            let mut v = 0.0;
            for l in 0..3 {
                v += gi[k][l]
                    * (dg[i][SYM3_INDEX[l][j]] + dg[j][SYM3_INDEX[i][l]] - dg[l][SYM3_INDEX[i][j]]);
            }
            0.5 * v
        })
    })
}

/// Pointwise constraint residual fields with their norms.
#[derive(Debug, Clone)]
pub struct ConstraintResiduals {
    pub hamiltonian: Vec<f64>,
    pub momentum: Vec<[f64; 3]>,
    pub div_e: Vec<f64>,
    pub norms: ConstraintNorms,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConstraintNorms {
    pub hamiltonian_sup: f64,
    pub hamiltonian_l2: f64,
    pub momentum_sup: f64,
    pub momentum_l2: f64,
    pub div_e_sup: f64,
    pub div_e_l2: f64,
}

/// Evaluates the Hamiltonian, momentum and electric-divergence constraints.
///
/// `skip_layers` outer layers are excluded from the norms (one-sided stencils there
/// are nested twice for curvature terms).
pub fn constraint_residuals(data: &DataSet, prof: &WeightProfile, skip_layers: usize) -> Result<ConstraintResiduals> {
    data.validate()?;
    let grid = &data.grid;
    let grads = data.gradients();
    let n = grid.len();
    // per-point Christoffels, inverse metric and mixed quantities needing a further derivative
    struct Pre {
        gi: [[f64; 3]; 3],
        gamma: [Sym3; 3],
    }
    let pre: Vec<Pre> = (0..n)
        .into_par_iter()
        .map(|p| {
            let gi = sym3_matrix(&sym3_inverse(&data.points[p].gbar).expect("validated"));
            Pre {
                gi,
                gamma: christoffels(&gi, &grads[p].gbar),
            }
        })
        .collect();
    let gamma_field: Vec<[f64; 18]> = pre
        .iter()
        .map(|q| {
            let mut o = [0.0; 18];
            for k in 0..3 {
                o[6 * k..6 * k + 6].copy_from_slice(&q.gamma[k]);
            }
            o
        })
        .collect();
    // K_ij, tr K and E^i as stencil inputs
    let kfield: Vec<[f64; 10]> = data
        .points
        .iter()
        .zip(&pre)
        .map(|(d, q)| {
            let mut o = [0.0; 10];
            o[..6].copy_from_slice(&d.k);
            let mut tr = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    tr += q.gi[i][j] * d.k[SYM3_INDEX[i][j]];
                }
            }
            o[6] = tr;
            o[7..10].copy_from_slice(&d.e);
            o
        })
        .collect();

    let res: Vec<(f64, [f64; 3], f64)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let d = &data.points[p];
            let q = &pre[p];
            let gi = &q.gi;
            let gam = |k: usize, i: usize, j: usize| q.gamma[k][SYM3_INDEX[i][j]];
            let dgam = grid.gradient(&gamma_field, p);
            let dgam_at = |l: usize, k: usize, i: usize, j: usize| dgam[l][6 * k + SYM3_INDEX[i][j]];
            // Ricci scalar R = g^{ij}(∂_kΓ^k_ij − ∂_jΓ^k_ik + Γ^k_kl Γ^l_ij − Γ^k_jl Γ^l_ik)
            let mut ricci = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let mut rij = 0.0;
                    for k in 0..3 {
                        rij += dgam_at(k, k, i, j) - dgam_at(j, k, i, k);
                        for l in 0..3 {
                            rij += gam(k, k, l) * gam(l, i, j) - gam(k, j, l) * gam(l, i, k);
                        }
                    }
                    ricci += gi[i][j] * rij;
                }
            }
            let km = sym3_matrix(&d.k);
            let ku: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let mut s = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            s += gi[i][a] * gi[j][b] * km[a][b];
                        }
                    }
                    s
                })
            });
            let mut k2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    k2 += ku[i][j] * km[i][j];
                }
            }
            let tr_k = kfield[p][6];
            let da = &grads[p].a;
            let fbar: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| da[i][j] - da[j][i]));
            let mut f2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        for l in 0..3 {
                            f2 += gi[i][k] * gi[j][l] * fbar[i][j] * fbar[k][l];
                        }
                    }
                }
            }
            let gm = sym3_matrix(&d.gbar);
            let mut e2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    e2 += gm[i][j] * d.e[i] * d.e[j];
                }
            }
            let ham = ricci - k2 + tr_k * tr_k - (0.5 * f2 + 3.0 * e2);

            let dk = grid.gradient(&kfield, p);
            let mom: [f64; 3] = std::array::from_fn(|i| {
                let mut div = 0.0;
                for j in 0..3 {
                    for k in 0..3 {
                        let mut cov = dk[j][SYM3_INDEX[k][i]];
                        for l in 0..3 {
                            cov -= gam(l, j, k) * km[l][i] + gam(l, j, i) * km[k][l];
                        }
                        div += gi[j][k] * cov;
                    }
                }
                let mut src = 0.0;
                for l in 0..3 {
                    src += d.e[l] * fbar[l][i];
                }
                div - dk[i][6] - src
            });
            let mut div_e = 0.0;
            for i in 0..3 {
                div_e += dk[i][7 + i];
                for k in 0..3 {
                    div_e += gam(i, i, k) * d.e[k];
                }
            }
            (ham, mom, div_e)
        })
        .collect();

    let mut hamiltonian = Vec::with_capacity(n);
    let mut momentum = Vec::with_capacity(n);
    let mut div_e = Vec::with_capacity(n);
    for (h, m, e) in res {
        hamiltonian.push(h);
        momentum.push(m);
        div_e.push(e);
    }
    let mut acc = [0.0f64; 6];
    for p in 0..n {
        if grid.layer(p) < skip_layers {
            continue;
        }
        let x = grid.position(p);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let w = prof.weight(r).0 * grid.volume_weight(p);
        let m2 = momentum[p].iter().map(|x| x * x).sum::<f64>();
        acc[0] = acc[0].max(hamiltonian[p].abs());
        acc[1] += w * hamiltonian[p] * hamiltonian[p];
        acc[2] = acc[2].max(m2.sqrt());
        acc[3] += w * m2;
        acc[4] = acc[4].max(div_e[p].abs());
        acc[5] += w * div_e[p] * div_e[p];
    }
    let norms = ConstraintNorms {
        hamiltonian_sup: acc[0],
        hamiltonian_l2: acc[1].sqrt(),
        momentum_sup: acc[2],
        momentum_l2: acc[3].sqrt(),
        div_e_sup: acc[4],
        div_e_l2: acc[5].sqrt(),
    };
    Ok(ConstraintResiduals {
        hamiltonian,
        momentum,
        div_e,
        norms,
    })
}

pub fn hamiltonian_residual(data: &DataSet) -> Result<Vec<f64>> {
    Ok(constraint_residuals(data, &WeightProfile::default(), 0)?.hamiltonian)
}

pub fn momentum_residual(data: &DataSet) -> Result<Vec<[f64; 3]>> {
    Ok(constraint_residuals(data, &WeightProfile::default(), 0)?.momentum)
}

pub fn div_e_residual(data: &DataSet) -> Result<Vec<f64>> {
    Ok(constraint_residuals(data, &WeightProfile::default(), 0)?.div_e)
}
