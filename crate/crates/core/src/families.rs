//! Named initial-data families with closed-form gradients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial_data::{DataGradients, DataPoint, DataSet, Sym3, SYM3_PAIRS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Minkowski data.
    Flat,
    /// ḡ = (1 + εφ)δ with a Gaussian φ; everything else trivial.
    Conformal,
    /// Outgoing electromagnetic shell on a flat background.
    Maxwell,
    /// Linearized transverse-traceless gravitational pulse.
    Tt,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Family::Flat),
            "conformal" => Ok(Family::Conformal),
            "maxwell" => Ok(Family::Maxwell),
            "tt" => Ok(Family::Tt),
            _ => Err(Error::Config(format!(
                "unknown family {s:?} (expected flat, conformal, maxwell or tt)"
            ))),
        }
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Flat => "flat",
            Family::Conformal => "conformal",
            Family::Maxwell => "maxwell",
            Family::Tt => "tt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub family: Family,
    pub epsilon: f64,
    /// Gaussian width for conformal and tt, radial stretch of the maxwell shell.
    pub width: f64,
}

impl FamilyParams {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() {
            return Err(Error::Config("epsilon must be finite".into()));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::Config(format!("width must be positive, got {}", self.width)));
        }
        Ok(())
    }
}

/// Samples the family on `grid` together with exact gradients.
pub fn generate(params: &FamilyParams, grid: &Grid) -> Result<DataSet> {
    params.validate()?;
    let eps = params.epsilon;
    let w = params.width;
    let (points, gradients): (Vec<DataPoint>, Vec<DataGradients>) = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let x = grid.position(p);
            match params.family {
                Family::Flat => (DataPoint::default(), DataGradients::default()),
                Family::Conformal => conformal_point(eps, w, &x),
                Family::Maxwell => maxwell_point(eps, w, &x),
                Family::Tt => tt_point(eps, w, &x),
            }
        })
        .unzip();
    let data = DataSet {
        grid: grid.clone(),
        points,
        gradients: Some(gradients),
    };
    data.validate()?;
    Ok(data)
}

fn conformal_point(eps: f64, w: f64, x: &[f64; 3]) -> (DataPoint, DataGradients) {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let phi = (-r2 / (w * w)).exp();
    let s = 1.0 + eps * phi;
    let mut d = DataPoint::default();
    d.gbar = [s, 0.0, 0.0, s, 0.0, s];
    let mut g = DataGradients::default();
    for l in 0..3 {
        let ds = eps * (-2.0 * x[l] / (w * w)) * phi;
        g.gbar[l] = [ds, 0.0, 0.0, ds, 0.0, ds];
    }
    (d, g)
}

/// Radial profile of the Maxwell shell: a polynomial bump in s = t − r supported on [−2w, 0].
pub mod shell {
    pub const CENTER: f64 = -1.0;
    pub const HALF_WIDTH: f64 = 1.0;
    pub const POWER: i32 = 8;

    /// (f, f′, f″, f‴) at s for the profile stretched by `w`.
    pub fn profile(s: f64, w: f64) -> [f64; 4] {
        let z = (s / w - CENTER) / HALF_WIDTH;
        if z.abs() >= 1.0 {
            return [0.0; 4];
        }
        let y = 1.0 - z * z;
        let n = POWER;
        let nf = n as f64;
        let f = y.powi(n);
        let f1 = -2.0 * nf * z * y.powi(n - 1);
        let f2 = -2.0 * nf * y.powi(n - 1) + 4.0 * nf * (nf - 1.0) * z * z * y.powi(n - 2);
        let f3 = 12.0 * nf * (nf - 1.0) * z * y.powi(n - 2)
            - 8.0 * nf * (nf - 1.0) * (nf - 2.0) * z.powi(3) * y.powi(n - 3);
        let k = 1.0 / (HALF_WIDTH * w);
        [f, f1 * k, f2 * k * k, f3 * k * k * k]
    }

    /// Value, gradient and Hessian of ψ = f(t − r)/r, or of ∂_tψ when `time_derivative`.
    pub fn radial_jet(t: f64, x: &[f64; 3], w: f64, time_derivative: bool) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let pr = profile(t - r, w);
        let [f, f1, f2] = if time_derivative { [pr[1], pr[2], pr[3]] } else { [pr[0], pr[1], pr[2]] };
        if f == 0.0 && f1 == 0.0 && f2 == 0.0 {
            return (0.0, [0.0; 3], [[0.0; 3]; 3]);
        }
        let val = f / r;
        let d1 = -f1 / r - f / (r * r);
        let d2 = f2 / r + 2.0 * f1 / (r * r) + 2.0 * f / (r * r * r);
        let n = [x[0] / r, x[1] / r, x[2] / r];
        let grad = n.map(|ni| d1 * ni);
        let hess = std::array::from_fn(|a| {
            std::array::from_fn(|b| d2 * n[a] * n[b] + d1 * (if a == b { 1.0 } else { 0.0 } - n[a] * n[b]) / r)
        });
        (val, grad, hess)
    }
}

/// Exact flat-space Maxwell solution (A, ∂_tA, ∂_lA_i) of the shell family at time t.
/// A = ε ∇ψ × e_z with ψ = f(t − r)/r, A₀ = 0.
pub fn maxwell_exact(eps: f64, w: f64, t: f64, x: &[f64; 3]) -> ([f64; 4], [f64; 4], [[f64; 3]; 3]) {
    let (_, g, h) = shell::radial_jet(t, x, w, false);
    let (_, gt, _) = shell::radial_jet(t, x, w, true);
    let a = [0.0, eps * g[1], -eps * g[0], 0.0];
    let at = [0.0, eps * gt[1], -eps * gt[0], 0.0];
    let da = std::array::from_fn(|l| [eps * h[l][1], -eps * h[l][0], 0.0]);
    (a, at, da)
}

fn maxwell_point(eps: f64, w: f64, x: &[f64; 3]) -> (DataPoint, DataGradients) {
    let (a, at, da) = maxwell_exact(eps, w, 0.0, x);
    let d = DataPoint {
        a: [a[1], a[2], a[3]],
        e: [at[1], at[2], at[3]],
        ..DataPoint::default()
    };
    let g = DataGradients {
        a: da,
        ..DataGradients::default()
    };
    (d, g)
}

/// Constant polarization tensors of the TT pulse (metric part and extrinsic-curvature part).
const TT_METRIC_POLARIZATION: [[f64; 3]; 3] = [[1.0, 0.3, 0.0], [0.3, -0.5, 0.2], [0.0, 0.2, 0.0]];
const TT_CURVATURE_POLARIZATION: [[f64; 3]; 3] = [[0.0, 0.5, 0.0], [0.5, 0.0, -0.4], [0.0, -0.4, 0.3]];

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    ((j as i64 - i as i64) * (k as i64 - i as i64) * (k as i64 - j as i64)).signum() as f64
}

fn hermite(n: usize, u: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * u,
        2 => 4.0 * u * u - 2.0,
        3 => 8.0 * u.powi(3) - 12.0 * u,
        4 => 16.0 * u.powi(4) - 48.0 * u * u + 12.0,
        5 => 32.0 * u.powi(5) - 160.0 * u.powi(3) + 120.0 * u,
        _ => unreachable!("derivative order above 5"),
    }
}

/// Partial derivatives of the separable Gaussian exp(−|x|²/w²).
struct Gaussian {
    /// [axis][order] one-dimensional derivatives
    table: [[f64; 6]; 3],
}

impl Gaussian {
    fn new(w: f64, x: &[f64; 3]) -> Self {
        let table = std::array::from_fn(|a| {
            let u = x[a] / w;
            let e = (-u * u).exp();
            std::array::from_fn(|n| (-1.0 / w).powi(n as i32) * hermite(n, u) * e)
        });
        Gaussian { table }
    }

    fn deriv(&self, idx: &[usize]) -> f64 {
        let mut c = [0usize; 3];
        for &i in idx {
            c[i] += 1;
        }
        self.table[0][c[0]] * self.table[1][c[1]] * self.table[2][c[2]]
    }
}

/// Linearized Ricci tensor of S = pol·G differentiated along `extra`.
fn ricci_deriv(pol: &[[f64; 3]; 3], g: &Gaussian, extra: &[usize]) -> [[f64; 3]; 3] {
    let d2 = |a: usize, b: usize| -> f64 {
        let mut idx = vec![a, b];
        idx.extend_from_slice(extra);
        g.deriv(&idx)
    };
    let lap = d2(0, 0) + d2(1, 1) + d2(2, 2);
    let tr = pol[0][0] + pol[1][1] + pol[2][2];
    std::array::from_fn(|l| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for k in 0..3 {
                s += pol[k][j] * d2(k, l) + pol[k][l] * d2(k, j);
            }
            0.5 * (s - lap * pol[l][j] - tr * d2(l, j))
        })
    })
}

/// Linearized Cotton–York tensor of S = pol·G, differentiated along `extra`.
fn cotton(pol: &[[f64; 3]; 3], g: &Gaussian, extra: &[usize]) -> [[f64; 3]; 3] {
    let dr: [[[f64; 3]; 3]; 3] = std::array::from_fn(|k| {
        let mut idx = vec![k];
        idx.extend_from_slice(extra);
        ricci_deriv(pol, g, &idx)
    });
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for k in 0..3 {
                let scal = dr[k][0][0] + dr[k][1][1] + dr[k][2][2];
                for l in 0..3 {
                    let e = levi_civita(i, k, l);
                    if e != 0.0 {
                        s += e * (dr[k][l][j] - if l == j { 0.25 * scal } else { 0.0 });
                    }
                }
            }
            s
        })
    })
}

fn to_sym3(m: &[[f64; 3]; 3], scale: f64) -> Sym3 {
    SYM3_PAIRS.map(|(i, j)| scale * m[i][j])
}

/// TT perturbation tensors (metric, curvature) at x, with the metric gradient.
pub fn tt_tensors(w: f64, x: &[f64; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3], [[[f64; 3]; 3]; 3]) {
    let g = Gaussian::new(w, x);
    // w³ makes the amplitude independent of the width
    let s = w.powi(3);
    let sc = |m: [[f64; 3]; 3]| m.map(|r| r.map(|v| s * v));
    let metric = sc(cotton(&TT_METRIC_POLARIZATION, &g, &[]));
    let curvature = sc(cotton(&TT_CURVATURE_POLARIZATION, &g, &[]));
    let grad = std::array::from_fn(|l| sc(cotton(&TT_METRIC_POLARIZATION, &g, &[l])));
    (metric, curvature, grad)
}

fn tt_point(eps: f64, w: f64, x: &[f64; 3]) -> (DataPoint, DataGradients) {
    let (metric, curvature, grad) = tt_tensors(w, x);
    let mut gbar = to_sym3(&metric, eps);
    gbar[0] += 1.0;
    gbar[3] += 1.0;
    gbar[5] += 1.0;
    let d = DataPoint {
        gbar,
        k: to_sym3(&curvature, eps),
        ..DataPoint::default()
    };
    let g = DataGradients {
        gbar: std::array::from_fn(|l| to_sym3(&grad[l], eps)),
        ..DataGradients::default()
    };
    (d, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn num_grad(f: impl Fn(&[f64; 3]) -> f64, x: &[f64; 3], l: usize) -> f64 {
        let h = 1e-4;
        let mut p = *x;
        let mut m = *x;
        p[l] += h;
        m[l] -= h;
        (f(&p) - f(&m)) / (2.0 * h)
    }

    #[test]
    fn tt_tensor_is_symmetric_traceless_and_transverse() {
        let w = 1.3;
        for x in [[0.3, -0.4, 0.7], [1.1, 0.2, -0.5], [-0.6, 0.9, 0.1]] {
            let (m, k, grad) = tt_tensors(w, &x);
            let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(scale > 1e-3);
            for t in [&m, &k] {
                assert!((t[0][0] + t[1][1] + t[2][2]).abs() < 1e-12 * scale);
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((t[i][j] - t[j][i]).abs() < 1e-12 * scale);
                    }
                }
            }
            for j in 0..3 {
                let div: f64 = (0..3).map(|i| grad[i][i][j]).sum();
                assert!(div.abs() < 1e-12 * scale, "divergence {div}");
            }
        }
    }

    #[test]
    fn tt_gradient_matches_finite_differences() {
        let w = 0.9;
        let x = [0.2, -0.3, 0.45];
        let (_, _, grad) = tt_tensors(w, &x);
        for l in 0..3 {
            for (i, j) in [(0, 0), (0, 1), (1, 2)] {
                let fd = num_grad(|y| tt_tensors(w, y).0[i][j], &x, l);
                assert!((fd - grad[l][i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn shell_potential_is_divergence_free_with_matching_gradient() {
        let x = [0.4, 0.9, -0.6];
        let (a, _, da) = maxwell_exact(1.0, 1.0, 0.0, &x);
        assert!(a[1].abs() > 1e-3);
        assert!((da[0][0] + da[1][1] + da[2][2]).abs() < 1e-12);
        for l in 0..3 {
            for i in 0..3 {
                let fd = num_grad(|y| maxwell_exact(1.0, 1.0, 0.0, y).0[i + 1], &x, l);
                assert!((fd - da[l][i]).abs() < 1e-6);
            }
        }
        let ht = 1e-4;
        let fd = (maxwell_exact(1.0, 1.0, ht, &x).0[1] - maxwell_exact(1.0, 1.0, -ht, &x).0[1]) / (2.0 * ht);
        assert!((fd - maxwell_exact(1.0, 1.0, 0.0, &x).1[1]).abs() < 1e-6);
    }

    #[test]
    fn shell_profile_support() {
        assert_eq!(shell::profile(0.1, 1.0), [0.0; 4]);
        assert_eq!(shell::profile(-2.1, 1.0), [0.0; 4]);
        assert!(shell::profile(-3.9, 2.0)[0] > 0.0);
        assert_eq!(shell::profile(shell::CENTER, 1.0)[0], 1.0);
        let h = 1e-5;
        for w in [1.0, 1.7] {
            let s = -0.8 * w;
            for k in 0..3 {
                let fd = (shell::profile(s + h, w)[k] - shell::profile(s - h, w)[k]) / (2.0 * h);
                assert!((fd - shell::profile(s, w)[k + 1]).abs() < 1e-5 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn conformal_matches_its_closed_form() {
        let grid = Grid::new(9, 2.0, 4, Boundary::Sommerfeld).unwrap();
        let params = FamilyParams {
            family: Family::Conformal,
            epsilon: 0.1,
            width: 1.0,
        };
        let data = generate(&params, &grid).unwrap();
        let p = grid.index(4, 4, 4);
        assert!((data.points[p].gbar[0] - 1.1).abs() < 1e-15);
        assert_eq!(data.points[p].gbar[1], 0.0);
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        assert!(matches!("kerr".parse::<Family>(), Err(Error::Config(_))));
        assert_eq!("tt".parse::<Family>().unwrap(), Family::Tt);
    }
}
