//! Independent reference evaluations used by the test suites and the `verify` command.
//!
//! Everything here is written as literal index loops with a separately implemented
//! inverse, so it shares no code path with the production kernels.

use rand::Rng;

use crate::rhs::FirstDerivs;
use crate::tensor::{Mat4, SymTensor2, ETA, SYM_INDEX};

pub fn random_sym<R: Rng>(rng: &mut R, scale: f64) -> SymTensor2 {
    SymTensor2::from_fn(|_, _| rng.gen_range(-scale..=scale))
}

pub fn random_derivs<R: Rng>(rng: &mut R, scale: f64) -> FirstDerivs {
    FirstDerivs {
        dh: std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-scale..=scale))),
        da: std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-scale..=scale))),
    }
}

/// Random unit spatial direction ω and the null covector k = (1, −ω).
pub fn random_null_covector<R: Rng>(rng: &mut R) -> ([f64; 4], [f64; 3]) {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            let w = [v[0] / n, v[1] / n, v[2] / n];
            return ([1.0, -w[0], -w[1], -w[2]], w);
        }
    }
}

/// Derivatives of the plane wave h_{αβ} = c_{αβ} f(t − ω·x) with f′ = `fp`.
pub fn plane_wave_derivs(c: &SymTensor2, k: &[f64; 4], fp: f64) -> FirstDerivs {
    FirstDerivs {
        dh: std::array::from_fn(|l| c.0.map(|x| fp * k[l] * x)),
        da: [[0.0; 4]; 4],
    }
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(m: &Mat4) -> Option<Mat4> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

fn full_metric(h: &SymTensor2) -> Mat4 {
    std::array::from_fn(|a| std::array::from_fn(|b| if a == b { ETA[a] } else { 0.0 } + h.get(a, b)))
}

fn dfull(d: &FirstDerivs, l: usize, a: usize, b: usize) -> f64 {
    d.dh[l][SYM_INDEX[a][b]]
}

/// P̃(∂_μg, ∂_νg) and Q̃_{μν} as printed, contracted with `gi`, for all (μ, ν).
pub fn quadratic_forms_naive(gi: &Mat4, d: &FirstDerivs) -> (Mat4, Mat4) {
    let dg = |l: usize, a: usize, b: usize| dfull(d, l, a, b);
    let mut p = [[0.0; 4]; 4];
    let mut q = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            let mut ps = 0.0;
            let mut qs = 0.0;
            for a in 0..4 {
                for ap in 0..4 {
                    for b in 0..4 {
                        for bp in 0..4 {
                            let w = gi[a][ap] * gi[b][bp];
                            ps += w
                                * (0.25 * dg(mu, b, bp) * dg(nu, a, ap)
                                    - 0.5 * dg(nu, a, b) * dg(mu, ap, bp));
                            let mut t = dg(a, b, mu) * dg(ap, bp, nu);
                            t -= dg(a, b, mu) * dg(bp, ap, nu) - dg(bp, b, mu) * dg(a, ap, nu);
                            t += dg(mu, ap, bp) * dg(a, b, nu) - dg(a, ap, bp) * dg(mu, b, nu);
                            t += dg(nu, ap, bp) * dg(a, b, mu) - dg(a, ap, bp) * dg(nu, b, mu);
                            t += 0.5 * (dg(bp, a, ap) * dg(mu, b, nu) - dg(mu, a, ap) * dg(bp, b, nu));
                            t += 0.5 * (dg(bp, a, ap) * dg(nu, b, mu) - dg(nu, a, ap) * dg(bp, b, mu));
                            qs += w * t;
                        }
                    }
                }
            }
            p[mu][nu] = ps;
            q[mu][nu] = qs;
        }
    }
    (p, q)
}

/// Right-hand side of □̃_g g_{μν} in the unexpanded full-metric form.
pub fn einstein_maxwell_rhs(h: &SymTensor2, d: &FirstDerivs) -> Option<Mat4> {
    let g = full_metric(h);
    let gi = gauss_jordan_inverse(&g)?;
    let (p, q) = quadratic_forms_naive(&gi, d);
    let ft = |a: usize, b: usize| d.da[a][b] - d.da[b][a];
    let mut inv = 0.0;
    for a in 0..4 {
        for r in 0..4 {
            for b in 0..4 {
                for s in 0..4 {
                    inv += gi[a][r] * gi[b][s] * ft(a, b) * ft(r, s);
                }
            }
        }
    }
    let mut out = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            let mut em = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    em += gi[a][b] * ft(a, mu) * ft(b, nu);
                }
            }
            out[mu][nu] = p[mu][nu] + q[mu][nu] - 2.0 * em + 0.5 * g[mu][nu] * inv;
        }
    }
    Some(out)
}

/// −f_β from the flat-background form of the gauge-reduced Maxwell equation.
pub fn maxwell_source_from_wave_form(h: &SymTensor2, d: &FirstDerivs) -> Option<[f64; 4]> {
    let gi = gauss_jordan_inverse(&full_metric(h))?;
    let dg = |l: usize, a: usize, b: usize| dfull(d, l, a, b);
    let da = |l: usize, b: usize| d.da[l][b];
    let mut out = [0.0; 4];
    for (beta, o) in out.iter_mut().enumerate() {
        let mut f = 0.0;
        for a in 0..4 {
            for th in 0..4 {
                for m in 0..4 {
                    for l in 0..4 {
                        f -= gi[a][th] * dg(beta, th, m) * gi[m][l] * da(l, a);
                        f -= 0.5
                            * gi[a][l]
                            * gi[th][m]
                            * (dg(l, m, beta) + dg(beta, l, m) - dg(m, l, beta))
                            * (da(a, th) - da(th, a));
                    }
                }
            }
        }
        *o = -f;
    }
    Some(out)
}

/// Relative distance |a − b| / max(1, |b|).
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
