//! Pointwise sources of the reduced system: □̃_g h_{μν} = F_{μν} and □̃_g A_β = J_β.
//!
//! Every contraction uses the exact inverse metric. `D[λ][α][β]` denotes ∂_λ h_{αβ}
//! as full symmetric matrices.

use crate::error::Result;
use crate::tensor::{
    invert_metric, mat_mul, metric_matrix, Mat4, OneForm, SymTensor2, ETA, MINKOWSKI, SYM_PAIRS,
};

/// First derivatives at a point: `dh[λ]` is ∂_λh in storage layout, `da[λ][β]` is ∂_λA_β.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FirstDerivs {
    pub dh: [[f64; 10]; 4],
    pub da: [[f64; 4]; 4],
}

impl FirstDerivs {
    pub fn metric_matrices(&self) -> [Mat4; 4] {
        self.dh.map(|c| SymTensor2(c).matrix())
    }

    pub fn scale(&self, s: f64) -> Self {
        FirstDerivs {
            dh: self.dh.map(|r| r.map(|x| x * s)),
            da: self.da.map(|r| r.map(|x| x * s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsBundle {
    pub f: SymTensor2,
    pub j: OneForm,
}

/// F̃_{αβ} = ∂_αA_β − ∂_βA_α.
#[inline]
pub fn faraday(da: &[[f64; 4]; 4]) -> Mat4 {
    let mut f = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in (a + 1)..4 {
            let v = da[a][b] - da[b][a];
            f[a][b] = v;
            f[b][a] = -v;
        }
    }
    f
}

/// P(∂_μh, ∂_νh) with Minkowski contractions.
pub fn p_term(dh_mu: &[f64; 10], dh_nu: &[f64; 10]) -> f64 {
    let (a, b) = (SymTensor2(*dh_mu), SymTensor2(*dh_nu));
    let tr = |s: &SymTensor2| (0..4).map(|i| ETA[i] * s.get(i, i)).sum::<f64>();
    let mut cross = 0.0;
    for x in 0..4 {
        for y in 0..4 {
            cross += ETA[x] * ETA[y] * b.get(x, y) * a.get(x, y);
        }
    }
    0.25 * tr(&a) * tr(&b) - 0.5 * cross
}

/// Q_{μν}(∂h, ∂h) with Minkowski contractions.
pub fn q_term(d: &FirstDerivs) -> SymTensor2 {
    let dm = d.metric_matrices();
    SymTensor2(quadratic_forms(&MINKOWSKI, &dm).1)
}

/// (P̃, Q̃) in storage layout for an arbitrary inverse metric `gi`.
#[inline]
pub fn quadratic_forms(gi: &Mat4, d: &[Mat4; 4]) -> ([f64; 10], [f64; 10]) {
    // M_λ = g⁻¹ D_λ and its trace
    let ml: [Mat4; 4] = std::array::from_fn(|l| mat_mul(gi, &d[l]));
    let t: [f64; 4] = std::array::from_fn(|l| ml[l][0][0] + ml[l][1][1] + ml[l][2][2] + ml[l][3][3]);
    // d_μ = g^{ββ'} D[β'][β][μ]
    let mut dv = [0.0; 4];
    for (mu, dmu) in dv.iter_mut().enumerate() {
        let mut s = 0.0;
        for b in 0..4 {
            for bp in 0..4 {
                s += gi[b][bp] * d[bp][b][mu];
            }
        }
        *dmu = s;
    }
    let raise = |v: &[f64; 4]| -> [f64; 4] {
        std::array::from_fn(|a| gi[a][0] * v[0] + gi[a][1] * v[1] + gi[a][2] * v[2] + gi[a][3] * v[3])
    };
    let d_up = raise(&dv);
    let tau_up = raise(&t);
    // Y_μ = g⁻¹ D_μ g⁻¹
    let y: [Mat4; 4] = std::array::from_fn(|l| mat_mul(&ml[l], gi));
    // E_ν = g⁻¹ X_ν g⁻¹ with X_ν[α][β] = D[α][β][ν]
    let e: [Mat4; 4] = std::array::from_fn(|nu| {
        let x: Mat4 = std::array::from_fn(|a| std::array::from_fn(|b| d[a][b][nu]));
        mat_mul(&mat_mul(gi, &x), gi)
    });

    let mut p = [0.0; 10];
    let mut q = [0.0; 10];
    for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
        let mut trmm = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                trmm += ml[nu][a][b] * ml[mu][b][a];
            }
        }
        p[k] = 0.25 * t[mu] * t[nu] - 0.5 * trmm;

        let mut s = dv[mu] * dv[nu] - 0.5 * (t[mu] * dv[nu] + t[nu] * dv[mu]);
        for a in 0..4 {
            for b in 0..4 {
                s += d[a][b][mu] * (e[nu][a][b] - e[nu][b][a]);
                s += y[mu][a][b] * d[a][b][nu] + y[nu][a][b] * d[a][b][mu];
            }
        }
        for b in 0..4 {
            let c = 0.5 * tau_up[b] - d_up[b];
            s += c * (d[mu][b][nu] + d[nu][b][mu]);
        }
        q[k] = s;
    }
    (p, q)
}

/// Maxwell stress part of F: −2g^{αβ}F̃_{αμ}F̃_{βν} + ½g_{μν}g^{αρ}g^{βσ}F̃_{αβ}F̃_{ρσ}.
#[inline]
pub fn maxwell_stress(gi: &Mat4, g: &Mat4, ft: &Mat4) -> [f64; 10] {
    let gf = mat_mul(gi, ft);
    let w = mat_mul(&gf, gi);
    let mut inv = 0.0;
    for r in 0..4 {
        for s in 0..4 {
            inv += w[r][s] * ft[r][s];
        }
    }
    let mut out = [0.0; 10];
    for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
        // Σ_β F̃_{αμ} g^{αβ} F̃_{βν} = Σ_α F̃_{αμ} (g⁻¹F̃)_{αν}
        let mut s = 0.0;
        for a in 0..4 {
            s += ft[a][mu] * gf[a][nu];
        }
        out[k] = -2.0 * s + 0.5 * g[mu][nu] * inv;
    }
    out
}

/// J_β given the inverse metric, metric derivatives and ∂A.
#[inline]
pub fn lorenz_source(gi: &Mat4, d: &[Mat4; 4], da: &Mat4) -> [f64; 4] {
    let ft = faraday(da);
    let w = mat_mul(&mat_mul(gi, &ft), gi);
    std::array::from_fn(|beta| {
        let y = mat_mul(&mat_mul(gi, &d[beta]), gi);
        let mut s = 0.0;
        for a in 0..4 {
            for l in 0..4 {
                // g^{αθ}∂_βh_{θμ}g^{μλ}∂_λA_α
                s += y[a][l] * da[l][a];
                // ½ W^{λμ}(∂_λh_{μβ} − ∂_μh_{λβ}) collapses to W^{λμ}∂_λh_{μβ}
                s += w[a][l] * d[a][l][beta];
            }
        }
        s
    })
}

/// F_{μν} and J_β from a precomputed metric and inverse. This is the evolution hot path.
#[inline]
pub fn sources(gi: &Mat4, g: &Mat4, d: &[Mat4; 4], da: &Mat4) -> ([f64; 10], [f64; 4]) {
    let (p, q) = quadratic_forms(gi, d);
    let ft = faraday(da);
    let mx = maxwell_stress(gi, g, &ft);
    let f = std::array::from_fn(|k| p[k] + q[k] + mx[k]);
    (f, lorenz_source(gi, d, da))
}

/// G_{μν}: the part of P̃ + Q̃ beyond the Minkowski-contracted P + Q.
pub fn g_term(h: &SymTensor2, d: &FirstDerivs) -> Result<SymTensor2> {
    let inv = invert_metric(h)?;
    let dm = d.metric_matrices();
    let (pt, qt) = quadratic_forms(&inv.g_inv.matrix(), &dm);
    let (p, q) = quadratic_forms(&MINKOWSKI, &dm);
    Ok(SymTensor2(std::array::from_fn(|k| (pt[k] + qt[k]) - (p[k] + q[k]))))
}

pub fn assemble_f(h: &SymTensor2, d: &FirstDerivs) -> Result<SymTensor2> {
    let inv = invert_metric(h)?;
    let gi = inv.g_inv.matrix();
    let dm = d.metric_matrices();
    let (p, q) = quadratic_forms(&gi, &dm);
    let mx = maxwell_stress(&gi, &metric_matrix(h), &faraday(&d.da));
    Ok(SymTensor2(std::array::from_fn(|k| p[k] + q[k] + mx[k])))
}

pub fn assemble_j(h: &SymTensor2, d: &FirstDerivs) -> Result<OneForm> {
    let inv = invert_metric(h)?;
    Ok(OneForm(lorenz_source(&inv.g_inv.matrix(), &d.metric_matrices(), &d.da)))
}

pub fn assemble(h: &SymTensor2, d: &FirstDerivs) -> Result<RhsBundle> {
    Ok(RhsBundle {
        f: assemble_f(h, d)?,
        j: assemble_j(h, d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn faraday_is_antisymmetric_and_kills_pure_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let da: [[f64; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let f = faraday(&da);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f[a][b], -f[b][a]);
            }
        }
        let sym: [[f64; 4]; 4] = std::array::from_fn(|a| std::array::from_fn(|b| da[a][b] + da[b][a]));
        assert_eq!(faraday(&sym), [[0.0; 4]; 4]);
    }

    #[test]
    fn zero_inputs_give_zero_sources() {
        let d = FirstDerivs::default();
        let h = SymTensor2::ZERO;
        assert_eq!(assemble_f(&h, &d).unwrap(), SymTensor2::ZERO);
        assert_eq!(assemble_j(&h, &d).unwrap(), OneForm::default());
        assert_eq!(q_term(&d), SymTensor2::ZERO);
        assert_eq!(p_term(&[0.0; 10], &[1.0; 10]), 0.0);
    }

    #[test]
    fn g_term_vanishes_at_zero_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = oracle::random_derivs(&mut rng, 1.0);
        assert_eq!(g_term(&SymTensor2::ZERO, &d).unwrap(), SymTensor2::ZERO);
    }

    #[test]
    fn g_term_for_conformal_metric() {
        // g⁻¹ = m⁻¹/(1+ε): every term is quadratic in g⁻¹, so G = (1/(1+ε)² − 1)(P + Q)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eps = 0.05;
        let d = oracle::random_derivs(&mut rng, 1.0);
        let h = SymTensor2::minkowski().scale(eps);
        let g = g_term(&h, &d).unwrap();
        let q = q_term(&d);
        let c = 1.0 / (1.0 + eps).powi(2) - 1.0;
        for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
            let expect = c * (p_term(&d.dh[mu], &d.dh[nu]) + q.0[k]);
            assert!((g.0[k] - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn fast_contractions_match_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let h = oracle::random_sym(&mut rng, 0.1);
            let d = oracle::random_derivs(&mut rng, 1.0);
            let gi = invert_metric(&h).unwrap().g_inv.matrix();
            let (p, q) = quadratic_forms(&gi, &d.metric_matrices());
            let (pn, qn) = oracle::quadratic_forms_naive(&gi, &d);
            for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
                assert!((p[k] - pn[mu][nu]).abs() < 1e-12 * (1.0 + pn[mu][nu].abs()));
                assert!((q[k] - qn[mu][nu]).abs() < 1e-12 * (1.0 + qn[mu][nu].abs()));
            }
        }
    }

    #[test]
    fn p_term_matches_general_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = oracle::random_derivs(&mut rng, 1.0);
        let (p, _) = quadratic_forms(&MINKOWSKI, &d.metric_matrices());
        for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
            assert!((p[k] - p_term(&d.dh[mu], &d.dh[nu])).abs() < 1e-13);
        }
    }

    #[test]
    fn sources_are_quadratic_in_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = oracle::random_sym(&mut rng, 0.1);
        let d = oracle::random_derivs(&mut rng, 1.0);
        let lam = 3.0;
        let a = assemble(&h, &d).unwrap();
        let b = assemble(&h, &d.scale(lam)).unwrap();
        for k in 0..10 {
            assert!((b.f.0[k] - lam * lam * a.f.0[k]).abs() < 1e-12 * (1.0 + b.f.0[k].abs()));
        }
        for k in 0..4 {
            assert!((b.j.0[k] - lam * lam * a.j.0[k]).abs() < 1e-12 * (1.0 + b.j.0[k].abs()));
        }
    }

    #[test]
    fn j_vanishes_without_either_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = oracle::random_sym(&mut rng, 0.1);
        let mut d = oracle::random_derivs(&mut rng, 1.0);
        d.dh = [[0.0; 10]; 4];
        assert_eq!(assemble_j(&h, &d).unwrap(), OneForm::default());
        let mut d = oracle::random_derivs(&mut rng, 1.0);
        d.da = [[0.0; 4]; 4];
        assert_eq!(assemble_j(&h, &d).unwrap(), OneForm::default());
    }

    #[test]
    fn null_plane_wave_maxwell_stress() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let (k, omega) = oracle::random_null_covector(&mut rng);
            // a with k·a = 0 using the inverse Minkowski pairing
            let mut a = [rng.gen_range(-1.0..1.0), 0.0, 0.0, 0.0];
            for i in 1..4 {
                a[i] = rng.gen_range(-1.0..1.0);
            }
            let ka: f64 = (0..4).map(|i| ETA[i] * k[i] * a[i]).sum();
            // project: a ← a − (k·a)/(k·u) u with u = ∂_t direction
            let ku = ETA[0] * k[0];
            a[0] -= ka / ku;
            let fp = rng.gen_range(-2.0..2.0);
            let mut d = FirstDerivs::default();
            for l in 0..4 {
                for b in 0..4 {
                    d.da[l][b] = fp * k[l] * a[b];
                }
            }
            let _ = omega;
            let f = assemble_f(&SymTensor2::ZERO, &d).unwrap();
            let aa: f64 = (0..4).map(|i| ETA[i] * a[i] * a[i]).sum();
            for (s, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
                let expect = -2.0 * fp * fp * aa * k[mu] * k[nu];
                assert!((f.0[s] - expect).abs() < 1e-12, "{} vs {}", f.0[s], expect);
            }
        }
    }
}
