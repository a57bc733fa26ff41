//! Pointwise tensor algebra on the Minkowski background.
//!
//! Symmetric 2-tensors are stored as 10-vectors with the fixed layout
//!
//! | slot | 0  | 1  | 2  | 3  | 4  | 5  | 6  | 7  | 8  | 9  |
//! |------|----|----|----|----|----|----|----|----|----|----|
//! | μν   | 00 | 01 | 02 | 03 | 11 | 12 | 13 | 22 | 23 | 33 |
//!
//! Every module (RHS kernels, evolved grid fields, snapshots) uses this map.
//! Index 0 is time, indices 1..=3 are Cartesian space.

use crate::error::{Error, Result};

pub type Mat4 = [[f64; 4]; 4];

/// (μ, ν) pairs in storage order.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Storage slot of the unordered pair (μ, ν).
pub const SYM_INDEX: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

/// Multiplicity of each storage slot in a full double sum (off-diagonals count twice).
pub const SYM_WEIGHT: [f64; 10] = [1.0, 2.0, 2.0, 2.0, 1.0, 2.0, 2.0, 1.0, 2.0, 1.0];

/// Diagonal of the Minkowski metric; it is its own inverse.
pub const ETA: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

pub const MINKOWSKI: Mat4 = [
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Largest accepted |g^{00} + 1| before a metric is declared degenerate.
pub const MAX_G00_DEVIATION: f64 = 0.5;
/// Largest accepted infinity-norm condition estimate of g_{μν}.
pub const MAX_CONDITION: f64 = 1.0e6;

/// Symmetric rank-2 tensor, covariant or contravariant depending on context.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2(pub [f64; 10]);

impl SymTensor2 {
    pub const ZERO: SymTensor2 = SymTensor2([0.0; 10]);

    pub fn minkowski() -> Self {
        Self::from_fn(|m, n| MINKOWSKI[m][n])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut c = [0.0; 10];
        for (k, &(m, n)) in SYM_PAIRS.iter().enumerate() {
            c[k] = f(m, n);
        }
        SymTensor2(c)
    }

    /// Builds from a full matrix using its upper triangle.
    pub fn from_matrix(m: &Mat4) -> Self {
        Self::from_fn(|a, b| m[a][b])
    }

    #[inline]
    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.0[SYM_INDEX[mu][nu]]
    }

    #[inline]
    pub fn set(&mut self, mu: usize, nu: usize, v: f64) {
        self.0[SYM_INDEX[mu][nu]] = v;
    }

    pub fn matrix(&self) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, x) in row.iter_mut().enumerate() {
                *x = self.get(a, b);
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        SymTensor2(self.0.map(|x| x * s))
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    /// Frobenius norm over all 16 components.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .zip(SYM_WEIGHT.iter())
            .map(|(x, w)| w * x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// Both indices moved with m (raising and lowering coincide for a diagonal ±1 metric).
    pub fn mink_raise_both(&self) -> Self {
        Self::from_fn(|a, b| ETA[a] * ETA[b] * self.get(a, b))
    }
}

impl std::ops::Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(mut self, rhs: SymTensor2) -> SymTensor2 {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl std::ops::Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(mut self, rhs: SymTensor2) -> SymTensor2 {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

/// Covariant one-form, e.g. the electromagnetic potential A_β.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OneForm(pub [f64; 4]);

impl OneForm {
    pub fn raise(&self) -> [f64; 4] {
        [
            ETA[0] * self.0[0],
            ETA[1] * self.0[1],
            ETA[2] * self.0[2],
            ETA[3] * self.0[3],
        ]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Exact inverse of g = m + h together with its deviation H = g⁻¹ − m⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseMetric {
    pub g_inv: SymTensor2,
    pub deviation: SymTensor2,
}

/// Dense tensor of rank ≤ 4 over the index set {0,1,2,3}, with per-slot variance.
///
/// Components are stored with the last index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rank: usize,
    upper: Vec<bool>,
    comps: Vec<f64>,
}

impl Tensor {
    pub const MAX_RANK: usize = 4;

    pub fn covariant(rank: usize, comps: Vec<f64>) -> Result<Self> {
        if rank > Self::MAX_RANK {
            return Err(Error::Argument(format!("rank {rank} exceeds {}", Self::MAX_RANK)));
        }
        if comps.len() != 4usize.pow(rank as u32) {
            return Err(Error::Argument(format!(
                "rank {rank} tensor needs {} components, got {}",
                4usize.pow(rank as u32),
                comps.len()
            )));
        }
        Ok(Tensor {
            rank,
            upper: vec![false; rank],
            comps,
        })
    }

    pub fn from_fn(rank: usize, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let n = 4usize.pow(rank as u32);
        let mut comps = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        for flat in 0..n {
            unflatten(flat, &mut idx);
            comps.push(f(&idx));
        }
        Self::covariant(rank, comps)
    }

    pub fn from_sym(p: &SymTensor2) -> Self {
        Self::from_fn(2, |i| p.get(i[0], i[1])).expect("rank 2")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_upper(&self, slot: usize) -> bool {
        self.upper[slot]
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.comps[flatten(idx)]
    }

    /// Frobenius norm over all 4^k components.
    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn flip(&self, slots: &[usize], to_upper: bool) -> Result<Self> {
        let mut out = self.clone();
        for &s in slots {
            if s >= self.rank {
                return Err(Error::Argument(format!("slot {s} out of range for rank {}", self.rank)));
            }
            if out.upper[s] == to_upper {
                let what = if to_upper { "contravariant" } else { "covariant" };
                return Err(Error::Argument(format!("slot {s} is already {what}")));
            }
            out.upper[s] = to_upper;
        }
        let mut idx = vec![0usize; self.rank];
        for (flat, c) in out.comps.iter_mut().enumerate() {
            unflatten(flat, &mut idx);
            for &s in slots {
                *c *= ETA[idx[s]];
            }
        }
        Ok(out)
    }
}

fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 4 + i)
}

fn unflatten(mut flat: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % 4;
        flat /= 4;
    }
}

/// Contracts each requested slot with m^{μν}.
pub fn mink_raise(p: &Tensor, slots: &[usize]) -> Result<Tensor> {
    p.flip(slots, true)
}

/// Contracts each requested slot with m_{μν}.
pub fn mink_lower(p: &Tensor, slots: &[usize]) -> Result<Tensor> {
    p.flip(slots, false)
}

#[inline]
pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

fn mat_norm_inf(a: &Mat4) -> f64 {
    a.iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Cofactor inverse of a symmetric 4×4 matrix, returned as its upper triangle.
///
/// Returns `None` when the determinant vanishes. Hot path of the evolution kernel.
#[inline]
pub fn inverse_sym4(g: &Mat4) -> Option<([f64; 10], f64)> {
    let a = g;
    let s0 = a[0][0] * a[1][1] - a[1][0] * a[0][1];
    let s1 = a[0][0] * a[1][2] - a[1][0] * a[0][2];
    let s2 = a[0][0] * a[1][3] - a[1][0] * a[0][3];
    let s3 = a[0][1] * a[1][2] - a[1][1] * a[0][2];
    let s4 = a[0][1] * a[1][3] - a[1][1] * a[0][3];
    let s5 = a[0][2] * a[1][3] - a[1][2] * a[0][3];
    let c5 = a[2][2] * a[3][3] - a[3][2] * a[2][3];
    let c4 = a[2][1] * a[3][3] - a[3][1] * a[2][3];
    let c3 = a[2][1] * a[3][2] - a[3][1] * a[2][2];
    let c2 = a[2][0] * a[3][3] - a[3][0] * a[2][3];
    let c1 = a[2][0] * a[3][2] - a[3][0] * a[2][2];
    let c0 = a[2][0] * a[3][1] - a[3][0] * a[2][1];
    let det = s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let b00 = (a[1][1] * c5 - a[1][2] * c4 + a[1][3] * c3) * inv;
    let b01 = (-a[0][1] * c5 + a[0][2] * c4 - a[0][3] * c3) * inv;
    let b02 = (a[3][1] * s5 - a[3][2] * s4 + a[3][3] * s3) * inv;
    let b03 = (-a[2][1] * s5 + a[2][2] * s4 - a[2][3] * s3) * inv;
    let b11 = (a[0][0] * c5 - a[0][2] * c2 + a[0][3] * c1) * inv;
    let b12 = (-a[3][0] * s5 + a[3][2] * s2 - a[3][3] * s1) * inv;
    let b13 = (a[2][0] * s5 - a[2][2] * s2 + a[2][3] * s1) * inv;
    let b22 = (a[3][0] * s4 - a[3][1] * s2 + a[3][3] * s0) * inv;
    let b23 = (-a[2][0] * s4 + a[2][1] * s2 - a[2][3] * s0) * inv;
    let b33 = (a[2][0] * s3 - a[2][1] * s1 + a[2][2] * s0) * inv;
    Some(([b00, b01, b02, b03, b11, b12, b13, b22, b23, b33], det))
}

/// Full metric g = m + h as a matrix.
#[inline]
pub fn metric_matrix(h: &SymTensor2) -> Mat4 {
    let mut g = h.matrix();
    for (a, row) in g.iter_mut().enumerate() {
        row[a] += ETA[a];
    }
    g
}

/// Exact inverse of g = m + h.
///
/// Rejects metrics with |g^{00} + 1| > 0.5 or an infinity-norm condition estimate above 10⁶.
pub fn invert_metric(h: &SymTensor2) -> Result<InverseMetric> {
    if h.0.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateMetric("non-finite perturbation".into()));
    }
    let g = metric_matrix(h);
    let (inv, _) = inverse_sym4(&g).ok_or_else(|| Error::DegenerateMetric("singular metric".into()))?;
    let g_inv = SymTensor2(inv);
    let cond = mat_norm_inf(&g) * mat_norm_inf(&g_inv.matrix());
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateMetric(format!("condition estimate {cond:e} exceeds {MAX_CONDITION:e}")));
    }
    let g00 = g_inv.get(0, 0);
    if (g00 + 1.0).abs() > MAX_G00_DEVIATION {
        return Err(Error::DegenerateMetric(format!("g^00 = {g00} outside [-1.5, -0.5]")));
    }
    Ok(InverseMetric {
        g_inv,
        deviation: g_inv - SymTensor2::minkowski(),
    })
}

/// Truncated geometric series for H = g⁻¹ − m⁻¹ through `order` powers of m⁻¹h.
///
/// Requires spectral radius of m⁻¹h below one, estimated from ‖(m⁻¹h)^64‖^{1/64}.
pub fn neumann_h(h: &SymTensor2, order: usize) -> Result<SymTensor2> {
    if order == 0 {
        return Err(Error::Argument("series order must be at least 1".into()));
    }
    // X^α_ν = m^{αβ} h_{βν}
    let mut x = h.matrix();
    for (a, row) in x.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v *= ETA[a];
        }
    }
    let mut p = x;
    for _ in 0..6 {
        p = mat_mul(&p, &p);
    }
    let rho = mat_norm_inf(&p).powf(1.0 / 64.0);
    if !(rho < 1.0) {
        return Err(Error::Convergence(format!("spectral radius estimate {rho} >= 1")));
    }
    let neg_x = x.map(|r| r.map(|v| -v));
    let mut term = neg_x;
    let mut sum = [[0.0; 4]; 4];
    for k in 1..=order {
        for (s, t) in sum.iter_mut().zip(term.iter()) {
            for (a, b) in s.iter_mut().zip(t.iter()) {
                *a += b;
            }
        }
        if k < order {
            term = mat_mul(&neg_x, &term);
        }
    }
    // H = Σ (−X)^k m⁻¹, m⁻¹ diagonal
    Ok(SymTensor2::from_fn(|a, b| 0.5 * (sum[a][b] * ETA[b] + sum[b][a] * ETA[a])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_sym(seed: u64, scale: f64) -> SymTensor2 {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        SymTensor2::from_fn(|_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            scale * (((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0)
        })
    }

    #[test]
    fn layout_is_consistent() {
        for (k, &(m, n)) in SYM_PAIRS.iter().enumerate() {
            assert_eq!(SYM_INDEX[m][n], k);
            assert_eq!(SYM_INDEX[n][m], k);
        }
    }

    #[test]
    fn raising_minkowski_gives_inverse_minkowski() {
        let m = Tensor::from_sym(&SymTensor2::minkowski());
        let up = mink_raise(&m, &[0, 1]).unwrap();
        assert_eq!(up.get(&[0, 0]), -1.0);
        for i in 1..4 {
            assert_eq!(up.get(&[i, i]), 1.0);
        }
    }

    #[test]
    fn spatial_diagonal_is_unchanged_by_raising() {
        let a = 0.37;
        let h = SymTensor2::from_fn(|m, n| if m == n && m > 0 { a } else { 0.0 });
        let up = mink_raise(&Tensor::from_sym(&h), &[0, 1]).unwrap();
        assert_eq!(up, mink_raise(&Tensor::from_sym(&h), &[0, 1]).unwrap());
        assert_eq!(up.comps(), Tensor::from_sym(&h).comps());
    }

    #[test]
    fn raise_lower_round_trip() {
        let p = random_sym(7, 1.0);
        let t = Tensor::from_sym(&p);
        let back = mink_lower(&mink_raise(&t, &[1]).unwrap(), &[1]).unwrap();
        for (a, b) in back.comps().iter().zip(t.comps()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_slots_are_rejected() {
        let t = Tensor::from_sym(&SymTensor2::minkowski());
        assert!(matches!(mink_raise(&t, &[2]), Err(Error::Argument(_))));
        let up = mink_raise(&t, &[0]).unwrap();
        assert!(matches!(mink_raise(&up, &[0]), Err(Error::Argument(_))));
        assert!(matches!(mink_lower(&t, &[1]), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_perturbation_inverts_to_minkowski() {
        let inv = invert_metric(&SymTensor2::ZERO).unwrap();
        assert_eq!(inv.deviation, SymTensor2::ZERO);
        assert_eq!(inv.g_inv, SymTensor2::minkowski());
    }

    #[test]
    fn conformal_perturbation_has_closed_form_inverse() {
        let eps = 1e-2;
        let h = SymTensor2::minkowski().scale(eps);
        let inv = invert_metric(&h).unwrap();
        let expect = SymTensor2::minkowski().scale(-eps / (1.0 + eps));
        for (a, b) in inv.deviation.0.iter().zip(expect.0) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_matches_identity_for_moderate_h() {
        for seed in 0..200 {
            let h = random_sym(seed, 0.1);
            let inv = invert_metric(&h).unwrap();
            let prod = mat_mul(&metric_matrix(&h), &inv.g_inv.matrix());
            for (i, row) in prod.iter().enumerate() {
                for (j, x) in row.iter().enumerate() {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((x - d).abs() < 1e-12, "seed {seed}: {x}");
                }
            }
        }
    }

    #[test]
    fn deviation_is_minus_h_to_first_order() {
        for seed in 0..50 {
            let h = random_sym(seed, 1e-3);
            let inv = invert_metric(&h).unwrap();
            let err = (inv.deviation + h.mink_raise_both()).norm();
            assert!(err <= 10.0 * h.norm().powi(2), "seed {seed}: {err}");
        }
    }

    #[test]
    fn degenerate_metrics_are_rejected() {
        // g_00 → 0 makes g^{00} blow up
        let h = SymTensor2::from_fn(|m, n| if m == 0 && n == 0 { 0.9 } else { 0.0 });
        assert!(matches!(invert_metric(&h), Err(Error::DegenerateMetric(_))));
        let h = SymTensor2::from_fn(|m, n| if m == 1 && n == 1 { -1.0 } else { 0.0 });
        assert!(matches!(invert_metric(&h), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn neumann_first_order_is_minus_raised_h() {
        let h = random_sym(3, 0.05);
        let s = neumann_h(&h, 1).unwrap();
        let expect = h.mink_raise_both().scale(-1.0);
        for (a, b) in s.0.iter().zip(expect.0) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn neumann_second_order_geometric_series() {
        let eps = 0.03;
        let h = SymTensor2::minkowski().scale(eps);
        let s = neumann_h(&h, 2).unwrap();
        let expect = SymTensor2::minkowski().scale(-eps + eps * eps);
        for (a, b) in s.0.iter().zip(expect.0) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn neumann_rejects_large_h() {
        let h = SymTensor2::minkowski().scale(1.5);
        assert!(matches!(neumann_h(&h, 3), Err(Error::Convergence(_))));
    }
}
