//! Null-frame geometry: the pair (L, L̲), tangential derivatives ∂̄ and weighted frame norms.
//!
//! Sphere-tangent sums are evaluated with the projector Π_ij = δ_ij − ω_iω_j, so no
//! local orthonormal pair on the sphere is ever chosen.

use crate::error::{Error, Result};
use crate::tensor::{Mat4, Tensor};

/// Frames are undefined within this multiple of the grid spacing from the origin.
pub const R_MIN_FACTOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePoint {
    pub t: f64,
    pub x: [f64; 3],
    pub r: f64,
    pub q: f64,
    pub omega: [f64; 3],
}

impl FramePoint {
    /// Builds the point, failing when r ≤ r_min.
    pub fn new(t: f64, x: [f64; 3], r_min: f64) -> Result<Self> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !(r > r_min) {
            return Err(Error::AxisDegeneracy { r, r_min });
        }
        Ok(FramePoint {
            t,
            x,
            r,
            q: r - t,
            omega: [x[0] / r, x[1] / r, x[2] / r],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameFamily {
    /// {L}
    L,
    /// {S₁, S₂}
    S,
    /// {L, S₁, S₂}
    T,
    /// {L̲, L, S₁, S₂}
    U,
}

/// L = ∂_t + ∂_r and L̲ = ∂_t − ∂_r in Cartesian components.
pub fn null_vectors(pt: &FramePoint) -> ([f64; 4], [f64; 4]) {
    let w = pt.omega;
    ([1.0, w[0], w[1], w[2]], [1.0, -w[0], -w[1], -w[2]])
}

/// Slot weight Σ_{V,V'} eu^{VV'} V^a V'^b for one family.
pub fn family_projector(family: FrameFamily, pt: &FramePoint) -> Mat4 {
    let (l, _) = null_vectors(pt);
    let w = pt.omega;
    let mut m = [[0.0; 4]; 4];
    let add_l = |m: &mut Mat4| {
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] += 0.5 * l[a] * l[b];
            }
        }
    };
    let add_s = |m: &mut Mat4| {
        for i in 0..3 {
            for j in 0..3 {
                let d = if i == j { 1.0 } else { 0.0 };
                m[i + 1][j + 1] += d - w[i] * w[j];
            }
        }
    };
    match family {
        FrameFamily::L => add_l(&mut m),
        FrameFamily::S => add_s(&mut m),
        FrameFamily::T => {
            add_l(&mut m);
            add_s(&mut m);
        }
        FrameFamily::U => {
            for (a, row) in m.iter_mut().enumerate() {
                row[a] = 1.0;
            }
        }
    }
    m
}

/// |p|_{V₁⋯V_l}: families constrain the leading slots, remaining slots are summed in full.
///
/// An empty family list gives the Frobenius norm |p|.
pub fn frame_norm(p: &Tensor, families: &[FrameFamily], pt: &FramePoint) -> Result<f64> {
    let k = p.rank();
    if families.len() > k {
        return Err(Error::Argument(format!(
            "{} families given for a rank {k} tensor",
            families.len()
        )));
    }
    if k > 3 {
        return Err(Error::Argument(format!("frame norms take rank <= 3, got {k}")));
    }
    let mats: Vec<Mat4> = families.iter().map(|&f| family_projector(f, pt)).collect();
    Ok(weighted_square(p.comps(), k, &mats).max(0.0).sqrt())
}

/// Σ p_{a…} p_{b…} ∏_s M_s[a_s][b_s] for the first `mats.len()` slots, identity on the rest.
pub fn weighted_square(comps: &[f64], rank: usize, mats: &[Mat4]) -> f64 {
    // contract one slot at a time: q = (M_1 ⊗ … ⊗ M_l ⊗ 1) p, then p·q
    let mut q = comps.to_vec();
    for (slot, m) in mats.iter().enumerate() {
        let stride = 4usize.pow((rank - 1 - slot) as u32);
        let mut next = vec![0.0; q.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let a = (flat / stride) % 4;
            let base = flat - a * stride;
            let mut s = 0.0;
            for (b, mab) in m[a].iter().enumerate() {
                if *mab != 0.0 {
                    s += mab * q[base + b * stride];
                }
            }
            *out = s;
        }
        q = next;
    }
    comps.iter().zip(&q).map(|(a, b)| a * b).sum()
}

/// Replaces the trailing derivative slot of ∂p by ∂̄p: slot 0 becomes L, slot i becomes ∂̄_i.
///
/// `grad` holds ∂_β p_{α…} with β last.
pub fn tangential_derivative(grad: &Tensor, pt: &FramePoint) -> Result<Tensor> {
    let k = grad.rank();
    if k == 0 {
        return Err(Error::Argument("gradient must have rank >= 1".into()));
    }
    let w = pt.omega;
    let comps = grad.comps();
    let out = Tensor::from_fn(k, |idx| {
        let head = &idx[..k - 1];
        let flat = |beta: usize| {
            let mut f = 0;
            for &i in head {
                f = f * 4 + i;
            }
            f * 4 + beta
        };
        let radial = w[0] * comps[flat(1)] + w[1] * comps[flat(2)] + w[2] * comps[flat(3)];
        match idx[k - 1] {
            0 => comps[flat(0)] + radial,
            i => comps[flat(i)] - w[i - 1] * radial,
        }
    })?;
    Ok(out)
}

/// Orthonormal tangent pair (S₁, S₂) at a point, used for explicit-basis cross-checks.
pub fn sphere_basis(pt: &FramePoint) -> ([f64; 3], [f64; 3]) {
    let w = pt.omega;
    let seed = if w[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = seed[0] * w[0] + seed[1] * w[1] + seed[2] * w[2];
    let mut s1 = [seed[0] - d * w[0], seed[1] - d * w[1], seed[2] - d * w[2]];
    let n1 = (s1[0] * s1[0] + s1[1] * s1[1] + s1[2] * s1[2]).sqrt();
    for x in s1.iter_mut() {
        *x /= n1;
    }
    let s2 = [
        w[1] * s1[2] - w[2] * s1[1],
        w[2] * s1[0] - w[0] * s1[2],
        w[0] * s1[1] - w[1] * s1[0],
    ];
    (s1, s2)
}
