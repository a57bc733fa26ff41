//! Uniform Cartesian grid on [−L, L]³ with per-axis stencil tables.
//!
//! Points are stored x-fastest: `p = i + n·(j + n·k)`. There are no ghost zones;
//! near non-periodic faces the tables switch to one-sided closures of the same order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stencil::{offset_weights, undivided_even_difference};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Sommerfeld,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sommerfeld" => Ok(Boundary::Sommerfeld),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Config(format!("unknown boundary type {other:?}"))),
        }
    }
}

pub const MAX_STENCIL: usize = 9;

/// One row of a 1D difference operator: neighbour coordinate indices and weights.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub len: usize,
    pub idx: [usize; MAX_STENCIL],
    pub w: [f64; MAX_STENCIL],
}

impl Stencil {
    fn new(pairs: &[(usize, f64)]) -> Self {
        assert!(pairs.len() <= MAX_STENCIL);
        let mut s = Stencil {
            len: 0,
            idx: [0; MAX_STENCIL],
            w: [0.0; MAX_STENCIL],
        };
        for &(i, w) in pairs {
            if w != 0.0 {
                s.idx[s.len] = i;
                s.w[s.len] = w;
                s.len += 1;
            }
        }
        s
    }

    #[inline]
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx[..self.len].iter().copied().zip(self.w[..self.len].iter().copied())
    }
}

#[derive(Debug)]
struct Tables {
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    dissipation: Vec<Option<Stencil>>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
    pub dx: f64,
    pub boundary: Boundary,
    pub order: usize,
    tables: Arc<Tables>,
}

impl PartialEq for Grid {
    fn eq(&self, o: &Grid) -> bool {
        self.n == o.n
            && self.half_width == o.half_width
            && self.boundary == o.boundary
            && self.order == o.order
    }
}

impl Grid {
    /// `order` is the accuracy order of the derivative stencils (2, 4 or 6).
    pub fn new(n: usize, half_width: f64, order: usize, boundary: Boundary) -> Result<Self> {
        if ![2, 4, 6].contains(&order) {
            return Err(Error::Config(format!("stencil order must be 2, 4 or 6, got {order}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("grid half-width must be positive, got {half_width}")));
        }
        let radius = order / 2;
        let min_n = (2 * radius + 1).max(order + 3);
        if n < min_n {
            return Err(Error::Config(format!("n = {n} is below the minimum {min_n} for order {order}")));
        }
        let dx = match boundary {
            Boundary::Sommerfeld => 2.0 * half_width / (n - 1) as f64,
            Boundary::Periodic => 2.0 * half_width / n as f64,
        };
        let tables = Arc::new(build_tables(n, dx, order, boundary));
        Ok(Grid {
            n,
            half_width,
            dx,
            boundary,
            order,
            tables,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn ijk(&self, p: usize) -> [usize; 3] {
        [p % self.n, (p / self.n) % self.n, p / (self.n * self.n)]
    }

    #[inline]
    pub fn position(&self, p: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(p);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        [1, self.n, self.n * self.n][axis]
    }

    #[inline]
    pub fn d1(&self, i: usize) -> &Stencil {
        &self.tables.d1[i]
    }

    #[inline]
    pub fn d2(&self, i: usize) -> &Stencil {
        &self.tables.d2[i]
    }

    #[inline]
    pub fn dissipation(&self, i: usize) -> Option<&Stencil> {
        self.tables.dissipation[i].as_ref()
    }

    /// Whether axis index `i` lies on an outer face (never for periodic grids).
    #[inline]
    pub fn is_face(&self, i: usize) -> bool {
        self.boundary == Boundary::Sommerfeld && (i == 0 || i + 1 == self.n)
    }

    pub fn on_boundary(&self, p: usize) -> bool {
        self.ijk(p).iter().any(|&i| self.is_face(i))
    }

    /// Distance in layers from the nearest outer face (usize::MAX for periodic grids).
    pub fn layer(&self, p: usize) -> usize {
        if self.boundary == Boundary::Periodic {
            return usize::MAX;
        }
        self.ijk(p)
            .iter()
            .map(|&i| i.min(self.n - 1 - i))
            .min()
            .unwrap_or(0)
    }

    /// Trapezoidal quadrature weight (periodic grids are uniformly weighted).
    #[inline]
    pub fn volume_weight(&self, p: usize) -> f64 {
        let dv = self.dx * self.dx * self.dx;
        match self.boundary {
            Boundary::Periodic => dv,
            Boundary::Sommerfeld => self
                .ijk(p)
                .iter()
                .fold(dv, |acc, &i| if i == 0 || i + 1 == self.n { acc * 0.5 } else { acc }),
        }
    }

    /// Axis indices whose values any stencil row at `i` reads (for activity tracking).
    pub fn support(&self, i: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.d1(i).iter().map(|(j, _)| j).collect();
        s.extend(self.d2(i).iter().map(|(j, _)| j));
        if let Some(d) = self.dissipation(i) {
            s.extend(d.iter().map(|(j, _)| j));
        }
        s.push(i);
        s.sort_unstable();
        s.dedup();
        s
    }

    /// ∂_axis of component `c` of a point-major field at point `p`.
    #[inline]
    pub fn diff1<const K: usize>(&self, f: &[[f64; K]], p: usize, axis: usize) -> [f64; K] {
        let s = self.stride(axis);
        let i = (p / s) % self.n;
        let base = p - i * s;
        let mut out = [0.0; K];
        for (j, w) in self.d1(i).iter() {
            let src = &f[base + j * s];
            for c in 0..K {
                out[c] += w * src[c];
            }
        }
        out
    }

    /// Spatial gradient of a point-major field at `p`.
    #[inline]
    pub fn gradient<const K: usize>(&self, f: &[[f64; K]], p: usize) -> [[f64; K]; 3] {
        [self.diff1(f, p, 0), self.diff1(f, p, 1), self.diff1(f, p, 2)]
    }

    /// ∂_a∂_b at `p`; pure second derivatives use the dedicated second-derivative row.
    #[inline]
    pub fn diff2<const K: usize>(&self, f: &[[f64; K]], p: usize, a: usize, b: usize) -> [f64; K] {
        let mut out = [0.0; K];
        if a == b {
            let s = self.stride(a);
            let i = (p / s) % self.n;
            let base = p - i * s;
            for (j, w) in self.d2(i).iter() {
                let src = &f[base + j * s];
                for c in 0..K {
                    out[c] += w * src[c];
                }
            }
        } else {
            let (sa, sb) = (self.stride(a), self.stride(b));
            let ia = (p / sa) % self.n;
            let ib = (p / sb) % self.n;
            let base = p - ia * sa - ib * sb;
            for (ja, wa) in self.d1(ia).iter() {
                let row = base + ja * sa;
                for (jb, wb) in self.d1(ib).iter() {
                    let w = wa * wb;
                    let src = &f[row + jb * sb];
                    for c in 0..K {
                        out[c] += w * src[c];
                    }
                }
            }
        }
        out
    }

    /// Kreiss–Oliger dissipation operator summed over axes, zero where the stencil does not fit.
    #[inline]
    pub fn dissipate<const K: usize>(&self, f: &[[f64; K]], p: usize) -> [f64; K] {
        let mut out = [0.0; K];
        for axis in 0..3 {
            let s = self.stride(axis);
            let i = (p / s) % self.n;
            if let Some(st) = self.dissipation(i) {
                let base = p - i * s;
                for (j, w) in st.iter() {
                    let src = &f[base + j * s];
                    for c in 0..K {
                        out[c] += w * src[c];
                    }
                }
            }
        }
        out
    }

    /// Samples a function of position at every point.
    pub fn sample<T>(&self, f: impl Fn([f64; 3]) -> T + Sync) -> Vec<T>
    where
        T: Send,
    {
        use rayon::prelude::*;
        (0..self.len()).into_par_iter().map(|p| f(self.position(p))).collect()
    }
}

fn build_tables(n: usize, dx: f64, order: usize, boundary: Boundary) -> Tables {
    let radius = (order / 2) as i64;
    let ni = n as i64;
    let periodic = boundary == Boundary::Periodic;
    let row = |i: i64, lo: i64, hi: i64, deriv: usize, scale: f64| -> Stencil {
        let w = offset_weights(lo, hi, deriv);
        let pairs: Vec<(usize, f64)> = (lo..=hi)
            .zip(w)
            .map(|(o, w)| ((i + o).rem_euclid(ni) as usize, w * scale))
            .collect();
        Stencil::new(&pairs)
    };
    // window [lo, hi] of `width` points, centred if possible, shifted inside otherwise
    let window = |i: i64, half: i64, width: i64| -> (i64, i64) {
        if periodic {
            return (-half, half);
        }
        let mut lo = -half;
        let mut hi = -half + width - 1;
        if i + lo < 0 {
            lo = -i;
            hi = lo + width - 1;
        }
        if i + hi > ni - 1 {
            hi = ni - 1 - i;
            lo = hi - width + 1;
        }
        (lo, hi)
    };
    let centred = |i: i64, half: i64| periodic || (i - half >= 0 && i + half <= ni - 1);

    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut dissipation = Vec::with_capacity(n);
    let ko_r = order / 2 + 1;
    let ko_base = undivided_even_difference(ko_r);
    let ko_sign = if (ko_r + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let ko_scale = ko_sign / (2f64.powi(2 * ko_r as i32) * dx);
    for i in 0..ni {
        let (lo, hi) = if centred(i, radius) {
            (-radius, radius)
        } else {
            window(i, radius, order as i64 + 1)
        };
        d1.push(row(i, lo, hi, 1, 1.0 / dx));
        let (lo, hi) = if centred(i, radius) {
            (-radius, radius)
        } else {
            window(i, radius, order as i64 + 2)
        };
        d2.push(row(i, lo, hi, 2, 1.0 / (dx * dx)));
        let kr = ko_r as i64;
        dissipation.push(if centred(i, kr) {
            let pairs: Vec<(usize, f64)> = (-kr..=kr)
                .zip(ko_base.iter())
                .map(|(o, w)| ((i + o).rem_euclid(ni) as usize, w * ko_scale))
                .collect();
            Some(Stencil::new(&pairs))
        } else {
            None
        });
    }
    Tables { d1, d2, dissipation }
}
