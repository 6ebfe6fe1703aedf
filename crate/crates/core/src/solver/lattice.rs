use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Lattice vectors of the wide stencil in 2-D. Consecutive pairs are orthogonal
/// frames: axes, diagonals and the two knight-move frames.
pub const DIRECTIONS_2D: [(i64, i64); 8] = [(1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (-1, 2), (1, 2), (-2, 1)];
pub const FRAMES_2D: [(usize, usize); 4] = [(0, 1), (2, 3), (4, 5), (6, 7)];

/// Uniform lattice over a padded bounding box; index `ix + nx·iy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub dims: Vec<usize>,
    pub origin: Vec<f64>,
    pub h: f64,
}

impl Lattice {
    /// Covers the domain's bounding box with `pad` ghost layers on every side.
    pub fn for_domain(dom: &DomainSpec, h: f64, pad: usize) -> Result<Lattice> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("lattice step must be positive, got {h}")));
        }
        let bbox = dom.bounding_box();
        let mut dims = Vec::new();
        let mut origin = Vec::new();
        for (lo, hi) in bbox {
            let cells = ((hi - lo) / h - 1e-9).ceil().max(1.0) as usize;
            dims.push(cells + 1 + 2 * pad);
            origin.push(lo - pad as f64 * h);
        }
        if dims.iter().product::<usize>() > 50_000_000 {
            return Err(Error::InvalidParameter(format!("lattice {dims:?} too large")));
        }
        Ok(Lattice { dims, origin, h })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        self.dims
            .iter()
            .map(|&n| {
                let c = rem % n;
                rem /= n;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (c, n) in coords.iter().zip(&self.dims) {
            idx += c * stride;
            stride *= n;
        }
        idx
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.coords(idx).iter().zip(&self.origin).map(|(&c, o)| o + c as f64 * self.h).collect()
    }

    /// Flat offset of a lattice vector.
    pub fn offset(&self, v: &[i64]) -> isize {
        let mut off = 0isize;
        let mut stride = 1isize;
        for (c, &n) in v.iter().zip(&self.dims) {
            off += *c as isize * stride;
            stride *= n as isize;
        }
        off
    }

    /// Nearest lattice index if `x` is a lattice point up to `1e-9·h`.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let mut coords = Vec::with_capacity(self.dim());
        for ((xi, o), &n) in x.iter().zip(&self.origin).zip(&self.dims) {
            let f = (xi - o) / self.h;
            let r = f.round();
            if (f - r).abs() > 1e-9 || r < 0.0 || r as usize >= n {
                return None;
            }
            coords.push(r as usize);
        }
        Some(self.index(&coords))
    }

    /// Multilinear interpolation; `None` outside the lattice.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> Option<f64> {
        let n = self.dim();
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for ((xi, o), &d) in x.iter().zip(&self.origin).zip(&self.dims) {
            let f = (xi - o) / self.h;
            if f < -1e-9 || f > (d - 1) as f64 + 1e-9 {
                return None;
            }
            let f = f.clamp(0.0, (d - 1) as f64);
            let i = (f.floor() as usize).min(d.saturating_sub(2));
            base.push(i);
            frac.push(f - i as f64);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut c = base.clone();
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    c[k] += 1;
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * values[self.index(&c)];
            }
        }
        Some(acc)
    }

    /// Interior mask (`x ∈ Ω`, open set).
    pub fn mask(&self, dom: &DomainSpec) -> Vec<bool> {
        (0..self.len()).map(|i| dom.contains(&self.point(i))).collect()
    }

    /// Checks that every interior node keeps `reach` lattice layers to the array edge.
    pub fn check_reach(&self, mask: &[bool], reach: usize) -> Result<()> {
        for (i, &m) in mask.iter().enumerate() {
            if m {
                let c = self.coords(i);
                if c.iter().zip(&self.dims).any(|(&ci, &n)| ci < reach || ci + reach >= n) {
                    return Err(Error::InvalidParameter("lattice padding too small for the stencil".into()));
                }
            }
        }
        Ok(())
    }
}
