//! Mean-value iteration for the normalized p-Laplacian.
//!
//! For `p ≥ 2` one step is `u ← w·½(max + min)_{∂B_ρ} u + (1−w)·avg_{B_ρ} u`; for
//! `p < 2` the midrange is replaced by an average over the segment orthogonal
//! to the gradient. Weights and the step `δt` follow from matching the
//! second-order Taylor terms with `Δu + (p−2)⟨D²u ν, ν⟩`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::field::{FieldMeta, GridField};
use super::lattice::Lattice;
use super::{GridSpec, OperatorKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::operators::{normalized_p_laplacian, Jet};

const CIRCLE_POINTS: usize = 32;

#[derive(Clone, Debug)]
pub struct MeanValueScheme {
    pub p: f64,
    pub n: usize,
    pub m: usize,
    pub h: f64,
    /// Weight of the midrange (`p ≥ 2`) or of the orthogonal segment (`p < 2`).
    pub weight: f64,
    pub dt: f64,
    ball: Vec<(i64, i64)>,
    circle: Vec<(f64, f64)>,
}

impl MeanValueScheme {
    pub fn new(p: f64, n: usize, m: usize, h: f64) -> Result<MeanValueScheme> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
        }
        if m == 0 || !(1..=2).contains(&n) {
            return Err(Error::InvalidParameter(format!("mean-value scheme needs n ∈ {{1, 2}} and m ≥ 1, got n={n}, m={m}")));
        }
        let r = m as i64;
        let ball: Vec<(i64, i64)> = if n == 1 {
            (-r..=r).map(|i| (i, 0)).collect()
        } else {
            (-r..=r).flat_map(|i| (-r..=r).map(move |j| (i, j))).filter(|(i, j)| i * i + j * j <= r * r).collect()
        };
        // second moment of one coordinate over the lattice ball
        let mu2 = ball.iter().map(|&(i, _)| (i as f64 * h).powi(2)).sum::<f64>() / ball.len() as f64;
        let rho = m as f64 * h;
        let (weight, dt) = if p >= 2.0 {
            let w = (p - 2.0) * mu2 / (rho * rho + (p - 2.0) * mu2);
            (w, (1.0 - w) * mu2 / 2.0)
        } else if n == 1 {
            (0.0, mu2 / (2.0 * (p - 1.0)))
        } else {
            let seg = h * h * (m * (m + 1)) as f64 / 3.0;
            let th = (2.0 - p) * mu2 / ((p - 1.0) * seg + (2.0 - p) * mu2);
            (th, (1.0 - th) * mu2 / (2.0 * (p - 1.0)))
        };
        let circle =
            (0..CIRCLE_POINTS).map(|k| 2.0 * PI * k as f64 / CIRCLE_POINTS as f64).map(|a| (m as f64 * a.cos(), m as f64 * a.sin())).collect();
        let s = MeanValueScheme { p, n, m, h, weight, dt, ball, circle };
        s.check_consistency()?;
        Ok(s)
    }

    /// Applies the scheme to `u = c·x₁ + ½(x₁² + β x₂²)` and compares with `(p−1) + β`.
    fn check_consistency(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.weight) || !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("inconsistent mean-value weights w={}, dt={}", self.weight, self.dt)));
        }
        let beta = if self.n == 2 { 0.5 } else { 0.0 };
        let r = self.m as i64 + 2;
        let dims = if self.n == 1 { vec![(2 * r + 1) as usize] } else { vec![(2 * r + 1) as usize; 2] };
        let origin = vec![-(r as f64) * self.h; self.n];
        let lat = Lattice { dims, origin, h: self.h };
        let c = 1e3 * self.m as f64 * self.h;
        let u: Vec<f64> = (0..lat.len())
            .map(|i| {
                let x = lat.point(i);
                let y = if self.n == 2 { x[1] } else { 0.0 };
                c * x[0] + 0.5 * (x[0] * x[0] + beta * y * y)
            })
            .collect();
        let centre = lat.node_at(&vec![0.0; self.n]).expect("patch is centred");
        let got = (self.average(&u, &lat, centre) - u[centre]) / self.dt;
        let want = (self.p - 1.0) + beta;
        if (got - want).abs() > 1e-3 * want.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!("mean-value weights inconsistent: {got} vs {want}")));
        }
        Ok(())
    }

    fn at(u: &[f64], lat: &Lattice, i: usize, di: i64, dj: i64) -> f64 {
        u[(i as isize + lat.offset(&[di, dj][..lat.dim()])) as usize]
    }

    fn bilinear(u: &[f64], lat: &Lattice, i: usize, x: f64, y: f64) -> f64 {
        let (fx, fy) = (x.floor(), y.floor());
        let (ax, ay) = (x - fx, y - fy);
        let (ix, iy) = (fx as i64, fy as i64);
        let mut v = 0.0;
        for (dx, wx) in [(0, 1.0 - ax), (1, ax)] {
            for (dy, wy) in [(0, 1.0 - ay), (1, ay)] {
                let w = wx * wy;
                if w != 0.0 {
                    v += w * Self::at(u, lat, i, ix + dx, iy + dy);
                }
            }
        }
        v
    }

    /// The mean-value combination at node `i` (without the lazy mixing).
    fn average(&self, u: &[f64], lat: &Lattice, i: usize) -> f64 {
        let ball = self.ball.iter().map(|&(a, b)| Self::at(u, lat, i, a, b)).sum::<f64>() / self.ball.len() as f64;
        if self.weight == 0.0 {
            return ball;
        }
        let other = if self.p >= 2.0 {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            if self.n == 1 {
                for &(a, _) in &self.ball {
                    let v = Self::at(u, lat, i, a, 0);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            } else {
                for &(x, y) in &self.circle {
                    let v = Self::bilinear(u, lat, i, x, y);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            0.5 * (lo + hi)
        } else {
            self.orthogonal_segment(u, lat, i)
        };
        self.weight * other + (1.0 - self.weight) * ball
    }

    fn orthogonal_segment(&self, u: &[f64], lat: &Lattice, i: usize) -> f64 {
        let g = [
            Self::at(u, lat, i, 1, 0) - Self::at(u, lat, i, -1, 0),
            Self::at(u, lat, i, 0, 1) - Self::at(u, lat, i, 0, -1),
        ];
        let gn = g[0].hypot(g[1]);
        let r = self.m as i64;
        let count = (2 * r + 1) as f64;
        if !(gn > 1e-12 * u[i].abs().max(1e-300)) {
            // degenerate: average of the two axis segments
            let s: f64 = (-r..=r).map(|k| Self::at(u, lat, i, k, 0) + Self::at(u, lat, i, 0, k)).sum();
            return s / (2.0 * count);
        }
        let tau = (-g[1] / gn, g[0] / gn);
        (-r..=r).map(|k| Self::bilinear(u, lat, i, k as f64 * tau.0, k as f64 * tau.1)).sum::<f64>() / count
    }
}

/// Solves the p-Laplacian problem by the mean-value iteration with ball radius `eps = m·hx`.
pub fn mean_value_solve(problem: &ProblemSpec, grid: &GridSpec, eps: f64) -> Result<GridField> {
    let p = match problem.operator {
        OperatorKind::PLaplacian { p } => p,
        _ => return Err(Error::InvalidParameter("mean-value iteration needs a p-Laplacian problem".into())),
    };
    let m = (eps / grid.hx).round();
    if m < 1.0 || (m * grid.hx - eps).abs() > 1e-9 * eps {
        return Err(Error::InvalidParameter(format!("ε = {eps} must be a positive multiple of hx = {}", grid.hx)));
    }
    let m = m as usize;
    let dom = &grid.cylinder.base;
    let n = dom.dim();
    let scheme = MeanValueScheme::new(p, n, m, grid.hx)?;
    let lat = Lattice::for_domain(dom, grid.hx, m + 2)?;
    let mask = lat.mask(dom);
    lat.check_reach(&mask, m + 1)?;
    let n_save = grid.n_save();
    let horizon = grid.cylinder.horizon;
    let steps = ((horizon / scheme.dt).ceil() as usize).div_ceil(n_save).max(1) * n_save;
    let dt = horizon / steps as f64;
    let lazy = dt / scheme.dt;
    let save_every = steps / n_save;
    let mut u = problem.initial.on_lattice(dom, &lat, problem.lateral)?;
    let mut next = vec![0.0; u.len()];
    let mut times = vec![0.0];
    let mut data = u.clone();
    for j in 0..steps {
        next.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = if mask[i] { lazy * scheme.average(&u, &lat, i) + (1.0 - lazy) * u[i] } else { problem.lateral };
        });
        if let Some(index) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, step: j + 1 });
        }
        std::mem::swap(&mut u, &mut next);
        if (j + 1) % save_every == 0 {
            times.push((j + 1) as f64 * dt);
            data.extend_from_slice(&u);
        }
    }
    let meta = FieldMeta {
        label: format!("mean_value(p={p}, eps={eps})"),
        problem: problem.name(),
        domain: dom.clone(),
        ell: problem.effective_ell()?,
        seed: None,
        lateral: problem.lateral,
    };
    Ok(GridField { lattice: lat, ht: dt, horizon, times, data, meta })
}

fn quad(jet: &Jet, y: &[f64]) -> f64 {
    let lin: f64 = jet.grad.iter().zip(y).map(|(g, v)| g * v).sum();
    jet.value + lin + 0.5 * jet.hess.quad_form(y)
}

/// Extremum of `θ ↦ q(ρ(cos θ, sin θ))`: 256 samples, then a ternary search around the best.
fn circle_extremum(jet: &Jet, rho: f64, maximize: bool) -> f64 {
    let f = |a: f64| {
        let v = quad(jet, &[rho * a.cos(), rho * a.sin()]);
        if maximize {
            v
        } else {
            -v
        }
    };
    let k = 256;
    let step = 2.0 * PI / k as f64;
    let best = (0..k).map(|i| i as f64 * step).fold((0.0, f64::NEG_INFINITY), |b, a| if f(a) > b.1 { (a, f(a)) } else { b }).0;
    let (mut lo, mut hi) = (best - step, best + step);
    for _ in 0..100 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let v = f(0.5 * (lo + hi));
    if maximize {
        v
    } else {
        -v
    }
}

/// `|(MV_ε q − q(0))/δt − Δ_p^N q|` for the quadratic `q` with the given jet, using
/// continuous balls, spheres and segments of radius `eps`.
pub fn mean_value_consistency_check(p: f64, jet: &Jet, eps: f64) -> Result<f64> {
    let n = jet.dim();
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("consistency check supports n ∈ {{1, 2}}, got {n}")));
    }
    let g = jet.grad_norm();
    if !(g > crate::operators::gradient_threshold(&jet.hess)) || g == 0.0 {
        return Err(Error::Precondition("consistency check needs |Du| above the gradient threshold".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be positive, got {eps}")));
    }
    let target = normalized_p_laplacian(jet, p, &[])?.lo;
    let nf = n as f64;
    let tr = jet.hess.trace();
    let r2 = eps * eps;
    // average of a quadratic over the ball of radius ε
    let c = 1.0 / (2.0 * (nf + 2.0));
    let ball = jet.value + c * r2 * tr;
    let (mv, dt) = if p >= 2.0 {
        let mid = if n == 1 {
            0.5 * (quad(jet, &[eps]) + quad(jet, &[-eps]))
        } else {
            0.5 * (circle_extremum(jet, eps, true) + circle_extremum(jet, eps, false))
        };
        let alpha = (p - 2.0) / (p + nf);
        (alpha * mid + (1.0 - alpha) * ball, r2 / (2.0 * (nf + p)))
    } else if n == 1 {
        (ball, c * r2 / (p - 1.0))
    } else {
        let tau = [-jet.grad[1] / g, jet.grad[0] / g];
        let seg = jet.value + r2 / 6.0 * jet.hess.quad_form(&tau);
        let th = 6.0 * c * (2.0 - p) / ((p - 1.0) + 6.0 * c * (2.0 - p));
        (th * seg + (1.0 - th) * ball, (1.0 - th) * c * r2 / (p - 1.0))
    };
    Ok(((mv - jet.value) / dt - target).abs())
}
