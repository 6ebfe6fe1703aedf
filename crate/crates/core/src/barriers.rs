//! Cone, wedge, exponential and power barriers, with sampled certificates of
//! their differential inequalities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Cylinder, DomainSpec, PointTime, Region};
use crate::operators::{extremal_operator, pucci_extremal, Ellipticity, Interval, Jet, Side, SymMatrix};

/// Safety factor applied to the critical homogeneity exponent.
pub const ALPHA_SAFETY: f64 = 0.9;
pub const DEFAULT_KAPPA: u32 = 3;

const SEARCH_STEPS: usize = 2000;
const TABLE_STEPS: usize = 4000;

/// Sampling density for margin reports: `max(min_per_axis, ⌈per_unit·extent⌉)` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDensity {
    pub per_unit: f64,
    pub min_per_axis: usize,
}

impl Default for SampleDensity {
    fn default() -> Self {
        SampleDensity { per_unit: 64.0, min_per_axis: 33 }
    }
}

impl SampleDensity {
    /// Refines by an integer factor so that the coarse lattice stays a sub-lattice.
    pub fn refined(&self, factor: usize) -> Self {
        SampleDensity {
            per_unit: self.per_unit * factor as f64,
            min_per_axis: (self.min_per_axis - 1) * factor + 1,
        }
    }
}

// ---------------------------------------------------------------------------
// angular profile

/// Quintic Hermite table of `g, g', g''` on a uniform angle grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub step: f64,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d2g: Vec<f64>,
}

impl ProfileTable {
    pub fn end(&self) -> f64 {
        self.step * (self.g.len() - 1) as f64
    }

    /// `(g, g', g'')` of the interpolant; clamps to the table range.
    pub fn eval(&self, psi: f64) -> (f64, f64, f64) {
        let n = self.g.len() - 1;
        let x = (psi / self.step).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        let h = self.step;
        let (y0, y1) = (self.g[i], self.g[i + 1]);
        let (d0, d1) = (h * self.dg[i], h * self.dg[i + 1]);
        let (s0, s1) = (h * h * self.d2g[i], h * h * self.d2g[i + 1]);
        let (t2, t3, t4, t5) = (t * t, t * t * t, t * t * t * t, t * t * t * t * t);
        // basis values, first and second derivatives in t
        let b = [
            (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5, -30.0 * t2 + 60.0 * t3 - 30.0 * t4, -60.0 * t + 180.0 * t2 - 120.0 * t3),
            (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5, 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4, -36.0 * t + 96.0 * t2 - 60.0 * t3),
            (
                0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
                t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
                1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
            ),
            (0.5 * t3 - t4 + 0.5 * t5, 1.5 * t2 - 4.0 * t3 + 2.5 * t4, 3.0 * t - 12.0 * t2 + 10.0 * t3),
            (-4.0 * t3 + 7.0 * t4 - 3.0 * t5, -12.0 * t2 + 28.0 * t3 - 15.0 * t4, -24.0 * t + 84.0 * t2 - 60.0 * t3),
            (10.0 * t3 - 15.0 * t4 + 6.0 * t5, 30.0 * t2 - 60.0 * t3 + 30.0 * t4, 60.0 * t - 180.0 * t2 + 120.0 * t3),
        ];
        let c = [y0, d0, s0, s1, d1, y1];
        let (mut v, mut dv, mut d2v) = (0.0, 0.0, 0.0);
        for (ck, bk) in c.iter().zip(&b) {
            v += ck * bk.0;
            dv += ck * bk.1;
            d2v += ck * bk.2;
        }
        (v, dv / h, d2v / (h * h))
    }
}

/// Normalized Hessian `ρ^{2−α} D²φ` of `φ = ρ^α g(ψ)` in the (radial, angular) frame.
fn profile_hessian(alpha: f64, g: f64, dg: f64, d2g: f64) -> SymMatrix {
    SymMatrix::from_rows(&[
        &[alpha * (alpha - 1.0) * g, (alpha - 1.0) * dg],
        &[(alpha - 1.0) * dg, alpha * g + d2g],
    ])
}

/// Solves `P⁺(H̃(g, g', x)) = −σg` for `x = g''`. The left side is increasing in
/// `x` with slope in `[λ, Λ]`, which gives a tight initial bracket.
fn solve_second_derivative(alpha: f64, sigma: f64, g: f64, dg: f64, ell: &Ellipticity) -> f64 {
    let f = |x: f64| pucci_extremal(&profile_hessian(alpha, g, dg, x), ell, Side::Plus) + sigma * g;
    let f0 = f(0.0);
    if f0 == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = if f0 > 0.0 { (-f0 / ell.lambda, -f0 / ell.big_lambda) } else { (-f0 / ell.big_lambda, -f0 / ell.lambda) };
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Shot {
    zero: Option<f64>,
    table: ProfileTable,
}

/// RK4 on `g'' = G(g, g')` from `g(0) = 1, g'(0) = 0` up to `end` or the first zero of `g`.
fn shoot(alpha: f64, sigma: f64, ell: &Ellipticity, end: f64, steps: usize) -> Shot {
    let h = end / steps as f64;
    let rhs = |g: f64, dg: f64| (dg, solve_second_derivative(alpha, sigma, g, dg, ell));
    let (mut g, mut dg) = (1.0, 0.0);
    let mut table = ProfileTable { step: h, g: vec![g], dg: vec![dg], d2g: vec![rhs(g, dg).1] };
    for i in 0..steps {
        let k1 = rhs(g, dg);
        let k2 = rhs(g + 0.5 * h * k1.0, dg + 0.5 * h * k1.1);
        let k3 = rhs(g + 0.5 * h * k2.0, dg + 0.5 * h * k2.1);
        let k4 = rhs(g + h * k3.0, dg + h * k3.1);
        let gn = g + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        let dgn = dg + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if gn <= 0.0 {
            let zero = h * (i as f64 + g / (g - gn));
            return Shot { zero: Some(zero), table };
        }
        g = gn;
        dg = dgn;
        table.g.push(g);
        table.dg.push(dg);
        table.d2g.push(rhs(g, dg).1);
    }
    Shot { zero: None, table }
}

fn first_zero(alpha: f64, sigma: f64, ell: &Ellipticity) -> f64 {
    shoot(alpha, sigma, ell, std::f64::consts::PI, SEARCH_STEPS).zero.unwrap_or(f64::INFINITY)
}

/// Homogeneity `α*` at which the σ = 0 profile first vanishes exactly at the aperture.
pub fn critical_exponent(aperture: f64, ell: &Ellipticity) -> Result<f64> {
    let mut lo = 1e-3;
    if first_zero(lo, 0.0, ell) <= aperture {
        return Err(Error::ShootingFailed { residual: first_zero(lo, 0.0, ell) - aperture });
    }
    let mut hi = 1.0;
    while first_zero(hi, 0.0, ell) > aperture {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::ShootingFailed { residual: first_zero(hi, 0.0, ell) - aperture });
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if first_zero(mid, 0.0, ell) > aperture {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------------------
// cone barrier

/// `φ(x) = |x|^α g(arccos(x_n/|x|))` on the cone of half-aperture θ about the last axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBarrier {
    pub dim: usize,
    pub aperture: f64,
    pub alpha: f64,
    pub alpha_critical: f64,
    /// Angular eigenvalue shift: `P⁺(H̃) = −σg` along the profile.
    pub sigma: f64,
    pub zero_angle: f64,
    pub profile: ProfileTable,
    pub r0: f64,
    pub c: f64,
    pub mu1: f64,
    pub k: f64,
    /// `a_ij D_ij φ ≤ −A|x|^{α−2}`
    pub a_const: f64,
    /// `|Dφ| ≤ B|x|^{α−1}`
    pub b_const: f64,
    pub ell: Ellipticity,
}

/// Builds the two-dimensional cone barrier by shooting on the angular equation.
pub fn solve_cone_profile(aperture: f64, ell: &Ellipticity) -> Result<ConeBarrier> {
    ell.validate()?;
    if !(aperture > 0.0 && aperture < std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!("aperture must lie in (0, π), got {aperture}")));
    }
    let alpha_critical = critical_exponent(aperture, ell)?;
    let alpha = ALPHA_SAFETY * alpha_critical;
    let psi0 = first_zero(alpha, 0.0, ell).min(std::f64::consts::PI);
    let target = 0.5 * (aperture + psi0);
    let zero = |sigma: f64| first_zero(alpha, sigma, ell);
    let (mut lo, mut hi) = (0.0, 1.0);
    while zero(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::ShootingFailed { residual: zero(hi) - target });
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if zero(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    // the lower end keeps the zero at or beyond the target
    let sigma = lo;
    if !(sigma > 0.0) {
        return Err(Error::ShootingFailed { residual: zero(sigma) - target });
    }
    // tabulate short of the zero so the profile stays positive on [0, θ]
    let shot = shoot(alpha, sigma, ell, 0.5 * (aperture + target), TABLE_STEPS);
    if let Some(zero) = shot.zero {
        return Err(Error::ShootingFailed { residual: zero - target });
    }
    let mut bar = ConeBarrier {
        dim: 2,
        aperture,
        alpha,
        alpha_critical,
        sigma,
        zero_angle: target,
        profile: shot.table,
        r0: 0.0,
        c: 0.0,
        mu1: 0.0,
        k: 0.0,
        a_const: 0.0,
        b_const: 0.0,
        ell: *ell,
    };
    bar.measure_constants()?;
    Ok(bar)
}

impl ConeBarrier {
    /// Reuses the planar profile on the axisymmetric slice in dimension 3.
    pub fn lifted(&self, dim: usize) -> Result<ConeBarrier> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("cone barriers support n ∈ {{2, 3}}, got {dim}")));
        }
        let mut b = self.clone();
        b.dim = dim;
        b.measure_constants()?;
        Ok(b)
    }

    fn normalized_hessian_eigs(&self, psi: f64) -> Vec<f64> {
        let (g, dg, d2g) = self.profile.eval(psi);
        let mut eig = profile_hessian(self.alpha, g, dg, d2g).eigenvalues();
        if self.dim == 3 {
            let s = psi.sin();
            let extra = if s.abs() < 1e-12 { d2g } else { psi.cos() / s * dg };
            eig.push(self.alpha * g + extra);
        }
        eig
    }

    fn measure_constants(&mut self) -> Result<()> {
        // four samples per table cell plus the aperture itself
        let n = (4.0 * self.aperture / self.profile.step).ceil() as usize;
        let mut a_min = f64::INFINITY;
        let (mut b_max, mut g_max, mut g_min) = (0.0f64, 0.0f64, f64::INFINITY);
        for i in 0..=n {
            let psi = (0.25 * i as f64 * self.profile.step).min(self.aperture);
            let eig = self.normalized_hessian_eigs(psi);
            let p = crate::operators::pucci_from_eigenvalues(&eig, self.ell.lambda, self.ell.big_lambda, Side::Plus);
            let (g, dg, _) = self.profile.eval(psi);
            a_min = a_min.min(-p);
            b_max = b_max.max((self.alpha * self.alpha * g * g + dg * dg).sqrt());
            g_max = g_max.max(g);
            g_min = g_min.min(g);
        }
        if !(a_min > 0.0) || !(g_min > 0.0) {
            return Err(Error::ShootingFailed { residual: a_min.min(g_min) });
        }
        self.a_const = a_min;
        self.b_const = b_max;
        self.r0 = if self.ell.a > 0.0 { (a_min / (2.0 * self.ell.a * b_max)).min(0.5) } else { 0.5 };
        self.k = a_min / 2.0;
        self.c = g_max;
        self.mu1 = self.r0.powf(self.alpha) * g_min;
        Ok(())
    }

    fn axis(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[self.dim - 1] = 1.0;
        e
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho == 0.0 {
            return 0.0;
        }
        let psi = (x[self.dim - 1] / rho).clamp(-1.0, 1.0).acos();
        rho.powf(self.alpha) * self.profile.eval(psi).0
    }

    /// Jet of φ away from the vertex.
    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        let n = self.dim;
        if x.len() != n {
            return Err(Error::InvalidParameter("point dimension mismatch".into()));
        }
        let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho == 0.0 {
            return Err(Error::Precondition("cone barrier jet is singular at the vertex".into()));
        }
        let e: Vec<f64> = x.iter().map(|v| v / rho).collect();
        let c = e[n - 1].clamp(-1.0, 1.0);
        let psi = c.acos();
        let s = psi.sin();
        let tau: Vec<f64> = if s > 1e-12 {
            (0..n).map(|i| (c * e[i] - if i == n - 1 { 1.0 } else { 0.0 }) / s).collect()
        } else {
            let mut t = vec![0.0; n];
            t[0] = 1.0;
            t
        };
        let (g, dg, d2g) = self.profile.eval(psi);
        let a = self.alpha;
        let ra1 = rho.powf(a - 1.0);
        let ra2 = rho.powf(a - 2.0);
        let grad: Vec<f64> = (0..n).map(|i| ra1 * (a * g * e[i] + dg * tau[i])).collect();
        let side = if n == 3 { a * g + if s > 1e-12 { c / s * dg } else { d2g } } else { 0.0 };
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                let v = a * (a - 1.0) * g * e[i] * e[j]
                    + (a - 1.0) * dg * (e[i] * tau[j] + tau[i] * e[j])
                    + (a * g + d2g) * tau[i] * tau[j]
                    + side * (id - e[i] * e[j] - tau[i] * tau[j]);
                m.set(i, j, ra2 * v);
            }
        }
        Ok(Jet::new(rho.powf(a) * g, grad, m, 0.0))
    }

    pub fn region(&self) -> Region {
        Region::Cone { vertex: vec![0.0; self.dim], axis: self.axis(), aperture: self.aperture, radius: self.r0 }
    }
}

// ---------------------------------------------------------------------------
// wedge barrier

/// `ψ(x,t) = φ(x) + (K/2κ)|t|^κ`, rescaled to radius `r` as `ψ(R0x/r, R0²t/r²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeBarrier {
    pub cone: ConeBarrier,
    pub kappa: u32,
    pub r: f64,
    /// Measured `C` in `ψ ≤ C((|x| + |t|^{1/2})/r)^α`.
    pub c: f64,
    pub mu: f64,
}

pub fn build_wedge_barrier(cone: &ConeBarrier, r: f64, kappa: u32) -> Result<WedgeBarrier> {
    if !(r > 0.0) || r > cone.r0 * (1.0 + 1e-14) {
        return Err(Error::InvalidParameter(format!("wedge radius {r} must lie in (0, R0 = {}]", cone.r0)));
    }
    if kappa <= 2 {
        return Err(Error::InvalidParameter(format!("κ must be an integer > 2, got {kappa}")));
    }
    let k2 = cone.k / (2.0 * kappa as f64);
    let mu = cone.mu1.min(k2 * cone.r0.powi(2 * kappa as i32));
    let mut w = WedgeBarrier { cone: cone.clone(), kappa, r, c: 0.0, mu };
    let mut c = 0.0f64;
    for z in w.region().interior_samples(0.0, 21) {
        let d = (z.x.iter().map(|v| v * v).sum::<f64>().sqrt() + z.t.abs().sqrt()) / r;
        if d > 0.0 {
            c = c.max(w.value(&z) / d.powf(cone.alpha));
        }
    }
    w.c = c;
    Ok(w)
}

impl WedgeBarrier {
    pub fn scale(&self) -> f64 {
        self.cone.r0 / self.r
    }

    fn unscaled(&self, z: &PointTime) -> PointTime {
        let s = self.scale();
        PointTime::new(z.x.iter().map(|v| s * v).collect(), s * s * z.t)
    }

    fn time_part(&self, t: f64) -> (f64, f64) {
        let kk = self.kappa as f64;
        let k = self.cone.k;
        (k / (2.0 * kk) * t.abs().powi(self.kappa as i32), 0.5 * k * t.abs().powi(self.kappa as i32 - 1) * t.signum())
    }

    pub fn value(&self, z: &PointTime) -> f64 {
        let y = self.unscaled(z);
        self.cone.value(&y.x) + self.time_part(y.t).0
    }

    /// Jet of the unscaled ψ at the rescaled point.
    pub fn base_jet(&self, z: &PointTime) -> Result<Jet> {
        let y = self.unscaled(z);
        let mut j = self.cone.jet(&y.x)?;
        let (v, vt) = self.time_part(y.t);
        j.value += v;
        j.time = Interval::point(vt);
        Ok(j)
    }

    pub fn jet(&self, z: &PointTime) -> Result<Jet> {
        let s = self.scale();
        let b = self.base_jet(z)?;
        let mut j = Jet::new(b.value, b.grad.iter().map(|g| s * g).collect(), b.hess.scale(s * s), s * s * b.time.lo);
        j.time = Interval::point(s * s * b.time.lo);
        Ok(j)
    }

    pub fn region(&self) -> Region {
        Region::Wedge {
            vertex: vec![0.0; self.cone.dim],
            tau: 0.0,
            axis: self.cone.axis(),
            aperture: self.cone.aperture,
            radius: self.r,
        }
    }

    /// `([L⁺ψ₁ − ψ₁_t](z), (R0²/r²)[P⁺(D²ψ) + (r/R0)a|Dψ| − ψ_t](rescaled z))`.
    pub fn residual_identity(&self, z: &PointTime, ell: &Ellipticity) -> Result<(f64, f64)> {
        let j1 = self.jet(z)?;
        let lhs = pucci_extremal(&j1.hess, ell, Side::Plus) + ell.a * j1.grad_norm() - j1.time.lo;
        let j = self.base_jet(z)?;
        let s = self.scale();
        let rhs = s * s * (pucci_extremal(&j.hess, ell, Side::Plus) + ell.a * j.grad_norm() / s - j.time.lo);
        Ok((lhs, rhs))
    }
}

// ---------------------------------------------------------------------------
// exponential and power barriers

/// `h = γ(exp(−αR²/r²) − exp(−α/16))`, `R² = |x−ξ₁|² + |t−s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpBarrier {
    pub xi1: Vec<f64>,
    pub s: f64,
    pub r: f64,
    pub gamma: f64,
    pub alpha: f64,
}

impl ExpBarrier {
    pub fn new(xi1: Vec<f64>, s: f64, r: f64, gamma: f64, alpha: f64) -> Result<Self> {
        if !(r > 0.0 && gamma > 0.0 && alpha > 0.0) {
            return Err(Error::InvalidParameter("exponential barrier needs r, γ, α > 0".into()));
        }
        Ok(ExpBarrier { xi1, s, r, gamma, alpha })
    }

    pub fn value(&self, z: &PointTime) -> f64 {
        let w2: f64 = z.x.iter().zip(&self.xi1).map(|(a, b)| (a - b) * (a - b)).sum();
        let r2 = self.r * self.r;
        self.gamma * ((-self.alpha * (w2 + (z.t - self.s).abs()) / r2).exp() - (-self.alpha / 16.0).exp())
    }

    /// Closed-form jet; the time derivative is an interval at `t = s`.
    pub fn jet(&self, z: &PointTime) -> Jet {
        let n = self.xi1.len();
        let w: Vec<f64> = z.x.iter().zip(&self.xi1).map(|(a, b)| a - b).collect();
        let w2: f64 = w.iter().map(|v| v * v).sum();
        let r2 = self.r * self.r;
        let (a, g) = (self.alpha, self.gamma);
        let e = (-a * (w2 + (z.t - self.s).abs()) / r2).exp();
        let grad = w.iter().map(|wi| -2.0 * a * g / r2 * wi * e).collect();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                m.set(i, j, (4.0 * a * a * g / (r2 * r2) * w[i] * w[j] - 2.0 * a * g / r2 * id) * e);
            }
        }
        let mag = a * g / r2 * e;
        let dt = z.t - self.s;
        let time = if dt == 0.0 { Interval::new(-mag, mag) } else { Interval::point(-mag * dt.signum()) };
        let mut j = Jet::new(g * (e - (-a / 16.0).exp()), grad, m, 0.0);
        j.time = time;
        j
    }

    /// `C₀ = max_{Φ²_r} (exp(−αR²/r²) − exp(−α/16))`, sampled on the inner lens face.
    pub fn c0(&self, q: &[f64], samples: usize) -> f64 {
        let face = Region::LensBoundary {
            q: q.to_vec(),
            s: self.s,
            r: self.r,
            xi1: self.xi1.clone(),
            face: geometry::LensFace::Inner,
        };
        face.boundary_samples(samples).iter().map(|z| self.value(z) / self.gamma).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `f = 1 − γ(r²/R₁²)^k`, `γ = 256^{−k}`, `R₁² = |x−ξ₂|² + |t−s|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBarrier {
    pub xi2: Vec<f64>,
    pub s: f64,
    pub r: f64,
    pub k: f64,
    pub gamma: f64,
    /// Lower bound of `|x−ξ₂|²/R₁²` on the verification region.
    pub c5: f64,
}

impl PowerBarrier {
    pub fn new(xi2: Vec<f64>, s: f64, r: f64, k: f64, c5: f64) -> Result<Self> {
        if !(r > 0.0 && k > 0.0) {
            return Err(Error::InvalidParameter("power barrier needs r, k > 0".into()));
        }
        Ok(PowerBarrier { xi2, s, r, k, gamma: 256f64.powf(-k), c5 })
    }

    fn r1_sq(&self, z: &PointTime) -> f64 {
        z.x.iter().zip(&self.xi2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() + (z.t - self.s).abs()
    }

    pub fn value(&self, z: &PointTime) -> Result<f64> {
        let r1 = self.r1_sq(z);
        if r1 == 0.0 {
            return Err(Error::Precondition("power barrier is singular at (ξ₂, s)".into()));
        }
        Ok(1.0 - self.gamma * (self.r * self.r / r1).powf(self.k))
    }

    pub fn jet(&self, z: &PointTime) -> Result<Jet> {
        let r1 = self.r1_sq(z);
        if r1 == 0.0 {
            return Err(Error::Precondition("power barrier is singular at (ξ₂, s)".into()));
        }
        let n = self.xi2.len();
        let w: Vec<f64> = z.x.iter().zip(&self.xi2).map(|(a, b)| a - b).collect();
        let (g, k) = (self.gamma, self.k);
        let q = (self.r * self.r / r1).powf(k);
        let grad = w.iter().map(|wi| 2.0 * g * k * q * wi / r1).collect();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                m.set(i, j, -4.0 * g * k * q * (k + 1.0) / (r1 * r1) * w[i] * w[j] + 2.0 * g * k * q * id / r1);
            }
        }
        let mag = g * k * q / r1;
        let dt = z.t - self.s;
        let time = if dt == 0.0 { Interval::new(-mag, mag) } else { Interval::point(mag * dt.signum()) };
        let mut j = Jet::new(1.0 - g * q, grad, m, 0.0);
        j.time = time;
        Ok(j)
    }
}

// ---------------------------------------------------------------------------
// verification

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Barrier {
    Cone(ConeBarrier),
    Wedge(WedgeBarrier),
    Exp(ExpBarrier),
    Power(PowerBarrier),
}

impl Barrier {
    pub fn name(&self) -> &'static str {
        match self {
            Barrier::Cone(_) => "cone",
            Barrier::Wedge(_) => "wedge",
            Barrier::Exp(_) => "exp",
            Barrier::Power(_) => "power",
        }
    }

    pub fn parameter(&self) -> f64 {
        match self {
            Barrier::Cone(c) => c.alpha,
            Barrier::Wedge(w) => w.cone.alpha,
            Barrier::Exp(e) => e.alpha,
            Barrier::Power(p) => p.k,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Barrier::Cone(c) => c.dim,
            Barrier::Wedge(w) => w.cone.dim,
            Barrier::Exp(e) => e.xi1.len(),
            Barrier::Power(p) => p.xi2.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    /// `L⁻u − u_t ≥ 0`
    SubsolutionOfLminus,
    /// `L⁺u − u_t < 0` (for the cone: `L⁺φ ≤ −K|x|^{α−2}`)
    SupersolutionOfLplus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub barrier: String,
    pub region: String,
    pub ell: Ellipticity,
    pub parameter: f64,
    pub min_margin: f64,
    pub argmin: PointTime,
    pub samples: usize,
    pub pass: bool,
}

impl MarginReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("margin report serializes")
    }
}

const MARGIN_RTOL: f64 = 1e-12;

/// Signed margin (positive when the requirement holds) and the magnitude used
/// to scale the pass tolerance.
fn sample_margin(bar: &Barrier, z: &PointTime, ell: &Ellipticity) -> Result<(f64, f64)> {
    match bar {
        Barrier::Cone(c) => {
            let j = c.jet(&z.x)?;
            let rho = z.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let p = pucci_extremal(&j.hess, ell, Side::Plus);
            let lower = ell.a * j.grad_norm() + ell.b * j.value.abs();
            let norm = rho.powf(2.0 - c.alpha);
            Ok((-(p + lower) * norm - c.k, (p.abs() + lower) * norm + c.k))
        }
        Barrier::Wedge(w) => {
            let j = w.jet(z)?;
            let p = pucci_extremal(&j.hess, ell, Side::Plus);
            let lower = ell.a * j.grad_norm() + ell.b * j.value.abs();
            Ok((-(p + lower - j.time.lo), p.abs() + lower + j.time.lo.abs()))
        }
        Barrier::Exp(e) => {
            let j = e.jet(z);
            let l = extremal_operator(&j, ell, Side::Minus);
            Ok((l - j.time.hi, l.abs() + j.time.hi.abs()))
        }
        Barrier::Power(p) => {
            let j = p.jet(z)?;
            let l = extremal_operator(&j, ell, Side::Plus);
            Ok((-(l - j.time.lo), l.abs() + j.time.lo.abs()))
        }
    }
}

fn region_dim(region: &Region) -> usize {
    match region {
        Region::PsiBox { q, .. } | Region::SurfaceBall { q, .. } | Region::Lens { q, .. } | Region::LensBoundary { q, .. } => q.len(),
        Region::ParabolicBall { center, .. } | Region::HarnackBox { center, .. } => center.len(),
        Region::Cone { vertex, .. } | Region::Wedge { vertex, .. } => vertex.len(),
        Region::ShrunkCylinder { cylinder, .. } | Region::InteriorSlab { cylinder, .. } => cylinder.base.dim(),
        Region::Intersection(parts) => parts.first().map(region_dim).unwrap_or(0),
    }
}

/// Samples of the region (grid points inside plus boundary samples), in a fixed order.
pub fn margin_samples(region: &Region, density: SampleDensity) -> Vec<PointTime> {
    let mut pts = region.interior_samples(density.per_unit, density.min_per_axis);
    pts.extend(region.boundary_samples(density.min_per_axis));
    pts
}

/// Evaluates the requirement at every sample and reports the minimum margin.
pub fn verify_differential_inequality(
    bar: &Barrier,
    region: &Region,
    ell: &Ellipticity,
    requirement: Requirement,
    density: SampleDensity,
) -> Result<MarginReport> {
    ell.validate()?;
    let mismatch = |m: &str| Err(Error::RegionMismatch(m.to_string()));
    if region_dim(region) != bar.dim() {
        return mismatch("region and barrier dimensions differ");
    }
    let expected = match bar {
        Barrier::Exp(_) => Requirement::SubsolutionOfLminus,
        _ => Requirement::SupersolutionOfLplus,
    };
    if requirement != expected {
        return mismatch("barrier does not certify the requested side");
    }
    match (bar, region) {
        (Barrier::Cone(c), Region::Cone { aperture, radius, .. }) if *aperture <= c.aperture && *radius <= c.r0 * (1.0 + 1e-12) => {}
        (Barrier::Cone(_), _) => return mismatch("cone barrier needs its own truncated cone"),
        (Barrier::Wedge(w), Region::Wedge { aperture, radius, .. }) if *aperture <= w.cone.aperture && *radius <= w.r * (1.0 + 1e-12) => {}
        (Barrier::Wedge(_), _) => return mismatch("wedge barrier needs its own parabolic wedge"),
        (Barrier::Power(p), _) if region.contains_closure(&PointTime::new(p.xi2.clone(), p.s), 0.0) => {
            return mismatch("region contains the singular point (ξ₂, s)")
        }
        _ => {}
    }
    let mut pts = margin_samples(region, density);
    if matches!(bar, Barrier::Cone(_) | Barrier::Wedge(_)) {
        let cut = 1e-12 * bar_radius(bar);
        pts.retain(|z| z.x.iter().map(|v| v * v).sum::<f64>().sqrt() > cut);
    }
    if pts.is_empty() {
        return Err(Error::InsufficientPoints(format!("no samples in {}", region.name())));
    }
    let evals: Vec<(f64, bool)> = pts
        .par_iter()
        .map(|z| {
            let (m, scale) = sample_margin(bar, z, ell)?;
            let ok = match bar {
                Barrier::Wedge(_) | Barrier::Power(_) => m > MARGIN_RTOL * scale,
                _ => m >= -MARGIN_RTOL * scale,
            };
            Ok((m, ok))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..evals.len() {
        let (mi, mb) = (evals[i].0, evals[best].0);
        if mi < mb || (mi == mb && lex_less(&pts[i], &pts[best])) {
            best = i;
        }
    }
    Ok(MarginReport {
        barrier: bar.name().to_string(),
        region: region.name().to_string(),
        ell: *ell,
        parameter: bar.parameter(),
        min_margin: evals[best].0,
        argmin: pts[best].clone(),
        samples: pts.len(),
        pass: evals.iter().all(|e| e.1),
    })
}

fn bar_radius(bar: &Barrier) -> f64 {
    match bar {
        Barrier::Cone(c) => c.r0,
        Barrier::Wedge(w) => w.r,
        Barrier::Exp(e) => e.r,
        Barrier::Power(p) => p.r,
    }
}

fn lex_less(a: &PointTime, b: &PointTime) -> bool {
    for (x, y) in a.x.iter().zip(&b.x) {
        if x != y {
            return x < y;
        }
    }
    a.t < b.t
}

// ---------------------------------------------------------------------------
// calibration

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    ExpAlpha,
    PowerK,
}

/// Boundary point and scale at which the exponential and power barriers are calibrated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSetup {
    pub cylinder: Cylinder,
    pub q: Vec<f64>,
    pub s: f64,
    pub r: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    1.0
}

impl CalibrationSetup {
    fn check(&self, ell: &Ellipticity) -> Result<()> {
        if ell.a > 0.0 && self.r > 1.0 / (4.0 * ell.a) {
            return Err(Error::Precondition(format!("r = {} exceeds 1/(4a) = {}", self.r, 1.0 / (4.0 * ell.a))));
        }
        Ok(())
    }

    fn xi(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        geometry::xi_points_unchecked(&self.cylinder.base, &self.q, self.r)
    }

    /// `S_r(Q,s)`
    pub fn lens(&self) -> Result<Region> {
        Ok(Region::Lens { q: self.q.clone(), s: self.s, r: self.r, xi1: self.xi()?.0 })
    }

    /// `Ψ_r(Q,s) ∩ P_{r/8}(ξ₂, s)`
    pub fn power_region(&self) -> Result<Region> {
        Ok(Region::Intersection(vec![
            Region::PsiBox { cylinder: self.cylinder.clone(), q: self.q.clone(), s: self.s, r: self.r },
            Region::ParabolicBall { center: self.xi()?.1, tau: self.s, delta: self.r / 8.0 },
        ]))
    }

    /// Sampled `min_{S_r} |x−ξ₁|²/r²`.
    pub fn exp_min_ratio(&self, density: SampleDensity) -> Result<f64> {
        let xi1 = self.xi()?.0;
        let pts = margin_samples(&self.lens()?, density);
        let r2 = self.r * self.r;
        Ok(pts.iter().map(|z| dist2(&z.x, &xi1) / r2).fold(f64::INFINITY, f64::min))
    }

    /// Sampled `C₅ = min |x−ξ₂|²/R₁²` over the power barrier region.
    pub fn c5(&self, density: SampleDensity) -> Result<f64> {
        let xi2 = self.xi()?.1;
        let pts = margin_samples(&self.power_region()?, density);
        if pts.is_empty() {
            return Err(Error::InsufficientPoints("empty power barrier region".into()));
        }
        Ok(pts
            .iter()
            .map(|z| {
                let w2 = dist2(&z.x, &xi2);
                w2 / (w2 + (z.t - self.s).abs())
            })
            .fold(f64::INFINITY, f64::min))
    }

    pub fn exp_barrier(&self, alpha: f64) -> Result<ExpBarrier> {
        ExpBarrier::new(self.xi()?.0, self.s, self.r, self.gamma, alpha)
    }

    pub fn power_barrier(&self, k: f64, c5: f64) -> Result<PowerBarrier> {
        PowerBarrier::new(self.xi()?.1, self.s, self.r, k, c5)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub kind: ExponentKind,
    pub parameter: f64,
    /// Sufficient value from the displayed lower bound on the extremal operator.
    pub analytic_guess: f64,
    /// `min |x−ξ₁|²/r²` for α, `C₅` for k.
    pub geometry_constant: f64,
    pub report: MarginReport,
}

/// Smallest member of `{2, 4, …, 2¹⁶}` whose margin report passes.
pub fn calibrate_exponent(kind: ExponentKind, ell: &Ellipticity, setup: &CalibrationSetup, density: SampleDensity) -> Result<Calibration> {
    ell.validate()?;
    setup.check(ell)?;
    let n = setup.q.len() as f64;
    let (region, requirement, constant) = match kind {
        ExponentKind::ExpAlpha => (setup.lens()?, Requirement::SubsolutionOfLminus, setup.exp_min_ratio(density)?),
        ExponentKind::PowerK => (setup.power_region()?, Requirement::SupersolutionOfLplus, setup.c5(density)?),
    };
    let analytic_guess = match kind {
        // 2αλ·ratio − nΛ ≥ 1
        ExponentKind::ExpAlpha => (1.0 + n * ell.big_lambda) / (2.0 * ell.lambda * constant),
        // 2(k+1)λC₅ − nΛ ≥ 1
        ExponentKind::PowerK => (1.0 + n * ell.big_lambda) / (2.0 * ell.lambda * constant) - 1.0,
    };
    let mut last = None;
    for e in 1..=16 {
        let p = 2f64.powi(e);
        let bar = match kind {
            ExponentKind::ExpAlpha => Barrier::Exp(setup.exp_barrier(p)?),
            ExponentKind::PowerK => Barrier::Power(setup.power_barrier(p, constant)?),
        };
        let report = verify_differential_inequality(&bar, &region, ell, requirement, density)?;
        if report.pass {
            return Ok(Calibration { kind, parameter: p, analytic_guess, geometry_constant: constant, report });
        }
        last = Some(report);
    }
    Err(Error::Calibration(format!(
        "no exponent up to 2^16 passes; last min margin {:e}",
        last.map(|r| r.min_margin).unwrap_or(f64::NAN)
    )))
}

// ---------------------------------------------------------------------------
// property certificates

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCertificate {
    pub value_at_vertex: f64,
    /// `max φ/|x|^α` over samples, to compare with `C`.
    pub growth_ratio: f64,
    pub min_value: f64,
    /// `min φ` on `|x| = R0`, to compare with `μ₁`.
    pub sphere_min: f64,
    pub margin: MarginReport,
    pub pass: bool,
}

pub fn certify_cone(c: &ConeBarrier, ell: &Ellipticity, density: SampleDensity) -> Result<ConeCertificate> {
    let region = c.region();
    let margin = verify_differential_inequality(&Barrier::Cone(c.clone()), &region, ell, Requirement::SupersolutionOfLplus, density)?;
    let mut growth: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    for z in margin_samples(&region, density) {
        let rho = z.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = c.value(&z.x);
        min_value = min_value.min(v);
        if rho > 0.0 {
            growth = growth.max(v / rho.powf(c.alpha));
        }
    }
    let sphere_min = sphere_points(c, c.r0, density.min_per_axis * 4).iter().map(|x| c.value(x)).fold(f64::INFINITY, f64::min);
    let value_at_vertex = c.value(&vec![0.0; c.dim]);
    let pass = margin.pass
        && value_at_vertex == 0.0
        && min_value >= 0.0
        && growth <= c.c * (1.0 + 1e-9)
        && sphere_min >= c.mu1 * (1.0 - 1e-12);
    Ok(ConeCertificate { value_at_vertex, growth_ratio: growth, min_value, sphere_min, margin, pass })
}

fn sphere_points(c: &ConeBarrier, radius: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let psi = -c.aperture + 2.0 * c.aperture * k as f64 / (count - 1) as f64;
            let mut x = vec![0.0; c.dim];
            x[0] = radius * psi.sin();
            x[c.dim - 1] = radius * psi.cos();
            x
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeCertificate {
    pub r: f64,
    pub value_at_vertex: f64,
    pub min_value: f64,
    /// `max ψ/((|x| + |t|^{1/2})/r)^α`, against `C`.
    pub growth_ratio: f64,
    /// `min ψ` on `|x| = r` and `t = −r²`, against `μ`.
    pub face_min: f64,
    pub mu: f64,
    pub identity_max_error: f64,
    pub margin: MarginReport,
    pub pass: bool,
}

/// Properties 1)–4) of the wedge barrier plus the rescaling residual identity.
pub fn certify_wedge(w: &WedgeBarrier, ell: &Ellipticity, density: SampleDensity) -> Result<WedgeCertificate> {
    let region = w.region();
    let bar = Barrier::Wedge(w.clone());
    let margin = verify_differential_inequality(&bar, &region, ell, Requirement::SupersolutionOfLplus, density)?;
    let pts = margin_samples(&region, density);
    let alpha = w.cone.alpha;
    let (mut min_value, mut growth, mut ident): (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0);
    for z in &pts {
        let v = w.value(z);
        min_value = min_value.min(v);
        let rho = z.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d = (rho + z.t.abs().sqrt()) / w.r;
        if d > 0.0 {
            growth = growth.max(v / d.powf(alpha));
        }
        if rho > 1e-12 * w.r {
            let (lhs, rhs) = w.residual_identity(z, ell)?;
            ident = ident.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    let r2 = w.r * w.r;
    let mut face_min = f64::INFINITY;
    let nt = density.min_per_axis;
    for k in 0..nt {
        let t = -r2 + 2.0 * r2 * k as f64 / (nt - 1) as f64;
        for x in sphere_points(&w.cone, w.r, density.min_per_axis * 2) {
            face_min = face_min.min(w.value(&PointTime::new(x, t)));
        }
    }
    let probe = Region::Cone { vertex: vec![0.0; w.cone.dim], axis: w.cone.axis(), aperture: w.cone.aperture, radius: w.r };
    for z in probe.interior_samples(density.per_unit, density.min_per_axis) {
        face_min = face_min.min(w.value(&PointTime::new(z.x, -r2)));
    }
    let value_at_vertex = w.value(&PointTime::new(vec![0.0; w.cone.dim], 0.0));
    let pass = margin.pass
        && value_at_vertex == 0.0
        && min_value >= 0.0
        && growth <= w.c * (1.0 + 1e-9) + 1e-300
        && face_min >= w.mu * (1.0 - 1e-12)
        && ident <= 1e-8;
    Ok(WedgeCertificate {
        r: w.r,
        value_at_vertex,
        min_value,
        growth_ratio: growth,
        face_min,
        mu: w.mu,
        identity_max_error: ident,
        margin,
        pass,
    })
}

/// Flat model configuration: a stadium whose bottom edge runs along `x₂ = 0` near the origin.
pub fn flat_model_setup(s: f64, r: f64, horizon: f64) -> Result<CalibrationSetup> {
    let base = DomainSpec::Stadium { center: vec![0.0, 1.0], side: 2.0, corner_radius: 0.5 };
    Ok(CalibrationSetup { cylinder: Cylinder::new(base, horizon)?, q: vec![0.0, 0.0], s, r, gamma: 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn lap() -> Ellipticity {
        Ellipticity::pucci(1.0, 1.0).unwrap()
    }

    fn check_jet_fd<F: Fn(&[f64]) -> f64>(f: F, j: &Jet, x: &[f64]) {
        let h = 1e-5;
        let n = x.len();
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f(&xp) - f(&xm)) / (2.0 * h);
            let scale = j.grad_norm().max(1e-300);
            assert!((fd - j.grad[i]).abs() / scale < 1e-6, "grad {i}: {fd} vs {}", j.grad[i]);
        }
        let hs = j.hess.spectral_scale().max(1e-300);
        for i in 0..n {
            for k in 0..n {
                let mut pts = [x.to_vec(), x.to_vec(), x.to_vec(), x.to_vec()];
                pts[0][i] += h;
                pts[0][k] += h;
                pts[1][i] += h;
                pts[1][k] -= h;
                pts[2][i] -= h;
                pts[2][k] += h;
                pts[3][i] -= h;
                pts[3][k] -= h;
                let fd = (f(&pts[0]) - f(&pts[1]) - f(&pts[2]) + f(&pts[3])) / (4.0 * h * h);
                assert!((fd - j.hess.get(i, k)).abs() / hs < 1e-6, "hess {i}{k}: {fd} vs {}", j.hess.get(i, k));
            }
        }
    }

    #[test]
    fn exp_barrier_jets_match_differences() {
        let bar = ExpBarrier::new(vec![0.0, 0.04], 0.5, 0.16, 1.0, 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = vec![rng.gen_range(-0.05..0.05), rng.gen_range(0.0..0.08)];
            let t = 0.5 + rng.gen_range(0.001..0.005) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let z = PointTime::new(x.clone(), t);
            let j = bar.jet(&z);
            check_jet_fd(|y| bar.value(&PointTime::new(y.to_vec(), t)), &j, &x);
            let ht = 1e-7;
            let fd = (bar.value(&PointTime::new(x.clone(), t + ht)) - bar.value(&PointTime::new(x.clone(), t - ht))) / (2.0 * ht);
            assert!((fd - j.time.lo).abs() < 1e-5 * j.time.lo.abs());
        }
    }

    #[test]
    fn exp_barrier_special_values() {
        let bar = ExpBarrier::new(vec![0.0, 0.25], 0.3, 1.0, 2.0, 16.0).unwrap();
        let on = PointTime::new(vec![0.25, 0.25], 0.3);
        assert!(bar.value(&on).abs() < 1e-15);
        let on_t = PointTime::new(vec![0.0, 0.25], 0.3 + 1.0 / 16.0);
        assert!(bar.value(&on_t).abs() < 1e-15);
        let c = bar.jet(&PointTime::new(vec![0.0, 0.25], 0.3));
        assert!((c.value - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(c.grad, vec![0.0, 0.0]);
        assert!(!c.time.is_point() && (c.time.hi - 32.0).abs() < 1e-12);
    }

    #[test]
    fn exp_barrier_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let c: f64 = rng.gen_range(0.1..3.0);
            let b1 = ExpBarrier::new(vec![0.1, 0.2], 0.4, 0.3, 1.0, 20.0).unwrap();
            let b2 = ExpBarrier::new(vec![0.1 * c, 0.2 * c], 0.4 * c * c, 0.3 * c, 1.0, 20.0).unwrap();
            let z = PointTime::new(vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)], rng.gen_range(0.0..1.0));
            let zc = PointTime::new(z.x.iter().map(|v| v * c).collect(), z.t * c * c);
            assert!((b1.value(&z) - b2.value(&zc)).abs() < 1e-13);
        }
    }

    #[test]
    fn power_barrier_jets_and_values() {
        let bar = PowerBarrier::new(vec![0.0, -0.01], 0.5, 0.16, 8.0, 0.25).unwrap();
        let f0 = bar.value(&PointTime::new(vec![0.0, 0.0], 0.5)).unwrap();
        assert!(f0.abs() < 1e-12, "{f0}");
        let edge = PointTime::new(vec![0.02, -0.01], 0.5);
        assert!((bar.value(&edge).unwrap() - (1.0 - 2f64.powi(-16))).abs() < 1e-12);
        let edge_t = PointTime::new(vec![0.0, -0.01], 0.5 - 0.0004);
        assert!((bar.value(&edge_t).unwrap() - (1.0 - 2f64.powi(-16))).abs() < 1e-12);
        assert!(bar.jet(&PointTime::new(vec![0.0, -0.01], 0.5)).is_err());
        // unit radius keeps the difference truncation error below the tolerance
        let bar = PowerBarrier::new(vec![0.0, -1.0 / 16.0], 0.5, 1.0, 2.0, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = vec![rng.gen_range(-0.1..0.1), rng.gen_range(0.0..0.06)];
            let t = 0.5 + rng.gen_range(1e-3..1e-2) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let j = bar.jet(&PointTime::new(x.clone(), t)).unwrap();
            check_jet_fd(|y| bar.value(&PointTime::new(y.to_vec(), t)).unwrap(), &j, &x);
            let ht = 1e-9;
            let fd = (bar.value(&PointTime::new(x.clone(), t + ht)).unwrap() - bar.value(&PointTime::new(x.clone(), t - ht)).unwrap())
                / (2.0 * ht);
            assert!((fd - j.time.lo).abs() < 1e-5 * j.time.lo.abs(), "{fd} vs {}", j.time.lo);
        }
    }

    #[test]
    fn profile_interpolant_is_consistent() {
        let tab = ProfileTable {
            step: 0.1,
            g: (0..11).map(|i| (0.1 * i as f64).cos()).collect(),
            dg: (0..11).map(|i| -(0.1 * i as f64).sin()).collect(),
            d2g: (0..11).map(|i| -(0.1 * i as f64).cos()).collect(),
        };
        for k in 0..100 {
            let x = 0.0099 * k as f64;
            let (g, dg, d2g) = tab.eval(x);
            assert!((g - x.cos()).abs() < 1e-9 && (dg + x.sin()).abs() < 1e-7 && (d2g + x.cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn critical_exponent_laplacian() {
        for omega in [PI, 1.25 * PI, 1.5 * PI] {
            let a = critical_exponent(omega / 2.0, &lap()).unwrap();
            assert!((a - PI / omega).abs() < 1e-4 * PI / omega, "{a}");
        }
    }

    #[test]
    fn half_plane_cone_barrier() {
        let c = solve_cone_profile(PI / 2.0, &lap()).unwrap();
        assert!((c.alpha - 0.9).abs() < 1e-4);
        assert!(c.mu1 > 0.0 && c.k > 0.0 && c.r0 == 0.5);
        let cert = certify_cone(&c, &lap(), SampleDensity::default()).unwrap();
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn cone_jet_matches_differences() {
        let ell = Ellipticity::new(0.5, 2.0, 1.0, 0.0).unwrap();
        let c = solve_cone_profile(2.0, &ell).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2, 3] {
            let c = c.lifted(dim).unwrap_or_else(|_| { let mut b = c.clone(); b.dim = dim; b });
            for _ in 0..50 {
                let rho = rng.gen_range(0.05..0.4);
                let psi: f64 = rng.gen_range(0.1..1.9);
                let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                let x = if dim == 2 {
                    vec![rho * psi.sin() * phi.cos().signum(), rho * psi.cos()]
                } else {
                    vec![rho * psi.sin() * phi.cos(), rho * psi.sin() * phi.sin(), rho * psi.cos()]
                };
                let j = c.jet(&x).unwrap();
                assert!((j.value - c.value(&x)).abs() < 1e-14);
                check_jet_fd(|y| c.value(y), &j, &x);
            }
        }
    }

    #[test]
    fn cone_barrier_with_drift() {
        let ell = Ellipticity::new(0.5, 2.0, 1.0, 0.0).unwrap();
        let c = solve_cone_profile(2.2, &ell).unwrap();
        assert!(c.r0 <= c.a_const / (2.0 * c.b_const) + 1e-15);
        let cert = certify_cone(&c, &ell, SampleDensity::default()).unwrap();
        assert!(cert.pass, "{cert:?}");
    }

    #[test]
    fn wedge_barrier_properties() {
        let ell = Ellipticity::new(1.0, 1.0, 0.5, 0.0).unwrap();
        let c = solve_cone_profile(0.75 * PI, &ell).unwrap();
        for r in [c.r0, 0.3 * c.r0] {
            let w = build_wedge_barrier(&c, r, DEFAULT_KAPPA).unwrap();
            let cert = certify_wedge(&w, &ell, SampleDensity::default()).unwrap();
            assert!(cert.pass, "{cert:?}");
        }
        assert!(build_wedge_barrier(&c, 2.0 * c.r0, 3).is_err());
        assert!(build_wedge_barrier(&c, c.r0, 2).is_err());
    }

    #[test]
    fn wedge_rescaling_is_pointwise() {
        let c = solve_cone_profile(2.0, &lap()).unwrap();
        let w1 = build_wedge_barrier(&c, 0.1, 3).unwrap();
        let w0 = build_wedge_barrier(&c, c.r0, 3).unwrap();
        let s = c.r0 / 0.1;
        let z = PointTime::new(vec![0.01, 0.05], -0.004);
        let zs = PointTime::new(vec![0.01 * s, 0.05 * s], -0.004 * s * s);
        assert_eq!(w1.value(&z), w0.value(&zs));
    }

    #[test]
    fn exp_calibration_flat_laplacian() {
        let setup = flat_model_setup(0.5, 0.16, 1.0).unwrap();
        let cal = calibrate_exponent(ExponentKind::ExpAlpha, &lap(), &setup, SampleDensity::default()).unwrap();
        assert!((cal.geometry_constant - 1.0 / 64.0).abs() < 1e-12);
        assert!((cal.analytic_guess - 96.0).abs() < 1e-9);
        assert_eq!(cal.parameter, 128.0);
        let lens = setup.lens().unwrap();
        let bad = Barrier::Exp(setup.exp_barrier(2.0).unwrap());
        let rep = verify_differential_inequality(&bad, &lens, &lap(), Requirement::SubsolutionOfLminus, SampleDensity::default()).unwrap();
        assert!(!rep.pass && rep.min_margin < 0.0);
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        for key in ["barrier", "region", "ell", "parameter", "min_margin", "argmin", "samples", "pass"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn power_calibration_flat_laplacian() {
        let setup = flat_model_setup(0.5, 0.16, 1.0).unwrap();
        let cal = calibrate_exponent(ExponentKind::PowerK, &lap(), &setup, SampleDensity::default()).unwrap();
        assert!((cal.geometry_constant - 0.25).abs() < 1e-12, "{}", cal.geometry_constant);
        assert_eq!(cal.parameter, 8.0);
        assert!(2.0 * (cal.parameter + 1.0) * cal.geometry_constant > 2.0);
    }

    #[test]
    fn calibration_respects_drift_scale() {
        let setup = flat_model_setup(0.5, 0.16, 1.0).unwrap();
        let ell = Ellipticity::new(1.0, 1.0, 4.0, 0.0).unwrap();
        assert!(matches!(
            calibrate_exponent(ExponentKind::ExpAlpha, &ell, &setup, SampleDensity::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mismatched_regions_are_rejected() {
        let setup = flat_model_setup(0.5, 0.16, 1.0).unwrap();
        let bar = Barrier::Exp(setup.exp_barrier(128.0).unwrap());
        let r = verify_differential_inequality(&bar, &setup.lens().unwrap(), &lap(), Requirement::SupersolutionOfLplus, SampleDensity::default());
        assert!(matches!(r, Err(Error::RegionMismatch(_))));
        let c = solve_cone_profile(2.0, &lap()).unwrap();
        let r = verify_differential_inequality(&Barrier::Cone(c), &setup.lens().unwrap(), &lap(), Requirement::SupersolutionOfLplus, SampleDensity::default());
        assert!(matches!(r, Err(Error::RegionMismatch(_))));
    }
}
