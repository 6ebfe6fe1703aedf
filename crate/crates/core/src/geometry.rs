//! Cylinder bases, boundary neighbourhoods and the special points used by the
//! boundary estimates.
//!
//! Bases are one- or two-dimensional. Points are plain `Vec<f64>` / `&[f64]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for "lies on ∂Ω".
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// `(0, length)` in one dimension.
    Interval { length: f64 },
    Disk {
        #[serde(default = "origin2")]
        center: Vec<f64>,
        radius: f64,
    },
    /// Axis-aligned square; corners make it Lipschitz but not C^{1,1}.
    Square {
        #[serde(default = "origin2")]
        center: Vec<f64>,
        side: f64,
    },
    /// Square with rounded corners of radius `corner_radius`.
    Stadium {
        #[serde(default = "origin2")]
        center: Vec<f64>,
        side: f64,
        corner_radius: f64,
    },
    /// `{ρ < radius, 0 < θ < aperture}` with vertex at the origin; reentrant when aperture > π.
    Sector { aperture: f64, radius: f64 },
    /// `{|x₁| < half_width, φ(x₁) < x₂ < height}` with a sawtooth graph φ of slope ±m.
    Sawtooth {
        slope: f64,
        period: f64,
        half_width: f64,
        height: f64,
        r0: f64,
    },
}

fn origin2() -> Vec<f64> {
    vec![0.0, 0.0]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn axpy(a: &[f64], c: f64, v: &[f64]) -> Vec<f64> {
    a.iter().zip(v).map(|(x, y)| x + c * y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn angle_2pi(x: &[f64]) -> f64 {
    let th = x[1].atan2(x[0]);
    if th < 0.0 {
        th + 2.0 * PI
    } else {
        th
    }
}

fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ax = sub(x, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 { (dot(&ax, &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm(&sub(&ax, &ab.iter().map(|v| v * t).collect::<Vec<_>>()))
}

impl DomainSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match self {
            DomainSpec::Interval { length } if !(*length > 0.0) => bad("interval length must be positive"),
            DomainSpec::Disk { center, radius } if center.len() != 2 || !(*radius > 0.0) => {
                bad("disk needs a 2-D center and positive radius")
            }
            DomainSpec::Square { center, side } if center.len() != 2 || !(*side > 0.0) => {
                bad("square needs a 2-D center and positive side")
            }
            DomainSpec::Stadium { center, side, corner_radius }
                if center.len() != 2 || !(*side > 0.0) || !(*corner_radius > 0.0) || *corner_radius > side / 2.0 =>
            {
                bad("stadium needs 0 < corner_radius ≤ side/2")
            }
            DomainSpec::Sector { aperture, radius } if !(*aperture > 0.0 && *aperture < 2.0 * PI) || !(*radius > 0.0) => {
                bad("sector aperture must lie in (0, 2π) and radius be positive")
            }
            DomainSpec::Sawtooth { slope, period, half_width, height, r0 }
                if *slope < 0.0 || !(*period > 0.0) || !(*half_width > 0.0) || !(*r0 > 0.0)
                    || *height <= slope * period / 2.0 =>
            {
                bad("sawtooth needs m ≥ 0, positive period/width/r0 and height above the teeth")
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Interval { .. } => "interval",
            DomainSpec::Disk { .. } => "disk",
            DomainSpec::Square { .. } => "square",
            DomainSpec::Stadium { .. } => "stadium",
            DomainSpec::Sector { .. } => "sector",
            DomainSpec::Sawtooth { .. } => "sawtooth",
        }
    }

    /// Characteristic length used to scale geometric tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            DomainSpec::Interval { length } => *length,
            DomainSpec::Disk { radius, .. } => *radius,
            DomainSpec::Square { side, .. } | DomainSpec::Stadium { side, .. } => *side,
            DomainSpec::Sector { radius, .. } => *radius,
            DomainSpec::Sawtooth { half_width, height, .. } => half_width.max(*height),
        }
    }

    fn tol(&self) -> f64 {
        BOUNDARY_TOL * self.scale()
    }

    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            DomainSpec::Interval { length } => vec![(0.0, *length)],
            DomainSpec::Disk { center, radius } => {
                vec![(center[0] - radius, center[0] + radius), (center[1] - radius, center[1] + radius)]
            }
            DomainSpec::Square { center, side } | DomainSpec::Stadium { center, side, .. } => {
                let h = side / 2.0;
                vec![(center[0] - h, center[0] + h), (center[1] - h, center[1] + h)]
            }
            DomainSpec::Sector { aperture, radius } => {
                // extremes among the arc endpoints, the vertex and axis crossings inside the arc
                let mut xs = vec![0.0, *radius, radius * aperture.cos()];
                let mut ys = vec![0.0, 0.0, radius * aperture.sin()];
                for k in 1..4 {
                    let th = k as f64 * PI / 2.0;
                    if th < *aperture {
                        xs.push(radius * th.cos());
                        ys.push(radius * th.sin());
                    }
                }
                let mm = |v: &[f64]| {
                    (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                };
                vec![mm(&xs), mm(&ys)]
            }
            DomainSpec::Sawtooth { half_width, height, .. } => vec![(-half_width, *half_width), (0.0, *height)],
        }
    }

    /// Sawtooth graph φ(x₁) (zero for other kinds).
    pub fn graph(&self, x1: f64) -> f64 {
        match self {
            DomainSpec::Sawtooth { slope, period, .. } => {
                let r = x1.rem_euclid(*period);
                slope * (period / 2.0 - (r - period / 2.0).abs())
            }
            _ => 0.0,
        }
    }

    /// Open-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Interval { length } => x[0] > 0.0 && x[0] < *length,
            DomainSpec::Disk { center, radius } => norm(&sub(x, center)) < *radius,
            DomainSpec::Square { center, side } => {
                let h = side / 2.0;
                (x[0] - center[0]).abs() < h && (x[1] - center[1]).abs() < h
            }
            DomainSpec::Stadium { .. } => self.stadium_sdf(x) < 0.0,
            DomainSpec::Sector { aperture, radius } => {
                let r = norm(x);
                if r == 0.0 || r >= *radius {
                    return false;
                }
                let th = angle_2pi(x);
                th > 0.0 && th < *aperture
            }
            DomainSpec::Sawtooth { half_width, height, .. } => {
                x[0].abs() < *half_width && x[1] < *height && x[1] > self.graph(x[0])
            }
        }
    }

    /// Membership in Ω̄ up to the boundary tolerance.
    pub fn contains_closure(&self, x: &[f64]) -> bool {
        self.contains(x) || self.boundary_distance(x) <= self.tol()
    }

    pub fn on_boundary(&self, x: &[f64]) -> bool {
        self.boundary_distance(x) <= self.tol()
    }

    fn stadium_sdf(&self, x: &[f64]) -> f64 {
        if let DomainSpec::Stadium { center, side, corner_radius } = self {
            let inner = side / 2.0 - corner_radius;
            let qx = (x[0] - center[0]).abs() - inner;
            let qy = (x[1] - center[1]).abs() - inner;
            let outside = qx.max(0.0).hypot(qy.max(0.0));
            outside + qx.max(qy).min(0.0) - corner_radius
        } else {
            unreachable!()
        }
    }

    /// Unsigned Euclidean distance to ∂Ω.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Interval { length } => x[0].abs().min((length - x[0]).abs()),
            DomainSpec::Disk { center, radius } => (radius - norm(&sub(x, center))).abs(),
            DomainSpec::Square { center, side } => {
                let h = side / 2.0;
                let qx = (x[0] - center[0]).abs() - h;
                let qy = (x[1] - center[1]).abs() - h;
                let outside = qx.max(0.0).hypot(qy.max(0.0));
                (outside + qx.max(qy).min(0.0)).abs()
            }
            DomainSpec::Stadium { .. } => self.stadium_sdf(x).abs(),
            DomainSpec::Sector { aperture, radius } => {
                let e0 = [*radius, 0.0];
                let e1 = [radius * aperture.cos(), radius * aperture.sin()];
                let o = [0.0, 0.0];
                let d_edges = segment_distance(x, &o, &e0).min(segment_distance(x, &o, &e1));
                let r = norm(x);
                let th = angle_2pi(x);
                let d_arc = if r > 0.0 && th <= *aperture {
                    (radius - r).abs()
                } else {
                    norm(&sub(x, &e0)).min(norm(&sub(x, &e1)))
                };
                d_edges.min(d_arc)
            }
            DomainSpec::Sawtooth { slope, period, half_width, height, .. } => {
                let w = *half_width;
                let mut best = f64::INFINITY;
                // graph pieces between consecutive knots
                let half = period / 2.0;
                let k0 = (-w / half).floor() as i64;
                let k1 = (w / half).ceil() as i64;
                for k in k0..k1 {
                    let a0 = (k as f64 * half).max(-w);
                    let a1 = ((k + 1) as f64 * half).min(w);
                    if a1 <= a0 {
                        continue;
                    }
                    best = best.min(segment_distance(x, &[a0, self.graph(a0)], &[a1, self.graph(a1)]));
                }
                let _ = slope;
                best = best.min(segment_distance(x, &[-w, self.graph(-w)], &[-w, *height]));
                best = best.min(segment_distance(x, &[w, self.graph(w)], &[w, *height]));
                best.min(segment_distance(x, &[-w, *height], &[w, *height]))
            }
        }
    }

    /// Radius of the uniform interior/exterior tangent balls; `None` when the base is not C^{1,1}.
    pub fn tangent_ball_radius(&self) -> Option<f64> {
        match self {
            DomainSpec::Interval { length } => Some(length / 2.0),
            DomainSpec::Disk { radius, .. } => Some(*radius),
            DomainSpec::Stadium { corner_radius, .. } => Some(*corner_radius),
            _ => None,
        }
    }

    /// Scale below which the normal-angle bound and the ξ-ball tangency hold: half the tangent-ball radius.
    pub fn r0_threshold(&self) -> Option<f64> {
        self.tangent_ball_radius().map(|r| r / 2.0)
    }

    /// Radius of the balls in which ∂Ω is a single Lipschitz graph.
    pub fn localization_radius(&self) -> f64 {
        match self {
            DomainSpec::Interval { length } => length / 2.0,
            DomainSpec::Disk { radius, .. } => *radius,
            DomainSpec::Square { side, .. } | DomainSpec::Stadium { side, .. } => side / 2.0,
            DomainSpec::Sector { radius, .. } => *radius,
            DomainSpec::Sawtooth { r0, .. } => *r0,
        }
    }

    /// Lipschitz constant of the local defining graphs.
    pub fn lipschitz_constant(&self) -> f64 {
        match self {
            DomainSpec::Sawtooth { slope, .. } => *slope,
            DomainSpec::Square { .. } => 1.0,
            DomainSpec::Sector { aperture, .. } => {
                // edge slope seen from the bisector frame
                let half = aperture / 2.0;
                (PI / 2.0 - half).abs().tan().abs().max(0.0)
            }
            _ => 0.0,
        }
    }

    /// Interior unit normal at a boundary point where ∂Ω is C^{1,1}.
    pub fn inward_normal(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.dim() {
            return Err(Error::InvalidParameter("point dimension mismatch".into()));
        }
        let tol = self.tol();
        if !self.on_boundary(q) {
            return Err(Error::Precondition(format!("{q:?} is not on the boundary")));
        }
        let undefined = || Err(Error::NormalUndefined(q.to_vec()));
        match self {
            DomainSpec::Interval { length } => Ok(vec![if q[0].abs() <= tol { 1.0 } else if (q[0] - length).abs() <= tol { -1.0 } else { return undefined() }]),
            DomainSpec::Disk { center, radius } => Ok(sub(center, q).iter().map(|v| v / radius).collect()),
            DomainSpec::Square { center, side } => {
                let h = side / 2.0;
                let dx = q[0] - center[0];
                let dy = q[1] - center[1];
                let on_x = (dx.abs() - h).abs() <= tol;
                let on_y = (dy.abs() - h).abs() <= tol;
                match (on_x, on_y) {
                    (true, true) => undefined(),
                    (true, false) => Ok(vec![-dx.signum(), 0.0]),
                    (false, true) => Ok(vec![0.0, -dy.signum()]),
                    _ => undefined(),
                }
            }
            DomainSpec::Stadium { center, side, corner_radius } => {
                let inner = side / 2.0 - corner_radius;
                let dx = q[0] - center[0];
                let dy = q[1] - center[1];
                if dx.abs() > inner && dy.abs() > inner {
                    let c = [center[0] + inner * dx.signum(), center[1] + inner * dy.signum()];
                    let v = sub(&c, q);
                    let n = norm(&v);
                    Ok(v.iter().map(|x| x / n).collect())
                } else if dx.abs() >= dy.abs() {
                    Ok(vec![-dx.signum(), 0.0])
                } else {
                    Ok(vec![0.0, -dy.signum()])
                }
            }
            DomainSpec::Sector { aperture, radius } => {
                let r = norm(q);
                if r <= tol || (r - radius).abs() <= tol && (q[1].abs() <= tol || (angle_2pi(q) - aperture).abs() * radius <= tol) {
                    return undefined();
                }
                if (r - radius).abs() <= tol {
                    return Ok(q.iter().map(|v| -v / r).collect());
                }
                if q[1].abs() <= tol && q[0] > 0.0 {
                    return Ok(vec![0.0, 1.0]);
                }
                Ok(vec![aperture.sin(), -aperture.cos()])
            }
            DomainSpec::Sawtooth { slope, period, half_width, height, .. } => {
                let w = *half_width;
                if (q[0].abs() - w).abs() <= tol {
                    if (q[1] - height).abs() <= tol || (q[1] - self.graph(q[0])).abs() <= tol {
                        return undefined();
                    }
                    return Ok(vec![-q[0].signum(), 0.0]);
                }
                if (q[1] - height).abs() <= tol {
                    return Ok(vec![0.0, -1.0]);
                }
                let half = period / 2.0;
                let frac = (q[0] / half).round() * half;
                if (q[0] - frac).abs() <= tol {
                    return undefined();
                }
                let r = q[0].rem_euclid(*period);
                let d = if r < half { *slope } else { -slope };
                let n = (1.0 + d * d).sqrt();
                Ok(vec![-d / n, 1.0 / n])
            }
        }
    }

    /// Inward direction used for corkscrew offsets: the normal where defined,
    /// the corner bisector at vertices of the square and sector.
    pub fn interior_direction(&self, q: &[f64]) -> Result<Vec<f64>> {
        match self.inward_normal(q) {
            Ok(n) => Ok(n),
            Err(Error::NormalUndefined(_)) => match self {
                DomainSpec::Square { center, .. } => {
                    let v = sub(center, q);
                    let n = norm(&v);
                    Ok(v.iter().map(|x| x / n).collect())
                }
                DomainSpec::Sector { aperture, .. } if norm(q) <= self.tol() => {
                    Ok(vec![(aperture / 2.0).cos(), (aperture / 2.0).sin()])
                }
                DomainSpec::Sawtooth { .. } => Ok(vec![0.0, 1.0]),
                _ => Err(Error::NormalUndefined(q.to_vec())),
            },
            Err(e) => Err(e),
        }
    }

    /// Points on ∂Ω, roughly uniform in arc length.
    pub fn boundary_samples(&self, count: usize) -> Vec<Vec<f64>> {
        let count = count.max(4);
        match self {
            DomainSpec::Interval { length } => vec![vec![0.0], vec![*length]],
            DomainSpec::Disk { center, radius } => (0..count)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / count as f64;
                    vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect(),
            DomainSpec::Square { center, side } => {
                let h = side / 2.0;
                let per = count / 4 + 1;
                let mut out = Vec::new();
                for k in 0..per {
                    let s = -h + side * k as f64 / per as f64;
                    out.push(vec![center[0] + s, center[1] - h]);
                    out.push(vec![center[0] + h, center[1] + s]);
                    out.push(vec![center[0] - s, center[1] + h]);
                    out.push(vec![center[0] - h, center[1] - s]);
                }
                out
            }
            DomainSpec::Stadium { center, side, corner_radius } => {
                let inner = side / 2.0 - corner_radius;
                let flat = 2.0 * inner;
                let arc = PI / 2.0 * corner_radius;
                let total = 4.0 * (flat + arc);
                let mut out = Vec::with_capacity(count);
                for k in 0..count {
                    let mut s = total * k as f64 / count as f64;
                    let mut side_idx = 0;
                    while s >= flat + arc && side_idx < 3 {
                        s -= flat + arc;
                        side_idx += 1;
                    }
                    // local frame for the bottom side, then rotate by side_idx·π/2
                    let (lx, ly) = if s < flat {
                        (-inner + s, -inner - corner_radius)
                    } else {
                        let th = -PI / 2.0 + (s - flat) / corner_radius;
                        (inner + corner_radius * th.cos(), -inner + corner_radius * th.sin())
                    };
                    let rot = side_idx as f64 * PI / 2.0;
                    let (c, sn) = (rot.cos(), rot.sin());
                    out.push(vec![center[0] + c * lx - sn * ly, center[1] + sn * lx + c * ly]);
                }
                out
            }
            DomainSpec::Sector { aperture, radius } => {
                let arc = aperture * radius;
                let total = 2.0 * radius + arc;
                (0..count)
                    .map(|k| {
                        let s = total * k as f64 / count as f64;
                        if s < *radius {
                            vec![s, 0.0]
                        } else if s < radius + arc {
                            let th = (s - radius) / radius;
                            vec![radius * th.cos(), radius * th.sin()]
                        } else {
                            let d = radius - (s - radius - arc);
                            vec![d * aperture.cos(), d * aperture.sin()]
                        }
                    })
                    .collect()
            }
            DomainSpec::Sawtooth { half_width, .. } => {
                let w = *half_width;
                (0..count)
                    .map(|k| {
                        let x = -w + 2.0 * w * k as f64 / count as f64;
                        vec![x, self.graph(x)]
                    })
                    .collect()
            }
        }
    }
}

/// `C_T = Ω × (0, T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub base: DomainSpec,
    pub horizon: f64,
}

impl Cylinder {
    pub fn new(base: DomainSpec, horizon: f64) -> Result<Self> {
        base.validate()?;
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Cylinder { base, horizon })
    }

    pub fn contains_closure(&self, z: &PointTime) -> bool {
        z.t >= 0.0 && z.t <= self.horizon && self.base.contains_closure(&z.x)
    }

    /// `(x,t) ∈ S_T = ∂Ω × (0,T)`.
    pub fn on_lateral(&self, z: &PointTime) -> bool {
        z.t > 0.0 && z.t < self.horizon && self.base.on_boundary(&z.x)
    }

    /// `(x,t) ∈ ∂_p C_T = S_T ∪ (Ω̄ × {0})`.
    pub fn on_parabolic_boundary(&self, z: &PointTime) -> bool {
        self.on_lateral(z) || (z.t == 0.0 && self.base.contains_closure(&z.x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointTime {
    pub x: Vec<f64>,
    pub t: f64,
}

impl PointTime {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        PointTime { x, t }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LensFace {
    /// `∂S_r ∩ ∂P_{r/4}(ξ₁, s)`
    Outer,
    /// `∂S_r ∩ ∂P_{r/8}(Q, s)`
    Inner,
}

/// Space-time regions with exact membership predicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `Ψ_r(Q,s) = {(x,t) ∈ C̄_T : |x−Q| < r, |t−s| < r²}`
    PsiBox { cylinder: Cylinder, q: Vec<f64>, s: f64, r: f64 },
    /// `Δ_r(Q,s) = Ψ_r(Q,s) ∩ ∂_p C_T`
    SurfaceBall { cylinder: Cylinder, q: Vec<f64>, s: f64, r: f64 },
    /// Closed `P_δ(x,τ) = {|x−y|² + |t−τ| ≤ δ²}`
    ParabolicBall { center: Vec<f64>, tau: f64, delta: f64 },
    /// Truncated cone with vertex, unit axis and aperture (angle from the axis).
    Cone { vertex: Vec<f64>, axis: Vec<f64>, aperture: f64, radius: f64 },
    /// `Γ_{θ,r}(vertex) × (τ − r², τ + r²)`
    Wedge { vertex: Vec<f64>, tau: f64, axis: Vec<f64>, aperture: f64, radius: f64 },
    /// `Q(η,r)` shifted to `center`, `t0`: `max|x_i − c_i| ≤ r`, `0 < t − t0 ≤ ηr²`
    HarnackBox { center: Vec<f64>, t0: f64, eta: f64, r: f64 },
    /// `Ω_δ × (δ², T)`
    ShrunkCylinder { cylinder: Cylinder, delta: f64 },
    /// `Ω × (2δ², T − δ²)`
    InteriorSlab { cylinder: Cylinder, delta: f64 },
    /// `S_r(Q,s) = P_{r/8}(Q,s) ∩ P_{r/4}(ξ₁(Q),s)`
    Lens { q: Vec<f64>, s: f64, r: f64, xi1: Vec<f64> },
    LensBoundary { q: Vec<f64>, s: f64, r: f64, xi1: Vec<f64>, face: LensFace },
    Intersection(Vec<Region>),
}

fn in_pball(center: &[f64], tau: f64, delta: f64, z: &PointTime, slack: f64) -> bool {
    let d2: f64 = center.iter().zip(&z.x).map(|(a, b)| (a - b) * (a - b)).sum();
    d2 + (z.t - tau).abs() <= delta * delta + slack
}

fn pball_gap(center: &[f64], tau: f64, delta: f64, z: &PointTime) -> f64 {
    let d2: f64 = center.iter().zip(&z.x).map(|(a, b)| (a - b) * (a - b)).sum();
    d2 + (z.t - tau).abs() - delta * delta
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::PsiBox { .. } => "psi_box",
            Region::SurfaceBall { .. } => "surface_ball",
            Region::ParabolicBall { .. } => "parabolic_ball",
            Region::Cone { .. } => "cone",
            Region::Wedge { .. } => "wedge",
            Region::HarnackBox { .. } => "harnack_box",
            Region::ShrunkCylinder { .. } => "shrunk_cylinder",
            Region::InteriorSlab { .. } => "interior_slab",
            Region::Lens { .. } => "lens",
            Region::LensBoundary { .. } => "lens_boundary",
            Region::Intersection(_) => "intersection",
        }
    }

    /// Exact membership per the region's definition.
    pub fn contains(&self, z: &PointTime) -> bool {
        self.test(z, None)
    }

    /// Membership in the closure, relaxed by `slack` (in length² units for parabolic balls).
    pub fn contains_closure(&self, z: &PointTime, slack: f64) -> bool {
        self.test(z, Some(slack))
    }

    fn test(&self, z: &PointTime, slack: Option<f64>) -> bool {
        let closed = slack.is_some();
        let eps = slack.unwrap_or(0.0);
        let lt = |a: f64, b: f64| if closed { a <= b + eps } else { a < b };
        match self {
            Region::PsiBox { cylinder, q, s, r } => {
                cylinder.contains_closure(z) && lt(norm(&sub(&z.x, q)), *r) && lt((z.t - s).abs(), r * r)
            }
            Region::SurfaceBall { cylinder, q, s, r } => {
                Region::PsiBox { cylinder: cylinder.clone(), q: q.clone(), s: *s, r: *r }.test(z, slack)
                    && cylinder.on_parabolic_boundary(z)
            }
            Region::ParabolicBall { center, tau, delta } => in_pball(center, *tau, *delta, z, eps),
            Region::Cone { vertex, axis, aperture, radius } => cone_member(vertex, axis, *aperture, *radius, &z.x, closed, eps),
            Region::Wedge { vertex, tau, axis, aperture, radius } => {
                let r2 = radius * radius;
                cone_member(vertex, axis, *aperture, *radius, &z.x, closed, eps) && lt(-r2, z.t - tau) && lt(z.t - tau, r2)
            }
            Region::HarnackBox { center, t0, eta, r } => {
                let box_ok = z.x.iter().zip(center).all(|(a, c)| (a - c).abs() <= r + eps);
                let dt = z.t - t0;
                box_ok && lt(0.0, dt) && dt <= eta * r * r + eps
            }
            Region::ShrunkCylinder { cylinder, delta } => {
                let base = &cylinder.base;
                let inside = if closed { base.contains_closure(&z.x) } else { base.contains(&z.x) };
                inside && lt(*delta, base.boundary_distance(&z.x)) && lt(delta * delta, z.t) && lt(z.t, cylinder.horizon)
            }
            Region::InteriorSlab { cylinder, delta } => {
                let base = &cylinder.base;
                let inside = if closed { base.contains_closure(&z.x) } else { base.contains(&z.x) };
                inside && lt(2.0 * delta * delta, z.t) && lt(z.t, cylinder.horizon - delta * delta)
            }
            Region::Lens { q, s, r, xi1 } => in_pball(q, *s, r / 8.0, z, eps) && in_pball(xi1, *s, r / 4.0, z, eps),
            Region::LensBoundary { q, s, r, xi1, face } => {
                let tol = eps.max(1e-12 * r * r);
                let (on, other) = match face {
                    LensFace::Outer => (pball_gap(xi1, *s, r / 4.0, z), pball_gap(q, *s, r / 8.0, z)),
                    LensFace::Inner => (pball_gap(q, *s, r / 8.0, z), pball_gap(xi1, *s, r / 4.0, z)),
                };
                on.abs() <= tol && other <= tol
            }
            Region::Intersection(parts) => parts.iter().all(|p| p.test(z, slack)),
        }
    }

    /// Spatial bounding box and time window.
    pub fn bounding_box(&self) -> (Vec<(f64, f64)>, (f64, f64)) {
        match self {
            Region::PsiBox { cylinder, q, s, r } | Region::SurfaceBall { cylinder, q, s, r } => {
                let dbox = cylinder.base.bounding_box();
                let sp = q.iter().zip(&dbox).map(|(c, (lo, hi))| ((c - r).max(*lo), (c + r).min(*hi))).collect();
                (sp, ((s - r * r).max(0.0), (s + r * r).min(cylinder.horizon)))
            }
            Region::ParabolicBall { center, tau, delta } => (
                center.iter().map(|c| (c - delta, c + delta)).collect(),
                (tau - delta * delta, tau + delta * delta),
            ),
            Region::Cone { vertex, radius, .. } => (vertex.iter().map(|c| (c - radius, c + radius)).collect(), (0.0, 0.0)),
            Region::Wedge { vertex, tau, radius, .. } => (
                vertex.iter().map(|c| (c - radius, c + radius)).collect(),
                (tau - radius * radius, tau + radius * radius),
            ),
            Region::HarnackBox { center, t0, eta, r } => {
                (center.iter().map(|c| (c - r, c + r)).collect(), (*t0, t0 + eta * r * r))
            }
            Region::ShrunkCylinder { cylinder, delta } => (cylinder.base.bounding_box(), (delta * delta, cylinder.horizon)),
            Region::InteriorSlab { cylinder, delta } => {
                (cylinder.base.bounding_box(), (2.0 * delta * delta, cylinder.horizon - delta * delta))
            }
            Region::Lens { q, s, r, .. } | Region::LensBoundary { q, s, r, .. } => {
                let d = r / 8.0;
                (q.iter().map(|c| (c - d, c + d)).collect(), (s - d * d, s + d * d))
            }
            Region::Intersection(parts) => {
                let mut it = parts.iter().map(|p| p.bounding_box());
                let (mut sp, mut tw) = it.next().expect("empty intersection");
                for (s2, t2) in it {
                    for (a, b) in sp.iter_mut().zip(&s2) {
                        a.0 = a.0.max(b.0);
                        a.1 = a.1.min(b.1);
                    }
                    tw = (tw.0.max(t2.0), tw.1.min(t2.1));
                }
                (sp, tw)
            }
        }
    }

    /// Grid samples of the bounding box (at least `min_per_axis` per axis, at
    /// `per_unit` per unit length otherwise) that lie in the region.
    pub fn interior_samples(&self, per_unit: f64, min_per_axis: usize) -> Vec<PointTime> {
        let (sp, tw) = self.bounding_box();
        let counts: Vec<usize> = sp
            .iter()
            .map(|(lo, hi)| ((per_unit * (hi - lo)).ceil() as usize).max(min_per_axis) | 1)
            .collect();
        let nt = ((per_unit * (tw.1 - tw.0)).ceil() as usize).max(min_per_axis) | 1;
        let lin = |lo: f64, hi: f64, n: usize, k: usize| if n <= 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        let mut out = Vec::new();
        let total: usize = counts.iter().product();
        for kt in 0..nt {
            let t = lin(tw.0, tw.1, nt, kt);
            for flat in 0..total {
                let mut rem = flat;
                let x: Vec<f64> = sp
                    .iter()
                    .zip(&counts)
                    .map(|((lo, hi), &n)| {
                        let k = rem % n;
                        rem /= n;
                        lin(*lo, *hi, n, k)
                    })
                    .collect();
                let z = PointTime::new(x, t);
                if self.contains(&z) {
                    out.push(z);
                }
            }
        }
        out
    }

    /// Points on the region's boundary (in its closure).
    pub fn boundary_samples(&self, count: usize) -> Vec<PointTime> {
        let count = count.max(8);
        match self {
            Region::ParabolicBall { center, tau, delta } => pball_surface(center, *tau, *delta, count),
            Region::Lens { q, s, r, xi1 } => {
                let mut out = Vec::new();
                for face in [LensFace::Outer, LensFace::Inner] {
                    out.extend(
                        Region::LensBoundary { q: q.clone(), s: *s, r: *r, xi1: xi1.clone(), face }.boundary_samples(count),
                    );
                }
                out
            }
            Region::LensBoundary { q, s, r, xi1, face } => {
                let (c, d) = match face {
                    LensFace::Outer => (xi1, r / 4.0),
                    LensFace::Inner => (q, r / 8.0),
                };
                let slack = 1e-12 * r * r;
                pball_surface(c, *s, d, count * 4).into_iter().filter(|z| self.contains_closure(z, slack)).collect()
            }
            Region::PsiBox { cylinder, q, s, r } => {
                let mut out = Vec::new();
                let n = q.len();
                let times: Vec<f64> = (0..count).map(|k| s - r * r + 2.0 * r * r * k as f64 / (count - 1) as f64).collect();
                for &t in &times {
                    for x in sphere_points(q, *r, count, n) {
                        out.push(PointTime::new(x, t));
                    }
                    for x in cylinder.base.boundary_samples(count * 8) {
                        if norm(&sub(&x, q)) <= *r {
                            out.push(PointTime::new(x, t));
                        }
                    }
                }
                let slack = 1e-12 * cylinder.base.scale();
                out.into_iter().filter(|z| self.contains_closure(z, slack)).collect()
            }
            Region::Cone { vertex, axis, aperture, radius } => cone_surface(vertex, axis, *aperture, *radius, count)
                .into_iter()
                .map(|x| PointTime::new(x, 0.0))
                .collect(),
            Region::Wedge { vertex, tau, axis, aperture, radius } => {
                let mut out = Vec::new();
                let r2 = radius * radius;
                for k in 0..count {
                    let t = tau - r2 + 2.0 * r2 * k as f64 / (count - 1) as f64;
                    for x in cone_surface(vertex, axis, *aperture, *radius, count) {
                        out.push(PointTime::new(x, t));
                    }
                }
                // bottom face t = τ − r²
                let probe = Region::Cone { vertex: vertex.clone(), axis: axis.clone(), aperture: *aperture, radius: *radius };
                for z in probe.interior_samples(count as f64 / radius, count) {
                    out.push(PointTime::new(z.x, tau - r2));
                }
                out
            }
            _ => {
                // faces of the bounding box intersected with the closure
                let (sp, tw) = self.bounding_box();
                let mut out = Vec::new();
                for z in self.bbox_grid(&sp, tw, count) {
                    if self.contains_closure(&z, 1e-12) && !self.contains(&z) {
                        out.push(z);
                    }
                }
                out
            }
        }
    }

    fn bbox_grid(&self, sp: &[(f64, f64)], tw: (f64, f64), count: usize) -> Vec<PointTime> {
        let n = count.max(3);
        let mut out = Vec::new();
        let total = n.pow(sp.len() as u32);
        for kt in 0..n {
            let t = tw.0 + (tw.1 - tw.0) * kt as f64 / (n - 1) as f64;
            for flat in 0..total {
                let mut rem = flat;
                let x = sp
                    .iter()
                    .map(|(lo, hi)| {
                        let k = rem % n;
                        rem /= n;
                        lo + (hi - lo) * k as f64 / (n - 1) as f64
                    })
                    .collect();
                out.push(PointTime::new(x, t));
            }
        }
        out
    }
}

fn cone_member(vertex: &[f64], axis: &[f64], aperture: f64, radius: f64, x: &[f64], closed: bool, eps: f64) -> bool {
    let v = sub(x, vertex);
    let r = norm(&v);
    let in_ball = if closed { r <= radius + eps } else { r < radius };
    if !in_ball {
        return false;
    }
    if r == 0.0 {
        return true;
    }
    let c = (dot(&v, axis) / r).clamp(-1.0, 1.0);
    c.acos() <= aperture + eps
}

fn sphere_points(center: &[f64], radius: f64, count: usize, n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![center[0] - radius], vec![center[0] + radius]];
    }
    (0..count)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / count as f64;
            vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
        })
        .collect()
}

fn pball_surface(center: &[f64], tau: f64, delta: f64, count: usize) -> Vec<PointTime> {
    let d2 = delta * delta;
    let mut out = Vec::new();
    for k in 0..count {
        let dt = -d2 + 2.0 * d2 * k as f64 / (count - 1) as f64;
        let rho = (d2 - dt.abs()).max(0.0).sqrt();
        for x in sphere_points(center, rho, count, center.len()) {
            out.push(PointTime::new(x, tau + dt));
        }
    }
    out
}

fn cone_surface(vertex: &[f64], axis: &[f64], aperture: f64, radius: f64, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if vertex.len() == 1 {
        out.push(vec![vertex[0] + radius * axis[0]]);
        return out;
    }
    let base = axis[1].atan2(axis[0]);
    for k in 0..count {
        let phi = -aperture + 2.0 * aperture * k as f64 / (count - 1) as f64;
        out.push(vec![vertex[0] + radius * (base + phi).cos(), vertex[1] + radius * (base + phi).sin()]);
    }
    for k in 0..count {
        let rho = radius * k as f64 / (count - 1) as f64;
        for sgn in [-1.0, 1.0] {
            let a = base + sgn * aperture;
            out.push(vec![vertex[0] + rho * a.cos(), vertex[1] + rho * a.sin()]);
        }
    }
    out
}

/// Forward and backward corkscrew points `Ā_r(Q,s)`, `A̲_r(Q,s)`.
///
/// Graph bases offset vertically, `(x₀', φ(x₀') + r)`; all others offset along
/// the inward direction `Q + rν_Q`.
pub fn corkscrew_points(cyl: &Cylinder, q: &[f64], s: f64, r: f64) -> Result<(PointTime, PointTime)> {
    let dom = &cyl.base;
    if !(r > 0.0) {
        return Err(Error::Precondition("corkscrew radius must be positive".into()));
    }
    if s - 2.0 * r * r <= 0.0 || s + 2.0 * r * r >= cyl.horizon {
        return Err(Error::Precondition(format!(
            "time window s ± 2r² = [{}, {}] leaves (0, {})",
            s - 2.0 * r * r,
            s + 2.0 * r * r,
            cyl.horizon
        )));
    }
    let x = match dom {
        DomainSpec::Sawtooth { .. } if (q[1] - dom.graph(q[0])).abs() <= dom.tol() => vec![q[0], q[1] + r],
        _ => {
            if !dom.on_boundary(q) {
                return Err(Error::Precondition(format!("{q:?} is not on the boundary")));
            }
            axpy(q, r, &dom.interior_direction(q)?)
        }
    };
    if !dom.contains(&x) {
        return Err(Error::Precondition(format!("r = {r} too large: corkscrew point {x:?} leaves the domain")));
    }
    Ok((PointTime::new(x.clone(), s + 2.0 * r * r), PointTime::new(x, s - 2.0 * r * r)))
}

/// `ξ₁ = Q + (r/4)ν_Q` (interior) and `ξ₂ = Q − (r/16)ν_Q` (exterior).
pub fn xi_points(dom: &DomainSpec, q: &[f64], r: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let threshold = dom
        .r0_threshold()
        .ok_or_else(|| Error::Precondition(format!("{} base is not C^{{1,1}}", dom.name())))?;
    if !(r > 0.0) || r > threshold {
        return Err(Error::Precondition(format!("r = {r} exceeds the tangency threshold {threshold}")));
    }
    let nu = dom.inward_normal(q)?;
    Ok((axpy(q, r / 4.0, &nu), axpy(q, -r / 16.0, &nu)))
}

/// Same as [`xi_points`] without the tangency threshold; used for flat model
/// configurations and scaling studies.
pub fn xi_points_unchecked(dom: &DomainSpec, q: &[f64], r: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let nu = dom.inward_normal(q)?;
    Ok((axpy(q, r / 4.0, &nu), axpy(q, -r / 16.0, &nu)))
}

/// `⟨ν_Q, ν_{Q₀}⟩ ≥ 1/4`.
pub fn normal_angle_check(dom: &DomainSpec, q0: &[f64], q: &[f64], r: f64) -> Result<bool> {
    if norm(&sub(q, q0)) > r * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("|Q − Q₀| exceeds r = {r}")));
    }
    let n0 = dom.inward_normal(q0)?;
    let n1 = dom.inward_normal(q)?;
    Ok(dot(&n0, &n1) >= 0.25)
}

/// Samples ∂Ω and checks that no boundary point other than `Q` meets the
/// spatial slices `B_{r/4}(ξ₁)` and `B_{r/16}(ξ₂)` at time `s`.
pub fn tangency_check(dom: &DomainSpec, q: &[f64], r: f64, samples: usize) -> Result<bool> {
    let (xi1, xi2) = xi_points(dom, q, r)?;
    let exclude = 1e-9 * dom.scale();
    for b in dom.boundary_samples(samples) {
        if norm(&sub(&b, q)) <= exclude {
            continue;
        }
        if norm(&sub(&b, &xi1)) <= r / 4.0 || norm(&sub(&b, &xi2)) <= r / 16.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `dist(Φ²_r, S_T) / r`: the measured constant in the lens distance property.
pub fn lens_distance_ratio(dom: &DomainSpec, q: &[f64], s: f64, r: f64, samples: usize) -> Result<f64> {
    let (xi1, _) = xi_points_unchecked(dom, q, r)?;
    let face = Region::LensBoundary { q: q.to_vec(), s, r, xi1, face: LensFace::Inner };
    let pts = face.boundary_samples(samples);
    if pts.is_empty() {
        return Err(Error::InsufficientPoints("empty lens boundary sample".into()));
    }
    Ok(pts.iter().map(|z| dom.boundary_distance(&z.x)).fold(f64::INFINITY, f64::min) / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk() -> DomainSpec {
        DomainSpec::Disk { center: vec![0.0, 0.0], radius: 1.0 }
    }

    fn flat_stadium() -> DomainSpec {
        // bottom edge on x₂ = 0 around the origin
        DomainSpec::Stadium { center: vec![0.0, 1.0], side: 2.0, corner_radius: 0.5 }
    }

    #[test]
    fn disk_normals() {
        assert_eq!(disk().inward_normal(&[1.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
        assert_eq!(disk().inward_normal(&[0.0, -1.0]).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn square_corner_has_no_normal() {
        let sq = DomainSpec::Square { center: vec![0.0, 0.0], side: 2.0 };
        assert!(matches!(sq.inward_normal(&[1.0, 1.0]), Err(Error::NormalUndefined(_))));
        assert_eq!(sq.inward_normal(&[1.0, 0.3]).unwrap(), vec![-1.0, 0.0]);
    }

    #[test]
    fn sector_vertex_has_no_normal() {
        let sec = DomainSpec::Sector { aperture: 1.5 * PI, radius: 1.0 };
        assert!(matches!(sec.inward_normal(&[0.0, 0.0]), Err(Error::NormalUndefined(_))));
        let n = sec.inward_normal(&[0.0, -0.5]).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        assert_eq!(sec.inward_normal(&[0.5, 0.0]).unwrap(), vec![0.0, 1.0]);
        let d = sec.interior_direction(&[0.0, 0.0]).unwrap();
        assert!((d[0] + 0.5f64.sqrt()).abs() < 1e-12 && (d[1] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn corkscrew_examples() {
        let cyl = Cylinder::new(flat_stadium(), 1.0).unwrap();
        let (up, lo) = corkscrew_points(&cyl, &[0.0, 0.0], 0.5, 0.1).unwrap();
        assert!((up.x[1] - 0.1).abs() < 1e-15 && up.x[0] == 0.0);
        assert!((up.t - 0.52).abs() < 1e-15 && (lo.t - 0.48).abs() < 1e-15);
        assert!(corkscrew_points(&cyl, &[0.0, 0.0], 0.01, 0.1).is_err());
        let cyl = Cylinder::new(disk(), 1.0).unwrap();
        let (up, _) = corkscrew_points(&cyl, &[1.0, 0.0], 0.5, 0.2).unwrap();
        assert!((up.x[0] - 0.8).abs() < 1e-15 && up.x[1] == 0.0);
    }

    #[test]
    fn sawtooth_corkscrew_is_vertical() {
        let saw = DomainSpec::Sawtooth { slope: 1.0, period: 0.5, half_width: 1.0, height: 1.0, r0: 0.5 };
        let cyl = Cylinder::new(saw.clone(), 1.0).unwrap();
        let q = vec![0.1, saw.graph(0.1)];
        let (up, _) = corkscrew_points(&cyl, &q, 0.5, 0.1).unwrap();
        assert_eq!(up.x[0], 0.1);
        assert!((up.x[1] - q[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn corkscrew_depth_on_disk() {
        let cyl = Cylinder::new(disk(), 1.0).unwrap();
        for k in 0..16 {
            let th = k as f64 * 0.4;
            let q = vec![th.cos(), th.sin()];
            let (up, _) = corkscrew_points(&cyl, &q, 0.5, 0.15).unwrap();
            assert!((disk().boundary_distance(&up.x) - 0.15).abs() < 1e-12);
        }
    }

    #[test]
    fn xi_examples() {
        let (x1, x2) = xi_points(&flat_stadium(), &[0.0, 0.0], 0.16).unwrap();
        assert!((x1[1] - 0.04).abs() < 1e-15 && (x2[1] + 0.01).abs() < 1e-15);
        let (x1, _) = xi_points(&disk(), &[1.0, 0.0], 0.4).unwrap();
        assert!((x1[0] - 0.9).abs() < 1e-15);
        assert!(xi_points(&disk(), &[1.0, 0.0], 0.6).is_err());
        let sq = DomainSpec::Square { center: vec![0.0, 0.0], side: 2.0 };
        assert!(xi_points(&sq, &[1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn tangency_holds_below_threshold() {
        assert!(tangency_check(&disk(), &[1.0, 0.0], 0.4, 4000).unwrap());
        let st = flat_stadium();
        for q in st.boundary_samples(40) {
            assert!(tangency_check(&st, &q, 0.2, 2000).unwrap(), "{q:?}");
        }
    }

    #[test]
    fn region_examples() {
        let cyl = Cylinder::new(flat_stadium(), 1.0).unwrap();
        let psi = Region::PsiBox { cylinder: cyl, q: vec![0.0, 0.0], s: 0.5, r: 0.1 };
        assert!(psi.contains(&PointTime::new(vec![0.05, 0.02], 0.505)));
        let pb = Region::ParabolicBall { center: vec![0.0, 0.0], tau: 0.0, delta: 0.5 };
        assert!(pb.contains(&PointTime::new(vec![0.0, 0.0], 0.25)));
        assert!(pb.contains(&PointTime::new(vec![0.5, 0.0], 0.0)));
        let hb = Region::HarnackBox { center: vec![0.0, 0.0], t0: 0.0, eta: 2.0, r: 1.0 };
        assert!(!hb.contains(&PointTime::new(vec![0.0, 0.0], 2.5)));
        assert!(hb.contains(&PointTime::new(vec![1.0, -1.0], 2.0)));
    }

    #[test]
    fn normal_angle_examples() {
        let q0 = [1.0, 0.0];
        assert!(normal_angle_check(&disk(), &q0, &[0.1f64.cos(), 0.1f64.sin()], 0.2).unwrap());
        assert!(normal_angle_check(&disk(), &q0, &q0, 0.1).unwrap());
        assert!(!normal_angle_check(&disk(), &q0, &[-1.0, 0.0], 5.0).unwrap());
    }

    #[test]
    fn psi_boxes_nest() {
        let cyl = Cylinder::new(disk(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let r = rng.gen_range(0.01..0.4);
            let r2 = r + rng.gen_range(0.0..0.3);
            let z = PointTime::new(vec![rng.gen_range(0.5..1.0), rng.gen_range(-0.5..0.5)], rng.gen_range(0.0..1.0));
            let a = Region::PsiBox { cylinder: cyl.clone(), q: vec![1.0, 0.0], s: 0.5, r };
            let b = Region::PsiBox { cylinder: cyl.clone(), q: vec![1.0, 0.0], s: 0.5, r: r2 };
            assert!(!a.contains(&z) || b.contains(&z));
        }
    }

    #[test]
    fn predicates_match_unrolled_definitions() {
        let cyl = Cylinder::new(disk(), 1.0).unwrap();
        let (xi1, _) = xi_points(&disk(), &[1.0, 0.0], 0.4).unwrap();
        let lens = Region::Lens { q: vec![1.0, 0.0], s: 0.5, r: 0.4, xi1: xi1.clone() };
        let slab = Region::InteriorSlab { cylinder: cyl.clone(), delta: 0.2 };
        let shrunk = Region::ShrunkCylinder { cylinder: cyl.clone(), delta: 0.2 };
        let wedge = Region::Wedge { vertex: vec![0.0, 0.0], tau: 0.0, axis: vec![0.0, 1.0], aperture: 1.0, radius: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let x = vec![rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2)];
            let t = rng.gen_range(-0.3..1.1);
            let z = PointTime::new(x.clone(), t);
            let d = |c: &[f64]| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            let in_lens = d(&[1.0, 0.0]) + (t - 0.5).abs() <= 0.0025 && d(&xi1) + (t - 0.5).abs() <= 0.01;
            assert_eq!(lens.contains(&z), in_lens);
            let rho = x[0].hypot(x[1]);
            assert_eq!(slab.contains(&z), rho < 1.0 && t > 0.08 && t < 0.96);
            assert_eq!(shrunk.contains(&z), rho < 1.0 && 1.0 - rho > 0.2 && t > 0.04 && t < 1.0);
            let ang = if rho > 0.0 { (x[1] / rho).clamp(-1.0, 1.0).acos() } else { 0.0 };
            assert_eq!(wedge.contains(&z), rho < 0.5 && ang <= 1.0 && t > -0.25 && t < 0.25);
        }
    }

    #[test]
    fn lens_minimum_ratio_is_one_over_64() {
        let q = [0.0, 0.0];
        let (xi1, _) = xi_points(&flat_stadium(), &q, 0.16).unwrap();
        let lens = Region::Lens { q: q.to_vec(), s: 0.5, r: 0.16, xi1: xi1.clone() };
        let mut pts = lens.interior_samples(4000.0, 65);
        pts.extend(lens.boundary_samples(64));
        let min = pts
            .iter()
            .map(|z| ((z.x[0] - xi1[0]).powi(2) + (z.x[1] - xi1[1]).powi(2)) / (0.16 * 0.16))
            .fold(f64::INFINITY, f64::min);
        assert!((min - 1.0 / 64.0).abs() < 1e-6, "{min}");
    }

    #[test]
    fn lens_distance_is_positive() {
        let a3 = lens_distance_ratio(&disk(), &[1.0, 0.0], 0.5, 0.2, 64).unwrap();
        assert!(a3 > 0.0 && a3 < 0.25, "{a3}");
        let a3f = lens_distance_ratio(&flat_stadium(), &[0.0, 0.0], 0.5, 0.2, 64).unwrap();
        assert!(a3f > 0.0);
    }
}
