//! Explicit monotone lattice solver for `u_t = F(D²u, Du, u)` on cylinders,
//! with a mean-value iteration and closed-form heat solutions as oracles.
//!
//! Nodes outside the open base `Ω` are pinned to the lateral value, so the
//! lattice boundary sits within one stencil reach of `∂Ω`.

mod coeff;
mod field;
mod lattice;
mod mean_value;
mod reference;
mod scheme;

pub use coeff::{decompose_constant, weights_to_matrix, CoefficientField, CoefficientSpec};
pub use field::{FieldMeta, GridField, FIELD_MAGIC, FIELD_VERSION};
pub use lattice::{Lattice, DIRECTIONS_2D, FRAMES_2D};
pub use mean_value::{mean_value_consistency_check, mean_value_solve, MeanValueScheme};
pub use reference::{bessel_first_zero, bessel_j_scaled, heat_reference, HeatMode};
pub use scheme::{discrete_comparison_check, solve, solve_from, step, Stepper};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cylinder, DomainSpec};
use crate::operators::Ellipticity;

pub const DEFAULT_C_CFL: f64 = 0.5;

/// Ghost layers around the bounding box; the widest 2-D direction reaches two cells.
pub const LATTICE_PAD: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorKind {
    ExtremalPlus,
    ExtremalMinus,
    LinearNondiv { coefficients: CoefficientSpec },
    PLaplacian { p: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    /// Product of half-wave sines over an interval or square.
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude·(1 − |x−c|²/ρ²)₊³`.
    Bump {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude·exp(−|x−c|²/(2σ²))`.
    Gaussian {
        center: Vec<f64>,
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// First Dirichlet mode of a sector, `J_ν(jρ/R) sin(νθ)` with `ν = π/ω`, scaled to peak near 1.
    SectorMode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant { value: f64 },
    /// Raw lattice values in index order.
    Values { values: Vec<f64> },
}

impl InitialDatum {
    pub fn evaluate(&self, dom: &DomainSpec, x: &[f64]) -> Result<f64> {
        Ok(match self {
            InitialDatum::Sine { amplitude } => match dom {
                DomainSpec::Interval { length } => amplitude * (PI * x[0] / length).sin(),
                DomainSpec::Square { center, side } => {
                    let mut v = *amplitude;
                    for (xi, c) in x.iter().zip(center) {
                        v *= (PI * (xi - c + 0.5 * side) / side).sin();
                    }
                    v
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "sine initial datum needs an interval or square, got {}",
                        dom.name()
                    )))
                }
            },
            InitialDatum::Bump { center, radius, amplitude } => {
                if center.len() != x.len() {
                    return Err(Error::InvalidParameter("bump center has the wrong dimension".into()));
                }
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                let s = (1.0 - r2 / (radius * radius)).max(0.0);
                amplitude * s * s * s
            }
            InitialDatum::Gaussian { center, sigma, amplitude } => {
                if center.len() != x.len() {
                    return Err(Error::InvalidParameter("gaussian center has the wrong dimension".into()));
                }
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            InitialDatum::SectorMode { amplitude } => match dom {
                DomainSpec::Sector { aperture, radius } => amplitude * sector_mode(*aperture, *radius, x),
                _ => return Err(Error::InvalidParameter(format!("sector mode needs a sector, got {}", dom.name()))),
            },
            InitialDatum::Constant { value } => *value,
            InitialDatum::Values { .. } => {
                return Err(Error::InvalidParameter("raw values have no pointwise formula".into()))
            }
        })
    }

    /// Values on every lattice node; nodes outside `Ω` take `lateral`.
    pub fn on_lattice(&self, dom: &DomainSpec, lat: &Lattice, lateral: f64) -> Result<Vec<f64>> {
        let mask = lat.mask(dom);
        if let InitialDatum::Values { values } = self {
            if values.len() != lat.len() {
                return Err(Error::GridMismatch(format!(
                    "initial values have length {}, lattice has {}",
                    values.len(),
                    lat.len()
                )));
            }
            return Ok(values.iter().zip(&mask).map(|(&v, &m)| if m { v } else { lateral }).collect());
        }
        (0..lat.len())
            .map(|i| if mask[i] { self.evaluate(dom, &lat.point(i)) } else { Ok(lateral) })
            .collect()
    }
}

/// Decay rate `j²/R²` and profile of the first Dirichlet mode of a sector.
pub fn sector_mode_rate(aperture: f64, radius: f64) -> f64 {
    let j = bessel_first_zero(PI / aperture);
    j * j / (radius * radius)
}

/// First zero of `J_ν` and the maximum of `Γ(ν+1)J_ν` before it, cached per thread.
fn sector_constants(nu: f64) -> (f64, f64) {
    thread_local! {
        static LAST: std::cell::Cell<(f64, f64, f64)> = const { std::cell::Cell::new((f64::NAN, 0.0, 0.0)) };
    }
    LAST.with(|c| {
        let (n, j, peak) = c.get();
        if n == nu {
            return (j, peak);
        }
        let j = bessel_first_zero(nu);
        let peak = (1..400).map(|k| bessel_j_scaled(nu, j * k as f64 / 400.0)).fold(0.0, f64::max);
        c.set((nu, j, peak));
        (j, peak)
    })
}

fn sector_mode(aperture: f64, radius: f64, x: &[f64]) -> f64 {
    let nu = PI / aperture;
    let (j, peak) = sector_constants(nu);
    let rho = x[0].hypot(x[1]);
    let mut th = x[1].atan2(x[0]);
    if th < 0.0 {
        th += 2.0 * PI;
    }
    if rho >= radius || th <= 0.0 || th >= aperture {
        return 0.0;
    }
    bessel_j_scaled(nu, j * rho / radius) * (nu * th).sin() / peak
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub operator: OperatorKind,
    pub ell: Ellipticity,
    pub initial: InitialDatum,
    #[serde(default)]
    pub lateral: f64,
}

impl ProblemSpec {
    pub fn name(&self) -> String {
        match &self.operator {
            OperatorKind::ExtremalPlus => "extremal_plus".into(),
            OperatorKind::ExtremalMinus => "extremal_minus".into(),
            OperatorKind::LinearNondiv { .. } => "linear_nondiv".into(),
            OperatorKind::PLaplacian { p } => format!("p_laplacian(p={p})"),
        }
    }

    /// Ellipticity actually governing the scheme; the p-Laplacian brings its own.
    pub fn effective_ell(&self) -> Result<Ellipticity> {
        match self.operator {
            OperatorKind::PLaplacian { p } => Ellipticity::for_p_laplacian(p),
            _ => {
                self.ell.validate()?;
                Ok(self.ell)
            }
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.operator {
            OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Random { seed, .. } } => Some(*seed),
            _ => None,
        }
    }

    /// Autonomous operators commute with time shifts without moving any coefficient origin.
    pub fn is_autonomous(&self) -> bool {
        !matches!(self.operator, OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Random { .. } })
    }
}

/// Largest monotone time step: `1 / (2nΛ/h² + a√n/h + b)`.
pub fn monotone_time_limit(n: usize, hx: f64, ell: &Ellipticity) -> f64 {
    let nf = n as f64;
    1.0 / (2.0 * nf * ell.big_lambda / (hx * hx) + ell.a * nf.sqrt() / hx + ell.b)
}

/// Space-time lattice. Step `j` sits at time `(start_step + j)·ht`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cylinder: Cylinder,
    pub hx: f64,
    pub ht: f64,
    pub n_steps: usize,
    pub save_every: usize,
    pub start_step: i64,
    pub c_cfl: f64,
    pub k_dir: usize,
}

impl GridSpec {
    /// Chooses `ht = T/N` with `N` the smallest multiple of `n_save` meeting `c_cfl` times the monotone limit.
    pub fn new(cylinder: Cylinder, hx: f64, ell: &Ellipticity, n_save: usize, c_cfl: f64) -> Result<GridSpec> {
        if !(hx > 0.0) || !hx.is_finite() {
            return Err(Error::InvalidParameter(format!("hx must be positive, got {hx}")));
        }
        if !(c_cfl > 0.0 && c_cfl <= 1.0) {
            return Err(Error::InvalidParameter(format!("c_cfl must lie in (0, 1], got {c_cfl}")));
        }
        if n_save == 0 {
            return Err(Error::InvalidParameter("n_save must be positive".into()));
        }
        ell.validate()?;
        let n = cylinder.base.dim();
        let ht_max = c_cfl * monotone_time_limit(n, hx, ell);
        let raw = (cylinder.horizon / ht_max).ceil() as usize;
        let n_steps = raw.div_ceil(n_save).max(1) * n_save;
        let ht = cylinder.horizon / n_steps as f64;
        let k_dir = if n == 1 { 1 } else { DIRECTIONS_2D.len() };
        Ok(GridSpec { cylinder, hx, ht, n_steps, save_every: n_steps / n_save, start_step: 0, c_cfl, k_dir })
    }

    pub fn for_problem(cylinder: Cylinder, hx: f64, problem: &ProblemSpec, n_save: usize, c_cfl: f64) -> Result<GridSpec> {
        GridSpec::new(cylinder, hx, &problem.effective_ell()?, n_save, c_cfl)
    }

    pub fn n_save(&self) -> usize {
        self.n_steps / self.save_every
    }

    pub fn time_of(&self, step: i64) -> f64 {
        step as f64 * self.ht
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::for_domain(&self.cylinder.base, self.hx, LATTICE_PAD)
    }

    /// Same lattice, starting `k` saved slices later.
    pub fn restarted(&self, k: usize) -> Result<GridSpec> {
        if k > self.n_save() {
            return Err(Error::InvalidParameter(format!("restart slice {k} beyond {}", self.n_save())));
        }
        let mut g = self.clone();
        g.start_step += (k * self.save_every) as i64;
        g.n_steps -= k * self.save_every;
        Ok(g)
    }

    /// Same steps, with every time shifted by `k` steps.
    pub fn shifted(&self, k: i64) -> GridSpec {
        let mut g = self.clone();
        g.start_step += k;
        g
    }
}
