//! Families of nonnegative solutions and empirical estimators for the boundary
//! constants: Hölder decay, Carleson, elliptic-type boundary Harnack, local and
//! global comparison, linear rate, backward and interior Harnack.
//!
//! Every estimator works on quotients of saved field values, rejects
//! denominators below `1e-12·sup` and records per-member values.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{corkscrew_points, Cylinder, DomainSpec, PointTime};
use crate::operators::Ellipticity;
use crate::solver::{solve, CoefficientSpec, GridField, GridSpec, InitialDatum, OperatorKind, ProblemSpec};

pub const NOISE_FLOOR: f64 = 1e-12;
pub const DEFAULT_THRESHOLD: f64 = 0.2;
pub const LINEAR_RATE_DELTA_MAX: f64 = 1.0 / 32.0;
pub const CSV_HEADER: &str = "# pucci-lab csv v1\ntheorem,domain,r,grid,estimate,deviation,pass,seed\n";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    HolderDecay,
    Carleson,
    BoundaryHarnackElliptic,
    LocalComparison,
    LinearRate,
    BackwardHarnack,
    GlobalComparison,
    InteriorHarnack,
}

impl Theorem {
    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::HolderDecay => "holder_decay",
            Theorem::Carleson => "carleson",
            Theorem::BoundaryHarnackElliptic => "boundary_harnack_elliptic",
            Theorem::LocalComparison => "local_comparison",
            Theorem::LinearRate => "linear_rate",
            Theorem::BackwardHarnack => "backward_harnack",
            Theorem::GlobalComparison => "global_comparison",
            Theorem::InteriorHarnack => "interior_harnack",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberValue {
    pub label: String,
    pub seed: Option<u64>,
    pub value: f64,
    /// Second per-member quantity (prefactor, growth factor or lower bound).
    pub aux: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateGeometry {
    pub domain: String,
    pub q0: Option<Vec<f64>>,
    pub s0: Option<f64>,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    /// Whether the scale sits inside the smallness regime the estimate is stated for.
    pub in_regime: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub theorem: Theorem,
    /// Family worst case: largest constant, or smallest exponent for decay fits.
    pub estimate: f64,
    /// Companion value: prefactor `C` of a decay fit, or the growth-profile factor.
    pub secondary: Option<f64>,
    /// Two-sided bounds of comparison quotients.
    pub bounds: Option<(f64, f64)>,
    pub members: Vec<MemberValue>,
    pub hx: f64,
    pub geometry: EstimateGeometry,
    /// `(hx, estimate)` per grid when produced by a refinement study.
    pub grid_series: Vec<(f64, f64)>,
    pub stability: Option<f64>,
}

impl ConstantEstimate {
    fn new(theorem: Theorem, estimate: f64, members: Vec<MemberValue>, hx: f64, geometry: EstimateGeometry) -> Self {
        ConstantEstimate {
            theorem,
            estimate,
            secondary: None,
            bounds: None,
            members,
            hx,
            geometry,
            grid_series: Vec::new(),
            stability: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    fn seeds(&self) -> String {
        self.members.iter().filter_map(|m| m.seed).map(|s| s.to_string()).collect::<Vec<_>>().join(";")
    }

    /// One CSV row (no header).
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},,,{}\n",
            self.theorem.tag(),
            self.geometry.domain,
            self.geometry.r.map(|r| r.to_string()).unwrap_or_default(),
            self.hx,
            self.estimate,
            self.seeds()
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub theorem: Theorem,
    pub domain: String,
    pub r: Option<f64>,
    pub grids: Vec<f64>,
    pub estimates: Vec<f64>,
    /// `|e_{k+1} − e_k| / |e_{k+1}|`, coarse to fine.
    pub deviations: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
    pub finest: ConstantEstimate,
}

impl StabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per grid.
    pub fn to_csv_rows(&self) -> String {
        let mut s = String::new();
        let seeds = self.finest.seeds();
        for (k, (h, e)) in self.grids.iter().zip(&self.estimates).enumerate() {
            let dev = if k == 0 { String::new() } else { self.deviations[k - 1].to_string() };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                self.theorem.tag(),
                self.domain,
                self.r.map(|r| r.to_string()).unwrap_or_default(),
                h,
                e,
                dev,
                self.pass,
                seeds
            );
        }
        s
    }
}

/// Runs an estimator on three grids, each halving `hx`, and compares consecutive estimates.
/// Passes when the deviation between the two finest grids is below `threshold`.
pub fn refinement_study<F>(grids: &[f64], threshold: f64, run: F) -> Result<StabilityReport>
where
    F: Fn(f64) -> Result<ConstantEstimate>,
{
    if grids.len() != 3 {
        return Err(Error::SeriesRequired(grids.len()));
    }
    for w in grids.windows(2) {
        if !((w[0] / w[1] - 2.0).abs() < 1e-9) {
            return Err(Error::InvalidParameter(format!("grid series must halve hx, got {grids:?}")));
        }
    }
    let mut results = Vec::with_capacity(3);
    for &h in grids {
        results.push(run(h)?);
    }
    let estimates: Vec<f64> = results.iter().map(|e| e.estimate).collect();
    let deviations: Vec<f64> =
        estimates.windows(2).map(|w| (w[1] - w[0]).abs() / w[1].abs().max(f64::MIN_POSITIVE)).collect();
    let last = *deviations.last().expect("three grids");
    let pass = last.is_finite() && last < threshold;
    let mut finest = results.pop().expect("three grids");
    finest.grid_series = grids.iter().copied().zip(estimates.iter().copied()).collect();
    finest.stability = Some(last);
    Ok(StabilityReport {
        theorem: finest.theorem,
        domain: finest.geometry.domain.clone(),
        r: finest.geometry.r,
        grids: grids.to_vec(),
        estimates,
        deviations,
        threshold,
        pass,
        finest,
    })
}

// ---------------------------------------------------------------------------
// families

fn default_family_ell() -> Ellipticity {
    Ellipticity { lambda: 0.5, big_lambda: 2.0, a: 0.5, b: 0.0 }
}

fn default_seeds() -> Vec<u64> {
    vec![11, 12, 13, 14]
}

fn default_p_list() -> Vec<f64> {
    vec![1.5, 2.0, 3.0, 4.0]
}

fn default_cell() -> f64 {
    0.125
}

/// Operator mix of a family; the default is 4 random-linear, 4 extremal and 4 p-Laplacian members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_family_ell")]
    pub ell: Ellipticity,
    #[serde(default = "default_seeds")]
    pub linear_seeds: Vec<u64>,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    /// Two nonnegative initial data; defaults depend on the base.
    #[serde(default)]
    pub initial: Vec<InitialDatum>,
    #[serde(default = "default_cell")]
    pub coefficient_cell: f64,
    #[serde(default = "default_cell")]
    pub coefficient_slab: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            ell: default_family_ell(),
            linear_seeds: default_seeds(),
            p_list: default_p_list(),
            initial: Vec::new(),
            coefficient_cell: default_cell(),
            coefficient_slab: default_cell(),
        }
    }
}

/// Two nonnegative data vanishing near `∂Ω`.
pub fn default_initial_data(dom: &DomainSpec) -> Vec<InitialDatum> {
    let bump = |center: Vec<f64>, radius: f64| InitialDatum::Bump { center, radius, amplitude: 1.0 };
    match dom {
        DomainSpec::Interval { length } => {
            vec![InitialDatum::Sine { amplitude: 1.0 }, bump(vec![0.4 * length], 0.3 * length)]
        }
        DomainSpec::Square { center, side } => vec![
            InitialDatum::Sine { amplitude: 1.0 },
            bump(vec![center[0] + 0.15 * side, center[1] - 0.1 * side], 0.3 * side),
        ],
        DomainSpec::Stadium { center, side, .. } => vec![
            bump(center.clone(), 0.45 * side),
            bump(vec![center[0] + 0.15 * side, center[1] - 0.1 * side], 0.3 * side),
        ],
        DomainSpec::Disk { center, radius } => {
            vec![bump(center.clone(), 0.9 * radius), bump(vec![center[0] + 0.3 * radius, center[1]], 0.6 * radius)]
        }
        DomainSpec::Sector { aperture, radius } => {
            let a = aperture / 2.0;
            vec![
                InitialDatum::SectorMode { amplitude: 1.0 },
                bump(vec![0.5 * radius * a.cos(), 0.5 * radius * a.sin()], 0.4 * radius),
            ]
        }
        DomainSpec::Sawtooth { half_width, height, .. } => vec![
            bump(vec![0.0, 0.5 * height], 0.45 * half_width.min(*height)),
            bump(vec![0.3 * half_width, 0.6 * height], 0.3 * half_width.min(*height)),
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberInfo {
    pub label: String,
    pub problem: ProblemSpec,
    pub grid: GridSpec,
    pub seed: Option<u64>,
    /// `sup` of the initial datum; solutions must stay below it.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct SolutionFamily {
    pub spec: FamilySpec,
    pub members: Vec<MemberInfo>,
    pub fields: Vec<GridField>,
}

impl FamilySpec {
    /// The member problems in a fixed order: random-linear, extremal (± × data), p-Laplacian.
    pub fn problems(&self, dom: &DomainSpec) -> Result<Vec<(String, ProblemSpec)>> {
        let data = if self.initial.is_empty() { default_initial_data(dom) } else { self.initial.clone() };
        if data.len() != 2 {
            return Err(Error::InvalidParameter(format!("a family needs two initial data, got {}", data.len())));
        }
        let ell = self.ell;
        let mut out = Vec::new();
        for &seed in &self.linear_seeds {
            let coefficients = CoefficientSpec::Random {
                seed,
                cell: self.coefficient_cell,
                slab: self.coefficient_slab,
                origin_step: 0,
            };
            let ell = Ellipticity { a: 0.0, b: 0.0, ..ell };
            let operator = OperatorKind::LinearNondiv { coefficients };
            out.push((format!("linear_nondiv#{seed}"), ProblemSpec { operator, ell, initial: data[0].clone(), lateral: 0.0 }));
        }
        for (side, op) in [("plus", OperatorKind::ExtremalPlus), ("minus", OperatorKind::ExtremalMinus)] {
            for (k, d) in data.iter().enumerate() {
                out.push((
                    format!("extremal_{side}/datum{k}"),
                    ProblemSpec { operator: op.clone(), ell, initial: d.clone(), lateral: 0.0 },
                ));
            }
        }
        for &p in &self.p_list {
            let operator = OperatorKind::PLaplacian { p };
            out.push((format!("p_laplacian({p})"), ProblemSpec { operator, ell, initial: data[0].clone(), lateral: 0.0 }));
        }
        Ok(out)
    }
}

impl SolutionFamily {
    /// Solves every member (concurrently) on `cylinder` with step `hx`.
    pub fn build(spec: &FamilySpec, cylinder: &Cylinder, hx: f64, n_save: usize, c_cfl: f64) -> Result<SolutionFamily> {
        let problems = spec.problems(&cylinder.base)?;
        let solved: Vec<Result<(MemberInfo, GridField)>> = problems
            .into_par_iter()
            .map(|(label, problem)| {
                let grid = GridSpec::for_problem(cylinder.clone(), hx, &problem, n_save, c_cfl)?;
                let mut field = solve(&problem, &grid)?;
                field.meta.label = label.clone();
                let bound = field.slice(0).iter().fold(0.0f64, |m, v| m.max(*v));
                let info = MemberInfo { label, seed: problem.seed(), problem, grid, bound };
                check_member(&info, &field)?;
                Ok((info, field))
            })
            .collect();
        let mut members = Vec::new();
        let mut fields = Vec::new();
        for r in solved {
            let (m, f) = r?;
            members.push(m);
            fields.push(f);
        }
        Ok(SolutionFamily { spec: spec.clone(), members, fields })
    }
}

fn check_member(info: &MemberInfo, field: &GridField) -> Result<()> {
    let tol = 1e-12 * info.bound.max(1.0);
    let (lo, hi) = field.data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo < -tol || hi > info.bound + tol {
        return Err(Error::Precondition(format!(
            "member {} leaves [0, {}]: range [{lo:e}, {hi:e}]",
            info.label, info.bound
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shared helpers

fn floor_of(f: &GridField) -> f64 {
    NOISE_FLOOR * f.sup()
}

fn label(f: &GridField) -> String {
    f.meta.label.clone()
}

fn cylinder_of(f: &GridField) -> Result<Cylinder> {
    Cylinder::new(f.meta.domain.clone(), f.horizon)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sample(f: &GridField, z: &PointTime) -> Result<f64> {
    f.sample(&z.x, z.t)
        .ok_or_else(|| Error::InvalidParameter(format!("({:?}, {}) lies outside the saved field", z.x, z.t)))
}

fn nonempty(family: &[GridField]) -> Result<()> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty family".into()));
    }
    let h = family[0].lattice.h;
    if family.iter().any(|f| f.lattice.h != h) {
        return Err(Error::GridMismatch("family members live on different lattices".into()));
    }
    Ok(())
}

/// Interior lattice nodes with saved times satisfying `keep`.
fn nodes_where<F: Fn(&[f64], f64) -> bool>(f: &GridField, keep: F) -> Vec<(usize, usize)> {
    let mask = f.mask();
    let points: Vec<Vec<f64>> = (0..f.lattice.len()).map(|i| f.lattice.point(i)).collect();
    let mut out = Vec::new();
    for (k, &t) in f.times.iter().enumerate() {
        for (i, x) in points.iter().enumerate() {
            if mask[i] && keep(x, t) {
                out.push((k, i));
            }
        }
    }
    out
}

fn value(f: &GridField, (k, i): (usize, usize)) -> f64 {
    f.slice(k)[i]
}

/// Least-squares slope and intercept.
fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} points", xs.len())));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("no spread in the abscissa".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

// ---------------------------------------------------------------------------
// estimators

/// Lower end of the fitted distance range, as a fraction of `r`.
pub const HOLDER_DMIN: f64 = 0.1;
const HOLDER_BINS: usize = 8;

fn holder_member(f: &GridField, q: &[f64], s0: f64, r: f64) -> Result<MemberValue> {
    // (parabolic distance / r, value) over Ψ_r, including the slice at s₀ itself
    let mut pts: Vec<(f64, f64)> = nodes_where(f, |x, t| dist(x, q) < r && (t - s0).abs() < r * r)
        .into_iter()
        .map(|(k, i)| ((dist(&f.lattice.point(i), q) + (f.times[k] - s0).abs().sqrt()) / r, value(f, (k, i))))
        .collect();
    if f.time_index(s0).is_none() {
        let mask = f.mask();
        for i in (0..f.lattice.len()).filter(|&i| mask[i]) {
            let x = f.lattice.point(i);
            if dist(&x, q) < r {
                pts.push((dist(&x, q) / r, sample(f, &PointTime::new(x, s0))?));
            }
        }
    }
    let m_r = pts.iter().map(|p| p.1).fold(0.0f64, f64::max);
    if !(m_r > floor_of(f)) || m_r == 0.0 {
        return Err(Error::DegenerateFit(format!("member {} vanishes on Ψ_r", label(f))));
    }
    let d_min = HOLDER_DMIN.max(2.0 * f.lattice.h / r);
    // envelope: largest value in each geometric shell of the parabolic distance
    let mut env = vec![(0.0f64, 0.0f64); HOLDER_BINS];
    let span = (1.0 / d_min).ln();
    for &(d, u) in &pts {
        if d < d_min || d >= 1.0 || u <= floor_of(f) {
            continue;
        }
        let b = (((d / d_min).ln() / span) * HOLDER_BINS as f64).floor() as usize;
        let b = b.min(HOLDER_BINS - 1);
        if u > env[b].1 {
            env[b] = (d, u);
        }
    }
    let env: Vec<(f64, f64)> = env.into_iter().filter(|e| e.1 > 0.0).collect();
    if env.len() < 3 {
        return Err(Error::DegenerateFit(format!("only {} distance shells resolved for {}", env.len(), label(f))));
    }
    let xs: Vec<f64> = env.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = env.iter().map(|p| (p.1 / m_r).ln()).collect();
    let (alpha, _) = fit_line(&xs, &ys)?;
    let c = pts.iter().filter(|p| p.0 > 0.0).map(|&(d, u)| u / (m_r * d.powf(alpha))).fold(0.0f64, f64::max);
    Ok(MemberValue { label: label(f), seed: f.meta.seed, value: alpha, aux: Some(c) })
}

/// Fits `u ≤ C ((|x−Q| + |t−s|^{1/2})/r)^α M_r(u)` on `Ψ_r(Q, s₀)` from the envelope of
/// `u` over shells of the parabolic distance in `[0.1, 1)`. Returns the smallest `α` and the largest `C`.
pub fn estimate_holder_decay(family: &[GridField], q0: &[f64], s0: f64, r: f64) -> Result<ConstantEstimate> {
    nonempty(family)?;
    let cyl = cylinder_of(&family[0])?;
    if !cyl.base.on_boundary(q0) {
        return Err(Error::Precondition(format!("{q0:?} is not a boundary point")));
    }
    if s0 - r * r < 0.0 || s0 + r * r > cyl.horizon {
        return Err(Error::Precondition(format!("Ψ_r time window leaves (0, {})", cyl.horizon)));
    }
    let members = family.iter().map(|f| holder_member(f, q0, s0, r)).collect::<Result<Vec<_>>>()?;
    let alpha = members.iter().map(|m| m.value).fold(f64::INFINITY, f64::min);
    let c = members.iter().filter_map(|m| m.aux).fold(0.0f64, f64::max);
    let geometry = EstimateGeometry {
        domain: cyl.base.name().into(),
        q0: Some(q0.to_vec()),
        s0: Some(s0),
        r: Some(r),
        in_regime: r <= cyl.base.localization_radius(),
        ..Default::default()
    };
    let mut e = ConstantEstimate::new(Theorem::HolderDecay, alpha, members, family[0].lattice.h, geometry);
    e.secondary = Some(c);
    Ok(e)
}

/// Points of `B_ρ(q) ∩ Ω̄` on a polar grid, plus `q`.
fn ball_points(dom: &DomainSpec, q: &[f64], rho: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![q.to_vec()];
    if q.len() == 1 {
        for k in 1..=32 {
            for s in [-1.0, 1.0] {
                let x = vec![q[0] + s * rho * k as f64 / 32.0];
                if dom.contains_closure(&x) {
                    pts.push(x);
                }
            }
        }
        return pts;
    }
    for k in 1..=16 {
        let rr = rho * k as f64 / 16.0;
        for j in 0..64 {
            let a = 2.0 * PI * j as f64 / 64.0;
            let x = vec![q[0] + rr * a.cos(), q[1] + rr * a.sin()];
            if dom.contains_closure(&x) {
                pts.push(x);
            }
        }
    }
    pts
}

fn carleson_member(f: &GridField, cyl: &Cylinder, q0: &[f64], s0: f64, r: f64) -> Result<MemberValue> {
    let (upper, _) = corkscrew_points(cyl, q0, s0, r)?;
    let a = sample(f, &upper)?;
    if !(a > floor_of(f)) {
        return Err(Error::NoiseFloor(format!("u(Ā_r) = {a:e} for member {}", label(f))));
    }
    let rho = r / 8.0;
    let pts = ball_points(&cyl.base, q0, rho);
    let mut times: Vec<f64> = f.times.iter().copied().filter(|t| (t - s0).abs() < rho * rho).collect();
    let eps = 1e-9 * rho * rho;
    times.extend([s0 - rho * rho + eps, s0, s0 + rho * rho - eps].iter().filter(|&&t| t >= 0.0 && t <= cyl.horizon));
    let mut sup = 0.0f64;
    for &t in &times {
        for x in &pts {
            if let Some(v) = f.sample(x, t) {
                sup = sup.max(v);
            }
        }
    }
    // growth profile along the corkscrew ray at t = s₀: worst ratio between consecutive dyadic depths
    let nu: Vec<f64> = upper.x.iter().zip(q0).map(|(a, b)| (a - b) / r).collect();
    let layers = ((r / f.lattice.h).log2().floor() as i32).clamp(1, 8);
    let mut worst = 1.0f64;
    let mut prev = None;
    for k in 0..=layers {
        let x: Vec<f64> = q0.iter().zip(&nu).map(|(q, n)| q + n * r / 2f64.powi(k)).collect();
        let v = f.sample(&x, s0).unwrap_or(0.0);
        if let Some(p) = prev {
            if v > floor_of(f) {
                worst = worst.max(p / v);
            }
        }
        prev = Some(v);
    }
    Ok(MemberValue { label: label(f), seed: f.meta.seed, value: sup / a, aux: Some(worst) })
}

/// `sup_{Ψ_{r/8}(Q₀,s₀)} u / u(Ā_r(Q₀,s₀))` per member; the supremum runs over a polar
/// grid interpolated from the lattice. `secondary` is the worst dyadic growth factor.
pub fn estimate_carleson(family: &[GridField], q0: &[f64], s0: f64, r: f64) -> Result<ConstantEstimate> {
    nonempty(family)?;
    let cyl = cylinder_of(&family[0])?;
    let members = family.iter().map(|f| carleson_member(f, &cyl, q0, s0, r)).collect::<Result<Vec<_>>>()?;
    let est = members.iter().map(|m| m.value).fold(0.0f64, f64::max);
    let growth = members.iter().filter_map(|m| m.aux).fold(0.0f64, f64::max);
    let t = cyl.horizon;
    let limit = (cyl.base.localization_radius() / 10.0).min((s0 / 8.0).sqrt()).min(((t - s0) / 8.0).sqrt());
    let geometry = EstimateGeometry {
        domain: cyl.base.name().into(),
        q0: Some(q0.to_vec()),
        s0: Some(s0),
        r: Some(r),
        in_regime: r <= limit,
        note: Some(format!("smallness limit min(r0/10, √(s0/8), √((T−s0)/8)) = {limit}")),
        ..Default::default()
    };
    let mut e = ConstantEstimate::new(Theorem::Carleson, est, members, family[0].lattice.h, geometry);
    e.secondary = Some(growth);
    Ok(e)
}

fn require_lateral_zero(f: &GridField) -> Result<()> {
    if f.meta.lateral != 0.0 {
        return Err(Error::Precondition(format!(
            "member {} does not vanish on the lateral boundary (lateral value {})",
            label(f),
            f.meta.lateral
        )));
    }
    Ok(())
}

/// `max / min` of each member over the lattice of `Ω_δ × (δ², T)`.
pub fn estimate_boundary_harnack_elliptic(family: &[GridField], delta: f64) -> Result<ConstantEstimate> {
    nonempty(family)?;
    let dom = family[0].meta.domain.clone();
    let mut members = Vec::new();
    for f in family {
        require_lateral_zero(f)?;
        let nodes = nodes_where(f, |x, t| t > delta * delta && dom.boundary_distance(x) > delta);
        if nodes.is_empty() {
            return Err(Error::InsufficientPoints(format!("no lattice point in Ω_δ × (δ², T) for δ = {delta}")));
        }
        let (lo, hi) = nodes.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &s| (a.min(value(f, s)), b.max(value(f, s))));
        if !(lo > floor_of(f)) {
            return Err(Error::NoiseFloor(format!("min over Ω_δ,T is {lo:e} for member {}", label(f))));
        }
        members.push(MemberValue { label: label(f), seed: f.meta.seed, value: hi / lo, aux: None });
    }
    let est = members.iter().map(|m| m.value).fold(0.0f64, f64::max);
    let geometry =
        EstimateGeometry { domain: dom.name().into(), delta: Some(delta), in_regime: true, ..Default::default() };
    Ok(ConstantEstimate::new(Theorem::BoundaryHarnackElliptic, est, members, family[0].lattice.h, geometry))
}

fn require_c11(dom: &DomainSpec) -> Result<f64> {
    dom.r0_threshold().ok_or_else(|| Error::Precondition(format!("{} base is not C^{{1,1}}", dom.name())))
}

fn comparison_bounds(
    u: &GridField,
    v: &GridField,
    nodes: &[(usize, usize)],
    lo_norm: f64,
    hi_norm: f64,
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &s in nodes {
        let (a, b) = (value(u, s), value(v, s));
        if !(b > floor_of(v)) {
            return Err(Error::NoiseFloor(format!("v = {b:e} inside the window for member {}", label(v))));
        }
        let q = a / b;
        lo = lo.min(q * lo_norm);
        hi = hi.max(q * hi_norm);
    }
    if nodes.is_empty() {
        return Err(Error::InsufficientPoints("no interior lattice point in the window".into()));
    }
    Ok((lo, hi))
}

fn local_comparison(u: &GridField, v: &GridField, q0: &[f64], s0: f64, r: f64, exploratory: bool) -> Result<ConstantEstimate> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch("comparison needs both members on one grid".into()));
    }
    let cyl = cylinder_of(u)?;
    let r0 = if exploratory { cyl.base.r0_threshold() } else { Some(require_c11(&cyl.base)?) };
    let a = u.meta.ell.a.max(v.meta.ell.a);
    let (upper, lower) = corkscrew_points(&cyl, q0, s0, r)?;
    let (ua, ul) = (sample(u, &upper)?, sample(u, &lower)?);
    let (va, vl) = (sample(v, &upper)?, sample(v, &lower)?);
    for (x, f) in [(ua, u), (ul, u), (va, v), (vl, v)] {
        if !(x > floor_of(f)) {
            return Err(Error::NoiseFloor(format!("corkscrew value {x:e} for member {}", label(f))));
        }
    }
    let nodes = nodes_where(u, |x, t| dist(x, q0) < r && (t - s0).abs() < r * r);
    // (1/C)·u(A̲)/v(Ā) ≤ u/v ≤ C·u(Ā)/v(A̲)
    let (lo, hi) = comparison_bounds(u, v, &nodes, va / ul, vl / ua)?;
    let c = hi.max(1.0 / lo);
    let members = vec![
        MemberValue { label: label(u), seed: u.meta.seed, value: ua, aux: Some(ul) },
        MemberValue { label: label(v), seed: v.meta.seed, value: va, aux: Some(vl) },
    ];
    let in_regime = r0.is_some_and(|r0| r <= r0) && (a == 0.0 || r <= 1.0 / (4.0 * a));
    let geometry = EstimateGeometry {
        domain: cyl.base.name().into(),
        q0: Some(q0.to_vec()),
        s0: Some(s0),
        r: Some(r),
        in_regime,
        note: exploratory.then(|| "exploratory: base is not C^{1,1}".to_string()),
        ..Default::default()
    };
    let mut e = ConstantEstimate::new(Theorem::LocalComparison, c, members, u.lattice.h, geometry);
    e.bounds = Some((lo, hi));
    Ok(e)
}

/// Normalized two-sided bounds of `u/v` over `Ψ_r(Q₀,s₀)`:
/// `lower = inf (u/v)·v(Ā)/u(A̲)`, `upper = sup (u/v)·v(A̲)/u(Ā)`; the constant is `max(upper, 1/lower)`.
pub fn estimate_local_comparison(u: &GridField, v: &GridField, q0: &[f64], s0: f64, r: f64) -> Result<ConstantEstimate> {
    local_comparison(u, v, q0, s0, r, false)
}

/// The same quotient on a base that is only Lipschitz; no theorem covers the result.
pub fn estimate_local_comparison_exploratory(
    u: &GridField,
    v: &GridField,
    q0: &[f64],
    s0: f64,
    r: f64,
) -> Result<ConstantEstimate> {
    local_comparison(u, v, q0, s0, r, true)
}

/// Fits `u(Q + δrν, s)` against `δ ∈ (0, δ_max]` at lattice spacing along the inward normal.
/// `value` is the fitted exponent, `bounds` are `(C₁, C₂)` with
/// `C₁ δ u(A̲_r) ≤ u ≤ C₂ δ u(Ā_r)`.
pub fn estimate_linear_rate(member: &GridField, q: &[f64], s: f64, r: f64, delta_max: f64) -> Result<ConstantEstimate> {
    let f = member;
    let cyl = cylinder_of(f)?;
    let r0 = require_c11(&cyl.base)?;
    let nu = cyl.base.inward_normal(q)?;
    let (upper, lower) = corkscrew_points(&cyl, q, s, r)?;
    let (ua, ul) = (sample(f, &upper)?, sample(f, &lower)?);
    if !(ul > floor_of(f)) || !(ua > floor_of(f)) {
        return Err(Error::NoiseFloor(format!("corkscrew values {ul:e}, {ua:e} for member {}", label(f))));
    }
    let h = f.lattice.h;
    let count = (delta_max * r / h * (1.0 + 1e-9)).floor() as usize;
    if count < 3 {
        return Err(Error::InsufficientPoints(format!(
            "segment of length {} holds {count} lattice steps; need 3",
            delta_max * r
        )));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    for k in 1..=count {
        let delta = k as f64 * h / r;
        let x: Vec<f64> = q.iter().zip(&nu).map(|(a, n)| a + delta * r * n).collect();
        let v = sample(f, &PointTime::new(x, s))?;
        if !(v > floor_of(f)) {
            return Err(Error::NoiseFloor(format!("u = {v:e} on the normal segment of {}", label(f))));
        }
        xs.push(delta.ln());
        ys.push(v.ln());
        c1 = c1.min(v / (delta * ul));
        c2 = c2.max(v / (delta * ua));
    }
    let (exponent, _) = fit_line(&xs, &ys)?;
    let geometry = EstimateGeometry {
        domain: cyl.base.name().into(),
        q0: Some(q.to_vec()),
        s0: Some(s),
        r: Some(r),
        delta: Some(delta_max),
        in_regime: r <= r0,
        ..Default::default()
    };
    let members = vec![MemberValue { label: label(f), seed: f.meta.seed, value: exponent, aux: Some(c2) }];
    let mut e = ConstantEstimate::new(Theorem::LinearRate, exponent, members, h, geometry);
    e.bounds = Some((c1, c2));
    Ok(e)
}

/// `sup u(x, t+4r²)/u(x, t)` over interior lattice nodes and saved times with
/// `t, t+4r² ∈ (2δ², T−δ²)`. Members with `b ≠ 0` are rejected.
pub fn estimate_backward_harnack(family: &[GridField], x0: &[f64], delta: f64, r: f64) -> Result<ConstantEstimate> {
    nonempty(family)?;
    let dom = family[0].meta.domain.clone();
    if !dom.contains(x0) {
        return Err(Error::Precondition(format!("X₀ = {x0:?} is not in Ω")));
    }
    let shift = 4.0 * r * r;
    let mut members = Vec::new();
    for f in family {
        if f.meta.ell.b != 0.0 {
            return Err(Error::Precondition(format!("member {} has b = {} ≠ 0", label(f), f.meta.ell.b)));
        }
        require_lateral_zero(f)?;
        let t_hi = f.horizon - delta * delta;
        let nodes = nodes_where(f, |_, t| t > 2.0 * delta * delta && t + shift < t_hi);
        if nodes.is_empty() {
            return Err(Error::InsufficientPoints(format!("no saved time with t, t+4r² in (2δ², T−δ²) for r = {r}")));
        }
        let mut sup = 0.0f64;
        for &(k, i) in &nodes {
            let den = value(f, (k, i));
            if !(den > floor_of(f)) {
                return Err(Error::NoiseFloor(format!("u = {den:e} in F for member {}", label(f))));
            }
            let t = f.times[k] + shift;
            let num = match f.time_index(t) {
                Some(j) => f.slice(j)[i],
                None => sample(f, &PointTime::new(f.lattice.point(i), t))?,
            };
            sup = sup.max(num / den);
        }
        members.push(MemberValue { label: label(f), seed: f.meta.seed, value: sup, aux: None });
    }
    let est = members.iter().map(|m| m.value).fold(0.0f64, f64::max);
    let geometry = EstimateGeometry {
        domain: dom.name().into(),
        q0: Some(x0.to_vec()),
        r: Some(r),
        delta: Some(delta),
        in_regime: dom.tangent_ball_radius().is_some(),
        ..Default::default()
    };
    Ok(ConstantEstimate::new(Theorem::BackwardHarnack, est, members, family[0].lattice.h, geometry))
}

/// Two-sided bounds of `(u/v)·(v(X₀,T)/u(X₀,T))` over interior nodes of `Ω × (2δ², T−δ²)`.
pub fn estimate_global_comparison(u: &GridField, v: &GridField, x0: &[f64], delta: f64) -> Result<ConstantEstimate> {
    if !u.same_grid(v) {
        return Err(Error::GridMismatch("comparison needs both members on one grid".into()));
    }
    require_lateral_zero(u)?;
    require_lateral_zero(v)?;
    let dom = u.meta.domain.clone();
    let t_end = *u.times.last().expect("fields hold at least one slice");
    let ref_u = sample(u, &PointTime::new(x0.to_vec(), t_end))?;
    let ref_v = sample(v, &PointTime::new(x0.to_vec(), t_end))?;
    if !(ref_u > floor_of(u)) || !(ref_v > floor_of(v)) {
        return Err(Error::NoiseFloor(format!("reference values {ref_u:e}, {ref_v:e} at X₀")));
    }
    let t_hi = u.horizon - delta * delta;
    let nodes = nodes_where(u, |_, t| t > 2.0 * delta * delta && t < t_hi);
    let norm = ref_v / ref_u;
    let (lo, hi) = comparison_bounds(u, v, &nodes, norm, norm)?;
    let members = vec![
        MemberValue { label: label(u), seed: u.meta.seed, value: ref_u, aux: None },
        MemberValue { label: label(v), seed: v.meta.seed, value: ref_v, aux: None },
    ];
    let geometry = EstimateGeometry {
        domain: dom.name().into(),
        q0: Some(x0.to_vec()),
        delta: Some(delta),
        in_regime: dom.tangent_ball_radius().is_some(),
        ..Default::default()
    };
    let mut e = ConstantEstimate::new(Theorem::GlobalComparison, hi.max(1.0 / lo), members, u.lattice.h, geometry);
    e.bounds = Some((lo, hi));
    Ok(e)
}

/// `max_{|x−c| ≤ σr} u(x, t₀+r²) / min_{|x−c| ≤ σr} u(x, t₀+ηr²)` over lattice nodes.
pub fn estimate_interior_harnack(
    family: &[GridField],
    center: &[f64],
    t0: f64,
    eta: f64,
    sigma: f64,
    r: f64,
) -> Result<ConstantEstimate> {
    nonempty(family)?;
    if !(eta > 1.0) || !(sigma > 0.0 && sigma < 1.0) || !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("need η > 1, 0 < σ < 1, r > 0; got η={eta}, σ={sigma}, r={r}")));
    }
    let dom = family[0].meta.domain.clone();
    let n = center.len();
    for corner in 0..(1usize << n) {
        let x: Vec<f64> = (0..n).map(|k| center[k] + if corner >> k & 1 == 1 { r } else { -r }).collect();
        if !dom.contains_closure(&x) {
            return Err(Error::Precondition(format!("Q(η, r) leaves the base at {x:?}")));
        }
    }
    let mut members = Vec::new();
    for f in family {
        if t0 < 0.0 || t0 + eta * r * r > f.horizon + 1e-12 {
            return Err(Error::Precondition("Q(η, r) leaves the time window".into()));
        }
        let nodes: Vec<usize> = (0..f.lattice.len()).filter(|&i| dist(&f.lattice.point(i), center) <= sigma * r * (1.0 + 1e-12)).collect();
        if nodes.is_empty() {
            return Err(Error::InsufficientPoints(format!("no lattice node within σr = {} of the centre", sigma * r)));
        }
        let at = |i: usize, t: f64| sample(f, &PointTime::new(f.lattice.point(i), t));
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for &i in &nodes {
            hi = hi.max(at(i, t0 + r * r)?);
            lo = lo.min(at(i, t0 + eta * r * r)?);
        }
        if !(lo > floor_of(f)) {
            return Err(Error::NoiseFloor(format!("min = {lo:e} for member {}", label(f))));
        }
        members.push(MemberValue { label: label(f), seed: f.meta.seed, value: hi / lo, aux: None });
    }
    let est = members.iter().map(|m| m.value).fold(0.0f64, f64::max);
    let geometry = EstimateGeometry {
        domain: dom.name().into(),
        q0: Some(center.to_vec()),
        s0: Some(t0),
        r: Some(r),
        in_regime: true,
        note: Some(format!("eta = {eta}, sigma = {sigma}")),
        ..Default::default()
    };
    Ok(ConstantEstimate::new(Theorem::InteriorHarnack, est, members, family[0].lattice.h, geometry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{heat_reference, sector_mode_rate, FieldMeta, HeatMode, Lattice, DEFAULT_C_CFL};

    fn meta(dom: DomainSpec, label: &str) -> FieldMeta {
        FieldMeta {
            label: label.into(),
            problem: "closed_form".into(),
            domain: dom,
            ell: Ellipticity::pucci(1.0, 1.0).unwrap(),
            seed: None,
            lateral: 0.0,
        }
    }

    fn strip_sine(h: f64, horizon: f64, n_save: usize) -> GridField {
        let dom = DomainSpec::Interval { length: 1.0 };
        let lat = Lattice::for_domain(&dom, h, 2).unwrap();
        let times = (0..=n_save).map(|k| horizon * k as f64 / n_save as f64).collect();
        GridField::from_fn(lat, times, horizon, meta(dom, "strip_sine"), |x, t| {
            heat_reference(x, t, HeatMode::StripSine)
        })
    }

    #[test]
    fn holder_fit_on_the_strip_is_linear() {
        let f = strip_sine(1.0 / 256.0, 0.5, 256);
        let e = estimate_holder_decay(&[f], &[0.0], 0.2, 0.2).unwrap();
        assert!((e.estimate - 1.0).abs() < 0.1, "{}", e.estimate);
    }

    #[test]
    fn holder_fit_at_the_reentrant_vertex() {
        let aperture = 1.5 * PI;
        let dom = DomainSpec::Sector { aperture, radius: 1.0 };
        let lat = Lattice::for_domain(&dom, 1.0 / 256.0, 2).unwrap();
        let rate = sector_mode_rate(aperture, 1.0);
        let datum = InitialDatum::SectorMode { amplitude: 1.0 };
        let times: Vec<f64> = (0..=8).map(|k| 0.1 + 0.0025 * k as f64).collect();
        let f = GridField::from_fn(lat, times, 0.2, meta(dom.clone(), "caloric"), |x, t| {
            datum.evaluate(&dom, x).unwrap() * (-rate * t).exp()
        });
        let e = estimate_holder_decay(&[f], &[0.0, 0.0], 0.11, 0.1).unwrap();
        assert!((e.estimate - 2.0 / 3.0).abs() < 0.05, "{}", e.estimate);
    }

    #[test]
    fn zero_member_is_a_degenerate_fit() {
        let f = strip_sine(1.0 / 64.0, 0.5, 16).scaled(0.0);
        assert!(matches!(estimate_holder_decay(&[f], &[0.0], 0.2, 0.2), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn carleson_on_the_strip_matches_the_closed_form() {
        let f = strip_sine(1.0 / 256.0, 0.5, 50);
        let r: f64 = 0.2;
        let e = estimate_carleson(&[f.clone()], &[0.0], 0.2, r).unwrap();
        let exact = (PI * r / 8.0).sin() / (PI * r).sin() * (PI * PI * (2.0 + 1.0 / 64.0) * r * r).exp();
        assert!((e.estimate - exact).abs() < 2e-3 * exact, "{} vs {exact}", e.estimate);
        assert!(e.estimate < 1.5);
        let doubled = estimate_carleson(&[f.scaled(2.0)], &[0.0], 0.2, r).unwrap();
        assert_eq!(doubled.estimate, e.estimate);
        assert_eq!(doubled.secondary, e.secondary);
    }

    #[test]
    fn elliptic_boundary_harnack_on_the_strip() {
        let f = strip_sine(1.0 / 64.0, 0.5, 50);
        let e = estimate_boundary_harnack_elliptic(&[f.clone()], 0.2).unwrap();
        // max at x = 1/2, t just above δ²; min at the slab's edge x ≈ δ, t = T
        let mask = f.mask();
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for (k, &t) in f.times.iter().enumerate() {
            for i in 0..f.lattice.len() {
                let x = f.lattice.point(i);
                if mask[i] && t > 0.04 && x[0] > 0.2 && x[0] < 0.8 {
                    let v = heat_reference(&x, t, HeatMode::StripSine);
                    hi = hi.max(v);
                    lo = lo.min(v);
                }
            }
            let _ = k;
        }
        assert!((e.estimate - hi / lo).abs() < 1e-12 * e.estimate);
        assert_eq!(estimate_boundary_harnack_elliptic(&[f.scaled(2.0)], 0.2).unwrap().estimate, e.estimate);
        let mut raised = f.clone();
        raised.meta.lateral = 0.5;
        assert!(matches!(estimate_boundary_harnack_elliptic(&[raised], 0.2), Err(Error::Precondition(_))));
    }

    #[test]
    fn backward_harnack_on_the_strip_is_the_decay_factor() {
        let f = strip_sine(1.0 / 128.0, 0.5, 200);
        for r in [0.05, 0.1] {
            let e = estimate_backward_harnack(&[f.clone()], &[0.5], 0.1, r).unwrap();
            assert!((e.estimate - (-4.0 * PI * PI * r * r).exp()).abs() < 1e-3, "{}", e.estimate);
        }
        let mut with_b = f.clone();
        with_b.meta.ell.b = 0.5;
        assert!(matches!(estimate_backward_harnack(&[with_b], &[0.5], 0.1, 0.05), Err(Error::Precondition(_))));
    }

    #[test]
    fn comparison_quotients_are_homogeneous() {
        let f = strip_sine(1.0 / 128.0, 0.5, 100);
        let same = estimate_global_comparison(&f, &f, &[0.5], 0.1).unwrap();
        assert_eq!(same.bounds, Some((1.0, 1.0)));
        let twice = estimate_global_comparison(&f.scaled(2.0), &f, &[0.5], 0.1).unwrap();
        assert_eq!(twice.bounds, same.bounds);
        let local = estimate_local_comparison(&f, &f, &[0.0], 0.2, 0.1).unwrap();
        let local2 = estimate_local_comparison(&f.scaled(2.0), &f, &[0.0], 0.2, 0.1).unwrap();
        assert_eq!(local.bounds, local2.bounds);
        let (lo, hi) = local.bounds.unwrap();
        assert!(lo <= 1.0 && hi >= 1.0 && lo > 0.5 && hi < 2.0, "{lo} {hi}");
    }

    #[test]
    fn linear_rate_of_the_sine() {
        let f = strip_sine(1.0 / 128.0, 1.0, 100);
        let e = estimate_linear_rate(&f, &[0.0], 0.5, 0.2, 0.25).unwrap();
        assert!((e.estimate - 1.0).abs() < 0.05, "{}", e.estimate);
        let (c1, c2) = e.bounds.unwrap();
        assert!(c1 <= c2);
        assert!(matches!(estimate_linear_rate(&f, &[0.0], 0.5, 0.2, LINEAR_RATE_DELTA_MAX), Err(Error::InsufficientPoints(_))));
        assert!(estimate_linear_rate(&f.scaled(0.0), &[0.0], 0.5, 0.2, 0.25).is_err());
    }

    #[test]
    fn interior_harnack_of_the_heat_kernel() {
        let dom = DomainSpec::Square { center: vec![0.0, 0.0], side: 3.0 };
        let lat = Lattice::for_domain(&dom, 1.0 / 64.0, 2).unwrap();
        let (eta, sigma, r, tau) = (2.0, 0.5, 0.5, 0.05);
        let times = vec![0.0, r * r, eta * r * r];
        let f = GridField::from_fn(lat, times, eta * r * r, meta(dom, "gaussian"), |x, t| {
            heat_reference(x, t + tau, HeatMode::Gaussian)
        });
        let e = estimate_interior_harnack(&[f.clone()], &[0.0, 0.0], 0.0, eta, sigma, r).unwrap();
        let exact = heat_reference(&[0.0, 0.0], r * r + tau, HeatMode::Gaussian)
            / heat_reference(&[sigma * r, 0.0], eta * r * r + tau, HeatMode::Gaussian);
        assert!((e.estimate - exact).abs() < 1e-12 * exact, "{} vs {exact}", e.estimate);
        let constant = f.scaled(0.0);
        let mut c = constant.clone();
        c.data.iter_mut().for_each(|v| *v = 3.0);
        assert_eq!(estimate_interior_harnack(&[c], &[0.0, 0.0], 0.0, eta, sigma, r).unwrap().estimate, 1.0);
    }

    #[test]
    fn refinement_needs_three_grids() {
        let run = |h: f64| estimate_backward_harnack(&[strip_sine(h, 0.5, 200)], &[0.5], 0.1, 0.1);
        assert!(matches!(refinement_study(&[1.0 / 32.0], DEFAULT_THRESHOLD, run), Err(Error::SeriesRequired(1))));
        let rep = refinement_study(&[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0], DEFAULT_THRESHOLD, run).unwrap();
        assert!(rep.pass && rep.deviations.iter().all(|&d| d < 1e-3), "{:?}", rep.deviations);
        assert!(rep.to_csv_rows().lines().count() == 3);
        assert!(rep.to_json().contains("\"backward_harnack\""));
    }

    #[test]
    fn family_members_are_nonnegative_and_bounded() {
        let cyl = Cylinder::new(DomainSpec::Interval { length: 1.0 }, 0.1).unwrap();
        let fam = SolutionFamily::build(&FamilySpec::default(), &cyl, 1.0 / 32.0, 10, DEFAULT_C_CFL).unwrap();
        assert_eq!(fam.fields.len(), 12);
        assert_eq!(fam.members.iter().filter(|m| m.seed.is_some()).count(), 4);
        let e = estimate_boundary_harnack_elliptic(&fam.fields, 0.2).unwrap();
        assert!(e.estimate.is_finite() && e.estimate >= 1.0);
    }

    #[test]
    fn time_shifted_copies_give_identical_estimates() {
        let f = strip_sine(1.0 / 128.0, 0.5, 64);
        let tau = 0.0625;
        let mut g = f.clone();
        g.times.iter_mut().for_each(|t| *t += tau);
        g.horizon += tau;
        let a = estimate_holder_decay(&[f.clone()], &[0.0], 0.25, 0.2).unwrap();
        let b = estimate_holder_decay(&[g.clone()], &[0.0], 0.25 + tau, 0.2).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }
}
