use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use pucci_lab::barriers::{
    build_wedge_barrier, calibrate_exponent, certify_cone, certify_wedge, flat_model_setup, solve_cone_profile,
    verify_differential_inequality, Barrier, ExponentKind, Requirement, SampleDensity,
};
use pucci_lab::geometry::{Cylinder, DomainSpec};
use pucci_lab::harness::{self, ConstantEstimate, FamilySpec, SolutionFamily, StabilityReport, Theorem};
use pucci_lab::operators::{Ellipticity, SymMatrix};
use pucci_lab::solver::{
    heat_reference, solve, CoefficientSpec, FieldMeta, GridField, GridSpec, HeatMode, Lattice, OperatorKind,
    ProblemSpec, LATTICE_PAD,
};
use pucci_lab::Error;
use serde_json::json;

use crate::artifacts::{Artifacts, Manifest};
use crate::config::{require, BarrierSection, Command, ConfigError, EstimateSection, RunConfig, Source, SweepParameter};

pub const SWEEP_HEADER: &str = "# pucci-lab sweep csv v1\nparameter,value,quantity,domain,grid,estimate,deviation,pass,seed\n";
pub const SOLVE_HEADER: &str = "# pucci-lab solve csv v1\ngrid,ht,n_steps,error,ratio\n";
pub const REPORT_HEADER: &str = "# pucci-lab report csv v1\nsource,command,status,files,verified,mismatches\n";

/// Why a run stopped early.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Compute(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            // parameters that only the configuration could have supplied
            Error::InvalidParameter(_)
            | Error::Precondition(_)
            | Error::SeriesRequired(_)
            | Error::RegionMismatch(_)
            | Error::GridMismatch(_)
            | Error::CflViolation { .. } => Failure::Config(e.to_string()),
            other => Failure::Compute(other),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

pub struct Outcome {
    pub pass: bool,
    pub artifacts: Artifacts,
    pub timings: Vec<(String, u128)>,
}

pub struct Context<'a> {
    pub config: &'a RunConfig,
    pub config_dir: &'a Path,
    pub seed: Option<u64>,
}

impl Context<'_> {
    fn cylinder(&self) -> Res<Cylinder> {
        let dom = require(&self.config.domain, "domain")?.clone();
        let horizon = *require(&self.config.horizon, "horizon")?;
        Ok(Cylinder::new(dom, horizon)?)
    }

    fn grid(&self) -> Res<&crate::config::GridSection> {
        let g = require(&self.config.grid, "grid")?;
        if g.hx.is_empty() {
            return Err(Failure::Config("`grid.hx` is empty".into()));
        }
        Ok(g)
    }

    fn problem(&self) -> Res<ProblemSpec> {
        let mut p = require(&self.config.problem, "problem")?.clone();
        if let (Some(s), OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Random { seed, .. } }) =
            (self.seed, &mut p.operator)
        {
            *seed = s;
        }
        Ok(p)
    }

    fn family(&self) -> FamilySpec {
        let mut spec = self.config.family.clone().unwrap_or_default();
        if let Some(s) = self.seed {
            spec.linear_seeds = (0..spec.linear_seeds.len() as u64).map(|k| s + k).collect();
        }
        spec
    }
}

pub fn execute(cmd: Command, ctx: &Context) -> Res<Outcome> {
    match cmd {
        Command::Solve => run_solve(ctx),
        Command::BarrierVerify => run_barrier(ctx),
        Command::Estimate => run_estimate(ctx),
        Command::Sweep => run_sweep(ctx),
        Command::Report => run_report(ctx),
    }
}

fn ms(t: Instant) -> u128 {
    t.elapsed().as_millis()
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

// ---------------------------------------------------------------------------
// solve

fn oracle_error(f: &GridField, mode: HeatMode, offset: f64) -> f64 {
    let mask = f.mask();
    let mut err = 0.0f64;
    for (k, &t) in f.times.iter().enumerate() {
        let u = f.slice(k);
        for i in (0..u.len()).filter(|&i| mask[i]) {
            err = err.max((u[i] - heat_reference(&f.lattice.point(i), t + offset, mode)).abs());
        }
    }
    err
}

fn run_solve(ctx: &Context) -> Res<Outcome> {
    let cyl = ctx.cylinder()?;
    let problem = ctx.problem()?;
    let grid = ctx.grid()?;
    let mut art = Artifacts::default();
    let mut timings = Vec::new();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (k, &hx) in grid.hx.iter().enumerate() {
        let t0 = Instant::now();
        let gs = GridSpec::for_problem(cyl.clone(), hx, &problem, grid.n_save, grid.c_cfl)?;
        let field = solve(&problem, &gs)?;
        timings.push((format!("solve_{k}"), ms(t0)));
        let error = ctx.config.oracle.as_ref().map(|o| oracle_error(&field, o.kind, o.t_offset));
        if let Some(e) = error {
            errors.push(e);
        }
        rows.push(json!({ "hx": hx, "ht": gs.ht, "n_steps": gs.n_steps, "save_every": gs.save_every, "error": error }));
        art.add(format!("field_{k}.bin"), field.to_bytes());
        art.add(format!("field_{k}.csv"), field.to_csv());
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = match &ctx.config.oracle {
        None => true,
        Some(o) => {
            let last = *errors.last().expect("at least one grid");
            last.is_finite() && last < o.tolerance && o.min_ratio.is_none_or(|m| ratios.iter().all(|&r| r >= m))
        }
    };
    let mut csv = String::from(SOLVE_HEADER);
    for (k, row) in rows.iter().enumerate() {
        let ratio = if k == 0 { String::new() } else { ratios.get(k - 1).map(|r| r.to_string()).unwrap_or_default() };
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row["hx"],
            row["ht"],
            row["n_steps"],
            errors.get(k).map(|e| e.to_string()).unwrap_or_default(),
            ratio
        );
    }
    let summary = json!({
        "problem": problem,
        "domain": cyl.base,
        "horizon": cyl.horizon,
        "grids": rows,
        "ratios": ratios,
        "pass": pass,
    });
    art.add("summary.json", pretty(&summary));
    art.add("summary.csv", csv);
    Ok(Outcome { pass, artifacts: art, timings })
}

// ---------------------------------------------------------------------------
// barrier-verify

fn run_barrier(ctx: &Context) -> Res<Outcome> {
    let section = require(&ctx.config.barrier, "barrier")?;
    let t0 = Instant::now();
    let density = |d: &Option<SampleDensity>| d.unwrap_or_default();
    let (pass, report) = match section {
        BarrierSection::Exp { ell, s, r, horizon, gamma, parameter, density: d } => {
            let mut setup = flat_model_setup(*s, *r, *horizon)?;
            setup.gamma = *gamma;
            match parameter {
                Some(alpha) => {
                    let bar = Barrier::Exp(setup.exp_barrier(*alpha)?);
                    let rep = verify_differential_inequality(&bar, &setup.lens()?, ell, Requirement::SubsolutionOfLminus, density(d))?;
                    (rep.pass, serde_json::to_value(&rep).expect("serializable"))
                }
                None => {
                    let cal = calibrate_exponent(ExponentKind::ExpAlpha, ell, &setup, density(d))?;
                    (cal.report.pass, serde_json::to_value(&cal).expect("serializable"))
                }
            }
        }
        BarrierSection::Power { ell, s, r, horizon, parameter, density: d } => {
            let setup = flat_model_setup(*s, *r, *horizon)?;
            match parameter {
                Some(k) => {
                    let bar = Barrier::Power(setup.power_barrier(*k, setup.c5(density(d))?)?);
                    let region = setup.power_region()?;
                    let rep = verify_differential_inequality(&bar, &region, ell, Requirement::SupersolutionOfLplus, density(d))?;
                    (rep.pass, serde_json::to_value(&rep).expect("serializable"))
                }
                None => {
                    let cal = calibrate_exponent(ExponentKind::PowerK, ell, &setup, density(d))?;
                    (cal.report.pass, serde_json::to_value(&cal).expect("serializable"))
                }
            }
        }
        BarrierSection::Cone { ell, aperture, density: d } => {
            let cone = solve_cone_profile(*aperture, ell)?;
            let cert = certify_cone(&cone, ell, density(d))?;
            let v = json!({
                "alpha": cone.alpha, "alpha_critical": cone.alpha_critical, "r0": cone.r0,
                "c": cone.c, "mu1": cone.mu1, "k": cone.k, "certificate": cert,
            });
            (cert.pass, v)
        }
        BarrierSection::Wedge { ell, aperture, r, kappa, density: d } => {
            let cone = solve_cone_profile(*aperture, ell)?;
            let w = build_wedge_barrier(&cone, r.unwrap_or(cone.r0), *kappa)?;
            let cert = certify_wedge(&w, ell, density(d))?;
            let v = json!({ "alpha": cone.alpha, "r0": cone.r0, "r": w.r, "kappa": kappa, "certificate": cert });
            (cert.pass, v)
        }
    };
    let mut art = Artifacts::default();
    art.add("margin.json", pretty(&report));
    Ok(Outcome { pass, artifacts: art, timings: vec![("verify".into(), ms(t0))] })
}

// ---------------------------------------------------------------------------
// estimate

fn strip_sine_field(dom: &DomainSpec, hx: f64, horizon: f64, n_save: usize) -> Res<GridField> {
    if *dom != (DomainSpec::Interval { length: 1.0 }) {
        return Err(Failure::Config("`estimate.source = \"strip_sine\"` needs the unit interval as `domain`".into()));
    }
    let lat = Lattice::for_domain(dom, hx, LATTICE_PAD)?;
    let times = (0..=n_save).map(|k| horizon * k as f64 / n_save as f64).collect();
    let meta = FieldMeta {
        label: "strip_sine".into(),
        problem: "strip_sine".into(),
        domain: dom.clone(),
        ell: Ellipticity::pucci(1.0, 1.0)?,
        seed: None,
        lateral: 0.0,
    };
    Ok(GridField::from_fn(lat, times, horizon, meta, |x, t| heat_reference(x, t, HeatMode::StripSine)))
}

fn members(ctx: &Context, source: Source, hx: f64) -> Res<Vec<GridField>> {
    let cyl = ctx.cylinder()?;
    let g = ctx.grid()?;
    Ok(match source {
        Source::Family => SolutionFamily::build(&ctx.family(), &cyl, hx, g.n_save, g.c_cfl)?.fields,
        Source::Problem => {
            let p = ctx.problem()?;
            vec![solve(&p, &GridSpec::for_problem(cyl, hx, &p, g.n_save, g.c_cfl)?)?]
        }
        Source::StripSine => vec![strip_sine_field(&cyl.base, hx, cyl.horizon, g.n_save)?],
    })
}

fn key<'a, T>(v: &'a Option<T>, name: &str, theorem: Theorem) -> Res<&'a T> {
    v.as_ref().ok_or_else(|| Failure::Config(format!("`estimate.{name}` is required for {}", theorem.tag())))
}

/// Runs the configured estimator; `r` and `delta` may be overridden by a sweep.
fn run_estimator(est: &EstimateSection, fields: &[GridField], r: Option<f64>, delta: Option<f64>) -> Res<ConstantEstimate> {
    let th = est.theorem;
    let r = r.or(est.r);
    let delta = delta.or(est.delta);
    let pair = est.pair.unwrap_or(if fields.len() > 1 { [0, 1] } else { [0, 0] });
    let pick = |k: usize| {
        fields.get(k).ok_or_else(|| Failure::Config(format!("`estimate.pair` index {k} exceeds {} members", fields.len())))
    };
    Ok(match th {
        Theorem::HolderDecay => harness::estimate_holder_decay(fields, key(&est.q0, "q0", th)?, *key(&est.s0, "s0", th)?, *key(&r, "r", th)?)?,
        Theorem::Carleson => harness::estimate_carleson(fields, key(&est.q0, "q0", th)?, *key(&est.s0, "s0", th)?, *key(&r, "r", th)?)?,
        Theorem::BoundaryHarnackElliptic => harness::estimate_boundary_harnack_elliptic(fields, *key(&delta, "delta", th)?)?,
        Theorem::LocalComparison => {
            let (u, v) = (pick(pair[0])?, pick(pair[1])?);
            let (q0, s0, r) = (key(&est.q0, "q0", th)?, *key(&est.s0, "s0", th)?, *key(&r, "r", th)?);
            if est.exploratory {
                harness::estimate_local_comparison_exploratory(u, v, q0, s0, r)?
            } else {
                harness::estimate_local_comparison(u, v, q0, s0, r)?
            }
        }
        Theorem::LinearRate => harness::estimate_linear_rate(
            pick(pair[0])?,
            key(&est.q0, "q0", th)?,
            *key(&est.s0, "s0", th)?,
            *key(&r, "r", th)?,
            est.delta_max.unwrap_or(harness::LINEAR_RATE_DELTA_MAX),
        )?,
        Theorem::BackwardHarnack => {
            harness::estimate_backward_harnack(fields, key(&est.x0, "x0", th)?, *key(&delta, "delta", th)?, *key(&r, "r", th)?)?
        }
        Theorem::GlobalComparison => {
            harness::estimate_global_comparison(pick(pair[0])?, pick(pair[1])?, key(&est.x0, "x0", th)?, *key(&delta, "delta", th)?)?
        }
        Theorem::InteriorHarnack => harness::estimate_interior_harnack(
            fields,
            key(&est.x0, "x0", th)?,
            *key(&est.t0, "t0", th)?,
            *key(&est.eta, "eta", th)?,
            *key(&est.sigma, "sigma", th)?,
            *key(&r, "r", th)?,
        )?,
    })
}

fn expectation_holds(est: &EstimateSection, value: f64) -> Res<bool> {
    match (est.expect, est.tolerance) {
        (None, None) => Ok(true),
        (Some(e), Some(tol)) => Ok((value - e).abs() <= tol),
        _ => Err(Failure::Config("`estimate.expect` and `estimate.tolerance` go together".into())),
    }
}

enum Study {
    Single(ConstantEstimate),
    Refined(StabilityReport),
}

impl Study {
    fn estimate(&self) -> f64 {
        match self {
            Study::Single(e) => e.estimate,
            Study::Refined(r) => r.finest.estimate,
        }
    }

    fn pass(&self) -> bool {
        self.estimate().is_finite() && matches!(self, Study::Single(_) | Study::Refined(StabilityReport { pass: true, .. }))
    }
}

fn study<F: Fn(usize) -> Res<ConstantEstimate>>(grids: &[f64], threshold: f64, run: F) -> Res<Study> {
    match grids.len() {
        1 => Ok(Study::Single(run(0)?)),
        3 => {
            // the harness closure returns library errors; carry config failures through a cell
            let failure = std::cell::RefCell::new(None);
            let res = harness::refinement_study(grids, threshold, |h| {
                let k = grids.iter().position(|&g| g == h).expect("grid from the series");
                run(k).map_err(|f| {
                    let msg = match &f {
                        Failure::Config(m) => m.clone(),
                        Failure::Compute(e) => e.to_string(),
                    };
                    *failure.borrow_mut() = Some(f);
                    Error::InvalidParameter(msg)
                })
            });
            match (res, failure.into_inner()) {
                (Ok(r), _) => Ok(Study::Refined(r)),
                (Err(_), Some(f)) => Err(f),
                (Err(e), None) => Err(e.into()),
            }
        }
        n => Err(Failure::Config(format!("`grid.hx` must list 1 or 3 steps for a constant estimate, got {n}"))),
    }
}

fn run_estimate(ctx: &Context) -> Res<Outcome> {
    let est = require(&ctx.config.estimate, "estimate")?;
    let grids = ctx.grid()?.hx.clone();
    let t0 = Instant::now();
    let result = study(&grids, est.threshold, |k| run_estimator(est, &members(ctx, est.source, grids[k])?, None, None))?;
    let pass = result.pass() && expectation_holds(est, result.estimate())?;
    let mut art = Artifacts::default();
    let (json_text, rows) = match &result {
        Study::Single(e) => (e.to_json(), e.to_csv_row()),
        Study::Refined(r) => (r.to_json(), r.to_csv_rows()),
    };
    art.add("estimate.json", json_text + "\n");
    art.add("estimate.csv", format!("{}{rows}", harness::CSV_HEADER));
    Ok(Outcome { pass, artifacts: art, timings: vec![("estimate".into(), ms(t0))] })
}

// ---------------------------------------------------------------------------
// sweep

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_sweep(ctx: &Context) -> Res<Outcome> {
    let sw = require(&ctx.config.sweep, "sweep")?;
    if sw.values.is_empty() {
        return Err(Failure::Config("`sweep.values` is empty".into()));
    }
    let grids = ctx.grid()?.hx.clone();
    let t0 = Instant::now();
    let mut csv = String::from(SWEEP_HEADER);
    let mut all_pass = true;
    let mut records = Vec::new();
    match sw.parameter {
        SweepParameter::R | SweepParameter::Delta => {
            let est = require(&ctx.config.estimate, "estimate")?;
            let cached = grids.iter().map(|&h| members(ctx, est.source, h)).collect::<Res<Vec<_>>>()?;
            for &value in &sw.values {
                let (r, d) = if sw.parameter == SweepParameter::R { (Some(value), None) } else { (None, Some(value)) };
                let res = study(&grids, est.threshold, |k| run_estimator(est, &cached[k], r, d))?;
                let (estimates, deviations, pass, seeds, domain) = match &res {
                    Study::Single(e) => (vec![e.estimate], vec![None], res.pass(), seeds_of(e), e.geometry.domain.clone()),
                    Study::Refined(rep) => {
                        let mut dev = vec![None];
                        dev.extend(rep.deviations.iter().map(|&d| Some(d)));
                        (rep.estimates.clone(), dev, res.pass(), seeds_of(&rep.finest), rep.domain.clone())
                    }
                };
                all_pass &= pass;
                for (k, (&h, e)) in grids.iter().zip(&estimates).enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{value},{},{domain},{h},{e},{},{pass},{seeds}",
                        sw.parameter.name(),
                        est.theorem.tag(),
                        fmt_opt(deviations[k])
                    );
                }
                records.push(json!({ "value": value, "estimates": estimates, "pass": pass }));
            }
        }
        SweepParameter::P => {
            let x0 = sw.x0.as_ref().ok_or_else(|| Failure::Config("`sweep.x0` is required for a p-sweep".into()))?;
            let cyl = ctx.cylinder()?;
            let base = ctx.problem()?;
            let g = ctx.grid()?;
            let n = cyl.base.dim();
            let heat = ProblemSpec {
                operator: OperatorKind::LinearNondiv { coefficients: CoefficientSpec::Constant { matrix: SymMatrix::identity(n) } },
                ell: Ellipticity::pucci(1.0, 1.0)?,
                ..base.clone()
            };
            for &h in &grids {
                let href = solve(&heat, &GridSpec::for_problem(cyl.clone(), h, &heat, g.n_save, g.c_cfl)?)?;
                let probe = |f: &GridField| f.sample(x0, cyl.horizon).ok_or_else(|| Failure::Config("`sweep.x0` lies outside the lattice".into()));
                let hp = probe(&href)?;
                let _ = writeln!(csv, "p,heat,linear_heat_probe,{},{h},{hp},,true,", cyl.base.name());
                for &p in &sw.values {
                    let pr = ProblemSpec { operator: OperatorKind::PLaplacian { p }, ..base.clone() };
                    let f = solve(&pr, &GridSpec::for_problem(cyl.clone(), h, &pr, g.n_save, g.c_cfl)?)?;
                    let dev = max_gap(&f, &href);
                    let pass = dev.is_finite() && (p != 2.0 || dev <= 1e-8);
                    all_pass &= pass;
                    let v = probe(&f)?;
                    let _ = writeln!(csv, "p,{p},probe,{},{h},{v},{dev},{pass},", cyl.base.name());
                    records.push(json!({ "p": p, "grid": h, "probe": v, "gap_to_linear_heat": dev, "pass": pass }));
                }
            }
        }
    }
    let mut art = Artifacts::default();
    art.add("sweep.csv", csv);
    art.add("sweep.json", pretty(&json!({ "parameter": sw.parameter.name(), "values": sw.values, "records": records, "pass": all_pass })));
    Ok(Outcome { pass: all_pass, artifacts: art, timings: vec![("sweep".into(), ms(t0))] })
}

fn seeds_of(e: &ConstantEstimate) -> String {
    e.members.iter().filter_map(|m| m.seed).map(|s| s.to_string()).collect::<Vec<_>>().join(";")
}

/// Max difference over saved slices at matching times; infinite when the layouts differ.
fn max_gap(a: &GridField, b: &GridField) -> f64 {
    if a.lattice != b.lattice || a.times.len() != b.times.len() {
        return f64::INFINITY;
    }
    if a.times.iter().zip(&b.times).any(|(s, t)| (s - t).abs() > 1e-9 * a.horizon) {
        return f64::INFINITY;
    }
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// report

fn run_report(ctx: &Context) -> Res<Outcome> {
    let rep = require(&ctx.config.report, "report")?;
    if rep.inputs.is_empty() {
        return Err(Failure::Config("`report.inputs` is empty".into()));
    }
    let t0 = Instant::now();
    let mut csv = String::from(REPORT_HEADER);
    let mut entries = Vec::new();
    let mut all_pass = true;
    for input in &rep.inputs {
        let dir = ctx.config_dir.join(input);
        let (command, status, files, mismatches) = match std::fs::read(dir.join(crate::artifacts::MANIFEST))
            .ok()
            .and_then(|b| serde_json::from_slice::<Manifest>(&b).ok())
        {
            None => ("".to_string(), "missing".to_string(), 0, vec!["manifest.json".to_string()]),
            Some(m) => {
                let bad: Vec<String> = m
                    .files
                    .iter()
                    .filter(|f| std::fs::read(dir.join(&f.name)).map(|b| crate::artifacts::sha256_hex(&b) != f.sha256).unwrap_or(true))
                    .map(|f| f.name.clone())
                    .collect();
                (m.command, m.status, m.files.len(), bad)
            }
        };
        let verified = mismatches.is_empty();
        all_pass &= verified && status == "pass";
        let _ = writeln!(csv, "{input},{command},{status},{files},{verified},{}", mismatches.join(";"));
        entries.push(json!({ "source": input, "command": command, "status": status, "files": files, "mismatches": mismatches }));
    }
    let mut art = Artifacts::default();
    art.add("report.csv", csv);
    art.add("report.json", pretty(&json!({ "inputs": entries, "pass": all_pass })));
    Ok(Outcome { pass: all_pass, artifacts: art, timings: vec![("report".into(), ms(t0))] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_shaped_errors_exit_as_config() {
        assert!(matches!(Failure::from(Error::SeriesRequired(2)), Failure::Config(_)));
        assert!(matches!(Failure::from(Error::InvalidParameter("x".into())), Failure::Config(_)));
        assert!(matches!(Failure::from(Error::DegenerateFit("x".into())), Failure::Compute(_)));
    }

    #[test]
    fn studies_need_one_or_three_grids() {
        let run = |_: usize| -> Res<ConstantEstimate> { unreachable!() };
        assert!(matches!(study(&[0.1, 0.05], 0.2, run), Err(Failure::Config(m)) if m.contains("grid.hx")));
    }

    #[test]
    fn strip_sine_needs_the_unit_interval() {
        let dom = DomainSpec::Interval { length: 2.0 };
        assert!(matches!(strip_sine_field(&dom, 0.1, 0.1, 2), Err(Failure::Config(_))));
        let f = strip_sine_field(&DomainSpec::Interval { length: 1.0 }, 0.125, 0.1, 2).unwrap();
        assert_eq!(f.times, vec![0.0, 0.05, 0.1]);
        assert_eq!(max_gap(&f, &f), 0.0);
    }
}
