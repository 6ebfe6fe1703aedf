//! TOML run configuration. Every table rejects unknown keys.

use std::path::Path;

use pucci_lab::barriers::SampleDensity;
use pucci_lab::geometry::DomainSpec;
use pucci_lab::harness::{FamilySpec, Theorem, DEFAULT_THRESHOLD};
use pucci_lab::operators::Ellipticity;
use pucci_lab::solver::{HeatMode, ProblemSpec, DEFAULT_C_CFL};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    BarrierVerify,
    Estimate,
    Sweep,
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::BarrierVerify => "barrier-verify",
            Command::Estimate => "estimate",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; when present it must match the command given on the command line.
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub domain: Option<DomainSpec>,
    pub horizon: Option<f64>,
    pub problem: Option<ProblemSpec>,
    pub grid: Option<GridSection>,
    pub oracle: Option<OracleSection>,
    pub family: Option<FamilySpec>,
    pub barrier: Option<BarrierSection>,
    pub estimate: Option<EstimateSection>,
    pub sweep: Option<SweepSection>,
    pub report: Option<ReportSection>,
}

fn ten() -> usize {
    10
}

fn default_cfl() -> f64 {
    DEFAULT_C_CFL
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Spatial steps, coarse to fine.
    pub hx: Vec<f64>,
    #[serde(default = "ten")]
    pub n_save: usize,
    #[serde(default = "default_cfl")]
    pub c_cfl: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub kind: HeatMode,
    /// Largest admissible max-norm error on the finest grid.
    pub tolerance: f64,
    /// Smallest admissible error ratio between consecutive grids.
    pub min_ratio: Option<f64>,
    /// Added to `t` before evaluating the closed form (the Gaussian is singular at 0).
    #[serde(default)]
    pub t_offset: f64,
}

fn default_gamma() -> f64 {
    1.0
}

fn default_kappa() -> u32 {
    pucci_lab::barriers::DEFAULT_KAPPA
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BarrierSection {
    /// Exponential barrier on the flat model; `parameter` is α, calibrated when omitted.
    Exp {
        ell: Ellipticity,
        s: f64,
        r: f64,
        #[serde(default = "one")]
        horizon: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        parameter: Option<f64>,
        density: Option<SampleDensity>,
    },
    /// Power barrier on the flat model; `parameter` is k, calibrated when omitted.
    Power {
        ell: Ellipticity,
        s: f64,
        r: f64,
        #[serde(default = "one")]
        horizon: f64,
        parameter: Option<f64>,
        density: Option<SampleDensity>,
    },
    /// Stationary cone barrier of half-aperture `aperture`.
    Cone { ell: Ellipticity, aperture: f64, density: Option<SampleDensity> },
    /// Time-dependent wedge barrier; `r` defaults to the cone's R0.
    Wedge {
        ell: Ellipticity,
        aperture: f64,
        r: Option<f64>,
        #[serde(default = "default_kappa")]
        kappa: u32,
        density: Option<SampleDensity>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// The 12-member family of the `[family]` table.
    #[default]
    Family,
    /// The single problem of the `[problem]` table.
    Problem,
    /// `e^{−π²t} sin(πx)` sampled on the lattice.
    StripSine,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub theorem: Theorem,
    #[serde(default)]
    pub source: Source,
    pub q0: Option<Vec<f64>>,
    pub s0: Option<f64>,
    pub r: Option<f64>,
    pub delta: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub t0: Option<f64>,
    pub eta: Option<f64>,
    pub sigma: Option<f64>,
    pub delta_max: Option<f64>,
    /// Member indices for the comparison estimators.
    pub pair: Option<[usize; 2]>,
    #[serde(default)]
    pub exploratory: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Expected value of the estimate and its tolerance, for closed-form checks.
    pub expect: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    R,
    Delta,
    P,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::R => "r",
            SweepParameter::Delta => "delta",
            SweepParameter::P => "p",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Probe point for p-sweeps.
    pub x0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    /// Output directories of earlier runs, relative to the config file.
    pub inputs: Vec<String>,
}

/// Schema or semantic problem in the configuration; the message names the key.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(e.message().to_string() + &span_hint(text, e.span())))
}

fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) if r.start < text.len() => {
            let line = text[..r.start].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        _ => String::new(),
    }
}

pub fn load(path: &Path) -> Result<(RunConfig, Vec<u8>), ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| ConfigError("config is not UTF-8".into()))?;
    Ok((parse(text)?, bytes))
}

pub fn require<'a, T>(v: &'a Option<T>, key: &str) -> Result<&'a T, ConfigError> {
    v.as_ref().ok_or_else(|| ConfigError(format!("missing key `{key}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_named() {
        let err = parse("[grid]\nhx = [0.1]\ncfll = 0.5\n").unwrap_err();
        assert!(err.0.contains("cfll"), "{}", err.0);
        let err = parse("horizon = 1.0\n[domain]\nkind = \"interval\"\nlength = 1.0\nwidth = 2.0\n").unwrap_err();
        assert!(err.0.contains("width"), "{}", err.0);
    }

    #[test]
    fn minimal_solve_config() {
        let cfg = parse(
            r#"
            command = "solve"
            horizon = 0.1
            [domain]
            kind = "interval"
            length = 1.0
            [problem]
            operator = { kind = "extremal_plus" }
            ell = { lambda = 1.0, Lambda = 1.0, a = 0.0 }
            initial = { kind = "sine" }
            [grid]
            hx = [0.03125, 0.015625]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.command, Some(Command::Solve));
        assert_eq!(cfg.grid.unwrap().n_save, 10);
    }
}
