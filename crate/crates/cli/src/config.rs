//! Run configuration: a TOML file with flat sections, plus sweep specs.

use std::fmt;
use std::str::FromStr;

use pn_atom::spectrum::AtomParameters;
use pn_atom::{PpnContext, UnitSystem, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(config_err(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpnSection {
    pub gamma: f64,
    pub beta: f64,
    pub phi_over_c2: f64,
    pub grad_phi: [f64; 3],
    pub weak_field_limit: f64,
}

impl Default for PpnSection {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            beta: 1.0,
            phi_over_c2: -1e-6,
            grad_phi: [0.0; 3],
            weak_field_limit: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitsSection {
    pub c: f64,
    pub epsilon0: f64,
    pub hbar: f64,
}

impl Default for UnitsSection {
    fn default() -> Self {
        let u = UnitSystem::atomic();
        Self {
            c: u.c,
            epsilon0: u.epsilon0,
            hbar: u.hbar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomSection {
    pub m1: f64,
    pub m2: f64,
    pub e: f64,
}

impl Default for AtomSection {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1836.152673,
            e: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub seed: u64,
    pub points: usize,
    /// Velocity scale of sampled phase points.
    pub velocity: f64,
    /// Position scale of sampled phase points.
    pub extent: f64,
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            seed: 1,
            points: 4,
            velocity: 1.0,
            extent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderCheckSection {
    /// Potential held fixed while `c` scales from `units.c`.
    pub phi: f64,
    /// Velocity scale held fixed while `c` scales.
    pub velocity: f64,
    pub lambdas: Vec<f64>,
    pub slope_tolerance: f64,
    pub min_r_squared: f64,
}

impl Default for OrderCheckSection {
    fn default() -> Self {
        Self {
            phi: -90.0,
            velocity: 10.0,
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            slope_tolerance: pn_atom::order::DEFAULT_SLOPE_TOLERANCE,
            min_r_squared: pn_atom::order::DEFAULT_MIN_R_SQUARED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub l: u32,
    pub levels: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { l: 0, levels: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub dt: f64,
    pub steps: usize,
    pub position: [f64; 3],
    pub momentum: [f64; 3],
    /// Internal level whose energy enters the composite mass.
    pub level: u32,
    /// Second run with this level, for the differential comparison.
    pub compare_level: Option<u32>,
    pub max_drift: f64,
    pub strict: bool,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            dt: 1.0,
            steps: 100,
            position: [0.0, 0.0, 0.0],
            momentum: [0.0, 0.0, 0.0],
            level: 1,
            compare_level: None,
            max_drift: 1e-6,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxwellSection {
    pub sigma: f64,
    /// Separation of the two charges.
    pub separation: f64,
    /// Margin of the box beyond the charges, in units of `sigma`.
    pub half_extent: f64,
    /// Coarsest spacing in units of `sigma`.
    pub spacing: f64,
    pub refinements: usize,
    pub order_range: [f64; 2],
}

impl Default for MaxwellSection {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            separation: 0.1,
            half_extent: 6.0,
            spacing: 0.25,
            refinements: 2,
            order_range: [1.8, 2.2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Gamma,
    Beta,
    PhiOverC2,
    C,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gamma => "gamma",
            Self::Beta => "beta",
            Self::PhiOverC2 => "phi_over_c2",
            Self::C => "c",
        }
    }
}

impl FromStr for SweepParameter {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "gamma" => Ok(Self::Gamma),
            "beta" => Ok(Self::Beta),
            "phi_over_c2" => Ok(Self::PhiOverC2),
            "c" => Ok(Self::C),
            other => Err(config_err(format!(
                "unknown sweep parameter {other:?}, expected gamma, beta, phi_over_c2 or c"
            ))),
        }
    }
}

/// A parameter and the values it takes, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSweep", into = "RawSweep")]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
}

impl From<SweepSpec> for RawSweep {
    fn from(s: SweepSpec) -> Self {
        Self {
            parameter: s.parameter,
            values: Some(s.values),
            start: None,
            stop: None,
            count: None,
        }
    }
}

impl TryFrom<RawSweep> for SweepSpec {
    type Error = CliError;
    fn try_from(raw: RawSweep) -> CliResult<Self> {
        match (raw.values, raw.start, raw.stop, raw.count) {
            (Some(values), None, None, None) => SweepSpec::from_values(raw.parameter, values),
            (None, Some(start), Some(stop), Some(count)) => SweepSpec::linspace(raw.parameter, start, stop, count),
            _ => Err(config_err(format!(
                "sweep over {} needs either `values` or all of `start`, `stop`, `count`",
                raw.parameter.name()
            ))),
        }
    }
}

impl SweepSpec {
    pub fn from_values(parameter: SweepParameter, values: Vec<f64>) -> CliResult<Self> {
        if values.is_empty() {
            return Err(config_err(format!("sweep over {} is empty", parameter.name())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(config_err(format!("sweep over {} has a non-finite value", parameter.name())));
        }
        Ok(Self { parameter, values })
    }

    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, count: usize) -> CliResult<Self> {
        if count == 0 || count > 100_000 {
            return Err(config_err(format!("sweep count must be in 1..=100000, got {count}")));
        }
        let values = if count == 1 {
            vec![start]
        } else {
            let step = (stop - start) / (count - 1) as f64;
            (0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect()
        };
        Self::from_values(parameter, values)
    }
}

/// `name=start:stop:count` or `name=v1,v2,...`.
impl FromStr for SweepSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        let (name, body) = s
            .split_once('=')
            .ok_or_else(|| config_err(format!("sweep {s:?} must look like name=start:stop:count or name=v1,v2")))?;
        let parameter: SweepParameter = name.parse()?;
        let number = |t: &str| -> CliResult<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("bad number {t:?} in sweep {s:?}")))
        };
        let parts: Vec<&str> = body.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let count = count
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| config_err(format!("bad count {count:?} in sweep {s:?}")))?;
                Self::linspace(parameter, number(start)?, number(stop)?, count)
            }
            [list] => Self::from_values(parameter, list.split(',').map(number).collect::<CliResult<_>>()?),
            _ => Err(config_err(format!("sweep {s:?} has {} ':'-separated fields", parts.len()))),
        }
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let values: Vec<String> = self.values.iter().map(|v| format!("{v:e}")).collect();
        write!(f, "{}={}", self.parameter.name(), values.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ppn: PpnSection,
    pub units: UnitsSection,
    pub atom: AtomSection,
    pub sampling: SamplingSection,
    pub output: OutputSection,
    pub sweep: Vec<SweepSpec>,
    pub order_check: OrderCheckSection,
    pub spectrum: SpectrumSection,
    pub trajectory: TrajectorySection,
    pub maxwell: MaxwellSection,
}

/// Upper bound on the size of the swept parameter grid.
pub const MAX_SWEEP_POINTS: usize = 100_000;

/// One point of the swept parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub beta: f64,
    pub phi_over_c2: f64,
    pub c: f64,
}

fn finite_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn units(&self) -> CliResult<UnitSystem> {
        self.units_with_c(self.units.c)
    }

    fn units_with_c(&self, c: f64) -> CliResult<UnitSystem> {
        UnitSystem::new(c, self.units.epsilon0, self.units.hbar).map_err(|e| config_err(e.to_string()))
    }

    pub fn atom(&self) -> AtomParameters {
        AtomParameters::hydrogen_like(self.atom.m1, self.atom.m2, self.atom.e)
    }

    pub fn grad_phi(&self) -> Vec3 {
        Vec3::from(self.ppn.grad_phi)
    }

    /// Cartesian product of the sweeps, first sweep outermost; the base
    /// parameters when there are none.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut points = vec![SweepPoint {
            gamma: self.ppn.gamma,
            beta: self.ppn.beta,
            phi_over_c2: self.ppn.phi_over_c2,
            c: self.units.c,
        }];
        for spec in &self.sweep {
            points = points
                .iter()
                .flat_map(|p| {
                    spec.values.iter().map(move |&v| {
                        let mut q = *p;
                        match spec.parameter {
                            SweepParameter::Gamma => q.gamma = v,
                            SweepParameter::Beta => q.beta = v,
                            SweepParameter::PhiOverC2 => q.phi_over_c2 = v,
                            SweepParameter::C => q.c = v,
                        }
                        q
                    })
                })
                .collect();
        }
        points
    }

    pub fn context(&self, point: &SweepPoint) -> CliResult<PpnContext> {
        let units = self.units_with_c(point.c)?;
        PpnContext::from_ratio(units, point.gamma, point.beta, point.phi_over_c2)
            .and_then(|ctx| ctx.with_weak_field_limit(self.ppn.weak_field_limit))
            .and_then(|ctx| ctx.with_gradient(self.grad_phi(), Vec3::zeros()))
            .map_err(|e| config_err(format!("at {point:?}: {e}")))
    }

    pub fn validate(&self) -> CliResult<()> {
        finite_positive("units.c", self.units.c)?;
        finite_positive("units.epsilon0", self.units.epsilon0)?;
        finite_positive("units.hbar", self.units.hbar)?;
        finite_positive("atom.m1", self.atom.m1)?;
        finite_positive("atom.m2", self.atom.m2)?;
        finite_positive("atom.e", self.atom.e)?;
        finite_positive("ppn.weak_field_limit", self.ppn.weak_field_limit)?;
        if self.ppn.grad_phi.iter().any(|g| !g.is_finite()) {
            return Err(config_err("ppn.grad_phi must be finite"));
        }
        if self.sampling.points == 0 || self.sampling.points > 10_000 {
            return Err(config_err("sampling.points must be in 1..=10000"));
        }
        finite_positive("sampling.velocity", self.sampling.velocity)?;
        finite_positive("sampling.extent", self.sampling.extent)?;
        let oc = &self.order_check;
        if !oc.phi.is_finite() {
            return Err(config_err("order_check.phi must be finite"));
        }
        finite_positive("order_check.velocity", oc.velocity)?;
        finite_positive("order_check.slope_tolerance", oc.slope_tolerance)?;
        if !(0.0..=1.0).contains(&oc.min_r_squared) {
            return Err(config_err("order_check.min_r_squared must be in [0, 1]"));
        }
        pn_atom::order::ScalingGrid::new(oc.lambdas.clone()).map_err(|e| config_err(format!("order_check.lambdas: {e}")))?;
        if self.spectrum.levels == 0 || self.spectrum.levels > 20 {
            return Err(config_err("spectrum.levels must be in 1..=20"));
        }
        if self.spectrum.l > 10 {
            return Err(config_err("spectrum.l must be at most 10"));
        }
        let tr = &self.trajectory;
        finite_positive("trajectory.dt", tr.dt)?;
        finite_positive("trajectory.max_drift", tr.max_drift)?;
        if tr.steps == 0 || tr.steps > 10_000_000 {
            return Err(config_err("trajectory.steps must be in 1..=10000000"));
        }
        if tr.position.iter().chain(&tr.momentum).any(|v| !v.is_finite()) {
            return Err(config_err("trajectory position and momentum must be finite"));
        }
        let level_ok = |n: u32| (1..=20).contains(&n);
        if !level_ok(tr.level) || !tr.compare_level.is_none_or(level_ok) {
            return Err(config_err("trajectory levels must be in 1..=20"));
        }
        let mx = &self.maxwell;
        finite_positive("maxwell.sigma", mx.sigma)?;
        finite_positive("maxwell.spacing", mx.spacing)?;
        if !(mx.separation >= 0.0 && mx.separation.is_finite()) {
            return Err(config_err("maxwell.separation must be non-negative"));
        }
        if !(6.0..=100.0).contains(&mx.half_extent) {
            return Err(config_err("maxwell.half_extent must be in [6, 100] (units of sigma)"));
        }
        if mx.refinements == 0 || mx.refinements > 4 {
            return Err(config_err("maxwell.refinements must be in 1..=4"));
        }
        if !(mx.order_range[0] < mx.order_range[1]) {
            return Err(config_err("maxwell.order_range must be increasing"));
        }
        let combinations = self.sweep.iter().try_fold(1usize, |n, s| n.checked_mul(s.values.len()));
        if combinations.is_none_or(|n| n > MAX_SWEEP_POINTS) {
            return Err(config_err(format!("sweeps span more than {MAX_SWEEP_POINTS} points")));
        }
        // Every swept context must satisfy the weak-field guard.
        for p in self.sweep_points() {
            self.context(&p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn sweep_strings() {
        let s: SweepSpec = "gamma=0:2:5".parse().unwrap();
        assert_eq!(s.values, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let s: SweepSpec = "phi_over_c2=0,-1e-6,-1e-9".parse().unwrap();
        assert_eq!(s.parameter, SweepParameter::PhiOverC2);
        assert_eq!(s.values, vec![0.0, -1e-6, -1e-9]);
        assert_eq!("c=100:100:1".parse::<SweepSpec>().unwrap().values, vec![100.0]);
        for bad in ["gamma", "delta=1", "gamma=1:2", "gamma=1:2:0", "gamma=", "beta=1,,2", "beta=nan", "gamma=1:2:x"] {
            assert!(bad.parse::<SweepSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        let s: SweepSpec = "beta=0.1:0.7:4".parse().unwrap();
        assert_eq!(s.to_string().parse::<SweepSpec>().unwrap(), s);
    }

    #[test]
    fn sweep_table_forms() {
        let cfg = RunConfig::from_toml_str(
            "[[sweep]]\nparameter = \"gamma\"\nstart = 0.0\nstop = 1.0\ncount = 3\n\n[[sweep]]\nparameter = \"beta\"\nvalues = [0.5, 1.5]\n",
        )
        .unwrap();
        let pts = cfg.sweep_points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].gamma, pts[0].beta), (0.0, 0.5));
        assert_eq!((pts[1].gamma, pts[1].beta), (0.0, 1.5));
        assert_eq!((pts[5].gamma, pts[5].beta), (1.0, 1.5));
        assert!(RunConfig::from_toml_str("[[sweep]]\nparameter = \"gamma\"\nvalues = []\n").is_err());
        assert!(RunConfig::from_toml_str("[[sweep]]\nparameter = \"gamma\"\nstart = 0.0\n").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml_str("[ppn]\ngama = 1.0\n").is_err());
        assert!(RunConfig::from_toml_str("[atom]\nm1 = -1.0\n").is_err());
        assert!(RunConfig::from_toml_str("[ppn]\nphi_over_c2 = -0.5\n").is_err());
        assert!(RunConfig::from_toml_str("[output]\nformat = \"xml\"\n").is_err());
        assert!(RunConfig::from_toml_str("[ppn\n").is_err());
        let wide = "[[sweep]]\nparameter = \"gamma\"\nstart = 0.0\nstop = 1.0\ncount = 1000\n";
        assert!(RunConfig::from_toml_str(&wide.repeat(2)).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.sweep.push("gamma=0,1".parse().unwrap());
        cfg.trajectory.compare_level = Some(2);
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
