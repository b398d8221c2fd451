//! Experiment configuration: a TOML file with one table per concern.
//!
//! Trigonometric polynomials are written as lists of `[k, a, b]` triples for
//! `Σ a·cos(2πkx) + b·sin(2πkx)`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use seqresp::maps::{CircleMap, KickField, TrigPoly};
use seqresp::noise::{DriftBase, DriftMap, NoiseDensity};
use seqresp::sequence::{Element, Schedule, DEFAULT_PULLBACK_TOL};
use seqresp::DensityGrid;

use crate::error::{CliError, CliResult};

pub type Terms = Vec<(u32, f64, f64)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub run: RunSection,
    pub reference: MapSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    pub kick: Option<KickSection>,
    pub drift: Option<DriftSection>,
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub response: ResponseSection,
    #[serde(default)]
    pub memory: MemorySection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub points: usize,
    /// Worker threads; defaults to the available cores.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Noisy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub output: PathBuf,
    pub seed: u64,
    /// Defaults to the decay-bound burn-in for `pullback_tolerance`.
    pub burn_in: Option<usize>,
    #[serde(default = "default_pullback_tolerance")]
    pub pullback_tolerance: f64,
    /// Inclusive index window; sized automatically when absent.
    pub window: Option<(i64, i64)>,
    /// Number of indices for which the response is reported.
    #[serde(default = "default_report")]
    pub report: usize,
    /// Treat maps outside the certified ball as a hard error.
    #[serde(default)]
    pub certified: bool,
}

fn default_pullback_tolerance() -> f64 {
    DEFAULT_PULLBACK_TOL
}

fn default_report() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub degree: i64,
    #[serde(default)]
    pub terms: Terms,
}

impl MapSection {
    pub fn build(&self) -> CliResult<CircleMap> {
        Ok(CircleMap::new(self.degree, TrigPoly::new(self.terms.clone()))?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    #[default]
    Constant,
    Periodic,
    Parametric,
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default)]
    pub kind: ScheduleKind,
    /// Maps of the schedule; empty means the reference map alone.
    #[serde(default)]
    pub maps: Vec<MapSection>,
    /// Parametric scaling `offset + amplitude·sin(2πn/period)` of the nonlinear part.
    #[serde(default = "one")]
    pub offset: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "one_u32")]
    pub period: u32,
}

fn one() -> f64 {
    1.0
}

fn one_u32() -> u32 {
    1
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            kind: ScheduleKind::Constant,
            maps: Vec::new(),
            offset: 1.0,
            amplitude: 0.0,
            period: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickSection {
    pub field: Terms,
    pub remainder: Option<Terms>,
}

impl KickSection {
    pub fn build(&self) -> KickField {
        let kick = KickField::new(TrigPoly::new(self.field.clone()));
        match &self.remainder {
            Some(r) => kick.with_remainder(TrigPoly::new(r.clone())),
            None => kick,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSection {
    /// Perturbation direction of the drift.
    pub direction: Terms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Uniform,
    Bump,
    RaisedCosine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKind,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Uniform floor mixed into the density; equals the Doeblin constant.
    #[serde(default)]
    pub floor: f64,
}

fn default_width() -> f64 {
    0.05
}

impl NoiseSection {
    pub fn build(&self, n: usize) -> CliResult<NoiseDensity> {
        Ok(match self.kind {
            NoiseKind::Uniform => NoiseDensity::uniform(n)?,
            NoiseKind::Bump => NoiseDensity::bump(n, self.center, self.width, self.floor)?,
            NoiseKind::RaisedCosine => NoiseDensity::raised_cosine(n, self.center, self.floor)?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSection {
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Fixed truncation order; otherwise chosen from `tolerance`.
    pub truncation: Option<usize>,
    #[serde(default = "default_series_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_validation_tolerance")]
    pub validation_tolerance: f64,
    #[serde(default)]
    pub symmetric: bool,
}

fn default_eps() -> Vec<f64> {
    vec![1e-2, 3e-3, 1e-3]
}

fn default_series_tolerance() -> f64 {
    1e-6
}

fn default_validation_tolerance() -> f64 {
    1e-2
}

impl Default for ResponseSection {
    fn default() -> Self {
        Self {
            eps: default_eps(),
            truncation: None,
            tolerance: default_series_tolerance(),
            validation_tolerance: default_validation_tolerance(),
            symmetric: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemorySection {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub start: i64,
    /// Zero-mass initial perturbation; only harmonics `k >= 1` are allowed.
    #[serde(default = "default_perturbation")]
    pub perturbation: Terms,
}

fn default_k_max() -> usize {
    20
}

fn default_perturbation() -> Terms {
    vec![(1, 1.0, 0.0)]
}

impl Default for MemorySection {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            start: 0,
            perturbation: default_perturbation(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub eps: f64,
}

fn default_samples() -> usize {
    1_000_000
}

fn default_bins() -> usize {
    64
}

fn default_steps() -> usize {
    10
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            bins: default_bins(),
            steps: default_steps(),
            eps: 0.0,
        }
    }
}

/// Largest admissible `ε` for noisy drifts; no finer check applies there.
pub const NOISY_EPS_LIMIT: f64 = 1.0;

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let config: Self = toml::from_str(text)?;
        config.check_basic()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check_basic(&self) -> CliResult<()> {
        let n = self.grid.points;
        if n < seqresp::grid::MIN_POINTS || n % 2 != 0 {
            return Err(CliError::Config(format!(
                "grid.points must be even and >= {}, got {n}",
                seqresp::grid::MIN_POINTS
            )));
        }
        if self.grid.threads == Some(0) {
            return Err(CliError::Config("grid.threads must be positive".into()));
        }
        if !(self.run.pullback_tolerance > 0.0) {
            return Err(CliError::Config("run.pullback_tolerance must be positive".into()));
        }
        if let Some((lo, hi)) = self.run.window {
            if hi <= lo {
                return Err(CliError::Config(format!("run.window [{lo}, {hi}] is empty")));
            }
        }
        if self.run.report == 0 {
            return Err(CliError::Config("run.report must be positive".into()));
        }
        let s = &self.schedule;
        if matches!(s.kind, ScheduleKind::Periodic | ScheduleKind::Random) && s.maps.is_empty() {
            return Err(CliError::Config(
                "schedule.maps must list at least one map for periodic and random schedules".into(),
            ));
        }
        if s.kind == ScheduleKind::Parametric && s.period == 0 {
            return Err(CliError::Config("schedule.period must be positive".into()));
        }
        if self.memory.perturbation.iter().any(|t| t.0 == 0) {
            return Err(CliError::Config(
                "memory.perturbation must have zero mass (no k = 0 term)".into(),
            ));
        }
        if self.response.eps.is_empty() {
            return Err(CliError::Config("response.eps must not be empty".into()));
        }
        Ok(())
    }

    /// Checks that the blocks needed by the chosen mode are present and that
    /// every `ε` is admissible.
    pub fn check_mode(&self) -> CliResult<()> {
        match self.run.mode {
            Mode::Deterministic => {
                let kick = self
                    .kick
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing [kick] section for deterministic mode".into()))?
                    .build();
                for &eps in &self.response.eps {
                    if !(eps > 0.0) {
                        return Err(CliError::Config(format!("response.eps must be positive, got {eps}")));
                    }
                    kick.check_eps(eps)
                        .map_err(|e| CliError::Config(format!("response.eps = {eps} is not admissible: {e}")))?;
                }
            }
            Mode::Noisy => {
                if self.noise.is_none() {
                    return Err(CliError::Config("missing [noise] section for noisy mode".into()));
                }
                if self.drift.is_none() {
                    return Err(CliError::Config("missing [drift] section for noisy mode".into()));
                }
                if let Some(eps) = self.response.eps.iter().find(|e| !(**e > 0.0 && **e < NOISY_EPS_LIMIT)) {
                    return Err(CliError::Config(format!(
                        "response.eps must lie in (0, {NOISY_EPS_LIMIT}), got {eps}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn schedule_maps(&self) -> CliResult<Vec<CircleMap>> {
        if self.schedule.maps.is_empty() {
            return Ok(vec![self.reference.build()?]);
        }
        self.schedule.maps.iter().map(MapSection::build).collect()
    }

    fn element(&self, map: &CircleMap) -> CliResult<Element> {
        let n = self.grid.points;
        Ok(match self.run.mode {
            Mode::Deterministic => Element::Deterministic {
                map: map.clone(),
                kick: self.kick.as_ref().map(KickSection::build).unwrap_or_default(),
            },
            Mode::Noisy => {
                let drift = self.drift.as_ref().expect("checked by check_mode");
                let direction = seqresp::grid::trig_grid(n, &drift.direction)?;
                Element::Noisy {
                    drift: DriftMap::new(DriftBase::from(map), direction),
                    noise: Arc::new(self.noise.as_ref().expect("checked by check_mode").build(n)?),
                }
            }
        })
    }

    pub fn schedule(&self) -> CliResult<Schedule> {
        let maps = self.schedule_maps()?;
        let elements = maps.iter().map(|m| self.element(m)).collect::<CliResult<Vec<_>>>()?;
        let s = &self.schedule;
        Ok(match s.kind {
            ScheduleKind::Constant => {
                if elements.len() != 1 {
                    return Err(CliError::Config("a constant schedule takes exactly one map".into()));
                }
                Schedule::Constant(elements.into_iter().next().unwrap())
            }
            ScheduleKind::Periodic => Schedule::Periodic(elements),
            ScheduleKind::Parametric => Schedule::Parametric {
                base: elements.into_iter().next().unwrap(),
                offset: s.offset,
                amplitude: s.amplitude,
                period: s.period,
            },
            ScheduleKind::Random => Schedule::SeededRandom {
                choices: elements,
                seed: self.run.seed,
            },
        })
    }

    pub fn memory_perturbation(&self) -> CliResult<DensityGrid> {
        Ok(seqresp::grid::trig_grid(self.grid.points, &self.memory.perturbation)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
points = 64

[run]
mode = "deterministic"
output = "out"
seed = 1

[reference]
degree = 2

[kick]
field = [[1, 0.0, 0.15915494309189535]]
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.schedule.kind, ScheduleKind::Constant);
        assert_eq!(c.response.eps, vec![1e-2, 3e-3, 1e-3]);
        assert_eq!(c.run.pullback_tolerance, 1e-8);
        c.check_mode().unwrap();
        assert!(matches!(c.schedule().unwrap(), Schedule::Constant(_)));
    }

    #[test]
    fn missing_field_is_named() {
        let text = MINIMAL.replace("seed = 1\n", "");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn odd_grid_is_a_config_error() {
        let err = ExperimentConfig::parse(&MINIMAL.replace("points = 64", "points = 63")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn inadmissible_eps_is_a_config_error() {
        let text = format!("{MINIMAL}\n[response]\neps = [0.9]\n");
        let c = ExperimentConfig::parse(&text).unwrap();
        assert!(matches!(c.check_mode(), Err(CliError::Config(_))));
    }

    #[test]
    fn noisy_mode_requires_noise_and_drift() {
        let text = MINIMAL.replace("\"deterministic\"", "\"noisy\"");
        let c = ExperimentConfig::parse(&text).unwrap();
        assert!(matches!(c.check_mode(), Err(CliError::Config(m)) if m.contains("[noise]")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("seed = 1", "seed = 1\nsede = 2");
        assert!(ExperimentConfig::parse(&text).is_err());
    }
}
