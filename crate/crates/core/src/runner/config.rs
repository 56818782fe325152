use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::hazard::{AttenuationParams, EventSpec};
use crate::network::ServiceMode;
use crate::planner::{Lookahead, Pooling};
use crate::sim::{F2Normalization, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Days until `gamma` of the population is served.
    #[default]
    F1,
    /// Time-weighted served population.
    F2,
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f1" => Ok(ObjectiveKind::F1),
            "f2" => Ok(ObjectiveKind::F2),
            other => Err(Error::Config(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    /// A seeded random priority order per scenario.
    #[default]
    Random,
    /// Importance order: population behind each component.
    Smart,
}

impl std::str::FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(BaseKind::Random),
            "smart" | "importance" => Ok(BaseKind::Smart),
            other => Err(Error::Config(format!("unknown base heuristic '{other}'"))),
        }
    }
}

/// Input files, relative to the config file unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataFiles {
    pub components: PathBuf,
    pub cells: PathBuf,
    pub retailers: PathBuf,
    pub travel_times: PathBuf,
    pub fragility: PathBuf,
    pub restoration: PathBuf,
}

impl Default for DataFiles {
    fn default() -> Self {
        Self {
            components: "components.csv".into(),
            cells: "cells.csv".into(),
            retailers: "retailers.csv".into(),
            travel_times: "travel_times.csv".into(),
            fragility: "fragility.csv".into(),
            restoration: "restoration.csv".into(),
        }
    }
}

impl DataFiles {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.components,
            &mut self.cells,
            &mut self.retailers,
            &mut self.travel_times,
            &mut self.fragility,
            &mut self.restoration,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HazardSettings {
    /// Uniform site vs30, m/s.
    pub vs30: f64,
    /// Spacing of the hazard site grid over the network's extent. Zero puts
    /// one site on every component.
    pub site_spacing_km: f64,
}

impl Default for HazardSettings {
    fn default() -> Self {
        Self {
            vs30: 270.0,
            site_spacing_km: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandSettings {
    /// Gravity-model decay per minute of travel; must be negative.
    pub decay: f64,
}

impl Default for DemandSettings {
    fn default() -> Self {
        Self { decay: -0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSettings {
    pub resources: usize,
    pub objective: ObjectiveKind,
    pub gamma: f64,
    pub mode: ServiceMode,
    pub base: BaseKind,
    pub pooling: Pooling,
    pub cap: usize,
    pub lookahead: Lookahead,
    pub f2_normalization: F2Normalization,
}

impl Default for PlanSettings {
    fn default() -> Self {
        Self {
            resources: 10,
            objective: ObjectiveKind::F1,
            gamma: 0.8,
            mode: ServiceMode::HouseholdsAndRetailers,
            base: BaseKind::Random,
            pooling: Pooling::RandomCap,
            cap: 100_000,
            lookahead: Lookahead::Steps(1),
            f2_normalization: F2Normalization::FinalInterval,
        }
    }
}

impl PlanSettings {
    pub fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveKind::F1 => Objective::F1 { gamma: self.gamma },
            ObjectiveKind::F2 => Objective::F2 {
                normalization: self.f2_normalization,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub scenarios: usize,
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    pub out: PathBuf,
    /// Write one trajectory CSV per scenario and policy.
    pub trajectories: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            scenarios: 20,
            seed: 0,
            threads: 0,
            out: "out".into(),
            trajectories: true,
        }
    }
}

/// Everything one experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataFiles,
    pub event: EventSpec,
    pub attenuation: AttenuationParams,
    pub hazard: HazardSettings,
    pub demand: DemandSettings,
    pub plan: PlanSettings,
    pub run: RunSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataFiles::default(),
            event: EventSpec {
                magnitude: 6.9,
                epicenter: Point::new(6.0, -7.0),
                fault_params: Vec::new(),
            },
            attenuation: AttenuationParams {
                coefficients: [1.3, 0.55, -1.0, 10.0, -0.5],
                sigma_intra: 0.35,
                tau_inter: 0.25,
                correlation_range_km: 5.0,
                nugget: 0.0,
            },
            hazard: HazardSettings::default(),
            demand: DemandSettings::default(),
            plan: PlanSettings::default(),
            run: RunSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a TOML config; relative paths are taken from its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| 1 + text[..s.start.min(text.len())].matches('\n').count() as u64);
            Error::Input {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data.resolve(base);
        if cfg.run.out.is_relative() {
            cfg.run.out = base.join(&cfg.run.out);
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.event.validate()?;
        self.attenuation.validate()?;
        if !(self.hazard.vs30 > 0.0) {
            return Err(Error::Config("vs30 must be positive".into()));
        }
        if !(self.hazard.site_spacing_km >= 0.0) {
            return Err(Error::Config("site spacing must be non-negative".into()));
        }
        if !(self.demand.decay < 0.0) {
            return Err(Error::Config("gravity decay must be negative".into()));
        }
        let p = &self.plan;
        if p.resources < 1 {
            return Err(Error::Config("resources must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1]", p.gamma)));
        }
        if p.cap < 1 {
            return Err(Error::Config("cap must be at least 1".into()));
        }
        if let Lookahead::Steps(n) = p.lookahead {
            if !(1..=2).contains(&n) {
                return Err(Error::Config("lookahead must be 1, 2 or full".into()));
            }
        }
        if self.run.scenarios < 1 {
            return Err(Error::Config("at least one scenario is required".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_files_take_defaults() {
        let cfg: ExperimentConfig = toml::from_str("[plan]\nobjective = \"f2\"\nlookahead = \"full\"\n").unwrap();
        assert_eq!(cfg.plan.objective, ObjectiveKind::F2);
        assert_eq!(cfg.plan.lookahead, Lookahead::Full);
        assert_eq!(cfg.plan.resources, 10);
        assert_eq!(cfg.plan.gamma, 0.8);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[plan]\nresources = 3\nbogus = 1\n").unwrap();
        let e = ExperimentConfig::from_file(&p).unwrap_err().to_string();
        assert!(e.contains("c.toml:3"), "{e}");
    }

    #[test]
    fn paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[data]\ncells = \"grid.csv\"\n").unwrap();
        let cfg = ExperimentConfig::from_file(&p).unwrap();
        assert_eq!(cfg.data.cells, dir.path().join("grid.csv"));
        assert_eq!(cfg.data.components, dir.path().join("components.csv"));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.plan.gamma = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.plan.resources = 0;
        assert!(cfg.validate().is_err());
    }
}
