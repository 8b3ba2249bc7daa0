//! Scenario files: a mission request plus optional profile overrides and
//! solver budget, as JSON. Unknown keys are rejected and every error carries
//! the JSON pointer of the offending value.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::energy::{builtin_profile, EnergyProfile, RobotKind};
use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::planner::MissionRequest;
use crate::solver::SolveBudget;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub area: Area,
    pub err: f64,
    pub trt_s: f64,
    pub tfs: usize,
    pub speed_mps: f64,
    pub epoch_s: f64,
    #[serde(default)]
    pub base_station: Cell,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub start_cells: Vec<Cell>,
    /// `"wheeled"`, `"quadruped"` or a full profile object.
    pub profile: Value,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub profile_overrides: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_battery_j: Option<f64>,
    #[serde(default = "one")]
    pub terrain_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<SolveBudget>,
}

fn at(pointer: &str, message: impl Into<String>) -> Error {
    Error::Scenario {
        pointer: if pointer.is_empty() { "/".into() } else { pointer.into() },
        message: message.into(),
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Deserializes `value`, reporting failures relative to `base`.
fn from_value<T: DeserializeOwned>(value: Value, base: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.inner().to_string();
        at(&format!("{base}{}", pointer_of(e.path())), inner)
    })
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let file: Self = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let inner = e.inner().to_string();
            at(&pointer_of(e.path()), inner)
        })?;
        file.check()?;
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The profile after applying overrides.
    pub fn resolved_profile(&self) -> Result<EnergyProfile> {
        let base = match &self.profile {
            Value::String(name) => match RobotKind::from_name(name) {
                Some(kind) => builtin_profile(kind),
                None => return Err(at("/profile", format!("unknown profile {name:?}, expected wheeled or quadruped"))),
            },
            Value::Object(_) => from_value(self.profile.clone(), "/profile")?,
            _ => return Err(at("/profile", "expected a profile name or object")),
        };
        if self.profile_overrides.is_empty() {
            return Ok(base);
        }
        let mut merged = serde_json::to_value(&base)?;
        let obj = merged.as_object_mut().expect("profile serializes to an object");
        for (k, v) in &self.profile_overrides {
            obj.insert(k.clone(), v.clone());
        }
        let profile: EnergyProfile = from_value(merged, "/profile_overrides")?;
        profile.validate().map_err(|e| at("/profile_overrides", e.to_string()))?;
        Ok(profile)
    }

    fn check(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(at(name, format!("must be > 0, got {v}")))
            }
        };
        positive("/area/width_m", self.area.width_m)?;
        positive("/area/height_m", self.area.height_m)?;
        positive("/speed_mps", self.speed_mps)?;
        positive("/epoch_s", self.epoch_s)?;
        if !(self.err > 0.0 && self.err <= 1.0) {
            return Err(at("/err", format!("must be in (0, 1], got {}", self.err)));
        }
        if !(self.trt_s.is_finite() && self.trt_s >= self.epoch_s) {
            return Err(at("/trt_s", format!("must be at least one epoch ({} s), got {}", self.epoch_s, self.trt_s)));
        }
        if self.tfs == 0 {
            return Err(at("/tfs", "must be at least 1"));
        }
        if !(self.terrain_factor.is_finite() && self.terrain_factor >= 0.0) {
            return Err(at("/terrain_factor", format!("must be >= 0, got {}", self.terrain_factor)));
        }
        let profile = self.resolved_profile()?;
        profile.validate().map_err(|e| at("/profile", e.to_string()))?;
        if let Some(b) = self.initial_battery_j {
            if !(b > 0.0 && b <= profile.battery_capacity_j) {
                return Err(at(
                    "/initial_battery_j",
                    format!("must be in (0, {}], got {b}", profile.battery_capacity_j),
                ));
            }
        }
        if let Some(budget) = &self.budget {
            budget.validate().map_err(|e| at("/budget", e.to_string()))?;
        }
        let req = self.request_unchecked(profile);
        let grid = req.grid().map_err(|e| at("/base_station", e.to_string()))?;
        for (i, c) in self.start_cells.iter().enumerate() {
            if !grid.contains(*c) {
                return Err(at(
                    &format!("/start_cells/{i}"),
                    format!("{c} lies outside the {}x{} grid", grid.width_cells(), grid.height_cells()),
                ));
            }
        }
        Ok(())
    }

    fn request_unchecked(&self, profile: EnergyProfile) -> MissionRequest {
        MissionRequest {
            area_width_m: self.area.width_m,
            area_height_m: self.area.height_m,
            err: self.err,
            trt_s: self.trt_s,
            tfs: self.tfs,
            speed_mps: self.speed_mps,
            epoch_s: self.epoch_s,
            base_station: self.base_station,
            start_cells: self.start_cells.clone(),
            profile,
            initial_battery_j: self.initial_battery_j,
            terrain_factor: self.terrain_factor,
        }
    }

    pub fn request(&self) -> Result<MissionRequest> {
        let req = self.request_unchecked(self.resolved_profile()?);
        req.validate()?;
        Ok(req)
    }

    /// The file's budget, or the default one.
    pub fn budget(&self) -> SolveBudget {
        self.budget.clone().unwrap_or_default()
    }
}
