//! Robot power profiles and per-epoch energy accounting.
//!
//! Powers are stored in watts; every energy quantity is an [`Energy`] held as
//! an integer number of microjoules. Each cost component is rounded once when
//! it is produced, so battery bookkeeping afterwards is exact integer
//! arithmetic and never drifts.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, Move};

const MICRO: f64 = 1e6;

/// Energy in integer microjoules.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Energy(i64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub const fn from_micro(uj: i64) -> Self {
        Energy(uj)
    }

    pub fn from_joules(j: f64) -> Self {
        Energy((j * MICRO).round() as i64)
    }

    /// `watts * seconds * factor`, rounded to the nearest microjoule.
    pub fn from_power(watts: f64, seconds: f64, factor: f64) -> Self {
        Energy((watts * seconds * factor * MICRO).round() as i64)
    }

    pub const fn micro(self) -> i64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 as f64 / MICRO
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Display for Energy {
    /// Exact decimal rendering in joules with six fractional digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sub for Energy {
    type Output = Energy;
    fn sub(self, rhs: Energy) -> Energy {
        Energy(self.0 - rhs.0)
    }
}

impl SubAssign for Energy {
    fn sub_assign(&mut self, rhs: Energy) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for Energy {
    type Output = Energy;
    fn mul(self, rhs: i64) -> Energy {
        Energy(self.0 * rhs)
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        Energy(iter.map(|e| e.0).sum())
    }
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.joules())
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Energy::from_joules)
    }
}

/// One measured point of the speed-to-motion-power curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionPoint {
    pub speed_mps: f64,
    pub watts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyProfile {
    pub name: String,
    /// Battery capacity in joules.
    pub battery_capacity_j: f64,
    pub rx_power_w: f64,
    /// Transmission power at zero distance from the base station.
    pub tx_power_base_w: f64,
    #[serde(default)]
    pub tx_distance_coeff: f64,
    #[serde(default = "one")]
    pub tx_distance_exponent: f64,
    /// Cameras, LiDAR and the processing attached to them.
    pub sensing_power_w: f64,
    pub idle_power_w: f64,
    pub motion_power: Vec<MotionPoint>,
    #[serde(default = "sqrt2")]
    pub diagonal_factor: f64,
}

fn one() -> f64 {
    1.0
}

fn sqrt2() -> f64 {
    std::f64::consts::SQRT_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotKind {
    Wheeled,
    Quadruped,
}

impl RobotKind {
    pub const ALL: [RobotKind; 2] = [RobotKind::Wheeled, RobotKind::Quadruped];

    pub fn name(self) -> &'static str {
        match self {
            RobotKind::Wheeled => "wheeled",
            RobotKind::Quadruped => "quadruped",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Built-in profile for the two robot classes.
///
/// The quadruped figures come from profiling a Unitree GO1 EDU, the wheeled
/// ones from a cellular-connected ground rover; idle for the quadruped is the
/// standing ("idle up") posture.
pub fn builtin_profile(kind: RobotKind) -> EnergyProfile {
    match kind {
        RobotKind::Wheeled => EnergyProfile {
            name: "wheeled".into(),
            battery_capacity_j: 72_000.0,
            rx_power_w: 4.0,
            tx_power_base_w: 4.95,
            tx_distance_coeff: 0.0,
            tx_distance_exponent: 1.0,
            sensing_power_w: 12.0,
            idle_power_w: 0.29,
            motion_power: vec![MotionPoint { speed_mps: 1.0, watts: 7.40 }],
            diagonal_factor: std::f64::consts::SQRT_2,
        },
        RobotKind::Quadruped => EnergyProfile {
            name: "quadruped".into(),
            battery_capacity_j: 350_000.0,
            rx_power_w: 15.77,
            tx_power_base_w: 16.72,
            tx_distance_coeff: 0.0,
            tx_distance_exponent: 1.0,
            sensing_power_w: 76.09,
            idle_power_w: 80.33,
            motion_power: vec![
                MotionPoint { speed_mps: 0.5, watts: 53.26 },
                MotionPoint { speed_mps: 1.0, watts: 108.86 },
                MotionPoint { speed_mps: 2.0, watts: 211.22 },
            ],
            diagonal_factor: std::f64::consts::SQRT_2,
        },
    }
}

impl EnergyProfile {
    pub fn validate(&self) -> Result<()> {
        let powers = [
            ("rx_power_w", self.rx_power_w),
            ("tx_power_base_w", self.tx_power_base_w),
            ("tx_distance_coeff", self.tx_distance_coeff),
            ("sensing_power_w", self.sensing_power_w),
            ("idle_power_w", self.idle_power_w),
        ];
        for (name, v) in powers {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.battery_capacity_j.is_finite() && self.battery_capacity_j > 0.0) {
            return Err(Error::InvalidInput(format!(
                "battery_capacity_j must be > 0, got {}",
                self.battery_capacity_j
            )));
        }
        if !(self.tx_distance_exponent.is_finite() && self.tx_distance_exponent >= 0.0) {
            return Err(Error::InvalidInput("tx_distance_exponent must be >= 0".into()));
        }
        if !(self.diagonal_factor.is_finite() && self.diagonal_factor >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "diagonal_factor must be >= 1, got {}",
                self.diagonal_factor
            )));
        }
        if self.motion_power.is_empty() {
            return Err(Error::InvalidInput("motion_power needs at least one entry".into()));
        }
        for p in &self.motion_power {
            if !(p.speed_mps.is_finite() && p.speed_mps > 0.0 && p.watts.is_finite() && p.watts >= 0.0) {
                return Err(Error::InvalidInput(format!("bad motion_power point {p:?}")));
            }
        }
        Ok(())
    }

    pub fn battery_capacity(&self) -> Energy {
        Energy::from_joules(self.battery_capacity_j)
    }

    /// Motion power at `speed`: exact table hit, linear interpolation between
    /// measured speeds, proportional scaling of the nearest point outside them.
    pub fn motion_power_at(&self, speed: f64) -> f64 {
        let mut pts = self.motion_power.clone();
        pts.sort_by(|x, y| x.speed_mps.total_cmp(&y.speed_mps));
        if let Some(p) = pts.iter().find(|p| (p.speed_mps - speed).abs() < 1e-12) {
            return p.watts;
        }
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if speed < first.speed_mps {
            return first.watts * speed / first.speed_mps;
        }
        if speed > last.speed_mps {
            return last.watts * speed / last.speed_mps;
        }
        let hi = pts.iter().position(|p| p.speed_mps > speed).unwrap();
        let (lo, hi) = (pts[hi - 1], pts[hi]);
        let t = (speed - lo.speed_mps) / (hi.speed_mps - lo.speed_mps);
        lo.watts + t * (hi.watts - lo.watts)
    }
}

/// Transmission power at `distance` meters from the base station.
pub fn tx_power(profile: &EnergyProfile, distance: f64) -> f64 {
    if profile.tx_distance_coeff == 0.0 || distance <= 0.0 {
        return profile.tx_power_base_w;
    }
    profile.tx_power_base_w + profile.tx_distance_coeff * distance.powf(profile.tx_distance_exponent)
}

/// Itemized energy of one robot over one epoch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochCost {
    pub rx: Energy,
    pub tx: Energy,
    pub sensing: Energy,
    pub motion: Energy,
    pub idle: Energy,
    pub total: Energy,
}

impl EpochCost {
    fn new(rx: Energy, tx: Energy, sensing: Energy, motion: Energy, idle: Energy) -> Self {
        Self {
            rx,
            tx,
            sensing,
            motion,
            idle,
            total: rx + tx + sensing + motion + idle,
        }
    }
}

/// Energy drawn while a robot makes `mv` into `cell` during one epoch.
///
/// Reception is always on. A stay draws idle power, a move draws motion power
/// instead (scaled by the diagonal factor for diagonal steps). Sensing and
/// transmission are charged only when the destination cell was still
/// unexplored at the previous epoch.
pub fn epoch_energy(
    profile: &EnergyProfile,
    mv: Move,
    exploring_new_cell: bool,
    cell: Cell,
    grid: &GridMap,
    epoch_duration: f64,
) -> EpochCost {
    let dt = epoch_duration;
    let rx = Energy::from_power(profile.rx_power_w, dt, 1.0);
    let (motion, idle) = match mv {
        Move::Stay => (Energy::ZERO, Energy::from_power(profile.idle_power_w, dt, 1.0)),
        Move::Orthogonal | Move::Diagonal => {
            let speed = grid.cell_size() / dt;
            let mut factor = grid.terrain_factor();
            if mv == Move::Diagonal {
                factor *= profile.diagonal_factor;
            }
            (Energy::from_power(profile.motion_power_at(speed), dt, factor), Energy::ZERO)
        }
    };
    let (sensing, tx) = if exploring_new_cell {
        (
            Energy::from_power(profile.sensing_power_w, dt, 1.0),
            Energy::from_power(tx_power(profile, grid.base_distance(cell)), dt, 1.0),
        )
    } else {
        (Energy::ZERO, Energy::ZERO)
    };
    EpochCost::new(rx, tx, sensing, motion, idle)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentGroup {
    Components,
    Mobility,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentRow {
    pub group: ComponentGroup,
    pub element: &'static str,
    pub watts: f64,
}

const fn row(group: ComponentGroup, element: &'static str, watts: f64) -> ComponentRow {
    ComponentRow { group, element, watts }
}

/// Average power of each GO1 component and motion, as measured.
pub const QUADRUPED_COMPONENTS: [ComponentRow; 12] = [
    row(ComponentGroup::Components, "4G Peripheral", 15.77),
    row(ComponentGroup::Components, "Cameras and Nano Proc.", 19.25),
    row(ComponentGroup::Components, "Human Recognition", 29.38),
    row(ComponentGroup::Components, "3D LiDAR and SLAM", 56.84),
    row(ComponentGroup::Mobility, "Idle Down", 21.62),
    row(ComponentGroup::Mobility, "Flex Down", 75.79),
    row(ComponentGroup::Mobility, "Flex Up", 93.14),
    row(ComponentGroup::Mobility, "Idle Up", 80.33),
    row(ComponentGroup::Mobility, "Walking Circles 0.76 rad/s", 73.86),
    row(ComponentGroup::Mobility, "Walking 0.5 m/s", 53.26),
    row(ComponentGroup::Mobility, "Walking 1 m/s", 108.86),
    row(ComponentGroup::Mobility, "Walking 2 m/s", 211.22),
];

pub fn quadruped_component_table() -> &'static [ComponentRow] {
    &QUADRUPED_COMPONENTS
}

pub fn lookup_component(element: &str) -> Option<f64> {
    QUADRUPED_COMPONENTS
        .iter()
        .find(|r| r.element.eq_ignore_ascii_case(element))
        .map(|r| r.watts)
}

/// One row of the wheeled-versus-quadruped comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub element: &'static str,
    pub quadruped_w: f64,
    pub wheeled_w: f64,
}

/// The five power rows of each built-in profile, side by side.
pub fn comparison_table() -> Vec<ComparisonRow> {
    let q = builtin_profile(RobotKind::Quadruped);
    let w = builtin_profile(RobotKind::Wheeled);
    let row = |element, pick: fn(&EnergyProfile) -> f64| ComparisonRow {
        element,
        quadruped_w: pick(&q),
        wheeled_w: pick(&w),
    };
    vec![
        row("Cellular Reception", |p| p.rx_power_w),
        row("Cellular Transmission", |p| p.tx_power_base_w),
        row("Camera, LiDAR, Processor", |p| p.sensing_power_w),
        row("Idle Up or Idle", |p| p.idle_power_w),
        row("Motion 1 m/s", |p| p.motion_power_at(1.0)),
    ]
}

/// Sum of watts in hundredths of a watt, so totals compare exactly.
pub fn total_centiwatts(watts: impl IntoIterator<Item = f64>) -> i64 {
    watts.into_iter().map(|w| (w * 100.0).round() as i64).sum()
}

/// How the up/down transition time is booked against the idle window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionAccounting {
    /// Lying down and standing up happen within the idle window, which must
    /// therefore be at least two transitions long.
    InsideWindow,
    /// The idle window counts only time spent lying; transitions are extra
    /// time that would otherwise have been spent standing.
    OutsideWindow,
}

/// Posture powers used by [`posture_breakeven`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostureTable {
    pub idle_up_w: f64,
    pub idle_down_w: f64,
    pub flex_down_w: f64,
    pub flex_up_w: f64,
}

impl PostureTable {
    pub fn go1() -> Self {
        let w = |e| lookup_component(e).expect("posture row present");
        Self {
            idle_up_w: w("Idle Up"),
            idle_down_w: w("Idle Down"),
            flex_down_w: w("Flex Down"),
            flex_up_w: w("Flex Up"),
        }
    }
}

/// Break-even idle duration reported for the GO1 with ~1 s transitions. It is
/// not reproduced by either accounting convention and is kept for reference.
pub const GO1_REPORTED_BREAKEVEN_S: f64 = 2.87;

/// Idle duration (seconds) above which lying down saves energy over
/// standing. Returns `f64::INFINITY` when lying saves nothing and `0.0` when
/// lying down is cheaper for any duration.
pub fn posture_breakeven(
    table: &PostureTable,
    transition_time: f64,
    accounting: TransitionAccounting,
) -> Result<f64> {
    if !(transition_time.is_finite() && transition_time > 0.0) {
        return Err(Error::InvalidInput(format!(
            "transition time must be > 0, got {transition_time}"
        )));
    }
    let saving_rate = table.idle_up_w - table.idle_down_w;
    if saving_rate <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let flex = table.flex_down_w + table.flex_up_w;
    let overhead = match accounting {
        TransitionAccounting::InsideWindow => flex - 2.0 * table.idle_down_w,
        TransitionAccounting::OutsideWindow => flex - 2.0 * table.idle_up_w,
    };
    Ok((transition_time * overhead / saving_rate).max(0.0))
}
