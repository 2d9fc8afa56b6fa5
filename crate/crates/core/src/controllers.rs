//! Two-site threshold control laws.
//!
//! Every law reads the smoothed anterior (`s1`) and posterior (`s2`)
//! activations for one tick and returns a motor set-point. Position clamping
//! is applied after the law itself; [`Actuation::saturated`] records when it
//! changed the value.
//!
//! Linear positions (flick draw motor, plunger) are in millimetres, wrist and
//! finger positions in radians, torques in N·m.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Control period, s.
    pub dt: f64,
    /// Flick draw rate, mm/s.
    pub v_bar: f64,
    /// Flick motor position that lifts the release carriage, mm.
    pub q_release: f64,
    pub s_bar_draw: f64,
    pub s_bar_release: f64,
    /// Shared threshold of the twisting and cutting laws.
    pub s_bar: f64,
    pub s_bar_screw: f64,
    pub s_bar_unscrew: f64,
    pub s_bar_open: f64,
    pub s_bar_close: f64,
    /// Torque magnitude for the torque-driven devices, N·m.
    pub tau_max: f64,
    /// Wrist rotation rate, rad/s.
    pub v_bar_screw: f64,
    /// Finger positions of the binary grasp, rad.
    pub q_open: f64,
    pub q_close: f64,
    /// Plunger positions, mm.
    pub q_rest: f64,
    pub q_max: f64,
    pub q_min: f64,
}

/// Dead-band applied to every differential threshold unless overridden.
pub const DEFAULT_THRESHOLD: f64 = 0.2;

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 200.0,
            v_bar: 10.0,
            // Beyond the 35.8 mm pin stroke so a full draw is reachable.
            q_release: 40.0,
            s_bar_draw: DEFAULT_THRESHOLD,
            s_bar_release: DEFAULT_THRESHOLD,
            s_bar: DEFAULT_THRESHOLD,
            s_bar_screw: DEFAULT_THRESHOLD,
            s_bar_unscrew: DEFAULT_THRESHOLD,
            s_bar_open: DEFAULT_THRESHOLD,
            s_bar_close: DEFAULT_THRESHOLD,
            tau_max: 0.3,
            v_bar_screw: 2.0,
            q_open: 0.0,
            q_close: 1.4,
            q_rest: 5.0,
            q_max: 25.0,
            q_min: 0.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("dt", self.dt),
            ("v_bar", self.v_bar),
            ("q_release", self.q_release),
            ("s_bar_draw", self.s_bar_draw),
            ("s_bar_release", self.s_bar_release),
            ("s_bar", self.s_bar),
            ("s_bar_screw", self.s_bar_screw),
            ("s_bar_unscrew", self.s_bar_unscrew),
            ("s_bar_open", self.s_bar_open),
            ("s_bar_close", self.s_bar_close),
            ("tau_max", self.tau_max),
            ("v_bar_screw", self.v_bar_screw),
            ("q_open", self.q_open),
            ("q_close", self.q_close),
            ("q_rest", self.q_rest),
            ("q_max", self.q_max),
            ("q_min", self.q_min),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("{name} is not finite")));
        }
        let positive = [
            ("dt", self.dt),
            ("q_release", self.q_release),
            ("s_bar_draw", self.s_bar_draw),
            ("s_bar_release", self.s_bar_release),
            ("s_bar", self.s_bar),
            ("s_bar_screw", self.s_bar_screw),
            ("s_bar_unscrew", self.s_bar_unscrew),
            ("s_bar_open", self.s_bar_open),
            ("s_bar_close", self.s_bar_close),
            ("tau_max", self.tau_max),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "{name} = {v} must be positive"
            )));
        }
        if self.v_bar < 0.0 || self.v_bar_screw < 0.0 {
            return Err(Error::InvalidConfig("rates must be non-negative".into()));
        }
        if !(self.q_min <= self.q_rest && self.q_rest < self.q_max) {
            return Err(Error::InvalidConfig(format!(
                "plunger limits need q_min <= q_rest < q_max, got {} / {} / {}",
                self.q_min, self.q_rest, self.q_max
            )));
        }
        Ok(())
    }

    /// Loads a flat `key = value` file. Missing keys take their defaults;
    /// unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let cfg: Self = crate::io::read_config(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = crate::io::parse_config(Path::new("<config>"), text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotorCommand {
    PositionTarget(f64),
    TorqueTarget(f64),
}

impl MotorCommand {
    pub fn value(self) -> f64 {
        match self {
            MotorCommand::PositionTarget(v) | MotorCommand::TorqueTarget(v) => v,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            MotorCommand::PositionTarget(_) => "position",
            MotorCommand::TorqueTarget(_) => "torque",
        }
    }
}

/// Which case of a control law produced a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Draw,
    Release,
    Forward,
    Reverse,
    Track,
    Drive,
    Advance,
    Reset,
    Close,
    Open,
    /// Binary grasp keeps its previous state.
    Hold,
    /// No threshold crossed; output unchanged or zero.
    DeadBand,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Draw => "draw",
            Branch::Release => "release",
            Branch::Forward => "forward",
            Branch::Reverse => "reverse",
            Branch::Track => "track",
            Branch::Drive => "drive",
            Branch::Advance => "advance",
            Branch::Reset => "reset",
            Branch::Close => "close",
            Branch::Open => "open",
            Branch::Hold => "hold",
            Branch::DeadBand => "deadband",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output of one controller tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuation {
    pub command: MotorCommand,
    pub branch: Branch,
    /// The raw law output fell outside the position limits and was clamped.
    pub saturated: bool,
}

fn clamped(raw: f64, lo: f64, hi: f64) -> (f64, bool) {
    let value = raw.clamp(lo, hi);
    (value, value != raw)
}

fn position(raw: f64, lo: f64, hi: f64, branch: Branch) -> Actuation {
    let (value, saturated) = clamped(raw, lo, hi);
    Actuation {
        command: MotorCommand::PositionTarget(value),
        branch,
        saturated,
    }
}

fn torque(value: f64, branch: Branch) -> Actuation {
    Actuation {
        command: MotorCommand::TorqueTarget(value),
        branch,
        saturated: false,
    }
}

/// Flicker draw/release law. `q` is the draw motor position in mm.
pub fn flick_update(q: f64, s1: f64, s2: f64, cfg: &ControllerConfig) -> Actuation {
    let (raw, branch) = if s1 - s2 > cfg.s_bar_draw {
        (q + cfg.v_bar * cfg.dt, Branch::Draw)
    } else if s2 - s1 > cfg.s_bar_release {
        (cfg.q_release, Branch::Release)
    } else {
        (q, Branch::DeadBand)
    };
    position(raw, 0.0, cfg.q_release, branch)
}

/// Bang-bang torque for the screwdriver gear drive.
pub fn twist_update(s1: f64, s2: f64, cfg: &ControllerConfig) -> Actuation {
    if s1 - s2 > cfg.s_bar {
        torque(cfg.tau_max, Branch::Forward)
    } else if s2 - s1 > cfg.s_bar {
        torque(-cfg.tau_max, Branch::Reverse)
    } else {
        torque(0.0, Branch::DeadBand)
    }
}

/// Proportional plunger position in mm, clamped to `[q_min, q_max]`.
pub fn suction_update(s1: f64, s2: f64, cfg: &ControllerConfig) -> Actuation {
    let raw = (0.5 * cfg.q_max - cfg.q_min) * (s1 - s2) + cfg.q_rest;
    position(raw, cfg.q_min, cfg.q_max, Branch::Track)
}

/// Single-site cutter drive.
pub fn cut_update(s1: f64, cfg: &ControllerConfig) -> Actuation {
    if s1 > cfg.s_bar {
        torque(cfg.tau_max, Branch::Drive)
    } else {
        torque(0.0, Branch::DeadBand)
    }
}

/// Humanoid wrist rotation. The unscrew case returns the wrist to zero.
pub fn wrist_update(q: f64, s1: f64, s2: f64, cfg: &ControllerConfig) -> Actuation {
    let (value, branch) = if s1 - s2 > cfg.s_bar_screw {
        (q + cfg.v_bar_screw * cfg.dt, Branch::Advance)
    } else if s2 - s1 > cfg.s_bar_unscrew {
        (0.0, Branch::Reset)
    } else {
        (q, Branch::DeadBand)
    };
    Actuation {
        command: MotorCommand::PositionTarget(value),
        branch,
        saturated: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraspState {
    Open,
    Closed,
}

/// Humanoid binary grasp. Sub-threshold input latches the previous state.
pub fn grasp_update(
    state: GraspState,
    s1: f64,
    s2: f64,
    cfg: &ControllerConfig,
) -> (GraspState, Actuation) {
    let (next, branch) = if s1 - s2 > cfg.s_bar_close {
        (GraspState::Closed, Branch::Close)
    } else if s2 - s1 > cfg.s_bar_open {
        (GraspState::Open, Branch::Open)
    } else {
        (state, Branch::Hold)
    };
    let q = match next {
        GraspState::Open => cfg.q_open,
        GraspState::Closed => cfg.q_close,
    };
    let act = Actuation {
        command: MotorCommand::PositionTarget(q),
        branch,
        saturated: false,
    };
    (next, act)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Device {
    Flick,
    Twist,
    Suction,
    Cut,
    Wrist,
    Grasp,
}

impl Device {
    pub const ALL: [Device; 6] = [
        Device::Flick,
        Device::Twist,
        Device::Suction,
        Device::Cut,
        Device::Wrist,
        Device::Grasp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Device::Flick => "flick",
            Device::Twist => "twist",
            Device::Suction => "suction",
            Device::Cut => "cut",
            Device::Wrist => "wrist",
            Device::Grasp => "grasp",
        }
    }
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Controller memory carried between ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerState {
    /// Last commanded position of a position-integrating law.
    Position(f64),
    Grasp(GraspState),
    Stateless,
}

/// One device's control law together with its state.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    device: Device,
    cfg: ControllerConfig,
    state: ControllerState,
}

impl Controller {
    pub fn new(device: Device, cfg: ControllerConfig) -> Result<Self> {
        cfg.validate()?;
        let state = match device {
            Device::Flick | Device::Wrist => ControllerState::Position(0.0),
            Device::Grasp => ControllerState::Grasp(GraspState::Open),
            Device::Twist | Device::Suction | Device::Cut => ControllerState::Stateless,
        };
        Ok(Self { device, cfg, state })
    }

    pub fn device(&self) -> Device {
        self.device
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn state(&self) -> ControllerState {
        self.state
    }

    /// Overrides the remembered position of a flick or wrist controller.
    pub fn set_position(&mut self, q: f64) {
        if let ControllerState::Position(p) = &mut self.state {
            *p = q;
        }
    }

    pub fn step(&mut self, s1: f64, s2: f64) -> Actuation {
        let cfg = &self.cfg;
        match (self.device, &mut self.state) {
            (Device::Flick, ControllerState::Position(q)) => {
                let act = flick_update(*q, s1, s2, cfg);
                *q = act.command.value();
                act
            }
            (Device::Wrist, ControllerState::Position(q)) => {
                let act = wrist_update(*q, s1, s2, cfg);
                *q = act.command.value();
                act
            }
            (Device::Grasp, ControllerState::Grasp(g)) => {
                let (next, act) = grasp_update(*g, s1, s2, cfg);
                *g = next;
                act
            }
            (Device::Twist, _) => twist_update(s1, s2, cfg),
            (Device::Suction, _) => suction_update(s1, s2, cfg),
            (Device::Cut, _) => cut_update(s1, cfg),
            (device, state) => unreachable!("{device} controller in state {state:?}"),
        }
    }
}
