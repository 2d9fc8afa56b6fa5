use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::controllers::{Branch, Controller, ControllerConfig, Device, MotorCommand};
use crate::mechanics::{
    draw_angle, gear_output, gear_torque, latch, load_geometry, max_stroke, ratchet_positions,
    rocker_angle, speed_from_energy, stored_energy, suction_force, FlickerGeometry,
    FourBarGeometry, GearPair, Geometry, SuctionGeometry,
};
use crate::signal::{rolling_mav, RawEmgTrace, DEFAULT_WINDOW};
use crate::{Error, Result};

const MM: f64 = 1e-3;
/// Relative tolerance when comparing rates and lengths between files.
const MATCH_TOLERANCE: f64 = 1e-9;
/// Default speed of the torque-driven motors, rad/s.
pub const DEFAULT_MOTOR_SPEED: f64 = 10.0;

/// Everything needed to run one device against one EMG trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub device: Device,
    pub controller: ControllerConfig,
    /// Device geometry. `None` selects the built device where one exists.
    pub geometry: Option<Geometry>,
    /// Simulated time, s. The tick period is `controller.dt`.
    pub duration: f64,
    /// Smoothing window, samples.
    pub window: usize,
    /// Channels feeding `s1` and `s2`.
    pub s1_channel: usize,
    pub s2_channel: usize,
    /// Striker inertia, kg·m². When set, release events also report the
    /// striker speed.
    pub striker_inertia: Option<f64>,
    /// Motor speed of the twisting and cutting drives while torque is
    /// applied, rad/s.
    pub motor_speed: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationFile {
    device: Device,
    controller: Option<PathBuf>,
    geometry: Option<PathBuf>,
    duration_s: f64,
    dt_s: Option<f64>,
    window: Option<usize>,
    s1_channel: Option<usize>,
    s2_channel: Option<usize>,
    striker_inertia_kg_m2: Option<f64>,
    motor_speed_rad_s: Option<f64>,
}

impl SimulationConfig {
    pub fn new(device: Device, controller: ControllerConfig, duration: f64) -> Self {
        Self {
            device,
            controller,
            geometry: None,
            duration,
            window: DEFAULT_WINDOW,
            s1_channel: 0,
            s2_channel: 1,
            striker_inertia: None,
            motor_speed: DEFAULT_MOTOR_SPEED,
        }
    }

    pub fn with_geometry(mut self, geometry: Geometry) -> Self {
        self.geometry = Some(geometry);
        self
    }

    pub fn dt(&self) -> f64 {
        self.controller.dt
    }

    /// Number of controller ticks, `round(duration / dt)`.
    pub fn ticks(&self) -> usize {
        (self.duration / self.dt()).round() as usize
    }

    /// Loads a simulation file. `controller` and `geometry` paths are
    /// resolved relative to the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let file: SimulationFile = crate::io::read_config(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let controller = match &file.controller {
            Some(p) => ControllerConfig::from_file(&base.join(p))?,
            None => ControllerConfig::default(),
        };
        if let Some(dt) = file.dt_s {
            if !same(dt, controller.dt) {
                return Err(Error::ConfigMismatch(format!(
                    "dt_s = {dt} differs from controller dt = {}",
                    controller.dt
                )));
            }
        }
        let geometry = match &file.geometry {
            Some(p) => Some(load_geometry(&base.join(p))?),
            None => None,
        };
        let mut cfg = Self::new(file.device, controller, file.duration_s);
        cfg.geometry = geometry;
        cfg.window = file.window.unwrap_or(cfg.window);
        cfg.s1_channel = file.s1_channel.unwrap_or(cfg.s1_channel);
        cfg.s2_channel = file.s2_channel.unwrap_or(cfg.s2_channel);
        cfg.striker_inertia = file.striker_inertia_kg_m2;
        cfg.motor_speed = file.motor_speed_rad_s.unwrap_or(cfg.motor_speed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.controller.validate()?;
        let dt = self.dt();
        if !(self.duration.is_finite() && self.duration >= dt) {
            return Err(Error::InvalidConfig(format!(
                "duration {} must be at least one tick ({dt} s)",
                self.duration
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidWindow);
        }
        if let Some(i) = self.striker_inertia {
            if !(i > 0.0 && i.is_finite()) {
                return Err(Error::InvalidInertia(i));
            }
        }
        if !(self.motor_speed >= 0.0 && self.motor_speed.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "motor speed {} must be non-negative",
                self.motor_speed
            )));
        }
        self.model().map(|_| ())
    }

    fn model(&self) -> Result<Model> {
        let mismatch = |g: &Geometry| {
            Err(Error::ConfigMismatch(format!(
                "{} geometry cannot drive the {} device",
                g.kind(),
                self.device
            )))
        };
        match (self.device, &self.geometry) {
            (Device::Flick, Some(Geometry::Flicker(g))) => {
                g.validate()?;
                Ok(Model::Flick(g.clone()))
            }
            (Device::Flick, None) => Err(Error::ConfigMismatch(
                "the flick device needs a flicker geometry (cord K and L0 are not defaulted)"
                    .into(),
            )),
            (Device::Twist, Some(Geometry::Gear(g))) => Ok(Model::Twist(*g)),
            (Device::Twist, None) => Ok(Model::Twist(GearPair::screwdriver())),
            (Device::Suction, Some(Geometry::Suction(g))) => self.suction_model(g.clone()),
            (Device::Suction, None) => self.suction_model(SuctionGeometry::built()),
            (Device::Cut, Some(Geometry::FourBar(g))) => Ok(Model::Cut(*g)),
            (Device::Cut, None) => Ok(Model::Cut(FourBarGeometry::scissors())),
            (Device::Wrist, None) => Ok(Model::Wrist),
            (Device::Grasp, None) => Ok(Model::Grasp),
            (_, Some(g)) => mismatch(g),
        }
    }

    fn suction_model(&self, g: SuctionGeometry) -> Result<Model> {
        g.validate()?;
        let c = &self.controller;
        if !same(c.q_max * MM, g.stroke) || !same(c.q_rest * MM, g.rest) {
            return Err(Error::ConfigMismatch(format!(
                "controller plunger limits q_max = {} mm, q_rest = {} mm do not match the \
                 geometry ({} mm, {} mm)",
                c.q_max,
                c.q_rest,
                g.stroke / MM,
                g.rest / MM
            )));
        }
        if c.q_min < 0.0 {
            return Err(Error::ConfigMismatch(format!(
                "q_min = {} mm lies outside the plunger stroke",
                c.q_min
            )));
        }
        Ok(Model::Suction(g))
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOLERANCE * a.abs().max(b.abs())
}

enum Model {
    Flick(FlickerGeometry),
    Twist(GearPair),
    Suction(SuctionGeometry),
    Cut(FourBarGeometry),
    Wrist,
    Grasp,
}

impl Model {
    /// Column names of the device state and the auxiliary quantity.
    fn labels(&self) -> (&'static str, &'static str) {
        match self {
            Model::Flick(_) => ("theta_d_rad", "energy_j"),
            Model::Twist(_) => ("output_angle_rad", "output_torque_nm"),
            Model::Suction(_) => ("plunger_mm", "suction_force_n"),
            Model::Cut(_) => ("rocker_rad", "crank_rad"),
            Model::Wrist => ("wrist_rad", "aux"),
            Model::Grasp => ("closed", "aux"),
        }
    }
}

/// One controller tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub t: f64,
    pub s1: f64,
    pub s2: f64,
    pub branch: Branch,
    pub saturated: bool,
    pub command: MotorCommand,
    /// Draw angle, output angle, plunger position, rocker angle, wrist angle
    /// or grasp state, depending on the device.
    pub state: f64,
    /// Stored energy, output torque, suction force or crank angle where the
    /// device has one.
    pub aux: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// The controller switched to a different branch of its law.
    Branch(Branch),
    /// The position clamp started limiting the command.
    Saturation,
    /// The flick pin passed ratchet tooth `level` (1-based).
    Latch { level: usize },
    /// The flick striker fired with the energy of the last latched tooth.
    Release {
        level: Option<usize>,
        energy: f64,
        speed: Option<f64>,
    },
    /// The release trigger was let go; the next release can fire.
    Rearm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub tick: usize,
    pub kind: EventKind,
}

impl Event {
    fn name(&self) -> &'static str {
        match self.kind {
            EventKind::Branch(_) => "branch",
            EventKind::Saturation => "saturation",
            EventKind::Latch { .. } => "latch",
            EventKind::Release { .. } => "release",
            EventKind::Rearm => "rearm",
        }
    }
}

/// Per-tick records and events of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationLog {
    device: Device,
    labels: (&'static str, &'static str),
    records: Vec<TickRecord>,
    events: Vec<Event>,
}

impl SimulationLog {
    pub fn device(&self) -> Device {
        self.device
    }

    pub fn records(&self) -> &[TickRecord] {
        &self.records
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn state_label(&self) -> &'static str {
        self.labels.0
    }

    pub fn aux_label(&self) -> &'static str {
        self.labels.1
    }

    /// `(tick, level, energy)` of every release.
    pub fn releases(&self) -> Vec<(usize, Option<usize>, f64)> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Release { level, energy, .. } => Some((e.tick, level, energy)),
                _ => None,
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Two comma-separated tables separated by a blank line: the tick records,
/// then `event,tick,value` rows. Releases carry
/// `energy;level;speed` in the value column.
impl fmt::Display for SimulationLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# device={}", self.device)?;
        writeln!(
            f,
            "tick,t,s1,s2,branch,saturated,command_kind,command,{},{}",
            self.labels.0, self.labels.1
        )?;
        for r in &self.records {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{}",
                r.tick,
                r.t,
                r.s1,
                r.s2,
                r.branch,
                u8::from(r.saturated),
                r.command.kind(),
                r.command.value(),
                r.state,
                opt(r.aux)
            )?;
        }
        writeln!(f)?;
        writeln!(f, "event,tick,value")?;
        for e in &self.events {
            let mut value = String::new();
            match e.kind {
                EventKind::Branch(b) => value.push_str(b.name()),
                EventKind::Latch { level } => write!(value, "{level}")?,
                EventKind::Release {
                    level,
                    energy,
                    speed,
                } => write!(
                    value,
                    "{energy};{};{}",
                    level.map(|l| l.to_string()).unwrap_or_default(),
                    opt(speed)
                )?,
                EventKind::Saturation | EventKind::Rearm => {}
            }
            writeln!(f, "{},{},{}", e.name(), e.tick, value)?;
        }
        Ok(())
    }
}

struct FlickState {
    teeth: Vec<f64>,
    stroke: f64,
    level: Option<usize>,
    armed: bool,
}

/// Runs the controller and device model for `cfg.ticks()` ticks, one EMG
/// sample per tick.
///
/// The flick pin follows the commanded draw up to full stroke and latches
/// every tooth it passes; the striker sits at the last latched tooth. A
/// release tick fires the striker once, empties the stored energy and
/// re-homes the draw motor. The next release needs the trigger to be let go
/// first.
pub fn run_simulation(cfg: &SimulationConfig, trace: &RawEmgTrace) -> Result<SimulationLog> {
    cfg.validate()?;
    let model = cfg.model()?;
    let dt = cfg.dt();
    if !same(trace.sample_rate() * dt, 1.0) {
        return Err(Error::ConfigMismatch(format!(
            "EMG sampled at {} Hz but the controller ticks every {dt} s",
            trace.sample_rate()
        )));
    }
    let ticks = cfg.ticks();
    if trace.len() < ticks {
        return Err(Error::TraceTooShort {
            required: ticks,
            available: trace.len(),
        });
    }
    let smoothed = rolling_mav(trace, cfg.window)?;
    let s1_all = smoothed.channel(cfg.s1_channel)?;
    let s2_all = smoothed.channel(cfg.s2_channel)?;

    let mut controller = Controller::new(cfg.device, cfg.controller.clone())?;
    let mut flick = match &model {
        Model::Flick(g) => Some(FlickState {
            teeth: ratchet_positions(g),
            stroke: max_stroke(g),
            level: None,
            armed: true,
        }),
        _ => None,
    };
    let mut motor_angle = 0.0;
    let mut records = Vec::with_capacity(ticks);
    let mut events = Vec::new();
    let mut previous: Option<(Branch, bool)> = None;

    for tick in 0..ticks {
        let (s1, s2) = (s1_all[tick], s2_all[tick]);
        let act = controller.step(s1, s2);
        let (branch, saturated) = (act.branch, act.saturated);
        if previous.map(|(b, _)| b) != Some(branch) {
            events.push(Event {
                tick,
                kind: EventKind::Branch(branch),
            });
        }
        if saturated && !previous.is_some_and(|(_, s)| s) {
            events.push(Event {
                tick,
                kind: EventKind::Saturation,
            });
        }
        previous = Some((branch, saturated));

        let command = act.command.value();
        let (state, aux) = match (&model, flick.as_mut()) {
            (Model::Flick(g), Some(fs)) => {
                if branch == Branch::Release {
                    if fs.armed {
                        let energy = tooth_energy(fs, g)?;
                        let speed = cfg
                            .striker_inertia
                            .map(|i| speed_from_energy(energy, i))
                            .transpose()?;
                        events.push(Event {
                            tick,
                            kind: EventKind::Release {
                                level: fs.level,
                                energy,
                                speed,
                            },
                        });
                        fs.armed = false;
                    }
                    fs.level = None;
                    controller.set_position(0.0);
                } else {
                    if !fs.armed {
                        fs.armed = true;
                        events.push(Event {
                            tick,
                            kind: EventKind::Rearm,
                        });
                    }
                    let pin = (command * MM).min(fs.stroke);
                    let reached = latch(&fs.teeth, pin);
                    if reached > fs.level {
                        let from = fs.level.unwrap_or(0);
                        for level in from + 1..=reached.unwrap_or(0) {
                            events.push(Event {
                                tick,
                                kind: EventKind::Latch { level },
                            });
                        }
                        fs.level = reached;
                    }
                }
                let theta = tooth_angle(fs, g)?;
                (theta, Some(stored_energy(theta, g)))
            }
            (Model::Twist(gp), _) => {
                motor_angle += command.signum() * cfg.motor_speed * dt * f64::from(command != 0.0);
                (gear_output(motor_angle, gp), Some(gear_torque(command, gp)))
            }
            (Model::Suction(g), _) => {
                let q = command * MM;
                let force = if q > g.rest {
                    Some(suction_force(q, g)?)
                } else {
                    None
                };
                (command, force)
            }
            (Model::Cut(g), _) => {
                if command > 0.0 {
                    motor_angle += cfg.motor_speed * dt;
                }
                (rocker_angle(motor_angle, g)?, Some(motor_angle))
            }
            (Model::Wrist, _) => (command, None),
            (Model::Grasp, _) => {
                let closed = (command - cfg.controller.q_close).abs()
                    < (command - cfg.controller.q_open).abs();
                (f64::from(u8::from(closed)), None)
            }
            (Model::Flick(_), None) => unreachable!("flick model without ratchet state"),
        };
        records.push(TickRecord {
            tick,
            t: tick as f64 * dt,
            s1,
            s2,
            branch,
            saturated,
            command: act.command,
            state,
            aux,
        });
    }

    Ok(SimulationLog {
        device: cfg.device,
        labels: model.labels(),
        records,
        events,
    })
}

fn tooth_angle(fs: &FlickState, g: &FlickerGeometry) -> Result<f64> {
    match fs.level {
        Some(level) => draw_angle(fs.teeth[level - 1], g),
        None => Ok(g.theta_min),
    }
}

fn tooth_energy(fs: &FlickState, g: &FlickerGeometry) -> Result<f64> {
    Ok(stored_energy(tooth_angle(fs, g)?, g))
}
