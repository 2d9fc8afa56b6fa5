//! Closed-loop runner, synthetic EMG, and task layout helpers.

mod sim;
mod synth;
mod targets;

pub use sim::{
    run_simulation, Event, EventKind, SimulationConfig, SimulationLog, TickRecord,
    DEFAULT_MOTOR_SPEED,
};
pub use synth::{synth_emg, Segment};
pub use targets::{flick_targets, FlickTarget, TARGET_COUNT};
