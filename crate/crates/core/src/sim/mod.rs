//! Fixed-step closed-loop simulation: RK4 plant integration, zero-order-held
//! control and disturbance, trajectory capture, and tracking metrics.

pub mod disturbance;
pub mod integrator;
pub mod metrics;
pub mod runner;
pub mod trajectory;

pub use disturbance::{sample_disturbance, DisturbanceSpec};
pub use integrator::{rk4_step, rk4_step_with};
pub use metrics::{compute_metrics, Channel, TrackingMetrics};
pub use runner::{
    derive_seed, simulate, stream, ClampCounts, ModeSwitch, OpenLoopSchedule, Pilot, PilotOutput,
    SimConfig, SimOutput, TickAudit,
};
pub use trajectory::{
    ChannelRefs, ControlMode, Trajectory, TrajectorySample, TRAJECTORY_HEADER,
};
