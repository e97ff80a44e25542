//! Tracking control for the three internal actuators: a combined
//! backstepping + sliding-mode law on affine channel models, a PID baseline,
//! pendulum PD roll steering, and a hybrid supervisor that picks between
//! them.

pub mod hybrid;
pub mod linearize;
pub mod pid;
pub mod pilot;
pub mod reference;
pub mod roll;
pub mod smc;

pub use hybrid::{HybridConfig, HybridSupervisor};
pub use linearize::{depth_affine, pitch_affine, AffineChannel};
pub use pid::{PidController, PidGains};
pub use pilot::{
    ChannelNlc, GliderPilot, PilotConfig, SetpointEntry, SetpointSchedule, Strategy, GAIN_FLOOR,
};
pub use reference::ReferenceFilter;
pub use roll::RollPd;
pub use smc::{
    backstepping_term, k2_lower_bound, lyapunov, saturate, sliding_surface, smc_term,
};
