//! Rigid-body model of an internally actuated underwater glider.
//!
//! The vehicle carries three internal actuators: a rotary mass swung about
//! the longitudinal axis (roll), a mass sliding along that axis (pitch trim)
//! and a variable ballast (net buoyancy). Hydrodynamic loads follow a
//! quasi-steady drag/lift/sideforce + damping-moment model parameterized by
//! twelve coefficients that the `sysid` module can estimate from motion
//! capture data.

pub mod dynamics;
pub mod hydro;
pub mod rotation;
pub mod types;

pub use dynamics::{
    effective_positions, generalized_momentum, gravity_buoyancy_wrench, state_derivative,
};
pub use hydro::{hydrodynamic_wrench, IncidencePowers, INCIDENCE_POWERS};
pub use rotation::{
    body_down_direction, body_rates_from_euler_rates, euler_rates_from_body_rates, flow_angles,
    rotation_flow_to_body, rotation_inertial_to_body, FlowAngles, GIMBAL_MARGIN,
};
pub use types::{
    ActuatorRanges, ActuatorState, BodyVelocity, ClampReport, EulerAngles, HydroCoefficients,
    InertiaModel, InertialPose, MassConfiguration, StateDerivative, VehicleParams, VehicleState,
    Wrench,
};
