//! Vehicle description files.
//!
//! TOML with a `schema_version` gate and unknown keys rejected, so a typo'd
//! field name fails loudly instead of silently running defaults. Units:
//! meters, kilograms, seconds, radians throughout; the inertia matrix is the
//! 6x6 generalized (rigid body plus added mass) form in body axes.

use std::path::Path;

use nalgebra::{Matrix6, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GliderError, Result};
use crate::vehicle::{
    ActuatorRanges, HydroCoefficients, InertiaModel, MassConfiguration, VehicleParams,
};

pub const VEHICLE_SCHEMA_VERSION: u32 = 1;

/// Mass layout: hull total, movable masses, and their body-frame mounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    /// Vehicle dry mass, kg.
    pub m_total: f64,
    /// Rotary (roll) mass, kg.
    pub m_r: f64,
    /// Slider (pitch) mass, kg.
    pub m_s: f64,
    /// Rotary-axis mount point, m.
    pub r_r: [f64; 3],
    /// Slider rail reference point, m.
    pub r_s: [f64; 3],
    /// Ballast tank position, m.
    pub r_b: [f64; 3],
    /// Slider rest offset along x, m.
    pub r_sx0: f64,
    /// Swing radius of the rotary mass, m.
    pub rotary_radius: f64,
    /// Gravitational acceleration, m/s^2.
    pub g: f64,
}

/// Generalized inertia, either as its diagonal or the full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<[[f64; 6]; 6]>,
}

/// The twelve hydrodynamic coefficients. Forces scale with speed squared;
/// see the model for each term's incidence dependence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    pub kd0: f64,
    pub kd: f64,
    pub kl0: f64,
    pub kl: f64,
    pub kbeta: f64,
    pub kmr: f64,
    pub kp: f64,
    pub km0: f64,
    pub km: f64,
    pub kq: f64,
    pub kmy: f64,
    pub kr: f64,
}

/// Actuator travel limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSection {
    /// Rotary arm swing limit, rad.
    pub gamma_max: f64,
    /// Slider travel limit, m.
    pub delta_rs_max: f64,
    /// Pumpable ballast limit, kg.
    pub m_b_max: f64,
    /// Ballast plunger travel per pumped mass, m/kg.
    pub ballast_travel_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleFile {
    pub schema_version: u32,
    pub mass: MassSection,
    pub inertia: InertiaSection,
    pub hydro: HydroSection,
    pub actuators: ActuatorSection,
}

impl VehicleFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let file: VehicleFile = toml::from_str(text).map_err(|e| GliderError::Parse {
            file: origin.into(),
            row: 0,
            msg: e.to_string(),
        })?;
        if file.schema_version != VEHICLE_SCHEMA_VERSION {
            return Err(GliderError::one_problem(format!(
                "vehicle schema_version {} unsupported, expected {VEHICLE_SCHEMA_VERSION}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GliderError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| GliderError::one_problem(format!("serializing vehicle file: {e}")))?;
        std::fs::write(path, text).map_err(|e| GliderError::io(path, e))
    }

    /// Validates and converts into the runtime types.
    pub fn into_params(self) -> Result<(VehicleParams, ActuatorRanges)> {
        let mass = MassConfiguration {
            m_total: self.mass.m_total,
            m_r: self.mass.m_r,
            m_s: self.mass.m_s,
            r_r: Vector3::from_row_slice(&self.mass.r_r),
            r_s: Vector3::from_row_slice(&self.mass.r_s),
            r_b: Vector3::from_row_slice(&self.mass.r_b),
            r_sx0: self.mass.r_sx0,
            rotary_radius: self.mass.rotary_radius,
            g: self.mass.g,
        };
        mass.validate()?;

        let matrix = match (self.inertia.diagonal, self.inertia.full) {
            (Some(d), None) => Matrix6::from_diagonal(&nalgebra::Vector6::from_row_slice(&d)),
            (None, Some(rows)) => {
                let mut m = Matrix6::zeros();
                for (i, row) in rows.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)] = *v;
                    }
                }
                m
            }
            _ => {
                return Err(GliderError::one_problem(
                    "inertia needs exactly one of `diagonal` or `full`",
                ))
            }
        };
        let inertia = InertiaModel::new(matrix)?;

        let hydro = HydroCoefficients {
            kd0: self.hydro.kd0,
            kd: self.hydro.kd,
            kl0: self.hydro.kl0,
            kl: self.hydro.kl,
            kbeta: self.hydro.kbeta,
            kmr: self.hydro.kmr,
            kp: self.hydro.kp,
            km0: self.hydro.km0,
            km: self.hydro.km,
            kq: self.hydro.kq,
            kmy: self.hydro.kmy,
            kr: self.hydro.kr,
        };
        hydro.validate()?;

        let ranges = ActuatorRanges {
            gamma_max: self.actuators.gamma_max,
            delta_rs_max: self.actuators.delta_rs_max,
            m_b_max: self.actuators.m_b_max,
            ballast_travel_gain: self.actuators.ballast_travel_gain,
        };
        ranges.validate()?;

        Ok((VehicleParams { mass, inertia, hydro }, ranges))
    }
}

/// The stock desk-scale platform used whenever no vehicle file is given.
pub fn default_vehicle() -> VehicleFile {
    VehicleFile {
        schema_version: VEHICLE_SCHEMA_VERSION,
        mass: MassSection {
            m_total: 13.0,
            m_r: 2.0,
            m_s: 2.0,
            r_r: [0.0, 0.0, 0.02],
            r_s: [0.0, 0.0, 0.0],
            r_b: [0.15, 0.0, 0.0],
            r_sx0: 0.0,
            rotary_radius: 0.02,
            g: 9.81,
        },
        inertia: InertiaSection {
            diagonal: Some([13.4, 24.0, 24.0, 0.18, 2.1, 2.1]),
            full: None,
        },
        hydro: HydroSection {
            kd0: 8.0,
            kd: 35.0,
            kl0: 0.2,
            kl: 120.0,
            kbeta: -20.0,
            kmr: -3.0,
            kp: -4.0,
            km0: 0.0,
            km: -12.0,
            kq: -8.0,
            // Yaw stiffness has no pendulum backing it, so the fins must beat
            // the destabilizing Munk couple from the added-mass asymmetry
            // (m_yy - m_xx = 10.6 here) with real margin or the hull crabs.
            kmy: 28.0,
            kr: -6.0,
        },
        actuators: ActuatorSection {
            gamma_max: std::f64::consts::FRAC_PI_3,
            delta_rs_max: 0.05,
            m_b_max: 0.25,
            ballast_travel_gain: 0.1,
        },
    }
}

/// Runtime form of [`default_vehicle`].
pub fn default_params() -> (VehicleParams, ActuatorRanges) {
    default_vehicle().into_params().expect("stock platform must validate")
}
