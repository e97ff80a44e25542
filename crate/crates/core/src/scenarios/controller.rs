//! Controller block shared by every closed-loop scenario file.

use serde::{Deserialize, Serialize};

use crate::control::{ChannelNlc, HybridConfig, PidGains, PilotConfig, RollPd, Strategy};
use crate::error::{GliderError, Result};

fn d() -> PilotConfig {
    PilotConfig::default()
}

fn d_pitch() -> ChannelNlc {
    d().pitch
}
fn d_depth() -> ChannelNlc {
    d().depth
}
fn d_pitch_pid() -> PidGains {
    d().pitch_pid
}
fn d_depth_pid() -> PidGains {
    d().depth_pid
}
fn d_roll() -> RollPd {
    d().roll
}
fn d_omega() -> f64 {
    d().reference_omega
}
fn d_zeta() -> f64 {
    d().reference_zeta
}
fn d_fraction() -> f64 {
    d().transition_fraction
}
fn d_pitch_scale() -> f64 {
    d().pitch_scale
}
fn d_depth_scale() -> f64 {
    d().depth_scale
}

/// Gains and strategy selection. Every field except `strategy` defaults to
/// the stock tuning, so a scenario file can set just the strategy name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    /// One of `nlc`, `pid`, `hybrid`, or `open` (simulate only).
    pub strategy: String,
    #[serde(default = "d_pitch")]
    pub pitch: ChannelNlc,
    #[serde(default = "d_depth")]
    pub depth: ChannelNlc,
    #[serde(default = "d_pitch_pid")]
    pub pitch_pid: PidGains,
    #[serde(default = "d_depth_pid")]
    pub depth_pid: PidGains,
    #[serde(default = "d_roll")]
    pub roll: RollPd,
    #[serde(default = "d_omega")]
    pub reference_omega: f64,
    #[serde(default = "d_zeta")]
    pub reference_zeta: f64,
    #[serde(default = "d_fraction")]
    pub transition_fraction: f64,
    #[serde(default)]
    pub hybrid: HybridConfig,
    #[serde(default = "d_pitch_scale")]
    pub pitch_scale: f64,
    #[serde(default = "d_depth_scale")]
    pub depth_scale: f64,
}

impl Default for ControllerSection {
    fn default() -> Self {
        ControllerSection {
            strategy: "nlc".into(),
            pitch: d_pitch(),
            depth: d_depth(),
            pitch_pid: d_pitch_pid(),
            depth_pid: d_depth_pid(),
            roll: d_roll(),
            reference_omega: d_omega(),
            reference_zeta: d_zeta(),
            transition_fraction: d_fraction(),
            hybrid: HybridConfig::default(),
            pitch_scale: d_pitch_scale(),
            depth_scale: d_depth_scale(),
        }
    }
}

impl ControllerSection {
    pub fn with_strategy(name: &str) -> Self {
        ControllerSection { strategy: name.into(), ..Default::default() }
    }

    /// `None` means open loop (no feedback law at all).
    pub fn strategy(&self) -> Result<Option<Strategy>> {
        Ok(Some(match self.strategy.as_str() {
            "nlc" => Strategy::Nlc,
            "pid" => Strategy::Pid,
            "hybrid" => Strategy::Hybrid,
            "open" => return Ok(None),
            other => {
                return Err(GliderError::one_problem(format!(
                    "unknown strategy `{other}`; expected nlc, pid, hybrid or open"
                )))
            }
        }))
    }

    /// Assembles and validates the feedback configuration.
    pub fn pilot_config(&self) -> Result<PilotConfig> {
        let strategy = self.strategy()?.ok_or_else(|| {
            GliderError::one_problem("strategy `open` carries no feedback gains")
        })?;
        let config = PilotConfig {
            strategy,
            pitch: self.pitch,
            depth: self.depth,
            pitch_pid: self.pitch_pid,
            depth_pid: self.depth_pid,
            roll: self.roll,
            reference_omega: self.reference_omega,
            reference_zeta: self.reference_zeta,
            transition_fraction: self.transition_fraction,
            hybrid: self.hybrid,
            pitch_scale: self.pitch_scale,
            depth_scale: self.depth_scale,
        };
        config.validate()?;
        Ok(config)
    }
}
