use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{GliderError, Result};
use crate::vehicle::{ActuatorState, BodyVelocity, EulerAngles, InertialPose, VehicleState};

/// Which control law produced an actuator command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// Sliding-mode/backstepping law on the linearized channels.
    Nlc,
    /// PID baseline.
    Pid,
    /// Scheduled actuator values, no feedback.
    Open,
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControlMode::Nlc => "NLC",
            ControlMode::Pid => "PID",
            ControlMode::Open => "OPEN",
        })
    }
}

impl FromStr for ControlMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "NLC" => Ok(ControlMode::Nlc),
            "PID" => Ok(ControlMode::Pid),
            "OPEN" => Ok(ControlMode::Open),
            other => Err(format!("unknown control mode '{other}'")),
        }
    }
}

/// Reference-filter outputs active at a sample: pitch (rad), depth (m),
/// roll (rad). Zero for open-loop runs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelRefs {
    pub theta: f64,
    pub z: f64,
    pub phi: f64,
}

/// One decimated record of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: VehicleState,
    pub act: ActuatorState,
    pub mode: ControlMode,
    pub refs: ChannelRefs,
}

/// Time-ordered record of a simulation or experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

/// Column order of the trajectory CSV schema.
pub const TRAJECTORY_HEADER: &str =
    "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,gamma,delta_rs,m_b,ref_theta,ref_z,ref_phi,mode";

/// Floating-point values in trajectory files carry nine significant digits.
pub fn fmt_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

impl Trajectory {
    pub fn push(&mut self, sample: TrajectorySample) {
        self.samples.push(sample);
    }

    pub fn last_state(&self) -> Option<&VehicleState> {
        self.samples.last().map(|s| &s.state)
    }

    /// Strictly increasing timestamps are a structural invariant; violations
    /// mean the producer is broken.
    pub fn check_monotone(&self) -> Result<()> {
        for pair in self.samples.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(GliderError::one_problem(format!(
                    "trajectory time must increase strictly: {} then {}",
                    pair[0].t, pair[1].t
                )));
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRAJECTORY_HEADER}")?;
        for s in &self.samples {
            let st = s.state;
            let fields = [
                s.t,
                st.pose.x,
                st.pose.y,
                st.pose.z,
                st.angles.phi,
                st.angles.theta,
                st.angles.psi,
                st.nu.u,
                st.nu.v,
                st.nu.w,
                st.nu.p,
                st.nu.q,
                st.nu.r,
                s.act.gamma,
                s.act.delta_rs,
                s.act.m_b,
                s.refs.theta,
                s.refs.z,
                s.refs.phi,
            ];
            let mut line = String::with_capacity(16 * 20);
            for f in fields {
                line.push_str(&fmt_sig9(f));
                line.push(',');
            }
            line.push_str(&s.mode.to_string());
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| GliderError::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(|e| GliderError::io(path, e))?;
        w.flush().map_err(|e| GliderError::io(path, e))
    }

    /// Parses a trajectory CSV, enforcing the exact schema, finite values and
    /// strictly increasing time. `ballast_travel_gain` reconstructs the
    /// plunger offset, which is derived rather than logged.
    pub fn read_csv<R: Read>(r: R, origin: &Path, ballast_travel_gain: f64) -> Result<Self> {
        let reader = BufReader::new(r);
        let parse_err = |row: usize, msg: String| GliderError::Parse {
            file: PathBuf::from(origin),
            row,
            msg,
        };
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty file".into()))?;
        let header = header.map_err(|e| GliderError::io(origin, e))?;
        if header.trim_end() != TRAJECTORY_HEADER {
            return Err(parse_err(1, format!("unexpected header '{header}'")));
        }
        let mut traj = Trajectory::default();
        for (idx, line) in lines {
            let row = idx + 1;
            let line = line.map_err(|e| GliderError::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.trim_end().split(',').collect();
            if parts.len() != 20 {
                return Err(parse_err(row, format!("expected 20 columns, got {}", parts.len())));
            }
            let mut vals = [0.0f64; 19];
            for (i, p) in parts[..19].iter().enumerate() {
                let v: f64 = p
                    .parse()
                    .map_err(|_| parse_err(row, format!("bad number '{p}' in column {}", i + 1)))?;
                if !v.is_finite() {
                    return Err(parse_err(row, format!("non-finite value in column {}", i + 1)));
                }
                vals[i] = v;
            }
            let mode = ControlMode::from_str(parts[19]).map_err(|e| parse_err(row, e))?;
            traj.push(TrajectorySample {
                t: vals[0],
                state: VehicleState {
                    pose: InertialPose::new(vals[1], vals[2], vals[3]),
                    angles: EulerAngles::new(vals[4], vals[5], vals[6]),
                    nu: BodyVelocity::new(vals[7], vals[8], vals[9], vals[10], vals[11], vals[12]),
                },
                act: ActuatorState::from_recorded(
                    vals[13],
                    vals[14],
                    vals[15],
                    ballast_travel_gain,
                ),
                mode,
                refs: ChannelRefs { theta: vals[16], z: vals[17], phi: vals[18] },
            });
        }
        traj.check_monotone()?;
        Ok(traj)
    }

    pub fn load_csv(path: &Path, ballast_travel_gain: f64) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| GliderError::io(path, e))?;
        Self::read_csv(file, path, ballast_travel_gain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t: f64) -> TrajectorySample {
        TrajectorySample {
            t,
            state: VehicleState {
                pose: InertialPose::new(0.1 * t, -0.2 * t, 2.0 + 0.05 * t),
                angles: EulerAngles::new(0.01, -0.3, 1.5 * t),
                nu: BodyVelocity::new(0.4, 0.001, 0.02, 0.0, -0.01, 0.005),
            },
            act: ActuatorState::from_recorded(0.5, -0.01, 0.12, 0.1),
            mode: ControlMode::Nlc,
            refs: ChannelRefs { theta: -0.3, z: 2.0, phi: 0.5 },
        }
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(
            TRAJECTORY_HEADER,
            "t,x,y,z,phi,theta,psi,u,v,w,p,q,r,gamma,delta_rs,m_b,ref_theta,ref_z,ref_phi,mode"
        );
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0125), "1.25000000e-2");
        assert_eq!(fmt_sig9(-3.0), "-3.00000000e0");
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let mut traj = Trajectory::default();
        for k in 0..50 {
            traj.push(sample(0.1 * k as f64));
        }
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let back =
            Trajectory::read_csv(buf.as_slice(), Path::new("mem"), 0.1).unwrap();
        assert_eq!(back.samples.len(), traj.samples.len());
        for (a, b) in traj.samples.iter().zip(&back.samples) {
            let xa = a.state.to_array();
            let xb = b.state.to_array();
            for (va, vb) in xa.iter().zip(xb.iter()) {
                let scale = va.abs().max(1.0);
                assert!((va - vb).abs() <= 1e-8 * scale, "{va} vs {vb}");
            }
            assert_eq!(a.mode, b.mode);
            // delta_rb is reconstructed from m_b on load.
            assert!((a.act.delta_rb - b.act.delta_rb).abs() < 1e-9);
        }
    }

    #[test]
    fn reload_rejects_wrong_header_and_bad_rows() {
        let text = "t,x,y\n0,1,2\n";
        let err = Trajectory::read_csv(text.as_bytes(), Path::new("bad.csv"), 0.1).unwrap_err();
        assert!(matches!(err, GliderError::Parse { row: 1, .. }));

        let mut good = Trajectory::default();
        good.push(sample(0.0));
        let mut buf = Vec::new();
        good.write_csv(&mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("not,a,row\n");
        let err = Trajectory::read_csv(text.as_bytes(), Path::new("bad.csv"), 0.1).unwrap_err();
        assert!(matches!(err, GliderError::Parse { row: 3, .. }));
    }

    #[test]
    fn reload_rejects_non_monotone_time() {
        let mut traj = Trajectory::default();
        traj.push(sample(1.0));
        traj.push(sample(1.0));
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        assert!(Trajectory::read_csv(buf.as_slice(), Path::new("m"), 0.1).is_err());
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [ControlMode::Nlc, ControlMode::Pid, ControlMode::Open] {
            assert_eq!(ControlMode::from_str(&m.to_string()).unwrap(), m);
        }
        assert!(ControlMode::from_str("AUTO").is_err());
    }
}
