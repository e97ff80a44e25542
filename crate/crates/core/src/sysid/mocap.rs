//! Capture-volume file formats: pose samples from the motion-capture system
//! and the actuator values logged alongside them.
//!
//! Both files are plain CSV with a fixed header. Values are written with 13
//! significant digits so a write/read cycle preserves them to much better
//! than 1e-9 relative.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{GliderError, Result};

pub const MOCAP_HEADER: &str = "t,x,y,z,phi,theta,psi";
pub const ACTUATOR_HEADER: &str = "t,gamma,delta_rs,m_b";

/// One pose fix: inertial position in m, attitude in rad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MocapSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MocapSeries {
    pub samples: Vec<MocapSample>,
}

/// One actuator log row: rotary angle in rad, slider offset in m, pumped
/// mass in kg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorRecord {
    pub t: f64,
    pub gamma: f64,
    pub delta_rs: f64,
    pub m_b: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActuatorSeries {
    pub records: Vec<ActuatorRecord>,
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn parse_field(raw: &str, origin: &str, row: usize) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| GliderError::Parse {
        file: origin.into(),
        row,
        msg: format!("not a number: {raw:?}"),
    })
}

fn split_row<'a>(
    line: &'a str,
    want: usize,
    origin: &str,
    row: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(GliderError::Parse {
            file: origin.into(),
            row,
            msg: format!("expected {want} fields, found {}", fields.len()),
        });
    }
    Ok(fields)
}

impl MocapSeries {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{MOCAP_HEADER}")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt(s.t),
                fmt(s.x),
                fmt(s.y),
                fmt(s.z),
                fmt(s.phi),
                fmt(s.theta),
                fmt(s.psi)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| GliderError::io(path, e))?;
        self.write_csv(&mut file).map_err(|e| GliderError::io(path, e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, origin: &str) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header.trim_end() == MOCAP_HEADER => {}
            Some((_, Ok(header))) => {
                return Err(GliderError::Parse {
                    file: origin.into(),
                    row: 1,
                    msg: format!("bad header {header:?}, expected {MOCAP_HEADER:?}"),
                })
            }
            Some((_, Err(e))) => return Err(GliderError::io(Path::new(origin), e)),
            None => {
                return Err(GliderError::Parse {
                    file: origin.into(),
                    row: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let mut samples = Vec::new();
        for (idx, line) in lines {
            let row = idx + 1;
            let line = line.map_err(|e| GliderError::io(Path::new(origin), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f = split_row(&line, 7, origin, row)?;
            let mut v = [0.0; 7];
            for (slot, raw) in v.iter_mut().zip(&f) {
                *slot = parse_field(raw, origin, row)?;
            }
            samples.push(MocapSample {
                t: v[0],
                x: v[1],
                y: v[2],
                z: v[3],
                phi: v[4],
                theta: v[5],
                psi: v[6],
            });
        }
        Ok(MocapSeries { samples })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| GliderError::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }
}

impl ActuatorSeries {
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{ACTUATOR_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{}", fmt(r.t), fmt(r.gamma), fmt(r.delta_rs), fmt(r.m_b))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| GliderError::io(path, e))?;
        self.write_csv(&mut file).map_err(|e| GliderError::io(path, e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, origin: &str) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header.trim_end() == ACTUATOR_HEADER => {}
            Some((_, Ok(header))) => {
                return Err(GliderError::Parse {
                    file: origin.into(),
                    row: 1,
                    msg: format!("bad header {header:?}, expected {ACTUATOR_HEADER:?}"),
                })
            }
            Some((_, Err(e))) => return Err(GliderError::io(Path::new(origin), e)),
            None => {
                return Err(GliderError::Parse {
                    file: origin.into(),
                    row: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let mut records = Vec::new();
        for (idx, line) in lines {
            let row = idx + 1;
            let line = line.map_err(|e| GliderError::io(Path::new(origin), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let f = split_row(&line, 4, origin, row)?;
            records.push(ActuatorRecord {
                t: parse_field(f[0], origin, row)?,
                gamma: parse_field(f[1], origin, row)?,
                delta_rs: parse_field(f[2], origin, row)?,
                m_b: parse_field(f[3], origin, row)?,
            });
        }
        Ok(ActuatorSeries { records })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| GliderError::io(path, e))?;
        Self::read_csv(file, &path.display().to_string())
    }

    /// Latest record at or before `t` (the log is zero-order held).
    pub fn at(&self, t: f64) -> Option<&ActuatorRecord> {
        match self.records.binary_search_by(|r| r.t.partial_cmp(&t).unwrap()) {
            Ok(i) => Some(&self.records[i]),
            Err(0) => None,
            Err(i) => Some(&self.records[i - 1]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> MocapSeries {
        MocapSeries {
            samples: (0..200)
                .map(|k| {
                    let t = k as f64 * 0.01;
                    MocapSample {
                        t,
                        x: 0.5 * (0.3 * t).sin(),
                        y: -0.2 * t,
                        z: 1.0 + 0.1 * (0.5 * t).cos(),
                        phi: 0.3 * (0.7 * t).sin(),
                        theta: 0.4 * (0.2 * t).sin(),
                        psi: 1e-7 * t - 3.0,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn mocap_round_trip_preserves_values_to_1e9_relative() {
        let orig = series();
        let mut buf = Vec::new();
        orig.write_csv(&mut buf).unwrap();
        let back = MocapSeries::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.samples.len(), orig.samples.len());
        for (a, b) in orig.samples.iter().zip(&back.samples) {
            for (x, y) in [
                (a.t, b.t),
                (a.x, b.x),
                (a.y, b.y),
                (a.z, b.z),
                (a.phi, b.phi),
                (a.theta, b.theta),
                (a.psi, b.psi),
            ] {
                let scale = x.abs().max(1e-30);
                assert!(
                    ((x - y) / scale).abs() < 1e-9,
                    "round trip moved {x} to {y}"
                );
            }
        }
    }

    #[test]
    fn actuator_round_trip_and_hold_lookup() {
        let s = ActuatorSeries {
            records: (0..30)
                .map(|k| ActuatorRecord {
                    t: k as f64 * 0.1,
                    gamma: 0.01 * k as f64,
                    delta_rs: -0.001 * k as f64,
                    m_b: 0.1,
                })
                .collect(),
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = ActuatorSeries::read_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back.records.len(), 30);

        let rec = s.at(0.153).unwrap();
        assert_eq!(rec.t, 0.1);
        assert!(s.at(-0.01).is_none());
        assert_eq!(s.at(99.0).unwrap().t, 29.0 * 0.1);
        assert_eq!(s.at(0.2).unwrap().t, 0.2);
    }

    #[test]
    fn header_and_field_errors_carry_row_numbers() {
        let bad_header = "time,x,y,z,phi,theta,psi\n0,0,0,0,0,0,0\n";
        match MocapSeries::read_csv(bad_header.as_bytes(), "f.csv").unwrap_err() {
            GliderError::Parse { row, .. } => assert_eq!(row, 1),
            other => panic!("unexpected error {other:?}"),
        }

        let bad_field = format!("{MOCAP_HEADER}\n0,0,0,0,0,0,0\n1,oops,0,0,0,0,0\n");
        match MocapSeries::read_csv(bad_field.as_bytes(), "f.csv").unwrap_err() {
            GliderError::Parse { row, msg, .. } => {
                assert_eq!(row, 3);
                assert!(msg.contains("oops"));
            }
            other => panic!("unexpected error {other:?}"),
        }

        let short_row = format!("{ACTUATOR_HEADER}\n0,0,0\n");
        match ActuatorSeries::read_csv(short_row.as_bytes(), "f.csv").unwrap_err() {
            GliderError::Parse { row, msg, .. } => {
                assert_eq!(row, 2);
                assert!(msg.contains("expected 4"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn file_round_trip_via_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poses.csv");
        let orig = series();
        orig.save_csv(&path).unwrap();
        let back = MocapSeries::load_csv(&path).unwrap();
        assert_eq!(back.samples.len(), orig.samples.len());
    }
}
