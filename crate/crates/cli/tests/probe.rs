//! Scratch diagnostics, not part of the suite. Delete freely.

use glider_core::config::default_params;
use glider_core::control::SetpointEntry;
use glider_core::scenarios::{run_simulate, ControllerSection, SimulateScenario};

#[test]
#[ignore]
fn lyapunov_pairs() {
    let (params, ranges) = default_params();
    let thirty = 30f64.to_radians();
    for rate in [10.0, 20.0, 50.0] {
        let sc = SimulateScenario {
            duration: 160.0,
            control_rate_hz: rate,
            setpoints: vec![
                SetpointEntry { t: 0.0, theta: thirty, z: 3.0, phi: 0.0 },
                SetpointEntry { t: 40.0, theta: -thirty, z: 1.0, phi: 0.0 },
                SetpointEntry { t: 80.0, theta: thirty, z: 3.0, phi: 0.0 },
                SetpointEntry { t: 120.0, theta: -thirty, z: 1.0, phi: 0.0 },
            ],
            controller: ControllerSection::with_strategy("nlc"),
            ..SimulateScenario::default()
        };
        let (output, _) = run_simulate(&sc, &params, &ranges, 0).unwrap();
        let (ep, ed) = (sc.controller.pitch.epsilon, sc.controller.depth.epsilon);
        let v_eps = 0.5 * (ep * ep + ed * ed);

        // Rule A: combined V above the corner value.
        let mut a_out = 0;
        let mut a_ok = 0;
        // Rule B: both surfaces outside their layers.
        let mut b_out = 0;
        let mut b_ok = 0;
        let mut increases: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
        for pair in output.audits.windows(2) {
            let (t, a0) = (&pair[0].0, &pair[0].1);
            let a1 = &pair[1].1;
            let (v0, v1) = (a0.lyapunov, a1.lyapunov);
            if v0 > v_eps {
                a_out += 1;
                if v1 <= v0 + 1e-12 {
                    a_ok += 1;
                } else {
                    increases.push((*t, v0, v1, a0.s_pitch, a0.s_depth));
                }
            }
            if a0.s_pitch.abs() > ep && a0.s_depth.abs() > ed {
                b_out += 1;
                if v1 <= v0 + 1e-12 {
                    b_ok += 1;
                }
            }
        }
        println!(
            "rate {rate:>4} Hz: rule A {a_ok}/{a_out} ({:.2}%), rule B {b_ok}/{b_out} ({:.2}%)",
            100.0 * a_ok as f64 / a_out.max(1) as f64,
            100.0 * b_ok as f64 / b_out.max(1) as f64,
        );
        if rate == 10.0 {
            for (t, v0, v1, sp, sd) in increases.iter().take(40) {
                println!(
                    "  t {t:7.2}  v {v0:.4} -> {v1:.4}  (+{:.2e})  s_p {sp:+.3}  s_d {sd:+.3}",
                    v1 - v0
                );
            }
            println!("  ({} increases total)", increases.len());
        }
    }
}
