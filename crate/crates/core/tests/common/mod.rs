//! Synthetic logs and brute-force monitor oracles shared by the test targets.
//! Each oracle judges every trigger on its own by searching the whole log,
//! independent of the single-pass monitors.

#![allow(dead_code)]

use bdi_testgen::monitors::{Requirement, Verdict};
use bdi_testgen::scenario::SensorTriple;
use bdi_testgen::sim::{SimEvent, SimLog, SimTime};
use rand::Rng;

/// Random log over the events the monitors look at, with time steps that
/// land on and around the 10 s release threshold.
pub fn synthetic_log<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> SimLog {
    let steps = [0.0, 0.5, 1.0, 5.0, 9.999999, 10.0, 10.000001, 12.0];
    let mut log = SimLog::default();
    let mut t = SimTime::ZERO;
    for _ in 0..rng.gen_range(0..=max_len) {
        t = t + SimTime::from_secs(steps[rng.gen_range(0..steps.len())]);
        let e = match rng.gen_range(0..9) {
            0 => SimEvent::Decision(SensorTriple::READY),
            1 => SimEvent::Decision(SensorTriple::from_code(rng.gen_range(0..7))),
            2 => SimEvent::LegRelease,
            3 => SimEvent::LegDiscard,
            4 => SimEvent::State(["reset", "waiting", "sensing"][rng.gen_range(0..3)].to_string()),
            5 => SimEvent::HandClose,
            6 => SimEvent::HandDistance([0.05, 0.0999, 0.1, 0.3][rng.gen_range(0..4)]),
            7 => SimEvent::JointSpeed([0.1, 0.2499, 0.25, 0.3][rng.gen_range(0..4)]),
            _ => SimEvent::HandOpen,
        };
        log.push(t, e);
    }
    log
}

fn verdict(triggers: usize, violated: usize) -> Verdict {
    match (triggers, violated) {
        (0, _) => Verdict::NotChecked,
        (_, 0) => Verdict::Passed,
        _ => Verdict::Failed,
    }
}

/// (verdict, triggers) by exhaustive per-trigger search.
pub fn oracle(req: Requirement, log: &SimLog, threshold_s: f64, safe: f64, speed_limit: f64) -> (Verdict, usize) {
    let ev: Vec<(f64, &SimEvent)> = log.records.iter().map(|r| (r.time.secs(), &r.event)).collect();
    let (mut triggers, mut violated) = (0, 0);
    for (i, &(t, e)) in ev.iter().enumerate() {
        match req {
            Requirement::R1 => {
                if let SimEvent::Decision(d) = e {
                    if d.gaze && d.pressure && d.location {
                        triggers += 1;
                        let release = ev[i + 1..].iter().find(|(_, e)| matches!(e, SimEvent::LegRelease));
                        // integer microseconds, as logged
                        let late = release.is_none_or(|&(tr, _)| ((tr - t) * 1e6).round() > (threshold_s * 1e6).round());
                        violated += late as usize;
                    }
                }
            }
            Requirement::R2 => {
                if let SimEvent::Decision(d) = e {
                    if !(d.gaze && d.pressure && d.location) {
                        triggers += 1;
                        let next = ev[i + 1..].iter().find(|(_, e)| match e {
                            SimEvent::LegRelease | SimEvent::LegDiscard => true,
                            SimEvent::State(s) => s == "reset",
                            _ => false,
                        });
                        violated += matches!(next, Some((_, SimEvent::LegRelease))) as usize;
                    }
                }
            }
            Requirement::R3 => {
                if let SimEvent::HandClose = e {
                    let prior = ev[..i].iter().rev().find_map(|(_, e)| match e {
                        SimEvent::HandDistance(d) => Some(*d),
                        _ => None,
                    });
                    if let Some(d) = prior {
                        triggers += 1;
                        violated += (d < safe) as usize;
                    }
                }
            }
            Requirement::R4 => {
                if let SimEvent::JointSpeed(v) = e {
                    triggers += 1;
                    violated += (*v >= speed_limit) as usize;
                }
            }
        }
    }
    (verdict(triggers, violated), triggers)
}
