//! Post-hoc assertion monitors over simulation logs, and suite-level
//! coverage reports.
//!
//! | id | premise                      | obligation                                        |
//! |----|------------------------------|---------------------------------------------------|
//! | R1 | decision (1,1,1)             | a leg release follows within the threshold        |
//! | R2 | decision other than (1,1,1)  | no release before the next discard or reset       |
//! | R3 | hand close                   | last hand-distance sample is at least safe-distance |
//! | R4 | joint-speed sample           | speed below 0.25 rad/s                            |

mod report;

pub use report::{aggregate, plateaus, ReportRow, SuiteReport, Tally, TestResult};

use crate::sim::{SimEvent, SimLog, SimTime};
use std::fmt;

pub const SPEED_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Requirement {
    R1,
    R2,
    R3,
    R4,
}

impl Requirement {
    pub const ALL: [Requirement; 4] = [Requirement::R1, Requirement::R2, Requirement::R3, Requirement::R4];
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Passed,
    Failed,
    NotChecked,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Passed => "passed",
            Verdict::Failed => "failed",
            Verdict::NotChecked => "nc",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssertionOutcome {
    pub requirement: Requirement,
    pub verdict: Verdict,
    pub triggers: usize,
    pub first_violation: Option<SimTime>,
    pub diagnostic: Option<String>,
}

impl AssertionOutcome {
    /// NotChecked exactly when `triggers == 0`.
    fn from_scan(requirement: Requirement, triggers: usize, first_violation: Option<SimTime>) -> Self {
        let verdict = match (triggers, first_violation) {
            (0, _) => Verdict::NotChecked,
            (_, Some(_)) => Verdict::Failed,
            (_, None) => Verdict::Passed,
        };
        Self { requirement, verdict, triggers, first_violation, diagnostic: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// R1 release deadline.
    pub release_threshold: SimTime,
    /// R3 minimum hand distance, m.
    pub safe_distance: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { release_threshold: SimTime::from_secs(10.0), safe_distance: 0.1 }
    }
}

/// R1. Open triggers wait for a release; one arriving after a deadline, or
/// the end of the log, is a violation at the trigger time.
pub fn monitor_r1(log: &SimLog, threshold: SimTime) -> AssertionOutcome {
    let mut triggers = 0;
    let mut open: Vec<SimTime> = Vec::new();
    let mut first: Option<SimTime> = None;
    let violate = |t: SimTime, first: &mut Option<SimTime>| {
        if first.is_none_or(|f| t < f) {
            *first = Some(t);
        }
    };
    for r in &log.records {
        match &r.event {
            SimEvent::Decision(t) if t.is_ready() => {
                triggers += 1;
                open.push(r.time);
            }
            SimEvent::LegRelease => {
                for t0 in open.drain(..) {
                    if r.time - t0 > threshold {
                        violate(t0, &mut first);
                    }
                }
            }
            _ => {}
        }
    }
    for t0 in open {
        violate(t0, &mut first);
    }
    AssertionOutcome::from_scan(Requirement::R1, triggers, first)
}

/// R2. Armed by a non-ready decision, disarmed by a discard or reset; a
/// release while armed is a violation.
pub fn monitor_r2(log: &SimLog) -> AssertionOutcome {
    let mut triggers = 0;
    let mut armed = false;
    let mut first = None;
    for r in &log.records {
        match &r.event {
            SimEvent::Decision(t) if !t.is_ready() => {
                triggers += 1;
                armed = true;
            }
            SimEvent::LegDiscard => armed = false,
            SimEvent::State(s) if s == "reset" => armed = false,
            SimEvent::LegRelease if armed => {
                armed = false;
                first = first.or(Some(r.time));
            }
            _ => {}
        }
    }
    AssertionOutcome::from_scan(Requirement::R2, triggers, first)
}

/// R3. Each hand close is checked against the latest hand-distance sample
/// logged before it. Closes without a sample are not checked and are named
/// in the diagnostic.
pub fn monitor_r3(log: &SimLog, safe_distance: f64) -> AssertionOutcome {
    let mut last: Option<f64> = None;
    let (mut checked, mut unchecked, mut closes) = (0, 0, 0);
    let mut first = None;
    for r in &log.records {
        match r.event {
            SimEvent::HandDistance(d) => last = Some(d),
            SimEvent::HandClose => {
                closes += 1;
                match last {
                    Some(d) => {
                        checked += 1;
                        if d < safe_distance {
                            first = first.or(Some(r.time));
                        }
                    }
                    None => unchecked += 1,
                }
            }
            _ => {}
        }
    }
    let mut out = AssertionOutcome::from_scan(Requirement::R3, checked, first);
    out.diagnostic = match (closes, unchecked) {
        (0, _) => Some("no hand-close events".into()),
        (_, 0) => None,
        (_, n) => Some(format!("{n} of {closes} hand closes had no prior distance sample")),
    };
    out
}

/// R4 with the 0.25 rad/s limit.
pub fn monitor_r4(log: &SimLog) -> AssertionOutcome {
    monitor_r4_with_limit(log, SPEED_LIMIT)
}

pub fn monitor_r4_with_limit(log: &SimLog, limit: f64) -> AssertionOutcome {
    let mut triggers = 0;
    let mut first = None;
    for r in &log.records {
        if let SimEvent::JointSpeed(v) = r.event {
            triggers += 1;
            if !(v < limit) {
                first = first.or(Some(r.time));
            }
        }
    }
    AssertionOutcome::from_scan(Requirement::R4, triggers, first)
}

pub fn check_all(log: &SimLog, config: &MonitorConfig) -> [AssertionOutcome; 4] {
    [
        monitor_r1(log, config.release_threshold),
        monitor_r2(log),
        monitor_r3(log, config.safe_distance),
        monitor_r4(log),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::SensorTriple;

    fn log(events: &[(f64, SimEvent)]) -> SimLog {
        let mut l = SimLog::default();
        for (t, e) in events {
            l.push(SimTime::from_secs(*t), e.clone());
        }
        l
    }

    const READY: SimEvent = SimEvent::Decision(SensorTriple::READY);

    fn unready() -> SimEvent {
        SimEvent::Decision(SensorTriple::new(true, false, true))
    }

    #[test]
    fn r1_cases() {
        let thr = SimTime::from_secs(10.0);
        let ok = monitor_r1(&log(&[(1.0, READY), (3.0, SimEvent::LegRelease)]), thr);
        assert_eq!((ok.verdict, ok.triggers), (Verdict::Passed, 1));
        let slow = monitor_r1(&log(&[(1.0, READY), (16.0, SimEvent::LegRelease)]), thr);
        assert_eq!((slow.verdict, slow.first_violation), (Verdict::Failed, Some(SimTime::from_secs(1.0))));
        let never = monitor_r1(&log(&[(1.0, unready()), (2.0, SimEvent::LegDiscard)]), thr);
        assert_eq!(never.verdict, Verdict::NotChecked);
        let edge = monitor_r1(&log(&[(1.0, READY), (11.0, SimEvent::LegRelease)]), thr);
        assert_eq!(edge.verdict, Verdict::Passed);
        let missing = monitor_r1(&log(&[(1.0, READY)]), thr);
        assert_eq!(missing.verdict, Verdict::Failed);
    }

    #[test]
    fn r2_cases() {
        let ok = monitor_r2(&log(&[(1.0, unready()), (4.0, SimEvent::LegDiscard), (9.0, SimEvent::LegRelease)]));
        assert_eq!(ok.verdict, Verdict::Passed);
        let bad = monitor_r2(&log(&[(1.0, unready()), (4.0, SimEvent::LegRelease)]));
        assert_eq!((bad.verdict, bad.first_violation), (Verdict::Failed, Some(SimTime::from_secs(4.0))));
        let nc = monitor_r2(&log(&[(1.0, READY), (4.0, SimEvent::LegRelease)]));
        assert_eq!(nc.verdict, Verdict::NotChecked);
    }

    #[test]
    fn r3_cases() {
        let close = |d: f64| log(&[(1.0, SimEvent::HandDistance(d)), (1.0, SimEvent::HandClose)]);
        assert_eq!(monitor_r3(&close(0.3), 0.1).verdict, Verdict::Passed);
        assert_eq!(monitor_r3(&close(0.05), 0.1).verdict, Verdict::Failed);
        let none = monitor_r3(&log(&[(1.0, SimEvent::HandDistance(0.3))]), 0.1);
        assert_eq!(none.verdict, Verdict::NotChecked);
        assert_eq!(none.diagnostic.as_deref(), Some("no hand-close events"));
        let unsampled = monitor_r3(&log(&[(1.0, SimEvent::HandClose)]), 0.1);
        assert_eq!((unsampled.verdict, unsampled.triggers), (Verdict::NotChecked, 0));
        assert!(unsampled.diagnostic.unwrap().contains("no prior distance sample"));
    }

    #[test]
    fn r4_cases() {
        let speeds = |v: &[f64]| log(&v.iter().map(|&s| (1.0, SimEvent::JointSpeed(s))).collect::<Vec<_>>());
        assert_eq!(monitor_r4(&speeds(&[0.2, 0.2])).verdict, Verdict::Passed);
        assert_eq!(monitor_r4(&speeds(&[0.2, 0.3])).verdict, Verdict::Failed);
        assert_eq!(monitor_r4(&speeds(&[0.25])).verdict, Verdict::Failed);
        assert_eq!(monitor_r4(&SimLog::default()).verdict, Verdict::NotChecked);
    }
}
