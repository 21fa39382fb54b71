use crate::scenario::SensorTriple;
use crate::testgen::Channel;
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;
use thiserror::Error;

/// Simulated time in whole microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    /// Rounds to the nearest microsecond; negative inputs clamp to zero.
    pub fn from_secs(s: f64) -> Self {
        SimTime((s.max(0.0) * 1e6).round() as u64)
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

impl Add for SimTime {
    type Output = SimTime;

    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;

    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

/// Sensor channels feeding the release decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensorChannel {
    Gaze,
    Pressure,
    Location,
}

impl SensorChannel {
    pub const ALL: [SensorChannel; 3] = [SensorChannel::Gaze, SensorChannel::Pressure, SensorChannel::Location];

    pub fn name(self) -> &'static str {
        match self {
            SensorChannel::Gaze => "gaze",
            SensorChannel::Pressure => "pressure",
            SensorChannel::Location => "location",
        }
    }

    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn from_stimulus(c: Channel) -> Option<Self> {
        match c {
            Channel::Gaze => Some(SensorChannel::Gaze),
            Channel::Pressure => Some(SensorChannel::Pressure),
            Channel::Location => Some(SensorChannel::Location),
            Channel::Voice | Channel::Wait => None,
        }
    }
}

impl FromStr for SensorChannel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SensorChannel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown sensor `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimEvent {
    /// Controller entered a state.
    State(String),
    Voice(String),
    /// Robot-to-human signal (`hold_offer`, `cycle_done`).
    Signal(String),
    Reading { sensor: SensorChannel, ready: bool, value: f64 },
    Decision(SensorTriple),
    SensingTimeout,
    HandOpen,
    HandClose,
    LegRelease,
    LegDiscard,
    /// rad/s
    JointSpeed(f64),
    /// Distance between the robot hand and the human hand, m.
    HandDistance(f64),
    /// The simulated-time cap was reached.
    Cap,
}

impl SimEvent {
    pub fn channel(&self) -> &'static str {
        match self {
            SimEvent::State(_) => "state",
            SimEvent::Voice(_) => "voice",
            SimEvent::Signal(_) => "signal",
            SimEvent::Reading { .. } => "reading",
            SimEvent::Decision(_) => "decision",
            SimEvent::SensingTimeout => "sensing_timeout",
            SimEvent::HandOpen => "hand_open",
            SimEvent::HandClose => "hand_close",
            SimEvent::LegRelease => "leg_release",
            SimEvent::LegDiscard => "leg_discard",
            SimEvent::JointSpeed(_) => "joint_speed",
            SimEvent::HandDistance(_) => "hand_distance",
            SimEvent::Cap => "cap",
        }
    }

    pub fn payload(&self) -> String {
        match self {
            SimEvent::State(s) | SimEvent::Voice(s) | SimEvent::Signal(s) => s.clone(),
            SimEvent::Reading { sensor, ready, value } => format!("{} {} {}", sensor.name(), *ready as u8, value),
            SimEvent::Decision(t) => t.to_string(),
            SimEvent::JointSpeed(v) | SimEvent::HandDistance(v) => v.to_string(),
            _ => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub time: SimTime,
    pub event: SimEvent,
}

/// Time-ordered event log of one simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub records: Vec<LogRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("log line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

impl SimLog {
    pub fn push(&mut self, time: SimTime, event: SimEvent) {
        debug_assert!(self.records.last().is_none_or(|r| r.time <= time));
        self.records.push(LogRecord { time, event });
    }

    pub fn capped(&self) -> bool {
        self.records.iter().any(|r| r.event == SimEvent::Cap)
    }

    pub fn count(&self, pred: impl Fn(&SimEvent) -> bool) -> usize {
        self.records.iter().filter(|r| pred(&r.event)).count()
    }

    /// `time\tchannel\tpayload`, time in seconds with six decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&format!("{}\t{}\t{}\n", r.time, r.event.channel(), r.event.payload()));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, LogParseError> {
        let mut log = SimLog::default();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = |m: String| LogParseError { line: n + 1, message: m };
            let mut cols = line.splitn(3, '\t');
            let (Some(t), Some(ch), payload) = (cols.next(), cols.next(), cols.next().unwrap_or("")) else {
                return Err(err("expected `time\\tchannel\\tpayload`".into()));
            };
            let time = parse_time(t).ok_or_else(|| err(format!("bad time `{t}`")))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
            let event = match ch {
                "state" => SimEvent::State(payload.into()),
                "voice" => SimEvent::Voice(payload.into()),
                "signal" => SimEvent::Signal(payload.into()),
                "reading" => {
                    let f: Vec<&str> = payload.split(' ').collect();
                    let [sensor, ready, value] = f[..] else {
                        return Err(err(format!("bad reading `{payload}`")));
                    };
                    SimEvent::Reading { sensor: sensor.parse().map_err(err)?, ready: ready == "1", value: num(value)? }
                }
                "decision" => {
                    let bits: Vec<&str> = payload.trim_matches(|c| c == '(' || c == ')').split(',').collect();
                    let [g, p, l] = bits[..] else {
                        return Err(err(format!("bad decision `{payload}`")));
                    };
                    SimEvent::Decision(SensorTriple::new(g == "1", p == "1", l == "1"))
                }
                "sensing_timeout" => SimEvent::SensingTimeout,
                "hand_open" => SimEvent::HandOpen,
                "hand_close" => SimEvent::HandClose,
                "leg_release" => SimEvent::LegRelease,
                "leg_discard" => SimEvent::LegDiscard,
                "joint_speed" => SimEvent::JointSpeed(num(payload)?),
                "hand_distance" => SimEvent::HandDistance(num(payload)?),
                "cap" => SimEvent::Cap,
                other => return Err(err(format!("unknown channel `{other}`"))),
            };
            log.records.push(LogRecord { time, event });
        }
        Ok(log)
    }
}

fn parse_time(s: &str) -> Option<SimTime> {
    let (whole, frac) = s.split_once('.')?;
    if frac.len() != 6 {
        return None;
    }
    Some(SimTime(whole.parse::<u64>().ok()? * 1_000_000 + frac.parse::<u64>().ok()?))
}
