//! Discrete-event testbench: the handover controller under test, sensor
//! models with fault injection, and a closed-loop human enactor driven by
//! concrete tests.

mod controller;
mod coverage;
mod enactor;
mod faults;
mod log;

pub use controller::{CloseContext, Controller, ControllerState, Effect, Input, TimerKind, Timing};
pub use coverage::{point, CodeCoverageMap, COVERAGE_POINTS};
pub use enactor::{enact, Enactor, ScheduledStimulus, Wake};
pub use faults::{flip_reading, sensor_read, FaultConfig, FaultConfigError, DEFAULT_FAULTS};
pub use log::{LogParseError, LogRecord, SensorChannel, SimEvent, SimLog, SimTime};

use crate::testgen::{AbstractAction, Channel, ConcreteTest, TimedStimulus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Sensor thresholds and testbench geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub timing: Timing,
    pub cap: SimTime,
    /// Gaze is ready below this head angle, degrees.
    pub gaze_angle_max: f64,
    /// Pressure is ready at or above this force, N.
    pub pressure_min: f64,
    /// Location is ready at or below this hand distance, m.
    pub location_max: f64,
    /// Human hand distance before the first location stimulus, m.
    pub initial_hand_distance: f64,
    /// Extra robot-to-human distance while grasping at the resupply, m.
    pub grab_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            timing: Timing::default(),
            cap: SimTime::from_secs(300.0),
            gaze_angle_max: 40.0,
            pressure_min: 3.0,
            location_max: 0.08,
            initial_hand_distance: 0.5,
            grab_offset: 0.8,
        }
    }
}

impl SimConfig {
    /// Ideal reading of a set_param stimulus on its channel.
    pub fn classify(&self, st: &TimedStimulus) -> Option<(SensorChannel, bool, f64)> {
        let sensor = SensorChannel::from_stimulus(st.channel)?;
        let (value, ready) = match sensor {
            SensorChannel::Gaze => {
                let a = st.param("angle").unwrap_or(f64::INFINITY);
                (a, a < self.gaze_angle_max)
            }
            SensorChannel::Pressure => {
                let f = st.param("force").unwrap_or(0.0);
                (f, f >= self.pressure_min)
            }
            SensorChannel::Location => {
                let d = st.param("hand_distance").unwrap_or(f64::INFINITY);
                (d, d <= self.location_max)
            }
        };
        Some((sensor, ready, value))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub log: SimLog,
    pub coverage: CodeCoverageMap,
    pub final_state: ControllerState,
    pub accepted: u8,
    pub delivered: u8,
    pub discarded: u8,
    pub schedule: Vec<ScheduledStimulus>,
}

impl SimResult {
    pub fn capped(&self) -> bool {
        self.log.capped()
    }
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Controller(TimerKind, u64),
    Stimulus(usize),
    SpeedSample,
}

struct Queue {
    events: BTreeMap<(SimTime, u64), Pending>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, at: SimTime, p: Pending) {
        self.events.insert((at, self.seq), p);
        self.seq += 1;
    }
}

struct Bench<'a> {
    test: &'a ConcreteTest,
    config: &'a SimConfig,
    faults: &'a FaultConfig,
    rng: ChaCha8Rng,
    controller: Controller,
    enactor: Enactor<'a>,
    queue: Queue,
    log: SimLog,
    hand_distance: f64,
    now: SimTime,
}

impl<'a> Bench<'a> {
    fn drive(&mut self, input: Input) {
        let effects = self.controller.step(input, &mut self.rng);
        for e in effects {
            match e {
                Effect::Log(ev) => self.log.push(self.now, ev),
                Effect::Signal(s) => {
                    self.log.push(self.now, SimEvent::Signal(s.into()));
                    if self.enactor.on_signal(self.now).is_some() {
                        self.advance_human();
                    }
                }
                Effect::Timer { after, kind, epoch } => self.queue.push(self.now + after, Pending::Controller(kind, epoch)),
                Effect::Motion(d) => {
                    let step = SimTime::from_secs(1.0);
                    let mut t = SimTime::ZERO;
                    while t < d {
                        self.queue.push(self.now + t, Pending::SpeedSample);
                        t = t + step;
                    }
                }
                Effect::CloseHand(ctx) => {
                    let distance = match ctx {
                        CloseContext::Grab => self.hand_distance + self.config.grab_offset,
                        CloseContext::Release => {
                            if !self.rng.gen_bool(self.faults.hand_hazard) {
                                self.hand_distance = self.faults.retract_distance.sample(&mut self.rng);
                            }
                            self.hand_distance
                        }
                    };
                    self.log.push(self.now, SimEvent::HandDistance(distance));
                    self.log.push(self.now, SimEvent::HandClose);
                }
            }
        }
    }

    /// Starts human stimuli until one needs simulated time to pass.
    fn advance_human(&mut self) {
        loop {
            match self.enactor.advance(self.now) {
                Wake::Done | Wake::Busy => return,
                Wake::Now { index } => self.complete(index),
                Wake::At { index, at } => {
                    self.queue.push(at, Pending::Stimulus(index));
                    return;
                }
            }
        }
    }

    /// Effects of a finished stimulus.
    fn complete(&mut self, index: usize) {
        let st = &self.test.stimuli[index];
        match (st.channel, &st.action) {
            (Channel::Voice, AbstractAction::Tell(w)) => {
                self.log.push(self.now, SimEvent::Voice(w.clone()));
                self.drive(Input::Voice(w.clone()));
            }
            (Channel::Wait, _) | (Channel::Voice, _) => {}
            _ => {
                if let Some((sensor, truth, value)) = self.config.classify(st) {
                    if sensor == SensorChannel::Location {
                        self.hand_distance = value;
                        self.log.push(self.now, SimEvent::HandDistance(value));
                    }
                    let ready = flip_reading(truth, sensor, self.faults, &mut self.rng);
                    self.log.push(self.now, SimEvent::Reading { sensor, ready, value });
                    self.drive(Input::Reading { sensor, ready });
                }
            }
        }
    }
}

/// Runs `test` against the controller until it finishes, times out, or the
/// simulated-time cap is hit. The human starts once the controller leaves
/// Reset. Deterministic in `(test, faults, seed, config)`.
pub fn run_simulation(test: &ConcreteTest, faults: &FaultConfig, seed: u64) -> SimResult {
    run_simulation_with(test, faults, seed, &SimConfig::default())
}

pub fn run_simulation_with(test: &ConcreteTest, faults: &FaultConfig, seed: u64, config: &SimConfig) -> SimResult {
    let mut b = Bench {
        test,
        config,
        faults,
        rng: ChaCha8Rng::seed_from_u64(seed),
        controller: Controller::new(config.timing, faults.release_latency),
        enactor: Enactor::new(test),
        queue: Queue { events: BTreeMap::new(), seq: 0 },
        log: SimLog::default(),
        hand_distance: config.initial_hand_distance,
        now: SimTime::ZERO,
    };
    b.drive(Input::Start);
    let mut human_started = false;
    while let Some((&(t, _), _)) = b.queue.events.first_key_value() {
        if t > config.cap {
            b.now = config.cap;
            b.log.push(config.cap, SimEvent::Cap);
            break;
        }
        let (_, p) = b.queue.events.pop_first().expect("non-empty");
        b.now = t;
        match p {
            Pending::Controller(kind, epoch) => b.drive(Input::Timer { kind, epoch }),
            Pending::Stimulus(i) => {
                if b.enactor.on_wake(i, t) {
                    b.complete(i);
                    b.advance_human();
                }
            }
            Pending::SpeedSample => {
                let v = faults.joint_speed.sample(&mut b.rng);
                b.log.push(t, SimEvent::JointSpeed(v));
            }
        }
        if !human_started && b.controller.state() != ControllerState::Reset {
            human_started = true;
            b.advance_human();
        }
        if b.controller.state().is_terminal() {
            break;
        }
    }
    SimResult {
        final_state: b.controller.state(),
        accepted: b.controller.accepted,
        delivered: b.controller.delivered,
        discarded: b.controller.discarded,
        coverage: b.controller.coverage,
        schedule: b.enactor.schedule,
        log: b.log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::parse_subset_line;
    use crate::scenario::run_beliefs;
    use crate::testgen::{concretize, trace_to_abstract, ParamRangeTable};

    fn concrete(line: &str, seed: u64) -> ConcreteTest {
        let s = parse_subset_line(line).unwrap();
        let (t, _) = trace_to_abstract(&run_beliefs(s.beliefs()).trace);
        concretize(&t, &ParamRangeTable::defaults(), seed).unwrap()
    }

    fn count(r: &SimResult, e: &SimEvent) -> usize {
        r.log.count(|x| x == e)
    }

    #[test]
    fn happy_path_releases_and_finishes() {
        let r = run_simulation(&concrete("legs_requested(1), not_bored, gpl(1,1,1,1)", 1), &FaultConfig::nominal(), 1);
        assert_eq!(count(&r, &SimEvent::LegRelease), 1);
        assert_eq!(r.final_state, ControllerState::Finished);
        assert_eq!(r.delivered, 1);
        assert!(!r.capped());
    }

    #[test]
    fn unready_triple_discards() {
        let r = run_simulation(&concrete("legs_requested(1), not_bored, gpl(1,1,0,1)", 1), &FaultConfig::default(), 1);
        assert_eq!(count(&r, &SimEvent::LegRelease), 0);
        assert_eq!(count(&r, &SimEvent::LegDiscard), 1);
        assert_eq!(r.final_state, ControllerState::TimedOut);
    }

    #[test]
    fn empty_test_times_out() {
        let r = run_simulation(&ConcreteTest { seed: 0, stimuli: vec![] }, &FaultConfig::default(), 0);
        assert_eq!(r.final_state, ControllerState::TimedOut);
        assert_eq!(r.log.records.last().unwrap().time, SimTime::from_secs(80.0));
        assert_eq!(r.coverage.hits("wait.timeout_none"), 1);
    }

    #[test]
    fn four_ready_legs_finish_on_delivery() {
        let line = "legs_requested(4), not_bored, gpl(1,1,1,1), gpl(2,1,1,1), gpl(3,1,1,1), gpl(4,1,1,1)";
        let r = run_simulation(&concrete(line, 2), &FaultConfig::default(), 2);
        assert_eq!((r.delivered, r.final_state), (4, ControllerState::Finished));
        assert_eq!(r.coverage.hits("release.all_delivered"), 1);
        assert!(!r.capped());
    }

    #[test]
    fn bored_human_walks_away() {
        let r = run_simulation(&concrete("legs_requested(1), bored, gpl(1,1,1,1)", 3), &FaultConfig::default(), 3);
        assert_eq!(r.coverage.hits("offer.timeout"), 1);
        assert_eq!((r.discarded, r.delivered), (1, 0));
        assert!(r.log.records.iter().any(|x| matches!(x.event, SimEvent::HandDistance(d) if d >= 1.0)));
    }

    #[test]
    fn deterministic() {
        let t = concrete("legs_requested(2), not_bored, gpl(1,1,1,1), gpl(2,0,1,1)", 5);
        let f = FaultConfig::default();
        assert_eq!(run_simulation(&t, &f, 9), run_simulation(&t, &f, 9));
    }

    #[test]
    fn log_text_round_trip() {
        let r = run_simulation(&concrete("legs_requested(2), bored, gpl(1,1,1,1), gpl(2,1,1,1)", 6), &FaultConfig::default(), 6);
        assert_eq!(SimLog::parse(&r.log.to_text()).unwrap(), r.log);
    }

    #[test]
    fn time_cap_flags_log() {
        let line = "legs_requested(4), not_bored, gpl(1,1,1,1), gpl(2,1,1,1), gpl(3,1,1,1), gpl(4,1,1,1)";
        let config = SimConfig { cap: SimTime::from_secs(50.0), ..SimConfig::default() };
        let r = run_simulation_with(&concrete(line, 2), &FaultConfig::default(), 2, &config);
        assert!(r.capped());
        assert!(r.log.records.iter().all(|x| x.time <= config.cap));
    }
}
