//! The robot's handover controller: the code under test.
//!
//! | state             | input                      | next              |
//! |-------------------|----------------------------|-------------------|
//! | Reset             | reset timer                | WaitingForRequest |
//! | WaitingForRequest | voice `leg`                | GrabLeg           |
//! | WaitingForRequest | request timeout            | Finished if a leg was delivered, else TimedOut |
//! | GrabLeg           | motion done (hand closes)  | OfferLeg          |
//! | OfferLeg          | voice `humanReady` after the hold signal | Sensing |
//! | OfferLeg          | ready timeout              | Discard           |
//! | Sensing           | third reading, all ready   | Release           |
//! | Sensing           | third reading, otherwise   | Discard           |
//! | Sensing           | window timeout             | Discard           |
//! | Release           | return done, 4 delivered   | Finished          |
//! | Release           | return done                | WaitingForRequest |
//! | Discard           | motion done                | WaitingForRequest |
//!
//! Anything else is ignored and counted as unexpected input.

use super::coverage::CodeCoverageMap;
use super::log::{SensorChannel, SimEvent, SimTime};
use crate::scenario::{SensorTriple, MAX_LEGS};
use crate::testgen::Interval;
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerState {
    Reset,
    WaitingForRequest,
    GrabLeg,
    OfferLeg,
    Sensing,
    Release,
    Discard,
    Finished,
    TimedOut,
}

impl ControllerState {
    pub fn name(self) -> &'static str {
        match self {
            ControllerState::Reset => "reset",
            ControllerState::WaitingForRequest => "waiting_for_request",
            ControllerState::GrabLeg => "grab_leg",
            ControllerState::OfferLeg => "offer_leg",
            ControllerState::Sensing => "sensing",
            ControllerState::Release => "release",
            ControllerState::Discard => "discard",
            ControllerState::Finished => "finished",
            ControllerState::TimedOut => "timed_out",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ControllerState::Finished | ControllerState::TimedOut)
    }
}

impl fmt::Display for ControllerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub reset: SimTime,
    pub request_timeout: SimTime,
    pub motion: SimTime,
    pub ready_timeout: SimTime,
    pub sensing_window: SimTime,
    /// Hand-close delay after the leg leaves the gripper.
    pub close_after_release: SimTime,
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            reset: SimTime::from_secs(20.0),
            request_timeout: SimTime::from_secs(60.0),
            motion: SimTime::from_secs(3.0),
            ready_timeout: SimTime::from_secs(40.0),
            sensing_window: SimTime::from_secs(40.0),
            close_after_release: SimTime::from_secs(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerKind {
    ResetDone,
    RequestTimeout,
    MotionDone,
    ReadyTimeout,
    SensingTimeout,
    LegReleased,
    CloseAfterRelease,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    /// Power-on; enters Reset.
    Start,
    Voice(String),
    Reading { sensor: SensorChannel, ready: bool },
    Timer { kind: TimerKind, epoch: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloseContext {
    Grab,
    Release,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Log(SimEvent),
    Signal(&'static str),
    Timer { after: SimTime, kind: TimerKind, epoch: u64 },
    /// Arm motion of the given length; joint speeds are sampled meanwhile.
    Motion(SimTime),
    CloseHand(CloseContext),
}

#[derive(Debug, Clone)]
pub struct Controller {
    state: ControllerState,
    /// Bumped on every state entry; timers from older epochs are stale.
    epoch: u64,
    offered: bool,
    slots: [Option<bool>; 3],
    pub delivered: u8,
    pub discarded: u8,
    pub accepted: u8,
    timing: Timing,
    release_latency: Interval,
    pub coverage: CodeCoverageMap,
}

impl Controller {
    pub fn new(timing: Timing, release_latency: Interval) -> Self {
        Self {
            state: ControllerState::Reset,
            epoch: 0,
            offered: false,
            slots: [None; 3],
            delivered: 0,
            discarded: 0,
            accepted: 0,
            timing,
            release_latency,
            coverage: CodeCoverageMap::default(),
        }
    }

    pub fn state(&self) -> ControllerState {
        self.state
    }

    fn timer(&self, after: SimTime, kind: TimerKind) -> Effect {
        Effect::Timer { after, kind, epoch: self.epoch }
    }

    fn motion(&mut self, out: &mut Vec<Effect>) {
        self.coverage.hit("motion.speed_sample");
        out.push(Effect::Motion(self.timing.motion));
        out.push(self.timer(self.timing.motion, TimerKind::MotionDone));
    }

    fn enter<R: Rng + ?Sized>(&mut self, s: ControllerState, out: &mut Vec<Effect>, rng: &mut R) {
        self.state = s;
        self.epoch += 1;
        out.push(Effect::Log(SimEvent::State(s.name().into())));
        match s {
            ControllerState::Reset => {
                self.coverage.hit("reset.enter");
                out.push(self.timer(self.timing.reset, TimerKind::ResetDone));
            }
            ControllerState::WaitingForRequest => {
                self.coverage.hit("wait.enter");
                out.push(self.timer(self.timing.request_timeout, TimerKind::RequestTimeout));
            }
            ControllerState::GrabLeg => {
                self.coverage.hit("grab.enter");
                self.motion(out);
            }
            ControllerState::OfferLeg => {
                self.coverage.hit("offer.enter");
                self.offered = false;
                self.motion(out);
            }
            ControllerState::Sensing => {
                self.coverage.hit("sensing.enter");
                self.slots = [None; 3];
                out.push(self.timer(self.timing.sensing_window, TimerKind::SensingTimeout));
            }
            ControllerState::Release => {
                self.coverage.hit("release.enter");
                self.coverage.hit("release.hand_open");
                out.push(Effect::Log(SimEvent::HandOpen));
                let latency = SimTime::from_secs(self.release_latency.sample(rng));
                out.push(self.timer(latency, TimerKind::LegReleased));
            }
            ControllerState::Discard => {
                self.coverage.hit("discard.enter");
                self.motion(out);
            }
            ControllerState::Finished => self.coverage.hit("finished.enter"),
            ControllerState::TimedOut => self.coverage.hit("timedout.enter"),
        }
    }

    fn unexpected(&mut self) {
        self.coverage.hit("input.unexpected");
    }

    /// One transition. Stale timers produce no effects and no coverage.
    pub fn step<R: Rng + ?Sized>(&mut self, input: Input, rng: &mut R) -> Vec<Effect> {
        use ControllerState as S;
        let mut out = Vec::new();
        if let Input::Timer { epoch, .. } = input {
            if epoch != self.epoch {
                return out;
            }
        }
        match (self.state, input) {
            (_, Input::Start) => {
                *self = Self::new(self.timing, self.release_latency);
                self.enter(S::Reset, &mut out, rng);
            }
            (s, _) if s.is_terminal() => self.unexpected(),
            (S::Reset, Input::Timer { kind: TimerKind::ResetDone, .. }) => {
                self.coverage.hit("reset.done");
                self.enter(S::WaitingForRequest, &mut out, rng);
            }
            (S::WaitingForRequest, Input::Voice(w)) if w == "leg" => {
                self.coverage.hit("wait.voice_leg");
                self.accepted += 1;
                self.enter(S::GrabLeg, &mut out, rng);
            }
            (S::WaitingForRequest, Input::Timer { kind: TimerKind::RequestTimeout, .. }) => {
                self.coverage.hit("wait.timeout");
                if self.delivered > 0 {
                    self.coverage.hit("wait.timeout_delivered");
                    self.enter(S::Finished, &mut out, rng);
                } else {
                    self.coverage.hit("wait.timeout_none");
                    self.enter(S::TimedOut, &mut out, rng);
                }
            }
            (S::GrabLeg, Input::Timer { kind: TimerKind::MotionDone, .. }) => {
                self.coverage.hit("grab.motion_done");
                self.coverage.hit("grab.hand_close");
                out.push(Effect::CloseHand(CloseContext::Grab));
                self.enter(S::OfferLeg, &mut out, rng);
            }
            (S::OfferLeg, Input::Timer { kind: TimerKind::MotionDone, .. }) => {
                self.coverage.hit("offer.motion_done");
                self.coverage.hit("offer.signal_hold");
                self.offered = true;
                out.push(Effect::Signal("hold_offer"));
                out.push(self.timer(self.timing.ready_timeout, TimerKind::ReadyTimeout));
            }
            (S::OfferLeg, Input::Voice(w)) if w == "humanReady" && self.offered => {
                self.coverage.hit("offer.voice_ready");
                self.enter(S::Sensing, &mut out, rng);
            }
            (S::OfferLeg, Input::Timer { kind: TimerKind::ReadyTimeout, .. }) => {
                self.coverage.hit("offer.timeout");
                self.enter(S::Discard, &mut out, rng);
            }
            (S::Sensing, Input::Reading { sensor, ready }) => {
                self.coverage.hit(match (sensor, ready) {
                    (SensorChannel::Gaze, true) => "sensing.gaze_ready",
                    (SensorChannel::Gaze, false) => "sensing.gaze_not_ready",
                    (SensorChannel::Pressure, true) => "sensing.pressure_ready",
                    (SensorChannel::Pressure, false) => "sensing.pressure_not_ready",
                    (SensorChannel::Location, true) => "sensing.location_ready",
                    (SensorChannel::Location, false) => "sensing.location_not_ready",
                });
                self.slots[sensor.slot()] = Some(ready);
                if let [Some(g), Some(p), Some(l)] = self.slots {
                    let triple = SensorTriple::new(g, p, l);
                    out.push(Effect::Log(SimEvent::Decision(triple)));
                    if triple.is_ready() {
                        self.coverage.hit("sensing.decide_release");
                        self.enter(S::Release, &mut out, rng);
                    } else {
                        self.coverage.hit("sensing.decide_discard");
                        self.enter(S::Discard, &mut out, rng);
                    }
                }
            }
            (S::Sensing, Input::Timer { kind: TimerKind::SensingTimeout, .. }) => {
                self.coverage.hit("sensing.timeout");
                out.push(Effect::Log(SimEvent::SensingTimeout));
                self.enter(S::Discard, &mut out, rng);
            }
            (S::Release, Input::Timer { kind: TimerKind::LegReleased, .. }) => {
                self.coverage.hit("release.leg_released");
                out.push(Effect::Log(SimEvent::LegRelease));
                out.push(self.timer(self.timing.close_after_release, TimerKind::CloseAfterRelease));
            }
            (S::Release, Input::Timer { kind: TimerKind::CloseAfterRelease, .. }) => {
                self.coverage.hit("release.hand_close");
                out.push(Effect::CloseHand(CloseContext::Release));
                self.motion(&mut out);
            }
            (S::Release, Input::Timer { kind: TimerKind::MotionDone, .. }) => {
                self.coverage.hit("release.return_done");
                self.delivered += 1;
                if self.delivered >= MAX_LEGS {
                    self.coverage.hit("release.all_delivered");
                    self.enter(S::Finished, &mut out, rng);
                } else {
                    self.coverage.hit("release.cycle_done");
                    out.push(Effect::Signal("cycle_done"));
                    self.enter(S::WaitingForRequest, &mut out, rng);
                }
            }
            (S::Discard, Input::Timer { kind: TimerKind::MotionDone, .. }) => {
                self.coverage.hit("discard.motion_done");
                self.coverage.hit("discard.drop");
                self.discarded += 1;
                out.push(Effect::Log(SimEvent::HandOpen));
                out.push(Effect::Log(SimEvent::LegDiscard));
                out.push(Effect::Signal("cycle_done"));
                self.enter(S::WaitingForRequest, &mut out, rng);
            }
            (_, Input::Reading { .. }) => self.coverage.hit("input.reading_ignored"),
            _ => self.unexpected(),
        }
        out
    }
}
