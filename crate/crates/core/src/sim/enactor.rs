use super::log::SimTime;
use crate::testgen::{Channel, ConcreteTest};

/// When one stimulus ran. Effects take hold at `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledStimulus {
    pub index: usize,
    pub channel: Channel,
    pub start: SimTime,
    pub end: SimTime,
}

/// What the enactor asks of the event queue after starting a stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wake {
    /// Completes stimulus `index` at `at`; for waits this is the cap.
    At { index: usize, at: SimTime },
    /// Stimulus `index` completed immediately.
    Now { index: usize },
    /// A stimulus is already running.
    Busy,
    /// Test exhausted.
    Done,
}

/// Closed-loop human: runs stimuli in order, one at a time. A wait ends on
/// the next robot signal, at once if one arrived earlier and is unconsumed,
/// or at its duration cap.
#[derive(Debug, Clone)]
pub struct Enactor<'a> {
    test: &'a ConcreteTest,
    next: usize,
    current: Option<(usize, SimTime)>,
    pending_signals: usize,
    pub schedule: Vec<ScheduledStimulus>,
}

impl<'a> Enactor<'a> {
    pub fn new(test: &'a ConcreteTest) -> Self {
        Self { test, next: 0, current: None, pending_signals: 0, schedule: Vec::new() }
    }

    pub fn current(&self) -> Option<usize> {
        self.current.map(|(i, _)| i)
    }

    /// Starts the next stimulus if idle.
    pub fn advance(&mut self, now: SimTime) -> Wake {
        if self.current.is_some() {
            return Wake::Busy;
        }
        let Some(st) = self.test.stimuli.get(self.next) else {
            return Wake::Done;
        };
        let index = self.next;
        self.next += 1;
        self.current = Some((index, now));
        if st.channel == Channel::Wait && self.pending_signals > 0 {
            self.pending_signals -= 1;
            self.finish(index, now);
            return Wake::Now { index };
        }
        Wake::At { index, at: now + SimTime::from_secs(st.duration) }
    }

    /// A robot signal. Returns the wait it completed, if any.
    pub fn on_signal(&mut self, now: SimTime) -> Option<usize> {
        match self.current {
            Some((i, _)) if self.test.stimuli[i].channel == Channel::Wait => {
                self.finish(i, now);
                Some(i)
            }
            _ => {
                self.pending_signals += 1;
                None
            }
        }
    }

    /// A scheduled completion fired. Returns false if it is stale (its wait
    /// already ended on a signal).
    pub fn on_wake(&mut self, index: usize, now: SimTime) -> bool {
        if self.current() != Some(index) {
            return false;
        }
        self.finish(index, now);
        true
    }

    fn finish(&mut self, index: usize, now: SimTime) {
        let (_, start) = self.current.take().expect("a stimulus is running");
        self.schedule.push(ScheduledStimulus { index, channel: self.test.stimuli[index].channel, start, end: now });
    }
}

/// Open-loop schedule of `test` from `start`, given the robot signal times.
pub fn enact(test: &ConcreteTest, start: SimTime, signals: &[SimTime]) -> Vec<ScheduledStimulus> {
    let mut e = Enactor::new(test);
    let mut signals = signals.iter().copied().peekable();
    let mut now = start;
    loop {
        match e.advance(now) {
            Wake::Done => break,
            Wake::Now { .. } => {}
            Wake::Busy => unreachable!("each stimulus completes before the next advance"),
            Wake::At { index, at } => {
                while let Some(&s) = signals.peek() {
                    if s > at {
                        break;
                    }
                    signals.next();
                    now = now.max(s);
                    if e.on_signal(now).is_some() {
                        break;
                    }
                }
                if e.current() == Some(index) {
                    now = at;
                    e.on_wake(index, now);
                }
            }
        }
    }
    e.schedule
}
