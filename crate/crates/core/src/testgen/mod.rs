//! Two-tier test generation: MAS traces become abstract tests (order and
//! causality), which are concretized by seeded sampling from range tables.

mod concrete;
mod ranges;

pub use concrete::{concretize, expand, sub_seed, parse_concrete, Channel, ConcreteTest, Param, TimedStimulus};
pub use ranges::{Interval, ParamRange, ParamRangeTable, RangeEntry};

use crate::agent::{Action, Atom, MasTrace};
use crate::scenario::{BeliefSubset, HUMAN, ROBOT};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestgenError {
    #[error("no range entry for `{0}`")]
    MissingRange(AbstractAction),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expansion count must be positive")]
    ZeroCount,
}

impl TestgenError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        TestgenError::Parse { line, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractAction {
    Tell(String),
    ReceiveSignal,
    SetParam { key: String, value: i64 },
}

impl fmt::Display for AbstractAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractAction::Tell(w) => write!(f, "tell {w}"),
            AbstractAction::ReceiveSignal => f.write_str("receivesignal"),
            AbstractAction::SetParam { key, value } => write!(f, "set_param {key}={value}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognized abstract action `{0}`")]
pub struct BadAction(pub String);

impl FromStr for AbstractAction {
    type Err = BadAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BadAction(s.trim().to_string());
        let mut words = s.split_whitespace();
        let action = match (words.next(), words.next()) {
            (Some("receivesignal"), None) => AbstractAction::ReceiveSignal,
            (Some("tell"), Some(w)) => AbstractAction::Tell(w.to_string()),
            (Some("set_param"), Some(kv)) => {
                let (key, value) = kv.split_once('=').ok_or_else(bad)?;
                if key.is_empty() {
                    return Err(bad());
                }
                AbstractAction::SetParam { key: key.to_string(), value: value.parse().map_err(|_| bad())? }
            }
            _ => return Err(bad()),
        };
        if words.next().is_some() {
            return Err(bad());
        }
        Ok(action)
    }
}

/// Human-side action sequence derived from one MAS run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AbstractTest {
    pub actions: Vec<AbstractAction>,
    pub subset: Option<BeliefSubset>,
    pub trace_id: String,
}

impl AbstractTest {
    pub fn new(actions: Vec<AbstractAction>) -> Self {
        Self { actions, ..Default::default() }
    }

    /// One action per line.
    pub fn to_text(&self) -> String {
        self.actions.iter().map(|a| format!("{a}\n")).collect()
    }

    /// Inverse of [`to_text`](Self::to_text); blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str) -> Result<Self, TestgenError> {
        let mut actions = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            actions.push(line.parse().map_err(|e: BadAction| TestgenError::parse(n + 1, e.to_string()))?);
        }
        Ok(Self::new(actions))
    }
}

fn atom_text(a: &Atom) -> String {
    match a {
        Atom::Sym(s) => s.clone(),
        Atom::Int(i) => i.to_string(),
    }
}

fn emit_to_action(label: &str, args: &[Atom]) -> Option<AbstractAction> {
    match (label, args) {
        ("receivesignal", []) => Some(AbstractAction::ReceiveSignal),
        ("tell", [w]) => Some(AbstractAction::Tell(atom_text(w))),
        ("set_param", [Atom::Sym(key), Atom::Int(value)]) => {
            Some(AbstractAction::SetParam { key: key.clone(), value: *value })
        }
        _ => None,
    }
}

/// Maps the environment side's `.emit` actions, in trace order, to abstract
/// actions. Robot records are never mapped. The second value holds warnings.
pub fn trace_to_abstract(trace: &MasTrace) -> (AbstractTest, Vec<String>) {
    let mut warnings = Vec::new();
    if !trace.records.iter().any(|r| r.agent == HUMAN) {
        warnings.push("trace has no human records; abstract test is empty".to_string());
    }
    let actions = trace
        .records
        .iter()
        .filter(|r| r.agent != ROBOT)
        .flat_map(|r| &r.actions)
        .filter_map(|a| match a {
            Action::Emit { label, args } => emit_to_action(label, args),
            _ => None,
        })
        .collect();
    (AbstractTest::new(actions), warnings)
}
