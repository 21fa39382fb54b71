//! A small BDI engine.
//!
//! Agents are written in a plan-rule language close to AgentSpeak (see
//! [`parser`]), run by a deterministic reasoning cycle ([`engine`]) and leave
//! behind a [`MasTrace`] from which plan coverage is computed ([`coverage`]).

pub mod coverage;
pub mod engine;
pub mod parser;

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

pub use coverage::{plan_coverage, PlanCoverage};
pub use engine::{EngineError, MultiAgentSystem, StepOutcome};
pub use parser::{parse_agent, ParseError};

/// Source annotation used for beliefs an agent adds itself.
pub const SELF_SOURCE: &str = "self";

/// A ground argument of a belief.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(String),
    Int(i64),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sym(s) => f.write_str(s),
            Atom::Int(i) => write!(f, "{i}"),
        }
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::Sym(s.to_string())
    }
}

impl From<i64> for Atom {
    fn from(i: i64) -> Self {
        Atom::Int(i)
    }
}

/// A ground belief. Equality ignores `source`; it is kept for provenance only.
#[derive(Debug, Clone, Eq)]
pub struct Belief {
    pub functor: String,
    pub args: Vec<Atom>,
    pub source: String,
}

impl Belief {
    pub fn new(functor: impl Into<String>, args: Vec<Atom>) -> Self {
        Self {
            functor: functor.into(),
            args,
            source: SELF_SOURCE.to_string(),
        }
    }

    pub fn atom(functor: impl Into<String>) -> Self {
        Self::new(functor, Vec::new())
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }
}

impl PartialEq for Belief {
    fn eq(&self, other: &Self) -> bool {
        self.functor == other.functor && self.args == other.args
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.functor)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Argument position in a pattern: a ground atom or `_`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternArg {
    Atom(Atom),
    Wildcard,
}

/// A belief pattern as written in triggers, contexts and removal actions.
///
/// A bare functor only matches beliefs of arity zero. `_` matches any atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeliefPattern {
    pub functor: String,
    pub args: Vec<PatternArg>,
    /// `[source(x)]` annotation. Triggers with an annotation only match
    /// events from that source; contexts and removals ignore it.
    pub source: Option<String>,
}

impl BeliefPattern {
    pub fn matches(&self, belief: &Belief) -> bool {
        self.functor == belief.functor
            && self.args.len() == belief.args.len()
            && self.args.iter().zip(&belief.args).all(|(p, a)| match p {
                PatternArg::Wildcard => true,
                PatternArg::Atom(x) => x == a,
            })
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| matches!(a, PatternArg::Atom(_)))
    }

    /// The ground belief this pattern denotes, if it has no wildcards.
    pub fn to_belief(&self) -> Option<Belief> {
        let args = self
            .args
            .iter()
            .map(|a| match a {
                PatternArg::Atom(x) => Some(x.clone()),
                PatternArg::Wildcard => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Belief::new(self.functor.clone(), args))
    }
}

impl fmt::Display for BeliefPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.functor)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                match a {
                    PatternArg::Atom(x) => write!(f, "{x}")?,
                    PatternArg::Wildcard => f.write_str("_")?,
                }
            }
            f.write_str(")")?;
        }
        if let Some(s) = &self.source {
            write!(f, "[source({s})]")?;
        }
        Ok(())
    }
}

/// An achievement goal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Goal {
    pub name: String,
}

impl Goal {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }
}

/// An event waiting in an agent's queue.
///
/// Belief events carry the change; it is applied to the belief base when the
/// event is dequeued.
#[derive(Debug, Clone, PartialEq)]
pub enum TriggerEvent {
    AddBelief(Belief),
    DeleteBelief(Belief),
    AddGoal(Goal),
}

impl fmt::Display for TriggerEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriggerEvent::AddBelief(b) => write!(f, "+{b}[source({})]", b.source),
            TriggerEvent::DeleteBelief(b) => write!(f, "-{b}"),
            TriggerEvent::AddGoal(g) => write!(f, "+!{}", g.name),
        }
    }
}

/// Plan trigger pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum Trigger {
    AddBelief(BeliefPattern),
    DeleteBelief(BeliefPattern),
    AddGoal(String),
}

impl Trigger {
    pub fn matches(&self, event: &TriggerEvent) -> bool {
        match (self, event) {
            (Trigger::AddBelief(p), TriggerEvent::AddBelief(b)) => {
                p.matches(b) && p.source.as_ref().is_none_or(|s| *s == b.source)
            }
            (Trigger::DeleteBelief(p), TriggerEvent::DeleteBelief(b)) => p.matches(b),
            (Trigger::AddGoal(g), TriggerEvent::AddGoal(e)) => *g == e.name,
            _ => false,
        }
    }
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trigger::AddBelief(p) => write!(f, "+{p}"),
            Trigger::DeleteBelief(p) => write!(f, "-{p}"),
            Trigger::AddGoal(g) => write!(f, "+!{g}"),
        }
    }
}

/// One conjunct of a plan context. Negation is negation-as-failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Literal {
    pub negated: bool,
    pub pattern: BeliefPattern,
}

impl Literal {
    pub fn holds(&self, beliefs: &[Belief]) -> bool {
        beliefs.iter().any(|b| self.pattern.matches(b)) != self.negated
    }
}

/// A plan body step.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    AddBelief(Belief),
    /// Removes every belief matching the pattern at execution time.
    RemoveBelief(BeliefPattern),
    CreateGoal(Goal),
    SendBelief { target: String, belief: Belief },
    Emit { label: String, args: Vec<Atom> },
    /// Simulated seconds; always positive.
    AdvanceTime(f64),
    Print(String),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::AddBelief(b) => write!(f, "+{b}"),
            Action::RemoveBelief(p) => write!(f, "-{p}"),
            Action::CreateGoal(g) => write!(f, "!{}", g.name),
            Action::SendBelief { target, belief } => write!(f, ".send({target},tell,{belief})"),
            Action::Emit { label, args } => {
                write!(f, ".emit({label}")?;
                for a in args {
                    write!(f, ",{a}")?;
                }
                f.write_str(")")
            }
            Action::AdvanceTime(t) => write!(f, "add_time({t})"),
            Action::Print(s) => write!(f, ".print({s:?})"),
        }
    }
}

/// Stable plan identifier: owning agent and 1-based declaration ordinal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanId {
    pub agent: String,
    pub ordinal: usize,
}

impl fmt::Display for PlanId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.agent, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub id: PlanId,
    pub trigger: Trigger,
    /// Empty means `true`.
    pub context: Vec<Literal>,
    pub body: Vec<Action>,
}

impl Plan {
    pub fn context_holds(&self, beliefs: &[Belief]) -> bool {
        self.context.iter().all(|l| l.holds(beliefs))
    }

    pub fn is_applicable(&self, event: &TriggerEvent, beliefs: &[Belief]) -> bool {
        self.trigger.matches(event) && self.context_holds(beliefs)
    }
}

/// An agent: a static plan library plus its mutable reasoning state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub name: String,
    pub initial_beliefs: Vec<Belief>,
    pub initial_goals: Vec<Goal>,
    pub plans: Arc<[Plan]>,
    pub beliefs: Vec<Belief>,
    pub queue: VecDeque<TriggerEvent>,
}

impl Agent {
    /// Builds an agent in its initial state: initial beliefs in the base,
    /// initial goals queued as goal-addition events.
    pub fn new(
        name: impl Into<String>,
        initial_beliefs: Vec<Belief>,
        initial_goals: Vec<Goal>,
        plans: Vec<Plan>,
    ) -> Self {
        let mut agent = Self {
            name: name.into(),
            initial_beliefs,
            initial_goals,
            plans: plans.into(),
            beliefs: Vec::new(),
            queue: VecDeque::new(),
        };
        agent.reset();
        agent
    }

    pub fn reset(&mut self) {
        self.beliefs.clear();
        for b in self.initial_beliefs.clone() {
            self.add_belief(b);
        }
        self.queue = self
            .initial_goals
            .iter()
            .cloned()
            .map(TriggerEvent::AddGoal)
            .collect();
    }

    pub fn post_event(&mut self, event: TriggerEvent) {
        self.queue.push_back(event);
    }

    pub fn has_belief(&self, belief: &Belief) -> bool {
        self.beliefs.contains(belief)
    }

    pub fn plan(&self, id: &PlanId) -> Option<&Plan> {
        if id.agent != self.name {
            return None;
        }
        self.plans.get(id.ordinal.checked_sub(1)?)
    }

    /// Adds a belief unless an equal one is present. Returns whether it was new.
    pub(crate) fn add_belief(&mut self, belief: Belief) -> bool {
        if self.beliefs.contains(&belief) {
            return false;
        }
        self.beliefs.push(belief);
        true
    }

    pub(crate) fn remove_belief(&mut self, belief: &Belief) -> bool {
        let before = self.beliefs.len();
        self.beliefs.retain(|b| b != belief);
        before != self.beliefs.len()
    }
}

/// What happened to one dequeued event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// A plan was selected and its body ran to completion.
    Fired,
    /// A goal event with no applicable plan.
    FailedGoal,
    /// A belief event with no applicable plan; only the belief base changed.
    Absorbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub agent: String,
    pub plan: Option<PlanId>,
    pub event: TriggerEvent,
    pub kind: RecordKind,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MasTrace {
    pub records: Vec<TraceRecord>,
    /// Set when the step budget ran out before quiescence.
    pub truncated: bool,
}

impl MasTrace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn fired(&self) -> impl Iterator<Item = (&TraceRecord, &PlanId)> {
        self.records
            .iter()
            .filter_map(|r| r.plan.as_ref().map(|p| (r, p)))
    }

    pub fn contains_plan(&self, id: &PlanId) -> bool {
        self.fired().any(|(_, p)| p == id)
    }

    /// Total of the `add_time` actions executed by `agent`.
    pub fn model_time(&self, agent: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.agent == agent)
            .flat_map(|r| &r.actions)
            .map(|a| match a {
                Action::AdvanceTime(t) => *t,
                _ => 0.0,
            })
            .sum()
    }
}
