//! Deterministic reasoning cycle.
//!
//! Agents are scheduled round-robin. A step dequeues one event of the next
//! agent with pending work, applies its belief change, selects the first
//! applicable plan in declaration order and runs the whole body. Actions that
//! change beliefs or goals only enqueue events; they take effect when the
//! event is dequeued.

use super::{Action, Agent, Belief, MasTrace, PlanId, RecordKind, TraceRecord, TriggerEvent};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("agent `{from}` sent to unknown agent `{target}`")]
    UnknownTarget { from: String, target: String },
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("duplicate agent name `{0}`")]
    DuplicateAgent(String),
    #[error("step budget must be positive")]
    ZeroBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Fired(PlanId),
    FailedGoal,
    Absorbed,
    /// Every queue was empty; nothing happened.
    Quiescent,
}

#[derive(Debug, Clone)]
pub struct MultiAgentSystem {
    agents: Vec<Agent>,
    cursor: usize,
    next_step: u64,
    trace: MasTrace,
}

impl MultiAgentSystem {
    pub fn new(agents: Vec<Agent>) -> Result<Self, EngineError> {
        for (i, a) in agents.iter().enumerate() {
            if agents[..i].iter().any(|b| b.name == a.name) {
                return Err(EngineError::DuplicateAgent(a.name.clone()));
            }
        }
        Ok(Self { agents, cursor: 0, next_step: 0, trace: MasTrace::default() })
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn agent_mut(&mut self, name: &str) -> Option<&mut Agent> {
        self.agents.iter_mut().find(|a| a.name == name)
    }

    pub fn trace(&self) -> &MasTrace {
        &self.trace
    }

    pub fn is_quiescent(&self) -> bool {
        self.agents.iter().all(|a| a.queue.is_empty())
    }

    pub fn post_event(&mut self, agent: &str, event: TriggerEvent) -> Result<(), EngineError> {
        self.agent_mut(agent)
            .ok_or_else(|| EngineError::UnknownAgent(agent.to_string()))?
            .post_event(event);
        Ok(())
    }

    pub fn step(&mut self) -> Result<StepOutcome, EngineError> {
        let n = self.agents.len();
        let Some(idx) = (0..n).map(|k| (self.cursor + k) % n).find(|&i| !self.agents[i].queue.is_empty())
        else {
            return Ok(StepOutcome::Quiescent);
        };
        self.cursor = (idx + 1) % n;

        let agent = &mut self.agents[idx];
        let event = agent.queue.pop_front().expect("non-empty queue");
        match &event {
            TriggerEvent::AddBelief(b) => {
                agent.add_belief(b.clone());
            }
            TriggerEvent::DeleteBelief(b) => {
                agent.remove_belief(b);
            }
            TriggerEvent::AddGoal(_) => {}
        }

        let plan = agent
            .plans
            .iter()
            .find(|p| p.is_applicable(&event, &agent.beliefs))
            .cloned();
        let step = self.next_step;
        self.next_step += 1;
        let agent_name = agent.name.clone();

        let Some(plan) = plan else {
            let kind = if matches!(event, TriggerEvent::AddGoal(_)) {
                RecordKind::FailedGoal
            } else {
                RecordKind::Absorbed
            };
            self.trace.records.push(TraceRecord {
                step,
                agent: agent_name,
                plan: None,
                event,
                kind,
                actions: Vec::new(),
            });
            return Ok(match kind {
                RecordKind::FailedGoal => StepOutcome::FailedGoal,
                _ => StepOutcome::Absorbed,
            });
        };

        let mut executed = Vec::with_capacity(plan.body.len());
        for action in plan.body.iter() {
            match action {
                Action::AddBelief(b) => {
                    let b = Belief { source: super::SELF_SOURCE.into(), ..b.clone() };
                    self.agents[idx].post_event(TriggerEvent::AddBelief(b));
                }
                Action::RemoveBelief(p) => {
                    let agent = &mut self.agents[idx];
                    let matching: Vec<Belief> = match p.to_belief() {
                        Some(b) => vec![b],
                        None => agent.beliefs.iter().filter(|b| p.matches(b)).cloned().collect(),
                    };
                    for b in matching {
                        agent.post_event(TriggerEvent::DeleteBelief(b));
                    }
                }
                Action::CreateGoal(g) => self.agents[idx].post_event(TriggerEvent::AddGoal(g.clone())),
                Action::SendBelief { target, belief } => {
                    let b = belief.clone().with_source(agent_name.clone());
                    let t = self
                        .agents
                        .iter_mut()
                        .find(|a| a.name == *target)
                        .ok_or_else(|| EngineError::UnknownTarget {
                            from: agent_name.clone(),
                            target: target.clone(),
                        })?;
                    t.post_event(TriggerEvent::AddBelief(b));
                }
                Action::Emit { .. } | Action::AdvanceTime(_) | Action::Print(_) => {}
            }
            executed.push(action.clone());
        }
        self.trace.records.push(TraceRecord {
            step,
            agent: agent_name,
            plan: Some(plan.id.clone()),
            event,
            kind: RecordKind::Fired,
            actions: executed,
        });
        Ok(StepOutcome::Fired(plan.id))
    }

    /// Steps until every queue is empty or `budget` steps were taken, and
    /// returns the trace accumulated so far. Hitting the budget sets
    /// [`MasTrace::truncated`].
    pub fn run_to_quiescence(&mut self, budget: usize) -> Result<MasTrace, EngineError> {
        if budget == 0 {
            return Err(EngineError::ZeroBudget);
        }
        let mut taken = 0;
        while !self.is_quiescent() {
            if taken == budget {
                self.trace.truncated = true;
                break;
            }
            self.step()?;
            taken += 1;
        }
        Ok(self.trace.clone())
    }
}
