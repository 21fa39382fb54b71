//! The cooperative table-assembly case study as agent data.
//!
//! Three agents run together: `robot` (the controller, 12 plans), `human`
//! (48 plans) and `sensors` (a relay combining gaze, pressure and location
//! readings). A meta agent seeds the human with a belief subset drawn from
//! the 38-element [`vocabulary`].

mod subset;
mod vocabulary;

pub use subset::{all_valid_subsets, legal_mask, legal_next, valid_subsets_with_legs, BeliefSubset, SubsetError};
pub use vocabulary::{
    vocabulary, BeliefGroup, BeliefVocabulary, ControllableBelief, SensorTriple, UnknownBelief, MAX_LEGS,
    VOCABULARY_SIZE,
};

use crate::agent::{parse_agent, plan_coverage, Agent, MasTrace, MultiAgentSystem, PlanCoverage, PlanId, TriggerEvent};
use std::sync::OnceLock;

pub const HUMAN: &str = "human";
pub const ROBOT: &str = "robot";
pub const SENSORS: &str = "sensors";
pub const META: &str = "meta";

pub const ROBOT_PLANS: &str = include_str!("../../assets/robot.asl");
pub const HUMAN_PLANS: &str = include_str!("../../assets/human.asl");
pub const SENSOR_PLANS: &str = include_str!("../../assets/sensors.asl");

/// Enough for four handovers with the busy-waiting robot; seeded runs of the
/// bundled scenario stay well below it.
pub const DEFAULT_STEP_BUDGET: usize = 2000;

/// Named robot plans (1-based ordinals in `robot.asl`).
pub mod robot_plan {
    pub const RESET: usize = 1;
    pub const WAIT: usize = 2;
    pub const REQUESTED: usize = 3;
    pub const FINISHED: usize = 4;
    pub const TIMED_OUT: usize = 5;
    pub const GRAB: usize = 6;
    pub const OFFER: usize = 7;
    pub const HUMAN_READY: usize = 8;
    pub const SENSE: usize = 9;
    pub const RELEASE: usize = 10;
    pub const DISCARD: usize = 11;
    pub const HUMAN_GONE: usize = 12;
}

/// Plans covering the human's posture for `leg` with the given readings.
pub fn human_posture_plan(leg: u8, triple: SensorTriple) -> PlanId {
    PlanId { agent: HUMAN.into(), ordinal: 9 + (leg as usize - 1) * 8 + triple.code() }
}

pub fn robot_plan_id(ordinal: usize) -> PlanId {
    PlanId { agent: ROBOT.into(), ordinal }
}

fn agents() -> &'static [Agent; 3] {
    static AGENTS: OnceLock<[Agent; 3]> = OnceLock::new();
    AGENTS.get_or_init(|| {
        let parse = |name, src| parse_agent(name, src).unwrap_or_else(|e| panic!("bundled {name} agent: {e}"));
        [parse(HUMAN, HUMAN_PLANS), parse(ROBOT, ROBOT_PLANS), parse(SENSORS, SENSOR_PLANS)]
    })
}

/// The unseeded scenario MAS.
pub fn build_mas() -> MultiAgentSystem {
    MultiAgentSystem::new(agents().to_vec()).expect("distinct agent names")
}

/// Installs the meta agent's tell-messages for a structurally valid subset.
pub fn seed_mas(mas: MultiAgentSystem, subset: &BeliefSubset) -> Result<MultiAgentSystem, SubsetError> {
    subset.validate()?;
    Ok(seed_partial(mas, subset.beliefs()))
}

/// Like [`seed_mas`] without validation; used for the learner's partial
/// subsets.
pub fn seed_partial(mut mas: MultiAgentSystem, beliefs: &[ControllableBelief]) -> MultiAgentSystem {
    for b in beliefs {
        mas.post_event(HUMAN, TriggerEvent::AddBelief(b.to_belief().with_source(META)))
            .expect("scenario has a human agent");
    }
    mas
}

/// Per-agent plan-coverage fractions for the two agents that earn rewards.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgentCoverage {
    pub human: f64,
    pub robot: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub mas: MultiAgentSystem,
    pub trace: MasTrace,
    pub coverage: PlanCoverage,
}

impl ScenarioRun {
    pub fn agent_coverage(&self) -> AgentCoverage {
        AgentCoverage { human: self.coverage.fraction(HUMAN), robot: self.coverage.fraction(ROBOT) }
    }
}

/// Seeds a fresh MAS with `beliefs` (possibly a partial subset) and runs it to
/// quiescence.
pub fn run_beliefs(beliefs: &[ControllableBelief]) -> ScenarioRun {
    let mut mas = seed_partial(build_mas(), beliefs);
    let trace = mas
        .run_to_quiescence(DEFAULT_STEP_BUDGET)
        .expect("bundled agents only send to known agents");
    let coverage = plan_coverage(&trace, &mas);
    ScenarioRun { mas, trace, coverage }
}

/// Highest per-run plan coverage of the human and robot agents, found by
/// running every structurally valid subset once. Computed on first use.
pub fn max_reachable_coverage() -> AgentCoverage {
    static MAX: OnceLock<AgentCoverage> = OnceLock::new();
    *MAX.get_or_init(|| {
        use rayon::prelude::*;
        all_valid_subsets()
            .par_iter()
            .map(|s| run_beliefs(s.beliefs()).agent_coverage())
            .reduce(AgentCoverage::default, |a, b| AgentCoverage {
                human: a.human.max(b.human),
                robot: a.robot.max(b.robot),
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Action, RecordKind};

    fn subset(line: &str) -> BeliefSubset {
        crate::explorer::parse_subset_line(line).unwrap()
    }

    fn run(line: &str) -> ScenarioRun {
        let s = subset(line);
        assert!(s.is_valid());
        run_beliefs(s.beliefs())
    }

    fn emits(run: &ScenarioRun, agent: &str, label: &str) -> usize {
        run.trace
            .records
            .iter()
            .filter(|r| r.agent == agent)
            .flat_map(|r| &r.actions)
            .filter(|a| matches!(a, Action::Emit { label: l, .. } if l == label))
            .count()
    }

    #[test]
    fn plan_counts() {
        let mas = build_mas();
        assert_eq!(mas.agent(ROBOT).unwrap().plans.len(), 12);
        assert_eq!(mas.agent(HUMAN).unwrap().plans.len(), 48);
        assert_eq!(mas.agent(SENSORS).unwrap().plans.len(), 4);
        let again = build_mas();
        for (a, b) in mas.agents().iter().zip(again.agents()) {
            assert_eq!(a.plans, b.plans);
            assert_eq!(a.queue, b.queue);
        }
    }

    #[test]
    fn posture_plan_ids() {
        let mas = build_mas();
        let human = mas.agent(HUMAN).unwrap();
        for leg in 1..=4 {
            for t in SensorTriple::all() {
                let p = human.plan(&human_posture_plan(leg, t)).unwrap();
                let b = ControllableBelief::Gpl { leg, triple: t }.to_belief();
                assert!(p.context.iter().any(|l| l.pattern.to_belief().as_ref() == Some(&b)));
            }
        }
    }

    #[test]
    fn ready_leg_is_released() {
        let r = run("legs_requested(1), not_bored, gpl(1,1,1,1)");
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::RELEASE)));
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::FINISHED)));
        assert!(!r.trace.truncated);
        assert!(r.mas.is_quiescent());
    }

    #[test]
    fn unready_leg_is_discarded() {
        let r = run("legs_requested(1), not_bored, gpl(1,1,0,1)");
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::DISCARD)));
        assert!(!r.trace.contains_plan(&robot_plan_id(robot_plan::RELEASE)));
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::TIMED_OUT)));
    }

    #[test]
    fn four_ready_handovers() {
        let r = run("legs_requested(4), not_bored, gpl(1,1,1,1), gpl(2,1,1,1), gpl(3,1,1,1), gpl(4,1,1,1)");
        assert_eq!(emits(&r, ROBOT, "release"), 4);
        assert_eq!(emits(&r, ROBOT, "discard"), 0);
        assert_eq!(emits(&r, ROBOT, "finished"), 1);
    }

    #[test]
    fn bored_human_walks_away_on_last_leg() {
        let r = run("legs_requested(2), bored, gpl(1,1,1,1), gpl(2,1,1,1)");
        assert_eq!(emits(&r, ROBOT, "release"), 1);
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::HUMAN_GONE)));
        assert_eq!(emits(&r, HUMAN, "set_param"), 4);
        assert!(r.trace.contains_plan(&robot_plan_id(robot_plan::FINISHED)));
    }

    #[test]
    fn seeding_rejects_invalid() {
        let bad = subset("legs_requested(1), bored, not_bored, gpl(1,1,1,1)");
        assert!(seed_mas(build_mas(), &bad).is_err());
        let good = subset("legs_requested(1), bored, gpl(1,1,1,1)");
        let mas = seed_mas(build_mas(), &good).unwrap();
        assert_eq!(mas.agent(HUMAN).unwrap().queue.len(), 3);
    }

    #[test]
    fn deterministic_runs() {
        let line = "legs_requested(3), not_bored, gpl(1,1,1,1), gpl(2,0,1,0), gpl(3,1,1,1)";
        assert_eq!(run(line).trace, run(line).trace);
    }

    #[test]
    fn partial_subsets_quiesce() {
        for prefix in [
            &["legs_requested(4)"][..],
            &["legs_requested(4)", "bored"],
            &["legs_requested(2)", "not_bored", "gpl(1,1,1,1)"],
        ] {
            let beliefs: Vec<ControllableBelief> = prefix.iter().map(|s| s.parse().unwrap()).collect();
            let r = run_beliefs(&beliefs);
            assert!(!r.trace.truncated, "{prefix:?}");
        }
    }

    /// Independent replay: for each fired record, rebuild the agent's belief
    /// base from the events dequeued so far and re-check trigger and context.
    #[test]
    fn trace_soundness_by_replay() {
        let r = run("legs_requested(3), bored, gpl(1,1,1,1), gpl(2,0,1,1), gpl(3,1,1,1)");
        let mut bases: std::collections::BTreeMap<String, Vec<crate::agent::Belief>> = Default::default();
        for rec in &r.trace.records {
            let base = bases.entry(rec.agent.clone()).or_default();
            match &rec.event {
                TriggerEvent::AddBelief(b) if !base.contains(b) => base.push(b.clone()),
                TriggerEvent::DeleteBelief(b) => base.retain(|x| x != b),
                _ => {}
            }
            if let Some(id) = &rec.plan {
                assert_eq!(rec.kind, RecordKind::Fired);
                let plan = r.mas.agent(&rec.agent).unwrap().plan(id).unwrap();
                assert!(plan.trigger.matches(&rec.event));
                assert!(plan.context_holds(base), "{id} at step {}", rec.step);
            }
        }
        let steps: Vec<u64> = r.trace.records.iter().map(|r| r.step).collect();
        assert!(steps.windows(2).all(|w| w[0] < w[1]));
    }
}
