use super::{MasTrace, MultiAgentSystem};
use std::collections::BTreeMap;

/// Plan hit counts per agent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanCoverage {
    /// Agent name → hit count per plan, indexed by `ordinal - 1`.
    pub hits: BTreeMap<String, Vec<u32>>,
}

impl PlanCoverage {
    pub fn empty_for(mas: &MultiAgentSystem) -> Self {
        let hits = mas
            .agents()
            .iter()
            .map(|a| (a.name.clone(), vec![0; a.plans.len()]))
            .collect();
        Self { hits }
    }

    /// Fraction of the agent's plans hit at least once; 0 for unknown agents
    /// and agents without plans.
    pub fn fraction(&self, agent: &str) -> f64 {
        match self.hits.get(agent) {
            Some(h) if !h.is_empty() => self.covered(agent) as f64 / h.len() as f64,
            _ => 0.0,
        }
    }

    pub fn covered(&self, agent: &str) -> usize {
        self.hits.get(agent).map_or(0, |h| h.iter().filter(|&&c| c > 0).count())
    }

    pub fn total(&self, agent: &str) -> usize {
        self.hits.get(agent).map_or(0, Vec::len)
    }

    /// Ordinals (1-based) of the plans hit at least once.
    pub fn covered_ordinals(&self, agent: &str) -> Vec<usize> {
        self.hits.get(agent).map_or_else(Vec::new, |h| {
            h.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| i + 1).collect()
        })
    }

    /// Pointwise sum; used to union the coverage of a suite.
    pub fn merge(&mut self, other: &PlanCoverage) {
        for (agent, h) in &other.hits {
            let mine = self.hits.entry(agent.clone()).or_insert_with(|| vec![0; h.len()]);
            if mine.len() < h.len() {
                mine.resize(h.len(), 0);
            }
            for (m, o) in mine.iter_mut().zip(h) {
                *m += o;
            }
        }
    }
}

pub fn plan_coverage(trace: &MasTrace, mas: &MultiAgentSystem) -> PlanCoverage {
    let mut cov = PlanCoverage::empty_for(mas);
    for (_, id) in trace.fired() {
        if let Some(h) = cov.hits.get_mut(&id.agent) {
            if let Some(slot) = h.get_mut(id.ordinal - 1) {
                *slot += 1;
            }
        }
    }
    cov
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{parse_agent, Goal, TriggerEvent};

    #[test]
    fn empty_trace_is_zero() {
        let a = parse_agent("a", "+!g <- .print(\"x\").").unwrap();
        let mas = MultiAgentSystem::new(vec![a]).unwrap();
        let c = plan_coverage(&MasTrace::default(), &mas);
        assert_eq!(c.fraction("a"), 0.0);
        assert_eq!(c.total("a"), 1);
    }

    #[test]
    fn hits_equal_occurrences() {
        let a = parse_agent("a", "!g.\n+!g : not done <- +done; !g.\n+!g : done <- .print(\"end\").\n+!never <- .print(\"x\").")
            .unwrap();
        let mut mas = MultiAgentSystem::new(vec![a]).unwrap();
        mas.post_event("a", TriggerEvent::AddGoal(Goal::new("g"))).unwrap();
        let t = mas.run_to_quiescence(100).unwrap();
        let c = plan_coverage(&t, &mas);
        for ord in 1..=3 {
            let n = t.fired().filter(|(_, p)| p.ordinal == ord).count() as u32;
            assert_eq!(c.hits["a"][ord - 1], n);
        }
        assert!((c.fraction("a") - 2.0 / 3.0).abs() < 1e-12);
    }
}
