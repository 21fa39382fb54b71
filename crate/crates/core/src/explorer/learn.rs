use super::{coverage_reward, ExplorerError, LearningConfig, Provenance, RunMode, StrategyResult};
use super::qtable::{boltzmann_select, NextState, QTable};
use crate::scenario::{
    legal_mask, legal_next, max_reachable_coverage, run_beliefs, AgentCoverage, BeliefSubset, ControllableBelief,
    VOCABULARY_SIZE,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// What the learner needs from the system under exploration.
pub trait CoverageModel {
    /// Per-agent plan coverage of one run seeded with `beliefs`.
    fn coverage(&self, beliefs: &[ControllableBelief]) -> AgentCoverage;
    /// Best per-run coverage attainable by any valid subset.
    fn reachable(&self) -> AgentCoverage;
}

/// The bundled scenario MAS.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScenarioModel;

impl CoverageModel for ScenarioModel {
    fn coverage(&self, beliefs: &[ControllableBelief]) -> AgentCoverage {
        run_beliefs(beliefs).agent_coverage()
    }

    fn reachable(&self) -> AgentCoverage {
        max_reachable_coverage()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: usize,
    pub max_delta_q: f64,
    /// Sum of rewards over the episode.
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningDiagnostics {
    pub iterations: Vec<IterationStats>,
    pub converged: bool,
    /// Every subset executed at the end of an episode.
    pub episodes: Vec<BeliefSubset>,
    pub qtable: QTable,
}

impl LearningDiagnostics {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,max_delta_q,reward\n");
        for it in &self.iterations {
            s.push_str(&format!("{},{:.9},{}\n", it.iteration, it.max_delta_q, it.reward));
        }
        s
    }
}

/// Q-learning over belief selections. One iteration is one episode: a leg
/// count drawn uniformly, then Boltzmann selections until the subset is
/// structurally complete. Stops once an episode changes no cell by `epsilon`
/// or more.
pub fn learn<M: CoverageModel + ?Sized>(model: &M, config: &LearningConfig) -> Result<StrategyResult, ExplorerError> {
    config.validate()?;
    let reachable = model.reachable();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = QTable::zeros(VOCABULARY_SIZE);
    let mut iterations = Vec::new();
    let mut episodes = Vec::new();
    let mut converged = false;

    for j in 0..config.max_iterations {
        let alpha = config.alpha(j);
        let before = q.clone();
        let mut prefix: Vec<ControllableBelief> = Vec::new();
        let first = *legal_next(&prefix).choose(&mut rng).ok_or(ExplorerError::EmptyMask)?;
        prefix.push(first);
        let mut total = 0.0;
        loop {
            let mask = legal_mask(&prefix);
            if !mask.contains(&true) {
                break;
            }
            let state = prefix.last().expect("prefix starts with a leg count").index();
            let action = boltzmann_select(&q, state, config.temperature, &mut rng, &mask)?;
            let chosen = ControllableBelief::from_index(action).expect("mask is over the vocabulary");
            prefix.push(chosen);
            let next_mask = legal_mask(&prefix);
            let complete = !next_mask.contains(&true);
            let reward = match config.run_mode {
                RunMode::PerSelection => coverage_reward(model.coverage(&prefix), reachable, config),
                RunMode::PerEpisode if complete => coverage_reward(model.coverage(&prefix), reachable, config),
                RunMode::PerEpisode => 0.0,
            };
            total += reward;
            let next = (!complete).then_some(NextState { row: action, mask: &next_mask });
            q.update(state, action, reward, next, alpha, config.gamma);
        }
        episodes.push(BeliefSubset::new(prefix));
        let delta = q.max_abs_diff(&before);
        iterations.push(IterationStats { iteration: j, max_delta_q: delta, reward: total });
        if delta < config.epsilon {
            converged = true;
            break;
        }
    }

    let mut result = extract_policy(&q);
    if !converged {
        result.warnings.push(format!("unconverged after {} iterations", config.max_iterations));
    }
    result.diagnostics = Some(LearningDiagnostics { iterations, converged, episodes, qtable: q });
    Ok(result)
}

/// Best and second-best walks. Every leg-count start is enumerated; at each
/// later position the walk branches into the top two legal beliefs of the
/// previous belief's row. Structurally identical subsets are kept once, in
/// first-seen order.
pub fn extract_policy(q: &QTable) -> StrategyResult {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for start in legal_next(&[]) {
        let mut stack = vec![vec![start]];
        while let Some(prefix) = stack.pop() {
            let mask = legal_mask(&prefix);
            if !mask.contains(&true) {
                let s = BeliefSubset::new(prefix);
                let mut key = s.0.clone();
                key.sort();
                if seen.insert(key) {
                    out.push(s);
                }
                continue;
            }
            let row = prefix.last().expect("non-empty").index();
            let ranked = q.ranked(row, &mask);
            // push second best first so the best branch is expanded first
            for &col in ranked.iter().take(2).rev() {
                let mut p = prefix.clone();
                p.push(ControllableBelief::from_index(col).expect("in vocabulary"));
                stack.push(p);
            }
        }
    }
    StrategyResult::new(out, Provenance::Learned)
}
