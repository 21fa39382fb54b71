//! Belief-subset selection: by hand, grouped pseudorandom, or Q-learning
//! driven by plan-coverage rewards.

mod learn;
mod qtable;

pub use learn::{extract_policy, learn, CoverageModel, IterationStats, LearningDiagnostics, ScenarioModel};
pub use qtable::{boltzmann_probabilities, boltzmann_select, NextState, QTable};

use crate::scenario::{AgentCoverage, BeliefSubset, ControllableBelief, SensorTriple, UnknownBelief, MAX_LEGS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExplorerError {
    #[error("no legal belief to select")]
    EmptyMask,
    #[error("invalid learning config: {0}")]
    InvalidConfig(&'static str),
    #[error("subset count must be positive")]
    ZeroCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Manual,
    Random,
    Learned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyResult {
    pub subsets: Vec<BeliefSubset>,
    pub provenance: Vec<Provenance>,
    pub warnings: Vec<String>,
    pub diagnostics: Option<LearningDiagnostics>,
}

impl StrategyResult {
    fn new(subsets: Vec<BeliefSubset>, provenance: Provenance) -> Self {
        let provenance = vec![provenance; subsets.len()];
        Self { subsets, provenance, warnings: Vec::new(), diagnostics: None }
    }
}

/// When the MAS is run during learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// After every selection, on the partial subset.
    PerSelection,
    /// Once per completed subset; intermediate selections earn 0.
    PerEpisode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTiers {
    pub max: f64,
    pub human_near_max: f64,
    pub robot_near_max: f64,
    pub punish: f64,
}

impl Default for RewardTiers {
    fn default() -> Self {
        Self { max: 100.0, human_near_max: 5.0, robot_near_max: 1.0, punish: -100.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningConfig {
    pub gamma: f64,
    /// α(j) = alpha0 · alpha_decay^j
    pub alpha0: f64,
    pub alpha_decay: f64,
    /// Boltzmann temperature kT.
    pub temperature: f64,
    pub rewards: RewardTiers,
    /// Fraction of the reachable maximum that counts as "nearly maximum".
    pub near_max_threshold: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub run_mode: RunMode,
    /// Replaces the tiered reward with a constant.
    pub constant_reward: Option<f64>,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            alpha0: 0.1,
            alpha_decay: 0.9,
            temperature: 10.0,
            rewards: RewardTiers::default(),
            near_max_threshold: 0.8,
            epsilon: 1e-4,
            max_iterations: 1000,
            seed: 0,
            run_mode: RunMode::PerSelection,
            constant_reward: None,
        }
    }
}

impl LearningConfig {
    pub fn alpha(&self, iteration: usize) -> f64 {
        self.alpha0 * self.alpha_decay.powi(iteration as i32)
    }

    pub fn validate(&self) -> Result<(), ExplorerError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ExplorerError::InvalidConfig("gamma must be in (0, 1]"));
        }
        if !(self.temperature > 0.0) {
            return Err(ExplorerError::InvalidConfig("temperature must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(ExplorerError::InvalidConfig("epsilon must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(ExplorerError::InvalidConfig("max_iterations must be positive"));
        }
        Ok(())
    }
}

/// Tiered reward. `reachable` is the best per-run coverage each agent can
/// attain.
pub fn coverage_reward(coverage: AgentCoverage, reachable: AgentCoverage, config: &LearningConfig) -> f64 {
    if let Some(r) = config.constant_reward {
        return r;
    }
    const TOL: f64 = 1e-12;
    let tiers = &config.rewards;
    if coverage.human + TOL >= reachable.human && coverage.robot + TOL >= reachable.robot {
        return tiers.max;
    }
    let thr = config.near_max_threshold;
    let mut r = 0.0;
    let mut any = false;
    if coverage.human + TOL >= thr * reachable.human {
        r += tiers.human_near_max;
        any = true;
    }
    if coverage.robot + TOL >= thr * reachable.robot {
        r += tiers.robot_near_max;
        any = true;
    }
    if any {
        r
    } else {
        tiers.punish
    }
}

/// Splits a manual-config line at top-level commas and parses each belief.
pub fn parse_subset_line(line: &str) -> Result<BeliefSubset, UnknownBelief> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&line[start..]);
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<ControllableBelief>, _>>()
        .map(BeliefSubset::new)
}

/// Parses a manual-config file: one subset per line, `#` comments. Invalid
/// entries are skipped with a warning naming the line.
pub fn manual_subsets(text: &str) -> StrategyResult {
    let mut subsets = Vec::new();
    let mut warnings = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match parse_subset_line(line).map_err(|e| e.to_string()).and_then(|s| {
            s.validate().map_err(|e| e.to_string())?;
            Ok(s)
        }) {
            Ok(s) => subsets.push(s),
            Err(e) => warnings.push(format!("line {}: {e}; entry skipped", n + 1)),
        }
    }
    if subsets.is_empty() {
        warnings.push("no subsets in manual config".into());
    }
    let mut res = StrategyResult::new(subsets, Provenance::Manual);
    res.warnings = warnings;
    res
}

/// One grouped draw: leg count (unless fixed), boredom, then one GPL
/// combination per requested leg, each uniform within its group.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, legs: Option<u8>) -> BeliefSubset {
    let k = legs.unwrap_or_else(|| rng.gen_range(1..=MAX_LEGS));
    let mut v = vec![ControllableBelief::LegsRequested(k)];
    v.push(if rng.gen_bool(0.5) { ControllableBelief::Bored } else { ControllableBelief::NotBored });
    for leg in 1..=k {
        v.push(ControllableBelief::Gpl { leg, triple: SensorTriple::from_code(rng.gen_range(0..8)) });
    }
    BeliefSubset::new(v)
}

pub fn random_subsets(n: usize, seed: u64) -> Result<StrategyResult, ExplorerError> {
    if n == 0 {
        return Err(ExplorerError::ZeroCount);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = (0..n).map(|_| random_subset(&mut rng, None)).collect();
    Ok(StrategyResult::new(subsets, Provenance::Random))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(human: f64, robot: f64) -> AgentCoverage {
        AgentCoverage { human, robot }
    }

    #[test]
    fn reward_tiers() {
        let c = LearningConfig::default();
        let full = cov(1.0, 1.0);
        assert_eq!(coverage_reward(cov(1.0, 1.0), full, &c), 100.0);
        assert_eq!(coverage_reward(cov(0.85, 0.5), full, &c), 5.0);
        assert_eq!(coverage_reward(cov(0.5, 0.85), full, &c), 1.0);
        assert_eq!(coverage_reward(cov(0.9, 0.9), full, &c), 6.0);
        assert_eq!(coverage_reward(cov(0.1, 0.1), full, &c), -100.0);
        let scaled = cov(0.2, 0.5);
        assert_eq!(coverage_reward(cov(0.2, 0.5), scaled, &c), 100.0);
        assert_eq!(coverage_reward(cov(0.17, 0.1), scaled, &c), 5.0);
    }

    #[test]
    fn alpha_schedule() {
        let c = LearningConfig::default();
        assert_eq!(c.alpha(0), 0.1);
        assert!((c.alpha(1) - 0.09).abs() < 1e-15);
        assert!((1..50).all(|j| c.alpha(j) < c.alpha(j - 1)));
    }

    #[test]
    fn config_validation() {
        assert!(LearningConfig::default().validate().is_ok());
        let bad = |f: fn(&mut LearningConfig)| {
            let mut c = LearningConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.gamma = 0.0));
        assert!(bad(|c| c.gamma = 1.5));
        assert!(bad(|c| c.temperature = 0.0));
        assert!(bad(|c| c.epsilon = 0.0));
        assert!(!bad(|c| c.epsilon = f64::INFINITY));
    }

    #[test]
    fn manual_file() {
        let text = "# header\nlegs_requested(1), not_bored, gpl(1,1,1,1)\n\nlegs_requested(1), bored, not_bored, gpl(1,1,1,1)\nlegs_requested(1), sleepy\n";
        let r = manual_subsets(text);
        assert_eq!(r.subsets.len(), 1);
        assert_eq!(r.warnings.len(), 2);
        assert!(r.warnings[0].starts_with("line 4"));
        assert!(r.warnings[1].contains("sleepy"));
        let empty = manual_subsets("");
        assert!(empty.subsets.is_empty() && !empty.warnings.is_empty());
    }

    #[test]
    fn bundled_manual_config() {
        let r = manual_subsets(include_str!("../../assets/manual_subsets.txt"));
        assert_eq!(r.subsets.len(), 130);
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn random_is_valid_and_seeded() {
        let a = random_subsets(100, 7).unwrap();
        assert_eq!(a.subsets.len(), 100);
        assert!(a.subsets.iter().all(BeliefSubset::is_valid));
        assert_eq!(a, random_subsets(100, 7).unwrap());
        assert_ne!(a.subsets, random_subsets(100, 8).unwrap().subsets);
        assert_eq!(random_subsets(0, 1), Err(ExplorerError::ZeroCount));
    }

    #[test]
    fn gpl_draws_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 10_000;
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[random_subset(&mut rng, Some(1)).gpl(1).unwrap().code()] += 1;
        }
        let expected = n as f64 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 7 degrees of freedom, p = 0.001
        assert!(chi2 < 24.32, "chi2 = {chi2}");
        for c in counts {
            assert!((c as f64 / n as f64 - 0.125).abs() < 0.02);
        }
    }
}
