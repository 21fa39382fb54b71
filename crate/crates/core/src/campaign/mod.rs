//! End-to-end campaigns: belief subsets from one strategy become MAS runs,
//! abstract and concrete tests, simulations and a monitored suite report.

mod artifacts;

pub use artifacts::{read_concrete_dir, read_report_dir, write_artifacts, write_generation, write_simulations};

use crate::agent::PlanCoverage;
use crate::explorer::{learn, manual_subsets, random_subsets, LearningConfig, LearningDiagnostics, ScenarioModel};
use crate::monitors::{aggregate, check_all, MonitorConfig, SuiteReport, TestResult};
use crate::scenario::{run_beliefs, valid_subsets_with_legs, AgentCoverage, BeliefSubset, ControllableBelief, SensorTriple, MAX_LEGS};
use crate::sim::{run_simulation, FaultConfig, SimResult};
use crate::testgen::{concretize, sub_seed, trace_to_abstract, AbstractAction, AbstractTest, ConcreteTest, ParamRangeTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_MANUAL: &str = include_str!("../../assets/manual_subsets.txt");

/// Tests per suite when no size is given, except for the manual strategy.
pub const DEFAULT_SUITE_SIZE: usize = 100;
/// Longest pseudorandom baseline sequence.
pub const BASELINE_MAX_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Manual,
    Random,
    Rl,
    Baseline,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Manual, Strategy::Random, Strategy::Rl, Strategy::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Manual => "manual",
            Strategy::Random => "random",
            Strategy::Rl => "rl",
            Strategy::Baseline => "baseline",
        }
    }

    /// Keeps the seed streams of different strategies apart.
    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "unconstrained-pseudorandom-baseline" {
            return Ok(Strategy::Baseline);
        }
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected manual, random, rl or baseline)"))
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign config: {0}")]
    Config(String),
    #[error("{stage} failed{}: {message}", test_id.as_ref().map(|t| format!(" for {t}")).unwrap_or_default())]
    Stage { stage: &'static str, test_id: Option<String>, message: String },
}

impl CampaignError {
    pub fn stage(stage: &'static str, test_id: Option<&str>, message: impl fmt::Display) -> Self {
        CampaignError::Stage { stage, test_id: test_id.map(str::to_string), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub strategy: Strategy,
    /// `None`: every manual entry with its expansions, or
    /// [`DEFAULT_SUITE_SIZE`] for the other strategies.
    pub suite_size: Option<usize>,
    pub seed: u64,
    pub ranges: ParamRangeTable,
    pub faults: FaultConfig,
    pub monitors: MonitorConfig,
    pub learning: LearningConfig,
    /// Manual subset file contents.
    pub manual: String,
    /// Manual entries (by position) concretized more than once.
    pub manual_expanded: Vec<usize>,
    /// Concretizations of each expanded manual entry.
    pub manual_expansions: usize,
    pub output: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Rl,
            suite_size: None,
            seed: 1,
            ranges: ParamRangeTable::defaults(),
            faults: FaultConfig::default(),
            monitors: MonitorConfig::default(),
            learning: LearningConfig::default(),
            manual: DEFAULT_MANUAL.to_string(),
            manual_expanded: vec![0, 1],
            manual_expansions: 5,
            output: None,
        }
    }
}

impl CampaignConfig {
    pub fn for_strategy(strategy: Strategy, seed: u64) -> Self {
        Self { strategy, seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.suite_size == Some(0) {
            return Err(CampaignError::Config("suite size must be at least 1".into()));
        }
        if self.manual_expansions == 0 {
            return Err(CampaignError::Config("manual expansions must be at least 1".into()));
        }
        self.faults.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        self.learning.validate().map_err(|e| CampaignError::Config(e.to_string()))?;
        Ok(())
    }
}

/// One generated test before execution.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedTest {
    pub id: String,
    pub abstract_test: AbstractTest,
    pub concrete: ConcreteTest,
    pub plan_coverage: Option<AgentCoverage>,
}

#[derive(Debug, Clone)]
pub struct Generation {
    pub tests: Vec<GeneratedTest>,
    pub warnings: Vec<String>,
    pub learning: Option<LearningDiagnostics>,
    /// Subsets extracted or chosen, before cycling to the suite size.
    pub subsets: Vec<BeliefSubset>,
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub generation: Generation,
    pub simulations: Vec<SimResult>,
    pub results: Vec<TestResult>,
    pub report: SuiteReport,
}

pub fn test_id(strategy: Strategy, index: usize) -> String {
    format!("{strategy}-{index:04}")
}

/// Seed of test `index` in stream `stream` of a campaign.
fn derived_seed(seed: u64, strategy: Strategy, stream: u64, index: usize) -> u64 {
    let base = seed ^ strategy.salt().wrapping_mul(0xD1B5_4A32_D192_ED03) ^ stream.wrapping_mul(0xA24B_AED4_963E_E407);
    sub_seed(base, index + 1)
}

const CONCRETIZE: u64 = 1;
const SIMULATE: u64 = 2;
const BASELINE: u64 = 3;

/// MAS run of `subset`, mapped to an abstract test.
pub fn abstract_from_subset(subset: &BeliefSubset, id: &str) -> (AbstractTest, AgentCoverage, Vec<String>) {
    let run = run_beliefs(subset.beliefs());
    let (mut t, warnings) = trace_to_abstract(&run.trace);
    t.subset = Some(subset.clone());
    t.trace_id = id.to_string();
    let warnings = warnings.into_iter().map(|w| format!("{id}: {w}")).collect();
    (t, run.agent_coverage(), warnings)
}

/// The 10 commands the pseudorandom baseline draws from.
pub fn baseline_alphabet() -> Vec<AbstractAction> {
    let set = |key: &str, value| AbstractAction::SetParam { key: key.into(), value };
    vec![
        AbstractAction::Tell("leg".into()),
        AbstractAction::Tell("humanReady".into()),
        AbstractAction::ReceiveSignal,
        set("gaze", 0),
        set("gaze", 1),
        set("pressure", 0),
        set("pressure", 1),
        set("location", 0),
        set("location", 1),
        set("walk_away", 1),
    ]
}

/// Length uniform in `1..=BASELINE_MAX_LEN`, commands uniform over the
/// alphabet, with no model in the loop.
pub fn baseline_test<R: Rng + ?Sized>(rng: &mut R) -> AbstractTest {
    let alphabet = baseline_alphabet();
    let len = rng.gen_range(1..=BASELINE_MAX_LEN);
    AbstractTest::new((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone()).collect())
}

fn subset_tests(
    config: &CampaignConfig,
    subsets: &[BeliefSubset],
    plan: &[(usize, usize)],
    warnings: &mut Vec<String>,
) -> Result<Vec<GeneratedTest>, CampaignError> {
    let strategy = config.strategy;
    // one MAS run per distinct subset position
    let runs: Vec<_> = subsets.par_iter().map(|s| abstract_from_subset(s, "")).collect();
    plan.iter()
        .enumerate()
        .map(|(index, &(pos, _))| {
            let id = test_id(strategy, index);
            let (proto, coverage, w) = &runs[pos];
            warnings.extend(w.iter().map(|w| format!("{id}{w}")));
            let mut abstract_test = proto.clone();
            abstract_test.trace_id = id.clone();
            let concrete = concretize(&abstract_test, &config.ranges, derived_seed(config.seed, strategy, CONCRETIZE, index))
                .map_err(|e| CampaignError::stage("concretize", Some(&id), e))?;
            Ok(GeneratedTest { id, abstract_test, concrete, plan_coverage: Some(*coverage) })
        })
        .collect()
}

/// Position in `subsets` of each test, and its copy number. Suites larger
/// than the subset list cycle through it.
fn cycle_plan(n_subsets: usize, size: usize) -> Vec<(usize, usize)> {
    (0..size).map(|i| (i % n_subsets, i / n_subsets)).collect()
}

/// The test-generation stage: subsets, MAS runs, abstract and concrete tests.
pub fn generate(config: &CampaignConfig) -> Result<Generation, CampaignError> {
    config.validate()?;
    let mut warnings = Vec::new();
    let (subsets, plan, learning) = match config.strategy {
        Strategy::Baseline => {
            let size = config.suite_size.unwrap_or(DEFAULT_SUITE_SIZE);
            let tests = (0..size)
                .map(|index| {
                    let id = test_id(Strategy::Baseline, index);
                    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(config.seed, Strategy::Baseline, BASELINE, index));
                    let mut abstract_test = baseline_test(&mut rng);
                    abstract_test.trace_id = id.clone();
                    let seed = derived_seed(config.seed, Strategy::Baseline, CONCRETIZE, index);
                    let concrete = concretize(&abstract_test, &config.ranges, seed)
                        .map_err(|e| CampaignError::stage("concretize", Some(&id), e))?;
                    Ok(GeneratedTest { id, abstract_test, concrete, plan_coverage: None })
                })
                .collect::<Result<_, CampaignError>>()?;
            return Ok(Generation { tests, warnings, learning: None, subsets: Vec::new() });
        }
        Strategy::Manual => {
            let r = manual_subsets(&config.manual);
            warnings.extend(r.warnings);
            if r.subsets.is_empty() {
                return Err(CampaignError::stage("explore", None, "manual file holds no valid subset"));
            }
            let mut plan = Vec::new();
            for pos in 0..r.subsets.len() {
                let copies = if config.manual_expanded.contains(&pos) { config.manual_expansions } else { 1 };
                plan.extend((0..copies).map(|c| (pos, c)));
            }
            if let Some(size) = config.suite_size {
                plan = (0..size).map(|i| plan[i % plan.len()]).collect();
            }
            (r.subsets, plan, None)
        }
        Strategy::Random => {
            let size = config.suite_size.unwrap_or(DEFAULT_SUITE_SIZE);
            let r = random_subsets(size, config.seed).map_err(|e| CampaignError::stage("explore", None, e))?;
            let plan = cycle_plan(r.subsets.len(), size);
            (r.subsets, plan, None)
        }
        Strategy::Rl => {
            let size = config.suite_size.unwrap_or(DEFAULT_SUITE_SIZE);
            let learning = LearningConfig { seed: config.seed, ..config.learning.clone() };
            let r = learn(&ScenarioModel, &learning).map_err(|e| CampaignError::stage("learn", None, e))?;
            warnings.extend(r.warnings);
            if r.subsets.is_empty() {
                return Err(CampaignError::stage("learn", None, "policy extraction produced no subset"));
            }
            let plan = cycle_plan(r.subsets.len(), size);
            (r.subsets, plan, r.diagnostics)
        }
    };
    let tests = subset_tests(config, &subsets, &plan, &mut warnings)?;
    Ok(Generation { tests, warnings, learning, subsets })
}

/// Simulates and monitors every test in parallel; results keep test order.
pub fn execute(config: &CampaignConfig, tests: &[GeneratedTest]) -> (Vec<SimResult>, Vec<TestResult>) {
    tests
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            let sim = run_simulation(&t.concrete, &config.faults, derived_seed(config.seed, config.strategy, SIMULATE, index));
            let result = TestResult {
                id: t.id.clone(),
                coverage: sim.coverage.clone(),
                outcomes: check_all(&sim.log, &config.monitors),
                plan_coverage: t.plan_coverage,
            };
            (sim, result)
        })
        .unzip()
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome, CampaignError> {
    let generation = generate(config)?;
    let (simulations, results) = execute(config, &generation.tests);
    let report = aggregate(config.strategy.name(), &results);
    let outcome = CampaignOutcome { generation, simulations, results, report };
    if let Some(dir) = &config.output {
        write_artifacts(dir, &outcome)?;
    }
    Ok(outcome)
}

/// Highest per-test code coverage (covered points) over every one-leg
/// subset and the all-ready four-leg subsets, concretized with `seed`.
pub fn brute_force_code_coverage_max(ranges: &ParamRangeTable, faults: &FaultConfig, seed: u64) -> Result<usize, CampaignError> {
    let mut subsets = valid_subsets_with_legs(1);
    for bored in [false, true] {
        let mut b = vec![ControllableBelief::LegsRequested(MAX_LEGS), if bored { ControllableBelief::Bored } else { ControllableBelief::NotBored }];
        b.extend((1..=MAX_LEGS).map(|leg| ControllableBelief::Gpl { leg, triple: SensorTriple::READY }));
        subsets.push(BeliefSubset::new(b));
    }
    subsets
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let id = format!("ceiling-{i:04}");
            let (t, _, _) = abstract_from_subset(s, &id);
            let c = concretize(&t, ranges, sub_seed(seed, i)).map_err(|e| CampaignError::stage("concretize", Some(&id), e))?;
            Ok(run_simulation(&c, faults, sub_seed(seed, i)).coverage.covered())
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

/// One row per report: max and mean coverage, diversity, verdict tallies,
/// and deltas against the first report.
pub fn compare(reports: &[SuiteReport]) -> Result<String, CampaignError> {
    if reports.len() < 2 {
        return Err(CampaignError::Config("compare needs at least two reports".into()));
    }
    let base = &reports[0];
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["strategy", "tests", "max_coverage", "mean_coverage", "diversity"].map(String::from).to_vec();
    for r in crate::monitors::Requirement::ALL {
        let r = r.to_string().to_lowercase();
        header.extend([format!("{r}_passed"), format!("{r}_failed"), format!("{r}_nc")]);
    }
    header.extend(["delta_max", "delta_mean", "delta_diversity"].map(String::from));
    let csv_err = |e: csv::Error| CampaignError::stage("compare", None, e);
    w.write_record(&header).map_err(csv_err)?;
    for r in reports {
        let mut row = vec![
            r.name.clone(),
            r.len().to_string(),
            format!("{:.4}", r.max_coverage()),
            format!("{:.4}", r.mean_coverage()),
            r.diversity().to_string(),
        ];
        for t in r.tallies {
            row.extend([t.passed.to_string(), t.failed.to_string(), t.not_checked.to_string()]);
        }
        row.extend([
            format!("{:.4}", r.max_coverage() - base.max_coverage()),
            format!("{:.4}", r.mean_coverage() - base.mean_coverage()),
            (r.diversity() as i64 - base.diversity() as i64).to_string(),
        ]);
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CampaignError::stage("compare", None, e))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Pointwise union of the plan coverage of each subset's MAS run.
pub fn suite_plan_coverage(subsets: &[BeliefSubset]) -> PlanCoverage {
    let mut union = PlanCoverage::default();
    for s in subsets {
        union.merge(&run_beliefs(s.beliefs()).coverage);
    }
    union
}

/// Simulates stand-alone concrete tests in parallel; test `i` uses
/// `sub_seed(seed, i)`.
pub fn simulate_all(tests: &[ConcreteTest], faults: &FaultConfig, seed: u64) -> Vec<SimResult> {
    tests.par_iter().enumerate().map(|(i, t)| run_simulation(t, faults, sub_seed(seed, i))).collect()
}
