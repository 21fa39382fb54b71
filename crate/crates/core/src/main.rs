//! Command-line campaign runner. Exits nonzero only when a stage errors;
//! failed assertion verdicts are results, not errors.

use anyhow::{bail, Context, Result};
use bdi_testgen::campaign::{
    compare, generate, read_concrete_dir, read_report_dir, run_campaign, simulate_all, write_generation, write_simulations,
    CampaignConfig, Strategy,
};
use bdi_testgen::explorer::{learn, LearningConfig, RunMode, ScenarioModel};
use bdi_testgen::monitors::{MonitorConfig, SuiteReport};
use bdi_testgen::sim::{FaultConfig, SimTime};
use bdi_testgen::testgen::ParamRangeTable;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "bdi-testgen", version, about = "Coverage-directed test generation with BDI agent models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate abstract and concrete tests under one strategy.
    Generate {
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate every concrete test in a directory.
    Simulate {
        /// Directory of concrete tests, or a campaign directory with `concrete/`.
        #[arg(long)]
        tests: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        faults: Option<PathBuf>,
    },
    /// Monitor the logs of a campaign directory and write its report.
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// Report name; defaults to the directory name.
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        monitors: MonitorArgs,
        /// Output CSV; defaults to `<dir>/report.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two or more report CSVs. The first is the reference for deltas.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Q-learning alone and write the extracted subsets and diagnostics.
    Learn {
        #[command(flatten)]
        learning: LearningArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: generate, simulate, monitor and report.
    Campaign {
        #[command(flatten)]
        suite: SuiteArgs,
        #[command(flatten)]
        monitors: MonitorArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SuiteArgs {
    /// manual, random, rl, or baseline (alias unconstrained-pseudorandom-baseline).
    #[arg(long, default_value = "rl")]
    strategy: Strategy,
    #[arg(long)]
    suite_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    ranges: Option<PathBuf>,
    #[arg(long)]
    faults: Option<PathBuf>,
    /// Manual subset file.
    #[arg(long)]
    manual: Option<PathBuf>,
    #[command(flatten)]
    learning: LearningArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunModeArg {
    PerSelection,
    PerEpisode,
}

#[derive(Args)]
struct LearningArgs {
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_enum)]
    run_mode: Option<RunModeArg>,
}

impl LearningArgs {
    fn config(&self, seed: u64) -> LearningConfig {
        let mut c = LearningConfig { seed, ..Default::default() };
        if let Some(n) = self.max_iterations {
            c.max_iterations = n;
        }
        if let Some(t) = self.temperature {
            c.temperature = t;
        }
        match self.run_mode {
            Some(RunModeArg::PerSelection) => c.run_mode = RunMode::PerSelection,
            Some(RunModeArg::PerEpisode) => c.run_mode = RunMode::PerEpisode,
            None => {}
        }
        c
    }
}

#[derive(Args)]
struct MonitorArgs {
    /// R1 release deadline, s.
    #[arg(long)]
    release_threshold: Option<f64>,
    /// R3 minimum hand distance, m.
    #[arg(long)]
    safe_distance: Option<f64>,
}

impl MonitorArgs {
    fn config(&self) -> MonitorConfig {
        let mut c = MonitorConfig::default();
        if let Some(t) = self.release_threshold {
            c.release_threshold = SimTime::from_secs(t);
        }
        if let Some(d) = self.safe_distance {
            c.safe_distance = d;
        }
        c
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))
}

fn load_faults(path: Option<&Path>) -> Result<FaultConfig> {
    match path {
        Some(p) => FaultConfig::parse(&read(p)?).with_context(|| format!("config: {}", p.display())),
        None => Ok(FaultConfig::default()),
    }
}

impl SuiteArgs {
    fn config(&self, monitors: MonitorConfig, out: &Path) -> Result<CampaignConfig> {
        let mut c = CampaignConfig::for_strategy(self.strategy, self.seed);
        c.suite_size = self.suite_size;
        if let Some(p) = &self.ranges {
            c.ranges = ParamRangeTable::parse(&read(p)?).with_context(|| format!("config: {}", p.display()))?;
        }
        c.faults = load_faults(self.faults.as_deref())?;
        if let Some(p) = &self.manual {
            c.manual = read(p)?;
        }
        c.learning = self.learning.config(self.seed);
        c.monitors = monitors;
        c.output = Some(out.to_path_buf());
        c.validate()?;
        Ok(c)
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("write: {}", path.display()))
}

fn dir_name(dir: &Path) -> String {
    dir.file_name().and_then(|n| n.to_str()).unwrap_or("suite").to_string()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { suite, out } => {
            let config = suite.config(MonitorConfig::default(), &out)?;
            let g = generate(&config)?;
            write_generation(&out, &g)?;
            for w in &g.warnings {
                eprintln!("warning: {w}");
            }
            println!("generated {} {} tests in {}", g.tests.len(), config.strategy, out.display());
        }
        Command::Simulate { tests, out, seed, faults } => {
            let faults = load_faults(faults.as_deref())?;
            let nested = tests.join("concrete");
            let dir = if nested.is_dir() { nested } else { tests };
            let loaded = read_concrete_dir(&dir)?;
            if loaded.is_empty() {
                bail!("simulate: no concrete tests in {}", dir.display());
            }
            let (ids, concrete): (Vec<String>, Vec<_>) = loaded.into_iter().unzip();
            let sims = simulate_all(&concrete, &faults, seed);
            let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
            write_simulations(&out, &ids, &sims)?;
            let capped = sims.iter().filter(|s| s.capped()).count();
            println!("simulated {} tests into {} ({capped} hit the time cap)", sims.len(), out.display());
        }
        Command::Report { dir, name, monitors, out } => {
            let name = name.unwrap_or_else(|| dir_name(&dir));
            let report = read_report_dir(&dir, &name, &monitors.config())?;
            let out = out.unwrap_or_else(|| dir.join("report.csv"));
            write(&out, &report.to_csv())?;
            print!("{}", report.summary_table());
        }
        Command::Compare { reports, out } => {
            let loaded = reports
                .iter()
                .map(|p| {
                    let name = match p.file_stem().and_then(|s| s.to_str()) {
                        Some("report") => p.parent().map(dir_name).unwrap_or_else(|| "report".into()),
                        Some(s) => s.to_string(),
                        None => "report".into(),
                    };
                    SuiteReport::from_csv(&name, &read(p)?).map_err(|e| anyhow::anyhow!("compare: {}: {e}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let table = compare(&loaded)?;
            match out {
                Some(p) => write(&p, &table)?,
                None => print!("{table}"),
            }
        }
        Command::Learn { learning, seed, out } => {
            let config = learning.config(seed);
            let r = learn(&ScenarioModel, &config)?;
            fs::create_dir_all(&out).with_context(|| format!("write: {}", out.display()))?;
            let subsets: String = r.subsets.iter().map(|s| format!("{}\n", s.to_line())).collect();
            write(&out.join("subsets.txt"), &subsets)?;
            if let Some(d) = &r.diagnostics {
                write(&out.join("learning.csv"), &d.to_csv())?;
                write(&out.join("qtable.csv"), &d.qtable.to_csv())?;
                println!("{} iterations, converged: {}, {} subsets", d.iterations.len(), d.converged, r.subsets.len());
            }
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Campaign { suite, monitors, out } => {
            let config = suite.config(monitors.config(), &out)?;
            let outcome = run_campaign(&config)?;
            for w in &outcome.generation.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", outcome.report.summary_table());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
