use super::{CampaignError, CampaignOutcome, Generation};
use crate::testgen::{parse_concrete, ConcreteTest};
use crate::monitors::{aggregate, check_all, MonitorConfig, SuiteReport, TestResult};
use crate::sim::{CodeCoverageMap, SimLog, SimResult};
use std::fs;
use std::path::{Path, PathBuf};

fn write(path: PathBuf, contents: &str) -> Result<(), CampaignError> {
    fs::write(&path, contents).map_err(|e| CampaignError::stage("write", None, format!("{}: {e}", path.display())))
}

fn mkdir(path: &Path) -> Result<(), CampaignError> {
    fs::create_dir_all(path).map_err(|e| CampaignError::stage("write", None, format!("{}: {e}", path.display())))
}

/// Writes one file per test under `abstract/`, `concrete/`, `logs/` and
/// `coverage/`, plus the suite report, summaries and learning diagnostics.
pub fn write_artifacts(dir: &Path, outcome: &CampaignOutcome) -> Result<(), CampaignError> {
    write_generation(dir, &outcome.generation)?;
    let ids: Vec<&str> = outcome.generation.tests.iter().map(|t| t.id.as_str()).collect();
    write_simulations(dir, &ids, &outcome.simulations)?;
    let r = &outcome.report;
    write(dir.join("report.csv"), &r.to_csv())?;
    write(dir.join("summary.csv"), &r.summary_csv())?;
    write(dir.join("summary.txt"), &r.summary_table())?;
    write(dir.join("sorted_coverage.csv"), &r.sorted_coverage_csv())?;
    write(dir.join("suite_coverage.tsv"), &r.suite_coverage.to_text())?;
    Ok(())
}

/// `abstract/` and `concrete/` files, warnings, subsets and learning
/// diagnostics.
pub fn write_generation(dir: &Path, g: &Generation) -> Result<(), CampaignError> {
    for sub in ["abstract", "concrete"] {
        mkdir(&dir.join(sub))?;
    }
    for t in &g.tests {
        write(dir.join("abstract").join(format!("{}.txt", t.id)), &t.abstract_test.to_text())?;
        write(dir.join("concrete").join(format!("{}.txt", t.id)), &t.concrete.to_text())?;
    }
    let warnings: String = g.warnings.iter().map(|w| format!("{w}\n")).collect();
    write(dir.join("warnings.txt"), &warnings)?;
    if !g.subsets.is_empty() {
        let subsets: String = g.subsets.iter().map(|s| format!("{}\n", s.to_line())).collect();
        write(dir.join("subsets.txt"), &subsets)?;
    }
    if let Some(l) = &g.learning {
        write(dir.join("learning.csv"), &l.to_csv())?;
        write(dir.join("qtable.csv"), &l.qtable.to_csv())?;
    }
    Ok(())
}

/// `logs/` and `coverage/` files, one per id.
pub fn write_simulations(dir: &Path, ids: &[&str], sims: &[SimResult]) -> Result<(), CampaignError> {
    for sub in ["logs", "coverage"] {
        mkdir(&dir.join(sub))?;
    }
    for (id, sim) in ids.iter().zip(sims) {
        write(dir.join("logs").join(format!("{id}.tsv")), &sim.log.to_text())?;
        write(dir.join("coverage").join(format!("{id}.tsv")), &sim.coverage.to_text())?;
    }
    Ok(())
}

fn ids_with_suffix(dir: &Path, suffix: &str) -> Result<Vec<String>, CampaignError> {
    let mut ids: Vec<String> = fs::read_dir(dir)
        .map_err(|e| CampaignError::stage("read", None, format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str()?.strip_suffix(suffix).map(str::to_string))
        .collect();
    ids.sort();
    Ok(ids)
}

/// Concrete tests in `dir`, by file stem, in file-name order.
pub fn read_concrete_dir(dir: &Path) -> Result<Vec<(String, ConcreteTest)>, CampaignError> {
    ids_with_suffix(dir, ".txt")?
        .into_iter()
        .map(|id| {
            let path = dir.join(format!("{id}.txt"));
            let text = fs::read_to_string(&path).map_err(|e| CampaignError::stage("read", Some(&id), format!("{}: {e}", path.display())))?;
            let t = parse_concrete(&text).map_err(|e| CampaignError::stage("read", Some(&id), e))?;
            Ok((id, t))
        })
        .collect()
}

/// Rebuilds a suite report from the `logs/` and `coverage/` files of a
/// campaign directory, re-running the monitors on each log. Tests are taken
/// in file-name order.
pub fn read_report_dir(dir: &Path, name: &str, monitors: &MonitorConfig) -> Result<SuiteReport, CampaignError> {
    let logs = dir.join("logs");
    let read_err = |p: &Path, e: std::io::Error| CampaignError::stage("report", None, format!("{}: {e}", p.display()));
    let ids = ids_with_suffix(&logs, ".tsv")?;
    let results = ids
        .iter()
        .map(|id| {
            let log_path = logs.join(format!("{id}.tsv"));
            let cov_path = dir.join("coverage").join(format!("{id}.tsv"));
            let text = fs::read_to_string(&log_path).map_err(|e| read_err(&log_path, e))?;
            let log = SimLog::parse(&text).map_err(|e| CampaignError::stage("report", Some(id), e))?;
            let cov = fs::read_to_string(&cov_path).map_err(|e| read_err(&cov_path, e))?;
            let coverage = CodeCoverageMap::parse(&cov).map_err(|e| CampaignError::stage("report", Some(id), e))?;
            Ok(TestResult { id: id.clone(), coverage, outcomes: check_all(&log, monitors), plan_coverage: None })
        })
        .collect::<Result<Vec<_>, CampaignError>>()?;
    Ok(aggregate(name, &results))
}
