use super::{AssertionOutcome, Requirement, Verdict};
use crate::scenario::AgentCoverage;
use crate::sim::CodeCoverageMap;
use std::collections::BTreeSet;

/// Everything measured for one executed test.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub id: String,
    pub coverage: CodeCoverageMap,
    pub outcomes: [AssertionOutcome; 4],
    /// Plan coverage of the MAS run the test came from; absent for tests
    /// not derived from the model.
    pub plan_coverage: Option<AgentCoverage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub id: String,
    pub covered: usize,
    pub total: usize,
    pub verdicts: [Verdict; 4],
    pub triggers: [usize; 4],
    pub plan_coverage: Option<AgentCoverage>,
}

impl ReportRow {
    pub fn percent(&self) -> f64 {
        100.0 * self.covered as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub not_checked: usize,
}

impl Tally {
    pub fn add(&mut self, v: Verdict) {
        match v {
            Verdict::Passed => self.passed += 1,
            Verdict::Failed => self.failed += 1,
            Verdict::NotChecked => self.not_checked += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.passed + self.failed + self.not_checked
    }

    pub fn sum(self, o: Tally) -> Tally {
        Tally { passed: self.passed + o.passed, failed: self.failed + o.failed, not_checked: self.not_checked + o.not_checked }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub rows: Vec<ReportRow>,
    /// Indexed like [`Requirement::ALL`].
    pub tallies: [Tally; 4],
    /// Pointwise union of the per-test coverage maps.
    pub suite_coverage: CodeCoverageMap,
}

pub fn aggregate(name: &str, results: &[TestResult]) -> SuiteReport {
    let mut tallies = [Tally::default(); 4];
    let mut suite_coverage = CodeCoverageMap::default();
    let rows = results
        .iter()
        .map(|r| {
            for (t, o) in tallies.iter_mut().zip(&r.outcomes) {
                t.add(o.verdict);
            }
            suite_coverage = suite_coverage.union(&r.coverage);
            ReportRow {
                id: r.id.clone(),
                covered: r.coverage.covered(),
                total: r.coverage.total(),
                verdicts: r.outcomes.each_ref().map(|o| o.verdict),
                triggers: r.outcomes.each_ref().map(|o| o.triggers),
                plan_coverage: r.plan_coverage,
            }
        })
        .collect();
    SuiteReport { name: name.to_string(), rows, tallies, suite_coverage }
}

/// Number of runs of equal values in a sorted curve.
pub fn plateaus(sorted: &[f64]) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| w[0] != w[1]).count()
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

fn pct(x: f64) -> String {
    format!("{x:.4}")
}

impl SuiteReport {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn tally(&self, r: Requirement) -> Tally {
        self.tallies[r as usize]
    }

    pub fn max_coverage(&self) -> f64 {
        self.rows.iter().map(ReportRow::percent).fold(0.0, f64::max)
    }

    pub fn mean_coverage(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().map(ReportRow::percent).sum::<f64>() / self.rows.len() as f64
    }

    /// Distinct per-test coverage values.
    pub fn diversity(&self) -> usize {
        self.rows.iter().map(|r| r.covered).collect::<BTreeSet<_>>().len()
    }

    /// Per-test percentages, ascending.
    pub fn sorted_coverage(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(ReportRow::percent).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Concatenated rows, summed tallies.
    pub fn merge(&self, other: &SuiteReport) -> SuiteReport {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        let mut tallies = self.tallies;
        for (t, o) in tallies.iter_mut().zip(other.tallies) {
            *t = t.sum(o);
        }
        SuiteReport {
            name: self.name.clone(),
            rows,
            tallies,
            suite_coverage: self.suite_coverage.union(&other.suite_coverage),
        }
    }

    /// One row per test.
    pub fn to_csv(&self) -> String {
        let header = ["test_id", "code_coverage", "covered_points", "total_points", "r1", "r2", "r3", "r4", "human_plans", "robot_plans"];
        let rows = self.rows.iter().map(|r| {
            let mut v = vec![r.id.clone(), pct(r.percent()), r.covered.to_string(), r.total.to_string()];
            v.extend(r.verdicts.iter().map(|x| x.to_string()));
            match r.plan_coverage {
                Some(c) => v.extend([pct(100.0 * c.human), pct(100.0 * c.robot)]),
                None => v.extend([String::new(), String::new()]),
            }
            v
        });
        csv_string(std::iter::once(header.map(String::from).to_vec()).chain(rows))
    }

    /// Reads the output of [`to_csv`](Self::to_csv). Per-point coverage is
    /// not part of the CSV, so `suite_coverage` comes back empty.
    pub fn from_csv(name: &str, text: &str) -> Result<SuiteReport, String> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        let mut tallies = [Tally::default(); 4];
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let line = n + 2;
            if rec.len() != 10 {
                return Err(format!("line {line}: expected 10 fields, found {}", rec.len()));
            }
            let int = |i: usize| rec[i].parse::<usize>().map_err(|_| format!("line {line}: bad count `{}`", &rec[i]));
            let verdict = |i: usize| match &rec[i] {
                "passed" => Ok(Verdict::Passed),
                "failed" => Ok(Verdict::Failed),
                "nc" => Ok(Verdict::NotChecked),
                v => Err(format!("line {line}: bad verdict `{v}`")),
            };
            let verdicts = [verdict(4)?, verdict(5)?, verdict(6)?, verdict(7)?];
            for (t, v) in tallies.iter_mut().zip(verdicts) {
                t.add(v);
            }
            let frac = |i: usize| -> Result<Option<f64>, String> {
                match &rec[i] {
                    "" => Ok(None),
                    v => v.parse::<f64>().map(|x| Some(x / 100.0)).map_err(|_| format!("line {line}: bad percentage `{v}`")),
                }
            };
            let plan_coverage = match (frac(8)?, frac(9)?) {
                (Some(human), Some(robot)) => Some(AgentCoverage { human, robot }),
                _ => None,
            };
            let total = int(3)?;
            if total == 0 {
                return Err(format!("line {line}: total_points must be positive"));
            }
            rows.push(ReportRow {
                id: rec[0].to_string(),
                covered: int(2)?,
                total,
                verdicts,
                triggers: verdicts.map(|v| (v != Verdict::NotChecked) as usize),
                plan_coverage,
            });
        }
        Ok(SuiteReport { name: name.to_string(), rows, tallies, suite_coverage: CodeCoverageMap::default() })
    }

    /// Passed/Failed/NC per requirement.
    pub fn summary_csv(&self) -> String {
        let header = ["requirement", "passed", "failed", "not_checked"].map(String::from).to_vec();
        let rows = Requirement::ALL.iter().map(|r| {
            let t = self.tally(*r);
            vec![r.to_string(), t.passed.to_string(), t.failed.to_string(), t.not_checked.to_string()]
        });
        csv_string(std::iter::once(header).chain(rows))
    }

    /// One line per suite, requirements as columns, `passed/failed/nc`.
    pub fn summary_table(&self) -> String {
        let mut s = format!("{:<12}", "method");
        for r in Requirement::ALL {
            s.push_str(&format!(" {:>12}", r.to_string()));
        }
        s.push('\n');
        s.push_str(&format!("{:<12}", self.name));
        for r in Requirement::ALL {
            let t = self.tally(r);
            s.push_str(&format!(" {:>12}", format!("{}/{}/{}", t.passed, t.failed, t.not_checked)));
        }
        s.push('\n');
        s
    }

    /// `rank,code_coverage` in ascending order for step plots.
    pub fn sorted_coverage_csv(&self) -> String {
        let header = vec!["rank".to_string(), "code_coverage".to_string()];
        let rows = self.sorted_coverage().into_iter().enumerate().map(|(i, c)| vec![(i + 1).to_string(), pct(c)]);
        csv_string(std::iter::once(header).chain(rows))
    }
}
