use std::fmt;

use serde::Serialize;

/// Rounds to 9 significant digits so reports are stable across runs.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// One checked instance. `key` names the instance well enough to rerun it.
#[derive(Clone, Debug, Serialize)]
pub struct Instance {
    pub key: String,
    pub status: Status,
    pub residual: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Noted {
    pub instance: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub suite: String,
    pub status: Status,
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub worst_residual: f64,
    pub wall_time_s: f64,
    pub failures: Vec<Noted>,
    pub undecided: Vec<Noted>,
}

impl SuiteEntry {
    /// Aggregates instances, sorted by key.
    pub fn from_instances(suite: &str, mut items: Vec<Instance>, wall_time_s: f64) -> SuiteEntry {
        items.sort_by(|a, b| a.key.cmp(&b.key));
        let count = |s: Status| items.iter().filter(|i| i.status == s).count();
        let (pass, fail, inconclusive) = (
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Inconclusive),
        );
        let worst = items
            .iter()
            .map(|i| i.residual)
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max);
        let noted = |s: Status| -> Vec<Noted> {
            items
                .iter()
                .filter(|i| i.status == s)
                .map(|i| Noted {
                    instance: i.key.clone(),
                    detail: i.detail.clone(),
                })
                .collect()
        };
        let status = if fail > 0 {
            Status::Fail
        } else if inconclusive > 0 {
            Status::Inconclusive
        } else {
            Status::Pass
        };
        SuiteEntry {
            suite: suite.to_string(),
            status,
            instances: items.len(),
            pass,
            fail,
            inconclusive,
            worst_residual: sig9(worst),
            wall_time_s: sig9(wall_time_s),
            failures: noted(Status::Fail),
            undecided: noted(Status::Inconclusive),
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<13} {:<20} instances {:>5}  pass {:>5}  fail {:>3}  inconclusive {:>3}  worst residual {:.8e}  {:.2}s",
            self.status.to_string(),
            self.suite,
            self.instances,
            self.pass,
            self.fail,
            self.inconclusive,
            self.worst_residual,
            self.wall_time_s
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub max_size: usize,
    pub max_product: usize,
    pub suites: Vec<SuiteEntry>,
}

impl VerificationReport {
    pub fn any_failed(&self) -> bool {
        self.suites.iter().any(|s| s.fail > 0)
    }
}
