use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value as Json};

/// A usage, parse or type error; exits with status 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

pub type CmdResult = Result<SuiteReport, Failure>;

#[derive(Clone, Debug, Serialize)]
pub struct LawFailure {
    pub law: String,
    pub witness: Json,
}

/// Common report shape. Command-specific fields go in `extra` and are
/// flattened into the top-level object.
#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<LawFailure>,
    pub seed: u64,
    pub wall_time_ms: u128,
    #[serde(flatten)]
    pub extra: Map<String, Json>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> SuiteReport {
        SuiteReport { suite: suite.into(), cases: 0, failures: vec![], seed, wall_time_ms: 0, extra: Map::new() }
    }

    pub fn fail(&mut self, law: impl Into<String>, witness: Json) {
        self.failures.push(LawFailure { law: law.into(), witness });
    }

    pub fn set(&mut self, key: &str, v: impl Serialize) {
        self.extra.insert(key.into(), serde_json::to_value(v).unwrap_or(Json::Null));
    }

    pub fn finish(mut self, started: Instant) -> SuiteReport {
        self.wall_time_ms = started.elapsed().as_millis();
        self
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
