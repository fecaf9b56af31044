use std::fmt::Write as _;
use std::time::Duration;

use plurality_core::{Ballot, BallotVector, CandidateId, Lottery, ScoreBoard};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::document::Loaded;

/// Everything one command produced: a human table and a machine record.
pub struct Report {
    pub command: &'static str,
    pub query: Value,
    pub result: Value,
    pub method: Option<String>,
    pub budget: Option<BudgetStatus>,
    pub table: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetStatus {
    pub limit: u64,
    pub exhausted: bool,
    /// Steps the search would have needed, as a decimal string.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub required: Option<String>,
}

impl Report {
    pub fn machine(&self, elapsed: Duration) -> String {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(self.command));
        obj.insert("query".into(), self.query.clone());
        obj.insert("result".into(), self.result.clone());
        if let Some(m) = &self.method {
            obj.insert("method".into(), json!(m));
        }
        if let Some(b) = &self.budget {
            obj.insert("budget".into(), serde_json::to_value(b).expect("plain struct"));
        }
        obj.insert("elapsed_ms".into(), json!(elapsed.as_millis() as u64));
        serde_json::to_string(&Value::Object(obj)).expect("json values serialize")
    }
}

pub fn ballot(l: &Loaded, b: Ballot) -> String {
    match b {
        Ballot::Vote(c) => l.name(c).to_string(),
        Ballot::Abstain => "⊥".to_string(),
    }
}

pub fn ballots(l: &Loaded, b: &BallotVector) -> String {
    let parts: Vec<String> = b.iter().map(|x| ballot(l, x)).collect();
    format!("({})", parts.join(","))
}

pub fn set(l: &Loaded, cs: &[CandidateId]) -> String {
    let parts: Vec<&str> = cs.iter().map(|&c| l.name(c)).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn names(l: &Loaded, cs: &[CandidateId]) -> Value {
    json!(cs.iter().map(|&c| l.name(c)).collect::<Vec<_>>())
}

pub fn scores_line(l: &Loaded, board: &ScoreBoard) -> String {
    let mut s = String::new();
    for (j, sc) in board.scores().iter().enumerate() {
        if j > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{}={sc}", l.names[j]);
    }
    s
}

pub fn scores_json(l: &Loaded, board: &ScoreBoard) -> Value {
    let mut obj = Map::new();
    for (j, &sc) in board.scores().iter().enumerate() {
        obj.insert(l.names[j].clone(), json!(sc));
    }
    Value::Object(obj)
}

pub fn lottery_line(l: &Loaded, p: &Lottery) -> String {
    let parts: Vec<String> =
        p.probabilities().iter().enumerate().map(|(j, x)| format!("{}={x}", l.names[j])).collect();
    parts.join(" ")
}

/// Probabilities as exact fraction strings.
pub fn lottery_json(l: &Loaded, p: &Lottery) -> Value {
    let mut obj = Map::new();
    for (j, x) in p.probabilities().iter().enumerate() {
        obj.insert(l.names[j].clone(), json!(x.to_string()));
    }
    Value::Object(obj)
}
