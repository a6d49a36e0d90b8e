use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};

use super::metrics::{answer_relevancy, context_precision, context_recall, faithfulness, ground_truth_similarity};
use super::{aggregate, EvalError, EvalSample, MetricReport, SampleResult, SampleScores};
use crate::agent::{Agent, Answer, SessionStore};
use crate::clock::Clock;
use crate::protocol::{ConversationTurn, TurnContent};
use crate::provider::{Embedder, Judge, ProviderError};

pub struct SutOutput {
    pub answer: String,
    pub contexts: Vec<String>,
}

/// Whatever answers the evaluation questions.
pub trait SystemUnderTest: Send + Sync {
    fn ask(&self, sample: &EvalSample) -> Result<SutOutput, String>;
}

/// Replays the answers and contexts stored in the dataset itself.
pub struct StaticSut;

impl SystemUnderTest for StaticSut {
    fn ask(&self, sample: &EvalSample) -> Result<SutOutput, String> {
        Ok(SutOutput { answer: sample.answer.clone(), contexts: sample.contexts.clone() })
    }
}

/// Retrieved contexts of one turn: snippet texts of document searches, and
/// one line per table row for other tool results.
pub fn contexts_from_turns(turns: &[ConversationTurn]) -> Vec<String> {
    let mut out = Vec::new();
    for t in turns {
        let TurnContent::ToolResult { result, .. } = &t.content else { continue };
        if !result.ok {
            continue;
        }
        if let Some(snippets) = result.content.get("snippets").and_then(Value::as_array) {
            out.extend(snippets.iter().filter_map(|s| s.get("text").and_then(Value::as_str)).map(str::to_owned));
        } else if let Some(table) = &result.table {
            for row in &table.rows {
                let cells: Vec<String> = table.columns.iter().zip(row).map(|(c, v)| format!("{c}: {v}")).collect();
                out.push(cells.join(", "));
            }
        }
    }
    out
}

/// Runs every question through the in-process agent, one fresh session each.
pub struct AgentSut {
    agent: Arc<Agent>,
    store: SessionStore,
}

impl AgentSut {
    pub fn new(agent: Arc<Agent>, clock: Clock) -> Self {
        Self { agent, store: SessionStore::in_memory(clock) }
    }
}

impl SystemUnderTest for AgentSut {
    fn ask(&self, sample: &EvalSample) -> Result<SutOutput, String> {
        let session = self.store.create().map_err(|e| e.to_string())?;
        let answer = self.agent.run_turn(&session, &sample.question).map_err(|e| e.to_string())?;
        Ok(SutOutput { contexts: contexts_from_turns(&answer.turns), answer: answer.text })
    }
}

/// Asks a running gateway over HTTP.
pub struct HttpSut {
    base_url: String,
    client: reqwest::blocking::Client,
}

impl HttpSut {
    pub fn new(base_url: &str) -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder().timeout(Duration::from_secs(120)).build().map_err(|e| e.to_string())?;
        Ok(Self { base_url: base_url.trim_end_matches('/').to_owned(), client })
    }
}

impl SystemUnderTest for HttpSut {
    fn ask(&self, sample: &EvalSample) -> Result<SutOutput, String> {
        let created: Value = self
            .client
            .post(format!("{}/sessions", self.base_url))
            .json(&json!({}))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| e.to_string())?;
        let id = created.get("session_id").and_then(Value::as_str).ok_or("gateway returned no session_id")?;
        let answer: Answer = self
            .client
            .post(format!("{}/sessions/{id}/messages", self.base_url))
            .json(&json!({ "text": sample.question }))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| e.to_string())?;
        Ok(SutOutput { contexts: contexts_from_turns(&answer.turns), answer: answer.text })
    }
}

pub fn load_eval_dataset(path: &Path) -> Result<Vec<EvalSample>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| EvalError::Dataset { path: path.display().to_string(), line: i + 1, message };
        let mut s: EvalSample = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if s.question.trim().is_empty() || s.ground_truth.trim().is_empty() {
            return Err(bad("question and ground_truth must be non-empty".into()));
        }
        if s.id.is_empty() {
            s.id = format!("q{:02}", out.len() + 1);
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    Ok(out)
}

pub fn score_sample(question: &str, answer: &str, contexts: &[String], ground_truth: &str, judge: &dyn Judge, embedder: &dyn Embedder, n_questions: usize) -> Result<SampleScores, ProviderError> {
    Ok(SampleScores {
        faithfulness: faithfulness(answer, contexts, judge)?,
        answer_relevancy: answer_relevancy(question, answer, judge, embedder, n_questions)?,
        context_precision: context_precision(ground_truth, contexts, judge)?,
        context_recall: context_recall(ground_truth, contexts, judge)?,
        ground_truth_similarity: ground_truth_similarity(answer, ground_truth, embedder)?,
    })
}

/// Asks and scores every sample in order. A failing sample is recorded with
/// its error and left out of the means.
pub fn run_evaluation(samples: &[EvalSample], sut: &dyn SystemUnderTest, judge: &dyn Judge, embedder: &dyn Embedder, n_questions: usize) -> MetricReport {
    let results = samples
        .iter()
        .map(|s| {
            let mut r = SampleResult {
                id: s.id.clone(),
                level: s.level,
                question: s.question.clone(),
                answer: String::new(),
                contexts: Vec::new(),
                ground_truth: s.ground_truth.clone(),
                scores: None,
                error: None,
            };
            match sut.ask(s) {
                Ok(out) if out.answer.trim().is_empty() => r.error = Some("system under test returned an empty answer".into()),
                Ok(out) => {
                    match score_sample(&s.question, &out.answer, &out.contexts, &s.ground_truth, judge, embedder, n_questions) {
                        Ok(sc) => r.scores = Some(sc),
                        Err(e) => r.error = Some(format!("scoring failed: {e}")),
                    }
                    r.answer = out.answer;
                    r.contexts = out.contexts;
                }
                Err(e) => r.error = Some(format!("system under test failed: {e}")),
            }
            r
        })
        .collect();
    aggregate(results)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-sample scores at full precision; empty cells are undefined scores.
pub fn samples_csv(report: &MetricReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "level", "faithfulness", "answer_relevancy", "context_precision", "context_recall", "ground_truth_similarity", "error"])
        .expect("in-memory csv");
    for s in &report.samples {
        let sc = s.scores.unwrap_or_default();
        w.write_record([
            s.id.clone(),
            s.level.as_str().to_owned(),
            cell(sc.faithfulness),
            cell(sc.answer_relevancy),
            cell(sc.context_precision),
            cell(sc.context_recall),
            cell(sc.ground_truth_similarity),
            s.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn fmt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

/// Plain-text table of the metric means, overall and per level.
pub fn summary_text(report: &MetricReport) -> String {
    let o = &report.overall;
    let mut s = String::new();
    let _ = writeln!(s, "EVALUATION RESULTS\n");
    let _ = writeln!(s, "{:<26}Mean Value", "Evaluation Metric");
    let rows = [
        ("Faithfulness", o.means.faithfulness),
        ("Answer Relevancy", o.means.answer_relevancy),
        ("Context Precision", o.means.context_precision),
        ("Context Recall", o.means.context_recall),
    ];
    for (name, v) in rows {
        let _ = writeln!(s, "{name:<26}{}", fmt4(v));
    }
    let _ = writeln!(s, "{:<26}{}", "RAGAS Score", fmt4(o.ragas_score));
    let _ = writeln!(s, "\n{:<26}{}", "Ground-truth similarity", fmt4(o.ground_truth_similarity));
    let _ = writeln!(s, "Samples: {} ({} scored, {} failed)", o.n_samples, o.n_scored, report.failures.len());
    let _ = writeln!(s, "\n{:<6}{:>6}{:>14}{:>18}{:>19}{:>16}{:>8}", "Level", "n", "Faithfulness", "Answer Relevancy", "Context Precision", "Context Recall", "RAGAS");
    for (level, l) in &report.per_level {
        let _ = writeln!(
            s,
            "{:<6}{:>6}{:>14}{:>18}{:>19}{:>16}{:>8}",
            level.as_str(),
            l.n_samples,
            fmt4(l.means.faithfulness),
            fmt4(l.means.answer_relevancy),
            fmt4(l.means.context_precision),
            fmt4(l.means.context_recall),
            fmt4(l.ragas_score)
        );
    }
    s
}

/// Writes `report.json`, `samples.csv` and `summary.txt` into `dir`.
pub fn write_report(dir: &Path, report: &MetricReport) -> Result<(), EvalError> {
    let io = |e: std::io::Error| EvalError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let json = serde_json::to_vec_pretty(report).map_err(|e| EvalError::Io(e.to_string()))?;
    std::fs::write(dir.join("report.json"), json).map_err(io)?;
    std::fs::write(dir.join("samples.csv"), samples_csv(report)).map_err(io)?;
    std::fs::write(dir.join("summary.txt"), summary_text(report)).map_err(io)?;
    Ok(())
}
