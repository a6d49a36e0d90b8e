//! Four-metric evaluation of question answering: faithfulness, answer
//! relevancy, context precision and context recall, their harmonic-mean
//! aggregate, and report files.

mod aggregate;
mod metrics;
mod run;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate, ragas_score, Failure, MetricCounts, MetricMeans, MetricReport, Summary, METRIC_NAMES};
pub use metrics::{
    answer_relevancy, context_precision, context_recall, faithfulness, ground_truth_similarity, joined_contexts, precision_from_flags,
    DEFAULT_N_QUESTIONS,
};
pub use run::{
    contexts_from_turns, load_eval_dataset, run_evaluation, samples_csv, score_sample, summary_text, write_report, AgentSut, HttpSut,
    StaticSut, SutOutput, SystemUnderTest,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    L1,
    L2,
    L3,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::L1 => "L1",
            Level::L2 => "L2",
            Level::L3 => "L3",
        }
    }
}

/// One evaluation question. `answer` and `contexts` may be left empty when
/// the system under test produces them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSample {
    #[serde(default)]
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub contexts: Vec<String>,
    #[serde(default)]
    pub answer: String,
    pub ground_truth: String,
    pub level: Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SampleScores {
    pub faithfulness: Option<f64>,
    pub answer_relevancy: Option<f64>,
    pub context_precision: Option<f64>,
    pub context_recall: Option<f64>,
    pub ground_truth_similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub id: String,
    pub level: Level,
    pub question: String,
    pub answer: String,
    pub contexts: Vec<String>,
    pub ground_truth: String,
    pub scores: Option<SampleScores>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{path} line {line}: {message}")]
    Dataset { path: String, line: usize, message: String },
    #[error("empty evaluation dataset")]
    EmptyDataset,
    #[error("io error: {0}")]
    Io(String),
}
