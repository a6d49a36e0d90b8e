use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Level, SampleResult, SampleScores};

pub const METRIC_NAMES: [&str; 4] = ["faithfulness", "answer_relevancy", "context_precision", "context_recall"];

/// Harmonic mean of the four metric means, 0 if any of them is 0.
pub fn ragas_score(means: [f64; 4]) -> f64 {
    if means.iter().any(|m| *m <= 0.0) {
        return 0.0;
    }
    4.0 / means.iter().map(|m| 1.0 / m).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricMeans {
    pub faithfulness: Option<f64>,
    pub answer_relevancy: Option<f64>,
    pub context_precision: Option<f64>,
    pub context_recall: Option<f64>,
}

impl MetricMeans {
    pub fn as_array(&self) -> [Option<f64>; 4] {
        [self.faithfulness, self.answer_relevancy, self.context_precision, self.context_recall]
    }

    /// Undefined when any metric has no defined sample.
    pub fn ragas_score(&self) -> Option<f64> {
        let a = self.as_array();
        Some(ragas_score([a[0]?, a[1]?, a[2]?, a[3]?]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MetricCounts {
    pub faithfulness: usize,
    pub answer_relevancy: usize,
    pub context_precision: usize,
    pub context_recall: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_samples: usize,
    pub n_scored: usize,
    pub means: MetricMeans,
    /// Samples with a defined score, per metric.
    pub defined: MetricCounts,
    /// Scored samples whose score was undefined, per metric.
    pub undefined: MetricCounts,
    pub ragas_score: Option<f64>,
    pub ground_truth_similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(flatten)]
    pub overall: Summary,
    pub per_level: BTreeMap<Level, Summary>,
    pub failures: Vec<Failure>,
    pub samples: Vec<SampleResult>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn summarize<'a>(samples: impl Iterator<Item = &'a SampleResult>) -> Summary {
    let mut n_samples = 0;
    let mut scored: Vec<&SampleScores> = Vec::new();
    for s in samples {
        n_samples += 1;
        if let Some(sc) = &s.scores {
            scored.push(sc);
        }
    }
    let pick = |f: fn(&SampleScores) -> Option<f64>| -> Vec<f64> { scored.iter().filter_map(|s| f(s)).collect() };
    let fa = pick(|s| s.faithfulness);
    let ar = pick(|s| s.answer_relevancy);
    let cp = pick(|s| s.context_precision);
    let cr = pick(|s| s.context_recall);
    let gt = pick(|s| s.ground_truth_similarity);
    let n = scored.len();
    let means = MetricMeans { faithfulness: mean(&fa), answer_relevancy: mean(&ar), context_precision: mean(&cp), context_recall: mean(&cr) };
    Summary {
        n_samples,
        n_scored: n,
        means,
        defined: MetricCounts { faithfulness: fa.len(), answer_relevancy: ar.len(), context_precision: cp.len(), context_recall: cr.len() },
        undefined: MetricCounts {
            faithfulness: n - fa.len(),
            answer_relevancy: n - ar.len(),
            context_precision: n - cp.len(),
            context_recall: n - cr.len(),
        },
        ragas_score: means.ragas_score(),
        ground_truth_similarity: mean(&gt),
    }
}

/// Means over defined scores, overall and per level; failed samples are
/// listed and excluded.
pub fn aggregate(samples: Vec<SampleResult>) -> MetricReport {
    let overall = summarize(samples.iter());
    let mut per_level = BTreeMap::new();
    for level in [Level::L1, Level::L2, Level::L3] {
        if samples.iter().any(|s| s.level == level) {
            per_level.insert(level, summarize(samples.iter().filter(|s| s.level == level)));
        }
    }
    let failures = samples
        .iter()
        .filter_map(|s| s.error.as_ref().map(|e| Failure { id: s.id.clone(), error: e.clone() }))
        .collect();
    MetricReport { overall, per_level, failures, samples }
}
