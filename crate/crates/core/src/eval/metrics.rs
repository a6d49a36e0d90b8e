//! The four per-sample metrics. `None` means undefined (see each function).

use crate::provider::{cosine, Embedder, Judge, JudgeInput, ProviderError};

pub const DEFAULT_N_QUESTIONS: usize = 3;

/// Contexts are scored as one text, separated by blank lines.
pub fn joined_contexts(contexts: &[String]) -> String {
    contexts.join("\n\n")
}

fn decompose(judge: &dyn Judge, text: &str) -> Result<Vec<String>, ProviderError> {
    judge.judge(&JudgeInput::StatementDecomposition { text: text.to_owned() })?.into_statements()
}

fn supported_fraction(judge: &dyn Judge, statements: Vec<String>, contexts: &[String]) -> Result<Option<f64>, ProviderError> {
    if statements.is_empty() {
        return Ok(None);
    }
    let n = statements.len();
    let flags = judge.judge(&JudgeInput::StatementSupported { statements, context: joined_contexts(contexts) })?.into_flags()?;
    if flags.len() != n {
        return Err(ProviderError::Malformed(format!("expected {n} verdicts, got {}", flags.len())));
    }
    Ok(Some(flags.iter().filter(|f| **f).count() as f64 / n as f64))
}

/// Supported answer statements over all answer statements; undefined when
/// the answer decomposes into nothing.
pub fn faithfulness(answer: &str, contexts: &[String], judge: &dyn Judge) -> Result<Option<f64>, ProviderError> {
    supported_fraction(judge, decompose(judge, answer)?, contexts)
}

/// Supported ground-truth statements over all ground-truth statements.
pub fn context_recall(ground_truth: &str, contexts: &[String], judge: &dyn Judge) -> Result<Option<f64>, ProviderError> {
    supported_fraction(judge, decompose(judge, ground_truth)?, contexts)
}

/// Σ rᵢ·precision@i / Σ rᵢ over 1-based positions; 0 when nothing is relevant.
pub fn precision_from_flags(flags: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut acc = 0.0;
    for (i, &r) in flags.iter().enumerate() {
        if r {
            hits += 1;
            acc += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        acc / hits as f64
    }
}

/// Rank-weighted relevance of the contexts to the ground truth; undefined
/// without contexts.
pub fn context_precision(ground_truth: &str, contexts: &[String], judge: &dyn Judge) -> Result<Option<f64>, ProviderError> {
    if contexts.is_empty() {
        return Ok(None);
    }
    let flags = judge
        .judge(&JudgeInput::ChunkRelevant { chunks: contexts.to_vec(), reference: ground_truth.to_owned() })?
        .into_flags()?;
    if flags.len() != contexts.len() {
        return Err(ProviderError::Malformed(format!("expected {} verdicts, got {}", contexts.len(), flags.len())));
    }
    Ok(Some(precision_from_flags(&flags)))
}

/// Mean cosine between the question and `n` questions regenerated from the
/// answer, clamped to [0, 1]; undefined when no question can be generated.
pub fn answer_relevancy(question: &str, answer: &str, judge: &dyn Judge, embedder: &dyn Embedder, n: usize) -> Result<Option<f64>, ProviderError> {
    let generated = judge.judge(&JudgeInput::QuestionGeneration { answer: answer.to_owned(), n })?.into_statements()?;
    if generated.is_empty() {
        return Ok(None);
    }
    let mut texts = Vec::with_capacity(generated.len() + 1);
    texts.push(question.to_owned());
    texts.extend(generated);
    let vecs = embedder.embed(&texts)?;
    if vecs.len() != texts.len() {
        return Err(ProviderError::Malformed(format!("expected {} embeddings, got {}", texts.len(), vecs.len())));
    }
    let mean = vecs[1..].iter().map(|v| cosine(&vecs[0], v)).sum::<f64>() / (vecs.len() - 1) as f64;
    Ok(Some(mean.clamp(0.0, 1.0)))
}

/// Auxiliary: cosine of answer and ground-truth embeddings, clamped to [0, 1].
/// Reported alongside the metrics but not part of the aggregate.
pub fn ground_truth_similarity(answer: &str, ground_truth: &str, embedder: &dyn Embedder) -> Result<Option<f64>, ProviderError> {
    let v = embedder.embed(&[answer.to_owned(), ground_truth.to_owned()])?;
    if v.len() != 2 {
        return Err(ProviderError::Malformed("expected 2 embeddings".into()));
    }
    Ok(Some(cosine(&v[0], &v[1]).clamp(0.0, 1.0)))
}
