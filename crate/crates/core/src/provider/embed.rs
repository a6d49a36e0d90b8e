use super::ProviderError;
use crate::text::{fnv1a64, tokens};

pub const MOCK_DIMENSION: usize = 256;

pub trait Embedder: Send + Sync {
    /// Identity of the embedding model; indexes refuse vectors from other models.
    fn model_id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Scales `v` to unit length in place. The zero vector is left unchanged.
pub fn l2_normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Cosine similarity; 0 when either side is the zero vector.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Feature-hashing embedder: every lowercase alphanumeric token adds ±1 to
/// bucket `fnv1a64(token) % d`; the sign comes from the parity of
/// `fnv1a64(token) / d`. The result is L2-normalized.
#[derive(Debug, Clone)]
pub struct MockEmbedder {
    dimension: usize,
    model_id: String,
}

impl MockEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension, model_id: format!("mock-fnv1a-{dimension}") }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let d = self.dimension as u64;
        let mut v = vec![0.0; self.dimension];
        for tok in tokens(text) {
            let h = fnv1a64(&tok);
            let sign = if (h / d).is_multiple_of(2) { 1.0 } else { -1.0 };
            v[(h % d) as usize] += sign;
        }
        l2_normalize(&mut v);
        v
    }
}

impl Default for MockEmbedder {
    fn default() -> Self {
        Self::new(MOCK_DIMENSION)
    }
}

impl Embedder for MockEmbedder {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}
