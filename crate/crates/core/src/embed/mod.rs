//! Skip-gram word embeddings with negative sampling.
//!
//! [`Vocabulary`] and [`NegativeTable`] are built from the training token
//! streams; [`train::train_skipgram`] fits the two weight tables;
//! [`EmbeddingModel::most_similar`] answers nearest-neighbor queries over the
//! input vectors; [`io`] persists the plain-text vector format.

mod io;
mod train;

pub use io::{load_embeddings, save_embeddings};
pub use train::{sgns_step, train_skipgram, train_skipgram_with_workers, window_pair_count};

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding;

/// Training hyperparameters. Defaults follow the experimental setup: 10
/// negatives, window 5, min count 5, 300-dimensional vectors; epochs,
/// learning rate, and table shape follow the conventions of the negative
/// sampling literature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_count: u64,
    pub table_power: f64,
    pub table_size: usize,
    /// Fixed-width window by default; `true` shrinks the radius uniformly per
    /// center word for parity with common implementations.
    pub dynamic_window: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 300,
            window: 5,
            negatives: 10,
            epochs: 5,
            initial_lr: 0.025,
            min_count: 5,
            table_power: 0.75,
            table_size: 10_000_000,
            dynamic_window: false,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::validation("embedding dimension must be >= 1"));
        }
        if self.window == 0 {
            return Err(Error::validation("context window must be >= 1"));
        }
        if self.negatives == 0 {
            return Err(Error::validation("negative sample count must be >= 1"));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::validation("initial learning rate must be > 0"));
        }
        if !(self.table_power > 0.0 && self.table_power <= 1.0) {
            return Err(Error::validation("table power must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabEntry {
    pub token: String,
    pub count: u64,
}

/// Tokens retained after the `min_count` threshold, with dense indices
/// assigned by descending corpus count (ties lexicographic).
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    pub fn build(streams: &[Vec<String>], min_count: u64) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for stream in streams {
            for token in stream {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<VocabEntry> = counts
            .into_iter()
            .filter(|&(_, count)| count >= min_count)
            .map(|(token, count)| VocabEntry {
                token: token.to_string(),
                count,
            })
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.token.clone(), i))
            .collect();
        let total_tokens = entries.iter().map(|e| e.count).sum();
        Ok(Vocabulary {
            entries,
            index,
            total_tokens,
            min_count,
        })
    }

    pub(crate) fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let entries: Vec<VocabEntry> = tokens
            .into_iter()
            .map(|token| VocabEntry { token, count: 0 })
            .collect();
        let index: HashMap<String, usize> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.token.clone(), i))
            .collect();
        if index.len() != entries.len() {
            return Err(Error::validation("duplicate token in vocabulary"));
        }
        Ok(Vocabulary {
            entries,
            index,
            total_tokens: 0,
            min_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn entry(&self, idx: usize) -> &VocabEntry {
        &self.entries[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &VocabEntry> {
        self.entries.iter()
    }

    /// Sum of retained corpus counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

/// Sampling table with slot multiplicity proportional to
/// `count^table_power`, allocated by largest-remainder rounding; every vocab
/// token holds at least one slot.
#[derive(Debug, Clone)]
pub struct NegativeTable {
    slots: Vec<u32>,
}

impl NegativeTable {
    pub fn build(vocab: &Vocabulary, power: f64, size: usize) -> Result<Self> {
        let v = vocab.len();
        if size < v {
            return Err(Error::TableTooSmall { size, vocab: v });
        }
        let weights: Vec<f64> = vocab
            .iter()
            .map(|e| (e.count.max(1) as f64).powf(power))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut alloc: Vec<usize> = Vec::with_capacity(v);
        let mut fractions: Vec<(f64, usize)> = Vec::with_capacity(v);
        let mut assigned = 0usize;
        for (i, w) in weights.iter().enumerate() {
            let quota = size as f64 * w / total;
            let floor = quota.floor() as usize;
            alloc.push(floor);
            assigned += floor;
            fractions.push((quota - floor as f64, i));
        }
        // leftover slots go to the largest fractional remainders
        fractions.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let mut leftover = size.saturating_sub(assigned);
        for &(_, i) in fractions.iter().cycle().take(leftover.min(size)) {
            alloc[i] += 1;
            leftover -= 1;
            if leftover == 0 {
                break;
            }
        }
        // every token keeps at least one slot
        for i in 0..v {
            if alloc[i] == 0 {
                let donor = (0..v).max_by_key(|&j| alloc[j]).expect("non-empty");
                alloc[donor] -= 1;
                alloc[i] += 1;
            }
        }
        let mut slots = Vec::with_capacity(size);
        for (i, &n) in alloc.iter().enumerate() {
            slots.extend(std::iter::repeat(i as u32).take(n));
        }
        debug_assert_eq!(slots.len(), size);
        Ok(NegativeTable { slots })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.slots[rng.random_range(0..self.slots.len())] as usize
    }

    /// Slot count per vocabulary index.
    pub fn allocation(&self, vocab_len: usize) -> Vec<usize> {
        let mut counts = vec![0usize; vocab_len];
        for &slot in &self.slots {
            counts[slot as usize] += 1;
        }
        counts
    }
}

/// Vocabulary plus the two `V x k` weight tables. `input` rows are the word
/// vectors consumers see; `output` rows are context weights that only matter
/// during training.
#[derive(Debug, Clone)]
pub struct EmbeddingModel<S: Scalar> {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<S>,
    output: Vec<S>,
    hyperparams: Hyperparams,
}

impl<S: Scalar> EmbeddingModel<S> {
    /// Seeded initialization: input components uniform in `[-0.5/k, 0.5/k]`,
    /// output rows zero.
    pub fn init(vocab: Vocabulary, hyperparams: Hyperparams) -> Self {
        let dim = hyperparams.dim;
        let mut rng = seeding::rng_from_seed(seeding::derive_seed(hyperparams.seed, "embed-init"));
        let input: Vec<S> = (0..vocab.len() * dim)
            .map(|_| S::from_f64_cfg((rng.random::<f64>() - 0.5) / dim as f64))
            .collect();
        let output = vec![S::zero(); vocab.len() * dim];
        EmbeddingModel {
            vocab,
            dim,
            input,
            output,
            hyperparams,
        }
    }

    pub(crate) fn from_parts(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<S>,
        hyperparams: Hyperparams,
    ) -> Self {
        let output = vec![S::zero(); vocab.len() * dim];
        EmbeddingModel {
            vocab,
            dim,
            input,
            output,
            hyperparams,
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn input_row(&self, idx: usize) -> &[S] {
        &self.input[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn output_row(&self, idx: usize) -> &[S] {
        &self.output[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn set_input_row(&mut self, idx: usize, row: &[S]) {
        assert_eq!(row.len(), self.dim);
        self.input[idx * self.dim..(idx + 1) * self.dim].copy_from_slice(row);
    }

    pub fn set_output_row(&mut self, idx: usize, row: &[S]) {
        assert_eq!(row.len(), self.dim);
        self.output[idx * self.dim..(idx + 1) * self.dim].copy_from_slice(row);
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut [S], &mut [S]) {
        (&mut self.input, &mut self.output)
    }

    pub(crate) fn tables(&self) -> (&[S], &[S]) {
        (&self.input, &self.output)
    }

    pub(crate) fn replace_tables(&mut self, input: Vec<S>, output: Vec<S>) {
        debug_assert_eq!(input.len(), self.input.len());
        debug_assert_eq!(output.len(), self.output.len());
        self.input = input;
        self.output = output;
    }

    /// All rows finite?
    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(self.output.iter()).all(|v| v.is_finite())
    }

    /// Top `top_k` vocabulary tokens by cosine similarity of input vectors,
    /// descending, query excluded, ties broken lexicographically.
    pub fn most_similar(&self, token: &str, top_k: usize) -> Result<Vec<(String, S)>> {
        let query = self
            .vocab
            .get(token)
            .ok_or_else(|| Error::OutOfVocabulary(token.to_string()))?;
        let query_row = self.input_row(query);
        let query_norm = norm(query_row);
        let mut scored: Vec<(String, S)> = (0..self.vocab.len())
            .filter(|&i| i != query)
            .map(|i| {
                let row = self.input_row(i);
                let denom = query_norm * norm(row);
                let cos = if denom > S::zero() {
                    dot(query_row, row) / denom
                } else {
                    S::zero()
                };
                (self.vocab.entry(i).token.clone(), cos)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite cosine")
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(top_k);
        Ok(scored)
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn streams(texts: &[&[&str]]) -> Vec<Vec<String>> {
        texts
            .iter()
            .map(|s| s.iter().map(|t| t.to_string()).collect())
            .collect()
    }

    #[test]
    fn vocab_threshold_edge() {
        let s = streams(&[&["a", "a", "a", "a", "a"], &["b"]]);
        let vocab = Vocabulary::build(&s, 5).unwrap();
        assert_eq!(vocab.len(), 1);
        assert!(vocab.contains("a"));
        assert!(!vocab.contains("b"));
    }

    #[test]
    fn vocab_ordering_by_count_then_token() {
        let s = streams(&[&["a", "a"], &["a", "b", "b"]]);
        let vocab = Vocabulary::build(&s, 2).unwrap();
        assert_eq!(vocab.get("a"), Some(0));
        assert_eq!(vocab.get("b"), Some(1));
        assert_eq!(vocab.entry(0).count, 3);
        assert_eq!(vocab.entry(1).count, 2);
        assert_eq!(vocab.total_tokens(), 5);

        // ties broken lexicographically
        let s = streams(&[&["zz", "aa", "zz", "aa"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        assert_eq!(vocab.get("aa"), Some(0));
        assert_eq!(vocab.get("zz"), Some(1));
    }

    #[test]
    fn vocab_min_count_one_keeps_distinct_tokens() {
        let s = streams(&[&["x", "y", "x", "z"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        assert_eq!(vocab.len(), 3);
    }

    #[test]
    fn vocab_empty_is_error() {
        let s = streams(&[&["a"]]);
        assert!(matches!(
            Vocabulary::build(&s, 2),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn table_allocation_matches_hand_computation() {
        // counts {a:4, b:1}, power 0.75: weights 2.8284.. and 1.0
        let s = streams(&[&["a", "a", "a", "a", "b"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        let table = NegativeTable::build(&vocab, 0.75, 10_000).unwrap();
        let alloc = table.allocation(vocab.len());
        assert_eq!(alloc[vocab.get("a").unwrap()], 7388);
        assert_eq!(alloc[vocab.get("b").unwrap()], 2612);
    }

    #[test]
    fn table_exact_proportionality_at_power_one() {
        let s = streams(&[&["a", "a", "a", "b"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        let table = NegativeTable::build(&vocab, 1.0, 4).unwrap();
        let alloc = table.allocation(vocab.len());
        assert_eq!(alloc[vocab.get("a").unwrap()], 3);
        assert_eq!(alloc[vocab.get("b").unwrap()], 1);
    }

    #[test]
    fn table_degenerate_single_token() {
        let s = streams(&[&["only", "only"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        let table = NegativeTable::build(&vocab, 0.75, 128).unwrap();
        assert_eq!(table.allocation(1), vec![128]);
    }

    #[test]
    fn table_too_small_is_error() {
        let s = streams(&[&["a", "b", "c"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        assert!(matches!(
            NegativeTable::build(&vocab, 0.75, 2),
            Err(Error::TableTooSmall { size: 2, vocab: 3 })
        ));
    }

    #[test]
    fn table_guarantees_every_token_a_slot() {
        // one overwhelming count, many rare tokens, tiny table
        let mut stream: Vec<String> = vec!["big".to_string(); 100_000];
        for i in 0..9 {
            stream.push(format!("rare{i}"));
        }
        let vocab = Vocabulary::build(&[stream], 1).unwrap();
        let table = NegativeTable::build(&vocab, 0.75, 10).unwrap();
        let alloc = table.allocation(vocab.len());
        assert!(alloc.iter().all(|&n| n >= 1), "alloc {alloc:?}");
        assert_eq!(alloc.iter().sum::<usize>(), 10);
    }

    #[test]
    fn most_similar_two_token_vocab() {
        let s = streams(&[&["a", "b"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        let hp = Hyperparams {
            dim: 3,
            ..Hyperparams::default()
        };
        let mut model = EmbeddingModel::<f64>::init(vocab, hp);
        model.set_input_row(0, &[1.0, 0.0, 0.0]);
        model.set_input_row(1, &[1.0, 1.0, 0.0]);
        let got = model.most_similar("a", 5).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].0, "b");
        assert!((got[0].1 - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn most_similar_oov_error() {
        let s = streams(&[&["a", "b"]]);
        let vocab = Vocabulary::build(&s, 1).unwrap();
        let model = EmbeddingModel::<f64>::init(vocab, Hyperparams::default());
        match model.most_similar("ghost", 3) {
            Err(Error::OutOfVocabulary(tok)) => assert_eq!(tok, "ghost"),
            other => panic!("expected OOV error, got {other:?}"),
        }
    }
}
