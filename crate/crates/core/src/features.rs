//! Profile feature vectors: five embedding aggregation schemes plus the
//! sparse unigram term-frequency baseline.
//!
//! For a profile with `n` unique in-vocabulary words, word vectors `w_i`,
//! term frequencies `c_i`, and tf-idf weights `t_i = c_i * idf(i)`:
//! `sum = Σ w_i`, `avg = sum / n`, `sum_count = Σ w_i*c_i`,
//! `sum_tfidf = Σ w_i*t_i`, `avg_sum_count = sum_count / n`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{EmbeddingModel, Vocabulary};
use crate::error::{Error, Result};
use crate::ingest::ClassLabel;
use crate::preprocess::TokenizedProfile;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMethod {
    Sum,
    Avg,
    SumCount,
    SumTfidf,
    AvgSumCount,
    BaselineTf,
}

impl AggregationMethod {
    /// The five dense embedding combinations, in presentation order.
    pub const EMBEDDING_METHODS: [AggregationMethod; 5] = [
        AggregationMethod::Sum,
        AggregationMethod::Avg,
        AggregationMethod::SumCount,
        AggregationMethod::SumTfidf,
        AggregationMethod::AvgSumCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMethod::Sum => "sum",
            AggregationMethod::Avg => "avg",
            AggregationMethod::SumCount => "sum_count",
            AggregationMethod::SumTfidf => "sum_tfidf",
            AggregationMethod::AvgSumCount => "avg_sum_count",
            AggregationMethod::BaselineTf => "baseline_tf",
        }
    }
}

impl fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(AggregationMethod::Sum),
            "avg" => Ok(AggregationMethod::Avg),
            "sum_count" => Ok(AggregationMethod::SumCount),
            "sum_tfidf" => Ok(AggregationMethod::SumTfidf),
            "avg_sum_count" => Ok(AggregationMethod::AvgSumCount),
            "baseline_tf" => Ok(AggregationMethod::BaselineTf),
            other => Err(Error::UnknownName {
                what: "aggregation method",
                value: other.to_string(),
            }),
        }
    }
}

/// Smoothed inverse document frequency over the training profiles only:
/// `idf(i) = ln((1 + N) / (1 + df_i)) + 1`, one document = one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfTable<S> {
    values: BTreeMap<String, S>,
    n_docs: usize,
}

impl<S: Scalar> IdfTable<S> {
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn get(&self, token: &str) -> Option<S> {
        self.values.get(token).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, S)> {
        self.values.iter().map(|(t, &v)| (t.as_str(), v))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.values.contains_key(token)
    }

    /// `token <tab> idf` per line.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "#n_docs\t{}", self.n_docs).map_err(|e| Error::io(path, e))?;
        for (token, value) in &self.values {
            writeln!(writer, "{token}\t{value:.8e}").map_err(|e| Error::io(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut values = BTreeMap::new();
        let mut n_docs = 0usize;
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let (token, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(idx + 1, "expected 'token<TAB>idf'"))?;
            if token == "#n_docs" {
                n_docs = value
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, "invalid n_docs"))?;
                continue;
            }
            let value: f64 = value
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("invalid idf value '{value}'")))?;
            values.insert(token.to_string(), S::from_f64_cfg(value));
        }
        Ok(IdfTable { values, n_docs })
    }
}

/// Compute the idf table for every vocabulary token over the training
/// profiles (documents that never contain a token still get a finite idf via
/// smoothing).
pub fn build_idf<S: Scalar>(
    training: &[&TokenizedProfile],
    vocab: &Vocabulary,
) -> Result<IdfTable<S>> {
    if training.is_empty() {
        return Err(Error::validation("idf requires at least one training profile"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for profile in training {
        let mut seen: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
        for token in profile.merged_tokens() {
            if vocab.contains(token) {
                seen.insert(token);
            }
        }
        for token in seen {
            *df.entry(token).or_insert(0) += 1;
        }
    }
    let n = training.len();
    let values = vocab
        .iter()
        .map(|entry| {
            let d = df.get(entry.token.as_str()).copied().unwrap_or(0);
            let idf = ((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0;
            (entry.token.clone(), S::from_f64_cfg(idf))
        })
        .collect();
    Ok(IdfTable { values, n_docs: n })
}

/// Per-profile term statistics over the unique in-vocabulary tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTermStats<S> {
    /// (vocab index, token, count, tfidf), ordered by vocab index.
    entries: Vec<TermStat<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermStat<S> {
    pub vocab_index: usize,
    pub token: String,
    pub count: u32,
    pub tfidf: S,
}

impl<S: Scalar> ProfileTermStats<S> {
    /// Number of unique in-vocabulary tokens.
    pub fn unique_words(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[TermStat<S>] {
        &self.entries
    }

    pub fn count(&self, token: &str) -> Option<u32> {
        self.entries
            .iter()
            .find(|e| e.token == token)
            .map(|e| e.count)
    }

    pub fn tfidf(&self, token: &str) -> Option<S> {
        self.entries
            .iter()
            .find(|e| e.token == token)
            .map(|e| e.tfidf)
    }
}

/// Count merged tokens restricted to the vocabulary; out-of-vocabulary tokens
/// contribute nothing.
pub fn compute_term_stats<S: Scalar>(
    profile: &TokenizedProfile,
    vocab: &Vocabulary,
    idf: &IdfTable<S>,
) -> ProfileTermStats<S> {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for token in profile.merged_tokens() {
        if let Some(index) = vocab.get(token) {
            *counts.entry(index).or_insert(0) += 1;
        }
    }
    let entries = counts
        .into_iter()
        .map(|(vocab_index, count)| {
            let token = vocab.entry(vocab_index).token.clone();
            let idf_value = idf.get(&token).unwrap_or_else(S::one);
            TermStat {
                vocab_index,
                token,
                count,
                tfidf: S::from_u32(count).expect("count fits scalar") * idf_value,
            }
        })
        .collect();
    ProfileTermStats { entries }
}

/// Classifier-ready feature vector: dense for the embedding methods, sparse
/// token counts for the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileVector<S> {
    pub id: String,
    pub label: Option<ClassLabel>,
    pub method: AggregationMethod,
    pub values: FeatureValues<S>,
    /// True iff the profile had zero in-vocabulary tokens.
    pub oov_profile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValues<S> {
    Dense(Vec<S>),
    Sparse(BTreeMap<String, u32>),
}

impl<S: Scalar> ProfileVector<S> {
    pub fn dense(&self) -> Option<&[S]> {
        match &self.values {
            FeatureValues::Dense(v) => Some(v),
            FeatureValues::Sparse(_) => None,
        }
    }

    pub fn sparse(&self) -> Option<&BTreeMap<String, u32>> {
        match &self.values {
            FeatureValues::Dense(_) => None,
            FeatureValues::Sparse(m) => Some(m),
        }
    }
}

/// Combine the word vectors of a profile's unique in-vocabulary words per the
/// chosen method. `n = 0` yields the zero vector flagged `oov_profile`.
pub fn aggregate<S: Scalar>(
    profile: &TokenizedProfile,
    stats: &ProfileTermStats<S>,
    model: &EmbeddingModel<S>,
    method: AggregationMethod,
) -> Result<ProfileVector<S>> {
    if method == AggregationMethod::BaselineTf {
        return Err(Error::validation(
            "baseline_tf is not an embedding aggregation; use baseline_tf_vector",
        ));
    }
    let k = model.dim();
    let n = stats.unique_words();
    let mut values = vec![S::zero(); k];
    for entry in stats.entries() {
        let row = model.input_row(entry.vocab_index);
        let weight = match method {
            AggregationMethod::Sum | AggregationMethod::Avg => S::one(),
            AggregationMethod::SumCount | AggregationMethod::AvgSumCount => {
                S::from_u32(entry.count).expect("count fits scalar")
            }
            AggregationMethod::SumTfidf => entry.tfidf,
            AggregationMethod::BaselineTf => unreachable!(),
        };
        for (v, &w) in values.iter_mut().zip(row) {
            *v += w * weight;
        }
    }
    if matches!(
        method,
        AggregationMethod::Avg | AggregationMethod::AvgSumCount
    ) && n > 0
    {
        let n_scalar = S::from_usize(n).expect("n fits scalar");
        for v in values.iter_mut() {
            *v /= n_scalar;
        }
    }
    Ok(ProfileVector {
        id: profile.id.clone(),
        label: profile.label,
        method,
        values: FeatureValues::Dense(values),
        oov_profile: n == 0,
    })
}

/// Sparse unigram term-frequency vector over merged tokens intersected with
/// the vocabulary.
pub fn baseline_tf_vector<S: Scalar>(
    profile: &TokenizedProfile,
    vocab: &Vocabulary,
) -> ProfileVector<S> {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for token in profile.merged_tokens() {
        if vocab.contains(token) {
            *counts.entry(token.to_string()).or_insert(0) += 1;
        }
    }
    let oov = counts.is_empty();
    ProfileVector {
        id: profile.id.clone(),
        label: profile.label,
        method: AggregationMethod::BaselineTf,
        values: FeatureValues::Sparse(counts),
        oov_profile: oov,
    }
}

fn label_str(label: Option<ClassLabel>) -> &'static str {
    match label {
        Some(ClassLabel::Gang) => "gang",
        Some(ClassLabel::NonGang) => "non_gang",
        None => "null",
    }
}

fn parse_label(s: &str, line: usize) -> Result<Option<ClassLabel>> {
    match s {
        "null" => Ok(None),
        other => other
            .parse()
            .map(Some)
            .map_err(|_| Error::parse(line, format!("invalid label '{other}'"))),
    }
}

/// Feature file: `id<TAB>label<TAB>...` with either `k` reals (dense) or
/// `token:count` pairs (sparse baseline).
pub fn write_features<S: Scalar>(
    path: impl AsRef<Path>,
    vectors: &[ProfileVector<S>],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for vector in vectors {
        write!(writer, "{}\t{}", vector.id, label_str(vector.label))
            .map_err(|e| Error::io(path, e))?;
        match &vector.values {
            FeatureValues::Dense(values) => {
                for v in values {
                    write!(writer, "\t{v:.8e}").map_err(|e| Error::io(path, e))?;
                }
            }
            FeatureValues::Sparse(map) => {
                for (token, count) in map {
                    write!(writer, "\t{token}:{count}").map_err(|e| Error::io(path, e))?;
                }
            }
        }
        writeln!(writer).map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Read a feature file back; the layout (dense vs sparse) is sniffed from the
/// value fields.
pub fn read_features<S: Scalar>(
    path: impl AsRef<Path>,
    method: AggregationMethod,
) -> Result<Vec<ProfileVector<S>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        let id = parts
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::parse(line_no, "missing id"))?;
        let label = parse_label(
            parts
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing label"))?,
            line_no,
        )?;
        let fields: Vec<&str> = parts.collect();
        let sparse = fields.iter().any(|f| f.contains(':'));
        let (values, oov) = if sparse || (fields.is_empty() && method == AggregationMethod::BaselineTf)
        {
            let mut map = BTreeMap::new();
            for field in fields {
                let (token, count) = field
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line_no, format!("invalid pair '{field}'")))?;
                let count: u32 = count
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid count '{count}'")))?;
                map.insert(token.to_string(), count);
            }
            let oov = map.is_empty();
            (FeatureValues::Sparse(map), oov)
        } else {
            let mut dense = Vec::with_capacity(fields.len());
            for field in fields {
                let value: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid value '{field}'")))?;
                dense.push(S::from_f64_cfg(value));
            }
            let oov = dense.iter().all(|v| *v == S::zero());
            (FeatureValues::Dense(dense), oov)
        };
        out.push(ProfileVector {
            id: id.to_string(),
            label,
            method,
            values,
            oov_profile: oov,
        });
    }
    Ok(out)
}
