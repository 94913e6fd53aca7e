//! Profile data model: loading, validation, tag enrichment, and synthesis.
//!
//! Profiles live on disk as line-delimited JSON records (UTF-8, one record
//! per line) with fields `id`, `label` (`"gang"`, `"non_gang"`, or `null`),
//! `description`, `tweets`, `image_tags`, `video_text`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;

/// Hard cap from the collection protocol: at most the most recent 3,200
/// tweets per profile.
pub const MAX_TWEETS: usize = 3200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "gang")]
    Gang,
    #[serde(rename = "non_gang")]
    NonGang,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Gang => "gang",
            ClassLabel::NonGang => "non_gang",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gang" => Ok(ClassLabel::Gang),
            "non_gang" => Ok(ClassLabel::NonGang),
            other => Err(Error::UnknownName {
                what: "label",
                value: other.to_string(),
            }),
        }
    }
}

/// One labeled user with the five raw text channels. Emoji are not stored
/// separately: they ride inside tweet/description/video text and are pulled
/// out during preprocessing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub id: String,
    #[serde(default)]
    pub label: Option<ClassLabel>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub tweets: Vec<String>,
    #[serde(default)]
    pub image_tags: Vec<String>,
    #[serde(default)]
    pub video_text: Vec<String>,
}

impl ProfileRecord {
    fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::validation("profile id must be non-empty"));
        }
        if self.tweets.len() > MAX_TWEETS {
            return Err(Error::validation(format!(
                "profile '{}' has {} tweets (limit {MAX_TWEETS})",
                self.id,
                self.tweets.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub gang: usize,
    pub non_gang: usize,
    pub unlabeled: usize,
}

/// Validated set of profile records: unique ids, per-record invariants, and
/// label tallies that always match the records.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCollection {
    records: Vec<ProfileRecord>,
    counts: LabelCounts,
}

impl ProfileCollection {
    pub fn new(records: Vec<ProfileRecord>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut counts = LabelCounts::default();
        for record in &records {
            record.validate()?;
            if !seen.insert(record.id.clone()) {
                return Err(Error::DuplicateId(record.id.clone()));
            }
            match record.label {
                Some(ClassLabel::Gang) => counts.gang += 1,
                Some(ClassLabel::NonGang) => counts.non_gang += 1,
                None => counts.unlabeled += 1,
            }
        }
        Ok(ProfileCollection { records, counts })
    }

    pub fn records(&self) -> &[ProfileRecord] {
        &self.records
    }

    pub fn counts(&self) -> LabelCounts {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ProfileRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Labeled ids only; unlabeled records are excluded from training and
    /// evaluation.
    pub fn labels(&self) -> BTreeMap<String, ClassLabel> {
        self.records
            .iter()
            .filter_map(|r| r.label.map(|l| (r.id.clone(), l)))
            .collect()
    }
}

/// Load profiles from a line-delimited JSON file.
pub fn load_profiles(path: impl AsRef<Path>) -> Result<ProfileCollection> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProfileRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        records.push(record);
    }
    ProfileCollection::new(records)
}

/// Serialize a collection back to the line-delimited format.
pub fn write_profiles(path: impl AsRef<Path>, profiles: &ProfileCollection) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in profiles.records() {
        let line = serde_json::to_string(record)
            .map_err(|e| Error::validation(format!("serialize record '{}': {e}", record.id)))?;
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// File-backed stand-in for an external image-tagging service: profile id to
/// tag tokens.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagSource {
    mapping: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize, Serialize)]
struct TagLine {
    id: String,
    tags: Vec<String>,
}

impl TagSource {
    pub fn new(mapping: BTreeMap<String, Vec<String>>) -> Self {
        let mapping = mapping
            .into_iter()
            .map(|(id, tags)| {
                let tags = tags
                    .into_iter()
                    .map(|t| t.trim().to_string())
                    .filter(|t| !t.is_empty())
                    .collect();
                (id, tags)
            })
            .collect();
        TagSource { mapping }
    }

    /// Load from a line-delimited JSON file of `{id, tags}` records.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut mapping = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: TagLine = serde_json::from_str(&line)
                .map_err(|e| Error::parse(idx + 1, e.to_string()))?;
            mapping.insert(parsed.id, parsed.tags);
        }
        Ok(TagSource::new(mapping))
    }

    pub fn get(&self, id: &str) -> Option<&[String]> {
        self.mapping.get(id).map(|v| v.as_slice())
    }
}

/// Replace each record's image tags with the deduplicated union of its
/// existing tags and the TagSource entry for its id. Profiles without an
/// entry pass through unchanged; absence is not an error.
pub fn attach_image_tags(profiles: ProfileCollection, tags: &TagSource) -> ProfileCollection {
    let counts = profiles.counts;
    let records = profiles
        .records
        .into_iter()
        .map(|mut record| {
            if let Some(extra) = tags.get(&record.id) {
                let mut seen: BTreeSet<String> = BTreeSet::new();
                let mut merged = Vec::new();
                for tag in record.image_tags.iter().chain(extra.iter()) {
                    if seen.insert(tag.clone()) {
                        merged.push(tag.clone());
                    }
                }
                record.image_tags = merged;
            }
            record
        })
        .collect();
    ProfileCollection { records, counts }
}

/// Desk-scale generator standing in for the unavailable curated dataset:
/// plants an unambiguous vocabulary signal so downstream stages have known
/// structure to recover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    pub vocab_pos: Vec<String>,
    pub vocab_neg: Vec<String>,
    pub vocab_shared: Vec<String>,
    /// Inclusive `[lo, hi]` range.
    pub tweets_per_profile: (usize, usize),
    /// Inclusive `[lo, hi]` range.
    pub tokens_per_tweet: (usize, usize),
    pub seed: u64,
}

impl SynthSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let spec: SynthSpec = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::parse(0, e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pos == 0 || self.n_neg == 0 {
            return Err(Error::validation("n_pos and n_neg must be positive"));
        }
        if self.tweets_per_profile.0 > self.tweets_per_profile.1
            || self.tokens_per_tweet.0 > self.tokens_per_tweet.1
            || self.tokens_per_tweet.1 == 0
        {
            return Err(Error::validation("per-profile ranges must be non-empty"));
        }
        if self.vocab_pos.is_empty() || self.vocab_neg.is_empty() {
            return Err(Error::validation(
                "vocab_pos and vocab_neg must be non-empty",
            ));
        }
        let pos: BTreeSet<&String> = self.vocab_pos.iter().collect();
        if let Some(shared) = self.vocab_neg.iter().find(|t| pos.contains(t)) {
            return Err(Error::validation(format!(
                "vocab_pos and vocab_neg overlap on '{shared}': planted signal must be unambiguous"
            )));
        }
        Ok(())
    }

    /// Ready-made spec with a planted class signal across all five channels,
    /// including emoji riding inside tweet text. Shape mirrors the roughly
    /// 12% positive-class imbalance of the real dataset.
    pub fn planted(n_pos: usize, n_neg: usize, seed: u64) -> Self {
        let to_vec = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        SynthSpec {
            n_pos,
            n_neg,
            vocab_pos: to_vec(&[
                "rip", "glock", "opps", "trap", "drill", "shooter", "blick", "hustle",
                "savage", "gang", "smoke", "free", "🔫", "⛽", "💰",
            ]),
            vocab_neg: to_vec(&[
                "love", "life", "music", "book", "beach", "sunset", "happy", "family",
                "blessed", "coffee", "travel", "puppy", "❤️", "🎵", "🌴",
            ]),
            vocab_shared: to_vec(&[
                "day", "night", "city", "time", "week", "today", "tomorrow", "morning",
                "work", "school", "game", "play", "watch", "phone", "call", "home",
                "street", "block", "ride", "food", "sleep", "walk", "talk", "friend",
                "brother", "sister", "young", "real", "big", "world",
            ]),
            tweets_per_profile: (3, 8),
            tokens_per_tweet: (4, 12),
            seed,
        }
    }
}

/// Generate a labeled collection per the spec. Deterministic for a fixed
/// seed; every positive carries at least one `vocab_pos` token and every
/// negative at least one `vocab_neg` token.
pub fn synthesize_profiles(spec: &SynthSpec) -> Result<ProfileCollection> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.n_pos + spec.n_neg);
    for i in 0..spec.n_pos {
        records.push(synth_record(spec, ClassLabel::Gang, i));
    }
    for i in 0..spec.n_neg {
        records.push(synth_record(spec, ClassLabel::NonGang, i));
    }
    ProfileCollection::new(records)
}

fn synth_record(spec: &SynthSpec, label: ClassLabel, index: usize) -> ProfileRecord {
    let (tag, class_vocab) = match label {
        ClassLabel::Gang => ("pos", &spec.vocab_pos),
        ClassLabel::NonGang => ("neg", &spec.vocab_neg),
    };
    let mut rng = seeding::rng_from_seed(seeding::derive_seed_indexed(
        spec.seed,
        &format!("synth-{tag}"),
        index as u64,
    ));

    let mut draw = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
        // 35% class-specific, the rest shared: predominant but not exclusive
        if spec.vocab_shared.is_empty() || rng.random_range(0..100u32) < 35 {
            class_vocab[rng.random_range(0..class_vocab.len())].clone()
        } else {
            spec.vocab_shared[rng.random_range(0..spec.vocab_shared.len())].clone()
        }
    };
    let mut sentence = |rng: &mut rand_chacha::ChaCha8Rng, lo: usize, hi: usize| -> String {
        let n = rng.random_range(lo..=hi);
        (0..n).map(|_| draw(rng)).collect::<Vec<_>>().join(" ")
    };

    let n_tweets = rng.random_range(spec.tweets_per_profile.0..=spec.tweets_per_profile.1);
    let tweets: Vec<String> = (0..n_tweets)
        .map(|_| sentence(&mut rng, spec.tokens_per_tweet.0, spec.tokens_per_tweet.1))
        .collect();
    let mut description = sentence(&mut rng, 3, 6);
    let image_tags: Vec<String> = {
        let n = rng.random_range(2..=4usize);
        (0..n).map(|_| draw(&mut rng)).collect()
    };
    let video_text: Vec<String> = {
        let n = rng.random_range(1..=2usize);
        (0..n).map(|_| sentence(&mut rng, 4, 8)).collect()
    };

    let has_class_token = {
        let members: BTreeSet<&str> = class_vocab.iter().map(|s| s.as_str()).collect();
        tweets
            .iter()
            .chain(std::iter::once(&description))
            .chain(video_text.iter())
            .flat_map(|text| text.split_whitespace())
            .chain(image_tags.iter().map(|s| s.as_str()))
            .any(|tok| members.contains(tok))
    };
    if !has_class_token {
        let forced = class_vocab[rng.random_range(0..class_vocab.len())].clone();
        description = format!("{forced} {description}");
    }

    ProfileRecord {
        id: format!("{tag}_{index:05}"),
        label: Some(label),
        description,
        tweets,
        image_tags,
        video_text,
    }
}
