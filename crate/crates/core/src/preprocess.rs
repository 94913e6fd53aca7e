//! Raw channel text to normalized token sequences.
//!
//! Per channel the pipeline is: emoji extraction, tokenization, seed-word
//! removal, stopword removal, stemming. Seed words and stopwords are matched
//! on raw lowercased surface forms *before* stemming, so a seed word whose
//! stem collides with an innocent word never over-removes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ClassLabel, ProfileRecord};
use crate::stem::stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    Tweets,
    Description,
    Emoji,
    ImageTags,
    VideoText,
}

impl Channel {
    /// Fixed channel order used everywhere tokens are merged.
    pub const ALL: [Channel; 5] = [
        Channel::Tweets,
        Channel::Description,
        Channel::Emoji,
        Channel::ImageTags,
        Channel::VideoText,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Tweets => "tweets",
            Channel::Description => "description",
            Channel::Emoji => "emoji",
            Channel::ImageTags => "image_tags",
            Channel::VideoText => "video_text",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Lowercase surface forms removed after tokenization.
    pub stopwords: BTreeSet<String>,
    /// Lowercase surface forms of the collection-mechanism query terms,
    /// removed before stemming to avoid label leakage.
    pub seed_words: BTreeSet<String>,
    pub stem: bool,
    /// Emoji codepoint sequence to alias token (one token per emoji).
    pub emoji_alias: BTreeMap<String, String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: default_stopwords(),
            seed_words: BTreeSet::new(),
            stem: true,
            emoji_alias: default_emoji_aliases(),
        }
    }
}

impl PreprocessConfig {
    /// No filtering, no emoji table, no stemming; mostly for tests.
    pub fn bare() -> Self {
        PreprocessConfig {
            stopwords: BTreeSet::new(),
            seed_words: BTreeSet::new(),
            stem: false,
            emoji_alias: BTreeMap::new(),
        }
    }
}

/// Parse a one-token-per-line file; `#` starts a comment, entries are
/// lowercased.
pub fn load_token_file(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if !entry.is_empty() {
            out.insert(entry.to_lowercase());
        }
    }
    Ok(out)
}

/// Parse an emoji alias file: `<emoji sequence> <alias_token>` per line.
pub fn load_emoji_alias_file(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        let mut parts = entry.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some(emoji), Some(alias)) => {
                out.insert(emoji.to_string(), alias.to_lowercase());
            }
            _ => {
                return Err(Error::parse(
                    idx + 1,
                    "expected '<emoji sequence> <alias_token>'",
                ))
            }
        }
    }
    Ok(out)
}

/// Remove every aliased emoji sequence from `text` and return the stripped
/// text plus alias tokens in order of occurrence. Longest alias key wins at
/// each position; unknown symbols pass through untouched.
pub fn extract_emoji(
    text: &str,
    alias: &BTreeMap<String, String>,
) -> (String, Vec<String>) {
    if alias.is_empty() {
        return (text.to_string(), Vec::new());
    }
    let mut stripped = String::with_capacity(text.len());
    let mut tokens = Vec::new();
    let mut rest = text;
    'outer: while !rest.is_empty() {
        let mut best: Option<(&str, &str)> = None;
        for (seq, tok) in alias {
            if rest.starts_with(seq.as_str())
                && best.map_or(true, |(s, _)| seq.len() > s.len())
            {
                best = Some((seq.as_str(), tok.as_str()));
            }
        }
        if let Some((seq, tok)) = best {
            tokens.push(tok.to_string());
            rest = &rest[seq.len()..];
            continue 'outer;
        }
        let ch = rest.chars().next().expect("non-empty");
        stripped.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    (stripped, tokens)
}

/// Split raw text into lowercase tokens matching `[a-z0-9_]+`. URLs and
/// user-mentions are stripped whole; the `#` sigil drops while the hashtag
/// body survives as a token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let lower = word.to_lowercase();
        if lower.starts_with("http://")
            || lower.starts_with("https://")
            || lower.starts_with("www.")
            || lower.starts_with('@')
        {
            continue;
        }
        let mut current = String::new();
        for ch in lower.chars() {
            if ch.is_ascii_lowercase() || ch.is_ascii_digit() || ch == '_' {
                current.push(ch);
            } else if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

/// Per-channel and merged token sequences for one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedProfile {
    pub id: String,
    #[serde(default)]
    pub label: Option<ClassLabel>,
    pub tweets: Vec<String>,
    pub description: Vec<String>,
    pub emoji: Vec<String>,
    pub image_tags: Vec<String>,
    pub video_text: Vec<String>,
}

impl TokenizedProfile {
    pub fn channel(&self, channel: Channel) -> &[String] {
        match channel {
            Channel::Tweets => &self.tweets,
            Channel::Description => &self.description,
            Channel::Emoji => &self.emoji,
            Channel::ImageTags => &self.image_tags,
            Channel::VideoText => &self.video_text,
        }
    }

    /// All channel sequences concatenated in the fixed channel order.
    pub fn merged_tokens(&self) -> impl Iterator<Item = &str> {
        Channel::ALL
            .into_iter()
            .flat_map(|c| self.channel(c).iter().map(|s| s.as_str()))
    }

    pub fn merged_len(&self) -> usize {
        Channel::ALL.into_iter().map(|c| self.channel(c).len()).sum()
    }

    /// The completeness filter used by the restricted baseline: every one of
    /// the five channels non-empty after preprocessing.
    pub fn all_channels_populated(&self) -> bool {
        Channel::ALL.into_iter().all(|c| !self.channel(c).is_empty())
    }
}

fn filter_and_stem(tokens: Vec<String>, config: &PreprocessConfig) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !config.seed_words.contains(t))
        .filter(|t| !config.stopwords.contains(t))
        .map(|t| if config.stem { stem(&t) } else { t })
        .collect()
}

/// Run the full pipeline over one record. Pure: identical record and config
/// always produce identical output.
pub fn preprocess_profile(record: &ProfileRecord, config: &PreprocessConfig) -> TokenizedProfile {
    let mut emoji_tokens = Vec::new();
    let mut text_channel = |texts: &[String]| -> Vec<String> {
        let mut out = Vec::new();
        for text in texts {
            let (stripped, emojis) = extract_emoji(text, &config.emoji_alias);
            emoji_tokens.extend(emojis);
            out.extend(tokenize(&stripped));
        }
        filter_and_stem(out, config)
    };

    let tweets = text_channel(&record.tweets);
    let description = text_channel(std::slice::from_ref(&record.description));
    let video_text = text_channel(&record.video_text);
    // image tags skip emoji extraction but share the rest of the pipeline
    let image_tags = filter_and_stem(
        record.image_tags.iter().flat_map(|t| tokenize(t)).collect(),
        config,
    );
    let emoji = filter_and_stem(emoji_tokens, config);

    TokenizedProfile {
        id: record.id.clone(),
        label: record.label,
        tweets,
        description,
        emoji,
        image_tags,
        video_text,
    }
}

/// Write tokenized profiles as line-delimited JSON.
pub fn write_tokenized(path: impl AsRef<Path>, profiles: &[TokenizedProfile]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for profile in profiles {
        let line = serde_json::to_string(profile)
            .map_err(|e| Error::validation(format!("serialize profile '{}': {e}", profile.id)))?;
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_tokenized(path: impl AsRef<Path>) -> Result<Vec<TokenizedProfile>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let profile: TokenizedProfile =
            serde_json::from_str(&line).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        out.push(profile);
    }
    Ok(out)
}

/// English stopword list shipped with the artifact (~175 surface forms,
/// including the fragments contractions tokenize into). Overridable by file.
pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS.iter().map(|w| w.to_string()).collect()
}

const DEFAULT_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
    "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves",
    "what", "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
    "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
    "did", "doing", "will", "would", "shall", "should", "can", "could", "may", "might",
    "must", "ought", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further",
    "then", "once", "here", "there", "when", "where", "why", "how", "all", "any",
    "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor",
    "not", "only", "own", "same", "so", "than", "too", "very", "just", "now", "s",
    "t", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn",
    "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn", "needn",
    "shan", "shouldn", "wasn", "weren", "won", "wouldn", "don", "cannot", "let",
    "onto", "upon", "within", "without", "among", "across", "toward", "towards",
    "along", "around", "behind", "beyond",
];

/// Default emoji alias table: one underscore-joined token per emoji so each
/// emoji stays a single vocabulary entry. Overridable by file.
pub fn default_emoji_aliases() -> BTreeMap<String, String> {
    DEFAULT_EMOJI_ALIASES
        .iter()
        .map(|(e, a)| (e.to_string(), a.to_string()))
        .collect()
}

const DEFAULT_EMOJI_ALIASES: &[(&str, &str)] = &[
    ("⛽", "fuel_pump"),
    ("🔫", "pistol"),
    ("👮", "police_officer"),
    ("💰", "money_bag"),
    ("💸", "money_with_wings"),
    ("🔓", "unlock"),
    ("😠", "angry_face"),
    ("😡", "pouting_face"),
    ("👿", "imp"),
    ("😈", "smiling_imp"),
    ("💵", "dollar_bills"),
    ("🚬", "cigarette"),
    ("🔪", "knife"),
    ("💀", "skull"),
    ("🙏", "folded_hands"),
    ("❤️", "red_heart"),
    ("❤", "red_heart"),
    ("😂", "tears_of_joy"),
    ("🎵", "musical_note"),
    ("🎶", "musical_notes"),
    ("🌴", "palm_tree"),
    ("🌅", "sunrise"),
    ("🏖️", "beach_umbrella"),
    ("🏖", "beach_umbrella"),
    ("🐶", "dog_face"),
    ("☀️", "sun"),
    ("☀", "sun"),
    ("😍", "heart_eyes"),
    ("💯", "hundred_points"),
    ("🔥", "fire"),
    ("💊", "pill"),
    ("😎", "sunglasses_face"),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn alias(entries: &[(&str, &str)]) -> BTreeMap<String, String> {
        entries
            .iter()
            .map(|(e, a)| (e.to_string(), a.to_string()))
            .collect()
    }

    #[test]
    fn extract_emoji_examples() {
        let table = alias(&[("🔫", "pistol")]);
        let (stripped, tokens) = extract_emoji("sold out 🔫", &table);
        assert_eq!(stripped, "sold out ");
        assert_eq!(tokens, ["pistol"]);

        let (stripped, tokens) = extract_emoji("hello world", &table);
        assert_eq!(stripped, "hello world");
        assert!(tokens.is_empty());

        let table = alias(&[("⛽", "fuel_pump")]);
        let (stripped, tokens) = extract_emoji("⛽⛽", &table);
        assert_eq!(stripped, "");
        assert_eq!(tokens, ["fuel_pump", "fuel_pump"]);
    }

    #[test]
    fn extract_emoji_longest_match() {
        // with and without the variation selector both map; VS form wins
        let table = alias(&[("❤", "red_heart"), ("❤️", "red_heart")]);
        let (stripped, tokens) = extract_emoji("x❤️y", &table);
        assert_eq!(stripped, "xy");
        assert_eq!(tokens, ["red_heart"]);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Free my nigga RIP"), ["free", "my", "nigga", "rip"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("check https://t.co/x #GDK @user"), ["check", "gdk"]);
        assert_eq!(tokenize("don't stop-me now_ok"), ["don", "t", "stop", "me", "now_ok"]);
        assert_eq!(tokenize("WWW.site.com stays? www.other.com"), ["stays"]);
    }

    fn record(id: &str, tweets: &[&str], description: &str) -> ProfileRecord {
        ProfileRecord {
            id: id.into(),
            label: Some(ClassLabel::Gang),
            description: description.into(),
            tweets: tweets.iter().map(|t| t.to_string()).collect(),
            image_tags: vec![],
            video_text: vec![],
        }
    }

    #[test]
    fn empty_record_gives_empty_channels() {
        let got = preprocess_profile(&record("p", &[], ""), &PreprocessConfig::default());
        assert_eq!(got.merged_len(), 0);
        assert!(!got.all_channels_populated());
    }

    #[test]
    fn pipeline_order_stopwords_then_stem() {
        let mut config = PreprocessConfig::bare();
        config.stopwords.insert("my".into());
        config.stem = true;
        let got = preprocess_profile(&record("p", &[], "free my guys"), &config);
        assert_eq!(got.description, ["free", "guy"]);
    }

    #[test]
    fn seed_word_removed_pre_stemming() {
        let mut config = PreprocessConfig::bare();
        config.seed_words.insert("cooking".into());
        config.stem = true;
        let got = preprocess_profile(&record("p", &["cooking cooks daily"], ""), &config);
        // the seed surface form vanishes even though its stem would collide
        // with the surviving token's stem
        assert_eq!(got.tweets, ["cook", "daili"]);
    }

    #[test]
    fn seed_only_tweet_leaves_no_trace() {
        let mut config = PreprocessConfig::default();
        config.seed_words.insert("gdk".into());
        let got = preprocess_profile(&record("p", &["#GDK"], ""), &config);
        assert_eq!(got.merged_len(), 0);
    }

    #[test]
    fn emoji_flow_into_emoji_channel() {
        let config = PreprocessConfig::default();
        let rec = ProfileRecord {
            id: "p".into(),
            label: None,
            description: "living the life ⛽".into(),
            tweets: vec!["sold out 🔫🔫".into()],
            image_tags: vec!["Palm Tree".into()],
            video_text: vec!["new track 🎵".into()],
        };
        let got = preprocess_profile(&rec, &config);
        assert_eq!(got.emoji, ["pistol", "pistol", "fuel_pump", "musical_not"]);
        assert_eq!(got.image_tags, ["palm", "tree"]);
        assert_eq!(got.tweets, ["sold"]);
        let merged: Vec<&str> = got.merged_tokens().collect();
        assert_eq!(merged.len(), got.merged_len());
    }

    #[test]
    fn preprocess_is_pure() {
        let config = PreprocessConfig::default();
        let rec = record("p", &["Free my guys 🔥 #RIP"], "real one");
        assert_eq!(
            preprocess_profile(&rec, &config),
            preprocess_profile(&rec, &config)
        );
    }

    #[test]
    fn token_file_parsing() {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nFree\nrip # trailing\n\n").unwrap();
        f.flush().unwrap();
        let got = load_token_file(f.path()).unwrap();
        assert_eq!(got, ["free", "rip"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn emoji_file_parsing() {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "🔫 pistol\n⛽ fuel_pump # gas").unwrap();
        f.flush().unwrap();
        let got = load_emoji_alias_file(f.path()).unwrap();
        assert_eq!(got.get("🔫").unwrap(), "pistol");
        assert_eq!(got.get("⛽").unwrap(), "fuel_pump");
    }
}
