//! Tweets and gold mention annotations with exact character offsets.
//!
//! All offsets count Unicode scalar values into the tweet text as loaded;
//! they are independent of the byte encoding. TSV fields escape `\`, tab and
//! newline as `\\`, `\t`, `\n`; writers emit this canonical form with `\n`
//! line terminators and no BOM.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// One tweet: an id and the raw text (hashtags and usernames inline).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub text: String,
}

/// A gold disease mention: a character span into one tweet's text.
///
/// `begin` is inclusive, `end` exclusive, and `extraction` must equal
/// `text[begin..end)` of the owning tweet (checked by [`validate_corpus`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub tweet_id: String,
    pub begin: usize,
    pub end: usize,
    pub category: String,
    pub extraction: String,
}

/// A single validation failure discovered while assembling a [`Corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub tweet_id: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tweet {}: {}", self.tweet_id, self.message)
    }
}

/// Validated, immutable collection of tweets plus their mentions.
///
/// Safe to share between concurrent readers; nothing mutates it after
/// [`validate_corpus`] returns.
#[derive(Debug, Clone)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    index: HashMap<String, usize>,
    mentions: BTreeMap<String, Vec<Mention>>,
}

impl Corpus {
    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn tweet(&self, id: &str) -> Option<&Tweet> {
        self.index.get(id).map(|&i| &self.tweets[i])
    }

    /// Mentions for one tweet, sorted by `(begin, end)`, duplicates collapsed.
    pub fn mentions_for(&self, tweet_id: &str) -> &[Mention] {
        self.mentions.get(tweet_id).map_or(&[], Vec::as_slice)
    }

    pub fn all_mentions(&self) -> impl Iterator<Item = &Mention> {
        self.mentions.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }
}

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Substring by character offsets, `begin` inclusive / `end` exclusive.
/// Returns `None` when the range falls outside the text.
pub fn char_substring(s: &str, begin: usize, end: usize) -> Option<String> {
    if begin > end {
        return None;
    }
    let mut it = s.chars();
    let mut out = String::new();
    for _ in 0..begin {
        it.next()?;
    }
    for _ in begin..end {
        out.push(it.next()?);
    }
    Some(out)
}

/// Escape a TSV field: `\` → `\\`, tab → `\t`, newline → `\n`.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_field`]. Rejects unknown or dangling escapes.
pub fn unescape_field(s: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some(other) => return Err(format!("unknown escape sequence \\{other}")),
            None => return Err("dangling backslash at end of field".to_string()),
        }
    }
    Ok(out)
}

/// Load tweets from a TSV file (`id<TAB>text`, text escaped).
///
/// Records come back in file order. Duplicate ids and empty texts are
/// rejected; malformed lines report their 1-based line number.
pub fn load_tweets(path: &Path) -> Result<Vec<Tweet>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tweets(&content, path)
}

fn parse_tweets(content: &str, path: &Path) -> Result<Vec<Tweet>> {
    let mut tweets = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 2 tab-separated columns, found {}", fields.len()),
            ));
        }
        let id = unescape_field(fields[0]).map_err(|m| Error::parse(path, lineno, m))?;
        let text = unescape_field(fields[1]).map_err(|m| Error::parse(path, lineno, m))?;
        if id.is_empty() {
            return Err(Error::parse(path, lineno, "empty tweet id"));
        }
        if text.is_empty() {
            return Err(Error::Validation(format!(
                "{}:{lineno}: tweet {id:?} has empty text",
                path.display()
            )));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "{}:{lineno}: duplicate tweet id {id:?}",
                path.display()
            )));
        }
        tweets.push(Tweet { id, text });
    }
    Ok(tweets)
}

/// Write tweets in canonical escape form.
pub fn save_tweets(path: &Path, tweets: &[Tweet]) -> Result<()> {
    let mut out = String::new();
    for t in tweets {
        out.push_str(&escape_field(&t.id));
        out.push('\t');
        out.push_str(&escape_field(&t.text));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load mentions from a TSV file
/// (`tweet_id<TAB>begin<TAB>end<TAB>category<TAB>extraction`).
///
/// No cross-validation against tweets happens here; see [`validate_corpus`].
pub fn load_mentions(path: &Path) -> Result<Vec<Mention>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mentions(&content, path)
}

fn parse_mentions(content: &str, path: &Path) -> Result<Vec<Mention>> {
    let mut mentions = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 5 tab-separated columns, found {}", fields.len()),
            ));
        }
        let tweet_id = unescape_field(fields[0]).map_err(|m| Error::parse(path, lineno, m))?;
        let begin: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid begin offset {:?}", fields[1])))?;
        let end: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid end offset {:?}", fields[2])))?;
        if begin >= end {
            return Err(Error::Validation(format!(
                "{}:{lineno}: empty or inverted span ({begin}, {end})",
                path.display()
            )));
        }
        let category = unescape_field(fields[3]).map_err(|m| Error::parse(path, lineno, m))?;
        let extraction = unescape_field(fields[4]).map_err(|m| Error::parse(path, lineno, m))?;
        mentions.push(Mention {
            tweet_id,
            begin,
            end,
            category,
            extraction,
        });
    }
    Ok(mentions)
}

/// Write mentions in canonical escape form.
pub fn save_mentions(path: &Path, mentions: &[Mention]) -> Result<()> {
    let mut out = String::new();
    for m in mentions {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            escape_field(&m.tweet_id),
            m.begin,
            m.end,
            escape_field(&m.category),
            escape_field(&m.extraction),
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Check every mention against its tweet and assemble a [`Corpus`].
///
/// All violations are collected and reported together. Duplicate
/// `(begin, end)` spans within a tweet are collapsed (first occurrence kept)
/// and reported in the returned warning list rather than rejected.
pub fn validate_corpus(tweets: Vec<Tweet>, mentions: Vec<Mention>) -> Result<(Corpus, Vec<String>)> {
    let mut index = HashMap::new();
    for (i, t) in tweets.iter().enumerate() {
        index.insert(t.id.clone(), i);
    }

    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    let mut grouped: BTreeMap<String, Vec<Mention>> = BTreeMap::new();

    for m in mentions {
        let Some(&ti) = index.get(&m.tweet_id) else {
            violations.push(Violation {
                tweet_id: m.tweet_id.clone(),
                message: format!(
                    "mention ({}, {}) references unknown tweet id {:?}",
                    m.begin, m.end, m.tweet_id
                ),
            });
            continue;
        };
        let text = &tweets[ti].text;
        if m.begin >= m.end {
            violations.push(Violation {
                tweet_id: m.tweet_id.clone(),
                message: format!("empty or inverted span ({}, {})", m.begin, m.end),
            });
            continue;
        }
        let Some(actual) = char_substring(text, m.begin, m.end) else {
            violations.push(Violation {
                tweet_id: m.tweet_id.clone(),
                message: format!(
                    "span ({}, {}) exceeds tweet length {}",
                    m.begin,
                    m.end,
                    char_len(text)
                ),
            });
            continue;
        };
        if actual != m.extraction {
            violations.push(Violation {
                tweet_id: m.tweet_id.clone(),
                message: format!(
                    "extraction mismatch at ({}, {}): expected {:?}, actual substring {:?}",
                    m.begin, m.end, m.extraction, actual
                ),
            });
            continue;
        }
        grouped.entry(m.tweet_id.clone()).or_default().push(m);
    }

    if !violations.is_empty() {
        return Err(Error::CorpusValidation(violations));
    }

    for (id, list) in grouped.iter_mut() {
        list.sort_by_key(|m| (m.begin, m.end));
        let before = list.len();
        list.dedup_by_key(|m| (m.begin, m.end));
        if list.len() < before {
            warnings.push(format!(
                "tweet {id}: collapsed {} duplicate mention span(s)",
                before - list.len()
            ));
        }
    }

    Ok((
        Corpus {
            tweets,
            index,
            mentions: grouped,
        },
        warnings,
    ))
}
