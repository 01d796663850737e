//! Conversion between character-offset mention spans and per-token BIO tags.
//!
//! Encoding uses an overlap (not containment) coverage rule: a token is
//! covered when its span intersects the mention span. Misaligned mention
//! boundaries and dropped overlapping mentions are reported as warnings, not
//! silently lost. Decoding repairs an orphan `I` (no preceding `B`/`I`) as
//! a `B`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::corpus::{escape_field, Mention};
use crate::error::{Error, Result};
use crate::eval::SpanSet;
use crate::tokenizer::TokenSequence;

/// Per-token label; class order everywhere in this crate is `(B, I, O)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    B,
    I,
    O,
}

impl Tag {
    /// Column index in logits / distributions.
    pub fn index(&self) -> usize {
        match self {
            Tag::B => 0,
            Tag::I => 1,
            Tag::O => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::B => "B",
            Tag::I => "I",
            Tag::O => "O",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence {
    pub tweet_id: String,
    pub tags: Vec<Tag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentIssue {
    /// A mention boundary falls strictly inside a token.
    BoundaryInsideToken,
    /// The mention overlaps no token at all.
    NoCoveredTokens,
    /// The mention shares covered tokens with an earlier mention and was dropped.
    OverlapDropped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentWarning {
    pub tweet_id: String,
    pub begin: usize,
    pub end: usize,
    pub issue: AlignmentIssue,
}

impl fmt::Display for AlignmentWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.issue {
            AlignmentIssue::BoundaryInsideToken => "boundary falls inside a token",
            AlignmentIssue::NoCoveredTokens => "covers no token",
            AlignmentIssue::OverlapDropped => "overlaps an earlier mention and was dropped",
        };
        write!(
            f,
            "tweet {}: mention ({}, {}) {what}",
            self.tweet_id, self.begin, self.end
        )
    }
}

/// Encode mention spans as BIO tags over the given tokens.
///
/// The first covered token of each mention gets `B`, subsequent covered
/// tokens `I`, everything else `O`. Later mentions whose covered tokens
/// collide with an earlier mention are dropped with a warning.
pub fn encode(
    tokens: &TokenSequence,
    mentions: &[Mention],
) -> Result<(TagSequence, Vec<AlignmentWarning>)> {
    for m in mentions {
        if m.tweet_id != tokens.tweet_id {
            return Err(Error::Validation(format!(
                "mention tweet id {:?} does not match token sequence {:?}",
                m.tweet_id, tokens.tweet_id
            )));
        }
    }
    let mut ordered: Vec<&Mention> = mentions.iter().collect();
    ordered.sort_by_key(|m| (m.begin, m.end));

    let t = tokens.tokens.len();
    let mut tags = vec![Tag::O; t];
    let mut taken = vec![false; t];
    let mut warnings = Vec::new();

    for m in ordered {
        let covered: Vec<usize> = tokens
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, tok)| tok.begin < m.end && m.begin < tok.end)
            .map(|(i, _)| i)
            .collect();
        let warn = |issue| AlignmentWarning {
            tweet_id: tokens.tweet_id.clone(),
            begin: m.begin,
            end: m.end,
            issue,
        };
        if covered.is_empty() {
            warnings.push(warn(AlignmentIssue::NoCoveredTokens));
            continue;
        }
        if covered.iter().any(|&i| taken[i]) {
            warnings.push(warn(AlignmentIssue::OverlapDropped));
            continue;
        }
        let first = &tokens.tokens[covered[0]];
        let last = &tokens.tokens[*covered.last().unwrap()];
        if first.begin < m.begin || last.end > m.end {
            warnings.push(warn(AlignmentIssue::BoundaryInsideToken));
        }
        for (k, &i) in covered.iter().enumerate() {
            tags[i] = if k == 0 { Tag::B } else { Tag::I };
            taken[i] = true;
        }
    }

    Ok((
        TagSequence {
            tweet_id: tokens.tweet_id.clone(),
            tags,
        },
        warnings,
    ))
}

/// Decode BIO tags back to character spans. Maximal `B I*` runs become
/// spans; an orphan `I` opens a new span as if it were `B`.
pub fn decode(tokens: &TokenSequence, tags: &TagSequence) -> Result<SpanSet> {
    if tokens.tokens.len() != tags.tags.len() {
        return Err(Error::Shape(format!(
            "tag count {} does not match token count {} for tweet {:?}",
            tags.tags.len(),
            tokens.tokens.len(),
            tokens.tweet_id
        )));
    }
    let mut spans = BTreeSet::new();
    let toks = &tokens.tokens;
    let mut i = 0;
    while i < toks.len() {
        match tags.tags[i] {
            Tag::O => i += 1,
            // B opens a run; a reachable I here is an orphan and is repaired as B
            Tag::B | Tag::I => {
                let start = i;
                i += 1;
                while i < toks.len() && tags.tags[i] == Tag::I {
                    i += 1;
                }
                spans.insert((toks[start].begin, toks[i - 1].end));
            }
        }
    }
    Ok(SpanSet {
        tweet_id: tokens.tweet_id.clone(),
        spans,
    })
}

/// Debug dump: `tweet_id<TAB>tag1 tag2 …` per sequence.
pub fn save_tags(path: &Path, sequences: &[TagSequence]) -> Result<()> {
    let mut out = String::new();
    for seq in sequences {
        let tags: Vec<&str> = seq.tags.iter().map(Tag::as_str).collect();
        out.push_str(&format!("{}\t{}\n", escape_field(&seq.tweet_id), tags.join(" ")));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
