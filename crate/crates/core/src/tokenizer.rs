//! Offset-preserving tweet segmentation with hashtag/username splitting.
//!
//! Base segmentation: maximal letter runs are words, digit runs are numbers,
//! every other non-whitespace character is its own punct token, `http(s)://`
//! runs up to whitespace are single url tokens, and `#`/`@` followed by a
//! letter or digit become sigil tokens whose trailing run of letters, digits
//! and underscores forms a composite body.
//!
//! Composite bodies are split in two stages: camel-case / separator / digit
//! boundaries first, then recursive longest-substring gazetteer matching on
//! each piece (disabled when `split_enabled` is off, which keeps stage one).

use std::fmt;
use std::path::Path;

use crate::corpus::{escape_field, Corpus, Tweet};
use crate::error::{Error, Result};
use crate::gazetteer::GazetteerSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    HashtagSigil,
    MentionSigil,
    Url,
    CompositePiece,
}

impl TokenKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TokenKind::Word => "word",
            TokenKind::Number => "number",
            TokenKind::Punct => "punct",
            TokenKind::HashtagSigil => "hashtag_sigil",
            TokenKind::MentionSigil => "mention_sigil",
            TokenKind::Url => "url",
            TokenKind::CompositePiece => "composite_piece",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One token; `begin`/`end` are character offsets into the tweet text and
/// `text` equals that exact slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub begin: usize,
    pub end: usize,
    pub kind: TokenKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tweet_id: String,
    pub tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_letter(c: char) -> bool {
    c.is_alphabetic()
}

fn is_digit(c: char) -> bool {
    !c.is_alphabetic() && c.is_numeric()
}

fn is_body_char(c: char) -> bool {
    is_letter(c) || is_digit(c) || c == '_'
}

/// Tokenizer configured with a gazetteer set and the composite-split flag.
pub struct Tokenizer<'a> {
    gazset: &'a GazetteerSet,
    split_enabled: bool,
}

impl<'a> Tokenizer<'a> {
    pub fn new(gazset: &'a GazetteerSet, split_enabled: bool) -> Self {
        Tokenizer {
            gazset,
            split_enabled,
        }
    }

    /// Segment raw text into offset-preserving tokens.
    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if starts_url(&chars, i) {
                let mut j = i;
                while j < n && !chars[j].is_whitespace() {
                    j += 1;
                }
                out.push(make_token(&chars, i, j, TokenKind::Url));
                i = j;
                continue;
            }
            if (c == '#' || c == '@') && i + 1 < n && (is_letter(chars[i + 1]) || is_digit(chars[i + 1])) {
                let kind = if c == '#' {
                    TokenKind::HashtagSigil
                } else {
                    TokenKind::MentionSigil
                };
                out.push(make_token(&chars, i, i + 1, kind));
                let mut j = i + 1;
                while j < n && is_body_char(chars[j]) {
                    j += 1;
                }
                self.split_body(&chars[i + 1..j], i + 1, &mut out);
                i = j;
                continue;
            }
            if is_letter(c) {
                let mut j = i;
                while j < n && is_letter(chars[j]) {
                    j += 1;
                }
                out.push(make_token(&chars, i, j, TokenKind::Word));
                i = j;
                continue;
            }
            if is_digit(c) {
                let mut j = i;
                while j < n && is_digit(chars[j]) {
                    j += 1;
                }
                out.push(make_token(&chars, i, j, TokenKind::Number));
                i = j;
                continue;
            }
            out.push(make_token(&chars, i, i + 1, TokenKind::Punct));
            i += 1;
        }
        out
    }

    pub fn tokenize_tweet(&self, tweet: &Tweet) -> TokenSequence {
        TokenSequence {
            tweet_id: tweet.id.clone(),
            tokens: self.tokenize(&tweet.text),
        }
    }

    /// Split a composite body (sigil already stripped). `body_begin` is the
    /// character offset of the body in the original tweet.
    pub fn split_composite(&self, body: &str, body_begin: usize) -> Vec<Token> {
        let chars: Vec<char> = body.chars().collect();
        let mut out = Vec::new();
        self.split_body(&chars, body_begin, &mut out);
        out
    }

    fn split_body(&self, body: &[char], body_begin: usize, out: &mut Vec<Token>) {
        let m = body.len();
        let mut seg_start = 0;
        for idx in 0..=m {
            let at_sep = idx < m && body[idx] == '_';
            if idx == m || at_sep {
                if idx > seg_start {
                    self.split_segment(body, seg_start, idx, body_begin, out);
                }
                if at_sep {
                    out.push(abs_token(body, idx, idx + 1, body_begin, TokenKind::Punct));
                }
                seg_start = idx + 1;
            }
        }
    }

    // Stage 1: camel-case and letter<->digit boundaries within [s, e).
    fn split_segment(
        &self,
        body: &[char],
        s: usize,
        e: usize,
        body_begin: usize,
        out: &mut Vec<Token>,
    ) {
        let mut cut = s;
        for i in s + 1..e {
            let prev = body[i - 1];
            let cur = body[i];
            let boundary = (cur.is_uppercase() && prev.is_lowercase())
                || (cur.is_uppercase()
                    && prev.is_uppercase()
                    && i + 1 < e
                    && body[i + 1].is_lowercase())
                || (is_letter(prev) && is_digit(cur))
                || (is_digit(prev) && is_letter(cur));
            if boundary {
                self.emit_piece(body, cut, i, body_begin, out);
                cut = i;
            }
        }
        self.emit_piece(body, cut, e, body_begin, out);
    }

    // Stage 2: recursive longest-substring gazetteer split of one piece.
    fn emit_piece(
        &self,
        body: &[char],
        s: usize,
        e: usize,
        body_begin: usize,
        out: &mut Vec<Token>,
    ) {
        if s == e {
            return;
        }
        if self.split_enabled {
            let text: String = body[s..e].iter().collect();
            if let Some(m) = self.gazset.longest_substring_match(&text) {
                if m.end - m.begin < e - s {
                    // strictly inside: prefix / match / suffix, recursing on
                    // the remainders only
                    self.emit_piece(body, s, s + m.begin, body_begin, out);
                    out.push(abs_token(
                        body,
                        s + m.begin,
                        s + m.end,
                        body_begin,
                        TokenKind::CompositePiece,
                    ));
                    self.emit_piece(body, s + m.end, e, body_begin, out);
                    return;
                }
            }
        }
        out.push(abs_token(body, s, e, body_begin, TokenKind::CompositePiece));
    }
}

fn make_token(chars: &[char], begin: usize, end: usize, kind: TokenKind) -> Token {
    Token {
        text: chars[begin..end].iter().collect(),
        begin,
        end,
        kind,
    }
}

fn abs_token(body: &[char], s: usize, e: usize, body_begin: usize, kind: TokenKind) -> Token {
    Token {
        text: body[s..e].iter().collect(),
        begin: body_begin + s,
        end: body_begin + e,
        kind,
    }
}

fn starts_url(chars: &[char], i: usize) -> bool {
    const HTTP: [char; 7] = ['h', 't', 't', 'p', ':', '/', '/'];
    const HTTPS: [char; 8] = ['h', 't', 't', 'p', 's', ':', '/', '/'];
    let matches = |prefix: &[char]| {
        chars.len() >= i + prefix.len()
            && chars[i..i + prefix.len()]
                .iter()
                .zip(prefix)
                .all(|(a, b)| a.eq_ignore_ascii_case(b))
    };
    matches(&HTTP) || matches(&HTTPS)
}

/// Tokenize every tweet in corpus order.
pub fn tokenize_corpus(
    corpus: &Corpus,
    gazset: &GazetteerSet,
    split_enabled: bool,
) -> Vec<TokenSequence> {
    let tk = Tokenizer::new(gazset, split_enabled);
    corpus.tweets().iter().map(|t| tk.tokenize_tweet(t)).collect()
}

/// Write token sequences as TSV: `tweet_id  begin  end  kind  text`.
pub fn save_tokens(path: &Path, sequences: &[TokenSequence]) -> Result<()> {
    let mut out = String::new();
    for seq in sequences {
        for tok in &seq.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                escape_field(&seq.tweet_id),
                tok.begin,
                tok.end,
                tok.kind,
                escape_field(&tok.text),
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
