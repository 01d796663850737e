//! Priority-ordered disease term lists answering two query shapes:
//! longest in-word substring match (composite splitting) and longest
//! multi-token phrase match (one-hot features).
//!
//! Priority is list-major: the first list (by compile order) containing any
//! occurrence wins, and only within that list is the longest occurrence
//! selected. Substring matching ignores terms shorter than
//! [`MIN_SUBSTRING_CHARS`] characters so acronym noise cannot shred every
//! hashtag.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use aho_corasick::AhoCorasick;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::tokenizer::Token;

/// Shortest term (in characters) eligible for in-word substring matching.
pub const MIN_SUBSTRING_CHARS: usize = 3;

/// Canonical term form: NFC, lowercased, trimmed, inner whitespace collapsed.
pub fn normalize(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    let mut pending_space = false;
    for c in term.nfc().flat_map(char::to_lowercase) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// One named term list. Terms are stored normalized and deduplicated.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    name: String,
    priority: usize,
    terms: HashSet<String>,
    max_phrase_words: usize,
}

impl Gazetteer {
    fn new(name: String, priority: usize, terms: HashSet<String>) -> Self {
        let max_phrase_words = terms
            .iter()
            .map(|t| t.split(' ').count())
            .max()
            .unwrap_or(0);
        Gazetteer {
            name,
            priority,
            terms,
            max_phrase_words,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn priority(&self) -> usize {
        self.priority
    }

    pub fn terms(&self) -> &HashSet<String> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A substring occurrence inside a composite word, in character offsets of
/// the queried word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstringMatch {
    pub begin: usize,
    pub end: usize,
    pub gazetteer: String,
}

/// Priority-ordered gazetteers plus one substring automaton per list.
#[derive(Debug)]
pub struct GazetteerSet {
    gazetteers: Vec<Gazetteer>,
    // Parallel to `gazetteers`; patterns are the substring-eligible terms,
    // with pattern id -> term char length recorded for offset math.
    automata: Vec<Option<AhoCorasick>>,
    pattern_char_lens: Vec<Vec<usize>>,
}

impl GazetteerSet {
    /// Compile term-list files in priority order (position = priority).
    ///
    /// Files are UTF-8, one term per line; `#`-prefixed lines are comments;
    /// blank lines are skipped. A list whose terms all normalize away is an
    /// error naming the list.
    pub fn compile(sources: &[(String, std::path::PathBuf)]) -> Result<Self> {
        let mut lists = Vec::with_capacity(sources.len());
        for (name, path) in sources {
            let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut terms = Vec::new();
            for line in content.lines() {
                if line.starts_with('#') {
                    continue;
                }
                terms.push(line.to_string());
            }
            lists.push((name.clone(), terms));
        }
        Self::from_term_lists(lists)
    }

    /// Build directly from in-memory lists, in priority order.
    pub fn from_term_lists<S: AsRef<str>>(lists: Vec<(String, Vec<S>)>) -> Result<Self> {
        let mut gazetteers = Vec::with_capacity(lists.len());
        for (priority, (name, raw_terms)) in lists.into_iter().enumerate() {
            let mut terms = HashSet::new();
            for raw in &raw_terms {
                let norm = normalize(raw.as_ref());
                if !norm.is_empty() {
                    terms.insert(norm);
                }
            }
            if terms.is_empty() {
                return Err(Error::EmptyGazetteer { name });
            }
            gazetteers.push(Gazetteer::new(name, priority, terms));
        }
        Ok(Self::index(gazetteers))
    }

    /// A set with no gazetteers: every query misses.
    pub fn empty() -> Self {
        Self::index(Vec::new())
    }

    fn index(gazetteers: Vec<Gazetteer>) -> Self {
        let mut automata = Vec::with_capacity(gazetteers.len());
        let mut pattern_char_lens = Vec::with_capacity(gazetteers.len());
        for gaz in &gazetteers {
            let mut patterns: Vec<&String> = gaz
                .terms
                .iter()
                .filter(|t| t.chars().count() >= MIN_SUBSTRING_CHARS)
                .collect();
            patterns.sort(); // deterministic pattern ids
            let lens: Vec<usize> = patterns.iter().map(|p| p.chars().count()).collect();
            let automaton = if patterns.is_empty() {
                None
            } else {
                Some(AhoCorasick::new(&patterns).expect("automaton build"))
            };
            automata.push(automaton);
            pattern_char_lens.push(lens);
        }
        GazetteerSet {
            gazetteers,
            automata,
            pattern_char_lens,
        }
    }

    pub fn gazetteers(&self) -> &[Gazetteer] {
        &self.gazetteers
    }

    pub fn by_name(&self, name: &str) -> Option<&Gazetteer> {
        self.gazetteers.iter().find(|g| g.name == name)
    }

    /// Longest in-word substring occurrence, consulting gazetteers strictly
    /// in priority order: the first list with any occurrence wins; within it
    /// the longest occurrence, ties broken by smallest begin. Offsets are
    /// character positions in `word` as given.
    ///
    /// Matching is case-insensitive: the word is case-folded character by
    /// character with an offset map back to the original positions.
    pub fn longest_substring_match(&self, word: &str) -> Option<SubstringMatch> {
        if word.is_empty() {
            return None;
        }
        // Normalized text + provenance: normalized char index -> original char index.
        let mut norm = String::with_capacity(word.len());
        let mut origin = Vec::with_capacity(word.len());
        for (i, c) in word.chars().enumerate() {
            for lc in c.to_lowercase() {
                norm.push(lc);
                origin.push(i);
            }
        }
        let word_len = word.chars().count();
        // Byte offset -> normalized char index (for automaton match spans).
        let mut char_of_byte = vec![0usize; norm.len() + 1];
        for (ci, (bi, _)) in norm.char_indices().enumerate() {
            char_of_byte[bi] = ci;
        }
        char_of_byte[norm.len()] = origin.len();

        for (gi, automaton) in self.automata.iter().enumerate() {
            let Some(ac) = automaton else { continue };
            // (length desc, begin asc) in normalized char space
            let mut best: Option<(usize, usize)> = None;
            for m in ac.find_overlapping_iter(&norm) {
                let b = char_of_byte[m.start()];
                let len = self.pattern_char_lens[gi][m.pattern().as_usize()];
                match best {
                    Some((bb, bl)) if (len, std::cmp::Reverse(b)) <= (bl, std::cmp::Reverse(bb)) => {}
                    _ => best = Some((b, len)),
                }
            }
            if let Some((b, len)) = best {
                let ob = origin[b];
                let oe = origin
                    .get(b + len - 1)
                    .map_or(word_len, |&last| last + 1);
                return Some(SubstringMatch {
                    begin: ob,
                    end: oe,
                    gazetteer: self.gazetteers[gi].name.clone(),
                });
            }
        }
        None
    }

    /// Persist the compiled set: magic string, format version, then per list
    /// its name, term count and length-prefixed UTF-8 terms.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.gazetteers.len() as u32).to_le_bytes());
        for gaz in &self.gazetteers {
            push_str(&mut buf, &gaz.name);
            let mut terms: Vec<&String> = gaz.terms.iter().collect();
            terms.sort();
            buf.extend_from_slice(&(terms.len() as u32).to_le_bytes());
            for t in terms {
                push_str(&mut buf, t);
            }
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Load a cache written by [`GazetteerSet::save_cache`].
    pub fn load_cache(path: &Path) -> Result<Self> {
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut r = Reader { buf: &buf, pos: 0 };
        let bad = |m: &str| Error::Validation(format!("{}: {m}", path.display()));
        if r.take(CACHE_MAGIC.len()).ok_or_else(|| bad("truncated cache"))? != CACHE_MAGIC {
            return Err(bad("not a gazetteer cache (bad magic)"));
        }
        let version = r.u32().ok_or_else(|| bad("truncated cache"))?;
        if version != CACHE_VERSION {
            return Err(bad(&format!("unsupported cache version {version}")));
        }
        let n_lists = r.u32().ok_or_else(|| bad("truncated cache"))?;
        let mut gazetteers = Vec::with_capacity(n_lists as usize);
        for priority in 0..n_lists as usize {
            let name = r.string().ok_or_else(|| bad("truncated list name"))?;
            let n_terms = r.u32().ok_or_else(|| bad("truncated term count"))?;
            let mut terms = HashSet::with_capacity(n_terms as usize);
            for _ in 0..n_terms {
                terms.insert(r.string().ok_or_else(|| bad("truncated term"))?);
            }
            if terms.is_empty() {
                return Err(Error::EmptyGazetteer { name });
            }
            gazetteers.push(Gazetteer::new(name, priority, terms));
        }
        if r.pos != buf.len() {
            return Err(bad("trailing bytes after cache payload"));
        }
        Ok(Self::index(gazetteers))
    }
}

const CACHE_MAGIC: &[u8] = b"DISNERGZ";
const CACHE_VERSION: u32 = 1;

fn push_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        if end > self.buf.len() {
            return None;
        }
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Some(out)
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn string(&mut self) -> Option<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.take(len)?.to_vec()).ok()
    }
}

/// Greedy left-to-right longest phrase match of token windows against one
/// gazetteer. Every token inside a matched window is flagged; matched
/// windows never overlap (the scan resumes after each match).
pub fn match_phrase_flags(tokens: &[Token], gaz: &Gazetteer) -> Vec<bool> {
    let norm: Vec<String> = tokens.iter().map(|t| normalize(&t.text)).collect();
    let t = norm.len();
    let mut flags = vec![false; t];
    let mut i = 0;
    while i < t {
        let max_w = gaz.max_phrase_words.min(t - i);
        let mut matched = 0;
        for w in (1..=max_w).rev() {
            let joined = norm[i..i + w].join(" ");
            if gaz.terms.contains(&joined) {
                matched = w;
                break;
            }
        }
        if matched > 0 {
            flags[i..i + matched].iter_mut().for_each(|f| *f = true);
            i += matched;
        } else {
            i += 1;
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::{Token, TokenKind};
    use proptest::prelude::*;

    fn set(lists: &[(&str, &[&str])]) -> GazetteerSet {
        GazetteerSet::from_term_lists(
            lists
                .iter()
                .map(|(n, ts)| (n.to_string(), ts.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    fn toks(texts: &[&str]) -> Vec<Token> {
        let mut pos = 0;
        texts
            .iter()
            .map(|t| {
                let begin = pos;
                let len = t.chars().count();
                pos += len + 1;
                Token {
                    text: t.to_string(),
                    begin,
                    end: begin + len,
                    kind: TokenKind::Word,
                }
            })
            .collect()
    }

    #[test]
    fn normalize_case_folds() {
        assert_eq!(normalize("Epilepsia"), "epilepsia");
        assert_eq!(normalize("COVID"), "covid");
    }

    #[test]
    fn normalize_collapses_whitespace() {
        assert_eq!(normalize("  Diabetes   Mellitus "), "diabetes mellitus");
    }

    #[test]
    fn compile_dedups_after_normalize() {
        let gs = set(&[("gold", &["Gripe", "gripe"])]);
        assert_eq!(gs.by_name("gold").unwrap().len(), 1);
    }

    #[test]
    fn compile_assigns_priorities_in_order() {
        let gs = set(&[
            ("gold", &["a b c"]),
            ("distemist", &["d e f"]),
            ("umls", &["g h i"]),
            ("silver", &["j k l"]),
        ]);
        let prios: Vec<(String, usize)> = gs
            .gazetteers()
            .iter()
            .map(|g| (g.name().to_string(), g.priority()))
            .collect();
        assert_eq!(
            prios,
            vec![
                ("gold".to_string(), 0),
                ("distemist".to_string(), 1),
                ("umls".to_string(), 2),
                ("silver".to_string(), 3)
            ]
        );
    }

    #[test]
    fn compile_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.txt");
        std::fs::write(&p, "# header\ncovid\n").unwrap();
        let gs = GazetteerSet::compile(&[("gold".to_string(), p)]).unwrap();
        assert_eq!(gs.by_name("gold").unwrap().len(), 1);
    }

    #[test]
    fn compile_rejects_empty_list() {
        let err =
            GazetteerSet::from_term_lists(vec![("gold".to_string(), vec!["   ", "# nope"])])
                .unwrap_err();
        assert!(err.to_string().contains("gold"), "{err}");
    }

    #[test]
    fn substring_match_finds_covid() {
        let gs = set(&[("gold", &["covid"])]);
        let m = gs.longest_substring_match("nosolohaycovid").unwrap();
        assert_eq!((m.begin, m.end, m.gazetteer.as_str()), (9, 14, "gold"));
    }

    #[test]
    fn substring_match_is_case_insensitive() {
        let gs = set(&[("distemist", &["epilepsia"])]);
        let m = gs.longest_substring_match("InvestigaEpilepsia").unwrap();
        assert_eq!((m.begin, m.end, m.gazetteer.as_str()), (9, 18, "distemist"));
    }

    #[test]
    fn substring_match_absent() {
        let gs = set(&[("gold", &["covid", "gripe", "epilepsia"])]);
        assert_eq!(gs.longest_substring_match("juntosesmejor"), None);
    }

    #[test]
    fn priority_beats_length_across_lists() {
        let gs = set(&[("gold", &["gripe"]), ("silver", &["gripey"])]);
        let m = gs.longest_substring_match("xgripey").unwrap();
        assert_eq!((m.begin, m.end, m.gazetteer.as_str()), (1, 6, "gold"));
    }

    #[test]
    fn short_terms_never_substring_match() {
        let gs = set(&[("gold", &["ek", "gripe"])]);
        assert_eq!(gs.longest_substring_match("ekx"), None);
        assert!(gs.longest_substring_match("lagripe").is_some());
    }

    #[test]
    fn longest_within_list_tie_leftmost() {
        let gs = set(&[("gold", &["aba", "bab"])]);
        // "ababab": "aba" at 0 and 2, "bab" at 1 and 3 — all length 3; leftmost wins.
        let m = gs.longest_substring_match("ababab").unwrap();
        assert_eq!((m.begin, m.end), (0, 3));
    }

    #[test]
    fn phrase_flags_two_token_term() {
        let gs = set(&[("umls", &["diabetes mellitus"])]);
        let tokens = toks(&["la", "diabetes", "mellitus", "tipo", "2"]);
        let flags = match_phrase_flags(&tokens, gs.by_name("umls").unwrap());
        assert_eq!(flags, vec![false, true, true, false, false]);
    }

    #[test]
    fn phrase_flags_case_insensitive_single() {
        let gs = set(&[("umls", &["gripe"])]);
        let flags = match_phrase_flags(&toks(&["Gripe"]), gs.by_name("umls").unwrap());
        assert_eq!(flags, vec![true]);
    }

    #[test]
    fn phrase_flags_no_match() {
        let gs = set(&[("umls", &["diabetes"])]);
        let flags = match_phrase_flags(&toks(&["tos"]), gs.by_name("umls").unwrap());
        assert_eq!(flags, vec![false]);
    }

    #[test]
    fn cache_roundtrip() {
        let gs = set(&[
            ("gold", &["gripe", "diabetes mellitus"]),
            ("umls", &["covid", "epilepsia"]),
        ]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gaz.bin");
        gs.save_cache(&p).unwrap();
        let loaded = GazetteerSet::load_cache(&p).unwrap();
        assert_eq!(loaded.gazetteers().len(), 2);
        for (a, b) in gs.gazetteers().iter().zip(loaded.gazetteers()) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.priority(), b.priority());
            assert_eq!(a.terms(), b.terms());
        }
        // queries agree after reload
        assert_eq!(
            gs.longest_substring_match("nosolohaycovid"),
            loaded.longest_substring_match("nosolohaycovid")
        );
    }

    #[test]
    fn cache_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.bin");
        std::fs::write(&p, b"not a cache").unwrap();
        assert!(GazetteerSet::load_cache(&p).is_err());
    }

    // Reference implementations used by the property tests below. They share
    // nothing with the automaton path.
    pub(crate) fn brute_substring_match(
        word: &str,
        lists: &[(&str, Vec<String>)],
    ) -> Option<(usize, usize, String)> {
        let chars: Vec<char> = word
            .chars()
            .flat_map(char::to_lowercase)
            .collect();
        for (name, terms) in lists {
            let normed: HashSet<String> = terms.iter().map(|t| normalize(t)).collect();
            let mut best: Option<(usize, usize)> = None;
            for b in 0..chars.len() {
                for e in (b + MIN_SUBSTRING_CHARS..=chars.len()).rev() {
                    let cand: String = chars[b..e].iter().collect();
                    if normed.contains(&cand) {
                        let better = match best {
                            None => true,
                            Some((bb, be)) => {
                                (e - b) > (be - bb) || ((e - b) == (be - bb) && b < bb)
                            }
                        };
                        if better {
                            best = Some((b, e));
                        }
                    }
                }
            }
            if let Some((b, e)) = best {
                return Some((b, e, name.to_string()));
            }
        }
        None
    }

    pub(crate) fn brute_phrase_flags(texts: &[String], terms: &HashSet<String>) -> Vec<bool> {
        let norm: Vec<String> = texts.iter().map(|t| normalize(t)).collect();
        let t = norm.len();
        let mut flags = vec![false; t];
        let mut i = 0;
        while i < t {
            let mut matched = 0;
            for w in (1..=(t - i)).rev() {
                if terms.contains(&norm[i..i + w].join(" ")) {
                    matched = w;
                    break;
                }
            }
            if matched > 0 {
                for k in i..i + matched {
                    flags[k] = true;
                }
                i += matched;
            } else {
                i += 1;
            }
        }
        flags
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,30}") {
            let once = normalize(&s);
            prop_assert_eq!(normalize(&once), once);
        }

        #[test]
        fn substring_match_agrees_with_brute_force(
            word in "[abcdeABCDE]{0,18}",
            gold in proptest::collection::vec("[abcde]{1,6}", 0..12),
            silver in proptest::collection::vec("[abcde]{1,6}", 0..12),
        ) {
            let lists: Vec<(&str, Vec<String>)> = vec![
                ("gold", gold.clone()),
                ("silver", silver.clone()),
            ];
            let mut compiled = Vec::new();
            for (n, ts) in &lists {
                if !ts.is_empty() {
                    compiled.push((n.to_string(), ts.clone()));
                }
            }
            let gs = if compiled.is_empty() {
                GazetteerSet::empty()
            } else {
                GazetteerSet::from_term_lists(compiled).unwrap()
            };
            let effective: Vec<(&str, Vec<String>)> = lists
                .into_iter()
                .filter(|(_, ts)| !ts.is_empty())
                .collect();
            let expected = brute_substring_match(&word, &effective);
            let got = gs
                .longest_substring_match(&word)
                .map(|m| (m.begin, m.end, m.gazetteer));
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn phrase_flags_agree_with_brute_force(
            texts in proptest::collection::vec("[abc]{1,3}", 0..10),
            terms in proptest::collection::vec("[abc]{1,3}( [abc]{1,3}){0,2}", 1..10),
        ) {
            let gs = GazetteerSet::from_term_lists(vec![("g".to_string(), terms)]).unwrap();
            let gaz = gs.by_name("g").unwrap();
            let tokens = toks(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            let got = match_phrase_flags(&tokens, gaz);
            let expected = brute_phrase_flags(&texts, gaz.terms());
            prop_assert_eq!(got, expected);
        }
    }
}
