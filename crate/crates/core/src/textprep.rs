//! Review text cleanup: case folding, noise removal, tokenization, stop-word
//! removal and rule-based lemmatization.
//!
//! The pipeline order is fixed: [`normalize`] → [`tokenize`] →
//! [`remove_stopwords`] → [`lemmatize`].
//!
//! # Lemmatizer rules
//!
//! [`lemmatize_word`] applies the first matching rule below and repeats until
//! no rule changes the word (so the result is a fixed point):
//!
//! | rule | condition | action | example |
//! |------|-----------|--------|---------|
//! | exception table | exact word | replace | `children` → `child`, `used` → `use` |
//! | protected words | exact word | keep | `news`, `always`, `family` |
//! | `-ies` | length > 4 | `-y` | `batteries` → `battery` |
//! | `-sses` | | `-ss` | `glasses` → `glass` |
//! | `-ches -shes -xes -zzes` | length > 4 | drop `es` | `boxes` → `box` |
//! | `-s` | length > 3, not `-ss -us -is` | drop `s` | `fonts` → `font` |
//! | `-ing` | stem ≥ 3 letters with a vowel | drop + repair | `flickering` → `flicker` |
//! | `-ed` | not `-eed`, stem ≥ 3 with a vowel | drop + repair | `zoomed` → `zoom` |
//! | `-ily` | stem ≥ 3 | `-y` | `easily` → `easy` |
//! | `-ly` | stem ≥ 4 | drop | `totally` → `total` |
//!
//! Stem repair after `-ing`/`-ed`: stems ending in `at`, `bl` or `iz` get an
//! `e` back (`updated` → `update`); a doubled final consonant other than
//! `l`, `s`, `z` is undoubled (`stopped` → `stop`); a three-letter
//! consonant-vowel-consonant stem not ending in `w`, `x`, `y` gets an `e`
//! (`making` → `make`).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_list_line, read_line_list};
use crate::error::Result;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Ordered lowercase tokens, none empty or containing whitespace.
pub type TokenStream = Vec<String>;

/// Set of lowercase stop words. Serializes as a sorted word array.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<String>", from = "Vec<String>")]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub fn empty() -> Self {
        StopList::default()
    }

    /// The bundled English list.
    pub fn default_english() -> Self {
        StopList::from_words(DEFAULT_STOPWORDS.lines().filter_map(parse_list_line))
    }

    /// Build from arbitrary words. Entries are lowercased; blank entries are
    /// dropped.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        StopList { words }
    }

    /// Load a stop-list file: one word per line, `#` comments allowed.
    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(StopList::from_words(read_line_list(path)?))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Whether `token` or its lemma is listed.
    ///
    /// Checking the lemma keeps stop words out of the lemmatized output
    /// (e.g. `doing` → `do`).
    pub fn is_stop(&self, token: &str) -> bool {
        !self.words.is_empty() && (self.words.contains(token) || self.words.contains(lemmatize_word(token).as_str()))
    }

    /// Sorted entries.
    pub fn words(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.words.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

impl From<StopList> for Vec<String> {
    fn from(s: StopList) -> Self {
        s.words().into_iter().map(str::to_string).collect()
    }
}

impl From<Vec<String>> for StopList {
    fn from(v: Vec<String>) -> Self {
        StopList::from_words(v)
    }
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02bc}')
}

fn looks_like_email(chunk: &str) -> bool {
    match chunk.find('@') {
        Some(at) => at > 0 && chunk[at + 1..].contains('.'),
        None => false,
    }
}

fn url_start(chunk: &str) -> Option<usize> {
    ["http://", "https://", "ftp://", "www."]
        .iter()
        .filter_map(|p| chunk.find(p))
        .min()
}

/// Keep `c` only if it is an alphabetic character that is already in its
/// lowercase form (so normalizing twice is a no-op).
fn keep_letter(c: char) -> bool {
    c.is_alphabetic() && !c.is_uppercase() && {
        let mut lower = c.to_lowercase();
        lower.next() == Some(c) && lower.next().is_none()
    }
}

/// Lowercase `text` and strip URLs, email addresses, digits and every
/// non-letter symbol. Apostrophes inside words are dropped (`don't` →
/// `dont`); everything else removed becomes a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for chunk in text.split_whitespace() {
        let lower: String = chunk.chars().flat_map(char::to_lowercase).collect();
        if looks_like_email(&lower) {
            out.push(' ');
            continue;
        }
        let kept = match url_start(&lower) {
            Some(p) => &lower[..p],
            None => lower.as_str(),
        };
        let chars: Vec<char> = kept.chars().collect();
        for (i, &c) in chars.iter().enumerate() {
            if keep_letter(c) {
                out.push(c);
            } else if is_apostrophe(c)
                && i > 0
                && keep_letter(chars[i - 1])
                && chars.get(i + 1).is_some_and(|&n| keep_letter(n))
            {
                // word-internal apostrophe: drop without splitting
            } else {
                out.push(' ');
            }
        }
        out.push(' ');
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Split normalized text on whitespace.
pub fn tokenize(text: &str) -> TokenStream {
    text.split_whitespace().map(str::to_string).collect()
}

/// Drop stop words, keeping order.
pub fn remove_stopwords(tokens: TokenStream, stops: &StopList) -> TokenStream {
    tokens.into_iter().filter(|t| !stops.is_stop(t)).collect()
}

/// Map every token to its canonical form.
pub fn lemmatize(tokens: TokenStream) -> TokenStream {
    tokens.into_iter().map(|t| lemmatize_word(&t)).collect()
}

/// Full cleanup: normalize, tokenize, remove stop words, lemmatize.
pub fn preprocess(text: &str, stops: &StopList) -> TokenStream {
    lemmatize(remove_stopwords(tokenize(&normalize(text)), stops))
}

const EXCEPTIONS: &[(&str, &str)] = &[
    ("am", "be"),
    ("are", "be"),
    ("been", "be"),
    ("being", "be"),
    ("children", "child"),
    ("did", "do"),
    ("does", "do"),
    ("doing", "do"),
    ("done", "do"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("goes", "go"),
    ("going", "go"),
    ("gone", "go"),
    ("had", "have"),
    ("has", "have"),
    ("having", "have"),
    ("is", "be"),
    ("men", "man"),
    ("mice", "mouse"),
    ("people", "person"),
    ("teeth", "tooth"),
    ("used", "use"),
    ("using", "use"),
    ("was", "be"),
    ("went", "go"),
    ("were", "be"),
    ("women", "woman"),
];

const PROTECTED: &[&str] = &[
    "alias",
    "ally",
    "always",
    "analysis",
    "anomaly",
    "anything",
    "apply",
    "assembly",
    "belly",
    "bully",
    "bus",
    "ceiling",
    "during",
    "early",
    "everything",
    "evening",
    "family",
    "famous",
    "fly",
    "gas",
    "his",
    "holy",
    "ios",
    "italy",
    "its",
    "jelly",
    "july",
    "king",
    "lens",
    "morning",
    "nervous",
    "news",
    "nothing",
    "only",
    "perhaps",
    "plus",
    "previous",
    "rely",
    "reply",
    "ring",
    "series",
    "silly",
    "sing",
    "something",
    "species",
    "spring",
    "supply",
    "this",
    "thus",
    "ugly",
    "various",
    "yes",
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(is_vowel)
}

fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz") {
        return format!("{stem}e");
    }
    if n >= 2
        && b[n - 1] == b[n - 2]
        && b[n - 1].is_ascii_lowercase()
        && !is_vowel(b[n - 1])
        && !matches!(b[n - 1], b'l' | b's' | b'z')
    {
        return stem[..n - 1].to_string();
    }
    if n == 3
        && b.iter().all(u8::is_ascii_lowercase)
        && !is_vowel(b[0])
        && is_vowel(b[1])
        && !is_vowel(b[2])
        && !matches!(b[2], b'w' | b'x' | b'y')
    {
        return format!("{stem}e");
    }
    stem.to_string()
}

/// One rule application, or `None` when no rule fires.
fn lemma_step(w: &str) -> Option<String> {
    if let Some(&(_, to)) = EXCEPTIONS.iter().find(|(from, _)| *from == w) {
        return Some(to.to_string());
    }
    if PROTECTED.contains(&w) || !w.is_ascii() {
        return None;
    }
    let n = w.len();
    if let Some(stem) = w.strip_suffix("ies") {
        if n > 4 {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = w.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    for suffix in ["ches", "shes", "xes", "zzes"] {
        if w.ends_with(suffix) && n > 4 {
            return Some(w[..n - 2].to_string());
        }
    }
    if w.ends_with('s') && n > 3 && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return Some(w[..n - 1].to_string());
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 3 && has_vowel(stem) {
            return Some(repair_stem(stem));
        }
    }
    if let Some(stem) = w.strip_suffix("ed") {
        if !w.ends_with("eed") && stem.len() >= 3 && has_vowel(stem) {
            return Some(repair_stem(stem));
        }
    }
    if let Some(stem) = w.strip_suffix("ily") {
        if stem.len() >= 3 {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = w.strip_suffix("ly") {
        if stem.len() >= 4 {
            return Some(stem.to_string());
        }
    }
    None
}

/// Canonical form of one lowercase word.
pub fn lemmatize_word(word: &str) -> String {
    let mut w = word.to_string();
    // Every rule except the exception table shortens the word and exception
    // targets are terminal, so this settles in a few steps.
    for _ in 0..16 {
        match lemma_step(&w) {
            Some(next) if next != w => w = next,
            _ => break,
        }
    }
    w
}
