//! Tokenization, stop-words, lemmatization and named-entity flagging.
//!
//! Screen text and element descriptions go through separate pipelines that
//! differ in one respect: screen text drops stop-words, descriptions keep
//! them ("arrow up" and "arrow down" must stay distinct).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ContentKind;
use crate::error::{Error, Result};

pub type PipelineKind = ContentKind;

pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const NE_LEXICON_FILE: &str = "ne_lexicon.txt";
pub const LEMMA_EXCEPTIONS_FILE: &str = "lemma_exceptions.tsv";

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");
const DEFAULT_NE_LEXICON: &str = include_str!("../data/ne_lexicon.txt");
const DEFAULT_LEMMA_EXCEPTIONS: &str = include_str!("../data/lemma_exceptions.tsv");

pub fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, '.' | ',' | '!' | '?')
}

/// Maximal runs of non-separator characters.
pub fn tokenize(raw: &str) -> Vec<&str> {
    raw.split(is_separator).filter(|t| !t.is_empty()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub is_stopword: bool,
    pub is_named_entity: bool,
}

/// Lowercase and strip leading/trailing punctuation (`"Hello:"` -> `hello`).
/// Falls back to the lowercased surface when nothing alphanumeric remains.
pub fn normalize_surface(surface: &str) -> String {
    let trimmed = surface.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        surface.to_lowercase()
    } else {
        trimmed.to_lowercase()
    }
}

/// Rule-based lemmatizer: an exceptions dictionary consulted before a small
/// set of inflectional suffix rules. Rules and exceptions are applied until
/// a fixed point, so `lemmatize(lemmatize(w)) == lemmatize(w)`.
#[derive(Debug, Clone, Default)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
}

const MAX_LEMMA_STEPS: usize = 64;

impl Lemmatizer {
    pub fn parse_exceptions(text: &str) -> Result<Self> {
        let mut exceptions = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or_else(|| {
                Error::parse(
                    format!("{LEMMA_EXCEPTIONS_FILE}:{}", n + 1),
                    "expected surface<TAB>lemma",
                )
            })?;
            exceptions.insert(surface.trim().to_lowercase(), lemma.trim().to_lowercase());
        }
        Ok(Lemmatizer { exceptions })
    }

    pub fn lemmatize(&self, surface: &str) -> String {
        let mut word = normalize_surface(surface);
        for _ in 0..MAX_LEMMA_STEPS {
            let next = match self.exceptions.get(&word) {
                Some(l) => l.clone(),
                None => strip_inflection(&word).unwrap_or_else(|| word.clone()),
            };
            if next == word || next.is_empty() {
                break;
            }
            word = next;
        }
        word
    }
}

fn is_vowel(chars: &[char], i: usize) -> bool {
    match chars[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => true,
        'y' => i > 0 && !is_vowel(chars, i - 1),
        _ => false,
    }
}

/// Number of vowel-consonant sequences (the Porter measure).
fn measure(chars: &[char]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for i in 0..chars.len() {
        let v = is_vowel(chars, i);
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

fn has_vowel(chars: &[char]) -> bool {
    (0..chars.len()).any(|i| is_vowel(chars, i))
}

/// consonant-vowel-consonant ending, last consonant not w/x/y
fn ends_cvc(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 3
        && !is_vowel(chars, n - 3)
        && is_vowel(chars, n - 2)
        && !is_vowel(chars, n - 1)
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
}

/// One inflectional rewrite, or `None` when no rule applies.
fn strip_inflection(word: &str) -> Option<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() < 4 || !chars.iter().all(|c| c.is_alphabetic()) {
        return None;
    }
    let base = |suffix_len: usize| chars[..chars.len() - suffix_len].iter().collect::<String>();

    if word.ends_with("sses") {
        return Some(base(2));
    }
    if word.ends_with("ies") && chars.len() > 4 {
        return Some(base(3) + "y");
    }
    if word.ends_with("xes") || word.ends_with("ches") || word.ends_with("shes") {
        return Some(base(2));
    }
    if word.ends_with('s')
        && !(word.ends_with("ss") || word.ends_with("us") || word.ends_with("is"))
    {
        return Some(base(1));
    }
    if word.ends_with("ied") && chars.len() > 4 {
        return Some(base(3) + "y");
    }
    if word.ends_with("eed") {
        return None;
    }
    for suffix in ["ed", "ing"] {
        if !word.ends_with(suffix) {
            continue;
        }
        let stem = &chars[..chars.len() - suffix.len()];
        if stem.len() < 3 || !has_vowel(stem) {
            return None;
        }
        let n = stem.len();
        let last = stem[n - 1];
        if last == stem[n - 2] && !is_vowel(stem, n - 1) && !matches!(last, 'l' | 's' | 'z') {
            return Some(stem[..n - 1].iter().collect());
        }
        if measure(stem) == 1 && ends_cvc(stem) {
            return Some(stem.iter().collect::<String>() + "e");
        }
        return Some(stem.iter().collect());
    }
    None
}

fn word_set(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Source text of the three lexicon files a pipeline is built from. Kept so
/// a saved index can rebuild the exact pipeline it was indexed with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicons {
    pub stopwords: String,
    pub named_entities: String,
    pub lemma_exceptions: String,
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            stopwords: DEFAULT_STOPWORDS.to_string(),
            named_entities: DEFAULT_NE_LEXICON.to_string(),
            lemma_exceptions: DEFAULT_LEMMA_EXCEPTIONS.to_string(),
        }
    }
}

impl Lexicons {
    /// Read lexicon files from `dir`; any missing file falls back to the
    /// bundled default.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str, default: &'static str| -> Result<String> {
            let path = dir.join(name);
            if path.is_file() {
                fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
            } else {
                Ok(default.to_string())
            }
        };
        Ok(Lexicons {
            stopwords: read(STOPWORDS_FILE, DEFAULT_STOPWORDS)?,
            named_entities: read(NE_LEXICON_FILE, DEFAULT_NE_LEXICON)?,
            lemma_exceptions: read(LEMMA_EXCEPTIONS_FILE, DEFAULT_LEMMA_EXCEPTIONS)?,
        })
    }
}

/// Stop-words, named-entity lexicon and lemmatizer bundled together.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    stopwords: HashSet<String>,
    named_entities: HashSet<String>,
    lemmatizer: Lemmatizer,
    lexicons: Lexicons,
}

impl Default for TextPipeline {
    fn default() -> Self {
        TextPipeline::from_lexicons(Lexicons::default()).expect("bundled lexicons parse")
    }
}

impl TextPipeline {
    pub fn new(stopwords: &str, named_entities: &str, lemma_exceptions: &str) -> Result<Self> {
        Self::from_lexicons(Lexicons {
            stopwords: stopwords.to_string(),
            named_entities: named_entities.to_string(),
            lemma_exceptions: lemma_exceptions.to_string(),
        })
    }

    pub fn from_lexicons(lexicons: Lexicons) -> Result<Self> {
        Ok(TextPipeline {
            stopwords: word_set(&lexicons.stopwords),
            named_entities: word_set(&lexicons.named_entities),
            lemmatizer: Lemmatizer::parse_exceptions(&lexicons.lemma_exceptions)?,
            lexicons,
        })
    }

    pub fn from_dir(dir: &Path) -> Result<Self> {
        Self::from_lexicons(Lexicons::from_dir(dir)?)
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&normalize_surface(word))
    }

    pub fn is_named_entity(&self, word: &str) -> bool {
        self.named_entities.contains(&normalize_surface(word))
    }

    /// Lemma as stored in the index. Named entities and stop-words are only
    /// case-folded.
    pub fn lemmatize(&self, surface: &str) -> String {
        let folded = normalize_surface(surface);
        if self.stopwords.contains(&folded) || self.named_entities.contains(&folded) {
            folded
        } else {
            self.lemmatizer.lemmatize(&folded)
        }
    }

    pub fn token(&self, surface: &str) -> Token {
        let folded = normalize_surface(surface);
        let lemma = self.lemmatize(surface);
        Token {
            surface: surface.to_string(),
            is_stopword: self.stopwords.contains(&folded) || self.stopwords.contains(&lemma),
            is_named_entity: self.named_entities.contains(&folded)
                || self.named_entities.contains(&lemma),
            lemma,
        }
    }

    pub fn preprocess<S: AsRef<str>>(&self, tokens: &[S], kind: PipelineKind) -> Vec<Token> {
        let tokens = tokens.iter().map(|t| self.token(t.as_ref()));
        match kind {
            ContentKind::ElementDescription => tokens.collect(),
            // Punctuation-only fragments carry nothing searchable on screen.
            ContentKind::ScreenText => tokens
                .filter(|t| !t.is_stopword && t.lemma.chars().any(char::is_alphanumeric))
                .collect(),
        }
    }

    /// `tokenize` followed by `preprocess`.
    pub fn analyze(&self, raw: &str, kind: PipelineKind) -> Vec<Token> {
        self.preprocess(&tokenize(raw), kind)
    }
}
