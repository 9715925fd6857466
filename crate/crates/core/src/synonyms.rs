//! Offline synonym table construction.
//!
//! For every corpus lemma the ten nearest neighbours are taken from each
//! embedding model by cosine similarity, the lists are merged by summing the
//! scores of words that appear in more than one list, and the top three
//! survive. Equal sums are ordered by thesaurus membership. Words absent
//! from every model fall back to thesaurus synonyms; named entities get none.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{extract_contents, Corpus};
use crate::error::{Error, Result};
use crate::textpipe::TextPipeline;

pub const NEIGHBOURS_PER_MODEL: usize = 10;
pub const SYNONYMS_PER_WORD: usize = 3;

/// Word vectors loaded from a whitespace-separated text file. Vectors are
/// stored unit-normalized, so cosine similarity is a dot product.
#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    name: String,
    dimension: usize,
    words: Vec<String>,
    unit_vectors: Vec<f64>,
    lookup: HashMap<String, usize>,
}

impl EmbeddingModel {
    pub fn from_vectors(
        name: impl Into<String>,
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut model = EmbeddingModel {
            name,
            dimension: 0,
            words: Vec::new(),
            unit_vectors: Vec::new(),
            lookup: HashMap::new(),
        };
        for (word, vector) in entries {
            model.push(word, vector, None)?;
        }
        Ok(model)
    }

    fn push(&mut self, word: String, vector: Vec<f64>, line: Option<usize>) -> Result<()> {
        let at = || match line {
            Some(n) => format!("{}:{n}", self.name),
            None => format!("{}: {word}", self.name),
        };
        if self.words.is_empty() {
            if vector.is_empty() {
                return Err(Error::parse(at(), "vector has no components"));
            }
            self.dimension = vector.len();
        } else if vector.len() != self.dimension {
            return Err(Error::parse(
                at(),
                format!(
                    "expected {} components, found {}",
                    self.dimension,
                    vector.len()
                ),
            ));
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::parse(at(), "zero or non-finite vector"));
        }
        let word = word.to_lowercase();
        if self.lookup.contains_key(&word) {
            return Ok(());
        }
        self.lookup.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.unit_vectors.extend(vector.iter().map(|x| x / norm));
        Ok(())
    }

    /// Parse `word v1 ... vd` lines. A leading `count dim` header line, as
    /// written by word2vec, is skipped.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut model = Self::from_vectors(name, [])?;
        for (n, line) in text.lines().enumerate() {
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if n == 0
                && values.len() == 1
                && word.parse::<u64>().is_ok()
                && values[0].parse::<u64>().is_ok()
            {
                continue;
            }
            let vector = values
                .iter()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(format!("{}:{}", model.name, n + 1), e.to_string()))?;
            model.push(word.to_string(), vector, Some(n + 1))?;
        }
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path.display().to_string(), &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup.contains_key(word)
    }

    fn unit(&self, i: usize) -> &[f64] {
        &self.unit_vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Cosine similarity clamped to `[0, 1]`, `None` if either word is absent.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (i, j) = (*self.lookup.get(a)?, *self.lookup.get(b)?);
        Some(clamp_cosine(dot(self.unit(i), self.unit(j))))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn clamp_cosine(c: f64) -> f64 {
    c.clamp(0.0, 1.0)
}

fn by_score_then_word(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// The `k` most similar words, best first, excluding `word` itself.
/// Returns `None` when the model does not know `word`.
pub fn top_similar(model: &EmbeddingModel, word: &str, k: usize) -> Option<Vec<(String, f64)>> {
    let i = *model.lookup.get(word)?;
    let query = model.unit(i);
    let mut scored: Vec<(String, f64)> = (0..model.words.len())
        .filter(|&j| j != i)
        .map(|j| {
            (
                model.words[j].clone(),
                clamp_cosine(dot(query, model.unit(j))),
            )
        })
        .collect();
    scored.sort_by(by_score_then_word);
    scored.truncate(k);
    Some(scored)
}

/// A flat synonym dictionary read from `word: syn1, syn2, ...` lines.
#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    entries: HashMap<String, Vec<String>>,
    members: HashSet<String>,
}

impl Thesaurus {
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut th = Thesaurus::default();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(':').ok_or_else(|| {
                Error::parse(format!("{name}:{}", n + 1), "expected `word: syn1, syn2`")
            })?;
            let head = head.trim().to_lowercase();
            let syns: Vec<String> = rest
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect();
            th.members.insert(head.clone());
            th.members.extend(syns.iter().cloned());
            th.entries.entry(head).or_default().extend(syns);
        }
        Ok(th)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&path.display().to_string(), &text)
    }

    /// A word is a member if it is a headword or listed as a synonym.
    pub fn contains(&self, word: &str) -> bool {
        self.members.contains(word)
    }

    pub fn synonyms(&self, word: &str) -> &[String] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Order for equally scored candidates: members of `primary` first, then
/// members of `secondary`, then lexicographic.
pub fn lexical_tiebreak(a: &str, b: &str, primary: &Thesaurus, secondary: &Thesaurus) -> Ordering {
    primary
        .contains(b)
        .cmp(&primary.contains(a))
        .then_with(|| secondary.contains(b).cmp(&secondary.contains(a)))
        .then_with(|| a.cmp(b))
}

/// Union of the candidate lists, each word scored by the sum of its scores.
pub fn merge_candidates(
    lists: &[Vec<(String, f64)>],
    primary: &Thesaurus,
    secondary: &Thesaurus,
) -> Vec<(String, f64)> {
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for list in lists {
        for (word, score) in list {
            *sums.entry(word.as_str()).or_insert(0.0) += score;
        }
    }
    let mut merged: Vec<(String, f64)> =
        sums.into_iter().map(|(w, s)| (w.to_string(), s)).collect();
    merged.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| lexical_tiebreak(&a.0, &b.0, primary, secondary))
    });
    merged
}

/// Candidates must survive the `Synonym.txt` line format.
fn usable(candidate: &str, word: &str) -> bool {
    candidate != word && !candidate.is_empty() && !candidate.contains([',', '\t', '\n', '\r', ' '])
}

/// Everything the builder consults.
#[derive(Debug, Clone, Copy)]
pub struct SynonymSources<'a> {
    pub models: &'a [EmbeddingModel],
    pub primary: &'a Thesaurus,
    pub secondary: &'a Thesaurus,
    pub pipeline: &'a TextPipeline,
}

impl SynonymSources<'_> {
    /// Up to three synonyms of `word` (a preprocessed lemma).
    pub fn synonyms_for(&self, word: &str) -> Vec<String> {
        if self.pipeline.is_named_entity(word) {
            return Vec::new();
        }
        let lists: Vec<Vec<(String, f64)>> = self
            .models
            .iter()
            .filter_map(|m| top_similar(m, word, NEIGHBOURS_PER_MODEL))
            .map(|l| l.into_iter().filter(|(c, _)| usable(c, word)).collect())
            .collect();
        if !lists.is_empty() {
            return merge_candidates(&lists, self.primary, self.secondary)
                .into_iter()
                .take(SYNONYMS_PER_WORD)
                .map(|(w, _)| w)
                .collect();
        }
        let mut out: Vec<String> = Vec::new();
        for syn in self
            .primary
            .synonyms(word)
            .iter()
            .chain(self.secondary.synonyms(word))
        {
            if out.len() == SYNONYMS_PER_WORD {
                break;
            }
            if usable(syn, word) && !out.contains(syn) {
                out.push(syn.clone());
            }
        }
        out
    }

    pub fn build_table<'w>(&self, vocabulary: impl IntoIterator<Item = &'w str>) -> SynonymTable {
        let words: BTreeSet<&str> = vocabulary.into_iter().collect();
        let rows: Vec<(String, Vec<String>)> = words
            .into_par_iter()
            .map(|w| (w.to_string(), self.synonyms_for(w)))
            .collect();
        SynonymTable {
            entries: rows.into_iter().collect(),
        }
    }
}

/// All distinct lemmas produced from a corpus' contents.
pub fn corpus_vocabulary(corpus: &Corpus, pipeline: &TextPipeline) -> BTreeSet<String> {
    corpus
        .screens()
        .par_iter()
        .flat_map_iter(|s| {
            extract_contents(s)
                .into_iter()
                .flat_map(|c| pipeline.analyze(&c.raw_text, c.kind))
                .map(|t| t.lemma)
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// `lemma -> up to three synonyms`, serialized as `Synonym.txt`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    entries: BTreeMap<String, Vec<String>>,
}

impl SynonymTable {
    pub fn get(&self, word: &str) -> &[String] {
        self.entries.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn insert(&mut self, word: impl Into<String>, synonyms: Vec<String>) {
        self.entries.insert(word.into(), synonyms);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(w, s)| (w.as_str(), s.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One `word<TAB>syn1,syn2,syn3` line per word, sorted by word.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (word, syns) in &self.entries {
            out.push_str(word);
            out.push('\t');
            out.push_str(&syns.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (word, syns) = line.split_once('\t').ok_or_else(|| {
                Error::parse(
                    format!("Synonym.txt:{}", n + 1),
                    "expected word<TAB>synonyms",
                )
            })?;
            let syns = syns
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_lowercase)
                .collect();
            entries.insert(word.trim().to_lowercase(), syns);
        }
        Ok(SynonymTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
