//! Quadrant-zoned inverted index over preprocessed screen contents.
//!
//! Each posting records a lemma occurring in one quadrant of one screen.
//! A query term scores a screen with the exact weight when it is within
//! edit distance one of a posting term in one of the query's zones, and
//! with the synonym weight when it is within distance one of a synonym of
//! such a term. A screen keeps the best weight it reaches.

mod fuzzy;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{extract_contents, ContentKind, Corpus, Quadrant};
use crate::error::{Error, Result};
use crate::screens::{ScreenOrd, ScreenTable};
use crate::synonyms::SynonymTable;
use crate::textpipe::{normalize_surface, tokenize, TextPipeline};

pub use fuzzy::{fuzzy_match, DeletionIndex};

/// Per-screen scores keyed by screen ordinal.
pub type ScreenScores = HashMap<ScreenOrd, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchWeights {
    pub exact: f64,
    pub synonym: f64,
    pub max_edit_distance: usize,
}

impl Default for MatchWeights {
    fn default() -> Self {
        MatchWeights {
            exact: 10.0,
            synonym: 4.0,
            max_edit_distance: 1,
        }
    }
}

impl MatchWeights {
    pub fn validate(&self) -> Result<()> {
        if self.exact > self.synonym && self.synonym > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(
                "match weights must satisfy exact > synonym > 0".into(),
            ))
        }
    }
}

/// Non-empty set of quadrants.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Zones(u8);

impl Zones {
    pub const ALL: Zones = Zones(0b1111);

    pub fn of(quadrants: &[Quadrant]) -> Zones {
        Zones(quadrants.iter().fold(0, |acc, q| acc | q.bit()))
    }

    pub fn contains(self, q: Quadrant) -> bool {
        self.0 & q.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Quadrant> {
        Quadrant::ALL.into_iter().filter(move |q| self.contains(*q))
    }

    /// Zones named by a positional keyword (without the colon).
    pub fn from_keyword(keyword: &str) -> Option<Zones> {
        use Quadrant::*;
        let z = match keyword {
            "tl" | "lt" => Zones::of(&[TL]),
            "tr" | "rt" => Zones::of(&[TR]),
            "bl" | "lb" => Zones::of(&[BL]),
            "br" | "rb" => Zones::of(&[BR]),
            "t" => Zones::of(&[TL, TR]),
            "b" => Zones::of(&[BL, BR]),
            "l" => Zones::of(&[TL, BL]),
            "r" => Zones::of(&[TR, BR]),
            _ => return None,
        };
        Some(z)
    }
}

impl fmt::Debug for Zones {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The twelve positional keywords.
pub const POSITIONAL_KEYWORDS: [&str; 12] = [
    "tl", "lt", "tr", "rt", "bl", "lb", "br", "rb", "t", "b", "l", "r",
];

/// One positional text query term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TextQuery {
    /// Lemmatized, lowercased term.
    pub term: String,
    /// Lowercased term as typed; also tried against the index so that a
    /// typo the lemmatizer rewrites still reaches its neighbours.
    pub surface: String,
    pub zones: Zones,
}

impl TextQuery {
    fn keyword_prefix(chunk: &str) -> Option<(Zones, &str)> {
        let (prefix, rest) = chunk.split_once(':')?;
        Zones::from_keyword(&prefix.to_ascii_lowercase()).map(|z| (z, rest))
    }

    /// Parse one whitespace-free chunk such as `tl:twitter` or `necklace`.
    pub fn parse(chunk: &str, pipeline: &TextPipeline) -> Result<TextQuery> {
        let (zones, rest) = Self::keyword_prefix(chunk).unwrap_or((Zones::ALL, chunk));
        let rest = rest.trim();
        if rest.is_empty() || !rest.chars().any(char::is_alphanumeric) {
            return Err(Error::EmptyQueryTerm);
        }
        Ok(TextQuery {
            term: pipeline.lemmatize(rest),
            surface: normalize_surface(rest),
            zones,
        })
    }

    /// Parse a raw query string into one query per token. A bare keyword
    /// token (`tl:` in `tl: Editor`) applies to the tokens that follow it.
    pub fn parse_all(raw: &str, pipeline: &TextPipeline) -> Result<Vec<TextQuery>> {
        let mut out = Vec::new();
        let mut pending: Option<Zones> = None;
        let mut dangling = false;
        for token in tokenize(raw) {
            if let Some((zones, rest)) = Self::keyword_prefix(token) {
                if rest.is_empty() {
                    pending = Some(zones);
                    dangling = true;
                    continue;
                }
                out.push(Self::parse(token, pipeline)?);
            } else {
                let mut q = Self::parse(token, pipeline)?;
                if let Some(z) = pending {
                    q.zones = z;
                }
                out.push(q);
            }
            dangling = false;
        }
        if out.is_empty() || dangling {
            return Err(Error::EmptyQueryTerm);
        }
        Ok(out)
    }
}

pub fn parse_text_query(raw: &str, pipeline: &TextPipeline) -> Result<TextQuery> {
    TextQuery::parse(raw, pipeline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub screen: ScreenOrd,
    pub quadrant: Quadrant,
    pub kind: ContentKind,
    pub tf: u32,
}

/// Serialized form: everything except the lookup structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct TextIndexData {
    pub terms: Vec<String>,
    pub postings: Vec<Vec<Posting>>,
    pub synonyms: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct TextIndex {
    screens: Arc<ScreenTable>,
    data: TextIndexData,
    term_ids: HashMap<String, u32>,
    term_neighbours: DeletionIndex,
    /// distinct synonym strings and the term ids listing each
    synonym_words: Vec<String>,
    synonym_owners: Vec<Vec<u32>>,
    synonym_neighbours: DeletionIndex,
}

impl TextIndex {
    pub fn build(
        corpus: &Corpus,
        screens: Arc<ScreenTable>,
        pipeline: &TextPipeline,
        synonyms: &SynonymTable,
    ) -> Result<TextIndex> {
        if screens.ids() != corpus.ids().as_slice() {
            return Err(Error::IndexMismatch);
        }
        let mut acc: BTreeMap<&str, BTreeMap<(ScreenOrd, Quadrant, ContentKind), u32>> =
            BTreeMap::new();
        let lemmas: Vec<Vec<(String, Quadrant, ContentKind)>> = corpus
            .screens()
            .iter()
            .map(|screen| {
                extract_contents(screen)
                    .into_iter()
                    .flat_map(|c| {
                        pipeline
                            .analyze(&c.raw_text, c.kind)
                            .into_iter()
                            .map(move |t| (t.lemma, c.quadrant, c.kind))
                    })
                    .collect()
            })
            .collect();
        for (ord, tokens) in lemmas.iter().enumerate() {
            for (lemma, quadrant, kind) in tokens {
                *acc.entry(lemma.as_str())
                    .or_default()
                    .entry((ord as ScreenOrd, *quadrant, *kind))
                    .or_insert(0) += 1;
            }
        }

        let mut data = TextIndexData {
            terms: Vec::with_capacity(acc.len()),
            postings: Vec::with_capacity(acc.len()),
            synonyms: Vec::with_capacity(acc.len()),
        };
        for (term, posts) in acc {
            data.terms.push(term.to_string());
            data.postings.push(
                posts
                    .into_iter()
                    .map(|((screen, quadrant, kind), tf)| Posting {
                        screen,
                        quadrant,
                        kind,
                        tf,
                    })
                    .collect(),
            );
            data.synonyms.push(
                synonyms
                    .get(term)
                    .iter()
                    .filter(|s| s.as_str() != term)
                    .cloned()
                    .collect(),
            );
        }
        Ok(Self::from_data(screens, data))
    }

    pub(crate) fn from_data(screens: Arc<ScreenTable>, data: TextIndexData) -> TextIndex {
        let term_ids = data
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let term_neighbours = DeletionIndex::build(data.terms.iter().map(String::as_str));

        let mut owners: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for (term_id, syns) in data.synonyms.iter().enumerate() {
            for s in syns {
                owners.entry(s.as_str()).or_default().push(term_id as u32);
            }
        }
        let synonym_words: Vec<String> = owners.keys().map(|s| s.to_string()).collect();
        let synonym_owners: Vec<Vec<u32>> = owners.into_values().collect();
        let synonym_neighbours = DeletionIndex::build(synonym_words.iter().map(String::as_str));

        TextIndex {
            screens,
            data,
            term_ids,
            term_neighbours,
            synonym_words,
            synonym_owners,
            synonym_neighbours,
        }
    }

    pub(crate) fn data(&self) -> &TextIndexData {
        &self.data
    }

    pub fn screens(&self) -> &Arc<ScreenTable> {
        &self.screens
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.data.terms
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_ids
            .get(term)
            .map(|&i| self.data.postings[i as usize].as_slice())
            .unwrap_or(&[])
    }

    pub fn synonyms_of(&self, term: &str) -> &[String] {
        self.term_ids
            .get(term)
            .map(|&i| self.data.synonyms[i as usize].as_slice())
            .unwrap_or(&[])
    }

    fn matching_ids(
        &self,
        words: &[String],
        neighbours: &DeletionIndex,
        query: &TextQuery,
        k: usize,
    ) -> Vec<u32> {
        let mut ids = Vec::new();
        let variants: &[&str] = if query.term == query.surface {
            &[query.term.as_str()]
        } else {
            &[query.term.as_str(), query.surface.as_str()]
        };
        for v in variants {
            if k == 1 {
                neighbours.candidates(v, &mut ids);
            } else {
                // Only distance one has a candidate index; other radii scan.
                ids.extend(
                    (0..words.len() as u32).filter(|&i| fuzzy_match(v, &words[i as usize], k)),
                );
            }
        }
        ids.sort_unstable();
        ids.dedup();
        ids.retain(|&i| {
            variants
                .iter()
                .any(|v| fuzzy_match(v, &words[i as usize], k))
        });
        ids
    }

    /// Ids of index terms that `query` matches at the exact weight.
    pub fn exact_matches(&self, query: &TextQuery, weights: &MatchWeights) -> Vec<&str> {
        self.matching_ids(
            &self.data.terms,
            &self.term_neighbours,
            query,
            weights.max_edit_distance,
        )
        .into_iter()
        .map(|i| self.data.terms[i as usize].as_str())
        .collect()
    }

    /// Screen scores for one text query; unmatched screens are absent.
    pub fn score(&self, query: &TextQuery, weights: &MatchWeights) -> ScreenScores {
        let k = weights.max_edit_distance;
        let mut scores = ScreenScores::new();
        let mut credit = |term_id: u32, weight: f64| {
            for p in &self.data.postings[term_id as usize] {
                if query.zones.contains(p.quadrant) {
                    let s = scores.entry(p.screen).or_insert(weight);
                    if *s < weight {
                        *s = weight;
                    }
                }
            }
        };
        for syn in self.matching_ids(&self.synonym_words, &self.synonym_neighbours, query, k) {
            for &owner in &self.synonym_owners[syn as usize] {
                credit(owner, weights.synonym);
            }
        }
        for term in self.matching_ids(&self.data.terms, &self.term_neighbours, query, k) {
            credit(term, weights.exact);
        }
        scores
    }

    /// [`TextIndex::score`] keyed by screen id.
    pub fn score_by_id(&self, query: &TextQuery, weights: &MatchWeights) -> BTreeMap<String, f64> {
        self.score(query, weights)
            .into_iter()
            .map(|(ord, s)| (self.screens.id(ord).to_string(), s))
            .collect()
    }
}

pub fn score_text_query(
    index: &TextIndex,
    query: &TextQuery,
    weights: &MatchWeights,
) -> ScreenScores {
    index.score(query, weights)
}
