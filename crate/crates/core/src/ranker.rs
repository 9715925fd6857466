//! Score fusion across icon classes and text queries.
//!
//! Each component's raw scores are divided by that component's best score.
//! An icon class is then weighted by how many doodles of that class the user
//! confirmed; a text query counts once. Screens are ordered by the sum.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::DoodleClass;
use crate::error::{Error, Result};
use crate::screens::{ScreenOrd, ScreenTable};
use crate::sketch::{DoodlePlacement, RankingConfig, SketchIndex};
use crate::textindex::{ScreenScores, TextIndex, TextQuery};

pub const DEFAULT_LIMIT: usize = 50;

/// Confirmed doodles grouped by class, plus text queries in entry order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default)]
    pub sketch: BTreeMap<DoodleClass, Vec<DoodlePlacement>>,
    #[serde(default)]
    pub texts: Vec<TextQuery>,
}

impl Query {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_icon(mut self, placement: DoodlePlacement) -> Self {
        self.add_icon(placement);
        self
    }

    pub fn with_text(mut self, text: TextQuery) -> Self {
        self.texts.push(text);
        self
    }

    pub fn add_icon(&mut self, placement: DoodlePlacement) {
        self.sketch
            .entry(placement.class)
            .or_default()
            .push(placement);
    }

    pub fn is_empty(&self) -> bool {
        self.sketch.values().all(Vec::is_empty) && self.texts.is_empty()
    }

    pub fn icon_count(&self) -> usize {
        self.sketch.values().map(Vec::len).sum()
    }

    /// Scoring units in evaluation order: non-empty classes ascending, then
    /// text queries with later duplicates dropped.
    pub fn components(&self) -> Vec<Component<'_>> {
        let mut out: Vec<Component<'_>> = self
            .sketch
            .iter()
            .filter(|(_, d)| !d.is_empty())
            .map(|(c, d)| Component::Class(*c, d.as_slice()))
            .collect();
        for (i, t) in self.texts.iter().enumerate() {
            if !self.texts[..i].contains(t) {
                out.push(Component::Text(t));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Component<'a> {
    Class(DoodleClass, &'a [DoodlePlacement]),
    Text(&'a TextQuery),
}

impl Component<'_> {
    /// Multiplier applied after max-normalization.
    pub fn weight(&self) -> f64 {
        match self {
            Component::Class(_, d) => d.len() as f64,
            Component::Text(_) => 1.0,
        }
    }

    pub fn label(&self) -> ComponentLabel {
        match self {
            Component::Class(c, d) => ComponentLabel::Class {
                class: *c,
                doodles: d.len(),
            },
            Component::Text(t) => ComponentLabel::Text {
                term: t.term.clone(),
                zones: format!("{:?}", t.zones),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ComponentLabel {
    Class { class: DoodleClass, doodles: usize },
    Text { term: String, zones: String },
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentLabel::Class { class, doodles } => write!(f, "icon {class} x{doodles}"),
            ComponentLabel::Text { term, zones } => write!(f, "text {zones}:{term}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub screen_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedResult {
    pub entries: Vec<RankedEntry>,
}

impl RankedResult {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, screen_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.screen_id == screen_id)
            .map(|e| e.rank)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.screen_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub component: ComponentLabel,
    pub raw: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub screen_id: String,
    pub contributions: Vec<Contribution>,
    pub total: f64,
}

fn check_indexes<'a>(sketch: &'a SketchIndex, text: &TextIndex) -> Result<&'a Arc<ScreenTable>> {
    let (a, b) = (sketch.screens(), text.screens());
    if Arc::ptr_eq(a, b) || a.fingerprint() == b.fingerprint() {
        Ok(a)
    } else {
        Err(Error::IndexMismatch)
    }
}

fn raw_scores(
    component: &Component<'_>,
    sketch: &SketchIndex,
    text: &TextIndex,
    cfg: &RankingConfig,
) -> Result<ScreenScores> {
    match component {
        Component::Class(class, doodles) => sketch.score_class(*class, doodles, cfg),
        Component::Text(q) => Ok(text.score(q, &cfg.weights)),
    }
}

/// Normalized per-screen contributions of one component, or `None` when the
/// component matched nothing (empty map or best score 0).
struct Scored {
    max: f64,
    weight: f64,
    raw: ScreenScores,
}

impl Scored {
    /// `raw / max * weight`, in that order, so results are bit-identical
    /// to evaluating the fusion rule as written.
    fn normalized(&self, raw: f64) -> f64 {
        raw / self.max * self.weight
    }
}

fn score_components(
    q: &Query,
    sketch: &SketchIndex,
    text: &TextIndex,
    cfg: &RankingConfig,
) -> Result<Vec<(ComponentLabel, Option<Scored>)>> {
    if q.is_empty() {
        return Err(Error::EmptyQuery);
    }
    cfg.validate()?;
    check_indexes(sketch, text)?;
    q.components()
        .par_iter()
        .map(|c| {
            let raw = raw_scores(c, sketch, text, cfg)?;
            let max = raw.values().copied().fold(0.0f64, f64::max);
            let scored = (max > 0.0).then(|| Scored {
                max,
                weight: c.weight(),
                raw,
            });
            Ok((c.label(), scored))
        })
        .collect()
}

/// Top `limit` screens by fused score, ties by ascending screen id. Every
/// screen scored by some component that matched anything is eligible, even
/// when its own contribution is 0.
pub fn rank(
    q: &Query,
    sketch: &SketchIndex,
    text: &TextIndex,
    cfg: &RankingConfig,
    limit: usize,
) -> Result<RankedResult> {
    if limit == 0 {
        return Err(Error::InvalidArgument("limit must be at least 1".into()));
    }
    let components = score_components(q, sketch, text, cfg)?;
    let screens = sketch.screens();

    let mut total = vec![0.0f64; screens.len()];
    let mut touched = vec![false; screens.len()];
    for scored in components.iter().filter_map(|(_, s)| s.as_ref()) {
        for (&ord, &raw) in &scored.raw {
            total[ord as usize] += scored.normalized(raw);
            touched[ord as usize] = true;
        }
    }
    let mut hits: Vec<(f64, ScreenOrd)> = touched
        .iter()
        .enumerate()
        .filter(|(_, t)| **t)
        .map(|(i, _)| (total[i], i as ScreenOrd))
        .collect();
    let order =
        |a: &(f64, ScreenOrd), b: &(f64, ScreenOrd)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if hits.len() > limit {
        hits.select_nth_unstable_by(limit - 1, order);
        hits.truncate(limit);
    }
    hits.sort_unstable_by(order);

    Ok(RankedResult {
        entries: hits
            .into_iter()
            .enumerate()
            .map(|(i, (score, ord))| RankedEntry {
                screen_id: screens.id(ord).to_string(),
                score,
                rank: i + 1,
            })
            .collect(),
    })
}

/// Per-component breakdown of one screen's fused score. Components that
/// give the screen nothing are left out.
pub fn explain(
    q: &Query,
    screen_id: &str,
    sketch: &SketchIndex,
    text: &TextIndex,
    cfg: &RankingConfig,
) -> Result<Explanation> {
    let ord = sketch
        .screens()
        .ord(screen_id)
        .ok_or_else(|| Error::UnknownScreen(screen_id.to_string()))?;
    let components = score_components(q, sketch, text, cfg)?;
    let mut contributions = Vec::new();
    let mut total = 0.0;
    for (label, scored) in components {
        let Some(scored) = scored else { continue };
        let Some(&raw) = scored.raw.get(&ord) else {
            continue;
        };
        let value = scored.normalized(raw);
        total += value;
        contributions.push(Contribution {
            component: label,
            raw,
            value,
        });
    }
    Ok(Explanation {
        screen_id: screen_id.to_string(),
        contributions,
        total,
    })
}
