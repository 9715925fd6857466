//! Spatial index of labeled UI elements over a 24-tile screen grid, and
//! scoring of doodle placements against it.
//!
//! Every element instance is stored with the fraction of each tile its
//! bounding box covers. For one icon class, a screen's score comes from a
//! greedy one-to-one matching of the user's doodles to the screen's
//! instances of that class. A matched pair earns
//!
//! ```text
//! m = p1 + p2 * position_overlap + p3 * shape_similarity
//! ```
//!
//! and every doodle left unmatched costs `cw`. Instance coverage is first
//! smoothed so mass in an edge-adjacent tile counts at `delta_w` of its value.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::{ClassMap, DoodleClass};
use crate::corpus::{Corpus, PixelRect, Screen};
use crate::error::{Error, Result};
use crate::screens::{ScreenOrd, ScreenTable};
use crate::textindex::{MatchWeights, ScreenScores};

pub const TILE_COUNT: usize = 24;
pub type Coverage = [f64; TILE_COUNT];

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankingConfig {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub delta_w: f64,
    pub cw: f64,
    pub weights: MatchWeights,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            p1: 11.0,
            p2: 1.0,
            p3: 1.0,
            delta_w: 0.7,
            cw: 12.0,
            weights: MatchWeights::default(),
        }
    }
}

impl RankingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.p1, self.p2, self.p3, self.delta_w, self.cw]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive || self.delta_w >= 1.0 {
            return Err(Error::InvalidArgument(
                "ranking parameters must be positive with delta_w in (0, 1)".into(),
            ));
        }
        self.weights.validate()
    }
}

/// Grid of equal tiles; `cols` along the width, `rows` along the height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    pub cols: usize,
    pub rows: usize,
}

impl Default for TileGrid {
    fn default() -> Self {
        TileGrid { cols: 6, rows: 4 }
    }
}

impl TileGrid {
    /// Four along the width, six along the height.
    pub fn portrait() -> Self {
        TileGrid { cols: 4, rows: 6 }
    }

    pub fn tile(&self, col: usize, row: usize) -> usize {
        row * self.cols + col
    }

    fn validate(&self) -> Result<()> {
        if self.cols * self.rows != TILE_COUNT {
            return Err(Error::InvalidArgument(format!(
                "grid {}x{} must have {TILE_COUNT} tiles",
                self.cols, self.rows
            )));
        }
        Ok(())
    }

    /// Edge-adjacent tiles of `t`.
    pub fn neighbours(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        let (col, row) = (t % self.cols, t / self.cols);
        let up = (row > 0).then(|| self.tile(col, row - 1));
        let down = (row + 1 < self.rows).then(|| self.tile(col, row + 1));
        let left = (col > 0).then(|| self.tile(col - 1, row));
        let right = (col + 1 < self.cols).then(|| self.tile(col + 1, row));
        [up, down, left, right].into_iter().flatten()
    }
}

/// Rectangle in normalized `[0, 1]` screen or canvas coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct NormRect {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl From<[f64; 4]> for NormRect {
    fn from(b: [f64; 4]) -> Self {
        NormRect::new(b[0], b[1], b[2], b[3])
    }
}

impl From<NormRect> for [f64; 4] {
    fn from(r: NormRect) -> Self {
        [r.left, r.top, r.right, r.bottom]
    }
}

impl NormRect {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        NormRect {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn from_pixels(rect: &PixelRect, width: u32, height: u32) -> Self {
        NormRect {
            left: rect.left as f64 / width as f64,
            top: rect.top as f64 / height as f64,
            right: rect.right as f64 / width as f64,
            bottom: rect.bottom as f64 / height as f64,
        }
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.width() / self.height()
    }

    /// Finite, ordered, inside the unit square, with positive area.
    pub fn validate(&self) -> Result<()> {
        let coords = [self.left, self.top, self.right, self.bottom];
        if coords
            .iter()
            .any(|c| !c.is_finite() || *c < -EPS || *c > 1.0 + EPS)
        {
            return Err(Error::InvalidArgument(format!(
                "box {coords:?} is not inside the unit square"
            )));
        }
        if self.width() <= 0.0 || self.height() <= 0.0 {
            return Err(Error::DegenerateBox);
        }
        Ok(())
    }
}

/// Fraction of each tile's area covered by `bbox`.
pub fn tile_coverage(bbox: &NormRect, grid: TileGrid) -> Result<Coverage> {
    grid.validate()?;
    bbox.validate()?;
    let (tw, th) = (1.0 / grid.cols as f64, 1.0 / grid.rows as f64);
    let mut cov = [0.0; TILE_COUNT];
    for row in 0..grid.rows {
        let (y0, y1) = (row as f64 * th, (row + 1) as f64 * th);
        let oy = bbox.bottom.min(y1) - bbox.top.max(y0);
        if oy <= 0.0 {
            continue;
        }
        for col in 0..grid.cols {
            let (x0, x1) = (col as f64 * tw, (col + 1) as f64 * tw);
            let ox = bbox.right.min(x1) - bbox.left.max(x0);
            if ox > 0.0 {
                cov[grid.tile(col, row)] = ((ox * oy) / (tw * th)).clamp(0.0, 1.0);
            }
        }
    }
    Ok(cov)
}

/// `r~[t] = max(r[t], delta_w * max over edge neighbours of r)`.
pub fn smooth_coverage(cov: &Coverage, grid: TileGrid, delta_w: f64) -> Coverage {
    let mut out = *cov;
    for (t, slot) in out.iter_mut().enumerate() {
        let spill = grid.neighbours(t).map(|n| cov[n]).fold(0.0, f64::max);
        *slot = slot.max(delta_w * spill);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub bbox: NormRect,
    pub coverage: Coverage,
}

/// One confirmed doodle: its class and where it was drawn on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoodlePlacement {
    pub class: DoodleClass,
    pub bbox: NormRect,
}

impl DoodlePlacement {
    pub fn new(class: DoodleClass, bbox: NormRect) -> Result<Self> {
        bbox.validate()?;
        Ok(DoodlePlacement { class, bbox })
    }

    pub fn coverage(&self, grid: TileGrid) -> Result<Coverage> {
        tile_coverage(&self.bbox, grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenInstances {
    pub screen: ScreenOrd,
    pub instances: Vec<InstanceRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SketchBuildStats {
    pub indexed: usize,
    /// Labeled elements whose label has no doodle class.
    pub unmapped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct SketchIndexData {
    pub grid: TileGrid,
    pub classes: BTreeMap<DoodleClass, Vec<ScreenInstances>>,
    pub stats: SketchBuildStats,
}

#[derive(Debug, Clone)]
pub struct SketchIndex {
    screens: Arc<ScreenTable>,
    data: SketchIndexData,
}

fn screen_instances(
    screen: &Screen,
    class_map: &ClassMap,
    grid: TileGrid,
    stats: &mut SketchBuildStats,
) -> Vec<(DoodleClass, InstanceRecord)> {
    let mut out = Vec::new();
    for el in screen.elements() {
        if el.label().is_none() {
            continue;
        }
        let Some(class) = class_map.classify(el) else {
            stats.unmapped += 1;
            continue;
        };
        let bbox = NormRect::from_pixels(&el.bounds, screen.width, screen.height);
        let coverage = tile_coverage(&bbox, grid).expect("parsed elements have positive area");
        stats.indexed += 1;
        out.push((class, InstanceRecord { bbox, coverage }));
    }
    out
}

impl SketchIndex {
    pub fn build(
        corpus: &Corpus,
        screens: Arc<ScreenTable>,
        class_map: &ClassMap,
        grid: TileGrid,
    ) -> Result<SketchIndex> {
        grid.validate()?;
        if screens.ids() != corpus.ids().as_slice() {
            return Err(Error::IndexMismatch);
        }
        let mut stats = SketchBuildStats::default();
        let mut classes: BTreeMap<DoodleClass, Vec<ScreenInstances>> = BTreeMap::new();
        for (ord, screen) in corpus.screens().iter().enumerate() {
            let mut per_class: BTreeMap<DoodleClass, Vec<InstanceRecord>> = BTreeMap::new();
            for (class, rec) in screen_instances(screen, class_map, grid, &mut stats) {
                per_class.entry(class).or_default().push(rec);
            }
            for (class, instances) in per_class {
                classes.entry(class).or_default().push(ScreenInstances {
                    screen: ord as ScreenOrd,
                    instances,
                });
            }
        }
        if stats.unmapped > 0 {
            tracing::debug!(
                unmapped = stats.unmapped,
                "labels without a doodle class skipped"
            );
        }
        Ok(SketchIndex {
            screens,
            data: SketchIndexData {
                grid,
                classes,
                stats,
            },
        })
    }

    pub(crate) fn from_data(screens: Arc<ScreenTable>, data: SketchIndexData) -> Self {
        SketchIndex { screens, data }
    }

    pub(crate) fn data(&self) -> &SketchIndexData {
        &self.data
    }

    pub fn screens(&self) -> &Arc<ScreenTable> {
        &self.screens
    }

    pub fn grid(&self) -> TileGrid {
        self.data.grid
    }

    pub fn stats(&self) -> SketchBuildStats {
        self.data.stats
    }

    /// Screens containing `class`, in screen order.
    pub fn lookup(&self, class: DoodleClass) -> &[ScreenInstances] {
        self.data
            .classes
            .get(&class)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn instances(&self, class: DoodleClass, screen_id: &str) -> &[InstanceRecord] {
        let Some(ord) = self.screens.ord(screen_id) else {
            return &[];
        };
        let list = self.lookup(class);
        list.binary_search_by_key(&ord, |s| s.screen)
            .map(|i| list[i].instances.as_slice())
            .unwrap_or(&[])
    }

    /// Per-screen score for the doodles of one class. Screens without the
    /// class are absent.
    pub fn score_class(
        &self,
        class: DoodleClass,
        placements: &[DoodlePlacement],
        cfg: &RankingConfig,
    ) -> Result<ScreenScores> {
        if placements.is_empty() {
            return Err(Error::EmptyPlacements);
        }
        if let Some(p) = placements.iter().find(|p| p.class != class) {
            return Err(Error::InvalidArgument(format!(
                "placement of class {} scored as {class}",
                p.class
            )));
        }
        let grid = self.data.grid;
        let doodles: Vec<(Coverage, f64, f64)> = placements
            .iter()
            .map(|p| {
                let cov = p.coverage(grid)?;
                let mass: f64 = cov.iter().sum();
                Ok((cov, mass, p.bbox.aspect_ratio()))
            })
            .collect::<Result<_>>()?;

        let mut scores = ScreenScores::with_capacity(self.lookup(class).len());
        let mut pairs = Vec::new();
        let mut smoothed = Vec::new();
        for entry in self.lookup(class) {
            smoothed.clear();
            smoothed.extend(
                entry
                    .instances
                    .iter()
                    .map(|r| smooth_coverage(&r.coverage, grid, cfg.delta_w)),
            );
            pairs.clear();
            for (d, (q, mass, ar_d)) in doodles.iter().enumerate() {
                for (i, inst) in entry.instances.iter().enumerate() {
                    let overlap: f64 = q.iter().zip(&smoothed[i]).map(|(a, b)| a.min(*b)).sum();
                    let position = overlap / mass;
                    let ar_i = inst.bbox.aspect_ratio();
                    let shape = ar_d.min(ar_i) / ar_d.max(ar_i);
                    pairs.push((cfg.p1 + cfg.p2 * position + cfg.p3 * shape, d, i));
                }
            }
            let (matched, total) = greedy_match(&mut pairs, doodles.len(), entry.instances.len());
            let unmatched = doodles.len() - matched;
            scores.insert(entry.screen, (total - cfg.cw * unmatched as f64).max(0.0));
        }
        Ok(scores)
    }
}

/// Repeatedly take the best remaining pair whose doodle and instance are
/// both free. Returns (pairs taken, their summed value).
fn greedy_match(
    pairs: &mut [(f64, usize, usize)],
    doodles: usize,
    instances: usize,
) -> (usize, f64) {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut doodle_used = vec![false; doodles];
    let mut inst_used = vec![false; instances];
    let (mut n, mut total) = (0, 0.0);
    for &(m, d, i) in pairs.iter() {
        if !doodle_used[d] && !inst_used[i] {
            doodle_used[d] = true;
            inst_used[i] = true;
            n += 1;
            total += m;
        }
    }
    (n, total)
}

pub fn score_class_doodles(
    index: &SketchIndex,
    class: DoodleClass,
    placements: &[DoodlePlacement],
    cfg: &RankingConfig,
) -> Result<ScreenScores> {
    index.score_class(class, placements, cfg)
}
