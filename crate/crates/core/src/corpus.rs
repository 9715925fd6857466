//! Screen data model, view-hierarchy parsing, and content extraction.
//!
//! A corpus is a directory of `*.screen.json` documents, one per screen:
//!
//! ```json
//! {"id": "42", "width": 1440, "height": 2560,
//!  "root": {"bounds": [0, 0, 1440, 2560], "children": [
//!     {"bounds": [40, 80, 600, 160], "text": "Well done!"},
//!     {"bounds": [1300, 60, 1420, 180], "element_class": "Icon", "icon_class": "share"}]}}
//! ```
//!
//! An optional `element_classes.txt` next to the documents declares the
//! legal element/icon labels.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCREEN_EXTENSION: &str = ".screen.json";
pub const VOCABULARY_FILE: &str = "element_classes.txt";

/// Absolute pixel rectangle, `(left, top, right, bottom)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct PixelRect {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl PixelRect {
    pub fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        PixelRect {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> i32 {
        self.right - self.left
    }

    pub fn height(&self) -> i32 {
        self.bottom - self.top
    }

    pub fn is_degenerate(&self) -> bool {
        self.left >= self.right || self.top >= self.bottom
    }

    fn clamped(&self, width: u32, height: u32) -> PixelRect {
        let (w, h) = (width as i32, height as i32);
        PixelRect {
            left: self.left.clamp(0, w),
            top: self.top.clamp(0, h),
            right: self.right.clamp(0, w),
            bottom: self.bottom.clamp(0, h),
        }
    }
}

impl From<[i32; 4]> for PixelRect {
    fn from(b: [i32; 4]) -> Self {
        PixelRect::new(b[0], b[1], b[2], b[3])
    }
}

impl From<PixelRect> for [i32; 4] {
    fn from(r: PixelRect) -> Self {
        [r.left, r.top, r.right, r.bottom]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiElement {
    pub bounds: PixelRect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_class: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<UiElement>,
}

impl UiElement {
    pub fn new(bounds: PixelRect) -> Self {
        UiElement {
            bounds,
            text: None,
            element_class: None,
            icon_class: None,
            children: Vec::new(),
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = Some(text.into());
        self
    }

    pub fn with_element_class(mut self, label: impl Into<String>) -> Self {
        self.element_class = Some(label.into());
        self
    }

    pub fn with_icon_class(mut self, label: impl Into<String>) -> Self {
        self.icon_class = Some(label.into());
        self
    }

    pub fn with_children(mut self, children: Vec<UiElement>) -> Self {
        self.children = children;
        self
    }

    /// The label used for description text and class mapping: the icon
    /// sub-category when present, the element category otherwise.
    pub fn label(&self) -> Option<&str> {
        self.icon_class.as_deref().or(self.element_class.as_deref())
    }

    /// Depth-first pre-order traversal.
    pub fn walk(&self) -> impl Iterator<Item = &UiElement> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub root: UiElement,
}

impl Screen {
    pub fn elements(&self) -> impl Iterator<Item = &UiElement> {
        self.root.walk()
    }

    /// Serialize back to the on-disk document format.
    pub fn to_document(&self) -> String {
        serde_json::to_string(self).expect("screen serialization is infallible")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quadrant {
    TL,
    TR,
    BL,
    BR,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::TL, Quadrant::TR, Quadrant::BL, Quadrant::BR];

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Quadrant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Quadrant::TL => "tl",
            Quadrant::TR => "tr",
            Quadrant::BL => "bl",
            Quadrant::BR => "br",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContentKind {
    ScreenText,
    ElementDescription,
}

/// One extracted text snippet or element description with its location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenContent {
    pub screen_id: String,
    pub raw_text: String,
    pub kind: ContentKind,
    pub bbox: PixelRect,
    pub quadrant: Quadrant,
}

/// Quadrant containing `(x, y)`. Points on a midline belong to the right /
/// bottom quadrant.
pub fn quadrant_of(x: f64, y: f64, screen: &Screen) -> Result<Quadrant> {
    quadrant_in(x, y, screen.width, screen.height)
}

pub(crate) fn quadrant_in(x: f64, y: f64, width: u32, height: u32) -> Result<Quadrant> {
    let (w, h) = (width as f64, height as f64);
    if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
        return Err(Error::OutOfRange {
            x,
            y,
            width,
            height,
        });
    }
    let right = x >= w / 2.0;
    let bottom = y >= h / 2.0;
    Ok(match (right, bottom) {
        (false, false) => Quadrant::TL,
        (true, false) => Quadrant::TR,
        (false, true) => Quadrant::BL,
        (true, true) => Quadrant::BR,
    })
}

fn description_of(label: &str) -> String {
    label
        .chars()
        .map(|c| if matches!(c, '_' | '-' | '/') { ' ' } else { c })
        .collect::<String>()
        .trim()
        .to_string()
}

fn non_blank(s: &Option<String>) -> Option<&str> {
    s.as_deref().filter(|t| !t.trim().is_empty())
}

/// Visible texts and element descriptions in depth-first pre-order. An
/// element carrying both yields its text first.
pub fn extract_contents(screen: &Screen) -> Vec<ScreenContent> {
    let mut out = Vec::new();
    for el in screen.elements() {
        let quadrant = quadrant_in(
            el.bounds.left as f64,
            el.bounds.top as f64,
            screen.width,
            screen.height,
        )
        .expect("validated screens keep bounds on screen");
        if let Some(text) = non_blank(&el.text) {
            out.push(ScreenContent {
                screen_id: screen.id.clone(),
                raw_text: text.to_string(),
                kind: ContentKind::ScreenText,
                bbox: el.bounds,
                quadrant,
            });
        }
        if let Some(label) = el.label().filter(|l| !l.trim().is_empty()) {
            out.push(ScreenContent {
                screen_id: screen.id.clone(),
                raw_text: description_of(label),
                kind: ContentKind::ElementDescription,
                bbox: el.bounds,
                quadrant,
            });
        }
    }
    out
}

/// Declared element/icon labels, matched case-insensitively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    labels: HashSet<String>,
}

impl Vocabulary {
    pub fn parse(text: &str) -> Self {
        let labels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Vocabulary { labels }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(&label.trim().to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Non-fatal problems found while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseWarnings {
    /// Elements dropped because their (clamped) bounds had no area.
    pub degenerate_bounds: usize,
    /// Labels cleared because the vocabulary does not declare them.
    pub unknown_labels: usize,
}

impl std::ops::AddAssign for ParseWarnings {
    fn add_assign(&mut self, rhs: Self) {
        self.degenerate_bounds += rhs.degenerate_bounds;
        self.unknown_labels += rhs.unknown_labels;
    }
}

#[derive(Debug, Clone)]
pub struct ParsedScreen {
    pub screen: Screen,
    pub warnings: ParseWarnings,
}

/// Parse and validate one screen document.
///
/// Bounds are clamped to the screen. Elements whose clamped bounds are
/// degenerate are dropped and their children are attached to the nearest
/// kept ancestor. A degenerate root is replaced by the full-screen rect.
pub fn parse_screen(doc: &str, vocabulary: Option<&Vocabulary>) -> Result<ParsedScreen> {
    let value: Value = serde_json::from_str(doc).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "screen document must be an object"))?;

    let id = match obj.get("id") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::String(_)) | None => {
            return Err(Error::Validation("missing screen id".into()));
        }
        Some(_) => return Err(Error::parse("id", "expected a string")),
    };
    let width = dimension(obj.get("width"), "width", &id)?;
    let height = dimension(obj.get("height"), "height", &id)?;
    let root = obj
        .get("root")
        .ok_or_else(|| Error::Validation(format!("screen {id}: missing root element")))?;

    let mut ctx = ParseCtx {
        width,
        height,
        vocabulary,
        warnings: ParseWarnings::default(),
    };
    let mut kept = ctx.element(root, "root")?;
    let root = if kept.len() == 1 {
        kept.pop().unwrap()
    } else {
        UiElement::new(PixelRect::new(0, 0, width as i32, height as i32)).with_children(kept)
    };
    Ok(ParsedScreen {
        screen: Screen {
            id,
            width,
            height,
            root,
        },
        warnings: ctx.warnings,
    })
}

fn dimension(v: Option<&Value>, name: &str, id: &str) -> Result<u32> {
    let v = v.ok_or_else(|| Error::Validation(format!("screen {id}: missing {name}")))?;
    let n = v
        .as_u64()
        .ok_or_else(|| Error::parse(name, "expected a positive integer"))?;
    if n == 0 || n > i32::MAX as u64 {
        return Err(Error::Validation(format!(
            "screen {id}: {name} must be positive"
        )));
    }
    Ok(n as u32)
}

struct ParseCtx<'a> {
    width: u32,
    height: u32,
    vocabulary: Option<&'a Vocabulary>,
    warnings: ParseWarnings,
}

impl ParseCtx<'_> {
    /// Returns the element itself, or its hoisted children when dropped.
    fn element(&mut self, v: &Value, path: &str) -> Result<Vec<UiElement>> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse(path, "element must be an object"))?;

        let bounds = obj
            .get("bounds")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::parse(format!("{path}.bounds"), "expected [l, t, r, b]"))?;
        let mut b = [0i32; 4];
        for (slot, x) in b.iter_mut().zip(bounds) {
            *slot = x
                .as_i64()
                .and_then(|x| i32::try_from(x).ok())
                .ok_or_else(|| Error::parse(format!("{path}.bounds"), "bounds must be integers"))?;
        }

        let text = self.string_field(obj, "text", path)?;
        let element_class = self.label_field(obj, "element_class", path)?;
        let icon_class = self.label_field(obj, "icon_class", path)?;

        let mut children = Vec::new();
        if let Some(c) = obj.get("children") {
            let arr = c
                .as_array()
                .ok_or_else(|| Error::parse(format!("{path}.children"), "expected an array"))?;
            for (i, child) in arr.iter().enumerate() {
                children.extend(self.element(child, &format!("{path}.children[{i}]"))?);
            }
        }

        let bounds = PixelRect::from(b).clamped(self.width, self.height);
        if bounds.is_degenerate() {
            self.warnings.degenerate_bounds += 1;
            return Ok(children);
        }
        Ok(vec![UiElement {
            bounds,
            text: text.filter(|t| !t.trim().is_empty()),
            element_class,
            icon_class,
            children,
        }])
    }

    fn string_field(
        &self,
        obj: &serde_json::Map<String, Value>,
        key: &str,
        path: &str,
    ) -> Result<Option<String>> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Error::parse(format!("{path}.{key}"), "expected a string")),
        }
    }

    fn label_field(
        &mut self,
        obj: &serde_json::Map<String, Value>,
        key: &str,
        path: &str,
    ) -> Result<Option<String>> {
        let label = self
            .string_field(obj, key, path)?
            .filter(|s| !s.trim().is_empty());
        match (label, self.vocabulary) {
            (Some(l), Some(vocab)) if !vocab.contains(&l) => {
                self.warnings.unknown_labels += 1;
                Ok(None)
            }
            (label, _) => Ok(label),
        }
    }
}

/// Screens sorted by id, plus per-screen side files.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    screens: Vec<Screen>,
    thumbnails: BTreeMap<String, PathBuf>,
    pub warnings: ParseWarnings,
}

impl Corpus {
    /// Sorts by id; fails on duplicates.
    pub fn from_screens(mut screens: Vec<Screen>) -> Result<Self> {
        screens.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = screens.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId(w[0].id.clone()));
        }
        Ok(Corpus {
            screens,
            thumbnails: BTreeMap::new(),
            warnings: ParseWarnings::default(),
        })
    }

    pub fn screens(&self) -> &[Screen] {
        &self.screens
    }

    pub fn len(&self) -> usize {
        self.screens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.screens.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Screen> {
        self.position(id).map(|i| &self.screens[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.screens
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .ok()
    }

    pub fn thumbnail(&self, id: &str) -> Option<&Path> {
        self.thumbnails.get(id).map(PathBuf::as_path)
    }

    pub fn ids(&self) -> Vec<String> {
        self.screens.iter().map(|s| s.id.clone()).collect()
    }
}

const THUMBNAIL_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Load every `*.screen.json` in `dir` (non-recursive).
pub fn load_corpus(dir: &Path) -> Result<Corpus> {
    let vocab_path = dir.join(VOCABULARY_FILE);
    let vocabulary = if vocab_path.is_file() {
        Some(Vocabulary::load(&vocab_path)?)
    } else {
        None
    };

    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if name.to_string_lossy().ends_with(SCREEN_EXTENSION) {
            files.push(entry.path());
        }
    }
    files.sort();

    let mut screens = Vec::with_capacity(files.len());
    let mut thumbnails = BTreeMap::new();
    let mut warnings = ParseWarnings::default();
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = parse_screen(&text, vocabulary.as_ref()).map_err(|e| match e {
            Error::Parse { at, message } => Error::Parse {
                at: format!("{}: {at}", path.display()),
                message,
            },
            Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
            other => other,
        })?;
        warnings += parsed.warnings;
        let name = path.file_name().unwrap().to_string_lossy();
        let stem = &name[..name.len() - SCREEN_EXTENSION.len()];
        if let Some(thumb) = THUMBNAIL_EXTENSIONS
            .iter()
            .map(|ext| path.with_file_name(format!("{stem}.{ext}")))
            .find(|p| p.is_file())
        {
            thumbnails.insert(parsed.screen.id.clone(), thumb);
        }
        screens.push(parsed.screen);
    }
    if warnings.degenerate_bounds + warnings.unknown_labels > 0 {
        tracing::warn!(
            degenerate = warnings.degenerate_bounds,
            unknown_labels = warnings.unknown_labels,
            "dropped invalid elements while loading corpus"
        );
    }

    let mut corpus = Corpus::from_screens(screens)?;
    corpus.thumbnails = thumbnails;
    corpus.warnings = warnings;
    Ok(corpus)
}
