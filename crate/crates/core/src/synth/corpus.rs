//! Synthetic screens: made-up words drawn with a Zipf skew, icon elements
//! labeled through the class map, and planted targets with a known query.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Zipf};
use serde::{Deserialize, Serialize};

use crate::classes::{ClassMap, DoodleClass, DEFAULT_ELEMENT_CLASSES};
use crate::corpus::{
    quadrant_in, quadrant_of, PixelRect, Quadrant, Screen, UiElement, SCREEN_EXTENSION,
    VOCABULARY_FILE,
};
use crate::error::{Error, Result};
use crate::sketch::{DoodlePlacement, NormRect};
use crate::textpipe::TextPipeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub screens: usize,
    pub seed: u64,
    /// Distinct made-up words available to screen text.
    pub vocabulary: usize,
    pub width: u32,
    pub height: u32,
    /// Inclusive range of text elements per screen.
    pub texts: (usize, usize),
    /// Inclusive range of icon elements per screen.
    pub icons: (usize, usize),
    /// Inclusive range of words per text element.
    pub words: (usize, usize),
}

impl CorpusSpec {
    pub fn new(screens: usize, seed: u64) -> Self {
        CorpusSpec {
            screens,
            seed,
            vocabulary: 30_000,
            width: 1440,
            height: 2560,
            texts: (4, 14),
            icons: (0, 6),
            words: (1, 4),
        }
    }

    fn validate(&self) -> Result<()> {
        let ordered = |(a, b): (usize, usize)| a <= b;
        if self.screens == 0 {
            return Err(Error::InvalidArgument(
                "screen count must be positive".into(),
            ));
        }
        if self.vocabulary == 0 || self.width < 400 || self.height < 400 {
            return Err(Error::InvalidArgument(
                "vocabulary and screen size too small".into(),
            ));
        }
        if !ordered(self.texts) || !ordered(self.icons) || !ordered(self.words) || self.words.0 == 0
        {
            return Err(Error::InvalidArgument(
                "element ranges must be ordered and words >= 1".into(),
            ));
        }
        Ok(())
    }
}

const ONSETS: [&str; 18] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl",
];
const VOWELS: [&str; 7] = ["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: [&str; 6] = ["", "", "", "n", "r", "x"];

/// `n` distinct pronounceable made-up words, none a stop-word.
pub fn made_up_words(n: usize, rng: &mut impl Rng) -> Vec<String> {
    let stop = TextPipeline::default();
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        if !stop.is_stopword(&w) && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Generator<'a> {
    spec: &'a CorpusSpec,
    words: Vec<String>,
    zipf: Zipf<f64>,
    labels: Vec<(DoodleClass, String)>,
}

impl<'a> Generator<'a> {
    fn new(spec: &'a CorpusSpec, class_map: &ClassMap, rng: &mut impl Rng) -> Result<Self> {
        spec.validate()?;
        let labels = DoodleClass::ALL
            .iter()
            .filter_map(|&c| class_map.label_for(c).map(|l| (c, l.to_string())))
            .collect::<Vec<_>>();
        if labels.is_empty() {
            return Err(Error::InvalidArgument(
                "class map labels no doodle class".into(),
            ));
        }
        Ok(Generator {
            spec,
            words: made_up_words(spec.vocabulary, rng),
            zipf: Zipf::new(spec.vocabulary as f64, 1.0).expect("positive vocabulary"),
            labels,
        })
    }

    fn word(&self, rng: &mut impl Rng) -> &str {
        let rank = self.zipf.sample(rng) as usize;
        &self.words[rank.clamp(1, self.words.len()) - 1]
    }

    fn rect_within(
        &self,
        rng: &mut impl Rng,
        w: i32,
        h: i32,
        area: (i32, i32, i32, i32),
    ) -> PixelRect {
        let (l0, t0, r0, b0) = area;
        let l = rng.random_range(l0..=(r0 - w).max(l0));
        let t = rng.random_range(t0..=(b0 - h).max(t0));
        PixelRect::new(l, t, (l + w).min(r0), (t + h).min(b0))
    }

    fn full(&self) -> (i32, i32, i32, i32) {
        (0, 0, self.spec.width as i32, self.spec.height as i32)
    }

    fn text_element(
        &self,
        rng: &mut impl Rng,
        area: (i32, i32, i32, i32),
        text: String,
    ) -> UiElement {
        let w = rng.random_range(100..=600).min(area.2 - area.0);
        let h = rng.random_range(40..=120).min(area.3 - area.1);
        let mut el = UiElement::new(self.rect_within(rng, w, h, area)).with_text(text);
        match rng.random_range(0..10) {
            0..=2 => el = el.with_element_class("Text"),
            3..=4 => el = el.with_element_class("Text Button"),
            _ => {}
        }
        el
    }

    fn icon_element(&self, rng: &mut impl Rng, label: &str) -> UiElement {
        let side = rng.random_range(60..=200);
        let h = (side as f64 * rng.random_range(0.8..1.25)) as i32;
        UiElement::new(self.rect_within(rng, side, h, self.full()))
            .with_element_class("Icon")
            .with_icon_class(label)
    }

    fn screen(&self, id: String, rng: &mut impl Rng) -> Screen {
        let spec = self.spec;
        let mut children = Vec::new();
        for _ in 0..rng.random_range(spec.texts.0..=spec.texts.1) {
            let n = rng.random_range(spec.words.0..=spec.words.1);
            let text = (0..n).map(|_| self.word(rng)).collect::<Vec<_>>().join(" ");
            children.push(self.text_element(rng, self.full(), text));
        }
        for _ in 0..rng.random_range(spec.icons.0..=spec.icons.1) {
            let (_, label) = self.labels.choose(rng).unwrap();
            children.push(self.icon_element(rng, label));
        }
        children.shuffle(rng);
        Screen {
            id,
            width: spec.width,
            height: spec.height,
            root: UiElement::new(PixelRect::new(0, 0, spec.width as i32, spec.height as i32))
                .with_children(children),
        }
    }
}

fn screen_id(i: usize) -> String {
    format!("synth-{i:06}")
}

/// Screens `synth-000000`.. reproducible from `spec.seed`.
pub fn generate_corpus(spec: &CorpusSpec, class_map: &ClassMap) -> Result<Vec<Screen>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gen = Generator::new(spec, class_map, &mut rng)?;
    Ok((0..spec.screens)
        .map(|i| gen.screen(screen_id(i), &mut rng))
        .collect())
}

/// Write one `<id>.screen.json` per screen plus the default label vocabulary.
pub fn write_corpus(dir: &Path, screens: &[Screen]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let vocab = dir.join(VOCABULARY_FILE);
    fs::write(&vocab, DEFAULT_ELEMENT_CLASSES).map_err(|e| Error::io(&vocab, e))?;
    for s in screens {
        let path = dir.join(format!("{}{SCREEN_EXTENSION}", s.id));
        fs::write(&path, s.to_document()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// A screen hidden among distractors together with the query a user
/// remembering it would issue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTarget {
    pub screen_id: String,
    pub icons: Vec<DoodlePlacement>,
    pub texts: Vec<String>,
    pub classes: (DoodleClass, DoodleClass),
    pub word: String,
    pub quadrant: Quadrant,
}

fn quadrant_keyword(q: Quadrant) -> &'static str {
    match q {
        Quadrant::TL => "tl",
        Quadrant::TR => "tr",
        Quadrant::BL => "bl",
        Quadrant::BR => "br",
    }
}

fn quadrant_area(q: Quadrant, w: i32, h: i32) -> (i32, i32, i32, i32) {
    let (mx, my) = (w / 2, h / 2);
    match q {
        Quadrant::TL => (0, 0, mx - 1, my - 1),
        Quadrant::TR => (mx, 0, w, my - 1),
        Quadrant::BL => (0, my, mx - 1, h),
        Quadrant::BR => (mx, my, w, h),
    }
}

fn screen_has_class(screen: &Screen, class: DoodleClass, class_map: &ClassMap) -> bool {
    screen
        .elements()
        .any(|e| class_map.classify(e) == Some(class))
}

/// Generate a corpus of `spec.screens` distractors and append `targets`
/// planted screens `target-0000`... Each target holds two icons of distinct
/// classes and one word in one quadrant; no other screen holds that
/// combination. The returned query places each doodle near its icon with
/// Gaussian position error of `drift` (fraction of the screen) and asks for
/// the word with the quadrant's keyword.
pub fn plant_targets(
    spec: &CorpusSpec,
    class_map: &ClassMap,
    targets: usize,
    drift: f64,
) -> Result<(Vec<Screen>, Vec<PlantedTarget>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gen = Generator::new(spec, class_map, &mut rng)?;
    let mut screens: Vec<Screen> = (0..spec.screens)
        .map(|i| gen.screen(screen_id(i), &mut rng))
        .collect();
    let noise = Normal::new(0.0, drift.max(0.0)).expect("finite drift");
    let (w, h) = (spec.width as i32, spec.height as i32);

    let mut planted = Vec::with_capacity(targets);
    for t in 0..targets {
        let mut screen = gen.screen(format!("target-{t:04}"), &mut rng);
        let picks: Vec<&(DoodleClass, String)> = gen.labels.choose_multiple(&mut rng, 2).collect();
        let mut icons = Vec::new();
        for (class, label) in &picks {
            let el = gen.icon_element(&mut rng, label);
            let bbox = NormRect::from_pixels(&el.bounds, spec.width, spec.height);
            let (dx, dy) = (noise.sample(&mut rng), noise.sample(&mut rng));
            let scale = 1.0 + noise.sample(&mut rng);
            let (cx, cy) = (
                (bbox.left + bbox.right) / 2.0 + dx,
                (bbox.top + bbox.bottom) / 2.0 + dy,
            );
            let (hw, hh) = (
                bbox.width() * scale.max(0.5) / 2.0,
                bbox.height() * scale.max(0.5) / 2.0,
            );
            let drawn = NormRect::new(
                (cx - hw).clamp(0.0, 0.99),
                (cy - hh).clamp(0.0, 0.99),
                (cx + hw).clamp(0.01, 1.0),
                (cy + hh).clamp(0.01, 1.0),
            );
            let drawn = if drawn.validate().is_ok() {
                drawn
            } else {
                bbox
            };
            icons.push(DoodlePlacement::new(*class, drawn)?);
            screen.root.children.push(el);
        }
        let quadrant = *Quadrant::ALL.choose(&mut rng).unwrap();
        // a mid-frequency word: common enough to appear elsewhere
        let word = gen.words[rng.random_range(100..gen.words.len().clamp(101, 3000))].clone();
        let el = gen.text_element(&mut rng, quadrant_area(quadrant, w, h), word.clone());
        debug_assert_eq!(
            quadrant_of(el.bounds.left as f64, el.bounds.top as f64, &screen).ok(),
            Some(quadrant)
        );
        screen.root.children.push(el);
        planted.push(PlantedTarget {
            screen_id: screen.id.clone(),
            texts: vec![format!("{}:{word}", quadrant_keyword(quadrant))],
            icons,
            classes: (picks[0].0, picks[1].0),
            word,
            quadrant,
        });
        screens.push(screen);
    }

    for target in &planted {
        let (a, b) = target.classes;
        for screen in screens.iter_mut().filter(|s| s.id != target.screen_id) {
            if !screen_has_class(screen, a, class_map) || !screen_has_class(screen, b, class_map) {
                continue;
            }
            let (sw, sh) = (screen.width, screen.height);
            for el in screen.root.children.iter_mut() {
                let Some(text) = el.text.as_mut() else {
                    continue;
                };
                let here = quadrant_in(el.bounds.left as f64, el.bounds.top as f64, sw, sh);
                if here.ok() == Some(target.quadrant) && text.split(' ').any(|t| t == target.word) {
                    *text = text
                        .split(' ')
                        .filter(|t| *t != target.word)
                        .chain(std::iter::once("filler"))
                        .collect::<Vec<_>>()
                        .join(" ");
                }
            }
        }
    }
    Ok((screens, planted))
}
