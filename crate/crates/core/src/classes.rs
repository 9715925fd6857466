use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::UiElement;
use crate::error::{Error, Result};

pub const CLASS_MAP_FILE: &str = "class_map.tsv";
const DEFAULT_CLASS_MAP: &str = include_str!("../data/class_map.tsv");
pub const DEFAULT_ELEMENT_CLASSES: &str = include_str!("../data/element_classes.txt");

/// The 23 doodle classes the recognizer and sketch index support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum DoodleClass {
    Camera,
    Cloud,
    Envelope,
    House,
    JailWindow,
    Square,
    Star,
    Avatar,
    Back,
    Cancel,
    Checkbox,
    DropDown,
    Forward,
    LeftArrow,
    Menu,
    Play,
    Plus,
    Search,
    Setting,
    Share,
    Slider,
    Squiggle,
    Switch,
}

impl DoodleClass {
    pub const ALL: [DoodleClass; 23] = [
        DoodleClass::Camera,
        DoodleClass::Cloud,
        DoodleClass::Envelope,
        DoodleClass::House,
        DoodleClass::JailWindow,
        DoodleClass::Square,
        DoodleClass::Star,
        DoodleClass::Avatar,
        DoodleClass::Back,
        DoodleClass::Cancel,
        DoodleClass::Checkbox,
        DoodleClass::DropDown,
        DoodleClass::Forward,
        DoodleClass::LeftArrow,
        DoodleClass::Menu,
        DoodleClass::Play,
        DoodleClass::Plus,
        DoodleClass::Search,
        DoodleClass::Setting,
        DoodleClass::Share,
        DoodleClass::Slider,
        DoodleClass::Squiggle,
        DoodleClass::Switch,
    ];

    pub fn name(self) -> &'static str {
        use DoodleClass::*;
        match self {
            Camera => "Camera",
            Cloud => "Cloud",
            Envelope => "Envelope",
            House => "House",
            JailWindow => "Jail-window",
            Square => "Square",
            Star => "Star",
            Avatar => "Avatar",
            Back => "Back",
            Cancel => "Cancel",
            Checkbox => "Checkbox",
            DropDown => "Drop-down",
            Forward => "Forward",
            LeftArrow => "Left arrow",
            Menu => "Menu",
            Play => "Play",
            Plus => "Plus",
            Search => "Search",
            Setting => "Setting",
            Share => "Share",
            Slider => "Slider",
            Squiggle => "Squiggle",
            Switch => "Switch",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn supported_list() -> String {
        DoodleClass::ALL.map(DoodleClass::name).join(", ")
    }
}

fn fold(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_'))
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for DoodleClass {
    type Err = Error;

    /// Case-, space-, hyphen- and underscore-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let key = fold(s);
        DoodleClass::ALL
            .into_iter()
            .find(|c| fold(c.name()) == key)
            .ok_or_else(|| Error::UnknownClass {
                name: s.to_string(),
                supported: DoodleClass::supported_list(),
            })
    }
}

impl fmt::Display for DoodleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<DoodleClass> for String {
    fn from(c: DoodleClass) -> String {
        c.name().to_string()
    }
}

impl TryFrom<String> for DoodleClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Corpus label to doodle class, read from `label<TAB>class` lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    map: HashMap<String, DoodleClass>,
}

impl Default for ClassMap {
    fn default() -> Self {
        ClassMap::parse(DEFAULT_CLASS_MAP).expect("bundled class map parses")
    }
}

impl ClassMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || format!("{CLASS_MAP_FILE}:{}", n + 1);
            let (label, class) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(at(), "expected label<TAB>class"))?;
            let class = class
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(at(), e.to_string()))?;
            map.insert(label.trim().to_lowercase(), class);
        }
        Ok(ClassMap { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, label: &str) -> Option<DoodleClass> {
        self.map.get(&label.trim().to_lowercase()).copied()
    }

    /// Icon sub-category first, then element category.
    pub fn classify(&self, element: &UiElement) -> Option<DoodleClass> {
        element
            .icon_class
            .as_deref()
            .and_then(|l| self.get(l))
            .or_else(|| element.element_class.as_deref().and_then(|l| self.get(l)))
    }

    /// Some label that maps to `class`, for generating corpora.
    pub fn label_for(&self, class: DoodleClass) -> Option<&str> {
        let mut labels: Vec<&str> = self
            .map
            .iter()
            .filter(|(_, c)| **c == class)
            .map(|(l, _)| l.as_str())
            .collect();
        labels.sort_unstable();
        labels.first().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in DoodleClass::ALL {
            assert_eq!(c.name().parse::<DoodleClass>().unwrap(), c);
        }
        assert_eq!(
            "left_arrow".parse::<DoodleClass>().unwrap(),
            DoodleClass::LeftArrow
        );
        assert_eq!(
            "DROPDOWN".parse::<DoodleClass>().unwrap(),
            DoodleClass::DropDown
        );
        let err = "wheel".parse::<DoodleClass>().unwrap_err().to_string();
        assert!(err.contains("wheel") && err.contains("Jail-window"));
    }

    #[test]
    fn default_map_covers_every_class() {
        let map = ClassMap::default();
        for c in DoodleClass::ALL {
            assert!(map.label_for(c).is_some(), "{c}");
        }
    }

    #[test]
    fn icon_label_wins_over_element_label() {
        use crate::corpus::PixelRect;
        let map = ClassMap::default();
        let el = UiElement::new(PixelRect::new(0, 0, 1, 1))
            .with_element_class("Image")
            .with_icon_class("menu");
        assert_eq!(map.classify(&el), Some(DoodleClass::Menu));
        let el = UiElement::new(PixelRect::new(0, 0, 1, 1))
            .with_element_class("Image")
            .with_icon_class("wheel");
        assert_eq!(map.classify(&el), Some(DoodleClass::JailWindow));
    }

    #[test]
    fn bad_class_in_map_is_reported() {
        assert!(ClassMap::parse("x\tNope\n").is_err());
    }
}
