//! Search over mobile app screens by sketched icons and positional text.
//!
//! A query combines doodles of UI icons, each placed where it should appear
//! on the screen, with text terms optionally tied to a screen quadrant
//! (`tl:twitter`). Each is scored against its own index and the scores are
//! fused into one ranking.

pub mod bundle;
pub mod classes;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ranker;
pub mod recognizer;
pub mod screens;
pub mod sketch;
pub mod synonyms;
pub mod synth;
pub mod textindex;
pub mod textpipe;

pub use bundle::{IndexBundle, SearchEngine};
pub use classes::{ClassMap, DoodleClass};
pub use corpus::{
    load_corpus, parse_screen, quadrant_of, Corpus, PixelRect, Quadrant, Screen, UiElement,
};
pub use error::{Error, Result};
pub use ranker::{explain, rank, Explanation, Query, RankedEntry, RankedResult, DEFAULT_LIMIT};
pub use recognizer::{
    classify, normalize_sketch, resample_stroke, train_reference_classifier, Classifier,
    KnnClassifier, Point, Prediction, Sketch, Stroke,
};
pub use screens::{ScreenOrd, ScreenTable};
pub use sketch::{
    score_class_doodles, DoodlePlacement, NormRect, RankingConfig, SketchIndex, TileGrid,
};
pub use synonyms::{EmbeddingModel, SynonymSources, SynonymTable, Thesaurus};
pub use textindex::{
    parse_text_query, score_text_query, MatchWeights, ScreenScores, TextIndex, TextQuery, Zones,
};
pub use textpipe::{Lexicons, TextPipeline};
