//! Seeded generators for doodles and screen corpora.

mod corpus;
mod doodles;

pub use corpus::{
    generate_corpus, made_up_words, plant_targets, write_corpus, CorpusSpec, PlantedTarget,
};
pub use doodles::{generate_doodle, generate_doodles, template, DoodleNoise};
