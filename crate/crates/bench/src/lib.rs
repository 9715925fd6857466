//! Fixtures shared by the benchmarks: a synthetic corpus with planted
//! targets, its search engine, and the queries that find each target.

use screenseek_core::synth::{plant_targets, CorpusSpec};
use screenseek_core::{
    ClassMap, Corpus, IndexBundle, Query, RankingConfig, SearchEngine, SynonymTable, TextPipeline,
    TileGrid,
};

pub struct Fixture {
    pub engine: SearchEngine,
    pub queries: Vec<Query>,
}

/// `screens` distractors plus `targets` planted screens.
pub fn fixture(screens: usize, targets: usize, seed: u64) -> Fixture {
    let class_map = ClassMap::default();
    let (all, planted) = plant_targets(&CorpusSpec::new(screens, seed), &class_map, targets, 0.03)
        .expect("valid spec");
    let corpus = Corpus::from_screens(all).expect("unique ids");
    let bundle = IndexBundle::build(
        &corpus,
        TextPipeline::default(),
        &SynonymTable::default(),
        &class_map,
        TileGrid::default(),
    )
    .expect("index builds");
    let engine =
        SearchEngine::new(bundle, RankingConfig::default()).expect("default config is valid");
    let queries = planted
        .iter()
        .map(|t| {
            engine
                .query(&t.icons, &t.texts)
                .expect("planted queries parse")
        })
        .collect();
    Fixture { engine, queries }
}
