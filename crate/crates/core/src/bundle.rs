//! Both indexes plus the text pipeline they were built with, saved as one
//! versioned binary file.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classes::ClassMap;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ranker::{self, Explanation, Query, RankedResult};
use crate::screens::ScreenTable;
use crate::sketch::{DoodlePlacement, RankingConfig, SketchIndex, SketchIndexData, TileGrid};
use crate::synonyms::SynonymTable;
use crate::textindex::{TextIndex, TextIndexData, TextQuery};
use crate::textpipe::{Lexicons, TextPipeline};

const BUNDLE_MAGIC: &[u8; 8] = b"SSINDEX\0";
const BUNDLE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BundleData {
    ids: Vec<String>,
    lexicons: Lexicons,
    text: TextIndexData,
    sketch: SketchIndexData,
}

#[derive(Debug, Clone)]
pub struct IndexBundle {
    screens: Arc<ScreenTable>,
    pipeline: TextPipeline,
    text: TextIndex,
    sketch: SketchIndex,
}

impl IndexBundle {
    pub fn build(
        corpus: &Corpus,
        pipeline: TextPipeline,
        synonyms: &SynonymTable,
        class_map: &ClassMap,
        grid: TileGrid,
    ) -> Result<Self> {
        let screens = Arc::new(ScreenTable::from_corpus(corpus));
        let text = TextIndex::build(corpus, screens.clone(), &pipeline, synonyms)?;
        let sketch = SketchIndex::build(corpus, screens.clone(), class_map, grid)?;
        Ok(IndexBundle {
            screens,
            pipeline,
            text,
            sketch,
        })
    }

    pub fn screens(&self) -> &Arc<ScreenTable> {
        &self.screens
    }

    pub fn pipeline(&self) -> &TextPipeline {
        &self.pipeline
    }

    pub fn text(&self) -> &TextIndex {
        &self.text
    }

    pub fn sketch(&self) -> &SketchIndex {
        &self.sketch
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Ref<'a> {
            ids: &'a [String],
            lexicons: &'a Lexicons,
            text: &'a TextIndexData,
            sketch: &'a SketchIndexData,
        }
        let data = Ref {
            ids: self.screens.ids(),
            lexicons: self.pipeline.lexicons(),
            text: self.text.data(),
            sketch: self.sketch.data(),
        };
        let mut out = BUNDLE_MAGIC.to_vec();
        out.extend(BUNDLE_VERSION.to_le_bytes());
        out.extend(bincode::serialize(&data).expect("index serialization is infallible"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Format {
            what: "index bundle".into(),
            expected: format!("SSINDEX v{BUNDLE_VERSION}"),
        };
        if bytes.len() < 12 || &bytes[..8] != BUNDLE_MAGIC {
            return Err(bad());
        }
        if u32::from_le_bytes(bytes[8..12].try_into().unwrap()) != BUNDLE_VERSION {
            return Err(bad());
        }
        let data: BundleData = bincode::deserialize(&bytes[12..]).map_err(|_| bad())?;
        if data.ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad());
        }
        let screens = Arc::new(ScreenTable::new(data.ids));
        Ok(IndexBundle {
            pipeline: TextPipeline::from_lexicons(data.lexicons)?,
            text: TextIndex::from_data(screens.clone(), data.text),
            sketch: SketchIndex::from_data(screens.clone(), data.sketch),
            screens,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| e.at_path(path))
    }
}

/// An index bundle with fixed ranking parameters: the entry point used by
/// the CLI and the HTTP service.
#[derive(Debug, Clone)]
pub struct SearchEngine {
    bundle: IndexBundle,
    cfg: RankingConfig,
}

impl SearchEngine {
    pub fn new(bundle: IndexBundle, cfg: RankingConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(SearchEngine { bundle, cfg })
    }

    pub fn bundle(&self) -> &IndexBundle {
        &self.bundle
    }

    pub fn config(&self) -> &RankingConfig {
        &self.cfg
    }

    /// Parse raw text chips; each chip may hold several terms.
    pub fn parse_texts<S: AsRef<str>>(&self, raw: &[S]) -> Result<Vec<TextQuery>> {
        let mut out = Vec::new();
        for chip in raw {
            out.extend(TextQuery::parse_all(chip.as_ref(), self.bundle.pipeline())?);
        }
        Ok(out)
    }

    pub fn query<S: AsRef<str>>(&self, icons: &[DoodlePlacement], texts: &[S]) -> Result<Query> {
        let mut q = Query::new();
        for p in icons {
            p.bbox.validate()?;
            q.add_icon(*p);
        }
        q.texts = self.parse_texts(texts)?;
        Ok(q)
    }

    pub fn rank(&self, q: &Query, limit: usize) -> Result<RankedResult> {
        ranker::rank(
            q,
            self.bundle.sketch(),
            self.bundle.text(),
            &self.cfg,
            limit,
        )
    }

    pub fn explain(&self, q: &Query, screen_id: &str) -> Result<Explanation> {
        ranker::explain(
            q,
            screen_id,
            self.bundle.sketch(),
            self.bundle.text(),
            &self.cfg,
        )
    }
}
