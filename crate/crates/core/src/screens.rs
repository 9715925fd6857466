use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;

/// Dense screen ordinal. Ordinals follow ascending screen id, so comparing
/// ordinals compares ids.
pub type ScreenOrd = u32;

/// Sorted screen ids shared by the text and sketch indexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenTable {
    ids: Vec<String>,
    fingerprint: [u8; 32],
}

impl ScreenTable {
    /// `ids` must be sorted and unique (as produced by [`Corpus`]).
    pub fn new(ids: Vec<String>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        let mut hasher = Sha256::new();
        for id in &ids {
            hasher.update((id.len() as u64).to_le_bytes());
            hasher.update(id.as_bytes());
        }
        ScreenTable {
            ids,
            fingerprint: hasher.finalize().into(),
        }
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::new(corpus.ids())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, ord: ScreenOrd) -> &str {
        &self.ids[ord as usize]
    }

    pub fn ord(&self, id: &str) -> Option<ScreenOrd> {
        self.ids
            .binary_search_by(|s| s.as_str().cmp(id))
            .ok()
            .map(|i| i as ScreenOrd)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }
}
