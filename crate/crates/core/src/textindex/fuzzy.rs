//! Bounded Levenshtein matching and a deletion-neighbourhood candidate index.

use std::collections::HashMap;

/// `true` iff the Levenshtein distance (unit-cost insert, delete,
/// substitute, over chars) between `a` and `b` is at most `k`.
pub fn fuzzy_match(a: &str, b: &str, k: usize) -> bool {
    if a == b {
        return true;
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > k {
        return false;
    }
    match k {
        0 => false,
        1 => within_one(&a, &b),
        _ => banded_distance(&a, &b, k) <= k,
    }
}

fn within_one(a: &[char], b: &[char]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let prefix = short.iter().zip(long).take_while(|(x, y)| x == y).count();
    if short.len() == long.len() {
        short[prefix + 1..] == long[prefix + 1..]
    } else {
        short[prefix..] == long[prefix + 1..]
    }
}

/// Distance capped at `k + 1`.
fn banded_distance(a: &[char], b: &[char], k: usize) -> usize {
    let cap = k + 1;
    let mut prev: Vec<usize> = (0..=b.len()).map(|j| j.min(cap)).collect();
    let mut cur = vec![cap; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = (i + 1).min(cap);
        let lo = (i + 1).saturating_sub(k).max(1);
        let hi = (i + 1 + k).min(b.len());
        if lo > 1 {
            cur[lo - 1] = cap;
        }
        let mut row_min = cur[0];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(*ca != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(cap);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < b.len() {
            cur[hi + 1..].iter_mut().for_each(|x| *x = cap);
        }
        if row_min >= cap {
            return cap;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()].min(cap)
}

fn deletions(word: &str) -> impl Iterator<Item = String> + '_ {
    word.char_indices().map(move |(i, c)| {
        let mut s = String::with_capacity(word.len());
        s.push_str(&word[..i]);
        s.push_str(&word[i + c.len_utf8()..]);
        s
    })
}

/// Maps each word and each of its single-character deletions to the word's
/// id. Two words within distance one always share a key, so lookups touch
/// only `O(len)` buckets instead of the whole vocabulary.
#[derive(Debug, Clone, Default)]
pub struct DeletionIndex {
    buckets: HashMap<String, Vec<u32>>,
}

impl DeletionIndex {
    pub fn build<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let mut buckets: HashMap<String, Vec<u32>> = HashMap::new();
        for (id, word) in words.into_iter().enumerate() {
            let id = id as u32;
            buckets.entry(word.to_string()).or_default().push(id);
            for key in deletions(word) {
                let ids = buckets.entry(key).or_default();
                if ids.last() != Some(&id) {
                    ids.push(id);
                }
            }
        }
        DeletionIndex { buckets }
    }

    /// Ids of words within distance one of `query`, unverified, possibly
    /// repeated.
    pub fn candidates(&self, query: &str, out: &mut Vec<u32>) {
        if let Some(ids) = self.buckets.get(query) {
            out.extend_from_slice(ids);
        }
        for key in deletions(query) {
            if let Some(ids) = self.buckets.get(&key) {
                out.extend_from_slice(ids);
            }
        }
    }
}
