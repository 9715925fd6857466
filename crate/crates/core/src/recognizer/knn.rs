//! Reference classifier: fixed-length geometric features and a
//! distance-weighted k-nearest-neighbour vote over training exemplars.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_sketch, Classifier, Point, Prediction, Sketch};
use crate::classes::DoodleClass;
use crate::error::{Error, Result};

const MODEL_MAGIC: &[u8; 8] = b"SSKNN\0\0\0";
const MODEL_VERSION: u32 = 1;
const TOP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    /// Points sampled along the ink of the whole sketch.
    pub path_points: usize,
    pub direction_bins: usize,
    pub direction_weight: f64,
    pub stroke_count_weight: f64,
    /// Stroke counts above this saturate.
    pub max_strokes: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            path_points: 32,
            direction_bins: 8,
            direction_weight: 1.0,
            stroke_count_weight: 0.5,
            max_strokes: 6,
        }
    }
}

impl FeatureParams {
    /// normalize -> resample -> [path points | direction histogram | stroke count]
    pub fn features(&self, sketch: &Sketch) -> Vec<f64> {
        let sketch = normalize_sketch(sketch).resampled();
        let mut out = Vec::with_capacity(2 * self.path_points + self.direction_bins + 1);

        let segments: Vec<(Point, Point)> = sketch
            .strokes()
            .iter()
            .flat_map(|s| s.points().windows(2).map(|w| (w[0], w[1])))
            .collect();
        let total: f64 = segments.iter().map(|(a, b)| a.distance(b)).sum();

        if total > 0.0 {
            let mut seg = 0;
            let mut before = 0.0;
            for i in 0..self.path_points {
                let target = total * i as f64 / (self.path_points - 1).max(1) as f64;
                while seg + 1 < segments.len()
                    && before + segments[seg].0.distance(&segments[seg].1) < target
                {
                    before += segments[seg].0.distance(&segments[seg].1);
                    seg += 1;
                }
                let (a, b) = segments[seg];
                let len = a.distance(&b);
                let t = if len > 0.0 {
                    ((target - before) / len).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let p = a.lerp(&b, t);
                out.extend([p.x, p.y]);
            }
        } else {
            let n = sketch.points().count().max(1) as f64;
            let (sx, sy) = sketch
                .points()
                .fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
            for _ in 0..self.path_points {
                out.extend([sx / n, sy / n]);
            }
        }

        let mut hist = vec![0.0; self.direction_bins];
        for (a, b) in &segments {
            let len = a.distance(b);
            if len > 0.0 {
                let angle = (b.y - a.y).atan2(b.x - a.x) + PI;
                let bin = ((angle / (2.0 * PI)) * self.direction_bins as f64) as usize;
                hist[bin.min(self.direction_bins - 1)] += len;
            }
        }
        for h in hist {
            out.push(if total > 0.0 {
                h / total * self.direction_weight
            } else {
                0.0
            });
        }
        let strokes = sketch.strokes().len().min(self.max_strokes) as f64;
        out.push(strokes / self.max_strokes as f64 * self.stroke_count_weight);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Exemplar {
    class: DoodleClass,
    features: Vec<f64>,
}

/// k-nearest-neighbour classifier over training exemplars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnClassifier {
    k: usize,
    params: FeatureParams,
    classes: Vec<DoodleClass>,
    exemplars: Vec<Exemplar>,
}

/// Train on labeled sketches. Every class in `classes` needs at least one
/// example and every example must use a declared class.
pub fn train_reference_classifier(
    labeled: &[(Sketch, DoodleClass)],
    classes: &[DoodleClass],
) -> Result<KnnClassifier> {
    KnnClassifier::train(labeled, classes, FeatureParams::default(), 3)
}

impl KnnClassifier {
    pub fn train(
        labeled: &[(Sketch, DoodleClass)],
        classes: &[DoodleClass],
        params: FeatureParams,
        k: usize,
    ) -> Result<Self> {
        if k == 0 || params.path_points < 2 || params.direction_bins == 0 || params.max_strokes == 0
        {
            return Err(Error::InvalidArgument(
                "invalid classifier parameters".into(),
            ));
        }
        let declared: BTreeSet<DoodleClass> = classes.iter().copied().collect();
        let mut exemplars = Vec::with_capacity(labeled.len());
        for (sketch, class) in labeled {
            if !declared.contains(class) {
                return Err(Error::InvalidArgument(format!(
                    "example of undeclared class {class}"
                )));
            }
            sketch.check()?;
            exemplars.push(Exemplar {
                class: *class,
                features: params.features(sketch),
            });
        }
        for class in &declared {
            if !exemplars.iter().any(|e| e.class == *class) {
                return Err(Error::MissingExamples(class.to_string()));
            }
        }
        Ok(KnnClassifier {
            k,
            params,
            classes: declared.into_iter().collect(),
            exemplars,
        })
    }

    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MODEL_MAGIC.to_vec();
        out.extend(MODEL_VERSION.to_le_bytes());
        out.extend(bincode::serialize(self).expect("model serialization is infallible"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Format {
            what: "recognizer model".into(),
            expected: format!("SSKNN v{MODEL_VERSION}"),
        };
        if bytes.len() < 12 || &bytes[..8] != MODEL_MAGIC {
            return Err(bad());
        }
        if u32::from_le_bytes(bytes[8..12].try_into().unwrap()) != MODEL_VERSION {
            return Err(bad());
        }
        bincode::deserialize(&bytes[12..]).map_err(|_| bad())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| e.at_path(path))
    }

    fn distances(&self, features: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = self
            .exemplars
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let sq: f64 = e
                    .features
                    .iter()
                    .zip(features)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (sq.sqrt(), i)
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d
    }
}

impl Classifier for KnnClassifier {
    /// Confidence is each class's share of the inverse-distance weighted vote
    /// of the `k` nearest exemplars. When fewer than three classes receive
    /// votes, the list is filled with the next nearest classes at zero
    /// confidence.
    fn classify(&self, sketch: &Sketch) -> Result<Vec<Prediction>> {
        sketch.check()?;
        let features = self.params.features(sketch);
        let ranked = self.distances(&features);
        let nearest = &ranked[..self.k.min(ranked.len())];

        let exact = nearest.iter().any(|(d, _)| *d < 1e-12);
        let mut votes: Vec<(DoodleClass, f64)> = Vec::new();
        for &(d, i) in nearest {
            let w = match (exact, d < 1e-12) {
                (true, true) => 1.0,
                (true, false) => 0.0,
                (false, _) => 1.0 / d,
            };
            let class = self.exemplars[i].class;
            match votes.iter_mut().find(|(c, _)| *c == class) {
                Some((_, v)) => *v += w,
                None => votes.push((class, w)),
            }
        }
        let total: f64 = votes.iter().map(|(_, v)| v).sum();
        let mut preds: Vec<Prediction> = votes
            .into_iter()
            .filter(|(_, v)| *v > 0.0)
            .map(|(class, v)| Prediction {
                class,
                confidence: v / total,
            })
            .collect();
        // stable: equal shares keep nearest-first order
        preds.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
        preds.truncate(TOP);
        for &(_, i) in &ranked {
            if preds.len() == TOP {
                break;
            }
            let class = self.exemplars[i].class;
            if !preds.iter().any(|p| p.class == class) {
                preds.push(Prediction {
                    class,
                    confidence: 0.0,
                });
            }
        }
        Ok(preds)
    }

    fn classes(&self) -> &[DoodleClass] {
        &self.classes
    }
}
