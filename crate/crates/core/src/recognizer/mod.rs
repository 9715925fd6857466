//! Doodle strokes, resampling, and top-3 class prediction.

mod knn;
mod resample;

use serde::{Deserialize, Serialize};

use crate::classes::DoodleClass;
use crate::error::{Error, Result};

pub use knn::{train_reference_classifier, FeatureParams, KnnClassifier};
pub use resample::{
    arc_lengths, max_pairwise_distance, resample_stroke, resampled_count, RESAMPLE_FACTOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Points of one pen-down..pen-up motion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stroke(pub Vec<Point>);

impl Stroke {
    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<Point> for Stroke {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Stroke(iter.into_iter().collect())
    }
}

/// All strokes of one UI element's doodle, in drawing order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sketch(pub Vec<Stroke>);

impl Sketch {
    pub fn strokes(&self) -> &[Stroke] {
        &self.0
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.0.iter().flat_map(|s| s.0.iter())
    }

    /// At least one stroke, no empty strokes, finite coordinates.
    pub fn check(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::EmptySketch);
        }
        if self.0.iter().any(Stroke::is_empty) {
            return Err(Error::Validation("stroke with no points".into()));
        }
        if self.points().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Validation("non-finite stroke coordinate".into()));
        }
        Ok(())
    }

    /// [`Sketch::check`] plus every coordinate inside the unit canvas.
    pub fn check_canvas(&self) -> Result<()> {
        self.check()?;
        if self
            .points()
            .any(|p| !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y))
        {
            return Err(Error::Validation(
                "stroke coordinates must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Apply `f` to every point.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Sketch {
        Sketch(
            self.0
                .iter()
                .map(|s| s.0.iter().map(|p| f(*p)).collect())
                .collect(),
        )
    }

    pub fn resampled(&self) -> Sketch {
        Sketch(self.0.iter().map(resample_stroke).collect())
    }
}

/// Translate and scale so the bounding box fits the unit square, aspect
/// preserved and centered. A sketch with zero extent collapses to the
/// center point.
pub fn normalize_sketch(sketch: &Sketch) -> Sketch {
    let mut min = Point::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in sketch.points() {
        min = Point::new(min.x.min(p.x), min.y.min(p.y));
        max = Point::new(max.x.max(p.x), max.y.max(p.y));
    }
    let extent = (max.x - min.x).max(max.y - min.y);
    if extent.is_nan() || extent <= 1e-12 {
        return sketch.map_points(|_| Point::new(0.5, 0.5));
    }
    let (w, h) = (max.x - min.x, max.y - min.y);
    let off_x = (extent - w) / 2.0;
    let off_y = (extent - h) / 2.0;
    sketch.map_points(|p| {
        Point::new(
            (p.x - min.x + off_x) / extent,
            (p.y - min.y + off_y) / extent,
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub class: DoodleClass,
    pub confidence: f64,
}

/// Source of top-3 predictions for a doodle.
pub trait Classifier: Send + Sync {
    fn classify(&self, sketch: &Sketch) -> Result<Vec<Prediction>>;

    fn classes(&self) -> &[DoodleClass];
}

pub fn classify(sketch: &Sketch, model: &dyn Classifier) -> Result<Vec<Prediction>> {
    model.classify(sketch)
}
