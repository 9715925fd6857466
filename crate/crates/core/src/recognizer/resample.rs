use super::{Point, Stroke};

/// Output point count per unit of the stroke's largest point-to-point distance.
pub const RESAMPLE_FACTOR: f64 = 20.0;

pub fn max_pairwise_distance(points: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.distance(b));
        }
    }
    best
}

/// `max(2, round(20 * dmax))`.
pub fn resampled_count(points: &[Point]) -> usize {
    ((RESAMPLE_FACTOR * max_pairwise_distance(points)).round() as usize).max(2)
}

/// Cumulative arc length at each point; the first entry is zero.
pub fn arc_lengths(points: &[Point]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(points.len());
    out.push(0.0);
    for w in points.windows(2) {
        acc += w[0].distance(&w[1]);
        out.push(acc);
    }
    out
}

/// Resample to `max(2, round(20 * dmax))` points placed at equal arc-length
/// steps along the original polyline by linear interpolation. The first and
/// last points are kept exactly. Strokes with fewer than two points are
/// returned unchanged.
pub fn resample_stroke(stroke: &Stroke) -> Stroke {
    let pts = stroke.points();
    if pts.len() < 2 {
        return stroke.clone();
    }
    let n = resampled_count(pts);
    let cum = arc_lengths(pts);
    let total = *cum.last().unwrap();
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if total <= 0.0 {
        return Stroke(vec![first, last]);
    }

    let mut out = Vec::with_capacity(n);
    out.push(first);
    let mut seg = 0;
    for i in 1..n - 1 {
        let target = total * i as f64 / (n - 1) as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 {
            ((target - cum[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(pts[seg].lerp(&pts[seg + 1], t));
    }
    out.push(last);
    Stroke(out)
}
