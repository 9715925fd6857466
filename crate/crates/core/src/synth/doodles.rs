//! Parametric doodle templates, one per class, perturbed by a random affine
//! warp, Gaussian point jitter and point dropout.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classes::DoodleClass;
use crate::error::{Error, Result};
use crate::recognizer::{Point, Sketch, Stroke};

type Poly = Vec<(f64, f64)>;

fn arc(cx: f64, cy: f64, r: f64, from_deg: f64, to_deg: f64) -> Poly {
    let steps = (((to_deg - from_deg).abs() / 15.0).ceil() as usize).max(2);
    (0..=steps)
        .map(|i| {
            let a = (from_deg + (to_deg - from_deg) * i as f64 / steps as f64).to_radians();
            (cx + r * a.cos(), cy + r * a.sin())
        })
        .collect()
}

fn circle(cx: f64, cy: f64, r: f64) -> Poly {
    arc(cx, cy, r, 0.0, 360.0)
}

fn rect(l: f64, t: f64, r: f64, b: f64) -> Poly {
    vec![(l, t), (r, t), (r, b), (l, b), (l, t)]
}

/// Strokes of the clean drawing of `class`, x right and y down, inside the
/// unit square.
pub fn template(class: DoodleClass) -> Vec<Poly> {
    use DoodleClass::*;
    match class {
        Camera => vec![
            rect(0.1, 0.3, 0.9, 0.85),
            circle(0.5, 0.58, 0.17),
            vec![(0.35, 0.3), (0.4, 0.18), (0.6, 0.18), (0.65, 0.3)],
        ],
        Cloud => {
            let mut s = vec![(0.8, 0.75), (0.2, 0.75)];
            s.extend(arc(0.22, 0.6, 0.15, 90.0, 250.0));
            s.extend(arc(0.48, 0.45, 0.22, 200.0, 340.0));
            s.extend(arc(0.78, 0.6, 0.15, 270.0, 450.0));
            vec![s]
        }
        Envelope => vec![
            rect(0.05, 0.2, 0.95, 0.8),
            vec![(0.05, 0.2), (0.5, 0.55), (0.95, 0.2)],
        ],
        House => vec![
            vec![(0.1, 0.45), (0.5, 0.1), (0.9, 0.45)],
            vec![(0.2, 0.4), (0.2, 0.9), (0.8, 0.9), (0.8, 0.4)],
            vec![(0.42, 0.9), (0.42, 0.65), (0.58, 0.65), (0.58, 0.9)],
        ],
        JailWindow => vec![
            rect(0.1, 0.1, 0.9, 0.9),
            vec![(0.3, 0.1), (0.3, 0.9)],
            vec![(0.5, 0.1), (0.5, 0.9)],
            vec![(0.7, 0.1), (0.7, 0.9)],
        ],
        Square => vec![rect(0.1, 0.1, 0.9, 0.9)],
        Star => {
            let pts = (0..=10)
                .map(|i| {
                    let r = if i % 2 == 0 { 0.45 } else { 0.18 };
                    let a = (-90.0 + 36.0 * i as f64).to_radians();
                    (0.5 + r * a.cos(), 0.52 + r * a.sin())
                })
                .collect();
            vec![pts]
        }
        Avatar => vec![circle(0.5, 0.3, 0.18), arc(0.5, 0.95, 0.38, 180.0, 360.0)],
        Back => vec![
            vec![(0.9, 0.5), (0.1, 0.5)],
            vec![(0.4, 0.2), (0.1, 0.5), (0.4, 0.8)],
        ],
        Cancel => vec![
            vec![(0.15, 0.15), (0.85, 0.85)],
            vec![(0.85, 0.15), (0.15, 0.85)],
        ],
        Checkbox => vec![
            rect(0.1, 0.1, 0.9, 0.9),
            vec![(0.25, 0.5), (0.45, 0.72), (0.8, 0.28)],
        ],
        DropDown => vec![vec![(0.15, 0.35), (0.5, 0.7), (0.85, 0.35)]],
        Forward => vec![
            vec![(0.1, 0.5), (0.9, 0.5)],
            vec![(0.6, 0.2), (0.9, 0.5), (0.6, 0.8)],
        ],
        LeftArrow => vec![vec![(0.65, 0.15), (0.3, 0.5), (0.65, 0.85)]],
        Menu => vec![
            vec![(0.1, 0.25), (0.9, 0.25)],
            vec![(0.1, 0.5), (0.9, 0.5)],
            vec![(0.1, 0.75), (0.9, 0.75)],
        ],
        Play => vec![vec![(0.25, 0.15), (0.85, 0.5), (0.25, 0.85), (0.25, 0.15)]],
        Plus => vec![vec![(0.5, 0.1), (0.5, 0.9)], vec![(0.1, 0.5), (0.9, 0.5)]],
        Search => vec![circle(0.4, 0.4, 0.28), vec![(0.6, 0.6), (0.9, 0.9)]],
        Setting => {
            let teeth = 8;
            let mut gear = Vec::new();
            for i in 0..teeth {
                let base = 360.0 * i as f64 / teeth as f64;
                let step = 360.0 / teeth as f64;
                for (off, r) in [(0.0, 0.35), (0.2, 0.45), (0.5, 0.45), (0.7, 0.35)] {
                    let a = (base + off * step).to_radians();
                    gear.push((0.5 + r * a.cos(), 0.5 + r * a.sin()));
                }
            }
            gear.push(gear[0]);
            vec![gear, circle(0.5, 0.5, 0.14)]
        }
        Share => vec![
            vec![(0.75, 0.2), (0.25, 0.5), (0.75, 0.8)],
            circle(0.75, 0.2, 0.09),
            circle(0.25, 0.5, 0.09),
            circle(0.75, 0.8, 0.09),
        ],
        Slider => vec![vec![(0.05, 0.5), (0.95, 0.5)], circle(0.4, 0.5, 0.1)],
        Squiggle => {
            let s = (0..=24)
                .map(|i| {
                    let x = i as f64 / 24.0;
                    (0.05 + 0.9 * x, 0.5 + 0.15 * (4.0 * PI * x).sin())
                })
                .collect();
            vec![s]
        }
        Switch => {
            let mut pill = arc(0.3, 0.5, 0.2, 90.0, 270.0);
            pill.extend(arc(0.7, 0.5, 0.2, 270.0, 450.0));
            pill.push(pill[0]);
            vec![pill, circle(0.7, 0.5, 0.14)]
        }
    }
}

/// Perturbation applied to a template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoodleNoise {
    /// Standard deviation of per-point jitter, as a fraction of the doodle size.
    pub jitter: f64,
    /// Probability of dropping each interior point.
    pub dropout: f64,
    /// Maximum rotation in degrees.
    pub rotation: f64,
    /// Maximum relative stretch of one axis against the other.
    pub stretch: f64,
    /// Spacing of points inserted along template edges before jitter.
    pub spacing: f64,
}

impl Default for DoodleNoise {
    fn default() -> Self {
        DoodleNoise {
            jitter: 0.015,
            dropout: 0.1,
            rotation: 8.0,
            stretch: 0.15,
            spacing: 0.04,
        }
    }
}

fn densify(poly: &Poly, spacing: f64) -> Poly {
    let mut out = vec![poly[0]];
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let n = ((len / spacing).ceil() as usize).max(1);
        for i in 1..=n {
            let t = i as f64 / n as f64;
            out.push((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t));
        }
    }
    out
}

/// One noisy doodle of `class` drawn somewhere on the unit canvas.
pub fn generate_doodle(class: DoodleClass, noise: &DoodleNoise, rng: &mut impl Rng) -> Sketch {
    let jitter = Normal::new(0.0, noise.jitter.max(0.0)).expect("finite jitter");
    let theta = rng.random_range(-1.0..=1.0) * noise.rotation.to_radians();
    let stretch = 1.0 + rng.random_range(-1.0..=1.0) * noise.stretch;
    let (sx, sy) = (stretch.sqrt(), 1.0 / stretch.sqrt());
    let (sin, cos) = theta.sin_cos();
    let size = rng.random_range(0.3..0.8);
    let ox = rng.random_range(0.05..(0.95 - size));
    let oy = rng.random_range(0.05..(0.95 - size));

    let strokes = template(class)
        .iter()
        .map(|poly| {
            let dense = densify(poly, noise.spacing);
            let last = dense.len() - 1;
            let mut out = Stroke::default();
            for (i, &(x, y)) in dense.iter().enumerate() {
                if i != 0 && i != last && rng.random_bool(noise.dropout) {
                    continue;
                }
                let (x, y) = ((x - 0.5) * sx, (y - 0.5) * sy);
                let (x, y) = (x * cos - y * sin + 0.5, x * sin + y * cos + 0.5);
                let (x, y) = (x + jitter.sample(rng), y + jitter.sample(rng));
                out.0.push(Point::new(
                    (ox + x * size).clamp(0.0, 1.0),
                    (oy + y * size).clamp(0.0, 1.0),
                ));
            }
            out
        })
        .collect();
    Sketch(strokes)
}

/// `n_per_class` doodles for each class, class-major, reproducible from `seed`.
pub fn generate_doodles(
    classes: &[DoodleClass],
    n_per_class: usize,
    seed: u64,
    noise: &DoodleNoise,
) -> Result<Vec<(Sketch, DoodleClass)>> {
    if n_per_class == 0 || classes.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one class and one doodle per class".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(classes.len() * n_per_class);
    for &class in classes {
        for _ in 0..n_per_class {
            out.push((generate_doodle(class, noise, &mut rng), class));
        }
    }
    Ok(out)
}
