//! Synthetic depth maps: constant-depth shapes over slanted planes whose
//! depth changes in unit steps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::image::DepthImage;

#[derive(Debug, Clone, Copy)]
enum Shape {
    Rect { top: usize, left: usize, bottom: usize, right: usize },
    Disc { row: f64, col: f64, radius: f64 },
}

impl Shape {
    fn contains(&self, i: usize, j: usize) -> bool {
        match *self {
            Shape::Rect { top, left, bottom, right } => (top..bottom).contains(&i) && (left..right).contains(&j),
            Shape::Disc { row, col, radius } => {
                let (di, dj) = (i as f64 - row, j as f64 - col);
                di * di + dj * dj <= radius * radius
            }
        }
    }
}

/// Depth profile inside a shape.
#[derive(Debug, Clone, Copy)]
enum Fill {
    Constant(f64),
    /// `base + floor(row / period)` or the same along columns.
    Ramp { base: f64, period: usize, vertical: bool },
}

impl Fill {
    fn at(&self, i: usize, j: usize) -> f64 {
        match *self {
            Fill::Constant(v) => v,
            Fill::Ramp { base, period, vertical } => {
                let t = if vertical { i } else { j };
                base + (t / period) as f64
            }
        }
    }
}

/// Piecewise-smooth 8-bit depth map, deterministic in `seed`.
///
/// The background is a plane rising by one level every few columns; on top
/// sit three to five rectangles or discs, each either flat or a ramp of unit
/// steps.
pub fn depth_fixture(width: usize, height: usize, seed: u64) -> Result<DepthImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor = rng.random_range(40..90);
    let background = Fill::Ramp {
        base: floor as f64,
        period: rng.random_range(16..40),
        vertical: rng.random_bool(0.5),
    };
    let count = rng.random_range(3..=5);
    let mut layers: Vec<(Shape, Fill)> = Vec::with_capacity(count);
    for _ in 0..count {
        let shape = if rng.random_bool(0.5) {
            let rh = rng.random_range(height / 6..=height / 2);
            let rw = rng.random_range(width / 6..=width / 2);
            let top = rng.random_range(0..height - rh);
            let left = rng.random_range(0..width - rw);
            Shape::Rect { top, left, bottom: top + rh, right: left + rw }
        } else {
            let r = rng.random_range(width.min(height) as f64 / 10.0..width.min(height) as f64 / 4.0);
            Shape::Disc {
                row: rng.random_range(0.0..height as f64),
                col: rng.random_range(0.0..width as f64),
                radius: r,
            }
        };
        let level = (floor + rng.random_range(10..60)) as f64;
        let fill = if rng.random_bool(0.5) {
            Fill::Constant(level)
        } else {
            Fill::Ramp {
                base: level,
                period: rng.random_range(6..20),
                vertical: rng.random_bool(0.5),
            }
        };
        layers.push((shape, fill));
    }

    DepthImage::from_fn(width, height, |i, j| {
        let fill = layers
            .iter()
            .rev()
            .find(|(s, _)| s.contains(i, j))
            .map_or(background, |&(_, f)| f);
        fill.at(i, j).clamp(0.0, 255.0)
    })
}
