//! Deterministic synthetic chart sets: seeded mixes of rectangles, right
//! triangles, L-shapes, and convex blobs with a wide height range so row
//! knees actually occur. Same seed, same set, byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Chart, ChartSet};
use crate::error::{Error, Result};
use crate::geom::Point;

#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub seed: u64,
    pub count: u32,
    /// Smallest chart height in texels.
    pub min_height: f64,
    /// Largest chart height in texels; at least 10x the minimum keeps the
    /// height distribution knee-friendly.
    pub max_height: f64,
}

impl CorpusParams {
    pub fn new(seed: u64, count: u32) -> Self {
        CorpusParams { seed, count, min_height: 8.0, max_height: 110.0 }
    }
}

/// Generate a chart set. The first two charts pin the height extremes so
/// every set spans the full range.
pub fn generate_chart_set(params: &CorpusParams) -> Result<ChartSet> {
    if params.count == 0 {
        return Err(Error::Usage("corpus chart count must be positive".into()));
    }
    if !(params.min_height > 0.0 && params.max_height >= params.min_height) {
        return Err(Error::Usage("corpus height range is invalid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut charts = Vec::with_capacity(params.count as usize);
    for id in 0..params.count {
        let h = match id {
            0 => params.max_height,
            1 => params.min_height,
            _ => {
                // Log-uniform height favors small charts like real inputs.
                let t: f64 = rng.r#gen();
                params.min_height * (params.max_height / params.min_height).powf(t)
            }
        };
        let aspect: f64 = rng.gen_range(0.3..1.1);
        let w = (h * aspect).max(2.0);
        let kind = rng.gen_range(0..4u32);
        let chart = match kind {
            0 => rectangle(id, w, h),
            1 => right_triangle(id, w, h, rng.gen_range(0..4)),
            2 => l_shape(id, w, h, &mut rng),
            _ => convex_blob(id, w, h, &mut rng),
        };
        charts.push(chart);
    }
    Ok(ChartSet { name: format!("synthetic-{}", params.seed), charts })
}

fn rectangle(id: u32, w: f64, h: f64) -> Chart {
    Chart {
        id,
        vertices: vec![
            Point::new(0.0, 0.0),
            Point::new(w, 0.0),
            Point::new(w, h),
            Point::new(0.0, h),
        ],
        triangles: vec![[0, 1, 2], [0, 2, 3]],
    }
}

fn right_triangle(id: u32, w: f64, h: f64, corner: u32) -> Chart {
    let (a, b, c) = match corner {
        0 => (Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(0.0, h)),
        1 => (Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h)),
        2 => (Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)),
        _ => (Point::new(0.0, 0.0), Point::new(w, h), Point::new(0.0, h)),
    };
    Chart { id, vertices: vec![a, b, c], triangles: vec![[0, 1, 2]] }
}

/// Axis-aligned L: a full-height column of width `s` plus a top bar of
/// thickness `t`. Split into two convex quads sharing the inner corner.
fn l_shape(id: u32, w: f64, h: f64, rng: &mut ChaCha8Rng) -> Chart {
    let s = (w * rng.gen_range(0.3..0.6)).max(1.0);
    let t = (h * rng.gen_range(0.25..0.5)).max(1.0);
    let vertices = vec![
        Point::new(0.0, 0.0),
        Point::new(w, 0.0),
        Point::new(w, t),
        Point::new(s, t),
        Point::new(s, h),
        Point::new(0.0, h),
    ];
    Chart { id, vertices, triangles: vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]] }
}

/// Convex polygon: points on an ellipse at sorted random angles, fanned from
/// the first vertex. Angular order on a convex curve keeps it simple.
fn convex_blob(id: u32, w: f64, h: f64, rng: &mut ChaCha8Rng) -> Chart {
    let n = rng.gen_range(5..10usize);
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    while angles.len() < 3 {
        angles.push(angles.last().unwrap() + 1.0);
    }
    let (rx, ry) = (w / 2.0, h / 2.0);
    let vertices: Vec<Point> = angles
        .iter()
        .map(|a| Point::new(rx + rx * a.cos(), ry + ry * a.sin()))
        .collect();
    let triangles = (1..vertices.len() as u32 - 1).map(|i| [0, i, i + 1]).collect();
    Chart { id, vertices, triangles }
}
