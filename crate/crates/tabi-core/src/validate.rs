//! Hard validity via conservative rasterization: no chart overlaps, gutters
//! respected after dilation, nothing outside the atlas.
//!
//! A texel counts as covered when its unit square intersects a chart
//! triangle with positive area (boundary grazing does not count, so charts
//! with exact-integer edges cover exactly their own texels). Dilation is
//! square (Chebyshev) by the gutter radius. Atlas edges are exempt from
//! gutters: only raw coverage outside the atlas is an error.

use rayon::prelude::*;

use crate::chart::{placed_vertices, AtlasSpec, Chart, ChartSet, PackResult};
use crate::error::{Error, Result};
use crate::geom::{triangle_area_signed, Point};

/// Texel counts that must all be zero for a packing to pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Texels covered by two or more charts.
    pub overlap_texels: u64,
    /// Texels covered by two or more charts after gutter dilation.
    pub gutter_violation_texels: u64,
    /// Chart-texel incidences outside the atlas bounds.
    pub out_of_bounds_texels: u64,
    pub passed: bool,
}

/// Covered texels of one chart as a bitmap over its integer bounding box.
pub struct CoverageMask {
    pub x0: i64,
    pub y0: i64,
    pub w: usize,
    pub h: usize,
    pub bits: Vec<bool>,
}

impl CoverageMask {
    fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.w + x]
    }

    /// Chebyshev dilation by `r` texels.
    pub fn dilated(&self, r: i64) -> CoverageMask {
        if r == 0 {
            return CoverageMask {
                x0: self.x0,
                y0: self.y0,
                w: self.w,
                h: self.h,
                bits: self.bits.clone(),
            };
        }
        let r = r as usize;
        let (w2, h2) = (self.w + 2 * r, self.h + 2 * r);
        // Two-pass: spread rows, then columns.
        let mut rows = vec![false; w2 * self.h];
        for y in 0..self.h {
            for x in 0..self.w {
                if self.get(x, y) {
                    for dx in 0..=2 * r {
                        rows[y * w2 + x + dx] = true;
                    }
                }
            }
        }
        let mut bits = vec![false; w2 * h2];
        for y in 0..self.h {
            for x in 0..w2 {
                if rows[y * w2 + x] {
                    for dy in 0..=2 * r {
                        bits[(y + dy) * w2 + x] = true;
                    }
                }
            }
        }
        CoverageMask { x0: self.x0 - r as i64, y0: self.y0 - r as i64, w: w2, h: h2, bits }
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }
}

/// Area of the polygon after clipping to the axis-aligned square
/// [x, x+1] x [y, y+1] (Sutherland-Hodgman).
fn clipped_area(tri: &[Point; 3], x: f64, y: f64) -> f64 {
    let mut poly: Vec<Point> = tri.to_vec();
    let mut next: Vec<Point> = Vec::with_capacity(8);
    // Each clip edge keeps points with keep(p) >= 0.
    let edges: [(f64, bool, bool); 4] = [
        (x, true, true),        // p.x >= x
        (x + 1.0, true, false), // p.x <= x + 1
        (y, false, true),       // p.y >= y
        (y + 1.0, false, false),
    ];
    for &(bound, on_x, keep_ge) in &edges {
        next.clear();
        let m = poly.len();
        if m == 0 {
            return 0.0;
        }
        for i in 0..m {
            let a = poly[i];
            let b = poly[(i + 1) % m];
            let va = if on_x { a.x } else { a.y } - bound;
            let vb = if on_x { b.x } else { b.y } - bound;
            let (va, vb) = if keep_ge { (va, vb) } else { (-va, -vb) };
            if va >= 0.0 {
                next.push(a);
            }
            if (va > 0.0 && vb < 0.0) || (va < 0.0 && vb > 0.0) {
                let t = va / (va - vb);
                next.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        std::mem::swap(&mut poly, &mut next);
    }
    let m = poly.len();
    if m < 3 {
        return 0.0;
    }
    let mut area2 = 0.0;
    for i in 0..m {
        let a = poly[i];
        let b = poly[(i + 1) % m];
        area2 += a.x * b.y - b.x * a.y;
    }
    area2.abs() * 0.5
}

const COVER_EPS: f64 = 1e-9;

/// Conservatively rasterize transformed vertices + triangles into a mask.
pub fn rasterize(vertices: &[Point], triangles: &[[u32; 3]]) -> CoverageMask {
    let bb = crate::geom::Aabb::from_points(vertices);
    let x0 = bb.min.x.floor() as i64;
    let y0 = bb.min.y.floor() as i64;
    let x1 = bb.max.x.ceil() as i64;
    let y1 = bb.max.y.ceil() as i64;
    let w = ((x1 - x0).max(1)) as usize;
    let h = ((y1 - y0).max(1)) as usize;
    let mut bits = vec![false; w * h];
    for t in triangles {
        let tri = [
            vertices[t[0] as usize],
            vertices[t[1] as usize],
            vertices[t[2] as usize],
        ];
        if triangle_area_signed(tri[0], tri[1], tri[2]).abs() <= 0.0 {
            continue;
        }
        let tminx = tri.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor() as i64;
        let tmaxx = tri.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        let tminy = tri.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor() as i64;
        let tmaxy = tri.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max).ceil() as i64;
        for ty in tminy..tmaxy {
            for tx in tminx..tmaxx {
                let ix = (tx - x0) as usize;
                let iy = (ty - y0) as usize;
                if ix >= w || iy >= h || bits[iy * w + ix] {
                    continue;
                }
                if clipped_area(&tri, tx as f64, ty as f64) > COVER_EPS {
                    bits[iy * w + ix] = true;
                }
            }
        }
    }
    CoverageMask { x0, y0, w, h, bits }
}

/// Rasterize one placed chart.
pub fn chart_mask(chart: &Chart, result: &PackResult) -> Result<CoverageMask> {
    let placement = result
        .placement(chart.id)
        .ok_or_else(|| Error::ChartIdMismatch(format!("chart {} missing placement", chart.id)))?;
    let fs = result.per_chart_final_scale[chart.id as usize];
    let verts = placed_vertices(chart, placement, fs);
    Ok(rasterize(&verts, &chart.triangles))
}

struct CountGrid {
    w: usize,
    h: usize,
    counts: Vec<u16>,
}

impl CountGrid {
    fn new(spec: &AtlasSpec) -> Self {
        CountGrid {
            w: spec.width as usize,
            h: spec.height as usize,
            counts: vec![0; spec.width as usize * spec.height as usize],
        }
    }

    /// Stamp a mask; returns the number of mask texels outside the grid.
    fn stamp(&mut self, mask: &CoverageMask) -> u64 {
        let mut outside = 0;
        for y in 0..mask.h {
            for x in 0..mask.w {
                if !mask.get(x, y) {
                    continue;
                }
                let gx = mask.x0 + x as i64;
                let gy = mask.y0 + y as i64;
                if gx < 0 || gy < 0 || gx >= self.w as i64 || gy >= self.h as i64 {
                    outside += 1;
                } else {
                    self.counts[gy as usize * self.w + gx as usize] =
                        self.counts[gy as usize * self.w + gx as usize].saturating_add(1);
                }
            }
        }
        outside
    }

    fn multi_covered(&self) -> u64 {
        self.counts.iter().filter(|&&c| c >= 2).count() as u64
    }

    fn covered(&self) -> u64 {
        self.counts.iter().filter(|&&c| c >= 1).count() as u64
    }
}

/// Exact validity check: overlaps, gutter violations (after dilating every
/// chart by the gutter radius), and raw coverage outside the atlas.
pub fn validate_atlas(set: &ChartSet, result: &PackResult, spec: &AtlasSpec) -> Result<ValidationReport> {
    if !result.is_success() {
        return Err(Error::FailedResult);
    }
    let masks: Vec<CoverageMask> = set
        .charts
        .par_iter()
        .map(|c| chart_mask(c, result))
        .collect::<Result<Vec<_>>>()?;

    let mut raw = CountGrid::new(spec);
    let mut dilated = CountGrid::new(spec);
    let mut out_of_bounds = 0u64;
    let r = spec.gutter as i64;
    for m in &masks {
        out_of_bounds += raw.stamp(m);
        // Dilated coverage falling off the atlas is legal (edges are exempt);
        // stamping clips it automatically and we ignore its outside count.
        dilated.stamp(&m.dilated(r));
    }
    let overlap = raw.multi_covered();
    let gutter = dilated.multi_covered();
    Ok(ValidationReport {
        overlap_texels: overlap,
        gutter_violation_texels: gutter,
        out_of_bounds_texels: out_of_bounds,
        passed: overlap == 0 && gutter == 0 && out_of_bounds == 0,
    })
}

/// Fraction of atlas texels covered by at least one chart.
pub fn occupancy(set: &ChartSet, result: &PackResult, spec: &AtlasSpec) -> Result<f64> {
    if !result.is_success() {
        return Err(Error::FailedResult);
    }
    let masks: Vec<CoverageMask> = set
        .charts
        .par_iter()
        .map(|c| chart_mask(c, result))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = CountGrid::new(spec);
    for m in &masks {
        grid.stamp(m);
    }
    Ok(grid.covered() as f64 / (spec.width as f64 * spec.height as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{PackStats, Placement};
    use crate::geom::{Fraction, Rotation};

    fn square_chart(id: u32, side: f64) -> Chart {
        Chart {
            id,
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(side, 0.0),
                Point::new(side, side),
                Point::new(0.0, side),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    fn place(id: u32, tx: i64, ty: i64) -> Placement {
        Placement {
            chart_id: id,
            rotation: Rotation::R0,
            reflect_x: false,
            reflect_y: false,
            translation: (tx, ty),
            prerotation_angle: 0.0,
        }
    }

    fn result_of(placements: Vec<Placement>) -> PackResult {
        let n = placements.len();
        PackResult {
            placements,
            scale_index: Some(64),
            scale_count: 64,
            per_chart_final_scale: vec![Fraction::one(); n],
            stats: PackStats::default(),
            diagnostic: None,
        }
    }

    #[test]
    fn integer_square_covers_exactly_its_texels() {
        let c = square_chart(0, 4.0);
        let m = rasterize(&c.vertices, &c.triangles);
        assert_eq!(m.count(), 16);
    }

    #[test]
    fn single_chart_passes() {
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 4.0)] };
        let spec = AtlasSpec::new(64, 64);
        let rep = validate_atlas(&set, &result_of(vec![place(0, 0, 0)]), &spec).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn gutter_needs_two_empty_texels() {
        let mut b = square_chart(1, 4.0);
        b.id = 1;
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 4.0), b] };
        let spec = AtlasSpec::new(64, 64);
        // Distance 1: no overlap, but dilated coverage collides.
        let rep = validate_atlas(&set, &result_of(vec![place(0, 0, 0), place(1, 5, 0)]), &spec).unwrap();
        assert_eq!(rep.overlap_texels, 0);
        assert!(rep.gutter_violation_texels > 0);
        assert!(!rep.passed);
        // Distance 2: valid.
        let rep = validate_atlas(&set, &result_of(vec![place(0, 0, 0), place(1, 6, 0)]), &spec).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn atlas_edges_are_exempt_from_gutters() {
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 4.0)] };
        let spec = AtlasSpec::new(4, 4);
        let rep = validate_atlas(&set, &result_of(vec![place(0, 0, 0)]), &spec).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn out_of_bounds_is_detected() {
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 4.0)] };
        let spec = AtlasSpec::new(4, 4);
        let rep = validate_atlas(&set, &result_of(vec![place(0, 1, 0)]), &spec).unwrap();
        assert_eq!(rep.out_of_bounds_texels, 4);
        assert!(!rep.passed);
    }

    #[test]
    fn seeded_overlap_is_caught() {
        let mut b = square_chart(1, 4.0);
        b.id = 1;
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 4.0), b] };
        let spec = AtlasSpec::new(64, 64);
        let rep = validate_atlas(&set, &result_of(vec![place(0, 0, 0), place(1, 3, 0)]), &spec).unwrap();
        assert!(rep.overlap_texels > 0);
    }

    #[test]
    fn occupancy_quarter() {
        let set = ChartSet { name: "v".into(), charts: vec![square_chart(0, 32.0)] };
        let spec = AtlasSpec::new(64, 64);
        let occ = occupancy(&set, &result_of(vec![place(0, 0, 0)]), &spec).unwrap();
        assert_eq!(occ, 0.25);
    }

    #[test]
    fn occupancy_perfect_tiling() {
        let mut charts = Vec::new();
        for i in 0..4u32 {
            let mut c = square_chart(i, 32.0);
            c.id = i;
            charts.push(c);
        }
        let set = ChartSet { name: "v".into(), charts };
        let spec = AtlasSpec::new(64, 64);
        let r = result_of(vec![place(0, 0, 0), place(1, 32, 0), place(2, 0, 32), place(3, 32, 32)]);
        assert_eq!(occupancy(&set, &r, &spec).unwrap(), 1.0);
        // Perfect tiling overlaps nothing raw but violates gutters, which is
        // fine here; only occupancy is under test.
    }

    #[test]
    fn occupancy_right_triangle_closed_form() {
        // Triangle with legs 64 in a 64x64 atlas: row j covers 64 - j texels
        // (the boundary texel grazes with zero area), so coverage is
        // sum(64 - j) = 2080 of 4096.
        let c = Chart {
            id: 0,
            vertices: vec![Point::new(0.0, 0.0), Point::new(64.0, 0.0), Point::new(0.0, 64.0)],
            triangles: vec![[0, 1, 2]],
        };
        let set = ChartSet { name: "v".into(), charts: vec![c] };
        let spec = AtlasSpec::new(64, 64);
        let occ = occupancy(&set, &result_of(vec![place(0, 0, 0)]), &spec).unwrap();
        assert_eq!(occ, 2080.0 / 4096.0);
    }

    #[test]
    fn point_sampled_interior_is_subset_of_conservative() {
        // Any texel whose center lies inside a triangle must be marked.
        let tri = [Point::new(0.3, 0.7), Point::new(9.2, 1.1), Point::new(2.9, 7.8)];
        let c = Chart { id: 0, vertices: tri.to_vec(), triangles: vec![[0, 1, 2]] };
        let m = rasterize(&c.vertices, &c.triangles);
        let inside = |p: Point| {
            let sign = |a: Point, b: Point, q: Point| {
                (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x)
            };
            let d0 = sign(tri[0], tri[1], p);
            let d1 = sign(tri[1], tri[2], p);
            let d2 = sign(tri[2], tri[0], p);
            (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0)
        };
        for y in 0..10 {
            for x in 0..10 {
                let center = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                if inside(center) {
                    let ix = (x as i64 - m.x0) as usize;
                    let iy = (y as i64 - m.y0) as usize;
                    assert!(m.get(ix, iy), "texel ({x},{y}) center inside but unmarked");
                }
            }
        }
    }
}
