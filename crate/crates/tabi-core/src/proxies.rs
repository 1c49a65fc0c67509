//! Tight per-chart bounding approximations and chart orientation.
//!
//! Two proxies are built for every chart: a set of local bounding boxes over
//! equal-width intervals along each axis (piecewise-constant approximations
//! of the four chart boundaries) and an approximate oriented bounding box
//! chosen from 8 fixed rotations. Both are computed in the chart's final
//! pre-packing pose: quarter-turned to be at least as tall as wide, and
//! reflected so empty space gathers to the bottom and right.

use rayon::prelude::*;

use crate::chart::{AtlasSpec, Chart, ChartSet};
use crate::geom::{pose_anchored, rotate, Aabb, Point, Pose, Rotation};

/// Exact min/max of one tracked coordinate inside one interval.
pub type SliceBounds = Option<(f64, f64)>;

/// Piecewise-constant boundary approximation from per-interval bounding
/// boxes. Slices live on the anchored chart: x intervals span `[0, width]`,
/// y intervals span `[0, height]`.
#[derive(Clone, Debug)]
pub struct LocalAabbProxy {
    pub k: u32,
    pub width: f64,
    pub height: f64,
    /// Per x-interval: (top, bottom) = exact y range of the chart slice.
    pub x_slices: Vec<SliceBounds>,
    /// Per y-interval: (left, right) = exact x range of the chart slice.
    pub y_slices: Vec<SliceBounds>,
}

impl LocalAabbProxy {
    pub fn x_interval_width(&self) -> f64 {
        self.width / self.k as f64
    }

    pub fn y_interval_height(&self) -> f64 {
        self.height / self.k as f64
    }

    fn index_range(coord0: f64, coord1: f64, interval: f64, k: u32) -> (usize, usize) {
        let hi = k as usize - 1;
        let i0 = ((coord0 / interval).floor() as isize).clamp(0, hi as isize) as usize;
        let i1 = ((coord1 / interval).floor() as isize).clamp(0, hi as isize) as usize;
        (i0, i1)
    }

    /// Topmost (smallest) boundary y over the x window, ignoring empty slices.
    pub fn top_over(&self, x0: f64, x1: f64) -> Option<f64> {
        let (i0, i1) = Self::index_range(x0, x1, self.x_interval_width(), self.k);
        self.x_slices[i0..=i1].iter().flatten().map(|b| b.0).reduce(f64::min)
    }

    /// Bottommost (largest) boundary y over the x window.
    pub fn bottom_over(&self, x0: f64, x1: f64) -> Option<f64> {
        let (i0, i1) = Self::index_range(x0, x1, self.x_interval_width(), self.k);
        self.x_slices[i0..=i1].iter().flatten().map(|b| b.1).reduce(f64::max)
    }

    /// Total area of the x-slice boxes; shrinks as `k` grows.
    pub fn slice_area(&self) -> f64 {
        let iw = self.x_interval_width();
        self.x_slices.iter().flatten().map(|b| iw * (b.1 - b.0)).sum()
    }
}

/// Approximate oriented bounding box: the minimum-area box over the tested
/// rotation set, described in the anchored chart frame.
#[derive(Clone, Copy, Debug)]
pub struct Obb {
    pub angle: f64,
    pub center: Point,
    pub half_extents: (f64, f64),
    pub area: f64,
}

/// Rotations tested for the approximate OBB: j * pi/16 for j = 0..8.
pub const OBB_ANGLE_COUNT: u32 = 8;

pub fn obb_candidate_angle(j: u32) -> f64 {
    j as f64 * std::f64::consts::PI / 16.0
}

impl Obb {
    pub fn corners(&self) -> [Point; 4] {
        let ex = rotate(Point::new(self.half_extents.0, 0.0), self.angle);
        let ey = rotate(Point::new(0.0, self.half_extents.1), self.angle);
        let c = self.center;
        [
            Point::new(c.x + ex.x + ey.x, c.y + ex.y + ey.y),
            Point::new(c.x + ex.x - ey.x, c.y + ex.y - ey.y),
            Point::new(c.x - ex.x - ey.x, c.y - ex.y - ey.y),
            Point::new(c.x - ex.x + ey.x, c.y - ex.y + ey.y),
        ]
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let d = Point::new(p.x - self.center.x, p.y - self.center.y);
        let local = rotate(d, -self.angle);
        local.x.abs() <= self.half_extents.0 + tol && local.y.abs() <= self.half_extents.1 + tol
    }
}

/// Reflection flags chosen to move empty space to the bottom and right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OrientationFlags {
    pub reflect_x: bool,
    pub reflect_y: bool,
}

/// All pre-packing state for one chart, in its final pose.
#[derive(Clone, Debug)]
pub struct ChartProxy {
    pub chart_id: u32,
    /// Input chart area (pose-invariant), used for area weighting.
    pub area: f64,
    pub rotated_90: bool,
    pub flags: OrientationFlags,
    /// Posed, anchored extents; height >= width after normalization.
    pub width: f64,
    pub height: f64,
    pub local: LocalAabbProxy,
    pub obb: Obb,
}

impl ChartProxy {
    pub fn pose(&self, prerotation: f64) -> Pose {
        Pose {
            prerotation,
            rotation: if self.rotated_90 { Rotation::R90 } else { Rotation::R0 },
            reflect_x: self.flags.reflect_x,
            reflect_y: self.flags.reflect_y,
        }
    }
}

/// Edges of all triangles; duplicates are harmless for min/max accumulation.
fn edges<'a>(
    vertices: &'a [Point],
    triangles: &'a [[u32; 3]],
) -> impl Iterator<Item = (Point, Point)> + 'a {
    triangles.iter().flat_map(move |t| {
        let [a, b, c] = [t[0] as usize, t[1] as usize, t[2] as usize];
        [
            (vertices[a], vertices[b]),
            (vertices[b], vertices[c]),
            (vertices[c], vertices[a]),
        ]
    })
}

/// Exact per-interval bounds of the chart geometry: every vertex and every
/// edge segment crossing an interval contributes, clipped analytically.
pub fn compute_local_aabbs(
    vertices: &[Point],
    triangles: &[[u32; 3]],
    width: f64,
    height: f64,
    k: u32,
) -> LocalAabbProxy {
    let k_us = k as usize;
    let mut x_slices: Vec<SliceBounds> = vec![None; k_us];
    let mut y_slices: Vec<SliceBounds> = vec![None; k_us];
    let iw = width / k as f64;
    let ih = height / k as f64;

    let update = |slices: &mut Vec<SliceBounds>, i: usize, lo: f64, hi: f64| {
        let entry = &mut slices[i];
        match entry {
            Some((a, b)) => {
                *a = a.min(lo);
                *b = b.max(hi);
            }
            None => *entry = Some((lo, hi)),
        }
    };

    for (p, q) in edges(vertices, triangles) {
        // x-axis intervals: accumulate the y range of the clipped segment.
        let (x0, x1) = (p.x.min(q.x), p.x.max(q.x));
        let (i0, i1) = LocalAabbProxy::index_range(x0, x1, iw, k);
        for i in i0..=i1 {
            let lo = i as f64 * iw;
            let hi = lo + iw;
            if let Some((ymin, ymax)) = clip_segment_range(p.x, p.y, q.x, q.y, lo, hi) {
                update(&mut x_slices, i, ymin, ymax);
            }
        }
        // y-axis intervals: accumulate the x range of the clipped segment.
        let (y0, y1) = (p.y.min(q.y), p.y.max(q.y));
        let (j0, j1) = LocalAabbProxy::index_range(y0, y1, ih, k);
        for j in j0..=j1 {
            let lo = j as f64 * ih;
            let hi = lo + ih;
            if let Some((xmin, xmax)) = clip_segment_range(p.y, p.x, q.y, q.x, lo, hi) {
                update(&mut y_slices, j, xmin, xmax);
            }
        }
    }

    let mut proxy = LocalAabbProxy { k, width, height, x_slices, y_slices };
    merge_slices(&mut proxy);
    proxy
}

/// Range of the dependent coordinate of segment (a0,d0)-(a1,d1) where the
/// independent coordinate is clipped to [lo, hi] (closed).
fn clip_segment_range(a0: f64, d0: f64, a1: f64, d1: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if a0 == a1 {
        if a0 >= lo && a0 <= hi {
            return Some((d0.min(d1), d0.max(d1)));
        }
        return None;
    }
    let t_lo = (lo - a0) / (a1 - a0);
    let t_hi = (hi - a0) / (a1 - a0);
    let (mut t0, mut t1) = (t_lo.min(t_hi), t_lo.max(t_hi));
    t0 = t0.max(0.0);
    t1 = t1.min(1.0);
    if t0 > t1 {
        return None;
    }
    let da = d0 + t0 * (d1 - d0);
    let db = d0 + t1 * (d1 - d0);
    Some((da.min(db), da.max(db)))
}

/// Tighten each slice against the slices of the other axis: a slice's bounds
/// may not extend past the union of intersecting cross-axis slice intervals.
/// With exact slice construction this never loosens anything.
fn merge_slices(proxy: &mut LocalAabbProxy) {
    let iw = proxy.x_interval_width();
    let ih = proxy.y_interval_height();
    let k = proxy.k as usize;

    let merged_x: Vec<SliceBounds> = (0..k)
        .map(|j| {
            let own = proxy.x_slices[j]?;
            let (sx0, sx1) = (j as f64 * iw, (j + 1) as f64 * iw);
            let mut implied: Option<(f64, f64)> = None;
            for (m, b) in proxy.y_slices.iter().enumerate() {
                if let Some((left, right)) = b {
                    if *right >= sx0 && *left <= sx1 {
                        let (y0, y1) = (m as f64 * ih, (m + 1) as f64 * ih);
                        implied = Some(match implied {
                            Some((a, b)) => (a.min(y0), b.max(y1)),
                            None => (y0, y1),
                        });
                    }
                }
            }
            let (it, ib) = implied?;
            Some((own.0.max(it), own.1.min(ib)))
        })
        .collect();

    let merged_y: Vec<SliceBounds> = (0..k)
        .map(|m| {
            let own = proxy.y_slices[m]?;
            let (sy0, sy1) = (m as f64 * ih, (m + 1) as f64 * ih);
            let mut implied: Option<(f64, f64)> = None;
            for (j, b) in proxy.x_slices.iter().enumerate() {
                if let Some((top, bottom)) = b {
                    if *bottom >= sy0 && *top <= sy1 {
                        let (x0, x1) = (j as f64 * iw, (j + 1) as f64 * iw);
                        implied = Some(match implied {
                            Some((a, b)) => (a.min(x0), b.max(x1)),
                            None => (x0, x1),
                        });
                    }
                }
            }
            let (il, ir) = implied?;
            Some((own.0.max(il), own.1.min(ir)))
        })
        .collect();

    proxy.x_slices = merged_x;
    proxy.y_slices = merged_y;
}

/// Minimum-area box over the 8 candidate angles; ties go to the smaller
/// angle so axis-aligned charts stay axis-aligned.
pub fn compute_obb(vertices: &[Point]) -> Obb {
    let mut best: Option<Obb> = None;
    for j in 0..OBB_ANGLE_COUNT {
        let angle = obb_candidate_angle(j);
        let unrotated: Vec<Point> = vertices.iter().map(|&p| rotate(p, -angle)).collect();
        let bb = Aabb::from_points(&unrotated);
        let area = bb.area();
        let replace = match &best {
            Some(b) => area < b.area,
            None => true,
        };
        if replace {
            let center_local = Point::new((bb.min.x + bb.max.x) / 2.0, (bb.min.y + bb.max.y) / 2.0);
            best = Some(Obb {
                angle,
                center: rotate(center_local, angle),
                half_extents: (bb.width() / 2.0, bb.height() / 2.0),
                area,
            });
        }
    }
    best.expect("at least one candidate angle")
}

/// Decide reflections from the local proxy: vertical flip if more empty area
/// sits on top than below; horizontal flip if the left empty area exceeds the
/// right by more than 10% of the box area, or, when the two are close, if the
/// bottom-left empty area exceeds the bottom-right.
pub fn choose_orientation(local: &LocalAabbProxy) -> OrientationFlags {
    let (w, h) = (local.width, local.height);
    let iw = local.x_interval_width();
    let ih = local.y_interval_height();
    // Area comparisons tie within floating-point noise; symmetric charts
    // must not flip.
    let eps = 1e-9 * w * h;

    let mut top_area = 0.0;
    let mut bottom_area = 0.0;
    for b in local.x_slices.iter().flatten() {
        top_area += iw * b.0;
        bottom_area += iw * (h - b.1);
    }
    let reflect_y = top_area > bottom_area + eps;

    let mut left_area = 0.0;
    let mut right_area = 0.0;
    for b in local.y_slices.iter().flatten() {
        left_area += ih * b.0;
        right_area += ih * (w - b.1);
    }

    let threshold = 0.1 * w * h;
    let reflect_x = if left_area - right_area > threshold {
        true
    } else if right_area - left_area > threshold {
        false
    } else {
        // Compare empty area under the chart on either side of the midline,
        // in the vertical orientation chosen above.
        let mid = w / 2.0;
        let mut bottom_left = 0.0;
        let mut bottom_right = 0.0;
        for (j, b) in local.x_slices.iter().enumerate() {
            let Some((top, bottom)) = b else { continue };
            let empty_below = if reflect_y { *top } else { h - *bottom };
            let (x0, x1) = (j as f64 * iw, (j + 1) as f64 * iw);
            bottom_left += (x1.min(mid) - x0).max(0.0) * empty_below;
            bottom_right += (x1 - x0.max(mid)).max(0.0) * empty_below;
        }
        bottom_left > bottom_right + eps
    };

    OrientationFlags { reflect_x, reflect_y }
}

/// Quarter-turn decision: rotate so the box is at least as tall as wide;
/// square boxes stay unrotated.
pub fn needs_quarter_turn(width: f64, height: f64) -> bool {
    width > height
}

fn build_one(chart: &Chart, prerotation: f64, k: u32) -> ChartProxy {
    let base = Pose { prerotation, ..Pose::identity() };
    let (_, w0, h0) = pose_anchored(&chart.vertices, &base);
    let rotated_90 = needs_quarter_turn(w0, h0);
    let pose1 = Pose {
        prerotation,
        rotation: if rotated_90 { Rotation::R90 } else { Rotation::R0 },
        ..Pose::identity()
    };
    let (upright, w1, h1) = pose_anchored(&chart.vertices, &pose1);
    let first = compute_local_aabbs(&upright, &chart.triangles, w1, h1, k);
    let flags = choose_orientation(&first);

    let final_pose = Pose {
        prerotation,
        rotation: pose1.rotation,
        reflect_x: flags.reflect_x,
        reflect_y: flags.reflect_y,
    };
    let (posed, w, h) = pose_anchored(&chart.vertices, &final_pose);
    let local = compute_local_aabbs(&posed, &chart.triangles, w, h, k);
    let obb = compute_obb(&posed);

    ChartProxy {
        chart_id: chart.id,
        area: chart.area(),
        rotated_90,
        flags,
        width: w,
        height: h,
        local,
        obb,
    }
}

/// Build proxies for every chart and return them in packing order: by posed
/// box height descending, ties by larger width, then by id.
pub fn build_proxies(set: &ChartSet, spec: &AtlasSpec, prerotations: &[f64]) -> Vec<ChartProxy> {
    let k = spec.local_aabb_count;
    let mut proxies: Vec<ChartProxy> = set
        .charts
        .par_iter()
        .map(|c| build_one(c, prerotations.get(c.id as usize).copied().unwrap_or(0.0), k))
        .collect();
    proxies.sort_by(|a, b| {
        b.height
            .partial_cmp(&a.height)
            .unwrap()
            .then(b.width.partial_cmp(&a.width).unwrap())
            .then(a.chart_id.cmp(&b.chart_id))
    });
    proxies
}
