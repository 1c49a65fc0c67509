//! Horizontal compacting distances between adjacent charts and interlock
//! classification.
//!
//! Distances are computed once per adjacent pair on the unscaled, posed
//! geometry, with the pair top-aligned and the right chart's box flush
//! against the left chart's box. The folding arithmetic later scales the
//! distance, floors it to the texel grid, and reserves the gutter.

use crate::geom::Point;
use crate::proxies::{ChartProxy, LocalAabbProxy, Obb};

/// Which proxy produced the governing distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompactionSource {
    LocalAabb,
    Obb,
    Zero,
}

/// Compacting distance and interlock flags for one adjacent pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairCompaction {
    /// Safe horizontal slide of the right chart toward the left, in unscaled
    /// texels, from the flush position. Non-negative, capped at the right
    /// chart's box width.
    pub distance: f64,
    /// Left chart's upward motion may intersect the right chart.
    pub left_locked: bool,
    /// Right chart's upward motion may intersect the left chart.
    pub right_locked: bool,
    pub source: CompactionSource,
}

impl PairCompaction {
    pub fn none() -> Self {
        PairCompaction {
            distance: 0.0,
            left_locked: false,
            right_locked: false,
            source: CompactionSource::Zero,
        }
    }
}

/// Minimum horizontal gap between the left chart's right boundary and the
/// right chart's left boundary over all y ranges where both have geometry.
/// Ranges without positive-measure overlap impose no constraint; `None` when
/// no y range is shared at all.
pub fn distance_local(left: &LocalAabbProxy, right: &LocalAabbProxy) -> Option<f64> {
    let lh = left.y_interval_height();
    let rh = right.y_interval_height();
    let mut min_gap: Option<f64> = None;
    for (i, lb) in left.y_slices.iter().enumerate() {
        let Some((_, l_right)) = lb else { continue };
        let (ly0, ly1) = (i as f64 * lh, (i + 1) as f64 * lh);
        for (j, rb) in right.y_slices.iter().enumerate() {
            let Some((r_left, _)) = rb else { continue };
            let (ry0, ry1) = (j as f64 * rh, (j + 1) as f64 * rh);
            // A shared boundary line carries no area and must not constrain.
            if ly1 > ry0 && ry1 > ly0 {
                let gap = (left.width - l_right) + r_left;
                min_gap = Some(match min_gap {
                    Some(g) => g.min(gap),
                    None => gap,
                });
            }
        }
    }
    min_gap
}

/// Largest slide of the right box toward the left keeping the two OBBs
/// non-overlapping, from the flush position; `None` when the boxes never
/// overlap at any slide (vertically disjoint).
pub fn distance_obb(left: &Obb, right: &Obb, left_width: f64) -> Option<f64> {
    let a = left.corners();
    let mut b = right.corners();
    for p in &mut b {
        p.x += left_width;
    }

    // Sliding left by t shifts B's projection on axis n by -t * n.x. The
    // boxes overlap iff every axis interval overlaps; intersect the per-axis
    // t-intervals and take the entry time.
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for n in sat_axes(left, right) {
        let (amin, amax) = project(&a, n);
        let (bmin, bmax) = project(&b, n);
        if n.x.abs() < 1e-12 {
            if bmax < amin || bmin > amax {
                return None;
            }
            continue;
        }
        // Overlap on this axis: amin <= bmax - t*nx and bmin - t*nx <= amax.
        let lo = (bmin - amax) / n.x;
        let hi = (bmax - amin) / n.x;
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        t_enter = t_enter.max(lo);
        t_exit = t_exit.min(hi);
    }
    if t_enter > t_exit {
        return None;
    }
    Some(t_enter.max(0.0))
}

fn sat_axes(a: &Obb, b: &Obb) -> [Point; 4] {
    let dir = |angle: f64| Point::new(angle.cos(), angle.sin());
    let perp = |p: Point| Point::new(-p.y, p.x);
    [dir(a.angle), perp(dir(a.angle)), dir(b.angle), perp(dir(b.angle))]
}

fn project(corners: &[Point; 4], axis: Point) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let d = c.x * axis.x + c.y * axis.y;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

/// Distance and interlock flags for one adjacent pair: the larger of the two
/// proxy distances governs, capped at the right box width so a chart never
/// slides past its neighbor.
pub fn compact_pair(left: &ChartProxy, right: &ChartProxy) -> PairCompaction {
    let d_local = distance_local(&left.local, &right.local);
    let d_obb = distance_obb(&left.obb, &right.obb, left.width);
    let cap = right.width;

    let (raw, source) = match (d_local, d_obb) {
        (Some(l), Some(o)) => {
            if o > l {
                (o, CompactionSource::Obb)
            } else {
                (l, CompactionSource::LocalAabb)
            }
        }
        (Some(l), None) => (l.max(cap), CompactionSource::LocalAabb),
        (None, Some(o)) => (o.max(cap), CompactionSource::Obb),
        (None, None) => (cap, CompactionSource::LocalAabb),
    };
    let distance = raw.min(cap).max(0.0);

    if distance <= 0.0 {
        return PairCompaction::none();
    }

    let (left_locked, right_locked) = match source {
        CompactionSource::LocalAabb => local_interlock(&left.local, &right.local, distance),
        CompactionSource::Obb => obb_interlock(&left.obb, &right.obb),
        CompactionSource::Zero => (false, false),
    };
    PairCompaction { distance, left_locked, right_locked, source }
}

/// Boundary segments of the x-sliced proxy as (x0, x1, top, bottom), offset
/// into the pair frame.
fn boundary_segments(p: &LocalAabbProxy, offset: f64) -> Vec<(f64, f64, f64, f64)> {
    let iw = p.x_interval_width();
    p.x_slices
        .iter()
        .enumerate()
        .filter_map(|(j, b)| {
            b.map(|(top, bottom)| (offset + j as f64 * iw, offset + (j + 1) as f64 * iw, top, bottom))
        })
        .collect()
}

/// A chart may move up freely only when, in every slice pair that shares
/// columns at the post-compaction offset (closed interval overlap), its
/// boundary segments lie entirely above the other chart's; any segment at or
/// below locks it. Material stays inside the slice boxes, so a chart that is
/// above everywhere it shares columns can never sweep into its neighbor.
fn local_interlock(left: &LocalAabbProxy, right: &LocalAabbProxy, distance: f64) -> (bool, bool) {
    let offset = left.width - distance;
    let segs_l = boundary_segments(left, 0.0);
    let segs_r = boundary_segments(right, offset);

    let locked = |mover: &[(f64, f64, f64, f64)], other: &[(f64, f64, f64, f64)]| {
        mover.iter().any(|&(mx0, mx1, _, mbottom)| {
            other
                .iter()
                .any(|&(ox0, ox1, otop, _)| mx1 >= ox0 && ox1 >= mx0 && mbottom > otop)
        })
    };

    (locked(&segs_l, &segs_r), locked(&segs_r, &segs_l))
}

/// OBB rule: compare the left box's rightmost corner with the right box's
/// leftmost corner; the chart whose corner is lower is the one whose upward
/// motion can trigger intersection.
fn obb_interlock(left: &Obb, right: &Obb) -> (bool, bool) {
    let l_corner = extreme_corner(left, true);
    let r_corner = extreme_corner(right, false);
    if l_corner.y >= r_corner.y {
        (true, false)
    } else {
        (false, true)
    }
}

/// Rightmost (or leftmost) corner; x ties resolved toward the lower corner.
fn extreme_corner(obb: &Obb, rightmost: bool) -> Point {
    let mut best: Option<Point> = None;
    for c in obb.corners() {
        let better = match best {
            None => true,
            Some(b) => {
                let primary = if rightmost { c.x > b.x + 1e-12 } else { c.x < b.x - 1e-12 };
                let tie = (c.x - b.x).abs() <= 1e-12 && c.y > b.y;
                primary || tie
            }
        };
        if better {
            best = Some(c);
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{AtlasSpec, Chart, ChartSet};
    use crate::geom::{rotate, Point};
    use crate::proxies::{build_proxies, OrientationFlags};

    fn proxy_of(vertices: Vec<Point>, triangles: Vec<[u32; 3]>, k: u32) -> ChartProxy {
        let set = ChartSet { name: "t".into(), charts: vec![Chart { id: 0, vertices, triangles }] };
        let mut spec = AtlasSpec::new(256, 256);
        spec.local_aabb_count = k;
        build_proxies(&set, &spec, &[0.0]).remove(0)
    }

    fn rect(w: f64, h: f64) -> ChartProxy {
        proxy_of(
            vec![Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)],
            vec![[0, 1, 2], [0, 2, 3]],
            2,
        )
    }

    /// Top-left right triangle in an 8x8 box; orientation keeps it unflipped.
    fn tri_left() -> ChartProxy {
        proxy_of(
            vec![Point::new(0.0, 0.0), Point::new(8.0, 0.0), Point::new(0.0, 8.0)],
            vec![[0, 1, 2]],
            2,
        )
    }

    /// Hypotenuse-facing counterpart with left boundary 4 on y in [0,4) and 0
    /// on [4,8]. Hand-built in that pose: the orientation pass would flip the
    /// raw triangle, but the pair frame here prescribes the pose.
    fn tri_right() -> ChartProxy {
        let verts =
            vec![Point::new(8.0, 0.0), Point::new(0.0, 8.0), Point::new(8.0, 8.0)];
        ChartProxy {
            chart_id: 1,
            area: 32.0,
            rotated_90: false,
            flags: OrientationFlags::default(),
            width: 8.0,
            height: 8.0,
            local: hand_local(
                8.0,
                8.0,
                vec![Some((4.0, 8.0)), Some((0.0, 8.0))],
                vec![Some((4.0, 8.0)), Some((0.0, 8.0))],
            ),
            obb: crate::proxies::compute_obb(&verts),
        }
    }

    /// Hand-built local proxy for oracle tests that must bypass orientation.
    fn hand_local(width: f64, height: f64, y_slices: Vec<Option<(f64, f64)>>, x_slices: Vec<Option<(f64, f64)>>) -> LocalAabbProxy {
        LocalAabbProxy { k: y_slices.len() as u32, width, height, x_slices, y_slices }
    }

    #[test]
    fn flush_rectangles_have_zero_distance() {
        let a = rect(4.0, 8.0);
        let b = rect(4.0, 8.0);
        assert_eq!(distance_local(&a.local, &b.local), Some(0.0));
        let pc = compact_pair(&a, &b);
        assert_eq!(pc.distance, 0.0);
        assert!(!pc.left_locked && !pc.right_locked);
        assert_eq!(pc.source, CompactionSource::Zero);
    }

    #[test]
    fn triangle_pair_distance_is_4() {
        let a = tri_left();
        let b = tri_right();
        assert_eq!(b.flags, OrientationFlags::default());
        assert_eq!(distance_local(&a.local, &b.local), Some(4.0));
        assert_eq!(compact_pair(&a, &b).distance, 4.0);
    }

    #[test]
    fn non_overlapping_ranges_impose_no_constraint() {
        // Left chart, 8 tall: right-boundary inset 4 in the top range, 0 in
        // the bottom range. A 3-tall right chart overlaps only the top range,
        // so the answer comes from that range alone (5), not from the tighter
        // bottom range (1).
        let left = hand_local(
            8.0,
            8.0,
            vec![Some((0.0, 4.0)), Some((0.0, 8.0))],
            vec![Some((0.0, 8.0)), Some((0.0, 8.0))],
        );
        let right = hand_local(
            3.0,
            3.0,
            vec![Some((1.0, 3.0)), Some((1.0, 3.0))],
            vec![Some((0.0, 3.0)), Some((0.0, 3.0))],
        );
        assert_eq!(distance_local(&left, &right), Some(5.0));

        // No shared y range at all: no constraint.
        let tall = hand_local(2.0, 8.0, vec![None, Some((0.0, 2.0))], vec![Some((4.0, 8.0))]);
        let short = hand_local(2.0, 3.0, vec![Some((0.0, 2.0)), None], vec![Some((0.0, 1.5))]);
        assert_eq!(distance_local(&tall, &short), None);
    }

    #[test]
    fn obb_flush_axis_aligned_is_zero() {
        let a = rect(4.0, 8.0);
        let b = rect(4.0, 8.0);
        let d = distance_obb(&a.obb, &b.obb, a.width).unwrap();
        assert!(d.abs() < 1e-9);
    }

    #[test]
    fn obb_diamonds_slide_matches_step_oracle() {
        // A 4x4 diamond next to a 2x2 diamond, boxes flush and top-aligned.
        // The small diamond's tip starts at (4, 1) and meets the big
        // diamond's upper-right edge (x = 2 + y) at x = 3: exact slide 1.
        let big = proxy_of(
            vec![
                Point::new(2.0, 0.0),
                Point::new(4.0, 2.0),
                Point::new(2.0, 4.0),
                Point::new(0.0, 2.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
            2,
        );
        let small = proxy_of(
            vec![
                Point::new(1.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(1.0, 2.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
            2,
        );
        let d = distance_obb(&big.obb, &small.obb, big.width).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "expected exact slide 1, got {d}");
        // The oracle treats boundary touch as overlap, so it stops up to one
        // step short of the exact contact slide.
        let oracle = slide_oracle(&big.obb.corners(), &small.obb.corners(), big.width, 0.01);
        assert!(d <= oracle + 0.01 + 1e-6, "sat distance {d} exceeds slide oracle {oracle}");
        assert!((d - oracle).abs() < 0.02, "sat {d} vs oracle {oracle}");
    }

    #[test]
    fn vertically_disjoint_obbs_cap_at_right_width() {
        // Two 6x1 bars, the right one 4 texels lower: no slide makes them
        // meet, so the pair distance caps at the right box width.
        let bar = |y: f64| Obb {
            angle: 0.0,
            center: Point::new(3.0, y + 0.5),
            half_extents: (3.0, 0.5),
            area: 6.0,
        };
        assert_eq!(distance_obb(&bar(0.0), &bar(4.0), 6.0), None);

        let mut left = rect(6.0, 1.0);
        let mut right = rect(6.0, 1.0);
        left.obb = bar(0.0);
        right.obb = bar(4.0);
        right.local = hand_local(6.0, 1.0, vec![Some((0.0, 6.0)), Some((0.0, 6.0))], vec![Some((4.0, 5.0)), Some((4.0, 5.0))]);
        left.local = hand_local(6.0, 1.0, vec![Some((0.0, 6.0)), Some((0.0, 6.0))], vec![Some((0.0, 1.0)), Some((0.0, 1.0))]);
        // Give them disjoint y ranges in the local proxies as well.
        left.local.y_slices = vec![Some((0.0, 6.0)), None];
        right.local.y_slices = vec![None, Some((0.0, 6.0))];
        let pc = compact_pair(&left, &right);
        assert_eq!(pc.distance, right.width);
    }

    /// Step-slide oracle: advance the right polygon leftward until the convex
    /// polygons overlap (SAT boolean per step).
    fn slide_oracle(a: &[Point; 4], b0: &[Point; 4], flush_offset: f64, step: f64) -> f64 {
        let overlap = |a: &[Point; 4], b: &[Point; 4]| {
            let mut axes = Vec::new();
            for poly in [a, b] {
                for i in 0..4 {
                    let p = poly[i];
                    let q = poly[(i + 1) % 4];
                    axes.push(Point::new(-(q.y - p.y), q.x - p.x));
                }
            }
            for ax in axes {
                let pr = |c: &[Point; 4]| {
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for p in c {
                        let d = p.x * ax.x + p.y * ax.y;
                        lo = lo.min(d);
                        hi = hi.max(d);
                    }
                    (lo, hi)
                };
                let (a0, a1) = pr(a);
                let (b0, b1) = pr(b);
                if b1 < a0 - 1e-12 || b0 > a1 + 1e-12 {
                    return false;
                }
            }
            true
        };
        let mut t = 0.0;
        loop {
            let shifted: [Point; 4] =
                std::array::from_fn(|i| Point::new(b0[i].x + flush_offset - t - step, b0[i].y));
            if overlap(a, &shifted) {
                return t;
            }
            t += step;
            if t > 1000.0 {
                return t;
            }
        }
    }

    #[test]
    fn triangle_pair_interlock_flags() {
        let a = tri_left();
        let b = tri_right();
        let pc = compact_pair(&a, &b);
        assert_eq!(pc.source, CompactionSource::LocalAabb);
        assert!(pc.right_locked, "right chart overhangs the left chart's notch");
        // Closed slice contact at x = 4 also locks the left chart: its deep
        // first slice touches the right chart's shallow slice.
        assert!(pc.left_locked);
    }

    #[test]
    fn obb_corner_rule_locks_lower_corner() {
        // Left bar tilts downward to the right: its rightmost corner is deep.
        // Right bar tilts upward: its leftmost corner is shallow.
        let tilted = |angle: f64| {
            let d = rotate(Point::new(10.0, 0.0), angle);
            Obb {
                angle,
                center: Point::new(d.x / 2.0, d.y / 2.0 + 2.0),
                half_extents: (5.0, 0.5),
                area: 10.0,
            }
        };
        let down = tilted(std::f64::consts::PI / 8.0);
        let up = tilted(-std::f64::consts::PI / 8.0);
        assert_eq!(obb_interlock(&down, &up), (true, false));
        assert_eq!(obb_interlock(&up, &down), (false, true));
    }

    #[test]
    fn mirror_symmetry_swaps_distance_and_flags() {
        let a = tri_left();
        let b = tri_right();
        let pc = compact_pair(&a, &b);

        let mirror = |p: &ChartProxy| {
            let mut m = p.clone();
            m.local.x_slices.reverse();
            let w = m.width;
            for s in &mut m.local.y_slices {
                if let Some((lo, hi)) = *s {
                    *s = Some((w - hi, w - lo));
                }
            }
            m.obb = Obb {
                angle: -m.obb.angle,
                center: Point::new(w - m.obb.center.x, m.obb.center.y),
                half_extents: m.obb.half_extents,
                area: m.obb.area,
            };
            m
        };
        let pc_m = compact_pair(&mirror(&b), &mirror(&a));
        assert!((pc.distance - pc_m.distance).abs() < 1e-9);
        assert_eq!(pc.left_locked, pc_m.right_locked);
        assert_eq!(pc.right_locked, pc_m.left_locked);
    }
}
