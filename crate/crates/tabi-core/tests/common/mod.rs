//! Shared test oracles.

use tabi_core::geom::Point;

/// Exact horizontal gap between two triangle soups, the right one offset by
/// `offset`: the minimum over all edge pairs of the horizontal distance
/// across their shared y range. `None` when no y is shared. Interior edges
/// cannot undercut boundary edges, so iterating every triangle edge is
/// exact for the union.
pub fn exact_min_gap(
    left: &[Point],
    ltris: &[[u32; 3]],
    right: &[Point],
    rtris: &[[u32; 3]],
    offset: f64,
) -> Option<f64> {
    let edges = |verts: &[Point], tris: &[[u32; 3]]| -> Vec<(Point, Point)> {
        tris.iter()
            .flat_map(|t| {
                let [a, b, c] = [verts[t[0] as usize], verts[t[1] as usize], verts[t[2] as usize]];
                [(a, b), (b, c), (c, a)]
            })
            .collect()
    };
    let le = edges(left, ltris);
    let re: Vec<(Point, Point)> = edges(right, rtris)
        .into_iter()
        .map(|(a, b)| (Point::new(a.x + offset, a.y), Point::new(b.x + offset, b.y)))
        .collect();

    // x of a segment at y; horizontal segments contribute their extreme end.
    let x_at = |s: (Point, Point), y: f64, want_max: bool| -> f64 {
        if s.0.y == s.1.y {
            if want_max {
                s.0.x.max(s.1.x)
            } else {
                s.0.x.min(s.1.x)
            }
        } else {
            let t = (y - s.0.y) / (s.1.y - s.0.y);
            s.0.x + t * (s.1.x - s.0.x)
        }
    };

    let mut best: Option<f64> = None;
    for a in &le {
        let (a0, a1) = (a.0.y.min(a.1.y), a.0.y.max(a.1.y));
        for b in &re {
            let (b0, b1) = (b.0.y.min(b.1.y), b.0.y.max(b.1.y));
            let y0 = a0.max(b0);
            let y1 = a1.min(b1);
            if y0 > y1 {
                continue;
            }
            for y in [y0, y1] {
                let gap = x_at(*b, y, false) - x_at(*a, y, true);
                best = Some(match best {
                    Some(g) => g.min(gap),
                    None => gap,
                });
            }
        }
    }
    best
}
