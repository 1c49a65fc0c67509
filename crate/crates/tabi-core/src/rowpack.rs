//! Row machinery: folding sorted charts into rows, pushing rows up against
//! the frontline, correcting interlocked offsets, and knee handling.
//!
//! All quantities here live on the texel grid at one scale factor. Rounding
//! is always containment-preserving: scaled extents round up, top boundaries
//! round toward the atlas top, bottom boundaries away from it. The gutter is
//! reserved in exactly two places: row folding advances by `2*gutter` beyond
//! the compacted position, and `bottom_edge` inflates the frontline by
//! `2*gutter` so following rows keep their distance. Atlas edges stay
//! gutter-free; the caller compensates when checking overflow.

use crate::chart::AtlasSpec;
use crate::compact::PairCompaction;
use crate::proxies::{ChartProxy, Obb};

/// Per-column occupied depth (0 = empty, larger = lower), one entry per
/// atlas texel column. Entries only ever increase.
#[derive(Clone, Debug)]
pub struct Frontline {
    pub depth: Vec<i64>,
}

impl Frontline {
    pub fn new(width: u32) -> Self {
        Frontline { depth: vec![0; width as usize] }
    }

    pub fn max_depth(&self) -> i64 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn max_depth_over(&self, range: std::ops::Range<usize>) -> i64 {
        self.depth[range].iter().copied().max().unwrap_or(0)
    }
}

/// Row placement direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowDirection {
    LeftToRight,
    RightToLeft,
}

/// A sharp height drop inside a committed row. Edges are atlas columns of
/// the taller chart (left inclusive, right exclusive); the concavity is the
/// atlas interval beyond the concavity-facing edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knee {
    pub left_to_right: bool,
    pub chart_left: i64,
    pub chart_right: i64,
    pub height_diff: f64,
}

impl Knee {
    /// Atlas interval the next row may fold into, leaving the gutter reserve
    /// between the knee chart and the charts rising beside it.
    pub fn concavity(&self, atlas_width: i64, gutter: i64) -> (i64, i64) {
        if self.left_to_right {
            let start = self.chart_right + 2 * gutter;
            (start, atlas_width - start)
        } else {
            (0, self.chart_left - 2 * gutter)
        }
    }
}

/// Knee qualification thresholds: the height drop must reach 10% of the
/// atlas height and 20% of the taller chart's height.
pub const KNEE_ATLAS_FRACTION: f64 = 0.10;
pub const KNEE_CHART_FRACTION: f64 = 0.20;

/// Everything fold/push needs at one scale factor. Scaled extents are
/// computed on demand; the struct itself is cheap to build per candidate.
pub struct ScaleCtx<'a> {
    pub scale: f64,
    pub gutter: i64,
    pub atlas_width: i64,
    pub atlas_height: i64,
    /// Ablation: push box tops and bottoms instead of proxy boundaries.
    pub box_only: bool,
    pub proxies: &'a [ChartProxy],
    pub pairs: &'a [PairCompaction],
}

impl<'a> ScaleCtx<'a> {
    pub fn new(
        proxies: &'a [ChartProxy],
        pairs: &'a [PairCompaction],
        spec: &AtlasSpec,
        scale: f64,
        box_only: bool,
    ) -> Self {
        ScaleCtx {
            scale,
            gutter: spec.gutter as i64,
            atlas_width: spec.width as i64,
            atlas_height: spec.height as i64,
            box_only,
            proxies,
            pairs,
        }
    }

    pub fn chart_count(&self) -> usize {
        self.proxies.len()
    }

    /// Scaled box width on the texel grid (conservative: rounds up).
    pub fn width_of(&self, c: usize) -> i64 {
        (self.proxies[c].width * self.scale).ceil() as i64
    }

    pub fn height_of(&self, c: usize) -> i64 {
        (self.proxies[c].height * self.scale).ceil() as i64
    }

    /// Scaled compacting distance between charts c and c+1, floored.
    fn scaled_distance(&self, c: usize) -> i64 {
        match self.pairs.get(c) {
            Some(p) => (p.distance * self.scale).floor() as i64,
            None => 0,
        }
    }

    /// Horizontal advance from chart c's left edge to chart c+1's left edge:
    /// the box width plus the gutter reserve, minus the compacted slide. The
    /// slide is the scaled compacting distance reduced by the gutter reserve
    /// (floored at zero); the unspent reserve also absorbs the sub-texel
    /// slack between continuous chart boundaries and the texel grid.
    pub fn advance(&self, c: usize, enable_hc: bool) -> i64 {
        let base = self.width_of(c) + 2 * self.gutter;
        if enable_hc {
            base - (self.scaled_distance(c) - 2 * self.gutter).max(0)
        } else {
            base
        }
    }
}

/// Fold charts greedily into one row of the given width. Returns the index
/// of the last chart that fits (inclusive) and the per-chart x offsets local
/// to the fold interval, or `None` when the first chart already overflows.
pub fn fold_row(
    ctx: &ScaleCtx,
    row_start: usize,
    fold_width: i64,
    enable_hc: bool,
) -> Option<(usize, Vec<i64>)> {
    let n = ctx.chart_count();
    let mut c = row_start;
    let mut curr: i64 = 0;
    let mut xs = Vec::new();
    while c < n {
        curr = curr.max(0);
        let next = curr + ctx.width_of(c);
        if next > fold_width {
            break;
        }
        xs.push(curr);
        curr += ctx.advance(c, enable_hc);
        c += 1;
    }
    if xs.is_empty() {
        None
    } else {
        Some((c - 1, xs))
    }
}

/// Smallest boundary y of the OBB over the x window [a, b].
fn obb_top_over(obb: &Obb, a: f64, b: f64) -> f64 {
    obb_extremum_over(obb, a, b, true)
}

/// Largest boundary y of the OBB over the x window [a, b].
fn obb_bottom_over(obb: &Obb, a: f64, b: f64) -> f64 {
    obb_extremum_over(obb, a, b, false)
}

fn obb_extremum_over(obb: &Obb, a: f64, b: f64, top: bool) -> f64 {
    let corners = obb.corners();
    let mut best: Option<f64> = None;
    let mut consider = |y: f64| {
        best = Some(match best {
            Some(v) => {
                if top {
                    v.min(y)
                } else {
                    v.max(y)
                }
            }
            None => y,
        });
    };
    for (i, p) in corners.iter().enumerate() {
        if p.x >= a && p.x <= b {
            consider(p.y);
        }
        let q = corners[(i + 1) % 4];
        for edge_x in [a, b] {
            if (p.x - edge_x) * (q.x - edge_x) <= 0.0 && p.x != q.x {
                let t = (edge_x - p.x) / (q.x - p.x);
                if (0.0..=1.0).contains(&t) {
                    consider(p.y + t * (q.y - p.y));
                }
            }
        }
    }
    match best {
        Some(v) => v,
        // Window outside the box footprint; fall back to the loosest bound.
        None => {
            let ys: Vec<f64> = corners.iter().map(|p| p.y).collect();
            if top {
                ys.into_iter().fold(f64::INFINITY, f64::min)
            } else {
                ys.into_iter().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

/// Continuous x window of texel column `col`, in unscaled chart coordinates,
/// reflected when the chart is mirrored.
fn column_window(ctx: &ScaleCtx, c: usize, col: i64, mirrored: bool) -> (f64, f64) {
    let w = ctx.proxies[c].width;
    let inv = 1.0 / ctx.scale;
    let (mut a, mut b) = (col as f64 * inv, (col + 1) as f64 * inv);
    if mirrored {
        let (ma, mb) = (w - b, w - a);
        a = ma;
        b = mb;
    }
    (a.max(0.0), b.min(w))
}

/// Empty depth above the chart at texel column `col`: the tighter (deeper)
/// of the two proxy top boundaries, scaled and rounded toward the atlas top.
pub fn top_edge(ctx: &ScaleCtx, c: usize, col: i64, mirrored: bool) -> i64 {
    if ctx.box_only {
        return 0;
    }
    let p = &ctx.proxies[c];
    let (a, b) = column_window(ctx, c, col, mirrored);
    let t_obb = obb_top_over(&p.obb, a, b);
    let t = match p.local.top_over(a, b) {
        Some(tl) => tl.max(t_obb),
        None => t_obb,
    }
    .clamp(0.0, p.height);
    (t * ctx.scale).floor() as i64
}

/// Occupied depth of the chart at texel column `col`, rounded away from the
/// atlas top and inflated by the gutter reserve.
pub fn bottom_edge(ctx: &ScaleCtx, c: usize, col: i64, mirrored: bool) -> i64 {
    let inflate = 2 * ctx.gutter;
    if ctx.box_only {
        return ctx.height_of(c) + inflate;
    }
    let p = &ctx.proxies[c];
    let (a, b) = column_window(ctx, c, col, mirrored);
    let t_obb = obb_bottom_over(&p.obb, a, b);
    let t = match p.local.bottom_over(a, b) {
        Some(tl) => tl.min(t_obb),
        None => t_obb,
    }
    .clamp(0.0, p.height);
    (t * ctx.scale).ceil() as i64 + inflate
}

/// Enforce the gutter between row-mates at texel granularity: wherever two
/// charts have material columns within `2*gutter` of each other, one chart's
/// occupied depth (gutter included) must end above the other's start in
/// those columns. The branch needing the smaller downward push wins; offsets
/// only grow, so the sweep reaches a fixpoint.
fn separate_row_columns(ctx: &ScaleCtx, row_start: usize, xs: &[i64], ys: &mut [i64], mirrored: bool) {
    if xs.len() < 2 || ctx.gutter == 0 {
        return;
    }
    let g2 = 2 * ctx.gutter;
    for _ in 0..1000 {
        let mut changed = false;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let (ci, cj) = (row_start + i, row_start + j);
                let (wi, wj) = (ctx.width_of(ci), ctx.width_of(cj));
                // Columns of i that have a column of j within the reserve.
                let lo = xs[i].max(xs[j] - g2);
                let hi = (xs[i] + wi).min(xs[j] + wj + g2);
                if lo >= hi {
                    continue;
                }
                for c1 in lo..hi {
                    let top_i = top_edge(ctx, ci, c1 - xs[i], mirrored);
                    let bot_i = bottom_edge(ctx, ci, c1 - xs[i], mirrored);
                    let c2_lo = (c1 - g2).max(xs[j]);
                    let c2_hi = (c1 + g2).min(xs[j] + wj - 1);
                    for c2 in c2_lo..=c2_hi {
                        let top_j = top_edge(ctx, cj, c2 - xs[j], mirrored);
                        let bot_j = bottom_edge(ctx, cj, c2 - xs[j], mirrored);
                        let d_j = ys[i] + bot_i - top_j - ys[j];
                        let d_i = ys[j] + bot_j - top_i - ys[i];
                        if d_j > 0 && d_i > 0 {
                            if d_j <= d_i {
                                ys[j] += d_j;
                            } else {
                                ys[i] += d_i;
                            }
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Align interlocked pairs: a locked chart may not sit higher than the
/// neighbor it can intersect. Sweeps to a fixpoint; offsets only grow.
pub fn correct_y_offsets(ys: &mut [i64], pairs: &[Option<&PairCompaction>]) {
    loop {
        let mut changed = false;
        for i in 0..pairs.len() {
            let Some(p) = pairs[i] else { continue };
            if p.left_locked && ys[i] < ys[i + 1] {
                ys[i] = ys[i + 1];
                changed = true;
            }
            if p.right_locked && ys[i + 1] < ys[i] {
                ys[i + 1] = ys[i];
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Push one row up against the frontline and write the row's bottom back.
/// `xs` are final atlas x offsets for charts `row_start..row_start+xs.len()`.
/// Returns the per-chart y offsets.
pub fn push_row(
    ctx: &ScaleCtx,
    frontline: &mut Frontline,
    row_start: usize,
    xs: &[i64],
    mirrored: bool,
    corrected: bool,
) -> Vec<i64> {
    let mut ys = vec![0i64; xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        let c = row_start + i;
        let mut y = 0i64;
        for col in 0..ctx.width_of(c) {
            let fx = (x + col).clamp(0, ctx.atlas_width - 1) as usize;
            y = y.max(frontline.depth[fx] - top_edge(ctx, c, col, mirrored));
        }
        ys[i] = y.max(0);
    }

    if corrected && xs.len() > 1 {
        let pairs: Vec<Option<&PairCompaction>> =
            (0..xs.len() - 1).map(|i| ctx.pairs.get(row_start + i)).collect();
        correct_y_offsets(&mut ys, &pairs);
    }
    separate_row_columns(ctx, row_start, xs, &mut ys, mirrored);

    for (i, &x) in xs.iter().enumerate() {
        let c = row_start + i;
        let w = ctx.width_of(c);
        let g2 = 2 * ctx.gutter;
        let bottoms: Vec<i64> = (0..w).map(|col| bottom_edge(ctx, c, col, mirrored)).collect();
        // Stamp the bottom profile dilated sideways by the gutter reserve:
        // later charts rising in nearby columns must clear this chart's
        // material diagonally as well as straight down.
        for fx in (x - g2).max(0)..(x + w + g2).min(ctx.atlas_width) {
            let w0 = ((fx - x - g2).max(0)) as usize;
            let w1 = ((fx - x + g2).min(w - 1)) as usize;
            let v = bottoms[w0..=w1].iter().copied().max().unwrap_or(0);
            let fx = fx as usize;
            frontline.depth[fx] = frontline.depth[fx].max(ys[i] + v);
        }
    }
    ys
}

/// Scan a committed row for its largest qualifying height drop. Heights are
/// the charts' original unscaled box heights; edges come from the committed
/// scaled placement of the taller chart.
pub fn detect_knee(
    ctx: &ScaleCtx,
    row_start: usize,
    row_end: usize,
    xs: &[i64],
    direction: RowDirection,
) -> Option<Knee> {
    let mut best: Option<(f64, usize)> = None;
    for c in row_start..row_end {
        let taller = ctx.proxies[c].height;
        let shorter = ctx.proxies[c + 1].height;
        let diff = taller - shorter;
        if diff >= KNEE_ATLAS_FRACTION * ctx.atlas_height as f64
            && diff >= KNEE_CHART_FRACTION * taller
        {
            let better = match best {
                Some((d, _)) => diff > d,
                None => true,
            };
            if better {
                best = Some((diff, c));
            }
        }
    }
    let (diff, c) = best?;
    let x = xs[c - row_start];
    Some(Knee {
        left_to_right: direction == RowDirection::LeftToRight,
        chart_left: x,
        chart_right: x + ctx.width_of(c),
        height_diff: diff,
    })
}

/// Refine the knee edges against the current frontline: the concavity grows
/// into the knee chart's columns wherever the frontline is at least as deep
/// as it is just outside the concavity edge. Returns `None` when the
/// concavity vanishes or the chart range collapses.
pub fn update_knee_location(knee: &Knee, frontline: &Frontline) -> Option<Knee> {
    let w = frontline.depth.len() as i64;
    let mut k = *knee;
    if k.left_to_right {
        if k.chart_right >= w || k.chart_right < 0 {
            return None;
        }
        let reference = frontline.depth[k.chart_right as usize];
        let mut new_loc = k.chart_left - 1;
        for x in k.chart_left.max(0)..k.chart_right {
            if frontline.depth[x as usize] >= reference {
                new_loc = new_loc.max(x);
            }
        }
        if new_loc < k.chart_left {
            return None;
        }
        k.chart_right = new_loc + 1;
    } else {
        if k.chart_left <= 0 || k.chart_left > w {
            return None;
        }
        let reference = frontline.depth[(k.chart_left - 1) as usize];
        let mut new_loc = k.chart_right;
        for x in k.chart_left..k.chart_right.min(w) {
            if frontline.depth[x as usize] >= reference {
                new_loc = new_loc.min(x);
            }
        }
        if new_loc >= k.chart_right {
            return None;
        }
        k.chart_left = new_loc;
    }
    Some(k)
}

/// One fully evaluated and selected row, ready to commit.
#[derive(Clone, Debug)]
pub struct RowOutcome {
    /// Inclusive index of the last chart in the row.
    pub row_end: usize,
    /// Final atlas x offset per chart.
    pub xs: Vec<i64>,
    /// Final atlas y offset per chart.
    pub ys: Vec<i64>,
    pub mirrored: bool,
    pub hc: bool,
    pub folded_at_knee: bool,
    pub frontline: Frontline,
    /// Max frontline depth after the row (gutter-inflated).
    pub score: i64,
    pub configs_evaluated: usize,
}

struct Candidate {
    direction: RowDirection,
    at_knee: bool,
    hc: bool,
    row_end: usize,
    xs: Vec<i64>,
    ys: Vec<i64>,
    frontline: Frontline,
    score: i64,
    score_key: i64,
}

fn eval_config(
    ctx: &ScaleCtx,
    base: &Frontline,
    row_start: usize,
    direction: RowDirection,
    fold: (i64, i64),
    at_knee: bool,
    hc: bool,
) -> Option<Candidate> {
    let (start, width) = fold;
    if width < 1 {
        return None;
    }
    let (row_end, local_xs) = fold_row(ctx, row_start, width, hc)?;
    let mirrored = direction == RowDirection::RightToLeft;
    let xs: Vec<i64> = local_xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = row_start + i;
            let x = if mirrored { width - x - ctx.width_of(c) } else { x };
            start + x
        })
        .collect();
    let mut fl = base.clone();
    let ys = push_row(ctx, &mut fl, row_start, &xs, mirrored, hc);
    let score = fl.max_depth();
    let score_key = if at_knee {
        fl.max_depth_over(start as usize..(start + width) as usize)
    } else {
        score
    };
    Some(Candidate { direction, at_knee, hc, row_end, xs, ys, frontline: fl, score, score_key })
}

/// Margin by which a knee-folded row's full-frontline depth must beat the
/// alternative to be committed: one texel.
pub const KNEE_ACCEPT_MARGIN: i64 = 1;

/// Evaluate every row configuration (direction x fold width x compaction)
/// and pick hierarchically: compaction kept only if it fits strictly more
/// charts, direction by smaller max depth over the scored columns, knee
/// folding only if it improves the full max depth by at least the margin.
///
/// `balance` disables the direction and knee axes (direction then follows
/// the row parity); `tightness` disables the compaction axis.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_row(
    ctx: &ScaleCtx,
    frontline: &Frontline,
    row_start: usize,
    knee: Option<&Knee>,
    balance: bool,
    tightness: bool,
    row_index: usize,
) -> Option<RowOutcome> {
    let directions: &[RowDirection] = if balance {
        &[RowDirection::LeftToRight, RowDirection::RightToLeft]
    } else if row_index % 2 == 0 {
        &[RowDirection::LeftToRight]
    } else {
        &[RowDirection::RightToLeft]
    };
    let hc_options: &[bool] = if !tightness {
        &[false]
    } else if balance {
        &[true, false]
    } else {
        &[true]
    };

    let mut folds: Vec<((i64, i64), bool)> = vec![((0, ctx.atlas_width), false)];
    if balance {
        if let Some(k) = knee {
            folds.push((k.concavity(ctx.atlas_width, ctx.gutter), true));
        }
    }

    let mut evaluated = 0usize;
    let mut per_fold: Vec<Option<Candidate>> = Vec::new();
    for &(fold, at_knee) in &folds {
        let mut dir_winners: Vec<Candidate> = Vec::new();
        for &dir in directions {
            // Keep compaction only when it packs strictly more charts.
            let mut best_hc: Option<Candidate> = None;
            for &hc in hc_options {
                evaluated += 1;
                let cand = eval_config(ctx, frontline, row_start, dir, fold, at_knee, hc);
                best_hc = match (best_hc, cand) {
                    (None, c) => c,
                    (c, None) => c,
                    (Some(on), Some(off)) => {
                        // hc_options lists `true` first.
                        if on.row_end > off.row_end {
                            Some(on)
                        } else {
                            Some(off)
                        }
                    }
                };
            }
            if let Some(c) = best_hc {
                dir_winners.push(c);
            }
        }
        // Smaller scored depth wins; ties go left-to-right (listed first).
        per_fold.push(dir_winners.into_iter().reduce(|a, b| {
            if b.score_key < a.score_key {
                b
            } else {
                a
            }
        }));
    }

    let atlas_cand = per_fold[0].take();
    let knee_cand = per_fold.get_mut(1).and_then(|c| c.take());
    let winner = match (atlas_cand, knee_cand) {
        (Some(a), Some(k)) => {
            if k.score <= a.score - KNEE_ACCEPT_MARGIN {
                k
            } else {
                a
            }
        }
        (Some(a), None) => a,
        (None, Some(k)) => k,
        (None, None) => return None,
    };

    Some(RowOutcome {
        row_end: winner.row_end,
        xs: winner.xs,
        ys: winner.ys,
        mirrored: winner.direction == RowDirection::RightToLeft,
        hc: winner.hc,
        folded_at_knee: winner.at_knee,
        frontline: winner.frontline,
        score: winner.score,
        configs_evaluated: evaluated,
    })
}
