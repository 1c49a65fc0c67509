//! Top-level packing: optional pre-rotation, discrete scale search,
//! row-by-row packing per scale, and the prefix-sum fast path for the small
//! charts of large inputs.

use rayon::prelude::*;

use crate::chart::{
    AtlasSpec, ChartMode, ChartSet, PackResult, PackStats, Placement,
};
use crate::compact::{compact_pair, PairCompaction};
use crate::error::{Error, Result};
use crate::geom::{pose_anchored, Fraction, Pose, Rotation};
use crate::proxies::{build_proxies, compute_obb, ChartProxy, OrientationFlags};
use crate::rowpack::{
    detect_knee, evaluate_row, push_row, update_knee_location, Frontline, Knee, RowDirection,
    ScaleCtx,
};

/// Feature toggles. Both on is the full packer; disabling one isolates the
/// other's contribution. With both off the packer degenerates to the classic
/// bounding-box fold-and-push baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackOptions {
    /// Shape proxies: chart orientation, horizontal compacting, and
    /// proxy-boundary pushing. Off = plain bounding boxes.
    pub tightness: bool,
    /// Dynamic row placement: per-row direction choice and knee folding.
    /// Off = strict direction alternation at full atlas width.
    pub balance: bool,
    /// Permit the prefix-sum fast path (governed by the spec's t_opt).
    pub hybrid: bool,
}

impl Default for PackOptions {
    fn default() -> Self {
        PackOptions { tightness: true, balance: true, hybrid: true }
    }
}

/// Rotate each chart by the negative of its approximate-OBB angle so the
/// selected box becomes axis-aligned. Returns per-chart angles (radians).
pub fn prerotation_angles(set: &ChartSet) -> Vec<f64> {
    set.charts
        .par_iter()
        .map(|c| -compute_obb(&c.vertices).angle)
        .collect()
}

/// Chart placed at one scale, in sorted order.
#[derive(Clone, Debug)]
struct RawPlacement {
    sorted_idx: usize,
    x: i64,
    y: i64,
    mirrored: bool,
    mode: ChartMode,
    final_scale: Fraction,
}

#[derive(Clone, Debug)]
struct ScaleCandidate {
    index: u32,
    placements: Vec<RawPlacement>,
    rows: u32,
    knees_detected: u32,
    knee_folds: u32,
    /// Area-weighted average final scale (equals the scale value when no
    /// chart took the prefix path).
    weighted_final_scale: f64,
    peak_buffer_elements: usize,
}

/// Everything shared across scale candidates for one packing run.
struct PackJob<'a> {
    proxies: Vec<ChartProxy>,
    pairs: Vec<PairCompaction>,
    spec: &'a AtlasSpec,
    options: PackOptions,
    t_opt: f64,
    total_area: f64,
}

/// Pack with the full feature set.
pub fn pack(set: &ChartSet, spec: &AtlasSpec) -> Result<PackResult> {
    pack_with_options(set, spec, PackOptions::default())
}

/// Pack with explicit feature toggles.
pub fn pack_with_options(set: &ChartSet, spec: &AtlasSpec, options: PackOptions) -> Result<PackResult> {
    spec.validate()?;
    set.validate()?;
    if set.charts.is_empty() {
        return Err(Error::EmptySet);
    }

    let prerotations = if spec.prerotate {
        prerotation_angles(set)
    } else {
        vec![0.0; set.charts.len()]
    };

    let mut proxies = build_proxies(set, spec, &prerotations);
    if !options.tightness {
        // Bounding-box mode: no reflections, boxes only.
        for p in &mut proxies {
            p.flags = OrientationFlags::default();
        }
    }

    let pairs: Vec<PairCompaction> = if options.tightness {
        (0..proxies.len().saturating_sub(1))
            .into_par_iter()
            .map(|i| compact_pair(&proxies[i], &proxies[i + 1]))
            .collect()
    } else {
        vec![PairCompaction::none(); proxies.len().saturating_sub(1)]
    };

    let t_opt = if options.hybrid { spec.effective_t_opt(set.charts.len()) } else { 0.0 };
    let total_area: f64 = proxies.iter().map(|p| p.area).sum();
    let job = PackJob { proxies, pairs, spec, options, t_opt, total_area };

    let candidates: Vec<Option<ScaleCandidate>> = (1..=spec.scale_count)
        .into_par_iter()
        .map(|i| pack_at_scale(&job, i))
        .collect();

    let winner = select_candidate(candidates, job.t_opt > 0.0);
    let Some(win) = winner else {
        let widest = job
            .proxies
            .iter()
            .max_by(|a, b| a.width.partial_cmp(&b.width).unwrap())
            .expect("nonempty");
        let min_scale = 1.0 / spec.scale_count as f64;
        return Ok(PackResult::failure(
            spec.scale_count,
            format!(
                "no scale fits: widest chart {} spans {:.1} texels ({} at scale 1/{}) against atlas width {}",
                widest.chart_id,
                widest.width,
                (widest.width * min_scale).ceil() as i64,
                spec.scale_count,
                spec.width
            ),
        ));
    };

    Ok(assemble_result(set, &job, win, &prerotations))
}

/// Largest successful index in sequential mode; best area-weighted final
/// scale (ties toward the larger index) when the prefix path is in play.
fn select_candidate(
    candidates: Vec<Option<ScaleCandidate>>,
    hybrid: bool,
) -> Option<ScaleCandidate> {
    let mut best: Option<ScaleCandidate> = None;
    for cand in candidates.into_iter().flatten() {
        best = Some(match best {
            None => cand,
            Some(b) => {
                let better = if hybrid {
                    (cand.weighted_final_scale, cand.index) > (b.weighted_final_scale, b.index)
                } else {
                    cand.index > b.index
                };
                if better {
                    cand
                } else {
                    b
                }
            }
        });
    }
    best
}

fn assemble_result(
    set: &ChartSet,
    job: &PackJob,
    win: ScaleCandidate,
    prerotations: &[f64],
) -> PackResult {
    let n = set.charts.len();
    let mut placements = vec![None; n];
    let mut scales = vec![Fraction::one(); n];
    let mut modes = vec![ChartMode::Sequential; n];
    for rp in &win.placements {
        let proxy = &job.proxies[rp.sorted_idx];
        let id = proxy.chart_id as usize;
        placements[id] = Some(Placement {
            chart_id: proxy.chart_id,
            rotation: if proxy.rotated_90 { Rotation::R90 } else { Rotation::R0 },
            reflect_x: proxy.flags.reflect_x ^ rp.mirrored,
            reflect_y: proxy.flags.reflect_y,
            translation: (rp.x, rp.y),
            prerotation_angle: prerotations[id],
        });
        scales[id] = rp.final_scale;
        modes[id] = rp.mode;
    }
    PackResult {
        placements: placements.into_iter().map(|p| p.expect("every chart placed")).collect(),
        scale_index: Some(win.index),
        scale_count: job.spec.scale_count,
        per_chart_final_scale: scales,
        stats: PackStats {
            rows: win.rows,
            knees_detected: win.knees_detected,
            knee_folds: win.knee_folds,
            modes,
            peak_buffer_elements: win.peak_buffer_elements,
        },
        diagnostic: None,
    }
}

/// Should packing hand the remaining charts to the prefix path? True when no
/// knee is pending and the next row's tallest chart falls below the
/// threshold fraction of the atlas height.
pub fn should_switch_to_prefix(
    tallest_scaled_height: f64,
    t_opt_fraction: f64,
    atlas_height: u32,
    pending_knee: bool,
) -> bool {
    t_opt_fraction > 0.0
        && !pending_knee
        && tallest_scaled_height < t_opt_fraction * atlas_height as f64
}

/// Pack every chart at one scale factor; `None` on overflow.
fn pack_at_scale(job: &PackJob, scale_index: u32) -> Option<ScaleCandidate> {
    let spec = job.spec;
    let scale = scale_index as f64 / spec.scale_count as f64;
    let base_fraction = Fraction::new(scale_index as u64, spec.scale_count as u64);
    let ctx = ScaleCtx::new(&job.proxies, &job.pairs, spec, scale, !job.options.tightness);
    let n = ctx.chart_count();
    let height_limit = spec.height as i64 + 2 * spec.gutter as i64;

    let mut frontline = Frontline::new(spec.width);
    let mut placements: Vec<RawPlacement> = Vec::with_capacity(n);
    let mut knee: Option<Knee> = None;
    let mut row_start = 0usize;
    let mut row_index = 0usize;
    let mut rows = 0u32;
    let mut knees_detected = 0u32;
    let mut knee_folds = 0u32;
    let mut prefix_from: Option<usize> = None;
    let mut max_configs = 0usize;

    while row_start < n {
        if let Some(k) = knee.take() {
            knee = update_knee_location(&k, &frontline);
        }
        if should_switch_to_prefix(
            job.proxies[row_start].height * scale,
            job.t_opt,
            spec.height,
            knee.is_some(),
        ) {
            prefix_from = Some(row_start);
            break;
        }
        let out = evaluate_row(
            &ctx,
            &frontline,
            row_start,
            knee.as_ref(),
            job.options.balance,
            job.options.tightness,
            row_index,
        )?;
        max_configs = max_configs.max(out.configs_evaluated);
        if out.score > height_limit {
            return None;
        }
        for (i, (&x, &y)) in out.xs.iter().zip(&out.ys).enumerate() {
            placements.push(RawPlacement {
                sorted_idx: row_start + i,
                x,
                y,
                mirrored: out.mirrored,
                mode: ChartMode::Sequential,
                final_scale: base_fraction,
            });
        }
        frontline = out.frontline;
        if out.folded_at_knee {
            knee_folds += 1;
        } else if job.options.balance {
            knee = detect_knee(
                &ctx,
                row_start,
                out.row_end,
                &out.xs,
                if out.mirrored { RowDirection::RightToLeft } else { RowDirection::LeftToRight },
            );
            if knee.is_some() {
                knees_detected += 1;
            }
        }
        row_start = out.row_end + 1;
        row_index += 1;
        rows += 1;
    }

    if let Some(start) = prefix_from {
        rows += prefix_fold_remaining(
            job,
            &ctx,
            &mut frontline,
            start,
            base_fraction,
            height_limit,
            &mut placements,
        )?;
    }

    // Working set: offsets and placements linear in chart count, frontlines
    // linear in atlas width (one live plus per-configuration copies).
    let peak_buffer_elements = 4 * n + (max_configs.max(1) + 1) * spec.width as usize;

    let weighted_final_scale = if job.total_area > 0.0 {
        placements
            .iter()
            .map(|rp| job.proxies[rp.sorted_idx].area * rp.final_scale.value())
            .sum::<f64>()
            / job.total_area
    } else {
        scale
    };

    Some(ScaleCandidate {
        index: scale_index,
        placements,
        rows,
        knees_detected,
        knee_folds,
        weighted_final_scale,
        peak_buffer_elements,
    })
}

/// Fold all remaining charts in one pass: prefix-sum their horizontal
/// advances, cut rows at multiples of the atlas width, downscale each row
/// just enough to fit, and push rows with the fixed 1 left-to-right /
/// 2 right-to-left alternation. Returns the number of rows placed.
fn prefix_fold_remaining(
    job: &PackJob,
    base_ctx: &ScaleCtx,
    frontline: &mut Frontline,
    start: usize,
    base_fraction: Fraction,
    height_limit: i64,
    placements: &mut Vec<RawPlacement>,
) -> Option<u32> {
    let spec = job.spec;
    let n = base_ctx.chart_count();
    if start >= n {
        return Some(0);
    }
    let atlas_w = spec.width as i64;

    // Row membership from the base-scale prefix sums of advances: chart c
    // lands in row floor(x_c / atlas_width).
    let mut rows: Vec<(usize, usize)> = Vec::new(); // [begin, end) in sorted indices
    {
        let mut begin = start;
        let mut prev_k = 0i64;
        let mut x: i64 = 0;
        for c in start..n {
            let k = x / atlas_w;
            if c == start {
                prev_k = k;
            }
            if k != prev_k {
                rows.push((begin, c));
                begin = c;
                prev_k = k;
            }
            x += base_ctx.advance(c, true).max(0);
        }
        rows.push((begin, n));
    }

    // Intermediate downscales are quantized to this denominator so the
    // shrink-until-fit loop stays exact and cannot overflow.
    const INTERMEDIATE_DEN: u64 = 4096;

    let mut rows_placed = 0u32;
    for (r, &(begin, end)) in rows.iter().enumerate() {
        // Requantize the row until its extent fits the atlas width.
        let mut num = INTERMEDIATE_DEN;
        let mut frac;
        let (mut xs_local, mut extent);
        loop {
            frac = Fraction::new(num, INTERMEDIATE_DEN);
            let row_scale = base_ctx.scale * frac.value();
            let row_ctx = ScaleCtx::new(&job.proxies, &job.pairs, spec, row_scale, base_ctx.box_only);
            xs_local = Vec::with_capacity(end - begin);
            extent = 0i64;
            let mut x = 0i64;
            for c in begin..end {
                x = x.max(0);
                xs_local.push(x);
                extent = extent.max(x + row_ctx.width_of(c));
                x += row_ctx.advance(c, true);
            }
            if extent <= atlas_w {
                break;
            }
            // Shrink proportionally, at least one quantum.
            let next = num * atlas_w as u64 / extent as u64;
            num = next.min(num - 1);
            if num == 0 {
                return None;
            }
        }

        let row_scale = base_ctx.scale * frac.value();
        let row_ctx = ScaleCtx::new(&job.proxies, &job.pairs, spec, row_scale, base_ctx.box_only);
        // FastAtlas alternation: one left-to-right row, two right-to-left.
        let mirrored = r % 3 != 0;
        let xs: Vec<i64> = xs_local
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = begin + i;
                if mirrored {
                    atlas_w - x - row_ctx.width_of(c)
                } else {
                    x
                }
            })
            .collect();
        let ys = push_row(&row_ctx, frontline, begin, &xs, mirrored, true);
        if frontline.max_depth() > height_limit {
            return None;
        }
        let final_scale = base_fraction.mul(frac);
        for (i, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            placements.push(RawPlacement {
                sorted_idx: begin + i,
                x,
                y,
                mirrored,
                mode: ChartMode::Prefix,
                final_scale,
            });
        }
        rows_placed += 1;
    }
    Some(rows_placed)
}

/// Evaluate one scale candidate in isolation: true when packing succeeds at
/// `scale_index / spec.scale_count` with the full feature set.
pub fn try_scale(set: &ChartSet, spec: &AtlasSpec, scale_index: u32) -> Result<bool> {
    spec.validate()?;
    set.validate()?;
    if set.charts.is_empty() {
        return Err(Error::EmptySet);
    }
    let options = PackOptions::default();
    let prerotations = if spec.prerotate {
        prerotation_angles(set)
    } else {
        vec![0.0; set.charts.len()]
    };
    let proxies = build_proxies(set, spec, &prerotations);
    let pairs: Vec<PairCompaction> = (0..proxies.len().saturating_sub(1))
        .map(|i| compact_pair(&proxies[i], &proxies[i + 1]))
        .collect();
    let t_opt = spec.effective_t_opt(set.charts.len());
    let total_area: f64 = proxies.iter().map(|p| p.area).sum();
    let job = PackJob { proxies, pairs, spec, options, t_opt, total_area };
    Ok(pack_at_scale(&job, scale_index).is_some())
}

/// Reference bounding-box fold-and-push packer: quarter-turn normalization,
/// height sort, greedy folding at atlas width with gutter spacing, strict
/// row direction alternation, and box push-up. Same scale search as the
/// full packer.
pub fn chameleon_pack(set: &ChartSet, spec: &AtlasSpec) -> Result<PackResult> {
    pack_with_options(
        set,
        spec,
        PackOptions { tightness: false, balance: false, hybrid: false },
    )
}

/// Scaled box extents of a chart under a placement pose, for callers that
/// need the quantized footprint (width, height) at a given scale.
pub fn scaled_extents(set: &ChartSet, placement: &Placement, scale: f64) -> (i64, i64) {
    let chart = &set.charts[placement.chart_id as usize];
    let pose = Pose {
        prerotation: placement.prerotation_angle,
        rotation: placement.rotation,
        reflect_x: placement.reflect_x,
        reflect_y: placement.reflect_y,
    };
    let (_, w, h) = pose_anchored(&chart.vertices, &pose);
    ((w * scale).ceil() as i64, (h * scale).ceil() as i64)
}
