//! Loading chart sets, exporting results, and rendering packed atlases.
//!
//! The canonical interchange format is `chartset_json`:
//!
//! ```json
//! { "name": "set", "charts": [
//!     { "id": 0, "vertices": [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0]], "triangles": [[0, 1, 2]] }
//! ] }
//! ```
//!
//! OBJ ingestion is a convenience: UV islands are split by UV-space
//! connectivity (vertices welded at 1e-7) and scaled by a caller-supplied
//! texture dimension.
//!
//! Result files are line-oriented text:
//!
//! ```text
//! scale <i>/<n>
//! chart <id> rot <deg> rx <0|1> ry <0|1> tx <int> ty <int> prerot <radians> final_scale <p>/<q>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::chart::{placed_vertices, AtlasSpec, Chart, ChartSet, PackResult, PackStats, Placement};
use crate::error::{Error, Result};
use crate::geom::{Fraction, Point, Rotation};

/// Input formats accepted by [`load_chart_set`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartFormat {
    ChartsetJson,
    /// OBJ `vt`/`f` records; islands are scaled by this texture dimension.
    ObjUv { texture_dim: f64 },
}

/// Outcome of loading: the set plus the number of degenerate islands dropped.
#[derive(Clone, Debug)]
pub struct LoadedSet {
    pub set: ChartSet,
    pub dropped: usize,
}

pub fn load_chart_set(path: &Path, format: ChartFormat) -> Result<LoadedSet> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "chartset".to_string());
    match format {
        ChartFormat::ChartsetJson => parse_chartset_json(&text),
        ChartFormat::ObjUv { texture_dim } => parse_obj_uv(&text, texture_dim, name),
    }
}

pub fn parse_chartset_json(text: &str) -> Result<LoadedSet> {
    let set: ChartSet = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (set, dropped) = drop_degenerate(set)?;
    set.validate()?;
    Ok(LoadedSet { set, dropped })
}

pub fn chartset_to_json(set: &ChartSet) -> String {
    serde_json::to_string_pretty(set).expect("chart set serialization cannot fail")
}

pub fn save_chart_set(set: &ChartSet, path: &Path) -> Result<()> {
    std::fs::write(path, chartset_to_json(set))?;
    Ok(())
}

/// Drop zero-area charts and renumber ids contiguously.
fn drop_degenerate(set: ChartSet) -> Result<(ChartSet, usize)> {
    let total = set.charts.len();
    let mut kept = Vec::with_capacity(total);
    for mut c in set.charts {
        if c.vertices.len() >= 3 && !c.triangles.is_empty() && c.area() > 0.0 {
            c.id = kept.len() as u32;
            kept.push(c);
        }
    }
    let dropped = total - kept.len();
    if kept.is_empty() {
        return Err(Error::NoCharts { dropped });
    }
    Ok((ChartSet { name: set.name, charts: kept }, dropped))
}

// ---------------------------------------------------------------------------
// OBJ ingestion
// ---------------------------------------------------------------------------

const WELD_TOL: f64 = 1e-7;

fn parse_obj_uv(text: &str, texture_dim: f64, name: String) -> Result<LoadedSet> {
    let mut uvs: Vec<(f64, f64)> = Vec::new();
    // Faces as lists of vt indices (fan-triangulated below).
    let mut faces: Vec<Vec<usize>> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("vt ") {
            let mut it = rest.split_whitespace();
            let u: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("line {}: bad vt record", lineno + 1)))?;
            let v: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("line {}: bad vt record", lineno + 1)))?;
            uvs.push((u, v));
        } else if let Some(rest) = line.strip_prefix("f ") {
            let mut corners = Vec::new();
            for token in rest.split_whitespace() {
                let mut parts = token.split('/');
                let _v = parts.next();
                let vt = parts.next().and_then(|t| {
                    if t.is_empty() {
                        None
                    } else {
                        t.parse::<i64>().ok()
                    }
                });
                let vt = vt.ok_or_else(|| {
                    Error::Parse(format!("line {}: face corner '{}' has no vt index", lineno + 1, token))
                })?;
                // OBJ indices are 1-based; negative indices count from the end.
                let idx = if vt > 0 { vt as usize - 1 } else { (uvs.len() as i64 + vt) as usize };
                if idx >= uvs.len() {
                    return Err(Error::Parse(format!("line {}: vt index out of range", lineno + 1)));
                }
                corners.push(idx);
            }
            if corners.len() >= 3 {
                faces.push(corners);
            }
        }
    }

    if faces.is_empty() {
        return Err(Error::NoCharts { dropped: 0 });
    }

    // Weld vt records that coincide within tolerance, then union faces that
    // share a welded vertex.
    let welded = weld_positions(&uvs);
    let weld_count = welded.iter().copied().max().map_or(0, |m| m + 1);
    let mut uf = UnionFind::new(weld_count);
    for face in &faces {
        for w in face.windows(2) {
            uf.union(welded[w[0]], welded[w[1]]);
        }
        if face.len() > 1 {
            uf.union(welded[face[0]], welded[*face.last().unwrap()]);
        }
    }

    // Group faces by island root, in first-encounter order.
    let mut island_of_root: Vec<(usize, usize)> = Vec::new(); // (root, island index)
    let mut island_faces: Vec<Vec<usize>> = Vec::new();
    for (fi, face) in faces.iter().enumerate() {
        let root = uf.find(welded[face[0]]);
        let island = match island_of_root.iter().find(|(r, _)| *r == root) {
            Some((_, i)) => *i,
            None => {
                island_of_root.push((root, island_faces.len()));
                island_faces.push(Vec::new());
                island_faces.len() - 1
            }
        };
        island_faces[island].push(fi);
    }

    let mut charts = Vec::new();
    for face_ids in &island_faces {
        let mut local_index: Vec<Option<u32>> = vec![None; weld_count];
        let mut vertices: Vec<Point> = Vec::new();
        let mut triangles: Vec<[u32; 3]> = Vec::new();
        for &fi in face_ids {
            let face = &faces[fi];
            let mut mapped = Vec::with_capacity(face.len());
            for &corner in face {
                let w = welded[corner];
                let idx = match local_index[w] {
                    Some(i) => i,
                    None => {
                        let (u, v) = uvs[corner];
                        let i = vertices.len() as u32;
                        vertices.push(Point::new(u * texture_dim, v * texture_dim));
                        local_index[w] = Some(i);
                        i
                    }
                };
                mapped.push(idx);
            }
            for t in 1..mapped.len() - 1 {
                triangles.push([mapped[0], mapped[t], mapped[t + 1]]);
            }
        }
        charts.push(Chart { id: charts.len() as u32, vertices, triangles });
    }

    let set = ChartSet { name, charts };
    let (set, dropped) = drop_degenerate(set)?;
    set.validate()?;
    Ok(LoadedSet { set, dropped })
}

/// Map each position to a representative index, merging positions within
/// `WELD_TOL` (Chebyshev) of each other via a quantized grid.
fn weld_positions(uvs: &[(f64, f64)]) -> Vec<usize> {
    use std::collections::HashMap;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut rep: Vec<usize> = Vec::with_capacity(uvs.len());
    let cell = |x: f64| (x / WELD_TOL).round() as i64;
    for (i, &(u, v)) in uvs.iter().enumerate() {
        let (cu, cv) = (cell(u), cell(v));
        let mut found = None;
        'search: for du in -1..=1 {
            for dv in -1..=1 {
                if let Some(cands) = grid.get(&(cu + du, cv + dv)) {
                    for &j in cands {
                        let (ju, jv) = uvs[j];
                        if (ju - u).abs() <= WELD_TOL && (jv - v).abs() <= WELD_TOL {
                            found = Some(rep[j]);
                            break 'search;
                        }
                    }
                }
            }
        }
        let r = found.unwrap_or(i);
        rep.push(r);
        grid.entry((cu, cv)).or_default().push(i);
    }
    // Compact representatives to 0..m.
    let mut remap: Vec<Option<usize>> = vec![None; uvs.len()];
    let mut next = 0usize;
    rep.iter()
        .map(|&r| {
            *remap[r].get_or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

// ---------------------------------------------------------------------------
// Result files
// ---------------------------------------------------------------------------

pub fn result_to_string(result: &PackResult) -> Result<String> {
    let index = result.scale_index.ok_or(Error::FailedResult)?;
    let mut out = String::new();
    writeln!(out, "scale {}/{}", index, result.scale_count).unwrap();
    let mut placements: Vec<&Placement> = result.placements.iter().collect();
    placements.sort_by_key(|p| p.chart_id);
    for p in placements {
        let fs = result.per_chart_final_scale[p.chart_id as usize];
        writeln!(
            out,
            "chart {} rot {} rx {} ry {} tx {} ty {} prerot {} final_scale {}/{}",
            p.chart_id,
            p.rotation.degrees(),
            p.reflect_x as u8,
            p.reflect_y as u8,
            p.translation.0,
            p.translation.1,
            p.prerotation_angle,
            fs.num,
            fs.den
        )
        .unwrap();
    }
    Ok(out)
}

pub fn export_result(result: &PackResult, path: &Path) -> Result<()> {
    let text = result_to_string(result)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn result_from_string(text: &str) -> Result<PackResult> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Parse("empty result file".into()))?;
    let (index, count) = head
        .strip_prefix("scale ")
        .and_then(|r| r.split_once('/'))
        .and_then(|(a, b)| Some((a.trim().parse::<u32>().ok()?, b.trim().parse::<u32>().ok()?)))
        .ok_or_else(|| Error::Parse(format!("bad scale line: '{head}'")))?;

    let mut placements = Vec::new();
    let mut scales = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 16 || toks[0] != "chart" {
            return Err(Error::Parse(format!("bad chart line: '{line}'")));
        }
        let field = |key: &str, pos: usize| -> Result<&str> {
            if toks[pos] != key {
                return Err(Error::Parse(format!("expected '{key}' in '{line}'")));
            }
            Ok(toks[pos + 1])
        };
        let chart_id: u32 = toks[1].parse().map_err(|_| Error::Parse(format!("bad id in '{line}'")))?;
        let deg: u32 = field("rot", 2)?.parse().map_err(|_| Error::Parse("bad rot".into()))?;
        let rotation = Rotation::from_degrees(deg)
            .ok_or_else(|| Error::Parse(format!("rotation must be a multiple of 90, got {deg}")))?;
        let rx = field("rx", 4)? == "1";
        let ry = field("ry", 6)? == "1";
        let tx: i64 = field("tx", 8)?.parse().map_err(|_| Error::Parse("bad tx".into()))?;
        let ty: i64 = field("ty", 10)?.parse().map_err(|_| Error::Parse("bad ty".into()))?;
        let prerot: f64 = field("prerot", 12)?.parse().map_err(|_| Error::Parse("bad prerot".into()))?;
        let fs = field("final_scale", 14)?;
        let (p, q) = fs
            .split_once('/')
            .and_then(|(a, b)| Some((a.parse::<u64>().ok()?, b.parse::<u64>().ok()?)))
            .ok_or_else(|| Error::Parse(format!("bad final_scale in '{line}'")))?;
        if chart_id as usize != placements.len() {
            return Err(Error::Parse("chart lines must be ordered by id from 0".into()));
        }
        placements.push(Placement {
            chart_id,
            rotation,
            reflect_x: rx,
            reflect_y: ry,
            translation: (tx, ty),
            prerotation_angle: prerot,
        });
        scales.push(Fraction::new(p, q));
    }

    Ok(PackResult {
        placements,
        scale_index: Some(index),
        scale_count: count,
        per_chart_final_scale: scales,
        stats: PackStats::default(),
        diagnostic: None,
    })
}

pub fn import_result(path: &Path) -> Result<PackResult> {
    result_from_string(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

/// Render a packed atlas as an SVG document: the atlas border plus one
/// filled polygon per chart, colored stably by chart id.
pub fn render_atlas_svg(set: &ChartSet, result: &PackResult, spec: &AtlasSpec) -> Result<String> {
    if !result.is_success() {
        return Err(Error::FailedResult);
    }
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#,
        w = spec.width,
        h = spec.height
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect x="0" y="0" width="{}" height="{}" fill="#ffffff" stroke="#222222" stroke-width="0.5"/>"##,
        spec.width, spec.height
    )
    .unwrap();
    for p in &result.placements {
        let chart = set
            .charts
            .get(p.chart_id as usize)
            .filter(|c| c.id == p.chart_id)
            .ok_or_else(|| Error::ChartIdMismatch(format!("placement for unknown chart {}", p.chart_id)))?;
        let fs = result.per_chart_final_scale[p.chart_id as usize];
        let verts = placed_vertices(chart, p, fs);
        let mut points = String::new();
        for v in &verts {
            let _ = write!(points, "{},{} ", v.x, v.y);
        }
        // Golden-angle hue walk keeps neighboring ids distinguishable.
        let hue = (p.chart_id as f64 * 137.508) % 360.0;
        writeln!(
            out,
            r##"<polygon points="{}" fill="hsl({:.1},70%,60%)" stroke="#333333" stroke-width="0.25"/>"##,
            points.trim_end(),
            hue
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
