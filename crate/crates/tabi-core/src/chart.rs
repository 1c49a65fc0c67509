//! Domain types: charts, chart sets, atlas parameters, placements, and pack
//! results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{triangle_area_signed, Aabb, Fraction, Point, Pose, Rotation};

/// A polygonal chart: the unit being packed. Vertices are continuous texel
/// coordinates (y down), triangles index into `vertices`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub id: u32,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
}

impl Chart {
    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Sum of absolute triangle areas.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                triangle_area_signed(
                    self.vertices[t[0] as usize],
                    self.vertices[t[1] as usize],
                    self.vertices[t[2] as usize],
                )
                .abs()
            })
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.len() < 3 {
            return Err(Error::InvalidChart {
                id: self.id,
                reason: format!("needs at least 3 vertices, has {}", self.vertices.len()),
            });
        }
        if self.triangles.is_empty() {
            return Err(Error::InvalidChart { id: self.id, reason: "has no triangles".into() });
        }
        let n = self.vertices.len() as u32;
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(Error::InvalidChart {
                    id: self.id,
                    reason: format!("triangle {i} references a vertex out of range"),
                });
            }
        }
        if !(self.area() > 0.0) {
            return Err(Error::InvalidChart { id: self.id, reason: "zero area".into() });
        }
        Ok(())
    }
}

/// A named collection of charts with ids contiguous from 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSet {
    pub name: String,
    pub charts: Vec<Chart>,
}

impl ChartSet {
    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.charts.iter().enumerate() {
            if c.id != i as u32 {
                return Err(Error::InvalidChart {
                    id: c.id,
                    reason: format!("ids must be contiguous from 0; position {i} holds id {}", c.id),
                });
            }
            c.validate()?;
        }
        Ok(())
    }
}

/// Parameters of one packing run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtlasSpec {
    /// Atlas width in texels.
    pub width: u32,
    /// Atlas height in texels.
    pub height: u32,
    /// Required empty border around each chart, in texels. Chart-to-chart
    /// distance is therefore `2 * gutter`; atlas edges need no gutter.
    pub gutter: u32,
    /// Number of discrete scale candidates `i / scale_count`, i = 1..=count.
    pub scale_count: u32,
    /// Rotate each chart by the negative of its tight-box angle first.
    pub prerotate: bool,
    /// Tallest-chart threshold (fraction of atlas height) below which packing
    /// switches to prefix-sum folding. `None` selects the default policy:
    /// 0 for sets of up to 10,000 charts, 1% above that.
    pub t_opt_fraction: Option<f64>,
    /// Local bounding-box intervals per axis (2..=64 is sensible; 10 default).
    pub local_aabb_count: u32,
}

impl AtlasSpec {
    pub fn new(width: u32, height: u32) -> Self {
        AtlasSpec {
            width,
            height,
            gutter: 1,
            scale_count: 64,
            prerotate: false,
            t_opt_fraction: None,
            local_aabb_count: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.height < 1 {
            return Err(Error::InvalidSpec("atlas dimensions must be at least 1x1".into()));
        }
        if self.scale_count < 1 {
            return Err(Error::InvalidSpec("scale_count must be at least 1".into()));
        }
        if let Some(t) = self.t_opt_fraction {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidSpec("t_opt_fraction must lie in [0, 1]".into()));
            }
        }
        if self.local_aabb_count < 1 {
            return Err(Error::InvalidSpec("local_aabb_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Effective prefix-switch threshold for a given chart count.
    pub fn effective_t_opt(&self, chart_count: usize) -> f64 {
        match self.t_opt_fraction {
            Some(t) => t,
            None => {
                if chart_count > 10_000 {
                    0.01
                } else {
                    0.0
                }
            }
        }
    }
}

/// Rigid placement of one chart inside the atlas.
///
/// The full map from an input vertex `v` to atlas coordinates is:
/// rotate by `prerotation_angle`, apply `rotation`, apply the reflections,
/// subtract the bounding-box corner of the posed chart, multiply by the
/// chart's final scale, then add `translation`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub chart_id: u32,
    pub rotation: Rotation,
    pub reflect_x: bool,
    pub reflect_y: bool,
    pub translation: (i64, i64),
    pub prerotation_angle: f64,
}

impl Placement {
    pub fn pose(&self) -> Pose {
        Pose {
            prerotation: self.prerotation_angle,
            rotation: self.rotation,
            reflect_x: self.reflect_x,
            reflect_y: self.reflect_y,
        }
    }
}

/// How a chart was folded into its row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChartMode {
    Sequential,
    Prefix,
}

/// Per-run statistics. Not serialized into result files.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PackStats {
    pub rows: u32,
    pub knees_detected: u32,
    pub knee_folds: u32,
    pub modes: Vec<ChartMode>,
    /// Peak element count of working buffers for the winning candidate,
    /// excluding the input itself. Linear in chart count plus atlas width.
    pub peak_buffer_elements: usize,
}

/// Outcome of a packing run. On failure `placements` is empty and
/// `scale_index` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct PackResult {
    pub placements: Vec<Placement>,
    pub scale_index: Option<u32>,
    pub scale_count: u32,
    /// Final scale per chart, indexed by chart id. Differs from the global
    /// scale only for prefix-folded charts.
    pub per_chart_final_scale: Vec<Fraction>,
    pub stats: PackStats,
    /// Human-readable reason when no scale candidate succeeded.
    pub diagnostic: Option<String>,
}

impl PackResult {
    pub fn is_success(&self) -> bool {
        self.scale_index.is_some()
    }

    pub fn scale_value(&self) -> f64 {
        match self.scale_index {
            Some(i) => i as f64 / self.scale_count as f64,
            None => 0.0,
        }
    }

    pub fn failure(scale_count: u32, diagnostic: String) -> Self {
        PackResult {
            placements: Vec::new(),
            scale_index: None,
            scale_count,
            per_chart_final_scale: Vec::new(),
            stats: PackStats::default(),
            diagnostic: Some(diagnostic),
        }
    }

    /// Placement for a chart id, if present.
    pub fn placement(&self, chart_id: u32) -> Option<&Placement> {
        self.placements.iter().find(|p| p.chart_id == chart_id)
    }
}

/// Vertices of a chart under its placement at its final scale.
pub fn placed_vertices(chart: &Chart, placement: &Placement, final_scale: Fraction) -> Vec<Point> {
    let pose = placement.pose();
    let (anchored, _, _) = crate::geom::pose_anchored(&chart.vertices, &pose);
    let s = final_scale.value();
    let (tx, ty) = placement.translation;
    anchored
        .into_iter()
        .map(|p| Point::new(p.x * s + tx as f64, p.y * s + ty as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_chart(id: u32) -> Chart {
        Chart {
            id,
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(4.0, 0.0),
                Point::new(4.0, 4.0),
                Point::new(0.0, 4.0),
            ],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    #[test]
    fn square_has_area_16() {
        let c = square_chart(0);
        c.validate().unwrap();
        assert_eq!(c.area(), 16.0);
    }

    #[test]
    fn rejects_bad_index() {
        let mut c = square_chart(0);
        c.triangles.push([0, 1, 9]);
        assert!(matches!(c.validate(), Err(Error::InvalidChart { .. })));
    }

    #[test]
    fn rejects_zero_area() {
        let c = Chart {
            id: 0,
            vertices: vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)],
            triangles: vec![[0, 1, 2]],
        };
        assert!(matches!(c.validate(), Err(Error::InvalidChart { .. })));
    }

    #[test]
    fn set_ids_must_be_contiguous() {
        let set = ChartSet { name: "t".into(), charts: vec![square_chart(1)] };
        assert!(set.validate().is_err());
    }

    #[test]
    fn placed_vertices_identity() {
        let c = square_chart(0);
        let p = Placement {
            chart_id: 0,
            rotation: Rotation::R0,
            reflect_x: false,
            reflect_y: false,
            translation: (3, 5),
            prerotation_angle: 0.0,
        };
        let out = placed_vertices(&c, &p, Fraction::one());
        assert_eq!(out[0], Point::new(3.0, 5.0));
        assert_eq!(out[2], Point::new(7.0, 9.0));
    }
}
