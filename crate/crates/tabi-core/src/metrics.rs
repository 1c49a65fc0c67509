//! Packing quality: L2 stretch between packed and input triangles.
//!
//! Per triangle, the affine map from the packed triangle back to the input
//! triangle has singular values s1, s2; the triangle's stretch is
//! sqrt((s1^2 + s2^2) / 2), which equals sqrt(||M||_F^2 / 2). Triangles are
//! aggregated by input area: sqrt(sum(stretch^2 * A) / sum(A)). A stretch of
//! 1 means no downscaling.

use crate::chart::{placed_vertices, ChartSet, PackResult};
use crate::error::{Error, Result};
use crate::geom::{triangle_area_signed, Point};

/// Stretch summary for one packing.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchReport {
    pub l2_stretch: f64,
    /// Indexed by chart id.
    pub per_chart_stretch: Vec<f64>,
    /// Fraction of atlas texels covered; filled by the validation pass when
    /// requested together.
    pub occupancy: Option<f64>,
}

/// Frobenius norm squared of the affine map taking packed triangle (q) to
/// input triangle (p).
fn packed_to_input_frob2(p: [Point; 3], q: [Point; 3], chart_id: u32, tri: usize) -> Result<f64> {
    let (qx1, qy1) = (q[1].x - q[0].x, q[1].y - q[0].y);
    let (qx2, qy2) = (q[2].x - q[0].x, q[2].y - q[0].y);
    let det = qx1 * qy2 - qx2 * qy1;
    if det == 0.0 {
        return Err(Error::DegenerateTriangle { id: chart_id, tri });
    }
    let (px1, py1) = (p[1].x - p[0].x, p[1].y - p[0].y);
    let (px2, py2) = (p[2].x - p[0].x, p[2].y - p[0].y);
    // M = P * Q^-1 with column vectors of the edge matrices.
    let inv = 1.0 / det;
    let a = (px1 * qy2 - px2 * qy1) * inv;
    let b = (px2 * qx1 - px1 * qx2) * inv;
    let c = (py1 * qy2 - py2 * qy1) * inv;
    let d = (py2 * qx1 - py1 * qx2) * inv;
    Ok(a * a + b * b + c * c + d * d)
}

/// Area-weighted L2 stretch of a packing, overall and per chart.
pub fn l2_stretch(set: &ChartSet, result: &PackResult) -> Result<StretchReport> {
    if !result.is_success() {
        return Err(Error::FailedResult);
    }
    let mut total_w = 0.0;
    let mut total_sum = 0.0;
    let mut per_chart = Vec::with_capacity(set.charts.len());
    for chart in &set.charts {
        let placement = result
            .placement(chart.id)
            .ok_or_else(|| Error::ChartIdMismatch(format!("chart {} missing placement", chart.id)))?;
        let fs = result.per_chart_final_scale[chart.id as usize];
        let packed = placed_vertices(chart, placement, fs);
        let mut w = 0.0;
        let mut sum = 0.0;
        for (ti, t) in chart.triangles.iter().enumerate() {
            let p = [chart.vertices[t[0] as usize], chart.vertices[t[1] as usize], chart.vertices[t[2] as usize]];
            let q = [packed[t[0] as usize], packed[t[1] as usize], packed[t[2] as usize]];
            let frob2 = packed_to_input_frob2(p, q, chart.id, ti)?;
            let area = triangle_area_signed(p[0], p[1], p[2]).abs();
            // stretch^2 = frob^2 / 2
            sum += 0.5 * frob2 * area;
            w += area;
        }
        per_chart.push(if w > 0.0 { (sum / w).sqrt() } else { 1.0 });
        total_sum += sum;
        total_w += w;
    }
    Ok(StretchReport {
        l2_stretch: if total_w > 0.0 { (total_sum / total_w).sqrt() } else { 1.0 },
        per_chart_stretch: per_chart,
        occupancy: None,
    })
}
